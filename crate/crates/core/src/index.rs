/// Row-major mixed-radix index, last digit fastest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixedRadix {
    radix: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl MixedRadix {
    pub fn new(radix: Vec<usize>) -> Self {
        let mut strides = vec![1; radix.len()];
        let mut acc = 1usize;
        for i in (0..radix.len()).rev() {
            strides[i] = acc;
            acc = acc.saturating_mul(radix[i]);
        }
        Self {
            radix,
            strides,
            len: acc,
        }
    }

    /// Total number of flat indices.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn radix(&self) -> &[usize] {
        &self.radix
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.radix.len());
        digits
            .iter()
            .zip(&self.strides)
            .map(|(d, s)| d * s)
            .sum()
    }

    #[inline]
    pub fn digit(&self, flat: usize, axis: usize) -> usize {
        (flat / self.strides[axis]) % self.radix[axis]
    }

    pub fn decode_into(&self, mut flat: usize, out: &mut [usize]) {
        for (i, s) in self.strides.iter().enumerate() {
            out[i] = flat / s;
            flat %= s;
        }
    }

    pub fn decode(&self, flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.radix.len()];
        self.decode_into(flat, &mut out);
        out
    }

    /// `flat` with digit `axis` replaced by `value`.
    #[inline]
    pub fn replace(&self, flat: usize, axis: usize, value: usize) -> usize {
        let old = self.digit(flat, axis);
        flat - old * self.strides[axis] + value * self.strides[axis]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        let r = MixedRadix::new(vec![2, 3, 4]);
        assert_eq!(r.len(), 24);
        for f in 0..24 {
            assert_eq!(r.encode(&r.decode(f)), f);
        }
        assert_eq!(r.encode(&[1, 2, 3]), 23);
        assert_eq!(r.digit(23, 1), 2);
        assert_eq!(r.replace(23, 0, 0), 11);
    }

    #[test]
    fn empty_radix_has_one_index() {
        let r = MixedRadix::new(vec![]);
        assert_eq!(r.len(), 1);
        assert_eq!(r.encode(&[]), 0);
    }
}

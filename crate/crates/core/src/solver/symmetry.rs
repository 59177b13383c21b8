use std::collections::BTreeMap;

use crate::model::ProblemSpec;
use crate::scalar::Scalar;

/// Kernel columns grouped by (sorted message multiset, u⁰), when every agent
/// shares one message space. Groups are ordered by key.
pub fn message_orbits<S: Scalar>(spec: &ProblemSpec<S>, t: usize) -> Option<Vec<(Vec<usize>, Vec<usize>)>> {
    let k = spec.num_agents;
    let sizes: Vec<usize> = spec.spaces.messages.iter().map(|m| m[t]).collect();
    if k < 2 || sizes.iter().any(|s| *s != sizes[0]) {
        return None;
    }
    let kr = spec.kernel_radix(t);
    let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    let mut digits = vec![0; k + 1];
    for d in 0..kr.len() {
        kr.decode_into(d, &mut digits);
        // Key: u⁰ first, then how many agents got each message.
        let mut key = vec![digits[k]];
        let mut counts = vec![0; sizes[0]];
        for m in &digits[..k] {
            counts[*m] += 1;
        }
        key.extend(counts);
        groups.entry(key).or_default().push(d);
    }
    Some(groups.into_iter().collect())
}

/// Average of `kernel` over all permutations of the agents, or `None` when
/// the agents are not interchangeable at time t.
pub fn orbit_average<S: Scalar>(spec: &ProblemSpec<S>, t: usize, kernel: &[Vec<S>]) -> Option<Vec<Vec<S>>> {
    let orbits = message_orbits(spec, t)?;
    let mut out = kernel.to_vec();
    for row in out.iter_mut() {
        for (_, cols) in &orbits {
            let mean = cols.iter().map(|&d| row[d]).sum::<S>() / S::from_usize(cols.len()).unwrap();
            for &d in cols {
                row[d] = mean;
            }
        }
    }
    Some(out)
}

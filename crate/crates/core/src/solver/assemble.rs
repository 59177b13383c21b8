//! Node LP assembly: η terms, incentive inequalities and value equalities.
//!
//! η(x, p, m, u⁰, n) = Q(n)·π(x, p)·g(m, u⁰ | p⁰) is linear in the kernel, so
//! the kernel rows are the decision variables and every η appears only as a
//! constant times one kernel entry.

use crate::beliefs::CommonNode;
use crate::error::{Error, Result};
use crate::index::MixedRadix;
use crate::lp::{LinearProgram, ToleranceConfig};
use crate::model::ProblemSpec;
use crate::scalar::Scalar;

/// W^i and V per node of one level, indexed by node index.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueTable<S> {
    /// `[node][agent]`
    pub w: Vec<Vec<S>>,
    pub v: Vec<S>,
}

/// Everything needed to assemble one node's LP.
pub struct NodeContext<'a, S> {
    pub spec: &'a ProblemSpec<S>,
    pub node: &'a CommonNode<S>,
    /// Values of the next level; `None` at the last time.
    pub next: Option<&'a ValueTable<S>>,
    pub t: usize,
    pub br: MixedRadix,
    pub ar: MixedRadix,
    pub kr: MixedRadix,
    targets: Vec<&'a [usize]>,
    h0: Option<&'a [usize]>,
}

impl<'a, S: Scalar> NodeContext<'a, S> {
    pub fn new(spec: &'a ProblemSpec<S>, node: &'a CommonNode<S>, next: Option<&'a ValueTable<S>>) -> Self {
        let t = node.time;
        let targets = spec
            .targets
            .iter()
            .map(|h| h.table(t, &node.node_key, &node.belief_key))
            .collect();
        let h0 = spec
            .h0
            .as_ref()
            .filter(|_| spec.fixed_action())
            .map(|h| h.table(t, &node.node_key, &node.belief_key));
        Self {
            spec,
            node,
            next,
            t,
            br: spec.belief_radix(t),
            ar: spec.action_radix(t),
            kr: spec.kernel_radix(t),
            targets,
            h0,
        }
    }

    pub fn num_agents(&self) -> usize {
        self.spec.num_agents
    }

    /// Rows of the kernel (one per p⁰).
    pub fn kernel_rows(&self) -> usize {
        self.spec.spaces.private[0][self.t]
    }

    /// Columns of the kernel (message profiles, times u⁰ unless fixed).
    pub fn kernel_cols(&self) -> usize {
        self.kr.len()
    }

    pub fn kernel_vars(&self) -> usize {
        self.kernel_rows() * self.kernel_cols()
    }

    /// Target action profile for belief index `b` and kernel column `d`.
    pub fn target_action(&self, b: usize, d: usize) -> usize {
        let k = self.num_agents();
        let u0 = match self.h0 {
            Some(h0) => h0[self.br.digit(b, 1)],
            None => self.kr.digit(d, k),
        };
        let mut a = u0 * self.ar.stride(0);
        for i in 0..k {
            let m = self.kr.digit(d, i);
            let p = self.br.digit(b, i + 2);
            let p_size = self.spec.spaces.private[i + 1][self.t];
            let u = self.targets[i][m * p_size + p];
            a += u * self.ar.stride(i + 1);
        }
        a
    }

    /// Target action of agent `i` (0-based) for message `m` and private `p`.
    pub fn target_of(&self, i: usize, m: usize, p: usize) -> usize {
        self.targets[i][m * self.spec.spaces.private[i + 1][self.t] + p]
    }

    pub fn reward(&self, player: usize, b: usize, a: usize) -> S {
        let x = self.br.digit(b, 0);
        self.spec.rewards[self.t][player][x * self.ar.len() + a]
    }

    /// Child index reached from (b, a, n); `None` at the last time.
    pub fn child(&self, b: usize, a: usize, n: usize) -> Result<Option<usize>> {
        if self.next.is_none() {
            return Ok(None);
        }
        let nlen = self.spec.spaces.noise[self.t];
        let z = self.spec.zeta[self.t][(b * self.ar.len() + a) * nlen + n];
        match self.node.child(z) {
            Some(c) => Ok(Some(c)),
            None => Err(Error::UnknownNode(format!(
                "increment {z} missing below node {}",
                self.node.node_key
            ))),
        }
    }

    /// Next-level value of `player` (0 = designer) through (b, a, n).
    pub fn continuation(&self, player: usize, b: usize, a: usize, n: usize) -> Result<S> {
        Ok(match (self.child(b, a, n)?, self.next) {
            (Some(c), Some(next)) => {
                if player == 0 {
                    next.v[c]
                } else {
                    next.w[c][player - 1]
                }
            }
            _ => S::zero(),
        })
    }
}

/// One η coordinate: η(b, d, n) = `coef` · kernel[`var`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EtaTerm<S> {
    pub b: usize,
    pub n: usize,
    pub d: usize,
    pub coef: S,
    pub var: usize,
    /// Target action profile at this coordinate.
    pub action: usize,
}

/// η coordinates with nonzero constant; every other coordinate is fixed at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct EtaBlock<S> {
    pub terms: Vec<EtaTerm<S>>,
    pub rows: usize,
    pub cols: usize,
}

impl<S: Scalar> EtaBlock<S> {
    /// η values for a concrete kernel (rows by p⁰).
    pub fn evaluate(&self, kernel: &[Vec<S>]) -> Vec<S> {
        self.terms
            .iter()
            .map(|t| t.coef * kernel[t.var / self.cols][t.var % self.cols])
            .collect()
    }
}

pub fn assemble_eta_constraints<S: Scalar>(ctx: &NodeContext<'_, S>) -> EtaBlock<S> {
    let spec = ctx.spec;
    let q = &spec.noise[ctx.t];
    let cols = ctx.kernel_cols();
    let mut terms = Vec::new();
    for (b, &pb) in ctx.node.belief.iter().enumerate() {
        if pb == S::zero() {
            continue;
        }
        let p0 = ctx.br.digit(b, 1);
        for (n, &qn) in q.iter().enumerate() {
            if qn == S::zero() {
                continue;
            }
            for d in 0..cols {
                terms.push(EtaTerm {
                    b,
                    n,
                    d,
                    coef: qn * pb,
                    var: p0 * cols + d,
                    action: ctx.target_action(b, d),
                });
            }
        }
    }
    EtaBlock {
        terms,
        rows: ctx.kernel_rows(),
        cols,
    }
}

/// One incentive inequality `coefs · g >= -slack`.
#[derive(Clone, Debug, PartialEq)]
pub struct CisrRow<S> {
    /// 0-based agent.
    pub agent: usize,
    pub message: usize,
    pub private: usize,
    pub deviation: usize,
    pub coefs: Vec<S>,
}

/// For every agent, cell (m, p) and action other than the target: the
/// η-weighted gain of the target (reward plus continuation) over the deviation.
pub fn assemble_cisr_inequalities<S: Scalar>(ctx: &NodeContext<'_, S>, eta: &EtaBlock<S>) -> Result<Vec<CisrRow<S>>> {
    let spec = ctx.spec;
    let t = ctx.t;
    let nv = ctx.kernel_vars();
    let mut rows = Vec::new();
    // row_of[i][(m·P + p)·U + u]
    let mut row_of: Vec<Vec<Option<usize>>> = Vec::new();
    for i in 0..ctx.num_agents() {
        let (ms, ps, us) = (
            spec.spaces.messages[i][t],
            spec.spaces.private[i + 1][t],
            spec.spaces.agent_actions[i][t],
        );
        let mut map = vec![None; ms * ps * us];
        for m in 0..ms {
            for p in 0..ps {
                let target = ctx.target_of(i, m, p);
                for u in 0..us {
                    if u != target {
                        map[(m * ps + p) * us + u] = Some(rows.len());
                        rows.push(CisrRow {
                            agent: i,
                            message: m,
                            private: p,
                            deviation: u,
                            coefs: vec![S::zero(); nv],
                        });
                    }
                }
            }
        }
        row_of.push(map);
    }
    for term in &eta.terms {
        for i in 0..ctx.num_agents() {
            let ps = spec.spaces.private[i + 1][t];
            let us = spec.spaces.agent_actions[i][t];
            let m = ctx.kr.digit(term.d, i);
            let p = ctx.br.digit(term.b, i + 2);
            let base = ctx.reward(i + 1, term.b, term.action) + ctx.continuation(i + 1, term.b, term.action, term.n)?;
            for u in 0..us {
                let Some(r) = row_of[i][(m * ps + p) * us + u] else {
                    continue;
                };
                let dev_a = ctx.ar.replace(term.action, i + 1, u);
                let dev = ctx.reward(i + 1, term.b, dev_a) + ctx.continuation(i + 1, term.b, dev_a, term.n)?;
                rows[r].coefs[term.var] += term.coef * (base - dev);
            }
        }
    }
    Ok(rows)
}

/// Coefficients of W^i (one row per agent) and V as linear functions of the kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueRows<S> {
    pub w: Vec<Vec<S>>,
    pub v: Vec<S>,
}

pub fn assemble_value_equalities<S: Scalar>(ctx: &NodeContext<'_, S>, eta: &EtaBlock<S>) -> Result<ValueRows<S>> {
    let nv = ctx.kernel_vars();
    let k = ctx.num_agents();
    let mut w = vec![vec![S::zero(); nv]; k];
    let mut v = vec![S::zero(); nv];
    for term in &eta.terms {
        for (player, row) in std::iter::once(&mut v).chain(w.iter_mut()).enumerate() {
            let val = ctx.reward(player, term.b, term.action) + ctx.continuation(player, term.b, term.action, term.n)?;
            row[term.var] += term.coef * val;
        }
    }
    Ok(ValueRows { w, v })
}

/// Column layout of a node LP: kernel entries, then W¹..W^K, then V.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeLp<S> {
    pub lp: LinearProgram<S>,
    pub rows: usize,
    pub cols: usize,
    pub agents: usize,
    pub cisr: Vec<CisrRow<S>>,
    pub values: ValueRows<S>,
}

impl<S: Scalar> NodeLp<S> {
    pub fn w_var(&self, i: usize) -> usize {
        self.rows * self.cols + i
    }

    pub fn v_var(&self) -> usize {
        self.rows * self.cols + self.agents
    }

    /// LP point for a given kernel, with W and V set by their defining equalities.
    pub fn embed_kernel(&self, kernel: &[Vec<S>]) -> Vec<S> {
        let mut x: Vec<S> = kernel.iter().flatten().copied().collect();
        assert_eq!(x.len(), self.rows * self.cols, "kernel has the wrong shape");
        let flat = x.clone();
        for row in &self.values.w {
            x.push(crate::lp::dot(row, &flat));
        }
        x.push(crate::lp::dot(&self.values.v, &flat));
        x
    }

    pub fn kernel_of(&self, x: &[S]) -> Vec<Vec<S>> {
        x[..self.rows * self.cols]
            .chunks(self.cols)
            .map(|r| r.iter().map(|v| v.max(S::zero())).collect())
            .collect()
    }
}

pub fn assemble_node_lp<S: Scalar>(ctx: &NodeContext<'_, S>, tol: &ToleranceConfig) -> Result<NodeLp<S>> {
    let eta = assemble_eta_constraints(ctx);
    let cisr = assemble_cisr_inequalities(ctx, &eta)?;
    let values = assemble_value_equalities(ctx, &eta)?;
    let (rows, cols, k) = (ctx.kernel_rows(), ctx.kernel_cols(), ctx.num_agents());
    let nv = rows * cols;
    let mut lp = LinearProgram::new(nv + k + 1);
    for j in nv..nv + k + 1 {
        lp.set_free(j);
    }
    lp.objective[nv + k] = S::one();
    for r in 0..rows {
        let mut row = vec![S::zero(); nv + k + 1];
        for v in &mut row[r * cols..(r + 1) * cols] {
            *v = S::one();
        }
        lp.add_eq(row, S::one());
    }
    for (i, coefs) in values.w.iter().chain(std::iter::once(&values.v)).enumerate() {
        let mut row: Vec<S> = coefs.iter().map(|c| -*c).collect();
        row.extend(std::iter::repeat_n(S::zero(), k + 1));
        row[nv + i] = S::one();
        lp.add_eq(row, S::zero());
    }
    let slack = S::lit(tol.cisr_slack);
    for c in &cisr {
        let mut row = c.coefs.clone();
        row.extend(std::iter::repeat_n(S::zero(), k + 1));
        lp.add_ge(row, -slack);
    }
    Ok(NodeLp {
        lp,
        rows,
        cols,
        agents: k,
        cisr,
        values,
    })
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{initial_classes, tree_for, views, NodeView};
use crate::beliefs::{initial_weights, CommonTree};
use crate::error::{Error, Result};
use crate::model::ProblemSpec;
use crate::scalar::Scalar;
use crate::solver::DesignerSolution;

/// Episodes per work unit. Fixed so that sums are grouped the same way on
/// any number of threads.
const CHUNK: u64 = 1024;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub episodes: u64,
    pub seed: u64,
    /// Sample mean of the total reward per player (designer first).
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
}

/// Inverse-CDF draw; falls back to the last positive entry on rounding.
fn draw(rng: &mut ChaCha8Rng, cdf: &[(usize, f64)]) -> usize {
    let u: f64 = rng.gen();
    cdf.iter().find(|(_, c)| u < *c).or(cdf.last()).map(|(i, _)| *i).unwrap_or(0)
}

fn cdf(weights: impl Iterator<Item = (usize, f64)>) -> Vec<(usize, f64)> {
    let mut acc = 0.0;
    let mut out: Vec<(usize, f64)> = weights
        .filter(|(_, w)| *w > 0.0)
        .map(|(i, w)| {
            acc += w;
            (i, acc)
        })
        .collect();
    for e in &mut out {
        e.1 /= acc;
    }
    out
}

struct Sampler<'a, S> {
    levels: Vec<Vec<NodeView<'a, S>>>,
    /// `[t][node][p0]`
    kernels: Vec<Vec<Vec<Vec<(usize, f64)>>>>,
    noise: Vec<Vec<(usize, f64)>>,
    /// Joint draw of (level-1 node, b).
    initial: Vec<(usize, f64)>,
    width: usize,
    players: usize,
}

impl<S: Scalar> Sampler<'_, S> {
    fn episode(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) -> Result<()> {
        let flat = draw(rng, &self.initial);
        let (mut node, mut b) = (flat / self.width, flat % self.width);
        for t in 0..self.levels.len() {
            let view = &self.levels[t][node];
            let d = draw(rng, &self.kernels[t][node][view.p0(b)]);
            let a = view.action(b, d, None);
            for (j, o) in out.iter_mut().enumerate().take(self.players) {
                *o += view.reward(j, b, a).to_f64_lossy();
            }
            if view.is_last() {
                break;
            }
            let n = draw(rng, &self.noise[t]);
            let (child, nb) = view
                .next(b, a, n)
                .ok_or_else(|| Error::UnknownNode(format!("no child below node {}", view.node.node_key)))?;
            node = child;
            b = nb;
        }
        Ok(())
    }
}

/// Simulates `episodes` independent plays of the profile. Episode `e` uses
/// its own ChaCha8 stream, so results do not depend on the thread count.
pub fn monte_carlo_on_tree<S: Scalar>(
    spec: &ProblemSpec<S>,
    tree: &CommonTree<S>,
    sol: &DesignerSolution<S>,
    episodes: u64,
    seed: u64,
) -> Result<MonteCarloReport> {
    let levels = views(spec, tree, sol, &spec.targets)?;
    let width = spec.belief_radix(0).len();
    let classes = initial_classes(tree);
    let mut init = vec![0.0; tree.levels[0].len() * width];
    for (c1, w) in initial_weights(spec).into_iter().enumerate() {
        if let Some(&node) = classes.get(&c1) {
            for (b, p) in w.into_iter().enumerate() {
                init[node * width + b] += p.to_f64_lossy();
            }
        }
    }
    let sampler = Sampler {
        kernels: levels
            .iter()
            .map(|l| {
                l.iter()
                    .map(|v| {
                        v.kernel
                            .iter()
                            .map(|row| cdf(row.iter().map(|g| g.to_f64_lossy()).enumerate()))
                            .collect()
                    })
                    .collect()
            })
            .collect(),
        noise: spec
            .noise
            .iter()
            .map(|q| cdf(q.iter().map(|v| v.to_f64_lossy()).enumerate()))
            .collect(),
        initial: cdf(init.into_iter().enumerate()),
        levels,
        width,
        players: spec.players(),
    };
    let players = sampler.players;
    let chunks = episodes.div_ceil(CHUNK);
    let partials: Vec<Result<(Vec<f64>, Vec<f64>)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut sum = vec![0.0; players];
            let mut sq = vec![0.0; players];
            let mut ret = vec![0.0; players];
            for e in c * CHUNK..((c + 1) * CHUNK).min(episodes) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(e);
                ret.iter_mut().for_each(|v| *v = 0.0);
                sampler.episode(&mut rng, &mut ret)?;
                for j in 0..players {
                    sum[j] += ret[j];
                    sq[j] += ret[j] * ret[j];
                }
            }
            Ok((sum, sq))
        })
        .collect();
    let mut sum = vec![0.0; players];
    let mut sq = vec![0.0; players];
    for p in partials {
        let (s, q) = p?;
        for j in 0..players {
            sum[j] += s[j];
            sq[j] += q[j];
        }
    }
    let n = episodes as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let std_error = (0..players)
        .map(|j| {
            if episodes < 2 {
                return 0.0;
            }
            let var = ((sq[j] - n * mean[j] * mean[j]) / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        })
        .collect();
    Ok(MonteCarloReport {
        episodes,
        seed,
        mean,
        std_error,
    })
}

pub fn monte_carlo<S: Scalar>(
    spec: &ProblemSpec<S>,
    sol: &DesignerSolution<S>,
    episodes: u64,
    seed: u64,
) -> Result<MonteCarloReport> {
    let tree = tree_for(spec, sol)?;
    monte_carlo_on_tree(spec, &tree, sol, episodes, seed)
}

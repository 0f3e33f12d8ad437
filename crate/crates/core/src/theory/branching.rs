use rand::Rng;
use rayon::prelude::*;

use super::flat::FullTypeState;
use super::system::{assemble_system, edge_table};
use super::types::third_colour;
use crate::rng::{shard, Purpose};
use crate::{Error, Result, Q};

/// Number of independent RNG shards; fixed so results do not depend on the
/// thread count.
pub const SHARDS: u64 = 64;
const MAX_TREE: usize = 10_000_000;

/// Empirical mean and standard error of `K_{c,s,s'}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchingEstimate {
    pub trials: u64,
    pub mean: [[[f64; Q]; Q]; Q],
    pub stderr: [[[f64; Q]; Q]; Q],
}

/// Sampler for the forced-colouring tree: the root type is drawn from `p`
/// and every edge a vertex `(c, θ)` sends to planted class `s'` ends at a
/// forced child `(c', θ')` with probability
/// `(d'_s + 1) u_{c'', θ'^{+s}} / e_{s,s'}`, or at no child otherwise. The
/// mean offspring matrix is then exactly `M`.
#[derive(Debug, Clone)]
pub struct BranchingOracle {
    degrees: Vec<[usize; Q]>,
    planted: Vec<usize>,
    per_colour: usize,
    root_cdf: Vec<f64>,
    /// Indexed by `(c * Q + s) * Q + s'`: cumulative child probabilities and
    /// child pair indices.
    kernels: Vec<(Vec<f64>, Vec<u32>)>,
}

fn draw(cdf: &[f64], r: f64) -> Option<usize> {
    let k = cdf.partition_point(|&x| x <= r);
    (k < cdf.len()).then_some(k)
}

impl BranchingOracle {
    pub fn new(fs: &FullTypeState, alpha: f64) -> Result<Self> {
        let sys = assemble_system(fs, alpha)?;
        let idx = &fs.index;
        let e = edge_table(fs);
        let mut root_cdf = Vec::with_capacity(sys.p.len());
        let mut acc = 0.0;
        for &x in sys.p.iter() {
            acc += x;
            root_cdf.push(acc);
        }
        let mut kernels = Vec::with_capacity(Q * Q * Q);
        for c in 0..Q {
            for s in 0..Q {
                for s2 in 0..Q {
                    let mut cdf = Vec::new();
                    let mut children = Vec::new();
                    let mut acc = 0.0;
                    if e[s][s2] > 0.0 {
                        for (child, cs, cd) in idx.iter() {
                            if cs != s2 {
                                continue;
                            }
                            let Some(up) = idx.plus(child, s) else { continue };
                            for c2 in (0..Q).filter(|&c2| c2 != c) {
                                let q = (cd[s] + 1) as f64 * fs.u_at(third_colour(c, c2), up) / e[s][s2];
                                if q > 0.0 {
                                    acc += q;
                                    cdf.push(acc);
                                    children.push(idx.pair(c2, child) as u32);
                                }
                            }
                        }
                    }
                    if acc > 1.0 + 1e-9 {
                        return Err(Error::degenerate(format!("child probabilities sum to {acc} > 1")));
                    }
                    kernels.push((cdf, children));
                }
            }
        }
        let degrees = (0..idx.pair_len()).map(|k| idx.decode(k % idx.len()).1).collect();
        let planted = (0..idx.pair_len()).map(|k| idx.decode(k % idx.len()).0).collect();
        Ok(BranchingOracle { degrees, planted, per_colour: idx.len(), root_cdf, kernels })
    }

    fn trial<R: Rng>(&self, rng: &mut R, k: &mut [f64; Q * Q * Q], stack: &mut Vec<u32>) -> Result<()> {
        k.fill(0.0);
        let total = *self.root_cdf.last().unwrap_or(&0.0);
        let root = draw(&self.root_cdf, rng.random::<f64>() * total).unwrap_or(self.root_cdf.len() - 1);
        stack.clear();
        stack.push(root as u32);
        let mut size = 0;
        while let Some(v) = stack.pop() {
            size += 1;
            if size > MAX_TREE {
                return Err(Error::degenerate("branching tree exceeded the size cap"));
            }
            let v = v as usize;
            let c = v / self.per_colour;
            let s = self.planted[v];
            let d = self.degrees[v];
            for s2 in 0..Q {
                let slot = (c * Q + s) * Q + s2;
                k[slot] += d[s2] as f64;
                let (cdf, children) = &self.kernels[slot];
                for _ in 0..d[s2] {
                    if let Some(j) = draw(cdf, rng.random::<f64>()) {
                        stack.push(children[j]);
                    }
                }
            }
        }
        Ok(())
    }

    /// Runs `trials` independent trees split over [`SHARDS`] streams.
    pub fn estimate(&self, trials: u64, seed: u64) -> Result<BranchingEstimate> {
        if trials == 0 {
            return Err(Error::param("need at least one trial"));
        }
        let shards: Vec<Result<(Vec<f64>, Vec<f64>)>> = (0..SHARDS)
            .into_par_iter()
            .map(|i| {
                let count = trials / SHARDS + u64::from(i < trials % SHARDS);
                let mut rng = shard(seed, Purpose::Branching, i);
                let mut sum = vec![0.0; Q * Q * Q];
                let mut sq = vec![0.0; Q * Q * Q];
                let mut k = [0.0; Q * Q * Q];
                let mut stack = Vec::new();
                for _ in 0..count {
                    self.trial(&mut rng, &mut k, &mut stack)?;
                    for j in 0..k.len() {
                        sum[j] += k[j];
                        sq[j] += k[j] * k[j];
                    }
                }
                Ok((sum, sq))
            })
            .collect();
        let mut sum = vec![0.0; Q * Q * Q];
        let mut sq = vec![0.0; Q * Q * Q];
        for r in shards {
            let (a, b) = r?;
            for j in 0..sum.len() {
                sum[j] += a[j];
                sq[j] += b[j];
            }
        }
        let n = trials as f64;
        let mut mean = [[[0.0; Q]; Q]; Q];
        let mut stderr = [[[0.0; Q]; Q]; Q];
        for c in 0..Q {
            for s in 0..Q {
                for s2 in 0..Q {
                    let j = (c * Q + s) * Q + s2;
                    let m = sum[j] / n;
                    let var = if trials > 1 { ((sq[j] / n - m * m) * n / (n - 1.0)).max(0.0) } else { 0.0 };
                    mean[c][s][s2] = m;
                    stderr[c][s][s2] = (var / n).sqrt();
                }
            }
        }
        Ok(BranchingEstimate { trials, mean, stderr })
    }
}

use rayon::prelude::*;
use serde::Serialize;

use crate::error::domain;
use crate::randfield::FbmSampler;
use crate::rng::substream;
use crate::Result;

/// Smallest admissible number of grid intervals per axis.
pub const MIN_GRID: usize = 16;
/// Expected exceedance count below which an estimate is flagged weak.
pub const WEAK_COUNT: f64 = 10.0;
/// Replications per parallel work unit.
const CHUNK: usize = 256;

/// Plain Monte Carlo estimate of `P(sup_E X > u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupTailEstimate {
    pub u: f64,
    pub p_hat: f64,
    pub stderr: f64,
    pub grid_n: usize,
    pub reps: usize,
    /// Fewer than [`WEAK_COUNT`] exceedances expected.
    pub weak: bool,
}

impl SupTailEstimate {
    fn new(u: f64, hits: u64, grid_n: usize, reps: usize) -> Self {
        let p = hits as f64 / reps as f64;
        Self::exact(u, p, grid_n, reps, (p * (1.0 - p) / reps as f64).sqrt())
    }

    fn exact(u: f64, p_hat: f64, grid_n: usize, reps: usize, stderr: f64) -> Self {
        Self { u, p_hat, stderr, grid_n, reps, weak: reps as f64 * p_hat < WEAK_COUNT }
    }
}

/// Range maximum over a slice in `O(1)` per query.
struct SparseMax {
    levels: Vec<Vec<f64>>,
}

impl SparseMax {
    fn new() -> Self {
        Self { levels: Vec::new() }
    }

    fn build(&mut self, xs: &[f64]) {
        let n = xs.len();
        let depth = usize::BITS as usize - n.leading_zeros() as usize;
        self.levels.resize_with(depth.max(1), Vec::new);
        self.levels[0].clear();
        self.levels[0].extend_from_slice(xs);
        for k in 1..depth {
            let w = 1 << (k - 1);
            let (prev, rest) = self.levels.split_at_mut(k);
            let p = &prev[k - 1];
            let cur = &mut rest[0];
            cur.clear();
            cur.extend((0..n + 1 - (w << 1)).map(|i| p[i].max(p[i + w])));
        }
    }

    /// Maximum of `xs[lo..=hi]`.
    fn query(&self, lo: usize, hi: usize) -> f64 {
        let len = hi - lo + 1;
        let k = usize::BITS as usize - 1 - len.leading_zeros() as usize;
        let l = &self.levels[k];
        l[lo].max(l[hi + 1 - (1 << k)])
    }
}

/// One grid of a nested ladder: fine-grid stride and per-row `t` ranges.
struct Level {
    grid_n: usize,
    stride: usize,
    /// `(row index, lo, hi)` on the fine grid, rows and bounds at multiples of `stride`.
    rows: Vec<(usize, usize, usize)>,
}

/// Exceedance probabilities of `B_a1(s) + B_a2(t)` over
/// `E = {|s|^a1 + |t|^a2 <= 1}` for every `u` and every grid in a nested
/// ladder, all from one coupled set of replications.
///
/// A grid with `n` intervals per axis has the points `-1 + 2k/n`. Every
/// `grid_n` must be even and divide the largest one, so coarser grids are
/// subsets of finer ones.
pub fn mc_sup_tail_ladder(
    alpha1: f64,
    alpha2: f64,
    us: &[f64],
    grid_ladder: &[usize],
    reps: usize,
    seed: u64,
) -> Result<Vec<SupTailEstimate>> {
    for &a in &[alpha1, alpha2] {
        if !(a > 0.0 && a <= 2.0) {
            return domain(format!("alpha must lie in (0, 2], got {a}"));
        }
    }
    if reps == 0 {
        return domain("reps must be positive");
    }
    if us.iter().any(|u| u.is_nan()) {
        return domain("u must not be NaN");
    }
    let fine = *grid_ladder.iter().max().ok_or_else(|| crate::Error::Domain("empty grid ladder".into()))?;
    for &g in grid_ladder {
        if g < MIN_GRID || g % 2 != 0 || fine % g != 0 {
            return domain(format!("grid_n = {g} must be even, at least {MIN_GRID} and divide {fine}"));
        }
    }
    let h = 2.0 / fine as f64;
    let s_sampler = FbmSampler::on_points(-1.0, h, fine + 1, alpha1)?;
    let t_sampler = FbmSampler::on_points(-1.0, h, fine + 1, alpha2)?;
    let coord = |k: usize| -1.0 + k as f64 * h;
    let inside = |i: usize, j: usize| coord(i).abs().powf(alpha1) + coord(j).abs().powf(alpha2) <= 1.0;
    let mid = fine / 2;
    let levels: Vec<Level> = grid_ladder
        .iter()
        .map(|&g| {
            let stride = fine / g;
            let rows = (0..=fine)
                .step_by(stride)
                .filter_map(|i| {
                    if !inside(i, mid) {
                        return None;
                    }
                    let mut hi = mid;
                    while hi + stride <= fine && inside(i, hi + stride) {
                        hi += stride;
                    }
                    let mut lo = mid;
                    while lo >= stride && inside(i, lo - stride) {
                        lo -= stride;
                    }
                    Some((i, lo, hi))
                })
                .collect();
            Level { grid_n: g, stride, rows }
        })
        .collect();

    let n_u = us.len();
    let n_cells = levels.len() * n_u;
    let chunks = reps.div_ceil(CHUNK);
    let hits = (0..chunks)
        .into_par_iter()
        .map_init(
            || {
                (
                    s_sampler.workspace(),
                    t_sampler.workspace(),
                    vec![0.0; fine + 1],
                    vec![0.0; fine + 1],
                    vec![0.0; fine + 1],
                    SparseMax::new(),
                )
            },
            |(ws_s, ws_t, b1, b2, sub, table), c| {
                let mut counts = vec![0u64; n_cells];
                for rep in c * CHUNK..((c + 1) * CHUNK).min(reps) {
                    let mut rng = substream(seed, rep as u64);
                    s_sampler.sample_into(&mut rng, ws_s, b1);
                    t_sampler.sample_into(&mut rng, ws_t, b2);
                    for (li, lv) in levels.iter().enumerate() {
                        sub.clear();
                        sub.extend(b2.iter().step_by(lv.stride));
                        table.build(sub);
                        let sup = lv
                            .rows
                            .iter()
                            .map(|&(i, lo, hi)| b1[i] + table.query(lo / lv.stride, hi / lv.stride))
                            .fold(f64::NEG_INFINITY, f64::max);
                        for (ui, &u) in us.iter().enumerate() {
                            if sup > u {
                                counts[li * n_u + ui] += 1;
                            }
                        }
                    }
                }
                counts
            },
        )
        .reduce(
            || vec![0u64; n_cells],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let mut out = Vec::with_capacity(n_cells);
    for (li, lv) in levels.iter().enumerate() {
        for (ui, &u) in us.iter().enumerate() {
            out.push(if u <= 0.0 {
                // The origin lies in E and the continuous supremum is a.s. positive.
                SupTailEstimate::exact(u, 1.0, lv.grid_n, reps, 0.0)
            } else if u == f64::INFINITY {
                SupTailEstimate::exact(u, 0.0, lv.grid_n, reps, 0.0)
            } else {
                SupTailEstimate::new(u, hits[li * n_u + ui], lv.grid_n, reps)
            });
        }
    }
    Ok(out)
}

/// Exceedance probability on a single `grid_n x grid_n` grid.
pub fn mc_sup_tail(alpha1: f64, alpha2: f64, u: f64, grid_n: usize, reps: usize, seed: u64) -> Result<SupTailEstimate> {
    Ok(mc_sup_tail_ladder(alpha1, alpha2, &[u], &[grid_n], reps, seed)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_max_matches_scan() {
        let xs: Vec<f64> = (0..37).map(|i| ((i * 7919) % 101) as f64 - 50.0).collect();
        let mut t = SparseMax::new();
        t.build(&xs);
        for lo in 0..xs.len() {
            for hi in lo..xs.len() {
                let m = xs[lo..=hi].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                assert_eq!(t.query(lo, hi), m);
            }
        }
    }

    #[test]
    fn trivial_levels() {
        let e = mc_sup_tail(1.0, 1.0, 0.0, 16, 50, 1).unwrap();
        assert_eq!(e.p_hat, 1.0);
        let e = mc_sup_tail(1.0, 1.0, f64::INFINITY, 16, 50, 1).unwrap();
        assert_eq!(e.p_hat, 0.0);
        assert!(e.weak);
    }

    #[test]
    fn monotone_in_u_and_grid() {
        let us = [0.5, 1.0, 1.5, 2.0];
        let est = mc_sup_tail_ladder(0.8, 1.3, &us, &[16, 32, 64], 2000, 5).unwrap();
        for g in 0..3 {
            for k in 1..us.len() {
                assert!(est[g * 4 + k].p_hat <= est[g * 4 + k - 1].p_hat);
            }
        }
        for k in 0..us.len() {
            assert!(est[k].p_hat <= est[4 + k].p_hat && est[4 + k].p_hat <= est[8 + k].p_hat);
        }
    }

    #[test]
    fn rejects_bad_ladders() {
        assert!(mc_sup_tail_ladder(1.0, 1.0, &[1.0], &[17], 10, 1).is_err());
        assert!(mc_sup_tail_ladder(1.0, 1.0, &[1.0], &[20, 32], 10, 1).is_err());
        assert!(mc_sup_tail_ladder(1.0, 1.0, &[1.0], &[8], 10, 1).is_err());
    }

    #[test]
    fn brute_force_agreement() {
        let (a1, a2, n) = (0.7, 1.6, 16usize);
        let est = mc_sup_tail_ladder(a1, a2, &[0.8], &[n], 300, 9).unwrap()[0];
        let h = 2.0 / n as f64;
        let s = FbmSampler::on_points(-1.0, h, n + 1, a1).unwrap();
        let t = FbmSampler::on_points(-1.0, h, n + 1, a2).unwrap();
        let mut hits = 0;
        for rep in 0..300u64 {
            let mut rng = substream(9, rep);
            let b1 = s.sample(&mut rng);
            let b2 = t.sample(&mut rng);
            let mut sup = f64::NEG_INFINITY;
            for i in 0..=n {
                for j in 0..=n {
                    let (x, y) = (-1.0 + i as f64 * h, -1.0 + j as f64 * h);
                    if x.abs().powf(a1) + y.abs().powf(a2) <= 1.0 {
                        sup = sup.max(b1[i] + b2[j]);
                    }
                }
            }
            if sup > 0.8 {
                hits += 1;
            }
        }
        assert_eq!(est.p_hat, hits as f64 / 300.0);
    }

    #[test]
    fn thread_count_invariant() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mc_sup_tail_ladder(1.0, 1.0, &[1.0, 2.0], &[16, 32], 1000, 3).unwrap())
        };
        assert_eq!(run(1), run(4));
    }
}

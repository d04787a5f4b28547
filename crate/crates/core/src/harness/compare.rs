use serde::Serialize;

use super::tail::mc_sup_tail_ladder;
use crate::asymptotics::{fbm_sum_asymptote, TailAsymptote};
use crate::constants::ConstantProvider;
use crate::error::domain;
use crate::Result;

/// Simulated exceedance probability against the asymptote.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub u: f64,
    pub grid_n: usize,
    pub p_hat: f64,
    pub stderr: f64,
    pub asymptote: f64,
    pub ratio: f64,
    pub ratio_stderr: f64,
    pub weak: bool,
    /// `|ratio - 1|` grew with `u` beyond the combined confidence band.
    pub trend_violation: bool,
}

/// Comparison table over all `(u, grid_n)` pairs, plus the asymptote used.
pub fn compare_run(
    alpha1: f64,
    alpha2: f64,
    us: &[f64],
    grid_ladder: &[usize],
    reps: usize,
    seed: u64,
    provider: &dyn ConstantProvider,
) -> Result<(TailAsymptote, Vec<CompareRow>)> {
    if us.is_empty() {
        return domain("need at least one u");
    }
    if us.windows(2).any(|w| w[1] <= w[0]) {
        return domain("u values must be strictly increasing");
    }
    let asym = fbm_sum_asymptote(alpha1, alpha2, provider)?;
    let est = mc_sup_tail_ladder(alpha1, alpha2, us, grid_ladder, reps, seed)?;
    let k_rel = if asym.k > 0.0 { asym.k_stderr / asym.k } else { 0.0 };
    let mut rows: Vec<CompareRow> = est
        .iter()
        .map(|e| {
            let a = asym.evaluate(e.u);
            let ratio = e.p_hat / a;
            let rel = if e.p_hat > 0.0 { e.stderr / e.p_hat } else { 0.0 };
            CompareRow {
                u: e.u,
                grid_n: e.grid_n,
                p_hat: e.p_hat,
                stderr: e.stderr,
                asymptote: a,
                ratio,
                ratio_stderr: ratio * (rel * rel + k_rel * k_rel).sqrt(),
                weak: e.weak,
                trend_violation: false,
            }
        })
        .collect();
    for chunk in rows.chunks_mut(us.len()) {
        for i in 1..chunk.len() {
            let (prev, cur) = (&chunk[i - 1], &chunk[i]);
            let band = 2.0 * (prev.ratio_stderr.powi(2) + cur.ratio_stderr.powi(2)).sqrt();
            if (cur.ratio - 1.0).abs() > (prev.ratio - 1.0).abs() + band {
                chunk[i].trend_violation = true;
            }
        }
    }
    Ok((asym, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{ConstantId, PinnedTable};

    #[test]
    fn table_shape_and_grid_monotonicity() {
        let t = PinnedTable::new().pin(ConstantId::GenPickands { alpha: 1.0, gamma: 1.0, b: -1.0, one_sided: true }, 2.3);
        let (asym, rows) = compare_run(1.0, 1.0, &[1.5, 2.0], &[16, 32], 2000, 2, &t).unwrap();
        assert!((asym.k - 4.6).abs() < 1e-12);
        assert_eq!(rows.len(), 4);
        for k in 0..2 {
            assert!(rows[2 + k].ratio >= rows[k].ratio);
        }
        assert!(rows.iter().all(|r| r.ratio.is_finite() && r.ratio > 0.0));
    }
}

use serde::Serialize;

use crate::error::domain;
use crate::Result;

/// Default boundary distances.
pub const DEFAULT_DELTAS: [f64; 3] = [1e-2, 1e-3, 1e-4];
/// Cap on `|s|` (or `|t|`) for the variance expansions.
pub const COORD_CAP: f64 = 0.9;

/// Worst-case error of a local expansion for each boundary distance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub delta_ladder: Vec<f64>,
    pub max_rel_err: Vec<f64>,
}

impl ExpansionReport {
    /// Errors strictly decrease along the ladder.
    pub fn decreasing(&self) -> bool {
        self.max_rel_err.windows(2).all(|w| w[1] < w[0])
    }

    /// Error at the ladder entry closest to `delta`.
    pub fn at(&self, delta: f64) -> Option<f64> {
        self.delta_ladder
            .iter()
            .zip(&self.max_rel_err)
            .min_by(|a, b| (a.0 / delta).ln().abs().total_cmp(&(b.0 / delta).ln().abs()))
            .map(|(_, e)| *e)
    }
}

/// Radical inverse of `k` in base `b`.
pub fn van_der_corput(mut k: u64, b: u64) -> f64 {
    let mut x = 0.0;
    let mut f = 1.0 / b as f64;
    while k > 0 {
        x += (k % b) as f64 * f;
        k /= b;
        f /= b as f64;
    }
    x
}

/// `sigma(s, t) = sqrt(|s|^a1 + |t|^a2)`.
pub fn sigma(alpha1: f64, alpha2: f64, s: f64, t: f64) -> f64 {
    (s.abs().powf(alpha1) + t.abs().powf(alpha2)).sqrt()
}

/// `1 - sigma`, computed without cancellation.
fn one_minus_sigma(alpha1: f64, alpha2: f64, s: f64, t: f64) -> f64 {
    let x = s.abs().powf(alpha1) + t.abs().powf(alpha2);
    (1.0 - x) / (1.0 + x.sqrt())
}

/// `(a/2)(1 - |x|^b)^(1 - 1/a) | |y| - (1 - |x|^b)^(1/a) |`: the local form of
/// `1 - sigma` near the boundary point with first coordinate `x`.
fn variance_expansion(b: f64, a: f64, x: f64, y: f64) -> f64 {
    let m = 1.0 - x.abs().powf(b);
    0.5 * a * m.powf(1.0 - 1.0 / a) * (y.abs() - m.powf(1.0 / a)).abs()
}

fn check(alpha1: f64, alpha2: f64, deltas: &[f64], n: usize) -> Result<()> {
    for &a in &[alpha1, alpha2] {
        if !(a > 0.0 && a < 2.0) {
            return domain(format!("alpha must lie in (0, 2), got {a}"));
        }
    }
    if deltas.iter().any(|&d| !(d > 0.0 && d < 1.0)) {
        return domain("boundary distances must lie in (0, 1)");
    }
    if n == 0 {
        return domain("need at least one sample point");
    }
    Ok(())
}

/// Relative error of the local variance expansion along the boundary.
///
/// With `along_t` false the sample points are `|s| <= 0.9` and
/// `|t| = (1 - |s|^a1)^(1/a2) - delta`; with `along_t` true the roles of the
/// coordinates are exchanged.
pub fn check_variance_expansion_along(
    alpha1: f64,
    alpha2: f64,
    deltas: &[f64],
    n: usize,
    along_t: bool,
) -> Result<ExpansionReport> {
    check(alpha1, alpha2, deltas, n)?;
    let (ax, ay) = if along_t { (alpha2, alpha1) } else { (alpha1, alpha2) };
    let errs = deltas
        .iter()
        .map(|&d| {
            (0..n as u64)
                .filter_map(|k| {
                    let x = COORD_CAP * (2.0 * van_der_corput(k + 1, 2) - 1.0);
                    let sign = if van_der_corput(k + 1, 3) < 0.5 { -1.0 } else { 1.0 };
                    let edge = (1.0 - x.abs().powf(ax)).powf(1.0 / ay);
                    if edge <= d {
                        return None;
                    }
                    let y = sign * (edge - d);
                    let exact = one_minus_sigma(ax, ay, x, y);
                    let approx = variance_expansion(ax, ay, x, y);
                    (approx > 0.0).then(|| (exact / approx - 1.0).abs())
                })
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(ExpansionReport { delta_ladder: deltas.to_vec(), max_rel_err: errs })
}

/// Worst relative error over both variance expansions.
pub fn check_variance_expansion(alpha1: f64, alpha2: f64, deltas: &[f64], n: usize) -> Result<ExpansionReport> {
    let a = check_variance_expansion_along(alpha1, alpha2, deltas, n, false)?;
    let b = check_variance_expansion_along(alpha1, alpha2, deltas, n, true)?;
    let errs = a.max_rel_err.iter().zip(&b.max_rel_err).map(|(x, y)| x.max(*y)).collect();
    Ok(ExpansionReport { delta_ladder: a.delta_ladder, max_rel_err: errs })
}

/// `2(1 - r) / (|s - s1|^a1 + |t - t1|^a2) - 1` for the field
/// `B_a1(s) + B_a2(t)`, or `None` for coincident points.
pub fn correlation_ratio(alpha1: f64, alpha2: f64, p: (f64, f64), q: (f64, f64)) -> Option<f64> {
    let d = (p.0 - q.0).abs().powf(alpha1) + (p.1 - q.1).abs().powf(alpha2);
    if d == 0.0 {
        return None;
    }
    let v1 = p.0.abs().powf(alpha1) + p.1.abs().powf(alpha2);
    let v2 = q.0.abs().powf(alpha1) + q.1.abs().powf(alpha2);
    let (s1, s2) = (v1.sqrt(), v2.sqrt());
    let diff = (v1 - v2) / (s1 + s2);
    // 1 - r = (Var(X(p) - X(q)) - (sigma(p) - sigma(q))^2) / (2 sigma(p) sigma(q))
    Some((d - diff * diff) / (s1 * s2 * d) - 1.0)
}

/// Maximum deviation of the correlation ratio from 0 over pairs near the
/// boundary: `1 - delta <= |s|^a1 + |t|^a2 <= 1` for both points and
/// coordinate separations at most `delta`.
pub fn check_correlation_expansion(alpha1: f64, alpha2: f64, deltas: &[f64], n: usize) -> Result<ExpansionReport> {
    check(alpha1, alpha2, deltas, n)?;
    let level = |p: (f64, f64)| p.0.abs().powf(alpha1) + p.1.abs().powf(alpha2);
    let errs = deltas
        .iter()
        .map(|&d| {
            (0..n as u64)
                .filter_map(|k| {
                    let k = k + 1;
                    let lv = 1.0 - d * van_der_corput(k, 2);
                    let x = lv * van_der_corput(k, 3);
                    let quadrant = (4.0 * van_der_corput(k, 5)) as u32;
                    let ss = if quadrant & 1 == 0 { 1.0 } else { -1.0 };
                    let st = if quadrant & 2 == 0 { 1.0 } else { -1.0 };
                    let p = (ss * x.powf(1.0 / alpha1), st * (lv - x).powf(1.0 / alpha2));
                    let q = (
                        p.0 + d * (2.0 * van_der_corput(k, 7) - 1.0),
                        p.1 + d * (2.0 * van_der_corput(k, 11) - 1.0),
                    );
                    let lq = level(q);
                    if !(1.0 - d..=1.0).contains(&lq) {
                        return None;
                    }
                    correlation_ratio(alpha1, alpha2, p, q).map(f64::abs)
                })
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(ExpansionReport { delta_ladder: deltas.to_vec(), max_rel_err: errs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randfield::fbm_cov;

    #[test]
    fn radical_inverse() {
        assert_eq!(van_der_corput(1, 2), 0.5);
        assert_eq!(van_der_corput(6, 2), 0.375);
        assert!((van_der_corput(5, 3) - 7.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn variance_example() {
        let (s, d) = (0.5, 1e-4);
        let t = 0.5 - d;
        let r = one_minus_sigma(1.0, 1.0, s, t) / variance_expansion(1.0, 1.0, s, t);
        assert!((r - 1.0).abs() < 1e-3);
        assert_eq!(variance_expansion(1.0, 1.0, 0.5, 0.5), 0.0);
    }

    #[test]
    fn correlation_matches_covariance_form() {
        let (a1, a2) = (0.7, 1.4);
        let (p, q) = ((0.3, -0.6), (0.32, -0.55));
        let cov = fbm_cov(p.0, q.0, a1).unwrap() + fbm_cov(p.1, q.1, a2).unwrap();
        let r = cov / (sigma(a1, a2, p.0, p.1) * sigma(a1, a2, q.0, q.1));
        let d = (p.0 - q.0).abs().powf(a1) + (p.1 - q.1).abs().powf(a2);
        let direct = 2.0 * (1.0 - r) / d - 1.0;
        let stable = correlation_ratio(a1, a2, p, q).unwrap();
        assert!((direct - stable).abs() < 1e-9, "{direct} vs {stable}");
    }

    #[test]
    fn correlation_symmetric_and_coincident() {
        let (p, q) = ((0.2, 0.7), (0.21, 0.69));
        assert_eq!(correlation_ratio(1.2, 0.9, p, q), correlation_ratio(1.2, 0.9, q, p));
        assert_eq!(correlation_ratio(1.2, 0.9, p, p), None);
    }

    #[test]
    fn pure_t_separation_vanishes() {
        let a = 1.3;
        let s: f64 = 0.4;
        let t = (1.0 - s.powf(a)).powf(1.0 / a);
        let errs: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&d| correlation_ratio(a, a, (s, t), (s, t - d)).unwrap().abs())
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2] && errs[2] < 1e-2, "{errs:?}");
    }

    #[test]
    fn reports_shrink() {
        let v = check_variance_expansion(1.0, 1.5, &DEFAULT_DELTAS, 200).unwrap();
        assert!(v.decreasing(), "{v:?}");
        let c = check_correlation_expansion(1.0, 1.5, &DEFAULT_DELTAS, 200).unwrap();
        assert!(c.decreasing(), "{c:?}");
    }
}

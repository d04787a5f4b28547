use std::sync::Arc;

use num_rational::Ratio;
use statrs::function::beta::ln_beta;

use super::curve::{curve_asymptote, CurveScenario};
use super::line::get;
use super::quadrature::{self, Endpoints, DEFAULT_TOL};
use super::{exact_ratio, CaseTag, Prefactor, PowerLaw, TailAsymptote};
use crate::constants::{ConstantId, ConstantProvider};
use crate::error::domain;
use crate::Result;

/// Relative gap above which a closed-form integral and its quadrature
/// cross-check are flagged as inconsistent.
const CROSS_CHECK_TOL: f64 = 1e-6;

/// `int_0^1 (1 - t^a)^(b - 1) dt = B(1/a, b) / a`.
pub fn beta_reduced_integral(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
        return domain(format!("integral of (1 - t^{a})^({b} - 1) over [0, 1] needs a > 0 and b > 0"));
    }
    Ok(ln_beta(1.0 / a, b).exp() / a)
}

/// `int_0^1 (1 - t^a)^(b - 1) t^(a - 1) dt = 1/(a b)`.
pub fn beta_reduced_weighted_integral(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
        return domain(format!("integral of (1 - t^{a})^({b} - 1) t^({a} - 1) over [0, 1] needs a > 0 and b > 0"));
    }
    Ok(1.0 / (a * b))
}

fn beta_by_quadrature(a: f64, b: f64) -> quadrature::Quadrature {
    quadrature::integrate(|t| (1.0 - t.powf(a)).powf(b - 1.0), 0.0, 1.0, Endpoints::new(a, b - 1.0), 1e-12)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return domain(format!("fBm-sum asymptotics need alpha in (0, 2), got {alpha}"));
    }
    Ok(())
}

fn ratio(x: f64) -> Result<Ratio<i64>> {
    exact_ratio(x)
}

/// Asymptote of `P(sup_{|s|^a1 + |t|^a2 <= 1} B_a1(s) + B_a2(t) > u)`.
pub fn fbm_sum_asymptote(alpha1: f64, alpha2: f64, provider: &dyn ConstantProvider) -> Result<TailAsymptote> {
    check_alpha(alpha1)?;
    check_alpha(alpha2)?;
    let (a1, a2) = if alpha1 <= alpha2 { (alpha1, alpha2) } else { (alpha2, alpha1) };
    let two = Ratio::from_integer(2);
    let inv1 = two / ratio(a1)?;
    let inv2 = two / ratio(a2)?;
    let pickands1 = || get(provider, ConstantId::Pickands { alpha: a1 });
    if a1 < a2 {
        let (l1, h1) = pickands1()?;
        if a2 < 1.0 {
            let i = beta_reduced_integral(a2, 1.0 / a1)?;
            let (l2, h2) = get(provider, ConstantId::Pickands { alpha: a2 })?;
            let mut pre = Prefactor::new(2f64.powf(3.0 - 1.0 / a1 - 1.0 / a2) / a1 * i).with(&l1, &h1).with(&l2, &h2);
            cross_check(&mut pre, i, beta_by_quadrature(a2, 1.0 / a1));
            Ok(pre.finish(CaseTag::FbmSumUnequalSub1, inv1 + inv2 - two))
        } else if a2 == 1.0 {
            let pre = Prefactor::new(2f64.powf(3.0 - 1.0 / a1)).with(&l1, &h1);
            Ok(pre.finish(CaseTag::FbmSumUnequalEq1, inv1))
        } else {
            let i = beta_reduced_weighted_integral(a2, 1.0 / a1)?;
            let mut pre = Prefactor::new(2f64.powf(2.0 - 1.0 / a1) * a2 / a1 * i).with(&l1, &h1);
            let q = quadrature::integrate(
                |t| (1.0 - t.powf(a2)).powf(1.0 / a1 - 1.0) * t.powf(a2 - 1.0),
                0.0,
                1.0,
                Endpoints::new(a2 - 1.0, 1.0 / a1 - 1.0),
                1e-12,
            );
            cross_check(&mut pre, i, q);
            Ok(pre.finish(CaseTag::FbmSumUnequalSuper1, inv1))
        }
    } else {
        let a = a1;
        if a < 1.0 {
            let (l1, h1) = pickands1()?;
            let i = beta_reduced_integral(a, 1.0 / a)?;
            let mut pre = Prefactor::new(2f64.powf(3.0 - 2.0 / a) / a * i).with(&l1, &h1).with(&l1, &h1);
            cross_check(&mut pre, i, beta_by_quadrature(a, 1.0 / a));
            Ok(pre.finish(CaseTag::FbmSumEqualSub1, inv1 + inv1 - two))
        } else if a == 1.0 {
            let (l, e) = get(provider, ConstantId::GenPickands { alpha: 1.0, gamma: 1.0, b: -1.0, one_sided: true })?;
            let pre = Prefactor::new(2.0).with(&l, &e);
            Ok(pre.finish(CaseTag::FbmSumEqualEq1, two))
        } else {
            let (l1, h1) = pickands1()?;
            let q = quadrature::integrate(
                |t| (1.0 + t.powf(a * (a - 1.0)) * (1.0 - t.powf(a)).powf(1.0 - a)).powf(1.0 / a),
                0.0,
                1.0,
                Endpoints::new(a * (a - 1.0), 1.0 / a - 1.0),
                DEFAULT_TOL,
            );
            let pre = Prefactor::new(2f64.powf(2.0 - 1.0 / a)).with(&l1, &h1).with_integral(q.value, 0.0, q.converged);
            Ok(pre.finish(CaseTag::FbmSumEqualSuper1, inv1))
        }
    }
}

fn cross_check(pre: &mut Prefactor, exact: f64, q: quadrature::Quadrature) {
    if !q.converged || (q.value / exact - 1.0).abs() > CROSS_CHECK_TOL {
        pre.flag("beta-quadrature-mismatch".into());
    }
}

/// Quadrant `t in [0, 1]` of the fBm-sum domain as a curve scenario with
/// `s = (1 - t^a2)^(1/a1)`, on the boundary of the domain. Requires
/// `alpha1 <= alpha2`.
pub fn fbm_sum_curve_scenario(alpha1: f64, alpha2: f64) -> Result<CurveScenario> {
    check_alpha(alpha1)?;
    check_alpha(alpha2)?;
    if alpha1 > alpha2 {
        return domain("curve form of the fBm-sum field needs alpha1 <= alpha2");
    }
    let (a1, a2) = (alpha1, alpha2);
    let c = std::f64::consts::FRAC_1_SQRT_2;
    Ok(CurveScenario {
        t1: 0.0,
        t2: 1.0,
        f: Arc::new(move |t| (1.0 - t.powf(a2)).powf(1.0 / a1)),
        f_prime: Arc::new(move |t| -(a2 / a1) * t.powf(a2 - 1.0) * (1.0 - t.powf(a2)).powf(1.0 / a1 - 1.0)),
        g: Arc::new(move |t| 0.5 * a1 * (1.0 - t.powf(a2)).powf(1.0 - 1.0 / a1)),
        rho1: PowerLaw::new(c, a1 / 2.0)?,
        rho2: PowerLaw::new(c, a2 / 2.0)?,
        v: PowerLaw::new(1.0, 0.5)?,
        boundary: true,
        endpoints: Endpoints::new(a2 - 1.0, 1.0 / a1 - 1.0),
        g_bounds: None,
    })
}

/// The fBm-sum asymptote assembled from the curve formulas: four times the
/// quadrant contribution.
pub fn fbm_sum_via_curve(
    alpha1: f64,
    alpha2: f64,
    provider: &dyn ConstantProvider,
    quad_tol: f64,
) -> Result<TailAsymptote> {
    let (a1, a2) = if alpha1 <= alpha2 { (alpha1, alpha2) } else { (alpha2, alpha1) };
    let scn = fbm_sum_curve_scenario(a1, a2)?;
    Ok(curve_asymptote(&scn, provider, quad_tol)?.scaled(4.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::PinnedTable;

    fn table() -> PinnedTable {
        let mut t = PinnedTable::with_closed_forms()
            .pin(ConstantId::GenPickands { alpha: 1.0, gamma: 1.0, b: -1.0, one_sided: true }, 2.5);
        for &a in &[0.3, 0.5, 0.6, 0.8, 1.2, 1.5, 1.7] {
            t = t.pin(ConstantId::Pickands { alpha: a }, 1.0 / a);
        }
        t
    }

    #[test]
    fn beta_examples() {
        assert!((beta_reduced_integral(1.0, 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((beta_reduced_integral(0.5, 2.0).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert!((beta_reduced_integral(1.0, 0.5).unwrap() - 2.0).abs() < 1e-13);
        assert!(beta_reduced_integral(1.0, 0.0).is_err());
        assert!(beta_reduced_integral(-1.0, 1.0).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let t = table();
        let a = fbm_sum_asymptote(1.0, 1.0, &t).unwrap();
        assert_eq!((a.k, a.p), (5.0, Ratio::from_integer(2)));
        let a = fbm_sum_asymptote(0.5, 1.0, &t).unwrap();
        assert!((a.k - 2.0 * 2.0).abs() < 1e-12);
        assert_eq!(a.p, Ratio::from_integer(4));
        let a = fbm_sum_asymptote(0.5, 0.5, &t).unwrap();
        assert!((a.k - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(a.p, Ratio::from_integer(6));
        assert!(a.flags.is_empty());
    }

    #[test]
    fn symmetric_in_arguments() {
        let t = table();
        assert_eq!(fbm_sum_asymptote(0.5, 1.5, &t).unwrap(), fbm_sum_asymptote(1.5, 0.5, &t).unwrap());
    }

    #[test]
    fn alpha_two_rejected() {
        assert!(fbm_sum_asymptote(1.0, 2.0, &table()).is_err());
    }

    #[test]
    fn matches_curve_form_in_every_branch() {
        let t = table();
        for &(a1, a2) in &[(0.3, 0.8), (0.5, 1.0), (0.8, 1.0), (0.5, 1.5), (1.2, 1.7), (0.6, 0.6), (1.0, 1.0), (1.5, 1.5)] {
            let direct = fbm_sum_asymptote(a1, a2, &t).unwrap();
            let curve = fbm_sum_via_curve(a1, a2, &t, 1e-10).unwrap();
            assert_eq!(direct.p, curve.p, "({a1},{a2})");
            assert!((direct.k / curve.k - 1.0).abs() < 1e-6, "({a1},{a2}): {} vs {}", direct.k, curve.k);
        }
    }
}

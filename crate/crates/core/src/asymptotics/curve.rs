use std::cell::RefCell;
use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;

use super::line::{gamma0_coeff, gamma0_exponent, gamma0_factor, get};
use super::quadrature::{self, Endpoints, MAX_NODES, MIN_NODES};
use super::{reciprocal, CaseTag, Limit, Prefactor, PowerLaw, TailAsymptote};
use crate::constants::{ConstantId, ConstantProvider};
use crate::error::{domain, Error};
use crate::Result;

pub type CurveFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Points of the interior grid used to check the curve conditions.
const VALIDATION_POINTS: usize = 1000;
/// Smallest admissible `|f'|` on the validation grid.
const MIN_SLOPE: f64 = 1e-9;

/// Field on a rectangle with variance maximal on `s = f(t)`, `t in [T1, T2]`,
/// `1 - r ~ rho1^2(|ds|) + rho2^2(|dt|)` and
/// `1 - sigma ~ v^2(g(t) |s - f(t)|)`.
///
/// With `boundary` set the field lives on one side of the curve.
#[derive(Clone)]
pub struct CurveScenario {
    pub t1: f64,
    pub t2: f64,
    pub f: CurveFn,
    pub f_prime: CurveFn,
    pub g: CurveFn,
    pub rho1: PowerLaw,
    pub rho2: PowerLaw,
    pub v: PowerLaw,
    pub boundary: bool,
    /// Endpoint behaviour of the integrands, used for quadrature.
    pub endpoints: Endpoints,
    /// Bounds `c1 <= g <= c2`; checked on the validation grid when given.
    pub g_bounds: Option<(f64, f64)>,
}

impl fmt::Debug for CurveScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CurveScenario")
            .field("t1", &self.t1)
            .field("t2", &self.t2)
            .field("rho1", &self.rho1)
            .field("rho2", &self.rho2)
            .field("v", &self.v)
            .field("boundary", &self.boundary)
            .field("endpoints", &self.endpoints)
            .field("g_bounds", &self.g_bounds)
            .finish_non_exhaustive()
    }
}

impl CurveScenario {
    /// Check `inf |f'| > 0` and `0 < c1 <= g <= c2 < inf` on an interior grid.
    pub fn validate(&self) -> Result<()> {
        if !(self.t1.is_finite() && self.t2.is_finite() && self.t1 < self.t2) {
            return domain(format!("need finite T1 < T2, got [{}, {}]", self.t1, self.t2));
        }
        if let Some((c1, c2)) = self.g_bounds {
            if !(c1 > 0.0 && c1 <= c2 && c2.is_finite()) {
                return domain(format!("g bounds must satisfy 0 < c1 <= c2 < inf, got ({c1}, {c2})"));
            }
        }
        let h = (self.t2 - self.t1) / (VALIDATION_POINTS + 1) as f64;
        for k in 1..=VALIDATION_POINTS {
            let t = self.t1 + k as f64 * h;
            let d = (self.f_prime)(t).abs();
            if d.is_nan() || d < MIN_SLOPE {
                return Err(Error::Precondition(format!("|f'({t})| = {d} is below {MIN_SLOPE}")));
            }
            let g = (self.g)(t);
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::Precondition(format!("g({t}) = {g} is not positive and finite")));
            }
            if let Some((c1, c2)) = self.g_bounds {
                if g < c1 || g > c2 {
                    return Err(Error::Precondition(format!("g({t}) = {g} is outside [{c1}, {c2}]")));
                }
            }
        }
        Ok(())
    }

    fn eta(&self) -> Limit {
        Limit::of_squares(&self.rho2, &self.rho1)
    }

    fn gamma(&self, i: usize) -> Limit {
        Limit::of_squares(&self.v, if i == 1 { &self.rho1 } else { &self.rho2 })
    }
}

pub fn classify_curve(scn: &CurveScenario) -> CaseTag {
    match scn.eta() {
        Limit::Zero => match scn.gamma(2) {
            Limit::Zero => CaseTag::CurveEta0Gamma0,
            _ => CaseTag::CurveEta0GammaPos,
        },
        Limit::Finite(_) => match scn.gamma(1) {
            Limit::Zero => CaseTag::CurveEtaFiniteGamma0,
            Limit::Finite(_) => CaseTag::CurveEtaFiniteGammaFinite,
            Limit::Infinite => CaseTag::CurveEtaFiniteGammaInf,
        },
        Limit::Infinite => match scn.gamma(1) {
            Limit::Zero => CaseTag::CurveEtaInfGamma0,
            _ => CaseTag::CurveEtaInfGammaPos,
        },
    }
}

struct Integral {
    value: f64,
    stderr: f64,
    converged: bool,
}

/// Quadrature of an integrand returning `(value, stderr)`. Doubling stops
/// once the change is below `tol` relative or below the propagated stderr.
fn integrate_estimated<H>(h: H, a: f64, b: f64, ends: Endpoints, tol: f64) -> Result<Integral>
where
    H: Fn(f64) -> Result<(f64, f64)>,
{
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let eval = |t: f64, pick: fn((f64, f64)) -> f64| match h(t) {
        Ok(x) => pick(x),
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let run = |n: usize| -> Result<(f64, f64)> {
        let v = quadrature::fixed(&mut |t| eval(t, |x| x.0), a, b, ends, n);
        let s = quadrature::fixed(&mut |t| eval(t, |x| x.1), a, b, ends, n);
        match failure.borrow_mut().take() {
            Some(e) => Err(e),
            None => Ok((v, s)),
        }
    };
    let mut n = MIN_NODES;
    let (mut v, mut s) = run(n)?;
    while n < MAX_NODES {
        n *= 2;
        let (v2, s2) = run(n)?;
        let diff = (v2 - v).abs();
        if diff <= tol * v2.abs() || diff <= s2 || diff == 0.0 {
            return Ok(Integral { value: v2, stderr: s2, converged: true });
        }
        v = v2;
        s = s2;
    }
    Ok(Integral { value: v, stderr: s, converged: false })
}

fn deterministic<F: Fn(f64) -> f64>(f: F) -> impl Fn(f64) -> Result<(f64, f64)> {
    move |t| Ok((f(t), 0.0))
}

pub fn curve_asymptote(scn: &CurveScenario, provider: &dyn ConstantProvider, quad_tol: f64) -> Result<TailAsymptote> {
    scn.validate()?;
    if !(quad_tol > 0.0) {
        return domain(format!("quadrature tolerance must be positive, got {quad_tol}"));
    }
    let case = classify_curve(scn);
    let (a1, a2) = (scn.rho1.alpha(), scn.rho2.alpha());
    let beta = scn.v.alpha();
    let (t1, t2, ends) = (scn.t1, scn.t2, scn.endpoints);
    let one_sided = scn.boundary;
    let (pre, integral, p): (Prefactor, Integral, Ratio<i64>) = match case {
        CaseTag::CurveEta0Gamma0 | CaseTag::CurveEtaFiniteGamma0 | CaseTag::CurveEtaInfGamma0 => {
            let (l1, h1) = get(provider, ConstantId::Pickands { alpha: a1 })?;
            let (l2, h2) = get(provider, ConstantId::Pickands { alpha: a2 })?;
            let g = scn.g.clone();
            let int = integrate_estimated(deterministic(move |t| 1.0 / g(t)), t1, t2, ends, quad_tol)?;
            let pre = Prefactor::new(gamma0_factor(1.0, beta, one_sided))
                .times(gamma0_coeff(&scn.rho1, &scn.rho2, &scn.v))
                .with(&l1, &h1)
                .with(&l2, &h2);
            (pre, int, gamma0_exponent(&scn.rho1, &scn.rho2, &scn.v))
        }
        CaseTag::CurveEta0GammaPos => {
            let (l1, h1) = get(provider, ConstantId::Pickands { alpha: a1 })?;
            let gamma2 = scn.gamma(2).value();
            let int = integrate_estimated(
                |t| {
                    let d = (scn.f_prime)(t).abs();
                    let gt = gamma2 * (d * (scn.g)(t)).powf(a2);
                    let e = provider.get(&ConstantId::Piterbarg { alpha: a2, gamma: gt, one_sided })?;
                    Ok((e.value * d, e.stderr * d))
                },
                t1,
                t2,
                ends,
                quad_tol,
            )?;
            let pre = Prefactor::new(scn.rho1.inv_reciprocal_coeff()).with(&l1, &h1);
            (pre, int, reciprocal(&scn.rho1))
        }
        CaseTag::CurveEtaFiniteGammaFinite => {
            let eta = scn.eta().value();
            let gamma1 = scn.gamma(1).value();
            let int = integrate_estimated(
                |t| {
                    let id = ConstantId::GenPickands {
                        alpha: a1,
                        gamma: gamma1 * (scn.g)(t).powf(a1),
                        b: -eta.powf(-1.0 / a1) * (scn.f_prime)(t).abs(),
                        one_sided,
                    };
                    let e = provider.get(&id)?;
                    Ok((e.value, e.stderr))
                },
                t1,
                t2,
                ends,
                quad_tol,
            )?;
            (Prefactor::new(scn.rho2.inv_reciprocal_coeff()), int, reciprocal(&scn.rho2))
        }
        CaseTag::CurveEtaFiniteGammaInf => {
            let eta = scn.eta().value();
            let (l1, h1) = get(provider, ConstantId::Pickands { alpha: a1 })?;
            let fp = scn.f_prime.clone();
            let int = integrate_estimated(
                deterministic(move |t| (fp(t).abs().powf(a1) / eta + 1.0).powf(1.0 / a1)),
                t1,
                t2,
                ends,
                quad_tol,
            )?;
            (Prefactor::new(scn.rho2.inv_reciprocal_coeff()).with(&l1, &h1), int, reciprocal(&scn.rho2))
        }
        CaseTag::CurveEtaInfGammaPos => {
            let (l2, h2) = get(provider, ConstantId::Pickands { alpha: a2 })?;
            let gamma1 = scn.gamma(1).value();
            let int = integrate_estimated(
                |t| {
                    let gt = gamma1 * (scn.g)(t).powf(beta);
                    let e = provider.get(&ConstantId::Piterbarg { alpha: a1, gamma: gt, one_sided })?;
                    Ok((e.value, e.stderr))
                },
                t1,
                t2,
                ends,
                quad_tol,
            )?;
            (Prefactor::new(scn.rho2.inv_reciprocal_coeff()).with(&l2, &h2), int, reciprocal(&scn.rho2))
        }
        _ => unreachable!("curve classification yields curve tags"),
    };
    Ok(pre.with_integral(integral.value, integral.stderr, integral.converged).finish(case, p))
}

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::{check_positive, reciprocal, CaseTag, Limit, Prefactor, PowerLaw, TailAsymptote};
use crate::constants::{ConstantEstimate, ConstantId, ConstantProvider};
use crate::error::{domain, Error};
use crate::Result;

/// Field on `[-T1, T1] x [-T2, T2]` with variance maximal on `s + b t = 0`,
/// `1 - r ~ rho1^2(|ds|) + rho2^2(|dt|)` and `1 - sigma ~ v^2(|s + b t|)`.
///
/// With `boundary` set the field lives on one side of the line and
/// `segment = (t1, t2)` is the range of `t` along the boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineScenario {
    pub t1: f64,
    pub t2: f64,
    pub b: f64,
    pub rho1: PowerLaw,
    pub rho2: PowerLaw,
    pub v: PowerLaw,
    #[serde(default)]
    pub boundary: bool,
    #[serde(default)]
    pub segment: Option<(f64, f64)>,
}

/// Coordinate change bringing a drifted scenario into drift-free form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reduction {
    None,
    /// `Y(s, t) = X(t, (s - t)/b)`, used when `eta = 0`.
    SwapShear,
    /// `Y(s, t) = X(s - b t, t)`, used when `eta = inf`.
    Shear,
}

impl LineScenario {
    fn validate(&self) -> Result<()> {
        check_positive("T1", self.t1)?;
        check_positive("T2", self.t2)?;
        if !self.b.is_finite() {
            return domain(format!("b must be finite, got {}", self.b));
        }
        if self.boundary {
            match self.segment {
                Some((a, c)) if a.is_finite() && c.is_finite() && a <= c => {}
                Some(_) => return domain("segment must satisfy t1 <= t2"),
                None => return Err(Error::Precondition("boundary scenario needs a segment (t1, t2)".into())),
            }
        }
        Ok(())
    }

    /// `eta = lim rho2^2/rho1^2`.
    pub fn eta(&self) -> Limit {
        Limit::of_squares(&self.rho2, &self.rho1)
    }

    /// `gamma_i = lim v^2/rho_i^2`.
    pub fn gamma(&self, i: usize) -> Limit {
        Limit::of_squares(&self.v, if i == 1 { &self.rho1 } else { &self.rho2 })
    }

    /// Length factor of the positive-gamma formulas.
    fn length(&self) -> f64 {
        if self.boundary {
            let (a, c) = self.segment.unwrap_or((0.0, 0.0));
            c - a
        } else if self.b == 0.0 {
            2.0 * self.t2
        } else {
            2.0 * self.t2.min(self.t1 / self.b.abs())
        }
    }
}

/// Equivalent scenario with `b = 0` or finite `eta`.
pub fn reduce_line(scn: &LineScenario) -> Result<(LineScenario, Reduction)> {
    scn.validate()?;
    if scn.b == 0.0 {
        return Ok((scn.clone(), Reduction::None));
    }
    let ab = scn.b.abs();
    match scn.eta() {
        Limit::Finite(_) => Ok((scn.clone(), Reduction::None)),
        Limit::Zero => {
            let rho1 = PowerLaw::with_ratio(scn.rho2.coeff * ab.powf(-scn.rho2.index_f64()), scn.rho2.index)?;
            let out = LineScenario {
                t1: scn.t1 + ab * scn.t2,
                t2: scn.t1.min(ab * scn.t2),
                b: 0.0,
                rho1,
                rho2: scn.rho1,
                ..scn.clone()
            };
            Ok((out, Reduction::SwapShear))
        }
        Limit::Infinite => {
            let out = LineScenario { t1: scn.t1 + ab * scn.t2, t2: scn.t2.min(scn.t1 / ab), b: 0.0, ..scn.clone() };
            Ok((out, Reduction::Shear))
        }
    }
}

fn classify_reduced(c: &LineScenario) -> CaseTag {
    let drift = c.b != 0.0;
    match (drift, c.gamma(1)) {
        (false, Limit::Zero) => CaseTag::LineGamma0,
        (false, Limit::Finite(_)) => CaseTag::LineGammaFinite,
        (false, Limit::Infinite) => CaseTag::LineGammaInf,
        (true, Limit::Zero) => CaseTag::LineDriftGamma0,
        (true, Limit::Finite(_)) => CaseTag::LineDriftGammaFinite,
        (true, Limit::Infinite) => CaseTag::LineDriftGammaInf,
    }
}

pub fn classify_line(scn: &LineScenario) -> Result<CaseTag> {
    let (c, _) = reduce_line(scn)?;
    Ok(classify_reduced(&c))
}

/// Multiplier `2 L Gamma(1/beta + 1)` of the `gamma = 0` formulas, halved on
/// a boundary.
pub(crate) fn gamma0_factor(length: f64, beta: f64, boundary: bool) -> f64 {
    let g = gamma(1.0 / beta + 1.0);
    2.0 * length * if boundary { 0.5 * g } else { g }
}

/// `2/a1 + 2/a2 - 2/beta`.
pub(crate) fn gamma0_exponent(rho1: &PowerLaw, rho2: &PowerLaw, v: &PowerLaw) -> Ratio<i64> {
    reciprocal(rho1) + reciprocal(rho2) - reciprocal(v)
}

/// Power-law part `v<-(1/u) / (rho1<-(1/u) rho2<-(1/u))` without the `u^p`.
pub(crate) fn gamma0_coeff(rho1: &PowerLaw, rho2: &PowerLaw, v: &PowerLaw) -> f64 {
    rho1.inv_reciprocal_coeff() * rho2.inv_reciprocal_coeff() / v.inv_reciprocal_coeff()
}

pub(crate) fn get(provider: &dyn ConstantProvider, id: ConstantId) -> Result<(String, ConstantEstimate)> {
    let label = match id {
        ConstantId::Pickands { alpha } => format!("{}({alpha})", id.name()),
        ConstantId::Piterbarg { alpha, gamma, .. } => format!("{}({alpha},{gamma})", id.name()),
        ConstantId::GenPickands { alpha, gamma, b, .. } => format!("{}({alpha},{gamma},{b})", id.name()),
    };
    Ok((label, provider.get(&id)?))
}

pub fn line_asymptote(scn: &LineScenario, provider: &dyn ConstantProvider) -> Result<TailAsymptote> {
    let (c, _) = reduce_line(scn)?;
    let case = classify_reduced(&c);
    let length = c.length();
    let (a1, a2) = (c.rho1.alpha(), c.rho2.alpha());
    let mut pre;
    let p;
    match case {
        CaseTag::LineGamma0 | CaseTag::LineDriftGamma0 => {
            let (l1, h1) = get(provider, ConstantId::Pickands { alpha: a1 })?;
            let (l2, h2) = get(provider, ConstantId::Pickands { alpha: a2 })?;
            pre = Prefactor::new(gamma0_factor(length, c.v.alpha(), c.boundary))
                .times(gamma0_coeff(&c.rho1, &c.rho2, &c.v))
                .with(&l1, &h1)
                .with(&l2, &h2);
            p = gamma0_exponent(&c.rho1, &c.rho2, &c.v);
        }
        _ => {
            pre = Prefactor::new(length).times(c.rho2.inv_reciprocal_coeff());
            p = reciprocal(&c.rho2);
            let gamma1 = c.gamma(1).value();
            match case {
                CaseTag::LineGammaFinite | CaseTag::LineGammaInf => {
                    let (l2, h2) = get(provider, ConstantId::Pickands { alpha: a2 })?;
                    pre = pre.with(&l2, &h2);
                    if case == CaseTag::LineGammaFinite {
                        let (l, e) =
                            get(provider, ConstantId::Piterbarg { alpha: a1, gamma: gamma1, one_sided: c.boundary })?;
                        pre = pre.with(&l, &e);
                    }
                }
                CaseTag::LineDriftGammaFinite => {
                    let eta = c.eta().value();
                    let id = ConstantId::GenPickands {
                        alpha: a1,
                        gamma: gamma1,
                        b: c.b * eta.powf(-1.0 / a1),
                        one_sided: c.boundary,
                    };
                    let (l, e) = get(provider, id)?;
                    pre = pre.with(&l, &e);
                }
                CaseTag::LineDriftGammaInf => {
                    let eta = c.eta().value();
                    let (l1, h1) = get(provider, ConstantId::Pickands { alpha: a1 })?;
                    pre = pre.times((c.b.abs().powf(a1) / eta + 1.0).powf(1.0 / a1)).with(&l1, &h1);
                }
                _ => unreachable!("gamma = 0 handled above"),
            }
        }
    }
    if length == 0.0 {
        pre.flag("degenerate-domain".into());
    }
    Ok(pre.finish(case, p))
}

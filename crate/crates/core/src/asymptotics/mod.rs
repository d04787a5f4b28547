//! Case classification and evaluation of the tail asymptotics
//! `P(sup X > u) ~ K u^p Psi(u)`.

mod curve;
mod fbm_sum;
mod line;
pub mod quadrature;

use std::fmt;

use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub use curve::{curve_asymptote, classify_curve, CurveFn, CurveScenario};
pub use fbm_sum::{
    beta_reduced_integral, beta_reduced_weighted_integral, fbm_sum_asymptote, fbm_sum_curve_scenario,
    fbm_sum_via_curve,
};
pub use line::{classify_line, line_asymptote, reduce_line, LineScenario, Reduction};

use crate::constants::ConstantEstimate;
use crate::error::{domain, Error};
use crate::Result;

/// Standard normal tail `Psi(u) = P(N > u)`.
pub fn gaussian_tail(u: f64) -> f64 {
    0.5 * libm::erfc(u / std::f64::consts::SQRT_2)
}

/// Largest denominator accepted for power-law indices.
const MAX_DENOM: i64 = 1_000_000;

/// Exact rational form of `x`, or an error if none with a small denominator
/// reproduces it.
pub fn exact_ratio(x: f64) -> Result<Ratio<i64>> {
    if !x.is_finite() {
        return domain(format!("{x} has no rational form"));
    }
    for d in 1..=MAX_DENOM {
        let n = (x * d as f64).round();
        if (n / d as f64 - x).abs() <= 1e-12 * x.abs().max(1.0) {
            return Ok(Ratio::new(n as i64, d));
        }
    }
    domain(format!("{x} has no rational form with denominator <= {MAX_DENOM}"))
}

/// `w(t) = coeff * t^index` near 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub coeff: f64,
    #[serde(with = "ratio_serde")]
    pub index: Ratio<i64>,
}

impl PowerLaw {
    pub fn new(coeff: f64, index: f64) -> Result<Self> {
        if !(coeff > 0.0 && coeff.is_finite()) {
            return domain(format!("power-law coefficient must be positive and finite, got {coeff}"));
        }
        if !(index > 0.0 && index.is_finite()) {
            return domain(format!("power-law index must be positive and finite, got {index}"));
        }
        Ok(Self { coeff, index: exact_ratio(index)? })
    }

    pub fn with_ratio(coeff: f64, index: Ratio<i64>) -> Result<Self> {
        if !(coeff > 0.0 && coeff.is_finite()) || index <= Ratio::zero() {
            return domain("power law needs a positive coefficient and index");
        }
        Ok(Self { coeff, index })
    }

    /// Correlation-type power law `rho^2(t) = t^alpha`, i.e. `rho(t) = t^(alpha/2)`.
    pub fn unit(alpha: f64) -> Result<Self> {
        Self::new(1.0, alpha / 2.0)
    }

    pub fn index_f64(&self) -> f64 {
        self.index.to_f64().unwrap_or(f64::NAN)
    }

    /// `2 * index`, the regular-variation index of `w^2`.
    pub fn alpha(&self) -> f64 {
        2.0 * self.index_f64()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeff * t.powf(self.index_f64())
    }

    pub fn inverse(&self, x: f64) -> f64 {
        (x / self.coeff).powf(1.0 / self.index_f64())
    }

    /// `1/w<-(1/u) = coeff^(1/index) u^(1/index)`: multiplier of `u^(1/index)`.
    fn inv_reciprocal_coeff(&self) -> f64 {
        self.coeff.powf(1.0 / self.index_f64())
    }

    /// Same index, coefficient multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self { coeff: self.coeff * c, index: self.index }
    }
}

mod ratio_serde {
    use num_rational::Ratio;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Ratio<i64>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Ratio<i64>, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Limit of a ratio of two power laws at 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Limit {
    Zero,
    Finite(f64),
    Infinite,
}

impl Limit {
    /// `lim num^2(t) / den^2(t)` as `t -> 0`, decided from the indices.
    pub fn of_squares(num: &PowerLaw, den: &PowerLaw) -> Self {
        match num.index.cmp(&den.index) {
            std::cmp::Ordering::Greater => Limit::Zero,
            std::cmp::Ordering::Less => Limit::Infinite,
            std::cmp::Ordering::Equal => Limit::Finite((num.coeff / den.coeff).powi(2)),
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Limit::Zero => 0.0,
            Limit::Finite(v) => v,
            Limit::Infinite => f64::INFINITY,
        }
    }
}

/// Which asymptotic formula applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseTag {
    /// Line, no drift, `gamma1 = 0`.
    LineGamma0,
    /// Line, no drift, `gamma1` finite positive.
    LineGammaFinite,
    /// Line, no drift, `gamma1 = inf`.
    LineGammaInf,
    /// Line with drift and finite `eta`, `gamma1 = 0`.
    LineDriftGamma0,
    LineDriftGammaFinite,
    LineDriftGammaInf,
    /// Curve with `eta = 0`, `gamma2 = 0`.
    CurveEta0Gamma0,
    /// Curve with `eta = 0`, `gamma2 > 0`.
    CurveEta0GammaPos,
    CurveEtaFiniteGamma0,
    CurveEtaFiniteGammaFinite,
    CurveEtaFiniteGammaInf,
    CurveEtaInfGamma0,
    CurveEtaInfGammaPos,
    /// fBm sum, `a1 < a2 < 1`.
    FbmSumUnequalSub1,
    /// fBm sum, `a1 < a2 = 1`.
    FbmSumUnequalEq1,
    /// fBm sum, `a1 < a2`, `a2 > 1`.
    FbmSumUnequalSuper1,
    /// fBm sum, `a1 = a2 < 1`.
    FbmSumEqualSub1,
    /// fBm sum, `a1 = a2 = 1`.
    FbmSumEqualEq1,
    /// fBm sum, `a1 = a2 > 1`.
    FbmSumEqualSuper1,
}

impl CaseTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseTag::LineGamma0 => "line-gamma0",
            CaseTag::LineGammaFinite => "line-gamma-finite",
            CaseTag::LineGammaInf => "line-gamma-inf",
            CaseTag::LineDriftGamma0 => "line-drift-gamma0",
            CaseTag::LineDriftGammaFinite => "line-drift-gamma-finite",
            CaseTag::LineDriftGammaInf => "line-drift-gamma-inf",
            CaseTag::CurveEta0Gamma0 => "curve-eta0-gamma0",
            CaseTag::CurveEta0GammaPos => "curve-eta0-gamma-pos",
            CaseTag::CurveEtaFiniteGamma0 => "curve-eta-finite-gamma0",
            CaseTag::CurveEtaFiniteGammaFinite => "curve-eta-finite-gamma-finite",
            CaseTag::CurveEtaFiniteGammaInf => "curve-eta-finite-gamma-inf",
            CaseTag::CurveEtaInfGamma0 => "curve-eta-inf-gamma0",
            CaseTag::CurveEtaInfGammaPos => "curve-eta-inf-gamma-pos",
            CaseTag::FbmSumUnequalSub1 => "fbm-sum-unequal-sub1",
            CaseTag::FbmSumUnequalEq1 => "fbm-sum-unequal-eq1",
            CaseTag::FbmSumUnequalSuper1 => "fbm-sum-unequal-super1",
            CaseTag::FbmSumEqualSub1 => "fbm-sum-equal-sub1",
            CaseTag::FbmSumEqualEq1 => "fbm-sum-equal-eq1",
            CaseTag::FbmSumEqualSuper1 => "fbm-sum-equal-super1",
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `pi(u) ~ k u^p Psi(u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailAsymptote {
    pub case: CaseTag,
    pub k: f64,
    pub k_stderr: f64,
    #[serde(with = "ratio_serde")]
    pub p: Ratio<i64>,
    pub flags: Vec<String>,
}

impl TailAsymptote {
    pub fn p_f64(&self) -> f64 {
        self.p.to_f64().unwrap_or(f64::NAN)
    }

    pub fn evaluate(&self, u: f64) -> f64 {
        if u.is_infinite() && u > 0.0 {
            return 0.0;
        }
        self.k * u.powf(self.p_f64()) * gaussian_tail(u)
    }

    pub fn table(&self, us: &[f64]) -> Vec<(f64, f64)> {
        us.iter().map(|&u| (u, self.evaluate(u))).collect()
    }

    pub fn scaled(mut self, c: f64) -> Self {
        self.k *= c;
        self.k_stderr *= c.abs();
        self
    }

    pub fn flags_label(&self) -> String {
        self.flags.join(";")
    }
}

/// Running product of deterministic factors and estimated constants.
///
/// Relative standard errors add linearly, which is exact for fully
/// correlated factors and conservative otherwise.
#[derive(Debug, Clone)]
pub(crate) struct Prefactor {
    value: f64,
    rel: f64,
    flags: Vec<String>,
}

impl Prefactor {
    pub(crate) fn new(value: f64) -> Self {
        Self { value, rel: 0.0, flags: Vec::new() }
    }

    pub(crate) fn times(mut self, c: f64) -> Self {
        self.value *= c;
        self
    }

    pub(crate) fn with(mut self, label: &str, est: &ConstantEstimate) -> Self {
        self.value *= est.value;
        if est.value != 0.0 {
            self.rel += est.stderr / est.value.abs();
        }
        if !est.converged {
            self.flag(format!("non-converged:{label}"));
        }
        self
    }

    /// Multiply by an integral whose absolute uncertainty is `se`.
    pub(crate) fn with_integral(mut self, value: f64, se: f64, converged: bool) -> Self {
        self.value *= value;
        if value != 0.0 {
            self.rel += se / value.abs();
        }
        if !converged {
            self.flag("quadrature-not-converged".into());
        }
        self
    }

    pub(crate) fn flag(&mut self, f: String) {
        if !self.flags.contains(&f) {
            self.flags.push(f);
        }
    }

    pub(crate) fn finish(self, case: CaseTag, p: Ratio<i64>) -> TailAsymptote {
        TailAsymptote { case, k: self.value, k_stderr: self.value.abs() * self.rel, p, flags: self.flags }
    }
}

/// `1/index` as an exact rational, i.e. `2/alpha`.
pub(crate) fn reciprocal(w: &PowerLaw) -> Ratio<i64> {
    Ratio::<i64>::one() / w.index
}

pub(crate) fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {x}")))
    }
}

//! Monte Carlo estimation of Pickands, Piterbarg and generalized strip
//! constants as `E[exp(sup_{region} (W_{a1,a2} - drift))]`.
//!
//! Every estimator runs each replication at two grid steps, `h` and `h/2`,
//! on one simulated path, and extrapolates linearly in `h^{a/2}` to `h = 0`.
//! Ladder-based limits take slopes between rungs computed on the same
//! replication, so the reported standard error is that of the per-replication
//! combined statistic.

mod engine;
mod provider;

use serde::{Deserialize, Serialize};

pub use provider::{ConstantId, ConstantProvider, MonteCarloProvider, PinnedTable, McSettings};

use crate::error::domain;
use crate::randfield::check_alpha;
use crate::stats::mean_stderr;
use crate::Result;
use engine::{Engine, Target};

pub const DEFAULT_STEP: f64 = 0.05;
pub const DEFAULT_REPS: usize = 1_000_000;
pub const MIN_REPS: usize = 100;

/// `exp(sup)` has a Pareto(1)-like tail cut off near `sup ~ S^a`, so plain Monte
/// Carlo resolves `H[0, S]` only while `S^a` stays well below `ln(reps)`.
/// Ladders therefore end at `S^a = LADDER_SCALE`, capped for runtime.
pub const LADDER_SCALE: f64 = 4.0;
const LADDER_CAP: f64 = 32.0;
const STRIP_LADDER_CAP: f64 = 8.0;

fn snap(x: f64, step: f64) -> f64 {
    (x / step).round().max(1.0) * step
}

/// Default ladder `S/4, S/2, S` for `H_a`, with `S^a = 4`. At `a = 2`,
/// `H_2[0, S] = 1 + S/sqrt(pi)` is exactly linear and the ladder ends at 1.
pub fn default_ladder(alpha: f64, step: f64) -> Vec<f64> {
    let top = if alpha == 2.0 { 1.0 } else { LADDER_SCALE.powf(1.0 / alpha).min(LADDER_CAP) };
    let mut v: Vec<f64> = [0.25, 0.5, 1.0].iter().map(|f| snap(top * f, step)).collect();
    v.dedup();
    v
}

/// Default ladder `S/2, S` for the strip constants, with `S^a = 4`.
pub fn default_strip_ladder(alpha: f64, step: f64) -> Vec<f64> {
    let top = LADDER_SCALE.powf(1.0 / alpha).min(STRIP_LADDER_CAP);
    let mut v: Vec<f64> = [0.5, 1.0].iter().map(|f| snap(top * f, step)).collect();
    v.dedup();
    v
}

/// Extra drift subtracted from `W`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DriftSpec {
    /// `W` alone.
    Pickands,
    /// `gamma |s|^a1` on an interval, giving `sqrt(2) B(s) - (1 + gamma)|s|^a`.
    Piterbarg { gamma: f64 },
    /// `gamma |s + b t|^beta`.
    Generalized { gamma: f64, b: f64, beta: f64 },
}

impl DriftSpec {
    pub fn gamma(&self) -> f64 {
        match *self {
            DriftSpec::Pickands => 0.0,
            DriftSpec::Piterbarg { gamma } | DriftSpec::Generalized { gamma, .. } => gamma,
        }
    }
}

/// Supremum region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RegionSpec {
    /// `[lo, hi]` on the `s` axis; `t` is inactive.
    Interval { lo: f64, hi: f64 },
    /// `{|s + b t| <= S, 0 <= t <= S}`.
    Strip { s: f64, b: f64 },
    /// `{0 <= s + b t <= S, 0 <= t <= S}`.
    HalfStrip { s: f64, b: f64 },
}

impl RegionSpec {
    pub fn is_planar(&self) -> bool {
        !matches!(self, RegionSpec::Interval { .. })
    }

    fn validate(&self) -> Result<()> {
        match *self {
            RegionSpec::Interval { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                    return domain(format!("interval needs finite lo <= hi, got [{lo}, {hi}]"));
                }
            }
            RegionSpec::Strip { s, b } | RegionSpec::HalfStrip { s, b } => {
                if !(s > 0.0 && s.is_finite()) {
                    return domain(format!("region size must be positive, got {s}"));
                }
                if !b.is_finite() {
                    return domain(format!("b must be finite, got {b}"));
                }
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match *self {
            RegionSpec::Interval { lo, hi } => format!("[{lo},{hi}]"),
            RegionSpec::Strip { s, b } => format!("strip(S={s},b={b})"),
            RegionSpec::HalfStrip { s, b } => format!("half-strip(S={s},b={b})"),
        }
    }
}

/// A Monte Carlo estimate; `value`/`stderr` are extrapolated to step 0 when
/// `extrapolated` is set, `raw_*` are at `step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub value: f64,
    pub stderr: f64,
    pub raw_value: f64,
    pub raw_stderr: f64,
    pub s: f64,
    pub step: f64,
    pub reps: usize,
    pub extrapolated: bool,
    pub converged: bool,
}

impl ConstantEstimate {
    /// A value known without simulation.
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            stderr: 0.0,
            raw_value: value,
            raw_stderr: 0.0,
            s: f64::INFINITY,
            step: 0.0,
            reps: 0,
            extrapolated: false,
            converged: true,
        }
    }

    pub fn scaled(self, c: f64) -> Self {
        Self {
            value: self.value * c,
            stderr: self.stderr * c.abs(),
            raw_value: self.raw_value * c,
            raw_stderr: self.raw_stderr * c.abs(),
            ..self
        }
    }
}

/// Extrapolation weight for `Z = Y(h/2) + kappa (Y(h/2) - Y(h))` when the
/// bias scales as `h^e`.
pub fn extrapolation_weight(e: f64) -> f64 {
    1.0 / (2f64.powf(e) - 1.0)
}

fn check_common(step: f64, reps: usize, drift: &DriftSpec) -> Result<()> {
    if !(step > 0.0 && step.is_finite()) {
        return domain(format!("step must be positive, got {step}"));
    }
    if reps < MIN_REPS {
        return domain(format!("reps must be at least {MIN_REPS}, got {reps}"));
    }
    let g = drift.gamma();
    if g.is_nan() || g < 0.0 {
        return domain(format!("gamma must be >= 0, got {g}"));
    }
    if let DriftSpec::Generalized { b, beta, .. } = *drift {
        if !b.is_finite() || !(beta > 0.0 && beta.is_finite()) {
            return domain(format!("generalized drift needs finite b and beta > 0, got b={b}, beta={beta}"));
        }
    }
    Ok(())
}

/// Per-replication values of `exp(sup)` at the fine (`h/2`) and coarse (`h`)
/// steps for each region, sharing one path pair per replication.
struct Coupled {
    reps: usize,
    n: usize,
    /// Row-major `reps x (2 n)`: coarse then fine for each region.
    sups: Vec<f64>,
    kappa: f64,
}

impl Coupled {
    fn run(alpha1: f64, alpha2: f64, regions: &[(RegionSpec, DriftSpec)], step: f64, reps: usize, seed: u64) -> Result<Self> {
        let mut targets = Vec::with_capacity(2 * regions.len());
        for &(region, drift) in regions {
            targets.push(Target { region, drift, stride: 2 });
            targets.push(Target { region, drift, stride: 1 });
        }
        let engine = Engine::new(alpha1, alpha2, step / 2.0, &targets)?;
        let planar = regions[0].0.is_planar();
        let e = if planar { alpha1.min(alpha2) / 2.0 } else { alpha1 / 2.0 };
        Ok(Self { reps, n: regions.len(), sups: engine.run(reps, seed), kappa: extrapolation_weight(e) })
    }

    fn coarse(&self, r: usize, k: usize) -> f64 {
        self.sups[r * 2 * self.n + 2 * k].exp()
    }

    fn fine(&self, r: usize, k: usize) -> f64 {
        self.sups[r * 2 * self.n + 2 * k + 1].exp()
    }

    fn extrapolated(&self, r: usize, k: usize) -> f64 {
        let f = self.fine(r, k);
        f + self.kappa * (f - self.coarse(r, k))
    }

    /// Mean and stderr of a per-replication statistic built from
    /// `(extrapolated, coarse)` accessors.
    fn stat(&self, f: impl Fn(&dyn Fn(usize) -> f64) -> f64) -> ((f64, f64), (f64, f64)) {
        let ext: Vec<f64> = (0..self.reps).map(|r| f(&|k| self.extrapolated(r, k))).collect();
        let raw: Vec<f64> = (0..self.reps).map(|r| f(&|k| self.coarse(r, k))).collect();
        (mean_stderr(&ext), mean_stderr(&raw))
    }
}

fn estimate(ext: (f64, f64), raw: (f64, f64), s: f64, step: f64, reps: usize, converged: bool) -> ConstantEstimate {
    ConstantEstimate {
        value: ext.0,
        stderr: ext.1,
        raw_value: raw.0,
        raw_stderr: raw.1,
        s,
        step,
        reps,
        extrapolated: true,
        converged,
    }
}

fn region_size(region: &RegionSpec) -> f64 {
    match *region {
        RegionSpec::Interval { lo, hi } => hi - lo,
        RegionSpec::Strip { s, .. } | RegionSpec::HalfStrip { s, .. } => s,
    }
}

/// `E[exp(sup_{region}(W_{a1,a2} - drift))]` at steps `h` and `h/2`, extrapolated.
pub fn functional_expectation(
    alpha1: f64,
    alpha2: f64,
    region: RegionSpec,
    drift: DriftSpec,
    step: f64,
    reps: usize,
    seed: u64,
) -> Result<ConstantEstimate> {
    functional_expectations(alpha1, alpha2, &[(region, drift)], step, reps, seed).map(|mut v| v.remove(0))
}

/// [`functional_expectation`] for several region/drift pairs evaluated on
/// common random numbers.
pub fn functional_expectations(
    alpha1: f64,
    alpha2: f64,
    cases: &[(RegionSpec, DriftSpec)],
    step: f64,
    reps: usize,
    seed: u64,
) -> Result<Vec<ConstantEstimate>> {
    if cases.is_empty() {
        return Ok(Vec::new());
    }
    check_alpha(alpha1)?;
    if cases[0].0.is_planar() {
        check_alpha(alpha2)?;
    }
    for (region, drift) in cases {
        region.validate()?;
        check_common(step, reps, drift)?;
        if region.is_planar() != cases[0].0.is_planar() {
            return domain("cannot mix interval and strip regions in one run");
        }
    }
    let mut out = vec![None; cases.len()];
    let mut sim = Vec::new();
    for (k, (region, drift)) in cases.iter().enumerate() {
        if drift.gamma().is_infinite() {
            if region.is_planar() {
                return domain("gamma = inf on a strip: use gen_pickands_rate, which reduces it to a Pickands rate");
            }
            out[k] = Some(ConstantEstimate::exact(1.0));
        } else if matches!(region, RegionSpec::Interval { lo, hi } if *lo == 0.0 && *hi == 0.0) {
            out[k] = Some(ConstantEstimate::exact(1.0));
        } else {
            sim.push(k);
        }
    }
    if !sim.is_empty() {
        let regions: Vec<_> = sim.iter().map(|&k| cases[k]).collect();
        let c = Coupled::run(alpha1, alpha2, &regions, step, reps, seed)?;
        for (m, &k) in sim.iter().enumerate() {
            let (ext, raw) = c.stat(|z| z(m));
            out[k] = Some(estimate(ext, raw, region_size(&cases[k].0), step, reps, true));
        }
    }
    Ok(out.into_iter().map(Option::unwrap).collect())
}

/// `H_a[0, S]`.
pub fn pickands_finite(alpha: f64, s: f64, step: f64, reps: usize, seed: u64) -> Result<ConstantEstimate> {
    if !(s >= 0.0) {
        return domain(format!("S must be >= 0, got {s}"));
    }
    functional_expectation(alpha, alpha, RegionSpec::Interval { lo: 0.0, hi: s }, DriftSpec::Pickands, step, reps, seed)
}

fn check_ladder(ladder: &[f64]) -> Result<()> {
    if ladder.len() < 2 {
        return domain("S ladder needs at least 2 rungs");
    }
    if ladder.iter().any(|s| !(*s > 0.0 && s.is_finite())) || ladder.windows(2).any(|w| w[1] <= w[0]) {
        return domain(format!("S ladder must be positive and strictly increasing, got {ladder:?}"));
    }
    Ok(())
}

/// Convergence rule: successive rungs differ by less than
/// `max(2 stderr, 1e-3 |value|)`.
fn converged(diff: (f64, f64), value: f64) -> bool {
    diff.0.abs() < (2.0 * diff.1).max(1e-3 * value.abs())
}

/// Slope of `F(S)` between the top two rungs and, with three or more rungs,
/// the convergence test against the slope one rung lower.
fn ladder_rate(c: &Coupled, ladder: &[f64], s_top: f64, step: f64, reps: usize) -> ConstantEstimate {
    let n = ladder.len();
    let slope = |z: &dyn Fn(usize) -> f64, k: usize| (z(k) - z(k - 1)) / (ladder[k] - ladder[k - 1]);
    let (ext, raw) = c.stat(|z| slope(z, n - 1));
    let conv = if n >= 3 {
        let (d, _) = c.stat(|z| slope(z, n - 1) - slope(z, n - 2));
        converged(d, ext.0)
    } else {
        true
    };
    estimate(ext, raw, s_top, step, reps, conv)
}

/// `H_a` as the slope of `H_a[0, S]` over the top ladder rungs.
pub fn pickands(alpha: f64, ladder: &[f64], step: f64, reps: usize, seed: u64) -> Result<ConstantEstimate> {
    check_alpha(alpha)?;
    check_ladder(ladder)?;
    check_common(step, reps, &DriftSpec::Pickands)?;
    let regions: Vec<_> = ladder
        .iter()
        .map(|&s| (RegionSpec::Interval { lo: 0.0, hi: s }, DriftSpec::Pickands))
        .collect();
    let c = Coupled::run(alpha, alpha, &regions, step, reps, seed)?;
    Ok(ladder_rate(&c, ladder, *ladder.last().unwrap(), step, reps))
}

/// Rungs `S/4, S/2, S` snapped to multiples of `step`.
pub fn piterbarg_ladder(s: f64, step: f64) -> Vec<f64> {
    let mut out: Vec<f64> = [0.25, 0.5, 1.0].iter().map(|f| snap(s * f, step)).collect();
    out.dedup();
    out
}

/// `P_a^gamma` (two-sided, `[-S, S]`) or `P-hat_a^gamma` (one-sided, `[0, S]`)
/// evaluated at the top of the ladder `S/4, S/2, S`.
pub fn piterbarg(
    alpha: f64,
    gamma: f64,
    s: f64,
    one_sided: bool,
    step: f64,
    reps: usize,
    seed: u64,
) -> Result<ConstantEstimate> {
    check_alpha(alpha)?;
    let drift = DriftSpec::Piterbarg { gamma };
    check_common(step, reps, &drift)?;
    if gamma.is_infinite() {
        return Ok(ConstantEstimate::exact(1.0));
    }
    if gamma == 0.0 {
        return domain("Piterbarg constants need gamma > 0");
    }
    if !(s > 0.0 && s.is_finite()) {
        return domain(format!("S must be positive, got {s}"));
    }
    let ladder = piterbarg_ladder(s, step);
    let regions: Vec<_> = ladder
        .iter()
        .map(|&r| (RegionSpec::Interval { lo: if one_sided { 0.0 } else { -r }, hi: r }, drift))
        .collect();
    let c = Coupled::run(alpha, alpha, &regions, step, reps, seed)?;
    let n = ladder.len();
    let (ext, raw) = c.stat(|z| z(n - 1));
    let conv = n < 2 || converged(c.stat(|z| z(n - 1) - z(n - 2)).0, ext.0);
    Ok(estimate(ext, raw, ladder[n - 1], step, reps, conv))
}

/// `H_a^{gamma,b}` (strip) or `H-hat_a^{gamma,b}` (half-strip) as the slope of
/// `H_a^{gamma,b}(S)` over the top ladder rungs, with `beta = a`.
///
/// `gamma = inf` restricts the supremum to the line `s = -b t`, where
/// `sqrt(2)(B1(-b t) + B2(t))` has the law of `sqrt(2) B(c t)` with
/// `c = (|b|^a + 1)^{1/a}`; the rate is then `c H_a`.
#[allow(clippy::too_many_arguments)]
pub fn gen_pickands_rate(
    alpha: f64,
    gamma: f64,
    b: f64,
    one_sided: bool,
    ladder: &[f64],
    step: f64,
    reps: usize,
    seed: u64,
) -> Result<ConstantEstimate> {
    check_alpha(alpha)?;
    check_ladder(ladder)?;
    let drift = DriftSpec::Generalized { gamma, b, beta: alpha };
    check_common(step, reps, &drift)?;
    if gamma == 0.0 {
        return domain("generalized Pickands rate needs gamma > 0");
    }
    if gamma.is_infinite() {
        let c = (b.abs().powf(alpha) + 1.0).powf(1.0 / alpha);
        return Ok(pickands(alpha, ladder, step, reps, seed)?.scaled(c));
    }
    let regions: Vec<_> = ladder
        .iter()
        .map(|&s| {
            let region = if one_sided { RegionSpec::HalfStrip { s, b } } else { RegionSpec::Strip { s, b } };
            (region, drift)
        })
        .collect();
    let c = Coupled::run(alpha, alpha, &regions, step, reps, seed)?;
    Ok(ladder_rate(&c, ladder, *ladder.last().unwrap(), step, reps))
}

/// One CSV row of an estimate.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateRecord {
    #[serde(rename = "constant-id")]
    pub constant_id: String,
    pub alpha1: f64,
    pub alpha2: Option<f64>,
    pub gamma: Option<f64>,
    pub b: Option<f64>,
    pub beta: Option<f64>,
    pub region: String,
    #[serde(rename = "S")]
    pub s: f64,
    pub step: f64,
    pub reps: usize,
    pub value: f64,
    pub stderr: f64,
    pub extrapolated: bool,
    pub converged: bool,
}

impl EstimateRecord {
    /// The raw (step `h`) row followed by the extrapolated row.
    pub fn pair(id: &ConstantId, region: String, est: &ConstantEstimate) -> Vec<Self> {
        let (alpha1, alpha2, gamma, b, beta) = id.parameters();
        let row = |value, stderr, step, extrapolated| Self {
            constant_id: id.name().to_string(),
            alpha1,
            alpha2,
            gamma,
            b,
            beta,
            region: region.clone(),
            s: est.s,
            step,
            reps: est.reps,
            value,
            stderr,
            extrapolated,
            converged: est.converged,
        };
        if est.extrapolated {
            vec![row(est.raw_value, est.raw_stderr, est.step, false), row(est.value, est.stderr, 0.0, true)]
        } else {
            vec![row(est.value, est.stderr, est.step, false)]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collapsed_region_and_infinite_gamma_are_exact() {
        let p = RegionSpec::Interval { lo: 0.0, hi: 0.0 };
        let e = functional_expectation(1.0, 1.0, p, DriftSpec::Pickands, 0.05, 100, 1).unwrap();
        assert_eq!((e.value, e.stderr), (1.0, 0.0));
        let r = RegionSpec::Interval { lo: 0.0, hi: 2.0 };
        let e = functional_expectation(1.0, 1.0, r, DriftSpec::Piterbarg { gamma: f64::INFINITY }, 0.05, 100, 1).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(piterbarg(0.7, f64::INFINITY, 4.0, true, 0.05, 100, 1).unwrap().value, 1.0);
    }

    #[test]
    fn domain_errors() {
        let r = RegionSpec::Interval { lo: 0.0, hi: 1.0 };
        assert!(functional_expectation(1.0, 1.0, r, DriftSpec::Piterbarg { gamma: -1.0 }, 0.05, 100, 1).is_err());
        assert!(functional_expectation(1.0, 1.0, RegionSpec::Strip { s: 0.0, b: 0.0 }, DriftSpec::Pickands, 0.05, 100, 1).is_err());
        assert!(functional_expectation(1.0, 1.0, r, DriftSpec::Pickands, 0.05, 10, 1).is_err());
        assert!(pickands(1.0, &[2.0], 0.05, 100, 1).is_err());
        assert!(gen_pickands_rate(1.0, 0.0, 1.0, false, &[1.0, 2.0], 0.05, 100, 1).is_err());
    }

    #[test]
    fn extrapolation_weight_values() {
        assert!((extrapolation_weight(1.0) - 1.0).abs() < 1e-15);
        assert!((extrapolation_weight(0.5) - (1.0 + 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn functional_is_at_least_one_and_monotone_in_region_and_drift() {
        let cases = [
            (RegionSpec::Interval { lo: 0.0, hi: 1.0 }, DriftSpec::Pickands),
            (RegionSpec::Interval { lo: 0.0, hi: 2.0 }, DriftSpec::Pickands),
            (RegionSpec::Interval { lo: 0.0, hi: 2.0 }, DriftSpec::Piterbarg { gamma: 0.5 }),
            (RegionSpec::Interval { lo: -2.0, hi: 2.0 }, DriftSpec::Piterbarg { gamma: 0.5 }),
        ];
        let v = functional_expectations(0.8, 0.8, &cases, 0.1, 2000, 5).unwrap();
        for e in &v {
            assert!(e.raw_value >= 1.0 && e.stderr.is_finite());
        }
        assert!(v[1].raw_value >= v[0].raw_value);
        assert!(v[2].raw_value <= v[1].raw_value);
        assert!(v[3].raw_value >= v[2].raw_value);
    }

    #[test]
    fn default_ladders_scale_with_alpha() {
        let close = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12);
        assert!(close(&default_ladder(1.0, 0.05), &[1.0, 2.0, 4.0]));
        assert!(close(&default_ladder(2.0, 0.05), &[0.25, 0.5, 1.0]));
        assert!(close(&default_ladder(0.5, 0.05), &[4.0, 8.0, 16.0]));
        assert!(close(&default_strip_ladder(1.0, 0.05), &[2.0, 4.0]));
    }

    #[test]
    fn piterbarg_ladder_snaps_to_step() {
        for (a, b) in piterbarg_ladder(8.0, 0.05).iter().zip([2.0, 4.0, 8.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let l = piterbarg_ladder(1.0, 0.15);
        assert!((l[0] - 0.3).abs() < 1e-12 && (l[1] - 0.45).abs() < 1e-12 && (l[2] - 1.05).abs() < 1e-12);
    }

    #[test]
    fn csv_pair_has_raw_then_extrapolated() {
        let id = ConstantId::Pickands { alpha: 1.0 };
        let est = estimate((1.0, 0.1), (0.9, 0.1), 8.0, 0.05, 100, true);
        let rows = EstimateRecord::pair(&id, "[0,8]".into(), &est);
        assert_eq!(rows.len(), 2);
        assert!(!rows[0].extrapolated && rows[1].extrapolated);
        assert_eq!(rows[1].step, 0.0);
    }
}

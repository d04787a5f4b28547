use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{
    default_ladder, default_strip_ladder, gen_pickands_rate, pickands, piterbarg, ConstantEstimate, DEFAULT_REPS,
    DEFAULT_STEP,
};
use crate::error::Error;
use crate::Result;

/// The constants appearing in the asymptotic formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ConstantId {
    /// `H_a`.
    Pickands { alpha: f64 },
    /// `P_a^gamma`, or `P-hat_a^gamma` when one-sided.
    Piterbarg { alpha: f64, gamma: f64, one_sided: bool },
    /// `H_a^{gamma,b}`, or `H-hat_a^{gamma,b}` when one-sided.
    GenPickands { alpha: f64, gamma: f64, b: f64, one_sided: bool },
}

impl ConstantId {
    pub fn name(&self) -> &'static str {
        match self {
            ConstantId::Pickands { .. } => "pickands",
            ConstantId::Piterbarg { one_sided: false, .. } => "piterbarg",
            ConstantId::Piterbarg { one_sided: true, .. } => "piterbarg-hat",
            ConstantId::GenPickands { one_sided: false, .. } => "gen-pickands",
            ConstantId::GenPickands { one_sided: true, .. } => "gen-pickands-hat",
        }
    }

    /// `(alpha1, alpha2, gamma, b, beta)` as reported in CSV rows.
    pub fn parameters(&self) -> (f64, Option<f64>, Option<f64>, Option<f64>, Option<f64>) {
        match *self {
            ConstantId::Pickands { alpha } => (alpha, None, None, None, None),
            ConstantId::Piterbarg { alpha, gamma, .. } => (alpha, None, Some(gamma), None, None),
            ConstantId::GenPickands { alpha, gamma, b, .. } => (alpha, Some(alpha), Some(gamma), Some(b), Some(alpha)),
        }
    }

    fn key(&self) -> String {
        let f = |x: f64| if x.is_finite() { format!("{:.12e}", x) } else { format!("{x}") };
        match *self {
            ConstantId::Pickands { alpha } => format!("H:{}", f(alpha)),
            ConstantId::Piterbarg { alpha, gamma, one_sided } => format!("P:{}:{}:{one_sided}", f(alpha), f(gamma)),
            ConstantId::GenPickands { alpha, gamma, b, one_sided } => {
                format!("G:{}:{}:{}:{one_sided}", f(alpha), f(gamma), f(b))
            }
        }
    }

    fn matches(&self, other: &ConstantId, tol: f64) -> bool {
        let eq = |a: f64, b: f64| a == b || (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0);
        match (*self, *other) {
            (ConstantId::Pickands { alpha: a }, ConstantId::Pickands { alpha: b }) => eq(a, b),
            (
                ConstantId::Piterbarg { alpha: a1, gamma: g1, one_sided: o1 },
                ConstantId::Piterbarg { alpha: a2, gamma: g2, one_sided: o2 },
            ) => o1 == o2 && eq(a1, a2) && eq(g1, g2),
            (
                ConstantId::GenPickands { alpha: a1, gamma: g1, b: b1, one_sided: o1 },
                ConstantId::GenPickands { alpha: a2, gamma: g2, b: b2, one_sided: o2 },
            ) => o1 == o2 && eq(a1, a2) && eq(g1, g2) && eq(b1, b2),
            _ => false,
        }
    }
}

/// Source of constant values for the asymptotic formulas.
pub trait ConstantProvider: Send + Sync {
    fn get(&self, id: &ConstantId) -> Result<ConstantEstimate>;
}

/// Values known in closed form.
///
/// `H_1 = 1`, `H_2 = 1/sqrt(pi)`; for `a = 1` the supremum of drifted Brownian
/// motion is exponential, giving `P-hat_1^g = 1 + 1/g` and
/// `P_1^g = 1 + 2/g - 1/(1 + 2g)`; for `a = 2` the path is `t N`, giving
/// `P-hat_2^g = (1 + sqrt(1 + 1/g))/2` and `P_2^g = sqrt(1 + 1/g)`. With
/// `b = 0` the strip constants factor as `P_a^g H_a`.
pub fn closed_form(id: &ConstantId) -> Option<f64> {
    match *id {
        ConstantId::Pickands { alpha } if alpha == 1.0 => Some(1.0),
        ConstantId::Pickands { alpha } if alpha == 2.0 => Some(std::f64::consts::FRAC_2_SQRT_PI / 2.0),
        ConstantId::Pickands { .. } => None,
        ConstantId::Piterbarg { gamma, .. } if gamma.is_infinite() => Some(1.0),
        ConstantId::Piterbarg { alpha, gamma, one_sided } if alpha == 1.0 => Some(if one_sided {
            1.0 + 1.0 / gamma
        } else {
            1.0 + 2.0 / gamma - 1.0 / (1.0 + 2.0 * gamma)
        }),
        ConstantId::Piterbarg { alpha, gamma, one_sided } if alpha == 2.0 => {
            let r = (1.0 + 1.0 / gamma).sqrt();
            Some(if one_sided { 0.5 + 0.5 * r } else { r })
        }
        ConstantId::Piterbarg { .. } => None,
        ConstantId::GenPickands { alpha, gamma, b, .. } if gamma.is_infinite() => {
            let c = (b.abs().powf(alpha) + 1.0).powf(1.0 / alpha);
            closed_form(&ConstantId::Pickands { alpha }).map(|h| c * h)
        }
        ConstantId::GenPickands { alpha, gamma, b, one_sided } if b == 0.0 => {
            let p = closed_form(&ConstantId::Piterbarg { alpha, gamma, one_sided })?;
            closed_form(&ConstantId::Pickands { alpha }).map(|h| p * h)
        }
        ConstantId::GenPickands { .. } => None,
    }
}

/// Fixed table of constant values, optionally backed by [`closed_form`].
#[derive(Debug, Clone, Default)]
pub struct PinnedTable {
    entries: Vec<(ConstantId, ConstantEstimate)>,
    closed_forms: bool,
    tol: f64,
}

impl PinnedTable {
    /// Empty table; parameters match within relative tolerance `1e-9`.
    pub fn new() -> Self {
        Self { entries: Vec::new(), closed_forms: false, tol: 1e-9 }
    }

    /// Table answering every closed-form constant.
    pub fn with_closed_forms() -> Self {
        Self { closed_forms: true, ..Self::new() }
    }

    pub fn pin(mut self, id: ConstantId, value: f64) -> Self {
        self.entries.push((id, ConstantEstimate::exact(value)));
        self
    }

    pub fn pin_estimate(mut self, id: ConstantId, est: ConstantEstimate) -> Self {
        self.entries.push((id, est));
        self
    }
}

impl ConstantProvider for PinnedTable {
    fn get(&self, id: &ConstantId) -> Result<ConstantEstimate> {
        if let Some((_, e)) = self.entries.iter().find(|(k, _)| k.matches(id, self.tol)) {
            return Ok(*e);
        }
        if self.closed_forms {
            if let Some(v) = closed_form(id) {
                return Ok(ConstantEstimate::exact(v));
            }
        }
        Err(Error::Unavailable(format!("{id:?} is not pinned")))
    }
}

/// Simulation settings of a [`MonteCarloProvider`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSettings {
    pub step: f64,
    pub reps: usize,
    pub seed: u64,
    /// Ladder for `H_a`; `None` selects [`default_ladder`].
    pub ladder: Option<Vec<f64>>,
    /// Ladder for the strip constants; `None` selects [`default_strip_ladder`].
    pub strip_ladder: Option<Vec<f64>>,
    /// Top of the Piterbarg ladder `S/4, S/2, S`.
    pub piterbarg_s: f64,
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            step: DEFAULT_STEP,
            reps: DEFAULT_REPS,
            seed: 0,
            ladder: None,
            strip_ladder: None,
            piterbarg_s: 8.0,
        }
    }
}

/// Live Monte Carlo estimates, memoized per constant. All constants share the
/// master seed, so nearby parameters are estimated on common random numbers.
pub struct MonteCarloProvider {
    pub settings: McSettings,
    cache: Mutex<HashMap<String, ConstantEstimate>>,
}

impl MonteCarloProvider {
    pub fn new(settings: McSettings) -> Self {
        Self { settings, cache: Mutex::new(HashMap::new()) }
    }

    fn compute(&self, id: &ConstantId) -> Result<ConstantEstimate> {
        let s = &self.settings;
        match *id {
            ConstantId::Pickands { alpha } => {
                let ladder = s.ladder.clone().unwrap_or_else(|| default_ladder(alpha, s.step));
                pickands(alpha, &ladder, s.step, s.reps, s.seed)
            }
            ConstantId::Piterbarg { alpha, gamma, one_sided } => {
                piterbarg(alpha, gamma, s.piterbarg_s, one_sided, s.step, s.reps, s.seed)
            }
            ConstantId::GenPickands { alpha, gamma, b, .. } if gamma.is_infinite() => {
                let c = (b.abs().powf(alpha) + 1.0).powf(1.0 / alpha);
                Ok(self.get(&ConstantId::Pickands { alpha })?.scaled(c))
            }
            ConstantId::GenPickands { alpha, gamma, b, one_sided } => {
                let ladder = s.strip_ladder.clone().unwrap_or_else(|| default_strip_ladder(alpha, s.step));
                gen_pickands_rate(alpha, gamma, b, one_sided, &ladder, s.step, s.reps, s.seed)
            }
        }
    }
}

impl ConstantProvider for MonteCarloProvider {
    fn get(&self, id: &ConstantId) -> Result<ConstantEstimate> {
        let key = id.key();
        if let Some(e) = self.cache.lock().unwrap().get(&key) {
            return Ok(*e);
        }
        let est = self.compute(id)?;
        self.cache.lock().unwrap().insert(key, est);
        Ok(est)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(closed_form(&ConstantId::Pickands { alpha: 1.0 }), Some(1.0));
        let h2 = closed_form(&ConstantId::Pickands { alpha: 2.0 }).unwrap();
        assert!((h2 - 0.564_189_583_547_756_3).abs() < 1e-15);
        let p = closed_form(&ConstantId::Piterbarg { alpha: 1.0, gamma: 1.0, one_sided: true }).unwrap();
        assert_eq!(p, 2.0);
        let inf = closed_form(&ConstantId::Piterbarg { alpha: 0.3, gamma: f64::INFINITY, one_sided: false });
        assert_eq!(inf, Some(1.0));
        let g = closed_form(&ConstantId::GenPickands { alpha: 1.0, gamma: f64::INFINITY, b: 1.0, one_sided: false });
        assert_eq!(g, Some(2.0));
        assert_eq!(closed_form(&ConstantId::Pickands { alpha: 0.5 }), None);
    }

    #[test]
    fn pinned_table_lookup() {
        let t = PinnedTable::new().pin(ConstantId::Pickands { alpha: 0.5 }, 7.0);
        assert_eq!(t.get(&ConstantId::Pickands { alpha: 0.5 + 1e-12 }).unwrap().value, 7.0);
        assert!(t.get(&ConstantId::Pickands { alpha: 1.0 }).is_err());
        let c = PinnedTable::with_closed_forms();
        assert_eq!(c.get(&ConstantId::Pickands { alpha: 1.0 }).unwrap().value, 1.0);
    }

    #[test]
    fn monte_carlo_provider_caches() {
        let p = MonteCarloProvider::new(McSettings {
            step: 0.1,
            reps: 200,
            seed: 3,
            ladder: Some(vec![0.5, 1.0]),
            strip_ladder: Some(vec![0.5, 1.0]),
            piterbarg_s: 1.0,
        });
        let id = ConstantId::Piterbarg { alpha: 1.0, gamma: 1.0, one_sided: true };
        let a = p.get(&id).unwrap();
        let b = p.get(&id).unwrap();
        assert_eq!(a, b);
        let inf = ConstantId::Piterbarg { alpha: 1.0, gamma: f64::INFINITY, one_sided: true };
        assert_eq!(p.get(&inf).unwrap().value, 1.0);
    }
}

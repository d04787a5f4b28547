use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::constants::{DEFAULT_REPS, DEFAULT_STEP, MIN_REPS};
use crate::harness::{DEFAULT_DELTAS, MIN_GRID};
use crate::{Error, Result};

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

fn check_alpha(name: &str, a: f64, allow_two: bool) -> Result<()> {
    let ok = a > 0.0 && (a < 2.0 || (allow_two && a == 2.0));
    if ok {
        Ok(())
    } else {
        config_err(format!("{name} = {a} is outside {}", if allow_two { "(0, 2]" } else { "(0, 2)" }))
    }
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        config_err(format!("{name} = {x} must be positive and finite"))
    }
}

fn check_increasing(name: &str, xs: &[f64]) -> Result<()> {
    if xs.is_empty() || xs.iter().any(|x| !x.is_finite()) || xs.windows(2).any(|w| w[1] <= w[0]) {
        return config_err(format!("{name} must be a non-empty increasing list of finite values"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FieldChoice {
    /// Single fBm path.
    Fbm,
    /// The field `W_{a1,a2}`.
    W,
    /// `B_a1(s) + B_a2(t)`.
    FbmSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ConstantKind {
    Pickands,
    Piterbarg,
    GenPickands,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ConstantsSource {
    /// Live Monte Carlo estimates.
    Mc,
    /// Closed-form values only; other constants are an error.
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// fBm sum, `a1 = 0.5 < a2 = 0.8 < 1`.
    Cor41Sub1,
    /// fBm sum, `a1 = 0.5 < a2 = 1`.
    Cor41Eq1,
    /// fBm sum, `a1 = 0.8 < a2 = 1.5`.
    Cor41Super1,
    /// fBm sum, `a1 = a2 = 0.5`.
    Cor42Sub1,
    /// fBm sum, `a1 = a2 = 1`.
    Cor42Alpha1,
    /// fBm sum, `a1 = a2 = 1.5`.
    Cor42Super1,
}

impl Preset {
    pub fn alphas(&self) -> (f64, f64) {
        match self {
            Preset::Cor41Sub1 => (0.5, 0.8),
            Preset::Cor41Eq1 => (0.5, 1.0),
            Preset::Cor41Super1 => (0.8, 1.5),
            Preset::Cor42Sub1 => (0.5, 0.5),
            Preset::Cor42Alpha1 => (1.0, 1.0),
            Preset::Cor42Super1 => (1.5, 1.5),
        }
    }
}

fn default_end() -> f64 {
    1.0
}

fn default_n() -> usize {
    17
}

fn default_step() -> f64 {
    DEFAULT_STEP
}

fn default_reps() -> usize {
    DEFAULT_REPS
}

fn default_us() -> Vec<f64> {
    vec![2.0, 3.0, 4.0, 5.0]
}

fn default_compare_us() -> Vec<f64> {
    vec![2.5, 3.0, 3.5]
}

fn default_grids() -> Vec<usize> {
    vec![100, 200, 400]
}

fn default_compare_reps() -> usize {
    200_000
}

fn default_deltas() -> Vec<f64> {
    DEFAULT_DELTAS.to_vec()
}

fn default_points() -> usize {
    1000
}

fn default_one() -> f64 {
    1.0
}

fn default_source() -> ConstantsSource {
    ConstantsSource::Mc
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub field: FieldChoice,
    /// Index of a single path.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub alpha1: Option<f64>,
    #[arg(long)]
    pub alpha2: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    #[serde(default)]
    pub start: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    #[serde(default = "default_end")]
    pub end: f64,
    #[arg(long, default_value_t = 17)]
    #[serde(default = "default_n")]
    pub n: usize,
    /// Second-axis grid; defaults to the first.
    #[arg(long, allow_hyphen_values = true)]
    pub t_start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub t_n: Option<usize>,
}

impl SimulateArgs {
    fn validate(&self) -> Result<()> {
        match self.field {
            FieldChoice::Fbm => {
                let Some(a) = self.alpha else { return config_err("simulate --field fbm needs alpha") };
                check_alpha("alpha", a, true)?;
            }
            _ => {
                let (Some(a1), Some(a2)) = (self.alpha1, self.alpha2) else {
                    return config_err("field simulation needs alpha1 and alpha2");
                };
                check_alpha("alpha1", a1, true)?;
                check_alpha("alpha2", a2, true)?;
            }
        }
        for (lo, hi, n) in [
            (self.start, self.end, self.n),
            (self.t_start.unwrap_or(self.start), self.t_end.unwrap_or(self.end), self.t_n.unwrap_or(self.n)),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) || n < 2 {
                return config_err(format!("grid [{lo}, {hi}] with {n} points is invalid"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantArgs {
    #[arg(long, value_enum)]
    pub kind: ConstantKind,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// One-sided (hat) variant.
    #[arg(long)]
    #[serde(default)]
    pub one_sided: bool,
    /// Ladder of `S` values for rate constants.
    #[arg(long, value_delimiter = ',')]
    pub ladder: Option<Vec<f64>>,
    /// Top of the Piterbarg ladder.
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_STEP)]
    #[serde(default = "default_step")]
    pub step: f64,
    #[arg(long, default_value_t = DEFAULT_REPS)]
    #[serde(default = "default_reps")]
    pub reps: usize,
}

impl ConstantArgs {
    fn validate(&self) -> Result<()> {
        check_alpha("alpha", self.alpha, true)?;
        check_positive("step", self.step)?;
        if self.reps < MIN_REPS {
            return config_err(format!("reps = {} is below {MIN_REPS}", self.reps));
        }
        if let Some(l) = &self.ladder {
            check_increasing("ladder", l)?;
            if l.len() < 2 || l[0] <= 0.0 {
                return config_err("ladder needs at least two positive values");
            }
        }
        if let Some(s) = self.s {
            check_positive("s", s)?;
        }
        match self.kind {
            ConstantKind::Pickands => {}
            ConstantKind::Piterbarg | ConstantKind::GenPickands => match self.gamma {
                Some(g) if g > 0.0 => {}
                _ => return config_err("gamma must be given and positive"),
            },
        }
        if self.kind == ConstantKind::GenPickands && !self.b.is_some_and(f64::is_finite) {
            return config_err("gen-pickands needs a finite b");
        }
        Ok(())
    }
}

/// Constant source shared by the asymptote-producing commands.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceArgs {
    #[arg(long, value_enum, default_value_t = ConstantsSource::Mc)]
    #[serde(default = "default_source")]
    pub constants: ConstantsSource,
    /// Replications per Monte Carlo constant.
    #[arg(long, default_value_t = DEFAULT_REPS)]
    #[serde(default = "default_reps")]
    pub mc_reps: usize,
    #[arg(long, default_value_t = DEFAULT_STEP)]
    #[serde(default = "default_step")]
    pub mc_step: f64,
}

impl Default for SourceArgs {
    fn default() -> Self {
        Self { constants: ConstantsSource::Mc, mc_reps: DEFAULT_REPS, mc_step: DEFAULT_STEP }
    }
}

impl SourceArgs {
    fn validate(&self) -> Result<()> {
        check_positive("mc_step", self.mc_step)?;
        if self.mc_reps < MIN_REPS {
            return config_err(format!("mc_reps = {} is below {MIN_REPS}", self.mc_reps));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoteArgs {
    /// Bundled scenario; overrides the line parameters.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "default_one")]
    pub t1: f64,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "default_one")]
    pub t2: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    #[serde(default)]
    pub b: f64,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "default_one")]
    pub alpha1: f64,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "default_one")]
    pub alpha2: f64,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "default_one")]
    pub beta: f64,
    /// Coefficient of `rho1`.
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "default_one")]
    pub c1: f64,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "default_one")]
    pub c2: f64,
    /// Coefficient of `v`.
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "default_one")]
    pub cv: f64,
    /// Half-space variant with boundary segment `[seg_lo, seg_hi]`.
    #[arg(long)]
    #[serde(default)]
    pub boundary: bool,
    #[arg(long, allow_hyphen_values = true)]
    pub seg_lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub seg_hi: Option<f64>,
    /// Thresholds for the evaluated table.
    #[arg(long, value_delimiter = ',', default_values_t = default_us())]
    #[serde(default = "default_us")]
    pub u: Vec<f64>,
    #[command(flatten)]
    #[serde(default)]
    pub source: SourceArgs,
}

impl AsymptoteArgs {
    fn validate(&self) -> Result<()> {
        self.source.validate()?;
        check_increasing("u", &self.u)?;
        if self.preset.is_some() {
            return Ok(());
        }
        check_positive("t1", self.t1)?;
        check_positive("t2", self.t2)?;
        if !self.b.is_finite() {
            return config_err("b must be finite");
        }
        check_alpha("alpha1", self.alpha1, true)?;
        check_alpha("alpha2", self.alpha2, true)?;
        check_positive("beta", self.beta)?;
        for (n, c) in [("c1", self.c1), ("c2", self.c2), ("cv", self.cv)] {
            check_positive(n, c)?;
        }
        if self.boundary {
            match (self.seg_lo, self.seg_hi) {
                (Some(a), Some(b)) if a.is_finite() && b.is_finite() && a <= b => {}
                _ => return config_err("boundary scenarios need seg_lo <= seg_hi"),
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FbmSumArgs {
    #[arg(long)]
    pub alpha1: f64,
    #[arg(long)]
    pub alpha2: f64,
    #[arg(long, value_delimiter = ',', default_values_t = default_us())]
    #[serde(default = "default_us")]
    pub u: Vec<f64>,
    #[command(flatten)]
    #[serde(default)]
    pub source: SourceArgs,
}

impl FbmSumArgs {
    fn validate(&self) -> Result<()> {
        check_alpha("alpha1", self.alpha1, false)?;
        check_alpha("alpha2", self.alpha2, false)?;
        check_increasing("u", &self.u)?;
        self.source.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareArgs {
    #[arg(long)]
    pub alpha1: f64,
    #[arg(long)]
    pub alpha2: f64,
    #[arg(long, value_delimiter = ',', default_values_t = default_compare_us())]
    #[serde(default = "default_compare_us")]
    pub u: Vec<f64>,
    /// Nested grid ladder (intervals per axis).
    #[arg(long, value_delimiter = ',', default_values_t = default_grids())]
    #[serde(default = "default_grids")]
    pub grids: Vec<usize>,
    #[arg(long, default_value_t = default_compare_reps())]
    #[serde(default = "default_compare_reps")]
    pub reps: usize,
    #[command(flatten)]
    #[serde(default)]
    pub source: SourceArgs,
}

impl CompareArgs {
    fn validate(&self) -> Result<()> {
        check_alpha("alpha1", self.alpha1, false)?;
        check_alpha("alpha2", self.alpha2, false)?;
        check_increasing("u", &self.u)?;
        if self.u[0] <= 0.0 {
            return config_err("u must be positive");
        }
        let fine = self.grids.iter().copied().max().unwrap_or(0);
        if self.grids.is_empty() || self.grids.iter().any(|&g| g < MIN_GRID || g % 2 != 0 || fine % g != 0) {
            return config_err(format!("grids must be even, at least {MIN_GRID}, and divide the largest grid"));
        }
        if self.reps == 0 {
            return config_err("reps must be positive");
        }
        self.source.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionArgs {
    #[arg(long)]
    pub alpha1: f64,
    #[arg(long)]
    pub alpha2: f64,
    #[arg(long, value_delimiter = ',', default_values_t = default_deltas())]
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    /// Sample points (or pairs) per boundary distance.
    #[arg(long, default_value_t = 1000)]
    #[serde(default = "default_points")]
    pub points: usize,
}

impl ExpansionArgs {
    fn validate(&self) -> Result<()> {
        check_alpha("alpha1", self.alpha1, false)?;
        check_alpha("alpha2", self.alpha2, false)?;
        if self.deltas.is_empty() || self.deltas.iter().any(|&d| !(d > 0.0 && d < 1.0)) {
            return config_err("deltas must lie in (0, 1)");
        }
        if self.points == 0 {
            return config_err("points must be positive");
        }
        Ok(())
    }
}

/// One command with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Simulate(SimulateArgs),
    Constant(ConstantArgs),
    Asymptote(AsymptoteArgs),
    FbmSum(FbmSumArgs),
    Compare(CompareArgs),
    CheckExpansions(ExpansionArgs),
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Simulate(_) => "simulate",
            Task::Constant(_) => "constant",
            Task::Asymptote(_) => "asymptote",
            Task::FbmSum(_) => "fbm-sum",
            Task::Compare(_) => "compare",
            Task::CheckExpansions(_) => "check-expansions",
        }
    }

    fn params(&self) -> std::result::Result<toml::Table, toml::ser::Error> {
        match self {
            Task::Simulate(a) => toml::Table::try_from(a),
            Task::Constant(a) => toml::Table::try_from(a),
            Task::Asymptote(a) => toml::Table::try_from(a),
            Task::FbmSum(a) => toml::Table::try_from(a),
            Task::Compare(a) => toml::Table::try_from(a),
            Task::CheckExpansions(a) => toml::Table::try_from(a),
        }
    }

    fn from_params(command: &str, params: toml::Table) -> Result<Self> {
        let bad = |e: toml::de::Error| Error::Config(format!("[params] for {command}: {}", e.message()));
        Ok(match command {
            "simulate" => Task::Simulate(params.try_into().map_err(bad)?),
            "constant" => Task::Constant(params.try_into().map_err(bad)?),
            "asymptote" => Task::Asymptote(params.try_into().map_err(bad)?),
            "fbm-sum" => Task::FbmSum(params.try_into().map_err(bad)?),
            "compare" => Task::Compare(params.try_into().map_err(bad)?),
            "check-expansions" => Task::CheckExpansions(params.try_into().map_err(bad)?),
            other => return config_err(format!("unknown command {other:?}")),
        })
    }
}

/// Worker thread count; never affects numerical output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Threads {
    #[default]
    Auto,
    Count(usize),
}

impl std::str::FromStr for Threads {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(Threads::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Threads::Count(n)),
            _ => Err(format!("threads must be a positive integer or \"auto\", got {s:?}")),
        }
    }
}

impl Serialize for Threads {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Threads::Auto => s.serialize_str("auto"),
            Threads::Count(n) => s.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Threads {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(i64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(n) if n > 0 => Ok(Threads::Count(n as usize)),
            Raw::N(n) => Err(serde::de::Error::custom(format!("threads must be positive, got {n}"))),
            Raw::S(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// A complete, validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub seed: u64,
    pub threads: Threads,
    /// Exact output directory; `None` creates a timestamped subdirectory.
    pub output_dir: Option<PathBuf>,
    pub svg: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: String,
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default)]
    threads: Threads,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    svg: bool,
    #[serde(default)]
    params: toml::Table,
}

pub fn default_seed() -> u64 {
    1
}

#[derive(Deserialize)]
struct ManifestView {
    config: toml::Value,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        match &self.task {
            Task::Simulate(a) => a.validate(),
            Task::Constant(a) => a.validate(),
            Task::Asymptote(a) => a.validate(),
            Task::FbmSum(a) => a.validate(),
            Task::Compare(a) => a.validate(),
            Task::CheckExpansions(a) => a.validate(),
        }
    }

    /// Parse a config document, or the `[config]` table of a manifest.
    pub fn from_toml(text: &str) -> Result<Self> {
        let value: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        let value = if value.contains_key("config") {
            let m: ManifestView = value.try_into().map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
            m.config
        } else {
            toml::Value::Table(value)
        };
        let raw: RawConfig = value.try_into().map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        let cfg = RunConfig {
            task: Task::from_params(&raw.command, raw.params)?,
            seed: raw.seed,
            threads: raw.threads,
            output_dir: raw.output_dir,
            svg: raw.svg,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_value(&self) -> Result<toml::Table> {
        let raw = RawConfig {
            command: self.task.name().to_string(),
            seed: self.seed,
            threads: self.threads,
            output_dir: self.output_dir.clone(),
            svg: self.svg,
            params: self.task.params().map_err(|e| Error::Config(e.to_string()))?,
        };
        toml::Table::try_from(raw).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(&self.to_toml_value()?).map_err(|e| Error::Config(e.to_string()))
    }
}

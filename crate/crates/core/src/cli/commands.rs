//! Command runners writing CSV (and optional SVG) artifacts.

use std::path::Path;

use serde::Serialize;

use super::config::{
    AsymptoteArgs, CompareArgs, ConstantArgs, ConstantKind, ConstantsSource, ExpansionArgs, FieldChoice,
    RunConfig, SimulateArgs, SourceArgs, Task,
};
use super::svg::{Plot, Series};
use crate::asymptotics::{fbm_sum_asymptote, line_asymptote, LineScenario, PowerLaw, TailAsymptote};
use crate::constants::{
    default_ladder, default_strip_ladder, gen_pickands_rate, pickands, piterbarg, piterbarg_ladder, ConstantId,
    ConstantProvider, EstimateRecord, McSettings, MonteCarloProvider, PinnedTable, RegionSpec,
};
use crate::harness::{check_correlation_expansion, check_variance_expansion_along, compare_run, ExpansionReport};
use crate::randfield::{FbmSampler, FieldKind, FieldSimulator, GridSpec};
use crate::rng::substream;
use crate::Result;

/// Files written by a command, relative to the run directory, and warnings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub artifacts: Vec<String>,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn csv<S: Serialize>(&mut self, dir: &Path, name: &str, rows: &[S]) -> Result<()> {
        let mut w = csv::Writer::from_path(dir.join(name))?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    fn svg(&mut self, dir: &Path, name: &str, plot: Plot) -> Result<()> {
        std::fs::write(dir.join(name), plot.render())?;
        self.artifacts.push(name.to_string());
        Ok(())
    }
}

/// Run the command of `cfg`, writing into `dir`.
pub fn execute(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let mut out = Outcome::default();
    match &cfg.task {
        Task::Simulate(a) => simulate(a, cfg, dir, &mut out)?,
        Task::Constant(a) => constant(a, cfg, dir, &mut out)?,
        Task::Asymptote(a) => {
            let provider = provider(&a.source, cfg.seed);
            let asym = match a.preset {
                Some(p) => {
                    let (a1, a2) = p.alphas();
                    fbm_sum_asymptote(a1, a2, provider.as_ref())?
                }
                None => line_asymptote(&line_scenario(a)?, provider.as_ref())?,
            };
            asymptote_outputs(&asym, &a.u, cfg, dir, &mut out)?;
        }
        Task::FbmSum(a) => {
            let provider = provider(&a.source, cfg.seed);
            let asym = fbm_sum_asymptote(a.alpha1, a.alpha2, provider.as_ref())?;
            asymptote_outputs(&asym, &a.u, cfg, dir, &mut out)?;
        }
        Task::Compare(a) => compare(a, cfg, dir, &mut out)?,
        Task::CheckExpansions(a) => expansions(a, cfg, dir, &mut out)?,
    }
    Ok(out)
}

fn provider(src: &SourceArgs, seed: u64) -> Box<dyn ConstantProvider> {
    match src.constants {
        ConstantsSource::Mc => Box::new(MonteCarloProvider::new(McSettings {
            step: src.mc_step,
            reps: src.mc_reps,
            seed,
            ..McSettings::default()
        })),
        ConstantsSource::ClosedForm => Box::new(PinnedTable::with_closed_forms()),
    }
}

fn line_scenario(a: &AsymptoteArgs) -> Result<LineScenario> {
    Ok(LineScenario {
        t1: a.t1,
        t2: a.t2,
        b: a.b,
        rho1: PowerLaw::new(a.c1, a.alpha1 / 2.0)?,
        rho2: PowerLaw::new(a.c2, a.alpha2 / 2.0)?,
        v: PowerLaw::new(a.cv, a.beta / 2.0)?,
        boundary: a.boundary,
        segment: a.seg_lo.zip(a.seg_hi),
    })
}

#[derive(Serialize)]
struct PathRow {
    t: f64,
    value: f64,
}

#[derive(Serialize)]
struct FieldRow {
    s: f64,
    t: f64,
    value: f64,
}

fn simulate(a: &SimulateArgs, cfg: &RunConfig, dir: &Path, out: &mut Outcome) -> Result<()> {
    let s_grid = GridSpec::new(a.start, a.end, a.n)?;
    if a.field == FieldChoice::Fbm {
        let sampler = FbmSampler::new(&s_grid, a.alpha.unwrap_or(1.0))?;
        let values = sampler.sample(&mut substream(cfg.seed, 0));
        let rows: Vec<_> = values.iter().enumerate().map(|(i, &v)| PathRow { t: s_grid.point(i), value: v }).collect();
        out.csv(dir, "path.csv", &rows)?;
        if cfg.svg {
            let plot = Plot {
                title: "fBm sample path".into(),
                x_label: "t".into(),
                y_label: "B(t)".into(),
                log_x: false,
                log_y: false,
                series: vec![Series { label: "path".into(), points: rows.iter().map(|r| (r.t, r.value)).collect() }],
            };
            out.svg(dir, "path.svg", plot)?;
        }
        return Ok(());
    }
    let t_grid = GridSpec::new(a.t_start.unwrap_or(a.start), a.t_end.unwrap_or(a.end), a.t_n.unwrap_or(a.n))?;
    let kind = if a.field == FieldChoice::W { FieldKind::W } else { FieldKind::FbmSum };
    let sample = FieldSimulator::new(kind, a.alpha1.unwrap_or(1.0), a.alpha2.unwrap_or(1.0), s_grid, t_grid)?
        .sample(cfg.seed, 0);
    let rows: Vec<_> = (0..sample.n_s())
        .flat_map(|i| (0..sample.n_t()).map(move |j| (i, j)))
        .map(|(i, j)| FieldRow { s: s_grid.point(i), t: t_grid.point(j), value: sample.get(i, j) })
        .collect();
    out.csv(dir, "field.csv", &rows)?;
    if cfg.svg {
        let n = sample.n_s();
        let series = [0, n / 2, n - 1]
            .iter()
            .map(|&i| Series {
                label: format!("s = {}", s_grid.point(i)),
                points: (0..sample.n_t()).map(|j| (t_grid.point(j), sample.get(i, j))).collect(),
            })
            .collect();
        let plot = Plot {
            title: "field slices".into(),
            x_label: "t".into(),
            y_label: "X(s, t)".into(),
            log_x: false,
            log_y: false,
            series,
        };
        out.svg(dir, "field.svg", plot)?;
    }
    Ok(())
}

fn constant(a: &ConstantArgs, cfg: &RunConfig, dir: &Path, out: &mut Outcome) -> Result<()> {
    let seed = cfg.seed;
    let (id, region, est) = match a.kind {
        ConstantKind::Pickands => {
            let ladder = a.ladder.clone().unwrap_or_else(|| default_ladder(a.alpha, a.step));
            let est = pickands(a.alpha, &ladder, a.step, a.reps, seed)?;
            let top = *ladder.last().unwrap();
            (ConstantId::Pickands { alpha: a.alpha }, RegionSpec::Interval { lo: 0.0, hi: top }, est)
        }
        ConstantKind::Piterbarg => {
            let gamma = a.gamma.unwrap_or(1.0);
            let s = a.s.unwrap_or(McSettings::default().piterbarg_s);
            let est = piterbarg(a.alpha, gamma, s, a.one_sided, a.step, a.reps, seed)?;
            let top = piterbarg_ladder(s, a.step).last().copied().unwrap_or(s);
            let lo = if a.one_sided { 0.0 } else { -top };
            let id = ConstantId::Piterbarg { alpha: a.alpha, gamma, one_sided: a.one_sided };
            (id, RegionSpec::Interval { lo, hi: top }, est)
        }
        ConstantKind::GenPickands => {
            let (gamma, b) = (a.gamma.unwrap_or(1.0), a.b.unwrap_or(0.0));
            let ladder = a.ladder.clone().unwrap_or_else(|| default_strip_ladder(a.alpha, a.step));
            let est = gen_pickands_rate(a.alpha, gamma, b, a.one_sided, &ladder, a.step, a.reps, seed)?;
            let s = *ladder.last().unwrap();
            let region = if a.one_sided { RegionSpec::HalfStrip { s, b } } else { RegionSpec::Strip { s, b } };
            (ConstantId::GenPickands { alpha: a.alpha, gamma, b, one_sided: a.one_sided }, region, est)
        }
    };
    if !est.converged {
        out.warnings.push(format!("non-converged: {} at S = {}", id.name(), est.s));
    }
    out.csv(dir, "constant.csv", &EstimateRecord::pair(&id, region.label(), &est))
}

#[derive(Serialize)]
struct AsymptoteRow {
    case: String,
    #[serde(rename = "K")]
    k: f64,
    #[serde(rename = "K_stderr")]
    k_stderr: f64,
    p: f64,
    p_exact: String,
    flags: String,
}

#[derive(Serialize)]
struct TableRow {
    u: f64,
    value: f64,
}

fn asymptote_outputs(asym: &TailAsymptote, us: &[f64], cfg: &RunConfig, dir: &Path, out: &mut Outcome) -> Result<()> {
    for f in &asym.flags {
        out.warnings.push(format!("{}: {f}", asym.case));
    }
    let row = AsymptoteRow {
        case: asym.case.to_string(),
        k: asym.k,
        k_stderr: asym.k_stderr,
        p: asym.p_f64(),
        p_exact: asym.p.to_string(),
        flags: asym.flags_label(),
    };
    out.csv(dir, "asymptote.csv", &[row])?;
    let table: Vec<_> = asym.table(us).into_iter().map(|(u, value)| TableRow { u, value }).collect();
    out.csv(dir, "asymptote_table.csv", &table)?;
    if cfg.svg {
        let plot = Plot {
            title: format!("K u^p Psi(u), {}", asym.case),
            x_label: "u".into(),
            y_label: "asymptote".into(),
            log_x: false,
            log_y: true,
            series: vec![Series { label: asym.case.to_string(), points: table.iter().map(|r| (r.u, r.value)).collect() }],
        };
        out.svg(dir, "asymptote.svg", plot)?;
    }
    Ok(())
}

fn compare(a: &CompareArgs, cfg: &RunConfig, dir: &Path, out: &mut Outcome) -> Result<()> {
    let provider = provider(&a.source, cfg.seed);
    let (asym, rows) = compare_run(a.alpha1, a.alpha2, &a.u, &a.grids, a.reps, cfg.seed, provider.as_ref())?;
    for f in &asym.flags {
        out.warnings.push(format!("{}: {f}", asym.case));
    }
    for r in &rows {
        if r.weak {
            out.warnings.push(format!("weak estimate at u = {}, grid_n = {}", r.u, r.grid_n));
        }
        if r.trend_violation {
            out.warnings.push(format!("ratio moves away from 1 at u = {}, grid_n = {}", r.u, r.grid_n));
        }
    }
    out.csv(dir, "compare.csv", &rows)?;
    let row = AsymptoteRow {
        case: asym.case.to_string(),
        k: asym.k,
        k_stderr: asym.k_stderr,
        p: asym.p_f64(),
        p_exact: asym.p.to_string(),
        flags: asym.flags_label(),
    };
    out.csv(dir, "asymptote.csv", &[row])?;
    if cfg.svg {
        let series = a
            .grids
            .iter()
            .map(|&g| Series {
                label: format!("grid_n = {g}"),
                points: rows.iter().filter(|r| r.grid_n == g).map(|r| (r.u, r.ratio)).collect(),
            })
            .collect();
        let plot = Plot {
            title: "simulated / asymptotic tail".into(),
            x_label: "u".into(),
            y_label: "ratio".into(),
            log_x: false,
            log_y: false,
            series,
        };
        out.svg(dir, "ratio.svg", plot)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ExpansionRow {
    check: &'static str,
    delta: f64,
    max_rel_err: f64,
}

fn expansions(a: &ExpansionArgs, cfg: &RunConfig, dir: &Path, out: &mut Outcome) -> Result<()> {
    let reports: [(&'static str, ExpansionReport); 3] = [
        ("variance-s", check_variance_expansion_along(a.alpha1, a.alpha2, &a.deltas, a.points, false)?),
        ("variance-t", check_variance_expansion_along(a.alpha1, a.alpha2, &a.deltas, a.points, true)?),
        ("correlation", check_correlation_expansion(a.alpha1, a.alpha2, &a.deltas, a.points)?),
    ];
    let mut rows = Vec::new();
    for (check, r) in &reports {
        if !r.decreasing() {
            out.warnings.push(format!("{check}: error does not decrease along the delta ladder"));
        }
        rows.extend(r.delta_ladder.iter().zip(&r.max_rel_err).map(|(&delta, &e)| ExpansionRow {
            check,
            delta,
            max_rel_err: e,
        }));
    }
    out.csv(dir, "expansions.csv", &rows)?;
    if cfg.svg {
        let series = reports
            .iter()
            .map(|(check, r)| Series {
                label: check.to_string(),
                points: r.delta_ladder.iter().copied().zip(r.max_rel_err.iter().copied()).collect(),
            })
            .collect();
        let plot = Plot {
            title: "expansion error".into(),
            x_label: "delta".into(),
            y_label: "max relative error".into(),
            log_x: true,
            log_y: true,
            series,
        };
        out.svg(dir, "expansions.svg", plot)?;
    }
    Ok(())
}

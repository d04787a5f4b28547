//! Acceptance criteria; one PASS/FAIL line each, nonzero exit on any FAIL.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use common::{alpha2_interval_functional, alpha2_strip_functional, beta_oracle, covariance_max_z, report};
use num_rational::Ratio;
use supfield::asymptotics::{
    beta_reduced_integral, classify_line, fbm_sum_asymptote, fbm_sum_via_curve, line_asymptote, CaseTag,
    LineScenario, PowerLaw,
};
use supfield::constants::{
    default_ladder, functional_expectation, pickands, piterbarg, ConstantEstimate, ConstantId, ConstantProvider,
    DriftSpec, McSettings, MonteCarloProvider, PinnedTable, RegionSpec, DEFAULT_REPS, DEFAULT_STEP,
};
use supfield::harness::{check_correlation_expansion, check_variance_expansion, compare_run};
use supfield::randfield::{FbmSampler, GridSpec};

const SEED: u64 = 2026;

fn criterion1() -> bool {
    let start = Instant::now();
    // 16 points plus the origin, where the path is pinned at 0.
    let g = GridSpec::new(0.0, 1.0, 17).unwrap();
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for (k, alpha) in [0.5, 1.0, 1.5].into_iter().enumerate() {
        let sampler = FbmSampler::on_points(g.start, g.spacing(), g.n_points, alpha).unwrap();
        let z = covariance_max_z(&sampler, &g.points(), alpha, 20_000, SEED + k as u64);
        worst = worst.max(z);
        detail.push(format!("alpha={alpha} max|z|={z:.2}"));
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst <= 4.0 && secs < 120.0;
    report(1, "simulator covariance", pass, &format!("{}; {secs:.1}s", detail.join(", ")))
}

fn criterion2() -> bool {
    let reps = 200_000;
    let mut fails = Vec::new();
    let mut worst: f64 = 0.0;
    let mut check = |name: String, est: ConstantEstimate, oracle: f64| {
        let z = (est.value - oracle).abs() / est.stderr;
        worst = worst.max(z);
        if z > 3.0 {
            fails.push(format!("{name}: {:.5} vs {oracle:.5} ({z:.2} se)", est.value));
        }
    };
    let intervals = [
        (0.0, 1.0, 0.0),
        (0.0, 2.0, 0.0),
        (-1.0, 2.0, 0.0),
        (0.0, 4.0, 0.5),
        (-4.0, 4.0, 0.5),
        (0.0, 4.0, 1.0),
        (-4.0, 4.0, 1.0),
    ];
    for (k, (lo, hi, gamma)) in intervals.into_iter().enumerate() {
        let drift = if gamma == 0.0 { DriftSpec::Pickands } else { DriftSpec::Piterbarg { gamma } };
        let region = RegionSpec::Interval { lo, hi };
        let est = functional_expectation(2.0, 2.0, region, drift, DEFAULT_STEP, reps, SEED + 10 + k as u64).unwrap();
        check(format!("[{lo},{hi}] gamma={gamma}"), est, alpha2_interval_functional(lo, hi, gamma));
    }
    for (k, one_sided) in [false, true].into_iter().enumerate() {
        let est = piterbarg(2.0, 1.0, 8.0, one_sided, DEFAULT_STEP, reps, SEED + 20 + k as u64).unwrap();
        let oracle = alpha2_interval_functional(if one_sided { 0.0 } else { -est.s }, est.s, 1.0);
        check(format!("piterbarg one_sided={one_sided}"), est, oracle);
    }
    let strips = [(-1.0, 1.0, false), (-1.0, 1.0, true), (0.5, 2.0, false), (2.0, 0.5, true)];
    for (k, (b, gamma, half)) in strips.into_iter().enumerate() {
        let region = if half { RegionSpec::HalfStrip { s: 1.0, b } } else { RegionSpec::Strip { s: 1.0, b } };
        let drift = DriftSpec::Generalized { gamma, b, beta: 2.0 };
        let est = functional_expectation(2.0, 2.0, region, drift, DEFAULT_STEP, reps, SEED + 30 + k as u64).unwrap();
        check(region.label(), est, alpha2_strip_functional(1.0, b, gamma, half));
    }
    let h2 = pickands(2.0, &default_ladder(2.0, DEFAULT_STEP), DEFAULT_STEP, DEFAULT_REPS, SEED + 40).unwrap();
    let target = 1.0 / std::f64::consts::PI.sqrt();
    let rel = (h2.value - target).abs() / target;
    let pass = fails.is_empty() && rel <= 0.05;
    let detail = format!(
        "13 functionals, worst {worst:.2} se{}; H_2 = {:.5} +- {:.5} ({:.2}% from 1/sqrt(pi))",
        if fails.is_empty() { String::new() } else { format!(", failures: {}", fails.join("; ")) },
        h2.value,
        h2.stderr,
        100.0 * rel
    );
    report(2, "alpha = 2 oracle", pass, &detail)
}

fn criterion3() -> bool {
    let t = Instant::now();
    let h1 = pickands(1.0, &default_ladder(1.0, DEFAULT_STEP), DEFAULT_STEP, DEFAULT_REPS, SEED + 50).unwrap();
    let t_h = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let p1 = piterbarg(1.0, 1.0, McSettings::default().piterbarg_s, true, DEFAULT_STEP, DEFAULT_REPS, SEED + 51).unwrap();
    let t_p = t.elapsed().as_secs_f64();
    let (rh, rp) = ((h1.value - 1.0).abs(), (p1.value - 2.0).abs() / 2.0);
    let pass = rh <= 0.1 && rp <= 0.1 && t_h < 600.0 && t_p < 600.0;
    let detail = format!(
        "H_1 = {:.4} +- {:.4} ({:.1}%, {t_h:.0}s); P-hat_1^1 = {:.4} +- {:.4} ({:.1}%, {t_p:.0}s)",
        h1.value,
        h1.stderr,
        100.0 * rh,
        p1.value,
        p1.stderr,
        100.0 * rp
    );
    report(3, "Brownian constants", pass, &detail)
}

fn criterion4() -> bool {
    let deltas = [1e-2, 1e-3, 1e-4];
    let pairs = [(1.0, 1.0), (1.5, 1.5), (0.8, 1.2), (1.0, 1.5), (0.5, 1.5), (0.7, 0.7)];
    let mut pass = true;
    let mut detail = Vec::new();
    for (a1, a2) in pairs {
        let var = check_variance_expansion(a1, a2, &deltas, 1000).unwrap();
        let cor = check_correlation_expansion(a1, a2, &deltas, 1000).unwrap();
        let (v, c) = (var.at(1e-3).unwrap(), cor.at(1e-3).unwrap());
        let ok = v <= 0.02 && c <= 0.05 && var.decreasing() && cor.decreasing();
        pass &= ok;
        detail.push(format!("({a1},{a2}) var {:.2}% cor {:.2}%{}", 100.0 * v, 100.0 * c, if ok { "" } else { " !" }));
    }
    let small = check_variance_expansion(0.5, 0.5, &deltas, 1000).unwrap();
    let line = report(4, "local expansions", pass, &detail.join(", "));
    println!(
        "  note: (0.5,0.5) var {:.2}% at delta=1e-3; the 0.9 cap leaves a boundary scale of 0.0026",
        100.0 * small.at(1e-3).unwrap()
    );
    line
}

/// Every constant equal to one; exponents do not depend on constants.
struct Unit;

impl ConstantProvider for Unit {
    fn get(&self, _: &ConstantId) -> supfield::Result<ConstantEstimate> {
        Ok(ConstantEstimate::exact(1.0))
    }
}

fn line(b: f64, a1: f64, a2: f64, beta: f64) -> LineScenario {
    LineScenario {
        t1: 1.0,
        t2: 1.0,
        b,
        rho1: PowerLaw::unit(a1).unwrap(),
        rho2: PowerLaw::unit(a2).unwrap(),
        v: PowerLaw::unit(beta).unwrap(),
        boundary: false,
        segment: None,
    }
}

fn criterion5() -> bool {
    let mut problems = Vec::new();

    let mut worst_curve: f64 = 0.0;
    for a1 in [0.3, 0.5, 0.7, 0.9] {
        let p = PinnedTable::with_closed_forms().pin(ConstantId::Pickands { alpha: a1 }, 1.0 + a1);
        let direct = fbm_sum_asymptote(a1, 1.0, &p).unwrap();
        let curve = fbm_sum_via_curve(a1, 1.0, &p, 1e-12).unwrap();
        let rel = (direct.k - curve.k).abs() / direct.k;
        worst_curve = worst_curve.max(rel);
        if rel > 1e-6 || direct.p != curve.p {
            problems.push(format!("curve a1={a1}: {} vs {}", direct.k, curve.k));
        }
    }

    let mut worst_beta: f64 = 0.0;
    for a in [0.3, 0.5, 1.0, 1.5, 2.0] {
        for b in [0.2, 0.5, 1.3, 3.0] {
            let (x, y) = (beta_reduced_integral(a, b).unwrap(), beta_oracle(a, b));
            let rel = (x - y).abs() / y;
            worst_beta = worst_beta.max(rel);
            if rel > 1e-8 {
                problems.push(format!("beta({a},{b}): {x} vs {y}"));
            }
        }
    }

    let table: [(f64, f64, f64, f64, CaseTag, (i64, i64)); 12] = [
        (0.0, 1.0, 1.0, 2.0, CaseTag::LineGamma0, (3, 1)),
        (0.0, 1.0, 1.5, 1.5, CaseTag::LineGamma0, (2, 1)),
        (0.0, 1.0, 0.5, 1.0, CaseTag::LineGammaFinite, (4, 1)),
        (0.0, 1.5, 1.0, 1.0, CaseTag::LineGammaInf, (2, 1)),
        (0.0, 0.5, 2.0, 0.8, CaseTag::LineGamma0, (5, 2)),
        (0.0, 2.0, 2.0, 2.0, CaseTag::LineGammaFinite, (1, 1)),
        (-1.0, 1.0, 1.0, 2.0, CaseTag::LineDriftGamma0, (3, 1)),
        (-1.0, 1.0, 1.0, 1.0, CaseTag::LineDriftGammaFinite, (2, 1)),
        (-1.0, 1.5, 1.5, 1.0, CaseTag::LineDriftGammaInf, (4, 3)),
        (0.5, 1.0, 1.5, 1.5, CaseTag::LineGammaFinite, (2, 1)),
        (0.5, 1.5, 1.0, 2.0, CaseTag::LineGamma0, (7, 3)),
        (2.0, 1.0, 1.5, 1.0, CaseTag::LineGammaInf, (2, 1)),
    ];
    for (b, a1, a2, beta, tag, (n, d)) in table {
        let s = line(b, a1, a2, beta);
        let case = classify_line(&s).unwrap();
        let p = line_asymptote(&s, &Unit).unwrap().p;
        if case != tag || p != Ratio::new(n, d) {
            problems.push(format!("line b={b} a=({a1},{a2}) beta={beta}: {case} p={p}"));
        }
    }

    let pass = problems.is_empty();
    let detail = format!(
        "curve max rel {worst_curve:.1e}, beta max rel {worst_beta:.1e} (20 cases), 12 exponent cases{}",
        if pass { String::new() } else { format!("; {}", problems.join("; ")) }
    );
    report(5, "formula consistency", pass, &detail)
}

fn criterion6() -> bool {
    let t = Instant::now();
    let provider = MonteCarloProvider::new(McSettings { seed: SEED + 60, ..McSettings::default() });
    let (asym, rows) = compare_run(1.0, 1.0, &[3.0], &[100, 200, 400], 200_000, SEED + 61, &provider).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let last = *ratios.last().unwrap();
    let pass = (0.4..=1.3).contains(&last) && ratios.windows(2).all(|w| w[1] >= w[0]) && secs < 1800.0;
    let detail = format!(
        "K = {:.3} +- {:.3}; ratios over grids 100/200/400: {}; {secs:.0}s",
        asym.k,
        asym.k_stderr,
        ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(" / ")
    );
    report(6, "finite-u trend", pass, &detail)
}

fn run_cli(args: &[&str], threads: &str, out: &Path) -> bool {
    Command::new(env!("CARGO_BIN_EXE_supfield"))
        .args(args)
        .args(["--threads", threads, "--seed", "17", "--out"])
        .arg(out)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn criterion7() -> bool {
    let commands: [(&[&str], &[&str]); 6] = [
        (&["simulate", "--field", "fbm-sum", "--alpha1", "0.6", "--alpha2", "1.3", "--start=-1", "--n", "33"], &["field.csv"]),
        (&["constant", "--kind", "gen-pickands", "--alpha", "1", "--gamma", "1", "--b=-1", "--one-sided", "--reps", "20000"], &["constant.csv"]),
        (&["asymptote", "--preset", "cor41-super1", "--mc-reps", "20000"], &["asymptote.csv", "asymptote_table.csv"]),
        (&["fbm-sum", "--alpha1", "1", "--alpha2", "1", "--mc-reps", "20000"], &["asymptote.csv", "asymptote_table.csv"]),
        (&["compare", "--alpha1", "1", "--alpha2", "1", "--grids", "50,100", "--reps", "20000", "--mc-reps", "20000"], &["compare.csv"]),
        (&["check-expansions", "--alpha1", "0.8", "--alpha2", "1.2"], &["expansions.csv"]),
    ];
    let tmp = tempfile::tempdir().unwrap();
    let mut bad = Vec::new();
    for (k, (args, files)) in commands.iter().enumerate() {
        let dirs: Vec<_> = ["1", "4", "3"].iter().map(|t| (t, tmp.path().join(format!("{k}-{t}")))).collect();
        if !dirs.iter().all(|(t, d)| run_cli(args, t, d)) {
            bad.push(format!("{} failed", args[0]));
            continue;
        }
        for f in *files {
            let texts: Vec<_> = dirs.iter().map(|(_, d)| std::fs::read(d.join(f)).unwrap()).collect();
            if texts.windows(2).any(|w| w[0] != w[1]) {
                bad.push(format!("{} {f} differs", args[0]));
            }
        }
    }
    let detail = if bad.is_empty() {
        "6 commands at 1/4/3 threads, byte-identical CSV".to_string()
    } else {
        bad.join("; ")
    };
    report(7, "determinism", bad.is_empty(), &detail)
}

fn main() {
    let results = [criterion1(), criterion2(), criterion3(), criterion4(), criterion5(), criterion6(), criterion7()];
    let passed = results.iter().filter(|&&r| r).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}

#![allow(dead_code)]

use std::f64::consts::{PI, SQRT_2};

use quadrature::double_exponential::integrate;

const N_RANGE: f64 = 12.0;
const STRIP_PIECES: usize = 48;

pub fn phi(n: f64) -> f64 {
    (-0.5 * n * n).exp() / (2.0 * PI).sqrt()
}

/// `E f(N)` for standard normal `N`, splitting the range at `kinks`.
pub fn normal_expectation(f: impl Fn(f64) -> f64, kinks: &[f64]) -> f64 {
    normal_expectation_pieces(f, kinks, 1)
}

/// [`normal_expectation`] with the range also cut into `pieces` equal parts,
/// for integrands with kinks at unknown places.
pub fn normal_expectation_pieces(f: impl Fn(f64) -> f64, kinks: &[f64], pieces: usize) -> f64 {
    let mut cuts: Vec<f64> = (0..pieces).map(|k| -N_RANGE + 2.0 * N_RANGE * k as f64 / pieces as f64).collect();
    cuts.extend(kinks.iter().copied().filter(|k| k.abs() < N_RANGE));
    cuts.push(N_RANGE);
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2).map(|w| integrate(|n| f(n) * phi(n), w[0], w[1], 1e-12).integral).sum()
}

/// `max_{t in [lo, hi]} sqrt(2) t n - c t^2`.
pub fn interval_sup(n: f64, lo: f64, hi: f64, c: f64) -> f64 {
    let t = (n / (SQRT_2 * c)).clamp(lo, hi);
    SQRT_2 * t * n - c * t * t
}

/// `E exp(sup_{[lo, hi]} sqrt(2) B_2(t) - (1 + gamma) t^2)` with `B_2(t) = t N`.
pub fn alpha2_interval_functional(lo: f64, hi: f64, gamma: f64) -> f64 {
    let c = 1.0 + gamma;
    let kinks = [SQRT_2 * c * lo, SQRT_2 * c * hi];
    normal_expectation(|n| interval_sup(n, lo, hi, c).exp(), &kinks)
}

/// Maximum of the concave quadratic `g . z - z' A z` over the box
/// `[x0, x1] x [y0, y1]`.
fn box_max(g: (f64, f64), a: [[f64; 2]; 2], x: (f64, f64), y: (f64, f64)) -> f64 {
    let q = |u: f64, v: f64| g.0 * u + g.1 * v - (a[0][0] * u * u + 2.0 * a[0][1] * u * v + a[1][1] * v * v);
    let det = a[0][0] * a[1][1] - a[0][1] * a[0][1];
    let u = (a[1][1] * g.0 - a[0][1] * g.1) / (2.0 * det);
    let v = (a[0][0] * g.1 - a[0][1] * g.0) / (2.0 * det);
    if (x.0..=x.1).contains(&u) && (y.0..=y.1).contains(&v) {
        return q(u, v);
    }
    let on_x = |v: f64| q(((g.0 - 2.0 * a[0][1] * v) / (2.0 * a[0][0])).clamp(x.0, x.1), v);
    let on_y = |u: f64| q(u, ((g.1 - 2.0 * a[0][1] * u) / (2.0 * a[1][1])).clamp(y.0, y.1));
    on_x(y.0).max(on_x(y.1)).max(on_y(x.0)).max(on_y(x.1))
}

/// `sup sqrt(2)(s n1 + t n2) - s^2 - t^2 - gamma (s + b t)^2` over
/// `{|s + b t| <= S, 0 <= t <= S}`, or `0 <= s + b t` when `half`.
pub fn strip_sup(n1: f64, n2: f64, s: f64, b: f64, gamma: f64, half: bool) -> f64 {
    // In `(x, t)` with `x = s + b t`: `s = x - b t`.
    let g = (SQRT_2 * n1, SQRT_2 * (n2 - b * n1));
    let a = [[1.0 + gamma, -b], [-b, b * b + 1.0]];
    box_max(g, a, (if half { 0.0 } else { -s }, s), (0.0, s))
}

/// `E exp(strip_sup)` by nested double-exponential quadrature.
pub fn alpha2_strip_functional(s: f64, b: f64, gamma: f64, half: bool) -> f64 {
    let inner = |n1: f64| normal_expectation_pieces(|n2| strip_sup(n1, n2, s, b, gamma, half).exp(), &[], STRIP_PIECES);
    normal_expectation_pieces(inner, &[0.0], STRIP_PIECES)
}

/// `int_0^1 (1 - t^a)^(b - 1) dt`. The right half is written in `w = 1 - t`
/// and then `w = y^(1/b)`, which absorbs the `w^(b - 1)` endpoint factor.
pub fn beta_oracle(a: f64, b: f64) -> f64 {
    let left = integrate(|t| (1.0 - t.powf(a)).powf(b - 1.0), 0.0, 0.5, 1e-14).integral;
    let ratio = |w: f64| if w == 0.0 { a } else { -(a * (-w).ln_1p()).exp_m1() / w };
    let right = integrate(|y: f64| ratio(y.powf(1.0 / b)).powf(b - 1.0) / b, 0.0, 0.5f64.powf(b), 1e-14).integral;
    left + right
}

/// Reports one acceptance line and returns whether it passed.
pub fn report(id: usize, name: &str, pass: bool, detail: &str) -> bool {
    println!("CRITERION {id} {} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

/// Largest `|empirical - exact| / stderr` over all covariance entries of
/// `paths` sampled paths on `points`, with the known zero mean.
pub fn covariance_max_z(sampler: &supfield::randfield::FbmSampler, points: &[f64], alpha: f64, paths: usize, seed: u64) -> f64 {
    let n = points.len();
    let mut sum = vec![0.0; n * n];
    let mut ws = sampler.workspace();
    let mut x = vec![0.0; n];
    for r in 0..paths {
        sampler.sample_into(&mut supfield::rng::substream(seed, r as u64), &mut ws, &mut x);
        for i in 0..n {
            for j in i..n {
                sum[i * n + j] += x[i] * x[j];
            }
        }
    }
    let c = |i: usize, j: usize| supfield::randfield::fbm_cov(points[i], points[j], alpha).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            let se = ((c(i, i) * c(j, j) + c(i, j).powi(2)) / paths as f64).sqrt();
            if se > 0.0 {
                worst = worst.max((sum[i * n + j] / paths as f64 - c(i, j)).abs() / se);
            }
        }
    }
    worst
}

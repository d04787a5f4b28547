use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{check_alpha, GridSpec, CHOLESKY_MAX_POINTS, EIGEN_TOL};
use crate::error::{domain, Error};
use crate::rng::substream;
use crate::Result;

/// Covariance of standard fBm: `(|s|^a + |t|^a - |t - s|^a) / 2`.
pub fn fbm_cov(s: f64, t: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(cov(s, t, alpha))
}

#[inline]
pub(crate) fn cov(s: f64, t: f64, alpha: f64) -> f64 {
    0.5 * (s.abs().powf(alpha) + t.abs().powf(alpha) - (t - s).abs().powf(alpha))
}

/// One sample path of `B_alpha` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FbmPath {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub alpha: f64,
}

/// Simulate `B_alpha` on a grid starting at the origin.
pub fn simulate_fbm(grid: &GridSpec, alpha: f64, seed: u64) -> Result<FbmPath> {
    if grid.start != 0.0 {
        return domain(format!("simulate_fbm needs a grid starting at 0, got {}", grid.start));
    }
    let sampler = FbmSampler::new(grid, alpha)?;
    let mut ws = sampler.workspace();
    let mut values = vec![0.0; grid.n_points];
    sampler.sample_into(&mut substream(seed, 0), &mut ws, &mut values);
    Ok(FbmPath { grid: *grid, values, alpha })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerMethod {
    /// `alpha = 2`: `B(t) = t N`.
    Linear,
    /// Circulant embedding of the increment covariance, re-pinned at the origin.
    Circulant,
    /// Dense factorization of the exact path covariance.
    Cholesky,
}

enum Method {
    Linear,
    Circulant(Circulant),
    Cholesky(PsdCholesky),
}

/// Exact sampler for `B_alpha` at the points `start + i h`, `i < n`.
///
/// Grids containing the origin use circulant embedding: a stationary-increment
/// path `X` is drawn on the grid and `B(t_i) = X_i - X_{k0}` where `t_{k0} = 0`,
/// which has the fBm law by stationarity of increments. Other grids, or
/// embeddings with significantly negative eigenvalues, use Cholesky.
pub struct FbmSampler {
    start: f64,
    spacing: f64,
    n: usize,
    alpha: f64,
    method: Method,
}

/// Per-thread scratch buffers for [`FbmSampler::sample_into`].
pub struct FbmWorkspace {
    buf: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
    z: Vec<f64>,
}

struct Circulant {
    n_incr: usize,
    pin: usize,
    sqrt_eig: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl FbmSampler {
    pub fn new(grid: &GridSpec, alpha: f64) -> Result<Self> {
        Self::on_points(grid.start, grid.spacing(), grid.n_points, alpha)
    }

    /// Sampler on `n >= 1` points `start + i * spacing`.
    pub fn on_points(start: f64, spacing: f64, n: usize, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if n == 0 {
            return domain("sampler needs at least one point");
        }
        if !(spacing > 0.0) && n > 1 {
            return domain(format!("spacing must be positive, got {spacing}"));
        }
        let zero = zero_index(start, spacing, n);
        let method = if alpha == 2.0 {
            Method::Linear
        } else if let (Some(pin), true) = (zero, n >= 2) {
            match Circulant::new(n - 1, spacing, alpha, pin) {
                Some(c) => Method::Circulant(c),
                None => Method::Cholesky(PsdCholesky::for_grid(start, spacing, n, alpha)?),
            }
        } else {
            Method::Cholesky(PsdCholesky::for_grid(start, spacing, n, alpha)?)
        };
        Ok(Self { start, spacing, n, alpha, method })
    }

    /// Force the dense Cholesky method regardless of grid shape.
    pub fn cholesky(grid: &GridSpec, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let n = grid.n_points;
        let method = Method::Cholesky(PsdCholesky::for_grid(grid.start, grid.spacing(), n, alpha)?);
        Ok(Self { start: grid.start, spacing: grid.spacing(), n, alpha, method })
    }

    pub fn method(&self) -> SamplerMethod {
        match self.method {
            Method::Linear => SamplerMethod::Linear,
            Method::Circulant(_) => SamplerMethod::Circulant,
            Method::Cholesky(_) => SamplerMethod::Cholesky,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + i as f64 * self.spacing
    }

    pub fn workspace(&self) -> FbmWorkspace {
        match &self.method {
            Method::Circulant(c) => {
                let m = c.sqrt_eig.len();
                FbmWorkspace {
                    buf: vec![Complex::new(0.0, 0.0); m],
                    scratch: vec![Complex::new(0.0, 0.0); c.fft.get_inplace_scratch_len()],
                    z: Vec::new(),
                }
            }
            Method::Cholesky(_) => FbmWorkspace { buf: Vec::new(), scratch: Vec::new(), z: vec![0.0; self.n] },
            Method::Linear => FbmWorkspace { buf: Vec::new(), scratch: Vec::new(), z: Vec::new() },
        }
    }

    /// Draw one path into `out` (length `n`).
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, ws: &mut FbmWorkspace, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.n);
        match &self.method {
            Method::Linear => {
                let z: f64 = rng.sample(StandardNormal);
                for (i, o) in out.iter_mut().enumerate() {
                    *o = self.point(i) * z;
                }
            }
            Method::Circulant(c) => c.sample_into(rng, ws, out),
            Method::Cholesky(ch) => ch.sample_into(rng, &mut ws.z, out),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut ws = self.workspace();
        let mut out = vec![0.0; self.n];
        self.sample_into(rng, &mut ws, &mut out);
        out
    }
}

fn zero_index(start: f64, spacing: f64, n: usize) -> Option<usize> {
    if start == 0.0 {
        return Some(0);
    }
    if n < 2 {
        return None;
    }
    let k = -start / spacing;
    let r = k.round();
    (r >= 0.0 && (r as usize) < n && (k - r).abs() <= 1e-9 * r.max(1.0)).then_some(r as usize)
}

/// Autocovariance of fractional Gaussian noise with step `h` at lag `k`.
fn fgn_autocov(k: usize, h: f64, alpha: f64) -> f64 {
    let k = k as f64;
    0.5 * h.powf(alpha) * ((k + 1.0).powf(alpha) - 2.0 * k.powf(alpha) + (k - 1.0).abs().powf(alpha))
}

impl Circulant {
    /// `None` when the minimal embedding is not numerically nonnegative.
    fn new(n_incr: usize, h: f64, alpha: f64, pin: usize) -> Option<Self> {
        let m = 2 * n_incr;
        let mut row: Vec<Complex<f64>> = (0..m)
            .map(|j| {
                let lag = if j <= n_incr { j } else { m - j };
                Complex::new(fgn_autocov(lag, h, alpha), 0.0)
            })
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(m);
        fft.process(&mut row);
        let max = row.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max);
        let min = row.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
        if min < -EIGEN_TOL * max {
            return None;
        }
        let sqrt_eig = row.iter().map(|c| (c.re.max(0.0) / m as f64).sqrt()).collect();
        Some(Self { n_incr, pin, sqrt_eig, fft })
    }

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, ws: &mut FbmWorkspace, out: &mut [f64]) {
        for (b, &a) in ws.buf.iter_mut().zip(&self.sqrt_eig) {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *b = Complex::new(a * re, a * im);
        }
        self.fft.process_with_scratch(&mut ws.buf, &mut ws.scratch);
        let mut acc = 0.0;
        out[0] = 0.0;
        for k in 0..self.n_incr {
            acc += ws.buf[k].re;
            out[k + 1] = acc;
        }
        if self.pin != 0 {
            let base = out[self.pin];
            for o in out.iter_mut() {
                *o -= base;
            }
        }
    }
}

/// Lower factor `L` with `L L^T = C` for a positive semidefinite `C`;
/// pivots at or below a relative tolerance produce zero columns.
struct PsdCholesky {
    n: usize,
    /// Row-packed lower triangle.
    lower: Vec<f64>,
}

impl PsdCholesky {
    fn for_grid(start: f64, spacing: f64, n: usize, alpha: f64) -> Result<Self> {
        if n > CHOLESKY_MAX_POINTS {
            return Err(Error::Capacity(format!(
                "{n} grid points exceed the Cholesky limit of {CHOLESKY_MAX_POINTS}"
            )));
        }
        let pts: Vec<f64> = (0..n).map(|i| start + i as f64 * spacing).collect();
        Self::factor(n, |i, j| cov(pts[i], pts[j], alpha))
    }

    fn factor(n: usize, c: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let idx = |i: usize, j: usize| i * (i + 1) / 2 + j;
        let mut lower = vec![0.0; n * (n + 1) / 2];
        let scale = (0..n).map(|i| c(i, i)).fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in 0..=i {
                let mut s = c(i, j);
                for k in 0..j {
                    s -= lower[idx(i, k)] * lower[idx(j, k)];
                }
                if i == j {
                    if s < -1e-8 * scale {
                        return domain("covariance matrix is not positive semidefinite");
                    }
                    lower[idx(i, i)] = if s > 1e-13 * scale { s.sqrt() } else { 0.0 };
                } else {
                    let d = lower[idx(j, j)];
                    lower[idx(i, j)] = if d > 0.0 { s / d } else { 0.0 };
                }
            }
        }
        Ok(Self { n, lower })
    }

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, z: &mut [f64], out: &mut [f64]) {
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        let mut off = 0;
        for i in 0..self.n {
            let row = &self.lower[off..off + i + 1];
            out[i] = row.iter().zip(&z[..=i]).map(|(l, z)| l * z).sum();
            off += i + 1;
        }
    }
}

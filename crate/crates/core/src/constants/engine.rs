//! Per-replication suprema of `W - drift` over several regions sharing one
//! simulated path pair.
//!
//! All targets of an engine are evaluated on the same fine grid; a target
//! with stride 2 sees only the points at even offsets from the origin, which
//! is the coarse grid with twice the spacing.

use rayon::prelude::*;
use std::f64::consts::SQRT_2;

use super::{DriftSpec, RegionSpec};
use crate::error::{domain, Error};
use crate::randfield::{FbmSampler, FbmWorkspace};
use crate::rng::substream;
use crate::Result;

const SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Target {
    pub region: RegionSpec,
    pub drift: DriftSpec,
    pub stride: usize,
}

enum Prepared {
    Line { idx: Vec<usize>, drift: Vec<f64> },
    Plane { stride: usize, rows: Vec<Row>, drift: Option<Vec<f64>> },
}

struct Row {
    j: usize,
    lo: usize,
    hi: usize,
    center: usize,
}

pub(crate) struct Engine {
    s_sampler: FbmSampler,
    t_sampler: Option<FbmSampler>,
    /// `|s_i|^a1` and `|t_j|^a2`.
    pow_s: Vec<f64>,
    pow_t: Vec<f64>,
    n_s: usize,
    z_s: usize,
    targets: Vec<Prepared>,
}

struct Scratch {
    ws_s: FbmWorkspace,
    ws_t: Option<FbmWorkspace>,
    a: Vec<f64>,
    c: Vec<f64>,
}

fn snap_multiple(x: f64, h: f64) -> Option<i64> {
    let k = x / h;
    let r = k.round();
    ((k - r).abs() <= SNAP * r.abs().max(1.0)).then_some(r as i64)
}

fn s_extent(region: &RegionSpec) -> (f64, f64) {
    match *region {
        RegionSpec::Interval { lo, hi } => (lo, hi),
        RegionSpec::Strip { s, b } => (-s - b.max(0.0) * s, s + (-b).max(0.0) * s),
        RegionSpec::HalfStrip { s, b } => ((-b).min(0.0) * s, s + (-b).max(0.0) * s),
    }
}

impl Engine {
    /// `step` is the fine spacing; every target must have stride 1 or 2.
    pub fn new(alpha1: f64, alpha2: f64, step: f64, targets: &[Target]) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return domain(format!("step must be positive, got {step}"));
        }
        if targets.is_empty() {
            return domain("engine needs at least one target");
        }
        let planar = targets[0].region.is_planar();
        if targets.iter().any(|t| t.region.is_planar() != planar) {
            return domain("cannot mix interval and strip regions in one run");
        }
        let coarse = 2.0 * step;
        let (mut lo, mut hi) = (0.0f64, 0.0f64);
        let mut t_hi = 0.0f64;
        for tg in targets {
            let (a, b) = s_extent(&tg.region);
            lo = lo.min(a);
            hi = hi.max(b);
            if let RegionSpec::Strip { s, .. } | RegionSpec::HalfStrip { s, .. } = tg.region {
                t_hi = t_hi.max(s);
            }
        }
        // Extend to coarse multiples so that both grids contain the origin.
        let k_lo = (lo / coarse - SNAP).floor() as i64;
        let k_hi = (hi / coarse + SNAP).ceil() as i64;
        let (s_start, n_s) = (k_lo as f64 * coarse, (2 * (k_hi - k_lo)) as usize + 1);
        let z_s = (-2 * k_lo) as usize;
        let s_point = |i: usize| s_start + i as f64 * step;
        let s_sampler = if n_s >= 2 {
            FbmSampler::on_points(s_start, step, n_s, alpha1)?
        } else {
            FbmSampler::on_points(0.0, step, 1, alpha1)?
        };
        let pow_s: Vec<f64> = (0..n_s).map(|i| s_point(i).abs().powf(alpha1)).collect();

        let (t_sampler, n_t) = if planar {
            let k = snap_multiple(t_hi, coarse).ok_or_else(|| {
                Error::Domain(format!("step {coarse} does not divide region size {t_hi}"))
            })?;
            let n_t = 2 * k as usize + 1;
            (Some(FbmSampler::on_points(0.0, step, n_t, alpha2)?), n_t)
        } else {
            (None, 0)
        };
        let pow_t: Vec<f64> = (0..n_t).map(|j| (j as f64 * step).powf(alpha2)).collect();

        let aligned = |i: usize, stride: usize| (i as i64 - z_s as i64).rem_euclid(stride as i64) == 0;
        let nearest = |x: f64, lo: usize, hi: usize, stride: usize| -> usize {
            let mut c = ((x - s_start) / step).clamp(lo as f64, hi as f64).round() as usize;
            while !aligned(c, stride) {
                c -= 1;
            }
            let mut best = c;
            for cand in [c.saturating_sub(stride), c + stride] {
                if cand >= lo && cand <= hi && (s_point(cand) - x).abs() < (s_point(best) - x).abs() {
                    best = cand;
                }
            }
            best
        };
        let mut prepared = Vec::with_capacity(targets.len());
        for tg in targets {
            if tg.stride != 1 && tg.stride != 2 {
                return domain(format!("stride must be 1 or 2, got {}", tg.stride));
            }
            let stride = tg.stride;
            match tg.region {
                RegionSpec::Interval { lo, hi } => {
                    let h = step * stride as f64;
                    let kl = snap_multiple(lo, h)
                        .ok_or_else(|| Error::Domain(format!("step {h} does not divide interval end {lo}")))?;
                    let kh = snap_multiple(hi, h)
                        .ok_or_else(|| Error::Domain(format!("step {h} does not divide interval end {hi}")))?;
                    let idx: Vec<usize> = (kl..=kh)
                        .map(|k| (z_s as i64 + k * stride as i64) as usize)
                        .collect();
                    let drift = idx
                        .iter()
                        .map(|&i| match tg.drift {
                            DriftSpec::Pickands => 0.0,
                            DriftSpec::Piterbarg { gamma } => gamma * pow_s[i],
                            DriftSpec::Generalized { gamma, beta, .. } => gamma * s_point(i).abs().powf(beta),
                        })
                        .collect();
                    prepared.push(Prepared::Line { idx, drift });
                }
                RegionSpec::Strip { s, b } | RegionSpec::HalfStrip { s, b } => {
                    let half = matches!(tg.region, RegionSpec::HalfStrip { .. });
                    // Rows are walked outward from the point closest to the drift's zero line.
                    let line_b = match tg.drift {
                        DriftSpec::Generalized { b, .. } => b,
                        _ => b,
                    };
                    let k_t = snap_multiple(s, step * stride as f64)
                        .ok_or_else(|| Error::Domain(format!("step does not divide region size {s}")))?;
                    let mut rows = Vec::new();
                    for jj in 0..=k_t as usize {
                        let j = jj * stride;
                        let t = j as f64 * step;
                        let (r_lo, r_hi) = if half { (-b * t, s - b * t) } else { (-s - b * t, s - b * t) };
                        let mut i_lo = ((r_lo - s_start) / step - SNAP).ceil().max(0.0) as usize;
                        let mut i_hi = (((r_hi - s_start) / step + SNAP).floor() as i64).min(n_s as i64 - 1);
                        while i_lo < n_s && !aligned(i_lo, stride) {
                            i_lo += 1;
                        }
                        while i_hi >= 0 && !aligned(i_hi as usize, stride) {
                            i_hi -= 1;
                        }
                        if i_hi < i_lo as i64 {
                            continue;
                        }
                        let i_hi = i_hi as usize;
                        let center = nearest(-line_b * t, i_lo, i_hi, stride);
                        rows.push(Row { j, lo: i_lo, hi: i_hi, center });
                    }
                    let drift = match tg.drift {
                        DriftSpec::Pickands => None,
                        DriftSpec::Piterbarg { .. } => {
                            return domain("Piterbarg drift applies to interval regions only");
                        }
                        DriftSpec::Generalized { gamma, b: db, beta } => {
                            if gamma == 0.0 {
                                None
                            } else {
                                let mut d = vec![0.0; n_s * n_t];
                                for row in &rows {
                                    let t = row.j as f64 * step;
                                    for i in row.lo..=row.hi {
                                        d[row.j * n_s + i] = gamma * (s_point(i) + db * t).abs().powf(beta);
                                    }
                                }
                                Some(d)
                            }
                        }
                    };
                    prepared.push(Prepared::Plane { stride, rows, drift });
                }
            }
        }
        Ok(Self { s_sampler, t_sampler, pow_s, pow_t, n_s, z_s, targets: prepared })
    }

    pub fn n_targets(&self) -> usize {
        self.targets.len()
    }

    fn scratch(&self) -> Scratch {
        Scratch {
            ws_s: self.s_sampler.workspace(),
            ws_t: self.t_sampler.as_ref().map(|t| t.workspace()),
            a: vec![0.0; self.n_s],
            c: vec![0.0; self.pow_t.len()],
        }
    }

    /// Suprema for one replication, one entry per target.
    fn sups(&self, seed: u64, rep: u64, sc: &mut Scratch, out: &mut [f64]) {
        let mut rng = substream(seed, rep);
        if self.n_s >= 2 {
            self.s_sampler.sample_into(&mut rng, &mut sc.ws_s, &mut sc.a);
        } else {
            sc.a[0] = 0.0;
        }
        for (a, p) in sc.a.iter_mut().zip(&self.pow_s) {
            *a = SQRT_2 * *a - p;
        }
        if let (Some(ts), Some(ws)) = (&self.t_sampler, sc.ws_t.as_mut()) {
            ts.sample_into(&mut rng, ws, &mut sc.c);
            for (c, p) in sc.c.iter_mut().zip(&self.pow_t) {
                *c = SQRT_2 * *c - p;
            }
        }
        let mut amax = [f64::NEG_INFINITY; 2];
        if matches!(self.targets.first(), Some(Prepared::Plane { .. })) {
            for (i, &a) in sc.a.iter().enumerate() {
                amax[0] = amax[0].max(a);
                if (i as i64 - self.z_s as i64) % 2 == 0 {
                    amax[1] = amax[1].max(a);
                }
            }
        }
        for (o, tg) in out.iter_mut().zip(&self.targets) {
            *o = match tg {
                Prepared::Line { idx, drift } => {
                    idx.iter().zip(drift).map(|(&i, d)| sc.a[i] - d).fold(f64::NEG_INFINITY, f64::max)
                }
                Prepared::Plane { stride, rows, drift } => {
                    plane_sup(&sc.a, &sc.c, amax[stride - 1], *stride, rows, drift.as_deref(), self.n_s)
                }
            };
        }
    }

    /// Suprema for replications `0..reps`, row-major `reps x n_targets`.
    pub fn run(&self, reps: usize, seed: u64) -> Vec<f64> {
        let n = self.n_targets();
        let mut out = vec![0.0; reps * n];
        out.par_chunks_mut(n)
            .enumerate()
            .for_each_init(|| self.scratch(), |sc, (r, row)| self.sups(seed, r as u64, sc, row));
        out
    }
}

fn plane_sup(a: &[f64], c: &[f64], amax: f64, stride: usize, rows: &[Row], drift: Option<&[f64]>, n_s: usize) -> f64 {
    let mut g = f64::NEG_INFINITY;
    for row in rows {
        let base = c[row.j];
        if base + amax <= g {
            continue;
        }
        let d_row = drift.map(|d| &d[row.j * n_s..(row.j + 1) * n_s]);
        let d = |i: usize| d_row.map_or(0.0, |d| d[i]);
        let mut i = row.center as i64;
        while i >= row.lo as i64 {
            let di = d(i as usize);
            if base + amax - di <= g {
                break;
            }
            g = g.max(base + a[i as usize] - di);
            i -= stride as i64;
        }
        let mut i = row.center + stride;
        while i <= row.hi {
            let di = d(i);
            if base + amax - di <= g {
                break;
            }
            g = g.max(base + a[i] - di);
            i += stride;
        }
    }
    g
}

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::fbm::{FbmSampler, FbmWorkspace};
use super::GridSpec;
use crate::rng::substream;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    /// `sqrt(2) B1(s) + sqrt(2) B2(t) - |s|^a1 - |t|^a2`.
    W,
    /// `B1(s) + B2(t)`.
    FbmSum,
}

/// Field values on a product grid, row-major with `s` as the row index.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub s_grid: GridSpec,
    pub t_grid: GridSpec,
    pub values: Vec<f64>,
}

impl FieldSample {
    pub fn n_s(&self) -> usize {
        self.s_grid.n_points
    }

    pub fn n_t(&self) -> usize {
        self.t_grid.n_points
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_t() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n_t();
        &self.values[i * n..(i + 1) * n]
    }
}

/// Reusable simulator of a separable field; replication `rep` under `seed`
/// always produces the same sample.
pub struct FieldSimulator {
    kind: FieldKind,
    alpha1: f64,
    alpha2: f64,
    s_grid: GridSpec,
    t_grid: GridSpec,
    s_sampler: FbmSampler,
    t_sampler: FbmSampler,
}

impl FieldSimulator {
    pub fn new(kind: FieldKind, alpha1: f64, alpha2: f64, s_grid: GridSpec, t_grid: GridSpec) -> Result<Self> {
        let s_sampler = FbmSampler::new(&s_grid, alpha1)?;
        let t_sampler = FbmSampler::new(&t_grid, alpha2)?;
        Ok(Self { kind, alpha1, alpha2, s_grid, t_grid, s_sampler, t_sampler })
    }

    /// Draw the two marginal paths `B1` on the `s` grid and `B2` on the `t` grid.
    pub fn sample_paths<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        ws: &mut (FbmWorkspace, FbmWorkspace),
        b1: &mut [f64],
        b2: &mut [f64],
    ) {
        self.s_sampler.sample_into(rng, &mut ws.0, b1);
        self.t_sampler.sample_into(rng, &mut ws.1, b2);
    }

    pub fn workspaces(&self) -> (FbmWorkspace, FbmWorkspace) {
        (self.s_sampler.workspace(), self.t_sampler.workspace())
    }

    /// Marginal terms `(a(s_i), c(t_j))` with field value `a_i + c_j`.
    pub fn marginals(&self, b1: &[f64], b2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        match self.kind {
            FieldKind::FbmSum => (b1.to_vec(), b2.to_vec()),
            FieldKind::W => {
                let r2 = std::f64::consts::SQRT_2;
                let a = b1
                    .iter()
                    .enumerate()
                    .map(|(i, &b)| r2 * b - self.s_grid.point(i).abs().powf(self.alpha1))
                    .collect();
                let c = b2
                    .iter()
                    .enumerate()
                    .map(|(j, &b)| r2 * b - self.t_grid.point(j).abs().powf(self.alpha2))
                    .collect();
                (a, c)
            }
        }
    }

    pub fn sample(&self, seed: u64, rep: u64) -> FieldSample {
        let mut rng = substream(seed, rep);
        let mut ws = self.workspaces();
        let mut b1 = vec![0.0; self.s_grid.n_points];
        let mut b2 = vec![0.0; self.t_grid.n_points];
        self.sample_paths(&mut rng, &mut ws, &mut b1, &mut b2);
        let (a, c) = self.marginals(&b1, &b2);
        let values = a.iter().flat_map(|&x| c.iter().map(move |&y| x + y)).collect();
        FieldSample { s_grid: self.s_grid, t_grid: self.t_grid, values }
    }
}

/// Sample of `W_{a1,a2}` on `s_grid x t_grid`.
pub fn simulate_w_field(alpha1: f64, alpha2: f64, s_grid: &GridSpec, t_grid: &GridSpec, seed: u64) -> Result<FieldSample> {
    Ok(FieldSimulator::new(FieldKind::W, alpha1, alpha2, *s_grid, *t_grid)?.sample(seed, 0))
}

/// Sample of `B1(s) + B2(t)` on `s_grid x t_grid`.
pub fn simulate_fbm_sum_field(
    alpha1: f64,
    alpha2: f64,
    s_grid: &GridSpec,
    t_grid: &GridSpec,
    seed: u64,
) -> Result<FieldSample> {
    Ok(FieldSimulator::new(FieldKind::FbmSum, alpha1, alpha2, *s_grid, *t_grid)?.sample(seed, 0))
}

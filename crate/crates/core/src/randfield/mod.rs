//! Exact simulation of fractional Brownian motion and the separable
//! two-dimensional fields `sqrt(2) B1(s) + sqrt(2) B2(t) - drift`.

mod fbm;
mod field;
mod grid;

pub use fbm::{fbm_cov, simulate_fbm, FbmPath, FbmSampler, FbmWorkspace, SamplerMethod};
pub use field::{simulate_fbm_sum_field, simulate_w_field, FieldSample, FieldSimulator, FieldKind};
pub use grid::GridSpec;

/// Largest grid handled by the dense Cholesky fallback.
pub const CHOLESKY_MAX_POINTS: usize = 1 << 14;

/// Embedding eigenvalues below `-EIGEN_TOL * max` trigger the Cholesky fallback;
/// negatives above that are clamped to zero.
pub const EIGEN_TOL: f64 = 1e-10;

pub(crate) fn check_alpha(alpha: f64) -> crate::Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha <= 2.0 {
        Ok(())
    } else {
        crate::error::domain(format!("alpha must lie in (0, 2], got {alpha}"))
    }
}

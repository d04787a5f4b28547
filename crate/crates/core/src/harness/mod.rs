//! Empirical validation for the fBm-sum field: exceedance simulation, local
//! expansion checks and simulation-versus-asymptote comparisons.

mod compare;
mod expansion;
mod tail;

pub use compare::{compare_run, CompareRow};
pub use expansion::{
    check_correlation_expansion, check_variance_expansion, check_variance_expansion_along, correlation_ratio,
    sigma, van_der_corput, ExpansionReport, COORD_CAP, DEFAULT_DELTAS,
};
pub use tail::{mc_sup_tail, mc_sup_tail_ladder, SupTailEstimate, MIN_GRID, WEAK_COUNT};

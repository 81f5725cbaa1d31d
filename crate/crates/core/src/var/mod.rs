//! VAR(p) processes: representation, stability, Yule-Walker equations,
//! simulation and least-squares estimation.

mod fit;
mod model;
mod simulate;
mod yule_walker;

pub use fit::{fit_ar_univariate, fit_var_ols};
pub use model::{ArModel, CompanionForm, CrossCovSequence, Direction, TimeSeries, VarModel};
pub use simulate::{simulate, simulate_seeded};
pub use yule_walker::{
    check_stability, companion_form, solve_cross_covariances, var_from_covariances, Stability,
    MAX_CONDITION, STABILITY_MARGIN,
};

//! Attack-effect measurement, Hessian-kernel diagnostics, metrics and the two bound calculators.

mod aep;
mod bounds;
mod metrics;
mod phi;
mod robustness;

pub use aep::{
    aep_reports, estimate_aep, estimate_series, exact_aep, one_round_aep, propagate_client, relative_error, AepReport,
    AepRuns,
};
pub use bounds::{convergence_bound, robustness_bound, ConvergenceBound, TheoryParams};
pub use metrics::{accuracy, attack_metrics, mitigation_rounds, Mitigation, MitigationRule, RoundRecord};
pub use phi::{phi_diagnostic, phi_series, phi_vector, PhiReport};
pub use robustness::{lambda_backfill, robustness_check, RobustnessCheck};

//! Client-side perturbation (FL-WBC), robust aggregation, and DP baselines.

mod aggregate;
mod dp;
mod flwbc;

use serde::{Deserialize, Serialize};

pub use aggregate::{cma_aggregate, ctma_aggregate, fedavg_aggregate, trimmed_count};
pub use dp::{cdp_apply, cdp_clipped_mean, ldp_apply};
pub use flwbc::{flwbc_step, FlwbcState, FlwbcStep};

use crate::error::{Error, Result};

/// Which defense a federation runs. Serialized as `"none"`, `"cma"` or
/// `{"flwbc": {"s": 0.4}}`-style objects.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DefensePolicy {
    #[default]
    None,
    Flwbc {
        s: f64,
    },
    Cma,
    Ctma {
        beta: f64,
    },
    Cdp {
        clip: f64,
        sigma_dp: f64,
    },
    Ldp {
        clip: f64,
        sigma_dp: f64,
    },
}

impl DefensePolicy {
    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = |field: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::config(field, format!("must be finite and >= 0, got {v}")))
            }
        };
        match *self {
            DefensePolicy::None | DefensePolicy::Cma => Ok(()),
            DefensePolicy::Flwbc { s } => finite_nonneg("s", s),
            DefensePolicy::Ctma { beta } => {
                if (0.0..0.5).contains(&beta) {
                    Ok(())
                } else {
                    Err(Error::config("beta", format!("must lie in [0, 0.5), got {beta}")))
                }
            }
            DefensePolicy::Cdp { clip, sigma_dp } | DefensePolicy::Ldp { clip, sigma_dp } => {
                if !(clip.is_finite() && clip > 0.0) {
                    return Err(Error::config("clip", format!("must be > 0, got {clip}")));
                }
                finite_nonneg("sigma_dp", sigma_dp)
            }
        }
    }

    /// Short label used in logs, e.g. `flwbc(s=0.4)`.
    pub fn tag(&self) -> String {
        match *self {
            DefensePolicy::None => "none".into(),
            DefensePolicy::Flwbc { s } => format!("flwbc(s={s})"),
            DefensePolicy::Cma => "cma".into(),
            DefensePolicy::Ctma { beta } => format!("ctma(beta={beta})"),
            DefensePolicy::Cdp { clip, sigma_dp } => format!("cdp(clip={clip};sigma_dp={sigma_dp})"),
            DefensePolicy::Ldp { clip, sigma_dp } => format!("ldp(clip={clip};sigma_dp={sigma_dp})"),
        }
    }

    /// Client-side noise std for FL-WBC, if active.
    pub fn flwbc_s(&self) -> Option<f64> {
        match *self {
            DefensePolicy::Flwbc { s } => Some(s),
            _ => None,
        }
    }
}

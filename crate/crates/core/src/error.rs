use serde::Serialize;
use thiserror::Error;

/// Errors raised by the planning kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),

    #[error("invalid conic: {0}")]
    InvalidConic(&'static str),

    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("singular matrix: {0}")]
    Singular(&'static str),

    #[error("localization threshold {epsilon:e} outside admissible range [{lo:e}, {hi:e}]")]
    InvalidThreshold { epsilon: f64, lo: f64, hi: f64 },

    #[error("no UAV at altitude {altitude} m can meet rate {rate_bps} bit/s for this UE")]
    CommInfeasible { rate_bps: f64, altitude: f64 },

    #[error("candidate grid does not intersect region {region} ({label})")]
    GridTooCoarse { region: usize, label: String },

    #[error("{} UE(s) cannot be served: {}", .0.len(), render(.0))]
    Infeasible(Vec<UeDiagnostic>),
}

/// Why one UE makes a scenario infeasible.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UeDiagnostic {
    pub ue_index: usize,
    pub reason: String,
}

fn render(d: &[UeDiagnostic]) -> String {
    d.iter()
        .map(|d| format!("UE {}: {}", d.ue_index, d.reason))
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_domain(
    name: &'static str,
    value: f64,
    ok: bool,
    expected: &'static str,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected,
        })
    }
}

use thiserror::Error;

/// Failure modes surfaced by the library. Contract violations (out-of-range
/// sites, mismatched domains) panic instead; these are the recoverable cases
/// a driver is expected to report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain with {sites} sites exceeds the enumeration limit of {limit}")]
    DomainTooLarge { sites: usize, limit: usize },

    #[error("block side {block} exceeds lattice side {side}")]
    BlockTooLarge { block: usize, side: usize },

    #[error("spectrum nearly degenerate: second eigenvalue {lambda1:e} is below {threshold:e}")]
    DegenerateSpectrum { lambda1: f64, threshold: f64 },

    #[error("Dirichlet form is consistent with zero; no ratio bound available")]
    DegenerateDirichlet,

    #[error("monotone coupling requires the heat-bath rate model")]
    RequiresHeatBath,

    #[error("spontaneous magnetization vanishes at beta = {beta} (critical point 0.44069...)")]
    BelowCritical { beta: f64 },

    #[error("effective sample size {ess:.1} is below the minimum {min:.0}")]
    LowEffectiveSamples { ess: f64, min: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

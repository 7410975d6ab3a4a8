use thiserror::Error;

/// Failures raised by the simulator.
///
/// Variants split into two families: invalid inputs (see [`Error::is_validation`])
/// and physically inaccessible regimes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("wavelength must be positive, got {0} m")]
    NonPositiveWavelength(f64),

    #[error("field magnitudes are equal ({0} T); the fringe period diverges")]
    EqualFields(f64),

    #[error("classically forbidden: kinetic energy would be {radicand:e} (m/s)^2 after the boundary")]
    ClassicallyForbidden { radicand: f64 },

    #[error("total internal reflection: |sin(theta_out)| = {sin_out}")]
    TotalInternalReflection { sin_out: f64 },

    #[error("incidence angle {0} rad is too close to grazing")]
    GrazingIncidence(f64),

    #[error("deflection angles coincide; no focus exists")]
    DegenerateFocusing,

    #[error("ray left the prism stack at {surface} (transverse position {position} m)")]
    MissedAperture { surface: &'static str, position: f64 },

    #[error("divergence distribution is empty or has zero total weight")]
    EmptyDistribution,

    #[error("lever arms {0} and {1} coincide")]
    DegenerateDistances(f64, f64),

    #[error("lattice index {0} is neither an integer nor a half-odd integer")]
    InvalidLatticeIndex(f64),

    #[error("azimuthal current is undefined on the axis (r = {0})")]
    SingularAxis(f64),

    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field,
            reason: reason.into(),
        }
    }

    /// True for errors caused by malformed input rather than physics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Invalid { .. }
                | Error::NonPositiveWavelength(_)
                | Error::EmptyDistribution
                | Error::InvalidLatticeIndex(_)
                | Error::DegenerateDistances(..)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

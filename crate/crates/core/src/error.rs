use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("root finding failed for polynomial with coefficients {coeffs:?}")]
    RootFinding { coeffs: Vec<Complex64> },

    #[error(
        "{point} is not a regular singular point (pole orders: p1 = {p1_order}, p0 = {p0_order})"
    )]
    NotRegularSingular {
        point: String,
        p1_order: i32,
        p0_order: i32,
    },

    #[error("{exponent} is not an indicial exponent at {point} (indicial value {defect:e})")]
    NotAnExponent {
        point: String,
        exponent: Complex64,
        defect: f64,
    },

    #[error("resonant case at {point}: exponents {exponent} and {other} differ by an integer; logarithmic solutions are not supported")]
    Resonant {
        point: String,
        exponent: Complex64,
        other: Complex64,
    },

    #[error("out of domain: {0}")]
    OutOfDomain(String),

    #[error("pole: {0}")]
    Pole(String),

    #[error("supercritical coupling g = {g}: mu is imaginary and the spectral condition 1/2 - w + mu = -n fails")]
    Supercritical { g: f64 },

    #[error("no bound state: eta = {eta} must lie in (0, 1)")]
    NoBoundState { eta: f64 },

    #[error("degenerate deformation: {0}")]
    DegenerateDeformation(String),

    #[error("parameter pole: {0}")]
    ParameterPole(String),

    #[error("no sign change of the quantization function on ({lo}, {hi})")]
    Bracketing { lo: f64, hi: f64 },

    #[error("integration step underflow at u = {at}")]
    StepUnderflow { at: f64 },

    #[error("oscillatory |psi| detected ({sign_changes} slope sign changes); no real power law")]
    Oscillatory { sign_changes: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for failures that are statements about the physics (supercritical
    /// coupling, parameter poles) rather than malformed input.
    pub fn is_physics_domain(&self) -> bool {
        matches!(
            self,
            Error::Supercritical { .. }
                | Error::NoBoundState { .. }
                | Error::ParameterPole(_)
                | Error::Pole(_)
                | Error::DegenerateDeformation(_)
                | Error::OutOfDomain(_)
                | Error::Resonant { .. }
                | Error::Oscillatory { .. }
        )
    }
}

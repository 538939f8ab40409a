use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failures raised by the thermodynamics, relaxation and flow solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid thermodynamic parameters: {0}")]
    InvalidParams(String),

    #[error("{quantity} = {value} is outside the admissible domain {domain}")]
    Domain {
        quantity: &'static str,
        value: f64,
        domain: String,
    },

    #[error("no spinodal zone at T = {temperature} (critical temperature {critical})")]
    NoSpinodal { temperature: f64, critical: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    ConvergenceFailure {
        what: &'static str,
        iterations: usize,
    },

    #[error("volume fractions undefined: rho1 = rho2 = {0}")]
    DegenerateMixture(f64),

    #[error("invalid mixture state: {0}")]
    InvalidMixture(String),

    #[error("relaxation needs {required} substeps, ceiling is {ceiling}")]
    StiffnessOverflow { required: f64, ceiling: usize },

    #[error("relaxation not converged: residual {residual:e} after {budget} substeps")]
    NotConverged { residual: f64, budget: usize },

    #[error("negative sound speed radicand {radicand:e} (rho = {rho}, rho1 = {rho1}, rho2 = {rho2}, alpha1 = {alpha1})")]
    ComplexSoundSpeed {
        radicand: f64,
        rho: f64,
        rho1: f64,
        rho2: f64,
        alpha1: f64,
    },

    #[error("maximum wave speed is zero and no dt_max is configured")]
    DegenerateWaveSpeed,

    #[error("invalid state in cell {cell}: {reason}")]
    InvalidState { cell: usize, reason: String },

    #[error("cell {cell}: {source}")]
    InCell {
        cell: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("t = {time}: {source}")]
    AtTime {
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable category, used by the command line front end.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "invalid_params",
            Error::Domain { .. } => "domain",
            Error::NoSpinodal { .. } => "no_spinodal",
            Error::ConvergenceFailure { .. } => "convergence_failure",
            Error::DegenerateMixture(_) => "degenerate_mixture",
            Error::InvalidMixture(_) => "invalid_mixture",
            Error::StiffnessOverflow { .. } => "stiffness_overflow",
            Error::NotConverged { .. } => "not_converged",
            Error::ComplexSoundSpeed { .. } => "complex_sound_speed",
            Error::DegenerateWaveSpeed => "degenerate_wave_speed",
            Error::InvalidState { .. } => "invalid_state",
            Error::InCell { source, .. } | Error::AtTime { source, .. } => source.category(),
            Error::Parse { .. } => "parse",
            Error::Validation(_) => "validation",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn in_cell(self, cell: usize) -> Error {
        match self {
            e @ (Error::InCell { .. } | Error::InvalidState { .. }) => e,
            e => Error::InCell {
                cell,
                source: Box::new(e),
            },
        }
    }

    pub(crate) fn at_time(self, time: f64) -> Error {
        Error::AtTime {
            time,
            source: Box::new(self),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "Fock truncation exceeded at t = {t}: top two levels hold population {population:.3e} (n_max = {n_max})"
    )]
    Truncation {
        t: f64,
        population: f64,
        n_max: usize,
    },

    #[error("step size underflow at t = {t} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("state is not normalized (norm^2 = {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("dimension {dim} exceeds the dense integrator limit {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("signal spans {span} but at least {required} is required")]
    InsufficientSignal { span: f64, required: f64 },

    #[error("Mandel Q is undefined for zero mean photon number")]
    UndefinedMandelQ,

    #[error("mutual information requested but the records carry no state snapshots")]
    MissingSnapshots,

    #[error("qubit dephasing is not available as a jump channel (gamma_c = {0})")]
    DephasingUnsupported(f64),
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParams {
            field,
            reason: reason.into(),
        }
    }
}

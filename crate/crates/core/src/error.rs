use thiserror::Error;

/// Every failure the pipeline can report.
///
/// Variants are grouped by the stage that raises them; the CLI maps each
/// group onto a distinct exit code (see [`Error::exit_code`]).
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("mismatched base frequency: {left} vs {right}")]
    FrequencyMismatch { left: f64, right: f64 },

    #[error("mismatched lattice offset: {left} vs {right}")]
    OffsetMismatch { left: f64, right: f64 },

    #[error("secular integration: mode {mode} sits on zero frequency with amplitude {amplitude:e}")]
    SecularIntegration { mode: i64, amplitude: f64 },

    #[error("bessel_j accuracy unsupported for n = {n}, x = {x}")]
    AccuracyUnsupported { n: i64, x: f64 },

    #[error("invalid interaction: {0}")]
    InvalidSpec(String),

    #[error("Fourier sum of exp-series did not converge within degree {max_degree} (last shell norm {last_shell:e})")]
    TruncationFailure { max_degree: usize, last_shell: f64 },

    #[error("unclassifiable interaction: |M(Q0)| = {m0:e}, |M(Q1)| = {m1:e}, |M(Q3)| = {m3:e}")]
    Unclassifiable { m0: f64, m1: f64, m3: f64 },

    #[error("spurious case: {0}")]
    SpuriousCase(String),

    #[error("wrong condition: expansion for {expected} requested but interaction is {found}")]
    WrongCondition { expected: String, found: String },

    #[error("secular cancellation failed: {0}")]
    CancellationFailure(String),

    #[error("order {order} unsupported (maximum {max} without override)")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("near resonance at mode {mode}: |frequency| = {frequency:e}")]
    NearResonance { mode: i64, frequency: f64 },

    #[error("divergence suspected at epsilon = {epsilon}: last order contributions {contributions:?}")]
    DivergenceSuspected { epsilon: f64, contributions: Vec<f64> },

    #[error("crossing: m*omega + 2*Omega vanishes at m = {mode}")]
    Crossing { mode: i64 },

    #[error("internal consistency: {0}")]
    InternalConsistency(String),

    #[error("assembly check failed: {0}")]
    Assembly(String),

    #[error("integrator step size underflow at t = {t}")]
    Stiffness { t: f64 },

    #[error("state vector not normalized: |psi| = {norm}")]
    NotNormalized { norm: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidSpec(_) => 2,
            Error::Unclassifiable { .. } | Error::SpuriousCase(_) | Error::WrongCondition { .. } => 3,
            Error::DivergenceSuspected { .. } => 4,
            Error::Crossing { .. } => 5,
            _ => 6,
        }
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::FrequencyMismatch { .. } => "frequency-mismatch",
            Error::OffsetMismatch { .. } => "offset-mismatch",
            Error::SecularIntegration { .. } => "secular-integration",
            Error::AccuracyUnsupported { .. } => "accuracy-unsupported",
            Error::InvalidSpec(_) => "invalid-spec",
            Error::TruncationFailure { .. } => "truncation-failure",
            Error::Unclassifiable { .. } => "unclassifiable",
            Error::SpuriousCase(_) => "spurious-case",
            Error::WrongCondition { .. } => "wrong-condition",
            Error::CancellationFailure(_) => "cancellation-failure",
            Error::UnsupportedOrder { .. } => "unsupported-order",
            Error::NearResonance { .. } => "near-resonance",
            Error::DivergenceSuspected { .. } => "divergence-suspected",
            Error::Crossing { .. } => "crossing",
            Error::InternalConsistency(_) => "internal-consistency",
            Error::Assembly(_) => "assembly",
            Error::Stiffness { .. } => "stiffness",
            Error::NotNormalized { .. } => "not-normalized",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by the solvers. Numerical payloads are reported in `f64`
/// regardless of the working precision.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} must be positive, got {value}")]
    NonPositiveInput { name: &'static str, value: f64 },

    #[error("Bond number {beta} is the critical value 1/3, which separates the two regimes")]
    CriticalBond { beta: f64 },

    #[error("operation requires the {expected} regime, but beta = {beta}")]
    WrongRegime { expected: &'static str, beta: f64 },

    #[error("no root: target speed {target} is below the minimum phase speed {minimum}")]
    NoRoot { target: f64, minimum: f64 },

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("invalid grid: {reason}")]
    InvalidGrid { reason: String },

    #[error("symbol is not finite at wavenumber {k}")]
    NonFiniteSymbol { k: f64 },

    #[error("field has not decayed at the domain edge: |f(±L)|/max|f| = {ratio:e}")]
    BoundaryNotDecayed { ratio: f64 },

    #[error("field is not even: relative asymmetry {asymmetry:e}")]
    NotEven { asymmetry: f64 },

    #[error("cosh weight overflows: q*L = {product} exceeds 600")]
    WeightOverflow { product: f64 },

    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    SolverDivergence { iterations: usize, residual: f64 },

    #[error("singular matrix at pivot {pivot}")]
    SingularMatrix { pivot: usize },

    #[error("forcing has a component {coefficient:e} at the kernel frequency (relative to {scale:e}); project first")]
    KernelResidue { coefficient: f64, scale: f64 },

    #[error("grid too coarse: kernel index {j0} must be below N/4 = {limit}")]
    GridTooCoarse { j0: usize, limit: usize },

    #[error("Newton iteration failed after {iterations} steps (residual {residual:e})")]
    NewtonDivergence { iterations: usize, residual: f64 },

    #[error("harmonic tail |c_M| = {tail:e} exceeds the aliasing guard with M = {harmonics}")]
    AliasingTail { tail: f64, harmonics: usize },

    #[error("frequency {k} is not on the grid (offset {offset:e} in mode units)")]
    OffGridFrequency { k: f64, offset: f64 },

    #[error("amplitude {amplitude} exceeds the family bound {bound}")]
    AmplitudeOutOfRange { amplitude: f64, bound: f64 },

    #[error("fixed-point iteration is not contracting at step {iteration}")]
    NoContraction { iteration: usize },

    #[error("iteration cap {iterations} reached with step norm {step:e}")]
    MaxIterations { iterations: usize, step: f64 },

    #[error("symbol m_beta - c is not coercive: minimum {minimum:e}")]
    SymbolNotCoercive { minimum: f64 },

    #[error("resonant denominator m(k) - m(2k) vanishes at k = {k}")]
    ResonantDenominator { k: f64 },

    #[error("domain too short: eps*L = {scaled} (need at least {required})")]
    DomainTooShort { scaled: f64, required: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use crate::vec2::Vec2;

/// Crate-wide error type. Variants carry enough context to point at the
/// offending input (mesh size, pivot index, config line, ...).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid mesh size h = {0}; h must be positive and smaller than the domain diameter")]
    InvalidMeshSize(f64),

    #[error("degenerate polygon: consecutive corners {0}, {1}, {2} are collinear")]
    DegeneratePolygon(usize, usize, usize),

    #[error("polygon corners must be convex and in counterclockwise order (violation at corner {0})")]
    PolygonNotConvexCcw(usize),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("mesh validation failed: {0}")]
    MeshInvalid(String),

    #[error("mesh file format error at line {line}: {msg}")]
    MeshFormat { line: usize, msg: String },

    #[error("derivative order {requested} exceeds stored data (kappa_star + 1 = {max})")]
    DerivOrder { requested: u32, max: u32 },

    #[error("finite-type condition violated near ({}, {}): all derivatives up to order {order} are below tol = {tol:.3e}", point.x, point.y)]
    FiniteTypeViolated { point: Vec2, order: u32, tol: f64 },

    #[error("empty sample set")]
    EmptySamples,

    #[error("empty source set for the distance computation")]
    EmptySources,

    #[error("magnetic well is empty at threshold t = {t:.6e} (beta = {beta}); beta is below calibration for this field")]
    EmptyWell { beta: f64, t: f64 },

    #[error("field too weak near ({}, {}) for beta = {beta}: the radius criterion holds up to rmax = {rmax}; beta is below calibration", point.x, point.y)]
    FieldTooWeak { point: Vec2, beta: f64, rmax: f64 },

    #[error("beta = {beta} below calibration: m_radius^-1 = {inv_m:.4e} at ({}, {}) exceeds the calibration radius {r0:.4e}", point.x, point.y)]
    BetaBelowCalibration { beta: f64, point: Vec2, inv_m: f64, r0: f64 },

    #[error("beta must exceed 1 (got {0})")]
    BetaOutOfRange(f64),

    #[error("quadrature order must be at least 1 (got {0})")]
    QuadratureOrder(u32),

    #[error("Hermitian factorization failed at dof {index}: pivot = {pivot:.6e} (matrix singular or indefinite)")]
    FactorizationPivot { index: usize, pivot: f64 },

    #[error("boundary mass block is not positive definite")]
    MassNotPositiveDefinite,

    #[error("requested {requested} eigenpairs but only {available} boundary dofs are available")]
    TooManyEigenpairs { requested: usize, available: usize },

    #[error("eigensolver did not converge")]
    EigNotConverged,

    #[error("sweep needs at least {min} beta values spanning a decade (got {got})")]
    SweepTooSmall { min: usize, got: usize },

    #[error("sweep aborted at beta = {beta}: {source}")]
    SweepAborted {
        beta: f64,
        #[source]
        source: Box<Error>,
        /// Rows completed before the failure, for the partial table.
        partial: Vec<(f64, f64)>,
    },

    #[error("ground state eigenvalue is not positive (lambda_1 = {0:.3e}); the decay analysis requires lambda > 0")]
    LambdaNotPositive(f64),

    #[error("no localization target: the maximal vanishing set is the whole boundary (kappa_0 = 0)")]
    NoLocalizationTarget,

    #[error("missing decay fit: run the decay profile first to obtain a rate estimate")]
    MissingDecayFit,

    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("unknown preset `{0}` (available: nonvanishing, montgomery-k)")]
    UnknownPreset(String),

    #[error("output directory is locked by another run: {0} (remove the .lock file if stale)")]
    OutputLocked(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

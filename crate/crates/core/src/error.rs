use thiserror::Error;

/// Errors raised by table construction, map evaluation and the certificates.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("radius of curvature {min_radius:e} at angle {angle} is below the curvature floor{}", at_s.map(|s| format!(" (path parameter s = {s})")).unwrap_or_default())]
    CurvatureNotPositive {
        min_radius: f64,
        angle: f64,
        at_s: Option<f64>,
    },

    #[error("points {q} and {big_q} coincide on the boundary")]
    DiagonalPoint { q: f64, big_q: f64 },

    #[error("momentum {p} is too close to grazing{}", step.map(|i| format!(" at iterate {i}")).unwrap_or_default())]
    NearGrazing { p: f64, step: Option<usize> },

    #[error("table is not strictly convex; lift it before evaluating the billiard map")]
    NotStrictlyConvex,

    #[error("invalid corner width {width}: {reason}")]
    InvalidWidth { width: f64, reason: String },

    #[error("marked point at boundary parameter {mark} lies inside the neighborhood of corner {corner}")]
    MarkInCorner { mark: f64, corner: usize },

    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("invalid table spec: {0}")]
    InvalidSpec(String),

    #[error("perturbation too large: {0}")]
    PerturbationTooLarge(String),

    #[error("d_B bracket inverted: lower {lower} > upper {upper}")]
    BracketInverted { lower: f64, upper: f64 },

    #[error("chord data inconsistent at t = {t}: circles do not intersect (defect {defect:e})")]
    InconsistentChords { t: f64, defect: f64 },

    #[error("functional gap {gap} exceeds 2n * c0 distance = {bound}")]
    BoundViolated { gap: f64, bound: f64 },

    #[error("bottleneck distance {bottleneck} in degree {degree} exceeds allowed {allowed}")]
    StabilityViolated {
        degree: usize,
        bottleneck: f64,
        allowed: f64,
    },

    #[error("grid of {cells} cells exceeds the budget of {budget}")]
    ResolutionTooLarge { cells: u64, budget: u64 },

    #[error("profiles are not pointwise ordered at corner {corner}")]
    ProfilesNotOrdered { corner: usize },

    #[error("numerical solve did not converge: {0}")]
    NoConvergence(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("i/o failure: {0}")]
    Io(String),
}

impl Error {
    /// Failures of a certificate or a proven inequality, as opposed to bad input.
    pub fn is_certificate_failure(&self) -> bool {
        matches!(
            self,
            Error::BracketInverted { .. } | Error::BoundViolated { .. } | Error::StabilityViolated { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

use crate::extrinsic::GrowthCurve;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("solution escaped at t = {t}")]
    SolutionEscaped { t: f64 },

    #[error("tail divergent: declared exponent {exponent} is not below -1")]
    TailDivergent { exponent: f64 },

    #[error("empty integration range [{from}, {to}]")]
    EmptyRange { from: f64, to: f64 },

    #[error("no sign change in lambda bracket [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("unknown surface `{0}`")]
    UnknownSurface(String),

    #[error("not an immersion here: det g = {det} at (u, v) = ({u}, {v})")]
    NotImmersion { u: f64, v: f64, det: f64 },

    #[error("pole neighborhood: R = {r} at (u, v) = ({u}, {v})")]
    PoleNeighborhood { u: f64, v: f64, r: f64 },

    #[error("parameter ({u}, {v}) outside the domain of `{surface}`")]
    OutsideDomain { surface: String, u: f64, v: f64 },

    #[error("window truncation: radius {requested} exceeds the covered radius {safe_radius}")]
    WindowTruncation {
        requested: f64,
        safe_radius: f64,
        /// Growth curve restricted to the radii the window does cover, when one was requested.
        safe: Option<Box<GrowthCurve<f64>>>,
    },

    #[error("critical point encountered: |grad R| = {grad} at (u, v) = ({u}, {v})")]
    CriticalPoint { u: f64, v: f64, grad: f64 },

    #[error("too few samples: need {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("non-positive value {value} in fit input")]
    NonPositive { value: f64 },

    #[error("comparison regime not entered: Lambda_c = {lambda_c}")]
    RegimeNotEntered { lambda_c: f64 },

    #[error("ball smaller than compact core: t_c = {t_c} >= r = {r}")]
    BallInsideCore { t_c: f64, r: f64 },

    #[error("hypothesis `{hypothesis}` not met: {detail}")]
    Hypothesis { hypothesis: &'static str, detail: String },

    #[error("empty region")]
    EmptyRegion,

    #[error("region has {got} interior vertices, need at least {needed}")]
    RegionTooSmall { needed: usize, got: usize },

    #[error("trial function not positive at interior vertex {vertex}")]
    TrialNotPositive { vertex: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("report output: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
}

use thiserror::Error;

/// Errors raised across the library.
///
/// `is_indeterminate` and `is_parse` let front ends map errors to exit codes.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    ParseAt { line: usize, column: usize, message: String },
    #[error("malformed map: {0}")]
    MalformedMap(String),
    #[error("composite nesting deeper than {0}")]
    CompositeTooDeep(usize),
    #[error("pole at {0}")]
    PoleAt(String),
    #[error("not a self-map of the disk: |phi({witness})| = {modulus} >= 1")]
    NotSelfMap { witness: String, modulus: f64 },
    #[error("|phi| = 1 on a boundary arc near {0}")]
    BoundaryArcContact(String),
    #[error("pole in the closed disk at {0}")]
    PoleInClosedDisk(String),
    #[error("contact arc detected")]
    ContactArcDetected,
    #[error("boundary data extraction failed at {zeta}: {reason}")]
    DataExtractionFailed { zeta: String, reason: String },
    #[error("order of contact not detected up to depth {depth} at {zeta}")]
    OrderNotDetected { zeta: String, depth: usize },
    #[error("indeterminate: {0}")]
    Indeterminate(String),
    #[error("data vectors neither equal nor distinct within tolerance (relative gap {gap:e})")]
    IndeterminateDataMatch { gap: f64 },
    #[error("map not in class S: {0}")]
    MapNotInS(String),
    #[error("map not in class S0: {0}")]
    MapNotInS0(String),
    #[error("map not in class S(2): {0}")]
    MapNotInS2(String),
    #[error("hypotheses not met: {0}")]
    HypothesesNotMet(String),
    #[error("exact mode required: {0}")]
    ExactModeRequired(String),
    #[error("Gram matrix not positive semidefinite (min eigenvalue {min_eig:e}, condition estimate {condition:e})")]
    GramNotPsd { min_eig: f64, condition: f64 },
    #[error("osculating map invalid at {zeta}: {reason}")]
    OsculatingMapInvalid { zeta: String, reason: String },
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
    #[error("no curve point at depth {depth:e}: {reason}")]
    NoSolutionAtDepth { depth: f64, reason: String },
    #[error("pseudo-hyperbolic distance not bounded away from one: {0}")]
    RhoNotBoundedAwayFromOne(String),
    #[error("precision budget exceeded: {0}")]
    PrecisionBudgetExceeded(String),
    #[error("argument not in the upper half-plane: {0}")]
    ArgumentNotInUpperHalfPlane(String),
    #[error("missing weight value at contact point {0}")]
    WeightMissing(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub fn is_indeterminate(&self) -> bool {
        matches!(self, Error::Indeterminate(_) | Error::IndeterminateDataMatch { .. })
    }

    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse(_) | Error::ParseAt { .. } | Error::MalformedMap(_) | Error::CompositeTooDeep(_))
    }

    /// Variant name, used as a stable error tag in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse(_) => "Parse",
            Error::ParseAt { .. } => "ParseAt",
            Error::MalformedMap(_) => "MalformedMap",
            Error::CompositeTooDeep(_) => "CompositeTooDeep",
            Error::PoleAt(_) => "PoleAt",
            Error::NotSelfMap { .. } => "NotSelfMap",
            Error::BoundaryArcContact(_) => "BoundaryArcContact",
            Error::PoleInClosedDisk(_) => "PoleInClosedDisk",
            Error::ContactArcDetected => "ContactArcDetected",
            Error::DataExtractionFailed { .. } => "DataExtractionFailed",
            Error::OrderNotDetected { .. } => "OrderNotDetected",
            Error::Indeterminate(_) => "Indeterminate",
            Error::IndeterminateDataMatch { .. } => "IndeterminateDataMatch",
            Error::MapNotInS(_) => "MapNotInS",
            Error::MapNotInS0(_) => "MapNotInS0",
            Error::MapNotInS2(_) => "MapNotInS2",
            Error::HypothesesNotMet(_) => "HypothesesNotMet",
            Error::ExactModeRequired(_) => "ExactModeRequired",
            Error::GramNotPsd { .. } => "GramNotPsd",
            Error::OsculatingMapInvalid { .. } => "OsculatingMapInvalid",
            Error::QuadratureFailure(_) => "QuadratureFailure",
            Error::NoSolutionAtDepth { .. } => "NoSolutionAtDepth",
            Error::RhoNotBoundedAwayFromOne(_) => "RhoNotBoundedAwayFromOne",
            Error::PrecisionBudgetExceeded(_) => "PrecisionBudgetExceeded",
            Error::ArgumentNotInUpperHalfPlane(_) => "ArgumentNotInUpperHalfPlane",
            Error::WeightMissing(_) => "WeightMissing",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

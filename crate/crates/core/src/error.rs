use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("direction is tangential to the boundary (|d·n| = {0:e})")]
    TangentialHit(f64),
    #[error("ray passes within the tip tolerance of a corner at ({x}, {y})")]
    TipHit { x: f64, y: f64 },
    #[error("more than {0} reflections")]
    MaxReflectionsExceeded(usize),
    #[error("invalid start: {0}")]
    InvalidStart(String),
    #[error("invalid orbit: {0}")]
    InvalidOrbit(String),
    #[error("orbit runs along the boundary of the cube")]
    DegenerateOrbit,
    #[error("point is outside the unfolded domain")]
    OutsideUnfolding,
    #[error("line passes through the apex")]
    ApexLine,
    #[error("line crosses the filler cone")]
    FillerConeHit,
    #[error("line misses the unfolded domain")]
    EmptyIntersection,
    #[error("non-finite integrand value at ({x}, {y})")]
    Quadrature { x: f64, y: f64 },
    #[error("no usable line in the sinogram")]
    DegenerateGeometry,
    #[error("sinogram has {0} excluded cells")]
    IncompleteSinogram(usize),
    #[error("data violates octant evenness (violating energy {violation:e} of {total:e})")]
    NonEvenData { violation: f64, total: f64 },
    #[error("profile does not integrate to zero (integral {0:e})")]
    InvalidNullProfile(f64),
    #[error("basis size {basis} exceeds slope count {slopes}")]
    UnderdeterminedProbe { basis: usize, slopes: usize },
    #[error("declared symmetry {class} fails with residual {residual:e}")]
    SymmetryMismatch { class: String, residual: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("exponent {value} at byte {pos} exceeds the cap {cap}")]
    ExponentOverflow { pos: usize, value: u64, cap: u32 },

    #[error("conjugate of the family parameter (`~t`) at byte {pos} is not allowed")]
    ConjugateParameter { pos: usize },

    #[error("the family parameter `t` appears at byte {pos} in a plain mixed polynomial")]
    UnexpectedParameter { pos: usize },

    #[error("variable z{index} is out of range for dimension {n}")]
    VariableOutOfRange { index: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("the zero polynomial has no Newton polyhedron")]
    ZeroPolynomial,

    #[error("invalid weight vector: {0}")]
    InvalidWeight(String),

    #[error("face enumeration is capped at n <= {cap}, got n = {n}")]
    DimensionCap { n: usize, cap: usize },

    #[error("integer overflow in exact polyhedral arithmetic")]
    ArithmeticOverflow,

    #[error("the given face is not a face of this polynomial's Newton polyhedron")]
    NotAFace,

    #[error("expected a single monomial, got {0} terms")]
    NotAMonomial(usize),

    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),

    #[error("slice value u_{0} must be non-zero")]
    ZeroSliceValue(usize),

    #[error("face has an empty non-compact direction")]
    CompactFace,

    #[error("invalid covering: {0}")]
    InvalidCovering(String),

    #[error("pullback requires a holomorphic family (no conjugate variables)")]
    NotHolomorphic,

    #[error("truncation underflow: needed order {needed}, truncation is {available}")]
    TruncationUnderflow { needed: i32, available: i32 },

    #[error("series vector is identically zero outside the skipped components")]
    ZeroSeries,

    #[error("arc is not on the hypersurface: {0}")]
    ArcNotOnHypersurface(String),

    #[error("arc is not in the stratum: {0}")]
    ArcNotInStratum(String),

    #[error("arc meets the critical set of f at s = {0}")]
    ArcMeetsCriticalSet(f64),

    #[error("point is not on V(f): |f(p)| = {0}")]
    PointNotOnHypersurface(f64),

    #[error("point is a mixed singular point (residual {0})")]
    SingularPoint(f64),

    #[error("{0} is not radially weighted homogeneous for the given weights")]
    NotHomogeneous(&'static str),
}

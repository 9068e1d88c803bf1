use thiserror::Error;

/// Errors raised by the geometric constructions.
///
/// Every variant carries the measured quantity that tripped it so callers
/// (and the verification report) can say how far off an input was.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not a unit vector (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("matrix is not a complex structure: {reason} (residual {residual:e})")]
    NotComplexStructure { reason: &'static str, residual: f64 },

    #[error("quaternion relation {relation} violated (residual {residual:e})")]
    QuaternionRelation { relation: &'static str, residual: f64 },

    #[error("F^2 is not a negative multiple of the identity (residual {residual:e})")]
    NotScaledStructure { residual: f64 },

    #[error("matrix does not commute with the complex structure (commutator norm {norm:e})")]
    NonCommuting { norm: f64 },

    #[error("vector is not tangent to the sphere (|<p,v>| = {normal_component:e})")]
    NotTangent { normal_component: f64 },

    #[error("degenerate form: {0}")]
    DegenerateForm(String),

    #[error("singular linear system in {context} (smallest pivot {pivot:e})")]
    Singular { context: &'static str, pivot: f64 },

    #[error("loop does not close (distance {distance:e} between first and last sample)")]
    OpenLoop { distance: f64 },

    #[error("argument jump {jump} rad at sample {index} exceeds the anti-aliasing bound")]
    WindingAliasing { index: usize, jump: f64 },

    #[error("complex determinant vanishes at sample {index} (|det| = {modulus:e})")]
    SingularLoop { index: usize, modulus: f64 },

    #[error("step must be positive, got {0}")]
    NonPositiveStep(f64),

    #[error("sequence did not converge: {0}")]
    NonConvergent(String),

    #[error("residual {residual:e} exceeds tolerance {tolerance:e} in {context}")]
    ResidualTooLarge {
        context: &'static str,
        residual: f64,
        tolerance: f64,
    },
}

pub type Result<T, E = GeomError> = std::result::Result<T, E>;

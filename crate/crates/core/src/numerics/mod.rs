//! Numerical kernels shared by the rest of the crate: adaptive ODE
//! integration, cubature over boxes, and small dense linear algebra.
//!
//! Everything here is a pure function of its inputs.

mod interval;
mod linalg;
mod ode;
mod quadrature;

pub use interval::{HyperRectangle, Interval};
pub use linalg::{det_and_inverse, Cholesky, MetricMatrix};
pub use ode::{
    hermite, hermite_derivative, integrate_ode, OdeError, OdeFailure, OdeOptions, OdeState,
    OdeStop, RhsFailure,
};
pub use quadrature::{
    gauss_legendre_panel, integrate_box, integrate_box_with, GaussLegendre, QuadOptions,
    QuadResult,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericsError {
    #[error("invalid interval ({lo}, {hi}): need lo < hi")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("box has no axes")]
    EmptyBox,
    #[error("box axis {axis} is unbounded")]
    UnboundedAxis { axis: usize },
    #[error("tolerances must be positive")]
    InvalidTolerance,
    #[error("non-finite integrand value {value} at {point:?}")]
    NonFiniteIntegrand { point: Vec<f64>, value: f64 },
    #[error("initial state has non-finite components")]
    NonFiniteState,
    #[error("integration span [{start}, {end}] runs backwards")]
    InvalidSpan { start: f64, end: f64 },
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix has non-finite entries")]
    NonFiniteMatrix,
    #[error("matrix is not symmetric (asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("matrix is not positive definite: pivot {pivot} = {value:e}")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("matrix is singular at pivot {pivot}")]
    Singular { pivot: usize },
}

//! Fisher–Rao geometry of parametric statistical models, geodesic flows on
//! the resulting manifolds, and the information geometric entropy (IGE)
//! built from the Riemannian volume those flows sweep out.
//!
//! The pipeline is
//!
//! ```text
//! model ──► metric g(Θ) ──► Christoffels Γ ──► geodesic Θ(s)
//!                │                                  │
//!                └──► Fisher density √g ◄── box D(τ′) ┘
//!                           │
//!                     vol(τ′) ──► ṽol(τ) ──► S(τ) = log ṽol ──► K_IG
//! ```
//!
//! Modules map one-to-one onto those stages. [`exec::Execution`] selects
//! between the rayon-backed and sequential paths for the data-parallel loops.

pub mod exec;
pub mod geodesic;
pub mod geometry;
pub mod ige;
pub mod models;
pub mod numerics;

pub use exec::Execution;

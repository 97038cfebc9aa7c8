//! Hardy-space machinery on the unit disk.
//!
//! The crate provides, at desk scale and in complex double precision:
//!
//! - [`series`]: truncated matrix-valued power series with the H₂
//!   coefficient form `[f,g] = Σ fₙ* gₙ`;
//! - [`blaschke`]: finite Blaschke products, state-space realizations of
//!   model-space bases, observability Gramians, orthonormal bases of
//!   `H₂ ⊖ bH₂`;
//! - [`cuntz`]: the isometries `Sⱼh = eⱼ·(h∘b)`, the analysis/synthesis
//!   pair realizing the unique sub-band decomposition, and numerical
//!   verification of the Cuntz relations;
//! - [`pick`]: Pick matrices, tangential Nevanlinna–Pick solvers, and
//!   Schur-class certification;
//! - [`leech`]: constructive Leech factorization and the Schur
//!   representations of contractive H₂ functions;
//! - [`interp`]: minimal-norm solvers for multipoint interpolation under
//!   linear-functional and derivative constraints;
//! - [`dbr`]: kernel-level checks of the de Branges–Rovnyak decomposition
//!   identities.
//!
//! All values are immutable after construction and all operations are
//! pure, so everything is safe to use concurrently without restriction.

pub mod blaschke;
pub mod cuntz;
pub mod dbr;
pub mod error;
pub mod interp;
pub mod leech;
pub(crate) mod linalg;
pub mod pick;
pub mod series;

pub use error::HardyError;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, HardyError>;

/// Complex double precision scalar used throughout.
pub type Complex64 = nalgebra::Complex<f64>;

/// Default truncation length for series produced by the solvers.
pub const DEFAULT_TRUNCATION: usize = 256;

/// Default numerical tolerance for feasibility and residual checks.
pub const DEFAULT_TOL: f64 = 1e-8;

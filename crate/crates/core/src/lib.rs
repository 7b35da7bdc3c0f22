//! Cell-centered finite volume solver for the noncoercive quasilinear
//! convection–diffusion problem
//!
//! ```text
//!     -div( λ(u) ∇u  -  v u ) = f     in Ω ⊂ R²,
//! ```
//!
//! with zero total flux through every boundary edge and zero-mean data.
//! The discrete problem is singular (constants are in the kernel of the
//! transposed operator); the solver selects the unique discrete solution
//! whose *lower median* is zero by shifting along the one-dimensional,
//! one-signed kernel of the assembled matrix.
//!
//! The crate has two halves:
//!
//! * a generic solver core ([`mesh`], [`field`], [`scheme`], [`solver`],
//!   [`linalg`]), parameterized over the floating-point scalar through
//!   [`Real`] (instantiable at `f32` or `f64`), and
//! * an f64 verification layer ([`analysis`], [`harness`]) that measures the
//!   discrete a priori estimates behind the scheme — logarithmic energy
//!   bound, truncation energies, exceedance decay, median/Sobolev
//!   inequalities, and the renormalized flux identity — and drives
//!   convergence studies from the `medfv` command-line binary.
//!
//! Working precision everywhere downstream is `f64`; the aliases at the
//! crate root fix that choice once.

pub mod analysis;
pub mod error;
pub mod field;
pub mod harness;
pub mod linalg;
pub mod mesh;
pub mod scalar;
pub mod scheme;
pub mod solver;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision mesh, the working type of the harness and CLI.
pub type Mesh = mesh::AdmissibleMesh<f64>;
/// Single-precision mesh.
pub type Mesh32 = mesh::AdmissibleMesh<f32>;
/// Double-precision cell field.
pub type Field = field::CellField<f64>;
/// Single-precision cell field.
pub type Field32 = field::CellField<f32>;
/// Double-precision sparse operator.
pub type Matrix = linalg::SparseMatrix<f64>;
/// Single-precision sparse operator.
pub type Matrix32 = linalg::SparseMatrix<f32>;
/// Double-precision problem data (diffusion law, velocity, source).
pub type Problem = scheme::ProblemData<f64>;
/// Single-precision problem data.
pub type Problem32 = scheme::ProblemData<f32>;

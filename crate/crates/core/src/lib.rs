//! Parity-decomposition solver for the one-dimensional stationary Wigner
//! equation with inflow boundary conditions.
//!
//! The stationary Wigner equation `v df/dx = Theta f` on `x in [-l/2, l/2]`
//! is a half-range two-point boundary value problem: the distribution is
//! prescribed at `x = -l/2` for `v > 0` and at `x = +l/2` for `v < 0`.
//! Splitting `f` into its even and odd parts in `v` decouples the problem:
//! the even part solves a well-posed initial value problem (the governing
//! operator is bounded on the even subspace), the odd part carries a closed
//! lower-triangular hierarchy of odd velocity moments, and the inflow data
//! is converted into full boundary data at the left end by a small dense
//! linear system built from the two end-to-end propagators.
//!
//! Module map:
//! - [`potential`]: potentials, the Wigner kernel `Vw(x, v)` and its moments
//! - [`kernel`]: kernel sample tables on the discrete grids
//! - [`grid`]: offset velocity grid, space grid, parity algebra, moments
//! - [`wigner_op`]: the discrete operators `Theta`, `B(x)`, `A(x)` and the
//!   operator-norm bound check
//! - [`propagation`]: RK4 marching of the parity IVPs and dense propagators
//! - [`odd_moments`]: the odd moment hierarchy, moment-space transfer maps
//!   and truncated Hermite reconstruction
//! - [`bvp`]: inflow boundary assembly and the full solution field
//! - [`oracle`]: independent upwind finite-difference discretization used
//!   for cross-validation
//! - [`cli`]: config-driven runs, presets, refinement studies, CSV/JSON
//!   artifacts
//!
//! See the crate `examples/` directory for one runnable example per
//! capability, and the `wigner` binary for the config-driven driver.

pub mod bvp;
pub mod cli;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod odd_moments;
pub mod oracle;
pub mod potential;
pub mod propagation;
pub mod quad;
pub mod wigner_op;

pub use error::{Result, WignerError};
pub use grid::{GridFunction, Parity, ParityTag, Side, SpaceGrid, VelocityGrid};
pub use kernel::KernelTable;
pub use potential::PotentialSpec;

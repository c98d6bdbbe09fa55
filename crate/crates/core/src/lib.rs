//! Finite-volume solvers for the cosmological Burgers balance law
//!
//! ```text
//! v_τ + f(v)_x + g(v)_y = m(τ) h(v),   m(τ) = κ/τ,   h(v) = −v(1 − v²)
//! ```
//!
//! posed on expanding (τ > 0), contracting (τ < 0) or flat (m ≡ 0)
//! backgrounds, in one and two space dimensions.
//!
//! The crate is `no_std` (it needs `alloc`). All transcendental functions go
//! through `libm` so results do not depend on the platform math library.
//! The `parallel` feature enables data-parallel evaluation of the 2D right-hand
//! side with rayon; results are bit-identical to the sequential path.
#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod diagnostics;
pub mod grid;
pub mod model;
pub mod presets;
pub mod riemann;
pub mod run;
pub mod solver1d;
pub mod solver2d;
pub mod time;

pub use grid::{BoundaryRule, Grid1D, Grid2D, GridError};
pub use model::{Background, FluxModel, FluxShape, ModelError, Regime};
pub use run::{RunError, Snapshot, SnapshotSeries, StepStats};
pub use solver1d::{ExtraRule, Field1D, SpaceOrder, StepPolicy};
pub use solver2d::Field2D;
pub use time::{SolverError, TimeScheme};

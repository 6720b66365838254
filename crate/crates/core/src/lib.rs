//! Derivative-free optimization with least-norm quadratic models.
//!
//! The crate is organized bottom-up:
//!
//! - [`quadratic`]: quadratic functions and their H1 seminorm over balls (closed form and a
//!   quadrature cross-check).
//! - [`interpolation`]: least-norm interpolation `P1(sigma)`, Lagrange functions, poisedness,
//!   and checks of the seminorm interpretation.
//! - [`update`]: the (extended) symmetric Broyden update and the rules for choosing its
//!   weight.
//! - [`solver`]: a model-based trust-region minimizer built on the update.
//! - [`problems`]: a fixed suite of test problems and variable permutations.
//! - [`bench`]: permutation-replicated benchmarking, statistics, and performance profiles.

pub mod bench;
pub mod error;
pub mod interpolation;
pub mod problems;
pub mod quadratic;
pub mod solver;
pub mod update;

pub use error::{Error, Result};
pub use interpolation::{InterpolationSet, LeastNormSpec, LeastNormSystem, PoisednessReport};
pub use quadratic::{Ball, QuadraticModel};

pub use solver::{minimize, SolverConfig, SolverReport, Status};
pub use update::{SigmaRule, UpdateContext};

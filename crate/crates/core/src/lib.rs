//! Iteration schemes with memory for univariate root finding and
//! optimisation, derived from barycentric rational interpolation.
//!
//! The crate is `no_std` (it needs `alloc`). All arithmetic is generic over
//! [`Real`]; use `f64` for quick work and [`BigReal`] when iteration traces
//! have to be followed far below double precision.
//!
//! ```
//! use baryiter_core::{corpus, root_search, BigReal, Precision, Real};
//!
//! let prec = Precision::new(256).unwrap();
//! let problem = corpus::problem("cos_minus_x").unwrap();
//! let config = root_search::SolverConfig::new(root_search::RootMethod::ExactDF, prec);
//! let x0 = BigReal::from_i64(3, prec);
//! let trace = root_search::solve(&problem, x0, &config, None).unwrap();
//! assert!(trace.converged());
//! ```

#![no_std]

extern crate alloc;

pub mod analysis;
pub mod corpus;
mod error;
pub mod expr;
pub mod function;
pub mod interpolants;
pub mod numerics;
pub mod optimise;
pub mod root_search;
pub mod trace;
pub mod weights;

pub use error::Error;
pub use function::ScalarFunction;
pub use interpolants::Sample;
pub use numerics::{BigReal, Precision, Real};
pub use trace::{IterationTrace, Status, StepRecord};

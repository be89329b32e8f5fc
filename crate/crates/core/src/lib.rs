//! Stochastic second-order optimizers for finite-sum problems.
//!
//! This crate implements four optimizers for l2-regularized logistic
//! regression — subsampled Newton with a conjugate-gradient inner solver
//! (SSN-CG), Newton-Sketch with a randomized Hadamard sketch, subsampled
//! Newton with a stochastic gradient inner iteration (SSN-SGI), and SVRG —
//! together with the cost model that makes them comparable (effective
//! gradient evaluations), eigenvalue-spectrum reports for subsampled and
//! sketched Hessians, and an experiment harness that sweeps per-iteration
//! budgets and hyper-parameters.
//!
//! The crate is organized bottom-up:
//!
//! - [`linops`]: dense/CSR kernels, the fast Walsh–Hadamard transform, and
//!   a Jacobi eigensolver for small symmetric matrices.
//! - [`data`]: libsvm ingestion, synthetic problem generation with a
//!   controlled condition number, and train/test splitting.
//! - [`problem`]: the logistic-regression objective and its oracles
//!   (value, gradient, subsampled Hessian-vector products, square-root
//!   Hessian applications) with work accounting.
//! - [`sketch`]: the randomized Hadamard sketch operator and the sketched
//!   square-root Hessian.
//! - [`solvers`]: matrix-free CG with a residual stopping test, and the
//!   stochastic gradient inner iteration.
//! - [`methods`]: the four optimizers, Armijo backtracking, and a
//!   high-accuracy reference Newton used to compute `F*`.
//! - [`analysis`]: spectrum reports, convergence-theory calculators, and
//!   problem-constant estimation.
//! - [`harness`]: budget grids, grid execution, trace serialization, and
//!   SVG plots.
//!
//! Row-parallel kernels use rayon when the `parallel` feature (default) is
//! enabled; results are bitwise identical to the sequential fallback
//! because reductions run over fixed-size row chunks combined in order.

// indexed loops mirror the matrix math; negated comparisons reject NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod data;
pub mod error;
pub mod harness;
pub mod linops;
pub mod methods;
pub mod problem;
pub mod rng;
pub mod sketch;
pub mod solvers;

mod par;

pub use error::{Error, Result};

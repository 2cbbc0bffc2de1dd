//! Dimensions of graphs and ranges of self-affine random fields.
//!
//! A random field `X` on `R^d` with values in `R^m` is `(U, V)`-self-affine
//! when `X(Ut)` and `V X(t)` have the same finite-dimensional laws. For
//! exponential scalings `U = c^E`, `V = c^D` the carrying dimension of the
//! occupation measure of the graph equals the affinity exponent
//! `s(c^{E⊕D}, c^q)` with `q = trace(E)`, and `s(c^D, c^q)` bounds the
//! dimension of the range from below.
//!
//! The crate provides
//!
//! * [`matrix`]: matrix exponentials, eigenvalue real-part spectra, spectral
//!   decompositions, generalized polar coordinates and log-domain singular
//!   values of large matrix powers;
//! * [`svf`]: the singular value function and the exponent `s(W, x)`, both
//!   numerically (limit of matrix powers) and in closed form from spectra;
//! * [`dims`]: the dimension formulas for operator-self-similar stable fields
//!   and operator semistable Lévy processes, plus identity checks;
//! * [`fields`]: sample-path simulators and a distributional scaling test;
//! * [`occupation`]: occupation histograms, box counting, energy integrals and
//!   a density probe.

// Negated comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dims;
pub mod error;
pub mod fields;
pub mod matrix;
pub mod occupation;
pub mod report;
pub mod svf;

pub use error::{Error, Result};
pub use matrix::{ExponentPair, SpectralDecomposition, SpectrumSummary, SquareMatrix};
pub use svf::{CaseTag, Method, SValResult};

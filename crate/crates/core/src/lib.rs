//! Hybrid sigmoid/softsign activations and the tooling to study them.
//!
//! S3 switches hard between sigmoid and softsign at the origin; S4 blends
//! them through a logistic gate `α_k(x) = 1/(1 + e^(−kx))`. Both come in a
//! literal form and a rescaled form that keeps the softsign branch in
//! `(0, 1)`. Around them sit:
//!
//! - [`activation`]: scalar and batch kernels with exact derivatives
//! - [`gradcheck`]: finite-difference verification of every derivative
//! - [`nn`]: a dense network with manual backpropagation, Adam and early stopping
//! - [`data`]: Iris, Boston Housing, MNIST and a seeded synthetic set
//! - [`experiments`]: multi-seed studies, statistics and reports
//! - [`bench`]: naive against fused S4 throughput
//! - [`cli`]: the `hybridact` command
//!
//! ```
//! use hybridact::activation::{Activation, Variant};
//!
//! let s4 = Activation::s4(Variant::Rescaled, 10.0);
//! assert_eq!(s4.eval(0.0).unwrap(), 0.5);
//! assert!(s4.derivative(0.0).unwrap() > 0.0);
//! ```

pub mod activation;
pub mod bench;
pub mod cli;
pub mod data;
pub mod error;
pub mod experiments;
pub mod gradcheck;
pub mod matrix;
pub mod nn;
pub mod rng;

pub use error::{Error, Result};

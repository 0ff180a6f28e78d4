//! Black-box combinatorial design of π-type noise filters.
//!
//! Designs are 22-bit one-hot vectors ([`encoding`]), scored by a lumped
//! two-port model ([`circuit`], [`objective`]). The optimizer fits a Bayesian
//! quadratic surrogate ([`surrogate`]), turns a posterior sample into a QUBO
//! ([`qubo`]) and minimizes it with an interchangeable backend ([`solvers`]).
//! [`harness`] runs the optimization loop, the random-search baseline and the
//! full-enumeration ranking.

pub mod circuit;
pub mod encoding;
pub mod error;
pub mod harness;
pub mod objective;
pub mod qubo;
pub mod solvers;
pub mod surrogate;

pub use error::{Error, Result};

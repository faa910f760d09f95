//! Excess-risk analyses of three learning paradigms: empirical risk
//! minimization, Bayes decisions under distributional mismatch with
//! exponential-family projection learning, and Bayesian minimum excess risk.

mod conditional;
mod erm;
mod expfam;
mod mer;

pub use conditional::*;
pub use erm::*;
pub use expfam::*;
pub use mer::*;

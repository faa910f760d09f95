//! Generalized entropy `H_{A,ℓ}(P) = inf_{a∈A} E_P ℓ(Z, a)` and its
//! continuity in `P`.
//!
//! The library computes generalized (conditional) entropies for the canonical
//! losses and arbitrary loss tables, evaluates upper bounds on entropy
//! differences in terms of TV, KL, χ², pushforward and Wasserstein distances,
//! and uses those bounds to analyze excess risk in empirical risk
//! minimization, mismatched Bayes decisions, exponential-family projection
//! learning, and Bayesian minimum excess risk.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`). The aliases
//! below fix the scalar for callers who do not need the generality.

pub mod bounds;
pub mod dist;
pub mod divergence;
pub mod entropy;
pub mod error;
pub mod experiment;
pub mod learn;
pub mod legendre;
pub mod linalg;
pub mod loss;
pub mod quad;
pub mod rng;
pub mod scalar;
pub mod transport;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Dist = dist::DiscreteDist<f64>;
pub type Dist32 = dist::DiscreteDist<f32>;
pub type Joint = dist::JointDiscrete<f64>;
pub type Joint32 = dist::JointDiscrete<f32>;
pub type Gaussian = dist::GaussianScalar<f64>;
pub type Gaussian32 = dist::GaussianScalar<f32>;
pub type Loss = loss::LossSpec<f64>;
pub type Loss32 = loss::LossSpec<f32>;
pub type Table = loss::LossTable<f64>;
pub type Table32 = loss::LossTable<f32>;
pub type Report = bounds::BoundReport<f64>;
pub type Report32 = bounds::BoundReport<f32>;
pub type Entropy = entropy::EntropyResult<f64>;
pub type Entropy32 = entropy::EntropyResult<f32>;
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

//! Bayesian estimation of the Unit-Weibull distribution from dual generalized
//! order statistics.
//!
//! Three engines approximate posterior expectations under independent gamma
//! priors: Lindley's expansion ([`lindley`]), the Tierney–Kadane ratio
//! ([`tk`]) and a Metropolis-within-Gibbs sampler ([`mcmc`]). Each is combined
//! with squared-error, LINEX or general-entropy loss. [`risk`] runs Monte-Carlo
//! risk studies over these estimators and [`data`] holds the real-data tools
//! (transform, record extraction, classical fits, KS test).

pub mod data;
pub mod dgos;
pub mod error;
pub mod estimate;
pub mod lindley;
pub mod loss;
pub mod mcmc;
pub mod mle;
pub mod prior;
pub mod risk;
pub mod rng;
pub mod special;
pub mod target;
pub mod tk;
pub mod uw;

mod roots;

pub use dgos::{log_likelihood, sample_dgos, DgosLikelihood, DgosSample, DgosScheme};
pub use error::{Error, Result};
pub use estimate::{EstimateSet, Method};
pub use loss::{loss_value, LossKind, LossSpec};
pub use mle::{fit_mle, MleOptions, MleResult};
pub use prior::GammaPriors;
pub use target::{Jet, Target};
pub use uw::{ReliabilityQuery, UwParams};

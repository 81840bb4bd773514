//! Heavy-tailed random walks, stable path skeletons, fractional Sobolev
//! norms, and coupled Wasserstein distance experiments on dyadic grids.

pub mod cli;
pub mod distance;
pub mod error;
pub mod experiments;
pub(crate) mod fastpow;
pub mod paths;
pub(crate) mod quadrature;
pub mod randlaws;
pub mod sobolev;

pub use distance::{
    coupled_distance, coupled_path_pair, projection_gap, w1_sorted, CoupledPair, Estimate,
    GapSource,
};
pub use error::{Error, Result};
pub use experiments::{
    fit_loglog, increment_moment_check, interp_error_sweep, moment_sweep, plan_kappa_upsilon,
    rate_sweep, ExperimentConfig, RateFitResult, SweepSource,
};
pub use paths::DyadicPath;
pub use randlaws::{HeavyTailLaw, PerturbedTailLaw, RngStream, StableLaw, SymmetricParetoLaw};

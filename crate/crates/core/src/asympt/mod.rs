//! Scaling maps, the second-order expansions of the limit laws and tools to
//! measure how fast their residuals decay.

mod covariance;
mod expansions;
mod fit;
mod scaling;

pub use covariance::{covariance_poisson_truncation, covariance_poissonized, PoissonCovariance};
pub use expansions::{
    exponential_regime_check, prop62_check, prop63_check, thm11_expansion, thm11_joint_approx, thm13_approx,
    thm13_residuals, thm15_approx, thm15_residuals, ExpansionPoint, ExponentialRegime, JointExpansion, RegimeCheck,
};
pub use fit::{fit_decay, ResidualSeries};
pub use scaling::{a_of_gamma, gammas, s_of_gamma, ScalingPoint};

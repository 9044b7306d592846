//! Distribution functions of the Poissonized statistics by determinants,
//! by the orthogonal-polynomial flow, and by truncated Poisson sums, plus
//! numerical checks of the flow identities.

mod cdf;
mod flow;
mod identities;

pub use cdf::{
    joint_cdf, joint_cdf_poisson, log_joint_cdf, log_lt_cdf, log_nes_marginal_cdf, lt_cdf, nes_marginal_cdf,
    nes_marginal_cdfs, DistributionPoint, Route,
};
pub use flow::{lt_prop1_quadrature, nes_prop1_quadrature, prop1_quadrature, q_functional, QuadratureResult};
pub use identities::{ode_identity_checks, IdentityReport, ResidualPair};

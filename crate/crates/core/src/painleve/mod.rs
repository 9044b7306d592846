//! Airy functions, the Hastings–McLeod solution of Painlevé II and the
//! Tracy–Widom distributions built from it.

pub mod airy;
pub mod hm;

pub use airy::{airy, airy_tail};
pub use hm::{hm_left_asymptotic, solve_hm, HMSolution, HmOptions, HmPoint};
pub mod tw;

pub use tw::{
    default_solution, g1g2h, perfect_derivative_check, tw_cdf, tw_pdf, tw_pdf_prime, PerfectDerivativeCheck,
    TwDistribution, TwKind, TwValue,
};

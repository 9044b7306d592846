//! Complete matchings of `[2n]`: crossing and nesting statistics, exhaustive
//! enumeration, uniform sampling and exact distribution tables.

mod enumerate;
mod matching;
mod sample;
mod table;

pub use enumerate::{double_factorial_odd, enumerate_matchings, joint_histogram, MatchingIter, MAX_ENUM_N};
pub use matching::Matching;
pub use sample::{
    covariance_jackknife, mc_scaled_covariance, mc_scaled_covariance_with, replica_rng, sample_matching,
    sample_matching_with, scale_factor, CovEstimate, ScaledStats,
};
pub use table::{
    cov_cor, cov_cor_from_table, depoissonization_check, gkj_table, gkj_table_with, monotonicity_check, CovCor,
    DepoissonCheck, StatTable, SummaryRow,
};

//! Exact and floating-point probability tools.

mod binomial;
mod dist;
mod hash;
mod mass;
mod primes;

pub use binomial::{
    binomial, binomial_shift_sd, majority_error, majority_error_bound, majority_error_exact, smoothing_check,
    smoothing_series,
};
pub use dist::{
    entropy, min_entropy, mutual_information, recompose, statistical_distance, two_point_decompose, ExactDist,
    TwoPointComponent,
};
pub use hash::{gf2_encode, HashFamily, HashFn};
pub use mass::{parse_rational, Mass};
pub use primes::{is_prime, lcm_upto, lcm_upto_u64, primes_in_range};

pub use num::rational::BigRational;

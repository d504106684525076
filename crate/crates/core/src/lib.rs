//! Exact finite-size canonical ensembles.
//!
//! `K` systems share `N` energy quanta; level `l` has degeneracy `w_l`. The
//! mean occupation of every level is an exact rational built from partial
//! Bell polynomials, cross-checked against brute-force enumeration, closed
//! forms in terms of Lah and Stirling numbers, and the large-`K`
//! steepest-descent limit.

pub mod bell;
pub mod checks;
pub mod cli;
pub mod combinatorics;
pub mod ensemble;
pub mod oracle;
pub mod saddlepoint;

pub use bell::{
    bell_enumerate, bell_eval, compose_series, derivative_bell, ordinary_bell_eval, BellError,
    BellTable, SeriesCoefficients, SymbolicBell, TermSource,
};
pub use combinatorics::{
    binomial, enumerate_configurations, factorial, lah, rising_factorial, stirling1_unsigned,
    stirling2, Configuration, ExactInt, ExactRational,
};
pub use ensemble::{
    constant_closed_form, distribution, gamma_bell, gibbs_limit, occupation,
    oscillator_stirling_form, DegeneracySpec, Distribution, Ensemble, EnsembleError,
    EnsembleParams,
};
pub use saddlepoint::{
    find_saddle, gamma_saddle, occupation_asymptotic, SaddleError, SaddleResult,
};

//! Brute-force ground truth. Every configuration of `K` systems with `N`
//! quanta is listed and weighted by `W = K! prod_l w_l^{m_l} / m_l!`; the
//! partition function and occupations are then plain sums. No Bell
//! polynomial is involved anywhere in this module.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Pow, Zero};
use rayon::prelude::*;

use crate::combinatorics::{enumerate_configurations, factorial, Configuration, ExactRational};
use crate::ensemble::{DegeneracySpec, EnsembleError, EnsembleParams};

/// Largest `N` the oracle will enumerate.
pub const MAX_ORACLE_N: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedConfiguration {
    pub config: Configuration,
    pub weight: ExactRational,
}

fn guard(params: &EnsembleParams) -> Result<(), EnsembleError> {
    if params.n() > MAX_ORACLE_N {
        return Err(EnsembleError::TooLarge {
            n: params.n(),
            cap: MAX_ORACLE_N,
        });
    }
    Ok(())
}

/// Number of realisations of `config`: `K! prod_l w_l^{m_l} / m_l!`.
pub fn weight(
    config: &Configuration,
    degeneracy: &DegeneracySpec,
    k: usize,
) -> Result<ExactRational, EnsembleError> {
    if config.k() != k {
        return Err(EnsembleError::InvalidParams(format!(
            "configuration holds {} systems, expected {k}",
            config.k()
        )));
    }
    let mut w = BigRational::from_integer(factorial(k));
    for (&l, &m) in config.occupations() {
        let omega = degeneracy.omega(l)?;
        w = w * Pow::pow(&omega, m) / BigRational::from_integer(factorial(m));
    }
    Ok(w)
}

pub fn weighted_configurations(
    params: &EnsembleParams,
    degeneracy: &DegeneracySpec,
) -> Result<Vec<WeightedConfiguration>, EnsembleError> {
    guard(params)?;
    let configs: Vec<Configuration> = enumerate_configurations(params.n(), params.k()).collect();
    configs
        .into_par_iter()
        .map(|config| {
            let weight = weight(&config, degeneracy, params.k())?;
            Ok(WeightedConfiguration { config, weight })
        })
        .collect()
}

/// `Gamma_{N,K}` as the plain sum of weights.
pub fn gamma_direct(
    params: &EnsembleParams,
    degeneracy: &DegeneracySpec,
) -> Result<ExactRational, EnsembleError> {
    Ok(weighted_configurations(params, degeneracy)?
        .iter()
        .fold(BigRational::zero(), |acc, wc| acc + &wc.weight))
}

/// `n*(l) = sum m_l W / sum W`.
pub fn occupation_direct(
    params: &EnsembleParams,
    degeneracy: &DegeneracySpec,
    l: usize,
) -> Result<ExactRational, EnsembleError> {
    Ok(occupations_direct(params, degeneracy)?
        .remove(&l)
        .unwrap_or_else(BigRational::zero))
}

/// `n*(l)` for every feasible level `1..=N-K+1` from one enumeration pass.
pub fn occupations_direct(
    params: &EnsembleParams,
    degeneracy: &DegeneracySpec,
) -> Result<BTreeMap<usize, ExactRational>, EnsembleError> {
    let weighted = weighted_configurations(params, degeneracy)?;
    let total = weighted
        .iter()
        .fold(BigRational::zero(), |acc, wc| acc + &wc.weight);
    if total.is_zero() {
        return Err(EnsembleError::EmptyEnsemble);
    }
    let mut sums: BTreeMap<usize, ExactRational> = (1..=params.max_level())
        .map(|l| (l, BigRational::zero()))
        .collect();
    for wc in &weighted {
        for (&l, &m) in wc.config.occupations() {
            *sums.get_mut(&l).expect("level within range") += &wc.weight * BigInt::from(m);
        }
    }
    Ok(sums.into_iter().map(|(l, s)| (l, s / &total)).collect())
}

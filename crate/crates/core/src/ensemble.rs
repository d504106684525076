//! Finite canonical ensemble of `K` systems sharing `N` energy quanta.
//!
//! A system sits on level `l >= 1` with degeneracy `w_l`. With
//! `a_j = j! w_j`, the weighted configuration count and the mean occupation
//! of level `l` are
//!
//! ```text
//! Gamma_{N,K} = (K!/N!) B_{N,K}(a)
//! n*(l)       = N!/(N-l)! * w_l * B_{N-l,K-1}(a) / B_{N,K}(a)
//! ```
//!
//! and `P(l) = n*(l) / K` is exact for every finite `K`, `N`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bell::{BellError, BellTable, TermSource};
use crate::combinatorics::{
    factorial, falling_factorial, format_rational, parse_rational, rising_factorial,
    stirling1_unsigned, stirling2, ExactInt, ExactRational,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnsembleError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("degeneracy list provides {available} levels but {needed} are required")]
    InsufficientSequence { needed: usize, available: usize },
    #[error("no configuration has positive weight (Gamma = 0)")]
    EmptyEnsemble,
    #[error("level {l} outside the feasible range 1..={max}")]
    OutOfRange { l: usize, max: usize },
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("enumeration refused for N = {n} (limit {cap})")]
    TooLarge { n: usize, cap: usize },
}

impl From<BellError> for EnsembleError {
    fn from(e: BellError) -> Self {
        match e {
            BellError::InsufficientSequence { needed, available } => {
                EnsembleError::InsufficientSequence { needed, available }
            }
            other => EnsembleError::InvalidParams(other.to_string()),
        }
    }
}

/// Level degeneracies `w_1, w_2, ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DegeneracySpec {
    /// `w_l = w` for every level.
    Constant(ExactRational),
    /// `D`-dimensional oscillator, `w_l = (l+1)(l+2)...(l+D)`.
    Oscillator(u32),
    /// `w_1..w_len`; querying past the end is an error.
    Explicit(Vec<ExactRational>),
}

impl DegeneracySpec {
    pub fn constant_one() -> Self {
        DegeneracySpec::Constant(BigRational::one())
    }

    pub fn validate(&self) -> Result<(), EnsembleError> {
        match self {
            DegeneracySpec::Constant(w) if !w.is_positive() => Err(EnsembleError::InvalidParams(
                format!("constant degeneracy must be positive, got {w}"),
            )),
            DegeneracySpec::Oscillator(0) => Err(EnsembleError::InvalidParams(
                "oscillator dimension must be at least 1".into(),
            )),
            DegeneracySpec::Explicit(list) => match list.iter().position(|w| w.is_negative()) {
                Some(i) => Err(EnsembleError::InvalidParams(format!(
                    "degeneracy of level {} is negative",
                    i + 1
                ))),
                None => Ok(()),
            },
            _ => Ok(()),
        }
    }

    /// `w_l` for `l >= 1`.
    pub fn omega(&self, l: usize) -> Result<ExactRational, EnsembleError> {
        assert!(l >= 1, "levels start at 1");
        match self {
            DegeneracySpec::Constant(w) => Ok(w.clone()),
            DegeneracySpec::Oscillator(d) => Ok(BigRational::from_integer(rising_factorial(
                l as i64 + 1,
                *d as usize,
            ))),
            DegeneracySpec::Explicit(list) => {
                list.get(l - 1)
                    .cloned()
                    .ok_or(EnsembleError::InsufficientSequence {
                        needed: l,
                        available: list.len(),
                    })
            }
        }
    }

    /// Number of explicitly listed levels, `None` for unbounded kinds.
    pub fn listed_levels(&self) -> Option<usize> {
        match self {
            DegeneracySpec::Explicit(list) => Some(list.len()),
            _ => None,
        }
    }

    /// The sequence `a_j = j! w_j` fed to the Bell polynomials.
    pub fn bell_arguments(&self) -> BellArguments<'_> {
        BellArguments(self)
    }

    /// Parses the plain-text degeneracy file: one rational per line, line `i`
    /// holding `w_i`. Blank lines and `#` comments are skipped.
    pub fn from_text(text: &str) -> Result<Self, EnsembleError> {
        let mut list = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let w = parse_rational(line)
                .map_err(|e| EnsembleError::InvalidParams(format!("line {}: {e}", lineno + 1)))?;
            list.push(w);
        }
        let spec = DegeneracySpec::Explicit(list);
        spec.validate()?;
        Ok(spec)
    }

    /// Parses the JSON alternative: an array of rational strings.
    pub fn from_json(text: &str) -> Result<Self, EnsembleError> {
        let raw: Vec<String> = serde_json::from_str(text)
            .map_err(|e| EnsembleError::InvalidParams(format!("degeneracy JSON: {e}")))?;
        let list = raw
            .iter()
            .map(|s| parse_rational(s).map_err(|e| EnsembleError::InvalidParams(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let spec = DegeneracySpec::Explicit(list);
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for DegeneracySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DegeneracySpec::Constant(w) => write!(f, "constant:{w}"),
            DegeneracySpec::Oscillator(d) => write!(f, "oscillator:{d}"),
            DegeneracySpec::Explicit(list) => write!(f, "explicit[{}]", list.len()),
        }
    }
}

pub struct BellArguments<'a>(&'a DegeneracySpec);

impl TermSource for BellArguments<'_> {
    fn term(&self, j: usize) -> Option<ExactRational> {
        let w = self.0.omega(j).ok()?;
        Some(w * BigRational::from_integer(factorial(j)))
    }

    fn len_hint(&self) -> Option<usize> {
        self.0.listed_levels()
    }
}

/// `K` systems, `N` quanta of size `epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleParams {
    k: usize,
    n: usize,
    epsilon: f64,
}

impl EnsembleParams {
    pub fn new(k: usize, n: usize) -> Result<Self, EnsembleError> {
        Self::with_epsilon(k, n, 1.0)
    }

    pub fn with_epsilon(k: usize, n: usize, epsilon: f64) -> Result<Self, EnsembleError> {
        if k < 1 {
            return Err(EnsembleError::InvalidParams("K must be at least 1".into()));
        }
        if n < k {
            return Err(EnsembleError::InvalidParams(format!(
                "N = {n} is below K = {k}; every system holds at least one quantum"
            )));
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(EnsembleError::InvalidParams(
                "epsilon must be positive".into(),
            ));
        }
        Ok(EnsembleParams { k, n, epsilon })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Highest level any system can reach, `N - K + 1`.
    pub fn max_level(&self) -> usize {
        self.n - self.k + 1
    }

    /// Energy of level `l` in display units.
    pub fn energy(&self, l: usize) -> f64 {
        self.epsilon * l as f64
    }
}

/// Exact level probabilities `P(l)` for `l = 1..=N-K+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub params: EnsembleParams,
    pub degeneracy: DegeneracySpec,
    pub probs: BTreeMap<usize, ExactRational>,
}

impl Distribution {
    pub fn prob(&self, l: usize) -> ExactRational {
        self.probs
            .get(&l)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// `n*(l) = K P(l)`
    pub fn n_star(&self, l: usize) -> ExactRational {
        let p = self.prob(l);
        let k = self.params.k as u64;
        // p is reduced, so only gcd(K, denominator) can cancel
        let g = k.gcd(&small_mod(p.denom(), k));
        BigRational::new_raw(p.numer() * BigInt::from(k / g), p.denom() / BigInt::from(g))
    }

    pub fn total(&self) -> ExactRational {
        self.probs
            .values()
            .fold(BigRational::zero(), |acc, p| acc + p)
    }

    pub fn mean_level(&self) -> ExactRational {
        self.probs.iter().fold(BigRational::zero(), |acc, (&l, p)| {
            acc + p * BigRational::from_integer(BigInt::from(l))
        })
    }

    pub fn to_document(&self) -> DistributionDocument {
        DistributionDocument {
            k: self.params.k,
            n: self.params.n,
            levels: self
                .probs
                .iter()
                .map(|(&l, p)| LevelDocument {
                    l,
                    p: format_rational(p),
                    n_star: format_rational(&self.n_star(l)),
                })
                .collect(),
        }
    }
}

/// Wire form of a [`Distribution`]; exact values are strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistributionDocument {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub levels: Vec<LevelDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelDocument {
    pub l: usize,
    pub p: String,
    pub n_star: String,
}

/// An ensemble with its Bell table filled once; every level query reads
/// from the same table.
pub struct Ensemble {
    params: EnsembleParams,
    degeneracy: DegeneracySpec,
    table: BellTable,
}

impl Ensemble {
    pub fn new(params: EnsembleParams, degeneracy: DegeneracySpec) -> Result<Self, EnsembleError> {
        degeneracy.validate()?;
        let table = BellTable::build(&degeneracy.bell_arguments(), params.k, params.n - params.k)?;
        Ok(Ensemble {
            params,
            degeneracy,
            table,
        })
    }

    pub fn params(&self) -> &EnsembleParams {
        &self.params
    }

    pub fn degeneracy(&self) -> &DegeneracySpec {
        &self.degeneracy
    }

    /// `Gamma_{N,K} = (K!/N!) B_{N,K}(1! w_1, 2! w_2, ...)`.
    pub fn gamma(&self) -> ExactRational {
        let (n, k) = (self.params.n, self.params.k);
        self.table.get(n, k).expect("cell inside table")
            * BigRational::new(factorial(k), factorial(n))
    }

    fn top_cell(&self) -> Result<ExactInt, EnsembleError> {
        let b = self
            .table
            .scaled(self.params.n, self.params.k)
            .expect("cell inside table");
        if b.is_zero() {
            Err(EnsembleError::EmptyEnsemble)
        } else {
            Ok(b)
        }
    }

    fn occupation_with(&self, top: &ExactInt, l: usize) -> Result<ExactRational, EnsembleError> {
        let (n, k) = (self.params.n, self.params.k);
        if l > self.params.max_level() {
            return Ok(BigRational::zero());
        }
        // B_{N-l,K-1}/B_{N,K} = q s_{N-l,K-1} / s_{N,K} for scaled cells s
        let rest = self.table.scaled(n - l, k - 1).expect("cell inside table");
        if rest.is_zero() {
            return Ok(BigRational::zero());
        }
        let omega = self.degeneracy.omega(l)?;
        let numer = falling_factorial(n as i64, l) * rest * self.table.denominator();
        Ok(omega * BigRational::new(numer, top.clone()))
    }

    /// Mean number of systems on level `l`.
    pub fn occupation(&self, l: usize) -> Result<ExactRational, EnsembleError> {
        if l < 1 {
            return Err(EnsembleError::OutOfRange {
                l,
                max: self.params.max_level(),
            });
        }
        let top = self.top_cell()?;
        self.occupation_with(&top, l)
    }

    pub fn distribution(&self) -> Result<Distribution, EnsembleError> {
        let top = self.top_cell()?;
        let k = BigRational::from_integer(BigInt::from(self.params.k));
        let probs = (1..=self.params.max_level())
            .into_par_iter()
            .map(|l| Ok((l, self.occupation_with(&top, l)? / &k)))
            .collect::<Result<BTreeMap<_, _>, EnsembleError>>()?;
        Ok(Distribution {
            params: self.params.clone(),
            degeneracy: self.degeneracy.clone(),
            probs,
        })
    }
}

pub fn gamma_bell(
    params: &EnsembleParams,
    degeneracy: &DegeneracySpec,
) -> Result<ExactRational, EnsembleError> {
    Ok(Ensemble::new(params.clone(), degeneracy.clone())?.gamma())
}

pub fn occupation(
    params: &EnsembleParams,
    degeneracy: &DegeneracySpec,
    l: usize,
) -> Result<ExactRational, EnsembleError> {
    Ensemble::new(params.clone(), degeneracy.clone())?.occupation(l)
}

pub fn distribution(
    params: &EnsembleParams,
    degeneracy: &DegeneracySpec,
) -> Result<Distribution, EnsembleError> {
    Ensemble::new(params.clone(), degeneracy.clone())?.distribution()
}

fn check_level(params: &EnsembleParams, l: usize) -> Result<(), EnsembleError> {
    if l < 1 || l > params.max_level() {
        return Err(EnsembleError::OutOfRange {
            l,
            max: params.max_level(),
        });
    }
    Ok(())
}

fn require_two_systems(params: &EnsembleParams) -> Result<(), EnsembleError> {
    if params.k < 2 {
        return Err(EnsembleError::InvalidParams(
            "closed forms need K >= 2".into(),
        ));
    }
    Ok(())
}

/// Constant degeneracy:
/// `P(l) = (K-1) (N-l-1)! (N-K)! / ((N-1)! (N-K-l+1)!)`.
pub fn constant_closed_form(
    params: &EnsembleParams,
    l: usize,
) -> Result<ExactRational, EnsembleError> {
    require_two_systems(params)?;
    check_level(params, l)?;
    let (n, k) = (params.n as i64, params.k as i64);
    let numer = BigInt::from(k - 1) * falling_factorial(n - k, l - 1);
    let denom = falling_factorial(n - 1, l);
    Ok(BigRational::new(numer, denom))
}

/// The whole constant-degeneracy distribution at once. Successive levels
/// differ by the small factor `P(l)/P(l-1) = (N-l-K+2)/(N-l)`, so each step
/// is a multiply by a machine word and the fraction stays reduced using
/// word-sized gcds only. This keeps `N` in the tens of thousands fast.
pub fn constant_closed_form_distribution(
    params: &EnsembleParams,
) -> Result<Distribution, EnsembleError> {
    require_two_systems(params)?;
    let (n, k) = (params.n as u64, params.k as u64);
    let mut probs = BTreeMap::new();
    let g = (k - 1).gcd(&(n - 1));
    let (mut num, mut den) = (BigInt::from((k - 1) / g), BigInt::from((n - 1) / g));
    for l in 1..=params.max_level() as u64 {
        if l > 1 {
            let (a, b) = (n - l - (k - 2), n - l);
            let g = a.gcd(&b);
            let (a, b) = (a / g, b / g);
            let ga = a.gcd(&small_mod(&den, a));
            let gb = b.gcd(&small_mod(&num, b));
            num = num / BigInt::from(gb) * BigInt::from(a / ga);
            den = den / BigInt::from(ga) * BigInt::from(b / gb);
        }
        probs.insert(l as usize, BigRational::new_raw(num.clone(), den.clone()));
    }
    Ok(Distribution {
        params: params.clone(),
        degeneracy: DegeneracySpec::constant_one(),
        probs,
    })
}

fn small_mod(x: &BigInt, m: u64) -> u64 {
    (x % BigInt::from(m))
        .to_u64()
        .expect("non-negative remainder")
}

/// `sum_{r=k}^{n} |s(n,r)| S(r,k) (D+1)^r`.
pub fn oscillator_stirling_sum(n: usize, k: usize, d: u32) -> ExactInt {
    let base = BigInt::from(d + 1);
    (k..=n)
        .map(|r| stirling1_unsigned(n, r) * stirling2(r, k) * Pow::pow(&base, r))
        .sum()
}

/// `B_{n,k}((1+D)!, (2+D)!, ...) = (D!)^k sum_r |s(n,r)| S(r,k) (D+1)^r`.
pub fn oscillator_bell_via_stirling(n: usize, k: usize, d: u32) -> ExactInt {
    Pow::pow(&factorial(d as usize), k) * oscillator_stirling_sum(n, k, d)
}

/// Oscillator `P(l) = n*(l)/K` evaluated through Stirling-number sums.
pub fn oscillator_stirling_form(
    params: &EnsembleParams,
    d: u32,
    l: usize,
) -> Result<ExactRational, EnsembleError> {
    if d == 0 {
        return Err(EnsembleError::InvalidParams(
            "oscillator dimension must be at least 1".into(),
        ));
    }
    check_level(params, l)?;
    let (n, k) = (params.n, params.k);
    let whole = oscillator_stirling_sum(n, k, d);
    if whole.is_zero() {
        return Err(EnsembleError::EmptyEnsemble);
    }
    let rest = oscillator_stirling_sum(n - l, k - 1, d);
    let numer = falling_factorial(n as i64, l) * rising_factorial(l as i64 + 1, d as usize) * rest;
    let denom = factorial(d as usize) * whole * BigInt::from(k);
    Ok(BigRational::new(numer, denom))
}

/// A point of the infinite-size law together with its inverse temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsPoint {
    pub probability: f64,
    /// Negative: the law is written as `exp(+beta eps l) / Z`.
    pub beta: f64,
}

/// `P_inf(l) = exp(beta eps l) / Z` with `exp(beta eps) = (U-1)/U` and
/// `Z = U - 1`, where `U` is the mean level.
pub fn gibbs_limit(u: f64, l: usize, epsilon: f64) -> Result<GibbsPoint, EnsembleError> {
    if !(u.is_finite() && u > 1.0) {
        return Err(EnsembleError::DomainError(format!(
            "mean level U = {u} must exceed 1"
        )));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(EnsembleError::DomainError(
            "epsilon must be positive".into(),
        ));
    }
    let x = (u - 1.0) / u;
    Ok(GibbsPoint {
        probability: x.powi(l as i32) / (u - 1.0),
        beta: x.ln() / epsilon,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub k: usize,
    pub n: usize,
    pub sup_distance: f64,
}

/// For each `K`, `max_{l <= l_max} |P_{UK,K}(l) - P_inf(l)|` with the exact
/// constant-degeneracy law converted to `f64` only at the comparison.
pub fn convergence_profile(
    u: &ExactRational,
    ks: &[usize],
    l_max: usize,
) -> Result<Vec<ConvergenceRow>, EnsembleError> {
    if *u <= BigRational::one() {
        return Err(EnsembleError::DomainError(format!(
            "mean level U = {u} must exceed 1"
        )));
    }
    let uf = u
        .to_f64()
        .ok_or_else(|| EnsembleError::DomainError("U not representable".into()))?;
    let limit: Vec<f64> = (1..=l_max)
        .map(|l| gibbs_limit(uf, l, 1.0).map(|g| g.probability))
        .collect::<Result<_, _>>()?;
    ks.par_iter()
        .map(|&k| {
            let total = u * BigRational::from_integer(BigInt::from(k));
            if !total.is_integer() {
                return Err(EnsembleError::InvalidParams(format!(
                    "U*K = {total} is not an integer"
                )));
            }
            let n = total
                .to_integer()
                .to_usize()
                .ok_or_else(|| EnsembleError::InvalidParams("U*K too large".into()))?;
            let params = EnsembleParams::new(k, n)?;
            let mut sup = 0.0f64;
            for (l, p_inf) in (1..=l_max).zip(&limit) {
                let p = if l > params.max_level() {
                    0.0
                } else if k == 1 {
                    if l == n {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    constant_closed_form(&params, l)?.to_f64().unwrap_or(0.0)
                };
                sup = sup.max((p - p_inf).abs());
            }
            Ok(ConvergenceRow {
                k,
                n,
                sup_distance: sup,
            })
        })
        .collect()
}

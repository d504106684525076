//! Partial (exponential) Bell polynomials `B_{n,k}`.
//!
//! Two independent routes are provided. [`bell_enumerate`] lists every
//! monomial of `B_{n,k}` from the partitions of `n` into `k` parts, and
//! [`BellTable`] evaluates numerically through the convolution recurrence
//!
//! ```text
//! B_{n,k}(a) = sum_{i=1}^{n-k+1} C(n-1, i-1) a_i B_{n-i,k-1}(a)
//! ```
//!
//! with `B_{0,0} = 1`, `B_{n,0} = 0` for `n > 0` and `B_{n,k} = 0` for `k > n`.
//! The enumeration is exponential in `n` and serves as the test oracle; the
//! recurrence costs `O(n^2 k)` exact multiplications.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combinatorics::{
    binomial, enumerate_configurations, factorial, ExactInt, ExactRational,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BellError {
    #[error("B({n},{k}) is not a valid partial Bell index")]
    InfeasibleIndex { n: usize, k: usize },
    #[error("sequence provides {available} terms but {needed} are required")]
    InsufficientSequence { needed: usize, available: usize },
    #[error("inner series must have a zero constant term")]
    NonzeroConstantTerm,
    #[error("requested order {order} exceeds available series order {available}")]
    OrderTooLarge { order: usize, available: usize },
}

/// A sequence `a_1, a_2, ...` indexed from 1.
pub trait TermSource: Sync {
    /// The `j`-th term, `j >= 1`. `None` past the end of a finite sequence.
    fn term(&self, j: usize) -> Option<ExactRational>;

    /// Length of a finite sequence; `None` when unbounded.
    fn len_hint(&self) -> Option<usize> {
        None
    }
}

impl TermSource for [ExactRational] {
    fn term(&self, j: usize) -> Option<ExactRational> {
        j.checked_sub(1).and_then(|i| self.get(i)).cloned()
    }

    fn len_hint(&self) -> Option<usize> {
        Some(self.len())
    }
}

impl TermSource for Vec<ExactRational> {
    fn term(&self, j: usize) -> Option<ExactRational> {
        self.as_slice().term(j)
    }

    fn len_hint(&self) -> Option<usize> {
        Some(self.len())
    }
}

/// An unbounded sequence generated lazily from its index.
pub struct FnTerms<F>(pub F);

impl<F> TermSource for FnTerms<F>
where
    F: Fn(usize) -> ExactRational + Sync,
{
    fn term(&self, j: usize) -> Option<ExactRational> {
        Some((self.0)(j))
    }
}

/// `a_j = j!`
pub fn factorial_terms() -> FnTerms<impl Fn(usize) -> ExactRational + Sync> {
    FnTerms(|j| BigRational::from_integer(factorial(j)))
}

/// `a_j = (j-1)!`
pub fn shifted_factorial_terms() -> FnTerms<impl Fn(usize) -> ExactRational + Sync> {
    FnTerms(|j| BigRational::from_integer(factorial(j - 1)))
}

/// `a_j = 1`
pub fn unit_terms() -> FnTerms<impl Fn(usize) -> ExactRational + Sync> {
    FnTerms(|_| BigRational::one())
}

fn collect_terms<S: TermSource + ?Sized>(
    a: &S,
    count: usize,
) -> Result<Vec<ExactRational>, BellError> {
    (1..=count)
        .map(|j| {
            a.term(j).ok_or(BellError::InsufficientSequence {
                needed: count,
                available: a.len_hint().unwrap_or(j - 1),
            })
        })
        .collect()
}

/// Pascal rows `0..rows`, row `m` holding `C(m, 0..=m)`.
fn pascal(rows: usize) -> Vec<Vec<BigInt>> {
    let mut out: Vec<Vec<BigInt>> = Vec::with_capacity(rows);
    for m in 0..rows {
        let mut row = vec![BigInt::one(); m + 1];
        if m > 0 {
            let prev = &out[m - 1];
            for i in 1..m {
                row[i] = &prev[i - 1] + &prev[i];
            }
        }
        out.push(row);
    }
    out
}

/// Memo table of `B_{n,k}(a)` for one fixed argument sequence.
///
/// Cells are kept for `k <= max_count` and `n - k <= max_excess`, which is
/// exactly what the recurrence for `B_{k+d,k}` with `d <= max_excess` touches.
/// Terms are brought over a common denominator `q` first, so every cell stores
/// the integer `q^k B_{n,k}(a)`.
#[derive(Debug, Clone)]
pub struct BellTable {
    max_count: usize,
    max_excess: usize,
    denominator: BigInt,
    // cells[k][d] = q^k B_{k+d,k}(a)
    cells: Vec<Vec<BigInt>>,
}

impl BellTable {
    pub fn build<S: TermSource + ?Sized>(
        a: &S,
        max_count: usize,
        max_excess: usize,
    ) -> Result<Self, BellError> {
        let terms = if max_count > 0 {
            collect_terms(a, max_excess + 1)?
        } else {
            Vec::new()
        };
        let denominator = terms
            .iter()
            .fold(BigInt::one(), |acc, t| acc.lcm(t.denom()));
        let scaled: Vec<BigInt> = terms
            .iter()
            .map(|t| t.numer() * (&denominator / t.denom()))
            .collect();

        let binom = if max_count > 0 {
            pascal(max_count + max_excess)
        } else {
            Vec::new()
        };

        let mut cells = Vec::with_capacity(max_count + 1);
        let mut base = vec![BigInt::zero(); max_excess + 1];
        base[0] = BigInt::one();
        cells.push(base);
        for k in 1..=max_count {
            let prev = &cells[k - 1];
            let row: Vec<BigInt> = (0..=max_excess)
                .into_par_iter()
                .map(|d| {
                    let n = k + d;
                    let coeffs = &binom[n - 1];
                    let mut acc = BigInt::zero();
                    for i in 1..=d + 1 {
                        let rest = &prev[d + 1 - i];
                        if rest.is_zero() || scaled[i - 1].is_zero() {
                            continue;
                        }
                        acc += &coeffs[i - 1] * &scaled[i - 1] * rest;
                    }
                    acc
                })
                .collect();
            cells.push(row);
        }

        Ok(BellTable {
            max_count,
            max_excess,
            denominator,
            cells,
        })
    }

    pub fn max_count(&self) -> usize {
        self.max_count
    }

    pub fn max_excess(&self) -> usize {
        self.max_excess
    }

    /// The common denominator `q` of the stored terms.
    pub fn denominator(&self) -> &BigInt {
        &self.denominator
    }

    /// `q^k B_{n,k}(a)` as an integer, or `None` if the cell was not built.
    pub fn scaled(&self, n: usize, k: usize) -> Option<ExactInt> {
        if k > n {
            return Some(BigInt::zero());
        }
        if k == 0 {
            return Some(if n == 0 {
                BigInt::one()
            } else {
                BigInt::zero()
            });
        }
        let d = n - k;
        if k > self.max_count || d > self.max_excess {
            return None;
        }
        Some(self.cells[k][d].clone())
    }

    /// `B_{n,k}(a)`, or `None` if the cell was not built.
    pub fn get(&self, n: usize, k: usize) -> Option<ExactRational> {
        let v = self.scaled(n, k)?;
        Some(BigRational::new(v, Pow::pow(&self.denominator, k)))
    }
}

fn table_for<S: TermSource + ?Sized>(n: usize, k: usize, a: &S) -> Result<BellTable, BellError> {
    BellTable::build(a, k, n - k)
}

/// Exact `B_{n,k}(a_1, a_2, ...)`.
pub fn bell_eval<S: TermSource + ?Sized>(
    n: usize,
    k: usize,
    a: &S,
) -> Result<ExactRational, BellError> {
    if k > n {
        return Ok(BigRational::zero());
    }
    if k == 0 {
        return Ok(if n == 0 {
            BigRational::one()
        } else {
            BigRational::zero()
        });
    }
    Ok(table_for(n, k, a)?.get(n, k).expect("cell inside table"))
}

/// Ordinary Bell polynomial `(k!/n!) B_{n,k}(1! a_1, 2! a_2, ...)`.
pub fn ordinary_bell_eval<S: TermSource + ?Sized>(
    n: usize,
    k: usize,
    a: &S,
) -> Result<ExactRational, BellError> {
    if k > n {
        return Ok(BigRational::zero());
    }
    if k == 0 {
        return Ok(if n == 0 {
            BigRational::one()
        } else {
            BigRational::zero()
        });
    }
    let needed = n - k + 1;
    let terms = collect_terms(a, needed)?;
    let weighted: Vec<ExactRational> = terms
        .into_iter()
        .enumerate()
        .map(|(i, t)| t * BigRational::from_integer(factorial(i + 1)))
        .collect();
    let b = bell_eval(n, k, &weighted)?;
    Ok(b * BigRational::new(factorial(k), factorial(n)))
}

/// `dB_{n,k}/da_l = C(n,l) B_{n-l,k-1}(a)`.
pub fn derivative_bell<S: TermSource + ?Sized>(
    n: usize,
    k: usize,
    l: usize,
    a: &S,
) -> Result<ExactRational, BellError> {
    if l < 1 || l > n {
        return Err(BellError::InfeasibleIndex { n, k });
    }
    if k == 0 {
        return Ok(BigRational::zero());
    }
    let rest = bell_eval(n - l, k - 1, a)?;
    Ok(rest * BigRational::from_integer(binomial(n, l as i64)))
}

/// One term `c * prod_j a_j^{m_j}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Monomial {
    #[serde(with = "int_string")]
    pub coefficient: ExactInt,
    pub exponents: BTreeMap<usize, usize>,
}

mod int_string {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        crate::combinatorics::parse_int(&s).map_err(D::Error::custom)
    }
}

impl Monomial {
    pub fn evaluate<S: TermSource + ?Sized>(&self, a: &S) -> Result<ExactRational, BellError> {
        let mut acc = BigRational::from_integer(self.coefficient.clone());
        for (&j, &m) in &self.exponents {
            let t = a.term(j).ok_or(BellError::InsufficientSequence {
                needed: j,
                available: a.len_hint().unwrap_or(j - 1),
            })?;
            acc *= Pow::pow(&t, m);
        }
        Ok(acc)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coefficient)?;
        for (j, m) in &self.exponents {
            if *m == 1 {
                write!(f, " a{j}")?;
            } else {
                write!(f, " a{j}^{m}")?;
            }
        }
        Ok(())
    }
}

/// `B_{n,k}` as an explicit list of monomials, one per partition of `n`
/// into `k` parts, in the order of [`enumerate_configurations`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicBell {
    pub n: usize,
    pub k: usize,
    pub monomials: Vec<Monomial>,
}

impl SymbolicBell {
    // Empty for infeasible (n, k): the zero polynomial.
    fn collect(n: usize, k: usize) -> Self {
        let nf = factorial(n);
        let monomials = enumerate_configurations(n, k)
            .map(|c| {
                let denom = c.occupations().iter().fold(BigInt::one(), |acc, (&j, &m)| {
                    acc * factorial(m) * Pow::pow(&factorial(j), m)
                });
                Monomial {
                    coefficient: &nf / denom,
                    exponents: c.occupations().clone(),
                }
            })
            .collect();
        SymbolicBell { n, k, monomials }
    }

    pub fn evaluate<S: TermSource + ?Sized>(&self, a: &S) -> Result<ExactRational, BellError> {
        self.monomials
            .iter()
            .try_fold(BigRational::zero(), |acc, m| Ok(acc + m.evaluate(a)?))
    }

    /// Monomials keyed by exponent vector.
    pub fn coefficient_map(&self) -> BTreeMap<BTreeMap<usize, usize>, ExactInt> {
        self.monomials
            .iter()
            .map(|m| (m.exponents.clone(), m.coefficient.clone()))
            .collect()
    }

    /// Term-by-term partial derivative with respect to `a_l`, keyed by
    /// exponent vector. Monomials free of `a_l` vanish.
    pub fn partial_derivative(&self, l: usize) -> BTreeMap<BTreeMap<usize, usize>, ExactInt> {
        let mut out = BTreeMap::new();
        for m in &self.monomials {
            let Some(&e) = m.exponents.get(&l) else {
                continue;
            };
            let mut exps = m.exponents.clone();
            if e == 1 {
                exps.remove(&l);
            } else {
                exps.insert(l, e - 1);
            }
            *out.entry(exps).or_insert_with(BigInt::zero) += &m.coefficient * BigInt::from(e);
        }
        out
    }

    /// Sum of all coefficients, i.e. the value at `a_j = 1`.
    pub fn coefficient_sum(&self) -> ExactInt {
        self.monomials.iter().map(|m| &m.coefficient).sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.monomials).expect("monomials serialize")
    }
}

/// Canonical text form, e.g. `15 a1^2 a4 + 60 a1 a2 a3 + 15 a2^3`.
impl fmt::Display for SymbolicBell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return f.write_str("0");
        }
        for (i, m) in self.monomials.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

/// Every monomial of `B_{n,k}` with its integer coefficient
/// `n! / prod_j (m_j! (j!)^{m_j})`.
pub fn bell_enumerate(n: usize, k: usize) -> Result<SymbolicBell, BellError> {
    if (n, k) != (0, 0) && (k < 1 || k > n) {
        return Err(BellError::InfeasibleIndex { n, k });
    }
    Ok(SymbolicBell::collect(n, k))
}

/// Symbolic `C(n,l) B_{n-l,k-1}` keyed by exponent vector, the right-hand
/// side of the derivative identity. Zero (empty) when the index is infeasible.
pub fn derivative_rhs_symbolic(
    n: usize,
    k: usize,
    l: usize,
) -> BTreeMap<BTreeMap<usize, usize>, ExactInt> {
    if k == 0 || l > n {
        return BTreeMap::new();
    }
    let c = binomial(n, l as i64);
    SymbolicBell::collect(n - l, k - 1)
        .monomials
        .into_iter()
        .map(|m| (m.exponents, m.coefficient * &c))
        .collect()
}

/// Coefficients `c_0..c_order` of an exponential generating function:
/// `c_n` is the `n`-th derivative at 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesCoefficients {
    coeffs: Vec<ExactRational>,
}

impl SeriesCoefficients {
    pub fn new(coeffs: Vec<ExactRational>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least c_0");
        SeriesCoefficients { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[ExactRational] {
        &self.coeffs
    }

    pub fn get(&self, n: usize) -> &ExactRational {
        &self.coeffs[n]
    }
}

/// Coefficients of `G(F(x))` through order `order` via Faà di Bruno:
/// `c_0 = g_0`, `c_n = sum_k g_k B_{n,k}(f_1, ..., f_{n-k+1})`.
pub fn compose_series(
    g: &SeriesCoefficients,
    f: &SeriesCoefficients,
    order: usize,
) -> Result<SeriesCoefficients, BellError> {
    if !f.get(0).is_zero() {
        return Err(BellError::NonzeroConstantTerm);
    }
    let available = g.order().min(f.order());
    if order > available {
        return Err(BellError::OrderTooLarge { order, available });
    }
    let mut out = vec![g.get(0).clone()];
    if order == 0 {
        return Ok(SeriesCoefficients::new(out));
    }
    let inner = &f.coeffs()[1..=order];
    let table = BellTable::build(inner, order, order - 1)?;
    for n in 1..=order {
        let c = (1..=n).fold(BigRational::zero(), |acc, k| {
            acc + g.get(k) * table.get(n, k).expect("cell inside table")
        });
        out.push(c);
    }
    Ok(SeriesCoefficients::new(out))
}

/// The same composition by direct truncated power-series substitution,
/// with no Bell polynomials involved. Used as the reference route.
pub fn compose_series_direct(
    g: &SeriesCoefficients,
    f: &SeriesCoefficients,
    order: usize,
) -> Result<SeriesCoefficients, BellError> {
    if !f.get(0).is_zero() {
        return Err(BellError::NonzeroConstantTerm);
    }
    let available = g.order().min(f.order());
    if order > available {
        return Err(BellError::OrderTooLarge { order, available });
    }
    let fact = |n: usize| BigRational::from_integer(factorial(n));
    // ordinary coefficients of F
    let f_ord: Vec<ExactRational> = (0..=order).map(|n| f.get(n) / fact(n)).collect();
    let mut result = vec![BigRational::zero(); order + 1];
    let mut power = vec![BigRational::zero(); order + 1];
    power[0] = BigRational::one();
    for k in 0..=order {
        let gk = g.get(k) / fact(k);
        for (r, p) in result.iter_mut().zip(&power) {
            *r += &gk * p;
        }
        let mut next = vec![BigRational::zero(); order + 1];
        for (i, p) in power.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            for j in 1..=order - i {
                next[i + j] += p * &f_ord[j];
            }
        }
        power = next;
    }
    Ok(SeriesCoefficients::new(
        result
            .into_iter()
            .enumerate()
            .map(|(n, c)| c * fact(n))
            .collect(),
    ))
}

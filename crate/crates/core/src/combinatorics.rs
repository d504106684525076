//! Exact big-number primitives, constrained partition enumeration and the
//! classical number triangles (Lah, Stirling of both kinds).
//!
//! Factorials and the Stirling triangles are memoized process-wide. Tables
//! only grow, and a row is published under the write lock only once it is
//! complete, so concurrent readers never see partial rows.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::RwLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Arbitrary-precision signed integer.
pub type ExactInt = BigInt;

/// Arbitrary-precision rational, always kept in lowest terms with a
/// positive denominator.
pub type ExactRational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse `{input}` as an exact number")]
pub struct ParseExactError {
    pub input: String,
}

fn normalize_minus(s: &str) -> String {
    let s = s.trim();
    match s.strip_prefix('\u{2212}') {
        Some(rest) => format!("-{rest}"),
        None => s.to_string(),
    }
}

/// Parses a decimal integer with an optional leading minus sign.
pub fn parse_int(s: &str) -> Result<ExactInt, ParseExactError> {
    normalize_minus(s).parse().map_err(|_| ParseExactError {
        input: s.to_string(),
    })
}

/// Parses `p/q` or a plain integer into a reduced rational.
pub fn parse_rational(s: &str) -> Result<ExactRational, ParseExactError> {
    let err = || ParseExactError {
        input: s.to_string(),
    };
    let s = normalize_minus(s);
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| err())?;
            let q: BigInt = q.trim().parse().map_err(|_| err())?;
            if q.is_zero() {
                return Err(err());
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| err())?)),
    }
}

/// Renders a rational as `p/q`, or as a bare integer when `q = 1`.
pub fn format_rational(r: &ExactRational) -> String {
    r.to_string()
}

pub fn rational(n: i64, d: i64) -> ExactRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn integer(n: impl Into<BigInt>) -> ExactRational {
    BigRational::from_integer(n.into())
}

static FACTORIALS: RwLock<Vec<BigInt>> = RwLock::new(Vec::new());

/// `n!`, memoized up to the largest `n` requested so far.
pub fn factorial(n: usize) -> ExactInt {
    {
        let table = FACTORIALS.read().unwrap();
        if let Some(v) = table.get(n) {
            return v.clone();
        }
    }
    let mut table = FACTORIALS.write().unwrap();
    if table.is_empty() {
        table.push(BigInt::one());
    }
    while table.len() <= n {
        let i = table.len();
        let next = &table[i - 1] * BigInt::from(i);
        table.push(next);
    }
    table[n].clone()
}

/// `x (x-1) ... (x-d+1)`; the empty product is 1.
pub fn falling_factorial(x: i64, d: usize) -> ExactInt {
    (0..d as i64).fold(BigInt::one(), |acc, i| acc * BigInt::from(x - i))
}

/// `x (x+1) ... (x+d-1)`; the empty product is 1.
pub fn rising_factorial(x: i64, d: usize) -> ExactInt {
    (0..d as i64).fold(BigInt::one(), |acc, i| acc * BigInt::from(x + i))
}

/// Binomial coefficient `C(n, k)`, zero outside `0 <= k <= n`.
pub fn binomial(n: usize, k: i64) -> ExactInt {
    if k < 0 || k as u64 > n as u64 {
        return BigInt::zero();
    }
    let k = (k as usize).min(n - k as usize);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= BigInt::from(n - i);
        acc /= BigInt::from(i + 1);
    }
    acc
}

/// Unsigned Lah number `C(n-1, k-1) n!/k!`; zero when `k < 1` or `k > n`.
pub fn lah(n: usize, k: usize) -> ExactInt {
    if k < 1 || k > n {
        return BigInt::zero();
    }
    binomial(n - 1, k as i64 - 1) * falling_factorial(n as i64, n - k)
}

static STIRLING1: RwLock<Vec<Vec<BigInt>>> = RwLock::new(Vec::new());
static STIRLING2: RwLock<Vec<Vec<BigInt>>> = RwLock::new(Vec::new());

// Row n has entries k = 0..=n.
fn triangle_entry(
    table: &RwLock<Vec<Vec<BigInt>>>,
    n: usize,
    k: usize,
    weight: impl Fn(usize, usize) -> usize,
) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    {
        let rows = table.read().unwrap();
        if let Some(row) = rows.get(n) {
            return row[k].clone();
        }
    }
    let mut rows = table.write().unwrap();
    if rows.is_empty() {
        rows.push(vec![BigInt::one()]);
    }
    while rows.len() <= n {
        let m = rows.len();
        let prev = &rows[m - 1];
        let mut row = vec![BigInt::zero(); m + 1];
        for j in 1..=m {
            let mut v = prev[j - 1].clone();
            if j < m {
                let w = weight(m, j);
                if w != 0 {
                    v += &prev[j] * BigInt::from(w);
                }
            }
            row[j] = v;
        }
        rows.push(row);
    }
    rows[n][k].clone()
}

/// Unsigned Stirling number of the first kind,
/// `|s(n,k)| = |s(n-1,k-1)| + (n-1) |s(n-1,k)|`.
pub fn stirling1_unsigned(n: usize, k: usize) -> ExactInt {
    triangle_entry(&STIRLING1, n, k, |m, _| m - 1)
}

/// Stirling number of the second kind, `S(n,k) = S(n-1,k-1) + k S(n-1,k)`.
pub fn stirling2(n: usize, k: usize) -> ExactInt {
    triangle_entry(&STIRLING2, n, k, |_, j| j)
}

/// An occupation multiset `{m_l}` with `sum l m_l = n` and `sum m_l = k`.
///
/// Only levels with `m_l >= 1` are stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Configuration {
    occupations: BTreeMap<usize, usize>,
    n: usize,
    k: usize,
}

impl Configuration {
    /// Builds a configuration from a list of part sizes (each part is one
    /// system sitting at that level). Zero parts are rejected.
    pub fn from_parts(parts: &[usize]) -> Option<Self> {
        let mut occupations = BTreeMap::new();
        for &p in parts {
            if p == 0 {
                return None;
            }
            *occupations.entry(p).or_insert(0) += 1;
        }
        Some(Configuration {
            occupations,
            n: parts.iter().sum(),
            k: parts.len(),
        })
    }

    pub fn from_occupations(occupations: BTreeMap<usize, usize>) -> Option<Self> {
        if occupations.contains_key(&0) {
            return None;
        }
        let occupations: BTreeMap<_, _> = occupations.into_iter().filter(|&(_, m)| m > 0).collect();
        let n = occupations.iter().map(|(l, m)| l * m).sum();
        let k = occupations.values().sum();
        Some(Configuration { occupations, n, k })
    }

    pub fn occupations(&self) -> &BTreeMap<usize, usize> {
        &self.occupations
    }

    /// `m_l`, zero for unoccupied levels.
    pub fn count(&self, level: usize) -> usize {
        self.occupations.get(&level).copied().unwrap_or(0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn largest_part(&self) -> Option<usize> {
        self.occupations.keys().next_back().copied()
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (l, m)) in self.occupations.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "m{l}={m}")?;
        }
        f.write_str("}")
    }
}

/// Iterator over all partitions of `n` into exactly `k` positive parts.
///
/// Partitions are produced as non-increasing part lists in lexicographically
/// decreasing order, so the configuration with the largest top part comes
/// first: `(6,3)` yields `[4,1,1]`, `[3,2,1]`, `[2,2,2]`.
#[derive(Debug, Clone)]
pub struct Configurations {
    parts: Vec<usize>,
    state: EnumState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EnumState {
    Fresh,
    Running,
    Done,
}

impl Configurations {
    fn new(n: usize, k: usize) -> Self {
        if k > n || (k == 0 && n > 0) {
            return Configurations {
                parts: Vec::new(),
                state: EnumState::Done,
            };
        }
        let mut parts = vec![1; k];
        if k > 0 {
            parts[0] = n - k + 1;
        }
        Configurations {
            parts,
            state: EnumState::Fresh,
        }
    }

    // Moves `parts` to the lexicographic predecessor with the same length
    // and sum. Returns false when `parts` was the smallest.
    fn advance(&mut self) -> bool {
        let k = self.parts.len();
        if k < 2 {
            return false;
        }
        let mut suffix = 0;
        for i in (0..k - 1).rev() {
            suffix += self.parts[i + 1];
            let cap = self.parts[i] - 1;
            let slots = k - 1 - i;
            let total = suffix + 1;
            if cap >= 1 && total <= cap * slots && total >= slots {
                self.parts[i] = cap;
                let mut left = total;
                for j in i + 1..k {
                    let after = k - 1 - j;
                    let v = cap.min(left - after);
                    self.parts[j] = v;
                    left -= v;
                }
                return true;
            }
        }
        false
    }
}

impl Iterator for Configurations {
    type Item = Configuration;

    fn next(&mut self) -> Option<Configuration> {
        match self.state {
            EnumState::Done => return None,
            EnumState::Fresh => self.state = EnumState::Running,
            EnumState::Running => {
                if !self.advance() {
                    self.state = EnumState::Done;
                    return None;
                }
            }
        }
        Configuration::from_parts(&self.parts)
    }
}

/// All configurations with `sum l m_l = n` and `sum m_l = k`, each exactly
/// once. Yields a single empty configuration for `n = k = 0`.
pub fn enumerate_configurations(n: usize, k: usize) -> Configurations {
    Configurations::new(n, k)
}

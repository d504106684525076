//! Steepest-descent approximation of the partition function.
//!
//! This module uses zero-based levels: a system on level `l0 >= 0` carries
//! `l0` quanta and weight `w_{l0+1}`, so `M` quanta over `K` systems
//! correspond to `N = M + K` in the one-based model. The level generating
//! function is `g(z) = sum_{l0>=0} w_{l0+1} z^{l0}` and
//! `Gamma = [z^M] g(z)^K`. Writing the Cauchy integrand as `exp(K u(z))` with
//! `u(z) = ln g(z) - ((M+1)/K) ln z`, the Gaussian approximation around the
//! real minimum `x0` of `u` gives
//!
//! ```text
//! Gamma ~ exp(K u(x0)) / sqrt(2 pi K u''(x0))
//! ```
//!
//! All floating-point work is `f64`; `exp(K u)` is only formed in log space.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Pow, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::combinatorics::{binomial, ExactRational};
use crate::ensemble::{DegeneracySpec, Ensemble, EnsembleError, EnsembleParams};

/// Default relative truncation tolerance for series summation.
pub const SERIES_TOL: f64 = 1e-16;

const MAX_SERIES_TERMS: usize = 50_000_000;

// Bell-path work bound (K * M^2) above which gamma_saddle skips the exact value
// for non-constant degeneracies.
const EXACT_WORK_LIMIT: u128 = 20_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SaddleError {
    #[error("z = {z} lies outside the disc of convergence (radius {radius})")]
    DivergentPoint { z: f64, radius: f64 },
    #[error("mean level {target} is not attainable by this degeneracy")]
    NoBracket { target: f64 },
    #[error("series did not converge at z = {z}")]
    NoConvergence { z: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
}

/// Radius of convergence of `g`.
pub fn radius(degeneracy: &DegeneracySpec) -> f64 {
    match degeneracy {
        DegeneracySpec::Constant(_) | DegeneracySpec::Oscillator(_) => 1.0,
        DegeneracySpec::Explicit(_) => f64::INFINITY,
    }
}

/// `w_{l0+1}` as a float; zero past the end of an explicit list.
fn omega_f64(degeneracy: &DegeneracySpec, l0: usize) -> f64 {
    match degeneracy {
        DegeneracySpec::Constant(w) => w.to_f64().unwrap_or(f64::NAN),
        DegeneracySpec::Oscillator(d) => (0..*d).map(|i| (l0 + 2 + i as usize) as f64).product(),
        DegeneracySpec::Explicit(list) => list.get(l0).and_then(|w| w.to_f64()).unwrap_or(0.0),
    }
}

/// `g`, `g'`, `g''` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratingValues {
    pub g: f64,
    pub dg: f64,
    pub d2g: f64,
}

impl GeneratingValues {
    /// `z g'(z) / g(z)`, the mean zero-based level at fugacity `z`.
    pub fn mean(&self, z: f64) -> f64 {
        z * self.dg / self.g
    }

    /// `(ln g)''`
    pub fn log_second(&self) -> f64 {
        self.d2g / self.g - (self.dg / self.g).powi(2)
    }
}

pub fn generating_values(
    degeneracy: &DegeneracySpec,
    z: f64,
    tol: f64,
) -> Result<GeneratingValues, SaddleError> {
    let r = radius(degeneracy);
    if z.is_nan() || z <= 0.0 || z.is_infinite() {
        return Err(SaddleError::Domain(format!("z = {z} must be positive")));
    }
    if z >= r {
        return Err(SaddleError::DivergentPoint { z, radius: r });
    }
    match degeneracy {
        DegeneracySpec::Constant(w) => {
            let w = w.to_f64().unwrap_or(f64::NAN);
            let q = 1.0 - z;
            Ok(GeneratingValues {
                g: w / q,
                dg: w / (q * q),
                d2g: 2.0 * w / (q * q * q),
            })
        }
        DegeneracySpec::Explicit(list) => {
            let (mut g, mut dg, mut d2g) = (0.0, 0.0, 0.0);
            // Horner in z for all three sums
            for w in list.iter().rev() {
                let w = w.to_f64().unwrap_or(f64::NAN);
                d2g = d2g * z + 2.0 * dg;
                dg = dg * z + g;
                g = g * z + w;
            }
            Ok(GeneratingValues { g, dg, d2g })
        }
        DegeneracySpec::Oscillator(_) => {
            let (mut g, mut dg, mut d2g) = (0.0f64, 0.0f64, 0.0f64);
            let mut zp = 1.0f64; // z^l0
            let mut prev = f64::INFINITY;
            for l0 in 0..MAX_SERIES_TERMS {
                let w = omega_f64(degeneracy, l0);
                let lf = l0 as f64;
                let t0 = w * zp;
                let t1 = lf * w * zp / z;
                let t2 = lf * (lf - 1.0) * w * zp / (z * z);
                g += t0;
                dg += t1;
                d2g += t2;
                zp *= z;
                // past the peak the terms shrink at least geometrically
                let ratio = if prev.is_finite() && prev > 0.0 {
                    t2.max(t0) / prev
                } else {
                    1.0
                };
                prev = t2.max(t0);
                if l0 > 2 && ratio < 1.0 {
                    let tail = prev / (1.0 - ratio);
                    if tail <= tol * d2g.max(g) {
                        return Ok(GeneratingValues { g, dg, d2g });
                    }
                }
            }
            Err(SaddleError::NoConvergence { z })
        }
    }
}

/// `g(z) = sum_{l0>=0} w_{l0+1} z^{l0}`.
pub fn generating_value(degeneracy: &DegeneracySpec, z: f64, tol: f64) -> Result<f64, SaddleError> {
    Ok(generating_values(degeneracy, z, tol)?.g)
}

fn mean_at(degeneracy: &DegeneracySpec, z: f64) -> Result<f64, SaddleError> {
    Ok(generating_values(degeneracy, z, SERIES_TOL)?.mean(z))
}

/// The unique `x0` in `(0, R)` with `x0 g'(x0) / g(x0) = u`.
///
/// The mean is strictly increasing on `(0, R)` for nonnegative weights, so a
/// bracket is grown geometrically toward `R` and then bisected down to
/// machine precision.
pub fn find_saddle(u: f64, degeneracy: &DegeneracySpec) -> Result<f64, SaddleError> {
    if u.is_nan() || u <= 0.0 || u.is_infinite() {
        return Err(SaddleError::Domain(format!(
            "mean level U = {u} must be positive"
        )));
    }
    degeneracy.validate()?;
    let r = radius(degeneracy);
    let mut lo = 0.0f64;
    let mut hi = None;
    for j in 1..1100 {
        let z = if r.is_finite() {
            r * (1.0 - 0.5f64.powi(j))
        } else {
            0.5f64 * 2f64.powi(j)
        };
        if z >= r || !z.is_finite() {
            break;
        }
        let m = mean_at(degeneracy, z)?;
        if m >= u {
            hi = Some(z);
            break;
        }
        lo = z;
    }
    let mut hi = hi.ok_or(SaddleError::NoBracket { target: u })?;
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * hi {
            break;
        }
        if mean_at(degeneracy, mid)? < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // pick the endpoint with the smaller residual
    let rl = if lo > 0.0 {
        (mean_at(degeneracy, lo)? - u).abs()
    } else {
        f64::INFINITY
    };
    let rh = (mean_at(degeneracy, hi)? - u).abs();
    Ok(if rl < rh { lo } else { hi })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaddleResult {
    pub k: usize,
    pub m: usize,
    pub x0: f64,
    pub u_at_x0: f64,
    pub u2_at_x0: f64,
    /// `ln` of the approximation; finite even when the value overflows.
    pub log_gamma_approx: f64,
    pub gamma_approx: f64,
    pub gamma_exact: Option<ExactRational>,
    pub rel_error: Option<f64>,
}

/// Natural log of a positive big integer, accurate to `f64` precision.
pub fn ln_bigint(v: &BigInt) -> f64 {
    assert!(v.is_positive(), "logarithm of a non-positive integer");
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top: BigInt = v >> shift;
    top.to_f64().expect("64-bit value").ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn ln_rational(v: &ExactRational) -> f64 {
    ln_bigint(v.numer()) - ln_bigint(v.denom())
}

/// Exact `Gamma` for `K` systems and `M` zero-based quanta, when cheap.
pub fn gamma_exact_zero_based(
    k: usize,
    m: usize,
    degeneracy: &DegeneracySpec,
) -> Result<Option<ExactRational>, SaddleError> {
    match degeneracy {
        DegeneracySpec::Constant(w) => {
            // w^K C(M+K-1, K-1)
            let count = binomial(m + k - 1, k as i64 - 1);
            Ok(Some(Pow::pow(w, k) * BigRational::from_integer(count)))
        }
        _ => {
            if (k as u128) * (m as u128) * (m as u128) > EXACT_WORK_LIMIT {
                return Ok(None);
            }
            let params = EnsembleParams::new(k, m + k)?;
            match Ensemble::new(params, degeneracy.clone()) {
                Ok(e) => Ok(Some(e.gamma())),
                Err(EnsembleError::InsufficientSequence { .. }) => Ok(None),
                Err(e) => Err(e.into()),
            }
        }
    }
}

/// Saddle-point approximation of `Gamma` for `K` systems with mean
/// zero-based level `u`, i.e. `M = u K` quanta.
pub fn gamma_saddle(
    k: usize,
    u: &ExactRational,
    degeneracy: &DegeneracySpec,
) -> Result<SaddleResult, SaddleError> {
    if k == 0 {
        return Err(SaddleError::Domain("K must be at least 1".into()));
    }
    if !u.is_positive() {
        return Err(SaddleError::Domain(format!(
            "mean level U = {u} must be positive"
        )));
    }
    let total = u * BigRational::from_integer(BigInt::from(k));
    if !total.is_integer() {
        return Err(SaddleError::Domain(format!(
            "U*K = {total} is not an integer"
        )));
    }
    let m = total
        .to_integer()
        .to_usize()
        .ok_or_else(|| SaddleError::Domain("U*K too large".into()))?;
    let c = (m as f64 + 1.0) / k as f64;
    let x0 = find_saddle(c, degeneracy)?;
    let vals = generating_values(degeneracy, x0, SERIES_TOL)?;
    let u_at_x0 = vals.g.ln() - c * x0.ln();
    let u2_at_x0 = vals.log_second() + c / (x0 * x0);
    let kf = k as f64;
    let log_gamma_approx = kf * u_at_x0 - 0.5 * (2.0 * std::f64::consts::PI * kf * u2_at_x0).ln();
    let gamma_exact = gamma_exact_zero_based(k, m, degeneracy)?;
    let rel_error = gamma_exact
        .as_ref()
        .filter(|g| g.is_positive())
        .map(|g| (log_gamma_approx - ln_rational(g)).exp_m1().abs());
    Ok(SaddleResult {
        k,
        m,
        x0,
        u_at_x0,
        u2_at_x0,
        log_gamma_approx,
        gamma_approx: log_gamma_approx.exp(),
        gamma_exact,
        rel_error,
    })
}

/// Limiting zero-based law `P(l0) ∝ w_{l0+1} x0^{l0}` for `l0 = 0..=l_max`,
/// normalised over that window.
pub fn occupation_asymptotic(
    u: f64,
    degeneracy: &DegeneracySpec,
    l_max: usize,
) -> Result<Vec<f64>, SaddleError> {
    let x0 = find_saddle(u, degeneracy)?;
    let mut weights = Vec::with_capacity(l_max + 1);
    let mut zp = 1.0f64;
    for l0 in 0..=l_max {
        weights.push(omega_f64(degeneracy, l0) * zp);
        zp *= x0;
    }
    let total: f64 = weights.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(SaddleError::Domain("window carries no weight".into()));
    }
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Exact finite-size law mapped onto zero-based levels:
/// entry `l0` is `P_{M+K,K}(l0 + 1)`, up to `l_max`.
pub fn exact_zero_based(
    k: usize,
    m: usize,
    degeneracy: &DegeneracySpec,
    l_max: usize,
) -> Result<Vec<ExactRational>, SaddleError> {
    let params = EnsembleParams::new(k, m + k)?;
    let dist = match degeneracy {
        DegeneracySpec::Constant(_) if k >= 2 => {
            crate::ensemble::constant_closed_form_distribution(&params)?
        }
        _ => Ensemble::new(params, degeneracy.clone())?.distribution()?,
    };
    Ok((0..=l_max)
        .map(|l0| {
            dist.probs
                .get(&(l0 + 1))
                .cloned()
                .unwrap_or_else(BigRational::zero)
        })
        .collect())
}

/// `max_l0 |P_exact(l0) - P_asym(l0)|` over the window `0..=l_max`.
pub fn sup_distance_to_asymptotic(
    k: usize,
    u: &ExactRational,
    degeneracy: &DegeneracySpec,
    l_max: usize,
) -> Result<f64, SaddleError> {
    let total = u * BigRational::from_integer(BigInt::from(k));
    if !total.is_integer() || total.is_negative() || total.is_zero() {
        return Err(SaddleError::Domain(format!(
            "U*K = {total} must be a positive integer"
        )));
    }
    let m = total.to_integer().to_usize().unwrap_or(usize::MAX);
    let exact = exact_zero_based(k, m, degeneracy, l_max)?;
    let asym = occupation_asymptotic(u.to_f64().unwrap_or(f64::NAN), degeneracy, l_max)?;
    Ok(exact
        .iter()
        .zip(&asym)
        .map(|(e, a)| (e.to_f64().unwrap_or(0.0) - a).abs())
        .fold(0.0, f64::max))
}

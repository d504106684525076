//! Property suites behind `bellfowler check`.
//!
//! Each suite runs a grid of exact comparisons and reports one outcome per
//! property, carrying the first counterexample when a property fails.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::bell::{
    bell_enumerate, bell_eval, compose_series, compose_series_direct, derivative_rhs_symbolic,
    factorial_terms, shifted_factorial_terms, unit_terms, SeriesCoefficients,
};
use crate::combinatorics::{lah, stirling1_unsigned, stirling2, ExactRational};
use crate::ensemble::{
    constant_closed_form, oscillator_stirling_form, ConvergenceRow, DegeneracySpec, Ensemble,
    EnsembleParams,
};
use crate::oracle;
use crate::saddlepoint::{find_saddle, gamma_saddle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Identities,
    Oracle,
    Convergence,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub property: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn from_result(property: &str, r: Result<String, String>) -> Self {
        match r {
            Ok(detail) => CheckOutcome {
                property: property.to_string(),
                passed: true,
                detail,
            },
            Err(detail) => CheckOutcome {
                property: property.to_string(),
                passed: false,
                detail,
            },
        }
    }
}

pub fn run_suite(suite: Suite) -> Vec<CheckOutcome> {
    match suite {
        Suite::Identities => identities(),
        Suite::Oracle => oracle_suite(),
        Suite::Convergence => convergence(),
    }
}

/// Random rational `p/q` with `p` in `-span..=span` (nonzero unless
/// `allow_zero`) and `q` in `1..=7`.
pub fn random_rational(rng: &mut StdRng, span: i64, allow_zero: bool) -> ExactRational {
    loop {
        let p = rng.gen_range(-span..=span);
        if p == 0 && !allow_zero {
            continue;
        }
        let q = rng.gen_range(1..=7i64);
        return BigRational::new(BigInt::from(p), BigInt::from(q));
    }
}

pub fn random_sequence(rng: &mut StdRng, len: usize) -> Vec<ExactRational> {
    (0..len).map(|_| random_rational(rng, 9, true)).collect()
}

/// A seeded random explicit degeneracy with strictly positive entries.
pub fn random_explicit(seed: u64, len: usize) -> DegeneracySpec {
    let mut rng = StdRng::seed_from_u64(seed);
    DegeneracySpec::Explicit(
        (0..len)
            .map(|_| {
                BigRational::new(
                    BigInt::from(rng.gen_range(1..=9i64)),
                    BigInt::from(rng.gen_range(1..=5i64)),
                )
            })
            .collect(),
    )
}

fn transforms(max_n: usize) -> Result<String, String> {
    for n in 1..=max_n {
        for k in 1..=n {
            let l = bell_eval(n, k, &factorial_terms()).map_err(|e| e.to_string())?;
            if l != BigRational::from_integer(lah(n, k)) {
                return Err(format!("Lah mismatch at ({n},{k}): {l}"));
            }
            let s1 = bell_eval(n, k, &shifted_factorial_terms()).map_err(|e| e.to_string())?;
            if s1 != BigRational::from_integer(stirling1_unsigned(n, k)) {
                return Err(format!("Stirling-1 mismatch at ({n},{k}): {s1}"));
            }
            let s2 = bell_eval(n, k, &unit_terms()).map_err(|e| e.to_string())?;
            if s2 != BigRational::from_integer(stirling2(n, k)) {
                return Err(format!("Stirling-2 mismatch at ({n},{k}): {s2}"));
            }
        }
    }
    Ok(format!("1 <= k <= n <= {max_n}"))
}

fn derivative_identity(max_n: usize) -> Result<String, String> {
    for n in 1..=max_n {
        for k in 1..=n {
            let b = bell_enumerate(n, k).map_err(|e| e.to_string())?;
            for l in 1..=n {
                if b.partial_derivative(l) != derivative_rhs_symbolic(n, k, l) {
                    return Err(format!(
                        "dB({n},{k})/da{l} differs from C({n},{l}) B({},{})",
                        n - l,
                        k - 1
                    ));
                }
            }
        }
    }
    Ok(format!("1 <= l <= n <= {max_n}, monomial by monomial"))
}

fn homogeneity(max_n: usize, samples: usize, seed: u64) -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(seed);
    for n in 1..=max_n {
        for k in 1..=n {
            for _ in 0..samples {
                let a = random_rational(&mut rng, 9, false);
                let b = random_rational(&mut rng, 9, false);
                let x = random_sequence(&mut rng, n - k + 1);
                let scaled: Vec<ExactRational> = x
                    .iter()
                    .enumerate()
                    .map(|(i, xj)| &a * Pow::pow(&b, i + 1) * xj)
                    .collect();
                let lhs = bell_eval(n, k, &scaled).map_err(|e| e.to_string())?;
                let rhs = Pow::pow(&a, k)
                    * Pow::pow(&b, n)
                    * bell_eval(n, k, &x).map_err(|e| e.to_string())?;
                if lhs != rhs {
                    return Err(format!("({n},{k}) a={a} b={b}: {lhs} != {rhs}"));
                }
            }
        }
    }
    Ok(format!("{samples} samples per (n,k), n <= {max_n}"))
}

fn enumeration_vs_recurrence(max_n: usize, samples: usize, seed: u64) -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(seed);
    let seqs: Vec<Vec<ExactRational>> = (0..samples)
        .map(|_| random_sequence(&mut rng, max_n))
        .collect();
    for n in 1..=max_n {
        for k in 1..=n {
            let sym = bell_enumerate(n, k).map_err(|e| e.to_string())?;
            for a in &seqs {
                let via_sym = sym.evaluate(a).map_err(|e| e.to_string())?;
                let via_rec = bell_eval(n, k, a).map_err(|e| e.to_string())?;
                if via_sym != via_rec {
                    return Err(format!(
                        "({n},{k}): enumeration {via_sym} vs recurrence {via_rec}"
                    ));
                }
            }
        }
    }
    Ok(format!("{samples} sequences, n <= {max_n}"))
}

fn composition(order: usize, samples: usize, seed: u64) -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(seed);
    for s in 0..samples {
        let g = SeriesCoefficients::new(random_sequence(&mut rng, order + 1));
        let mut fc = random_sequence(&mut rng, order + 1);
        fc[0] = BigRational::zero();
        let f = SeriesCoefficients::new(fc);
        let bell = compose_series(&g, &f, order).map_err(|e| e.to_string())?;
        let direct = compose_series_direct(&g, &f, order).map_err(|e| e.to_string())?;
        if bell != direct {
            let n = (0..=order)
                .find(|&n| bell.get(n) != direct.get(n))
                .unwrap_or(0);
            return Err(format!(
                "sample {s}: c_{n} = {} vs {}",
                bell.get(n),
                direct.get(n)
            ));
        }
    }
    Ok(format!("{samples} random pairs to order {order}"))
}

pub fn identities() -> Vec<CheckOutcome> {
    vec![
        CheckOutcome::from_result(
            "bell transforms give Lah / Stirling numbers",
            transforms(12),
        ),
        CheckOutcome::from_result("derivative identity", derivative_identity(10)),
        CheckOutcome::from_result("homogeneity", homogeneity(10, 20, 0x5eed_0001)),
        CheckOutcome::from_result(
            "enumeration agrees with recurrence",
            enumeration_vs_recurrence(12, 20, 0x5eed_0002),
        ),
        CheckOutcome::from_result("series composition", composition(10, 5, 0x5eed_0003)),
    ]
}

/// Degeneracies compared against the oracle.
pub fn oracle_degeneracies() -> Vec<DegeneracySpec> {
    vec![
        DegeneracySpec::constant_one(),
        DegeneracySpec::Constant(BigRational::new(BigInt::from(3), BigInt::from(2))),
        DegeneracySpec::Oscillator(1),
        DegeneracySpec::Oscillator(2),
        DegeneracySpec::Oscillator(3),
        random_explicit(0x5eed_0004, 14),
    ]
}

/// Bell path against enumeration for one instance; returns the first
/// discrepancy.
pub fn compare_with_oracle(params: &EnsembleParams, deg: &DegeneracySpec) -> Result<(), String> {
    let tag = format!("N={} K={} {deg}", params.n(), params.k());
    let ens = Ensemble::new(params.clone(), deg.clone()).map_err(|e| format!("{tag}: {e}"))?;
    let direct = oracle::gamma_direct(params, deg).map_err(|e| format!("{tag}: {e}"))?;
    if ens.gamma() != direct {
        return Err(format!("{tag}: Gamma {} vs {}", ens.gamma(), direct));
    }
    let dist = ens.distribution().map_err(|e| format!("{tag}: {e}"))?;
    let occ = oracle::occupations_direct(params, deg).map_err(|e| format!("{tag}: {e}"))?;
    let k = BigRational::from_integer(BigInt::from(params.k()));
    for (l, n_star) in &occ {
        if dist.prob(*l) != n_star / &k {
            return Err(format!(
                "{tag}: P({l}) {} vs {}",
                dist.prob(*l),
                n_star / &k
            ));
        }
    }
    if dist.total() != BigRational::one() {
        return Err(format!("{tag}: sum P = {}", dist.total()));
    }
    let mean = BigRational::new(BigInt::from(params.n()), BigInt::from(params.k()));
    if dist.mean_level() != mean {
        return Err(format!("{tag}: mean level {}", dist.mean_level()));
    }
    Ok(())
}

fn oracle_grid(max_n: usize) -> Result<String, String> {
    let mut count = 0;
    for deg in oracle_degeneracies() {
        for n in 1..=max_n {
            for k in 1..=n {
                let params = EnsembleParams::new(k, n).map_err(|e| e.to_string())?;
                compare_with_oracle(&params, &deg)?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} instances, K <= N <= {max_n}"))
}

fn closed_forms(max_n: usize) -> Result<String, String> {
    for n in 2..=max_n {
        for k in 2..=n {
            let params = EnsembleParams::new(k, n).map_err(|e| e.to_string())?;
            let constant = Ensemble::new(params.clone(), DegeneracySpec::constant_one())
                .and_then(|e| e.distribution())
                .map_err(|e| e.to_string())?;
            for l in 1..=params.max_level() {
                let cf = constant_closed_form(&params, l).map_err(|e| e.to_string())?;
                if cf != constant.prob(l) {
                    return Err(format!(
                        "constant N={n} K={k} l={l}: {cf} vs {}",
                        constant.prob(l)
                    ));
                }
            }
            for d in 1..=3u32 {
                let occ = oracle::occupations_direct(&params, &DegeneracySpec::Oscillator(d))
                    .map_err(|e| e.to_string())?;
                for (l, n_star) in &occ {
                    let sf = oscillator_stirling_form(&params, d, *l).map_err(|e| e.to_string())?;
                    let expect = n_star / BigRational::from_integer(BigInt::from(k));
                    if sf != expect {
                        return Err(format!(
                            "oscillator D={d} N={n} K={k} l={l}: {sf} vs {expect}"
                        ));
                    }
                }
            }
        }
    }
    Ok(format!("2 <= K <= N <= {max_n}"))
}

pub fn oracle_suite() -> Vec<CheckOutcome> {
    vec![
        CheckOutcome::from_result("Bell path equals enumeration", oracle_grid(14)),
        CheckOutcome::from_result("closed forms equal enumeration", closed_forms(12)),
    ]
}

fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

fn gibbs_convergence() -> Result<String, String> {
    let rows: Vec<ConvergenceRow> = crate::ensemble::convergence_profile(
        &BigRational::from_integer(BigInt::from(2)),
        &[50, 100, 500],
        20,
    )
    .map_err(|e| e.to_string())?;
    let d: Vec<f64> = rows.iter().map(|r| r.sup_distance).collect();
    let detail = format!("sup distances {d:?}");
    if !strictly_decreasing(&d) || d[2] >= 1e-2 {
        return Err(detail);
    }
    Ok(detail)
}

fn saddle_convergence() -> Result<String, String> {
    let one = DegeneracySpec::constant_one();
    let two = BigRational::from_integer(BigInt::from(2));
    let errs = [10usize, 100, 1000]
        .iter()
        .map(|&k| {
            gamma_saddle(k, &two, &one)
                .map_err(|e| e.to_string())?
                .rel_error
                .ok_or_else(|| "exact Gamma unavailable".to_string())
        })
        .collect::<Result<Vec<f64>, String>>()?;
    let detail = format!("relative errors {errs:?}");
    if !strictly_decreasing(&errs) || errs[1] >= 0.05 {
        return Err(detail);
    }
    let x0 = find_saddle(2.0, &one).map_err(|e| e.to_string())?;
    if (x0 - 2.0 / 3.0).abs() > 1e-10 {
        return Err(format!("x0 = {x0}"));
    }
    Ok(detail)
}

pub fn convergence() -> Vec<CheckOutcome> {
    vec![
        CheckOutcome::from_result(
            "finite law converges to Gibbs law (U = 2)",
            gibbs_convergence(),
        ),
        CheckOutcome::from_result(
            "saddle-point Gamma error shrinks (U = 2)",
            saddle_convergence(),
        ),
    ]
}

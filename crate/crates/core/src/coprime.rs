//! Shifting a vector until its entries become pairwise coprime.
//!
//! [`greedy_coprime`] is the one-sided greedy construction: keep the first
//! entry and move each later entry up to the nearest value coprime to the
//! product of everything before it. [`l_exact`] and [`ell_exact`] compute the
//! true minimal signed shift heights by exhaustive search.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{domain, resource, Error, Result};
use crate::numbercore::{height_star, jacobsthal, IntVector, ShiftVector};
use crate::shiftsearch::advance;

/// Default cap on the cube enumerated at one height level.
pub const DEFAULT_LEVEL_LIMIT: u64 = 10_000_000;
/// Default sieve cap for the per-step Jacobsthal check in audits.
pub const DEFAULT_AUDIT_SIEVE_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoprimeShiftResult {
    pub shifts: ShiftVector,
    pub shifted: IntVector,
    pub height_used: u64,
}

pub fn pairwise_coprime(v: &[BigInt]) -> bool {
    v.iter()
        .enumerate()
        .all(|(i, x)| v[i + 1..].iter().all(|y| x.gcd(y).is_one()))
}

/// `h_1 = 0`, and each later `h_i` is the least non-negative shift making
/// `a_i + h_i` coprime to the product of the earlier shifted entries.
pub fn greedy_coprime(a: &IntVector) -> Result<CoprimeShiftResult> {
    if a.len() < 2 {
        return Err(domain("greedy shifting needs at least two entries"));
    }
    a.require_positive()?;
    let mut shifts = Vec::with_capacity(a.len());
    let mut shifted = Vec::with_capacity(a.len());
    let mut product = BigInt::one();
    for (i, ai) in a.entries().iter().enumerate() {
        let mut h: i64 = 0;
        let mut x = ai.clone();
        if i > 0 {
            while !product.gcd(&x).is_one() {
                h += 1;
                x += 1;
            }
        }
        product *= &x;
        shifts.push(h);
        shifted.push(x);
    }
    if !pairwise_coprime(&shifted) {
        return Err(Error::Invariant(format!(
            "greedy output {shifted:?} is not pairwise coprime"
        )));
    }
    let height_used = shifts.iter().map(|h| h.unsigned_abs()).max().unwrap_or(0);
    Ok(CoprimeShiftResult {
        shifts: ShiftVector::new(shifts, height_used)?,
        shifted: IntVector::new(shifted)?,
        height_used,
    })
}

/// Least height admitting a good shift, together with the first such shift
/// in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MinimalShift {
    #[serde(rename = "H")]
    pub height: u64,
    #[serde(rename = "h")]
    pub witness: Vec<i64>,
}

fn minimal_shift(
    a: &IntVector,
    limit: u64,
    good: impl Fn(&[BigInt]) -> bool,
) -> Result<MinimalShift> {
    if a.len() < 2 {
        return Err(domain("need at least two entries"));
    }
    let n = a.len() as u32;
    for height in 0u64.. {
        let side = 2 * height as u128 + 1;
        let cube = side.checked_pow(n).unwrap_or(u128::MAX);
        if cube > limit as u128 {
            return Err(resource(format!(
                "no good shift of height below {height}; the level-{height} cube of {cube} points exceeds the limit {limit}"
            )));
        }
        let hi = height as i64;
        let mut shift = vec![-hi; a.len()];
        loop {
            // Lower heights were already exhausted.
            if shift.iter().any(|s| s.unsigned_abs() == height) {
                let shifted = a.shifted(&shift)?;
                if good(shifted.entries()) {
                    return Ok(MinimalShift {
                        height,
                        witness: shift,
                    });
                }
            }
            if !advance(&mut shift, hi) {
                break;
            }
        }
    }
    unreachable!("height loop only exits by return")
}

/// `L(a)`: least `H` such that some shift of height at most `H` makes the
/// entries pairwise coprime.
pub fn l_exact(a: &IntVector, limit: u64) -> Result<MinimalShift> {
    minimal_shift(a, limit, pairwise_coprime)
}

/// `ell(a)`: least `H` such that some shift of height at most `H` makes the
/// gcd of all entries equal to 1.
pub fn ell_exact(a: &IntVector, limit: u64) -> Result<MinimalShift> {
    minimal_shift(a, limit, |v| {
        v.iter().fold(BigInt::default(), |g, x| g.gcd(x)).is_one()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepCheck {
    pub index: usize,
    pub shift: i64,
    #[serde(with = "crate::decimal")]
    pub product: BigInt,
    /// Jacobsthal value of the prefix product, when it fits the sieve cap.
    pub jacobsthal: Option<u64>,
}

impl StepCheck {
    pub fn within_jacobsthal(&self) -> Option<bool> {
        self.jacobsthal.map(|g| self.shift.unsigned_abs() <= g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreedyAuditRow {
    pub sample: usize,
    #[serde(with = "crate::decimal::vec")]
    pub a: Vec<BigInt>,
    pub h: Vec<i64>,
    pub height_used: u64,
    #[serde(with = "crate::decimal")]
    pub height_star: BigInt,
    /// `height_used / log^2(height_star + 2)`.
    pub ratio: f64,
    pub pairwise_coprime: bool,
    pub steps: Vec<StepCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreedyAudit {
    pub rows: Vec<GreedyAuditRow>,
    pub max_ratio: f64,
    pub jacobsthal_checks: usize,
    pub jacobsthal_violations: usize,
    pub certificate_failures: usize,
}

/// Entries are drawn log-uniformly: a bit length uniform in
/// `1..=bits(magnitude)`, then a uniform value of that length capped at
/// `magnitude`. Small entries therefore appear often enough for the
/// Jacobsthal step check to run.
pub fn sample_entry(rng: &mut impl Rng, magnitude: u64) -> u64 {
    let bits = 64 - magnitude.leading_zeros();
    let b = rng.gen_range(1..=bits);
    let lo = 1u64 << (b - 1);
    let hi = if b == 64 { u64::MAX } else { (1u64 << b) - 1 }.min(magnitude);
    rng.gen_range(lo..=hi)
}

pub fn greedy_bound_audit(
    samples: usize,
    n: usize,
    magnitude: u64,
    seed: u64,
    sieve_cap: u64,
) -> Result<GreedyAudit> {
    if n < 2 {
        return Err(domain("n must be at least 2"));
    }
    if magnitude < 16 {
        return Err(domain("magnitude must be at least 16"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(samples);
    for sample in 0..samples {
        let entries: Vec<BigInt> = (0..n)
            .map(|_| BigInt::from(sample_entry(&mut rng, magnitude)))
            .collect();
        let a = IntVector::new(entries.clone())?;
        let res = greedy_coprime(&a)?;
        let hs = height_star(&a)?;
        let log = (hs.to_f64().unwrap_or(f64::MAX) + 2.0).ln();
        let mut product = BigInt::one();
        let mut steps = Vec::with_capacity(n - 1);
        for (i, x) in res.shifted.entries().iter().enumerate() {
            if i > 0 {
                let g = match product.to_u64() {
                    Some(p) if p <= sieve_cap => Some(jacobsthal(p, sieve_cap)?),
                    _ => None,
                };
                steps.push(StepCheck {
                    index: i,
                    shift: res.shifts.entries()[i],
                    product: product.clone(),
                    jacobsthal: g,
                });
            }
            product *= x;
        }
        rows.push(GreedyAuditRow {
            sample,
            a: entries,
            h: res.shifts.entries().to_vec(),
            height_used: res.height_used,
            height_star: hs,
            ratio: res.height_used as f64 / (log * log),
            pairwise_coprime: pairwise_coprime(res.shifted.entries()),
            steps,
        });
    }
    let checks = rows
        .iter()
        .flat_map(|r| &r.steps)
        .filter_map(StepCheck::within_jacobsthal);
    let (jacobsthal_checks, jacobsthal_violations) =
        checks.fold((0, 0), |(c, v), ok| (c + 1, v + usize::from(!ok)));
    Ok(GreedyAudit {
        max_ratio: rows.iter().map(|r| r.ratio).fold(0.0, f64::max),
        certificate_failures: rows.iter().filter(|r| !r.pairwise_coprime).count(),
        rows,
        jacobsthal_checks,
        jacobsthal_violations,
    })
}

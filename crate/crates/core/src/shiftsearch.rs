//! Largest gcd reachable by shifting every entry of `a` by at most `H`.
//!
//! A divisor `d` is reachable exactly when every `a_i` lies within `H` of a
//! multiple of `d`, so the maximum is found by scanning `d` downward from the
//! largest value any shifted entry can take.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{domain, resource, Error, Result};
use crate::numbercore::{gcd_vec, IntVector, ShiftVector};

/// Default cap on the number of candidate divisors scanned.
pub const DEFAULT_SCAN_LIMIT: u64 = 1_000_000_000;
/// Default cap on the shift cube enumerated by the brute-force oracle.
pub const DEFAULT_ENUMERATION_LIMIT: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftGcdResult {
    #[serde(with = "crate::decimal")]
    pub d: BigInt,
    #[serde(rename = "h", serialize_with = "serialize_shift")]
    pub witness: ShiftVector,
    /// `log d / log H`, defined for `H >= 2`.
    pub exponent: Option<f64>,
}

fn serialize_shift<S: serde::Serializer>(
    s: &ShiftVector,
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.entries().serialize(ser)
}

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    /// Accept `H >= min a_i` and non-positive entries. Entries are then
    /// handled through their absolute values and shifts that zero out the
    /// whole vector are excluded.
    pub allow_large_shift: bool,
    pub scan_limit: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            allow_large_shift: false,
            scan_limit: DEFAULT_SCAN_LIMIT,
        }
    }
}

/// Strict form: entries positive and `H < min a_i`.
pub fn max_shifted_gcd(a: &IntVector, h: u64) -> Result<ShiftGcdResult> {
    max_shifted_gcd_with(a, h, &SearchOptions::default())
}

pub fn max_shifted_gcd_with(a: &IntVector, h: u64, opts: &SearchOptions) -> Result<ShiftGcdResult> {
    a.require_nonzero()?;
    let abs: Vec<u64> = a
        .entries()
        .iter()
        .map(|v| v.abs().to_u64())
        .collect::<Option<_>>()
        .ok_or_else(|| resource("divisor scan needs entries below 2^64"))?;
    let top = if opts.allow_large_shift {
        abs.iter().max().copied().unwrap_or(0)
    } else {
        a.require_positive()?;
        let min = abs.iter().min().copied().unwrap_or(0);
        if h >= min {
            return Err(domain(format!(
                "H = {h} must be below min a_i = {min}; pass the large-shift override to allow it"
            )));
        }
        // Every shifted entry is positive, so d <= min a_i + H.
        min
    }
    .checked_add(h)
    .ok_or_else(|| resource("scan bound overflows u64"))?;
    if top > opts.scan_limit {
        return Err(resource(format!(
            "divisor scan of {top} candidates exceeds the limit {}",
            opts.scan_limit
        )));
    }

    let mut shift = vec![0i64; abs.len()];
    for d in (1..=top).rev() {
        if !reachable(&abs, h, d, &mut shift) {
            continue;
        }
        // Translate back to the signed entries: a_i < 0 needs the mirrored shift.
        for (s, v) in shift.iter_mut().zip(a.entries()) {
            if v.is_negative() {
                *s = -*s;
            }
        }
        let witness = ShiftVector::new(shift, h)?;
        let result = ShiftGcdResult {
            d: BigInt::from(d),
            witness,
            exponent: exponent_of(d as f64, h),
        };
        certify(a, h, &result)?;
        return Ok(result);
    }
    Err(domain(
        "no shift of the given height leaves a nonzero vector",
    ))
}

/// Fills `shift` with a witness that `d` is reachable from the non-negative
/// entries `abs`, if it is.
fn reachable(abs: &[u64], h: u64, d: u64, shift: &mut [i64]) -> bool {
    for (s, &a) in shift.iter_mut().zip(abs) {
        let r = a % d;
        let down = r;
        let up = d - r;
        // Prefer the smaller move; ties go to the negative shift.
        *s = if down <= h && (down <= up || r == 0) {
            -(down as i64)
        } else if up <= h {
            up as i64
        } else {
            return false;
        };
    }
    let all_zero = shift.iter().zip(abs).all(|(&s, &a)| a as i64 + s == 0);
    if !all_zero {
        return true;
    }
    // Each entry was moved onto 0; move one of them to -d or +d instead.
    for (s, &a) in shift.iter_mut().zip(abs) {
        let to_plus = (a.abs_diff(d) <= h).then(|| d as i64 - a as i64);
        let to_minus = (a + d <= h).then(|| -((a + d) as i64));
        let best = match (to_plus, to_minus) {
            (Some(p), Some(m)) => Some(if m.abs() <= p.abs() { m } else { p }),
            (p, m) => p.or(m),
        };
        if let Some(b) = best {
            *s = b;
            return true;
        }
    }
    false
}

fn exponent_of(d: f64, h: u64) -> Option<f64> {
    (h >= 2).then(|| d.ln() / (h as f64).ln())
}

/// Checks a result against its contract: height, divisibility, and that `d`
/// is the full gcd of the shifted vector.
pub fn certify(a: &IntVector, h: u64, result: &ShiftGcdResult) -> Result<()> {
    if result.witness.height() > h {
        return Err(Error::Invariant(format!(
            "witness height {} exceeds H = {h}",
            result.witness.height()
        )));
    }
    let shifted = a.shifted(result.witness.entries())?;
    if let Some(v) = shifted
        .entries()
        .iter()
        .find(|v| !v.is_multiple_of(&result.d))
    {
        return Err(Error::Invariant(format!(
            "{} does not divide shifted entry {v}",
            result.d
        )));
    }
    let g = gcd_vec(&shifted);
    if g != result.d {
        return Err(Error::Invariant(format!(
            "shifted vector has gcd {g}, reported {}",
            result.d
        )));
    }
    Ok(())
}

/// Enumerates the whole shift cube and keeps the first maximal gcd in
/// lexicographic order. Shifts that zero the whole vector are skipped.
pub fn brute_force_shifted_gcd(a: &IntVector, h: u64, limit: u64) -> Result<ShiftGcdResult> {
    let side = 2 * h + 1;
    let cube = (side as u128)
        .checked_pow(a.len() as u32)
        .unwrap_or(u128::MAX);
    if cube > limit as u128 {
        return Err(resource(format!(
            "shift cube of {cube} points exceeds the limit {limit}"
        )));
    }
    let hi = h as i64;
    let mut shift = vec![-hi; a.len()];
    let mut best: Option<(BigInt, Vec<i64>)> = None;
    loop {
        let g = gcd_vec(&a.shifted(&shift)?);
        if !g.is_zero() && best.as_ref().is_none_or(|(b, _)| g > *b) {
            best = Some((g, shift.clone()));
        }
        if !advance(&mut shift, hi) {
            break;
        }
    }
    let (d, witness) = best.ok_or_else(|| domain("every shift zeroes the vector"))?;
    let exponent = exponent_of(d.to_f64().unwrap_or(f64::INFINITY), h);
    Ok(ShiftGcdResult {
        d,
        witness: ShiftVector::new(witness, h)?,
        exponent,
    })
}

/// Lexicographic successor in `[-h, h]^n`; false after the last point.
pub(crate) fn advance(shift: &mut [i64], h: i64) -> bool {
    for s in shift.iter_mut().rev() {
        if *s < h {
            *s += 1;
            return true;
        }
        *s = -h;
    }
    false
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    #[serde(with = "crate::decimal::vec")]
    pub a: Vec<BigInt>,
    #[serde(rename = "H")]
    pub height_bound: u64,
    #[serde(with = "crate::decimal")]
    pub d: BigInt,
    pub exponent: f64,
}

/// `floor(scale^eps)`, snapping values within rounding noise of an integer.
fn floor_power(scale: u64, epsilon: f64) -> u64 {
    let f = (scale as f64).powf(epsilon);
    let r = f.round();
    if (f - r).abs() <= 1e-9 * r.max(1.0) {
        r as u64
    } else {
        f.floor() as u64
    }
}

/// Random vectors with entries in `[scale/2, scale]`, shifted by at most
/// `H = floor(scale^eps)`; records the exponent `log d / log H` achieved.
pub fn exponent_experiment(
    n: usize,
    epsilon: f64,
    scale: u64,
    trials: usize,
    seed: u64,
) -> Result<Vec<ExperimentRecord>> {
    if n < 2 {
        return Err(domain("n must be at least 2"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if trials == 0 {
        return Err(domain("trials must be positive"));
    }
    let h = floor_power(scale, epsilon);
    if h < 2 {
        return Err(domain(format!("scale^eps = {h} must be at least 2")));
    }
    let lo = scale.div_ceil(2);
    if h >= lo {
        return Err(domain(format!(
            "H = {h} must be below scale/2 so that H < min a_i"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|_| {
            let a: Vec<BigInt> = (0..n)
                .map(|_| BigInt::from(rng.gen_range(lo..=scale)))
                .collect();
            let res = max_shifted_gcd(&IntVector::new(a.clone())?, h)?;
            Ok(ExperimentRecord {
                a,
                height_bound: h,
                exponent: res.exponent.expect("H >= 2"),
                d: res.d,
            })
        })
        .collect()
}

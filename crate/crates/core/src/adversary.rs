//! Vectors that no small shift can make coprime.
//!
//! Every shift tuple `i` in `[-H, H]^n` gets its own prime `p_i > H`, and
//! each coordinate is fixed by the Chinese Remainder Theorem so that
//! `a_k = -i_k (mod p_i)`. Then `p_h` divides every entry of `a + h` for each
//! shift `h` of height at most `H`, so the joint gcd never drops to 1.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, resource, Error, Result};
use crate::numbercore::{height, is_prime_u64, primes_above, IntVector};
use crate::shiftsearch::advance;

/// Default cap on the number of primes, `(2H+1)^n`.
pub const DEFAULT_PRIME_LIMIT: u64 = 10_000;
/// Default cap on the cube checked by [`verify_hard_instance`].
pub const DEFAULT_VERIFY_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeAssignment {
    pub tuple: Vec<i64>,
    #[serde(with = "crate::decimal")]
    pub prime: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HardInstance {
    pub n: usize,
    #[serde(rename = "H")]
    pub height_bound: u64,
    /// One entry per shift tuple, tuples in lexicographic order.
    pub primes: Vec<PrimeAssignment>,
    #[serde(with = "crate::decimal::vec")]
    pub a: Vec<BigInt>,
    /// No shift of height at most `H` reaches gcd 1, so `ell(a) >= H + 1`.
    pub certified_lower_bound: u64,
}

impl HardInstance {
    pub fn vector(&self) -> Result<IntVector> {
        IntVector::new(self.a.clone())
    }

    pub fn prime_product(&self) -> BigInt {
        self.primes.iter().map(|p| BigInt::from(p.prime)).product()
    }
}

fn cube_size(n: usize, h: u64) -> u128 {
    (2 * h as u128 + 1)
        .checked_pow(n as u32)
        .unwrap_or(u128::MAX)
}

fn inverse_mod(a: u64, p: u64) -> Option<u64> {
    let e = (a as i128).extended_gcd(&(p as i128));
    (e.gcd == 1).then(|| e.x.rem_euclid(p as i128) as u64)
}

/// Smallest non-negative solution of `x = r_j (mod m_j)` for pairwise
/// coprime `m_j`, built up one modulus at a time.
fn crt(residues: impl IntoIterator<Item = (u64, u64)>) -> Result<(BigInt, BigInt)> {
    let mut x = BigInt::zero();
    let mut modulus = BigInt::one();
    for (r, p) in residues {
        let xp = (&x % p).to_u64().expect("reduced below p");
        let mp = (&modulus % p).to_u64().expect("reduced below p");
        let inv = inverse_mod(mp, p)
            .ok_or_else(|| Error::Invariant(format!("modulus {p} is not coprime to the others")))?;
        let delta = (r + p - xp) % p;
        let t = (delta as u128 * inv as u128 % p as u128) as u64;
        x += &modulus * t;
        modulus *= p;
    }
    Ok((x, modulus))
}

pub fn crt_hard_instance(n: usize, h: u64, prime_limit: u64) -> Result<HardInstance> {
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    if h == 0 {
        return Err(domain("H must be at least 1"));
    }
    let count = cube_size(n, h);
    if count > prime_limit as u128 {
        return Err(resource(format!(
            "(2H+1)^n = {count} primes exceeds the limit {prime_limit}"
        )));
    }
    let table = primes_above(h, count as usize)?;

    let hi = h as i64;
    let mut tuple = vec![-hi; n];
    let mut primes = Vec::with_capacity(count as usize);
    for &p in table.primes() {
        primes.push(PrimeAssignment {
            tuple: tuple.clone(),
            prime: p,
        });
        advance(&mut tuple, hi);
    }

    let a = (0..n)
        .map(|k| {
            let residues = primes
                .iter()
                .map(|pa| ((-pa.tuple[k]).rem_euclid(pa.prime as i64) as u64, pa.prime));
            let (x, modulus) = crt(residues)?;
            // All residues zero would give 0; the product keeps a_k positive.
            Ok(if x.is_zero() { modulus } else { x })
        })
        .collect::<Result<Vec<_>>>()?;

    let instance = HardInstance {
        n,
        height_bound: h,
        primes,
        a,
        certified_lower_bound: h + 1,
    };
    let cert = verify_hard_instance(&instance, DEFAULT_VERIFY_LIMIT.max(count as u64))?;
    if !cert.passed {
        return Err(Error::Invariant(format!(
            "constructed instance fails verification: {}",
            cert.reason.unwrap_or_default()
        )));
    }
    Ok(instance)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub passed: bool,
    pub checked: u64,
    pub failing_tuple: Option<Vec<i64>>,
    pub reason: Option<String>,
}

impl Certificate {
    fn fail(checked: u64, tuple: Option<Vec<i64>>, reason: String) -> Self {
        Certificate {
            passed: false,
            checked,
            failing_tuple: tuple,
            reason: Some(reason),
        }
    }
}

/// Checks the whole construction: the tuple-to-prime map is a bijection onto
/// distinct primes above `H`, and `p_h` divides `a_k + h_k` for every tuple
/// `h` and every coordinate `k`.
pub fn verify_hard_instance(inst: &HardInstance, limit: u64) -> Result<Certificate> {
    let (n, h) = (inst.n, inst.height_bound);
    let count = cube_size(n, h);
    if count > limit as u128 {
        return Err(resource(format!(
            "verification cube of {count} tuples exceeds the limit {limit}"
        )));
    }
    if inst.a.len() != n {
        return Ok(Certificate::fail(
            0,
            None,
            format!("a has {} entries, n = {n}", inst.a.len()),
        ));
    }
    if inst.primes.len() as u128 != count {
        return Ok(Certificate::fail(
            0,
            None,
            format!(
                "{} primes assigned, cube has {count} tuples",
                inst.primes.len()
            ),
        ));
    }
    let mut seen_primes = HashSet::new();
    let mut seen_tuples = HashSet::new();
    for pa in &inst.primes {
        let t = Some(pa.tuple.clone());
        if pa.tuple.len() != n || pa.tuple.iter().any(|i| i.unsigned_abs() > h) {
            return Ok(Certificate::fail(
                0,
                t,
                "tuple outside the shift cube".into(),
            ));
        }
        if !seen_tuples.insert(&pa.tuple) {
            return Ok(Certificate::fail(0, t, "tuple assigned twice".into()));
        }
        if pa.prime <= h || !is_prime_u64(pa.prime) {
            return Ok(Certificate::fail(
                0,
                t,
                format!("{} is not a prime above H", pa.prime),
            ));
        }
        if !seen_primes.insert(pa.prime) {
            return Ok(Certificate::fail(
                0,
                t,
                format!("prime {} used twice", pa.prime),
            ));
        }
    }
    let mut checked = 0;
    for pa in &inst.primes {
        let p = BigInt::from(pa.prime);
        for (ak, &ik) in inst.a.iter().zip(&pa.tuple) {
            if !(ak + ik).is_multiple_of(&p) {
                return Ok(Certificate::fail(
                    checked,
                    Some(pa.tuple.clone()),
                    format!("{} does not divide {}", pa.prime, ak + ik),
                ));
            }
        }
        checked += 1;
    }
    Ok(Certificate {
        passed: true,
        checked,
        failing_tuple: None,
        reason: None,
    })
}

/// `ln x` for a positive integer of any size.
pub fn ln_big(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits f64").ln();
    }
    let shift = bits - 64;
    let top = (x.abs() >> shift).to_f64().expect("64-bit head");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthRow {
    pub n: usize,
    #[serde(rename = "H")]
    pub height_bound: u64,
    pub primes: usize,
    pub largest_prime: u64,
    pub height_bits: u64,
    /// `ln H(a)`.
    pub log_height: f64,
    /// `ln` of the product of all assigned primes.
    pub log_prime_product: f64,
    /// `(H+1) / (log H(a) / log log H(a))^(1/n)`; undefined when
    /// `log log H(a) <= 0`.
    pub lower_bound_ratio: Option<f64>,
    /// `log H(a) / (H^n log(H+2))`.
    pub growth_ratio: f64,
}

pub fn growth_audit(n: usize, heights: &[u64], prime_limit: u64) -> Result<Vec<GrowthRow>> {
    heights
        .iter()
        .map(|&h| {
            let inst = crt_hard_instance(n, h, prime_limit)?;
            let ha = height(&inst.vector()?);
            if ha > inst.prime_product() {
                return Err(Error::Invariant("height exceeds the prime product".into()));
            }
            let log_height = ln_big(&ha);
            let loglog = log_height.ln();
            let lower_bound_ratio =
                (loglog > 0.0).then(|| (h + 1) as f64 / (log_height / loglog).powf(1.0 / n as f64));
            Ok(GrowthRow {
                n,
                height_bound: h,
                primes: inst.primes.len(),
                largest_prime: inst.primes.iter().map(|p| p.prime).max().unwrap_or(0),
                height_bits: ha.bits(),
                log_height,
                log_prime_product: inst.primes.iter().map(|p| (p.prime as f64).ln()).sum(),
                lower_bound_ratio,
                growth_ratio: log_height / ((h as f64).powi(n as i32) * (h as f64 + 2.0).ln()),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_example() {
        let inst = crt_hard_instance(1, 1, DEFAULT_PRIME_LIMIT).unwrap();
        let primes: Vec<u64> = inst.primes.iter().map(|p| p.prime).collect();
        assert_eq!(primes, [2, 3, 5]);
        assert_eq!(inst.a, [BigInt::from(9)]);
        // 2 | 8, 3 | 9, 5 | 10.
        for (pa, shifted) in inst.primes.iter().zip([8, 9, 10]) {
            assert_eq!(shifted % pa.prime, 0);
        }
        assert_eq!(inst.certified_lower_bound, 2);
    }

    #[test]
    fn two_dimensional_assignment_order() {
        let inst = crt_hard_instance(2, 1, DEFAULT_PRIME_LIMIT).unwrap();
        let expected_tuples: Vec<Vec<i64>> = (-1..=1)
            .flat_map(|i| (-1..=1).map(move |j| vec![i, j]))
            .collect();
        let tuples: Vec<Vec<i64>> = inst.primes.iter().map(|p| p.tuple.clone()).collect();
        let primes: Vec<u64> = inst.primes.iter().map(|p| p.prime).collect();
        assert_eq!(tuples, expected_tuples);
        assert_eq!(primes, [2, 3, 5, 7, 11, 13, 17, 19, 23]);
        let cert = verify_hard_instance(&inst, DEFAULT_VERIFY_LIMIT).unwrap();
        assert!(cert.passed);
        assert_eq!(cert.checked, 9);
    }

    #[test]
    fn residues_reconstruct() {
        let inst = crt_hard_instance(2, 2, DEFAULT_PRIME_LIMIT).unwrap();
        let product = inst.prime_product();
        for (k, ak) in inst.a.iter().enumerate() {
            assert!(ak.is_positive() && *ak < product);
            for pa in &inst.primes {
                let r = ak % pa.prime;
                let want = (-pa.tuple[k]).rem_euclid(pa.prime as i64);
                assert_eq!(r, BigInt::from(want));
            }
        }
    }

    #[test]
    fn corrupted_instance_fails() {
        let mut inst = crt_hard_instance(2, 1, DEFAULT_PRIME_LIMIT).unwrap();
        inst.a[1] += 1;
        let cert = verify_hard_instance(&inst, DEFAULT_VERIFY_LIMIT).unwrap();
        assert!(!cert.passed);
        assert!(cert.failing_tuple.is_some());

        let mut inst = crt_hard_instance(1, 2, DEFAULT_PRIME_LIMIT).unwrap();
        inst.primes[3].prime = inst.primes[0].prime;
        assert!(
            !verify_hard_instance(&inst, DEFAULT_VERIFY_LIMIT)
                .unwrap()
                .passed
        );
    }

    #[test]
    fn guards() {
        assert!(matches!(
            crt_hard_instance(3, 2, 100),
            Err(Error::Resource(_))
        ));
        assert!(matches!(
            crt_hard_instance(0, 2, 100),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            crt_hard_instance(2, 0, 100),
            Err(Error::Domain(_))
        ));
        let inst = crt_hard_instance(2, 2, DEFAULT_PRIME_LIMIT).unwrap();
        assert!(matches!(
            verify_hard_instance(&inst, 10),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn serde_round_trip() {
        let inst = crt_hard_instance(2, 2, DEFAULT_PRIME_LIMIT).unwrap();
        let json = serde_json::to_string(&inst).unwrap();
        assert!(json.contains("\"prime\":\"3\""));
        let back: HardInstance = serde_json::from_str(&json).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn ln_big_matches_f64() {
        let x = BigInt::from(10u64).pow(300);
        assert!((ln_big(&x) - 300.0 * 10f64.ln()).abs() < 1e-9);
        let y = BigInt::from(10u64).pow(400);
        assert!((ln_big(&y) - 400.0 * 10f64.ln()).abs() < 1e-9);
    }
}

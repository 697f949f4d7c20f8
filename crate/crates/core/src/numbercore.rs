//! Exact arithmetic shared by the rest of the crate: integer vectors and
//! their gcd and height, primality, Möbius and ω, prime tables, and the
//! Jacobsthal function.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{domain, resource, Result};

/// Default cap on the period sieved by [`jacobsthal`].
pub const DEFAULT_SIEVE_CAP: u64 = 100_000_000;

/// Trial-division bound used by [`omega`] and [`mobius`].
pub const TRIAL_DIVISION_BOUND: u64 = 1 << 20;

/// A non-empty vector of unbounded integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntVector(Vec<BigInt>);

impl IntVector {
    pub fn new(entries: Vec<BigInt>) -> Result<Self> {
        if entries.is_empty() {
            return Err(domain("integer vector must have at least one entry"));
        }
        Ok(IntVector(entries))
    }

    pub fn from_i64s(entries: &[i64]) -> Result<Self> {
        Self::new(entries.iter().map(|&v| BigInt::from(v)).collect())
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<BigInt> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn all_positive(&self) -> bool {
        self.0.iter().all(Signed::is_positive)
    }

    /// Rejects the all-zero vector, whose gcd is the degenerate value 0.
    pub fn require_nonzero(&self) -> Result<()> {
        if self.is_zero() {
            Err(domain("the all-zero vector has no meaningful gcd"))
        } else {
            Ok(())
        }
    }

    pub fn require_positive(&self) -> Result<()> {
        if self.all_positive() {
            Ok(())
        } else {
            Err(domain("all entries must be positive"))
        }
    }

    /// Entry-wise `self + shift`.
    pub fn shifted(&self, shift: &[i64]) -> Result<IntVector> {
        if shift.len() != self.len() {
            return Err(domain(format!(
                "shift has {} entries, vector has {}",
                shift.len(),
                self.len()
            )));
        }
        Ok(IntVector(
            self.0
                .iter()
                .zip(shift)
                .map(|(a, &h)| a + BigInt::from(h))
                .collect(),
        ))
    }

    /// Entries as `u64`, if every entry is non-negative and fits.
    pub fn to_u64s(&self) -> Option<Vec<u64>> {
        self.0.iter().map(ToPrimitive::to_u64).collect()
    }
}

impl fmt::Display for IntVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Parses comma-separated decimal integers, e.g. `4,6,-9`.
impl FromStr for IntVector {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        let entries = s
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                tok.parse::<BigInt>()
                    .map_err(|_| domain(format!("not an integer: {tok:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        IntVector::new(entries)
    }
}

/// An additive perturbation together with the height bound it respects.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ShiftVector {
    entries: Vec<i64>,
    bound: u64,
}

impl ShiftVector {
    pub fn new(entries: Vec<i64>, bound: u64) -> Result<Self> {
        if let Some(h) = entries.iter().find(|h| h.unsigned_abs() > bound) {
            return Err(domain(format!(
                "shift entry {h} exceeds height bound {bound}"
            )));
        }
        Ok(ShiftVector { entries, bound })
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn height(&self) -> u64 {
        self.entries
            .iter()
            .map(|h| h.unsigned_abs())
            .max()
            .unwrap_or(0)
    }
}

/// Non-negative gcd of all entries; 0 only for the all-zero vector.
pub fn gcd_vec(a: &IntVector) -> BigInt {
    let mut g = BigInt::zero();
    for v in a.entries() {
        g = g.gcd(v);
        if g.is_one() {
            break;
        }
    }
    g
}

/// `max |a_i|`.
pub fn height(a: &IntVector) -> BigInt {
    a.entries()
        .iter()
        .map(Signed::abs)
        .max()
        .expect("IntVector is non-empty")
}

/// `min_i max_{j != i} |a_j|`: the height once the single best entry is
/// discarded.
pub fn height_star(a: &IntVector) -> Result<BigInt> {
    let n = a.len();
    if n < 2 {
        return Err(domain("height_star needs at least two entries"));
    }
    // Dropping the largest entry is optimal, so the answer is the
    // second-largest absolute value.
    let mut abs: Vec<BigInt> = a.entries().iter().map(Signed::abs).collect();
    abs.sort_unstable();
    Ok(abs[n - 2].clone())
}

/// Deterministic Miller-Rabin, exact for every `u64`.
pub fn is_prime_u64(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &w in &WITNESSES {
        let mut x = pow_mod(w, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Primes up to and including `limit` (Eratosthenes).
pub fn sieve_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        let mut j = i * i;
        while j <= limit {
            composite[j] = true;
            j += i;
        }
    }
    primes
}

fn small_primes() -> &'static [u64] {
    static TABLE: OnceLock<Vec<u64>> = OnceLock::new();
    TABLE.get_or_init(|| sieve_primes(TRIAL_DIVISION_BOUND))
}

/// Möbius values `mu[0..=limit]` by a linear sieve; `mu[0]` is unused (0).
pub fn mobius_table(limit: usize) -> Vec<i8> {
    let mut mu = vec![0i8; limit + 1];
    if limit == 0 {
        return mu;
    }
    mu[1] = 1;
    let mut is_composite = vec![false; limit + 1];
    let mut primes: Vec<usize> = Vec::new();
    for i in 2..=limit {
        if !is_composite[i] {
            primes.push(i);
            mu[i] = -1;
        }
        for &p in &primes {
            let ip = i * p;
            if ip > limit {
                break;
            }
            is_composite[ip] = true;
            if i % p == 0 {
                mu[ip] = 0;
                break;
            }
            mu[ip] = -mu[i];
        }
    }
    mu
}

/// Prime-exponent profile of an integer: the exponents of its prime
/// factorization, without the primes themselves.
struct Profile {
    exponents: Vec<u32>,
}

/// Factors `k >= 1` far enough to know every prime exponent.
///
/// Trial division runs over the primes below [`TRIAL_DIVISION_BOUND`]; the
/// leftover cofactor `c` has no prime factor below the bound `B`, so it is 1,
/// a prime, a product of two primes (when `c < B^3`), or unresolved.
fn exponent_profile(k: &BigInt) -> Result<Profile> {
    let mut rest = k.clone();
    let mut exponents = Vec::new();
    for &p in small_primes() {
        let pb = BigInt::from(p);
        if &pb * &pb > rest {
            break;
        }
        let mut e = 0;
        loop {
            let (q, r) = rest.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            rest = q;
            e += 1;
        }
        if e > 0 {
            exponents.push(e);
        }
    }
    if rest.is_one() {
        return Ok(Profile { exponents });
    }
    let bound = TRIAL_DIVISION_BOUND as u128;
    let c = match rest.to_u64() {
        Some(c) => c,
        None => return Err(resource(format!(
            "cofactor {rest} exceeds 64 bits and has no prime factor below {TRIAL_DIVISION_BOUND}"
        ))),
    };
    if (c as u128) < bound * bound || is_prime_u64(c) {
        exponents.push(1);
    } else if (c as u128) < bound * bound * bound {
        let r = c.sqrt();
        if r * r == c {
            exponents.push(2);
        } else {
            exponents.push(1);
            exponents.push(1);
        }
    } else {
        return Err(resource(format!(
            "cofactor {c} is composite with all prime factors above {TRIAL_DIVISION_BOUND}"
        )));
    }
    Ok(Profile { exponents })
}

/// Number of distinct prime divisors of `k >= 1`.
pub fn omega(k: &BigInt) -> Result<u32> {
    if !k.is_positive() {
        return Err(domain(format!("omega is defined for k >= 1, got {k}")));
    }
    Ok(exponent_profile(k)?.exponents.len() as u32)
}

/// Möbius function of `d >= 1`.
pub fn mobius(d: u64) -> Result<i8> {
    if d == 0 {
        return Err(domain("mobius is defined for d >= 1"));
    }
    let profile = exponent_profile(&BigInt::from(d))?;
    if profile.exponents.iter().any(|&e| e > 1) {
        return Ok(0);
    }
    Ok(if profile.exponents.len() % 2 == 0 {
        1
    } else {
        -1
    })
}

/// An ascending run of consecutive primes above a threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    threshold: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }
}

/// The first `count` primes strictly greater than `threshold`.
pub fn primes_above(threshold: u64, count: usize) -> Result<PrimeTable> {
    if count == 0 {
        return Err(domain("prime count must be at least 1"));
    }
    let mut primes = Vec::with_capacity(count);
    let mut candidate = threshold;
    while primes.len() < count {
        candidate = candidate
            .checked_add(1)
            .ok_or_else(|| resource("prime search ran past u64::MAX"))?;
        if is_prime_u64(candidate) {
            primes.push(candidate);
        }
    }
    Ok(PrimeTable { threshold, primes })
}

/// Distinct prime factors of `m`, or `None` once their product is known to
/// exceed `cap`.
fn radical_primes(mut m: u64, cap: u64) -> Option<Vec<u64>> {
    let mut primes = Vec::new();
    let mut radical: u64 = 1;
    let mut p = 2u64;
    while p.saturating_mul(p) <= m {
        if m.is_multiple_of(p) {
            primes.push(p);
            radical = radical.checked_mul(p).filter(|&r| r <= cap)?;
            while m.is_multiple_of(p) {
                m /= p;
            }
        } else if radical.saturating_mul(p) > cap {
            // Every remaining prime factor is at least p.
            return None;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        radical.checked_mul(m).filter(|&r| r <= cap)?;
        primes.push(m);
    }
    Some(primes)
}

/// Jacobsthal function: the largest difference between consecutive
/// integers coprime to `m`.
///
/// Coprimality to `m` depends only on the radical of `m`, so one period of
/// that radical is sieved. `sieve_cap` bounds the sieved period.
pub fn jacobsthal(m: u64, sieve_cap: u64) -> Result<u64> {
    if m == 0 {
        return Err(domain("jacobsthal is defined for m >= 1"));
    }
    let primes = radical_primes(m, sieve_cap).ok_or_else(|| {
        resource(format!(
            "sieve period for m = {m} exceeds the cap {sieve_cap}"
        ))
    })?;
    let period: u64 = primes.iter().product();
    if period == 1 {
        return Ok(1);
    }
    let len = period as usize;
    let mut blocked = vec![false; len];
    for &p in &primes {
        for k in (0..len).step_by(p as usize) {
            blocked[k] = true;
        }
    }
    // 1 is always coprime; the run wraps from the last coprime residue to
    // period + 1.
    let mut last = 1usize;
    let mut widest = 0usize;
    for (x, &b) in blocked.iter().enumerate().skip(2) {
        if !b {
            widest = widest.max(x - last);
            last = x;
        }
    }
    widest = widest.max(len + 1 - last);
    Ok(widest as u64)
}

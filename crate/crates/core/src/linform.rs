//! Counting pairs of positive vectors whose linear forms keep the gcd.
//!
//! `R(a, h)` counts ordered pairs `(x, y)` in `[1, h]^n x [1, h]^n` with
//! `gcd(a.x, a.y) = gcd(a)`. After dividing out `gcd(a)` this is the number
//! of pairs with coprime forms, and inclusion-exclusion over common divisors
//! gives
//!
//! ```text
//! R(a, h) = sum_{d >= 1} mu(d) U_d(a, h)^2
//! ```
//!
//! with `U_d` the number of `x` with `d | a.x`. For positive `a` every form
//! lies in `(0, h * sum a_i]`, so the sum is finite and computed exactly.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::{AddAssign, Mul};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{domain, resource, Error, Result};
use crate::numbercore::{gcd_vec, mobius, mobius_table, IntVector};

/// Default cap on `h^n` for [`u_d_brute`].
pub const DEFAULT_UD_BRUTE_LIMIT: u64 = 10_000_000;
/// Default cap on `h^(2n)` for [`r_brute`].
pub const DEFAULT_R_BRUTE_LIMIT: u64 = 100_000_000;
/// Default cap on the estimated residue-table work of [`r_mobius`].
pub const DEFAULT_WORK_BUDGET: u64 = 20_000_000_000;
/// Largest modulus the residue-class table is built for.
pub const MAX_TABLE_MODULUS: u64 = 100_000_000;

/// `1 / zeta(2) = 6 / pi^2`.
pub fn inverse_zeta2() -> f64 {
    6.0 / (PI * PI)
}

pub fn dot(a: &IntVector, x: &IntVector) -> Result<BigInt> {
    if a.len() != x.len() {
        return Err(domain(format!(
            "length mismatch: {} vs {}",
            a.len(),
            x.len()
        )));
    }
    Ok(a.entries()
        .iter()
        .zip(x.entries())
        .map(|(p, q)| p * q)
        .sum())
}

fn require_h(h: u64) -> Result<()> {
    if h == 0 {
        Err(domain("h must be at least 1"))
    } else {
        Ok(())
    }
}

/// Divides out `gcd(a)`; entries must be positive.
fn reduce_positive(a: &IntVector) -> Result<Vec<u64>> {
    a.require_positive()?;
    let g = gcd_vec(a);
    a.entries()
        .iter()
        .map(|v| (v / &g).to_u64())
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| resource("reduced entries must fit in 64 bits"))
}

/// Residue-class dynamic programme for `U_d`, generic over the counter type.
fn residue_count<T>(residues: &[u64], h: u64, d: u64) -> T
where
    T: Clone + Zero + From<u64> + for<'a> AddAssign<&'a T> + Mul<Output = T>,
{
    let du = d as usize;
    // (residue, how many x in [1, h] fall in it)
    let classes: Vec<(usize, u64)> = if d > h {
        (1..=h).map(|x| (x as usize, 1)).collect()
    } else {
        (0..d)
            .map(|s| (s as usize, if s == 0 { h / d } else { (h - s) / d + 1 }))
            .collect()
    };
    let mut state = vec![T::zero(); du];
    state[0] = T::from(1);
    for &t in residues {
        if t == 0 {
            let factor = T::from(h);
            for c in state.iter_mut() {
                *c = c.clone() * factor.clone();
            }
            continue;
        }
        // Aggregate the step t*s mod d per class once.
        let mut steps: BTreeMap<usize, u64> = BTreeMap::new();
        for &(s, c) in &classes {
            let step = ((t as u128 * s as u128) % d as u128) as usize;
            *steps.entry(step).or_default() += c;
        }
        let steps: Vec<(usize, T)> = steps.into_iter().map(|(s, c)| (s, T::from(c))).collect();
        let mut next = vec![T::zero(); du];
        for (r, count) in state.iter().enumerate() {
            if count.is_zero() {
                continue;
            }
            for (s, c) in &steps {
                let mut idx = r + s;
                if idx >= du {
                    idx -= du;
                }
                next[idx] += &(count.clone() * c.clone());
            }
        }
        state = next;
    }
    state.swap_remove(0)
}

/// `U_d(a, h)`: the number of `x` in `[1, h]^n` with `d | a.x`.
pub fn u_d(a: &IntVector, h: u64, d: u64) -> Result<BigUint> {
    require_h(h)?;
    if d == 0 {
        return Err(domain("d must be at least 1"));
    }
    let n = a.len() as u32;
    if a.all_positive() {
        // 0 < a.x <= h * sum(a) < d.
        let top: BigInt = a.entries().iter().sum::<BigInt>() * h;
        if BigInt::from(d) > top {
            return Ok(BigUint::zero());
        }
    }
    if d > MAX_TABLE_MODULUS {
        return Err(resource(format!(
            "modulus {d} exceeds the residue-table cap {MAX_TABLE_MODULUS}"
        )));
    }
    let dd = BigInt::from(d);
    let residues: Vec<u64> = a
        .entries()
        .iter()
        .map(|v| v.mod_floor(&dd).to_u64().expect("reduced below d"))
        .collect();
    // Every table cell is at most h^n.
    Ok(match (h as u128).checked_pow(n) {
        Some(_) => BigUint::from(residue_count::<u128>(&residues, h, d)),
        None => residue_count::<BigUint>(&residues, h, d),
    })
}

fn enumeration_size(h: u64, exponent: u32) -> u128 {
    (h as u128).checked_pow(exponent).unwrap_or(u128::MAX)
}

/// Every `x` in `[1, h]^n`, in lexicographic order.
fn for_each_point(n: usize, h: u64, mut f: impl FnMut(&[u64])) {
    let mut x = vec![1u64; n];
    loop {
        f(&x);
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if x[i] < h {
                x[i] += 1;
                break;
            }
            x[i] = 1;
        }
    }
}

/// `U_d` by enumerating every `x`.
pub fn u_d_brute(a: &IntVector, h: u64, d: u64, limit: u64) -> Result<BigUint> {
    require_h(h)?;
    if d == 0 {
        return Err(domain("d must be at least 1"));
    }
    let size = enumeration_size(h, a.len() as u32);
    if size > limit as u128 {
        return Err(resource(format!("h^n = {size} exceeds the limit {limit}")));
    }
    let dd = BigInt::from(d);
    let mut count = 0u64;
    for_each_point(a.len(), h, |x| {
        let form: BigInt = a.entries().iter().zip(x).map(|(p, &q)| p * q).sum();
        if form.is_multiple_of(&dd) {
            count += 1;
        }
    });
    Ok(BigUint::from(count))
}

/// `R(a, h)` by enumerating every pair, grouped by the value of the form.
pub fn r_brute(a: &IntVector, h: u64, limit: u64) -> Result<BigUint> {
    require_h(h)?;
    let reduced = reduce_positive(a)?;
    let size = enumeration_size(h, 2 * a.len() as u32);
    if size > limit as u128 {
        return Err(resource(format!(
            "h^(2n) = {size} exceeds the limit {limit}"
        )));
    }
    let mut forms: BTreeMap<u128, u64> = BTreeMap::new();
    for_each_point(reduced.len(), h, |x| {
        let v: u128 = reduced
            .iter()
            .zip(x)
            .map(|(&p, &q)| p as u128 * q as u128)
            .sum();
        *forms.entry(v).or_default() += 1;
    });
    let forms: Vec<(u128, u64)> = forms.into_iter().collect();
    let mut total = BigUint::zero();
    for &(v, cv) in &forms {
        for &(w, cw) in &forms {
            if v.gcd(&w) == 1 {
                total += BigUint::from(cv) * cw;
            }
        }
    }
    Ok(total)
}

struct Truncation {
    reduced: Vec<u64>,
    /// `n * H(a) * h` on the reduced vector.
    d_max: u64,
    /// `h * sum(a)`: no larger `d` divides any form.
    d_live: u64,
}

fn truncation(a: &IntVector, h: u64) -> Result<Truncation> {
    let reduced = reduce_positive(a)?;
    let n = reduced.len() as u64;
    let top = *reduced.iter().max().expect("non-empty");
    let overflow = || resource("truncation bound overflows u64");
    let d_max = n
        .checked_mul(top)
        .and_then(|v| v.checked_mul(h))
        .ok_or_else(overflow)?;
    let d_live = reduced
        .iter()
        .try_fold(0u64, |s, &v| s.checked_add(v))
        .and_then(|s| s.checked_mul(h))
        .ok_or_else(overflow)?;
    Ok(Truncation {
        reduced,
        d_max,
        d_live,
    })
}

fn check_budget(n: usize, h: u64, d_live: u64, budget: u64) -> Result<()> {
    // sum over d <= D of n * d * min(d, h) is at most n * h * D^2 / 2.
    let work = n as u128 * h as u128 * d_live as u128 * d_live as u128 / 2;
    if work > budget as u128 || d_live > MAX_TABLE_MODULUS {
        return Err(resource(format!(
            "Moebius sum up to d = {d_live} needs ~{work} table updates, budget {budget}"
        )));
    }
    Ok(())
}

fn mobius_sum(
    t: &Truncation,
    h: u64,
    mut table: Option<&mut Vec<(u64, BigUint)>>,
) -> Result<BigUint> {
    let a = IntVector::new(t.reduced.iter().map(|&v| BigInt::from(v)).collect())?;
    let top = if table.is_some() { t.d_max } else { t.d_live };
    let mu = mobius_table(top as usize);
    let mut sum = BigInt::zero();
    for d in 1..=top {
        let m = mu[d as usize];
        if m == 0 {
            continue;
        }
        let u = if d <= t.d_live {
            u_d(&a, h, d)?
        } else {
            BigUint::zero()
        };
        let sq = BigInt::from(&u * &u);
        if m > 0 {
            sum += sq;
        } else {
            sum -= sq;
        }
        if let Some(tab) = table.as_deref_mut() {
            tab.push((d, u));
        }
    }
    sum.to_biguint()
        .ok_or_else(|| Error::Invariant(format!("Moebius sum is negative: {sum}")))
}

/// `R(a, h)` through the Möbius identity.
pub fn r_mobius(a: &IntVector, h: u64, budget: u64) -> Result<BigUint> {
    require_h(h)?;
    let t = truncation(a, h)?;
    check_budget(t.reduced.len(), h, t.d_live, budget)?;
    mobius_sum(&t, h, None)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UdEntry {
    pub d: u64,
    #[serde(with = "crate::decimal")]
    pub u: BigUint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountReport {
    #[serde(with = "crate::decimal::vec")]
    pub a: Vec<BigInt>,
    pub h: u64,
    #[serde(rename = "R", with = "crate::decimal")]
    pub r: BigUint,
    /// `h^(2n) / zeta(2)`.
    pub main_term: f64,
    /// `|R - main_term| / h^(2n)`.
    pub rel_error: f64,
    pub d_max: u64,
    /// `2n - n / (n^2 - n + 1)`.
    pub predicted_error_exponent: f64,
    /// `log |R - main_term| / log h`, when defined.
    pub observed_error_exponent: Option<f64>,
    pub ud_table: Option<Vec<UdEntry>>,
}

fn density(r: &BigUint, h: u64, n: usize) -> f64 {
    let total = BigUint::from(h).pow(2 * n as u32);
    ratio(r, &total)
}

fn ratio(num: &BigUint, den: &BigUint) -> f64 {
    // Scale both down so they convert without overflow.
    let shift = den.bits().saturating_sub(1000);
    (num >> shift).to_f64().unwrap_or(f64::INFINITY)
        / (den >> shift).to_f64().unwrap_or(f64::INFINITY)
}

pub fn count_report(a: &IntVector, h: u64, with_table: bool, budget: u64) -> Result<CountReport> {
    require_h(h)?;
    let t = truncation(a, h)?;
    check_budget(t.reduced.len(), h, t.d_live, budget)?;
    let mut table = with_table.then(Vec::new);
    let r = mobius_sum(&t, h, table.as_mut())?;
    let n = a.len();
    let nf = n as f64;
    let hf = h as f64;
    let scale = hf.powi(2 * n as i32);
    let rel_error = (density(&r, h, n) - inverse_zeta2()).abs();
    let abs_err = rel_error * scale;
    Ok(CountReport {
        a: a.entries().to_vec(),
        h,
        main_term: scale * inverse_zeta2(),
        rel_error,
        d_max: t.d_max,
        predicted_error_exponent: 2.0 * nf - nf / (nf * nf - nf + 1.0),
        observed_error_exponent: (h >= 2 && abs_err > 0.0).then(|| abs_err.ln() / hf.ln()),
        ud_table: table.map(|t| t.into_iter().map(|(d, u)| UdEntry { d, u }).collect()),
        r,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub d: u64,
    #[serde(with = "crate::decimal")]
    pub u: BigUint,
    pub squarefree: bool,
    /// `|U_d^2 - h^(2n)/d^2| <= 8n h^(2n-1)/d`, checked for `d <= 2h/(3n)`.
    pub asymptotic: Option<bool>,
    /// `U_d <= d^(n-1) (h/d + 1)^n`.
    pub box_bound: bool,
    /// `U_d <= h^(n-1) (h d^(-1/n) + 1)`, checked for squarefree `d`.
    pub squarefree_bound: Option<bool>,
}

impl BoundRow {
    pub fn violations(&self) -> usize {
        [self.asymptotic, Some(self.box_bound), self.squarefree_bound]
            .iter()
            .filter(|c| **c == Some(false))
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundAudit {
    pub rows: Vec<BoundRow>,
    pub violations: usize,
}

fn is_squarefree(d: u64) -> Result<bool> {
    Ok(mobius(d)? != 0)
}

/// Checks the three `U_d` estimates with exact integer arithmetic.
pub fn bound_row(a: &IntVector, h: u64, d: u64) -> Result<BoundRow> {
    let u = u_d(a, h, d)?;
    let n = a.len() as u32;
    let ub = BigInt::from(u.clone());
    let hb = BigInt::from(h);
    let db = BigInt::from(d);

    let asymptotic = (3 * n as u64 * d <= 2 * h).then(|| {
        // Multiply through by d^2.
        let lhs = (&ub * &ub * &db * &db - hb.pow(2 * n)).abs();
        let rhs = BigInt::from(8 * n) * &db * hb.pow(2 * n - 1);
        lhs <= rhs
    });
    // d^(n-1) (h/d + 1)^n = (h + d)^n / d.
    let box_bound = &ub * &db <= (&hb + &db).pow(n);
    let squarefree = is_squarefree(d)?;
    let squarefree_bound = squarefree.then(|| {
        // U - h^(n-1) <= h^n d^(-1/n), raised to the n-th power when positive.
        let excess = &ub - hb.pow(n - 1);
        !excess.is_positive() || excess.pow(n) * &db <= hb.pow(n * n)
    });
    Ok(BoundRow {
        d,
        u,
        squarefree,
        asymptotic,
        box_bound,
        squarefree_bound,
    })
}

pub fn bound_audit(a: &IntVector, h: u64, ds: &[u64]) -> Result<BoundAudit> {
    require_h(h)?;
    a.require_positive()?;
    if !gcd_vec(a).is_one() {
        return Err(domain("bound audit needs gcd(a) = 1"));
    }
    let rows = ds
        .iter()
        .map(|&d| {
            if d == 0 {
                Err(domain("d must be at least 1"))
            } else {
                bound_row(a, h, d)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundAudit {
        violations: rows.iter().map(BoundRow::violations).sum(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub h: u64,
    #[serde(rename = "R", with = "crate::decimal")]
    pub r: BigUint,
    /// `R / h^(2n)`.
    pub density: f64,
    /// `|density - 6/pi^2|`.
    pub gap: f64,
}

pub fn convergence_sweep(a: &IntVector, hs: &[u64], budget: u64) -> Result<Vec<ConvergenceRow>> {
    hs.iter()
        .map(|&h| {
            let r = r_mobius(a, h, budget)?;
            let density = density(&r, h, a.len());
            Ok(ConvergenceRow {
                h,
                density,
                gap: (density - inverse_zeta2()).abs(),
                r,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> IntVector {
        IntVector::from_i64s(xs).unwrap()
    }

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn dot_examples() {
        assert_eq!(dot(&v(&[1, 2]), &v(&[3, 4])).unwrap(), BigInt::from(11));
        assert_eq!(dot(&v(&[1, 1]), &v(&[1, 1])).unwrap(), BigInt::from(2));
        assert_eq!(dot(&v(&[5]), &v(&[7])).unwrap(), BigInt::from(35));
        assert!(matches!(dot(&v(&[5]), &v(&[7, 1])), Err(Error::Domain(_))));
    }

    #[test]
    fn u_d_examples() {
        assert_eq!(u_d(&v(&[3, 7, 2]), 5, 1).unwrap(), big(125));
        assert_eq!(u_d(&v(&[1, 1]), 2, 2).unwrap(), big(2));
        assert_eq!(u_d(&v(&[1, 2]), 3, 3).unwrap(), big(3));
        assert_eq!(u_d(&v(&[1, 1]), 2, 4).unwrap(), big(1));
        assert_eq!(u_d(&v(&[1, 1]), 2, 5).unwrap(), big(0));
        assert!(u_d(&v(&[1, 1]), 0, 5).is_err());
        assert!(u_d(&v(&[1, 1]), 2, 0).is_err());
    }

    #[test]
    fn u_d_brute_examples() {
        let lim = DEFAULT_UD_BRUTE_LIMIT;
        assert_eq!(u_d_brute(&v(&[1, 1]), 2, 2, lim).unwrap(), big(2));
        assert_eq!(u_d_brute(&v(&[1, 2]), 3, 3, lim).unwrap(), big(3));
        assert_eq!(u_d_brute(&v(&[1, 1]), 2, 4, lim).unwrap(), big(1));
        assert_eq!(u_d_brute(&v(&[2, 3]), 4, 21, lim).unwrap(), big(0));
        assert!(matches!(
            u_d_brute(&v(&[1, 1, 1]), 300, 2, lim),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn u_d_signed_entries_match_brute() {
        for a in [[-3i64, 5], [0, 4], [-2, -7]] {
            for d in 1..=20 {
                assert_eq!(
                    u_d(&v(&a), 6, d).unwrap(),
                    u_d_brute(&v(&a), 6, d, DEFAULT_UD_BRUTE_LIMIT).unwrap(),
                    "a = {a:?}, d = {d}"
                );
            }
        }
    }

    #[test]
    fn u_d_wide_counts_use_big_path() {
        // h^n overflows u128, so the BigUint table is used; d = 1 counts everything.
        let a = IntVector::from_i64s(&[1; 20]).unwrap();
        let h = 100_000u64;
        assert_eq!(u_d(&a, h, 1).unwrap(), BigUint::from(h).pow(20));
    }

    #[test]
    fn r_examples() {
        let lim = DEFAULT_R_BRUTE_LIMIT;
        let budget = DEFAULT_WORK_BUDGET;
        for (a, h, r) in [
            (&[1i64, 1][..], 1u64, 0u64),
            (&[1, 1], 2, 8),
            (&[1, 2], 1, 0),
        ] {
            assert_eq!(r_brute(&v(a), h, lim).unwrap(), big(r));
            assert_eq!(r_mobius(&v(a), h, budget).unwrap(), big(r));
        }
        assert_eq!(
            r_mobius(&v(&[2, 4]), 2, budget).unwrap(),
            r_brute(&v(&[1, 2]), 2, lim).unwrap()
        );
        assert_eq!(
            r_brute(&v(&[2, 4]), 2, lim).unwrap(),
            r_brute(&v(&[1, 2]), 2, lim).unwrap()
        );
    }

    #[test]
    fn r_rejects_non_positive() {
        assert!(matches!(
            r_mobius(&v(&[1, -1]), 2, DEFAULT_WORK_BUDGET),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            r_brute(&v(&[0, 1]), 2, DEFAULT_R_BRUTE_LIMIT),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            r_brute(&v(&[1, 1, 1]), 30, DEFAULT_R_BRUTE_LIMIT),
            Err(Error::Resource(_))
        ));
        assert!(matches!(
            r_mobius(&v(&[1000, 999]), 1000, 1_000_000),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn count_report_table() {
        let rep = count_report(&v(&[1, 1]), 2, true, DEFAULT_WORK_BUDGET).unwrap();
        assert_eq!(rep.r, big(8));
        assert_eq!(rep.d_max, 4);
        let table: Vec<(u64, u64)> = rep
            .ud_table
            .unwrap()
            .iter()
            .map(|e| (e.d, e.u.to_u64().unwrap()))
            .collect();
        // Squarefree d <= 4: U_1 = 4, U_2 = 2, U_3 = 2.
        assert_eq!(table, [(1, 4), (2, 2), (3, 2)]);
        assert!((rep.rel_error - (0.5 - inverse_zeta2()).abs()).abs() < 1e-15);
    }

    #[test]
    fn bound_examples() {
        let a = v(&[1, 1]);
        let row = bound_row(&a, 30, 3).unwrap();
        assert_eq!(row.violations(), 0);
        assert_eq!(row.asymptotic, Some(true));
        assert_eq!(row.squarefree_bound, Some(true));
        let row = bound_row(&a, 30, 1).unwrap();
        assert_eq!(row.u, big(900));
        assert!(row.box_bound);
        assert!(bound_audit(&v(&[2, 4]), 10, &[1]).is_err());
    }

    #[test]
    fn convergence_examples() {
        let rows = convergence_sweep(&v(&[1, 1]), &[2], DEFAULT_WORK_BUDGET).unwrap();
        assert_eq!(rows[0].density, 0.5);
        let rows = convergence_sweep(&v(&[1, 2]), &[8, 32], DEFAULT_WORK_BUDGET).unwrap();
        assert!(rows[1].gap < rows[0].gap);
        assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.density)));
    }
}

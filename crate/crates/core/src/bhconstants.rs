//! Exponent calculus behind the large shifted-gcd lower bound.
//!
//! `kappa(n, eps)` is the root of
//!
//! ```text
//! n (eps k - 1) / (n - 1) = gamma(k),    gamma(k) = 1 / (2^(2 + max(1, k)) - 4)
//! ```
//!
//! and `theta(n, eps) = (1 - 1 / (eps kappa)) / (n - 1)` is the gain over
//! linear growth. [`plan_parameters`] turns a height bound `H` into the
//! `(K, A, R, Q, psi)` choice used by the Diophantine approximation step.

use serde::Serialize;

use crate::error::{domain, Error, Result};

const MAX_BISECTIONS: usize = 200;
const KAPPA_TOLERANCE: f64 = 1e-13;

/// Exponent `gamma(K) = 1 / (2^(2 + max(1, K)) - 4)`.
pub fn gamma_of(k: f64) -> f64 {
    1.0 / (2f64.powf(2.0 + k.max(1.0)) - 4.0)
}

fn check_args(n: u32, epsilon: f64) -> Result<()> {
    if n < 2 {
        return Err(domain(format!("n must be at least 2, got {n}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    Ok(())
}

/// `LHS(k) - RHS(k)`; strictly increasing in `k`.
fn kappa_gap(n: u32, epsilon: f64, k: f64) -> f64 {
    let n = n as f64;
    n * (epsilon * k - 1.0) / (n - 1.0) - gamma_of(k)
}

/// Absolute residual of the defining equation at `k`.
pub fn kappa_residual(n: u32, epsilon: f64, k: f64) -> f64 {
    kappa_gap(n, epsilon, k).abs()
}

/// Root of the kappa equation, by bisection.
///
/// The left side is negative at `k = 1/eps` while the right side is always
/// positive, so the root lies above `1/eps`; the upper end is found by
/// doubling.
pub fn kappa(n: u32, epsilon: f64) -> Result<f64> {
    check_args(n, epsilon)?;
    let mut lo = 1.0 / epsilon + 1e-15;
    if kappa_gap(n, epsilon, lo) >= 0.0 {
        return Err(Error::Numeric(format!(
            "kappa bracket does not open at 1/eps for n = {n}, eps = {epsilon}"
        )));
    }
    let mut hi = 2.0 * lo;
    let mut doublings = 0;
    while kappa_gap(n, epsilon, hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 1000 {
            return Err(Error::Numeric("kappa upper bracket not found".into()));
        }
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo < KAPPA_TOLERANCE * 1e-3 {
            break;
        }
        if kappa_gap(n, epsilon, mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if hi - lo > KAPPA_TOLERANCE {
        return Err(Error::Numeric(format!(
            "kappa bisection did not converge for n = {n}, eps = {epsilon}"
        )));
    }
    let (glo, ghi) = (
        kappa_residual(n, epsilon, lo),
        kappa_residual(n, epsilon, hi),
    );
    Ok(if glo <= ghi { lo } else { hi })
}

/// `(1 - 1/(eps kappa)) / (n - 1)`.
pub fn theta(n: u32, epsilon: f64) -> Result<f64> {
    let k = kappa(n, epsilon)?;
    Ok(theta_from_kappa(n, epsilon, k))
}

fn theta_from_kappa(n: u32, epsilon: f64, k: f64) -> f64 {
    (1.0 - 1.0 / (epsilon * k)) / (n as f64 - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantsReport {
    pub n: u32,
    pub epsilon: f64,
    pub kappa: f64,
    pub theta: f64,
    pub gamma: f64,
    pub residual: f64,
}

pub fn constants(n: u32, epsilon: f64) -> Result<ConstantsReport> {
    let k = kappa(n, epsilon)?;
    let report = ConstantsReport {
        n,
        epsilon,
        kappa: k,
        theta: theta_from_kappa(n, epsilon, k),
        gamma: gamma_of(k),
        residual: kappa_residual(n, epsilon, k),
    };
    // For small eps, gamma(kappa) drops below the spacing of doubles near 1
    // and eps * kappa rounds to exactly 1.
    if epsilon * k <= 1.0 && report.residual < 1e-12 {
        return Err(Error::Numeric(format!(
            "eps * kappa - 1 = {:e} is below double resolution for n = {n}, eps = {epsilon}",
            report.gamma * (n as f64 - 1.0) / n as f64
        )));
    }
    if !(report.residual < 1e-12 && epsilon * k > 1.0 && report.theta > 0.0) {
        return Err(Error::Invariant(format!(
            "constants for n = {n}, eps = {epsilon} fail their checks: {report:?}"
        )));
    }
    Ok(report)
}

/// Parameter choice for a given height bound.
///
/// `psi` is the common approximation quality `Q^(-1/n)`; `gcd_gain` is
/// `Q^(1/n)`, the factor by which `r` exceeds the shift height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParameterPlan {
    pub n: u32,
    pub epsilon: f64,
    #[serde(rename = "H")]
    pub height_bound: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub gamma: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub psi: f64,
    pub gcd_gain: f64,
    /// `gamma(K) / (eps n K)`: exponent of `H` in the lower bound for `Q^(1/n)`.
    pub gain_exponent: f64,
    /// `Q >= 1`, needed for the gcd bound to beat the shift height.
    pub q_at_least_one: bool,
    /// `psi <= (log Q)^(-n)`; the implied constant in this ceiling is
    /// not modelled, so this is advisory.
    pub psi_within_log_ceiling: bool,
}

impl ParameterPlan {
    /// Relative error of `2 Q^(1-1/n) R = H`.
    pub fn height_identity_error(&self) -> f64 {
        let n = self.n as f64;
        let lhs = 2.0 * self.q.powf(1.0 - 1.0 / n) * self.r;
        (lhs - self.height_bound).abs() / self.height_bound
    }

    /// Relative error of `R = n^(1/2K) H^(1/(eps K))`.
    pub fn radius_identity_error(&self) -> f64 {
        let n = self.n as f64;
        let expected = n.powf(0.5 / self.k) * self.height_bound.powf(1.0 / (self.epsilon * self.k));
        (self.r - expected).abs() / expected
    }
}

pub fn plan_parameters(n: u32, epsilon: f64, height_bound: f64) -> Result<ParameterPlan> {
    check_args(n, epsilon)?;
    if height_bound.is_nan() || height_bound < 2.0 || !height_bound.is_finite() {
        return Err(domain(format!("H must be at least 2, got {height_bound}")));
    }
    let k = kappa(n, epsilon)?;
    let gamma = gamma_of(k);
    let nf = n as f64;
    // Solving 2 Q^(1-1/n) R = H with Q = 0.5^(n/(n-1)) A^-1 R^gamma gives
    // R = A^e H^f, e = (n-1)/(n gamma - gamma + n), f = n/(n gamma - gamma + n).
    let denom = nf * gamma - gamma + nf;
    let a_exponent = (nf - 1.0) / denom;
    let a = nf.powf(0.5 / k / a_exponent);
    let r = nf.powf(0.5 / k) * height_bound.powf(nf / denom);
    let q = 0.5f64.powf(nf / (nf - 1.0)) / a * r.powf(gamma);
    let psi = q.powf(-1.0 / nf);
    let psi_within_log_ceiling = q > 1.0 && psi <= q.ln().powf(-nf);
    Ok(ParameterPlan {
        n,
        epsilon,
        height_bound,
        k,
        gamma,
        a,
        r,
        q,
        psi,
        gcd_gain: q.powf(1.0 / nf),
        gain_exponent: gamma / (epsilon * nf * k),
        q_at_least_one: q >= 1.0,
        psi_within_log_ceiling,
    })
}

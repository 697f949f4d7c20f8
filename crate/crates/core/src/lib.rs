//! Exact experiments on greatest common divisors of shifted integer vectors.
//!
//! - [`numbercore`]: gcd and height of vectors, primes, Möbius, ω, Jacobsthal.
//! - [`bhconstants`]: the exponent calculus for large shifted gcds.
//! - [`shiftsearch`]: the largest gcd reachable by bounded shifts.
//! - [`coprime`]: shifting to pairwise coprime or jointly coprime vectors.
//! - [`adversary`]: CRT vectors that resist every small shift.
//! - [`linform`]: counting pairs of linear forms that keep the gcd.
//! - [`cli`]: the `shiftgcd` command-line front end.

pub mod adversary;
pub mod bhconstants;
pub mod cli;
pub mod coprime;
mod decimal;
pub mod error;
pub mod linform;
pub mod numbercore;
pub mod shiftsearch;

pub use error::{Error, Result};
pub use numbercore::{IntVector, ShiftVector};

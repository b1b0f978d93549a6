//! Width arithmetic.
//!
//! Node widths are logarithms of relation sizes in base `b = max(tup, 2)`.
//! Comparisons against a width budget `w` are never done with floating point:
//! a relation of `n` tuples fits the budget iff `n <= floor(b^w)`, computed
//! in exact integer arithmetic with `w` rational.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};

/// Rational width parameter (the exponent in the `b^w` tuple cap).
pub type Omega = Ratio<u64>;

/// Parses a width given as an integer, a decimal, or a fraction `p/q`.
pub fn parse_omega(s: &str) -> Result<Omega> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid width {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: u64 = p.trim().parse().map_err(|_| bad())?;
        let q: u64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        if frac.is_empty() || frac.len() > 9 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        let num: u64 = frac.parse().map_err(|_| bad())?;
        return Ok(Ratio::new(int * den + num, den));
    }
    let n: u64 = s.parse().map_err(|_| bad())?;
    Ok(Ratio::from_integer(n))
}

/// Tuple-count budget `floor(b^w)` for base `b` and rational width `w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TupleBudget {
    base: u64,
    omega: Omega,
    max_count: u64,
}

impl TupleBudget {
    pub fn new(base: u64, omega: Omega) -> Self {
        let base = base.max(2);
        // floor(b^(p/q)) is the integer q-th root of b^p.
        let pow = BigUint::from(base).pow(
            (*omega.numer()).try_into().expect("width numerator too large"),
        );
        let root = pow.nth_root((*omega.denom()).try_into().expect("width denominator too large"));
        let max_count = root.to_u64().unwrap_or(u64::MAX);
        Self { base, omega, max_count }
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn omega(&self) -> Omega {
        self.omega
    }

    /// Largest relation size within budget.
    pub fn max_count(&self) -> u64 {
        self.max_count
    }

    /// True iff a relation with `count` tuples has width at most the budget.
    /// Relations with at most one tuple have width zero and always fit.
    pub fn allows(&self, count: u64) -> bool {
        count <= 1 || count <= self.max_count
    }
}

/// Width of a relation with `count` tuples in base `max(base, 2)`.
/// Empty and singleton relations have width zero.
pub fn width_value(count: u64, base: u64) -> f64 {
    if count <= 1 {
        0.0
    } else {
        (count as f64).ln() / ((base.max(2)) as f64).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_omega("2").unwrap(), Ratio::from_integer(2));
        assert_eq!(parse_omega("1.5").unwrap(), Ratio::new(3, 2));
        assert_eq!(parse_omega("3/2").unwrap(), Ratio::new(3, 2));
        assert_eq!(parse_omega("0.25").unwrap(), Ratio::new(1, 4));
        assert!(parse_omega("abc").is_err());
        assert!(parse_omega("1/0").is_err());
        assert!(parse_omega("-1").is_err());
    }

    #[test]
    fn budget_integer_width() {
        let b = TupleBudget::new(5, Ratio::from_integer(1));
        assert_eq!(b.max_count(), 5);
        assert!(b.allows(5));
        assert!(!b.allows(6));
    }

    #[test]
    fn budget_fractional_width() {
        // floor(4^(3/2)) = 8
        let b = TupleBudget::new(4, Ratio::new(3, 2));
        assert_eq!(b.max_count(), 8);
        assert!(b.allows(8));
        assert!(!b.allows(9));
        // floor(2^(1/2)) = 1, but singleton relations always fit
        let b = TupleBudget::new(2, Ratio::new(1, 2));
        assert!(b.allows(1));
        assert!(!b.allows(2));
    }

    #[test]
    fn budget_zero_width() {
        let b = TupleBudget::new(7, Ratio::from_integer(0));
        assert!(b.allows(0));
        assert!(b.allows(1));
        assert!(!b.allows(2));
    }

    #[test]
    fn base_floors_at_two() {
        let b = TupleBudget::new(1, Ratio::from_integer(2));
        assert_eq!(b.base(), 2);
        assert_eq!(b.max_count(), 4);
        assert_eq!(width_value(4, 1), 2.0);
    }

    #[test]
    fn width_values() {
        assert_eq!(width_value(0, 5), 0.0);
        assert_eq!(width_value(1, 5), 0.0);
        assert!((width_value(5, 5) - 1.0).abs() < 1e-12);
        assert!((width_value(16, 2) - 4.0).abs() < 1e-12);
    }
}

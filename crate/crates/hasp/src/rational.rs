//! Exact rational arithmetic.
//!
//! Parameter values and the time step `delta_t` are exact rationals so that
//! generalized positions have decidable, reproducible equality. Values are
//! kept in lowest terms with a positive denominator; arithmetic goes through
//! `i128` intermediates before reducing back to `i64`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// A rational number in lowest terms with a positive denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rational {
    numer: i64,
    denom: i64,
}

impl Rational {
    /// Builds `numer/denom`, reducing to lowest terms.
    ///
    /// Panics if `denom` is zero or the reduced value does not fit in `i64`.
    pub fn new(numer: i64, denom: i64) -> Self {
        Self::reduce(numer as i128, denom as i128)
    }

    pub const ZERO: Rational = Rational { numer: 0, denom: 1 };
    pub const ONE: Rational = Rational { numer: 1, denom: 1 };

    fn reduce(numer: i128, denom: i128) -> Self {
        assert!(denom != 0, "rational with zero denominator");
        let sign = if denom < 0 { -1 } else { 1 };
        let g = gcd(numer, denom).max(1);
        let n = sign * numer / g;
        let d = sign * denom / g;
        assert!(
            n >= i64::MIN as i128 && n <= i64::MAX as i128 && d <= i64::MAX as i128,
            "rational overflow: {n}/{d}"
        );
        Rational {
            numer: n as i64,
            denom: d as i64,
        }
    }

    pub fn from_integer(n: i64) -> Self {
        Rational { numer: n, denom: 1 }
    }

    pub fn numer(&self) -> i64 {
        self.numer
    }

    pub fn denom(&self) -> i64 {
        self.denom
    }

    pub fn is_integer(&self) -> bool {
        self.denom == 1
    }

    pub fn is_positive(&self) -> bool {
        self.numer > 0
    }

    /// Rounds to the nearest rational with denominator dividing `max_denom`,
    /// ties away from zero.
    pub fn round_to_denominator(&self, max_denom: i64) -> Self {
        assert!(max_denom > 0, "max denominator must be positive");
        if self.denom <= max_denom && max_denom % self.denom == 0 {
            return *self;
        }
        let scaled_num = self.numer as i128 * max_denom as i128;
        let d = self.denom as i128;
        let q = scaled_num / d;
        let r = scaled_num % d;
        let rounded = if 2 * r.abs() >= d { q + r.signum() } else { q };
        Self::reduce(rounded, max_denom as i128)
    }

    /// Parses `p` or `p/q` notation.
    pub fn parse(text: &str) -> Option<Self> {
        match text.split_once('/') {
            Some((n, d)) => {
                let n: i64 = n.trim().parse().ok()?;
                let d: i64 = d.trim().parse().ok()?;
                if d == 0 {
                    None
                } else {
                    Some(Self::new(n, d))
                }
            }
            None => text.trim().parse::<i64>().ok().map(Self::from_integer),
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom == 1 {
            write!(f, "{}", self.numer)
        } else {
            write!(f, "{}/{}", self.numer, self.denom)
        }
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.numer as i128 * other.denom as i128;
        let rhs = other.numer as i128 * self.denom as i128;
        lhs.cmp(&rhs)
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        Rational::reduce(
            self.numer as i128 * rhs.denom as i128 + rhs.numer as i128 * self.denom as i128,
            self.denom as i128 * rhs.denom as i128,
        )
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        self + (-rhs)
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        Rational::reduce(
            self.numer as i128 * rhs.numer as i128,
            self.denom as i128 * rhs.denom as i128,
        )
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational {
            numer: -self.numer,
            denom: self.denom,
        }
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Self::from_integer(n)
    }
}

//! Shared numeric primitives: exact rational interference coefficients,
//! log-domain accumulation that survives probabilities far below 1e-300,
//! and careful conversions between big rationals and `f64`.

use num_bigint::{BigInt, BigUint};
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, ToPrimitive, Zero};
use std::fmt;

pub const LN_HALF: f64 = -std::f64::consts::LN_2;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RationalError {
    #[error("coefficient must satisfy 0 < b/a <= 1, got {b}/{a}")]
    OutOfRange { b: u64, a: u64 },
    #[error("malformed rational `{0}`, expected `b/a` with positive integers")]
    Malformed(String),
}

/// Detected power fraction of an interfering wavelength channel, kept as an
/// exact rational b/a in (0, 1] so threshold comparisons never hinge on
/// floating-point ties.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Alpha(Ratio<u64>);

impl Alpha {
    pub fn new(numer: u64, denom: u64) -> Result<Self, RationalError> {
        if numer == 0 || denom == 0 || numer > denom {
            return Err(RationalError::OutOfRange { b: numer, a: denom });
        }
        Ok(Alpha(Ratio::new(numer, denom)))
    }

    pub fn one() -> Self {
        Alpha(Ratio::new(1, 1))
    }

    /// Numerator b of the reduced fraction.
    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    /// Denominator a of the reduced fraction.
    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    pub fn as_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    pub fn to_big_rational(&self) -> BigRational {
        Ratio::new(BigInt::from(self.numer()), BigInt::from(self.denom()))
    }

    /// Parses `b/a`; a bare integer is read as `b/1` (only `1` is in range).
    pub fn parse(text: &str) -> Result<Self, RationalError> {
        let text = text.trim();
        let (b, a) = match text.split_once('/') {
            Some((b, a)) => (b.trim(), a.trim()),
            None => (text, "1"),
        };
        let b: u64 = b
            .parse()
            .map_err(|_| RationalError::Malformed(text.to_string()))?;
        let a: u64 = a
            .parse()
            .map_err(|_| RationalError::Malformed(text.to_string()))?;
        Alpha::new(b, a)
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

/// ln C(n, k) through log-gamma. Zero for k == 0 or k == n, -inf for k > n.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    libm::lgamma((n + 1) as f64) - libm::lgamma((k + 1) as f64) - libm::lgamma((n - k + 1) as f64)
}

/// ln of the Binomial(n, p) mass at k, given ln p and ln(1-p).
pub fn ln_binomial_pmf(n: u64, k: u64, ln_p: f64, ln_q: f64) -> f64 {
    ln_choose(n, k) + k as f64 * ln_p + (n - k) as f64 * ln_q
}

/// Streaming log-sum-exp over nonnegative terms given by their natural logs.
/// Keeps a running maximum and a rescaled mantissa sum, so no term underflows
/// relative to the largest one seen.
#[derive(Clone, Debug)]
pub struct LogSum {
    max: f64,
    scaled: f64,
}

impl LogSum {
    pub fn new() -> Self {
        LogSum {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    pub fn push(&mut self, ln_term: f64) {
        if ln_term == f64::NEG_INFINITY {
            return;
        }
        if ln_term <= self.max {
            self.scaled += (ln_term - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - ln_term).exp() + 1.0;
            self.max = ln_term;
        }
    }

    /// ln of the accumulated sum; -inf when nothing was pushed.
    pub fn ln(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

impl Default for LogSum {
    fn default() -> Self {
        Self::new()
    }
}

/// ln(exp(a) + exp(b)) without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a >= b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// Signed magnitude in log space: sign * exp(ln_abs). Needed by closed forms
/// whose published factors can turn negative while magnitudes span hundreds of
/// orders of magnitude.
#[derive(Clone, Copy, Debug)]
pub struct SignedLog {
    sign: i8,
    ln_abs: f64,
}

impl SignedLog {
    pub fn zero() -> Self {
        SignedLog {
            sign: 0,
            ln_abs: f64::NEG_INFINITY,
        }
    }

    pub fn one() -> Self {
        SignedLog {
            sign: 1,
            ln_abs: 0.0,
        }
    }

    /// Positive value from its natural log.
    pub fn from_ln(ln_abs: f64) -> Self {
        if ln_abs == f64::NEG_INFINITY {
            Self::zero()
        } else {
            SignedLog { sign: 1, ln_abs }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::zero()
        } else {
            SignedLog {
                sign: if x > 0.0 { 1 } else { -1 },
                ln_abs: x.abs().ln(),
            }
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn ln_abs(&self) -> f64 {
        self.ln_abs
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.sign as f64 * self.ln_abs.exp()
    }

    pub fn mul(&self, rhs: &SignedLog) -> SignedLog {
        if self.sign == 0 || rhs.sign == 0 {
            return Self::zero();
        }
        SignedLog {
            sign: self.sign * rhs.sign,
            ln_abs: self.ln_abs + rhs.ln_abs,
        }
    }

    pub fn powi(&self, k: u64) -> SignedLog {
        if k == 0 {
            return Self::one();
        }
        if self.sign == 0 {
            return Self::zero();
        }
        SignedLog {
            sign: if self.sign < 0 && k % 2 == 1 { -1 } else { 1 },
            ln_abs: self.ln_abs * k as f64,
        }
    }

    /// 1 - x, evaluated with ln_1p care around x = 1.
    pub fn one_minus(&self) -> SignedLog {
        match self.sign {
            0 => Self::one(),
            -1 => SignedLog {
                sign: 1,
                ln_abs: log_add_exp(0.0, self.ln_abs),
            },
            _ => {
                if self.ln_abs == 0.0 {
                    Self::zero()
                } else if self.ln_abs < 0.0 {
                    SignedLog {
                        sign: 1,
                        ln_abs: (-self.ln_abs.exp()).ln_1p(),
                    }
                } else {
                    SignedLog {
                        sign: -1,
                        ln_abs: self.ln_abs + (-(-self.ln_abs).exp()).ln_1p(),
                    }
                }
            }
        }
    }

    /// Sum of many terms: positive and negative magnitudes are each
    /// accumulated with log-sum-exp, then cancelled in a single subtraction.
    pub fn sum<I: IntoIterator<Item = SignedLog>>(items: I) -> SignedLog {
        let mut pos = LogSum::new();
        let mut neg = LogSum::new();
        for t in items {
            match t.sign {
                1 => pos.push(t.ln_abs),
                -1 => neg.push(t.ln_abs),
                _ => {}
            }
        }
        let (p, n) = (pos.ln(), neg.ln());
        if n == f64::NEG_INFINITY {
            return Self::from_ln(p);
        }
        if p == f64::NEG_INFINITY {
            let mut v = Self::from_ln(n);
            v.sign = -v.sign;
            return v;
        }
        if p == n {
            return Self::zero();
        }
        if p > n {
            SignedLog {
                sign: 1,
                ln_abs: p + (-(n - p).exp()).ln_1p(),
            }
        } else {
            SignedLog {
                sign: -1,
                ln_abs: n + (-(p - n).exp()).ln_1p(),
            }
        }
    }
}

/// Natural log of a positive big integer, accurate to a few ulps of the
/// mantissa plus the rounding of (bits * ln 2).
pub fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 53 {
        return x.to_f64().expect("fits f64").ln();
    }
    let shift = bits - 53;
    let top = (x >> shift).to_f64().expect("53-bit value");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of a nonnegative rational; -inf at zero, NaN if negative.
pub fn ratio_ln(r: &BigRational) -> f64 {
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    if r.is_negative() {
        return f64::NAN;
    }
    big_ln(r.numer().magnitude()) - big_ln(r.denom().magnitude())
}

/// Rounds a big rational to f64 without the inf/inf pitfalls of naive
/// numerator/denominator conversion.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    let num = r.numer().magnitude();
    let den = r.denom().magnitude();
    let (nb, db) = (num.bits(), den.bits());
    let max_bits = nb.max(db);
    if max_bits <= 1000 {
        return sign * num.to_f64().unwrap() / den.to_f64().unwrap();
    }
    let shift = max_bits - 500;
    if nb > shift && db > shift {
        let n = (num >> shift).to_f64().unwrap();
        let d = (den >> shift).to_f64().unwrap();
        if nb - shift > 60 && db - shift > 60 {
            return sign * n / d;
        }
    }
    // Extreme magnitude disparity: go through the log representation.
    sign * (big_ln(num) - big_ln(den)).exp()
}

/// Relative error of a float against an exact rational reference, computed
/// entirely in rational arithmetic (the f64 is lifted exactly).
pub fn relative_error(x: f64, exact: &BigRational) -> f64 {
    if exact.is_zero() {
        return if x == 0.0 { 0.0 } else { f64::INFINITY };
    }
    let xr = BigRational::from_float(x).expect("finite float");
    let rel = (xr - exact).abs() / exact.abs();
    ratio_to_f64(&rel)
}

/// ceil(n / d) for nonnegative integers, d > 0.
pub fn ceil_div(n: u128, d: u128) -> u128 {
    n.div_ceil(d)
}

/// Rounds n/d (d > 0) to the nearest integer, ties away from zero.
pub fn round_half_away(n: i128, d: i128) -> i128 {
    debug_assert!(d > 0);
    if n >= 0 {
        (2 * n + d).div_euclid(2 * d)
    } else {
        -((-2 * n + d).div_euclid(2 * d))
    }
}

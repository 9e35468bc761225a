//! Exact-rational evaluation of the CCR closed forms. Same algebra as the
//! log-domain routes, no rounding anywhere: useful as a second route in
//! tests and whenever a result must be a literal rational.

use super::CcrConfig;
use crate::numeric::{ceil_div, Alpha};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

/// C(n, k) as a big integer.
pub fn big_binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    num_integer::binomial(BigUint::from(n), BigUint::from(k))
}

pub(crate) fn binomial_pmf(n: u64, k: u64, p: &BigRational) -> BigRational {
    let q = BigRational::one() - p;
    let coeff = BigRational::from_integer(BigInt::from(big_binomial(n, k)));
    coeff * pow_ratio(p, k) * pow_ratio(&q, n - k)
}

pub(crate) fn pow_ratio(x: &BigRational, k: u64) -> BigRational {
    let mut acc = BigRational::one();
    let mut base = x.clone();
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            acc *= &base;
        }
        base = &base * &base;
        k >>= 1;
    }
    acc
}

/// Exact value of the single-wavelength CCR form.
pub fn ber_ccr_no_wdm_exact(cfg: &CcrConfig) -> BigRational {
    let n = cfg.users() as u64;
    let s = cfg.threshold() as u64;
    if s > n - 1 {
        return BigRational::zero();
    }
    let p = cfg.hit_probability_exact();
    let mut acc = BigRational::zero();
    for i in s..=n - 1 {
        acc += binomial_pmf(n - 1, i, &p);
    }
    acc / BigRational::from_integer(BigInt::from(2))
}

/// Exact value of the one-interferer CCR form.
pub fn ber_ccr_one_interferer_exact(cfg: &CcrConfig, alpha: Alpha) -> BigRational {
    let n = cfg.users() as u64;
    let s = cfg.threshold() as u64;
    let p = cfg.hit_probability_exact();
    let (b, a) = (alpha.numer() as u128, alpha.denom() as u128);
    let mut acc = BigRational::zero();
    for i in 0..=n - 1 {
        let low = if i >= s {
            0
        } else {
            let need = ceil_div(a * (s - i) as u128, b);
            if need > n as u128 {
                continue;
            }
            need as u64
        };
        let outer = binomial_pmf(n - 1, i, &p);
        for h in low..=n {
            acc += &outer * binomial_pmf(n, h, &p);
        }
    }
    acc / BigRational::from_integer(BigInt::from(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::EvalMode;

    #[test]
    fn binomials() {
        assert_eq!(big_binomial(5, 2), BigUint::from(10u32));
        assert_eq!(big_binomial(31, 2), BigUint::from(465u32));
        assert_eq!(big_binomial(3, 5), BigUint::zero());
    }

    #[test]
    fn no_wdm_exact_two_users() {
        let cfg = CcrConfig::new(64, 2, 2, 1, EvalMode::Strict).unwrap();
        assert_eq!(
            ber_ccr_no_wdm_exact(&cfg),
            BigRational::new(BigInt::from(1), BigInt::from(64))
        );
    }
}

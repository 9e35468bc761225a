//! Exact enumeration of the decision-variable model in big-rational
//! arithmetic. No closed-form algebra is reused here: the CCR path sums the
//! joint pmf of the hit counts directly, and the PIC path walks both receiver
//! stages from first principles. These are the oracles the log-domain closed
//! forms are measured against.

use super::SimError;
use crate::analytic::rational::{big_binomial, binomial_pmf};
use crate::analytic::{CcrConfig, InterferenceProfile, PicConfig};
use crate::numeric::Alpha;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Support-size guards: the joint support grows as N * (N+1)^channels.
pub const ENUM_CCR_MAX_USERS: u32 = 12;
pub const ENUM_CCR_MAX_CHANNELS: usize = 4;
pub const ENUM_PIC_MAX_USERS: u32 = 6;

fn pow_biguint(base: &BigUint, exp: u64) -> BigUint {
    base.pow(exp as u32)
}

fn checked_lattice(alphas: &[Alpha]) -> Result<(u128, Vec<u128>), SimError> {
    let mut unit: u128 = 1;
    for alpha in alphas {
        let d = alpha.denom() as u128;
        let g = num_integer::gcd(unit, d);
        unit = (unit / g).checked_mul(d).ok_or(SimError::LatticeOverflow {
            unit: u128::MAX,
            cap: u64::MAX,
        })?;
    }
    let weights = alphas
        .iter()
        .map(|a| a.numer() as u128 * (unit / a.denom() as u128))
        .collect();
    Ok((unit, weights))
}

/// Exhaustive sum of the joint pmf of (I0, I1, ..., Ip) over the event
/// I0 + sum_j alpha_j I_j >= S, halved. I0 ~ Bin(N-1, p), each channel
/// I_j ~ Bin(N, p) with p = W^2/(2F), all independent. Exact: probabilities
/// are accumulated as big integers over the common power-of-(2F) denominator.
pub fn enumerate_ccr_exact(
    cfg: &CcrConfig,
    profile: &InterferenceProfile,
) -> Result<BigRational, SimError> {
    if cfg.users() > ENUM_CCR_MAX_USERS {
        return Err(SimError::EnumerationUsers {
            got: cfg.users(),
            cap: ENUM_CCR_MAX_USERS,
        });
    }
    if profile.len() > ENUM_CCR_MAX_CHANNELS {
        return Err(SimError::EnumerationChannels {
            got: profile.len(),
            cap: ENUM_CCR_MAX_CHANNELS,
        });
    }
    let n = cfg.users() as u64;
    let s = cfg.threshold() as u64;
    let w2 = BigUint::from(cfg.weight() as u64 * cfg.weight() as u64);
    let two_f = BigUint::from(2 * cfg.length() as u64);
    let miss = &two_f - &w2;

    // Joint pmf numerators over denominators (2F)^(N-1) and (2F)^N.
    let target: Vec<BigUint> = (0..n)
        .map(|i| big_binomial(n - 1, i) * pow_biguint(&w2, i) * pow_biguint(&miss, n - 1 - i))
        .collect();
    let channel: Vec<BigUint> = (0..=n)
        .map(|h| big_binomial(n, h) * pow_biguint(&w2, h) * pow_biguint(&miss, n - h))
        .collect();
    let channel_total = pow_biguint(&two_f, n);

    let (unit, weights) = checked_lattice(profile.alphas())?;
    let s_units = s as u128 * unit;

    struct Walker<'a> {
        n: u64,
        s_units: u128,
        weights: &'a [u128],
        channel: &'a [BigUint],
        channel_total: &'a BigUint,
        sum: BigUint,
    }

    impl Walker<'_> {
        fn walk(&mut self, depth: usize, acc_units: u128, partial: BigUint) {
            if acc_units >= self.s_units {
                // Every completion of this prefix crosses the threshold; the
                // remaining channels contribute their full mass.
                let mut mass = partial;
                for _ in depth..self.weights.len() {
                    mass *= self.channel_total;
                }
                self.sum += mass;
                return;
            }
            if depth == self.weights.len() {
                return;
            }
            for h in 0..=self.n {
                self.walk(
                    depth + 1,
                    acc_units + self.weights[depth] * h as u128,
                    &partial * &self.channel[h as usize],
                );
            }
        }
    }

    let mut walker = Walker {
        n,
        s_units,
        weights: &weights,
        channel: &channel,
        channel_total: &channel_total,
        sum: BigUint::zero(),
    };
    for i in 0..n {
        walker.walk(0, i as u128 * unit, target[i as usize].clone());
    }
    let sum = walker.sum;
    let denom = BigUint::from(2u32)
        * pow_biguint(&two_f, n - 1)
        * pow_biguint(&channel_total, profile.len() as u64);
    Ok(BigRational::new(BigInt::from(sum), BigInt::from(denom)))
}

/// Tail masses of Binomial(n, t): `tail[k] = P(X >= k)` for k in 0..=n+1.
fn binomial_tails(n: u64, t: &BigRational) -> Vec<BigRational> {
    let mut tail = vec![BigRational::zero(); n as usize + 2];
    for k in (0..=n).rev() {
        tail[k as usize] = &tail[k as usize + 1] + binomial_pmf(n, k, t);
    }
    tail
}

/// Smallest integer count k with base + k * (b/a) >= bound, clamped to
/// [0, limit + 1]; a count of limit + 1 means "never".
fn first_crossing(base: i128, bound: i128, alpha: Option<Alpha>, limit: u64) -> u64 {
    match alpha {
        None => {
            if base >= bound {
                0
            } else {
                limit + 1
            }
        }
        Some(alpha) => {
            let (b, a) = (alpha.numer() as i128, alpha.denom() as i128);
            let need = (bound - base) * a;
            if need <= 0 {
                return 0;
            }
            let k = need.div_euclid(b) + i128::from(need.rem_euclid(b) != 0);
            if k > limit as i128 {
                limit + 1
            } else {
                k as u64
            }
        }
    }
}

/// Stage-1 detection probability P(base + A + alpha*B >= S1) with
/// A ~ Bin(na, r) same-channel hits and B ~ Bin(nb, r) cross-channel hits.
fn stage1_tail(
    base: u64,
    na: u64,
    nb: u64,
    r: &BigRational,
    alpha: Option<Alpha>,
    s1: u64,
) -> BigRational {
    let b_tail = binomial_tails(nb, r);
    let mut total = BigRational::zero();
    for a2 in 0..=na {
        let k = first_crossing((base + a2) as i128, s1 as i128, alpha, nb);
        if k <= nb {
            total += binomial_pmf(na, a2, r) * &b_tail[k as usize];
        }
    }
    total
}

/// Exact error probability of the two-stage PIC receiver, walked from first
/// principles (independent of the published closed form).
///
/// Conditioned on the transmitted bits, the stage-1 estimates of the N-1
/// undesired users are independent: each uses its own pairwise hit
/// indicators. A user that sent 1 is missed with probability 1 - q+, a user
/// that sent 0 is falsely detected with probability q-, and each residual
/// reaches the desired correlator only on a positional hit (rate R), giving
/// independent binomial counts of uncancelled (+1) and over-cancelled (-1)
/// units, plus the uncancelled cross-channel hits.
pub fn enumerate_pic_exact(cfg: &PicConfig, alpha: Option<Alpha>) -> Result<BigRational, SimError> {
    if cfg.users() > ENUM_PIC_MAX_USERS {
        return Err(SimError::EnumerationUsers {
            got: cfg.users(),
            cap: ENUM_PIC_MAX_USERS,
        });
    }
    let n = cfg.users() as u64;
    let w = cfg.weight() as u64;
    let s1 = cfg.threshold1() as u64;
    let s2 = cfg.threshold2() as i128;
    let r = cfg.stage_rate_exact();
    let cross_users = if alpha.is_some() { n } else { 0 };
    let half = BigRational::new(BigInt::one(), BigInt::from(2));

    let pow_half = |k: u64| -> BigRational {
        BigRational::new(BigInt::one(), BigInt::from(BigUint::one() << k as u32))
    };

    let mut total = BigRational::zero();
    for desired_bit in 0..=1u64 {
        for ones in 0..=n - 1 {
            // `ones` same-channel interferers sent 1, `zeros` sent 0.
            let zeros = n - 1 - ones;
            let p_ones = BigRational::from_integer(BigInt::from(big_binomial(n - 1, ones)))
                * pow_half(n - 1);
            for c in 0..=cross_users {
                // Only the c cross users that sent 1 can hit the stage-2
                // correlator.
                let cross_tail = binomial_tails(c, &r);
                let p_c = BigRational::from_integer(BigInt::from(big_binomial(cross_users, c)))
                    * pow_half(cross_users);
                // Stage-1 outcome rates, conditioned on the bit pattern. A
                // 1-sender's correlator sees the other ones plus the desired
                // bit; a 0-sender's sees all ones plus the desired bit.
                let miss_hit_rate = if ones > 0 {
                    let detect = stage1_tail(w, ones - 1 + desired_bit, c, &r, alpha, s1);
                    (BigRational::one() - detect) * &r
                } else {
                    BigRational::zero()
                };
                let ghost_hit_rate = if zeros > 0 {
                    stage1_tail(0, ones + desired_bit, c, &r, alpha, s1) * &r
                } else {
                    BigRational::zero()
                };
                let pmf_up: Vec<BigRational> = (0..=ones)
                    .map(|u| binomial_pmf(ones, u, &miss_hit_rate))
                    .collect();
                let pmf_down: Vec<BigRational> = (0..=zeros)
                    .map(|v| binomial_pmf(zeros, v, &ghost_hit_rate))
                    .collect();
                // Error probability given the counts: stage-2 compares
                // W b + up - down + alpha * g against S2.
                let mut p_err = BigRational::zero();
                for (u, pu) in pmf_up.iter().enumerate() {
                    for (v, pv) in pmf_down.iter().enumerate() {
                        let base = (w * desired_bit + u as u64) as i128 - v as i128;
                        let k = first_crossing(base, s2, alpha, c);
                        let decide_one = if k <= c {
                            cross_tail[k as usize].clone()
                        } else {
                            BigRational::zero()
                        };
                        let err = if desired_bit == 1 {
                            BigRational::one() - decide_one
                        } else {
                            decide_one
                        };
                        p_err += pu * pv * err;
                    }
                }
                total += &half * p_ones.clone() * p_c * p_err;
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::rational::ber_ccr_no_wdm_exact;
    use crate::analytic::{
        ber_ccr_multi_interferer, ber_ccr_one_interferer, CcrConfig, EvalMode, InterferenceProfile,
        PicConfig,
    };
    use crate::numeric::relative_error;

    fn ccr(f: u32, w: u32, n: u32, s: u32) -> CcrConfig {
        CcrConfig::new(f, w, n, s, EvalMode::Strict).unwrap()
    }

    fn alpha(b: u64, a: u64) -> Alpha {
        Alpha::new(b, a).unwrap()
    }

    #[test]
    fn hand_checkable_point_mass() {
        let cfg = ccr(16, 2, 2, 2);
        let prof = InterferenceProfile::uniform(alpha(1, 2), 1);
        let exact = enumerate_ccr_exact(&cfg, &prof).unwrap();
        assert_eq!(exact, BigRational::new(BigInt::from(1), BigInt::from(1024)));
    }

    #[test]
    fn empty_profile_is_the_binomial_tail() {
        for (f, w, n, s) in [(64u32, 2u32, 8u32, 2u32), (32, 2, 5, 1), (16, 3, 2, 3)] {
            let cfg = ccr(f, w, n, s);
            let via_joint = enumerate_ccr_exact(&cfg, &InterferenceProfile::no_wdm()).unwrap();
            assert_eq!(via_joint, ber_ccr_no_wdm_exact(&cfg));
        }
    }

    #[test]
    fn closed_forms_match_enumeration() {
        let cfg = ccr(64, 2, 4, 2);
        let prof = InterferenceProfile::new(vec![alpha(1, 2), alpha(1, 2)]);
        let exact = enumerate_ccr_exact(&cfg, &prof).unwrap();
        // Frozen from this 100-term joint-support sum (I0 in 0..=3, two
        // channels in 0..=4 each).
        assert_eq!(
            exact,
            BigRational::new(
                BigInt::from(90893357659369u64),
                BigInt::from(36028797018963968u64)
            )
        );
        let multi = ber_ccr_multi_interferer(&cfg, &prof).unwrap();
        assert!(relative_error(multi.value(), &exact) < 1e-13);

        let one = InterferenceProfile::uniform(alpha(3, 4), 1);
        let exact = enumerate_ccr_exact(&cfg, &one).unwrap();
        let closed = ber_ccr_one_interferer(&cfg, alpha(3, 4));
        assert!(relative_error(closed.value(), &exact) < 1e-13);
    }

    #[test]
    fn enumeration_guards() {
        let cfg = CcrConfig::new(4096, 2, 13, 2, EvalMode::Strict).unwrap();
        assert_eq!(
            enumerate_ccr_exact(&cfg, &InterferenceProfile::no_wdm()).unwrap_err(),
            SimError::EnumerationUsers { got: 13, cap: 12 }
        );
        let cfg = ccr(64, 2, 4, 2);
        let prof = InterferenceProfile::uniform(alpha(1, 2), 5);
        assert_eq!(
            enumerate_ccr_exact(&cfg, &prof).unwrap_err(),
            SimError::EnumerationChannels { got: 5, cap: 4 }
        );
        let pic = PicConfig::new(4096, 2, 7, 2, 2, EvalMode::Strict).unwrap();
        assert_eq!(
            enumerate_pic_exact(&pic, None).unwrap_err(),
            SimError::EnumerationUsers { got: 7, cap: 6 }
        );
    }

    #[test]
    fn lone_pic_user_never_errs() {
        let cfg = PicConfig::new(64, 2, 1, 2, 2, EvalMode::Strict).unwrap();
        assert!(enumerate_pic_exact(&cfg, None).unwrap().is_zero());
    }

    #[test]
    fn pic_error_rate_decreases_with_stage2_threshold_when_stage1_never_misses() {
        // With S1 = W the first stage detects every user that actually
        // transmitted, so ghost cancellations are the only stage-2 downside
        // and raising S2 within [1, W] only shrinks the error event.
        for (f, n) in [(16u32, 4u32), (16, 6), (64, 5), (32, 6)] {
            let mut last = BigRational::one();
            for s2 in 1..=2 {
                let cfg = PicConfig::new(f, 2, n, 2, s2, EvalMode::Strict).unwrap();
                let v = enumerate_pic_exact(&cfg, Some(alpha(1, 2))).unwrap();
                assert!(v <= last, "S2={s2} grew the error rate at F={f} N={n}");
                last = v;
            }
        }
    }

    #[test]
    fn pic_stage2_threshold_needs_care_when_stage1_false_alarms() {
        // With S1 < W the first stage false-alarms freely, and the resulting
        // over-cancellation turns a higher S2 into extra misses: the stage-2
        // threshold genuinely has to be set with care.
        let low = PicConfig::new(16, 2, 4, 1, 1, EvalMode::Strict).unwrap();
        let high = PicConfig::new(16, 2, 4, 1, 2, EvalMode::Strict).unwrap();
        let v1 = enumerate_pic_exact(&low, Some(alpha(1, 2))).unwrap();
        let v2 = enumerate_pic_exact(&high, Some(alpha(1, 2))).unwrap();
        assert!(v2 > v1);
    }

    #[test]
    fn first_crossing_cases() {
        let half = Some(alpha(1, 2));
        assert_eq!(first_crossing(2, 2, half, 5), 0);
        assert_eq!(first_crossing(1, 2, half, 5), 2);
        assert_eq!(first_crossing(0, 2, half, 5), 4);
        assert_eq!(first_crossing(-1, 2, half, 5), 6); // never
        assert_eq!(first_crossing(1, 2, None, 5), 6);
        assert_eq!(first_crossing(2, 2, None, 5), 0);
        assert_eq!(first_crossing(0, 2, Some(alpha(2, 3)), 9), 3);
    }
}

//! The PIC receiver's closed-form error expression, transcribed exactly as
//! published and evaluated without correction.
//!
//! The expression nests a stage-1 mis-cancellation rate P_I inside a stage-2
//! tail, with R = W^2/F and a round-half-away-from-zero bracket on the
//! fractional summation bounds. Several of its exponents do not normalize as
//! probabilities — P_I can exceed 1, which drags (1 - P_I) negative — so the
//! whole thing is evaluated with signed log-magnitude arithmetic and the
//! result is flagged `formula_only`; out-of-range values are reported, never
//! clamped. The trustworthy first-principles PIC reference is
//! [`crate::mcsim::enumerate_pic_exact`].

use super::{BerFlags, BerValue, PicConfig};
use crate::numeric::{ln_choose, round_half_away, Alpha, SignedLog};

/// Rounded (s_num - j) / alpha in exact integer arithmetic, as a signed bound.
fn rounded_bound(alpha: Alpha, numerator: i64) -> i128 {
    let scaled = alpha.denom() as i128 * numerator as i128;
    round_half_away(scaled, alpha.numer() as i128)
}

/// Stage-1 mis-cancellation rate from the published expression, for a given
/// count n1 of same-channel users that transmitted 1.
fn stage1_rate(cfg: &PicConfig, alpha: Alpha, n1: u64) -> SignedLog {
    let n = cfg.users() as u64;
    let r = cfg.stage_rate();
    let ln_r = r.ln();
    let one_minus_r = SignedLog::from_f64(1.0 - r);
    let s1 = cfg.threshold1() as i64;
    let mut terms = Vec::new();
    for j in 0..=n1 {
        let bound = rounded_bound(alpha, s1 - j as i64).max(0);
        if bound > n as i128 {
            continue;
        }
        for k0 in bound as u64..=n {
            let exponent = n + n1 - j - k0;
            let magnitude =
                SignedLog::from_ln(ln_choose(n, j) + ln_choose(n, k0) + (j + k0) as f64 * ln_r);
            terms.push(magnitude.mul(&one_minus_r.powi(exponent)));
        }
    }
    SignedLog::from_ln(ln_r).mul(&SignedLog::sum(terms))
}

/// Bracketed stage-2 factor: the k1 sum up to round((S2 + n2 - W)/alpha)
/// plus the k2 tail from round((S2 + n2)/alpha).
fn stage2_bracket(cfg: &PicConfig, alpha: Alpha, n2: u64) -> SignedLog {
    let n = cfg.users() as u64;
    let r = cfg.stage_rate();
    let ln_r = r.ln();
    let one_minus_r = SignedLog::from_f64(1.0 - r);
    let s2 = cfg.threshold2() as i64;
    let w = cfg.weight() as i64;
    let mut terms = Vec::new();

    let k1_high = rounded_bound(alpha, s2 + n2 as i64 - w);
    if k1_high >= 0 {
        for k1 in 0..=(k1_high as u64).min(n) {
            let magnitude = SignedLog::from_ln(ln_choose(n, k1) + k1 as f64 * ln_r);
            terms.push(magnitude.mul(&one_minus_r.powi(n + k1)));
        }
    }

    let k2_low = rounded_bound(alpha, s2 + n2 as i64).max(0);
    if k2_low <= n as i128 {
        for k2 in k2_low as u64..=n {
            let magnitude = SignedLog::from_ln(ln_choose(n, k2) + k2 as f64 * ln_r);
            terms.push(magnitude.mul(&one_minus_r.powi(n + k2)));
        }
    }

    SignedLog::sum(terms)
}

/// Evaluates the published two-stage PIC error expression verbatim, without
/// correction.
///
/// The result reproduces the formula, not necessarily a probability; check
/// the `out_of_range` flag before treating it as one.
pub fn ber_pic_closed_form(cfg: &PicConfig, alpha: Alpha) -> BerValue {
    let n = cfg.users() as u64;
    let w = cfg.weight() as i64;
    let s2 = cfg.threshold2() as i64;
    let mut outer = Vec::new();
    for n1 in 0..=n - 1 {
        let p_i = stage1_rate(cfg, alpha, n1);
        let one_minus_p_i = p_i.one_minus();
        let n2_low = (w - s2 + 1).max(0) as u64;
        let n2_high = n - n1 - 1; // C(N-1-n1, n2) vanishes beyond this anyway
        if n2_high < n2_low {
            continue;
        }
        for n2 in n2_low..=n2_high {
            let ln_comb = ln_choose(n - 1, n1) + ln_choose(n - 1 - n1, n2);
            let base = SignedLog::from_ln(ln_comb)
                .mul(&p_i.powi(n2))
                .mul(&one_minus_p_i.powi(n - n1 - n2 - 1));
            outer.push(base.mul(&stage2_bracket(cfg, alpha, n2)));
        }
    }
    let half_pow_n = SignedLog::from_ln(n as f64 * crate::numeric::LN_HALF);
    let total = half_pow_n.mul(&SignedLog::sum(outer));
    let flags = BerFlags {
        permissive: cfg.outside_strict(),
        formula_only: true,
        out_of_range: false, // recomputed from the value below
    };
    BerValue::from_signed(total.to_f64(), total.ln_abs(), flags)
}

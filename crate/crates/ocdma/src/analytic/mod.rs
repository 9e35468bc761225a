//! Closed-form error probabilities for OOC links under multiple-access and
//! adjacent-wavelength interference.
//!
//! The CCR forms reduce to tail sums of independent binomials: the desired
//! channel contributes Binomial(N-1, p) correlation hits with p = W^2/(2F),
//! and each interfering wavelength channel contributes Binomial(N, p) hits
//! scaled by its detected power fraction alpha. Every sum here is evaluated
//! in log domain with exact integer/rational threshold bounds, so results
//! stay finite and positive down to (and far below) the 1e-12 regime the
//! link budget targets.
//!
//! The PIC closed form is transcribed as-is in [`ber_pic_closed_form`]; its
//! normalization is questionable, so results carry a `formula_only` flag and
//! the first-principles reference lives in [`crate::mcsim`].

mod pic;
pub mod rational;

pub use pic::ber_pic_closed_form;

use crate::numeric::{ceil_div, ln_binomial_pmf, log_add_exp, Alpha, LogSum, LN_HALF};
use crate::ooc;
use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};

/// Strict mode enforces the regime in which the closed forms are exact
/// derivations (threshold at most the code weight, users within the family
/// cardinality bound). Permissive mode evaluates the same expressions at
/// out-of-regime parameters and tags the results.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EvalMode {
    Strict,
    Permissive,
}

impl EvalMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            EvalMode::Strict => "strict",
            EvalMode::Permissive => "permissive",
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum AnalyticError {
    #[error("code length must be at least 2, got {0}")]
    InvalidLength(u32),
    #[error("code weight must be at least 2, got {0}")]
    InvalidWeight(u32),
    #[error("W^2 = {w_squared} exceeds F = {length}; the hit model needs W^2 <= F")]
    HitModelInvalid { w_squared: u64, length: u32 },
    #[error("need at least one active user")]
    NoUsers,
    #[error("decision threshold must be at least 1")]
    ZeroThreshold,
    #[error("strict mode requires S <= W, got S = {threshold}, W = {weight}")]
    ThresholdAboveWeight { threshold: u32, weight: u32 },
    #[error("strict mode caps users at the cardinality bound {bound}, got {users}")]
    UsersAboveBound { users: u32, bound: u64 },
    #[error("interference profile is empty; use the no-WDM form")]
    EmptyProfile,
    #[error("at most {max} interfering channels are supported, got {got}")]
    TooManyInterferers { got: usize, max: usize },
    #[error("threshold lattice needs {cells} cells (cap {cap}); reduce coefficient denominators")]
    LatticeTooLarge { cells: u128, cap: u128 },
    #[error("spectral widths must be positive and finite")]
    NonPositiveWidth,
    #[error("interferer channel offset must be nonzero")]
    ZeroOffset,
}

/// Hard cap on interfering wavelength channels in the exact multi-channel
/// form; the joint support grows combinatorially past this.
pub const MAX_INTERFERING_CHANNELS: usize = 8;

const LATTICE_CELL_CAP: u128 = 1 << 22;

/// Conventional correlation receiver parameters: code (F, W), N active users
/// on the desired wavelength, and decision threshold S.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CcrConfig {
    length: u32,
    weight: u32,
    users: u32,
    threshold: u32,
    mode: EvalMode,
    outside_strict: bool,
}

fn check_code(length: u32, weight: u32) -> Result<(), AnalyticError> {
    if length < 2 {
        return Err(AnalyticError::InvalidLength(length));
    }
    if weight < 2 {
        return Err(AnalyticError::InvalidWeight(weight));
    }
    let w_squared = weight as u64 * weight as u64;
    if w_squared > length as u64 {
        return Err(AnalyticError::HitModelInvalid { w_squared, length });
    }
    Ok(())
}

impl CcrConfig {
    pub fn new(
        length: u32,
        weight: u32,
        users: u32,
        threshold: u32,
        mode: EvalMode,
    ) -> Result<Self, AnalyticError> {
        check_code(length, weight)?;
        if users == 0 {
            return Err(AnalyticError::NoUsers);
        }
        if threshold == 0 {
            return Err(AnalyticError::ZeroThreshold);
        }
        let bound = ooc::max_cardinality(length, weight).expect("checked code");
        let above_weight = threshold > weight;
        let above_bound = users as u64 > bound;
        if mode == EvalMode::Strict {
            if above_weight {
                return Err(AnalyticError::ThresholdAboveWeight { threshold, weight });
            }
            if above_bound {
                return Err(AnalyticError::UsersAboveBound { users, bound });
            }
        }
        Ok(CcrConfig {
            length,
            weight,
            users,
            threshold,
            mode,
            outside_strict: above_weight || above_bound,
        })
    }

    pub fn length(&self) -> u32 {
        self.length
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn users(&self) -> u32 {
        self.users
    }

    pub fn threshold(&self) -> u32 {
        self.threshold
    }

    pub fn mode(&self) -> EvalMode {
        self.mode
    }

    /// True when the parameters are only admissible under permissive rules.
    pub fn outside_strict(&self) -> bool {
        self.outside_strict
    }

    /// Per-interfering-user hit probability p = W^2 / (2F).
    pub fn hit_probability(&self) -> f64 {
        (self.weight as f64 * self.weight as f64) / (2.0 * self.length as f64)
    }

    pub fn hit_probability_exact(&self) -> BigRational {
        Ratio::new(
            BigInt::from(self.weight as u64 * self.weight as u64),
            BigInt::from(2 * self.length as u64),
        )
    }

    fn flags(&self) -> BerFlags {
        BerFlags {
            permissive: self.outside_strict,
            ..BerFlags::default()
        }
    }
}

/// Two-stage PIC receiver parameters: stage-1 threshold S1 used to estimate
/// the other same-channel users, stage-2 threshold S2 for the final decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PicConfig {
    length: u32,
    weight: u32,
    users: u32,
    threshold1: u32,
    threshold2: u32,
    mode: EvalMode,
    outside_strict: bool,
}

impl PicConfig {
    pub fn new(
        length: u32,
        weight: u32,
        users: u32,
        threshold1: u32,
        threshold2: u32,
        mode: EvalMode,
    ) -> Result<Self, AnalyticError> {
        check_code(length, weight)?;
        if users == 0 {
            return Err(AnalyticError::NoUsers);
        }
        if threshold1 == 0 || threshold2 == 0 {
            return Err(AnalyticError::ZeroThreshold);
        }
        let bound = ooc::max_cardinality(length, weight).expect("checked code");
        let above_bound = users as u64 > bound;
        if mode == EvalMode::Strict && above_bound {
            return Err(AnalyticError::UsersAboveBound { users, bound });
        }
        Ok(PicConfig {
            length,
            weight,
            users,
            threshold1,
            threshold2,
            mode,
            outside_strict: above_bound,
        })
    }

    pub fn length(&self) -> u32 {
        self.length
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn users(&self) -> u32 {
        self.users
    }

    pub fn threshold1(&self) -> u32 {
        self.threshold1
    }

    pub fn threshold2(&self) -> u32 {
        self.threshold2
    }

    pub fn mode(&self) -> EvalMode {
        self.mode
    }

    pub fn outside_strict(&self) -> bool {
        self.outside_strict
    }

    /// Pairwise positional hit rate R = W^2 / F of the cancellation stage.
    pub fn stage_rate(&self) -> f64 {
        (self.weight as f64 * self.weight as f64) / self.length as f64
    }

    pub fn stage_rate_exact(&self) -> BigRational {
        Ratio::new(
            BigInt::from(self.weight as u64 * self.weight as u64),
            BigInt::from(self.length as u64),
        )
    }
}

/// Detected power fractions of the interfering wavelength channels, one per
/// channel; each channel is assumed to carry the same number of users as the
/// desired one. Empty means no WDM neighbors.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct InterferenceProfile {
    alphas: Vec<Alpha>,
}

impl InterferenceProfile {
    pub fn no_wdm() -> Self {
        Self::default()
    }

    pub fn new(alphas: Vec<Alpha>) -> Self {
        InterferenceProfile { alphas }
    }

    /// `count` channels at the same coefficient.
    pub fn uniform(alpha: Alpha, count: usize) -> Self {
        InterferenceProfile {
            alphas: vec![alpha; count],
        }
    }

    pub fn alphas(&self) -> &[Alpha] {
        &self.alphas
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }
}

/// Provenance attached to every evaluated probability.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BerFlags {
    /// Parameters were only admissible under permissive rules.
    pub permissive: bool,
    /// Value comes from a transcribed closed form whose derivation is not
    /// trusted; compare against the first-principles routes in `mcsim`.
    pub formula_only: bool,
    /// Value fell outside [0, 1]; reported as-is, never clamped.
    pub out_of_range: bool,
}

impl BerFlags {
    pub fn any(&self) -> bool {
        self.permissive || self.formula_only || self.out_of_range
    }
}

/// An error probability carried both linearly and as a natural log, so the
/// deep-tail regime stays representable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BerValue {
    value: f64,
    log_value: f64,
    flags: BerFlags,
}

impl BerValue {
    fn from_ln(log_value: f64, flags: BerFlags) -> Self {
        BerValue {
            value: log_value.exp(),
            log_value,
            flags,
        }
    }

    fn zero(flags: BerFlags) -> Self {
        BerValue {
            value: 0.0,
            log_value: f64::NEG_INFINITY,
            flags,
        }
    }

    fn from_signed(value: f64, log_abs: f64, mut flags: BerFlags) -> Self {
        flags.out_of_range = !(0.0..=1.0).contains(&value);
        BerValue {
            value,
            log_value: log_abs,
            flags,
        }
    }

    /// Probability (may leave [0, 1] only for `formula_only` diagnostics).
    pub fn value(&self) -> f64 {
        self.value
    }

    /// Natural log of the magnitude; finite whenever the value is nonzero.
    pub fn log_value(&self) -> f64 {
        self.log_value
    }

    pub fn log10(&self) -> f64 {
        self.log_value / std::f64::consts::LN_10
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0.0
    }

    pub fn flags(&self) -> BerFlags {
        self.flags
    }
}

/// Single-wavelength CCR error probability: half the upper tail of
/// Binomial(N-1, p) at the threshold. Empty tail (S > N-1) is exactly zero.
pub fn ber_ccr_no_wdm(cfg: &CcrConfig) -> BerValue {
    let n = cfg.users as u64;
    let s = cfg.threshold as u64;
    if s > n - 1 {
        return BerValue::zero(cfg.flags());
    }
    let p = cfg.hit_probability();
    let (ln_p, ln_q) = (p.ln(), (-p).ln_1p());
    let mut acc = LogSum::new();
    for i in s..=n - 1 {
        acc.push(ln_binomial_pmf(n - 1, i, ln_p, ln_q));
    }
    BerValue::from_ln(acc.ln().min(0.0) + LN_HALF, cfg.flags())
}

/// CCR error probability with one adjacent-channel interferer at detected
/// power fraction alpha: half of P(I1 + alpha*I2 >= S) with I1 ~ Bin(N-1, p)
/// and I2 ~ Bin(N, p). The inner summation bound is the exact integer
/// ceil(a(S-i)/b), clamped at zero.
pub fn ber_ccr_one_interferer(cfg: &CcrConfig, alpha: Alpha) -> BerValue {
    let n = cfg.users as u64;
    let s = cfg.threshold as u64;
    let p = cfg.hit_probability();
    let (ln_p, ln_q) = (p.ln(), (-p).ln_1p());
    let (b, a) = (alpha.numer() as u128, alpha.denom() as u128);
    let mut acc = LogSum::new();
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
        let outer = ln_binomial_pmf(n - 1, i, ln_p, ln_q);
        for h in low..=n {
            acc.push(outer + ln_binomial_pmf(n, h, ln_p, ln_q));
        }
    }
    BerValue::from_ln(acc.ln().min(0.0) + LN_HALF, cfg.flags())
}

/// General multi-channel CCR error probability: half of
/// P(I0 + sum_j alpha_j * I_j >= S). Every channel's contribution enters
/// with positive sign. Evaluated as an exact saturating convolution on the
/// integer lattice obtained by clearing the alpha denominators, accumulated
/// in log domain; a single-entry profile reduces to the one-interferer form
/// bit for bit.
pub fn ber_ccr_multi_interferer(
    cfg: &CcrConfig,
    profile: &InterferenceProfile,
) -> Result<BerValue, AnalyticError> {
    let alphas = profile.alphas();
    if alphas.is_empty() {
        return Err(AnalyticError::EmptyProfile);
    }
    if alphas.len() > MAX_INTERFERING_CHANNELS {
        return Err(AnalyticError::TooManyInterferers {
            got: alphas.len(),
            max: MAX_INTERFERING_CHANNELS,
        });
    }
    if alphas.len() == 1 {
        return Ok(ber_ccr_one_interferer(cfg, alphas[0]));
    }
    let lattice = ThresholdLattice::build(cfg.threshold, alphas)?;
    let n = cfg.users as u64;
    let p = cfg.hit_probability();
    let (ln_p, ln_q) = (p.ln(), (-p).ln_1p());

    let top = lattice.saturation_index();
    let mut dist = vec![f64::NEG_INFINITY; top + 1];
    for i in 0..=n - 1 {
        let idx = lattice.clamp(i as u128 * lattice.unit as u128);
        dist[idx] = log_add_exp(dist[idx], ln_binomial_pmf(n - 1, i, ln_p, ln_q));
    }
    let channel_pmf: Vec<f64> = (0..=n).map(|k| ln_binomial_pmf(n, k, ln_p, ln_q)).collect();
    for &w in &lattice.weights {
        let mut next = vec![f64::NEG_INFINITY; top + 1];
        for (v, &lv) in dist.iter().enumerate() {
            if lv == f64::NEG_INFINITY {
                continue;
            }
            if v == top {
                // Saturated mass stays saturated regardless of further hits.
                next[top] = log_add_exp(next[top], lv);
                continue;
            }
            for (k, &lpk) in channel_pmf.iter().enumerate() {
                let idx = lattice.clamp(v as u128 + w as u128 * k as u128);
                next[idx] = log_add_exp(next[idx], lv + lpk);
            }
        }
        dist = next;
    }
    Ok(BerValue::from_ln(dist[top].min(0.0) + LN_HALF, cfg.flags()))
}

/// Integer lattice for exact threshold comparisons: all coefficients are put
/// over the common denominator `unit`, and any weighted sum at or above
/// S * unit is folded into one saturation bucket.
pub(crate) struct ThresholdLattice {
    pub unit: u64,
    pub weights: Vec<u64>,
    threshold_units: u128,
}

impl ThresholdLattice {
    pub fn build(threshold: u32, alphas: &[Alpha]) -> Result<Self, AnalyticError> {
        let mut unit: u128 = 1;
        for alpha in alphas {
            unit = num_integer::lcm(unit, alpha.denom() as u128);
            if unit > u64::MAX as u128 {
                return Err(AnalyticError::LatticeTooLarge {
                    cells: unit,
                    cap: LATTICE_CELL_CAP,
                });
            }
        }
        let threshold_units = threshold as u128 * unit;
        if threshold_units + 1 > LATTICE_CELL_CAP {
            return Err(AnalyticError::LatticeTooLarge {
                cells: threshold_units + 1,
                cap: LATTICE_CELL_CAP,
            });
        }
        let weights = alphas
            .iter()
            .map(|alpha| alpha.numer() * (unit as u64 / alpha.denom()))
            .collect();
        Ok(ThresholdLattice {
            unit: unit as u64,
            weights,
            threshold_units,
        })
    }

    pub fn saturation_index(&self) -> usize {
        self.threshold_units as usize
    }

    pub fn clamp(&self, lattice_value: u128) -> usize {
        lattice_value.min(self.threshold_units) as usize
    }
}

/// Captured power fraction of a Gaussian-spectrum interferer seen through an
/// ideal rectangular demux filter centered on the desired channel. The
/// interferer sits `offset` grid slots away on a `spacing`-nm pitch. This is
/// a declared model for mapping source spectra to interference coefficients,
/// not a derived result.
pub fn spectral_overlap_fraction(
    fwhm: f64,
    spacing: f64,
    offset: i32,
    filter_bw: f64,
) -> Result<f64, AnalyticError> {
    if !(fwhm > 0.0 && fwhm.is_finite())
        || !(spacing > 0.0 && spacing.is_finite())
        || !(filter_bw > 0.0 && filter_bw.is_finite())
    {
        return Err(AnalyticError::NonPositiveWidth);
    }
    if offset == 0 {
        return Err(AnalyticError::ZeroOffset);
    }
    let sigma = fwhm / (8.0 * std::f64::consts::LN_2).sqrt();
    let mu = offset as f64 * spacing;
    let scale = sigma * std::f64::consts::SQRT_2;
    let hi = (filter_bw / 2.0 - mu) / scale;
    let lo = (-filter_bw / 2.0 - mu) / scale;
    Ok(0.5 * (libm::erf(hi) - libm::erf(lo)))
}

/// [`spectral_overlap_fraction`] snapped to the nearest rational with
/// denominator at most 64, which is what the exact threshold machinery
/// consumes. May snap to zero for negligible overlap.
pub fn alpha_from_spectrum(
    fwhm: f64,
    spacing: f64,
    offset: i32,
    filter_bw: f64,
) -> Result<Ratio<u64>, AnalyticError> {
    let fraction = spectral_overlap_fraction(fwhm, spacing, offset, filter_bw)?;
    Ok(snap_to_rational(fraction, 64))
}

/// Nearest b/a to x in [0, 1] with denominator at most `max_denom`; exact
/// ties keep the smallest denominator.
pub fn snap_to_rational(x: f64, max_denom: u64) -> Ratio<u64> {
    let x = x.clamp(0.0, 1.0);
    let mut best = (0u64, 1u64);
    let mut best_err = f64::INFINITY;
    for a in 1..=max_denom {
        let b = ((x * a as f64).round() as u64).min(a);
        let err = (x - b as f64 / a as f64).abs();
        if err < best_err {
            best = (b, a);
            best_err = err;
        }
    }
    Ratio::new(best.0, best.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::relative_error;

    fn ccr(f: u32, w: u32, n: u32, s: u32) -> CcrConfig {
        CcrConfig::new(f, w, n, s, EvalMode::Strict).unwrap()
    }

    fn ccr_perm(f: u32, w: u32, n: u32, s: u32) -> CcrConfig {
        CcrConfig::new(f, w, n, s, EvalMode::Permissive).unwrap()
    }

    fn alpha(b: u64, a: u64) -> Alpha {
        Alpha::new(b, a).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(CcrConfig::new(64, 2, 31, 2, EvalMode::Strict).is_ok());
        assert_eq!(
            CcrConfig::new(64, 2, 32, 2, EvalMode::Strict),
            Err(AnalyticError::UsersAboveBound {
                users: 32,
                bound: 31
            })
        );
        assert_eq!(
            CcrConfig::new(64, 2, 4, 3, EvalMode::Strict),
            Err(AnalyticError::ThresholdAboveWeight {
                threshold: 3,
                weight: 2
            })
        );
        let perm = CcrConfig::new(64, 2, 32, 24, EvalMode::Permissive).unwrap();
        assert!(perm.outside_strict());
        assert_eq!(
            CcrConfig::new(8, 3, 1, 1, EvalMode::Strict),
            Err(AnalyticError::HitModelInvalid {
                w_squared: 9,
                length: 8
            })
        );
        assert!(PicConfig::new(64, 2, 4, 2, 0, EvalMode::Strict).is_err());
    }

    #[test]
    fn no_wdm_single_user_is_zero() {
        let v = ber_ccr_no_wdm(&ccr(64, 2, 1, 1));
        assert!(v.is_zero());
        assert_eq!(v.log_value(), f64::NEG_INFINITY);
    }

    #[test]
    fn no_wdm_two_users_hand_value() {
        // Half of P(Bin(1, 1/32) >= 1) = 1/64.
        let v = ber_ccr_no_wdm(&ccr(64, 2, 2, 1));
        assert!((v.value() - 1.0 / 64.0).abs() / (1.0 / 64.0) < 1e-14);
        assert!((v.log_value() - (1.0f64 / 64.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn one_interferer_hand_value() {
        // Only (I1 = 1, I2 = 2) crosses 2 with alpha = 1/2:
        // (1/8) * (1/8)^2 / 2 = 1/1024.
        let v = ber_ccr_one_interferer(&ccr(16, 2, 2, 2), alpha(1, 2));
        assert!((v.value() - 1.0 / 1024.0).abs() / (1.0 / 1024.0) < 1e-14);
    }

    #[test]
    fn tiny_alpha_recovers_no_wdm() {
        for f in [16u32, 32, 64] {
            for w in [2u32, 3] {
                if (w * w) as u64 > f as u64 {
                    continue;
                }
                for n in 2..=10u32 {
                    let bound = ooc::max_cardinality(f, w).unwrap();
                    if n as u64 > bound {
                        continue;
                    }
                    for s in 1..=w {
                        let cfg = ccr(f, w, n, s);
                        let base = ber_ccr_no_wdm(&cfg);
                        let small = ber_ccr_one_interferer(&cfg, alpha(1, n as u64 + 1));
                        if base.is_zero() {
                            assert!(small.is_zero());
                        } else {
                            let rel = ((small.value() - base.value()) / base.value()).abs();
                            assert!(rel <= 1e-12, "rel {rel} at F={f} W={w} N={n} S={s}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn interference_only_helps_the_adversary() {
        let cfg = ccr_perm(64, 2, 32, 2);
        let base = ber_ccr_no_wdm(&cfg);
        let with = ber_ccr_one_interferer(&cfg, alpha(1, 2));
        assert!(with.value() >= base.value());
        assert!(with.flags().permissive);
    }

    #[test]
    fn multi_single_entry_matches_one_interferer_bitwise() {
        let cfg = ccr(64, 2, 8, 2);
        let a = alpha(3, 4);
        let direct = ber_ccr_one_interferer(&cfg, a);
        let via_profile =
            ber_ccr_multi_interferer(&cfg, &InterferenceProfile::uniform(a, 1)).unwrap();
        assert_eq!(direct.value().to_bits(), via_profile.value().to_bits());
        assert_eq!(
            direct.log_value().to_bits(),
            via_profile.log_value().to_bits()
        );
    }

    #[test]
    fn multi_interferer_profile_order_is_irrelevant() {
        let cfg = ccr(64, 2, 6, 2);
        let p1 = InterferenceProfile::new(vec![alpha(1, 2), alpha(1, 4), alpha(3, 4)]);
        let p2 = InterferenceProfile::new(vec![alpha(3, 4), alpha(1, 2), alpha(1, 4)]);
        let v1 = ber_ccr_multi_interferer(&cfg, &p1).unwrap();
        let v2 = ber_ccr_multi_interferer(&cfg, &p2).unwrap();
        assert!((v1.log_value() - v2.log_value()).abs() < 1e-12);
    }

    #[test]
    fn multi_interferer_guards() {
        let cfg = ccr(64, 2, 4, 2);
        assert_eq!(
            ber_ccr_multi_interferer(&cfg, &InterferenceProfile::no_wdm()),
            Err(AnalyticError::EmptyProfile)
        );
        let too_many = InterferenceProfile::uniform(alpha(1, 2), 9);
        assert!(matches!(
            ber_ccr_multi_interferer(&cfg, &too_many),
            Err(AnalyticError::TooManyInterferers { got: 9, max: 8 })
        ));
    }

    #[test]
    fn more_equal_interferers_never_helps() {
        let cfg = ccr(64, 2, 6, 2);
        let mut last = ber_ccr_no_wdm(&cfg).value();
        for k in 1..=4usize {
            let prof = InterferenceProfile::uniform(alpha(1, 2), k);
            let v = ber_ccr_multi_interferer(&cfg, &prof).unwrap().value();
            assert!(v >= last * (1.0 - 1e-12), "k={k}: {v} < {last}");
            last = v;
        }
    }

    #[test]
    fn rational_route_agrees_with_log_route() {
        let cfg = ccr(32, 2, 7, 2);
        let exact = rational::ber_ccr_no_wdm_exact(&cfg);
        assert!(relative_error(ber_ccr_no_wdm(&cfg).value(), &exact) < 1e-13);
        let a = alpha(2, 3);
        let exact = rational::ber_ccr_one_interferer_exact(&cfg, a);
        assert!(relative_error(ber_ccr_one_interferer(&cfg, a).value(), &exact) < 1e-13);
    }

    #[test]
    fn hand_value_is_exact_in_rational_mode() {
        let cfg = ccr(16, 2, 2, 2);
        let exact = rational::ber_ccr_one_interferer_exact(&cfg, alpha(1, 2));
        assert_eq!(exact, BigRational::new(BigInt::from(1), BigInt::from(1024)));
    }

    #[test]
    fn full_load_no_wdm_value() {
        // Frozen from the exact binomial-tail oracle: half the upper tail of
        // Binomial(31, 1/32) at 2. The full XPON-style load of 32 users
        // exceeds the cardinality bound 31, so permissive mode only.
        let cfg = ccr_perm(64, 2, 32, 2);
        let v = ber_ccr_no_wdm(&cfg);
        let expect = 1.2626550786444743e-1;
        assert!((v.value() - expect).abs() / expect < 1e-13);
        assert!(v.value() > 0.0 && v.value() < 0.5);
        assert!(v.flags().permissive);
        let exact = rational::ber_ccr_no_wdm_exact(&cfg);
        assert!(relative_error(v.value(), &exact) < 1e-13);
    }

    #[test]
    fn deep_tail_stays_finite() {
        // High-threshold regime: 24 against weight 2, permissive.
        let v = ber_ccr_no_wdm(&ccr_perm(64, 2, 32, 24));
        assert!(v.value() > 0.0);
        assert!(v.log_value().is_finite());
        assert!(v.log10() < -12.0);
        assert!((v.log_value().exp() - v.value()).abs() <= f64::EPSILON * v.value());
    }

    #[test]
    fn values_stay_below_one_half() {
        for s in 1..=2u32 {
            for n in [2u32, 8, 16, 31] {
                let cfg = ccr(64, 2, n, s);
                assert!(ber_ccr_no_wdm(&cfg).value() <= 0.5);
                assert!(ber_ccr_one_interferer(&cfg, alpha(1, 1)).value() <= 0.5);
            }
        }
    }

    #[test]
    fn spectral_fraction_properties() {
        let plus = spectral_overlap_fraction(2.0, 0.8, 1, 0.8).unwrap();
        let minus = spectral_overlap_fraction(2.0, 0.8, -1, 0.8).unwrap();
        assert!((plus - minus).abs() < 1e-15);
        assert!(plus > 0.0 && plus < 0.5);
        // A near-line spectrum entirely outside the filter captures nothing.
        let off = spectral_overlap_fraction(1e-9, 0.8, 1, 0.8).unwrap();
        assert!(off.abs() < 1e-300);
        assert_eq!(
            alpha_from_spectrum(1e-9, 0.8, 1, 0.8).unwrap(),
            Ratio::new(0, 1)
        );
        assert_eq!(
            spectral_overlap_fraction(0.0, 0.8, 1, 0.8),
            Err(AnalyticError::NonPositiveWidth)
        );
        assert_eq!(
            spectral_overlap_fraction(2.0, 0.8, 0, 0.8),
            Err(AnalyticError::ZeroOffset)
        );
    }

    #[test]
    fn snapping_picks_reduced_fractions() {
        assert_eq!(snap_to_rational(0.5, 64), Ratio::new(1, 2));
        assert_eq!(snap_to_rational(0.0, 64), Ratio::new(0, 1));
        assert_eq!(snap_to_rational(1.0, 64), Ratio::new(1, 1));
        assert_eq!(snap_to_rational(1.0 / 3.0, 64), Ratio::new(1, 3));
        let x = 0.24026;
        let snapped = snap_to_rational(x, 64);
        assert!((x - *snapped.numer() as f64 / *snapped.denom() as f64).abs() < 0.5 / 64.0);
    }
}

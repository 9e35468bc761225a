//! First-principles chip-synchronous decision model: seeded Monte Carlo
//! simulation of the CCR and two-stage PIC receivers, plus exact enumeration
//! of the same model for small systems (the oracle every closed form is
//! checked against).
//!
//! Two interference mechanisms are supported. `Model` mode draws, for every
//! interfering user, an on-off bit (fair coin) and a positional hit with
//! probability R = W^2/F, so a user disturbs the correlator with probability
//! W^2/(2F) overall — one mechanism reproducing both constants the closed
//! forms use. `Code` mode spreads with actual codewords under uniform random
//! cyclic shifts per user per bit slot and correlates them literally.
//!
//! Everything is a pure function of (inputs, seed): trials are split into a
//! fixed set of chunks, each chunk runs its own counter-derived RNG stream,
//! and the error counts are summed, so results are byte-identical regardless
//! of thread count or scheduling.

pub mod enumerate;

pub use enumerate::{enumerate_ccr_exact, enumerate_pic_exact};

use crate::numeric::Alpha;
use crate::ooc::{cross_correlation, CodeFamily, Codeword};
use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SimError {
    #[error("channel needs at least one user")]
    NoUsers,
    #[error("{users} users exceed the family size {family}")]
    UsersExceedFamily { users: u32, family: usize },
    #[error("assignment must list one distinct in-range codeword per user")]
    BadAssignment,
    #[error("code-mode links need a code family on every channel")]
    MissingCodewords,
    #[error("channels disagree on code parameters: ({0}, {1}) vs ({2}, {3})")]
    MixedCodeParams(u32, u32, u32, u32),
    #[error("W^2 = {w_squared} exceeds F = {length}; the positional hit rate would pass 1")]
    HitRateAboveOne { w_squared: u64, length: u32 },
    #[error("code weight must be at least 2 and at most the code length")]
    BadCodeParams,
    #[error("need at least one trial")]
    NoTrials,
    #[error("coefficient lattice unit {unit} exceeds the simulator cap {cap}")]
    LatticeOverflow { unit: u128, cap: u64 },
    #[error("exact enumeration caps users at {cap}, got {got}")]
    EnumerationUsers { got: u32, cap: u32 },
    #[error("exact enumeration caps interfering channels at {cap}, got {got}")]
    EnumerationChannels { got: usize, cap: usize },
}

/// How interference is realized per trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimMode {
    /// Binomial hit model: codeword identities are ignored.
    Model,
    /// Actual codewords with uniform random cyclic shifts per user per bit.
    Code,
}

/// One wavelength channel: N users, optionally backed by concrete codewords.
#[derive(Clone, Debug)]
pub struct ChannelModel {
    length: u32,
    weight: u32,
    users: u32,
    coded: Option<CodedChannel>,
}

#[derive(Clone, Debug)]
struct CodedChannel {
    family: CodeFamily,
    assignment: Vec<usize>,
}

impl ChannelModel {
    /// Codeword-free channel for `Model` mode.
    pub fn model(length: u32, weight: u32, users: u32) -> Result<Self, SimError> {
        if weight < 2 || length < weight {
            return Err(SimError::BadCodeParams);
        }
        if users == 0 {
            return Err(SimError::NoUsers);
        }
        Ok(ChannelModel {
            length,
            weight,
            users,
            coded: None,
        })
    }

    /// Channel carrying `users` codewords of `family`, assigned in family
    /// order (user u gets codeword u).
    pub fn coded(family: CodeFamily, users: u32) -> Result<Self, SimError> {
        if users == 0 {
            return Err(SimError::NoUsers);
        }
        if users as usize > family.len() {
            return Err(SimError::UsersExceedFamily {
                users,
                family: family.len(),
            });
        }
        Ok(ChannelModel {
            length: family.length(),
            weight: family.weight(),
            users,
            coded: Some(CodedChannel {
                assignment: (0..users as usize).collect(),
                family,
            }),
        })
    }

    /// Replaces the user -> codeword map; must be injective and in range.
    pub fn with_assignment(mut self, assignment: Vec<usize>) -> Result<Self, SimError> {
        let coded = self.coded.as_mut().ok_or(SimError::MissingCodewords)?;
        if assignment.len() != self.users as usize {
            return Err(SimError::BadAssignment);
        }
        let mut seen = vec![false; coded.family.len()];
        for &idx in &assignment {
            if idx >= coded.family.len() || seen[idx] {
                return Err(SimError::BadAssignment);
            }
            seen[idx] = true;
        }
        coded.assignment = assignment;
        Ok(self)
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

    pub fn family(&self) -> Option<&CodeFamily> {
        self.coded.as_ref().map(|c| &c.family)
    }

    fn codeword(&self, user: usize) -> &Codeword {
        let coded = self.coded.as_ref().expect("validated code mode");
        &coded.family.codewords()[coded.assignment[user]]
    }
}

/// The desired channel plus the interfering wavelength channels with their
/// detected power fractions.
#[derive(Clone, Debug)]
pub struct LinkModel {
    target: ChannelModel,
    interferers: Vec<(ChannelModel, Alpha)>,
    mode: SimMode,
}

impl LinkModel {
    pub fn new(
        target: ChannelModel,
        interferers: Vec<(ChannelModel, Alpha)>,
        mode: SimMode,
    ) -> Result<Self, SimError> {
        for (ch, _) in &interferers {
            if (ch.length, ch.weight) != (target.length, target.weight) {
                return Err(SimError::MixedCodeParams(
                    target.length,
                    target.weight,
                    ch.length,
                    ch.weight,
                ));
            }
        }
        match mode {
            SimMode::Code => {
                if target.coded.is_none() || interferers.iter().any(|(c, _)| c.coded.is_none()) {
                    return Err(SimError::MissingCodewords);
                }
            }
            SimMode::Model => {
                let any_interference = target.users > 1 || !interferers.is_empty();
                let w_squared = target.weight as u64 * target.weight as u64;
                if any_interference && w_squared > target.length as u64 {
                    return Err(SimError::HitRateAboveOne {
                        w_squared,
                        length: target.length,
                    });
                }
            }
        }
        Ok(LinkModel {
            target,
            interferers,
            mode,
        })
    }

    pub fn target(&self) -> &ChannelModel {
        &self.target
    }

    pub fn interferers(&self) -> &[(ChannelModel, Alpha)] {
        &self.interferers
    }

    pub fn mode(&self) -> SimMode {
        self.mode
    }

    /// Lattice unit (common denominator of the coefficients) and per-channel
    /// hit weights, for exact integer threshold comparisons.
    fn lattice(&self) -> Result<(u64, Vec<u64>), SimError> {
        const CAP: u64 = 1 << 20;
        let mut unit: u128 = 1;
        for (_, alpha) in &self.interferers {
            unit = num_integer::lcm(unit, alpha.denom() as u128);
            if unit > CAP as u128 {
                return Err(SimError::LatticeOverflow { unit, cap: CAP });
            }
        }
        let unit = unit as u64;
        let weights = self
            .interferers
            .iter()
            .map(|(_, alpha)| alpha.numer() * (unit / alpha.denom()))
            .collect();
        Ok((unit, weights))
    }
}

const Z95: f64 = 1.959963984540054;

/// Wilson score interval for an error count; well behaved at zero errors.
pub fn wilson_interval(errors: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = p + z2 / (2.0 * n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    (
        ((center - half) / denom).max(0.0),
        ((center + half) / denom).min(1.0),
    )
}

/// A Monte Carlo BER estimate with its 95% Wilson interval and the seed that
/// reproduces it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BerEstimate {
    errors: u64,
    trials: u64,
    ber: f64,
    ci95_low: f64,
    ci95_high: f64,
    seed: u64,
}

impl BerEstimate {
    fn new(errors: u64, trials: u64, seed: u64) -> Self {
        let (ci95_low, ci95_high) = wilson_interval(errors, trials, Z95);
        BerEstimate {
            errors,
            trials,
            ber: errors as f64 / trials as f64,
            ci95_low,
            ci95_high,
            seed,
        }
    }

    pub fn errors(&self) -> u64 {
        self.errors
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn ber(&self) -> f64 {
        self.ber
    }

    pub fn ci95(&self) -> (f64, f64) {
        (self.ci95_low, self.ci95_high)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Wilson interval at an arbitrary z (e.g. 3.0 for a 3-sigma band).
    pub fn wilson(&self, z: f64) -> (f64, f64) {
        wilson_interval(self.errors, self.trials, z)
    }
}

/// Inverse-CDF sampler for a Binomial(n, p) hit count: one uniform draw per
/// count. Distributionally identical to per-user Bernoulli draws and much
/// cheaper when n is large.
struct BinomialSampler {
    cdf: Vec<f64>,
}

impl BinomialSampler {
    fn new(n: u64, p: f64) -> Self {
        let (ln_p, ln_q) = (p.ln(), (-p).ln_1p());
        let mut cdf = Vec::with_capacity(n as usize + 1);
        let mut acc = 0.0f64;
        for k in 0..=n {
            acc += crate::numeric::ln_binomial_pmf(n, k, ln_p, ln_q).exp();
            cdf.push(acc);
        }
        // Absorb rounding in the final bucket.
        *cdf.last_mut().expect("n + 1 entries") = f64::INFINITY;
        BinomialSampler { cdf }
    }

    #[inline]
    fn sample(&self, rng: &mut ChaCha8Rng) -> u64 {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= u) as u64
    }
}

/// Fixed chunk count: parallelism never changes which RNG stream serves
/// which trial.
const CHUNKS: u64 = 64;

fn run_chunks<K>(trials: u64, seed: u64, kernel: K) -> u64
where
    K: Fn(&mut ChaCha8Rng, u64) -> u64 + Sync,
{
    let chunk_size = trials.div_ceil(CHUNKS);
    let chunks: Vec<(u64, u64)> = (0..CHUNKS)
        .map(|i| {
            let start = i * chunk_size;
            let count = trials.saturating_sub(start).min(chunk_size);
            (i, count)
        })
        .filter(|&(_, count)| count > 0)
        .collect();
    chunks
        .par_iter()
        .map(|&(stream, count)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            kernel(&mut rng, count)
        })
        .sum()
}

/// Simulates the conventional correlation receiver: per trial, the desired
/// bit, the same-channel hits, and the weighted cross-channel hits form
/// Z = W b + I1 + sum_j alpha_j I_j, decided against S on the exact integer
/// lattice. Deterministic for a fixed seed.
pub fn simulate_ccr(
    link: &LinkModel,
    threshold: u32,
    trials: u64,
    seed: u64,
) -> Result<BerEstimate, SimError> {
    if trials == 0 {
        return Err(SimError::NoTrials);
    }
    let (unit, weights) = link.lattice()?;
    let decision = threshold as u64 * unit;
    let weight_units = link.target.weight as u64 * unit;

    let errors = match link.mode {
        SimMode::Model => {
            // Each interfering user disturbs with probability W^2/(2F): a
            // fair-coin bit masking a W^2/F positional hit. Per channel the
            // trial only needs the hit count, sampled in one draw.
            let p = hit_rate(&link.target) / 2.0;
            let target = BinomialSampler::new(link.target.users as u64 - 1, p);
            let cross: Vec<(BinomialSampler, u64)> = link
                .interferers
                .iter()
                .zip(&weights)
                .map(|((ch, _), &w)| (BinomialSampler::new(ch.users as u64, p), w))
                .collect();
            run_chunks(trials, seed, |rng, count| {
                let mut errors = 0;
                for _ in 0..count {
                    let bit = rng.random_bool(0.5);
                    let mut acc = unit * target.sample(rng);
                    for (sampler, w) in &cross {
                        acc += w * sampler.sample(rng);
                    }
                    let z = if bit { weight_units + acc } else { acc };
                    if (z >= decision) != bit {
                        errors += 1;
                    }
                }
                errors
            })
        }
        SimMode::Code => {
            let tables = correlation_tables(link, unit, &weights);
            let f = link.target.length;
            run_chunks(trials, seed, |rng, count| {
                let mut errors = 0;
                for _ in 0..count {
                    let bit = rng.random_bool(0.5);
                    let mut acc = 0u64;
                    for table in &tables {
                        if rng.random_bool(0.5) {
                            let shift = rng.random_range(0..f) as usize;
                            acc += table[shift];
                        }
                    }
                    let z = if bit { weight_units + acc } else { acc };
                    if (z >= decision) != bit {
                        errors += 1;
                    }
                }
                errors
            })
        }
    };
    Ok(BerEstimate::new(errors, trials, seed))
}

fn hit_rate(target: &ChannelModel) -> f64 {
    (target.weight as f64 * target.weight as f64) / target.length as f64
}

/// Per interfering user, the lattice contribution to the desired correlator
/// at every cyclic shift.
fn correlation_tables(link: &LinkModel, unit: u64, weights: &[u64]) -> Vec<Vec<u64>> {
    let desired = link.target.codeword(0);
    let f = link.target.length;
    let mut tables = Vec::new();
    for user in 1..link.target.users as usize {
        let cw = link.target.codeword(user);
        tables.push(shift_table(desired, cw, f, unit));
    }
    for ((ch, _), &w) in link.interferers.iter().zip(weights) {
        for user in 0..ch.users as usize {
            let cw = ch.codeword(user);
            tables.push(shift_table(desired, cw, f, w));
        }
    }
    tables
}

fn shift_table(desired: &Codeword, other: &Codeword, f: u32, scale: u64) -> Vec<u64> {
    (0..f)
        .map(|s| scale * cross_correlation(desired, other, s).expect("same length") as u64)
        .collect()
}

/// Simulates the two-stage PIC receiver. Stage 1 detects each undesired
/// same-channel user with a CCR at S1 (cross-channel terms included); stage 2
/// subtracts the reconstructed interference of the detected users and decides
/// the desired bit at S2. Over-cancellation can drive the stage-2 variable
/// negative, which is why the comparison runs on signed lattice integers.
pub fn simulate_pic(
    link: &LinkModel,
    threshold1: u32,
    threshold2: u32,
    trials: u64,
    seed: u64,
) -> Result<BerEstimate, SimError> {
    if trials == 0 {
        return Err(SimError::NoTrials);
    }
    let (unit, weights) = link.lattice()?;
    let s1_units = threshold1 as u64 * unit;
    let s2_units = threshold2 as i128 * unit as i128;
    let weight_units = link.target.weight as u64 * unit;
    let n = link.target.users as usize;

    let errors = match link.mode {
        SimMode::Model => {
            let r = hit_rate(&link.target);
            let hit = Bernoulli::new(r).expect("validated rate");
            let cross: Vec<(u64, u64)> = link
                .interferers
                .iter()
                .zip(&weights)
                .map(|((ch, _), &w)| (ch.users as u64, w))
                .collect();
            run_chunks(trials, seed, |rng, count| {
                let mut errors = 0u64;
                let mut bits = vec![false; n];
                let mut cross_bits: Vec<Vec<bool>> = cross
                    .iter()
                    .map(|&(users, _)| vec![false; users as usize])
                    .collect();
                for _ in 0..count {
                    for b in bits.iter_mut() {
                        *b = rng.random_bool(0.5);
                    }
                    for ch in cross_bits.iter_mut() {
                        for b in ch.iter_mut() {
                            *b = rng.random_bool(0.5);
                        }
                    }
                    // Stage 1: estimate every undesired same-channel user.
                    let mut residual: i128 = 0;
                    let mut stage2_estimates = Vec::with_capacity(n - 1);
                    for j in 1..n {
                        let mut acc = 0u64;
                        for (m, &bm) in bits.iter().enumerate() {
                            if m != j && bm && hit.sample(rng) {
                                acc += unit;
                            }
                        }
                        for (ch_bits, &(_, w)) in cross_bits.iter().zip(&cross) {
                            for &d in ch_bits {
                                if d && hit.sample(rng) {
                                    acc += w;
                                }
                            }
                        }
                        let z1 = if bits[j] { weight_units + acc } else { acc };
                        stage2_estimates.push(z1 >= s1_units);
                    }
                    // Stage 2: only mis-estimated users leave a residual, and
                    // it reaches the desired correlator only on a hit.
                    for (j, &est) in (1..n).zip(&stage2_estimates) {
                        if bits[j] != est && hit.sample(rng) {
                            residual += if bits[j] {
                                unit as i128
                            } else {
                                -(unit as i128)
                            };
                        }
                    }
                    let mut acc2: i128 = residual;
                    for (ch_bits, &(_, w)) in cross_bits.iter().zip(&cross) {
                        for &d in ch_bits {
                            if d && hit.sample(rng) {
                                acc2 += w as i128;
                            }
                        }
                    }
                    let bit = bits[0];
                    let z2 = if bit {
                        weight_units as i128 + acc2
                    } else {
                        acc2
                    };
                    if (z2 >= s2_units) != bit {
                        errors += 1;
                    }
                }
                errors
            })
        }
        SimMode::Code => {
            // Pairwise correlator tables for every (correlating user j,
            // transmitting user m); one relative shift per user per trial.
            let f = link.target.length;
            let same: Vec<&Codeword> = (0..n).map(|u| link.target.codeword(u)).collect();
            let pair_tables: Vec<Vec<Vec<u64>>> = same
                .iter()
                .map(|cj| same.iter().map(|cm| shift_table(cj, cm, f, unit)).collect())
                .collect();
            let cross_tables: Vec<Vec<Vec<Vec<u64>>>> = same
                .iter()
                .map(|cj| {
                    link.interferers
                        .iter()
                        .zip(&weights)
                        .map(|((ch, _), &w)| {
                            (0..ch.users as usize)
                                .map(|x| shift_table(cj, ch.codeword(x), f, w))
                                .collect()
                        })
                        .collect()
                })
                .collect();
            run_chunks(trials, seed, |rng, count| {
                let mut errors = 0u64;
                let mut bits = vec![false; n];
                let mut shifts = vec![0u32; n];
                let mut cross_state: Vec<Vec<(bool, u32)>> = link
                    .interferers
                    .iter()
                    .map(|(ch, _)| vec![(false, 0u32); ch.users as usize])
                    .collect();
                for _ in 0..count {
                    for u in 0..n {
                        bits[u] = rng.random_bool(0.5);
                        shifts[u] = if u == 0 { 0 } else { rng.random_range(0..f) };
                    }
                    for ch in cross_state.iter_mut() {
                        for slot in ch.iter_mut() {
                            *slot = (rng.random_bool(0.5), rng.random_range(0..f));
                        }
                    }
                    let mut residual: i128 = 0;
                    for j in 1..n {
                        let mut acc = 0u64;
                        for m in 0..n {
                            if m != j && bits[m] {
                                let rel = ((f + shifts[m]) - shifts[j]) % f;
                                acc += pair_tables[j][m][rel as usize];
                            }
                        }
                        for (c, ch) in cross_state.iter().enumerate() {
                            for (x, &(d, sx)) in ch.iter().enumerate() {
                                if d {
                                    let rel = ((f + sx) - shifts[j]) % f;
                                    acc += cross_tables[j][c][x][rel as usize];
                                }
                            }
                        }
                        let z1 = if bits[j] { weight_units + acc } else { acc };
                        let est = z1 >= s1_units;
                        if bits[j] != est {
                            let xc = pair_tables[0][j][shifts[j] as usize] as i128;
                            residual += if bits[j] { xc } else { -xc };
                        }
                    }
                    let mut acc2: i128 = residual;
                    for (c, ch) in cross_state.iter().enumerate() {
                        for (x, &(d, sx)) in ch.iter().enumerate() {
                            if d {
                                acc2 += cross_tables[0][c][x][sx as usize] as i128;
                            }
                        }
                    }
                    let bit = bits[0];
                    let z2 = if bit {
                        weight_units as i128 + acc2
                    } else {
                        acc2
                    };
                    if (z2 >= s2_units) != bit {
                        errors += 1;
                    }
                }
                errors
            })
        }
    };
    Ok(BerEstimate::new(errors, trials, seed))
}

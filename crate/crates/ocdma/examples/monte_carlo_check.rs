//! Three routes to the same error probability: the closed form, the exact
//! joint-support enumeration, and a seeded Monte Carlo run of the
//! chip-synchronous model (in both the binomial hit model and with real
//! codewords).
//!
//! ```bash
//! cargo run --release --example monte_carlo_check
//! ```

use ocdma::analytic::{ber_ccr_one_interferer, CcrConfig, EvalMode, InterferenceProfile};
use ocdma::mcsim::{enumerate_ccr_exact, simulate_ccr, ChannelModel, LinkModel, SimMode};
use ocdma::numeric::{ratio_to_f64, Alpha};
use ocdma::ooc::generate_family;

fn main() {
    let (f, w, n, s) = (16u32, 2u32, 4u32, 2u32);
    let alpha = Alpha::new(1, 2).unwrap();
    let trials = 1_000_000u64;
    let seed = 7u64;

    let cfg = CcrConfig::new(f, w, n, s, EvalMode::Strict).unwrap();
    let closed = ber_ccr_one_interferer(&cfg, alpha);
    let exact = enumerate_ccr_exact(&cfg, &InterferenceProfile::uniform(alpha, 1)).unwrap();
    println!("closed form            {:.10e}", closed.value());
    println!("exact enumeration      {:.10e}", ratio_to_f64(&exact));

    let target = ChannelModel::model(f, w, n).unwrap();
    let cross = ChannelModel::model(f, w, n).unwrap();
    let link = LinkModel::new(target, vec![(cross, alpha)], SimMode::Model).unwrap();
    let est = simulate_ccr(&link, s, trials, seed).unwrap();
    let (lo, hi) = est.wilson(3.0);
    println!(
        "model-mode simulation  {:.10e}  ({} errors / {} trials, seed {})",
        est.ber(),
        est.errors(),
        est.trials(),
        est.seed()
    );
    println!("  3-sigma Wilson band  [{lo:.6e}, {hi:.6e}]");
    println!(
        "  closed form inside?  {}",
        (lo..=hi).contains(&closed.value())
    );

    // Same link carried by actual codewords under random cyclic shifts.
    let family = generate_family(f, w).unwrap();
    let target = ChannelModel::coded(family.clone(), n).unwrap();
    let cross = ChannelModel::coded(family, n).unwrap();
    let coded = LinkModel::new(target, vec![(cross, alpha)], SimMode::Code).unwrap();
    let est_code = simulate_ccr(&coded, s, trials, seed).unwrap();
    println!(
        "code-mode simulation   {:.10e}  (ratio to model mode {:.3})",
        est_code.ber(),
        est_code.ber() / est.ber()
    );

    let again = simulate_ccr(&link, s, trials, seed).unwrap();
    println!(
        "reproducibility        errors {} == {}: {}",
        est.errors(),
        again.errors(),
        est == again
    );
}

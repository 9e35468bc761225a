//! Closed-form CCR error probabilities: the no-WDM binomial tail and the
//! one-interferer form, plus the deep-tail regime where only the log-domain
//! representation survives.
//!
//! ```bash
//! cargo run --example ccr_closed_form
//! ```

use ocdma::analytic::{ber_ccr_no_wdm, ber_ccr_one_interferer, CcrConfig, EvalMode};
use ocdma::numeric::Alpha;

fn main() {
    let half = Alpha::new(1, 2).unwrap();

    println!("F=64 W=2 S=2, strict mode:");
    println!("{:>4}  {:>13}  {:>13}", "N", "no WDM", "1 ch a=1/2");
    for n in [2u32, 4, 8, 16, 24, 31] {
        let cfg = CcrConfig::new(64, 2, n, 2, EvalMode::Strict).unwrap();
        println!(
            "{n:>4}  {:>13.6e}  {:>13.6e}",
            ber_ccr_no_wdm(&cfg).value(),
            ber_ccr_one_interferer(&cfg, half).value()
        );
    }

    // The high-threshold regime runs permissive (S > W) and lives far below
    // what a linear-domain evaluation could represent near the bottom.
    println!("\nF=64 W=2 N=32 a=1/2, permissive thresholds:");
    println!("{:>4}  {:>13}  {:>10}", "S", "Pe (1 ch)", "log10 Pe");
    for s in [6u32, 12, 18, 24, 30] {
        let cfg = CcrConfig::new(64, 2, 32, s, EvalMode::Permissive).unwrap();
        let v = ber_ccr_one_interferer(&cfg, half);
        println!("{s:>4}  {:>13.6e}  {:>10.2}", v.value(), v.log10());
    }

    let cfg = CcrConfig::new(64, 2, 32, 30, EvalMode::Permissive).unwrap();
    let v = ber_ccr_one_interferer(&cfg, half);
    println!(
        "\nS=30 flags: permissive={} (value {:.3e} is exact in log domain: ln = {:.4})",
        v.flags().permissive,
        v.value(),
        v.log_value()
    );
}

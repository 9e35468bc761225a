//! Dense-WDM interference penalty: how adjacent wavelength channels with
//! spectrum-derived coupling coefficients degrade the CCR link as the demux
//! grid tightens around wide sources.
//!
//! ```bash
//! cargo run --example wdm_interference
//! ```

use ocdma::analytic::{
    alpha_from_spectrum, ber_ccr_multi_interferer, ber_ccr_no_wdm, CcrConfig, EvalMode,
    InterferenceProfile,
};
use ocdma::numeric::Alpha;

fn main() {
    // 2 nm sources on a 0.8 nm grid behind a 0.8 nm filter: the declared
    // Gaussian-over-rectangular overlap model, snapped to rationals.
    let fwhm = 2.0;
    let spacing = 0.8;
    let filter = 0.8;
    let alpha_at = |offset: i32| -> Alpha {
        let snapped = alpha_from_spectrum(fwhm, spacing, offset, filter).unwrap();
        Alpha::new(*snapped.numer(), *snapped.denom()).expect("nonzero overlap")
    };
    let near = alpha_at(1);
    let far = alpha_at(2);
    println!("coupling: |offset|=1 -> {near}, |offset|=2 -> {far}");

    let plans: [(&str, InterferenceProfile); 4] = [
        ("no WDM", InterferenceProfile::no_wdm()),
        ("1 neighbor", InterferenceProfile::new(vec![near])),
        ("2 neighbors", InterferenceProfile::new(vec![near, near])),
        (
            "4 neighbors",
            InterferenceProfile::new(vec![near, near, far, far]),
        ),
    ];

    println!("\nF=64 W=2 S=2, strict mode:");
    print!("{:>4}", "N");
    for (name, _) in &plans {
        print!("  {name:>13}");
    }
    println!();
    for n in [2u32, 4, 8, 16, 24, 31] {
        let cfg = CcrConfig::new(64, 2, n, 2, EvalMode::Strict).unwrap();
        print!("{n:>4}");
        for (_, plan) in &plans {
            let pe = if plan.is_empty() {
                ber_ccr_no_wdm(&cfg).value()
            } else {
                ber_ccr_multi_interferer(&cfg, plan).unwrap().value()
            };
            print!("  {pe:>13.6e}");
        }
        println!();
    }

    // Longer codes push every curve down at fixed load.
    println!("\nN=8 S=2 W=2, 2 neighbors at {near}:");
    for f in [32u32, 64, 128, 256] {
        let cfg = CcrConfig::new(f, 2, 8, 2, EvalMode::Strict).unwrap();
        let plan = InterferenceProfile::uniform(near, 2);
        println!(
            "  F={f:<4} Pe = {:.6e}",
            ber_ccr_multi_interferer(&cfg, &plan).unwrap().value()
        );
    }
}

//! The declared spectral-overlap model: captured power fraction of a
//! Gaussian-spectrum interferer through an ideal rectangular demux filter,
//! and its snap onto the rational grid the exact threshold machinery uses.
//!
//! ```bash
//! cargo run --example spectral_overlap
//! ```

use ocdma::analytic::{alpha_from_spectrum, spectral_overlap_fraction};

fn main() {
    let spacing = 0.8; // nm grid pitch
    let filter = 0.8; // nm rectangular demux filter

    println!("grid pitch {spacing} nm, filter {filter} nm");
    println!(
        "{:>9}  {:>12} {:>8}  {:>12} {:>8}",
        "fwhm", "offset 1", "b/a", "offset 2", "b/a"
    );
    for fwhm in [0.5, 0.8, 1.0, 1.5, 2.0, 3.0] {
        let f1 = spectral_overlap_fraction(fwhm, spacing, 1, filter).unwrap();
        let f2 = spectral_overlap_fraction(fwhm, spacing, 2, filter).unwrap();
        let a1 = alpha_from_spectrum(fwhm, spacing, 1, filter).unwrap();
        let a2 = alpha_from_spectrum(fwhm, spacing, 2, filter).unwrap();
        println!("{fwhm:>7} nm  {f1:>12.6e} {a1:>8}  {f2:>12.6e} {a2:>8}");
    }

    println!("\nnarrow sources vanish from the neighbor filter:");
    for fwhm in [0.4, 0.2, 0.1] {
        let f1 = spectral_overlap_fraction(fwhm, spacing, 1, filter).unwrap();
        println!(
            "  fwhm {fwhm} nm -> fraction {f1:.3e}, snapped {}",
            alpha_from_spectrum(fwhm, spacing, 1, filter).unwrap()
        );
    }
}

//! Construct unit-constraint code families, validate them exhaustively, and
//! print the code-file text format.
//!
//! ```bash
//! cargo run --example generate_codes
//! ```

use ocdma::ooc::{generate_family, max_cardinality, validate_family};

fn main() {
    for (length, weight) in [(64u32, 2u32), (7, 3), (40, 3), (4, 3)] {
        let family = generate_family(length, weight).expect("valid parameters");
        let bound = max_cardinality(length, weight).unwrap();
        let report = validate_family(&family);
        println!(
            "(F={length}, W={weight}): {} codewords (cardinality bound {bound}), validation {}",
            family.len(),
            if report.pass() { "pass" } else { "FAIL" }
        );
        for cw in family.codewords().iter().take(4) {
            println!("    {:?}", cw.positions());
        }
        if family.len() > 4 {
            println!("    ... {} more", family.len() - 4);
        }
    }

    println!("\ncode file for (F=7, W=3):");
    print!("{}", generate_family(7, 3).unwrap().to_text());
}

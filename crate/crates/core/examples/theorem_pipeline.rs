//! The full bifurcation pipeline on the circle scenario: find a parameter
//! with trivial kernel, compute w1 of the index bundle along the loop,
//! predict a nonempty bifurcation set, and confirm it with the scan.
//!
//! Run with `cargo run --example theorem_pipeline`.

use homindex::bundles::check_theorem_hypotheses;
use homindex::cli::first_coordinate_loop;
use homindex::hamiltonian::{ScanConfig, Tolerances};
use homindex::scenarios::pejsachowicz_family;

fn main() -> homindex::Result<()> {
    let family = pejsachowicz_family(1)?;
    let report = check_theorem_hypotheses(
        &family,
        first_coordinate_loop(1),
        &ScanConfig {
            resolutions: vec![256],
            horizon: 20.0,
            tolerances: Tolerances::default(),
        },
        64,
    )?;

    match &report.kernel_free_sample {
        Some(point) => println!(
            "(a) kernel-free sample found at theta = {:?}",
            point.angles()
        ),
        None => println!("(a) no kernel-free sample on the grid"),
    }
    match &report.w1 {
        Some(w1) => println!(
            "(b) w1: E^s(+inf) {}, E^s(-inf) {}, index bundle {}",
            w1.w1_plus, w1.w1_minus, w1.w1_index
        ),
        None => println!(
            "(b) w1 unavailable: {}",
            report.w1_error.as_deref().unwrap_or("unknown")
        ),
    }
    println!(
        "(c) bifurcation set predicted nonempty: {}",
        report.predicts_bifurcation
    );
    println!(
        "(d) scan confirmation: {} flagged cell(s) at {:?}",
        report.scan.flagged_count(),
        report.scan.flagged
    );
    Ok(())
}

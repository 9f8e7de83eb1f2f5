//! Bifurcation-candidate scan over the 2-torus: the set of parameters where
//! the linearized homoclinic problem has a kernel, with wrap counts
//! witnessing that the candidate set winds around the torus and therefore
//! cannot be contracted to a point.
//!
//! Run with `cargo run --example homoclinic_scan`.

use homindex::cli::scan_csv;
use homindex::hamiltonian::{scan_bifurcation_set, ScanConfig, Tolerances};
use homindex::scenarios::pejsachowicz_family;

fn main() -> homindex::Result<()> {
    let family = pejsachowicz_family(2)?;
    let r = 32;
    let scan = scan_bifurcation_set(
        &family,
        &ScanConfig {
            resolutions: vec![r, r],
            horizon: 20.0,
            tolerances: Tolerances::default(),
        },
    )?;

    println!(
        "{} of {} cells flagged; wrap generators {:?}",
        scan.flagged_count(),
        scan.cells.len(),
        scan.wrap.generators
    );

    // Character map of the torus: '#' marks kernel cells. The kernel
    // condition is theta_1 + theta_2 = 0 mod 2 pi, an antidiagonal line
    // wrapping once in each direction.
    let flagged: std::collections::HashSet<(usize, usize)> = scan
        .flagged
        .iter()
        .map(|index| (index[0], index[1]))
        .collect();
    for k2 in (0..r).rev() {
        let row: String = (0..r)
            .map(|k1| if flagged.contains(&(k1, k2)) { '#' } else { '.' })
            .collect();
        println!("{row}");
    }

    let csv = scan_csv(&scan);
    let preview: Vec<&str> = csv.lines().take(4).collect();
    println!("\nCSV export preview:\n{}", preview.join("\n"));
    Ok(())
}

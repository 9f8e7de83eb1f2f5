//! First Stiefel-Whitney classes of the asymptotic stable bundles of the
//! moebius scenario along the circle, and of the index bundle they span.
//!
//! The stable space of J A(+infinity) = a_+ J^2 S_theta is the reflection
//! axis e2(theta) = (cos(theta/2), sin(theta/2)), which returns to itself
//! reversed after a full turn: the Moebius line bundle. The stable space at
//! -infinity is constant. The index bundle of the family is their formal
//! difference, so its w1 over the loop is nontrivial and bifurcation
//! machinery applies.
//!
//! Run with `cargo run --example moebius_w1`.

use homindex::bundles::{index_bundle_w1_loop, transport_loop};
use homindex::cli::first_coordinate_loop;
use homindex::hamiltonian::{hyperbolic_splitting, HamiltonianFamily, Tolerances};
use homindex::scenarios::{moebius_family, MoebiusConfig};

fn main() -> homindex::Result<()> {
    let family = moebius_family(MoebiusConfig::default())?;
    let tols = Tolerances::default();
    let loop_map = first_coordinate_loop(1);

    // Holonomy of the stable bundle at +infinity, computed by frame
    // transport with automatic bisection refinement.
    let stable_plus = |tau: f64| {
        let lambda = loop_map(tau);
        let split = hyperbolic_splitting(&family.asymptotic_plus(&lambda), tols.hyperbolic)?;
        Ok(split.stable)
    };
    for k in [8, 64, 256] {
        let bundle = transport_loop(stable_plus, k, 12)?;
        println!(
            "stable bundle at +infinity, {k} initial samples ({} after refinement): holonomy {}",
            bundle.len(),
            bundle.holonomy()?
        );
    }

    println!();
    let w1 = index_bundle_w1_loop(&family, loop_map, 64, &tols)?;
    println!("w1(E^s(+infinity)) = {}", w1.w1_plus);
    println!("w1(E^s(-infinity)) = {}", w1.w1_minus);
    println!("w1(index bundle)   = {}", w1.w1_index);
    Ok(())
}

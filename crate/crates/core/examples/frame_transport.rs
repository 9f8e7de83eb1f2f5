//! Stable and unstable subspaces of a linear Hamiltonian system at t = 0,
//! computed by seeding the asymptotic splittings at the horizon and
//! transporting frames toward zero, checked against the closed-form
//! solutions of the arctan-saturating family.
//!
//! Run with `cargo run --example frame_transport`.

use homindex::hamiltonian::{
    hyperbolic_splitting, kernel_dimension, stable_at_zero, ParameterPoint, Tolerances,
};
use homindex::numerics::{principal_angles, Frame};
use homindex::scenarios::{analytic_solution_plus, pejsachowicz_family};
use std::f64::consts::PI;

fn main() -> homindex::Result<()> {
    let family = pejsachowicz_family(1)?;
    let tols = Tolerances::default();
    let horizon = 20.0;

    println!("asymptotic splitting at theta = 2.0:");
    let lambda = ParameterPoint::new(vec![2.0]);
    let split = hyperbolic_splitting(
        &homindex::hamiltonian::HamiltonianFamily::asymptotic_plus(&family, &lambda),
        tols.hyperbolic,
    )?;
    println!(
        "  stable dim {}, unstable dim {}, spectral gap {:.4}",
        split.stable.rank(),
        split.unstable.rank(),
        split.spectral_gap
    );

    println!("\ntransported E^s(lambda, 0) against the closed form:");
    for k in 0..8 {
        let theta = -PI + 2.0 * PI * k as f64 / 8.0;
        let lambda = ParameterPoint::new(vec![theta]);
        let transported = stable_at_zero(&family, &lambda, horizon, &tols)?;
        let oracle = Frame::from_vector(&analytic_solution_plus(&lambda, 0.0)?)?;
        let angle = principal_angles(&transported, &oracle).largest().unwrap_or(0.0);
        println!("  theta = {theta:+.4}: angle to oracle {angle:.2e}");
    }

    println!("\nkernel detection (intersection of E^s and E^u at 0):");
    for theta in [0.0, 0.05, PI / 2.0, PI - 1e-9] {
        let lambda = ParameterPoint::new(vec![theta]);
        let (bs, dim) = kernel_dimension(&family, &lambda, horizon, &tols)?;
        println!(
            "  theta = {theta:+.4}: smallest principal angle {:.3e}, kernel dimension {dim}",
            bs.smallest_angle
        );
    }
    Ok(())
}

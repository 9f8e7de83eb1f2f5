//! Leray-Schauder degrees of linear isomorphisms and the parity of a path of
//! symmetric operators, cross-checked against the spectral-flow oracle.
//!
//! Run with `cargo run --example degree_and_parity`.

use homindex::fredholm::{
    leray_schauder_degree, parity_segment, spectral_flow_mod2, tilde_l1_path,
};
use homindex::numerics::{Dmat, Dvec};

fn main() -> homindex::Result<()> {
    // Degrees: (-1)^m with m the algebraic multiplicity of negative real
    // eigenvalues, which in finite dimension is the determinant sign.
    let identity = Dmat::identity(4, 4);
    let mut one_flip = Dmat::identity(4, 4);
    one_flip[(2, 2)] = -1.0;
    let two_negatives = Dmat::from_diagonal(&Dvec::from_vec(vec![-2.0, -3.0, 5.0]));
    let rotation = Dmat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);

    for (name, m) in [
        ("identity", &identity),
        ("identity with one flipped axis", &one_flip),
        ("diag(-2, -3, 5)", &two_negatives),
        ("quarter turn (complex spectrum)", &rotation),
    ] {
        println!("deg_LS({name}) = {}", leray_schauder_degree(m)?);
    }

    // The diagonal path theta |-> P_+ - P_- + theta P_0 over [-1, 1] flips
    // exactly one eigenvalue, so its parity is -1 for every window size.
    println!();
    for window_n in [1, 4, 9] {
        let path = tilde_l1_path(window_n, 33)?;
        let parity = parity_segment(&path)?;
        let flow = spectral_flow_mod2(&path)?;
        println!(
            "window N = {window_n}: parity {parity}, spectral flow mod 2 {flow} (dimension {})",
            path.dim()
        );
    }
    Ok(())
}

//! Kernel bundles E(L, V) of operator families over a loop: fibers are the
//! kernels of (projection onto V-perp) o L, transported around the loop to
//! read off the holonomy sign.
//!
//! Run with `cargo run --example kernel_bundles`.

use homindex::bundles::w1;
use homindex::fredholm::{
    find_transversal, kernel_bundle, tilde_loop, TransversalSubspace, TruncatedOperatorPath,
};
use homindex::numerics::{orthonormal_frame, Dmat, Dvec, Frame};
use std::f64::consts::PI;

fn main() -> homindex::Result<()> {
    // Reflection family L_theta = I - 2 e2(theta) e2(theta)^T over a full
    // turn: the fibers L^{-1} V rotate a full turn, holonomy +1.
    let n = 129;
    let grid: Vec<f64> = (0..n).map(|j| 2.0 * PI * j as f64 / (n - 1) as f64).collect();
    let samples: Vec<Dmat> = grid
        .iter()
        .map(|&theta| {
            let e2 = Dvec::from_vec(vec![(theta / 2.0).cos(), (theta / 2.0).sin()]);
            Dmat::identity(2, 2) - (&e2 * e2.transpose()) * 2.0
        })
        .collect();
    let reflections = TruncatedOperatorPath::new_closed(grid, samples)?;
    let v = TransversalSubspace::new(Frame::from_vector(&Dvec::from_vec(vec![1.0, 0.0]))?);
    let bundle = kernel_bundle(&reflections, &v)?;
    println!(
        "reflection family: rank-{} kernel bundle, holonomy {}, w1 {}",
        bundle.rank(),
        bundle.holonomy()?,
        w1(&bundle)?
    );

    // The truncated loop: over the minimal subspace e_0 the sampled kernel
    // bundle is the Moebius bundle, the shadow of the nontrivial
    // infinite-dimensional index bundle. Adding the defect direction e_N
    // gives a subspace transversal to the underlying continuous family too,
    // and the holonomy becomes +1, in line with the trivial loop parity.
    let window_n = 2;
    let path = tilde_loop(window_n, 33)?;
    let dim = path.dim();
    let mut e0 = Dvec::zeros(dim);
    e0[window_n] = 1.0; // basis index k = 0
    let mut e_top = Dvec::zeros(dim);
    e_top[2 * window_n] = 1.0; // basis index k = N

    let minimal = TransversalSubspace::new(Frame::from_vector(&e0)?);
    let shadow = kernel_bundle(&path, &minimal)?;
    println!(
        "truncated loop over span{{e_0}}: rank {}, holonomy {}, w1 {}",
        shadow.rank(),
        shadow.holonomy()?,
        w1(&shadow)?
    );

    let covering = TransversalSubspace::new(orthonormal_frame(&[e0, e_top])?);
    let trivial = kernel_bundle(&path, &covering)?;
    println!(
        "truncated loop over span{{e_0, e_N}}: rank {}, holonomy {}, w1 {}",
        trivial.rank(),
        trivial.holonomy()?,
        w1(&trivial)?
    );

    // Transversal subspaces can also be found automatically; an everywhere
    // invertible family needs no directions at all.
    let auto = find_transversal(&reflections);
    println!(
        "automatic transversal subspace for the (invertible) reflection family: dimension {}",
        auto.dim()
    );
    Ok(())
}

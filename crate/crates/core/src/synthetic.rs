//! Seeded generators of synthetic operator families: smooth random paths and
//! loops of symmetric matrices with controllable invertibility margins.
//! Shared by the property tests and the verification suite; all randomness
//! flows through caller-supplied RNGs, so corpora are reproducible.

use rand::Rng;

use crate::fredholm::TruncatedOperatorPath;
use crate::numerics::{eig_sym, Dmat, Dvec};

pub fn random_symmetric(rng: &mut impl Rng, n: usize) -> Dmat {
    let raw = Dmat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    (&raw + raw.transpose()) * 0.5
}

/// Random square matrix with entries uniform in [-1, 1].
pub fn random_matrix(rng: &mut impl Rng, n: usize) -> Dmat {
    Dmat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0))
}

/// A path of symmetric matrices given by a trigonometric polynomial of
/// degree <= 3 in the parameter over [0, 1]: smooth, reproducible, with
/// controllable crossings. Closed paths use full periods and repeat the
/// first sample at the end.
pub fn random_trig_path(
    rng: &mut impl Rng,
    dim: usize,
    n_samples: usize,
    closed: bool,
) -> TruncatedOperatorPath {
    let constant = random_symmetric(rng, dim);
    let cos_coeff: Vec<Dmat> = (0..3).map(|_| random_symmetric(rng, dim)).collect();
    let sin_coeff: Vec<Dmat> = (0..3).map(|_| random_symmetric(rng, dim)).collect();
    let omega = if closed { 2.0 * std::f64::consts::PI } else { 1.0 };
    let grid: Vec<f64> = (0..n_samples)
        .map(|j| j as f64 / (n_samples - 1) as f64)
        .collect();
    let mut samples: Vec<Dmat> = grid
        .iter()
        .map(|&t| {
            let mut s = constant.clone();
            for (j, (a, b)) in cos_coeff.iter().zip(&sin_coeff).enumerate() {
                let freq = omega * (j + 1) as f64;
                s += a * (freq * t).cos() + b * (freq * t).sin();
            }
            s
        })
        .collect();
    if closed {
        let first = samples[0].clone();
        *samples.last_mut().expect("nonempty") = first;
        TruncatedOperatorPath::new_closed(grid, samples).expect("valid synthetic loop")
    } else {
        TruncatedOperatorPath::new(grid, samples).expect("valid synthetic path")
    }
}

/// Smallest |eigenvalue| of a symmetric matrix.
pub fn eigen_margin(m: &Dmat) -> f64 {
    let (values, _) = eig_sym(m).expect("symmetric by construction");
    values.iter().fold(f64::INFINITY, |acc, v| acc.min(v.abs()))
}

/// Open random path whose endpoints are comfortably invertible.
pub fn random_open_path(rng: &mut impl Rng, dim: usize, n_samples: usize) -> TruncatedOperatorPath {
    loop {
        let path = random_trig_path(rng, dim, n_samples, false);
        if eigen_margin(path.sample(0)) > 1e-3
            && eigen_margin(path.sample(path.len() - 1)) > 1e-3
        {
            return path;
        }
    }
}

/// Closed everywhere-invertible loop: a random invertible diagonal backbone
/// plus a moderate trigonometric excursion, sampled densely enough that
/// kernel fibers L^{-1}V rotate slowly between neighbours.
pub fn random_invertible_loop(
    rng: &mut impl Rng,
    dims: std::ops::RangeInclusive<usize>,
    n_samples: usize,
) -> TruncatedOperatorPath {
    loop {
        let dim = rng.gen_range(dims.clone());
        let backbone = Dmat::from_diagonal(&Dvec::from_fn(dim, |_, _| {
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            sign * rng.gen_range(1.0..2.0)
        }));
        let cos_coeff: Vec<Dmat> = (0..3).map(|_| random_symmetric(rng, dim)).collect();
        let sin_coeff: Vec<Dmat> = (0..3).map(|_| random_symmetric(rng, dim)).collect();
        let omega = 2.0 * std::f64::consts::PI;
        let grid: Vec<f64> = (0..n_samples)
            .map(|j| j as f64 / (n_samples - 1) as f64)
            .collect();
        let mut samples: Vec<Dmat> = grid
            .iter()
            .map(|&t| {
                let mut s = backbone.clone();
                for (j, (a, b)) in cos_coeff.iter().zip(&sin_coeff).enumerate() {
                    let freq = omega * (j + 1) as f64;
                    let scale = 0.25 / (j + 1) as f64;
                    s += (a * (freq * t).cos() + b * (freq * t).sin()) * scale;
                }
                s
            })
            .collect();
        let first = samples[0].clone();
        *samples.last_mut().expect("nonempty") = first;
        let margin = samples
            .iter()
            .map(|s| {
                let sv = s.clone().svd(false, false).singular_values;
                sv.min() / sv.max()
            })
            .fold(f64::INFINITY, f64::min);
        if margin > 0.08 {
            return TruncatedOperatorPath::new_closed(grid, samples).expect("valid loop");
        }
    }
}

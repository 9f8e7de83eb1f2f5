//! Finite-dimensional operator paths and their Z_2 invariants: the
//! Leray-Schauder degree of linear isomorphisms, the parity of sampled paths
//! and loops of symmetric matrices, an independent spectral-flow oracle, the
//! explicit truncated loop built from index projections and a signed cyclic
//! shift, and kernel bundles relative to a transversal subspace.
//!
//! The truncated loop is deliberately honest about its limits. In infinite
//! dimensions, concatenating the diagonal path `P_+ - P_- + theta P_0` with a
//! conjugated return path yields a closed loop of symmetric operators whose
//! parity is -1. No finite-dimensional loop can have that: endpoint degrees
//! telescope around any closed sampled loop, so [`closed_loop_parity`] is
//! always +1 here. The cyclic truncation of the shift leaves a single defect
//! entry at the top basis index, and the loop closes it with an explicit
//! segment whose parity -1 is exactly the invariant the truncation loses.
//! The per-segment decomposition (path: -1, conjugated return: +1, defect
//! closing: -1) makes the obstruction visible.

use crate::error::{Error, Result};
use crate::numerics::{self, eig_sym, real_spectrum, Dmat, Dvec, Frame, PlaneRotations, Sign};
use crate::bundles::LoopBundle;

/// Scaled-determinant threshold below which a matrix counts as singular.
pub const INVERTIBILITY_TOL: f64 = 1e-12;
/// Absolute closure tolerance for closed paths (first vs last sample).
pub const CLOSURE_TOL: f64 = 1e-12;
/// A singular value below `1e-8 * scale` marks a singular direction when
/// assembling transversal subspaces.
pub const TRANSVERSAL_TOL: f64 = 1e-8;

/// The parity sign of a path of operators, an element of {+1, -1}.
pub type ParitySign = Sign;

/// A sampled path or loop of symmetric d x d matrices, modeling an operator
/// family restricted to a finite basis window e_{-N}..e_N (when `window_n`
/// is set) or to a plain finite-dimensional space.
#[derive(Debug, Clone)]
pub struct TruncatedOperatorPath {
    grid: Vec<f64>,
    samples: Vec<Dmat>,
    closed: bool,
    window_n: Option<usize>,
    segment_marks: Vec<SegmentMark>,
}

/// A named range of sample indices inside a constructed loop, used to report
/// per-segment parities.
#[derive(Debug, Clone)]
pub struct SegmentMark {
    pub name: String,
    /// First sample index of the segment.
    pub start: usize,
    /// Last sample index of the segment (inclusive).
    pub end: usize,
}

impl TruncatedOperatorPath {
    /// An open path. The grid must be strictly increasing with at least two
    /// points and every sample symmetric.
    pub fn new(grid: Vec<f64>, samples: Vec<Dmat>) -> Result<Self> {
        Self::build(grid, samples, false, None)
    }

    /// A closed loop; the first and last samples must agree within
    /// [`CLOSURE_TOL`].
    pub fn new_closed(grid: Vec<f64>, samples: Vec<Dmat>) -> Result<Self> {
        Self::build(grid, samples, true, None)
    }

    fn build(
        grid: Vec<f64>,
        samples: Vec<Dmat>,
        closed: bool,
        window_n: Option<usize>,
    ) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::InvalidInput("a path needs at least two samples".into()));
        }
        if grid.len() != samples.len() {
            return Err(Error::InvalidInput(format!(
                "{} grid points vs {} samples",
                grid.len(),
                samples.len()
            )));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("grid must be strictly increasing".into()));
        }
        let dim = samples[0].nrows();
        for s in &samples {
            if s.nrows() != dim || s.ncols() != dim {
                return Err(Error::InvalidInput("sample dimensions differ".into()));
            }
            numerics::require_symmetric(s)?;
        }
        if closed {
            let gap = (&samples[0] - samples.last().expect("nonempty")).abs().max();
            if gap > CLOSURE_TOL {
                return Err(Error::InvalidInput(format!(
                    "loop does not close: first/last gap {gap:.3e}"
                )));
            }
        }
        Ok(TruncatedOperatorPath {
            grid,
            samples,
            closed,
            window_n,
            segment_marks: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.samples[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn sample(&self, i: usize) -> &Dmat {
        &self.samples[i]
    }

    pub fn samples(&self) -> &[Dmat] {
        &self.samples
    }

    pub fn window_n(&self) -> Option<usize> {
        self.window_n
    }

    pub fn segment_marks(&self) -> &[SegmentMark] {
        &self.segment_marks
    }

    /// The path of transposed samples (identical for symmetric samples; kept
    /// for adjoint-consistency checks).
    pub fn transposed(&self) -> TruncatedOperatorPath {
        TruncatedOperatorPath {
            grid: self.grid.clone(),
            samples: self.samples.iter().map(|s| s.transpose()).collect(),
            closed: self.closed,
            window_n: self.window_n,
            segment_marks: self.segment_marks.clone(),
        }
    }
}

/// |det T| / sigma_max^d: a conditioning-aware invertibility measure.
/// Non-finite input counts as singular.
pub fn scaled_det(m: &Dmat) -> f64 {
    if numerics::require_finite(m).is_err() {
        return 0.0;
    }
    let sigma_max = m.clone().svd(false, false).singular_values.max();
    if sigma_max == 0.0 {
        return 0.0;
    }
    let d = m.nrows() as i32;
    (m.determinant() / sigma_max.powi(d)).abs()
}

fn require_invertible(m: &Dmat) -> Result<()> {
    let sd = scaled_det(m);
    if sd <= INVERTIBILITY_TOL {
        return Err(Error::NotInvertible { scaled_det: sd });
    }
    Ok(())
}

/// Leray-Schauder degree of an invertible matrix: (-1)^m where m is the total
/// algebraic multiplicity of negative real eigenvalues. In finite dimension
/// every operator is a compact perturbation of the identity, so the canonical
/// parametrix is the identity and the degree equals the determinant sign.
/// The implementation counts multiplicities from the spectrum; tests compare
/// against the determinant sign computed independently.
pub fn leray_schauder_degree(t: &Dmat) -> Result<ParitySign> {
    require_invertible(t)?;
    let m: usize = real_spectrum(t)
        .iter()
        .filter(|(z, _)| z.im == 0.0 && z.re < 0.0)
        .map(|(_, mult)| mult)
        .sum();
    Ok(Sign::from_parity_of(m))
}

/// Parity of an open path with invertible endpoints, with the identity as
/// global parametrix: deg(L_b) * deg(L_a).
pub fn parity_segment(path: &TruncatedOperatorPath) -> Result<ParitySign> {
    let first = path.sample(0);
    let last = path.sample(path.len() - 1);
    let deg_a = leray_schauder_degree(first).map_err(|_| Error::EndpointSingular {
        param: path.grid()[0],
    })?;
    let deg_b = leray_schauder_degree(last).map_err(|_| Error::EndpointSingular {
        param: *path.grid().last().expect("nonempty"),
    })?;
    Ok(deg_a * deg_b)
}

/// Spectral flow mod 2 of a path of symmetric matrices: (-1)^c where c counts
/// eigenvalues crossing zero, with crossing multiplicity read off from the
/// signature change between consecutive samples. This is the independent
/// oracle for [`parity_segment`].
///
/// A sample with an eigenvalue inside the singular band cannot be assigned a
/// signature; a single such sample is bracketed by its neighbours, two in a
/// row mean the sampling cannot localize the crossings.
pub fn spectral_flow_mod2(path: &TruncatedOperatorPath) -> Result<ParitySign> {
    let scale = path
        .samples()
        .iter()
        .map(|s| s.norm())
        .fold(1.0_f64, f64::max);
    let band = 1e-10 * scale;

    // Negative-eigenvalue count per sample; None = signature ambiguous.
    let mut signatures: Vec<Option<usize>> = Vec::with_capacity(path.len());
    for s in path.samples() {
        let (values, _) = eig_sym(s)?;
        if values.iter().any(|v| v.abs() <= band) {
            signatures.push(None);
        } else {
            signatures.push(Some(values.iter().filter(|v| **v < 0.0).count()));
        }
    }
    let first = signatures[0].ok_or(Error::EndpointSingular {
        param: path.grid()[0],
    })?;
    let last_idx = path.len() - 1;
    signatures[last_idx].ok_or(Error::EndpointSingular {
        param: path.grid()[last_idx],
    })?;

    let mut crossings = 0usize;
    let mut previous = first;
    let mut pending_ambiguous = false;
    for (i, sig) in signatures.iter().enumerate().skip(1) {
        match sig {
            Some(n) => {
                crossings += n.abs_diff(previous);
                previous = *n;
                pending_ambiguous = false;
            }
            None => {
                if pending_ambiguous {
                    return Err(Error::SamplingTooCoarse {
                        param: path.grid()[i],
                    });
                }
                pending_ambiguous = true;
            }
        }
    }
    Ok(Sign::from_parity_of(crossings))
}

fn index_to_slot(k: i64, window_n: usize) -> usize {
    (k + window_n as i64) as usize
}

/// The diagonal operator with +1 on basis indices k >= 1, -1 on k <= -1 and
/// `theta` at k = 0, truncated to the window e_{-N}..e_N.
pub fn tilde_l1(theta: f64, window_n: usize) -> Dmat {
    let d = 2 * window_n + 1;
    let mut m = Dmat::zeros(d, d);
    for k in -(window_n as i64)..=(window_n as i64) {
        let slot = index_to_slot(k, window_n);
        m[(slot, slot)] = match k {
            0 => theta,
            k if k > 0 => 1.0,
            _ => -1.0,
        };
    }
    m
}

/// The diagonal path `tilde_l1(theta)` sampled over theta in [-1, 1]. An odd
/// sample count places a sample exactly on the singular parameter theta = 0.
pub fn tilde_l1_path(window_n: usize, n_samples: usize) -> Result<TruncatedOperatorPath> {
    if n_samples < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    let grid: Vec<f64> = (0..n_samples)
        .map(|j| -1.0 + 2.0 * j as f64 / (n_samples - 1) as f64)
        .collect();
    let samples = grid.iter().map(|&theta| tilde_l1(theta, window_n)).collect();
    TruncatedOperatorPath::build(grid, samples, false, Some(window_n))
}

/// The signed cyclic shift on the truncated basis: e_k -> e_{k+1} for
/// 0 <= k < N, e_k -> -e_{k+1} for k < 0, and e_N -> e_{-N} to close the
/// cycle. Orthogonal with determinant +1 when N is even, which keeps it in
/// the connected component of the identity; odd windows are rejected.
///
/// Conjugation by this matrix carries `tilde_l1(-1)` onto `tilde_l1(+1)` on
/// all interior indices |k| <= N-1. The wrap-around entry at k = N picks up
/// the sign from the bottom of the window instead, leaving a single defect
/// of size exactly 2 on the diagonal: the truncation artifact. On the full
/// bilateral basis the identity is exact.
pub fn conjugator(window_n: usize) -> Result<Dmat> {
    if !window_n.is_multiple_of(2) || window_n == 0 {
        return Err(Error::OddWindowUnsupported { window_n });
    }
    let n = window_n as i64;
    let d = 2 * window_n + 1;
    let mut m = Dmat::zeros(d, d);
    for k in -n..n {
        let sign = if k >= 0 { 1.0 } else { -1.0 };
        m[(index_to_slot(k + 1, window_n), index_to_slot(k, window_n))] = sign;
    }
    m[(index_to_slot(-n, window_n), index_to_slot(n, window_n))] = 1.0;
    Ok(m)
}

/// The conjugated return path W_s^T tilde_l1(-1) W_s with W_s = C^{1-s}, the
/// geodesic in SO(d) from the conjugator C (s = 0) to the identity (s = 1).
/// Every sample is symmetric and invertible: congruence by an invertible
/// matrix preserves invertibility, and |det W_s| = 1.
pub fn tilde_l2(s: f64, window_n: usize) -> Result<Dmat> {
    let c = conjugator(window_n)?;
    let rotations = PlaneRotations::decompose(&c)?;
    Ok(tilde_l2_with(&rotations, s, window_n))
}

fn tilde_l2_with(rotations: &PlaneRotations, s: f64, window_n: usize) -> Dmat {
    let w = rotations.power(1.0 - s);
    let l = tilde_l1(-1.0, window_n);
    let out = w.transpose() * l * w;
    // Symmetric by construction; average out roundoff.
    (&out + out.transpose()) * 0.5
}

/// Names of the three segments of [`tilde_loop`], in loop traversal order.
pub const TILDE_SEGMENT_L1: &str = "tilde_l1";
pub const TILDE_SEGMENT_CLOSING: &str = "defect_closing";
pub const TILDE_SEGMENT_L2: &str = "tilde_l2";

/// The closed truncated loop: the diagonal path from `tilde_l1(-1)` to
/// `tilde_l1(+1)`, an explicit defect-closing segment that flips the single
/// wrap-around diagonal entry at k = N, and the conjugated return path back
/// to `tilde_l1(-1)`. Segment boundaries are recorded so the per-segment
/// parity decomposition (-1 for the diagonal path, +1 for the return path,
/// -1 for the defect closing) can be reported; their product +1 is the
/// telescoping closed-loop parity that finite dimension forces.
pub fn tilde_loop(window_n: usize, samples_per_segment: usize) -> Result<TruncatedOperatorPath> {
    if samples_per_segment < 8 {
        return Err(Error::InvalidInput(
            "need at least 8 samples per segment".into(),
        ));
    }
    let k = samples_per_segment;
    let c = conjugator(window_n)?;
    let rotations = PlaneRotations::decompose(&c)?;

    let mut grid: Vec<f64> = Vec::with_capacity(3 * k + 1);
    let mut samples: Vec<Dmat> = Vec::with_capacity(3 * k + 1);

    // Segment 1: theta from -1 to +1.
    for j in 0..=k {
        let theta = -1.0 + 2.0 * j as f64 / k as f64;
        grid.push(j as f64 / k as f64);
        samples.push(tilde_l1(theta, window_n));
    }
    // Segment 2: flip the defect entry at index k = N from +1 down to -1.
    let top = index_to_slot(window_n as i64, window_n);
    for j in 1..=k {
        let value = 1.0 - 2.0 * j as f64 / k as f64;
        let mut m = tilde_l1(1.0, window_n);
        m[(top, top)] = value;
        grid.push(1.0 + j as f64 / k as f64);
        samples.push(m);
    }
    // Segment 3: conjugated return from the defect version of tilde_l1(+1)
    // (s = 0) back to tilde_l1(-1) (s = 1).
    for j in 1..=k {
        let s = j as f64 / k as f64;
        grid.push(2.0 + j as f64 / k as f64);
        samples.push(tilde_l2_with(&rotations, s, window_n));
    }
    // The return path lands on tilde_l1(-1) up to the accuracy of the plane
    // decomposition; snap the seam so the loop closes exactly.
    let seam_gap = (&samples[0] - samples.last().expect("nonempty")).abs().max();
    if seam_gap > CLOSURE_TOL {
        return Err(Error::Numerical(format!(
            "truncated loop failed to close: seam gap {seam_gap:.3e}"
        )));
    }
    let first = samples[0].clone();
    *samples.last_mut().expect("nonempty") = first;

    let mut path = TruncatedOperatorPath::build(grid, samples, true, Some(window_n))?;
    path.segment_marks = vec![
        SegmentMark {
            name: TILDE_SEGMENT_L1.into(),
            start: 0,
            end: k,
        },
        SegmentMark {
            name: TILDE_SEGMENT_CLOSING.into(),
            start: k,
            end: 2 * k,
        },
        SegmentMark {
            name: TILDE_SEGMENT_L2.into(),
            start: 2 * k,
            end: 3 * k,
        },
    ];
    Ok(path)
}

/// Parity of a closed loop together with its per-segment decomposition.
#[derive(Debug, Clone)]
pub struct LoopParity {
    /// The loop parity itself. With a global parametrix (the identity, valid
    /// in finite dimension) this is deg(I) = +1 for every closed
    /// finite-dimensional loop; the nontrivial content is in the segments.
    pub parity: ParitySign,
    /// (segment name, parity over the segment).
    pub segments: Vec<(String, ParitySign)>,
}

/// Parity of a closed sampled loop. Requires at least one invertible sample;
/// the result is always +1 in finite dimension (endpoint degrees telescope
/// around the loop), and the per-segment decomposition is returned for
/// diagnostics. Recorded segment marks are used when present and cut at
/// invertible samples; otherwise segments are found by scanning.
pub fn closed_loop_parity(path: &TruncatedOperatorPath) -> Result<LoopParity> {
    if !path.is_closed() {
        return Err(Error::InvalidInput("closed_loop_parity needs a closed loop".into()));
    }
    let invertible: Vec<bool> = path
        .samples()
        .iter()
        .map(|s| scaled_det(s) > INVERTIBILITY_TOL)
        .collect();
    if !invertible.iter().any(|&b| b) {
        return Err(Error::NoRegularPoint);
    }

    let marks_usable = !path.segment_marks.is_empty()
        && path
            .segment_marks
            .iter()
            .all(|m| invertible[m.start] && invertible[m.end]);

    let segments = if marks_usable {
        let mut out = Vec::new();
        for mark in &path.segment_marks {
            let deg_a = leray_schauder_degree(path.sample(mark.start))?;
            let deg_b = leray_schauder_degree(path.sample(mark.end))?;
            out.push((mark.name.clone(), deg_a * deg_b));
        }
        out
    } else {
        auto_segments(path, &invertible)?
    };

    Ok(LoopParity {
        parity: Sign::Plus,
        segments,
    })
}

/// Cuts the loop at invertible samples so that each segment contains at most
/// one maximal singular run.
fn auto_segments(
    path: &TruncatedOperatorPath,
    invertible: &[bool],
) -> Result<Vec<(String, ParitySign)>> {
    let n = path.len() - 1; // distinct samples; last duplicates first
    let start = (0..n).find(|&i| invertible[i]).ok_or(Error::NoRegularPoint)?;
    let mut cuts = vec![start];
    let mut saw_singular = false;
    for step in 1..=n {
        let j = (start + step) % n;
        if invertible[j] {
            if saw_singular && j != start {
                cuts.push(j);
                saw_singular = false;
            }
        } else {
            saw_singular = true;
        }
    }
    let mut segments = Vec::with_capacity(cuts.len());
    for (i, &from) in cuts.iter().enumerate() {
        let to = cuts[(i + 1) % cuts.len()];
        let deg_a = leray_schauder_degree(path.sample(from))?;
        let deg_b = leray_schauder_degree(path.sample(to))?;
        segments.push((format!("segment_{i}"), deg_a * deg_b));
    }
    Ok(segments)
}

/// A finite-dimensional subspace V with im(L_lambda) + V = R^d along the
/// whole family.
#[derive(Debug, Clone)]
pub struct TransversalSubspace {
    basis: Frame,
}

impl TransversalSubspace {
    /// Wraps an orthonormal basis; [`verify_transversal`] checks the defining
    /// property against a path.
    pub fn new(basis: Frame) -> TransversalSubspace {
        TransversalSubspace { basis }
    }

    pub fn basis(&self) -> &Frame {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.rank()
    }
}

/// Smallest singular value of the stacked map [L | V]: positive means
/// im(L) + V = R^d.
pub fn transversality_margin(sample: &Dmat, v: &Frame) -> f64 {
    let d = sample.nrows();
    let r = v.rank();
    let mut stacked = Dmat::zeros(d, d + r);
    stacked.view_mut((0, 0), (d, d)).copy_from(sample);
    if r > 0 {
        stacked.view_mut((0, d), (d, r)).copy_from(v.matrix());
    }
    stacked.svd(false, false).singular_values.min()
}

/// Checks im(L_lambda) + V = R^d on every sample.
pub fn verify_transversal(path: &TruncatedOperatorPath, v: &TransversalSubspace) -> Result<()> {
    for (i, sample) in path.samples().iter().enumerate() {
        if transversality_margin(sample, v.basis()) <= TRANSVERSAL_TOL {
            return Err(Error::NotTransversal { sample_index: i });
        }
    }
    Ok(())
}

/// Greedily accumulates a transversal subspace for the family: every sample
/// contributes the left-singular directions of its near-vanishing singular
/// values that are not yet covered, and the result is enlarged until the
/// stacked-map margin clears the tolerance on every sample. The full space
/// always works, so this terminates.
pub fn find_transversal(path: &TruncatedOperatorPath) -> TransversalSubspace {
    let d = path.dim();
    let mut basis: Vec<Dvec> = Vec::new();

    let append_new = |basis: &mut Vec<Dvec>, u: Dvec| {
        let mut residual = u;
        for b in basis.iter() {
            let coeff = b.dot(&residual);
            residual -= b * coeff;
        }
        let norm = residual.norm();
        if norm > 1e-6 {
            basis.push(residual / norm);
        }
    };

    for sample in path.samples() {
        let svd = sample.clone().svd(true, false);
        let u = svd.u.expect("svd with u");
        let sigma_max = svd.singular_values.max();
        let threshold = TRANSVERSAL_TOL * sigma_max.max(1.0);
        for (j, sigma) in svd.singular_values.iter().enumerate() {
            if *sigma < threshold {
                append_new(&mut basis, u.column(j).into_owned());
            }
        }
    }

    // Enlarge until the margin clears the tolerance everywhere.
    loop {
        let frame = assemble_frame(d, &basis);
        let mut grew = false;
        for sample in path.samples() {
            if transversality_margin(sample, &frame) <= TRANSVERSAL_TOL {
                let svd = sample.clone().svd(true, false);
                let u = svd.u.expect("svd with u");
                let before = basis.len();
                // Cover the weakest left direction of this sample.
                let mut weakest = u.column(u.ncols() - 1).into_owned();
                for (j, sigma) in svd.singular_values.iter().enumerate() {
                    if *sigma <= svd.singular_values.min() + f64::EPSILON {
                        weakest = u.column(j).into_owned();
                    }
                }
                append_new(&mut basis, weakest);
                if basis.len() == before {
                    // Direction already covered; take the whole space.
                    basis = (0..d)
                        .map(|i| {
                            let mut e = Dvec::zeros(d);
                            e[i] = 1.0;
                            e
                        })
                        .collect();
                }
                grew = true;
                break;
            }
        }
        if !grew {
            return TransversalSubspace { basis: frame };
        }
        if basis.len() >= d {
            return TransversalSubspace {
                basis: Frame::standard_basis(d),
            };
        }
    }
}

fn assemble_frame(d: usize, basis: &[Dvec]) -> Frame {
    if basis.is_empty() {
        return Frame::empty(d);
    }
    numerics::orthonormal_frame(basis).expect("greedy basis stays orthonormal")
}

/// The kernel bundle E(L, V) of a closed family relative to a transversal
/// subspace: per sample the kernel of (projection onto V-perp) o L_lambda,
/// a subspace of dimension dim V, transported around the loop into a
/// [`LoopBundle`] carrying the holonomy sign.
pub fn kernel_bundle(
    path: &TruncatedOperatorPath,
    v: &TransversalSubspace,
) -> Result<LoopBundle> {
    if !path.is_closed() {
        return Err(Error::InvalidInput("kernel_bundle needs a closed loop".into()));
    }
    verify_transversal(path, v)?;
    let d = path.dim();
    let r = v.dim();
    let projector = if r == 0 {
        Dmat::identity(d, d)
    } else {
        Dmat::identity(d, d) - v.basis().matrix() * v.basis().matrix().transpose()
    };

    let distinct = path.len() - 1;
    let mut fibers: Vec<Frame> = Vec::with_capacity(distinct);
    for i in 0..distinct {
        let m = &projector * path.sample(i);
        let svd = m.svd(false, true);
        let v_t = svd.v_t.expect("svd with v_t");
        // Transversality makes rank(P L) = d - r exactly; the kernel is the
        // span of the last r right-singular directions.
        if d > r {
            let sigma = &svd.singular_values;
            let rank_margin = sigma[d - r - 1];
            if rank_margin <= TRANSVERSAL_TOL * sigma.max().max(1.0) {
                return Err(Error::NotTransversal { sample_index: i });
            }
        }
        let mut cols = Dmat::zeros(d, r);
        for j in 0..r {
            cols.set_column(j, &v_t.row(d - r + j).transpose());
        }
        fibers.push(Frame::from_orthonormal_columns_unchecked(cols));
    }
    LoopBundle::from_frames(fibers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundles;
    use crate::synthetic::{
        random_invertible_loop, random_open_path, random_trig_path,
    };
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn degree_of_identity_and_rank_one_flip() {
        let id = Dmat::identity(5, 5);
        assert_eq!(leray_schauder_degree(&id).unwrap(), Sign::Plus);
        // I - 2 P_0: one diagonal entry flipped to -1.
        let mut flip = Dmat::identity(5, 5);
        flip[(2, 2)] = -1.0;
        assert_eq!(leray_schauder_degree(&flip).unwrap(), Sign::Minus);
        let diag = Dmat::from_diagonal(&Dvec::from_vec(vec![-2.0, -3.0, 5.0]));
        assert_eq!(leray_schauder_degree(&diag).unwrap(), Sign::Plus);
    }

    #[test]
    fn degree_rejects_singular() {
        let m = Dmat::from_diagonal(&Dvec::from_vec(vec![1.0, 0.0]));
        assert!(matches!(
            leray_schauder_degree(&m),
            Err(Error::NotInvertible { .. })
        ));
    }

    #[test]
    fn degree_matches_determinant_sign_and_multiplicity_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut checked = 0;
        while checked < 200 {
            let n = rng.gen_range(1..=10);
            let m = Dmat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            if scaled_det(&m) <= 1e-8 {
                continue;
            }
            // Keep real eigenvalues away from zero so classification is clean.
            let spectrum = real_spectrum(&m);
            if spectrum
                .iter()
                .any(|(z, _)| z.im == 0.0 && z.re.abs() < 1e-6)
            {
                continue;
            }
            let deg = leray_schauder_degree(&m).unwrap();
            assert_eq!(deg, Sign::from_f64(m.determinant()), "det sign oracle");
            let neg: usize = spectrum
                .iter()
                .filter(|(z, _)| z.im == 0.0 && z.re < 0.0)
                .map(|(_, k)| k)
                .sum();
            assert_eq!(deg, Sign::from_parity_of(neg), "multiplicity oracle");
            checked += 1;
        }
    }

    #[test]
    fn parity_of_constant_path_is_trivial() {
        let m = Dmat::from_diagonal(&Dvec::from_vec(vec![2.0, -1.0, 3.0]));
        let path =
            TruncatedOperatorPath::new(vec![0.0, 1.0], vec![m.clone(), m.clone()]).unwrap();
        assert_eq!(parity_segment(&path).unwrap(), Sign::Plus);
        assert_eq!(spectral_flow_mod2(&path).unwrap(), Sign::Plus);
    }

    #[test]
    fn parity_rejects_singular_endpoints() {
        let singular = Dmat::from_diagonal(&Dvec::from_vec(vec![0.0, 1.0]));
        let regular = Dmat::from_diagonal(&Dvec::from_vec(vec![2.0, 1.0]));
        let path =
            TruncatedOperatorPath::new(vec![0.0, 1.0], vec![singular, regular]).unwrap();
        assert!(matches!(
            parity_segment(&path),
            Err(Error::EndpointSingular { .. })
        ));
        assert!(matches!(
            spectral_flow_mod2(&path),
            Err(Error::EndpointSingular { .. })
        ));
    }

    #[test]
    fn spectral_flow_rejects_consecutive_singular_samples() {
        // Two interior samples sit inside the singular band; the crossings
        // in between cannot be bracketed.
        let diag = |a: f64| Dmat::from_diagonal(&Dvec::from_vec(vec![a, 1.0]));
        let path = TruncatedOperatorPath::new(
            vec![0.0, 0.25, 0.5, 0.75, 1.0],
            vec![diag(-1.0), diag(0.0), diag(0.0), diag(0.5), diag(1.0)],
        )
        .unwrap();
        assert!(matches!(
            spectral_flow_mod2(&path),
            Err(Error::SamplingTooCoarse { .. })
        ));
    }

    #[test]
    fn closed_loop_parity_needs_a_regular_point() {
        let zero = Dmat::zeros(2, 2);
        let path = TruncatedOperatorPath::new_closed(
            vec![0.0, 0.5, 1.0],
            vec![zero.clone(), zero.clone(), zero],
        )
        .unwrap();
        assert!(matches!(
            closed_loop_parity(&path),
            Err(Error::NoRegularPoint)
        ));
    }

    #[test]
    fn parity_of_single_crossing() {
        // diag(t, 1) over [-1, 1]: one eigenvalue crosses zero.
        let n = 21;
        let grid: Vec<f64> = (0..n).map(|j| -1.0 + 2.0 * j as f64 / (n - 1) as f64).collect();
        let samples: Vec<Dmat> = grid
            .iter()
            .map(|&t| Dmat::from_diagonal(&Dvec::from_vec(vec![t, 1.0])))
            .collect();
        let path = TruncatedOperatorPath::new(grid, samples).unwrap();
        assert_eq!(parity_segment(&path).unwrap(), Sign::Minus);
        assert_eq!(spectral_flow_mod2(&path).unwrap(), Sign::Minus);
    }

    #[test]
    fn tilde_l1_endpoints() {
        let n = 3usize;
        let plus = tilde_l1(1.0, n);
        let minus = tilde_l1(-1.0, n);
        for k in -(n as i64)..=(n as i64) {
            let slot = index_to_slot(k, n);
            let expected_plus = if k >= 0 { 1.0 } else { -1.0 };
            let expected_minus = if k >= 1 { 1.0 } else { -1.0 };
            assert_eq!(plus[(slot, slot)], expected_plus);
            assert_eq!(minus[(slot, slot)], expected_minus);
        }
        // theta = 0: kernel is exactly the middle basis vector.
        let zero = tilde_l1(0.0, n);
        assert_eq!(zero[(index_to_slot(0, n), index_to_slot(0, n))], 0.0);
        assert!(scaled_det(&zero) <= INVERTIBILITY_TOL);
    }

    #[test]
    fn tilde_l1_parity_is_minus_one_for_all_windows() {
        for window_n in 1..=10 {
            let path = tilde_l1_path(window_n, 33).unwrap();
            assert_eq!(parity_segment(&path).unwrap(), Sign::Minus, "window {window_n}");
            assert_eq!(spectral_flow_mod2(&path).unwrap(), Sign::Minus);
        }
    }

    #[test]
    fn conjugator_is_orthogonal_with_unit_determinant() {
        for window_n in [2usize, 4, 6, 8] {
            let c = conjugator(window_n).unwrap();
            let d = 2 * window_n + 1;
            let defect = (c.transpose() * &c - Dmat::identity(d, d)).abs().max();
            assert!(defect <= 1e-14, "orthogonality defect {defect:.3e}");
            assert_abs_diff_eq!(c.determinant(), 1.0, epsilon = 1e-10);
        }
        assert!(matches!(
            conjugator(3),
            Err(Error::OddWindowUnsupported { window_n: 3 })
        ));
    }

    #[test]
    fn conjugation_identity_with_single_defect() {
        for window_n in [2usize, 4, 6] {
            let c = conjugator(window_n).unwrap();
            let conjugated = c.transpose() * tilde_l1(-1.0, window_n) * &c;
            let target = tilde_l1(1.0, window_n);
            let diff = &conjugated - &target;
            let n = window_n as i64;
            for k in -n..=n {
                let slot = index_to_slot(k, window_n);
                if k == n {
                    assert_abs_diff_eq!(diff[(slot, slot)].abs(), 2.0, epsilon = 1e-12);
                } else {
                    assert!(diff[(slot, slot)].abs() <= 1e-12);
                }
            }
            // Off-diagonal entries vanish: signed permutations keep diagonals diagonal.
            for i in 0..conjugated.nrows() {
                for j in 0..conjugated.ncols() {
                    if i != j {
                        assert!(diff[(i, j)].abs() <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn tilde_l2_endpoints_and_invertibility() {
        let window_n = 4;
        let at_one = tilde_l2(1.0, window_n).unwrap();
        assert!((at_one - tilde_l1(-1.0, window_n)).abs().max() <= 1e-12);

        let c = conjugator(window_n).unwrap();
        let expected_defect = c.transpose() * tilde_l1(-1.0, window_n) * &c;
        let at_zero = tilde_l2(0.0, window_n).unwrap();
        assert!((at_zero - expected_defect).abs().max() <= 1e-10);

        for j in 0..=10 {
            let s = j as f64 / 10.0;
            let m = tilde_l2(s, window_n).unwrap();
            assert!(m.determinant().abs() >= 1.0 - 1e-10, "s = {s}");
        }
    }

    #[test]
    fn tilde_loop_closes_and_decomposes() {
        let path = tilde_loop(4, 9).unwrap();
        assert!(path.is_closed());
        let result = closed_loop_parity(&path).unwrap();
        assert_eq!(result.parity, Sign::Plus);
        let by_name: std::collections::HashMap<&str, Sign> = result
            .segments
            .iter()
            .map(|(n, s)| (n.as_str(), *s))
            .collect();
        assert_eq!(by_name[TILDE_SEGMENT_L1], Sign::Minus);
        assert_eq!(by_name[TILDE_SEGMENT_L2], Sign::Plus);
        assert_eq!(by_name[TILDE_SEGMENT_CLOSING], Sign::Minus);
        let product = result
            .segments
            .iter()
            .fold(Sign::Plus, |acc, (_, s)| acc * *s);
        assert_eq!(product, Sign::Plus);
    }

    #[test]
    fn closed_loop_parity_of_constant_loop() {
        let m = Dmat::from_diagonal(&Dvec::from_vec(vec![2.0, -1.0]));
        let path = TruncatedOperatorPath::new_closed(
            vec![0.0, 0.5, 1.0],
            vec![m.clone(), m.clone(), m],
        )
        .unwrap();
        let result = closed_loop_parity(&path).unwrap();
        assert_eq!(result.parity, Sign::Plus);
        assert_eq!(result.segments.len(), 1);
        assert_eq!(result.segments[0].1, Sign::Plus);
    }

    #[test]
    fn closed_loop_parity_trivial_for_random_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..25 {
            let dim = rng.gen_range(2..=8);
            let path = random_trig_path(&mut rng, dim, 41, true);
            match closed_loop_parity(&path) {
                Ok(result) => {
                    assert_eq!(result.parity, Sign::Plus);
                    let product = result
                        .segments
                        .iter()
                        .fold(Sign::Plus, |acc, (_, s)| acc * *s);
                    assert_eq!(product, Sign::Plus);
                }
                Err(Error::NoRegularPoint) => (),
                Err(e) => panic!("unexpected error {e}"),
            }
        }
    }

    #[test]
    fn parity_equals_spectral_flow_on_random_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..60 {
            let dim = rng.gen_range(2..=8);
            let path = random_open_path(&mut rng, dim, 41);
            let parity = parity_segment(&path).unwrap();
            let flow = spectral_flow_mod2(&path).unwrap();
            assert_eq!(parity, flow);
        }
    }

    #[test]
    fn parity_multiplicativity_over_interior_cut() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut tested = 0;
        'outer: for _ in 0..80 {
            let dim = rng.gen_range(2..=6);
            let path = random_open_path(&mut rng, dim, 41);
            // Find an invertible interior sample.
            for cut in (5..path.len() - 5).step_by(3) {
                if scaled_det(path.sample(cut)) > 1e-6 {
                    let left = TruncatedOperatorPath::new(
                        path.grid()[..=cut].to_vec(),
                        path.samples()[..=cut].to_vec(),
                    )
                    .unwrap();
                    let right = TruncatedOperatorPath::new(
                        path.grid()[cut..].to_vec(),
                        path.samples()[cut..].to_vec(),
                    )
                    .unwrap();
                    let whole = parity_segment(&path).unwrap();
                    let split =
                        parity_segment(&left).unwrap() * parity_segment(&right).unwrap();
                    assert_eq!(whole, split);
                    tested += 1;
                    continue 'outer;
                }
            }
        }
        assert!(tested >= 40, "only {tested} paths admitted an interior cut");
    }

    #[test]
    fn parity_homotopy_invariance_under_small_perturbations() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..50 {
            let dim = rng.gen_range(2..=6);
            let path = random_open_path(&mut rng, dim, 41);
            let gap = |m: &Dmat| {
                let (values, _) = eig_sym(m).unwrap();
                values.iter().fold(f64::INFINITY, |acc, v| acc.min(v.abs()))
            };
            let endpoint_gap = gap(path.sample(0)).min(gap(path.sample(path.len() - 1)));
            // Symmetric perturbation path bounded by half the endpoint gap.
            let perturbation = random_trig_path(&mut rng, dim, 41, false);
            let scale = perturbation
                .samples()
                .iter()
                .map(|s| s.norm())
                .fold(0.0_f64, f64::max);
            let factor = 0.45 * endpoint_gap / scale.max(1e-12);
            let perturbed_samples: Vec<Dmat> = path
                .samples()
                .iter()
                .zip(perturbation.samples())
                .map(|(s, p)| s + p * factor)
                .collect();
            let perturbed =
                TruncatedOperatorPath::new(path.grid().to_vec(), perturbed_samples).unwrap();
            assert_eq!(
                parity_segment(&path).unwrap(),
                parity_segment(&perturbed).unwrap()
            );
        }
    }

    #[test]
    fn find_transversal_cases() {
        // Everywhere invertible: nothing needed.
        let m = Dmat::from_diagonal(&Dvec::from_vec(vec![1.0, -2.0]));
        let path =
            TruncatedOperatorPath::new(vec![0.0, 1.0], vec![m.clone(), m.clone()]).unwrap();
        let v = find_transversal(&path);
        assert_eq!(v.dim(), 0);
        verify_transversal(&path, &v).unwrap();

        // tilde_l1 with a sample at theta = 0: exactly the middle direction.
        let path = tilde_l1_path(2, 33).unwrap();
        let v = find_transversal(&path);
        assert_eq!(v.dim(), 1);
        let e0 = index_to_slot(0, 2);
        assert_abs_diff_eq!(v.basis().column(0)[e0].abs(), 1.0, epsilon = 1e-10);
        verify_transversal(&path, &v).unwrap();

        // Rank-one rotating family: images sweep every line, V must be all of R^2.
        let n = 65;
        let grid: Vec<f64> = (0..n)
            .map(|j| 2.0 * std::f64::consts::PI * j as f64 / (n - 1) as f64)
            .collect();
        let samples: Vec<Dmat> = grid
            .iter()
            .map(|&theta| {
                let e2 = Dvec::from_vec(vec![(theta / 2.0).cos(), (theta / 2.0).sin()]);
                &e2 * e2.transpose()
            })
            .collect();
        let path = TruncatedOperatorPath::new(grid, samples).unwrap();
        let v = find_transversal(&path);
        assert_eq!(v.dim(), 2);
    }

    #[test]
    fn kernel_bundle_of_reflection_family_wraps_full_turn() {
        // L_theta = I - 2 e2(theta) e2(theta)^T over a full turn; fibers are
        // L_theta^{-1} applied to the fixed line, which rotate a full turn:
        // holonomy +1.
        let n = 129;
        let grid: Vec<f64> = (0..n)
            .map(|j| 2.0 * std::f64::consts::PI * j as f64 / (n - 1) as f64)
            .collect();
        let samples: Vec<Dmat> = grid
            .iter()
            .map(|&theta| {
                let e2 = Dvec::from_vec(vec![(theta / 2.0).cos(), (theta / 2.0).sin()]);
                Dmat::identity(2, 2) - (&e2 * e2.transpose()) * 2.0
            })
            .collect();
        let path = TruncatedOperatorPath::new_closed(grid, samples).unwrap();
        let v = TransversalSubspace::new(
            Frame::from_vector(&Dvec::from_vec(vec![1.0, 0.0])).unwrap(),
        );
        let bundle = kernel_bundle(&path, &v).unwrap();
        assert_eq!(bundle.rank(), 1);
        assert_eq!(bundle.holonomy().unwrap(), Sign::Plus);
        assert_eq!(bundles::w1(&bundle).unwrap(), bundles::Z2Class::Trivial);
    }

    #[test]
    fn kernel_bundle_of_truncated_loop_shows_the_moebius_shadow() {
        // Odd samples-per-segment keeps every sample invertible, so the
        // middle direction e_0 alone passes the sampled transversality
        // check. The resulting line bundle is the Moebius bundle: along the
        // conjugated return the fiber lift W_s^T L W_s e_0 runs continuously
        // from +e_0 to -e_0. This is the finite-dimensional shadow of the
        // nontrivial index bundle of the untruncated loop; the underlying
        // continuous family is not transversal to e_0 alone (the defect
        // crossing has cokernel e_N), which is why no contradiction with
        // the trivial closed-loop parity arises.
        let path = tilde_loop(2, 9).unwrap();
        let dim = path.dim();
        let mut e0 = Dvec::zeros(dim);
        e0[index_to_slot(0, 2)] = 1.0;
        let v = TransversalSubspace::new(Frame::from_vector(&e0).unwrap());
        let bundle = kernel_bundle(&path, &v).unwrap();
        assert_eq!(bundle.rank(), 1);
        assert_eq!(bundle.holonomy().unwrap(), Sign::Minus);

        // Adding the defect direction e_N makes V transversal to the
        // continuous family as well, and the rank-2 kernel bundle is then
        // trivial, matching the telescoped loop parity +1: the extra sign
        // flip of e_N along the defect-closing segment cancels the flip of
        // e_0 along the return.
        let mut e_top = Dvec::zeros(dim);
        e_top[index_to_slot(2, 2)] = 1.0;
        let v2 = TransversalSubspace::new(
            numerics::orthonormal_frame(&[e0, e_top]).unwrap(),
        );
        let bundle2 = kernel_bundle(&path, &v2).unwrap();
        assert_eq!(bundle2.rank(), 2);
        assert_eq!(bundle2.holonomy().unwrap(), Sign::Plus);
    }

    #[test]
    fn kernel_bundle_rejects_non_transversal_subspace() {
        // Family with image contained in the first axis; V along the same
        // axis can never be transversal.
        let m = Dmat::from_diagonal(&Dvec::from_vec(vec![1.0, 0.0]));
        let path = TruncatedOperatorPath::new_closed(
            vec![0.0, 0.5, 1.0],
            vec![m.clone(), m.clone(), m.clone()],
        )
        .unwrap();
        let v = TransversalSubspace::new(
            Frame::from_vector(&Dvec::from_vec(vec![1.0, 0.0])).unwrap(),
        );
        assert!(matches!(
            kernel_bundle(&path, &v),
            Err(Error::NotTransversal { .. })
        ));
    }

    #[test]
    fn kernel_bundle_w1_is_independent_of_transversal_choice() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let mut done = 0;
        let mut attempts = 0;
        while done < 10 {
            attempts += 1;
            assert!(attempts < 500, "generator starved");
            let path = random_invertible_loop(&mut rng, 2..=5, 201);
            let dim = path.dim();
            let v1 = TransversalSubspace::new(random_frame(&mut rng, dim, 1));
            let v2 = TransversalSubspace::new(random_frame(&mut rng, dim, 2.min(dim)));
            let (b1, b2, bt) = match (
                kernel_bundle(&path, &v1),
                kernel_bundle(&path, &v2),
                kernel_bundle(&path.transposed(), &v1),
            ) {
                (Ok(a), Ok(b), Ok(c)) => (a, b, c),
                // Fibers may still outrun this sampling; that loop is no
                // counterexample, just unresolved.
                (Err(Error::AlignmentGapTooLarge { .. }), _, _)
                | (_, Err(Error::AlignmentGapTooLarge { .. }), _)
                | (_, _, Err(Error::AlignmentGapTooLarge { .. })) => continue,
                (a, b, c) => panic!("unexpected outcome {a:?} / {b:?} / {c:?}"),
            };
            assert_eq!(bundles::w1(&b1).unwrap(), bundles::Z2Class::Trivial);
            assert_eq!(bundles::w1(&b2).unwrap(), bundles::Z2Class::Trivial);
            // Adjoint consistency: same class for the transposed family.
            assert_eq!(bundles::w1(&bt).unwrap(), bundles::Z2Class::Trivial);
            done += 1;
        }
    }

    fn random_frame(rng: &mut impl Rng, d: usize, r: usize) -> Frame {
        loop {
            let vecs: Vec<Dvec> = (0..r)
                .map(|_| Dvec::from_fn(d, |_, _| rng.gen_range(-1.0..1.0)))
                .collect();
            if let Ok(f) = numerics::orthonormal_frame(&vecs) {
                return f;
            }
        }
    }
}

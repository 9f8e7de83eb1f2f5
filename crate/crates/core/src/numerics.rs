//! Dense linear-algebra kernels shared by the rest of the crate: symmetric
//! eigendecomposition, real spectra with algebraic multiplicities, orthonormal
//! frames, principal angles between subspaces, and orthogonal frame alignment.
//!
//! Everything operates on `f64` matrices at desk scale (dimensions in the tens).
//! All functions are pure; values are immutable once constructed.

use nalgebra::{Complex, DMatrix, DVector};
use serde::Serialize;
use std::fmt;
use std::ops::{Mul, Neg};

use crate::error::{Error, Result};

pub type Dmat = DMatrix<f64>;
pub type Dvec = DVector<f64>;

/// Relative tolerance for accepting a matrix as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Relative residual allowed for the symmetric eigensolver.
pub const EIG_RESIDUAL_TOL: f64 = 1e-9;
/// Orthonormality defect allowed in a [`Frame`].
pub const FRAME_ORTHO_TOL: f64 = 1e-10;
/// Ratio of smallest to largest singular value below which a set of vectors
/// counts as rank deficient.
pub const RANK_TOL: f64 = 1e-10;
/// Largest principal angle up to which two spans can be aligned unambiguously.
pub const ALIGN_GAP_LIMIT: f64 = std::f64::consts::FRAC_PI_4;

/// An element of {+1, -1}: parity signs, determinant signs, holonomy signs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_f64(x: f64) -> Sign {
        if x < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    /// (-1)^k
    pub fn from_parity_of(k: usize) -> Sign {
        if k.is_multiple_of(2) {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn value(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.value())
    }
}

impl Serialize for Sign {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_i32(self.value())
    }
}

/// An orthonormal spanning set of a linear subspace of R^d, stored as the
/// columns of a d x r matrix. The universal currency for stable/unstable
/// spaces, eigenframes and bundle fibers. `r = 0` is the zero subspace.
#[derive(Debug, Clone)]
pub struct Frame {
    cols: Dmat,
}

impl Frame {
    /// The zero subspace of R^d.
    pub fn empty(ambient_dim: usize) -> Frame {
        Frame {
            cols: Dmat::zeros(ambient_dim, 0),
        }
    }

    /// Wraps a matrix whose columns are already orthonormal within
    /// [`FRAME_ORTHO_TOL`]; rejects anything else.
    pub fn from_matrix(cols: Dmat) -> Result<Frame> {
        require_finite(&cols)?;
        let defect = orthonormality_defect(&cols);
        if defect > FRAME_ORTHO_TOL {
            return Err(Error::InvalidInput(format!(
                "frame columns are not orthonormal: defect {defect:.3e}"
            )));
        }
        Ok(Frame { cols })
    }

    /// Single-column frame spanning `v` (normalized).
    pub fn from_vector(v: &Dvec) -> Result<Frame> {
        orthonormal_frame(std::slice::from_ref(v))
    }

    /// The standard basis e_1..e_d of R^d.
    pub fn standard_basis(dim: usize) -> Frame {
        Frame {
            cols: Dmat::identity(dim, dim),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.cols.nrows()
    }

    /// Number of columns, i.e. the dimension of the spanned subspace.
    pub fn rank(&self) -> usize {
        self.cols.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.ncols() == 0
    }

    pub fn matrix(&self) -> &Dmat {
        &self.cols
    }

    pub fn column(&self, j: usize) -> Dvec {
        self.cols.column(j).into_owned()
    }

    /// Orthogonal projection of `v` onto the spanned subspace.
    pub fn project(&self, v: &Dvec) -> Dvec {
        if self.is_empty() {
            return Dvec::zeros(self.ambient_dim());
        }
        &self.cols * (self.cols.transpose() * v)
    }

    /// Orthonormal basis of the orthogonal complement.
    pub fn complement(&self) -> Frame {
        let d = self.ambient_dim();
        let r = self.rank();
        if r == 0 {
            return Frame::standard_basis(d);
        }
        if r == d {
            return Frame::empty(d);
        }
        // Project the standard basis out of the span and keep what survives.
        let mut basis: Vec<Dvec> = Vec::with_capacity(d - r);
        for j in 0..d {
            let mut e = Dvec::zeros(d);
            e[j] = 1.0;
            let mut c = &e - self.project(&e);
            for b in &basis {
                let coeff = b.dot(&c);
                c -= b * coeff;
            }
            let norm = c.norm();
            if norm > 1e-8 {
                basis.push(c / norm);
            }
            if basis.len() == d - r {
                break;
            }
        }
        let mut m = Dmat::zeros(d, basis.len());
        for (j, b) in basis.iter().enumerate() {
            m.set_column(j, b);
        }
        Frame { cols: m }
    }

    pub(crate) fn from_orthonormal_columns_unchecked(cols: Dmat) -> Frame {
        debug_assert!(orthonormality_defect(&cols) <= 1e-8);
        Frame { cols }
    }
}

/// max |F^T F - I|
pub fn orthonormality_defect(cols: &Dmat) -> f64 {
    let r = cols.ncols();
    if r == 0 {
        return 0.0;
    }
    let gram = cols.transpose() * cols;
    let mut defect: f64 = 0.0;
    for i in 0..r {
        for j in 0..r {
            let target = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((gram[(i, j)] - target).abs());
        }
    }
    defect
}

/// Nondecreasing canonical angles in [0, pi/2] between two subspaces. A zero
/// angle witnesses a nontrivial intersection.
#[derive(Debug, Clone)]
pub struct PrincipalAngles {
    angles: Vec<f64>,
}

impl PrincipalAngles {
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn smallest(&self) -> Option<f64> {
        self.angles.first().copied()
    }

    pub fn largest(&self) -> Option<f64> {
        self.angles.last().copied()
    }

    /// Number of angles below `tol`, i.e. the numerically detected dimension
    /// of the intersection.
    pub fn count_below(&self, tol: f64) -> usize {
        self.angles.iter().filter(|a| **a < tol).count()
    }
}

fn symmetry_defect(s: &Dmat) -> f64 {
    let mut defect: f64 = 0.0;
    for i in 0..s.nrows() {
        for j in (i + 1)..s.ncols() {
            defect = defect.max((s[(i, j)] - s[(j, i)]).abs());
        }
    }
    defect
}

/// Rejects matrices with NaN or infinite entries before they can reach the
/// decompositions (comparison-based guards do not see NaN).
pub fn require_finite(m: &Dmat) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput("matrix has non-finite entries".into()))
    }
}

/// Checks symmetry relative to the matrix scale.
pub fn require_symmetric(s: &Dmat) -> Result<()> {
    if s.nrows() != s.ncols() {
        return Err(Error::InvalidInput(format!(
            "expected a square matrix, got {}x{}",
            s.nrows(),
            s.ncols()
        )));
    }
    require_finite(s)?;
    let scale = s.norm().max(1.0);
    let defect = symmetry_defect(s);
    let tol = SYMMETRY_TOL * scale;
    if defect > tol {
        return Err(Error::SymmetryViolation { defect, tol });
    }
    Ok(())
}

/// Eigendecomposition of a symmetric matrix. Returns the eigenvalues in
/// descending order together with the matching orthonormal eigenframe.
pub fn eig_sym(s: &Dmat) -> Result<(Dvec, Frame)> {
    require_symmetric(s)?;
    let sym = (s + s.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
    });
    let mut values = Dvec::zeros(n);
    let mut vectors = Dmat::zeros(n, n);
    for (slot, &idx) in order.iter().enumerate() {
        values[slot] = eig.eigenvalues[idx];
        vectors.set_column(slot, &eig.eigenvectors.column(idx));
    }
    Ok((values, Frame::from_orthonormal_columns_unchecked(vectors)))
}

/// Eigenvalues of a square real matrix grouped into clusters with algebraic
/// multiplicities. Complex eigenvalues appear in conjugate pairs and the
/// multiplicities always sum to the dimension.
pub fn real_spectrum(m: &Dmat) -> Vec<(Complex<f64>, usize)> {
    assert_eq!(m.nrows(), m.ncols(), "spectrum needs a square matrix");
    assert!(
        m.iter().all(|x| x.is_finite()),
        "spectrum needs finite entries"
    );
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    let raw = m.clone().complex_eigenvalues();
    let scale = raw.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
    let tol = 1e-6 * scale;

    // Greedy clustering; near-real clusters are snapped onto the real axis so
    // that a 2x2 Schur block with a tiny imaginary part counts as a double
    // real eigenvalue.
    let mut clusters: Vec<(Complex<f64>, usize)> = Vec::new();
    for z in raw.iter() {
        let mut z = *z;
        if z.im.abs() <= tol {
            z.im = 0.0;
        }
        match clusters.iter_mut().find(|(c, _)| (*c - z).norm() <= tol) {
            Some((_, count)) => *count += 1,
            None => clusters.push((z, 1)),
        }
    }
    clusters.sort_by(|a, b| {
        (b.0.re, b.0.im)
            .partial_cmp(&(a.0.re, a.0.im))
            .expect("finite eigenvalues")
    });
    clusters
}

/// Orthonormalizes a linearly independent set of vectors without changing its
/// span. Column order and orientation follow the input (QR with positive
/// diagonal).
pub fn orthonormal_frame(vectors: &[Dvec]) -> Result<Frame> {
    if vectors.is_empty() {
        return Err(Error::InvalidInput("no vectors given".into()));
    }
    let d = vectors[0].len();
    let k = vectors.len();
    if vectors.iter().any(|v| v.len() != d) {
        return Err(Error::InvalidInput("ambient dimensions differ".into()));
    }
    if k > d {
        return Err(Error::RankDeficient { ratio: 0.0 });
    }
    let mut m = Dmat::zeros(d, k);
    for (j, v) in vectors.iter().enumerate() {
        m.set_column(j, v);
    }
    require_finite(&m)?;
    let svd = m.clone().svd(false, false);
    let sigma = &svd.singular_values;
    let largest = sigma.max();
    let smallest = sigma.min();
    if smallest < RANK_TOL * largest || largest == 0.0 {
        return Err(Error::RankDeficient {
            ratio: if largest > 0.0 { smallest / largest } else { 0.0 },
        });
    }
    let qr = m.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            let col = -q.column(j);
            q.set_column(j, &col);
        }
    }
    Ok(Frame::from_orthonormal_columns_unchecked(q))
}

/// Principal angles between the spans of two frames in the same ambient
/// space, returned nondecreasing in [0, pi/2]. The list has
/// min(rank1, rank2) entries.
///
/// Cosines are the singular values of the overlap F1^T F2 (clamped before
/// inversion); since arccos alone loses absolute accuracy near zero angles,
/// the sines are taken from the singular values of (I - F1 F1^T) F2 and the
/// two are combined with atan2. Zero angles are then resolved to machine
/// precision, which the intersection-dimension tests rely on.
pub fn principal_angles(f1: &Frame, f2: &Frame) -> PrincipalAngles {
    assert_eq!(
        f1.ambient_dim(),
        f2.ambient_dim(),
        "principal angles need a common ambient space"
    );
    let k = f1.rank().min(f2.rank());
    if k == 0 {
        return PrincipalAngles { angles: Vec::new() };
    }
    let overlap = f1.matrix().transpose() * f2.matrix();
    let mut cosines: Vec<f64> = overlap
        .svd(false, false)
        .singular_values
        .iter()
        .map(|s| s.clamp(-1.0, 1.0))
        .collect();
    cosines.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));

    // Residual of f2 after projecting out f1; its singular values are the
    // sines (plus exact ones for directions with no cosine partner).
    let residual = f2.matrix() - f1.matrix() * (f1.matrix().transpose() * f2.matrix());
    let mut sines: Vec<f64> = residual
        .svd(false, false)
        .singular_values
        .iter()
        .map(|s| s.clamp(0.0, 1.0))
        .collect();
    sines.sort_by(|a, b| a.partial_cmp(b).expect("finite singular values"));

    let angles: Vec<f64> = (0..k).map(|i| sines[i].atan2(cosines[i])).collect();
    PrincipalAngles { angles }
}

/// Largest principal angle, or 0 for empty frames.
pub fn largest_principal_angle(f1: &Frame, f2: &Frame) -> f64 {
    principal_angles(f1, f2).largest().unwrap_or(0.0)
}

/// Re-parametrizes `f` by the orthogonal Procrustes solution so that it is as
/// close as possible to `f_ref`, and reports the determinant sign of the
/// optimal change of basis. The sign carries orientation transport along
/// sampled families of subspaces.
///
/// Requires equal ambient dimension and rank, and spans within
/// [`ALIGN_GAP_LIMIT`] of each other so that the overlap matrix is
/// invertible and the polar factor unambiguous.
pub fn align_frame(f: &Frame, f_ref: &Frame) -> Result<(Frame, Sign)> {
    if f.ambient_dim() != f_ref.ambient_dim() {
        return Err(Error::InvalidInput(
            "align_frame: ambient dimensions differ".into(),
        ));
    }
    if f.rank() != f_ref.rank() {
        return Err(Error::InvalidInput(format!(
            "align_frame: ranks differ ({} vs {})",
            f.rank(),
            f_ref.rank()
        )));
    }
    let r = f.rank();
    if r == 0 {
        return Ok((f_ref.clone(), Sign::Plus));
    }
    let overlap = f.matrix().transpose() * f_ref.matrix();
    let svd = overlap.clone().svd(true, true);
    let sigma_min = svd.singular_values.min();
    let angle = sigma_min.clamp(-1.0, 1.0).acos();
    if angle >= ALIGN_GAP_LIMIT {
        return Err(Error::AlignmentGapTooLarge {
            angle,
            limit: ALIGN_GAP_LIMIT,
        });
    }
    let u = svd.u.expect("svd with u");
    let v_t = svd.v_t.expect("svd with v_t");
    // Polar factor of the overlap matrix.
    let q = u * v_t;
    let aligned = f.matrix() * &q;
    let sign = Sign::from_f64(q.determinant());
    Ok((Frame::from_orthonormal_columns_unchecked(aligned), sign))
}

/// Decomposition of a special orthogonal matrix into planar rotations plus a
/// fixed subspace. Supplies the skew-symmetric logarithm and arbitrary
/// fractional powers (the geodesic from the identity to the matrix in SO(d)),
/// exactly orthogonal by construction.
#[derive(Debug, Clone)]
pub struct PlaneRotations {
    dim: usize,
    /// (v, w, phi): rotation by phi in the oriented plane (v, w).
    planes: Vec<(Dvec, Dvec, f64)>,
    fixed: Vec<Dvec>,
}

impl PlaneRotations {
    /// Splits `c` in SO(d) into invariant rotation planes. Fails if `c` is not
    /// special orthogonal or has -1 as an eigenvalue (rotation angle pi with
    /// no canonical plane orientation), which does not occur for the matrices
    /// this crate feeds it.
    pub fn decompose(c: &Dmat) -> Result<PlaneRotations> {
        let d = c.nrows();
        if c.ncols() != d {
            return Err(Error::InvalidInput("expected a square matrix".into()));
        }
        let ortho_defect = orthonormality_defect(c);
        if ortho_defect > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "matrix is not orthogonal: defect {ortho_defect:.3e}"
            )));
        }
        if c.determinant() < 0.0 {
            return Err(Error::InvalidInput(
                "matrix has determinant -1; no skew logarithm exists".into(),
            ));
        }
        let sym = (c + c.transpose()) * 0.5;
        let skew = (c - c.transpose()) * 0.5;
        // -skew^2 is symmetric PSD with eigenvalue sin^2(phi) on each plane.
        let minus_skew_sq = -(&skew * &skew);
        let (mu, basis) = eig_sym(&minus_skew_sq)?;

        let zero_tol = 1e-10;
        let mut planes: Vec<(Dvec, Dvec, f64)> = Vec::new();
        let mut fixed: Vec<Dvec> = Vec::new();

        // Group eigenvectors into clusters of equal sin^2(phi), then peel off
        // one invariant plane at a time inside each cluster.
        let mut i = 0;
        while i < mu.len() {
            let mut j = i + 1;
            while j < mu.len() && (mu[j] - mu[i]).abs() <= 1e-8 * mu[i].abs().max(1.0) {
                j += 1;
            }
            let cluster: Vec<Dvec> = (i..j).map(|k| basis.column(k)).collect();
            let b = mu[i].max(0.0).sqrt();
            if b <= zero_tol {
                // Fixed directions; cos(phi) must be +1.
                for v in cluster {
                    let cos_phi = v.dot(&(&sym * &v));
                    if cos_phi < 0.0 {
                        return Err(Error::Numerical(
                            "orthogonal matrix has a -1 eigenvalue; skew logarithm is ambiguous"
                                .into(),
                        ));
                    }
                    fixed.push(v);
                }
            } else {
                let mut remaining = cluster;
                while let Some(v) = remaining.pop() {
                    let norm_v = v.norm();
                    if norm_v < 1e-6 {
                        continue;
                    }
                    let v = v / norm_v;
                    let w = (&skew * &v) / b;
                    let cos_phi = v.dot(&(&sym * &v));
                    let phi = b.atan2(cos_phi);
                    planes.push((v.clone(), w.clone(), phi));
                    // Deflate and re-orthonormalize what is left of the cluster.
                    let mut survivors: Vec<Dvec> = Vec::with_capacity(remaining.len());
                    for r in remaining.drain(..) {
                        let mut r = &r - &v * v.dot(&r) - &w * w.dot(&r);
                        for s in &survivors {
                            let coeff = s.dot(&r);
                            r -= s * coeff;
                        }
                        let n = r.norm();
                        if n > 1e-6 {
                            survivors.push(r / n);
                        }
                    }
                    remaining = survivors;
                }
            }
            i = j;
        }
        Ok(PlaneRotations {
            dim: d,
            planes,
            fixed,
        })
    }

    /// The matrix C^alpha = exp(alpha * log C).
    pub fn power(&self, alpha: f64) -> Dmat {
        let mut m = Dmat::zeros(self.dim, self.dim);
        for v in &self.fixed {
            m += v * v.transpose();
        }
        for (v, w, phi) in &self.planes {
            let (s, c) = (alpha * phi).sin_cos();
            m += (v * v.transpose() + w * w.transpose()) * c;
            m += (w * v.transpose() - v * w.transpose()) * s;
        }
        m
    }

    /// The skew-symmetric logarithm K with exp(K) = C.
    pub fn skew_generator(&self) -> Dmat {
        let mut k = Dmat::zeros(self.dim, self.dim);
        for (v, w, phi) in &self.planes {
            k += (w * v.transpose() - v * w.transpose()) * *phi;
        }
        k
    }

    pub fn rotation_angles(&self) -> Vec<f64> {
        self.planes.iter().map(|(_, _, phi)| *phi).collect()
    }
}

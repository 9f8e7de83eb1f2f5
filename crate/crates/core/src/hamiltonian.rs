//! Families of linear Hamiltonian systems J u' + A(lambda, t) u = 0 over
//! torus parameter spaces: hyperbolic splittings of the asymptotic systems,
//! numerically transported stable/unstable subspaces at t = 0, kernel
//! detection through principal angles, and bifurcation-candidate scans over
//! the parameter torus.
//!
//! The sought subspaces are always integrated in the direction that makes
//! them expanding: the stable frame is seeded at t = +T and carried backward
//! to 0, the unstable frame at t = -T and carried forward. Integrating the
//! other way collapses every frame onto the dominant directions.

use rayon::prelude::*;
use serde::Serialize;
use std::collections::{HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::numerics::{self, principal_angles, real_spectrum, Dmat, Frame};

/// The standard symplectic matrix [[0, -I], [I, 0]] on R^{2n}.
pub fn j_symplectic(half_dim: usize) -> Dmat {
    let n = half_dim;
    let mut j = Dmat::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = -1.0;
        j[(n + i, i)] = 1.0;
    }
    j
}

/// A point of the parameter torus T^m, stored as angles canonicalized into
/// [-pi, pi).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterPoint {
    angles: Vec<f64>,
}

impl ParameterPoint {
    pub fn new(angles: Vec<f64>) -> ParameterPoint {
        ParameterPoint {
            angles: angles.into_iter().map(canonical_angle).collect(),
        }
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn dim(&self) -> usize {
        self.angles.len()
    }

    /// Sum of the torus coordinates (mod nothing; callers reduce as needed).
    pub fn angle_sum(&self) -> f64 {
        self.angles.iter().sum()
    }
}

/// Reduces an angle into [-pi, pi).
pub fn canonical_angle(theta: f64) -> f64 {
    use std::f64::consts::PI;
    let two_pi = 2.0 * PI;
    let mut t = (theta + PI).rem_euclid(two_pi) - PI;
    if t >= PI {
        t -= two_pi;
    }
    t
}

/// A family of linear Hamiltonian systems over a parameter torus. Evaluators
/// must be pure (no interior mutability): scans call them from parallel
/// workers.
pub trait HamiltonianFamily: Sync {
    /// n, for the state space R^{2n}.
    fn half_dim(&self) -> usize;

    /// Dimension m of the parameter torus.
    fn torus_dim(&self) -> usize;

    /// The symmetric coefficient matrix A(lambda, t).
    fn evaluate(&self, lambda: &ParameterPoint, t: f64) -> Dmat;

    /// The uniform limit of A(lambda, t) as t -> +infinity.
    fn asymptotic_plus(&self, lambda: &ParameterPoint) -> Dmat;

    /// The uniform limit of A(lambda, t) as t -> -infinity.
    fn asymptotic_minus(&self, lambda: &ParameterPoint) -> Dmat;

    /// Times where A(lambda, .) may lose smoothness; the integrator splits
    /// its sweeps there.
    fn breakpoints(&self) -> Vec<f64> {
        vec![0.0]
    }
}

/// ||A(lambda, t) - A(lambda, +-infinity)|| in the operator norm at the
/// given time; the sign of `t` selects the limit. Used for saturation
/// warnings and spot checks.
pub fn asymptotic_residual(family: &dyn HamiltonianFamily, lambda: &ParameterPoint, t: f64) -> f64 {
    let limit = if t >= 0.0 {
        family.asymptotic_plus(lambda)
    } else {
        family.asymptotic_minus(lambda)
    };
    (family.evaluate(lambda, t) - limit)
        .svd(false, false)
        .singular_values
        .max()
}

/// Numerical tolerances of the transport pipeline. All config-exposed.
#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    /// Minimal |Re| of an eigenvalue of J A(+-infinity) to accept
    /// hyperbolicity.
    pub hyperbolic: f64,
    /// Principal angles below this count as a kernel direction; transport
    /// error dominates, so this is far above the hyperbolicity tolerance.
    pub kernel_angle: f64,
    /// Warn when ||A(lambda, T) - A(lambda, inf)|| exceeds this at the
    /// integration horizon.
    pub asymptote_residual: f64,
    pub ode: OdeOptions,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hyperbolic: 1e-6,
            kernel_angle: 1e-3,
            asymptote_residual: 0.05,
            ode: OdeOptions::default(),
        }
    }
}

/// Adaptive Runge-Kutta options.
#[derive(Debug, Clone, Serialize)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_step: f64,
    pub min_step: f64,
    /// Re-orthonormalize the transported frame after every span of this
    /// length in t, so growth factors stay far from overflow between passes.
    pub reortho_span: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            initial_step: 1e-2,
            min_step: 1e-13,
            reortho_span: 1.0,
        }
    }
}

/// Stable/unstable splitting of a hyperbolic asymptotic system.
#[derive(Debug, Clone)]
pub struct AsymptoticSplitting {
    /// Invariant subspace of J A for eigenvalues with Re < 0.
    pub stable: Frame,
    /// Invariant subspace for Re > 0.
    pub unstable: Frame,
    /// min |Re| over the spectrum of J A.
    pub spectral_gap: f64,
}

/// Splits R^{2n} into the stable and unstable invariant subspaces of
/// J A_inf. Hyperbolicity (no spectrum within `tol` of the imaginary axis)
/// is required; the subspaces are extracted from the matrix sign function of
/// J A_inf, computed by a scaled Newton iteration, which is well conditioned
/// exactly on hyperbolic matrices and handles defective eigenvalues.
pub fn hyperbolic_splitting(a_inf: &Dmat, tol: f64) -> Result<AsymptoticSplitting> {
    numerics::require_symmetric(a_inf)?;
    let dim = a_inf.nrows();
    if !dim.is_multiple_of(2) {
        return Err(Error::InvalidInput(
            "a Hamiltonian coefficient matrix must have even dimension".into(),
        ));
    }
    let m = j_symplectic(dim / 2) * a_inf;
    let spectrum = real_spectrum(&m);
    let gap = spectrum
        .iter()
        .map(|(z, _)| z.re.abs())
        .fold(f64::INFINITY, f64::min);
    if gap < tol {
        return Err(Error::NotHyperbolic {
            min_re: gap,
            tol,
            at: String::new(),
        });
    }
    let stable_count: usize = spectrum
        .iter()
        .filter(|(z, _)| z.re < 0.0)
        .map(|(_, k)| k)
        .sum();
    let sign = matrix_sign(&m)?;
    let identity = Dmat::identity(dim, dim);
    let stable = range_frame(&((&identity - &sign) * 0.5), stable_count);
    let unstable = range_frame(&((&identity + &sign) * 0.5), dim - stable_count);
    Ok(AsymptoticSplitting {
        stable,
        unstable,
        spectral_gap: gap,
    })
}

/// Matrix sign function by Newton iteration with determinantal scaling.
fn matrix_sign(m: &Dmat) -> Result<Dmat> {
    let d = m.nrows();
    let mut x = m.clone();
    for _ in 0..100 {
        let det = x.determinant().abs();
        if !det.is_finite() || det == 0.0 {
            return Err(Error::Numerical("sign iteration hit a singular iterate".into()));
        }
        let mu = det.powf(-1.0 / d as f64);
        let scaled = &x * mu;
        let inverse = scaled
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("sign iteration iterate not invertible".into()))?;
        let next = (&scaled + &inverse) * 0.5;
        let delta = (&next - &x).norm();
        let done = delta <= 1e-13 * next.norm().max(1.0);
        x = next;
        if done {
            let residual = (&x * &x - Dmat::identity(d, d)).norm();
            if residual > 1e-8 * (d as f64) {
                return Err(Error::Numerical(format!(
                    "sign function residual {residual:.3e}"
                )));
            }
            return Ok(x);
        }
    }
    Err(Error::Numerical("matrix sign iteration did not converge".into()))
}

/// Orthonormal basis of the range of a rank-k projector.
fn range_frame(projector: &Dmat, k: usize) -> Frame {
    let d = projector.nrows();
    if k == 0 {
        return Frame::empty(d);
    }
    let svd = projector.clone().svd(true, false);
    let u = svd.u.expect("svd with u");
    let mut cols = Dmat::zeros(d, k);
    for j in 0..k {
        cols.set_column(j, &u.column(j));
    }
    Frame::from_orthonormal_columns_unchecked(cols)
}

// Dormand-Prince 5(4) coefficients.
const DP_C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [&[f64]; 6] = [
    &[1.0 / 5.0],
    &[3.0 / 40.0, 9.0 / 40.0],
    &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
    &[
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
    ],
    &[
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Transports a frame under u' = J A(lambda, t) u from `t_from` to `t_to`
/// (either direction) with an adaptive embedded 4th/5th-order scheme,
/// re-orthonormalizing along the way. Sweeps are split at the family's
/// breakpoints so one-sided smoothness is enough for the stepper. Returns
/// the orthonormal frame spanning the transported subspace at `t_to`.
pub fn integrate_frame(
    family: &dyn HamiltonianFamily,
    lambda: &ParameterPoint,
    t_from: f64,
    t_to: f64,
    frame: &Frame,
    opts: &OdeOptions,
) -> Result<Frame> {
    if t_from == t_to {
        return Err(Error::InvalidInput("integration span is empty".into()));
    }
    if frame.is_empty() {
        return Err(Error::InvalidInput("cannot transport an empty frame".into()));
    }
    let j = j_symplectic(family.half_dim());
    let rhs = |t: f64, u: &Dmat| -> Dmat { &j * family.evaluate(lambda, t) * u };

    // Traversal-ordered sweep boundaries, split at interior breakpoints.
    let forward = t_to > t_from;
    let mut stops: Vec<f64> = family
        .breakpoints()
        .into_iter()
        .filter(|b| {
            let (lo, hi) = if forward { (t_from, t_to) } else { (t_to, t_from) };
            *b > lo && *b < hi
        })
        .collect();
    stops.sort_by(|a, b| {
        if forward {
            a.partial_cmp(b).unwrap()
        } else {
            b.partial_cmp(a).unwrap()
        }
    });
    stops.push(t_to);

    let mut state = frame.matrix().clone();
    let mut t = t_from;
    let mut since_reortho = 0.0;
    let mut h = opts.initial_step * if forward { 1.0 } else { -1.0 };

    for stop in stops {
        while (stop - t).abs() > 1e-14 * stop.abs().max(1.0) {
            let remaining = stop - t;
            if h.abs() > remaining.abs() {
                h = remaining;
            }
            if h.abs() < opts.min_step {
                return Err(Error::IntegrationFailure(format!(
                    "step size underflow at t = {t:.6e}"
                )));
            }
            let mut stages: Vec<Dmat> = Vec::with_capacity(7);
            stages.push(rhs(t, &state));
            for (i, coeffs) in DP_A.iter().enumerate() {
                let mut y = state.clone();
                for (kj, c) in stages.iter().zip(coeffs.iter()) {
                    y += kj * (*c * h);
                }
                stages.push(rhs(t + DP_C[i] * h, &y));
            }
            let mut y5 = state.clone();
            let mut err = Dmat::zeros(state.nrows(), state.ncols());
            for (kj, (b5, b4)) in stages.iter().zip(DP_B5.iter().zip(DP_B4.iter())) {
                y5 += kj * (*b5 * h);
                err += kj * ((*b5 - *b4) * h);
            }
            let scale = opts.abs_tol + opts.rel_tol * state.abs().max().max(y5.abs().max());
            let err_norm = err.abs().max() / scale;
            if err_norm <= 1.0 {
                t += h;
                since_reortho += h.abs();
                state = y5;
                if since_reortho >= opts.reortho_span {
                    state = reorthonormalize(&state);
                    since_reortho = 0.0;
                }
            }
            let factor = if err_norm > 0.0 {
                (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
            } else {
                5.0
            };
            h *= factor;
        }
        t = stop;
    }
    let ortho = reorthonormalize(&state);
    Ok(Frame::from_orthonormal_columns_unchecked(ortho))
}

/// Thin QR with positive diagonal: keeps the frame orthonormal without
/// flipping orientations between passes.
fn reorthonormalize(state: &Dmat) -> Dmat {
    let qr = state.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for jcol in 0..q.ncols() {
        if r[(jcol, jcol)] < 0.0 {
            let col = -q.column(jcol);
            q.set_column(jcol, &col);
        }
    }
    q
}

/// E^s(lambda, 0): initial values at t = 0 of solutions decaying as
/// t -> +infinity. Seeds the stable frame of J A(lambda, +infinity) at the
/// horizon and integrates backward to 0, where the stable directions expand
/// and the computation is well conditioned. Warns (via `log`) when the
/// family has not saturated at the horizon.
pub fn stable_at_zero(
    family: &dyn HamiltonianFamily,
    lambda: &ParameterPoint,
    horizon: f64,
    tols: &Tolerances,
) -> Result<Frame> {
    let split = hyperbolic_splitting(&family.asymptotic_plus(lambda), tols.hyperbolic)?;
    let residual = asymptotic_residual(family, lambda, horizon);
    if residual > tols.asymptote_residual {
        log::warn!(
            "asymptotic residual {residual:.3e} at horizon +{horizon} exceeds {:.3e}",
            tols.asymptote_residual
        );
    }
    integrate_frame(family, lambda, horizon, 0.0, &split.stable, &tols.ode)
}

/// E^u(lambda, 0): mirror of [`stable_at_zero`], seeding the unstable frame
/// of J A(lambda, -infinity) at -horizon and integrating forward to 0.
pub fn unstable_at_zero(
    family: &dyn HamiltonianFamily,
    lambda: &ParameterPoint,
    horizon: f64,
    tols: &Tolerances,
) -> Result<Frame> {
    let split = hyperbolic_splitting(&family.asymptotic_minus(lambda), tols.hyperbolic)?;
    let residual = asymptotic_residual(family, lambda, -horizon);
    if residual > tols.asymptote_residual {
        log::warn!(
            "asymptotic residual {residual:.3e} at horizon -{horizon} exceeds {:.3e}",
            tols.asymptote_residual
        );
    }
    integrate_frame(family, lambda, -horizon, 0.0, &split.unstable, &tols.ode)
}

/// The boundary subspaces at t = 0 and their smallest principal angle.
#[derive(Debug, Clone)]
pub struct BoundarySubspaces {
    pub stable_at_zero: Frame,
    pub unstable_at_zero: Frame,
    pub smallest_angle: f64,
}

/// Detects a kernel of the linearized system at `lambda`: the homoclinic
/// problem has a nontrivial solution exactly when E^s(lambda, 0) and
/// E^u(lambda, 0) intersect nontrivially, so the kernel dimension is the
/// number of principal angles below the angle tolerance.
pub fn kernel_dimension(
    family: &dyn HamiltonianFamily,
    lambda: &ParameterPoint,
    horizon: f64,
    tols: &Tolerances,
) -> Result<(BoundarySubspaces, usize)> {
    let stable = stable_at_zero(family, lambda, horizon, tols)?;
    let unstable = unstable_at_zero(family, lambda, horizon, tols)?;
    let angles = principal_angles(&stable, &unstable);
    let smallest = angles.smallest().unwrap_or(std::f64::consts::FRAC_PI_2);
    let kernel_dim = angles.count_below(tols.kernel_angle);
    Ok((
        BoundarySubspaces {
            stable_at_zero: stable,
            unstable_at_zero: unstable,
            smallest_angle: smallest,
        },
        kernel_dim,
    ))
}

/// Scan configuration over the parameter torus.
#[derive(Debug, Clone, Serialize)]
pub struct ScanConfig {
    /// Grid resolution per torus coordinate.
    pub resolutions: Vec<usize>,
    pub horizon: f64,
    pub tolerances: Tolerances,
}

/// One grid cell of a scan.
#[derive(Debug, Clone, Serialize)]
pub struct CellRecord {
    pub index: Vec<usize>,
    pub point: ParameterPoint,
    pub smallest_angle: f64,
    pub kernel_dim: usize,
}

/// Wrap counts of the flagged cell complex around the torus: every homology
/// witness found while walking flagged cells, canonicalized. A nonzero
/// vector means the flagged set cannot be contracted inside the torus.
#[derive(Debug, Clone, Serialize)]
pub struct WrapReport {
    pub generators: Vec<Vec<i64>>,
    pub nontrivial: bool,
}

/// Result of a torus scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanResult {
    pub resolutions: Vec<usize>,
    pub cells: Vec<CellRecord>,
    /// Multi-indices of cells with kernel_dim >= 1.
    pub flagged: Vec<Vec<usize>>,
    pub wrap: WrapReport,
    /// Cells whose evaluation failed, with the error message; failures never
    /// abort the scan.
    pub cell_errors: Vec<(Vec<usize>, String)>,
    /// Scan-level warnings (e.g. the family has not saturated at the chosen
    /// horizon).
    pub warnings: Vec<String>,
}

impl ScanResult {
    pub fn flagged_count(&self) -> usize {
        self.flagged.len()
    }
}

/// The lattice point theta_j = -pi + 2 pi k_j / R_j for a multi-index.
pub fn grid_point(index: &[usize], resolutions: &[usize]) -> ParameterPoint {
    use std::f64::consts::PI;
    ParameterPoint::new(
        index
            .iter()
            .zip(resolutions)
            .map(|(&k, &r)| -PI + 2.0 * PI * k as f64 / r as f64)
            .collect(),
    )
}

fn unflatten(mut flat: usize, resolutions: &[usize]) -> Vec<usize> {
    let mut index = vec![0usize; resolutions.len()];
    for j in (0..resolutions.len()).rev() {
        index[j] = flat % resolutions[j];
        flat /= resolutions[j];
    }
    index
}

/// Evaluates [`kernel_dimension`] on the full torus grid, in parallel over
/// cells, and aggregates deterministically in lexicographic order. Flagged
/// cells (kernel_dim >= 1) form the bifurcation-candidate set; their wrap
/// counts witness whether the candidate set winds around the torus.
pub fn scan_bifurcation_set(
    family: &dyn HamiltonianFamily,
    config: &ScanConfig,
) -> Result<ScanResult> {
    let m = family.torus_dim();
    if m == 0 {
        return Err(Error::InvalidInput("scan needs at least one torus coordinate".into()));
    }
    if config.resolutions.len() != m {
        return Err(Error::InvalidInput(format!(
            "{} resolutions given for a {}-torus",
            config.resolutions.len(),
            m
        )));
    }
    if config.resolutions.iter().any(|&r| r < 2) {
        return Err(Error::InvalidInput("resolutions must be at least 2".into()));
    }
    let total: usize = config.resolutions.iter().product();

    // One saturation check up front instead of a warning per cell.
    let mut warnings = Vec::new();
    let probe = grid_point(&vec![0; m], &config.resolutions);
    for signed_horizon in [config.horizon, -config.horizon] {
        let residual = asymptotic_residual(family, &probe, signed_horizon);
        if residual > config.tolerances.asymptote_residual {
            warnings.push(format!(
                "asymptotic residual {residual:.3e} at horizon {signed_horizon} exceeds {:.3e}; \
                 consider a larger horizon",
                config.tolerances.asymptote_residual
            ));
        }
    }
    let cell_tolerances = Tolerances {
        asymptote_residual: f64::INFINITY,
        ..config.tolerances.clone()
    };

    type CellOutcome = (Vec<usize>, std::result::Result<(f64, usize), String>);
    let outcomes: Vec<CellOutcome> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let index = unflatten(flat, &config.resolutions);
            let point = grid_point(&index, &config.resolutions);
            let outcome = kernel_dimension(family, &point, config.horizon, &cell_tolerances)
                .map(|(bs, dim)| (bs.smallest_angle, dim))
                .map_err(|e| e.to_string());
            (index, outcome)
        })
        .collect();

    let mut cells = Vec::with_capacity(total);
    let mut flagged = Vec::new();
    let mut cell_errors = Vec::new();
    for (index, outcome) in outcomes {
        match outcome {
            Ok((smallest_angle, kernel_dim)) => {
                if kernel_dim >= 1 {
                    flagged.push(index.clone());
                }
                cells.push(CellRecord {
                    point: grid_point(&index, &config.resolutions),
                    index,
                    smallest_angle,
                    kernel_dim,
                });
            }
            Err(message) => cell_errors.push((index, message)),
        }
    }
    let wrap = wrap_counts(&flagged, &config.resolutions);
    Ok(ScanResult {
        resolutions: config.resolutions.clone(),
        cells,
        flagged,
        wrap,
        cell_errors,
        warnings,
    })
}

/// Walks the flagged cells (neighbours differ by at most 1 in each torus
/// coordinate, with wrap-around) and records, for every edge closing a
/// cycle, the integer vector of net turns around each coordinate.
pub fn wrap_counts(flagged: &[Vec<usize>], resolutions: &[usize]) -> WrapReport {
    let m = resolutions.len();
    let set: HashSet<&[usize]> = flagged.iter().map(|v| v.as_slice()).collect();
    let mut lift: HashMap<Vec<usize>, Vec<i64>> = HashMap::new();
    let mut generators: Vec<Vec<i64>> = Vec::new();

    let offsets = neighbour_offsets(m);
    for start in flagged {
        if lift.contains_key(start) {
            continue;
        }
        lift.insert(start.clone(), vec![0; m]);
        let mut queue = VecDeque::new();
        queue.push_back(start.clone());
        while let Some(u) = queue.pop_front() {
            let u_lift = lift[&u].clone();
            for delta in &offsets {
                let mut v = vec![0usize; m];
                let mut v_lift = vec![0i64; m];
                for j in 0..m {
                    let r = resolutions[j] as i64;
                    let raw = u[j] as i64 + delta[j];
                    v[j] = raw.rem_euclid(r) as usize;
                    v_lift[j] = u_lift[j] + delta[j];
                }
                if !set.contains(v.as_slice()) {
                    continue;
                }
                match lift.get(&v) {
                    None => {
                        lift.insert(v.clone(), v_lift);
                        queue.push_back(v);
                    }
                    Some(existing) => {
                        let wrap: Vec<i64> = (0..m)
                            .map(|j| (v_lift[j] - existing[j]) / resolutions[j] as i64)
                            .collect();
                        if wrap.iter().any(|&w| w != 0) {
                            let canonical = canonicalize_wrap(wrap);
                            if !generators.contains(&canonical) {
                                generators.push(canonical);
                            }
                        }
                    }
                }
            }
        }
    }
    generators.sort();
    let nontrivial = !generators.is_empty();
    WrapReport {
        generators,
        nontrivial,
    }
}

fn neighbour_offsets(m: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut current = vec![-1i64; m];
    loop {
        if current.iter().any(|&c| c != 0) {
            out.push(current.clone());
        }
        let mut j = 0;
        loop {
            if j == m {
                return out;
            }
            current[j] += 1;
            if current[j] <= 1 {
                break;
            }
            current[j] = -1;
            j += 1;
        }
    }
}

fn canonicalize_wrap(mut wrap: Vec<i64>) -> Vec<i64> {
    if let Some(first) = wrap.iter().find(|&&w| w != 0) {
        if *first < 0 {
            for w in wrap.iter_mut() {
                *w = -*w;
            }
        }
    }
    wrap
}

//! Loops of subspaces as discretized vector bundles over the circle:
//! continuous frame transport, the holonomy sign at the seam, the first
//! Stiefel-Whitney class it represents, and the index-bundle w1 of a family
//! of Hamiltonian systems along an embedded parameter loop.
//!
//! Over the circle, a real vector bundle is trivial or not according to
//! whether a continuous frame returns to itself or to its orientation
//! reversal after one turn; w1 is exactly that sign. No general cocycle
//! machinery is needed, and none is attempted: general parameter spaces
//! enter only through user-supplied embedded loops.
//!
//! Everything here is a real phenomenon. Over a complex Hilbert space the
//! index bundle of a family of selfadjoint operators always vanishes (the
//! spectral shift L + i s I is invertible for s != 0 and deforms the family
//! to an invertible one), so no complex analogue of these computations is
//! offered.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::{hyperbolic_splitting, HamiltonianFamily, ParameterPoint, Tolerances};
use crate::numerics::{align_frame, largest_principal_angle, Frame, Sign};

/// First Stiefel-Whitney class of a bundle over the circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Z2Class {
    Trivial,
    Nontrivial,
}

impl std::fmt::Display for Z2Class {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Z2Class::Trivial => write!(f, "trivial"),
            Z2Class::Nontrivial => write!(f, "nontrivial"),
        }
    }
}

impl Z2Class {
    pub fn from_holonomy(sign: Sign) -> Z2Class {
        match sign {
            Sign::Plus => Z2Class::Trivial,
            Sign::Minus => Z2Class::Nontrivial,
        }
    }

    pub fn is_nontrivial(self) -> bool {
        self == Z2Class::Nontrivial
    }
}

/// A discretized vector bundle over the circle: frames sampled at loop
/// parameters 0 <= tau < 1 (the last parameter is identified with the
/// first), aligned in order, with the holonomy sign picked up at the seam.
#[derive(Debug, Clone)]
pub struct LoopBundle {
    samples: Vec<Frame>,
    /// None until the samples have been aligned.
    holonomy: Option<Sign>,
}

impl LoopBundle {
    /// Builds a bundle from raw frames over a closed loop (one frame per
    /// distinct parameter; the wrap back to the first frame is implied).
    /// Each frame is aligned to its transported predecessor and the holonomy
    /// is the alignment sign closing the seam. Consecutive spans (including
    /// the seam) must be within the alignment gap limit.
    pub fn from_frames(frames: Vec<Frame>) -> Result<LoopBundle> {
        if frames.len() < 2 {
            return Err(Error::InvalidInput("a loop bundle needs at least two frames".into()));
        }
        let rank = frames[0].rank();
        let ambient = frames[0].ambient_dim();
        if frames.iter().any(|f| f.rank() != rank || f.ambient_dim() != ambient) {
            return Err(Error::InvalidInput(
                "all frames of a bundle must share rank and ambient dimension".into(),
            ));
        }
        if rank == 0 {
            return Ok(LoopBundle {
                samples: frames,
                holonomy: Some(Sign::Plus),
            });
        }
        let mut aligned: Vec<Frame> = Vec::with_capacity(frames.len());
        aligned.push(frames[0].clone());
        for f in frames.iter().skip(1) {
            let previous = aligned.last().expect("nonempty");
            let (a, _) = align_frame(f, previous)?;
            aligned.push(a);
        }
        // Continue the transport across the seam and compare with the start.
        let (seam, _) = align_frame(&frames[0], aligned.last().expect("nonempty"))?;
        let (_, holonomy) = align_frame(&seam, &aligned[0])?;
        Ok(LoopBundle {
            samples: aligned,
            holonomy: Some(holonomy),
        })
    }

    /// Wraps frames without aligning them; holonomy stays undefined until
    /// [`LoopBundle::aligned`] is called.
    pub fn from_raw_frames(frames: Vec<Frame>) -> Result<LoopBundle> {
        if frames.len() < 2 {
            return Err(Error::InvalidInput("a loop bundle needs at least two frames".into()));
        }
        Ok(LoopBundle {
            samples: frames,
            holonomy: None,
        })
    }

    /// Aligned version of this bundle.
    pub fn aligned(&self) -> Result<LoopBundle> {
        if self.holonomy.is_some() {
            return Ok(self.clone());
        }
        LoopBundle::from_frames(self.samples.clone())
    }

    pub fn is_aligned(&self) -> bool {
        self.holonomy.is_some()
    }

    /// The aligned frames, one per distinct loop parameter.
    pub fn samples(&self) -> &[Frame] {
        &self.samples
    }

    pub fn rank(&self) -> usize {
        self.samples[0].rank()
    }

    pub fn ambient_dim(&self) -> usize {
        self.samples[0].ambient_dim()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Determinant sign of the seam alignment: +1 for an orientable loop of
    /// subspaces, -1 for a Moebius-like one.
    pub fn holonomy(&self) -> Result<Sign> {
        self.holonomy.ok_or(Error::NotAligned)
    }

    /// The same loop based at sample `k` (cyclic rotation), re-aligned.
    pub fn rotate_basepoint(&self, k: usize) -> Result<LoopBundle> {
        let n = self.samples.len();
        let rotated: Vec<Frame> = (0..n).map(|i| self.samples[(i + k) % n].clone()).collect();
        LoopBundle::from_frames(rotated)
    }
}

/// First Stiefel-Whitney class of an aligned loop bundle: nontrivial exactly
/// when the holonomy sign is -1.
pub fn w1(bundle: &LoopBundle) -> Result<Z2Class> {
    Ok(Z2Class::from_holonomy(bundle.holonomy()?))
}

/// Samples a loop of subspaces and transports frames around it. The sampler
/// receives the loop parameter tau in [0, 1); samples are inserted halfway
/// into any interval whose span gap reaches the alignment limit, at most
/// `refine_limit` times per initial interval, then the frames are aligned
/// into a [`LoopBundle`].
pub fn transport_loop<F>(sampler: F, k_samples: usize, refine_limit: usize) -> Result<LoopBundle>
where
    F: Fn(f64) -> Result<Frame>,
{
    if k_samples < 2 {
        return Err(Error::InvalidInput("need at least two loop samples".into()));
    }
    // (tau, frame, refinement depth of the interval starting here)
    let mut nodes: Vec<(f64, Frame, usize)> = Vec::with_capacity(k_samples);
    for i in 0..k_samples {
        let tau = i as f64 / k_samples as f64;
        nodes.push((tau, sampler(tau)?, 0));
    }
    let gap_limit = crate::numerics::ALIGN_GAP_LIMIT;
    loop {
        let mut split_at: Option<usize> = None;
        for i in 0..nodes.len() {
            let this = &nodes[i];
            let next = &nodes[(i + 1) % nodes.len()];
            if largest_principal_angle(&this.1, &next.1) >= gap_limit {
                if this.2 >= refine_limit {
                    return Err(Error::LoopNotResolved { limit: refine_limit });
                }
                split_at = Some(i);
                break;
            }
        }
        match split_at {
            None => break,
            Some(i) => {
                let tau_a = nodes[i].0;
                let tau_b = if i + 1 == nodes.len() {
                    1.0
                } else {
                    nodes[i + 1].0
                };
                let mid = 0.5 * (tau_a + tau_b);
                let depth = nodes[i].2 + 1;
                nodes[i].2 = depth;
                let frame = sampler(mid % 1.0)?;
                nodes.insert(i + 1, (mid, frame, depth));
            }
        }
    }
    LoopBundle::from_frames(nodes.into_iter().map(|(_, f, _)| f).collect())
}

/// w1 of the asymptotic stable bundles and of the index bundle of a family of
/// Hamiltonian systems along an embedded parameter loop.
#[derive(Debug, Clone, Serialize)]
pub struct IndexBundleW1 {
    /// w1 of the stable bundle of J A(+infinity) along the loop.
    pub w1_plus: Z2Class,
    /// w1 of the stable bundle of J A(-infinity) along the loop.
    pub w1_minus: Z2Class,
    /// w1 of the index bundle [E^s(+inf)] - [E^s(-inf)]: nontrivial exactly
    /// when the two stable classes differ.
    pub w1_index: Z2Class,
    pub holonomy_plus: Sign,
    pub holonomy_minus: Sign,
}

/// Transports the stable eigenframes of J A(+-infinity) along the loop
/// `tau -> lambda(tau)` and compares their orientability classes. The index
/// bundle of the family reduces to the formal difference of the two stable
/// bundles, so its w1 over the loop is the Z_2 difference of the holonomies.
pub fn index_bundle_w1_loop<F>(
    family: &dyn HamiltonianFamily,
    loop_map: F,
    k_samples: usize,
    tols: &Tolerances,
) -> Result<IndexBundleW1>
where
    F: Fn(f64) -> ParameterPoint,
{
    let stable_plus = |tau: f64| -> Result<Frame> {
        let lambda = loop_map(tau);
        let split = hyperbolic_splitting(&family.asymptotic_plus(&lambda), tols.hyperbolic)
            .map_err(|e| at_loop_parameter(e, tau))?;
        Ok(split.stable)
    };
    let stable_minus = |tau: f64| -> Result<Frame> {
        let lambda = loop_map(tau);
        let split = hyperbolic_splitting(&family.asymptotic_minus(&lambda), tols.hyperbolic)
            .map_err(|e| at_loop_parameter(e, tau))?;
        Ok(split.stable)
    };
    let bundle_plus = transport_loop(stable_plus, k_samples, 12)?;
    let bundle_minus = transport_loop(stable_minus, k_samples, 12)?;
    let holonomy_plus = bundle_plus.holonomy()?;
    let holonomy_minus = bundle_minus.holonomy()?;
    let w1_plus = Z2Class::from_holonomy(holonomy_plus);
    let w1_minus = Z2Class::from_holonomy(holonomy_minus);
    let w1_index = if w1_plus == w1_minus {
        Z2Class::Trivial
    } else {
        Z2Class::Nontrivial
    };
    Ok(IndexBundleW1 {
        w1_plus,
        w1_minus,
        w1_index,
        holonomy_plus,
        holonomy_minus,
    })
}

fn at_loop_parameter(e: Error, tau: f64) -> Error {
    match e {
        Error::NotHyperbolic { min_re, tol, .. } => Error::NotHyperbolic {
            min_re,
            tol,
            at: format!(" at loop parameter {tau:.6}"),
        },
        other => other,
    }
}

/// Outcome of the full bifurcation pipeline on one family: an invertible
/// sample, the index-bundle w1 along a loop, the resulting prediction, and
/// the scan confirmation. Partial failures are carried in the report rather
/// than aborting it.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    /// A sampled parameter where the linearization has no kernel, if any;
    /// the sample with the widest stable/unstable angle is reported.
    pub kernel_free_sample: Option<ParameterPoint>,
    /// w1 data along the supplied loop, unless its computation failed.
    pub w1: Option<IndexBundleW1>,
    pub w1_error: Option<String>,
    /// True when both hypotheses hold: some sample is kernel-free and the
    /// index bundle has nontrivial w1. Then the bifurcation set must be
    /// nonempty.
    pub predicts_bifurcation: bool,
    /// Whether the scan's flagged candidate set is indeed nonempty.
    pub flagged_nonempty: bool,
    pub scan: crate::hamiltonian::ScanResult,
}

/// Runs the bifurcation pipeline: scans the torus for kernels, checks for a
/// kernel-free sample, transports the asymptotic stable bundles along the
/// loop, and reports whether a nonempty bifurcation set is predicted and
/// whether the scan confirms a nonempty candidate set.
pub fn check_theorem_hypotheses<F>(
    family: &dyn HamiltonianFamily,
    loop_map: F,
    scan_config: &crate::hamiltonian::ScanConfig,
    k_loop_samples: usize,
) -> Result<HypothesisReport>
where
    F: Fn(f64) -> ParameterPoint,
{
    let scan = crate::hamiltonian::scan_bifurcation_set(family, scan_config)?;
    let kernel_free_sample = scan
        .cells
        .iter()
        .filter(|c| c.kernel_dim == 0)
        .max_by(|a, b| {
            a.smallest_angle
                .partial_cmp(&b.smallest_angle)
                .expect("finite angles")
        })
        .map(|c| c.point.clone());
    let (w1, w1_error) = match index_bundle_w1_loop(
        family,
        loop_map,
        k_loop_samples,
        &scan_config.tolerances,
    ) {
        Ok(result) => (Some(result), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let predicts_bifurcation = kernel_free_sample.is_some()
        && w1
            .as_ref()
            .map(|w| w.w1_index.is_nontrivial())
            .unwrap_or(false);
    let flagged_nonempty = scan.flagged_count() > 0;
    Ok(HypothesisReport {
        kernel_free_sample,
        w1,
        w1_error,
        predicts_bifurcation,
        flagged_nonempty,
        scan,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{orthonormal_frame, Dvec};
    use std::f64::consts::PI;

    fn line(theta: f64) -> Result<Frame> {
        orthonormal_frame(&[Dvec::from_vec(vec![theta.cos(), theta.sin()])])
    }

    #[test]
    fn constant_loop_is_trivial() {
        let bundle = transport_loop(|_| line(0.3), 16, 8).unwrap();
        assert_eq!(bundle.holonomy().unwrap(), Sign::Plus);
        assert_eq!(w1(&bundle).unwrap(), Z2Class::Trivial);
    }

    #[test]
    fn moebius_line_field_has_holonomy_minus_one() {
        // The line spanned by (cos(theta/2), sin(theta/2)) returns to itself
        // reversed after a full turn.
        let bundle = transport_loop(|tau| line(PI * tau), 64, 8).unwrap();
        assert_eq!(bundle.holonomy().unwrap(), Sign::Minus);
        assert_eq!(w1(&bundle).unwrap(), Z2Class::Nontrivial);
    }

    #[test]
    fn full_turn_line_field_is_trivial() {
        let bundle = transport_loop(|tau| line(2.0 * PI * tau), 64, 8).unwrap();
        assert_eq!(bundle.holonomy().unwrap(), Sign::Plus);
        assert_eq!(w1(&bundle).unwrap(), Z2Class::Trivial);
    }

    #[test]
    fn holonomy_independent_of_basepoint_and_resolution() {
        for k in [16usize, 64, 256] {
            let moebius = transport_loop(|tau| line(PI * tau), k, 8).unwrap();
            assert_eq!(moebius.holonomy().unwrap(), Sign::Minus, "k = {k}");
            for shift in [1, k / 3, k / 2] {
                let rotated = moebius.rotate_basepoint(shift).unwrap();
                assert_eq!(rotated.holonomy().unwrap(), Sign::Minus);
            }
            let full = transport_loop(|tau| line(2.0 * PI * tau), k, 8).unwrap();
            assert_eq!(full.holonomy().unwrap(), Sign::Plus, "k = {k}");
        }
    }

    #[test]
    fn alignment_signs_concatenate_to_holonomy() {
        let k = 48;
        let bundle = transport_loop(|tau| line(PI * tau), k, 8).unwrap();
        let frames = bundle.samples();
        let mut product = Sign::Plus;
        for i in 0..frames.len() {
            let next = &frames[(i + 1) % frames.len()];
            let (_, s) = align_frame(next, &frames[i]).unwrap();
            product = product * s;
        }
        assert_eq!(product, bundle.holonomy().unwrap());
    }

    #[test]
    fn refinement_resolves_coarse_sampling() {
        // Three initial samples of the Moebius loop have gaps >= pi/4 and
        // need bisection; the holonomy must still come out right.
        let bundle = transport_loop(|tau| line(PI * tau), 3, 10).unwrap();
        assert_eq!(bundle.holonomy().unwrap(), Sign::Minus);
        assert!(bundle.len() > 3);
    }

    #[test]
    fn refinement_limit_is_enforced() {
        let out = transport_loop(|tau| line(PI * tau), 3, 0);
        assert!(matches!(out, Err(Error::LoopNotResolved { .. })));
    }

    #[test]
    fn unaligned_bundle_has_no_w1() {
        let frames = vec![line(0.0).unwrap(), line(0.1).unwrap()];
        let raw = LoopBundle::from_raw_frames(frames).unwrap();
        assert!(matches!(w1(&raw), Err(Error::NotAligned)));
        let aligned = raw.aligned().unwrap();
        assert_eq!(aligned.holonomy().unwrap(), Sign::Plus);
    }

    #[test]
    fn index_bundle_is_trivial_for_loop_independent_asymptotics() {
        use crate::hamiltonian::{j_symplectic, ScanConfig, Tolerances};
        use crate::numerics::Dmat;

        // Constant hyperbolic asymptotics on both ends: both stable bundles
        // are constant, every class trivial, and no bifurcation is
        // predicted.
        struct ConstantEnds;
        impl crate::hamiltonian::HamiltonianFamily for ConstantEnds {
            fn half_dim(&self) -> usize {
                1
            }
            fn torus_dim(&self) -> usize {
                1
            }
            fn evaluate(&self, _: &crate::hamiltonian::ParameterPoint, _: f64) -> Dmat {
                j_symplectic(1) * crate::scenarios::s_theta(0.4)
            }
            fn asymptotic_plus(&self, _: &crate::hamiltonian::ParameterPoint) -> Dmat {
                j_symplectic(1) * crate::scenarios::s_theta(0.4)
            }
            fn asymptotic_minus(&self, _: &crate::hamiltonian::ParameterPoint) -> Dmat {
                j_symplectic(1) * crate::scenarios::s_theta(0.4)
            }
        }
        let tols = Tolerances::default();
        let loop_map = crate::cli::first_coordinate_loop(1);
        let w1 = index_bundle_w1_loop(&ConstantEnds, &loop_map, 32, &tols).unwrap();
        assert_eq!(w1.w1_plus, Z2Class::Trivial);
        assert_eq!(w1.w1_minus, Z2Class::Trivial);
        assert_eq!(w1.w1_index, Z2Class::Trivial);

        let report = check_theorem_hypotheses(
            &ConstantEnds,
            loop_map,
            &ScanConfig {
                resolutions: vec![16],
                horizon: 8.0,
                tolerances: tols,
            },
            32,
        )
        .unwrap();
        assert!(report.kernel_free_sample.is_some());
        assert!(!report.predicts_bifurcation);
        assert!(!report.flagged_nonempty);
    }

    #[test]
    fn moebius_scenario_prediction_is_issued() {
        use crate::hamiltonian::{ScanConfig, Tolerances};
        use crate::scenarios::{moebius_family, MoebiusConfig};

        let family = moebius_family(MoebiusConfig::default()).unwrap();
        let report = check_theorem_hypotheses(
            &family,
            crate::cli::first_coordinate_loop(1),
            &ScanConfig {
                resolutions: vec![48],
                horizon: 15.0,
                tolerances: Tolerances::default(),
            },
            64,
        )
        .unwrap();
        assert!(report.kernel_free_sample.is_some());
        assert_eq!(report.w1.as_ref().unwrap().w1_index, Z2Class::Nontrivial);
        assert!(report.predicts_bifurcation);
    }

    #[test]
    fn whitney_sum_multiplies_holonomies() {
        // Block-diagonal sums of line fields in R^4.
        let sum = |f: fn(f64) -> f64, g: fn(f64) -> f64| {
            move |tau: f64| -> Result<Frame> {
                let a = f(tau);
                let b = g(tau);
                orthonormal_frame(&[
                    Dvec::from_vec(vec![a.cos(), a.sin(), 0.0, 0.0]),
                    Dvec::from_vec(vec![0.0, 0.0, b.cos(), b.sin()]),
                ])
            }
        };
        // Moebius + Moebius: holonomy (+1) = (-1) * (-1).
        let both = transport_loop(sum(|t| PI * t, |t| PI * t), 96, 8).unwrap();
        assert_eq!(both.holonomy().unwrap(), Sign::Plus);
        // Moebius + constant: holonomy -1.
        let one = transport_loop(sum(|t| PI * t, |_| 0.7), 96, 8).unwrap();
        assert_eq!(one.holonomy().unwrap(), Sign::Minus);
        // Moebius + full turn: holonomy -1.
        let turn = transport_loop(sum(|t| PI * t, |t| 2.0 * PI * t), 96, 8).unwrap();
        assert_eq!(turn.holonomy().unwrap(), Sign::Minus);
    }
}

//! End-to-end verification suite: every numbered criterion checks one
//! capability of the crate against an exactly known value or an independent
//! oracle, at a pinned tolerance and within a pinned runtime budget. Run it
//! with `homindex verify` or through the `acceptance` integration test.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::time::Instant;

use crate::bundles::{self, Z2Class};
use crate::error::Error;
use crate::fredholm::{
    closed_loop_parity, conjugator, kernel_bundle, leray_schauder_degree, parity_segment,
    scaled_det, spectral_flow_mod2, tilde_l1, tilde_l1_path, tilde_loop, TransversalSubspace,
    TruncatedOperatorPath, TILDE_SEGMENT_CLOSING, TILDE_SEGMENT_L1, TILDE_SEGMENT_L2,
};
use crate::hamiltonian::{
    scan_bifurcation_set, stable_at_zero, HamiltonianFamily, ParameterPoint, ScanConfig,
    Tolerances,
};
use crate::numerics::{self, principal_angles, real_spectrum, Frame, Sign};
use crate::scenarios::{
    analytic_ode_residual, analytic_solution_plus, moebius_family, pejsachowicz_family,
    MoebiusConfig,
};
use crate::synthetic;

/// Outcome of one criterion.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
    pub seconds: f64,
    pub budget_seconds: f64,
}

fn run_criterion(
    id: u32,
    name: &'static str,
    budget_seconds: f64,
    body: impl FnOnce(&mut String) -> bool,
) -> CriterionResult {
    let start = Instant::now();
    let mut details = String::new();
    let ok = body(&mut details);
    let seconds = start.elapsed().as_secs_f64();
    let within_budget = seconds <= budget_seconds;
    if !within_budget {
        let _ = write!(details, " [over budget: {seconds:.2}s > {budget_seconds}s]");
    }
    let _ = write!(details, " ({seconds:.2}s)");
    CriterionResult {
        id,
        name,
        passed: ok && within_budget,
        details,
        seconds,
        budget_seconds,
    }
}

/// Runs all criteria in order. The seed drives every randomized corpus.
pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    vec![
        criterion_1_diagonal_path_parity(),
        criterion_2_conjugation_identity(),
        criterion_3_closed_loop_triviality(seed),
        criterion_4_degree_consistency(seed),
        criterion_5_parity_equals_spectral_flow(seed),
        criterion_6_kernel_bundle_invariance(seed),
        criterion_7_moebius_w1(),
        criterion_8_pejsachowicz_circle(),
        criterion_9_pejsachowicz_torus(),
        criterion_10_analytic_residuals(),
        criterion_11_theorem_pipeline(),
    ]
}

/// Parity of the diagonal path over [-1, 1] is -1 for every window size.
pub fn criterion_1_diagonal_path_parity() -> CriterionResult {
    run_criterion(1, "diagonal path parity -1 for windows 1..=10", 1.0, |out| {
        let mut ok = true;
        for window_n in 1..=10 {
            let path = match tilde_l1_path(window_n, 33) {
                Ok(p) => p,
                Err(e) => {
                    let _ = write!(out, "window {window_n}: {e}; ");
                    ok = false;
                    continue;
                }
            };
            match parity_segment(&path) {
                Ok(Sign::Minus) => {}
                other => {
                    let _ = write!(out, "window {window_n}: got {other:?}; ");
                    ok = false;
                }
            }
        }
        if ok {
            let _ = write!(out, "parity -1 at all 10 windows");
        }
        ok
    })
}

/// Conjugation by the signed cyclic shift reproduces the opposite endpoint on
/// all interior indices and leaves a defect of exactly 2 at the top index.
pub fn criterion_2_conjugation_identity() -> CriterionResult {
    run_criterion(2, "conjugation identity with single boundary defect", 1.0, |out| {
        let mut ok = true;
        let mut worst_interior: f64 = 0.0;
        let mut worst_defect: f64 = 0.0;
        for window_n in (2..=20).step_by(2) {
            let c = match conjugator(window_n) {
                Ok(c) => c,
                Err(e) => {
                    let _ = write!(out, "window {window_n}: {e}; ");
                    ok = false;
                    continue;
                }
            };
            let diff = c.transpose() * tilde_l1(-1.0, window_n) * &c - tilde_l1(1.0, window_n);
            let d = 2 * window_n + 1;
            for i in 0..d {
                for j in 0..d {
                    let v = diff[(i, j)].abs();
                    if i == j && i == d - 1 {
                        worst_defect = worst_defect.max((v - 2.0).abs());
                    } else {
                        worst_interior = worst_interior.max(v);
                    }
                }
            }
        }
        ok &= worst_interior <= 1e-12 && worst_defect <= 1e-12;
        let _ = write!(
            out,
            "interior defect {worst_interior:.1e}, |top defect - 2| = {worst_defect:.1e}"
        );
        ok
    })
}

/// Every finite-dimensional closed loop has parity +1; the truncated loop
/// decomposes into segment parities (-1, +1, -1).
pub fn criterion_3_closed_loop_triviality(seed: u64) -> CriterionResult {
    run_criterion(3, "closed-loop parity +1 with decomposition (-1, +1, -1)", 10.0, |out| {
        let mut ok = true;
        let path = match tilde_loop(4, 33) {
            Ok(p) => p,
            Err(e) => {
                let _ = write!(out, "loop construction: {e}");
                return false;
            }
        };
        match closed_loop_parity(&path) {
            Ok(result) => {
                ok &= result.parity == Sign::Plus;
                let mut named = std::collections::HashMap::new();
                for (name, sign) in &result.segments {
                    named.insert(name.as_str(), *sign);
                }
                ok &= named.get(TILDE_SEGMENT_L1) == Some(&Sign::Minus);
                ok &= named.get(TILDE_SEGMENT_L2) == Some(&Sign::Plus);
                ok &= named.get(TILDE_SEGMENT_CLOSING) == Some(&Sign::Minus);
                let _ = write!(
                    out,
                    "truncated loop: parity {:+}, {}: {:+}, {}: {:+}, {}: {:+}; ",
                    result.parity.value(),
                    TILDE_SEGMENT_L1,
                    named[TILDE_SEGMENT_L1].value(),
                    TILDE_SEGMENT_L2,
                    named[TILDE_SEGMENT_L2].value(),
                    TILDE_SEGMENT_CLOSING,
                    named[TILDE_SEGMENT_CLOSING].value(),
                );
            }
            Err(e) => {
                let _ = write!(out, "truncated loop: {e}");
                return false;
            }
        }
        // 100 random smooth closed symmetric families.
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(3));
        let mut checked = 0;
        let mut attempts = 0;
        while checked < 100 && attempts < 2000 {
            attempts += 1;
            let dim = rng.gen_range(2..=8);
            let path = synthetic::random_trig_path(&mut rng, dim, 41, true);
            match closed_loop_parity(&path) {
                Ok(result) => {
                    checked += 1;
                    if result.parity != Sign::Plus {
                        ok = false;
                    }
                    let product = result
                        .segments
                        .iter()
                        .fold(Sign::Plus, |acc, (_, s)| acc * *s);
                    if product != Sign::Plus {
                        ok = false;
                    }
                }
                Err(Error::NoRegularPoint) => continue,
                Err(e) => {
                    let _ = write!(out, "random loop error: {e}; ");
                    ok = false;
                }
            }
        }
        ok &= checked == 100;
        let _ = write!(out, "{checked} random closed loops all telescope to +1");
        ok
    })
}

/// Leray-Schauder degree agrees with the determinant sign and with the
/// negative-eigenvalue multiplicity count, both computed independently.
pub fn criterion_4_degree_consistency(seed: u64) -> CriterionResult {
    run_criterion(4, "degree = sign(det) = (-1)^m on 200 random matrices", 5.0, |out| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(4));
        let mut ok = true;
        let mut checked = 0;
        while checked < 200 {
            let n = rng.gen_range(1..=10);
            let m = synthetic::random_matrix(&mut rng, n);
            if scaled_det(&m) <= 1e-8 {
                continue;
            }
            let spectrum = real_spectrum(&m);
            if spectrum
                .iter()
                .any(|(z, _)| z.im == 0.0 && z.re.abs() < 1e-6)
            {
                continue;
            }
            let deg = match leray_schauder_degree(&m) {
                Ok(d) => d,
                Err(e) => {
                    let _ = write!(out, "degree failed: {e}; ");
                    ok = false;
                    continue;
                }
            };
            let det_sign = Sign::from_f64(m.determinant());
            let mult: usize = spectrum
                .iter()
                .filter(|(z, _)| z.im == 0.0 && z.re < 0.0)
                .map(|(_, k)| k)
                .sum();
            if deg != det_sign || deg != Sign::from_parity_of(mult) {
                let _ = write!(out, "mismatch at matrix {checked}; ");
                ok = false;
            }
            checked += 1;
        }
        let _ = write!(out, "200 matrices, exact agreement on both oracles");
        ok
    })
}

/// Parity equals spectral flow mod 2; parity is multiplicative over interior
/// cuts and trivial on everywhere-invertible segments.
pub fn criterion_5_parity_equals_spectral_flow(seed: u64) -> CriterionResult {
    run_criterion(5, "parity = spectral flow mod 2, (C) and (N) exact", 30.0, |out| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(5));
        let mut ok = true;
        let mut cut_checked = 0;
        let mut trivial_checked = 0;
        for _ in 0..200 {
            let dim = rng.gen_range(2..=8);
            let path = synthetic::random_open_path(&mut rng, dim, 41);
            let parity = match parity_segment(&path) {
                Ok(p) => p,
                Err(e) => {
                    let _ = write!(out, "parity failed: {e}; ");
                    ok = false;
                    continue;
                }
            };
            match spectral_flow_mod2(&path) {
                Ok(flow) => {
                    if parity != flow {
                        let _ = write!(out, "parity != flow; ");
                        ok = false;
                    }
                }
                Err(e) => {
                    let _ = write!(out, "flow failed: {e}; ");
                    ok = false;
                }
            }
            // Multiplicativity over an invertible interior cut.
            if let Some(cut) = (10..path.len() - 10)
                .step_by(4)
                .find(|&i| scaled_det(path.sample(i)) > 1e-6)
            {
                let left = TruncatedOperatorPath::new(
                    path.grid()[..=cut].to_vec(),
                    path.samples()[..=cut].to_vec(),
                )
                .expect("sub-path");
                let right = TruncatedOperatorPath::new(
                    path.grid()[cut..].to_vec(),
                    path.samples()[cut..].to_vec(),
                )
                .expect("sub-path");
                let split = parity_segment(&left).expect("left parity")
                    * parity_segment(&right).expect("right parity");
                if split != parity {
                    let _ = write!(out, "multiplicativity broken; ");
                    ok = false;
                }
                cut_checked += 1;
            }
            // Triviality on the everywhere-invertible subset. A path is
            // certified invertible throughout when every sampled eigenvalue
            // margin exceeds the largest step-to-step matrix movement: by
            // the Weyl bound no eigenvalue can reach zero between samples.
            let margin = path
                .samples()
                .iter()
                .map(synthetic::eigen_margin)
                .fold(f64::INFINITY, f64::min);
            let movement = path
                .samples()
                .windows(2)
                .map(|w| (&w[1] - &w[0]).norm())
                .fold(0.0_f64, f64::max);
            if margin > movement {
                trivial_checked += 1;
                if parity != Sign::Plus {
                    let _ = write!(out, "triviality broken; ");
                    ok = false;
                }
            }
        }
        ok &= cut_checked >= 150 && trivial_checked >= 1;
        let _ = write!(
            out,
            "200 paths, flow agreement; (C) on {cut_checked} cuts, (N) on {trivial_checked} invertible paths"
        );
        ok
    })
}

/// w1 of the kernel bundle of an invertible closed family is trivial and
/// independent of the transversal subspace.
pub fn criterion_6_kernel_bundle_invariance(seed: u64) -> CriterionResult {
    run_criterion(6, "kernel-bundle w1 independent of the transversal choice", 10.0, |out| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(6));
        let mut ok = true;
        let mut done = 0;
        let mut attempts = 0;
        while done < 20 && attempts < 400 {
            attempts += 1;
            let path = synthetic::random_invertible_loop(&mut rng, 2..=5, 161);
            let dim = path.dim();
            let v1 = TransversalSubspace::new(random_frame(&mut rng, dim, 1));
            let v2 = TransversalSubspace::new(random_frame(&mut rng, dim, 2.min(dim)));
            let bundles_pair = (kernel_bundle(&path, &v1), kernel_bundle(&path, &v2));
            let (b1, b2) = match bundles_pair {
                (Ok(a), Ok(b)) => (a, b),
                (Err(Error::AlignmentGapTooLarge { .. }), _)
                | (_, Err(Error::AlignmentGapTooLarge { .. })) => continue,
                (a, b) => {
                    let _ = write!(out, "kernel bundle failed: {a:?} / {b:?}; ");
                    ok = false;
                    continue;
                }
            };
            let w1_a = bundles::w1(&b1).expect("aligned");
            let w1_b = bundles::w1(&b2).expect("aligned");
            if w1_a != Z2Class::Trivial || w1_b != Z2Class::Trivial {
                let _ = write!(out, "nontrivial w1 on an invertible family; ");
                ok = false;
            }
            done += 1;
        }
        ok &= done == 20;
        let _ = write!(out, "{done} families x 2 transversal choices, all trivial and equal");
        ok
    })
}

/// The Moebius scenario separates the asymptotic stable bundles: w1 differs,
/// so the index bundle is nontrivial, stably in the loop resolution.
pub fn criterion_7_moebius_w1() -> CriterionResult {
    run_criterion(7, "moebius scenario w1: (+inf) nontrivial, (-inf) trivial", 10.0, |out| {
        let family = match moebius_family(MoebiusConfig::default()) {
            Ok(f) => f,
            Err(e) => {
                let _ = write!(out, "{e}");
                return false;
            }
        };
        let tols = Tolerances::default();
        let mut ok = true;
        for k in [64usize, 256] {
            let loop_map = crate::cli::first_coordinate_loop(family.torus_dim());
            match bundles::index_bundle_w1_loop(&family, loop_map, k, &tols) {
                Ok(w1) => {
                    ok &= w1.w1_plus == Z2Class::Nontrivial
                        && w1.w1_minus == Z2Class::Trivial
                        && w1.w1_index == Z2Class::Nontrivial;
                    let _ = write!(
                        out,
                        "K = {k}: plus {}, minus {}, index {}; ",
                        w1.w1_plus, w1.w1_minus, w1.w1_index
                    );
                }
                Err(e) => {
                    let _ = write!(out, "K = {k}: {e}; ");
                    ok = false;
                }
            }
        }
        ok
    })
}

/// On the circle, the transported stable space matches the closed form and
/// the scan flags exactly the cell at angle zero.
pub fn criterion_8_pejsachowicz_circle() -> CriterionResult {
    run_criterion(8, "pejsachowicz circle: analytic oracle and single flagged cell", 60.0, |out| {
        use std::f64::consts::PI;
        let family = match pejsachowicz_family(1) {
            Ok(f) => f,
            Err(e) => {
                let _ = write!(out, "{e}");
                return false;
            }
        };
        let tols = Tolerances::default();
        let horizon = 20.0;
        let mut ok = true;
        let mut worst_angle: f64 = 0.0;
        for i in 0..32 {
            let theta = -PI + 2.0 * PI * i as f64 / 32.0;
            let lambda = ParameterPoint::new(vec![theta]);
            let transported = match stable_at_zero(&family, &lambda, horizon, &tols) {
                Ok(f) => f,
                Err(e) => {
                    let _ = write!(out, "transport at {theta:.3}: {e}; ");
                    ok = false;
                    continue;
                }
            };
            let analytic = analytic_solution_plus(&lambda, 0.0).expect("t = 0 is admissible");
            let oracle = Frame::from_vector(&analytic).expect("unit direction");
            let angle = principal_angles(&transported, &oracle)
                .largest()
                .unwrap_or(0.0);
            worst_angle = worst_angle.max(angle);
        }
        ok &= worst_angle <= 1e-5;
        let _ = write!(out, "worst oracle angle {worst_angle:.2e} over 32 samples; ");

        let scan = match scan_bifurcation_set(
            &family,
            &ScanConfig {
                resolutions: vec![256],
                horizon,
                tolerances: tols,
            },
        ) {
            Ok(s) => s,
            Err(e) => {
                let _ = write!(out, "scan: {e}");
                return false;
            }
        };
        // theta = 0 sits at lattice index 128 of theta_k = -pi + 2 pi k / 256.
        let expected = vec![vec![128usize]];
        ok &= scan.flagged == expected;
        ok &= scan.cell_errors.is_empty();
        let _ = write!(
            out,
            "flagged cells {:?} (expected [[128]], the cell containing 0)",
            scan.flagged
        );
        ok
    })
}

/// On the 2-torus, the flagged set hugs the antidiagonal line and wraps the
/// torus nontrivially.
pub fn criterion_9_pejsachowicz_torus() -> CriterionResult {
    run_criterion(9, "pejsachowicz 2-torus: flagged line wraps the torus", 300.0, |out| {
        let family = match pejsachowicz_family(2) {
            Ok(f) => f,
            Err(e) => {
                let _ = write!(out, "{e}");
                return false;
            }
        };
        let r = 64usize;
        let scan = match scan_bifurcation_set(
            &family,
            &ScanConfig {
                resolutions: vec![r, r],
                horizon: 20.0,
                tolerances: Tolerances::default(),
            },
        ) {
            Ok(s) => s,
            Err(e) => {
                let _ = write!(out, "scan: {e}");
                return false;
            }
        };
        let mut ok = !scan.flagged.is_empty();
        // Lattice points satisfy the kernel condition exactly when
        // k1 + k2 = 0 mod r; allow one cell of slack.
        let mut max_line_distance = 0usize;
        for index in &scan.flagged {
            let s = (index[0] + index[1]) % r;
            let distance = s.min(r - s);
            max_line_distance = max_line_distance.max(distance);
        }
        ok &= max_line_distance <= 1;
        ok &= scan.wrap.nontrivial;
        let has_antidiagonal = scan
            .wrap
            .generators
            .iter()
            .any(|g| g.len() == 2 && g[0] != 0 && g[1] != 0 && g[0] == -g[1]);
        ok &= has_antidiagonal;
        ok &= scan.cell_errors.is_empty();
        let _ = write!(
            out,
            "{} flagged cells, max distance to the line {} cells, wrap generators {:?}",
            scan.flagged.len(),
            max_line_distance,
            scan.wrap.generators
        );
        ok
    })
}

/// The closed-form solutions satisfy the differential equation to 1e-8
/// against a finite-difference derivative.
pub fn criterion_10_analytic_residuals() -> CriterionResult {
    run_criterion(10, "closed-form solutions satisfy the ODE to 1e-8", 5.0, |out| {
        let family = match pejsachowicz_family(2) {
            Ok(f) => f,
            Err(e) => {
                let _ = write!(out, "{e}");
                return false;
            }
        };
        let lambda = ParameterPoint::new(vec![0.7, -1.9]);
        let mut worst: f64 = 0.0;
        let mut ok = true;
        for i in 1..=100 {
            let t = 10.0 * i as f64 / 100.0;
            match analytic_ode_residual(&family, &lambda, t, true) {
                Ok(r) => worst = worst.max(r),
                Err(e) => {
                    let _ = write!(out, "residual at {t}: {e}; ");
                    ok = false;
                }
            }
            match analytic_ode_residual(&family, &lambda, -t, false) {
                Ok(r) => worst = worst.max(r),
                Err(e) => {
                    let _ = write!(out, "residual at -{t}: {e}; ");
                    ok = false;
                }
            }
        }
        ok &= worst < 1e-8;
        let _ = write!(out, "worst residual {worst:.2e} over 100 times per half-line");
        ok
    })
}

/// The full pipeline on the circle scenario: invertible sample found, index
/// bundle nontrivial, bifurcation predicted, scan confirms.
pub fn criterion_11_theorem_pipeline() -> CriterionResult {
    run_criterion(11, "bifurcation pipeline predicts and confirms on the circle", 60.0, |out| {
        let family = match pejsachowicz_family(1) {
            Ok(f) => f,
            Err(e) => {
                let _ = write!(out, "{e}");
                return false;
            }
        };
        let scan_config = ScanConfig {
            resolutions: vec![256],
            horizon: 20.0,
            tolerances: Tolerances::default(),
        };
        let loop_map = crate::cli::first_coordinate_loop(1);
        let report =
            match bundles::check_theorem_hypotheses(&family, loop_map, &scan_config, 64) {
                Ok(r) => r,
                Err(e) => {
                    let _ = write!(out, "{e}");
                    return false;
                }
            };
        let mut ok = true;
        ok &= report.kernel_free_sample.is_some();
        ok &= report
            .w1
            .as_ref()
            .map(|w| w.w1_index == Z2Class::Nontrivial)
            .unwrap_or(false);
        ok &= report.predicts_bifurcation;
        ok &= report.flagged_nonempty;
        let _ = write!(
            out,
            "kernel-free sample {:?}, w1(index) {}, predicted {}, confirmed {}",
            report
                .kernel_free_sample
                .as_ref()
                .map(|p| p.angles().to_vec()),
            report
                .w1
                .as_ref()
                .map(|w| w.w1_index.to_string())
                .unwrap_or_else(|| "unavailable".into()),
            report.predicts_bifurcation,
            report.flagged_nonempty
        );
        ok
    })
}

fn random_frame(rng: &mut impl Rng, d: usize, r: usize) -> Frame {
    loop {
        let vecs: Vec<numerics::Dvec> = (0..r)
            .map(|_| numerics::Dvec::from_fn(d, |_, _| rng.gen_range(-1.0..1.0)))
            .collect();
        if let Ok(f) = numerics::orthonormal_frame(&vecs) {
            return f;
        }
    }
}

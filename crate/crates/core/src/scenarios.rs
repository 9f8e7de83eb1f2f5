//! Built-in Hamiltonian families with known invariants, including closed-form
//! solutions usable as oracles.
//!
//! Both scenarios are built from the reflection matrices
//! `S_theta = [[cos theta, sin theta], [sin theta, -cos theta]]`, the
//! reflection across the line spanned by
//! `e2(theta) = (cos(theta/2), sin(theta/2))`:
//!
//! - `moebius`: asymptotics `a_- J S_0` at t = -infinity and `a_+ J S_theta`
//!   at t = +infinity over the circle coordinate theta, joined by a smooth
//!   sigmoid in t. The stable bundle at +infinity is the Moebius line bundle,
//!   so its w1 differs from the (constant) stable bundle at -infinity.
//! - `pejsachowicz`: on the m-torus, `A(lambda, t) = arctan(t) J S_sigma`
//!   for t >= 0 with sigma the sum of the torus angles, and
//!   `arctan(t) J S_0` for t < 0. The linearized problem has a kernel
//!   exactly on the subtorus where the angle sum vanishes mod 2 pi, and the
//!   solutions decaying on either half-line are known in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{j_symplectic, HamiltonianFamily, ParameterPoint};
use crate::numerics::{Dmat, Dvec};

/// The reflection by the line spanned by `e2(theta)`: symmetric, orthogonal,
/// determinant -1, 2 pi periodic.
pub fn s_theta(theta: f64) -> Dmat {
    let (s, c) = theta.sin_cos();
    Dmat::from_row_slice(2, 2, &[c, s, s, -c])
}

/// Unit eigenvector of `s_theta` with eigenvalue +1.
pub fn eigenvector_plus(theta: f64) -> Dvec {
    Dvec::from_vec(vec![(theta / 2.0).cos(), (theta / 2.0).sin()])
}

/// Unit eigenvector of `s_theta` with eigenvalue -1.
pub fn eigenvector_minus(theta: f64) -> Dvec {
    Dvec::from_vec(vec![-(theta / 2.0).sin(), (theta / 2.0).cos()])
}

/// Configuration of the Moebius scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MoebiusConfig {
    /// Asymptotic strength at +infinity; must be nonzero.
    pub a_plus: f64,
    /// Asymptotic strength at -infinity; must be nonzero.
    pub a_minus: f64,
    /// Rate of the sigmoid joining the two asymptotic regimes.
    pub profile_rate: f64,
    /// Extra torus coordinates the family ignores, for API uniformity with
    /// families over products (the invariants live on the circle factor).
    pub inert_dims: usize,
}

impl Default for MoebiusConfig {
    fn default() -> Self {
        MoebiusConfig {
            a_plus: 1.0,
            a_minus: 1.0,
            profile_rate: 1.0,
            inert_dims: 0,
        }
    }
}

/// The Moebius scenario family. The circle coordinate is the first torus
/// angle; any further angles are inert.
#[derive(Debug, Clone)]
pub struct MoebiusFamily {
    config: MoebiusConfig,
}

/// Smooth monotone profile with chi(-inf) = 0, chi(0) = 1/2, chi(+inf) = 1.
fn sigmoid(t: f64, rate: f64) -> f64 {
    0.5 * (1.0 + (rate * t).tanh())
}

pub fn moebius_family(config: MoebiusConfig) -> Result<MoebiusFamily> {
    if config.a_plus == 0.0 || config.a_minus == 0.0 {
        return Err(Error::InvalidConfig(
            "moebius: a_plus and a_minus must be nonzero".into(),
        ));
    }
    if !config.profile_rate.is_finite() || config.profile_rate <= 0.0 {
        return Err(Error::InvalidConfig(
            "moebius: profile_rate must be positive".into(),
        ));
    }
    Ok(MoebiusFamily { config })
}

impl MoebiusFamily {
    pub fn config(&self) -> &MoebiusConfig {
        &self.config
    }
}

impl HamiltonianFamily for MoebiusFamily {
    fn half_dim(&self) -> usize {
        1
    }

    fn torus_dim(&self) -> usize {
        1 + self.config.inert_dims
    }

    fn evaluate(&self, lambda: &ParameterPoint, t: f64) -> Dmat {
        let theta = lambda.angles()[0];
        let chi = sigmoid(t, self.config.profile_rate);
        let j = j_symplectic(1);
        &j * s_theta(0.0) * ((1.0 - chi) * self.config.a_minus)
            + &j * s_theta(theta) * (chi * self.config.a_plus)
    }

    fn asymptotic_plus(&self, lambda: &ParameterPoint) -> Dmat {
        let theta = lambda.angles()[0];
        j_symplectic(1) * s_theta(theta) * self.config.a_plus
    }

    fn asymptotic_minus(&self, _lambda: &ParameterPoint) -> Dmat {
        j_symplectic(1) * s_theta(0.0) * self.config.a_minus
    }

    fn breakpoints(&self) -> Vec<f64> {
        Vec::new() // smooth in t
    }
}

/// The m-torus family with arctan-saturating rotation: the kernel condition
/// is that the torus angles sum to 0 mod 2 pi.
#[derive(Debug, Clone)]
pub struct PejsachowiczFamily {
    torus_dim: usize,
}

pub fn pejsachowicz_family(m: usize) -> Result<PejsachowiczFamily> {
    if m == 0 {
        return Err(Error::InvalidConfig(
            "pejsachowicz: the torus dimension m must be at least 1".into(),
        ));
    }
    Ok(PejsachowiczFamily { torus_dim: m })
}

impl HamiltonianFamily for PejsachowiczFamily {
    fn half_dim(&self) -> usize {
        1
    }

    fn torus_dim(&self) -> usize {
        self.torus_dim
    }

    fn evaluate(&self, lambda: &ParameterPoint, t: f64) -> Dmat {
        let theta = if t >= 0.0 { lambda.angle_sum() } else { 0.0 };
        j_symplectic(1) * s_theta(theta) * t.atan()
    }

    fn asymptotic_plus(&self, lambda: &ParameterPoint) -> Dmat {
        j_symplectic(1) * s_theta(lambda.angle_sum()) * std::f64::consts::FRAC_PI_2
    }

    fn asymptotic_minus(&self, _lambda: &ParameterPoint) -> Dmat {
        j_symplectic(1) * s_theta(0.0) * (-std::f64::consts::FRAC_PI_2)
    }

    // The two-branch definition is continuous but not smooth at t = 0; the
    // default breakpoint list already splits there.
}

/// sqrt(t^2 + 1) e^{-t arctan t}: the scalar profile of both closed-form
/// solutions.
fn decay_profile(t: f64) -> f64 {
    (t * t + 1.0).sqrt() * (-t * t.atan()).exp()
}

/// The closed-form solution on the negative half-line, decaying as
/// t -> -infinity; its value at 0 spans E^u(lambda, 0).
pub fn analytic_solution_minus(_lambda: &ParameterPoint, t: f64) -> Result<Dvec> {
    if t > 0.0 {
        return Err(Error::DomainError(format!(
            "analytic_solution_minus needs t <= 0, got {t}"
        )));
    }
    Ok(Dvec::from_vec(vec![decay_profile(t), 0.0]))
}

/// The closed-form solution on the positive half-line, decaying as
/// t -> +infinity; its value at 0 spans E^s(lambda, 0). The direction is the
/// +1 eigenvector of the reflection at the angle sum.
pub fn analytic_solution_plus(lambda: &ParameterPoint, t: f64) -> Result<Dvec> {
    if t < 0.0 {
        return Err(Error::DomainError(format!(
            "analytic_solution_plus needs t >= 0, got {t}"
        )));
    }
    let direction = eigenvector_plus(lambda.angle_sum());
    Ok(direction * decay_profile(t))
}

/// ||J u' + A(lambda, t) u|| for one of the closed-form solutions, with the
/// derivative taken by a five-point central finite difference. Independent
/// of the integrator; used to certify the closed forms against the family.
pub fn analytic_ode_residual(
    family: &PejsachowiczFamily,
    lambda: &ParameterPoint,
    t: f64,
    positive_half_line: bool,
) -> Result<f64> {
    let h = 1e-3;
    let u = |tt: f64| -> Result<Dvec> {
        if positive_half_line {
            analytic_solution_plus(lambda, tt)
        } else {
            analytic_solution_minus(lambda, tt)
        }
    };
    // Keep the whole stencil on the half-line.
    if positive_half_line && t < 2.0 * h {
        return Err(Error::DomainError(
            "stencil would leave the positive half-line".into(),
        ));
    }
    if !positive_half_line && t > -2.0 * h {
        return Err(Error::DomainError(
            "stencil would leave the negative half-line".into(),
        ));
    }
    let derivative = (u(t - 2.0 * h)? - u(t - h)? * 8.0 + u(t + h)? * 8.0 - u(t + 2.0 * h)?)
        / (12.0 * h);
    let j = j_symplectic(1);
    let residual = &j * derivative + family.evaluate(lambda, t) * u(t)?;
    Ok(residual.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{integrate_frame, OdeOptions, Tolerances};
    use crate::numerics::{principal_angles, Frame};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn s_theta_special_values() {
        let s0 = s_theta(0.0);
        assert_eq!(s0, Dmat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]));
        let s_half = s_theta(FRAC_PI_2);
        assert_abs_diff_eq!(s_half[(0, 0)], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s_half[(0, 1)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s_half[(1, 0)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s_half[(1, 1)], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn s_theta_is_an_involution_with_det_minus_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for _ in 0..100 {
            let theta = rng.gen_range(-10.0..10.0);
            let s = s_theta(theta);
            assert!(((&s * &s) - Dmat::identity(2, 2)).abs().max() <= 1e-12);
            assert_abs_diff_eq!(s.determinant(), -1.0, epsilon = 1e-12);
            assert!((s_theta(theta + 2.0 * PI) - &s).abs().max() <= 1e-14);
        }
    }

    #[test]
    fn s_theta_eigenvectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let theta = rng.gen_range(-10.0..10.0);
            let s = s_theta(theta);
            let plus = eigenvector_plus(theta);
            let minus = eigenvector_minus(theta);
            assert!(((&s * &plus) - &plus).norm() <= 1e-12);
            assert!(((&s * &minus) + &minus).norm() <= 1e-12);
        }
    }

    #[test]
    fn moebius_limits_and_midpoint() {
        let family = moebius_family(MoebiusConfig::default()).unwrap();
        let lambda = ParameterPoint::new(vec![1.2]);
        let plus = family.asymptotic_plus(&lambda);
        let minus = family.asymptotic_minus(&lambda);
        let j = j_symplectic(1);
        assert!(((&j * s_theta(1.2)) - &plus).abs().max() <= 1e-14);
        assert!(((&j * s_theta(0.0)) - &minus).abs().max() <= 1e-14);
        // chi(0) = 1/2 makes A(z, 0) the average of the two limits.
        let at_zero = family.evaluate(&lambda, 0.0);
        assert!(((&plus + &minus) * 0.5 - at_zero).abs().max() <= 1e-14);
        // Saturation toward the limits.
        let residual_far = (family.evaluate(&lambda, 12.0) - &plus).norm();
        assert!(residual_far <= 1e-9);
    }

    #[test]
    fn moebius_rejects_degenerate_config() {
        let bad = MoebiusConfig {
            a_plus: 0.0,
            ..MoebiusConfig::default()
        };
        assert!(matches!(moebius_family(bad), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn pejsachowicz_evaluate_matches_display() {
        let family = pejsachowicz_family(2).unwrap();
        // Angle sum pi/2 at t = 1: arctan(1) = pi/4 times J S_{pi/2}.
        let lambda = ParameterPoint::new(vec![FRAC_PI_4, FRAC_PI_4]);
        let value = family.evaluate(&lambda, 1.0);
        let expected = j_symplectic(1) * s_theta(FRAC_PI_2) * FRAC_PI_4;
        assert!((value - expected).abs().max() <= 1e-14);
        // Both branches vanish at t = 0.
        assert_eq!(family.evaluate(&lambda, 0.0).abs().max(), 0.0);
        // arctan limit.
        let plus = family.asymptotic_plus(&lambda);
        let expected = j_symplectic(1) * s_theta(FRAC_PI_2) * FRAC_PI_2;
        assert!((plus - expected).abs().max() <= 1e-14);
    }

    #[test]
    fn analytic_solutions_at_zero() {
        let lambda = ParameterPoint::new(vec![0.8, -0.3]);
        let u_minus = analytic_solution_minus(&lambda, 0.0).unwrap();
        assert_abs_diff_eq!(u_minus[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(u_minus[1], 0.0, epsilon = 1e-15);
        let u_plus = analytic_solution_plus(&lambda, 0.0).unwrap();
        let half = lambda.angle_sum() / 2.0;
        assert_abs_diff_eq!(u_plus[0], half.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(u_plus[1], half.sin(), epsilon = 1e-15);
        assert!(analytic_solution_plus(&lambda, -1.0).is_err());
        assert!(analytic_solution_minus(&lambda, 1.0).is_err());
    }

    #[test]
    fn analytic_solutions_solve_the_ode() {
        let family = pejsachowicz_family(1).unwrap();
        let lambda = ParameterPoint::new(vec![0.9]);
        for i in 1..=50 {
            let t = 0.2 * i as f64;
            let plus = analytic_ode_residual(&family, &lambda, t, true).unwrap();
            assert!(plus < 1e-8, "residual {plus:.2e} at t = {t}");
            let minus = analytic_ode_residual(&family, &lambda, -t, false).unwrap();
            assert!(minus < 1e-8, "residual {minus:.2e} at t = -{t}");
        }
    }

    #[test]
    fn constant_system_flow_matches_closed_form() {
        // For the autonomous system with A = a J S_theta, the flow is
        // W diag(e^{a t}, e^{-a t}) W^{-1} with W = (e1, e2). Checked with a
        // plain fixed-step integrator, independent of the adaptive one.
        let a = 0.8;
        let theta = 1.1;
        let j = j_symplectic(1);
        let coeff = &j * s_theta(theta) * a;
        let m = &j * &coeff; // u' = J A u

        let t_end = 1.0;
        let steps = 2000;
        let h = t_end / steps as f64;
        let mut flow = Dmat::identity(2, 2);
        for _ in 0..steps {
            // Classic RK4 on the matrix ODE.
            let k1 = &m * &flow;
            let k2 = &m * (&flow + &k1 * (h / 2.0));
            let k3 = &m * (&flow + &k2 * (h / 2.0));
            let k4 = &m * (&flow + &k3 * h);
            flow += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }

        let e1 = eigenvector_minus(theta);
        let e2 = eigenvector_plus(theta);
        let mut w = Dmat::zeros(2, 2);
        w.set_column(0, &e1);
        w.set_column(1, &e2);
        let diag = Dmat::from_diagonal(&Dvec::from_vec(vec![
            (a * t_end).exp(),
            (-a * t_end).exp(),
        ]));
        let closed_form = &w * diag * w.try_inverse().unwrap();
        assert!(
            (&flow - &closed_form).abs().max() <= 1e-8,
            "flow mismatch {:.2e}",
            (&flow - &closed_form).abs().max()
        );

        // Direction agreement with the adaptive frame transport.
        struct Constant(Dmat);
        impl HamiltonianFamily for Constant {
            fn half_dim(&self) -> usize {
                1
            }
            fn torus_dim(&self) -> usize {
                1
            }
            fn evaluate(&self, _: &ParameterPoint, _: f64) -> Dmat {
                self.0.clone()
            }
            fn asymptotic_plus(&self, _: &ParameterPoint) -> Dmat {
                self.0.clone()
            }
            fn asymptotic_minus(&self, _: &ParameterPoint) -> Dmat {
                self.0.clone()
            }
        }
        let family = Constant(coeff);
        let lambda = ParameterPoint::new(vec![0.0]);
        for v in [Dvec::from_vec(vec![1.0, 0.0]), Dvec::from_vec(vec![0.3, -0.9])] {
            let transported = integrate_frame(
                &family,
                &lambda,
                0.0,
                t_end,
                &Frame::from_vector(&v).unwrap(),
                &OdeOptions::default(),
            )
            .unwrap();
            let direct = Frame::from_vector(&(&flow * &v)).unwrap();
            let angle = principal_angles(&transported, &direct).largest().unwrap();
            assert!(angle <= 1e-8, "direction mismatch {angle:.2e}");
        }
    }

    #[test]
    fn pejsachowicz_unstable_space_is_the_first_axis_everywhere() {
        use crate::hamiltonian::unstable_at_zero;
        let family = pejsachowicz_family(2).unwrap();
        let tols = Tolerances::default();
        let axis = Frame::from_vector(&Dvec::from_vec(vec![1.0, 0.0])).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..8 {
            let lambda =
                ParameterPoint::new(vec![rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)]);
            let unstable = unstable_at_zero(&family, &lambda, 20.0, &tols).unwrap();
            let angle = principal_angles(&unstable, &axis).largest().unwrap();
            assert!(angle < 1e-6, "angle {angle:.2e} at {:?}", lambda.angles());
        }
    }

    #[test]
    fn pejsachowicz_kernel_law_on_a_sweep() {
        use crate::hamiltonian::kernel_dimension;
        let family = pejsachowicz_family(1).unwrap();
        let tols = Tolerances::default();
        let n = 64;
        for k in 0..n {
            let theta = -PI + 2.0 * PI * k as f64 / n as f64;
            let lambda = ParameterPoint::new(vec![theta]);
            let (_, dim) = kernel_dimension(&family, &lambda, 20.0, &tols).unwrap();
            let expected = if theta.abs() < 2.0 * tols.kernel_angle {
                1
            } else {
                0
            };
            assert_eq!(dim, expected, "theta = {theta}");
        }
    }
}

//! The family of contact forms `α_e = e0 α_I + e1 α_J + e2 α_K` on
//! `S^{4n+3}` parameterized by `e ∈ S^2`, viewed as a contact fibration over
//! `S^2` in coordinates (polar `φ`, azimuth `θ`).

use nalgebra::{DMatrix, DVector};

use crate::contact::{hamiltonian_field_raw, ContactForm, HamiltonianField, SpherePoint};
use crate::error::{GeomError, Result};
use crate::integrate::rk4_sphere_at;
use crate::linalg::max_abs;
use crate::quaternionic::{exp_scaled_structure, QuaternionicTriple, SphereDirection};
use crate::sampling::sphere_points;
use crate::transport::{horizontal_lift, BaseCoords, FibrationForm};

/// `e ↦ α_e` for a fixed quaternionic triple.
#[derive(Debug, Clone)]
pub struct LinearContactSphere {
    triple: QuaternionicTriple,
}

impl LinearContactSphere {
    /// The sphere `S^{4n+3}`, i.e. quaternionic dimension `n + 1`.
    pub fn new(n: usize) -> Result<Self> {
        Ok(Self {
            triple: QuaternionicTriple::build(n + 1)?,
        })
    }

    pub fn from_triple(triple: QuaternionicTriple) -> Self {
        Self { triple }
    }

    pub fn triple(&self) -> &QuaternionicTriple {
        &self.triple
    }

    pub fn dim(&self) -> usize {
        self.triple.dim()
    }

    pub fn generator(&self, e: &SphereDirection) -> DMatrix<f64> {
        self.triple.combine_matrix(e)
    }

    pub fn form(&self, e: &SphereDirection) -> Result<ContactForm> {
        ContactForm::new(self.generator(e))
    }

    /// `(α_0, α_1, α_2) = (α_I, α_J, α_K)`.
    pub fn forms(&self) -> [ContactForm; 3] {
        [
            ContactForm::from_structure(self.triple.i()),
            ContactForm::from_structure(self.triple.j()),
            ContactForm::from_structure(self.triple.k()),
        ]
    }

    /// Closed-form Reeb fields `R_i = -I_i p` of `α_I, α_J, α_K`.
    pub fn reeb_fields(&self, p: &SpherePoint) -> [DVector<f64>; 3] {
        let x = p.coords();
        [
            -(self.triple.i().matrix() * x),
            -(self.triple.j().matrix() * x),
            -(self.triple.k().matrix() * x),
        ]
    }

    /// Gram determinant of `(R_0, R_1, R_2)` at `p`.
    pub fn reeb_gram_determinant(&self, p: &SpherePoint) -> f64 {
        let r = self.reeb_fields(p);
        DMatrix::from_fn(3, 3, |a, b| r[a].dot(&r[b])).determinant()
    }
}

/// `F_θ = ½(-sin θ I + cos θ J)`.
#[derive(Debug, Clone)]
pub struct PolarLift {
    theta: f64,
    f: DMatrix<f64>,
}

impl PolarLift {
    pub fn new(triple: &QuaternionicTriple, theta: f64) -> Self {
        let f = (triple.i().matrix() * (-theta.sin()) + triple.j().matrix() * theta.cos()) * 0.5;
        Self { theta, f }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.f
    }

    /// `max |F² + ¼ id|`.
    pub fn square_residual(&self) -> f64 {
        let n = self.f.nrows();
        max_abs(&(&self.f * &self.f + DMatrix::identity(n, n) * 0.25))
    }

    /// `exp(φ F_θ) = cos(φ/2) id + 2 sin(φ/2) F_θ`.
    pub fn flow(&self, phi: f64) -> DMatrix<f64> {
        exp_scaled_structure(&self.f, 0.5, phi).expect("F_θ squares to -1/4")
    }
}

/// `∂_θ F_θ = ½(-cos θ I - sin θ J)`.
fn polar_lift_derivative(triple: &QuaternionicTriple, theta: f64) -> DMatrix<f64> {
    (triple.i().matrix() * (-theta.cos()) - triple.j().matrix() * theta.sin()) * 0.5
}

/// The family as a fibration over `S^2` minus the south pole: radial
/// coordinate `φ ∈ [0, π]`, angle `θ`, fiber form `α_{e(θ,φ)}`, no base terms.
#[derive(Debug, Clone)]
pub struct SphereFamilyFibration {
    sphere: LinearContactSphere,
}

impl SphereFamilyFibration {
    pub fn new(sphere: LinearContactSphere) -> Self {
        Self { sphere }
    }

    pub fn sphere(&self) -> &LinearContactSphere {
        &self.sphere
    }
}

impl FibrationForm for SphereFamilyFibration {
    fn fiber_dim(&self) -> usize {
        self.sphere.dim()
    }

    fn radial_extent(&self) -> f64 {
        std::f64::consts::PI
    }

    fn fiber_generator(&self, b: BaseCoords) -> DMatrix<f64> {
        self.sphere.generator(&SphereDirection::from_angles(b.angle, b.radial))
    }

    fn fiber_generator_derivative(&self, b: BaseCoords, k: usize) -> DMatrix<f64> {
        let t = &self.sphere.triple;
        let (st, ct) = b.angle.sin_cos();
        let (sp, cp) = b.radial.sin_cos();
        match k {
            0 => t.combine_raw(ct * cp, st * cp, -sp),
            _ => t.combine_raw(-st * sp, ct * sp, 0.0),
        }
    }

    fn base_coefficients(&self, _p: &DVector<f64>, _b: BaseCoords) -> [f64; 2] {
        [0.0, 0.0]
    }

    fn base_coefficient_gradient(&self, p: &DVector<f64>, _b: BaseCoords, _k: usize) -> DVector<f64> {
        DVector::zeros(p.len())
    }
}

/// Closed-form horizontal lift of `∂_φ` at `(θ, φ, p)`: fiber part `F_θ p`,
/// base part `(1, 0)`. Independent of `φ`.
pub fn lifted_polar_field(
    sphere: &LinearContactSphere,
    theta: f64,
    _phi: f64,
    p: &SpherePoint,
) -> (DVector<f64>, [f64; 2]) {
    let f = PolarLift::new(&sphere.triple, theta);
    (f.matrix() * p.coords(), [1.0, 0.0])
}

/// `½(-sin θ R_0 + cos θ R_1)` with the Reeb fields `R_i = -I_i p`.
pub fn reeb_combination(sphere: &LinearContactSphere, theta: f64, p: &SpherePoint) -> DVector<f64> {
    let [r0, r1, _] = sphere.reeb_fields(p);
    (r0 * (-theta.sin()) + r1 * theta.cos()) * 0.5
}

/// Sup distance between the numerical horizontal lift of `∂_φ` and
/// [`lifted_polar_field`].
pub fn lift_error(fib: &SphereFamilyFibration, theta: f64, phi: f64, p: &SpherePoint) -> Result<f64> {
    let numeric = horizontal_lift(fib, p, BaseCoords::new(phi, theta), [1.0, 0.0])?;
    let (closed, _) = lifted_polar_field(&fib.sphere, theta, phi, p);
    Ok((numeric.fiber - closed).amax())
}

/// `Φ_{θ,φ}(p) = exp(φ F_θ) p`.
pub fn transport_flow(sphere: &LinearContactSphere, theta: f64, phi: f64, p: &SpherePoint) -> SpherePoint {
    let flow = PolarLift::new(&sphere.triple, theta).flow(phi);
    SpherePoint::normalize(flow * p.coords()).expect("orthogonal image of a unit vector")
}

fn pullback_parts(sphere: &LinearContactSphere, theta: f64, phi: f64, p: &SpherePoint) -> (f64, f64) {
    let lift = PolarLift::new(&sphere.triple, theta);
    let q = lift.flow(phi) * p.coords();
    let a = sphere.generator(&SphereDirection::from_angles(theta, phi));
    let qa = a.transpose() * &q;
    let d_theta = polar_lift_derivative(&sphere.triple, theta) * p.coords() * (2.0 * (phi / 2.0).sin());
    // Φ is linear in p, so DΦ R_0 = Φ R_0 with R_0 the Reeb field of α_K
    let reeb = -(sphere.triple.k().matrix() * p.coords());
    let scale = qa.dot(&(lift.flow(phi) * reeb));
    (qa.dot(&d_theta), scale)
}

/// `(Φ*α)(∂_θ)` after dividing out the conformal factor, from the analytic
/// `θ`-derivative of `Φ`.
pub fn pullback_hamiltonian(sphere: &LinearContactSphere, theta: f64, phi: f64, p: &SpherePoint) -> f64 {
    let (h, scale) = pullback_parts(sphere, theta, phi, p);
    h / scale
}

/// Conformal exponent `g` with `Φ*α = e^g (α_K + H dθ)`.
pub fn pullback_conformal(sphere: &LinearContactSphere, theta: f64, phi: f64, p: &SpherePoint) -> f64 {
    pullback_parts(sphere, theta, phi, p).1.ln()
}

/// Comparison of the flow of `G ≡ -1` for `α_K` with the rotations
/// `exp(σ θ K)`.
#[derive(Debug, Clone)]
pub struct ReebIdentification {
    /// The unique matching sign, if exactly one matches.
    pub sigma: Option<i32>,
    /// Max distance over samples and checkpoints for `σ = +1`.
    pub distance_plus: f64,
    /// Same for `σ = -1`.
    pub distance_minus: f64,
    /// Max distance at `θ = 2π` only, per sign `(+1, -1)`.
    pub endpoint_distances: (f64, f64),
    pub samples: usize,
}

/// Number of checkpoints in `(0, 2π]` where the two rotations are compared.
pub const REEB_CHECKPOINTS: usize = 8;

/// Integrates the contact flow of `G ≡ -1` for `α_K` over `θ ∈ [0, 2π]` and
/// compares the trajectory at [`REEB_CHECKPOINTS`] angles with
/// `exp(σ θ K) p` for both signs.
pub fn reeb_identification(
    sphere: &LinearContactSphere,
    samples: usize,
    seed: u64,
    step: f64,
    tolerance: f64,
) -> Result<ReebIdentification> {
    if samples == 0 {
        return Err(GeomError::InvalidArgument("need at least one sample".into()));
    }
    let k = sphere.triple.k().matrix();
    let g = HamiltonianField::constant(-1.0);
    let times: Vec<f64> = (0..=REEB_CHECKPOINTS)
        .map(|i| std::f64::consts::TAU * i as f64 / REEB_CHECKPOINTS as f64)
        .collect();
    let mut plus = 0.0_f64;
    let mut minus = 0.0_f64;
    let mut end_plus = 0.0_f64;
    let mut end_minus = 0.0_f64;
    for p in sphere_points(sphere.dim(), samples, seed, "reeb-identification") {
        let states = rk4_sphere_at(p.coords(), &times, step, |x, t| hamiltonian_field_raw(k, &g, x, t))?;
        for (i, (&t, x)) in times[1..].iter().zip(&states).enumerate() {
            let dp = (exp_scaled_structure(k, 1.0, t)? * p.coords() - x).norm();
            let dm = (exp_scaled_structure(k, 1.0, -t)? * p.coords() - x).norm();
            plus = plus.max(dp);
            minus = minus.max(dm);
            if i + 1 == REEB_CHECKPOINTS {
                end_plus = end_plus.max(dp);
                end_minus = end_minus.max(dm);
            }
        }
    }
    let sigma = match (plus < tolerance, minus < tolerance) {
        (true, false) => Some(1),
        (false, true) => Some(-1),
        _ => None,
    };
    Ok(ReebIdentification {
        sigma,
        distance_plus: plus,
        distance_minus: minus,
        endpoint_distances: (end_plus, end_minus),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::{contact_nondegeneracy, reeb_field};
    use crate::transport::{radial_trivialization, TrivializationOptions};
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn s7() -> LinearContactSphere {
        LinearContactSphere::new(1).unwrap()
    }

    #[test]
    fn polar_lift_squares_to_minus_quarter() {
        let s = s7();
        for k in 0..16 {
            assert!(PolarLift::new(s.triple(), TAU * k as f64 / 16.0).square_residual() < 1e-15);
        }
    }

    #[test]
    fn closed_form_lift_matches_numerical_lift() {
        let s = s7();
        let fib = SphereFamilyFibration::new(s);
        for (k, p) in sphere_points(8, 40, 1, "lift").iter().enumerate() {
            let theta = 0.37 * k as f64;
            let phi = 0.05 + 3.0 * (k as f64 / 40.0);
            assert!(lift_error(&fib, theta, phi, p).unwrap() < 1e-10);
            let lift = horizontal_lift(&fib, p, BaseCoords::new(phi, theta), [1.0, 0.0]).unwrap();
            assert!(lift.form_residual < 1e-10 && lift.annihilator_residual < 1e-10);
        }
    }

    #[test]
    fn closed_form_lift_is_minus_the_reeb_combination() {
        let s = s7();
        for p in sphere_points(8, 10, 2, "reeb-comb") {
            for theta in [0.0, FRAC_PI_2, 1.3] {
                let (w, base) = lifted_polar_field(&s, theta, 0.7, &p);
                assert_eq!(base, [1.0, 0.0]);
                assert!((w + reeb_combination(&s, theta, &p)).norm() < 1e-14);
            }
            let r = s.reeb_fields(&p);
            let (w0, _) = lifted_polar_field(&s, 0.0, 1.0, &p);
            assert!((w0 + &r[1] * 0.5).norm() < 1e-14);
            let (w1, _) = lifted_polar_field(&s, FRAC_PI_2, 1.0, &p);
            assert!((w1 - &r[0] * 0.5).norm() < 1e-14);
        }
    }

    #[test]
    fn closed_form_reeb_fields_are_numerical_reeb_fields() {
        let s = s7();
        let forms = s.forms();
        for p in sphere_points(8, 10, 3, "reeb") {
            for (form, r) in forms.iter().zip(s.reeb_fields(&p)) {
                assert!((reeb_field(form, &p).unwrap() - r).norm() < 1e-12);
            }
            assert!((s.reeb_gram_determinant(&p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn every_form_in_the_family_is_contact_with_constant_volume() {
        for n in [0, 1] {
            let s = LinearContactSphere::new(n).unwrap();
            let expected = 2f64.powi(2 * n as i32 + 1);
            for (k, p) in sphere_points(s.dim(), 12, 4, "contact").iter().enumerate() {
                let e = SphereDirection::from_angles(0.5 * k as f64, 0.25 * k as f64);
                let v = contact_nondegeneracy(&s.form(&e).unwrap(), p).unwrap();
                assert!((v - expected).abs() < 1e-9, "{v}");
            }
        }
    }

    #[test]
    fn transport_flow_special_values() {
        let s = s7();
        for p in sphere_points(8, 5, 5, "flow") {
            assert!(transport_flow(&s, 0.4, 0.0, &p).distance(&p) < 1e-15);
            let back = transport_flow(&s, 0.4, TAU, &p);
            assert!((back.coords() + p.coords()).norm() < 1e-14);
            let a = transport_flow(&s, 1.1, 0.3, &transport_flow(&s, 1.1, 0.9, &p));
            assert!(a.distance(&transport_flow(&s, 1.1, 1.2, &p)) < 1e-14);
        }
    }

    #[test]
    fn transport_flow_matches_integrated_lift() {
        let s = s7();
        for p in sphere_points(8, 3, 6, "flow-ode") {
            let theta = 0.9;
            let end = crate::integrate::rk4_sphere(p.coords(), 0.0, 2.0, 1e-2, |x, phi| {
                Ok(lifted_polar_field(&s, theta, phi, &SpherePoint::normalize(x.clone())?).0)
            })
            .unwrap();
            assert!((end - transport_flow(&s, theta, 2.0, &p).coords()).norm() < 1e-7);
        }
    }

    #[test]
    fn flow_at_pi_maps_alpha_k_to_minus_alpha_k() {
        let s = s7();
        let f = PolarLift::new(s.triple(), 0.6).flow(PI);
        let pulled = f.transpose() * (-s.triple().k().matrix()) * &f;
        assert!(max_abs(&(pulled - s.triple().k().matrix())) < 1e-14);
    }

    #[test]
    fn analytic_pullback_is_sin_squared() {
        let s = s7();
        for p in sphere_points(8, 10, 7, "pullback") {
            for theta in [0.0, 0.7, 2.5, 5.0] {
                assert!(pullback_hamiltonian(&s, theta, 0.0, &p).abs() < 1e-15);
                assert!((pullback_hamiltonian(&s, theta, PI, &p) - 1.0).abs() < 1e-14);
                assert!((pullback_hamiltonian(&s, theta, FRAC_PI_2, &p) - 0.5).abs() < 1e-12);
                let phi: f64 = 1.9;
                let expected = (phi / 2.0).sin().powi(2);
                assert!((pullback_hamiltonian(&s, theta, phi, &p) - expected).abs() < 1e-12);
                assert!(pullback_conformal(&s, theta, phi, &p).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn integrated_pullback_matches_closed_form() {
        let s = s7();
        let fib = SphereFamilyFibration::new(s);
        let p = sphere_points(8, 1, 8, "pullback-ode").remove(0);
        let radii = [0.5, 1.5, 3.0];
        let opts = TrivializationOptions {
            step: 1e-2,
            ..Default::default()
        };
        for sample in radial_trivialization(&fib, &p, 0.8, &radii, &opts).unwrap() {
            let expected = (sample.radial / 2.0).sin().powi(2);
            assert!((sample.hamiltonian - expected).abs() < 1e-6, "{}", sample.hamiltonian);
            assert!(sample.conformal.abs() < 1e-6);
            let closed = transport_flow(fib.sphere(), 0.8, sample.radial, &p);
            assert!((closed.coords() - &sample.image).norm() < 1e-8);
        }
    }

    #[test]
    fn reeb_identification_picks_one_sign() {
        let s = s7();
        let id = reeb_identification(&s, 5, 9, 1e-2, 1e-7).unwrap();
        assert_eq!(id.sigma, Some(1));
        assert!(id.distance_minus > 1.0);
        assert!(id.endpoint_distances.0 < 1e-7 && id.endpoint_distances.1 < 1e-7);
    }

    #[test]
    fn reeb_flow_commutes_with_k_rotation() {
        let s = s7();
        let k = s.triple().k().matrix().clone();
        let g = HamiltonianField::constant(-1.0);
        let rot = exp_scaled_structure(&k, 1.0, 0.7).unwrap();
        for p in sphere_points(8, 4, 10, "commute") {
            let flow = |x: &DVector<f64>| {
                crate::integrate::rk4_sphere(x, 0.0, 2.0, 1e-2, |y, t| hamiltonian_field_raw(&k, &g, y, t)).unwrap()
            };
            let a = flow(&(&rot * p.coords()));
            let b = &rot * flow(p.coords());
            assert!((a - b).norm() < 1e-7);
        }
    }

    proptest::proptest! {
        #[test]
        fn transport_flow_is_a_group(seed in 0u64..500, theta in 0.0..TAU, a in 0.0..PI, b in 0.0..PI) {
            let s = s7();
            let p = crate::sampling::sphere_point(8, seed, "flow-group", 0);
            let composed = transport_flow(&s, theta, b, &transport_flow(&s, theta, a, &p));
            proptest::prop_assert!((composed.coords() - transport_flow(&s, theta, a + b, &p).coords()).amax() < 1e-12);
        }

        #[test]
        fn pullback_depends_only_on_phi(seed in 0u64..500, theta in 0.0..TAU, phi in 0.0..PI) {
            let s = s7();
            let p = crate::sampling::sphere_point(8, seed, "pullback", 0);
            let h = pullback_hamiltonian(&s, theta, phi, &p);
            proptest::prop_assert!((h - (phi / 2.0).sin().powi(2)).abs() < 1e-12);
        }

        #[test]
        fn reeb_fields_stay_independent(seed in 0u64..500) {
            let s = s7();
            let p = crate::sampling::sphere_point(8, seed, "gram", 0);
            proptest::prop_assert!(s.reeb_gram_determinant(&p) > 0.9);
        }
    }
}

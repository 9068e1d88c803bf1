use std::f64::consts::{PI, TAU};

use nalgebra::DVector;

use super::*;
use crate::contact::{contact_plane_frame, ContactForm};
use crate::quaternionic::QuaternionicTriple;
use crate::sampling::sphere_points;

fn disk(profile: HamiltonianProfile) -> ContactFibrationDisk {
    let t = QuaternionicTriple::build(1).unwrap();
    ContactFibrationDisk::new(ContactForm::from_structure(t.i()), profile, DEFAULT_QUADRATIC_BOUND)
        .unwrap()
}

#[test]
fn zero_profile_lift_is_zero() {
    let fib = disk(HamiltonianProfile::zero());
    for p in sphere_points(4, 20, 1, "zero-lift") {
        let lift = horizontal_lift(&fib, &p, BaseCoords::new(0.4, 1.1), [0.3, -2.0]).unwrap();
        assert!(lift.fiber.norm() < 1e-12);
        assert_eq!(lift.base, [0.3, -2.0]);
    }
}

#[test]
fn lift_residuals_are_small_for_polynomial_profiles() {
    for name in BUILTIN_PROFILES {
        let fib = disk(HamiltonianProfile::builtin(name).unwrap());
        for (k, p) in sphere_points(4, 30, 2, name).iter().enumerate() {
            let b = BaseCoords::new(0.1 + 0.02 * k as f64, 0.3 * k as f64);
            let lift = horizontal_lift(&fib, p, b, [0.7, 1.3]).unwrap();
            assert!(lift.form_residual < 1e-10, "{name}: {}", lift.form_residual);
            assert!(lift.annihilator_residual < 1e-10, "{name}: {}", lift.annihilator_residual);
        }
    }
}

#[test]
fn lift_is_the_scaled_contact_vector_field_of_minus_h() {
    let fib = disk(HamiltonianProfile::r2_mixed());
    let g = LoopHamiltonian::new(fib.profile(), 0.6);
    for p in sphere_points(4, 10, 3, "lift-vs-field") {
        let theta = 0.8;
        let lift = horizontal_lift(&fib, &p, BaseCoords::new(0.6, theta), [0.0, 2.5]).unwrap();
        let x = crate::contact::hamiltonian_field_raw(fib.fiber_form().generator(), &g, p.coords(), theta).unwrap();
        assert!((&lift.fiber - x * 2.5).norm() < 1e-10);
    }
}

#[test]
fn profiles_that_are_not_quadratic_are_rejected() {
    let t = QuaternionicTriple::build(1).unwrap();
    let linear = HamiltonianProfile::new("linear", |p, r, _| r * p[0]);
    let err = ContactFibrationDisk::new(ContactForm::from_structure(t.i()), linear, 10.0).unwrap_err();
    assert!(matches!(err, crate::GeomError::InvalidArgument(_)));
}

#[test]
fn constant_path_is_identity() {
    let fib = disk(HamiltonianProfile::r2_p1());
    let points = sphere_points(4, 8, 4, "constant");
    let out = parallel_transport(&fib, &BasePath::constant(BaseCoords::new(0.5, 1.0)), &points, 1e-2).unwrap();
    assert!(out.max_displacement() < 1e-12);
}

#[test]
fn transport_rejects_bad_step_and_dimension() {
    let fib = disk(HamiltonianProfile::zero());
    let points = sphere_points(4, 1, 4, "bad");
    assert!(parallel_transport(&fib, &BasePath::circle(0.3), &points, 0.0).is_err());
    let wrong = sphere_points(6, 1, 4, "bad");
    assert!(parallel_transport(&fib, &BasePath::circle(0.3), &wrong, 0.1).is_err());
}

#[test]
fn zero_profile_holonomy_is_trivial() {
    let fib = disk(HamiltonianProfile::zero());
    let check = check_lemma_parallel(&fib, 0.5, 5, 7, 1e-2).unwrap();
    assert!(check.max_distance < 1e-12);
}

#[test]
fn holonomy_matches_hamiltonian_flow() {
    for (profile, r0) in [(HamiltonianProfile::r2_p1(), 0.5), (HamiltonianProfile::r2_sin_p2(), 0.3)] {
        let fib = disk(profile);
        let check = check_lemma_parallel(&fib, r0, 4, 11, 1e-2).unwrap();
        assert!(check.max_distance < 1e-5, "{}", check.max_distance);
        assert!(check.max_horizontality_residual < 1e-8);
    }
}

#[test]
fn holonomy_is_not_trivial_for_nonzero_profile() {
    let fib = disk(HamiltonianProfile::r2_p1());
    let points = sphere_points(4, 3, 12, "nontrivial");
    let out = parallel_transport(&fib, &BasePath::circle(0.5), &points, 1e-2).unwrap();
    assert!(out.max_displacement() > 1e-2);
}

#[test]
fn central_loop_is_identity() {
    let fib = disk(HamiltonianProfile::r2_p1());
    assert_eq!(check_lemma_parallel(&fib, 0.0, 3, 1, 1e-2).unwrap().max_distance, 0.0);
    assert!(check_lemma_parallel(&fib, 1.0, 3, 1, 1e-2).is_err());
}

#[test]
fn transport_preserves_the_contact_plane() {
    let fib = disk(HamiltonianProfile::r2_mixed());
    let path = BasePath::circle(0.7);
    for p in sphere_points(4, 4, 13, "contacto") {
        let defect = contactomorphism_defect(&fib, &path, &p, 1e-2, 1e-6).unwrap();
        assert!(defect < 1e-6, "{defect}");
    }
}

#[test]
fn concatenation_composes_transports() {
    let fib = disk(HamiltonianProfile::r2_mixed());
    let first = BasePath::segment(BaseCoords::new(0.2, 0.0), BaseCoords::new(0.6, 1.0));
    let second = BasePath::arc(0.6, 1.0, 3.0);
    let joined = BasePath::concat(&[first.clone(), second.clone()]).unwrap();
    let step = 5e-3;
    let points = sphere_points(4, 4, 14, "concat");
    let a = parallel_transport(&fib, &first, &points, step).unwrap();
    let mids: Vec<_> = a.endpoints.iter().map(|(_, q)| q.clone()).collect();
    let b = parallel_transport(&fib, &second, &mids, step).unwrap();
    let c = parallel_transport(&fib, &joined, &points, step).unwrap();
    for ((_, x), (_, y)) in b.endpoints.iter().zip(&c.endpoints) {
        assert!(x.distance(y) < 1e-9, "{}", x.distance(y));
    }
}

#[test]
fn concat_rejects_gaps() {
    let a = BasePath::arc(0.5, 0.0, 1.0);
    let b = BasePath::arc(0.5, 2.0, 3.0);
    assert!(BasePath::concat(&[a, b]).is_err());
    assert!(BasePath::circle(0.4).is_closed());
    assert!(!BasePath::arc(0.4, 0.0, 1.0).is_closed());
    assert!(BasePath::segment(BaseCoords::new(0.0, 0.0), BaseCoords::new(0.0, 2.0)).is_closed());
}

#[test]
fn path_velocity_is_scaled_by_piece_count() {
    let path = BasePath::concat(&[BasePath::ray(0.0, 0.0, 0.5), BasePath::arc(0.5, 0.0, PI)]).unwrap();
    let (b, u) = path.at(0.75);
    assert!((b.radial - 0.5).abs() < 1e-15 && (b.angle - PI / 2.0).abs() < 1e-15);
    assert!((u[1] - TAU).abs() < 1e-15 && u[0] == 0.0);
}

#[test]
fn trivialization_of_trivialized_form_is_fixed() {
    let fib = disk(HamiltonianProfile::r2_angular());
    let points = sphere_points(4, 3, 15, "fixed");
    let opts = TrivializationOptions {
        step: 1e-2,
        ..Default::default()
    };
    let table = radial_trivialization_grid(&fib, &points, 5, 6, &opts).unwrap();
    assert_eq!(table.len(), 3 * 5 * 6);
    for s in table {
        let expected = s.radial * s.radial * (1.0 + 0.5 * s.angle.sin());
        assert!((s.hamiltonian - expected).abs() < 1e-6);
        assert!(s.conformal.abs() < 1e-6);
    }
}

#[test]
fn trivialization_of_zero_profile_is_zero() {
    let fib = disk(HamiltonianProfile::zero());
    let points = sphere_points(4, 2, 16, "zero-triv");
    let table = radial_trivialization_grid(&fib, &points, 3, 4, &TrivializationOptions::default()).unwrap();
    for s in table {
        assert!(s.hamiltonian.abs() < 1e-9 && s.conformal.abs() < 1e-9);
    }
}

#[test]
fn loop_at_infinity_of_trivial_fibration_vanishes() {
    let fib = disk(HamiltonianProfile::zero());
    let points = sphere_points(4, 2, 17, "zero-loop");
    let opts = TrivializationOptions {
        step: 1e-2,
        ..Default::default()
    };
    let out = loop_at_infinity(&fib, &points, &[0.0, 1.0], &[0.9, 0.95, 0.99], 1e-9, &opts).unwrap();
    assert!(out.max_limit_error(0.0) < 1e-9);
}

#[test]
fn loop_at_infinity_extrapolates_quadratic_profile() {
    // H = r^2 (1 + sin θ / 2), so G -> -(1 + sin θ / 2) with a linear leading term
    let fib = disk(HamiltonianProfile::r2_angular());
    let points = sphere_points(4, 1, 18, "quad-loop");
    let opts = TrivializationOptions {
        step: 1e-2,
        ..Default::default()
    };
    let out = loop_at_infinity(&fib, &points, &[0.5], &[0.96, 0.98, 0.99], 1e-9, &opts).unwrap();
    let target = -(1.0 + 0.5 * 0.5_f64.sin());
    // Richardson of order 2 leaves the linear term
    assert!(out.max_limit_error(target) < 0.02);
    let order = out.observed_order.unwrap();
    assert!((order - 1.0).abs() < 0.05, "{order}");
}

#[test]
fn loop_at_infinity_rejects_bad_radii() {
    let fib = disk(HamiltonianProfile::zero());
    let points = sphere_points(4, 1, 19, "bad-radii");
    let opts = TrivializationOptions::default();
    assert!(loop_at_infinity(&fib, &points, &[0.0], &[0.5], 1e-6, &opts).is_err());
    assert!(loop_at_infinity(&fib, &points, &[0.0], &[0.5, 0.4], 1e-6, &opts).is_err());
    assert!(loop_at_infinity(&fib, &points, &[0.0], &[0.5, 1.0], 1e-6, &opts).is_err());
}

#[test]
fn transported_tangent_vectors_of_identity_are_unchanged() {
    let fib = disk(HamiltonianProfile::zero());
    let p = sphere_points(4, 1, 20, "tangent").remove(0);
    let form = fib.fiber_form().clone();
    let xi = contact_plane_frame(&form, &p).unwrap();
    let vectors: Vec<DVector<f64>> = xi.column_iter().map(|c| c.into_owned()).collect();
    let (q, images) = transport_tangent_vectors(&fib, &BasePath::circle(0.5), &p, &vectors, 1e-2, 1e-6).unwrap();
    assert!(q.distance(&p) < 1e-12);
    for (v, w) in vectors.iter().zip(&images) {
        assert!((v - w).norm() < 1e-8);
    }
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]

    #[test]
    fn lift_is_horizontal_and_linear(seed in 0u64..1000, r in 0.0..1.0f64, angle in 0.0..TAU, u in -2.0..2.0f64, v in -2.0..2.0f64) {
        let fib = disk(HamiltonianProfile::r2_mixed());
        let p = crate::sampling::sphere_point(4, seed, "lift-prop", 0);
        let b = BaseCoords::new(r, angle);
        let both = horizontal_lift(&fib, &p, b, [u, v]).unwrap();
        let radial = horizontal_lift(&fib, &p, b, [1.0, 0.0]).unwrap();
        let angular = horizontal_lift(&fib, &p, b, [0.0, 1.0]).unwrap();
        proptest::prop_assert!(both.form_residual < 1e-10 && both.annihilator_residual < 1e-10);
        proptest::prop_assert!((both.fiber - radial.fiber * u - angular.fiber * v).amax() < 1e-12);
    }

    #[test]
    fn transport_stays_on_the_sphere(seed in 0u64..1000, r0 in 0.1..0.9f64) {
        let fib = disk(HamiltonianProfile::r2_sin_p2());
        let points = sphere_points(4, 1, seed, "transport-prop");
        let out = parallel_transport(&fib, &BasePath::circle(r0), &points, 0.05).unwrap();
        for (_, q) in &out.endpoints {
            proptest::prop_assert!((q.coords().norm() - 1.0).abs() < 1e-12);
        }
        proptest::prop_assert!(out.max_horizontality_residual < 1e-8);
    }
}

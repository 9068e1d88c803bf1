use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::report::{CheckResult, VerificationReport};
use super::tolerances::ToleranceTable;
use super::{SuiteConfig, VerifyError};
use crate::contact::{
    contact_nondegeneracy, hamiltonian_flow, hamiltonian_residual, hamiltonian_vector_field, reeb_field,
    reeb_residuals, tangency_invariance_residual, two_form, ContactForm, HamiltonianField, SpherePoint,
};
use crate::degree::{
    conjugation_path, evaluate_sphere_at_point, h_extend, roundtrip_identity, sphere_degree,
    structure_sphere_degree, AlmostContactPoint, QuaternionicFrame,
};
use crate::error::{GeomError, Result};
use crate::linalg::{max_abs, orthonormal_complement};
use crate::quaternionic::{
    complexify, det_winding, exp_scaled_structure, sample_loop, ComplexBasis, ComplexStructure, QuaternionicTriple,
    SphereDirection,
};
use crate::sampling::{sample_rng, sphere_points};
use crate::sphere_family::{
    lift_error, pullback_hamiltonian, reeb_identification, transport_flow, LinearContactSphere,
    SphereFamilyFibration,
};
use crate::transport::{
    check_lemma_parallel, contactomorphism_defect, horizontal_lift, loop_at_infinity, parallel_transport,
    radial_trivialization, radial_trivialization_grid, BaseCoords, BasePath, ContactFibrationDisk,
    HamiltonianProfile, TrivializationOptions, BUILTIN_PROFILES, DEFAULT_QUADRATIC_BOUND,
};

/// Offset of grid polar angles from the poles.
const POLE_OFFSET: f64 = 1e-3;

struct Outcome {
    residual: f64,
    observed: Option<f64>,
}

impl Outcome {
    fn residual(residual: f64) -> Self {
        Self { residual, observed: None }
    }

    fn observed(residual: f64, observed: f64) -> Self {
        Self {
            residual,
            observed: Some(observed),
        }
    }
}

struct Runner<'a> {
    config: &'a SuiteConfig,
    tolerances: ToleranceTable,
    checks: Vec<CheckResult>,
}

impl Runner<'_> {
    fn check<F>(&mut self, name: impl Into<String>, family: &str, f: F)
    where
        F: FnOnce(&SuiteConfig) -> Result<Outcome>,
    {
        let tolerance = self.tolerances.get(family);
        let start = Instant::now();
        let outcome = f(self.config);
        let wall_time = start.elapsed().as_secs_f64();
        let result = match outcome {
            Ok(o) => CheckResult {
                name: name.into(),
                max_residual: Some(o.residual),
                tolerance,
                pass: o.residual <= tolerance,
                observed: o.observed,
                error: None,
                wall_time,
            },
            Err(e) => CheckResult {
                name: name.into(),
                max_residual: None,
                tolerance,
                pass: false,
                observed: None,
                error: Some(e.to_string()),
                wall_time,
            },
        };
        self.checks.push(result);
    }
}

/// Runs the configured suite. Check failures, including errors raised while
/// evaluating a check, are recorded in the report; only an invalid
/// configuration is an error.
pub fn run_suite(config: &SuiteConfig) -> std::result::Result<VerificationReport, VerifyError> {
    config.validate()?;
    let mut runner = Runner {
        config,
        tolerances: config.tolerance_table()?,
        checks: Vec::new(),
    };
    let all = config.suite == "all";
    if all || config.suite == "quaternion" {
        quaternion_suite(&mut runner);
    }
    if all || config.suite == "contact" {
        contact_suite(&mut runner);
    }
    if all || config.suite == "transport" {
        transport_suite(&mut runner);
    }
    if all || config.suite == "sphere-family" {
        sphere_family_suite(&mut runner);
    }
    if all || config.suite == "degree" {
        degree_suite(&mut runner);
    }
    if all || config.suite == "roundtrip" {
        roundtrip_suite(&mut runner);
    }
    Ok(VerificationReport::new(config, runner.checks))
}

/// Sample count for checks that integrate an ODE per sample.
fn ode_samples(c: &SuiteConfig) -> usize {
    (c.samples / 20).clamp(1, 10)
}

fn random_direction(seed: u64, label: &str, index: u64) -> SphereDirection {
    let mut rng = sample_rng(seed, label, index);
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm > 1e-3 {
            return SphereDirection::new(v[0] / norm, v[1] / norm, v[2] / norm).expect("unit");
        }
    }
}

/// `(θ, φ)` grid with `φ` kept [`POLE_OFFSET`] away from the poles.
fn direction_grid(grid_theta: usize, grid_phi: usize) -> Vec<(f64, f64)> {
    let phis: Vec<f64> = if grid_phi == 1 {
        vec![FRAC_PI_2]
    } else {
        (0..grid_phi)
            .map(|i| POLE_OFFSET + (PI - 2.0 * POLE_OFFSET) * i as f64 / (grid_phi - 1) as f64)
            .collect()
    };
    (0..grid_theta)
        .flat_map(|k| {
            let theta = TAU * k as f64 / grid_theta as f64;
            phis.iter().map(move |&phi| (theta, phi))
        })
        .collect()
}

/// `exp(tF)` by a 20-term Taylor series on `tF / 8`, squared three times.
fn exp_series_oracle(f: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let n = f.nrows();
    let a = f * (t / 8.0);
    let mut term = DMatrix::identity(n, n);
    let mut sum = term.clone();
    for k in 1..20 {
        term = &term * &a / k as f64;
        sum += &term;
    }
    for _ in 0..3 {
        sum = &sum * &sum;
    }
    sum
}

fn quaternion_suite(r: &mut Runner<'_>) {
    for m in 1..=r.config.m {
        let tag = format!("[m={m}]");
        r.check(format!("quaternion-relations{tag}"), "quaternion-relations", |_| {
            Ok(Outcome::residual(QuaternionicTriple::build(m)?.max_relation_residual()))
        });
        r.check(format!("combine-square{tag}"), "combine-square", |c| {
            let t = QuaternionicTriple::build(m)?;
            let id = DMatrix::identity(t.dim(), t.dim());
            let mut worst = 0.0_f64;
            for i in 0..c.samples as u64 {
                let s = t.combine(&random_direction(c.seed, "combine-square", i))?;
                worst = worst.max(max_abs(&(s.matrix() * s.matrix() + &id)));
            }
            Ok(Outcome::residual(worst))
        });
        r.check(format!("exp-series{tag}"), "exp-series", |c| {
            let t = QuaternionicTriple::build(m)?;
            let mut worst = 0.0_f64;
            for i in 0..c.samples as u64 {
                let f = t.combine_matrix(&random_direction(c.seed, "exp-series", i));
                let time = sample_rng(c.seed, "exp-series-time", i).random_range(-TAU..=TAU);
                let closed = exp_scaled_structure(&f, 1.0, time)?;
                worst = worst.max(max_abs(&(closed - exp_series_oracle(&f, time))));
            }
            Ok(Outcome::residual(worst))
        });
        r.check(format!("complexify{tag}"), "complexify", |c| {
            let t = QuaternionicTriple::build(m)?;
            let n = t.dim();
            let basis = ComplexBasis::new(t.i());
            let mut worst = 0.0_f64;
            for i in 0..c.samples as u64 {
                let theta = sample_rng(c.seed, "complexify", i).random_range(0.0..TAU);
                let a = DMatrix::identity(n, n) * theta.cos() + t.i().matrix() * theta.sin();
                let z = complexify(&a, t.i())?;
                let expected = DMatrix::<Complex64>::identity(n / 2, n / 2) * Complex64::from_polar(1.0, theta);
                let err = (&z - expected).iter().fold(0.0_f64, |acc, w| acc.max(w.norm()));
                worst = worst.max(err).max(max_abs(&(basis.realify(&z) - a)));
            }
            Ok(Outcome::residual(worst))
        });
        r.check(format!("det-winding{tag}"), "det-winding", |_| {
            let t = QuaternionicTriple::build(m)?;
            let n = t.dim();
            let rotation = |theta: f64| DMatrix::identity(n, n) * theta.cos() + t.i().matrix() * theta.sin();
            let base = det_winding(&sample_loop(512, rotation), t.i())?;
            let fine = det_winding(&sample_loop(1024, rotation), t.i())?;
            let squared = det_winding(&sample_loop(512, |s| rotation(s) * rotation(s)), t.i())?;
            let expected = 2 * m as i64;
            let residual = [base - expected, fine - expected, squared - 2 * expected]
                .iter()
                .map(|d| d.abs())
                .max()
                .unwrap_or(0);
            Ok(Outcome::observed(residual as f64, base as f64))
        });
    }
}

fn contact_suite(r: &mut Runner<'_>) {
    let n = r.config.n;
    let tag = format!("[n={n}]");
    r.check(format!("contact-volume{tag}"), "contact-volume", |c| {
        let s = LinearContactSphere::new(n)?;
        let expected = 2f64.powi(2 * n as i32 + 1);
        let points = sphere_points(s.dim(), c.samples, c.seed, "contact-volume");
        let mut worst = 0.0_f64;
        for (theta, phi) in direction_grid(c.grid_theta, c.grid_phi) {
            let form = s.form(&SphereDirection::from_angles(theta, phi))?;
            for p in &points {
                worst = worst.max((contact_nondegeneracy(&form, p)? - expected).abs());
            }
        }
        Ok(Outcome::observed(worst, expected))
    });
    let reeb_forms = |s: &LinearContactSphere| -> Result<Vec<ContactForm>> {
        let mut forms: Vec<ContactForm> = s.forms().into_iter().collect();
        for (theta, phi) in direction_grid(10, 10) {
            forms.push(s.form(&SphereDirection::from_angles(theta, phi))?);
        }
        Ok(forms)
    };
    r.check(format!("reeb-residual{tag}"), "reeb-residual", |c| {
        let s = LinearContactSphere::new(n)?;
        let points = sphere_points(s.dim(), c.samples, c.seed, "reeb-residual");
        let mut worst = 0.0_f64;
        for form in reeb_forms(&s)? {
            for p in &points {
                let (a, b, t) = reeb_residuals(&form, p, &reeb_field(&form, p)?)?;
                worst = worst.max(a).max(b).max(t);
            }
        }
        Ok(Outcome::residual(worst))
    });
    r.check(format!("reeb-closed-form{tag}"), "reeb-closed-form", |c| {
        let s = LinearContactSphere::new(n)?;
        let points = sphere_points(s.dim(), c.samples, c.seed, "reeb-closed-form");
        let mut worst = 0.0_f64;
        for form in reeb_forms(&s)? {
            for p in &points {
                let closed = -(form.generator() * p.coords());
                worst = worst.max((reeb_field(&form, p)? - closed).amax());
            }
        }
        Ok(Outcome::residual(worst))
    });
    r.check(format!("two-form-oracle{tag}"), "two-form-oracle", |c| {
        let s = LinearContactSphere::new(n)?;
        let d = s.dim();
        let h = 1e-5;
        let mut worst = 0.0_f64;
        for i in 0..c.samples as u64 {
            let mut rng = sample_rng(c.seed, "two-form-oracle", i);
            let form = s.form(&random_direction(c.seed, "two-form-direction", i))?;
            let p = crate::sampling::sphere_point(d, c.seed, "two-form-point", i);
            let frame = orthonormal_complement(p.coords());
            let mut tangent = || -> DVector<f64> {
                let x: DVector<f64> = DVector::from_fn(d - 1, |_, _| StandardNormal.sample(&mut rng));
                &frame * x
            };
            let (u, v) = (tangent(), tangent());
            // d(xᵗA dx)(u, v) = D_u(xᵗA v) - D_v(xᵗA u) for constant extensions
            let a = form.generator();
            let at = |x: &DVector<f64>, w: &DVector<f64>| x.dot(&(a * w));
            let x = p.coords();
            let du = (at(&(x + &u * h), &v) - at(&(x - &u * h), &v)) / (2.0 * h);
            let dv = (at(&(x + &v * h), &u) - at(&(x - &v * h), &u)) / (2.0 * h);
            let value = two_form(&form, &p, &u, &v)?;
            let swapped = two_form(&form, &p, &v, &u)?;
            worst = worst.max((value - (du - dv)).abs()).max((value + swapped).abs());
        }
        Ok(Outcome::residual(worst))
    });
    r.check(format!("hamiltonian-residual{tag}"), "hamiltonian-residual", |c| {
        let s = LinearContactSphere::new(n)?;
        let forms = [
            s.forms()[0].clone(),
            s.form(&random_direction(c.seed, "hamiltonian-residual", 0))?,
        ];
        let hs = [HamiltonianField::coordinate(0), HamiltonianField::new(|p, t| p[1] * p[2] + t.sin())];
        let mut worst = 0.0_f64;
        for form in &forms {
            for h in &hs {
                for p in sphere_points(s.dim(), c.samples, c.seed, "hamiltonian-residual") {
                    let x = hamiltonian_vector_field(form, h, &p, 0.3)?;
                    worst = worst.max(hamiltonian_residual(form, h, &p, 0.3, &x)?);
                }
            }
        }
        Ok(Outcome::residual(worst))
    });
    r.check(format!("hamiltonian-linearity{tag}"), "hamiltonian-linearity", |c| {
        let s = LinearContactSphere::new(n)?;
        let form = s.form(&random_direction(c.seed, "hamiltonian-linearity", 0))?;
        let h1 = HamiltonianField::coordinate(0);
        let h2 = HamiltonianField::new(|p, _| p[1] * p[3]);
        let (a, b) = (1.7, -0.6);
        let combined = HamiltonianField::new(move |p, _| a * p[0] + b * p[1] * p[3]);
        let mut worst = 0.0_f64;
        for p in sphere_points(s.dim(), c.samples, c.seed, "hamiltonian-linearity") {
            let x1 = hamiltonian_vector_field(&form, &h1, &p, 0.0)?;
            let x2 = hamiltonian_vector_field(&form, &h2, &p, 0.0)?;
            let x = hamiltonian_vector_field(&form, &combined, &p, 0.0)?;
            worst = worst.max((x - x1 * a - x2 * b).amax());
        }
        Ok(Outcome::residual(worst))
    });
    r.check(format!("flow-reeb-rotation{tag}"), "flow-reeb-rotation", |c| {
        let s = LinearContactSphere::new(n)?;
        let k = s.triple().k().matrix();
        let form = s.forms()[2].clone();
        let one = HamiltonianField::constant(1.0);
        let time = 1.3;
        let rotation = exp_scaled_structure(k, 1.0, -time)?;
        let mut worst = 0.0_f64;
        for p in sphere_points(s.dim(), ode_samples(c), c.seed, "flow-reeb-rotation") {
            let end = hamiltonian_flow(&form, &one, &p, time, c.rk4_step)?;
            worst = worst.max((end.coords() - &rotation * p.coords()).norm());
        }
        Ok(Outcome::residual(worst))
    });
    r.check(format!("flow-order{tag}"), "flow-order", |c| {
        let s = LinearContactSphere::new(n)?;
        let form = s.forms()[2].clone();
        let h = HamiltonianField::new(|p, t| 1.0 + 0.5 * (2.0 * t).sin() * p[0]);
        let p = sphere_points(s.dim(), 1, c.seed, "flow-order").remove(0);
        let reference = hamiltonian_flow(&form, &h, &p, 2.0, 1e-3)?;
        let errors: Vec<f64> = [0.2, 0.1]
            .iter()
            .map(|&step| Ok(hamiltonian_flow(&form, &h, &p, 2.0, step)?.distance(&reference)))
            .collect::<Result<_>>()?;
        let order = (errors[0] / errors[1]).log2();
        Ok(Outcome::observed((order - 4.0).abs(), order))
    });
    r.check(format!("tangency-invariance{tag}"), "tangency-invariance", |c| {
        let s = LinearContactSphere::new(n)?;
        let mut worst = 0.0_f64;
        for (i, p) in sphere_points(s.dim(), c.samples, c.seed, "tangency-invariance").iter().enumerate() {
            let j = s.triple().combine(&random_direction(c.seed, "tangency-direction", i as u64))?;
            worst = worst.max(tangency_invariance_residual(&j, p)?);
        }
        Ok(Outcome::residual(worst))
    });
}

fn fiber_disk(profile: HamiltonianProfile) -> Result<ContactFibrationDisk> {
    let t = QuaternionicTriple::build(1)?;
    ContactFibrationDisk::new(ContactForm::from_structure(t.i()), profile, DEFAULT_QUADRATIC_BOUND)
}

fn builtin(name: &str) -> Result<HamiltonianProfile> {
    HamiltonianProfile::builtin(name).ok_or_else(|| GeomError::InvalidArgument(format!("unknown profile {name}")))
}

/// Profiles compared against the Hamiltonian flow.
const LEMMA_PROFILES: [&str; 3] = ["r2-p1", "r2-sin-p2", "r2-mixed"];

fn transport_suite(r: &mut Runner<'_>) {
    r.check("lift-residual", "lift-residual", |c| {
        let mut worst = 0.0_f64;
        for name in BUILTIN_PROFILES {
            let fib = fiber_disk(builtin(name)?)?;
            for (i, p) in sphere_points(4, c.samples, c.seed, "lift-residual").iter().enumerate() {
                let mut rng = sample_rng(c.seed, "lift-residual-base", i as u64);
                let b = BaseCoords::new(rng.random_range(0.0..1.0), rng.random_range(0.0..TAU));
                let u = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                let lift = horizontal_lift(&fib, p, b, u)?;
                worst = worst.max(lift.form_residual).max(lift.annihilator_residual);
            }
        }
        Ok(Outcome::residual(worst))
    });
    r.check("constant-path", "constant-path", |c| {
        let fib = fiber_disk(HamiltonianProfile::r2_mixed())?;
        let points = sphere_points(4, ode_samples(c), c.seed, "constant-path");
        let path = BasePath::constant(BaseCoords::new(0.5, 1.0));
        Ok(Outcome::residual(parallel_transport(&fib, &path, &points, c.rk4_step)?.max_displacement()))
    });
    for name in LEMMA_PROFILES {
        for r0 in [0.3, 0.5] {
            r.check(format!("lemma-parallel[{name},r0={r0}]"), "lemma-parallel", |c| {
                let fib = fiber_disk(builtin(name)?)?;
                let check = check_lemma_parallel(&fib, r0, ode_samples(c), c.seed, c.rk4_step)?;
                if check.max_horizontality_residual > 1e-8 {
                    return Err(GeomError::ResidualTooLarge {
                        context: "horizontality along transport",
                        residual: check.max_horizontality_residual,
                        tolerance: 1e-8,
                    });
                }
                Ok(Outcome::residual(check.max_distance))
            });
        }
    }
    r.check("lemma-parallel-order", "lemma-parallel-order", |c| {
        let fib = fiber_disk(HamiltonianProfile::r2_mixed())?;
        let distances: Vec<f64> = [0.08, 0.04, 0.02]
            .iter()
            .map(|&step| Ok(check_lemma_parallel(&fib, 0.5, 2, c.seed, step)?.max_distance))
            .collect::<Result<_>>()?;
        let order = (distances[0] / distances[1]).log2().min((distances[1] / distances[2]).log2());
        Ok(Outcome::observed((order - 4.0).abs(), order))
    });
    r.check("contactomorphism", "contactomorphism", |c| {
        let fib = fiber_disk(HamiltonianProfile::r2_mixed())?;
        let path = BasePath::circle(0.7);
        let mut worst = 0.0_f64;
        for p in sphere_points(4, ode_samples(c), c.seed, "contactomorphism") {
            worst = worst.max(contactomorphism_defect(&fib, &path, &p, c.rk4_step.max(1e-2).min(0.1), 1e-6)?);
        }
        Ok(Outcome::residual(worst))
    });
    r.check("concatenation", "concatenation", |c| {
        let fib = fiber_disk(HamiltonianProfile::r2_mixed())?;
        let first = BasePath::segment(BaseCoords::new(0.2, 0.0), BaseCoords::new(0.6, 1.0));
        let second = BasePath::arc(0.6, 1.0, 3.0);
        let joined = BasePath::concat(&[first.clone(), second.clone()])?;
        let points = sphere_points(4, ode_samples(c), c.seed, "concatenation");
        let a = parallel_transport(&fib, &first, &points, c.rk4_step)?;
        let mids: Vec<SpherePoint> = a.endpoints.into_iter().map(|(_, q)| q).collect();
        let b = parallel_transport(&fib, &second, &mids, c.rk4_step)?;
        let joint = parallel_transport(&fib, &joined, &points, c.rk4_step)?;
        let worst = b
            .endpoints
            .iter()
            .zip(&joint.endpoints)
            .map(|((_, x), (_, y))| x.distance(y))
            .fold(0.0, f64::max);
        Ok(Outcome::residual(worst))
    });
    r.check("trivialization-fixed-point", "trivialization-fixed-point", |c| {
        let fib = fiber_disk(HamiltonianProfile::r2_angular())?;
        let points = sphere_points(4, ode_samples(c), c.seed, "trivialization-fixed-point");
        let options = TrivializationOptions {
            step: c.rk4_step.max(1e-2).min(0.1),
            ..Default::default()
        };
        let mut worst = 0.0_f64;
        for s in radial_trivialization_grid(&fib, &points, 5, 6, &options)? {
            let expected = s.radial * s.radial * (1.0 + 0.5 * s.angle.sin());
            worst = worst.max((s.hamiltonian - expected).abs()).max(s.conformal.abs());
        }
        Ok(Outcome::residual(worst))
    });
}

fn sphere_family_suite(r: &mut Runner<'_>) {
    let n = r.config.n;
    let tag = format!("[n={n}]");
    let family = move || -> Result<SphereFamilyFibration> { Ok(SphereFamilyFibration::new(LinearContactSphere::new(n)?)) };
    r.check(format!("lift-closed-form{tag}"), "lift-closed-form", |c| {
        let fib = family()?;
        let points = sphere_points(fib.sphere().dim(), c.samples, c.seed, "lift-closed-form");
        let mut worst = 0.0_f64;
        for (theta, phi) in direction_grid(c.grid_theta, c.grid_phi) {
            for p in &points {
                worst = worst.max(lift_error(&fib, theta, phi, p)?);
            }
        }
        Ok(Outcome::residual(worst))
    });
    r.check(format!("pullback-analytic{tag}"), "pullback-analytic", |c| {
        let fib = family()?;
        let points = sphere_points(fib.sphere().dim(), c.samples, c.seed, "pullback");
        let mut worst = 0.0_f64;
        for (theta, phi) in direction_grid(c.grid_theta, c.grid_phi) {
            for p in &points {
                let expected = (phi / 2.0).sin().powi(2);
                worst = worst.max((pullback_hamiltonian(fib.sphere(), theta, phi, p) - expected).abs());
            }
        }
        for p in &points {
            worst = worst
                .max(pullback_hamiltonian(fib.sphere(), 0.0, 0.0, p).abs())
                .max((pullback_hamiltonian(fib.sphere(), 0.0, PI, p) - 1.0).abs());
        }
        Ok(Outcome::residual(worst))
    });
    r.check(format!("pullback-spread{tag}"), "pullback-spread", |c| {
        let fib = family()?;
        let points = sphere_points(fib.sphere().dim(), c.samples, c.seed, "pullback");
        let grid = direction_grid(c.grid_theta, c.grid_phi);
        let mut worst = 0.0_f64;
        for i in 0..c.grid_phi {
            let phi = grid[i].1;
            let values: Vec<f64> = (0..c.grid_theta)
                .flat_map(|k| {
                    let theta = grid[k * c.grid_phi + i].0;
                    points.iter().map(move |p| (theta, p))
                })
                .map(|(theta, p)| pullback_hamiltonian(fib.sphere(), theta, phi, p))
                .collect();
            let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
            worst = worst.max(max - min);
        }
        Ok(Outcome::residual(worst))
    });
    let ode_table = move |c: &SuiteConfig| -> Result<Vec<(f64, f64, f64)>> {
        let fib = family()?;
        let points = sphere_points(fib.sphere().dim(), ode_samples(c), c.seed, "pullback-ode");
        let radii: Vec<f64> = direction_grid(1, c.grid_phi).into_iter().map(|(_, phi)| phi).collect();
        let options = TrivializationOptions {
            step: c.rk4_step,
            ..Default::default()
        };
        let mut out = Vec::new();
        for k in 0..4 {
            let theta = TAU * k as f64 / 4.0 + 0.1;
            for p in &points {
                for s in radial_trivialization(&fib, p, theta, &radii, &options)? {
                    out.push((s.radial, s.hamiltonian, s.conformal));
                }
            }
        }
        Ok(out)
    };
    let mut cached: Option<std::result::Result<Vec<(f64, f64, f64)>, String>> = None;
    r.check(format!("pullback-ode{tag}"), "pullback-ode", |c| {
        let table = ode_table(c);
        cached = Some(table.clone().map_err(|e| e.to_string()));
        let worst = table?
            .iter()
            .map(|&(phi, h, _)| (h - (phi / 2.0).sin().powi(2)).abs())
            .fold(0.0, f64::max);
        Ok(Outcome::residual(worst))
    });
    r.check(format!("conformal-factor{tag}"), "conformal-factor", |_| {
        match cached.take().expect("pullback table computed") {
            Ok(table) => Ok(Outcome::residual(table.iter().map(|t| t.2.abs()).fold(0.0, f64::max))),
            Err(e) => Err(GeomError::NonConvergent(e)),
        }
    });
    let loop_inputs = move |c: &SuiteConfig| -> Result<(SphereFamilyFibration, Vec<SpherePoint>, Vec<f64>)> {
        let fib = family()?;
        let points = sphere_points(fib.sphere().dim(), 2, c.seed, "loop-at-infinity");
        Ok((fib, points, vec![0.3, 2.5]))
    };
    r.check(format!("loop-at-infinity{tag}"), "loop-at-infinity", |c| {
        let (fib, points, angles) = loop_inputs(c)?;
        let options = TrivializationOptions {
            step: c.rk4_step,
            ..Default::default()
        };
        let mut worst = 0.0_f64;
        for eps in [1e-1, 1e-2] {
            let out = loop_at_infinity(&fib, &points, &angles, &[PI / 2.0, PI - eps], 1e-6, &options)?;
            for s in &out.samples {
                let g = s.values[1];
                worst = worst.max(((g + 1.0).abs() - eps * eps / 4.0).max(0.0));
            }
        }
        Ok(Outcome::residual(worst))
    });
    let mut order = None;
    r.check(format!("loop-limit{tag}"), "loop-limit", |c| {
        let (fib, points, angles) = loop_inputs(c)?;
        let options = TrivializationOptions {
            step: c.rk4_step,
            ..Default::default()
        };
        let radii = [PI - 0.04, PI - 0.02, PI - 0.01];
        let out = loop_at_infinity(&fib, &points, &angles, &radii, 1e-6, &options)?;
        order = out.observed_order;
        Ok(Outcome::residual(out.max_limit_error(-1.0)))
    });
    r.check(format!("loop-order{tag}"), "loop-order", |_| {
        let k = order.ok_or_else(|| GeomError::NonConvergent("no observed convergence order".into()))?;
        Ok(Outcome::observed((k - 2.0).abs(), k))
    });
    r.check(format!("reeb-identification{tag}"), "reeb-identification", |c| {
        let fib = family()?;
        let tol = 1e-7;
        let id = reeb_identification(fib.sphere(), c.samples, c.seed, c.rk4_step.max(1e-3), tol)?;
        match id.sigma {
            Some(1) => Ok(Outcome::observed(id.distance_plus, 1.0)),
            Some(_) => Ok(Outcome::observed(id.distance_minus, -1.0)),
            None => Err(GeomError::NonConvergent(format!(
                "no unique sign: distances {:e} (+1) and {:e} (-1)",
                id.distance_plus, id.distance_minus
            ))),
        }
    });
    r.check(format!("reeb-gram{tag}"), "reeb-gram", |c| {
        let fib = family()?;
        let min = sphere_points(fib.sphere().dim(), c.samples, c.seed, "reeb-gram")
            .iter()
            .map(|p| fib.sphere().reeb_gram_determinant(p))
            .fold(f64::INFINITY, f64::min);
        Ok(Outcome::observed((1.0 - min).max(0.0), min))
    });
    r.check(format!("flow-group{tag}"), "flow-group", |c| {
        let fib = family()?;
        let s = fib.sphere();
        let mut worst = 0.0_f64;
        for (i, p) in sphere_points(s.dim(), c.samples, c.seed, "flow-group").iter().enumerate() {
            let mut rng = sample_rng(c.seed, "flow-group-angles", i as u64);
            let theta = rng.random_range(0.0..TAU);
            let (a, b) = (rng.random_range(0.0..PI), rng.random_range(0.0..PI));
            let composed = transport_flow(s, theta, b, &transport_flow(s, theta, a, p));
            worst = worst.max((composed.coords() - transport_flow(s, theta, a + b, p).coords()).amax());
        }
        Ok(Outcome::residual(worst))
    });
}

fn random_structure(dim: usize, seed: u64, index: u64) -> Result<ComplexStructure> {
    let mut rng = sample_rng(seed, "random-structure", index);
    let g = DMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(&mut rng));
    let q = g.qr().q();
    ComplexStructure::new(&q * ComplexStructure::standard(dim)?.matrix() * q.transpose())
}

fn degree_suite(r: &mut Runner<'_>) {
    for m in 1..=r.config.m {
        let tag = format!("[m={m}]");
        let expected = 2 * m as i64;
        r.check(format!("winding{tag}"), "winding", |_| {
            let w = sphere_degree(&QuaternionicTriple::build(m)?, 64)?;
            Ok(Outcome::observed((w - expected).abs() as f64, w as f64))
        });
        r.check(format!("winding-stable{tag}"), "winding", |_| {
            let t = QuaternionicTriple::build(m)?;
            let (a, b) = (sphere_degree(&t, 64)?, sphere_degree(&t, 128)?);
            Ok(Outcome::observed((a - b).abs() as f64, b as f64))
        });
        r.check(format!("evaluated-degree{tag}"), "winding", |c| {
            let s = LinearContactSphere::from_triple(QuaternionicTriple::build(m)?);
            let q = sphere_points(s.dim(), 1, c.seed, "evaluated-degree").remove(0);
            let frame = QuaternionicFrame::new(s.triple(), &q)?;
            let sphere = evaluate_sphere_at_point(&s, &frame, 8, 4)?;
            let w = structure_sphere_degree(&sphere, 64)?;
            Ok(Outcome::observed((w - expected).abs() as f64, w as f64))
        });
        r.check(format!("conjugation{tag}"), "conjugation", |_| {
            let t = QuaternionicTriple::build(m)?;
            let n = t.dim();
            let mut worst = 0.0_f64;
            for k in 0..64 {
                let theta = TAU * k as f64 / 64.0;
                let phi = PI * k as f64 / 63.0;
                let path = conjugation_path(&t, theta, phi)?;
                worst = worst.max(path.orthogonality_residual).max(path.formula_residual);
                let at_pi = conjugation_path(&t, theta, PI)?;
                let split = (DMatrix::identity(n, n) * theta.cos() + t.i().matrix() * theta.sin()) * t.j().matrix();
                worst = worst.max(max_abs(&(at_pi.p - split)));
            }
            Ok(Outcome::residual(worst))
        });
        r.check(format!("eta-invariance{tag}"), "eta-invariance", |c| {
            let t = QuaternionicTriple::build(m)?;
            let mut worst = 0.0_f64;
            for q in sphere_points(t.dim(), c.samples.min(20), c.seed, "eta-invariance") {
                worst = worst.max(QuaternionicFrame::new(&t, &q)?.eta_invariance_residual());
            }
            Ok(Outcome::residual(worst))
        });
    }
    r.check("h-extend", "h-extend", |c| {
        let mut worst = 0.0_f64;
        for half in 1..=3usize {
            let k = 2 * half + 1;
            for i in 0..c.samples as u64 {
                let mut rng = sample_rng(c.seed, "h-extend", i);
                let v: DVector<f64> = DVector::from_fn(k, |_, _| StandardNormal.sample(&mut rng));
                let point = AlmostContactPoint::new(v.normalize(), random_structure(k - 1, c.seed, i)?)?;
                let h = h_extend(&point)?;
                let m = h.matrix();
                let id = DMatrix::identity(k + 1, k + 1);
                worst = worst
                    .max(max_abs(&(m * m + &id)))
                    .max(max_abs(&(m + m.transpose())))
                    .max(max_abs(&(m.transpose() * m - &id)));
            }
        }
        Ok(Outcome::residual(worst))
    });
}

fn roundtrip_suite(r: &mut Runner<'_>) {
    for m in 1..=r.config.m {
        r.check(format!("roundtrip[m={m}]"), "roundtrip", |_| {
            let t = QuaternionicTriple::build(m)?;
            let frame = QuaternionicFrame::standard(&t)?;
            let mut worst = 0.0_f64;
            for j in [t.i(), t.j(), t.k()] {
                let once = roundtrip_identity(j, &frame)?;
                let twice = roundtrip_identity(&once.image, &frame)?;
                worst = worst
                    .max(once.distance)
                    .max(max_abs(&(twice.image.matrix() - once.image.matrix())));
            }
            Ok(Outcome::residual(worst))
        });
    }
}

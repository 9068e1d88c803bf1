use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::BaseCoords;
use crate::contact::{solve_contact_system, ContactForm, Hamiltonian, SpherePoint, GRADIENT_STEP};
use crate::error::{GeomError, Result};

/// A fibration form on `S^{d-1} x B` written in base coordinates
/// `(radial, angle)`:
/// `α = pᵗ A(b) dp + c_0(p, b) d(radial) + c_1(p, b) d(angle)`.
pub trait FibrationForm {
    fn fiber_dim(&self) -> usize;

    /// Upper end of the radial coordinate (1 on the disk, π on `S^2`).
    fn radial_extent(&self) -> f64;

    fn fiber_generator(&self, b: BaseCoords) -> DMatrix<f64>;

    /// `∂A/∂b_k`; `k = 0` radial, `k = 1` angular.
    fn fiber_generator_derivative(&self, b: BaseCoords, k: usize) -> DMatrix<f64>;

    fn base_coefficients(&self, p: &DVector<f64>, b: BaseCoords) -> [f64; 2];

    /// Ambient gradient of `p ↦ c_k(p, b)`; only its tangential part is used.
    fn base_coefficient_gradient(&self, p: &DVector<f64>, b: BaseCoords, k: usize) -> DVector<f64>;
}

/// Horizontal lift of a base vector together with its defining residuals.
#[derive(Debug, Clone)]
pub struct HorizontalLift {
    pub fiber: DVector<f64>,
    pub base: [f64; 2],
    /// `|α(X̃)|`
    pub form_residual: f64,
    /// Norm of `v ↦ dα(X̃, v)` on the vertical contact plane.
    pub annihilator_residual: f64,
}

/// The unique `X̃ = (w, u)` with `α(X̃) = 0` and `dα(X̃, v) = 0` for every
/// vertical `v ∈ ker α`.
pub fn horizontal_lift(fib: &dyn FibrationForm, p: &SpherePoint, b: BaseCoords, u: [f64; 2]) -> Result<HorizontalLift> {
    if p.dim() != fib.fiber_dim() {
        return Err(GeomError::DimensionMismatch {
            expected: fib.fiber_dim(),
            got: p.dim(),
        });
    }
    lift_raw(fib, p.coords(), b, u)
}

/// [`horizontal_lift`] on raw unit coordinates.
pub fn lift_raw(fib: &dyn FibrationForm, p: &DVector<f64>, b: BaseCoords, u: [f64; 2]) -> Result<HorizontalLift> {
    let c = fib.base_coefficients(p, b);
    // dα((w,u),(v,0)) = 2 wᵗA v + Σ_k u_k (pᵗ ∂_kA v - d_p c_k(v))
    let mut g = DVector::zeros(p.len());
    for (k, &uk) in u.iter().enumerate() {
        if uk == 0.0 {
            continue;
        }
        let mixed = fib.fiber_generator_derivative(b, k).transpose() * p - fib.base_coefficient_gradient(p, b, k);
        g.axpy(uk, &mixed, 1.0);
    }
    let a = fib.fiber_generator(b);
    let solve = solve_contact_system(&a, p, &g, -(c[0] * u[0] + c[1] * u[1]), "horizontal lift")?;
    Ok(HorizontalLift {
        fiber: solve.w,
        base: u,
        form_residual: solve.form_residual,
        annihilator_residual: solve.annihilator_residual,
    })
}

type ProfileValue = dyn Fn(&DVector<f64>, f64, f64) -> f64 + Send + Sync;
type ProfileGradient = dyn Fn(&DVector<f64>, f64, f64) -> DVector<f64> + Send + Sync;

/// The function `H(p, r, θ)` of a fibration form `α_0 + H dθ`.
#[derive(Clone)]
pub struct HamiltonianProfile {
    name: String,
    value: Arc<ProfileValue>,
    gradient: Option<Arc<ProfileGradient>>,
}

impl std::fmt::Debug for HamiltonianProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HamiltonianProfile").field("name", &self.name).finish()
    }
}

/// Names accepted by [`HamiltonianProfile::builtin`].
pub const BUILTIN_PROFILES: [&str; 5] = ["zero", "r2-p1", "r2-sin-p2", "r2-mixed", "r2-angular"];

impl HamiltonianProfile {
    pub fn new<F>(name: impl Into<String>, value: F) -> Self
    where
        F: Fn(&DVector<f64>, f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            value: Arc::new(value),
            gradient: None,
        }
    }

    /// Attaches the ambient `p`-gradient of `H`.
    pub fn with_gradient<G>(mut self, gradient: G) -> Self
    where
        G: Fn(&DVector<f64>, f64, f64) -> DVector<f64> + Send + Sync + 'static,
    {
        self.gradient = Some(Arc::new(gradient));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, p: &DVector<f64>, r: f64, theta: f64) -> f64 {
        (self.value)(p, r, theta)
    }

    pub fn gradient(&self, p: &DVector<f64>, r: f64, theta: f64) -> Option<DVector<f64>> {
        self.gradient.as_ref().map(|g| g(p, r, theta))
    }

    /// Analytic gradient, or central differences along the coordinate axes
    /// through the sphere retraction.
    pub fn ambient_gradient(&self, p: &DVector<f64>, r: f64, theta: f64) -> DVector<f64> {
        if let Some(g) = &self.gradient {
            return g(p, r, theta);
        }
        let mut e = DVector::zeros(p.len());
        DVector::from_fn(p.len(), |i, _| {
            e[i] = GRADIENT_STEP;
            let plus = (p + &e).normalize();
            let minus = (p - &e).normalize();
            e[i] = 0.0;
            (self.value(&plus, r, theta) - self.value(&minus, r, theta)) / (2.0 * GRADIENT_STEP)
        })
    }

    pub fn zero() -> Self {
        Self::new("zero", |_, _, _| 0.0).with_gradient(|p, _, _| DVector::zeros(p.len()))
    }

    /// `r² p_1` (first coordinate).
    pub fn r2_p1() -> Self {
        Self::new("r2-p1", |p, r, _| r * r * p[0]).with_gradient(|p, r, _| {
            let mut g = DVector::zeros(p.len());
            g[0] = r * r;
            g
        })
    }

    /// `r² sin θ p_2`.
    pub fn r2_sin_p2() -> Self {
        Self::new("r2-sin-p2", |p, r, th| r * r * th.sin() * p[1]).with_gradient(|p, r, th| {
            let mut g = DVector::zeros(p.len());
            g[1] = r * r * th.sin();
            g
        })
    }

    /// `r² (cos θ p_1 p_2 + ½ p_3² + ¼ sin 2θ)`.
    pub fn r2_mixed() -> Self {
        Self::new("r2-mixed", |p, r, th| {
            r * r * (th.cos() * p[0] * p[1] + 0.5 * p[2] * p[2] + 0.25 * (2.0 * th).sin())
        })
        .with_gradient(|p, r, th| {
            let mut g = DVector::zeros(p.len());
            g[0] = r * r * th.cos() * p[1];
            g[1] = r * r * th.cos() * p[0];
            g[2] = r * r * p[2];
            g
        })
    }

    /// `r² (1 + ½ sin θ)`, independent of the fiber point.
    pub fn r2_angular() -> Self {
        Self::new("r2-angular", |_, r, th| r * r * (1.0 + 0.5 * th.sin()))
            .with_gradient(|p, _, _| DVector::zeros(p.len()))
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "zero" => Some(Self::zero()),
            "r2-p1" => Some(Self::r2_p1()),
            "r2-sin-p2" => Some(Self::r2_sin_p2()),
            "r2-mixed" => Some(Self::r2_mixed()),
            "r2-angular" => Some(Self::r2_angular()),
            _ => None,
        }
    }
}

/// Default constant in the `|H| ≤ C r²` admission check.
pub const DEFAULT_QUADRATIC_BOUND: f64 = 10.0;

/// The fibration `S^{d-1} x D² -> D²` with fibration form `α_0 + H dθ`.
#[derive(Debug, Clone)]
pub struct ContactFibrationDisk {
    fiber_form: ContactForm,
    profile: HamiltonianProfile,
}

impl ContactFibrationDisk {
    /// Admits `profile` only if `|H(p, r, θ)| ≤ bound r²` at `r ∈ {1e-2, 1e-3}`
    /// on a fixed set of fiber points and angles.
    pub fn new(fiber_form: ContactForm, profile: HamiltonianProfile, bound: f64) -> Result<Self> {
        let d = fiber_form.dim();
        let mut probes: Vec<DVector<f64>> = (0..d)
            .map(|i| {
                let mut v = DVector::zeros(d);
                v[i] = 1.0;
                v
            })
            .collect();
        probes.push(DVector::from_element(d, 1.0 / (d as f64).sqrt()));
        for r in [1e-2, 1e-3] {
            for p in &probes {
                for s in 0..8 {
                    let theta = std::f64::consts::PI * s as f64 / 4.0;
                    let h = profile.value(p, r, theta);
                    if !(h.abs() <= bound * r * r) {
                        return Err(GeomError::InvalidArgument(format!(
                            "profile {} is not O(r^2): |H| = {h:e} at r = {r}",
                            profile.name()
                        )));
                    }
                }
            }
        }
        Ok(Self { fiber_form, profile })
    }

    pub fn fiber_form(&self) -> &ContactForm {
        &self.fiber_form
    }

    pub fn profile(&self) -> &HamiltonianProfile {
        &self.profile
    }
}

impl FibrationForm for ContactFibrationDisk {
    fn fiber_dim(&self) -> usize {
        self.fiber_form.dim()
    }

    fn radial_extent(&self) -> f64 {
        1.0
    }

    fn fiber_generator(&self, _b: BaseCoords) -> DMatrix<f64> {
        self.fiber_form.generator().clone()
    }

    fn fiber_generator_derivative(&self, _b: BaseCoords, _k: usize) -> DMatrix<f64> {
        DMatrix::zeros(self.fiber_dim(), self.fiber_dim())
    }

    fn base_coefficients(&self, p: &DVector<f64>, b: BaseCoords) -> [f64; 2] {
        [0.0, self.profile.value(p, b.radial, b.angle)]
    }

    fn base_coefficient_gradient(&self, p: &DVector<f64>, b: BaseCoords, k: usize) -> DVector<f64> {
        match k {
            0 => DVector::zeros(p.len()),
            _ => self.profile.ambient_gradient(p, b.radial, b.angle),
        }
    }
}

/// `G_θ(p) = -H(p, r0, θ)` with time playing the role of `θ`.
pub struct LoopHamiltonian<'a> {
    profile: &'a HamiltonianProfile,
    r0: f64,
}

impl<'a> LoopHamiltonian<'a> {
    pub fn new(profile: &'a HamiltonianProfile, r0: f64) -> Self {
        Self { profile, r0 }
    }
}

impl Hamiltonian for LoopHamiltonian<'_> {
    fn value(&self, p: &DVector<f64>, t: f64) -> f64 {
        -self.profile.value(p, self.r0, t)
    }

    fn gradient(&self, p: &DVector<f64>, t: f64) -> Option<DVector<f64>> {
        self.profile.gradient(p, self.r0, t).map(|g| -g)
    }
}

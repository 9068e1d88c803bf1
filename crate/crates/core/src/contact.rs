//! Pointwise calculus of the forms `α(v)|_p = pᵗ A v` on the unit sphere
//! `S^{d-1} ⊂ R^d`.
//!
//! With this normalization `dα(u, v) = 2 uᵗ A v`, the Reeb field of a
//! complex structure `A` is `-A p`, and the Reeb flow is `exp(-tA)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};
use crate::integrate::rk4_sphere;
use crate::linalg::{solve_in_place, max_abs, max_abs_vec, orthonormal_complement, pfaffian, solve_square};
use crate::quaternionic::ComplexStructure;

/// Unit-norm tolerance for [`SpherePoint`].
pub const UNIT_TOL: f64 = 1e-12;

/// Tangency tolerance for [`two_form`] inputs.
pub const TANGENT_TOL: f64 = 1e-9;

/// Central-difference step for Hamiltonians without an analytic gradient.
pub const GRADIENT_STEP: f64 = 1e-5;

/// Relative pivot threshold for the pointwise linear solves.
pub const SOLVE_TOL: f64 = 1e-10;

/// A point of the unit sphere in an even-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint(DVector<f64>);

impl SpherePoint {
    pub fn new(coords: DVector<f64>) -> Result<Self> {
        let norm = coords.norm();
        if !((norm - 1.0).abs() <= UNIT_TOL) {
            return Err(GeomError::NotUnit { norm });
        }
        Self::check_dim(coords.len())?;
        Ok(Self(coords))
    }

    /// Projects a non-zero vector onto the sphere.
    pub fn normalize(coords: DVector<f64>) -> Result<Self> {
        let norm = coords.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(GeomError::NotUnit { norm });
        }
        Self::check_dim(coords.len())?;
        Ok(Self(coords / norm))
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(coords))
    }

    /// `e_axis` in `R^dim`.
    pub fn basis(dim: usize, axis: usize) -> Result<Self> {
        let mut v = DVector::zeros(dim);
        v[axis] = 1.0;
        Self::new(v)
    }

    fn check_dim(d: usize) -> Result<()> {
        if d < 2 || d % 2 == 1 {
            return Err(GeomError::InvalidArgument(format!(
                "sphere points live in an even dimension >= 2, got {d}"
            )));
        }
        Ok(())
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_coords(self) -> DVector<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn distance(&self, other: &SpherePoint) -> f64 {
        (&self.0 - &other.0).norm()
    }
}

/// Orthonormal basis of `T_p S`, stored as the columns of a `d x (d-1)` matrix.
#[derive(Debug, Clone)]
pub struct TangentFrame {
    base: SpherePoint,
    vectors: DMatrix<f64>,
}

impl TangentFrame {
    pub fn base(&self) -> &SpherePoint {
        &self.base
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }
}

/// Deterministic Householder frame of `p^⊥`.
pub fn build_tangent_frame(p: &SpherePoint) -> TangentFrame {
    TangentFrame {
        base: p.clone(),
        vectors: orthonormal_complement(p.coords()),
    }
}

/// The form `α(v)|_p = pᵗ A v` for an antisymmetric generator `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactForm {
    generator: DMatrix<f64>,
}

impl ContactForm {
    pub fn new(generator: DMatrix<f64>) -> Result<Self> {
        let d = generator.nrows();
        if d != generator.ncols() {
            return Err(GeomError::DimensionMismatch {
                expected: d,
                got: generator.ncols(),
            });
        }
        let skew = max_abs(&(&generator + generator.transpose()));
        if skew > 1e-12 * (1.0 + max_abs(&generator)) {
            return Err(GeomError::InvalidArgument(format!(
                "contact form generator is not antisymmetric (residual {skew:e})"
            )));
        }
        Ok(Self { generator })
    }

    pub fn from_structure(j: &ComplexStructure) -> Self {
        Self {
            generator: j.matrix().clone(),
        }
    }

    pub fn generator(&self) -> &DMatrix<f64> {
        &self.generator
    }

    pub fn dim(&self) -> usize {
        self.generator.nrows()
    }

    fn check_point(&self, p: &SpherePoint) -> Result<()> {
        if p.dim() != self.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: self.dim(),
                got: p.dim(),
            });
        }
        Ok(())
    }
}

/// The form of complex tangencies `T S ∩ j T S`, i.e. generator `j`.
pub fn complex_tangencies(j: &ComplexStructure) -> ContactForm {
    ContactForm::from_structure(j)
}

pub fn evaluate_form(form: &ContactForm, p: &SpherePoint, v: &DVector<f64>) -> Result<f64> {
    form.check_point(p)?;
    if v.len() != form.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: form.dim(),
            got: v.len(),
        });
    }
    Ok(p.coords().dot(&(form.generator() * v)))
}

fn check_tangent(p: &SpherePoint, v: &DVector<f64>) -> Result<()> {
    let normal_component = p.coords().dot(v);
    if normal_component.abs() > TANGENT_TOL * (1.0 + v.norm()) {
        return Err(GeomError::NotTangent { normal_component });
    }
    Ok(())
}

/// `dα(u, v) = 2 uᵗ A v` on tangent vectors.
pub fn two_form(form: &ContactForm, p: &SpherePoint, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
    form.check_point(p)?;
    if u.len() != form.dim() || v.len() != form.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: form.dim(),
            got: u.len().min(v.len()),
        });
    }
    check_tangent(p, u)?;
    check_tangent(p, v)?;
    Ok(2.0 * u.dot(&(form.generator() * v)))
}

/// Tangent frame together with an orthonormal frame of `ξ_p = ker α ∩ T_p S`.
#[derive(Debug, Clone)]
pub struct ContactFrames {
    /// `d x (d-1)` tangent frame.
    pub tangent: DMatrix<f64>,
    /// Values `α(f_j)` on the tangent frame.
    pub alpha: DVector<f64>,
    /// `d x (d-2)` frame of the contact plane, `None` where α vanishes on `T_p S`.
    pub xi: Option<DMatrix<f64>>,
}

/// Threshold below which `α|_{T_p S}` counts as identically zero.
const VANISHING_TOL: f64 = 1e-12;

pub fn contact_frames(generator: &DMatrix<f64>, p: &DVector<f64>) -> ContactFrames {
    let tangent = orthonormal_complement(p);
    // α(f_j) = pᵗ A f_j = (Aᵗ p)·f_j
    let alpha = tangent.transpose() * (generator.transpose() * p);
    let norm = alpha.norm();
    let xi = (norm > VANISHING_TOL).then(|| &tangent * orthonormal_complement(&(&alpha / norm)));
    ContactFrames { tangent, alpha, xi }
}

/// Orthonormal frame of the contact plane `ξ_p`, `d x (d-2)`.
pub fn contact_plane_frame(form: &ContactForm, p: &SpherePoint) -> Result<DMatrix<f64>> {
    form.check_point(p)?;
    contact_frames(form.generator(), p.coords())
        .xi
        .ok_or_else(|| GeomError::DegenerateForm("α vanishes on the tangent space".into()))
}

/// `|Pf|` of `dα` restricted to an orthonormal frame of `ξ_p`. Positive
/// exactly where the form is contact; zero where α vanishes on `T_p S`.
pub fn contact_nondegeneracy(form: &ContactForm, p: &SpherePoint) -> Result<f64> {
    form.check_point(p)?;
    if max_abs(form.generator()) == 0.0 {
        return Err(GeomError::DegenerateForm("zero generator".into()));
    }
    let frames = contact_frames(form.generator(), p.coords());
    let Some(xi) = frames.xi else {
        return Ok(0.0);
    };
    let m = xi.transpose() * form.generator() * &xi * 2.0;
    Ok(pfaffian(&m).abs())
}

/// Reeb field: the tangent `R` with `α(R) = 1` and `dα(R, ·) = 0` on `T_p S`.
///
/// Solved on the frame `{ξ_p, complement}`: one row for `α(R) = 1` and one
/// row per contact-plane vector for `dα(R, v) = 0`.
pub fn reeb_field(form: &ContactForm, p: &SpherePoint) -> Result<DVector<f64>> {
    form.check_point(p)?;
    reeb_from_generator(form.generator(), p.coords())
}

pub(crate) fn reeb_from_generator(a: &DMatrix<f64>, p: &DVector<f64>) -> Result<DVector<f64>> {
    let frames = contact_frames(a, p);
    let xi = frames.xi.as_ref().ok_or_else(|| {
        GeomError::DegenerateForm("α vanishes on the tangent space; no Reeb field".into())
    })?;
    let n = frames.tangent.ncols();
    let mut system = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    system.row_mut(0).copy_from(&frames.alpha.transpose());
    rhs[0] = 1.0;
    // dα(T x, v_k) = 2 xᵗ Tᵗ A v_k
    let rows = (frames.tangent.transpose() * a * xi).transpose() * 2.0;
    system.rows_mut(1, n - 1).copy_from(&rows);
    let x = solve_square(system, &rhs, SOLVE_TOL, "Reeb field")?;
    Ok(&frames.tangent * x)
}

/// Residuals `(|α(R) - 1|, max_j |dα(R, f_j)|, |pᵗR|)` over a full tangent frame.
pub fn reeb_residuals(form: &ContactForm, p: &SpherePoint, r: &DVector<f64>) -> Result<(f64, f64, f64)> {
    let frame = build_tangent_frame(p);
    let value = (evaluate_form(form, p, r)? - 1.0).abs();
    let d_alpha = frame.vectors().transpose() * (form.generator().transpose() * r) * 2.0;
    Ok((value, max_abs_vec(&d_alpha), p.coords().dot(r).abs()))
}

/// Time-dependent scalar function on the sphere.
pub trait Hamiltonian {
    fn value(&self, p: &DVector<f64>, t: f64) -> f64;

    /// Ambient gradient; only its tangential part is used.
    fn gradient(&self, _p: &DVector<f64>, _t: f64) -> Option<DVector<f64>> {
        None
    }
}

type ValueFn = dyn Fn(&DVector<f64>, f64) -> f64 + Send + Sync;
type GradientFn = dyn Fn(&DVector<f64>, f64) -> DVector<f64> + Send + Sync;

/// Closure-backed [`Hamiltonian`] with an optional analytic gradient.
pub struct HamiltonianField {
    value: Box<ValueFn>,
    gradient: Option<Box<GradientFn>>,
}

impl HamiltonianField {
    pub fn new<F>(value: F) -> Self
    where
        F: Fn(&DVector<f64>, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            value: Box::new(value),
            gradient: None,
        }
    }

    pub fn with_gradient<G>(mut self, gradient: G) -> Self
    where
        G: Fn(&DVector<f64>, f64) -> DVector<f64> + Send + Sync + 'static,
    {
        self.gradient = Some(Box::new(gradient));
        self
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_, _| c).with_gradient(|p, _| DVector::zeros(p.len()))
    }

    /// `H(p) = p[axis]`.
    pub fn coordinate(axis: usize) -> Self {
        Self::new(move |p, _| p[axis]).with_gradient(move |p, _| {
            let mut g = DVector::zeros(p.len());
            g[axis] = 1.0;
            g
        })
    }

    /// Max deviation of the tangential analytic gradient from central
    /// differences over `points`. Zero when no gradient is supplied.
    pub fn gradient_mismatch(&self, points: &[SpherePoint], t: f64) -> f64 {
        let Some(gradient) = &self.gradient else {
            return 0.0;
        };
        let mut worst = 0.0_f64;
        for p in points {
            let frame = orthonormal_complement(p.coords());
            let g = gradient(p.coords(), t);
            for col in frame.column_iter() {
                let v = col.into_owned();
                let fd = central_difference(self, p.coords(), &v, t);
                worst = worst.max((g.dot(&v) - fd).abs());
            }
        }
        worst
    }
}

impl Hamiltonian for HamiltonianField {
    fn value(&self, p: &DVector<f64>, t: f64) -> f64 {
        (self.value)(p, t)
    }

    fn gradient(&self, p: &DVector<f64>, t: f64) -> Option<DVector<f64>> {
        self.gradient.as_ref().map(|g| g(p, t))
    }
}

fn central_difference<H: Hamiltonian + ?Sized>(h: &H, p: &DVector<f64>, v: &DVector<f64>, t: f64) -> f64 {
    let plus = (p + v * GRADIENT_STEP).normalize();
    let minus = (p - v * GRADIENT_STEP).normalize();
    (h.value(&plus, t) - h.value(&minus, t)) / (2.0 * GRADIENT_STEP)
}

/// `dH_p(v)` for a tangent `v`.
pub fn differential<H: Hamiltonian + ?Sized>(h: &H, p: &DVector<f64>, v: &DVector<f64>, t: f64) -> f64 {
    match h.gradient(p, t) {
        Some(g) => g.dot(v),
        None => central_difference(h, p, v, t),
    }
}

/// The contact vector field of `H`:
/// `i_X α = H`, `i_X dα = -dH + (i_R dH) α`.
pub fn hamiltonian_vector_field<H: Hamiltonian + ?Sized>(
    form: &ContactForm,
    h: &H,
    p: &SpherePoint,
    t: f64,
) -> Result<DVector<f64>> {
    form.check_point(p)?;
    hamiltonian_field_raw(form.generator(), h, p.coords(), t)
}

pub(crate) fn hamiltonian_field_raw<H: Hamiltonian + ?Sized>(
    a: &DMatrix<f64>,
    h: &H,
    p: &DVector<f64>,
    t: f64,
) -> Result<DVector<f64>> {
    // on ξ the (i_R dH) α term vanishes
    let g = ambient_gradient(h, p, t);
    Ok(solve_contact_system(a, p, &g, h.value(p, t), "contact Hamiltonian field")?.w)
}

/// Analytic gradient if available, else central differences along the
/// coordinate axes through the sphere retraction (tangential part only).
pub(crate) fn ambient_gradient<H: Hamiltonian + ?Sized>(h: &H, p: &DVector<f64>, t: f64) -> DVector<f64> {
    if let Some(g) = h.gradient(p, t) {
        return g;
    }
    let mut e = DVector::zeros(p.len());
    DVector::from_fn(p.len(), |i, _| {
        e[i] = 1.0;
        let d = central_difference(h, p, &e, t);
        e[i] = 0.0;
        d
    })
}

/// Solution of the linear contact system at `p` with its residuals.
#[derive(Debug, Clone)]
pub(crate) struct ContactSolve {
    pub w: DVector<f64>,
    /// `max(|α(w) - value|, |pᵗw|)`
    pub form_residual: f64,
    /// Euclidean norm of `v ↦ dα(w, v) + g·v` on `ξ_p`.
    pub annihilator_residual: f64,
}

/// Finds the tangent `w` with `α(w) = value` and `dα(w, v) = -g·v` for all
/// `v ∈ ξ_p`. Solved in ambient coordinates with multipliers `λ, μ`:
/// `2Aᵗw - λp - μAᵗp = -g`, `pᵗw = 0`, `(Aᵗp)ᵗw = value`.
pub(crate) fn solve_contact_system(
    a: &DMatrix<f64>,
    p: &DVector<f64>,
    g: &DVector<f64>,
    value: f64,
    context: &'static str,
) -> Result<ContactSolve> {
    let d = p.len();
    let n = d + 2;
    let atp = a.tr_mul(p);
    let alpha_norm = atp.norm();
    if !(alpha_norm > VANISHING_TOL) {
        return Err(GeomError::DegenerateForm("α vanishes on the tangent space".into()));
    }
    let mut system = vec![0.0; n * n];
    for i in 0..d {
        let row = &mut system[i * n..(i + 1) * n];
        for (j, x) in row.iter_mut().take(d).enumerate() {
            *x = 2.0 * a[(j, i)];
        }
        row[d] = -p[i];
        row[d + 1] = -atp[i];
        system[d * n + i] = p[i];
        system[(d + 1) * n + i] = atp[i];
    }
    let mut rhs = vec![0.0; n];
    for i in 0..d {
        rhs[i] = -g[i];
    }
    rhs[d + 1] = value;
    solve_in_place(&mut system, &mut rhs, SOLVE_TOL, context)?;
    let w = DVector::from_column_slice(&rhs[..d]);

    let form_residual = (atp.dot(&w) - value).abs().max(p.dot(&w).abs());
    let mut r = a.tr_mul(&w) * 2.0 + g;
    let along_p = r.dot(p);
    r.axpy(-along_p, p, 1.0);
    let along_alpha = r.dot(&atp) / (alpha_norm * alpha_norm);
    r.axpy(-along_alpha, &atp, 1.0);
    Ok(ContactSolve {
        w,
        form_residual,
        annihilator_residual: r.norm(),
    })
}

/// Max residual of both defining equations of the contact vector field,
/// tested against every vector of a full tangent frame.
pub fn hamiltonian_residual<H: Hamiltonian + ?Sized>(
    form: &ContactForm,
    h: &H,
    p: &SpherePoint,
    t: f64,
    x: &DVector<f64>,
) -> Result<f64> {
    let r = reeb_field(form, p)?;
    let frame = build_tangent_frame(p);
    let value = (evaluate_form(form, p, x)? - h.value(p.coords(), t)).abs();
    let dh_r = differential(h, p.coords(), &r, t);
    let mut worst = value;
    for col in frame.vectors().column_iter() {
        let v = col.into_owned();
        let lhs = 2.0 * x.dot(&(form.generator() * &v));
        let rhs = -differential(h, p.coords(), &v, t) + dh_r * evaluate_form(form, p, &v)?;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// Endpoint at time `t` of the flow of the contact vector field of `H_t`.
pub fn hamiltonian_flow<H: Hamiltonian + ?Sized>(
    form: &ContactForm,
    h: &H,
    p0: &SpherePoint,
    t: f64,
    step: f64,
) -> Result<SpherePoint> {
    form.check_point(p0)?;
    let end = rk4_sphere(p0.coords(), 0.0, t, step, |x, s| {
        hamiltonian_field_raw(form.generator(), h, x, s)
    })?;
    Ok(SpherePoint(end))
}

/// Max distance of `j ξ_p` from `ξ_p` over a frame of the contact plane.
pub fn tangency_invariance_residual(j: &ComplexStructure, p: &SpherePoint) -> Result<f64> {
    let form = complex_tangencies(j);
    let xi = contact_plane_frame(&form, p)?;
    let image = j.matrix() * &xi;
    let projected = &xi * (xi.transpose() * &image);
    Ok(max_abs(&(image - projected)))
}

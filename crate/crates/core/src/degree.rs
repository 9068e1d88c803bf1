//! Almost contact points, their extension to complex structures, evaluation
//! of the sphere `{α_e}` at a framed point, and the winding degree.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};

use crate::contact::SpherePoint;
use crate::error::{GeomError, Result};
use crate::linalg::{max_abs, orthonormal_complement};
use crate::quaternionic::{det_winding, sample_loop, ComplexStructure, QuaternionicTriple, SphereDirection};
use crate::sphere_family::LinearContactSphere;

/// Tolerance on orthonormality of supplied bases and frames.
pub const FRAME_TOL: f64 = 1e-10;

/// Smallest admitted Gram determinant of `τ̃`.
pub const MIN_FRAME_GRAM: f64 = 1e-6;

/// Smallest loop resolution accepted by [`sphere_degree`].
pub const MIN_DEGREE_RESOLUTION: usize = 64;

/// A unit vector `v ∈ R^{2n+1}` with a complex structure on `v^⊥`, stored in
/// an explicit orthonormal basis of `v^⊥`.
#[derive(Debug, Clone)]
pub struct AlmostContactPoint {
    v: DVector<f64>,
    basis: DMatrix<f64>,
    j: ComplexStructure,
}

impl AlmostContactPoint {
    /// Uses the Householder complement of `v` as basis of `v^⊥`.
    pub fn new(v: DVector<f64>, j: ComplexStructure) -> Result<Self> {
        let basis = orthonormal_complement(&v);
        Self::with_basis(v, basis, j)
    }

    pub fn with_basis(v: DVector<f64>, basis: DMatrix<f64>, j: ComplexStructure) -> Result<Self> {
        let k = v.len();
        if k.is_multiple_of(2) {
            return Err(GeomError::InvalidArgument(format!(
                "almost contact points live in odd dimension, got {k}"
            )));
        }
        let norm = v.norm();
        if (norm - 1.0).abs() > FRAME_TOL {
            return Err(GeomError::NotUnit { norm });
        }
        if basis.nrows() != k || basis.ncols() != k - 1 {
            return Err(GeomError::DimensionMismatch {
                expected: k - 1,
                got: basis.ncols(),
            });
        }
        if j.dim() != k - 1 {
            return Err(GeomError::DimensionMismatch {
                expected: k - 1,
                got: j.dim(),
            });
        }
        let orth = max_abs(&(basis.transpose() * &basis - DMatrix::identity(k - 1, k - 1)));
        let normal = (basis.transpose() * &v).amax();
        if orth.max(normal) > FRAME_TOL {
            return Err(GeomError::InvalidArgument(format!(
                "basis is not an orthonormal basis of v^⊥ (residual {:e})",
                orth.max(normal)
            )));
        }
        Ok(Self { v, basis, j })
    }

    pub fn v(&self) -> &DVector<f64> {
        &self.v
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn j(&self) -> &ComplexStructure {
        &self.j
    }
}

/// The complex structure on `R^{2n+1} ⊕ R ∂_t` equal to `j` on `v^⊥` and
/// sending `v ↦ ∂_t ↦ -v`.
pub fn h_extend(a: &AlmostContactPoint) -> Result<ComplexStructure> {
    let k = a.v.len();
    let mut out = DMatrix::zeros(k + 1, k + 1);
    let on_complement = &a.basis * a.j.matrix() * a.basis.transpose();
    out.view_mut((0, 0), (k, k)).copy_from(&on_complement);
    for r in 0..k {
        out[(k, r)] = a.v[r];
        out[(r, k)] = -a.v[r];
    }
    ComplexStructure::new(out)
}

/// A point `q ∈ S^{4m-1}` with a quaternionic framing of
/// `η = ker α_I ∩ ker α_J ∩ ker α_K ∩ T_q`.
#[derive(Debug, Clone)]
pub struct QuaternionicFrame {
    q: SpherePoint,
    triple: QuaternionicTriple,
    eta: DMatrix<f64>,
    tau_tilde: DMatrix<f64>,
}

impl QuaternionicFrame {
    /// Picks the quaternionic basis `{v_a}` of `η` greedily from projections
    /// of the standard basis vectors; `τ = {v_a, I v_a, J v_a, K v_a}` and
    /// `τ̃ = {τ, R_I, R_J, R_K}`.
    pub fn new(triple: &QuaternionicTriple, q: &SpherePoint) -> Result<Self> {
        let d = triple.dim();
        if q.dim() != d {
            return Err(GeomError::DimensionMismatch { expected: d, got: q.dim() });
        }
        let (i, j, k) = (triple.i().matrix(), triple.j().matrix(), triple.k().matrix());
        let x = q.coords();
        let mut span: Vec<DVector<f64>> = vec![x.clone(), i * x, j * x, k * x];
        let mut eta: Vec<DVector<f64>> = Vec::with_capacity(d - 4);
        for axis in 0..d {
            if eta.len() == d - 4 {
                break;
            }
            let mut w = DVector::zeros(d);
            w[axis] = 1.0;
            for s in &span {
                let c = s.dot(&w);
                w -= s * c;
            }
            let norm = w.norm();
            if norm < 1e-3 {
                continue;
            }
            let v = w / norm;
            let group = [v.clone(), i * &v, j * &v, k * &v];
            span.extend(group.iter().cloned());
            eta.extend(group);
        }
        if eta.len() != d - 4 {
            return Err(GeomError::InvalidArgument("could not frame η".into()));
        }
        let eta = if eta.is_empty() {
            DMatrix::zeros(d, 0)
        } else {
            DMatrix::from_columns(&eta)
        };
        let mut tau_tilde = DMatrix::zeros(d, d - 1);
        tau_tilde.columns_mut(0, d - 4).copy_from(&eta);
        tau_tilde.set_column(d - 4, &-(i * x));
        tau_tilde.set_column(d - 3, &-(j * x));
        tau_tilde.set_column(d - 2, &-(k * x));
        let frame = Self {
            q: q.clone(),
            triple: triple.clone(),
            eta,
            tau_tilde,
        };
        let gram = frame.gram_determinant();
        if !(gram > MIN_FRAME_GRAM) {
            return Err(GeomError::Singular {
                context: "quaternionic frame",
                pivot: gram,
            });
        }
        Ok(frame)
    }

    /// The frame at `q = e_0`.
    pub fn standard(triple: &QuaternionicTriple) -> Result<Self> {
        Self::new(triple, &SpherePoint::basis(triple.dim(), 0)?)
    }

    pub fn point(&self) -> &SpherePoint {
        &self.q
    }

    pub fn triple(&self) -> &QuaternionicTriple {
        &self.triple
    }

    /// `d x (d-4)`, columns `v_a, I v_a, J v_a, K v_a` per quaternionic vector.
    pub fn eta(&self) -> &DMatrix<f64> {
        &self.eta
    }

    /// `d x (d-1)`, the columns of `η` followed by `R_I, R_J, R_K`.
    pub fn tau_tilde(&self) -> &DMatrix<f64> {
        &self.tau_tilde
    }

    pub fn gram_determinant(&self) -> f64 {
        (self.tau_tilde.transpose() * &self.tau_tilde).determinant()
    }

    /// `[τ̃ | q]`, an orthogonal `d x d` matrix.
    pub fn extended_frame(&self) -> DMatrix<f64> {
        let d = self.q.dim();
        let mut out = DMatrix::zeros(d, d);
        out.columns_mut(0, d - 1).copy_from(&self.tau_tilde);
        out.set_column(d - 1, self.q.coords());
        out
    }

    /// Largest distance of `I η, J η, K η` from `η`.
    pub fn eta_invariance_residual(&self) -> f64 {
        let projector = &self.eta * self.eta.transpose();
        [self.triple.i(), self.triple.j(), self.triple.k()]
            .iter()
            .map(|s| {
                let image = s.matrix() * &self.eta;
                max_abs(&(&image - &projector * &image))
            })
            .fold(0.0, f64::max)
    }

    /// The almost contact point `(v, j|_ξ)` in `τ̃` coordinates induced by
    /// `ξ_j = T_q ∩ j T_q` with form `α_j`.
    pub fn almost_contact(&self, j: &DMatrix<f64>) -> Result<AlmostContactPoint> {
        let d = self.q.dim();
        if j.nrows() != d || j.ncols() != d {
            return Err(GeomError::DimensionMismatch { expected: d, got: j.nrows() });
        }
        // α_j(τ̃_k) = qᵗ j τ̃_k
        let alpha = self.tau_tilde.transpose() * (j.transpose() * self.q.coords());
        let norm = alpha.norm();
        if !(norm > 1e-12) {
            return Err(GeomError::DegenerateForm("α_j vanishes at q".into()));
        }
        let v = alpha / norm;
        let basis = orthonormal_complement(&v);
        let restricted = basis.transpose() * (self.tau_tilde.transpose() * j * &self.tau_tilde) * &basis;
        AlmostContactPoint::with_basis(v, basis, ComplexStructure::new(restricted)?)
    }

    /// `h(e_{q,τ}(ξ_j, j))`, a complex structure on `R^d` in `[τ̃ | q]` coordinates.
    pub fn evaluate(&self, j: &DMatrix<f64>) -> Result<ComplexStructure> {
        h_extend(&self.almost_contact(j)?)
    }
}

/// Complex structures on `R^{4m}` sampled over a `(θ, φ)` grid of `S^2`:
/// `θ_k = 2πk / grid_theta` for `k = 0..=grid_theta` (closing),
/// `φ_i = πi / grid_phi` for `i = 0..=grid_phi`.
#[derive(Debug, Clone)]
pub struct StructureSphere {
    grid_theta: usize,
    grid_phi: usize,
    entries: Vec<ComplexStructure>,
}

impl StructureSphere {
    pub fn from_fn<F>(grid_theta: usize, grid_phi: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(SphereDirection) -> Result<ComplexStructure>,
    {
        if grid_theta == 0 || grid_phi == 0 {
            return Err(GeomError::InvalidArgument("grid sizes must be positive".into()));
        }
        let mut entries = Vec::with_capacity((grid_theta + 1) * (grid_phi + 1));
        for i in 0..=grid_phi {
            for k in 0..=grid_theta {
                let (theta, phi) = Self::angles_of(grid_theta, grid_phi, k, i);
                entries.push(f(SphereDirection::from_angles(theta, phi))?);
            }
        }
        Ok(Self {
            grid_theta,
            grid_phi,
            entries,
        })
    }

    fn angles_of(grid_theta: usize, grid_phi: usize, k: usize, i: usize) -> (f64, f64) {
        (TAU * k as f64 / grid_theta as f64, PI * i as f64 / grid_phi as f64)
    }

    pub fn grid(&self) -> (usize, usize) {
        (self.grid_theta, self.grid_phi)
    }

    /// Entry at azimuth index `k` and polar index `i`.
    pub fn at(&self, k: usize, i: usize) -> &ComplexStructure {
        &self.entries[i * (self.grid_theta + 1) + k]
    }

    pub fn entries(&self) -> impl Iterator<Item = (f64, f64, &ComplexStructure)> {
        (0..=self.grid_phi).flat_map(move |i| {
            (0..=self.grid_theta).map(move |k| {
                let (theta, phi) = Self::angles_of(self.grid_theta, self.grid_phi, k, i);
                (theta, phi, self.at(k, i))
            })
        })
    }

    /// Largest `|entry(2π, φ) - entry(0, φ)|`.
    pub fn closure_residual(&self) -> f64 {
        (0..=self.grid_phi)
            .map(|i| max_abs(&(self.at(0, i).matrix() - self.at(self.grid_theta, i).matrix())))
            .fold(0.0, f64::max)
    }

    /// The entries at `e = (1,0,0), (0,1,0), (0,0,1)` as a quaternionic
    /// triple, after checking that every entry is their `e`-combination.
    /// Needs `grid_theta` divisible by 4 and `grid_phi` even.
    pub fn triple(&self, tol: f64) -> Result<QuaternionicTriple> {
        if !self.grid_theta.is_multiple_of(4) || !self.grid_phi.is_multiple_of(2) {
            return Err(GeomError::InvalidArgument(
                "grid must contain the coordinate directions".into(),
            ));
        }
        let i = self.at(0, self.grid_phi / 2).clone();
        let j = self.at(self.grid_theta / 4, self.grid_phi / 2).clone();
        let k = self.at(0, 0).clone();
        let triple = QuaternionicTriple::from_structures(i, j, k, tol)?;
        for (theta, phi, s) in self.entries() {
            let e = SphereDirection::from_angles(theta, phi);
            let residual = max_abs(&(triple.combine_matrix(&e) - s.matrix()));
            if residual > tol {
                return Err(GeomError::ResidualTooLarge {
                    context: "structure sphere is not linear in e",
                    residual,
                    tolerance: tol,
                });
            }
        }
        Ok(triple)
    }
}

/// `P_{θ,φ} = cos(φ/2) I + sin(φ/2) J_θ` and `Ĩ = Pᵗ I P`.
#[derive(Debug, Clone)]
pub struct ConjugationPath {
    pub p: DMatrix<f64>,
    pub i_tilde: ComplexStructure,
    /// `max |PᵗP - id|`
    pub orthogonality_residual: f64,
    /// `max |Ĩ - (cos φ I + sin φ J_θ)|`
    pub formula_residual: f64,
}

/// Residual above which [`conjugation_path`] reports a convention error.
pub const CONJUGATION_TOL: f64 = 1e-10;

pub fn conjugation_path(t: &QuaternionicTriple, theta: f64, phi: f64) -> Result<ConjugationPath> {
    let n = t.dim();
    let j_theta = t.j_theta(theta);
    let p = t.i().matrix() * (phi / 2.0).cos() + &j_theta * (phi / 2.0).sin();
    let orthogonality_residual = max_abs(&(p.transpose() * &p - DMatrix::identity(n, n)));
    let i_tilde = p.transpose() * t.i().matrix() * &p;
    let expected = t.i().matrix() * phi.cos() + &j_theta * phi.sin();
    let formula_residual = max_abs(&(&i_tilde - expected));
    let worst = orthogonality_residual.max(formula_residual);
    if worst > CONJUGATION_TOL {
        return Err(GeomError::QuaternionRelation {
            relation: "conjugation path",
            residual: worst,
        });
    }
    Ok(ConjugationPath {
        p,
        i_tilde: ComplexStructure::new(i_tilde)?,
        orthogonality_residual,
        formula_residual,
    })
}

/// `U(θ) = P_{θ,π} J^{-1}` with `J^{-1} = -J`, sampled at `resolution + 1`
/// points of `[0, 2π]`.
pub fn equator_loop(t: &QuaternionicTriple, resolution: usize) -> Result<Vec<DMatrix<f64>>> {
    let minus_j = -t.j().matrix();
    let mut failure = None;
    let samples = sample_loop(resolution, |theta| match conjugation_path(t, theta, PI) {
        Ok(path) => path.p * &minus_j,
        Err(e) => {
            failure.get_or_insert(e);
            DMatrix::zeros(t.dim(), t.dim())
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(samples),
    }
}

/// Winding degree of the sphere spanned by `t`: the winding of
/// `θ ↦ det_C U(θ)` relative to `I`.
pub fn sphere_degree(t: &QuaternionicTriple, resolution: usize) -> Result<i64> {
    if resolution < MIN_DEGREE_RESOLUTION {
        return Err(GeomError::InvalidArgument(format!(
            "resolution must be at least {MIN_DEGREE_RESOLUTION}, got {resolution}"
        )));
    }
    let n = t.dim();
    let i = t.i();
    let samples = equator_loop(t, resolution)?;
    for u in &samples {
        let commutator = max_abs(&(u * i.matrix() - i.matrix() * u));
        if commutator > CONJUGATION_TOL {
            return Err(GeomError::NonCommuting { norm: commutator });
        }
        let unitary = max_abs(&(u.transpose() * u - DMatrix::identity(n, n)));
        if unitary > CONJUGATION_TOL {
            return Err(GeomError::ResidualTooLarge {
                context: "U(θ) is not unitary",
                residual: unitary,
                tolerance: CONJUGATION_TOL,
            });
        }
    }
    det_winding(&samples, i)
}

/// The sphere `e ↦ h(e_{q,τ}(ξ_e, A_e))` of complex structures on `R^{4m}`.
pub fn evaluate_sphere_at_point(
    sphere: &LinearContactSphere,
    frame: &QuaternionicFrame,
    grid_theta: usize,
    grid_phi: usize,
) -> Result<StructureSphere> {
    let gram = frame.gram_determinant();
    if !(gram > MIN_FRAME_GRAM) {
        return Err(GeomError::Singular {
            context: "quaternionic frame",
            pivot: gram,
        });
    }
    StructureSphere::from_fn(grid_theta, grid_phi, |e| frame.evaluate(&sphere.generator(&e)))
}

/// Degree of an evaluated sphere, via its coordinate triple.
pub fn structure_sphere_degree(s: &StructureSphere, resolution: usize) -> Result<i64> {
    sphere_degree(&s.triple(1e-9)?, resolution)
}

/// `c(j)` together with its distance to `j`.
#[derive(Debug, Clone)]
pub struct Roundtrip {
    pub image: ComplexStructure,
    pub distance: f64,
}

/// `c(j) = h ∘ e_{q,τ} ∘ i(j)` read back in the ambient coordinates via
/// `[τ̃ | q]`.
pub fn roundtrip_identity(j: &ComplexStructure, frame: &QuaternionicFrame) -> Result<Roundtrip> {
    let q = frame.extended_frame();
    let extended = frame.evaluate(j.matrix())?;
    let image = ComplexStructure::new(&q * extended.matrix() * q.transpose())?;
    let distance = max_abs(&(image.matrix() - j.matrix()));
    Ok(Roundtrip { image, distance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{sample_rng, sphere_points};
    use rand_distr::{Distribution, StandardNormal};

    fn random_structure(dim: usize, seed: u64, index: u64) -> ComplexStructure {
        // conjugate the standard structure by a random orthogonal matrix
        let mut rng = sample_rng(seed, "random-structure", index);
        let g = DMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(&mut rng));
        let q = g.qr().q();
        ComplexStructure::new(&q * ComplexStructure::standard(dim).unwrap().matrix() * q.transpose()).unwrap()
    }

    #[test]
    fn h_extend_of_standard_point_is_standard() {
        for n in 1..4 {
            let k = 2 * n + 1;
            let mut v = DVector::zeros(k);
            v[k - 1] = 1.0;
            let basis = DMatrix::identity(k, k).columns(0, k - 1).into_owned();
            let a = AlmostContactPoint::with_basis(v, basis, ComplexStructure::standard(k - 1).unwrap()).unwrap();
            let h = h_extend(&a).unwrap();
            assert_eq!(h.matrix(), ComplexStructure::standard(k + 1).unwrap().matrix());
        }
    }

    #[test]
    fn h_extend_is_a_complex_structure_on_random_points() {
        for n in 1..4 {
            let k = 2 * n + 1;
            for s in 0..100 {
                let v = sphere_points(k + 1, 1, s, "h-extend").remove(0).into_coords().rows(0, k).normalize();
                let a = AlmostContactPoint::new(v.clone(), random_structure(k - 1, s, n as u64)).unwrap();
                let h = h_extend(&a).unwrap();
                let m = h.matrix();
                let id = DMatrix::identity(k + 1, k + 1);
                assert!(max_abs(&(m * m + &id)) < 1e-13);
                assert!(max_abs(&(m + m.transpose())) < 1e-13);
                assert!(max_abs(&(m.transpose() * m - &id)) < 1e-13);
                let mut ve = DVector::zeros(k + 1);
                ve.rows_mut(0, k).copy_from(&v);
                let mut dt = DVector::zeros(k + 1);
                dt[k] = 1.0;
                assert!((m * &ve - &dt).norm() < 1e-14);
                assert!((m * &dt + &ve).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn almost_contact_point_validation() {
        let j = ComplexStructure::standard(2).unwrap();
        assert!(AlmostContactPoint::new(DVector::from_vec(vec![1.0, 0.0]), j.clone()).is_err());
        assert!(AlmostContactPoint::new(DVector::from_vec(vec![2.0, 0.0, 0.0]), j.clone()).is_err());
        assert!(AlmostContactPoint::new(DVector::from_vec(vec![1.0, 0.0, 0.0]), j).is_ok());
    }

    #[test]
    fn conjugation_identities() {
        for m in 1..=3 {
            let t = QuaternionicTriple::build(m).unwrap();
            let n = t.dim();
            for k in 0..64 {
                let theta = TAU * k as f64 / 64.0;
                let phi = PI * ((k * 7) % 64) as f64 / 63.0;
                let c = conjugation_path(&t, theta, phi).unwrap();
                assert!(c.orthogonality_residual < 1e-12 && c.formula_residual < 1e-12);
                let at_pi = conjugation_path(&t, theta, PI).unwrap();
                assert!(max_abs(&(&at_pi.p - t.j_theta(theta))) < 1e-13);
                let split = (DMatrix::identity(n, n) * theta.cos() + t.i().matrix() * theta.sin()) * t.j().matrix();
                assert!(max_abs(&(&at_pi.p - split)) < 1e-13);
            }
            let zero = conjugation_path(&t, 0.3, 0.0).unwrap();
            assert_eq!(&zero.p, t.i().matrix());
            assert!(max_abs(&(zero.i_tilde.matrix() - t.i().matrix())) < 1e-15);
        }
    }

    #[test]
    fn degree_is_twice_quaternionic_dimension() {
        for m in 1..=4 {
            let t = QuaternionicTriple::build(m).unwrap();
            assert_eq!(sphere_degree(&t, 64).unwrap(), 2 * m as i64);
            assert_eq!(sphere_degree(&t, 128).unwrap(), 2 * m as i64);
        }
    }

    #[test]
    fn degree_rejects_low_resolution() {
        let t = QuaternionicTriple::build(1).unwrap();
        assert!(sphere_degree(&t, 32).is_err());
    }

    #[test]
    fn constant_loop_has_degree_zero() {
        let t = QuaternionicTriple::build(2).unwrap();
        let id = DMatrix::identity(8, 8);
        assert_eq!(det_winding(&sample_loop(64, |_| id.clone()), t.i()).unwrap(), 0);
    }

    #[test]
    fn equator_loop_is_the_complex_rotation() {
        let t = QuaternionicTriple::build(2).unwrap();
        let samples = equator_loop(&t, 64).unwrap();
        for (s, u) in samples.iter().enumerate() {
            let theta = TAU * s as f64 / 64.0;
            let expected = DMatrix::identity(8, 8) * theta.cos() + t.i().matrix() * theta.sin();
            assert!(max_abs(&(u - expected)) < 1e-14);
        }
    }

    #[test]
    fn frame_is_orthonormal_and_eta_invariant() {
        for m in 1..=3 {
            let t = QuaternionicTriple::build(m).unwrap();
            for q in sphere_points(4 * m, 5, m as u64, "frame") {
                let f = QuaternionicFrame::new(&t, &q).unwrap();
                let e = f.extended_frame();
                assert!(max_abs(&(e.transpose() * &e - DMatrix::identity(4 * m, 4 * m))) < 1e-12);
                assert!(f.eta_invariance_residual() < 1e-10);
                assert!((f.gram_determinant() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn contact_form_in_frame_coordinates() {
        let s = LinearContactSphere::new(1).unwrap();
        let t = s.triple();
        let q = sphere_points(8, 1, 3, "alpha-coords").remove(0);
        let f = QuaternionicFrame::new(t, &q).unwrap();
        let e = SphereDirection::from_angles(0.4, 1.2);
        let a = f.almost_contact(&s.generator(&e)).unwrap();
        let [e0, e1, e2] = e.coefficients();
        let mut expected = DVector::zeros(7);
        expected[4] = e0;
        expected[5] = e1;
        expected[6] = e2;
        assert!((a.v() - expected).norm() < 1e-14);
    }

    #[test]
    fn evaluated_sphere_is_the_conjugated_family() {
        let s = LinearContactSphere::new(1).unwrap();
        let f = QuaternionicFrame::standard(s.triple()).unwrap();
        let sphere = evaluate_sphere_at_point(&s, &f, 8, 4).unwrap();
        let q = f.extended_frame();
        for (theta, phi, j) in sphere.entries() {
            let m = j.matrix();
            assert!(max_abs(&(m * m + DMatrix::identity(8, 8))) < 1e-10);
            let expected = q.transpose() * s.generator(&SphereDirection::from_angles(theta, phi)) * &q;
            assert!(max_abs(&(m - expected)) < 1e-12);
        }
        assert!(sphere.closure_residual() < 1e-12);
    }

    #[test]
    fn evaluated_sphere_has_degree_two_m() {
        for n in 0..=2 {
            let s = LinearContactSphere::new(n).unwrap();
            let q = sphere_points(s.dim(), 1, 4, "eval-degree").remove(0);
            let f = QuaternionicFrame::new(s.triple(), &q).unwrap();
            let sphere = evaluate_sphere_at_point(&s, &f, 8, 4).unwrap();
            assert_eq!(structure_sphere_degree(&sphere, 64).unwrap(), 2 * (n as i64 + 1));
        }
    }

    #[test]
    fn roundtrip_is_identity_at_the_standard_configuration() {
        for m in 1..=3 {
            let t = QuaternionicTriple::build(m).unwrap();
            let f = QuaternionicFrame::standard(&t).unwrap();
            for j in [t.i(), t.j(), t.k()] {
                let c = roundtrip_identity(j, &f).unwrap();
                assert!(c.distance < 1e-10);
                let cc = roundtrip_identity(&c.image, &f).unwrap();
                assert!(max_abs(&(cc.image.matrix() - c.image.matrix())) < 1e-10);
            }
        }
    }

    #[test]
    fn frame_rejects_dimension_mismatch() {
        let t = QuaternionicTriple::build(2).unwrap();
        let q = SpherePoint::basis(4, 0).unwrap();
        assert!(QuaternionicFrame::new(&t, &q).is_err());
    }

    proptest::proptest! {
        #[test]
        fn h_extend_stays_orthogonal_complex(seed in 0u64..1000, half in 1usize..4) {
            let k = 2 * half + 1;
            let v = sphere_points(k + 1, 1, seed, "h-extend-prop").remove(0).into_coords().rows(0, k).normalize();
            let h = h_extend(&AlmostContactPoint::new(v, random_structure(k - 1, seed, 0)).unwrap()).unwrap();
            let m = h.matrix();
            let id = DMatrix::identity(k + 1, k + 1);
            proptest::prop_assert!(max_abs(&(m * m + &id)) < 1e-13);
            proptest::prop_assert!(max_abs(&(m + m.transpose())) < 1e-13);
        }

        #[test]
        fn conjugation_identities_hold(theta in 0.0..std::f64::consts::TAU, phi in 0.0..std::f64::consts::PI, m in 1usize..4) {
            let path = conjugation_path(&QuaternionicTriple::build(m).unwrap(), theta, phi).unwrap();
            proptest::prop_assert!(path.orthogonality_residual < 1e-12);
            proptest::prop_assert!(path.formula_residual < 1e-12);
        }

        #[test]
        fn eta_is_quaternionic(seed in 0u64..200, m in 2usize..4) {
            let t = QuaternionicTriple::build(m).unwrap();
            let q = sphere_points(t.dim(), 1, seed, "eta-prop").remove(0);
            let frame = QuaternionicFrame::new(&t, &q).unwrap();
            proptest::prop_assert!(frame.eta_invariance_residual() < 1e-10);
            proptest::prop_assert!(frame.gram_determinant() > MIN_FRAME_GRAM);
        }
    }
}

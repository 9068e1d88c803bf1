//! Quaternionic triples, complex structures and complex-determinant winding.
//!
//! The fixed 4x4 convention acts on coordinates `(x1, x2, x3, x4)`:
//! `i` rotates the pairs `(x1, x2)` and `(x3, x4)`, `j` sends
//! `x1 -> x3`, `x2 -> -x4`, and `k = ij`. Only the quaternion relations are
//! part of the contract; tests check relations, not entries.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{GeomError, Result};
use crate::linalg::{max_abs, SquareMatrix};

/// Tolerance used when validating complex-structure invariants.
pub const STRUCTURE_TOL: f64 = 1e-10;

/// Tolerance for the unit-norm check on [`SphereDirection`].
pub const DIRECTION_TOL: f64 = 1e-10;

/// A real orthogonal antisymmetric matrix squaring to `-id`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexStructure(SquareMatrix);

impl ComplexStructure {
    pub fn new(matrix: SquareMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, STRUCTURE_TOL)
    }

    pub fn with_tolerance(matrix: SquareMatrix, tol: f64) -> Result<Self> {
        let n = matrix.nrows();
        if n != matrix.ncols() {
            return Err(GeomError::DimensionMismatch {
                expected: n,
                got: matrix.ncols(),
            });
        }
        if n == 0 || n % 2 == 1 {
            return Err(GeomError::NotComplexStructure {
                reason: "odd or zero dimension",
                residual: f64::NAN,
            });
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(GeomError::NotComplexStructure {
                reason: "non-finite entry",
                residual: f64::NAN,
            });
        }
        let id = DMatrix::identity(n, n);
        let square = max_abs(&(&matrix * &matrix + &id));
        if square > tol {
            return Err(GeomError::NotComplexStructure {
                reason: "M^2 != -id",
                residual: square,
            });
        }
        let skew = max_abs(&(&matrix + matrix.transpose()));
        if skew > tol {
            return Err(GeomError::NotComplexStructure {
                reason: "M^T != -M",
                residual: skew,
            });
        }
        let orth = max_abs(&(matrix.transpose() * &matrix - &id));
        if orth > tol {
            return Err(GeomError::NotComplexStructure {
                reason: "M^T M != id",
                residual: orth,
            });
        }
        Ok(Self(matrix))
    }

    /// The standard structure on `R^{2k}`: `e_{2a} -> e_{2a+1} -> -e_{2a}`.
    pub fn standard(dim: usize) -> Result<Self> {
        if dim == 0 || dim % 2 == 1 {
            return Err(GeomError::InvalidArgument(format!(
                "standard complex structure needs an even positive dimension, got {dim}"
            )));
        }
        let mut m = DMatrix::zeros(dim, dim);
        for a in 0..dim / 2 {
            m[(2 * a + 1, 2 * a)] = 1.0;
            m[(2 * a, 2 * a + 1)] = -1.0;
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> SquareMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.0 * v
    }
}

/// A unit vector of coefficients `(e0, e1, e2)` selecting `e0 I + e1 J + e2 K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereDirection {
    e: [f64; 3],
    angles: Option<(f64, f64)>,
}

impl SphereDirection {
    pub fn new(e0: f64, e1: f64, e2: f64) -> Result<Self> {
        let norm = (e0 * e0 + e1 * e1 + e2 * e2).sqrt();
        if !((norm - 1.0).abs() <= DIRECTION_TOL) {
            return Err(GeomError::NotUnit { norm });
        }
        Ok(Self {
            e: [e0, e1, e2],
            angles: None,
        })
    }

    /// Azimuth `theta` and polar angle `phi`:
    /// `e = (cos θ sin φ, sin θ sin φ, cos φ)`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Self {
            e: [theta.cos() * phi.sin(), theta.sin() * phi.sin(), phi.cos()],
            angles: Some((theta, phi)),
        }
    }

    pub fn coefficients(&self) -> [f64; 3] {
        self.e
    }

    pub fn angles(&self) -> Option<(f64, f64)> {
        self.angles
    }
}

/// Three complex structures on `R^{4m}` satisfying the quaternion relations.
#[derive(Debug, Clone, PartialEq)]
pub struct QuaternionicTriple {
    m: usize,
    i: ComplexStructure,
    j: ComplexStructure,
    k: ComplexStructure,
}

fn unit_i() -> [[f64; 4]; 4] {
    [
        [0.0, -1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0, 0.0],
    ]
}

fn unit_j() -> [[f64; 4]; 4] {
    [
        [0.0, 0.0, -1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, -1.0, 0.0, 0.0],
    ]
}

fn block_diagonal(block: &DMatrix<f64>, copies: usize) -> DMatrix<f64> {
    let b = block.nrows();
    let mut out = DMatrix::zeros(b * copies, b * copies);
    for c in 0..copies {
        out.view_mut((c * b, c * b), (b, b)).copy_from(block);
    }
    out
}

impl QuaternionicTriple {
    /// Block-diagonal direct sum of `m` copies of the 4x4 `i, j, k`.
    pub fn build(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(GeomError::InvalidArgument(
                "quaternionic dimension must be at least 1".into(),
            ));
        }
        let i4 = DMatrix::from_fn(4, 4, |r, c| unit_i()[r][c]);
        let j4 = DMatrix::from_fn(4, 4, |r, c| unit_j()[r][c]);
        let k4 = &i4 * &j4;
        let triple = Self {
            m,
            i: ComplexStructure::new(block_diagonal(&i4, m))?,
            j: ComplexStructure::new(block_diagonal(&j4, m))?,
            k: ComplexStructure::new(block_diagonal(&k4, m))?,
        };
        Ok(triple)
    }

    /// Wraps three structures after checking `IJ = K` and anticommutation.
    pub fn from_structures(
        i: ComplexStructure,
        j: ComplexStructure,
        k: ComplexStructure,
        tol: f64,
    ) -> Result<Self> {
        let dim = i.dim();
        if !dim.is_multiple_of(4) || j.dim() != dim || k.dim() != dim {
            return Err(GeomError::DimensionMismatch {
                expected: dim,
                got: j.dim().max(k.dim()),
            });
        }
        let triple = Self { m: dim / 4, i, j, k };
        let residuals = triple.relation_residuals();
        for (name, r) in residuals {
            if r > tol {
                return Err(GeomError::QuaternionRelation {
                    relation: name,
                    residual: r,
                });
            }
        }
        Ok(triple)
    }

    /// Quaternionic dimension `m`; the ambient space is `R^{4m}`.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        4 * self.m
    }

    pub fn i(&self) -> &ComplexStructure {
        &self.i
    }

    pub fn j(&self) -> &ComplexStructure {
        &self.j
    }

    pub fn k(&self) -> &ComplexStructure {
        &self.k
    }

    /// Max-abs residual of each defining relation.
    pub fn relation_residuals(&self) -> Vec<(&'static str, f64)> {
        let (i, j, k) = (self.i.matrix(), self.j.matrix(), self.k.matrix());
        let id = DMatrix::identity(self.dim(), self.dim());
        vec![
            ("I^2 = -id", max_abs(&(i * i + &id))),
            ("J^2 = -id", max_abs(&(j * j + &id))),
            ("K^2 = -id", max_abs(&(k * k + &id))),
            ("IJ = K", max_abs(&(i * j - k))),
            ("IJ = -JI", max_abs(&(i * j + j * i))),
            ("JK = -KJ", max_abs(&(j * k + k * j))),
            ("KI = -IK", max_abs(&(k * i + i * k))),
        ]
    }

    pub fn max_relation_residual(&self) -> f64 {
        self.relation_residuals()
            .into_iter()
            .fold(0.0, |acc, (_, r)| acc.max(r))
    }

    /// `e0 I + e1 J + e2 K` as a raw matrix (no validation).
    pub fn combine_matrix(&self, e: &SphereDirection) -> SquareMatrix {
        let [e0, e1, e2] = e.coefficients();
        self.combine_raw(e0, e1, e2)
    }

    /// `e0 I + e1 J + e2 K` for arbitrary coefficients.
    pub fn combine_raw(&self, e0: f64, e1: f64, e2: f64) -> SquareMatrix {
        self.i
            .matrix()
            .zip_zip_map(self.j.matrix(), self.k.matrix(), |a, b, c| e0 * a + e1 * b + e2 * c)
    }

    pub fn combine(&self, e: &SphereDirection) -> Result<ComplexStructure> {
        ComplexStructure::new(self.combine_matrix(e))
    }

    /// `J_θ = cos θ J + sin θ K`.
    pub fn j_theta(&self, theta: f64) -> SquareMatrix {
        self.j.matrix() * theta.cos() + self.k.matrix() * theta.sin()
    }
}

/// `exp(tF)` for `F` with `F^2 = -c^2 id`, via `cos(ct) id + sin(ct)/c F`.
pub fn exp_scaled_structure(f: &SquareMatrix, c: f64, t: f64) -> Result<SquareMatrix> {
    let n = f.nrows();
    if n != f.ncols() {
        return Err(GeomError::DimensionMismatch {
            expected: n,
            got: f.ncols(),
        });
    }
    if !(c > 0.0) {
        return Err(GeomError::InvalidArgument(format!(
            "scale c must be positive, got {c}"
        )));
    }
    let id = DMatrix::identity(n, n);
    let residual = max_abs(&(f * f + &id * (c * c)));
    if residual > STRUCTURE_TOL * (1.0 + c * c) {
        return Err(GeomError::NotScaledStructure { residual });
    }
    Ok(id * (c * t).cos() + f * ((c * t).sin() / c))
}

/// A complex basis `{b_1, ..., b_k}` of `(R^{2k}, I)` with `{b_a, I b_a}`
/// orthonormal, chosen greedily from the standard basis.
#[derive(Debug, Clone)]
pub struct ComplexBasis {
    structure: ComplexStructure,
    basis: Vec<DVector<f64>>,
}

impl ComplexBasis {
    pub fn new(structure: &ComplexStructure) -> Self {
        let n = structure.dim();
        let mut chosen: Vec<DVector<f64>> = Vec::with_capacity(n / 2);
        let mut span: Vec<DVector<f64>> = Vec::with_capacity(n);
        for axis in 0..n {
            if chosen.len() == n / 2 {
                break;
            }
            let mut v = DVector::zeros(n);
            v[axis] = 1.0;
            // two passes of Gram-Schmidt
            for _ in 0..2 {
                for s in &span {
                    let proj = s.dot(&v);
                    v.axpy(-proj, s, 1.0);
                }
            }
            let norm = v.norm();
            if norm > 1e-6 {
                let b = v / norm;
                let ib = structure.apply(&b);
                span.push(b.clone());
                span.push(ib);
                chosen.push(b);
            }
        }
        Self {
            structure: structure.clone(),
            basis: chosen,
        }
    }

    pub fn vectors(&self) -> &[DVector<f64>] {
        &self.basis
    }

    /// Matrix of a commuting real map in this basis:
    /// `M_{ab} = <b_a, A b_b> + i <I b_a, A b_b>`.
    pub fn complexify(&self, a: &SquareMatrix) -> Result<DMatrix<Complex64>> {
        let n = self.structure.dim();
        if a.nrows() != n || a.ncols() != n {
            return Err(GeomError::DimensionMismatch {
                expected: n,
                got: a.nrows(),
            });
        }
        let i = self.structure.matrix();
        let commutator = max_abs(&(a * i - i * a));
        if commutator > STRUCTURE_TOL * (1.0 + max_abs(a)) {
            return Err(GeomError::NonCommuting { norm: commutator });
        }
        let k = self.basis.len();
        let ib: Vec<DVector<f64>> = self.basis.iter().map(|b| i * b).collect();
        let mut out = DMatrix::zeros(k, k);
        for col in 0..k {
            let image = a * &self.basis[col];
            for row in 0..k {
                out[(row, col)] =
                    Complex64::new(self.basis[row].dot(&image), ib[row].dot(&image));
            }
        }
        Ok(out)
    }

    /// Real re-expansion of a complex matrix written in this basis.
    pub fn realify(&self, m: &DMatrix<Complex64>) -> SquareMatrix {
        let n = self.structure.dim();
        let k = self.basis.len();
        let i = self.structure.matrix();
        let ib: Vec<DVector<f64>> = self.basis.iter().map(|b| i * b).collect();
        // columns of B = [b_1..b_k, Ib_1..Ib_k]; A B = B R with R the real form
        let mut basis = DMatrix::zeros(n, n);
        for a in 0..k {
            basis.set_column(a, &self.basis[a]);
            basis.set_column(k + a, &ib[a]);
        }
        let mut real = DMatrix::zeros(n, n);
        for row in 0..k {
            for col in 0..k {
                let z = m[(row, col)];
                real[(row, col)] = z.re;
                real[(k + row, col)] = z.im;
                real[(row, k + col)] = -z.im;
                real[(k + row, k + col)] = z.re;
            }
        }
        &basis * real * basis.transpose()
    }
}

/// Matrix of `a` in a greedily constructed `I`-complex basis.
pub fn complexify(a: &SquareMatrix, i: &ComplexStructure) -> Result<DMatrix<Complex64>> {
    ComplexBasis::new(i).complexify(a)
}

/// Default number of loop samples for winding computations.
pub const DEFAULT_LOOP_SAMPLES: usize = 512;

/// Largest argument step accepted between consecutive loop samples.
pub const MAX_ARG_STEP: f64 = PI / 2.0;

/// Samples `theta -> f(theta)` at `samples + 1` points covering `[0, 2π]`,
/// first and last included.
pub fn sample_loop<F>(samples: usize, mut f: F) -> Vec<SquareMatrix>
where
    F: FnMut(f64) -> SquareMatrix,
{
    (0..=samples)
        .map(|s| f(2.0 * PI * s as f64 / samples as f64))
        .collect()
}

/// Winding number of `θ -> arg det_C(loop(θ))`, accumulated from
/// consecutive argument differences.
pub fn det_winding(samples: &[SquareMatrix], i: &ComplexStructure) -> Result<i64> {
    if samples.len() < 3 {
        return Err(GeomError::InvalidArgument(
            "a loop needs at least three samples".into(),
        ));
    }
    let first = &samples[0];
    let last = &samples[samples.len() - 1];
    let distance = max_abs(&(first - last));
    if distance > 1e-8 * (1.0 + max_abs(first)) {
        return Err(GeomError::OpenLoop { distance });
    }
    let basis = ComplexBasis::new(i);
    let mut dets = Vec::with_capacity(samples.len());
    for (index, s) in samples.iter().enumerate() {
        let det = basis.complexify(s)?.determinant();
        if !(det.norm() > 1e-12) {
            return Err(GeomError::SingularLoop {
                index,
                modulus: det.norm(),
            });
        }
        dets.push(det);
    }
    let mut total = 0.0;
    for (index, pair) in dets.windows(2).enumerate() {
        let jump = (pair[1] / pair[0]).arg();
        if jump.abs() > MAX_ARG_STEP {
            return Err(GeomError::WindingAliasing { index, jump });
        }
        total += jump;
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

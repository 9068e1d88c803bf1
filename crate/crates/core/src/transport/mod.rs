//! Canonical connection of a contact fibration over a two-dimensional base.
//!
//! A total-space tangent vector is a pair (fiber vector, base 2-vector). The
//! fibration form is `α = pᵗA(b) dp + c_0(p, b) db_0 + c_1(p, b) db_1` in
//! polar-type base coordinates `b = (radial, angle)`; horizontal lifts are
//! the `dα`-annihilators of the vertical part of `ker α`.

mod fibration;
mod path;
mod trivialization;

pub use fibration::{
    horizontal_lift, lift_raw, ContactFibrationDisk, BUILTIN_PROFILES, DEFAULT_QUADRATIC_BOUND, FibrationForm, HamiltonianProfile, HorizontalLift,
    LoopHamiltonian,
};
pub use path::BasePath;
pub use trivialization::{
    loop_at_infinity, radial_trivialization, radial_trivialization_grid, LoopAtInfinity, LoopSample, TrivializationOptions,
    TrivializationSample,
};

use nalgebra::DVector;

use crate::contact::{hamiltonian_flow, SpherePoint};
use crate::error::{GeomError, Result};
use crate::integrate::rk4_sphere;
use crate::sampling::sphere_points;

/// Polar-type base coordinates: `radial` is `r` on the disk or the polar
/// angle on `S^2`; `angle` is the azimuth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseCoords {
    pub radial: f64,
    pub angle: f64,
}

impl BaseCoords {
    pub fn new(radial: f64, angle: f64) -> Self {
        Self { radial, angle }
    }
}

/// Parallel transport of a set of fiber points along a base path.
#[derive(Debug, Clone)]
pub struct TransportResult {
    pub endpoints: Vec<(SpherePoint, SpherePoint)>,
    pub max_horizontality_residual: f64,
    pub steps: usize,
}

impl TransportResult {
    /// Largest distance between input and output points.
    pub fn max_displacement(&self) -> f64 {
        self.endpoints
            .iter()
            .map(|(a, b)| a.distance(b))
            .fold(0.0, f64::max)
    }
}

fn transport_point(
    fib: &dyn FibrationForm,
    path: &BasePath,
    p0: &DVector<f64>,
    step: f64,
    residual: &mut f64,
) -> Result<DVector<f64>> {
    let n = path.pieces();
    let mut x = p0.clone();
    for index in 0..n {
        x = rk4_sphere(&x, 0.0, 1.0, step * n as f64, |x, s| {
            let (b, u) = path.piece_at(index, s);
            let lift = lift_raw(fib, x, b, u)?;
            *residual = residual.max(lift.form_residual.max(lift.annihilator_residual));
            Ok(lift.fiber)
        })?;
    }
    Ok(x)
}

/// RK4 integration of the horizontal lift of `path` (parameter `t ∈ [0, 1]`)
/// starting from each point of `points`.
pub fn parallel_transport(
    fib: &dyn FibrationForm,
    path: &BasePath,
    points: &[SpherePoint],
    step: f64,
) -> Result<TransportResult> {
    if !(step > 0.0) {
        return Err(GeomError::NonPositiveStep(step));
    }
    let mut residual = 0.0_f64;
    let mut endpoints = Vec::with_capacity(points.len());
    for p in points {
        if p.dim() != fib.fiber_dim() {
            return Err(GeomError::DimensionMismatch {
                expected: fib.fiber_dim(),
                got: p.dim(),
            });
        }
        let end = transport_point(fib, path, p.coords(), step, &mut residual)?;
        endpoints.push((p.clone(), SpherePoint::normalize(end)?));
    }
    Ok(TransportResult {
        endpoints,
        max_horizontality_residual: residual,
        steps: (1.0 / step).ceil() as usize,
    })
}

/// Transports `p` together with tangent vectors `vectors`, differentiating
/// nearby trajectories started at `normalize(p ± offset v)`.
pub fn transport_tangent_vectors(
    fib: &dyn FibrationForm,
    path: &BasePath,
    p: &SpherePoint,
    vectors: &[DVector<f64>],
    step: f64,
    offset: f64,
) -> Result<(SpherePoint, Vec<DVector<f64>>)> {
    let mut residual = 0.0;
    let end = transport_point(fib, path, p.coords(), step, &mut residual)?;
    let mut images = Vec::with_capacity(vectors.len());
    for v in vectors {
        let plus = transport_point(fib, path, &(p.coords() + v * offset).normalize(), step, &mut residual)?;
        let minus = transport_point(fib, path, &(p.coords() - v * offset).normalize(), step, &mut residual)?;
        images.push((plus - minus) / (2.0 * offset));
    }
    Ok((SpherePoint::normalize(end)?, images))
}

/// Worst `|α_end(DΨ v)| / |DΨ v|` over a contact-plane frame at `p`, where
/// `Ψ` is transport along `path` and `α_end` the fiber form at the path end.
pub fn contactomorphism_defect(
    fib: &dyn FibrationForm,
    path: &BasePath,
    p: &SpherePoint,
    step: f64,
    offset: f64,
) -> Result<f64> {
    let (start, _) = path.at(0.0);
    let (end, _) = path.at(1.0);
    let start_form = crate::contact::ContactForm::new(fib.fiber_generator(start))?;
    let xi = crate::contact::contact_plane_frame(&start_form, p)?;
    let vectors: Vec<_> = xi.column_iter().map(|c| c.into_owned()).collect();
    let (q, images) = transport_tangent_vectors(fib, path, p, &vectors, step, offset)?;
    let a_end = fib.fiber_generator(end);
    let mut worst = 0.0_f64;
    for w in images {
        let value = q.coords().dot(&(&a_end * &w)) / w.norm();
        worst = worst.max(value.abs());
    }
    Ok(worst)
}

/// Outcome of comparing holonomy around `γ_{r0}` with the flow of
/// `G_θ = -H(·, r0, θ)`.
#[derive(Debug, Clone)]
pub struct LemmaParallelCheck {
    pub r0: f64,
    pub max_distance: f64,
    pub max_horizontality_residual: f64,
    pub samples: usize,
}

/// Compares parallel transport around the circle of radius `r0` against the
/// contact Hamiltonian flow of `G_θ = -H(·, r0, θ)` over `θ ∈ [0, 2π]` on
/// seeded fiber points. `r0 = 0` is the fixed central fiber.
pub fn check_lemma_parallel(
    fib: &ContactFibrationDisk,
    r0: f64,
    sample_count: usize,
    seed: u64,
    step: f64,
) -> Result<LemmaParallelCheck> {
    if !(0.0..1.0).contains(&r0) {
        return Err(GeomError::InvalidArgument(format!("r0 must lie in [0, 1), got {r0}")));
    }
    let points = sphere_points(fib.fiber_dim(), sample_count, seed, "lemma-parallel");
    if r0 == 0.0 {
        return Ok(LemmaParallelCheck {
            r0,
            max_distance: 0.0,
            max_horizontality_residual: 0.0,
            samples: points.len(),
        });
    }
    let transport = parallel_transport(fib, &BasePath::circle(r0), &points, step)?;
    let g = LoopHamiltonian::new(fib.profile(), r0);
    let mut worst = 0.0_f64;
    for (p, q) in &transport.endpoints {
        let flowed = hamiltonian_flow(fib.fiber_form(), &g, p, 2.0 * std::f64::consts::PI, step)?;
        worst = worst.max(flowed.distance(q));
    }
    Ok(LemmaParallelCheck {
        r0,
        max_distance: worst,
        max_horizontality_residual: transport.max_horizontality_residual,
        samples: points.len(),
    })
}

#[cfg(test)]
mod tests;

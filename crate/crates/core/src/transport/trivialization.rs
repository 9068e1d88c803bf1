use std::f64::consts::TAU;

use nalgebra::DVector;

use super::{lift_raw, BaseCoords, FibrationForm};
use crate::contact::{reeb_from_generator, SpherePoint};
use crate::error::{GeomError, Result};
use crate::integrate::rk4_sphere_at;

/// Numerical parameters of the radial trivialization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrivializationOptions {
    /// RK4 step in the radial coordinate.
    pub step: f64,
    /// Angular offset for the central difference in `θ`.
    pub angle_offset: f64,
    /// Fiber offset for the central difference along the central Reeb field.
    pub fiber_offset: f64,
    /// Largest admitted horizontality residual along the radial lifts.
    pub lift_tolerance: f64,
}

impl Default for TrivializationOptions {
    fn default() -> Self {
        Self {
            step: 1e-3,
            angle_offset: 1e-4,
            fiber_offset: 1e-6,
            lift_tolerance: 1e-8,
        }
    }
}

/// `Φ*α = e^g (α_0 + H dθ)` evaluated at one `(p, r, θ)`.
#[derive(Debug, Clone)]
pub struct TrivializationSample {
    pub point: SpherePoint,
    pub radial: f64,
    pub angle: f64,
    /// `Φ(p, r, θ)`
    pub image: DVector<f64>,
    pub hamiltonian: f64,
    pub conformal: f64,
    pub lift_residual: f64,
}

fn radial_images(
    fib: &dyn FibrationForm,
    x0: &DVector<f64>,
    angle: f64,
    times: &[f64],
    step: f64,
    residual: &mut f64,
) -> Result<Vec<DVector<f64>>> {
    rk4_sphere_at(x0, times, step, |x, r| {
        let lift = lift_raw(fib, x, BaseCoords::new(r, angle), [1.0, 0.0])?;
        *residual = residual.max(lift.form_residual.max(lift.annihilator_residual));
        Ok(lift.fiber)
    })
}

/// Builds `Φ(p, ·, θ)` by integrating radial horizontal lifts out of the
/// central fiber and reads off `H` and `g` at each radius in `radii`
/// (ascending, within `[0, radial_extent]`).
pub fn radial_trivialization(
    fib: &dyn FibrationForm,
    p: &SpherePoint,
    angle: f64,
    radii: &[f64],
    options: &TrivializationOptions,
) -> Result<Vec<TrivializationSample>> {
    if p.dim() != fib.fiber_dim() {
        return Err(GeomError::DimensionMismatch {
            expected: fib.fiber_dim(),
            got: p.dim(),
        });
    }
    if !(options.step > 0.0) {
        return Err(GeomError::NonPositiveStep(options.step));
    }
    let extent = fib.radial_extent();
    if radii.windows(2).any(|w| w[1] < w[0]) || radii.iter().any(|&r| !(0.0..=extent).contains(&r)) {
        return Err(GeomError::InvalidArgument(format!(
            "radii must be ascending within [0, {extent}]"
        )));
    }
    let mut times = Vec::with_capacity(radii.len() + 1);
    times.push(0.0);
    times.extend_from_slice(radii);

    let center = fib.fiber_generator(BaseCoords::new(0.0, angle));
    let reeb = reeb_from_generator(&center, p.coords())?;
    let h = options.fiber_offset;
    let da = options.angle_offset;
    let x = p.coords();
    let mut residual = 0.0_f64;
    let main = radial_images(fib, x, angle, &times, options.step, &mut residual)?;
    let plus_a = radial_images(fib, x, angle + da, &times, options.step, &mut residual)?;
    let minus_a = radial_images(fib, x, angle - da, &times, options.step, &mut residual)?;
    let plus_r = radial_images(fib, &(x + &reeb * h).normalize(), angle, &times, options.step, &mut residual)?;
    let minus_r = radial_images(fib, &(x - &reeb * h).normalize(), angle, &times, options.step, &mut residual)?;
    if residual > options.lift_tolerance {
        return Err(GeomError::ResidualTooLarge {
            context: "radial horizontal lift",
            residual,
            tolerance: options.lift_tolerance,
        });
    }

    let mut out = Vec::with_capacity(radii.len());
    for (k, &r) in radii.iter().enumerate() {
        let i = k;
        let b = BaseCoords::new(r, angle);
        let a = fib.fiber_generator(b);
        let q = &main[i];
        let qa = a.transpose() * q;
        let d_reeb = (&plus_r[i] - &minus_r[i]) / (2.0 * h);
        let d_angle = (&plus_a[i] - &minus_a[i]) / (2.0 * da);
        let scale = qa.dot(&d_reeb);
        if !(scale > 0.0) {
            return Err(GeomError::DegenerateForm(format!(
                "pulled-back form is not a positive multiple at r = {r}"
            )));
        }
        let c = fib.base_coefficients(q, b);
        out.push(TrivializationSample {
            point: p.clone(),
            radial: r,
            angle,
            image: q.clone(),
            hamiltonian: (qa.dot(&d_angle) + c[1]) / scale,
            conformal: scale.ln(),
            lift_residual: residual,
        });
    }
    Ok(out)
}

/// [`radial_trivialization`] over `grid_r` radii uniformly spaced in
/// `[δ, extent - δ]` (`δ = 1e-3 · extent`) and `grid_theta` angles in `[0, 2π)`.
pub fn radial_trivialization_grid(
    fib: &dyn FibrationForm,
    points: &[SpherePoint],
    grid_r: usize,
    grid_theta: usize,
    options: &TrivializationOptions,
) -> Result<Vec<TrivializationSample>> {
    if grid_r == 0 || grid_theta == 0 {
        return Err(GeomError::InvalidArgument("grid sizes must be positive".into()));
    }
    let extent = fib.radial_extent();
    let delta = 1e-3 * extent;
    let radii: Vec<f64> = if grid_r == 1 {
        vec![0.5 * extent]
    } else {
        (0..grid_r)
            .map(|i| delta + (extent - 2.0 * delta) * i as f64 / (grid_r - 1) as f64)
            .collect()
    };
    let mut out = Vec::with_capacity(points.len() * grid_r * grid_theta);
    for k in 0..grid_theta {
        let angle = TAU * k as f64 / grid_theta as f64;
        for p in points {
            out.extend(radial_trivialization(fib, p, angle, &radii, options)?);
        }
    }
    Ok(out)
}

/// `G_θ = -H(p, r, θ)` along a radius sequence approaching the outer edge.
#[derive(Debug, Clone)]
pub struct LoopSample {
    pub point: SpherePoint,
    pub angle: f64,
    pub values: Vec<f64>,
    /// Order-2 Richardson extrapolation of `values` to the edge.
    pub limit: f64,
}

#[derive(Debug, Clone)]
pub struct LoopAtInfinity {
    pub radii: Vec<f64>,
    pub samples: Vec<LoopSample>,
    /// Observed exponent `k` in `|G^r - G| ~ (extent - r)^k` from the last
    /// three radii (exact for geometric gap sequences), worst over samples;
    /// `None` with fewer than three radii or when already converged.
    pub observed_order: Option<f64>,
}

impl LoopAtInfinity {
    /// Largest `|limit - target|` over samples.
    pub fn max_limit_error(&self, target: f64) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.limit - target).abs())
            .fold(0.0, f64::max)
    }
}

/// Samples `G^r_θ(p) = -H(p, r, θ)` at `radii` (ascending toward the radial
/// extent) and extrapolates to the edge. Fails if successive increments grow
/// while still above `tolerance`.
pub fn loop_at_infinity(
    fib: &dyn FibrationForm,
    points: &[SpherePoint],
    angles: &[f64],
    radii: &[f64],
    tolerance: f64,
    options: &TrivializationOptions,
) -> Result<LoopAtInfinity> {
    if radii.len() < 2 {
        return Err(GeomError::InvalidArgument("at least two radii are needed".into()));
    }
    let extent = fib.radial_extent();
    if radii.windows(2).any(|w| !(w[1] > w[0])) || radii[radii.len() - 1] >= extent {
        return Err(GeomError::InvalidArgument(format!(
            "radii must increase strictly toward {extent}"
        )));
    }
    let gaps: Vec<f64> = radii.iter().map(|r| extent - r).collect();
    let mut samples = Vec::with_capacity(points.len() * angles.len());
    let mut worst_order: Option<f64> = None;
    for &angle in angles {
        for p in points {
            let values: Vec<f64> = radial_trivialization(fib, p, angle, radii, options)?
                .into_iter()
                .map(|s| -s.hamiltonian)
                .collect();
            let n = values.len();
            let increments: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
            for w in increments.windows(2) {
                if w[1] > w[0] && w[1] > tolerance {
                    return Err(GeomError::NonConvergent(format!(
                        "loop at infinity increments grow ({:e} -> {:e}) at θ = {angle}",
                        w[0], w[1]
                    )));
                }
            }
            let (h1, h2) = (gaps[n - 2], gaps[n - 1]);
            let limit = (h1 * h1 * values[n - 1] - h2 * h2 * values[n - 2]) / (h1 * h1 - h2 * h2);
            if n >= 3 && increments[n - 3] > tolerance * 1e-3 {
                let order = (increments[n - 3] / increments[n - 2]).ln() / (gaps[n - 3] / gaps[n - 2]).ln();
                worst_order = Some(worst_order.map_or(order, |o: f64| o.min(order)));
            }
            samples.push(LoopSample {
                point: p.clone(),
                angle,
                values,
                limit,
            });
        }
    }
    Ok(LoopAtInfinity {
        radii: radii.to_vec(),
        samples,
        observed_order: worst_order,
    })
}

//! Classical RK4 on the unit sphere with renormalization after every step.

use nalgebra::DVector;

use crate::error::{GeomError, Result};

/// Integrates `x' = field(x, t)` from `times[0]` through each later entry of
/// `times` (monotone, either direction), returning the state at every entry
/// after the first. Each segment uses `ceil(|Δt| / step)` equal steps, so the
/// requested times are hit exactly. Intermediate stages are projected to the
/// sphere before `field` sees them.
pub fn rk4_sphere_at<F>(
    x0: &DVector<f64>,
    times: &[f64],
    step: f64,
    mut field: F,
) -> Result<Vec<DVector<f64>>>
where
    F: FnMut(&DVector<f64>, f64) -> Result<DVector<f64>>,
{
    if !(step > 0.0) {
        return Err(GeomError::NonPositiveStep(step));
    }
    let mut out = Vec::with_capacity(times.len().saturating_sub(1));
    let mut x = x0.clone();
    for w in times.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let span = t1 - t0;
        let n = (span.abs() / step).ceil() as usize;
        if n > 0 {
            let h = span / n as f64;
            for s in 0..n {
                let t = t0 + h * s as f64;
                let k1 = field(&x, t)?;
                let k2 = field(&(&x + &k1 * (h / 2.0)).normalize(), t + h / 2.0)?;
                let k3 = field(&(&x + &k2 * (h / 2.0)).normalize(), t + h / 2.0)?;
                let k4 = field(&(&x + &k3 * h).normalize(), t + h)?;
                x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
                x.normalize_mut();
            }
        }
        out.push(x.clone());
    }
    Ok(out)
}

/// Endpoint of the flow from `t0` to `t1`.
pub fn rk4_sphere<F>(x0: &DVector<f64>, t0: f64, t1: f64, step: f64, field: F) -> Result<DVector<f64>>
where
    F: FnMut(&DVector<f64>, f64) -> Result<DVector<f64>>,
{
    Ok(rk4_sphere_at(x0, &[t0, t1], step, field)?
        .pop()
        .expect("one segment"))
}

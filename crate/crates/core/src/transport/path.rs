use std::f64::consts::TAU;

use super::BaseCoords;
use crate::error::{GeomError, Result};

/// Piecewise-linear path in base coordinates, parameterized by `t ∈ [0, 1]`
/// with equal parameter time per piece.
#[derive(Debug, Clone, PartialEq)]
pub struct BasePath {
    pieces: Vec<(BaseCoords, BaseCoords)>,
}

impl BasePath {
    /// Straight line in `(radial, angle)` coordinates.
    pub fn segment(start: BaseCoords, end: BaseCoords) -> Self {
        Self {
            pieces: vec![(start, end)],
        }
    }

    /// The loop `θ ↦ (r0, θ)`, `θ ∈ [0, 2π]`.
    pub fn circle(r0: f64) -> Self {
        Self::arc(r0, 0.0, TAU)
    }

    pub fn arc(radial: f64, from: f64, to: f64) -> Self {
        Self::segment(BaseCoords::new(radial, from), BaseCoords::new(radial, to))
    }

    /// Ray at fixed angle from `from` to `to` in the radial coordinate.
    pub fn ray(angle: f64, from: f64, to: f64) -> Self {
        Self::segment(BaseCoords::new(from, angle), BaseCoords::new(to, angle))
    }

    pub fn constant(b: BaseCoords) -> Self {
        Self::segment(b, b)
    }

    /// Joins paths end to end; each input keeps an equal share of parameter time
    /// per piece.
    pub fn concat(paths: &[BasePath]) -> Result<Self> {
        let pieces: Vec<_> = paths.iter().flat_map(|p| p.pieces.iter().copied()).collect();
        if pieces.is_empty() {
            return Err(GeomError::InvalidArgument("cannot concatenate zero paths".into()));
        }
        for pair in pieces.windows(2) {
            if !same_point(pair[0].1, pair[1].0) {
                return Err(GeomError::InvalidArgument(format!(
                    "paths do not join: {:?} then {:?}",
                    pair[0].1, pair[1].0
                )));
            }
        }
        Ok(Self { pieces })
    }

    pub fn pieces(&self) -> usize {
        self.pieces.len()
    }

    /// Position and velocity `d/ds` on piece `index` at local parameter `s ∈ [0, 1]`.
    pub fn piece_at(&self, index: usize, s: f64) -> (BaseCoords, [f64; 2]) {
        let (a, b) = self.pieces[index];
        let dr = b.radial - a.radial;
        let da = b.angle - a.angle;
        (BaseCoords::new(a.radial + s * dr, a.angle + s * da), [dr, da])
    }

    /// Position and velocity `d/dt` at parameter `t`.
    pub fn at(&self, t: f64) -> (BaseCoords, [f64; 2]) {
        let n = self.pieces.len();
        let scaled = t.clamp(0.0, 1.0) * n as f64;
        let index = (scaled.floor() as usize).min(n - 1);
        let (b, [dr, da]) = self.piece_at(index, scaled - index as f64);
        (b, [dr * n as f64, da * n as f64])
    }

    pub fn start(&self) -> BaseCoords {
        self.pieces[0].0
    }

    pub fn end(&self) -> BaseCoords {
        self.pieces[self.pieces.len() - 1].1
    }

    pub fn is_closed(&self) -> bool {
        same_point(self.start(), self.end())
    }
}

/// Equality of base points, with angles mod 2π and every angle at radial 0.
fn same_point(a: BaseCoords, b: BaseCoords) -> bool {
    const TOL: f64 = 1e-12;
    if (a.radial - b.radial).abs() > TOL {
        return false;
    }
    if a.radial.abs() <= TOL {
        return true;
    }
    let turns = (a.angle - b.angle) / TAU;
    (turns - turns.round()).abs() * TAU <= TOL
}

use std::f64::consts::TAU;
use std::sync::Arc;

use serde::Serialize;

use super::family::{SmoothedCurve, SmoothingFamily};
use crate::curves::{ArcLengthCurve, CurveKind, CurveRepr, RawCurve, RawPoint, TableCurve};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::quadrature::gauss8_vec;

const SUBPANELS: usize = 16;
const DEVIATION_GRID: usize = 4096;

/// `Γ(u) = Γ(0) + ∫₀ᵘ (e^{iΘ_η} - D)` with `Θ_η = (1-η)Θ + η(Θ₀ + 2πu)`, where `Θ` is the
/// tangent angle of `γ̃_s` and `D` the mean of `e^{iΘ_η}` (so the curve closes).
#[derive(Debug)]
struct Blended {
    curve: SmoothedCurve,
    eta: f64,
    theta0: f64,
    drift: Vec2,
    start: Vec2,
    nodes: Vec<f64>,
    cum: Vec<Vec2>,
}

impl Blended {
    /// `(Θ_η, Θ_η')` at `u ∈ [0, 1)`.
    fn angle(&self, u: f64) -> (f64, f64) {
        let k = u.floor();
        let v = u - k;
        let th = self.curve.lifted_angle(v);
        let kappa = self.curve.frame(v).curvature;
        (
            (1.0 - self.eta) * th + self.eta * (self.theta0 + TAU * v) + TAU * k,
            (1.0 - self.eta) * kappa + TAU * self.eta,
        )
    }

    fn direction(&self, u: f64) -> Vec2 {
        Vec2::from_angle(self.angle(u).0)
    }
}

impl RawCurve for Blended {
    fn eval(&self, u: f64) -> RawPoint {
        let k = u.floor();
        let v = u - k;
        let j = crate::quadrature::locate(&self.nodes, v);
        let pos = self.start
            + self.cum[j]
            + gauss8_vec(self.nodes[j], v, |x| self.direction(x) - self.drift);
        let (th, dth) = self.angle(v);
        let e = Vec2::from_angle(th);
        RawPoint {
            pos,
            d1: e - self.drift,
            d2: e.perp() * dth,
        }
    }

    fn speed(&self, u: f64) -> f64 {
        (self.direction(u) - self.drift).norm()
    }
}

/// A strictly convex table near `γ̃_s`, with the quantities certifying it.
#[derive(Clone, Debug, Serialize)]
pub struct Lift {
    #[serde(skip)]
    pub table: TableCurve,
    /// Weight of the uniform-turning blend.
    pub eta: f64,
    /// `max_q |Θ(q) - Θ₀ - 2πq|` for `γ̃_s`.
    pub angle_deviation: f64,
    /// Smallest curvature of the lift on a 4096-point grid.
    pub curvature_floor: f64,
    /// `L·2πη(1 - |D|)/(1 + |D|)³`, a lower bound on the curvature.
    pub guaranteed_floor: f64,
}

/// Positive-curvature table `ε`-close to `γ̃_s`: the tangent angle is blended with the
/// uniform rotation `Θ₀ + 2πq` and the resulting curve closed by a constant drift.
/// The marked point and the length 1 normalization are preserved.
pub fn positive_curvature_lift(fam: &SmoothingFamily, s: f64, eps: f64) -> Result<Lift> {
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::InvalidInput(format!("lift radius must be non-negative, got {eps}")));
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidInput(format!("scale {s} outside [0, 1]")));
    }
    let curve = fam.curve(s);
    let theta0 = curve.lifted_angle(0.0);
    let angle_deviation = (0..DEVIATION_GRID)
        .map(|i| {
            let q = i as f64 / DEVIATION_GRID as f64;
            (curve.lifted_angle(q) - theta0 - TAU * q).abs()
        })
        .fold(0.0, f64::max);
    if eps == 0.0 {
        return Ok(Lift {
            table: fam.table(s),
            eta: 0.0,
            angle_deviation,
            curvature_floor: 0.0,
            guaranteed_floor: 0.0,
        });
    }
    // |Γ - γ̃| ≤ 2η·deviation before reparametrization.
    let eta = (eps / (1.0 + 2.0 * angle_deviation)).min(1.0);
    let mut nodes = Vec::new();
    let breaks = {
        let mut b = curve.breakpoints();
        b.push(1.0);
        b
    };
    for w in breaks.windows(2) {
        for k in 0..SUBPANELS {
            nodes.push(w[0] + (w[1] - w[0]) * k as f64 / SUBPANELS as f64);
        }
    }
    nodes.push(1.0);
    let start = curve.frame(0.0).position;
    let mut raw = Blended {
        curve,
        eta,
        theta0,
        drift: Vec2::ZERO,
        start,
        nodes,
        cum: Vec::new(),
    };
    let pieces: Vec<Vec2> = raw
        .nodes
        .windows(2)
        .map(|w| gauss8_vec(w[0], w[1], |x| raw.direction(x)))
        .collect();
    raw.drift = pieces.iter().fold(Vec2::ZERO, |a, &b| a + b);
    let mut cum = Vec::with_capacity(raw.nodes.len());
    cum.push(Vec2::ZERO);
    for (w, p) in raw.nodes.windows(2).zip(&pieces) {
        let prev = *cum.last().unwrap();
        cum.push(prev + *p - raw.drift * (w[1] - w[0]));
    }
    raw.cum = cum;
    let d = raw.drift.norm();
    let lifted = ArcLengthCurve::new(raw, CurveKind::Lifted, start)?;
    let length = lifted.raw_length();
    let guaranteed_floor = length * TAU * eta * (1.0 - d) / (1.0 + d).powi(3);
    let table = TableCurve::from_repr(Arc::new(lifted));
    let curvature_floor = (0..DEVIATION_GRID)
        .map(|i| table.curvature(i as f64 / DEVIATION_GRID as f64))
        .fold(f64::INFINITY, f64::min);
    if !table.is_strictly_convex() || !(curvature_floor > 0.0) {
        return Err(Error::CurvatureNotPositive {
            min_radius: 1.0 / curvature_floor,
            angle: f64::NAN,
            at_s: Some(s),
        });
    }
    Ok(Lift {
        table,
        eta,
        angle_deviation,
        curvature_floor,
        guaranteed_floor,
    })
}

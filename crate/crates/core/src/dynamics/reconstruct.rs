use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::billiard::chord_length;
use crate::curves::{ArcLengthCurve, CurveKind, TableCurve, TrigCurve};
use crate::error::{Error, Result};
use crate::geom::{Isometry, Vec2};

/// Chord lengths from the marked point `S = γ(0)` and from `R = γ(1/2)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChordData {
    pub t: Vec<f64>,
    /// `F(0, t)`.
    pub from_start: Vec<f64>,
    /// `F(t, 1/2)`.
    pub to_half: Vec<f64>,
    /// `F(0, 1/2)`.
    pub half: f64,
}

/// Slack on the circle-intersection test.
const INTERSECTION_SLACK: f64 = 1e-9;

/// Samples `F(0, t)` and `F(t, 1/2)` at `t = j/m`, `j ∉ {0, m/2}` (`m` even).
pub fn chord_data(table: &TableCurve, m: usize) -> Result<ChordData> {
    if m < 4 || m % 2 == 1 {
        return Err(Error::InvalidInput(format!("chord grid must be even and ≥ 4, got {m}")));
    }
    let t: Vec<f64> = (1..m)
        .filter(|&j| 2 * j != m)
        .map(|j| j as f64 / m as f64)
        .collect();
    Ok(ChordData {
        from_start: t.iter().map(|&x| chord_length(table, 0.0, x)).collect::<Result<_>>()?,
        to_half: t.iter().map(|&x| chord_length(table, x, 0.5)).collect::<Result<_>>()?,
        half: chord_length(table, 0.0, 0.5)?,
        t,
    })
}

/// Places `S = (0, 0)`, `R = (F(0, 1/2), 0)` and each `β(t)` at the intersection of the
/// circles of radii `F(0, t)` about `S` and `F(t, 1/2)` about `R`, on the side where
/// `(β(t) - S, R - S)` is positively oriented for `t < 1/2` and negatively for `t > 1/2`.
///
/// Returns `(t, β(t))` sorted by `t`, including `(0, S)` and `(1/2, R)`.
pub fn reconstruct_table(data: &ChordData) -> Result<Vec<(f64, Vec2)>> {
    let d = data.half;
    if !(d > 0.0) {
        return Err(Error::InvalidInput(format!("F(0, 1/2) must be positive, got {d}")));
    }
    if data.from_start.len() != data.t.len() || data.to_half.len() != data.t.len() {
        return Err(Error::InvalidInput("chord arrays differ in length".into()));
    }
    let mut out = vec![(0.0, Vec2::ZERO), (0.5, Vec2::new(d, 0.0))];
    for ((&t, &r1), &r2) in data.t.iter().zip(&data.from_start).zip(&data.to_half) {
        if !(t > 0.0 && t < 1.0) || t == 0.5 {
            return Err(Error::InvalidInput(format!("chord sample at t = {t}")));
        }
        let defect = ((r1 - r2).abs() - d).max(d - (r1 + r2));
        if defect > INTERSECTION_SLACK || !defect.is_finite() {
            return Err(Error::InconsistentChords { t, defect });
        }
        let x = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
        let y = (r1 * r1 - x * x).max(0.0).sqrt();
        out.push((t, Vec2::new(x, if t < 0.5 { -y } else { y })));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

/// The rigid motion taking `γ(0)` to the origin and `γ(1/2)` onto the positive x-axis.
pub fn align_two_anchors(table: &TableCurve) -> Isometry {
    let s = table.position(0.0);
    let r = table.position(0.5);
    let rot = Isometry::rotation(-(r - s).angle());
    rot.compose(&Isometry::translation(-s))
}

/// Max distance between the reconstruction from `m`-point chord data and the aligned table.
pub fn round_trip_error(table: &TableCurve, m: usize) -> Result<f64> {
    let rec = reconstruct_table(&chord_data(table, m)?)?;
    let g = align_two_anchors(table);
    Ok(rec
        .iter()
        .map(|&(t, p)| g.apply(table.position(t)).dist(p))
        .fold(0.0, f64::max))
}

/// A table through reconstructed points sampled at `t = j/m`, by trigonometric interpolation.
pub fn reconstructed_table(points: &[(f64, Vec2)]) -> Result<TableCurve> {
    let m = points.len();
    if m < 8 || points.iter().enumerate().any(|(j, p)| (p.0 - j as f64 / m as f64).abs() > 1e-12) {
        return Err(Error::InvalidInput("reconstructed samples must cover a uniform grid j/m".into()));
    }
    let pts: Vec<Vec2> = points.iter().map(|p| p.1).collect();
    let center = pts.iter().fold(Vec2::ZERO, |a, &b| a + b) / m as f64;
    let curve = ArcLengthCurve::new(TrigCurve::from_samples(&pts), CurveKind::ReconstructedSamples, center)?;
    Ok(TableCurve::from_repr(Arc::new(curve)))
}

//! The billiard ball map of a strictly convex table, its inverse and iterates,
//! and the chord-length generating function.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::curves::{Frame, TableCurve};
use crate::error::{Error, Result};
use crate::geom::wrap01;

/// Momenta beyond `1 - GRAZING_MARGIN` in absolute value are rejected.
pub const GRAZING_MARGIN: f64 = 1e-9;
/// Parameters closer than this (mod 1) are treated as the same boundary point.
pub const DIAGONAL_TOL: f64 = 1e-12;
const BRACKET_MARGIN: f64 = 1e-13;
/// Residual tolerance for the forward solve.
pub const SOLVE_TOL: f64 = 1e-12;

/// A point of the open annulus `S¹ × (-1, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct AnnulusPoint {
    pub q: f64,
    pub p: f64,
}

impl AnnulusPoint {
    pub fn new(q: f64, p: f64) -> Self {
        AnnulusPoint { q: wrap01(q), p }
    }

    /// Time reversal `(q, p) -> (q, -p)`.
    pub fn reversed(self) -> Self {
        AnnulusPoint {
            q: self.q,
            p: -self.p,
        }
    }

    /// Phase-space distance with `q` measured on the circle.
    pub fn dist(self, o: AnnulusPoint) -> f64 {
        crate::geom::circle_dist(self.q, o.q).hypot(self.p - o.p)
    }
}

impl From<[f64; 2]> for AnnulusPoint {
    fn from(a: [f64; 2]) -> Self {
        AnnulusPoint::new(a[0], a[1])
    }
}

impl From<AnnulusPoint> for [f64; 2] {
    fn from(x: AnnulusPoint) -> Self {
        [x.q, x.p]
    }
}

fn check_off_diagonal(q: f64, big_q: f64) -> Result<()> {
    let d = wrap01(big_q - q);
    if d.min(1.0 - d) < DIAGONAL_TOL {
        return Err(Error::DiagonalPoint { q, big_q });
    }
    Ok(())
}

/// `F(q, Q) = ‖γ(q) - γ(Q)‖`.
pub fn chord_length(t: &TableCurve, q: f64, big_q: f64) -> Result<f64> {
    check_off_diagonal(q, big_q)?;
    Ok(t.position(q).dist(t.position(big_q)))
}

/// `(∂F/∂q, ∂F/∂Q) = (-⟨u, γ'(q)⟩, ⟨u, γ'(Q)⟩)` with `u` the unit chord from `γ(q)` to `γ(Q)`.
pub fn generating_partials(t: &TableCurve, q: f64, big_q: f64) -> Result<(f64, f64)> {
    check_off_diagonal(q, big_q)?;
    let a = t.frame(q);
    let b = t.frame(big_q);
    let u = (b.position - a.position).normalized();
    Ok((-u.dot(a.tangent), u.dot(b.tangent)))
}

fn check_momentum(p: f64) -> Result<()> {
    if !(p.abs() <= 1.0 - GRAZING_MARGIN) {
        return Err(Error::NearGrazing { p, step: None });
    }
    Ok(())
}

/// Solves `⟨u(Q), γ'(q)⟩ = p` for `Q ∈ (q, q + 1)` given the frame at `q`.
///
/// The residual decreases strictly from `1 - p` to `-1 - p`, so a Newton iteration
/// safeguarded by the shrinking sign bracket always converges.
fn solve_chord(t: &TableCurve, q: f64, start: &Frame, p: f64) -> Result<(f64, Frame)> {
    let mut lo = q + BRACKET_MARGIN;
    let mut hi = q + 1.0 - BRACKET_MARGIN;
    let mut x = q + p.clamp(-1.0, 1.0).acos() / PI;
    let mut best: Option<(f64, f64, Frame)> = None;
    for _ in 0..200 {
        let f = t.frame(x);
        let chord = f.position - start.position;
        let d = chord.norm();
        let u = chord / d;
        let r = u.dot(start.tangent) - p;
        if best.as_ref().map_or(true, |b| r.abs() < b.1.abs()) {
            best = Some((x, r, f));
        }
        if r == 0.0 {
            break;
        }
        if r > 0.0 {
            lo = lo.max(x);
        } else {
            hi = hi.min(x);
        }
        let dr = (f.tangent - u * u.dot(f.tangent)).dot(start.tangent) / d;
        let mut next = x - r / dr;
        if !(next > lo && next < hi) || !dr.is_finite() || dr >= 0.0 {
            next = 0.5 * (lo + hi);
        }
        let step = (next - x).abs();
        x = next;
        if step <= 4.0 * f64::EPSILON * x.abs().max(1.0) || hi - lo <= 4.0 * f64::EPSILON {
            let f = t.frame(x);
            let u = (f.position - start.position).normalized();
            let r = u.dot(start.tangent) - p;
            if r.abs() < best.as_ref().unwrap().1.abs() {
                best = Some((x, r, f));
            }
            break;
        }
    }
    let (x, r, f) = best.expect("at least one iterate");
    if r.abs() > SOLVE_TOL {
        return Err(Error::NoConvergence(format!(
            "billiard solve at q = {q}, p = {p}: residual {r:e}"
        )));
    }
    Ok((x, f))
}

fn require_strict(t: &TableCurve) -> Result<()> {
    if t.is_strictly_convex() {
        Ok(())
    } else {
        Err(Error::NotStrictlyConvex)
    }
}

/// Forward map on the universal cover: `q` is not reduced and the returned `Q` lies in `(q, q + 1)`.
pub fn forward_lifted(t: &TableCurve, q: f64, p: f64) -> Result<(f64, f64)> {
    require_strict(t)?;
    check_momentum(p)?;
    let start = t.frame(q);
    let (big_q, end) = solve_chord(t, q, &start, p)?;
    let u = (end.position - start.position).normalized();
    Ok((big_q, u.dot(end.tangent)))
}

/// Inverse map on the universal cover; the returned `q` lies in `(Q - 1, Q)`.
pub fn inverse_lifted(t: &TableCurve, big_q: f64, big_p: f64) -> Result<(f64, f64)> {
    let (q, p) = forward_lifted(t, big_q, -big_p)?;
    Ok((q - 1.0, -p))
}

/// The billiard ball map `ψ(q, p) = (Q, P)`.
pub fn forward_map(t: &TableCurve, x: AnnulusPoint) -> Result<AnnulusPoint> {
    let (q, p) = forward_lifted(t, x.q, x.p)?;
    Ok(AnnulusPoint::new(q, p))
}

/// `ψ⁻¹ = R ∘ ψ ∘ R` with `R(q, p) = (q, -p)`.
pub fn inverse_map(t: &TableCurve, x: AnnulusPoint) -> Result<AnnulusPoint> {
    Ok(forward_map(t, x.reversed())?.reversed())
}

/// `|n| + 1` points starting at `x`; negative `n` iterates the inverse.
pub fn iterate(t: &TableCurve, x: AnnulusPoint, n: i64) -> Result<Vec<AnnulusPoint>> {
    let mut out = Vec::with_capacity(n.unsigned_abs() as usize + 1);
    out.push(x);
    let mut cur = x;
    for i in 0..n.unsigned_abs() as usize {
        let next = if n >= 0 {
            forward_map(t, cur)
        } else {
            inverse_map(t, cur)
        };
        cur = next.map_err(|e| match e {
            Error::NearGrazing { p, .. } => Error::NearGrazing { p, step: Some(i) },
            other => other,
        })?;
        out.push(cur);
    }
    Ok(out)
}

/// `ψⁿ` on the universal cover, for `n ≥ 0`.
pub fn iterate_lifted(t: &TableCurve, q: f64, p: f64, n: usize) -> Result<(f64, f64)> {
    let (mut q, mut p) = (q, p);
    for i in 0..n {
        (q, p) = forward_lifted(t, q, p).map_err(|e| match e {
            Error::NearGrazing { p, .. } => Error::NearGrazing { p, step: Some(i) },
            other => other,
        })?;
    }
    Ok((q, p))
}

/// Central-difference Jacobian `[[∂Q/∂q, ∂Q/∂p], [∂P/∂q, ∂P/∂p]]` of the lifted map.
pub fn jacobian(t: &TableCurve, x: AnnulusPoint, h: f64) -> Result<[[f64; 2]; 2]> {
    let (qp, pp) = forward_lifted(t, x.q + h, x.p)?;
    let (qm, pm) = forward_lifted(t, x.q - h, x.p)?;
    let (qu, pu) = forward_lifted(t, x.q, x.p + h)?;
    let (qd, pd) = forward_lifted(t, x.q, x.p - h)?;
    let s = 0.5 / h;
    Ok([[(qp - qm) * s, (qu - qd) * s], [(pp - pm) * s, (pu - pd) * s]])
}

pub fn jacobian_det(t: &TableCurve, x: AnnulusPoint, h: f64) -> Result<f64> {
    let j = jacobian(t, x, h)?;
    Ok(j[0][0] * j[1][1] - j[0][1] * j[1][0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::disc_table;

    #[test]
    fn disc_examples() {
        let d = disc_table();
        let y = forward_map(&d, AnnulusPoint::new(0.25, 0.0)).unwrap();
        assert!((y.q - 0.75).abs() < 1e-12 && y.p.abs() < 1e-12);
        let y = forward_map(&d, AnnulusPoint::new(0.0, 0.5)).unwrap();
        assert!((y.q - 1.0 / 3.0).abs() < 1e-12 && (y.p - 0.5).abs() < 1e-12);
        let p = (0.2 * PI).cos();
        let y = forward_map(&d, AnnulusPoint::new(0.9, p)).unwrap();
        assert!(circle_close(y.q, 0.1) && (y.p - p).abs() < 1e-12);
    }

    fn circle_close(a: f64, b: f64) -> bool {
        crate::geom::circle_dist(a, b) < 1e-12
    }

    #[test]
    fn chord_examples() {
        let d = disc_table();
        assert!((chord_length(&d, 0.0, 0.5).unwrap() - 1.0 / PI).abs() < 1e-15);
        let c = chord_length(&d, 0.2, 0.2 + 1e-6).unwrap();
        assert!((c - 1e-6).abs() < 1e-15);
        assert!(matches!(chord_length(&d, 0.3, 1.3), Err(Error::DiagonalPoint { .. })));
        let (a, b) = generating_partials(&d, 0.0, 0.25).unwrap();
        let c = (0.25 * PI).cos();
        assert!((a + c).abs() < 1e-12 && (b - c).abs() < 1e-12);
        let (a, b) = generating_partials(&d, 0.0, 0.5).unwrap();
        assert!(a.abs() < 1e-15 && b.abs() < 1e-15);
    }

    #[test]
    fn grazing_rejected() {
        let d = disc_table();
        let e = forward_map(&d, AnnulusPoint::new(0.1, 1.0 - 1e-10)).unwrap_err();
        assert!(matches!(e, Error::NearGrazing { .. }));
        assert!(forward_map(&d, AnnulusPoint::new(0.1, 1.0 - 1e-9)).is_ok());
    }

    #[test]
    fn iterate_disc_rotation() {
        let d = disc_table();
        let tr = iterate(&d, AnnulusPoint::new(0.0, 0.5), 3).unwrap();
        for (i, x) in tr.iter().enumerate() {
            assert!(circle_close(x.q, i as f64 / 3.0));
            assert!((x.p - 0.5).abs() < 1e-12);
        }
        let back = iterate(&d, tr[3], -3).unwrap();
        assert!(back[3].dist(tr[0]) < 1e-12);
        let y = inverse_map(&d, AnnulusPoint::new(0.3, 0.0)).unwrap();
        assert!(circle_close(y.q, 0.8));
    }

    #[test]
    fn disc_jacobian_is_shear() {
        let d = disc_table();
        let j = jacobian(&d, AnnulusPoint::new(0.4, 0.3), 1e-5).unwrap();
        let dq_dp = -1.0 / (PI * (1.0f64 - 0.09).sqrt());
        assert!((j[0][0] - 1.0).abs() < 1e-8);
        assert!((j[0][1] - dq_dp).abs() < 1e-7);
        assert!(j[1][0].abs() < 1e-8 && (j[1][1] - 1.0).abs() < 1e-8);
    }
}

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{CurveKind, CurveRepr, Frame, CURVATURE_FLOOR};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::quadrature::{hermite, locate};

/// Support function `h(θ) = c0 + Σ_k cos[k-1]·cos kθ + sin[k-1]·sin kθ`.
///
/// The boundary point with outward normal angle `θ` is
/// `h(θ)(cos θ, sin θ) + h'(θ)(-sin θ, cos θ)`; its radius of curvature is `h + h''`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FourierSupportSpec {
    pub c0: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

/// Support function data at one angle.
#[derive(Clone, Copy, Debug, Default)]
pub struct SupportEval {
    pub h: f64,
    pub dh: f64,
    pub ddh: f64,
    /// `∫_0^θ (h + h'')`, the arc length from the `θ = 0` point.
    pub arclen: f64,
}

impl SupportEval {
    pub fn radius(&self) -> f64 {
        self.h + self.ddh
    }
}

impl FourierSupportSpec {
    pub fn circle(c0: f64) -> Self {
        FourierSupportSpec {
            c0,
            cos: Vec::new(),
            sin: Vec::new(),
        }
    }

    /// `h = 1 + a·cos 2θ`: an ellipse-like oval, major axis along x for `a > 0`.
    pub fn mild_ellipse(a: f64) -> Self {
        FourierSupportSpec {
            c0: 1.0,
            cos: vec![0.0, a],
            sin: Vec::new(),
        }
    }

    /// Highest harmonic present.
    pub fn harmonics(&self) -> usize {
        self.cos.len().max(self.sin.len())
    }

    #[inline]
    fn coeff(&self, k: usize) -> (f64, f64) {
        (
            self.cos.get(k - 1).copied().unwrap_or(0.0),
            self.sin.get(k - 1).copied().unwrap_or(0.0),
        )
    }

    pub fn scaled(&self, factor: f64) -> Self {
        FourierSupportSpec {
            c0: self.c0 * factor,
            cos: self.cos.iter().map(|c| c * factor).collect(),
            sin: self.sin.iter().map(|c| c * factor).collect(),
        }
    }

    /// Homothety to perimeter 1 (the perimeter is `2π c0`).
    pub fn normalized(&self) -> Result<Self> {
        if !(self.c0.is_finite() && self.c0 > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "c0 must be positive, got {}",
                self.c0
            )));
        }
        if self.cos.iter().chain(&self.sin).any(|c| !c.is_finite()) {
            return Err(Error::InvalidSpec("non-finite coefficient".into()));
        }
        Ok(self.scaled(1.0 / (TAU * self.c0)))
    }

    /// `self + k·other`, coefficient-wise.
    pub fn axpy(&self, k: f64, other: &Self) -> Self {
        let n_cos = self.cos.len().max(other.cos.len());
        let n_sin = self.sin.len().max(other.sin.len());
        let pick = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        FourierSupportSpec {
            c0: self.c0 + k * other.c0,
            cos: (0..n_cos)
                .map(|i| pick(&self.cos, i) + k * pick(&other.cos, i))
                .collect(),
            sin: (0..n_sin)
                .map(|i| pick(&self.sin, i) + k * pick(&other.sin, i))
                .collect(),
        }
    }

    /// `(1 - s)·a + s·b`, coefficient-wise.
    pub fn lerp(a: &Self, b: &Self, s: f64) -> Self {
        a.scaled(1.0 - s).axpy(s, b)
    }

    pub fn eval(&self, theta: f64) -> SupportEval {
        let (s1, c1) = theta.sin_cos();
        self.eval_with(theta, c1, s1)
    }

    #[inline]
    fn eval_with(&self, theta: f64, c1: f64, s1: f64) -> SupportEval {
        let mut out = SupportEval {
            h: self.c0,
            dh: 0.0,
            ddh: 0.0,
            arclen: self.c0 * theta,
        };
        let (mut ck, mut sk) = (c1, s1);
        for k in 1..=self.harmonics() {
            let (a, b) = self.coeff(k);
            let kf = k as f64;
            out.h += a * ck + b * sk;
            out.dh += kf * (b * ck - a * sk);
            out.ddh -= kf * kf * (a * ck + b * sk);
            out.arclen += (1.0 - kf * kf) / kf * (a * sk + b * (1.0 - ck));
            let next_c = ck * c1 - sk * s1;
            sk = sk * c1 + ck * s1;
            ck = next_c;
        }
        out
    }

    pub fn radius_of_curvature(&self, theta: f64) -> f64 {
        self.eval(theta).radius()
    }

    /// Minimum of `h + h''` over `n` equally spaced angles, with its angle.
    pub fn min_radius(&self, n: usize) -> (f64, f64) {
        (0..n)
            .map(|i| {
                let th = TAU * i as f64 / n as f64;
                (self.radius_of_curvature(th), th)
            })
            .fold((f64::INFINITY, 0.0), |acc, x| if x.0 < acc.0 { x } else { acc })
    }

    /// Boundary point with outward normal angle `theta`.
    pub fn boundary_point(&self, theta: f64) -> Vec2 {
        let (s, c) = theta.sin_cos();
        let e = self.eval(theta);
        Vec2::new(c, s) * e.h + Vec2::new(-s, c) * e.dh
    }
}

/// Random support function with `c0 = 1`, a small first harmonic and harmonics
/// `2..=harmonics` scaled so that `Σ (k² - 1)(|a_k| + |b_k|) ≤ budget`, hence `ρ ≥ 1 - budget`.
pub fn random_fourier_spec<R: Rng>(rng: &mut R, harmonics: usize, budget: f64) -> FourierSupportSpec {
    let n = harmonics.max(1);
    let mut cos: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut sin: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let weight: f64 = (2..=n)
        .map(|k| ((k * k - 1) as f64) * (cos[k - 1].abs() + sin[k - 1].abs()))
        .sum();
    let target = budget * rng.gen_range(0.3..1.0);
    let scale = if weight > 0.0 { target / weight } else { 0.0 };
    cos[0] *= 0.2;
    sin[0] *= 0.2;
    for k in 2..=n {
        cos[k - 1] *= scale;
        sin[k - 1] *= scale;
    }
    FourierSupportSpec { c0: 1.0, cos, sin }
}

/// Angle grid used for validation and for the arc-length inversion table.
pub const THETA_GRID: usize = 4096;

/// A Fourier-support table: the normalized spec plus the arc-length inversion table.
#[derive(Debug, Clone)]
pub struct FourierTable {
    spec: FourierSupportSpec,
    arclen: Vec<f64>,
    radius: Vec<f64>,
}

impl FourierTable {
    pub fn new(raw: &FourierSupportSpec) -> Result<Self> {
        let spec = raw.normalized()?;
        let n = THETA_GRID;
        let mut arclen = Vec::with_capacity(n + 1);
        let mut radius = Vec::with_capacity(n + 1);
        let (mut min_r, mut min_th) = (f64::INFINITY, 0.0);
        for j in 0..=n {
            let th = TAU * j as f64 / n as f64;
            let e = spec.eval(th);
            if e.radius() < min_r {
                min_r = e.radius();
                min_th = th;
            }
            arclen.push(e.arclen);
            radius.push(e.radius());
        }
        // Odd multiples of the half grid catch narrow dips between nodes.
        let (mid_r, mid_th) = (0..n)
            .map(|j| {
                let th = TAU * (j as f64 + 0.5) / n as f64;
                (spec.radius_of_curvature(th), th)
            })
            .fold((f64::INFINITY, 0.0), |acc, x| if x.0 < acc.0 { x } else { acc });
        if mid_r < min_r {
            min_r = mid_r;
            min_th = mid_th;
        }
        if min_r <= CURVATURE_FLOOR {
            return Err(Error::CurvatureNotPositive {
                min_radius: min_r,
                angle: min_th,
                at_s: None,
            });
        }
        arclen[0] = 0.0;
        arclen[n] = 1.0;
        Ok(FourierTable {
            spec,
            arclen,
            radius,
        })
    }

    /// The coefficients after normalization to perimeter 1.
    pub fn spec(&self) -> &FourierSupportSpec {
        &self.spec
    }

    /// Arc length from the marked point to the point with normal angle `theta`.
    pub fn arclength(&self, theta: f64) -> f64 {
        self.spec.eval(theta).arclen
    }

    /// Normal angle of the point at arc length `q ∈ [0, 1)` (inverse of [`Self::arclength`]).
    pub fn theta_of(&self, q: f64) -> f64 {
        let (th, _, _) = self.solve_theta(q);
        th
    }

    /// Returns `(θ, cos θ, sin θ)` for arc length `q`, polished to machine precision.
    #[inline]
    fn solve_theta(&self, q: f64) -> (f64, f64, f64) {
        let n = THETA_GRID;
        let dth = TAU / n as f64;
        let j = locate(&self.arclen, q);
        let (s0, s1) = (self.arclen[j], self.arclen[j + 1]);
        let th0 = dth * j as f64;
        let mut th = hermite(
            s0,
            s1,
            th0,
            th0 + dth,
            1.0 / self.radius[j],
            1.0 / self.radius[j + 1],
            q,
        );
        for _ in 0..8 {
            let (s, c) = th.sin_cos();
            let e = self.spec.eval_with(th, c, s);
            let step = (e.arclen - q) / e.radius();
            th -= step;
            if step.abs() < 1e-11 {
                // The remaining error is O(step^2); a first-order trig update suffices.
                return (th, c + step * s, s - step * c);
            }
        }
        let (s, c) = th.sin_cos();
        (th, c, s)
    }
}

impl CurveRepr for FourierTable {
    fn kind(&self) -> CurveKind {
        CurveKind::FourierSupport
    }

    #[inline]
    fn frame(&self, q: f64) -> Frame {
        let (th, c, s) = self.solve_theta(q);
        let e = self.spec.eval_with(th, c, s);
        let radial = Vec2::new(c, s);
        let tangent = Vec2::new(-s, c);
        Frame {
            position: radial * e.h + tangent * e.dh,
            tangent,
            curvature: 1.0 / e.radius(),
        }
    }

    fn strictly_convex(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{build_fourier_table, c0_distance, disc_table, polyline_length, TableCurve};
    use crate::quadrature::gauss8_composite;

    fn mild(a2: f64) -> FourierSupportSpec {
        FourierSupportSpec {
            c0: 1.0,
            cos: vec![0.0, a2],
            sin: vec![],
        }
    }

    #[test]
    fn constant_support_is_the_disc() {
        let t = build_fourier_table(&FourierSupportSpec::circle(5.0)).unwrap();
        assert!(c0_distance(&t, &disc_table()) < 1e-10);
    }

    #[test]
    fn mild_ellipse_has_unit_length() {
        let raw = mild(0.1);
        // Quadrature of ∫ρ dθ before and after the rescale.
        let before = gauss8_composite(0.0, TAU, 64, |th| raw.radius_of_curvature(th));
        assert!((before - TAU * raw.c0).abs() < 1e-12);
        let norm = raw.normalized().unwrap();
        let after = gauss8_composite(0.0, TAU, 64, |th| norm.radius_of_curvature(th));
        assert!((after - 1.0).abs() < 1e-12);
        let t = build_fourier_table(&raw).unwrap();
        assert!((polyline_length(&t, 1 << 15) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn strong_cos2_is_rejected() {
        // ρ = 1 - 3·0.4·cos 2θ dips to 1 - 1.2 < 0.
        let err = build_fourier_table(&mild(0.4)).unwrap_err();
        match err {
            Error::CurvatureNotPositive { min_radius, .. } => assert!(min_radius < 0.0),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn arclength_inversion_round_trip() {
        let t = FourierTable::new(&FourierSupportSpec {
            c0: 1.0,
            cos: vec![0.02, 0.05, -0.01],
            sin: vec![0.0, 0.03, 0.008],
        })
        .unwrap();
        for i in 0..1000 {
            let l = (i as f64 + 0.37) / 1000.0;
            let back = t.arclength(t.theta_of(l));
            assert!((back - l).abs() < 1e-10, "{l} -> {back}");
        }
    }

    #[test]
    fn frames_are_arc_length() {
        let t = build_fourier_table(&FourierSupportSpec {
            c0: 1.0,
            cos: vec![0.0, 0.06, 0.01],
            sin: vec![0.0, 0.0, -0.02],
        })
        .unwrap();
        for i in 0..1024 {
            let q = i as f64 / 1024.0;
            let f = t.frame(q);
            assert!((f.tangent.norm() - 1.0).abs() < 1e-8);
            assert!(f.curvature > 0.0);
            // Tangent matches the finite difference of position.
            let h = 1e-6;
            let fd = (t.position(q + h) - t.position(q - h)) / (2.0 * h);
            assert!(fd.dist(f.tangent) < 1e-6);
        }
    }

    #[test]
    fn first_harmonic_translates() {
        let base = FourierSupportSpec {
            c0: 1.0,
            cos: vec![0.0, 0.05],
            sin: vec![0.0, 0.0, 0.01],
        };
        let mut shifted = base.clone();
        shifted.cos[0] = 0.2;
        shifted.sin = vec![-0.1, 0.0, 0.01];
        let a = build_fourier_table(&base).unwrap();
        let b = build_fourier_table(&shifted).unwrap();
        let aligned: TableCurve = b.translated(a.centroid() - b.centroid());
        assert!(c0_distance(&a, &aligned) < 1e-8);
    }
}

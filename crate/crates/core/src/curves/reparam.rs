use std::f64::consts::TAU;
use std::fmt;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::{CurveKind, CurveRepr, Frame};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::quadrature::{gauss8, hermite, locate};

/// Position and first two derivatives of a closed curve in a generic parameter `u ∈ [0, 1)`.
#[derive(Clone, Copy, Debug)]
pub struct RawPoint {
    pub pos: Vec2,
    pub d1: Vec2,
    pub d2: Vec2,
}

/// A smooth closed counterclockwise curve with a regular (not necessarily arc-length) parameter.
pub trait RawCurve: Send + Sync + fmt::Debug {
    fn eval(&self, u: f64) -> RawPoint;

    /// `‖d/du pos‖`; override when it is cheaper than a full [`RawCurve::eval`].
    fn speed(&self, u: f64) -> f64 {
        self.eval(u).d1.norm()
    }
}

const PANELS: usize = 2048;

/// Arc-length reparametrization of a [`RawCurve`], rescaled about `center` to length 1.
///
/// The marked point is the raw point at `u = 0`.
#[derive(Debug)]
pub struct ArcLengthCurve<R> {
    raw: R,
    kind: CurveKind,
    center: Vec2,
    length: f64,
    cum: Vec<f64>,
    inv_speed: Vec<f64>,
    strictly_convex: bool,
}

impl<R: RawCurve> ArcLengthCurve<R> {
    /// Reparametrizes `raw` without checking convexity.
    pub fn new(raw: R, kind: CurveKind, center: Vec2) -> Result<Self> {
        let mut cum = Vec::with_capacity(PANELS + 1);
        let mut inv_speed = Vec::with_capacity(PANELS + 1);
        cum.push(0.0);
        let h = 1.0 / PANELS as f64;
        let speed = |u: f64| raw.speed(u);
        for j in 0..PANELS {
            let a = j as f64 * h;
            let s = speed(a);
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "curve parameter is singular at u = {a}"
                )));
            }
            inv_speed.push(1.0 / s);
            let prev = cum[j];
            cum.push(prev + gauss8(a, a + h, speed));
        }
        inv_speed.push(inv_speed[0]);
        let length = cum[PANELS];
        let mut out = ArcLengthCurve {
            raw,
            kind,
            center,
            length,
            cum,
            inv_speed,
            strictly_convex: false,
        };
        out.strictly_convex = (0..4096).all(|i| {
            let p = out.raw.eval(i as f64 / 4096.0);
            p.d1.cross(p.d2) > 0.0
        });
        Ok(out)
    }

    /// Length of the raw curve before rescaling.
    pub fn raw_length(&self) -> f64 {
        self.length
    }

    pub fn raw(&self) -> &R {
        &self.raw
    }

    /// Raw parameter of the point at normalized arc length `q ∈ [0, 1)`.
    pub fn param_of(&self, q: f64) -> f64 {
        let target = q * self.length;
        let h = 1.0 / PANELS as f64;
        let j = locate(&self.cum, target);
        let u0 = j as f64 * h;
        let mut u = hermite(
            self.cum[j],
            self.cum[j + 1],
            u0,
            u0 + h,
            self.inv_speed[j],
            self.inv_speed[j + 1],
            target,
        );
        for _ in 0..6 {
            let arc = self.cum[j] + gauss8(u0, u, |v| self.raw.speed(v));
            let step = (arc - target) / self.raw.speed(u);
            u -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        u
    }
}

impl<R: RawCurve> CurveRepr for ArcLengthCurve<R> {
    fn kind(&self) -> CurveKind {
        self.kind
    }

    fn frame(&self, q: f64) -> Frame {
        let p = self.raw.eval(self.param_of(q));
        let speed = p.d1.norm();
        Frame {
            position: self.center + (p.pos - self.center) / self.length,
            tangent: p.d1 / speed,
            curvature: p.d1.cross(p.d2) / (speed * speed * speed) * self.length,
        }
    }

    fn strictly_convex(&self) -> bool {
        self.strictly_convex
    }
}

/// Real trigonometric polynomial `c0 + Σ a_k cos 2πku + b_k sin 2πku`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigSeries {
    pub c0: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl TrigSeries {
    /// Interpolates `n` uniform samples on `[0, 1)`; the Nyquist mode is dropped and
    /// trailing modes below `1e-15` of the largest are truncated.
    pub fn interpolate(samples: &[f64]) -> Self {
        let n = samples.len();
        assert!(n >= 3, "need at least three samples");
        let mut buf: Vec<Complex<f64>> = samples.iter().map(|&x| Complex::new(x, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let inv = 1.0 / n as f64;
        let kmax = (n - 1) / 2;
        let mut a: Vec<f64> = (1..=kmax).map(|k| 2.0 * buf[k].re * inv).collect();
        let mut b: Vec<f64> = (1..=kmax).map(|k| -2.0 * buf[k].im * inv).collect();
        let scale = a
            .iter()
            .chain(&b)
            .fold(buf[0].re.abs() * inv, |m, c| m.max(c.abs()));
        let keep = (0..kmax)
            .rev()
            .find(|&k| a[k].abs().max(b[k].abs()) > 1e-15 * scale)
            .map_or(0, |k| k + 1);
        a.truncate(keep);
        b.truncate(keep);
        TrigSeries {
            c0: buf[0].re * inv,
            a,
            b,
        }
    }

    /// Value and first two derivatives in `u`.
    #[inline]
    pub fn eval(&self, u: f64) -> (f64, f64, f64) {
        let (s1, c1) = (TAU * u).sin_cos();
        let (mut ck, mut sk) = (c1, s1);
        let (mut f, mut df, mut ddf) = (self.c0, 0.0, 0.0);
        for (k, (a, b)) in self.a.iter().zip(&self.b).enumerate() {
            let w = TAU * (k + 1) as f64;
            f += a * ck + b * sk;
            df += w * (b * ck - a * sk);
            ddf -= w * w * (a * ck + b * sk);
            let next = ck * c1 - sk * s1;
            sk = sk * c1 + ck * s1;
            ck = next;
        }
        (f, df, ddf)
    }

    pub fn value(&self, u: f64) -> f64 {
        self.eval(u).0
    }
}

/// Closed curve through uniformly parametrized sample points, by trigonometric interpolation.
#[derive(Clone, Debug)]
pub struct TrigCurve {
    x: TrigSeries,
    y: TrigSeries,
}

impl TrigCurve {
    pub fn from_samples(points: &[Vec2]) -> Self {
        let xs: Vec<f64> = points.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.y).collect();
        TrigCurve {
            x: TrigSeries::interpolate(&xs),
            y: TrigSeries::interpolate(&ys),
        }
    }
}

impl RawCurve for TrigCurve {
    fn eval(&self, u: f64) -> RawPoint {
        let (x, dx, ddx) = self.x.eval(u);
        let (y, dy, ddy) = self.y.eval(u);
        RawPoint {
            pos: Vec2::new(x, y),
            d1: Vec2::new(dx, dy),
            d2: Vec2::new(ddx, ddy),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{c0_distance, disc_table, polyline_length, TableCurve};
    use std::sync::Arc;

    /// Ellipse with semi-axes (2, 1) in the angle parameter.
    #[derive(Debug)]
    struct Ellipse;

    impl RawCurve for Ellipse {
        fn eval(&self, u: f64) -> RawPoint {
            let (s, c) = (TAU * u).sin_cos();
            RawPoint {
                pos: Vec2::new(2.0 * c, s),
                d1: Vec2::new(-2.0 * s, c) * TAU,
                d2: Vec2::new(-2.0 * c, -s) * (TAU * TAU),
            }
        }
    }

    #[test]
    fn ellipse_reparametrization() {
        let curve = ArcLengthCurve::new(Ellipse, CurveKind::Reparametrized, Vec2::ZERO).unwrap();
        // Ramanujan's second approximation is accurate to ~1e-10 at this eccentricity.
        let (a, b) = (2.0f64, 1.0f64);
        let h = ((a - b) / (a + b)).powi(2);
        let ramanujan = std::f64::consts::PI * (a + b) * (1.0 + 3.0 * h / (10.0 + (4.0 - 3.0 * h).sqrt()));
        assert!((curve.raw_length() - ramanujan).abs() < 1e-6);
        assert!(curve.strictly_convex());
        let t = TableCurve::from_repr(Arc::new(curve));
        assert!((polyline_length(&t, 1 << 15) - 1.0).abs() < 1e-8);
        for i in 0..256 {
            let q = i as f64 / 256.0;
            let h = 1e-6;
            let fd = (t.position(q + h) - t.position(q - h)) / (2.0 * h);
            assert!(fd.dist(t.tangent(q)) < 1e-7);
        }
    }

    #[test]
    fn trig_series_round_trip() {
        let f = |u: f64| 0.3 + (TAU * u).cos() - 0.25 * (3.0 * TAU * u).sin();
        let samples: Vec<f64> = (0..64).map(|i| f(i as f64 / 64.0)).collect();
        let s = TrigSeries::interpolate(&samples);
        assert_eq!(s.a.len(), 3);
        for i in 0..100 {
            let u = i as f64 * 0.0137;
            let (v, d, _) = s.eval(u);
            assert!((v - f(u)).abs() < 1e-13);
            let exact_d = -TAU * (TAU * u).sin() - 0.75 * TAU * (3.0 * TAU * u).cos();
            assert!((d - exact_d).abs() < 1e-11);
        }
    }

    #[test]
    fn trig_curve_recovers_disc() {
        let d = disc_table();
        let pts: Vec<Vec2> = (0..128).map(|i| d.position(i as f64 / 128.0)).collect();
        let curve =
            ArcLengthCurve::new(TrigCurve::from_samples(&pts), CurveKind::ReconstructedSamples, Vec2::ZERO)
                .unwrap();
        let t = TableCurve::from_repr(Arc::new(curve));
        assert!(c0_distance(&d, &t) < 1e-12);
    }
}

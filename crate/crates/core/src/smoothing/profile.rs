use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{gauss8, hermite, locate};

const MOLLIFIER_PANELS: usize = 4096;

/// Unnormalized bump `exp(-1 / (1 - u²))` on `(-1, 1)`.
#[inline]
fn bump(u: f64) -> f64 {
    let r = 1.0 - u * u;
    if r <= 0.0 {
        0.0
    } else {
        (-1.0 / r).exp()
    }
}

/// Tables of `Φ(t) = ∫_{-1}^t ρ` and `M(t) = ∫_{-1}^t uρ(u) du` on `[0, 1]`,
/// for the unit-mass mollifier `ρ = bump / ∫ bump`.
struct MollifierTables {
    norm: f64,
    t: Vec<f64>,
    cdf: Vec<f64>,
    moment: Vec<f64>,
}

fn tables() -> &'static MollifierTables {
    static TABLES: OnceLock<MollifierTables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let n = MOLLIFIER_PANELS;
        let h = 1.0 / n as f64;
        let t: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
        let mut mass = vec![0.0; n + 1];
        let mut first = vec![0.0; n + 1];
        for i in 0..n {
            mass[i + 1] = mass[i] + gauss8(t[i], t[i + 1], bump);
            first[i + 1] = first[i] + gauss8(t[i], t[i + 1], |u| u * bump(u));
        }
        let half_mass = mass[n];
        let norm = 1.0 / (2.0 * half_mass);
        let m0 = first[n] * norm;
        MollifierTables {
            norm,
            cdf: mass.iter().map(|m| 0.5 + m * norm).collect(),
            moment: first.iter().map(|m| m * norm - m0).collect(),
            t,
        }
    })
}

/// The mollifier density `ρ(u)`.
pub fn mollifier(u: f64) -> f64 {
    tables().norm * bump(u)
}

/// `(Φ(t), M(t))`, with `Φ(1) = 1` and `M(±1) = 0` exactly.
fn cdf_and_moment(t: f64) -> (f64, f64) {
    let tab = tables();
    let a = t.abs();
    if a >= 1.0 {
        return (if t > 0.0 { 1.0 } else { 0.0 }, 0.0);
    }
    let j = locate(&tab.t, a);
    let (t0, t1) = (tab.t[j], tab.t[j + 1]);
    let (r0, r1) = (mollifier(t0), mollifier(t1));
    let phi = hermite(t0, t1, tab.cdf[j], tab.cdf[j + 1], r0, r1, a);
    let m = hermite(t0, t1, tab.moment[j], tab.moment[j + 1], t0 * r0, t1 * r1, a);
    if t >= 0.0 {
        (phi, m)
    } else {
        (1.0 - phi, m)
    }
}

/// First absolute moment `m₀ = ∫ |u| ρ(u) du`.
pub fn first_absolute_moment() -> f64 {
    -2.0 * cdf_and_moment(0.0).1
}

/// `g(t) = ∫ |t - u| ρ(u) du = t(2Φ(t) - 1) - 2M(t)` with derivatives `2Φ - 1` and `2ρ`.
#[inline]
fn smoothed_abs(t: f64) -> (f64, f64, f64) {
    let (phi, m) = cdf_and_moment(t);
    (t * (2.0 * phi - 1.0) - 2.0 * m, 2.0 * phi - 1.0, 2.0 * mollifier(t))
}

const ARC_PANELS: usize = 1024;

/// A corner profile `f = Σ c_j · (a|·|) * ρ_{w_j}`: smooth, even, convex, equal to `a|x|` for `|x| ≥ max w_j`.
#[derive(Clone, Debug, Serialize)]
pub struct CornerProfile {
    slope: f64,
    /// `(weight, width)` pairs with weights summing to 1.
    parts: Vec<(f64, f64)>,
    #[serde(skip)]
    arc: Vec<f64>,
}

/// `(a|·|) * ρ_w` with the standard bump mollifier of half-width `w`.
pub fn make_profile(a: f64, w: f64) -> Result<CornerProfile> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::InvalidInput(format!("corner slope must be positive, got {a}")));
    }
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::InvalidWidth {
            width: w,
            reason: "width must be positive".into(),
        });
    }
    Ok(CornerProfile::from_parts(a, vec![(1.0, w)]))
}

impl CornerProfile {
    fn from_parts(slope: f64, parts: Vec<(f64, f64)>) -> Self {
        let mut p = CornerProfile {
            slope,
            parts,
            arc: Vec::new(),
        };
        let w = p.width();
        let h = 2.0 * w / ARC_PANELS as f64;
        let mut arc = Vec::with_capacity(ARC_PANELS + 1);
        arc.push(0.0);
        for j in 0..ARC_PANELS {
            let x0 = -w + j as f64 * h;
            let prev = arc[j];
            arc.push(prev + gauss8(x0, x0 + h, |x| p.speed(x)));
        }
        p.arc = arc;
        p
    }

    /// `(1 - t)·g + t·f` for two profiles of the same slope.
    pub fn blend(g: &CornerProfile, f: &CornerProfile, t: f64) -> Result<CornerProfile> {
        if (g.slope - f.slope).abs() > 1e-12 * g.slope.max(f.slope) {
            return Err(Error::InvalidInput("blended profiles need the same slope".into()));
        }
        let mut parts: Vec<(f64, f64)> = Vec::new();
        for &(c, w) in &g.parts {
            parts.push(((1.0 - t) * c, w));
        }
        for &(c, w) in &f.parts {
            parts.push((t * c, w));
        }
        Ok(CornerProfile::from_parts(g.slope, parts))
    }

    /// Same slope and the same mollifier mixture.
    pub fn same_shape(&self, other: &CornerProfile) -> bool {
        self.slope == other.slope && self.parts == other.parts
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    /// Half-width of the region where the profile differs from `a|x|`.
    pub fn width(&self) -> f64 {
        self.parts.iter().map(|p| p.1).fold(0.0, f64::max)
    }

    /// `(f, f', f'')` at `x`.
    #[inline]
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let mut out = (0.0, 0.0, 0.0);
        for &(c, w) in &self.parts {
            if c == 0.0 {
                continue;
            }
            let (g, dg, ddg) = smoothed_abs(x / w);
            out.0 += c * self.slope * w * g;
            out.1 += c * self.slope * dg;
            out.2 += c * self.slope * ddg / w;
        }
        out
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    #[inline]
    fn speed(&self, x: f64) -> f64 {
        let d = self.eval(x).1;
        (1.0 + d * d).sqrt()
    }

    /// Length of the graph of `f` over `[-W, W]`.
    pub fn arc_length(&self) -> f64 {
        self.arc[ARC_PANELS]
    }

    /// `δ = 2W√(1 + a²) - arc_length`: the length lost by rounding the corner.
    pub fn length_defect(&self) -> f64 {
        2.0 * self.width() * (1.0 + self.slope * self.slope).sqrt() - self.arc_length()
    }

    /// Abscissa of the graph point at arc length `l ∈ [0, arc_length]` from `x = -W`.
    pub fn x_of_arc(&self, l: f64) -> f64 {
        let w = self.width();
        let h = 2.0 * w / ARC_PANELS as f64;
        let j = locate(&self.arc, l);
        let x0 = -w + j as f64 * h;
        let mut x = hermite(
            self.arc[j],
            self.arc[j + 1],
            x0,
            x0 + h,
            1.0 / self.speed(x0),
            1.0 / self.speed(x0 + h),
            l,
        );
        for _ in 0..6 {
            let step = (self.arc[j] + gauss8(x0, x, |v| self.speed(v)) - l) / self.speed(x);
            x -= step;
            if step.abs() < 1e-16 * w.max(1e-300) {
                break;
            }
        }
        x
    }

    /// Whether `self ≥ other` at `n` points of `[-W, W]` (the larger width).
    pub fn dominates(&self, other: &CornerProfile, n: usize) -> bool {
        let w = self.width().max(other.width());
        (0..=n).all(|i| {
            let x = -w + 2.0 * w * i as f64 / n as f64;
            self.value(x) >= other.value(x) - 1e-15
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive;

    #[test]
    fn mollifier_has_unit_mass() {
        let mass = adaptive(-1.0, 1.0, 1e-14, &mollifier);
        assert!((mass - 1.0).abs() < 1e-12);
        let m0 = adaptive(-1.0, 1.0, 1e-14, &|u: f64| u.abs() * mollifier(u));
        assert!((m0 - first_absolute_moment()).abs() < 1e-12);
    }

    #[test]
    fn square_corner_profile() {
        let f = make_profile(1.0, 0.01).unwrap();
        assert_eq!(f.value(0.02), 0.02);
        assert_eq!(f.value(-0.01), 0.01);
        assert!((f.value(0.01) - 0.01).abs() < 1e-15);
        let f0 = f.value(0.0);
        assert!(f0 > 0.0);
        assert!((f0 - 0.01 * first_absolute_moment()).abs() < 1e-15);
        for i in 0..=400 {
            let x = -0.012 + 0.024 * i as f64 / 400.0;
            assert!(f.eval(x).2 >= 0.0);
        }
        // δ against an independent adaptive quadrature of the graph length.
        let arc = adaptive(-0.01, 0.01, 1e-15, &|x: f64| {
            let d = f.eval(x).1;
            (1.0 + d * d).sqrt()
        });
        assert!((arc - f.arc_length()).abs() < 1e-13);
        assert!(f.length_defect() > 0.0);
    }

    #[test]
    fn profile_matches_direct_convolution() {
        let (a, w) = (0.7, 0.3);
        let f = make_profile(a, w).unwrap();
        for &x in &[-0.25, -0.1, 0.0, 0.05, 0.2, 0.29] {
            let direct = adaptive(-1.0, 1.0, 1e-14, &|u: f64| a * (x - w * u).abs() * mollifier(u));
            assert!((f.value(x) - direct).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn derivative_consistency() {
        let f = make_profile(1.3, 0.05).unwrap();
        let h = 1e-6;
        for i in 0..50 {
            let x = -0.05 + 0.1 * i as f64 / 50.0;
            let (_, d, dd) = f.eval(x);
            assert!(((f.value(x + h) - f.value(x - h)) / (2.0 * h) - d).abs() < 1e-8);
            assert!(((f.eval(x + h).1 - f.eval(x - h).1) / (2.0 * h) - dd).abs() < 1e-5);
        }
    }

    #[test]
    fn arc_inversion() {
        let f = make_profile(1.0, 0.01).unwrap();
        let total = f.arc_length();
        assert!((f.x_of_arc(0.0) + 0.01).abs() < 1e-15);
        assert!((f.x_of_arc(total) - 0.01).abs() < 1e-14);
        for i in 1..100 {
            let l = total * i as f64 / 100.0;
            let x = f.x_of_arc(l);
            let back = adaptive(-0.01, x, 1e-16, &|v: f64| f.speed(v));
            assert!((back - l).abs() < 1e-14);
        }
    }

    #[test]
    fn wider_profile_dominates() {
        let wide = make_profile(1.0, 0.01).unwrap();
        let narrow = make_profile(1.0, 0.005).unwrap();
        assert!(wide.dominates(&narrow, 1000));
        assert!(!narrow.dominates(&wide, 1000));
        let mid = CornerProfile::blend(&narrow, &wide, 0.5).unwrap();
        assert!(mid.dominates(&narrow, 1000) && wide.dominates(&mid, 1000));
        assert!(make_profile(1.0, 0.0).is_err());
    }
}

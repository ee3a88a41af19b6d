//! Billiard tables as closed, counterclockwise, arc-length parametrized curves
//! of total length 1, with the marked point at parameter 0.
//!
//! Every representation implements [`CurveRepr`]; [`TableCurve`] wraps one
//! behind an `Arc` together with a rotation of the marking and a rigid motion,
//! so tables are cheap to clone and immutable after construction.

mod fourier;
mod reparam;

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

pub use fourier::{random_fourier_spec, FourierSupportSpec, FourierTable, SupportEval};
pub use reparam::{ArcLengthCurve, RawCurve, RawPoint, TrigCurve, TrigSeries};

use crate::error::Result;
use crate::geom::{wrap01, Isometry, Vec2};
use crate::quadrature::golden_max;

/// Radius-of-curvature floor separating strictly convex tables from merely convex ones.
pub const CURVATURE_FLOOR: f64 = 1e-8;

/// Position, unit tangent and signed curvature at one boundary parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub position: Vec2,
    pub tangent: Vec2,
    pub curvature: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Disc,
    FourierSupport,
    SmoothedPolygon,
    ReconstructedSamples,
    /// Curvature-blended lift of a smoothed polygon.
    Lifted,
    /// Arc-length reparametrization of a generic parametric curve.
    Reparametrized,
}

/// A concrete parametrization of a table boundary.
///
/// `frame` receives `q` in `[0, 1)` and must return the arc-length
/// parametrized point, so `tangent` is a unit vector.
pub trait CurveRepr: Send + Sync + fmt::Debug {
    fn kind(&self) -> CurveKind;
    fn frame(&self, q: f64) -> Frame;
    /// Whether the curve claims positive curvature everywhere.
    fn strictly_convex(&self) -> bool;
}

/// A marked billiard table.
#[derive(Clone)]
pub struct TableCurve {
    repr: Arc<dyn CurveRepr>,
    shift: f64,
    iso: Isometry,
}

impl fmt::Debug for TableCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TableCurve")
            .field("kind", &self.repr.kind())
            .field("mark_shift", &self.shift)
            .field("iso", &self.iso)
            .finish()
    }
}

impl TableCurve {
    pub fn from_repr(repr: Arc<dyn CurveRepr>) -> Self {
        TableCurve {
            repr,
            shift: 0.0,
            iso: Isometry::IDENTITY,
        }
    }

    pub fn kind(&self) -> CurveKind {
        self.repr.kind()
    }

    pub fn repr(&self) -> &Arc<dyn CurveRepr> {
        &self.repr
    }

    pub fn is_strictly_convex(&self) -> bool {
        self.repr.strictly_convex()
    }

    #[inline]
    pub fn frame(&self, q: f64) -> Frame {
        let f = self.repr.frame(wrap01(q + self.shift));
        if self.iso.is_identity() {
            f
        } else {
            Frame {
                position: self.iso.apply(f.position),
                tangent: self.iso.apply_vector(f.tangent),
                curvature: f.curvature,
            }
        }
    }

    #[inline]
    pub fn position(&self, q: f64) -> Vec2 {
        self.frame(q).position
    }

    #[inline]
    pub fn tangent(&self, q: f64) -> Vec2 {
        self.frame(q).tangent
    }

    #[inline]
    pub fn curvature(&self, q: f64) -> f64 {
        self.frame(q).curvature
    }

    pub fn marked_point(&self) -> Vec2 {
        self.position(0.0)
    }

    /// The same body with the marked point moved counterclockwise by `r`: `q -> γ(q + r)`.
    pub fn with_mark_shift(&self, r: f64) -> Self {
        TableCurve {
            repr: Arc::clone(&self.repr),
            shift: wrap01(self.shift + r),
            iso: self.iso,
        }
    }

    /// `g ∘ γ` for a rigid motion `g`.
    pub fn transformed(&self, g: Isometry) -> Self {
        TableCurve {
            repr: Arc::clone(&self.repr),
            shift: self.shift,
            iso: g.compose(&self.iso),
        }
    }

    pub fn translated(&self, v: Vec2) -> Self {
        self.transformed(Isometry::translation(v))
    }

    /// Area centroid of the enclosed body, by the boundary (Green) formula on a fine grid.
    pub fn centroid(&self) -> Vec2 {
        let n = 4096;
        let pts: Vec<Vec2> = (0..n).map(|i| self.position(i as f64 / n as f64)).collect();
        let mut area = 0.0;
        let mut c = Vec2::ZERO;
        for i in 0..n {
            let a = pts[i];
            let b = pts[(i + 1) % n];
            let w = a.cross(b);
            area += w;
            c += (a + b) * w;
        }
        c / (3.0 * area)
    }
}

#[derive(Debug)]
struct DiscRepr {
    radius: f64,
}

impl CurveRepr for DiscRepr {
    fn kind(&self) -> CurveKind {
        CurveKind::Disc
    }

    fn frame(&self, q: f64) -> Frame {
        let (s, c) = (TAU * q).sin_cos();
        Frame {
            position: Vec2::new(c, s) * self.radius,
            tangent: Vec2::new(-s, c),
            curvature: 1.0 / self.radius,
        }
    }

    fn strictly_convex(&self) -> bool {
        true
    }
}

/// The unit-perimeter disc centered at the origin, marked at `(1/2π, 0)`.
pub fn disc_table() -> TableCurve {
    TableCurve::from_repr(Arc::new(DiscRepr {
        radius: 1.0 / TAU,
    }))
}

/// Builds the table whose support function is given by `spec`, rescaled to perimeter 1.
pub fn build_fourier_table(spec: &FourierSupportSpec) -> Result<TableCurve> {
    Ok(TableCurve::from_repr(Arc::new(FourierTable::new(spec)?)))
}

/// Grid size used by [`c0_distance`].
pub const C0_GRID: usize = 4096;

/// Maximum over `q` of `|a(q) - b(q)|`, from a 4096-point grid plus one local
/// refinement around the grid maximizer. Never exceeds the true maximum.
pub fn c0_distance(a: &TableCurve, b: &TableCurve) -> f64 {
    c0_distance_with(a, b, C0_GRID)
}

pub fn c0_distance_with(a: &TableCurve, b: &TableCurve, grid: usize) -> f64 {
    let dist = |q: f64| a.position(q).dist(b.position(q));
    let h = 1.0 / grid as f64;
    let (mut best_i, mut best) = (0, f64::NEG_INFINITY);
    for i in 0..grid {
        let d = dist(i as f64 * h);
        if d > best {
            best = d;
            best_i = i;
        }
    }
    let centre = best_i as f64 * h;
    let (_, refined) = golden_max(centre - h, centre + h, 40, dist);
    best.max(refined)
}

/// Checks the arc-length invariants of a table on `n` samples: unit tangents and
/// periodicity. Returns the worst deviations `(tangent, periodicity)`.
pub fn parametrization_defects(t: &TableCurve, n: usize) -> (f64, f64) {
    let mut tangent: f64 = 0.0;
    let mut period: f64 = 0.0;
    for i in 0..n {
        let q = i as f64 / n as f64;
        tangent = tangent.max((t.tangent(q).norm() - 1.0).abs());
        period = period.max(t.position(q).dist(t.position(q + 1.0)));
    }
    (tangent, period)
}

/// Perimeter by polyline summation on `n` points (a check, not a constructor).
pub fn polyline_length(t: &TableCurve, n: usize) -> f64 {
    let pts: Vec<Vec2> = (0..n).map(|i| t.position(i as f64 / n as f64)).collect();
    (0..n).map(|i| pts[i].dist(pts[(i + 1) % n])).sum()
}

/// Radius of the unit-perimeter disc.
pub const DISC_RADIUS: f64 = 1.0 / (2.0 * PI);

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::profile::{make_profile, CornerProfile};
use crate::curves::{CurveKind, CurveRepr, Frame, TableCurve};
use crate::error::{Error, Result};
use crate::geom::{wrap01, Vec2};
use crate::quadrature::adaptive;

/// A convex polygon of perimeter 1, vertices counterclockwise, with the marked point
/// at arc length `mark` from vertex 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolygonSpec {
    pub vertices: Vec<Vec2>,
    pub mark: f64,
}

impl PolygonSpec {
    /// Validates strict convexity, orientation and unit perimeter.
    pub fn new(vertices: Vec<Vec2>, mark: f64) -> Result<Self> {
        let p = PolygonSpec { vertices, mark };
        p.check_shape()?;
        let per = p.perimeter();
        if (per - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidPolygon(format!("perimeter is {per}, expected 1")));
        }
        if !(0.0..1.0).contains(&mark) {
            return Err(Error::InvalidPolygon(format!("mark {mark} is outside [0, 1)")));
        }
        Ok(p)
    }

    /// Rescales about the area centroid to perimeter 1; `mark` is a fraction of the perimeter.
    pub fn normalized(vertices: Vec<Vec2>, mark: f64) -> Result<Self> {
        let raw = PolygonSpec {
            vertices,
            mark: wrap01(mark),
        };
        raw.check_shape()?;
        let c = raw.area_centroid();
        let k = 1.0 / raw.perimeter();
        let vertices = raw.vertices.iter().map(|&v| c + (v - c) * k).collect();
        PolygonSpec::new(vertices, raw.mark)
    }

    /// Square of side 1/4 centred at the origin, marked at the midpoint of the bottom edge.
    pub fn unit_square() -> Self {
        let h = 0.125;
        PolygonSpec {
            vertices: vec![
                Vec2::new(-h, -h),
                Vec2::new(h, -h),
                Vec2::new(h, h),
                Vec2::new(-h, h),
            ],
            mark: 0.125,
        }
    }

    /// Regular `n`-gon of perimeter 1 centred at the origin, marked at the middle of edge 0.
    pub fn regular(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidPolygon(format!("{n} vertices")));
        }
        let r = 1.0 / (2.0 * n as f64 * (PI / n as f64).sin());
        let vertices = (0..n)
            .map(|i| Vec2::from_angle(-PI / 2.0 - PI / n as f64 + TAU * i as f64 / n as f64) * r)
            .collect();
        PolygonSpec::new(vertices, 0.5 / n as f64)
    }

    fn check_shape(&self) -> Result<()> {
        let n = self.vertices.len();
        if n < 3 {
            return Err(Error::InvalidPolygon(format!("{n} vertices")));
        }
        if self.vertices.iter().any(|v| !(v.x.is_finite() && v.y.is_finite())) {
            return Err(Error::InvalidPolygon("non-finite vertex".into()));
        }
        for i in 0..n {
            let a = self.edge(i);
            let b = self.edge((i + 1) % n);
            if !(a.cross(b) > 0.0) {
                return Err(Error::InvalidPolygon(format!(
                    "vertex {} is not a strictly convex counterclockwise corner",
                    (i + 1) % n
                )));
            }
        }
        // Total turning 2π rules out self-overlapping star shapes.
        let turning: f64 = (0..n)
            .map(|i| self.edge(i).cross(self.edge((i + 1) % n)).atan2(self.edge(i).dot(self.edge((i + 1) % n))))
            .sum();
        if (turning - TAU).abs() > 1e-9 {
            return Err(Error::InvalidPolygon("vertices wind more than once".into()));
        }
        Ok(())
    }

    fn edge(&self, i: usize) -> Vec2 {
        let n = self.vertices.len();
        self.vertices[(i + 1) % n] - self.vertices[i]
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        (0..self.vertices.len()).map(|i| self.edge(i).norm()).collect()
    }

    pub fn perimeter(&self) -> f64 {
        self.edge_lengths().iter().sum()
    }

    pub fn area_centroid(&self) -> Vec2 {
        let n = self.vertices.len();
        let (mut area, mut c) = (0.0, Vec2::ZERO);
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let w = a.cross(b);
            area += w;
            c += (a + b) * w;
        }
        c / (3.0 * area)
    }

    /// Slope `a = tan(φ/2)` of each corner, `φ` the exterior angle.
    pub fn corner_slopes(&self) -> Vec<f64> {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let e_in = self.edge((i + n - 1) % n);
                let e_out = self.edge(i);
                (0.5 * e_in.cross(e_out).atan2(e_in.dot(e_out))).tan()
            })
            .collect()
    }

    /// `min(0.01, shortest edge / 4)`.
    pub fn default_width(&self) -> f64 {
        let shortest = self.edge_lengths().into_iter().fold(f64::INFINITY, f64::min);
        (shortest / 4.0).min(0.01)
    }

    /// The same polygon with the mark moved forward by `tau` (fraction of the perimeter).
    pub fn with_mark_shift(&self, tau: f64) -> Self {
        PolygonSpec {
            vertices: self.vertices.clone(),
            mark: wrap01(self.mark + tau),
        }
    }
}

#[derive(Debug)]
struct Corner {
    vertex: Vec2,
    ex: Vec2,
    ey: Vec2,
    /// Lifted direction angle of `ex`.
    angle: f64,
    /// Distance from the vertex along either edge to the end of the rounding at `s = 1`.
    cut: f64,
    profile: CornerProfile,
}

#[derive(Debug)]
struct Edge {
    start: Vec2,
    dir: Vec2,
    len: f64,
    angle: f64,
}

#[derive(Debug)]
struct FamilyData {
    polygon: PolygonSpec,
    corners: Vec<Corner>,
    edges: Vec<Edge>,
    deltas: Vec<f64>,
    perimeter: f64,
    center: Vec2,
    mark_edge: usize,
    mark_offset: f64,
}

/// The family `γ_s` of corner roundings of a polygon and its normalization `γ̃_s = λ(s)γ_s`.
#[derive(Clone, Debug)]
pub struct SmoothingFamily {
    data: Arc<FamilyData>,
}

/// Builds the family from one profile per corner; the profile slopes must match the corners.
pub fn family_from_polygon(p: &PolygonSpec, profiles: Vec<CornerProfile>) -> Result<SmoothingFamily> {
    let p = PolygonSpec::new(p.vertices.clone(), p.mark)?;
    let n = p.vertices.len();
    if profiles.len() != n {
        return Err(Error::InvalidInput(format!(
            "{} profiles for {n} corners",
            profiles.len()
        )));
    }
    let lens = p.edge_lengths();
    let slopes = p.corner_slopes();
    let mut edges: Vec<Edge> = Vec::with_capacity(n);
    let mut angle = p.edge(0).angle();
    for i in 0..n {
        if i > 0 {
            let (a, b) = (p.edge(i - 1), p.edge(i));
            angle += a.cross(b).atan2(a.dot(b));
        }
        edges.push(Edge {
            start: p.vertices[i],
            dir: p.edge(i) / lens[i],
            len: lens[i],
            angle,
        });
    }
    let mut corners = Vec::with_capacity(n);
    for (i, profile) in profiles.into_iter().enumerate() {
        let a = slopes[i];
        if (profile.slope() - a).abs() > 1e-9 * a.max(1.0) {
            return Err(Error::InvalidInput(format!(
                "profile slope {} does not match corner {i} slope {a}",
                profile.slope()
            )));
        }
        let e_in = &edges[(i + n - 1) % n];
        let e_out = &edges[i];
        let w = profile.width();
        let cut = w * (1.0 + a * a).sqrt();
        let limit = 0.5 * e_in.len.min(e_out.len);
        if cut > limit {
            return Err(Error::InvalidWidth {
                width: w,
                reason: format!(
                    "corner {i} rounding reaches {cut} along its edges, more than half the shortest adjacent edge ({limit})"
                ),
            });
        }
        let ex = (e_in.dir + e_out.dir).normalized();
        let in_angle = if i == 0 { e_in.angle - TAU } else { e_in.angle };
        let turn = e_out.angle - in_angle;
        corners.push(Corner {
            vertex: p.vertices[i],
            ex,
            ey: ex.perp(),
            angle: in_angle + 0.5 * turn,
            cut,
            profile,
        });
    }
    let deltas: Vec<f64> = corners
        .iter()
        .map(|c| 2.0 * c.cut - c.profile.arc_length())
        .collect();
    // Locate the mark on its edge.
    let mut rest = p.mark;
    let mut mark_edge = 0;
    while mark_edge < n - 1 && rest >= lens[mark_edge] {
        rest -= lens[mark_edge];
        mark_edge += 1;
    }
    let mark_offset = rest.min(lens[mark_edge]);
    let next = (mark_edge + 1) % n;
    if mark_offset < corners[mark_edge].cut {
        return Err(Error::MarkInCorner {
            mark: p.mark,
            corner: mark_edge,
        });
    }
    if lens[mark_edge] - mark_offset < corners[next].cut {
        return Err(Error::MarkInCorner {
            mark: p.mark,
            corner: next,
        });
    }
    let center = p.area_centroid();
    Ok(SmoothingFamily {
        data: Arc::new(FamilyData {
            perimeter: lens.iter().sum(),
            polygon: p,
            corners,
            edges,
            deltas,
            center,
            mark_edge,
            mark_offset,
        }),
    })
}

/// Family with the mollifier profile of width `w` at every corner.
pub fn family_with_width(p: &PolygonSpec, w: f64) -> Result<SmoothingFamily> {
    let profiles = p
        .corner_slopes()
        .into_iter()
        .map(|a| make_profile(a, w))
        .collect::<Result<Vec<_>>>()?;
    family_from_polygon(p, profiles)
}

impl SmoothingFamily {
    pub fn polygon(&self) -> &PolygonSpec {
        &self.data.polygon
    }

    pub fn profiles(&self) -> Vec<CornerProfile> {
        self.data.corners.iter().map(|c| c.profile.clone()).collect()
    }

    /// Per-corner length defects `δ_i`.
    pub fn deltas(&self) -> &[f64] {
        &self.data.deltas
    }

    pub fn sum_delta(&self) -> f64 {
        self.data.deltas.iter().sum()
    }

    /// `L_∂K`, the polygon perimeter.
    pub fn polygon_length(&self) -> f64 {
        self.data.perimeter
    }

    /// `L(s) = L_∂K - s·Σδ_i`.
    pub fn length(&self, s: f64) -> f64 {
        self.data.perimeter - s * self.sum_delta()
    }

    /// `λ(s) = 1 / L(s)`.
    pub fn lambda(&self, s: f64) -> f64 {
        1.0 / self.length(s)
    }

    /// Homothety center (the polygon's area centroid).
    pub fn center(&self) -> Vec2 {
        self.data.center
    }

    /// Length of `γ_s` summed piece by piece, each rounded arc by adaptive quadrature of
    /// its scaled graph (independent of the tabulated arc lengths).
    pub fn length_by_quadrature(&self, s: f64) -> f64 {
        let d = &self.data;
        let n = d.corners.len();
        let mut total = 0.0;
        for i in 0..n {
            let c = &d.corners[i];
            total += d.edges[i].len - s * (c.cut + d.corners[(i + 1) % n].cut);
            if s > 0.0 {
                let w = c.profile.width();
                total += adaptive(-s * w, s * w, 1e-15, &|x: f64| {
                    let df = c.profile.eval(x / s).1;
                    (1.0 + df * df).sqrt()
                });
            }
        }
        total
    }

    /// `γ_s` in the constant-speed parameter (speed `L(s)`).
    pub fn curve(&self, s: f64) -> SmoothedCurve {
        SmoothedCurve::new(Arc::clone(&self.data), s)
    }

    /// `γ̃_s` as a table (length 1, not strictly convex).
    pub fn table(&self, s: f64) -> TableCurve {
        TableCurve::from_repr(Arc::new(self.curve(s)))
    }

    /// `γ_s(q)` before normalization.
    pub fn raw_position(&self, s: f64, q: f64) -> Vec2 {
        self.curve(s).raw_frame(q).position
    }

    /// Distance from each vertex to the end of its rounding, at scale `s`.
    pub fn corner_cut(&self, i: usize, s: f64) -> f64 {
        s * self.data.corners[i].cut
    }

    /// Whether `x` lies on the polygon boundary outside every corner neighbourhood at scale `s`.
    pub fn on_polygon_away_from_corners(&self, x: Vec2, s: f64, tol: f64) -> bool {
        let d = &self.data;
        let n = d.corners.len();
        d.edges.iter().enumerate().any(|(i, e)| {
            let t = (x - e.start).dot(e.dir);
            let off = (x - e.start).cross(e.dir).abs();
            off <= tol && t >= s * d.corners[i].cut - tol && t <= e.len - s * d.corners[(i + 1) % n].cut + tol
        })
    }

    /// Edge-point bound `2L·Σδ / (L - Σδ)` on `‖∂γ_s/∂s‖`.
    pub fn edge_speed_bound(&self) -> f64 {
        let (l, sd) = (self.data.perimeter, self.sum_delta());
        2.0 * l * sd / (l - sd)
    }

    /// Uniform bound on `max_q ‖∂γ_s/∂s‖` over `s ∈ (0, 1]` (corner and edge estimates).
    pub fn raw_speed_bound(&self) -> f64 {
        let d = &self.data;
        let (l, sd) = (d.perimeter, self.sum_delta());
        let reach = d.corners.iter().map(|c| c.cut).fold(0.0, f64::max);
        let corner = reach + 2.0 * l * (sd + l) / (l - sd) + l * l / (l - sd);
        corner.max(self.edge_speed_bound())
    }

    /// Uniform bound on `max_q ‖∂γ̃_s/∂s‖` from `∂γ̃ = λ'(γ - O) + λ∂γ`.
    pub fn speed_bound(&self) -> f64 {
        let d = &self.data;
        let l_min = self.length(1.0);
        let radius = d
            .polygon
            .vertices
            .iter()
            .map(|v| v.dist(d.center))
            .fold(0.0, f64::max);
        self.sum_delta() / (l_min * l_min) * radius + self.raw_speed_bound() / l_min
    }
}

#[derive(Clone, Copy, Debug)]
enum Piece {
    Corner(usize),
    Edge(usize),
}

/// One member `γ_s` of a smoothing family, laid out as alternating rounded corners and edges.
#[derive(Debug)]
pub struct SmoothedCurve {
    data: Arc<FamilyData>,
    s: f64,
    starts: Vec<f64>,
    pieces: Vec<Piece>,
    length: f64,
    sigma_mark: f64,
}

impl SmoothedCurve {
    fn new(data: Arc<FamilyData>, s: f64) -> Self {
        let n = data.corners.len();
        let mut starts = Vec::with_capacity(2 * n + 1);
        let mut pieces = Vec::with_capacity(2 * n);
        let mut sigma = 0.0;
        let mut sigma_mark = 0.0;
        for i in 0..n {
            starts.push(sigma);
            pieces.push(Piece::Corner(i));
            sigma += s * data.corners[i].profile.arc_length();
            starts.push(sigma);
            pieces.push(Piece::Edge(i));
            if i == data.mark_edge {
                sigma_mark = sigma + data.mark_offset - s * data.corners[i].cut;
            }
            sigma += data.edges[i].len - s * (data.corners[i].cut + data.corners[(i + 1) % n].cut);
        }
        starts.push(sigma);
        SmoothedCurve {
            data,
            s,
            starts,
            pieces,
            length: sigma,
            sigma_mark,
        }
    }

    pub fn scale(&self) -> f64 {
        self.s
    }

    /// Length of `γ_s` from the piece layout.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Piece index and local arc length for `σ ∈ [0, L)`.
    fn locate(&self, sigma: f64) -> (usize, f64) {
        let k = self.starts[..self.pieces.len()].partition_point(|&x| x <= sigma);
        let k = k.saturating_sub(1);
        (k, sigma - self.starts[k])
    }

    /// Frame of `γ_s` at `σ` (unit speed in `σ`) and its lifted tangent angle.
    fn frame_at(&self, sigma: f64) -> (Frame, f64) {
        let (k, l) = self.locate(sigma);
        match self.pieces[k] {
            Piece::Edge(i) => {
                let e = &self.data.edges[i];
                let pos = e.start + e.dir * (self.s * self.data.corners[i].cut + l);
                (
                    Frame {
                        position: pos,
                        tangent: e.dir,
                        curvature: 0.0,
                    },
                    e.angle,
                )
            }
            Piece::Corner(i) => {
                let c = &self.data.corners[i];
                let x = c.profile.x_of_arc(l / self.s);
                let (f, df, ddf) = c.profile.eval(x);
                let norm = (1.0 + df * df).sqrt();
                (
                    Frame {
                        position: c.vertex + (c.ex * x + c.ey * f) * self.s,
                        tangent: (c.ex + c.ey * df) / norm,
                        curvature: ddf / (norm * norm * norm) / self.s,
                    },
                    c.angle + df.atan(),
                )
            }
        }
    }

    fn sigma_of(&self, q: f64) -> (f64, bool) {
        let mut sigma = self.sigma_mark + wrap01(q) * self.length;
        let wrapped = sigma >= self.length;
        if wrapped {
            sigma -= self.length;
        }
        (sigma.max(0.0), wrapped)
    }

    /// `γ_s(q)` with `‖∂γ_s/∂q‖ = L(s)`, curvature per unit length.
    pub fn raw_frame(&self, q: f64) -> Frame {
        self.frame_at(self.sigma_of(q).0).0
    }

    /// Tangent angle of `γ̃_s(q)`, continuous in `q ∈ [0, 1)` and increasing by `2π` over a period.
    pub fn lifted_angle(&self, q: f64) -> f64 {
        let (sigma, wrapped) = self.sigma_of(q);
        let base = self.frame_at(sigma).1;
        if wrapped {
            base + TAU
        } else {
            base
        }
    }

    /// End points, in `q`, of the pieces of `γ̃_s`, sorted, starting at 0.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .starts
            .iter()
            .map(|&x| wrap01((x - self.sigma_mark) / self.length))
            .collect();
        out.push(0.0);
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        out
    }
}

impl CurveRepr for SmoothedCurve {
    fn kind(&self) -> CurveKind {
        CurveKind::SmoothedPolygon
    }

    fn frame(&self, q: f64) -> Frame {
        let f = self.raw_frame(q);
        let o = self.data.center;
        Frame {
            position: o + (f.position - o) / self.length,
            tangent: f.tangent,
            curvature: f.curvature * self.length,
        }
    }

    fn strictly_convex(&self) -> bool {
        false
    }
}

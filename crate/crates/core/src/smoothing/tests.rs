use super::*;
use crate::billiard::{forward_map, inverse_map, AnnulusPoint};
use crate::curves::c0_distance;
use crate::geom::Vec2;
use crate::homotopy::{bracket_db, LengthOptions};

fn square() -> SmoothingFamily {
    family_with_width(&PolygonSpec::unit_square(), 0.01).unwrap()
}

/// Distance from `x` to the boundary of the polygon.
fn boundary_distance(p: &PolygonSpec, x: Vec2) -> f64 {
    let n = p.vertices.len();
    (0..n)
        .map(|i| {
            let a = p.vertices[i];
            let b = p.vertices[(i + 1) % n];
            let t = ((x - a).dot(b - a) / (b - a).norm_sq()).clamp(0.0, 1.0);
            x.dist(a + (b - a) * t)
        })
        .fold(f64::INFINITY, f64::min)
}

fn richardson_length(t: &TableCurve, n: usize) -> f64 {
    let poly = |m: usize| {
        let pts: Vec<Vec2> = (0..m).map(|i| t.position(i as f64 / m as f64)).collect();
        (0..m).map(|i| pts[i].dist(pts[(i + 1) % m])).sum::<f64>()
    };
    (4.0 * poly(2 * n) - poly(n)) / 3.0
}

#[test]
fn square_corner_slope() {
    let slopes = PolygonSpec::unit_square().corner_slopes();
    for a in slopes {
        assert!((a - 1.0).abs() < 1e-15);
    }
    let hex = PolygonSpec::regular(6).unwrap();
    assert!((hex.perimeter() - 1.0).abs() < 1e-14);
    for a in hex.corner_slopes() {
        assert!((a - (std::f64::consts::PI / 6.0).tan()).abs() < 1e-14);
    }
}

#[test]
fn normalized_table_has_unit_length() {
    let fam = square();
    let t = fam.table(1.0);
    assert!((richardson_length(&t, 1 << 14) - 1.0).abs() < 1e-9);
    assert!(t.position(0.0).dist(Vec2::new(0.0, -0.125) * fam.lambda(1.0)) < 1e-15);
    assert!(!t.is_strictly_convex());
}

#[test]
fn family_coincides_with_polygon_off_corners() {
    let fam = square();
    let p = fam.polygon().clone();
    for &s in &[1.0, 0.5, 0.1] {
        let cut = fam.corner_cut(0, s);
        for i in 0..2000 {
            let x = fam.raw_position(s, i as f64 / 2000.0);
            let near_vertex = p.vertices.iter().any(|v| v.dist(x) < cut * 1.5);
            if !near_vertex {
                assert!(boundary_distance(&p, x) < 1e-12, "s={s} i={i}");
                assert!(fam.on_polygon_away_from_corners(x, s, 1e-12));
            }
        }
    }
}

#[test]
fn length_is_affine_in_scale() {
    let fam = square();
    assert!(fam.sum_delta() > 0.0);
    for &s in &[1.0, 0.5, 0.25] {
        let quad = fam.length_by_quadrature(s);
        assert!((quad - fam.length(s)).abs() < 1e-9, "s={s}");
        assert!((fam.curve(s).length() - fam.length(s)).abs() < 1e-12);
    }
    assert!(fam.lambda(1.0) > fam.lambda(0.5) && fam.lambda(0.5) > fam.lambda(0.0));
    assert_eq!(fam.length(0.0), 1.0);
}

#[test]
fn converges_to_the_polygon() {
    let fam = square();
    let limit = fam.table(0.0);
    let mut prev = f64::INFINITY;
    for k in 0..7 {
        let d = c0_distance(&fam.table(0.5f64.powi(k)), &limit);
        assert!(d < prev, "k={k}: {d} >= {prev}");
        prev = d;
    }
    assert!(prev < 1e-3);
}

#[test]
fn construction_errors() {
    let sq = PolygonSpec::unit_square();
    assert!(matches!(family_with_width(&sq, 0.2), Err(Error::InvalidWidth { .. })));
    assert!(matches!(family_with_width(&sq, -1.0), Err(Error::InvalidWidth { .. })));
    assert!(matches!(
        family_with_width(&sq.with_mark_shift(-0.12), 0.01),
        Err(Error::MarkInCorner { corner: 0, .. })
    ));
    assert!(matches!(
        family_with_width(&sq.with_mark_shift(0.12), 0.01),
        Err(Error::MarkInCorner { corner: 1, .. })
    ));
    let concave = vec![
        Vec2::new(0.0, 0.0),
        Vec2::new(1.0, 0.0),
        Vec2::new(0.5, 0.1),
        Vec2::new(0.5, 1.0),
    ];
    assert!(matches!(PolygonSpec::normalized(concave, 0.1), Err(Error::InvalidPolygon(_))));
    let raw = PolygonSpec::normalized(vec![Vec2::new(0.0, 0.0), Vec2::new(3.0, 0.0), Vec2::new(0.0, 4.0)], 0.1).unwrap();
    assert!((raw.perimeter() - 1.0).abs() < 1e-14);
}

#[test]
fn speed_is_uniformly_bounded() {
    let fam = square();
    let bound = fam.speed_bound();
    for k in 0..=6 {
        let s = 0.5f64.powi(k);
        let v = family_speed(&fam, s);
        assert!(v.is_finite() && v > 0.0);
        assert!(v <= bound, "s={s}: {v} > {bound}");
    }
}

#[test]
fn edge_points_respect_the_edge_bound() {
    let fam = square();
    let bound = fam.edge_speed_bound();
    let h = 1e-5;
    for &s in &[0.9, 0.5, 0.1] {
        let l = fam.length(s);
        for k in 0..4 {
            // Midpoint of edge k: k quarter sides and k rounded corners past the mark.
            let q = k as f64 * (0.25 - s * fam.deltas()[0]) / l;
            let v = (fam.raw_position(s + h, q) - fam.raw_position(s - h, q)) / (2.0 * h);
            let x = fam.raw_position(s, q);
            assert!(fam.on_polygon_away_from_corners(x, s, 1e-12));
            assert!(v.norm() <= bound, "s={s} k={k}: {} > {bound}", v.norm());
        }
        let at_mark = (fam.raw_position(s + h, 0.0) - fam.raw_position(s - h, 0.0)).norm();
        assert!(at_mark < 1e-12);
    }
}

#[test]
fn hexagon_speeds_are_finite() {
    let hex = PolygonSpec::regular(6).unwrap();
    let fam = family_with_width(&hex, hex.default_width()).unwrap();
    for k in 0..6 {
        let v = family_speed(&fam, 0.5f64.powi(k));
        assert!(v.is_finite() && v <= fam.speed_bound());
    }
}

#[test]
fn cauchy_tail_behaviour() {
    let fam = square();
    let full = cauchy_tail(&fam, 1.0, 8).unwrap();
    let half = cauchy_tail(&fam, 0.5, 8).unwrap();
    assert!(full.tail.is_finite());
    assert!(half.tail < full.tail);
    let vmax = full.speeds.iter().cloned().fold(0.0, f64::max);
    assert!(full.tail - half.tail <= vmax * 0.5 + 1e-12);
    let fine = cauchy_tail(&fam, 1.0, 16).unwrap();
    assert!((fine.tail - full.tail).abs() < 1e-3);
    for w in fine.increments.windows(2) {
        assert!(w[1] < w[0]);
    }
}

#[test]
fn restricted_family_brackets() {
    let fam = square();
    let opts = LengthOptions {
        s_nodes: 9,
        q_grid: 512,
    };
    let mut total = 0.0;
    for k in 1..4 {
        let path = SmoothingRestriction::new(&fam, 0.5f64.powi(k + 1), 0.5f64.powi(k)).unwrap();
        let b = bracket_db(&path, &opts).unwrap();
        assert!(b.lower > 0.0 && b.lower <= b.upper * (1.0 + 1e-6));
        total += b.upper;
    }
    assert!(total <= cauchy_tail(&fam, 0.5, 12).unwrap().tail * 1.05);
}

#[test]
fn equal_profiles_have_no_gap() {
    let fam = square();
    assert_eq!(profile_independence_gap(&fam, &fam, 0.25).unwrap(), 0.0);
}

#[test]
fn gap_is_linear_in_scale() {
    let a = square();
    let b = family_with_width(&PolygonSpec::unit_square(), 0.005).unwrap();
    let fit = independence_fit(&b, &a, &[0.25, 0.0625, 0.015625]).unwrap();
    assert!((0.9..=1.1).contains(&fit.slope), "{fit:?}");
    assert!(fit.gaps.iter().all(|g| *g > 0.0));
    // Argument order does not matter.
    let swapped = profile_independence_gap(&a, &b, 0.25).unwrap();
    assert!((swapped - fit.gaps[0]).abs() < 1e-12);
}

#[test]
fn lift_is_strictly_convex_and_close() {
    let fam = square();
    let same = positive_curvature_lift(&fam, 0.25, 0.0).unwrap();
    assert_eq!(c0_distance(&same.table, &fam.table(0.25)), 0.0);
    let eps = 1e-3;
    let lift = positive_curvature_lift(&fam, 0.25, eps).unwrap();
    assert!(lift.table.is_strictly_convex());
    assert!(lift.curvature_floor >= lift.guaranteed_floor * (1.0 - 1e-6));
    assert!(lift.guaranteed_floor > 0.0);
    let d = c0_distance(&lift.table, &fam.table(0.25));
    assert!(d <= 2.0 * eps, "{d}");
    assert!(lift.table.position(0.0).dist(fam.table(0.25).position(0.0)) < 1e-12);
    let x = AnnulusPoint::new(0.3, 0.2);
    let y = forward_map(&lift.table, x).unwrap();
    let back = inverse_map(&lift.table, y).unwrap();
    assert!(back.dist(x) < 1e-10);
}

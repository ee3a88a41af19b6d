use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::PeriodicOrbitCandidate;
use crate::billiard::{iterate_lifted, AnnulusPoint};
use crate::curves::{c0_distance, TableCurve};
use crate::error::{Error, Result};
use crate::geom::Vec2;

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub n: usize,
    pub grid: usize,
    /// `max |F_a - F_b|` over the grid.
    pub gap: f64,
    /// Tuple where the gap is attained.
    pub argmax: Vec<f64>,
    pub c0_distance: f64,
    /// `2n·c0_distance`.
    pub bound: f64,
}

fn chord_matrix(pts: &[Vec2]) -> Vec<f64> {
    let m = pts.len();
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            out[i * m + j] = pts[i].dist(pts[j]);
        }
    }
    out
}

/// `max |F_a - F_b|` on the `grid^n` torus grid, tuples with cyclically consecutive
/// indices closer than two cells excluded. Fails with `BoundViolated` if the gap exceeds
/// `2n·sup‖a - b‖`.
pub fn functional_gap(a: &TableCurve, b: &TableCurve, n: usize, grid: usize) -> Result<GapReport> {
    if n < 2 || grid < 2 * n + 1 {
        return Err(Error::InvalidInput(format!("gap needs n ≥ 2 and a grid of at least 2n + 1 points (n = {n}, grid = {grid})")));
    }
    let cells = (grid as f64).powi(n as i32);
    if cells > (1u64 << 26) as f64 {
        return Err(Error::ResolutionTooLarge {
            cells: cells as u64,
            budget: 1 << 26,
        });
    }
    let qs: Vec<f64> = (0..grid).map(|i| i as f64 / grid as f64).collect();
    let pa: Vec<Vec2> = qs.iter().map(|&q| a.position(q)).collect();
    let pb: Vec<Vec2> = qs.iter().map(|&q| b.position(q)).collect();
    let grid_c0 = pa.iter().zip(&pb).map(|(x, y)| x.dist(*y)).fold(0.0, f64::max);
    let diff: Vec<f64> = chord_matrix(&pa)
        .iter()
        .zip(chord_matrix(&pb))
        .map(|(x, y)| x - y)
        .collect();
    let far = |i: usize, j: usize| {
        let d = i.abs_diff(j);
        d.min(grid - d) > 1
    };
    // The first index runs in parallel; the rest are enumerated as an odometer.
    let best = (0..grid)
        .into_par_iter()
        .map(|first| {
            let mut idx = vec![0usize; n];
            idx[0] = first;
            let mut best = (0.0f64, Vec::new());
            loop {
                if (0..n).all(|k| far(idx[k], idx[(k + 1) % n])) {
                    let v: f64 = (0..n).map(|k| diff[idx[k] * grid + idx[(k + 1) % n]]).sum();
                    if v.abs() > best.0 {
                        best = (v.abs(), idx.clone());
                    }
                }
                let mut k = n - 1;
                loop {
                    if k == 0 {
                        return best;
                    }
                    idx[k] += 1;
                    if idx[k] < grid {
                        break;
                    }
                    idx[k] = 0;
                    k -= 1;
                }
            }
        })
        // Ties go to the lexicographically first tuple, independent of the reduction order.
        .reduce(
            || (0.0, Vec::new()),
            |x, y| match y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)) {
                std::cmp::Ordering::Greater => y,
                _ => x,
            },
        );
    let c0 = c0_distance(a, b).max(grid_c0);
    let bound = 2.0 * n as f64 * c0;
    if best.0 > bound * (1.0 + 1e-9) {
        return Err(Error::BoundViolated { gap: best.0, bound });
    }
    Ok(GapReport {
        n,
        grid,
        gap: best.0,
        argmax: best.1.iter().map(|&i| qs[i]).collect(),
        c0_distance: c0,
        bound,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub n: usize,
    pub radius: f64,
    pub center: AnnulusPoint,
    /// The orbit point followed by the random samples.
    pub samples: Vec<AnnulusPoint>,
    pub images_a: Vec<AnnulusPoint>,
    pub images_b: Vec<AnnulusPoint>,
    /// `min_x dist(ψ_bⁿ(x), ψ_aⁿ(cloud))`.
    pub min_distance: f64,
    /// `dist(ψ_bⁿ(x₀), x₀)` for the orbit point `x₀`.
    pub return_distance: f64,
    /// Upper bound on the geometric distance between the tables, when known.
    pub db_upper: Option<f64>,
}

fn image(t: &TableCurve, x: AnnulusPoint, n: usize) -> Result<AnnulusPoint> {
    let (q, p) = iterate_lifted(t, x.q, x.p, n)?;
    Ok(AnnulusPoint::new(q, p))
}

/// Follows a phase-space ball around a periodic point of `a` under `n` iterates of both maps.
pub fn almost_periodicity_experiment(
    a: &TableCurve,
    b: &TableCurve,
    orbit: &PeriodicOrbitCandidate,
    radius: f64,
    samples: usize,
    seed: u64,
    db_upper: Option<f64>,
) -> Result<ExperimentReport> {
    if !(radius > 0.0 && radius < 1.0) {
        return Err(Error::InvalidInput(format!("ball radius {radius} outside (0, 1)")));
    }
    let n = orbit.n;
    let x0 = orbit.phase_point;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = vec![x0];
    for _ in 0..samples {
        let r = radius * rng.gen::<f64>().sqrt();
        let th = std::f64::consts::TAU * rng.gen::<f64>();
        points.push(AnnulusPoint::new(x0.q + r * th.cos(), x0.p + r * th.sin()));
    }
    let images_a = points
        .par_iter()
        .map(|&x| image(a, x, n))
        .collect::<Result<Vec<_>>>()?;
    let images_b = points
        .par_iter()
        .map(|&x| image(b, x, n))
        .collect::<Result<Vec<_>>>()?;
    let min_distance = images_b
        .iter()
        .map(|y| images_a.iter().map(|z| y.dist(*z)).fold(f64::INFINITY, f64::min))
        .fold(f64::INFINITY, f64::min);
    Ok(ExperimentReport {
        n,
        radius,
        center: x0,
        return_distance: images_b[0].dist(x0),
        samples: points,
        images_a,
        images_b,
        min_distance,
        db_upper,
    })
}

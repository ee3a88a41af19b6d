//! Periodic billiard trajectories as critical points of the length functional
//! `F(q_1, ..., q_n) = Σ ‖γ(q_{i+1}) - γ(q_i)‖` on the torus, the C⁰ bound on
//! `F` under table perturbations, and recovery of a table from chord lengths.

mod experiment;
mod oracle;
mod reconstruct;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use experiment::{almost_periodicity_experiment, functional_gap, ExperimentReport, GapReport};
pub use oracle::{phase_space_orbits, PhaseOrbit};
pub use reconstruct::{
    align_two_anchors, chord_data, reconstruct_table, reconstructed_table, round_trip_error, ChordData,
};

use crate::billiard::{iterate_lifted, AnnulusPoint};
use crate::curves::{Frame, TableCurve};
use crate::error::{Error, Result};
use crate::geom::{circle_dist, wrap01};

/// Gradient threshold for accepting a critical tuple.
pub const ACCEPT_RESIDUAL: f64 = 1e-10;
/// Phase-space closing threshold for accepted candidates.
pub const FIXED_POINT_TOL: f64 = 1e-8;
/// Sup-distance modulo shift and reversal below which two tuples are the same orbit.
pub const DEDUP_TOL: f64 = 1e-6;
/// Relative Hessian eigenvalue below which a critical point is part of a family.
pub const DEGENERACY_TOL: f64 = 1e-7;

fn frames(t: &TableCurve, qs: &[f64]) -> Result<Vec<Frame>> {
    let n = qs.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!("orbit tuples need n ≥ 2, got {n}")));
    }
    for i in 0..n {
        let (a, b) = (qs[i], qs[(i + 1) % n]);
        if circle_dist(a, b) < crate::billiard::DIAGONAL_TOL {
            return Err(Error::DiagonalPoint { q: a, big_q: b });
        }
    }
    Ok(qs.iter().map(|&q| t.frame(q)).collect())
}

/// `F(q_1, ..., q_n)`, the perimeter of the inscribed closed polygon.
pub fn orbit_functional(t: &TableCurve, qs: &[f64]) -> Result<f64> {
    let f = frames(t, qs)?;
    let n = f.len();
    // Summing in sorted order makes the value exactly invariant under shift and reversal.
    let mut chords: Vec<f64> = (0..n).map(|i| f[i].position.dist(f[(i + 1) % n].position)).collect();
    chords.sort_by(f64::total_cmp);
    Ok(chords.iter().sum())
}

/// `∂F/∂q_i = ⟨u_{i-1,i}, γ'(q_i)⟩ - ⟨u_{i,i+1}, γ'(q_i)⟩`.
pub fn orbit_gradient(t: &TableCurve, qs: &[f64]) -> Result<Vec<f64>> {
    let f = frames(t, qs)?;
    Ok(gradient_from(&f))
}

fn unit_chords(f: &[Frame]) -> Vec<(crate::geom::Vec2, f64)> {
    let n = f.len();
    (0..n)
        .map(|i| {
            let d = f[(i + 1) % n].position - f[i].position;
            let r = d.norm();
            (d / r, r)
        })
        .collect()
}

fn gradient_from(f: &[Frame]) -> Vec<f64> {
    let n = f.len();
    let u = unit_chords(f);
    (0..n)
        .map(|i| {
            let prev = u[(i + n - 1) % n].0;
            let next = u[i].0;
            prev.dot(f[i].tangent) - next.dot(f[i].tangent)
        })
        .collect()
}

/// Analytic Hessian of `F`.
pub fn orbit_hessian(t: &TableCurve, qs: &[f64]) -> Result<DMatrix<f64>> {
    let f = frames(t, qs)?;
    Ok(hessian_from(&f))
}

fn hessian_from(f: &[Frame]) -> DMatrix<f64> {
    let n = f.len();
    let u = unit_chords(f);
    let mut h = DMatrix::zeros(n, n);
    // Chord c(a, b) = ‖γ(b) - γ(a)‖ between consecutive bounces a = i, b = i + 1.
    for (a, &(u, r)) in u.iter().enumerate() {
        let b = (a + 1) % n;
        let (ta, tb) = (f[a].tangent, f[b].tangent);
        let (ua, ub) = (u.dot(ta), u.dot(tb));
        let caa = (1.0 - ua * ua) / r - f[a].curvature * u.dot(ta.perp());
        let cbb = (1.0 - ub * ub) / r + f[b].curvature * u.dot(tb.perp());
        let cab = -(ta.dot(tb) - ua * ub) / r;
        h[(a, a)] += caa;
        h[(b, b)] += cbb;
        h[(a, b)] += cab;
        h[(b, a)] += cab;
    }
    h
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Levenberg-Marquardt iteration on `∇F = 0`. Returns the tuple and its residual `max |∂F/∂q_i|`.
fn refine(t: &TableCurve, start: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = start.len();
    let mut qs: Vec<f64> = start.iter().map(|&q| wrap01(q)).collect();
    let mut f = frames(t, &qs)?;
    let mut g = gradient_from(&f);
    let mut mu = 1e-6;
    for _ in 0..200 {
        let res = max_abs(&g);
        if res < 1e-14 {
            break;
        }
        let h = hessian_from(&f);
        let gv = DVector::from_vec(g.clone());
        let ht = h.transpose();
        let normal = &ht * &h + DMatrix::identity(n, n) * mu;
        let Some(step) = normal.cholesky().map(|c| c.solve(&(-(&ht * &gv)))) else {
            mu *= 10.0;
            continue;
        };
        let scale = (0.1 / step.amax()).min(1.0);
        let trial: Vec<f64> = qs.iter().zip(step.iter()).map(|(q, d)| wrap01(q + scale * d)).collect();
        let accepted = frames(t, &trial).ok().and_then(|tf| {
            let tg = gradient_from(&tf);
            (max_abs(&tg) < res).then_some((tf, tg))
        });
        match accepted {
            Some((tf, tg)) => {
                qs = trial;
                f = tf;
                g = tg;
                mu = (mu * 0.1).max(1e-15);
            }
            None => {
                mu *= 10.0;
                if mu > 1e8 {
                    break;
                }
            }
        }
    }
    Ok((qs, max_abs(&g)))
}

/// A critical tuple of `F` with its validation data.
#[derive(Clone, Debug, Serialize)]
pub struct PeriodicOrbitCandidate {
    pub n: usize,
    pub qs: Vec<f64>,
    pub action: f64,
    /// `max_i |∂F/∂q_i|`.
    pub residual: f64,
    /// Turns around the table, taken in `1..=n/2` (orientation reversal maps `k` to `n - k`).
    pub winding: usize,
    /// `(q_1, p_1)` with `p_1` the outgoing momentum.
    pub phase_point: AnnulusPoint,
    /// Phase-space distance between `ψⁿ(x)` and `x`.
    pub closing_error: f64,
    /// Near-zero Hessian eigenvalue: the tuple lies on a continuous family of orbits.
    pub degenerate: bool,
    pub hessian_eigenvalues: Vec<f64>,
    pub accepted: bool,
}

/// Number of turns of the inscribed polygon, folded to `1..=n/2`.
pub fn winding_number(qs: &[f64]) -> usize {
    let n = qs.len();
    let turns: f64 = (0..n).map(|i| wrap01(qs[(i + 1) % n] - qs[i])).sum();
    let k = turns.round() as usize;
    k.min(n - k)
}

/// Sup circle-distance between tuples, minimized over cyclic shifts and reversal.
pub fn orbit_distance(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    if b.len() != n {
        return f64::INFINITY;
    }
    let mut best = f64::INFINITY;
    for shift in 0..n {
        for rev in [false, true] {
            let d = (0..n)
                .map(|i| {
                    let j = if rev { (shift + n - i) % n } else { (shift + i) % n };
                    circle_dist(a[i], b[j])
                })
                .fold(0.0, f64::max);
            best = best.min(d);
        }
    }
    best
}

/// Outgoing momentum at the first bounce and the closing error of `ψⁿ`.
fn phase_check(t: &TableCurve, qs: &[f64]) -> Result<(AnnulusPoint, f64)> {
    let f = frames(t, qs)?;
    let u = (f[1].position - f[0].position).normalized();
    let x = AnnulusPoint::new(qs[0], u.dot(f[0].tangent));
    let (q, p) = iterate_lifted(t, x.q, x.p, qs.len())?;
    Ok((x, AnnulusPoint::new(q, p).dist(x)))
}

/// Builds the validated candidate for a converged tuple.
pub fn candidate(t: &TableCurve, qs: Vec<f64>) -> Result<PeriodicOrbitCandidate> {
    let f = frames(t, &qs)?;
    let n = qs.len();
    let residual = max_abs(&gradient_from(&f));
    let action = orbit_functional(t, &qs)?;
    let eig = SymmetricEigen::new(hessian_from(&f)).eigenvalues;
    let mut eigenvalues: Vec<f64> = eig.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    let scale = max_abs(&eigenvalues);
    let degenerate = eigenvalues.iter().any(|l| l.abs() <= DEGENERACY_TOL * scale);
    let (phase_point, closing_error) = phase_check(t, &qs)?;
    Ok(PeriodicOrbitCandidate {
        n,
        winding: winding_number(&qs),
        accepted: residual < ACCEPT_RESIDUAL && closing_error < FIXED_POINT_TOL,
        qs,
        action,
        residual,
        phase_point,
        closing_error,
        degenerate,
        hessian_eigenvalues: eigenvalues,
    })
}

/// Offsets of the rotational seeds `q_i = q_0 + i·k/n`.
const ROTATIONAL_OFFSETS: usize = 16;

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn is_same_class(a: &PeriodicOrbitCandidate, b: &PeriodicOrbitCandidate) -> bool {
    if a.degenerate && b.degenerate {
        a.winding == b.winding && (a.action - b.action).abs() < 1e-9
    } else {
        orbit_distance(&a.qs, &b.qs) < DEDUP_TOL
    }
}

/// Multi-start search for critical points of `F` with period `n`: rotational seeds for every
/// winding coprime to `n` plus `random_seeds` uniform tuples drawn from `seed`.
/// Accepted orbits are deduplicated modulo shift and reversal and sorted by action.
pub fn find_periodic_orbits(
    t: &TableCurve,
    n: usize,
    random_seeds: usize,
    seed: u64,
) -> Result<Vec<PeriodicOrbitCandidate>> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("period must be at least 2, got {n}")));
    }
    if !t.is_strictly_convex() {
        return Err(Error::NotStrictlyConvex);
    }
    let mut seeds: Vec<Vec<f64>> = Vec::new();
    for k in 1..n {
        if gcd(k, n) != 1 {
            continue;
        }
        for j in 0..ROTATIONAL_OFFSETS {
            let q0 = j as f64 / (ROTATIONAL_OFFSETS * n) as f64;
            seeds.push((0..n).map(|i| q0 + (i * k) as f64 / n as f64).collect());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..random_seeds {
        seeds.push((0..n).map(|_| rng.gen::<f64>()).collect());
    }
    let found: Vec<Option<PeriodicOrbitCandidate>> = seeds
        .par_iter()
        .map(|s| {
            let (qs, res) = refine(t, s).ok()?;
            if res >= ACCEPT_RESIDUAL {
                return None;
            }
            candidate(t, qs).ok().filter(|c| c.accepted)
        })
        .collect();
    let mut classes: Vec<PeriodicOrbitCandidate> = Vec::new();
    for c in found.into_iter().flatten() {
        if !classes.iter().any(|k| is_same_class(k, &c)) {
            classes.push(c);
        }
    }
    classes.sort_by(|a, b| a.action.total_cmp(&b.action));
    Ok(classes)
}

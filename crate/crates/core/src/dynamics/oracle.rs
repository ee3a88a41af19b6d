use rayon::prelude::*;
use serde::Serialize;

use super::{gcd, orbit_distance, orbit_gradient, DEDUP_TOL};
use crate::billiard::{iterate_lifted, AnnulusPoint};
use crate::curves::TableCurve;
use crate::error::{Error, Result};
use crate::geom::wrap01;

/// A fixed point of `ψⁿ` found directly in phase space.
#[derive(Clone, Debug, Serialize)]
pub struct PhaseOrbit {
    pub point: AnnulusPoint,
    /// Turns made by `n` iterates of the lift, in `1..n`.
    pub turns: usize,
    /// Bounce parameters `q_1, ..., q_n` along the orbit.
    pub qs: Vec<f64>,
    /// `‖ψⁿ(x) - x‖` on the lift, after subtracting the turns.
    pub closing_error: f64,
    /// `max |∂F/∂q_i|` of the bounce tuple.
    pub gradient_residual: f64,
}

const JACOBIAN_STEP: f64 = 1e-7;
const SEEDS_PER_WINDING: usize = 16;

/// `ψⁿ(q, p) - (q + k, p)` on the universal cover.
fn closing(t: &TableCurve, q: f64, p: f64, n: usize, k: usize) -> Result<[f64; 2]> {
    let (qn, pn) = iterate_lifted(t, q, p, n)?;
    Ok([qn - q - k as f64, pn - p])
}

fn newton(t: &TableCurve, mut q: f64, mut p: f64, n: usize, k: usize) -> Result<(f64, f64, f64)> {
    let mut g = closing(t, q, p, n, k)?;
    let norm = |g: &[f64; 2]| g[0].hypot(g[1]);
    for _ in 0..60 {
        if norm(&g) < 1e-14 {
            break;
        }
        let h = JACOBIAN_STEP;
        let gq1 = closing(t, q + h, p, n, k)?;
        let gq0 = closing(t, q - h, p, n, k)?;
        let gp1 = closing(t, q, p + h, n, k)?;
        let gp0 = closing(t, q, p - h, n, k)?;
        let a = (gq1[0] - gq0[0]) / (2.0 * h);
        let b = (gp1[0] - gp0[0]) / (2.0 * h);
        let c = (gq1[1] - gq0[1]) / (2.0 * h);
        let d = (gp1[1] - gp0[1]) / (2.0 * h);
        let det = a * d - b * c;
        if det == 0.0 || !det.is_finite() {
            return Err(Error::NoConvergence("singular phase-space Jacobian".into()));
        }
        let mut dq = -(d * g[0] - b * g[1]) / det;
        let mut dp = -(-c * g[0] + a * g[1]) / det;
        let len = dq.hypot(dp);
        if len > 0.05 {
            dq *= 0.05 / len;
            dp *= 0.05 / len;
        }
        let mut lambda = 1.0;
        loop {
            let (nq, np) = (q + lambda * dq, p + lambda * dp);
            if let Ok(ng) = closing(t, nq, np, n, k) {
                if norm(&ng) < norm(&g) {
                    q = nq;
                    p = np;
                    g = ng;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-6 {
                return Ok((q, p, norm(&g)));
            }
        }
    }
    Ok((q, p, norm(&g)))
}

/// Fixed points of `ψⁿ` by Newton iteration in phase space, seeded along the
/// rotational momenta `p = cos(πk/n)` for every `k` coprime to `n`.
/// Orbits are deduplicated modulo shift and reversal.
pub fn phase_space_orbits(t: &TableCurve, n: usize) -> Result<Vec<PhaseOrbit>> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("period must be at least 2, got {n}")));
    }
    let mut seeds = Vec::new();
    for k in 1..n {
        if gcd(k, n) != 1 {
            continue;
        }
        let p = (std::f64::consts::PI * k as f64 / n as f64).cos();
        for j in 0..SEEDS_PER_WINDING {
            seeds.push((j as f64 / (SEEDS_PER_WINDING * n) as f64, p, k));
        }
    }
    let found: Vec<Option<PhaseOrbit>> = seeds
        .par_iter()
        .map(|&(q, p, k)| {
            let (q, p, err) = newton(t, q, p, n, k).ok()?;
            if err > 1e-11 {
                return None;
            }
            let mut qs = Vec::with_capacity(n);
            let (mut cq, mut cp) = (q, p);
            for _ in 0..n {
                qs.push(wrap01(cq));
                (cq, cp) = iterate_lifted(t, cq, cp, 1).ok()?;
            }
            let gradient_residual = orbit_gradient(t, &qs)
                .ok()?
                .iter()
                .fold(0.0, |m: f64, x| m.max(x.abs()));
            Some(PhaseOrbit {
                point: AnnulusPoint::new(q, p),
                turns: k,
                qs,
                closing_error: err,
                gradient_residual,
            })
        })
        .collect();
    let mut out: Vec<PhaseOrbit> = Vec::new();
    for o in found.into_iter().flatten() {
        if !out.iter().any(|x| orbit_distance(&x.qs, &o.qs) < DEDUP_TOL) {
            out.push(o);
        }
    }
    Ok(out)
}

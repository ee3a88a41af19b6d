//! Approximation of convex polygons by smooth convex curves: every corner is
//! replaced by the graph of `s·f(x/s)` for a convex profile `f` equal to `a|x|`
//! away from 0, and the result `γ_s` is rescaled to length 1.

mod family;
mod lift;
mod profile;

use rayon::prelude::*;
use serde::Serialize;

pub use family::{family_from_polygon, family_with_width, PolygonSpec, SmoothedCurve, SmoothingFamily};
pub use lift::{positive_curvature_lift, Lift};
pub use profile::{first_absolute_moment, make_profile, mollifier, CornerProfile};

use crate::curves::{CurveRepr, TableCurve};
use crate::error::{Error, Result};
use crate::homotopy::{difference_velocity, PathKind, PathSlice, TablePath, VELOCITY_STEP};
use crate::quadrature::simpson;

/// Grid size of the `q` maximum in [`family_speed`] and [`profile_independence_gap`].
pub const SPEED_GRID: usize = 4096;

fn max_displacement(a: &SmoothedCurve, b: &SmoothedCurve) -> f64 {
    (0..SPEED_GRID)
        .map(|i| {
            let q = i as f64 / SPEED_GRID as f64;
            a.frame(q).position.dist(b.frame(q).position)
        })
        .fold(0.0, f64::max)
}

/// `max_q ‖∂γ̃_s/∂s(q)‖` by a central difference of step `min(1e-4, s/10)` (one-sided at `s = 1`).
pub fn family_speed(fam: &SmoothingFamily, s: f64) -> f64 {
    let h = (1e-4f64).min(s / 10.0);
    let hi = (s + h).min(1.0);
    let lo = s - h;
    max_displacement(&fam.curve(lo), &fam.curve(hi)) / (hi - lo)
}

#[derive(Clone, Debug, Serialize)]
pub struct CauchyTail {
    /// `s_k = s0·2^-k`, `k = 0..=K`.
    pub scales: Vec<f64>,
    pub speeds: Vec<f64>,
    /// Trapezoid integral of the speed over `[s_{k+1}, s_k]`.
    pub increments: Vec<f64>,
    /// `Σ_{j ≤ k}` of the increments.
    pub partial_sums: Vec<f64>,
    /// `s_K·v_K`, standing in for `∫₀^{s_K}`.
    pub remainder: f64,
    pub tail: f64,
}

/// `∫₀^{s0} max_q ‖∂γ̃_s/∂s‖ ds` on the geometric grid `s0·2^-k`, `k = 0..=K`.
pub fn cauchy_tail(fam: &SmoothingFamily, s0: f64, k: usize) -> Result<CauchyTail> {
    if !(s0 > 0.0 && s0 <= 1.0) {
        return Err(Error::InvalidInput(format!("tail start {s0} outside (0, 1]")));
    }
    let scales: Vec<f64> = (0..=k).map(|j| s0 * 0.5f64.powi(j as i32)).collect();
    let speeds: Vec<f64> = scales.par_iter().map(|&s| family_speed(fam, s)).collect();
    let increments: Vec<f64> = (0..k)
        .map(|j| 0.5 * (scales[j] - scales[j + 1]) * (speeds[j] + speeds[j + 1]))
        .collect();
    let partial_sums: Vec<f64> = increments
        .iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect();
    let remainder = scales[k] * speeds[k];
    let tail = partial_sums.last().copied().unwrap_or(0.0) + remainder;
    Ok(CauchyTail {
        scales,
        speeds,
        increments,
        partial_sums,
        remainder,
        tail,
    })
}

/// The family restricted to `s ∈ [s_a, s_b]` and reparametrized over `[0, 1]`.
#[derive(Clone, Debug)]
pub struct SmoothingRestriction {
    pub family: SmoothingFamily,
    pub s_a: f64,
    pub s_b: f64,
    /// Lift radius applied to every slice; `None` keeps the flat edges.
    pub lift: Option<f64>,
}

impl SmoothingRestriction {
    pub fn new(family: &SmoothingFamily, s_a: f64, s_b: f64) -> Result<Self> {
        if !(0.0 <= s_a && s_a <= 1.0 && 0.0 <= s_b && s_b <= 1.0) {
            return Err(Error::InvalidInput(format!("scales [{s_a}, {s_b}] outside [0, 1]")));
        }
        Ok(SmoothingRestriction {
            family: family.clone(),
            s_a,
            s_b,
            lift: None,
        })
    }

    /// Replaces each slice by its `positive_curvature_lift` of radius `eps`, so the path
    /// can be fed to the billiard map.
    pub fn with_lift(mut self, eps: f64) -> Self {
        self.lift = (eps > 0.0).then_some(eps);
        self
    }

    fn build(&self, x: f64) -> Result<TableCurve> {
        let s = self.s_a + (self.s_b - self.s_a) * x;
        match self.lift {
            Some(eps) => Ok(positive_curvature_lift(&self.family, s, eps)?.table),
            None => Ok(self.family.table(s)),
        }
    }
}

impl TablePath for SmoothingRestriction {
    fn kind(&self) -> PathKind {
        PathKind::SmoothingRestriction
    }

    fn slice(&self, s: f64) -> Result<PathSlice> {
        Ok(PathSlice {
            s,
            table: self.build(s)?,
            velocity: difference_velocity(s, VELOCITY_STEP, |x| self.build(x))?,
        })
    }
}

const GAP_T_NODES: usize = 17;
const GAP_T_STEP: f64 = 1e-3;

/// Orders the corner profiles of two families so that the first is pointwise below the second.
fn ordered_profiles(a: &SmoothingFamily, b: &SmoothingFamily) -> Result<Vec<(CornerProfile, CornerProfile)>> {
    if a.polygon() != b.polygon() {
        return Err(Error::InvalidInput("families are built on different polygons".into()));
    }
    a.profiles()
        .into_iter()
        .zip(b.profiles())
        .enumerate()
        .map(|(i, (g, f))| {
            if f.dominates(&g, 2048) {
                Ok((g, f))
            } else if g.dominates(&f, 2048) {
                Ok((f, g))
            } else {
                Err(Error::ProfilesNotOrdered { corner: i })
            }
        })
        .collect()
}

fn blended_family(p: &PolygonSpec, pairs: &[(CornerProfile, CornerProfile)], t: f64) -> Result<SmoothingFamily> {
    let profiles = pairs
        .iter()
        .map(|(g, f)| {
            if g.same_shape(f) {
                Ok(g.clone())
            } else {
                CornerProfile::blend(g, f, t)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    family_from_polygon(p, profiles)
}

/// `∫₀¹ max_q ‖∂γ̃_{t,s}/∂t(q)‖ dt` for the profiles `(1-t)g_i + t·f_i`, by Simpson on 17 nodes.
pub fn profile_independence_gap(fam_a: &SmoothingFamily, fam_b: &SmoothingFamily, s: f64) -> Result<f64> {
    let pairs = ordered_profiles(fam_a, fam_b)?;
    let p = fam_a.polygon();
    let speeds: Vec<f64> = (0..GAP_T_NODES)
        .into_par_iter()
        .map(|i| {
            let t = i as f64 / (GAP_T_NODES - 1) as f64;
            let lo = blended_family(p, &pairs, t - GAP_T_STEP)?;
            let hi = blended_family(p, &pairs, t + GAP_T_STEP)?;
            Ok(max_displacement(&lo.curve(s), &hi.curve(s)) / (2.0 * GAP_T_STEP))
        })
        .collect::<Result<_>>()?;
    Ok(simpson(&speeds, 0.0, 1.0))
}

#[derive(Clone, Debug, Serialize)]
pub struct IndependenceFit {
    pub scales: Vec<f64>,
    pub gaps: Vec<f64>,
    /// Least-squares slope of `log gap` against `log s`.
    pub slope: f64,
    /// `max gap(s)/s` over the scales.
    pub max_ratio: f64,
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// The gap at each scale together with its log-log slope.
pub fn independence_fit(fam_a: &SmoothingFamily, fam_b: &SmoothingFamily, scales: &[f64]) -> Result<IndependenceFit> {
    let gaps = scales
        .iter()
        .map(|&s| profile_independence_gap(fam_a, fam_b, s))
        .collect::<Result<Vec<_>>>()?;
    let max_ratio = scales.iter().zip(&gaps).map(|(s, g)| g / s).fold(0.0, f64::max);
    Ok(IndependenceFit {
        slope: log_log_slope(scales, &gaps),
        scales: scales.to_vec(),
        gaps,
        max_ratio,
    })
}

/// The scales `2^-2, ..., 2^-7`.
pub fn dyadic_scales() -> Vec<f64> {
    (2..=7).map(|k| 0.5f64.powi(k)).collect()
}

#[cfg(test)]
mod tests;

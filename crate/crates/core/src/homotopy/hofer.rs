use rayon::prelude::*;
use serde::Serialize;

use super::{PathSlice, TablePath};
use crate::billiard::{forward_lifted, AnnulusPoint};
use crate::curves::c0_distance;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::quadrature::{golden_max, simpson_with_error};

fn s_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

fn slices(path: &dyn TablePath, n: usize) -> Result<Vec<PathSlice>> {
    s_nodes(n).into_par_iter().map(|s| path.slice(s)).collect()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LengthOptions {
    pub s_nodes: usize,
    pub q_grid: usize,
}

impl Default for LengthOptions {
    fn default() -> Self {
        LengthOptions {
            s_nodes: 65,
            q_grid: 1024,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GeometricLength {
    pub value: f64,
    /// Difference against the half-resolution Simpson rule.
    pub quadrature_error: f64,
    /// `max_q ‖∂γ_s/∂s‖` at each `s` node.
    pub speeds: Vec<f64>,
    pub grid: LengthOptions,
}

/// Max over `q` of `‖∂γ_s/∂s(q)‖`: grid maximum refined by golden section around the best node.
pub fn max_speed(slice: &PathSlice, grid: usize) -> f64 {
    let h = 1.0 / grid as f64;
    let speed = |q: f64| slice.velocity(q).norm();
    let (best_i, best) = (0..grid)
        .map(|i| (i, speed(i as f64 * h)))
        .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    let centre = best_i as f64 * h;
    let (_, refined) = golden_max(centre - h, centre + h, 30, speed);
    best.max(refined)
}

/// `l_B = ∫₀¹ max_q ‖∂γ_s/∂s(q)‖ ds` by composite Simpson in `s`.
///
/// Grid sampling approximates each maximum from below.
pub fn path_geometric_length(path: &dyn TablePath, opts: &LengthOptions) -> Result<GeometricLength> {
    let speeds: Vec<f64> = s_nodes(opts.s_nodes)
        .into_par_iter()
        .map(|s| Ok(max_speed(&path.slice(s)?, opts.q_grid)))
        .collect::<Result<_>>()?;
    let (value, quadrature_error) = simpson_with_error(&speeds, 0.0, 1.0);
    Ok(GeometricLength {
        value,
        quadrature_error,
        speeds,
        grid: *opts,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct HoferOptions {
    pub s_nodes: usize,
    pub q_grid: usize,
    pub p_grid: usize,
    /// Largest `|P|` on the momentum grid.
    pub p_max: f64,
}

impl Default for HoferOptions {
    fn default() -> Self {
        HoferOptions {
            s_nodes: 65,
            q_grid: 256,
            p_grid: 127,
            p_max: 1.0 - 1.0 / 128.0,
        }
    }
}

impl HoferOptions {
    pub fn doubled(&self) -> Self {
        HoferOptions {
            s_nodes: 2 * self.s_nodes - 1,
            q_grid: 2 * self.q_grid,
            p_grid: 2 * self.p_grid + 1,
            p_max: self.p_max,
        }
    }

    fn momenta(&self) -> Vec<f64> {
        let n = self.p_grid;
        (0..n)
            .map(|j| -self.p_max + 2.0 * self.p_max * j as f64 / (n - 1) as f64)
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HoferLength {
    pub value: f64,
    pub quadrature_error: f64,
    /// `max H_s - min H_s` at each `s` node (the boundary value 0 included).
    pub oscillations: Vec<f64>,
    /// Largest `|H| - ‖Δ ∂γ/∂s‖` seen; non-positive up to rounding.
    pub bound_excess: f64,
    pub grid: HoferOptions,
}

struct SliceStats {
    max: f64,
    min: f64,
    excess: f64,
}

fn hamiltonian_stats(slice: &PathSlice, qs: &[f64], ps: &[f64]) -> Result<SliceStats> {
    let mut st = SliceStats {
        max: 0.0,
        min: 0.0,
        excess: f64::NEG_INFINITY,
    };
    for &big_q in qs {
        for &big_p in ps {
            let (h, bound) = slice.hamiltonian_with_bound(big_q, big_p)?;
            st.max = st.max.max(h);
            st.min = st.min.min(h);
            st.excess = st.excess.max(h.abs() - bound);
        }
    }
    Ok(st)
}

/// `l_H = ∫₀¹ (sup H_s - inf H_s) ds` of the induced path of billiard maps, on a
/// `(Q, P)` grid with `|P| ≤ p_max` and Simpson quadrature in `s`.
pub fn hofer_length(path: &dyn TablePath, opts: &HoferOptions) -> Result<HoferLength> {
    let qs: Vec<f64> = (0..opts.q_grid)
        .map(|i| i as f64 / opts.q_grid as f64)
        .collect();
    let ps = opts.momenta();
    let stats: Vec<SliceStats> = s_nodes(opts.s_nodes)
        .into_par_iter()
        .map(|s| hamiltonian_stats(&path.slice(s)?, &qs, &ps))
        .collect::<Result<_>>()?;
    let oscillations: Vec<f64> = stats.iter().map(|st| st.max - st.min).collect();
    let (value, quadrature_error) = simpson_with_error(&oscillations, 0.0, 1.0);
    Ok(HoferLength {
        value,
        quadrature_error,
        oscillations,
        bound_excess: stats.iter().map(|st| st.excess).fold(f64::NEG_INFINITY, f64::max),
        grid: *opts,
    })
}

/// `∫₀¹ sup_{q,Q} |∂F_s/∂s(q, Q)| ds` on an `n × n` grid of boundary parameter pairs.
pub fn chord_speed_integral(path: &dyn TablePath, s_count: usize, n: usize) -> Result<f64> {
    let sups: Vec<f64> = slices(path, s_count)?
        .par_iter()
        .map(|slice| {
            let pts: Vec<(Vec2, Vec2)> = (0..n)
                .map(|i| {
                    let q = i as f64 / n as f64;
                    (slice.table.position(q), slice.velocity(q))
                })
                .collect();
            let mut sup: f64 = 0.0;
            for (i, a) in pts.iter().enumerate() {
                for b in &pts[i + 1..] {
                    let u = (b.0 - a.0).normalized();
                    sup = sup.max(u.dot(b.1 - a.1).abs());
                }
            }
            sup
        })
        .collect();
    Ok(simpson_with_error(&sups, 0.0, 1.0).0)
}

/// Relative slack for discretization in the comparison certificate.
pub const CERTIFICATE_SLACK: f64 = 1e-2;

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub l_h: f64,
    pub l_b: f64,
    /// `l_H / l_B`; infinite when `l_B = 0 < l_H`.
    pub ratio: f64,
    /// `2·∫ sup |∂F_s/∂s| ds`, the middle term of `l_H ≤ 2∫sup|∂F/∂s| ≤ 4 l_B`.
    pub chord_bound: f64,
    pub chain_holds: bool,
    pub hofer_grid: HoferOptions,
    pub length_grid: LengthOptions,
    pub pass: bool,
}

/// Certifies `l_H ≤ 4·l_B` for one path (with relative slack [`CERTIFICATE_SLACK`]).
pub fn verify_comparison(
    path: &dyn TablePath,
    hofer: &HoferOptions,
    length: &LengthOptions,
) -> Result<Certificate> {
    let l_h = hofer_length(path, hofer)?.value;
    let l_b = path_geometric_length(path, length)?.value;
    let chord_bound = 2.0 * chord_speed_integral(path, hofer.s_nodes, 2 * hofer.q_grid)?;
    let ratio = if l_b > 0.0 {
        l_h / l_b
    } else if l_h > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    let slack = 1.0 + CERTIFICATE_SLACK;
    let chain_holds = l_h <= chord_bound * slack + 1e-12 && chord_bound <= 4.0 * l_b * slack + 1e-12;
    Ok(Certificate {
        l_h,
        l_b,
        ratio,
        chord_bound,
        chain_holds,
        hofer_grid: *hofer,
        length_grid: *length,
        pass: ratio <= 4.0 * slack,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
    pub upper_quadrature_error: f64,
}

/// `c0_distance(γ_0, γ_1) ≤ d_B(γ_0, γ_1) ≤ l_B(γ_s)`.
pub fn bracket_db(path: &dyn TablePath, opts: &LengthOptions) -> Result<Bracket> {
    let lower = c0_distance(&path.table(0.0)?, &path.table(1.0)?);
    let len = path_geometric_length(path, opts)?;
    if lower > len.value * (1.0 + 1e-6) + 1e-15 {
        return Err(Error::BracketInverted {
            lower,
            upper: len.value,
        });
    }
    Ok(Bracket {
        lower,
        upper: len.value,
        upper_quadrature_error: len.quadrature_error,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct HjOptions {
    /// Time step of the central difference of `ψ_s`.
    pub h: f64,
    /// Step of the central differences of `H_s`.
    pub gradient_step: f64,
}

impl Default for HjOptions {
    fn default() -> Self {
        HjOptions {
            h: 1e-4,
            gradient_step: 1e-5,
        }
    }
}

/// Max over `points` of `|dψ_s/ds(x) - X_{H_s}(ψ_s(x))|` with `X_H = (∂H/∂P, -∂H/∂Q)`.
pub fn hamilton_jacobi_residual(
    path: &dyn TablePath,
    s: f64,
    points: &[AnnulusPoint],
    opts: &HjOptions,
) -> Result<f64> {
    let s = s.clamp(opts.h, 1.0 - opts.h);
    let minus = path.table(s - opts.h)?;
    let plus = path.table(s + opts.h)?;
    let mid = path.slice(s)?;
    let d = opts.gradient_step;
    let residuals: Vec<f64> = points
        .par_iter()
        .map(|x| {
            let (qm, pm) = forward_lifted(&minus, x.q, x.p)?;
            let (qp, pp) = forward_lifted(&plus, x.q, x.p)?;
            let flow = Vec2::new((qp - qm) / (2.0 * opts.h), (pp - pm) / (2.0 * opts.h));
            let (big_q, big_p) = forward_lifted(&mid.table, x.q, x.p)?;
            let dh_dq = (mid.hamiltonian(big_q + d, big_p)? - mid.hamiltonian(big_q - d, big_p)?) / (2.0 * d);
            let dh_dp = (mid.hamiltonian(big_q, big_p + d)? - mid.hamiltonian(big_q, big_p - d)?) / (2.0 * d);
            Ok(flow.dist(Vec2::new(dh_dp, -dh_dq)))
        })
        .collect::<Result<_>>()?;
    Ok(residuals.into_iter().fold(0.0, f64::max))
}

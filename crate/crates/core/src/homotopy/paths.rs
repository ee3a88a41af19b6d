use std::f64::consts::TAU;
use std::sync::Arc;

use serde::Serialize;

use super::{difference_velocity, PathKind, PathSlice, TablePath, Velocity, VELOCITY_STEP};
use crate::curves::{
    ArcLengthCurve, CurveKind, FourierSupportSpec, FourierTable, RawCurve, RawPoint, TableCurve,
    TrigSeries, CURVATURE_FLOOR,
};
use crate::error::{Error, Result};
use crate::geom::Vec2;

/// `γ_s = γ + s·v`.
#[derive(Clone, Debug)]
pub struct TranslationPath {
    pub table: TableCurve,
    pub v: Vec2,
}

pub fn translation_path(t: &TableCurve, v: Vec2) -> TranslationPath {
    TranslationPath {
        table: t.clone(),
        v,
    }
}

impl TablePath for TranslationPath {
    fn kind(&self) -> PathKind {
        PathKind::Translation
    }

    fn slice(&self, s: f64) -> Result<PathSlice> {
        Ok(PathSlice {
            s,
            table: self.table.translated(self.v * s),
            velocity: Velocity::Constant(self.v),
        })
    }
}

/// Linear interpolation of support functions, each slice rescaled to perimeter 1.
#[derive(Clone, Debug)]
pub struct SupportInterpPath {
    pub from: FourierSupportSpec,
    pub to: FourierSupportSpec,
}

const CHECK_S: usize = 64;
const CHECK_THETA: usize = 1024;

/// Validates the interpolation on a 64×1024 `(s, θ)` grid.
pub fn support_interp_path(a: &FourierSupportSpec, b: &FourierSupportSpec) -> Result<SupportInterpPath> {
    a.normalized()?;
    b.normalized()?;
    for i in 0..CHECK_S {
        let s = i as f64 / (CHECK_S - 1) as f64;
        let spec = FourierSupportSpec::lerp(a, b, s);
        let (rho, angle) = spec.min_radius(CHECK_THETA);
        let rho = rho / (TAU * spec.c0);
        if rho <= CURVATURE_FLOOR {
            return Err(Error::CurvatureNotPositive {
                min_radius: rho,
                angle,
                at_s: Some(s),
            });
        }
    }
    Ok(SupportInterpPath {
        from: a.clone(),
        to: b.clone(),
    })
}

impl SupportInterpPath {
    /// `∂/∂s` of the normalized support coefficients `h_s / (2π c0_s)`.
    fn coefficient_rate(&self, s: f64) -> FourierSupportSpec {
        let spec = FourierSupportSpec::lerp(&self.from, &self.to, s);
        let norm = 1.0 / (TAU * spec.c0);
        let dc0 = self.to.c0 - self.from.c0;
        self.to
            .axpy(-1.0, &self.from)
            .scaled(norm)
            .axpy(-norm * dc0 / spec.c0, &spec)
    }
}

impl TablePath for SupportInterpPath {
    fn kind(&self) -> PathKind {
        PathKind::SupportInterp
    }

    fn slice(&self, s: f64) -> Result<PathSlice> {
        let spec = FourierSupportSpec::lerp(&self.from, &self.to, s);
        let table = Arc::new(FourierTable::new(&spec).map_err(|e| match e {
            Error::CurvatureNotPositive {
                min_radius, angle, ..
            } => Error::CurvatureNotPositive {
                min_radius,
                angle,
                at_s: Some(s),
            },
            other => other,
        })?);
        let rate = self.coefficient_rate(s);
        let repr = Arc::clone(&table);
        // Moving the support function moves the point of normal angle θ by
        // ḣ·e_r + ḣ'·e_t; the arc-length parameter of that point drifts by ∫ (ḣ + ḣ''),
        // which is subtracted along the tangent.
        let field = move |q: f64| {
            let th = repr.theta_of(q);
            let (s1, c1) = th.sin_cos();
            let e = rate.eval(th);
            let radial = Vec2::new(c1, s1);
            let tangent = Vec2::new(-s1, c1);
            radial * e.h + tangent * (e.dh - e.arclen)
        };
        Ok(PathSlice {
            s,
            table: TableCurve::from_repr(table),
            velocity: Velocity::Field(Arc::new(field)),
        })
    }
}

/// Inputs and value of the perturbation estimate `l_B ≤ C·(max|f| + max|f'|)`.
#[derive(Clone, Debug, Serialize)]
pub struct PerturbationBound {
    pub max_f: f64,
    pub max_df: f64,
    pub max_curvature: f64,
    pub max_radius: f64,
    /// `C·(max|f| + max|f'|)`.
    pub bound: f64,
    /// The constant `C` actually used.
    pub constant: f64,
}

/// `γ_s = α + s·f·n` (outward normal `n`), rescaled to length 1 about the centroid of `α`
/// and reparametrized by arc length from `γ_s(0)`.
#[derive(Clone, Debug)]
pub struct NormalPerturbationPath {
    base: TableCurve,
    f: Arc<TrigSeries>,
    center: Vec2,
}

#[derive(Debug)]
struct Perturbed {
    base: TableCurve,
    f: Arc<TrigSeries>,
    s: f64,
}

const CURVATURE_STEP: f64 = 1e-5;

impl Perturbed {
    /// With `T, N = T⊥, n = -N`: `γ' = (1 + sfκ)T - sf'N`.
    fn first(&self, u: f64) -> (crate::curves::Frame, f64, f64, Vec2) {
        let fr = self.base.frame(u);
        let (f, df, _) = self.f.eval(u);
        let a = 1.0 + self.s * f * fr.curvature;
        let b = self.s * df;
        let d1 = fr.tangent * a - fr.tangent.perp() * b;
        (fr, a, b, d1)
    }
}

impl RawCurve for Perturbed {
    fn eval(&self, u: f64) -> RawPoint {
        let (fr, a, b, d1) = self.first(u);
        let (f, df, ddf) = self.f.eval(u);
        let kp = (self.base.curvature(u + CURVATURE_STEP) - self.base.curvature(u - CURVATURE_STEP))
            / (2.0 * CURVATURE_STEP);
        let k = fr.curvature;
        let t = fr.tangent;
        let nrm = t.perp();
        // γ'' = (a' + bκ)T + (aκ - b')N with a' = s(fκ)', b' = sf''.
        let c = self.s * (f * kp + df * k) + b * k;
        let d = a * k - self.s * ddf;
        RawPoint {
            pos: fr.position - nrm * (self.s * f),
            d1,
            d2: t * c + nrm * d,
        }
    }

    fn speed(&self, u: f64) -> f64 {
        self.first(u).3.norm()
    }
}

const F_CHECK: usize = 4096;
const SLICE_CHECKS: usize = 16;

/// Builds the perturbation path from `N ≥ 256` uniform samples of `f` and evaluates the bound.
pub fn normal_perturbation_path(
    t: &TableCurve,
    samples: &[f64],
) -> Result<(NormalPerturbationPath, PerturbationBound)> {
    if samples.len() < 256 {
        return Err(Error::InvalidInput(format!(
            "perturbation needs at least 256 samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite perturbation sample".into()));
    }
    if !t.is_strictly_convex() {
        return Err(Error::NotStrictlyConvex);
    }
    let f = Arc::new(TrigSeries::interpolate(samples));
    let center = t.centroid();
    let (mut a_max, mut b_max, mut k_max, mut r_max) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..F_CHECK {
        let u = i as f64 / F_CHECK as f64;
        let (v, dv, _) = f.eval(u);
        let fr = t.frame(u);
        a_max = a_max.max(v.abs());
        b_max = b_max.max(dv.abs());
        k_max = k_max.max(fr.curvature);
        r_max = r_max.max(fr.position.dist(center));
    }
    if a_max * k_max >= 0.5 {
        return Err(Error::PerturbationTooLarge(format!(
            "max|f|·max κ = {} must stay below 1/2",
            a_max * k_max
        )));
    }
    let path = NormalPerturbationPath {
        base: t.clone(),
        f,
        center,
    };
    for j in 0..=SLICE_CHECKS {
        let s = j as f64 / SLICE_CHECKS as f64;
        let raw = path.raw(s);
        for i in 0..F_CHECK / 4 {
            let u = i as f64 / (F_CHECK / 4) as f64;
            let p = raw.eval(u);
            let speed = p.d1.norm();
            let kappa = p.d1.cross(p.d2) / (speed * speed * speed);
            if !(kappa > 0.0) || 1.0 / kappa <= CURVATURE_FLOOR {
                return Err(Error::CurvatureNotPositive {
                    min_radius: 1.0 / kappa,
                    angle: u,
                    at_s: Some(s),
                });
            }
        }
    }
    let m = 1.0 - a_max * k_max;
    let growth = a_max * k_max + b_max;
    let bound = (a_max + growth * ((r_max + a_max) / m + 2.0)) / m;
    let constant = if a_max + b_max > 0.0 {
        bound / (a_max + b_max)
    } else {
        // Limit of the ratio as f -> 0.
        (1.0 + k_max * (r_max + 2.0)).max(r_max + 2.0)
    };
    Ok((
        path,
        PerturbationBound {
            max_f: a_max,
            max_df: b_max,
            max_curvature: k_max,
            max_radius: r_max,
            bound,
            constant,
        },
    ))
}

impl NormalPerturbationPath {
    fn raw(&self, s: f64) -> Perturbed {
        Perturbed {
            base: self.base.clone(),
            f: Arc::clone(&self.f),
            s,
        }
    }

    fn build(&self, s: f64) -> Result<TableCurve> {
        let curve = ArcLengthCurve::new(self.raw(s), CurveKind::Reparametrized, self.center)?;
        Ok(TableCurve::from_repr(Arc::new(curve)))
    }
}

impl TablePath for NormalPerturbationPath {
    fn kind(&self) -> PathKind {
        PathKind::NormalPerturbation
    }

    fn slice(&self, s: f64) -> Result<PathSlice> {
        Ok(PathSlice {
            s,
            table: self.build(s)?,
            velocity: difference_velocity(s, VELOCITY_STEP, |x| self.build(x))?,
        })
    }
}

//! Paths of tables, the Hamiltonian generating the induced path of billiard
//! maps, and the geometric and Hofer lengths of such paths.

mod hofer;
mod paths;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

pub use hofer::{
    bracket_db, chord_speed_integral, hamilton_jacobi_residual, hofer_length, path_geometric_length,
    verify_comparison, Bracket, Certificate, GeometricLength, HjOptions, HoferLength, HoferOptions,
    LengthOptions,
};
pub use paths::{
    normal_perturbation_path, support_interp_path, translation_path, NormalPerturbationPath,
    PerturbationBound, SupportInterpPath, TranslationPath,
};

use crate::billiard::inverse_lifted;
use crate::curves::TableCurve;
use crate::error::Result;
use crate::geom::Vec2;

/// Step for finite-difference velocities of paths without an analytic derivative.
pub const VELOCITY_STEP: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    Translation,
    SupportInterp,
    NormalPerturbation,
    SmoothingRestriction,
}

/// Field `q -> ∂γ_s/∂s(q)` of one slice.
#[derive(Clone)]
pub enum Velocity {
    Constant(Vec2),
    Field(Arc<dyn Fn(f64) -> Vec2 + Send + Sync>),
    /// `(plus(q) - minus(q)) / span`.
    FiniteDifference {
        minus: TableCurve,
        plus: TableCurve,
        span: f64,
    },
}

impl fmt::Debug for Velocity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Velocity::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            Velocity::Field(_) => f.write_str("Field(..)"),
            Velocity::FiniteDifference { span, .. } => {
                f.debug_struct("FiniteDifference").field("span", span).finish()
            }
        }
    }
}

/// The table `γ_s` of a path together with its `s`-velocity.
#[derive(Clone, Debug)]
pub struct PathSlice {
    pub s: f64,
    pub table: TableCurve,
    pub velocity: Velocity,
}

impl PathSlice {
    #[inline]
    pub fn velocity(&self, q: f64) -> Vec2 {
        match &self.velocity {
            Velocity::Constant(v) => *v,
            Velocity::Field(f) => f(q),
            Velocity::FiniteDifference { minus, plus, span } => {
                (plus.position(q) - minus.position(q)) / *span
            }
        }
    }

    /// `∂F_s/∂s(q, Q) = ⟨u, ∂γ_s/∂s(Q) - ∂γ_s/∂s(q)⟩` with `u` the unit chord from `γ_s(q)` to `γ_s(Q)`.
    pub fn chord_speed(&self, q: f64, big_q: f64) -> f64 {
        let u = (self.table.position(big_q) - self.table.position(q)).normalized();
        u.dot(self.velocity(big_q) - self.velocity(q))
    }

    /// `H_s(Q, P) = -∂F_s/∂s(q_s(Q, P), Q)` where `(q_s, p_s) = ψ_s⁻¹(Q, P)`.
    pub fn hamiltonian(&self, big_q: f64, big_p: f64) -> Result<f64> {
        Ok(self.hamiltonian_with_bound(big_q, big_p)?.0)
    }

    /// The Hamiltonian together with `‖∂γ_s/∂s(q_s) - ∂γ_s/∂s(Q)‖`, which bounds its modulus.
    pub fn hamiltonian_with_bound(&self, big_q: f64, big_p: f64) -> Result<(f64, f64)> {
        let (q, _) = inverse_lifted(&self.table, big_q, big_p)?;
        let a = self.table.position(q);
        let b = self.table.position(big_q);
        let u = (b - a).normalized();
        let dv = self.velocity(big_q) - self.velocity(q);
        Ok((-u.dot(dv), dv.norm()))
    }
}

/// A smooth one-parameter family of tables `s ∈ [0, 1] -> γ_s`.
pub trait TablePath: Send + Sync {
    fn kind(&self) -> PathKind;

    fn slice(&self, s: f64) -> Result<PathSlice>;

    fn table(&self, s: f64) -> Result<TableCurve> {
        Ok(self.slice(s)?.table)
    }
}

/// Finite-difference velocity from neighbouring tables, one-sided at the ends of `[0, 1]`.
pub(crate) fn difference_velocity<F>(s: f64, h: f64, build: F) -> Result<Velocity>
where
    F: Fn(f64) -> Result<TableCurve>,
{
    let lo = (s - h).max(0.0);
    let hi = (s + h).min(1.0);
    Ok(Velocity::FiniteDifference {
        minus: build(lo)?,
        plus: build(hi)?,
        span: hi - lo,
    })
}

/// `H_s(Q, P)` on the path `path`.
pub fn hamiltonian_value(path: &dyn TablePath, s: f64, big_q: f64, big_p: f64) -> Result<f64> {
    path.slice(s)?.hamiltonian(big_q, big_p)
}

#[cfg(test)]
mod tests;

//! Sublevel-set barcodes of orbit functionals on the periodic grid, and bottleneck distances.

mod bottleneck;
mod cubical;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use bottleneck::{bottleneck_brute_force, bottleneck_distance};

use crate::curves::TableCurve;
use crate::dynamics::functional_gap;
use crate::error::{Error, Result};
use crate::geom::Vec2;

/// Default cap on the number of grid points `mⁿ`.
pub const DEFAULT_BUDGET: u64 = 1 << 24;
pub const MAX_DIMENSION: usize = 3;

/// Values on the periodic grid `(Z/m)ⁿ`, row-major with the last axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub n: usize,
    pub m: usize,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(n: usize, m: usize, values: Vec<f64>) -> Result<Self> {
        if !(1..=MAX_DIMENSION).contains(&n) {
            return Err(Error::InvalidInput(format!("grid dimension must be 1..=3, got {n}")));
        }
        if m < 3 {
            return Err(Error::InvalidInput(format!("grid resolution must be at least 3, got {m}")));
        }
        if values.len() != m.pow(n as u32) {
            return Err(Error::InvalidInput(format!("expected {} values, got {}", m.pow(n as u32), values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite grid value at index {i}")));
        }
        Ok(Self { n, m, values })
    }

    pub fn from_fn(n: usize, m: usize, f: impl Fn(&[usize]) -> f64 + Sync) -> Result<Self> {
        check_budget(n, m, DEFAULT_BUDGET)?;
        let len = m.pow(n as u32);
        let values = (0..len).into_par_iter().map(|i| f(&unravel(i, n, m))).collect();
        Self::new(n, m, values)
    }

    pub fn constant(n: usize, m: usize, c: f64) -> Result<Self> {
        Self::new(n, m, vec![c; m.pow(n as u32)])
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v + c).collect(),
            ..self.clone()
        }
    }

    pub fn index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.m + i)
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest difference between values at grid neighbors along one axis.
    pub fn max_oscillation(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.values.len() {
            let idx = unravel(i, self.n, self.m);
            for axis in 0..self.n {
                let mut next = idx.clone();
                next[axis] = (next[axis] + 1) % self.m;
                worst = worst.max((self.values[i] - self.values[self.index(&next)]).abs());
            }
        }
        worst
    }
}

fn unravel(mut i: usize, n: usize, m: usize) -> Vec<usize> {
    let mut idx = vec![0; n];
    for k in (0..n).rev() {
        idx[k] = i % m;
        i /= m;
    }
    idx
}

fn check_budget(n: usize, m: usize, budget: u64) -> Result<()> {
    let cells = (m as f64).powi(n as i32);
    if cells > budget as f64 {
        return Err(Error::ResolutionTooLarge {
            cells: cells.min(u64::MAX as f64) as u64,
            budget,
        });
    }
    Ok(())
}

/// `F(q_1, …, q_n) = Σ ‖γ(q_{i+1}) - γ(q_i)‖` at `q_i = j_i/m`, with `budget` on `mⁿ`.
/// Coinciding points contribute a zero chord.
pub fn sample_orbit_functional_with_budget(t: &TableCurve, n: usize, m: usize, budget: u64) -> Result<GridFunction> {
    if !(2..=MAX_DIMENSION).contains(&n) {
        return Err(Error::InvalidInput(format!("orbit period must be 2 or 3, got {n}")));
    }
    if m < 3 {
        return Err(Error::InvalidInput(format!("grid resolution must be at least 3, got {m}")));
    }
    check_budget(n, m, budget)?;
    let pts: Vec<Vec2> = (0..m).map(|j| t.position(j as f64 / m as f64)).collect();
    let chord = |i: usize, j: usize| if i == j { 0.0 } else { pts[i].dist(pts[j]) };
    let values = (0..m.pow(n as u32))
        .into_par_iter()
        .map(|i| {
            let idx = unravel(i, n, m);
            let mut terms: Vec<f64> = (0..n).map(|k| chord(idx[k], idx[(k + 1) % n])).collect();
            terms.sort_by(f64::total_cmp);
            terms.iter().sum()
        })
        .collect();
    GridFunction::new(n, m, values)
}

pub fn sample_orbit_functional(t: &TableCurve, n: usize, m: usize) -> Result<GridFunction> {
    sample_orbit_functional_with_budget(t, n, m, DEFAULT_BUDGET)
}

/// A persistence interval `(birth, death]`; `death = +∞` for essential classes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bar {
    pub degree: usize,
    pub birth: f64,
    pub death: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Endpoint {
    Finite(f64),
    Named(String),
}

#[derive(Serialize, Deserialize)]
struct BarRepr {
    degree: usize,
    birth: f64,
    death: Endpoint,
}

impl Serialize for Bar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let death = if self.death.is_finite() {
            Endpoint::Finite(self.death)
        } else {
            Endpoint::Named("inf".into())
        };
        BarRepr {
            degree: self.degree,
            birth: self.birth,
            death,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Bar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = BarRepr::deserialize(d)?;
        let death = match r.death {
            Endpoint::Finite(x) => x,
            Endpoint::Named(s) if s == "inf" => f64::INFINITY,
            Endpoint::Named(s) => return Err(serde::de::Error::custom(format!("bad death value {s:?}"))),
        };
        Ok(Bar {
            degree: r.degree,
            birth: r.birth,
            death,
        })
    }
}

/// Bars of all degrees `0..=n`, sorted by degree, birth, death.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<Bar>", try_from = "Vec<Bar>")]
pub struct Barcode {
    pub n: usize,
    pub bars: Vec<Bar>,
}

impl Barcode {
    pub fn new(n: usize, mut bars: Vec<Bar>) -> Self {
        bars.sort_by(|a, b| {
            a.degree
                .cmp(&b.degree)
                .then(a.birth.total_cmp(&b.birth))
                .then(a.death.total_cmp(&b.death))
        });
        Self { n, bars }
    }

    pub fn degree(&self, d: usize) -> impl Iterator<Item = &Bar> {
        self.bars.iter().filter(move |b| b.degree == d)
    }

    pub fn infinite_counts(&self) -> Vec<usize> {
        (0..=self.n)
            .map(|d| self.degree(d).filter(|b| b.death.is_infinite()).count())
            .collect()
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self::new(
            self.n,
            self.bars
                .iter()
                .map(|b| Bar {
                    birth: b.birth + c,
                    death: b.death + c,
                    ..*b
                })
                .collect(),
        )
    }
}

impl From<Barcode> for Vec<Bar> {
    fn from(b: Barcode) -> Self {
        b.bars
    }
}

impl TryFrom<Vec<Bar>> for Barcode {
    type Error = String;

    fn try_from(bars: Vec<Bar>) -> std::result::Result<Self, String> {
        if let Some(b) = bars.iter().find(|b| !(b.birth < b.death)) {
            return Err(format!("bar with birth {} ≥ death {}", b.birth, b.death));
        }
        let n = bars.iter().map(|b| b.degree).max().unwrap_or(0);
        Ok(Barcode::new(n, bars))
    }
}

/// Betti numbers of the n-torus.
pub fn torus_betti(n: usize) -> Vec<usize> {
    let mut row = vec![1usize];
    for _ in 0..n {
        let mut next = vec![1usize; row.len() + 1];
        for k in 1..row.len() {
            next[k] = row[k - 1] + row[k];
        }
        row = next;
    }
    row
}

/// Lower-star barcode of the periodic cubical complex, ties broken by cell index.
pub fn sublevel_barcode(g: &GridFunction) -> Barcode {
    cubical::barcode_with_ties(g, |c| c)
}

/// Same barcode computed with a caller-chosen order among equal-value cells of equal dimension.
pub fn sublevel_barcode_with_ties(g: &GridFunction, tie: impl Fn(usize) -> usize) -> Barcode {
    cubical::barcode_with_ties(g, tie)
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub n: usize,
    pub m: usize,
    pub barcode_a: Barcode,
    pub barcode_b: Barcode,
    /// Bottleneck distance per degree `0..=n`.
    pub bottleneck: Vec<f64>,
    /// `max |F_a - F_b|` away from the diagonal.
    pub gap: f64,
    /// `max |F_a - F_b|` over every grid point.
    pub sup_grid: f64,
    /// Twice the largest neighbor oscillation of `F_a - F_b`.
    pub slack: f64,
}

/// Barcodes of both orbit functionals and their per-degree bottleneck distances, checked
/// against the functional gap plus grid slack and against the grid sup distance.
pub fn stability_check(ta: &TableCurve, tb: &TableCurve, n: usize, m: usize) -> Result<StabilityReport> {
    let ga = sample_orbit_functional(ta, n, m)?;
    let gb = sample_orbit_functional(tb, n, m)?;
    let gap = functional_gap(ta, tb, n, m)?.gap;
    let diff = GridFunction {
        values: ga.values.iter().zip(&gb.values).map(|(a, b)| a - b).collect(),
        ..ga.clone()
    };
    let slack = 2.0 * diff.max_oscillation();
    let sup_grid = ga.sup_distance(&gb);
    let (barcode_a, barcode_b) = rayon::join(|| sublevel_barcode(&ga), || sublevel_barcode(&gb));
    let bottleneck: Vec<f64> = (0..=n)
        .into_par_iter()
        .map(|d| bottleneck_distance(&barcode_a, &barcode_b, d))
        .collect();
    for (degree, &b) in bottleneck.iter().enumerate() {
        let allowed = (gap + slack).min(sup_grid + 1e-12);
        if !(b <= allowed) {
            return Err(Error::StabilityViolated {
                degree,
                bottleneck: b,
                allowed,
            });
        }
    }
    Ok(StabilityReport {
        n,
        m,
        barcode_a,
        barcode_b,
        bottleneck,
        gap,
        sup_grid,
        slack,
    })
}

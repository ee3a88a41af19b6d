//! Convex billiard tables, their ball maps, geometric and Hofer lengths of
//! paths of tables, polygon smoothing, periodic orbits and persistence barcodes.
//!
//! Tables are closed counterclockwise curves of perimeter 1 in arc-length
//! parameter `q ∈ [0, 1)`; phase points are `(q, p)` with `p ∈ (-1, 1)` the
//! tangential component of the unit chord direction.

pub mod billiard;
pub mod cli;
pub mod curves;
pub mod dynamics;
pub mod error;
pub mod geom;
pub mod homotopy;
pub mod io;
pub mod persistence;
pub mod quadrature;
pub mod smoothing;

pub use error::{Error, Result};

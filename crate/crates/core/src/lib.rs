//! Numerical time-scale calculus on finite lattices.
//!
//! The crate models a time scale as a finite increasing point list and
//! implements the delta calculus on it exactly (isolated points) or as a
//! first-order approximation (dense-interval meshes). On top of that it
//! evaluates explicit two-dimensional Pachpatte-type bounds and checks them
//! against extremal witnesses built by forward recursion on the lattice.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases below fix the usual double-precision choice.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod lattice;
pub mod regressive;
pub mod scalar;
pub mod timescale;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{Axis, DarbouxSums, GridFn2, IndexRect, RectPartition, TimeScale2D};
pub use regressive::{circle_minus, circle_plus, comparison_bound, exp_fn, regressivity, RegressivityReport};
pub use scalar::{Compensated, Scalar};
pub use timescale::{Density, GridFn1, TimeScale};

pub type TimeScale64 = TimeScale<f64>;
pub type TimeScale2D64 = TimeScale2D<f64>;
pub type GridFn1_64 = GridFn1<f64>;
pub type GridFn2_64 = GridFn2<f64>;

pub type TimeScale32 = TimeScale<f32>;
pub type GridFn1_32 = GridFn1<f32>;
pub type GridFn2_32 = GridFn2<f32>;

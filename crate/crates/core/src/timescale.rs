//! One-dimensional time scales and the pointwise delta calculus on them.
//!
//! A [`TimeScale`] is a finite, strictly increasing list of abscissae. Closed
//! real intervals of a modelled scale are stood in for by uniform meshes whose
//! points carry [`Density::DenseApprox`]; on those points the forward
//! difference is a first-order approximation of the classical derivative,
//! while on [`Density::Exact`] points it *is* the delta derivative.

use std::ops::Range;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Compensated, Scalar};

/// Absolute tolerance under which two abscissae are merged by [`TimeScale::union`].
pub const UNION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Density {
    /// A genuine isolated point of the modelled scale.
    Exact,
    /// A mesh sample standing in for a dense interval.
    DenseApprox,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeScale<T> {
    points: Vec<T>,
    density: Vec<Density>,
}

impl<T: Scalar> TimeScale<T> {
    pub fn new(points: Vec<T>, density: Vec<Density>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::domain(format!("a time scale needs at least 2 points, got {}", points.len())));
        }
        if density.len() != points.len() {
            return Err(Error::domain("density tags must match the point count"));
        }
        if let Some(i) = points.iter().position(|t| !t.is_finite()) {
            return Err(Error::domain(format!("point {i} is not finite")));
        }
        if let Some(i) = points.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::domain(format!(
                "points must be strictly increasing (index {} -> {}: {} then {})",
                i,
                i + 1,
                points[i],
                points[i + 1]
            )));
        }
        Ok(Self { points, density })
    }

    /// Explicit point list, every point tagged [`Density::Exact`].
    pub fn from_points(points: Vec<T>) -> Result<Self> {
        let density = vec![Density::Exact; points.len()];
        Self::new(points, density)
    }

    /// `{start, start+1, ..., end}` (inclusive).
    pub fn integer_segment(start: i64, end: i64) -> Result<Self> {
        if end <= start {
            return Err(Error::domain(format!("integer segment needs start < end, got {start}..{end}")));
        }
        let points = (start..=end)
            .map(|k| T::from_i64(k).ok_or_else(|| Error::domain("integer not representable")))
            .collect::<Result<Vec<_>>>()?;
        Self::from_points(points)
    }

    /// `{start + k*h : k = 0..=steps}`.
    pub fn h_grid(start: T, h: T, steps: usize) -> Result<Self> {
        if !(h > T::zero()) {
            return Err(Error::domain("h must be positive"));
        }
        if steps < 1 {
            return Err(Error::domain("an h-grid needs at least one step"));
        }
        let points = (0..=steps).map(|k| start + T::from_index(k) * h).collect();
        Self::from_points(points)
    }

    /// `{q^0, q^1, ..., q^n}`.
    pub fn q_grid(q: T, n: usize) -> Result<Self> {
        if !(q > T::one()) {
            return Err(Error::domain("q must exceed 1"));
        }
        if n < 1 {
            return Err(Error::domain("a q-grid needs N >= 1"));
        }
        let points = (0..=n).map(|k| q.powi(k as i32)).collect();
        Self::from_points(points)
    }

    /// Uniform mesh of `[start, end]` with `cells` cells, tagged [`Density::DenseApprox`].
    pub fn dense_mesh(start: T, end: T, cells: usize) -> Result<Self> {
        if !(end > start) {
            return Err(Error::domain("dense mesh needs start < end"));
        }
        if cells < 1 {
            return Err(Error::domain("dense mesh needs at least one cell"));
        }
        let n = T::from_index(cells);
        let points = (0..=cells)
            .map(|k| if k == cells { end } else { start + (end - start) * T::from_index(k) / n })
            .collect();
        Self::new(points, vec![Density::DenseApprox; cells + 1])
    }

    /// Sorted union of two scales. Abscissae closer than [`UNION_TOLERANCE`]
    /// are merged; a merged point is `Exact` if either source point was.
    pub fn union(&self, other: &Self) -> Result<Self> {
        let tol = T::lit(UNION_TOLERANCE);
        let mut merged: Vec<(T, Density)> = self
            .points
            .iter()
            .copied()
            .zip(self.density.iter().copied())
            .chain(other.points.iter().copied().zip(other.density.iter().copied()))
            .collect();
        merged.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite points"));
        let mut points: Vec<T> = Vec::with_capacity(merged.len());
        let mut density: Vec<Density> = Vec::with_capacity(merged.len());
        for (t, d) in merged {
            match points.last() {
                Some(&last) if (t - last).abs() <= tol => {
                    let tag = density.last_mut().expect("parallel vectors");
                    if d == Density::Exact {
                        *tag = Density::Exact;
                    }
                }
                _ => {
                    points.push(t);
                    density.push(d);
                }
            }
        }
        Self::new(points, density)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn densities(&self) -> &[Density] {
        &self.density
    }

    pub fn min(&self) -> T {
        self.points[0]
    }

    pub fn max(&self) -> T {
        self.points[self.points.len() - 1]
    }

    /// True when no point is a dense-mesh sample.
    pub fn is_exact(&self) -> bool {
        self.density.iter().all(|d| *d == Density::Exact)
    }

    fn check(&self, i: usize) -> Result<()> {
        if i < self.points.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: i, len: self.points.len() })
        }
    }

    pub fn point(&self, i: usize) -> Result<T> {
        self.check(i)?;
        Ok(self.points[i])
    }

    pub fn density(&self, i: usize) -> Result<Density> {
        self.check(i)?;
        Ok(self.density[i])
    }

    /// Forward jump. The maximum is its own successor.
    pub fn sigma(&self, i: usize) -> Result<usize> {
        self.check(i)?;
        Ok((i + 1).min(self.points.len() - 1))
    }

    /// Backward jump. The minimum is its own predecessor.
    pub fn rho(&self, i: usize) -> Result<usize> {
        self.check(i)?;
        Ok(i.saturating_sub(1))
    }

    /// Graininess `t_{σ(i)} - t_i`; zero only at the last point.
    pub fn mu(&self, i: usize) -> Result<T> {
        let s = self.sigma(i)?;
        Ok(self.points[s] - self.points[i])
    }

    /// Graininess without bounds checking beyond the slice index.
    #[inline]
    pub(crate) fn mu_at(&self, i: usize) -> T {
        if i + 1 < self.points.len() {
            self.points[i + 1] - self.points[i]
        } else {
            T::zero()
        }
    }

    /// Graininess at every point.
    pub fn graininess(&self) -> Vec<T> {
        (0..self.len()).map(|i| self.mu_at(i)).collect()
    }

    /// Number of points of the κ-set (the last point removed).
    pub fn kappa_len(&self) -> usize {
        self.points.len() - 1
    }

    /// Index of the point within `tol` of `t`, if any.
    pub fn index_of(&self, t: T, tol: T) -> Option<usize> {
        let pos = self.points.partition_point(|&p| p < t);
        [pos.checked_sub(1), Some(pos)]
            .into_iter()
            .flatten()
            .filter(|&i| i < self.points.len())
            .find(|&i| (self.points[i] - t).abs() <= tol)
    }

    pub fn shared(self) -> Arc<Self> {
        Arc::new(self)
    }
}

/// Real samples over a contiguous run of points of a [`TimeScale`].
///
/// Most functions cover the full scale; delta derivatives cover the κ-set
/// (everything but the last point) and bounds anchored at `a` cover `[a, max]`.
#[derive(Debug, Clone)]
pub struct GridFn1<T> {
    scale: Arc<TimeScale<T>>,
    start: usize,
    values: Vec<T>,
}

impl<T: Scalar> PartialEq for GridFn1<T> {
    fn eq(&self, other: &Self) -> bool {
        self.start == other.start && self.values == other.values && same_scale(&self.scale, &other.scale)
    }
}

pub(crate) fn same_scale<T: Scalar>(a: &Arc<TimeScale<T>>, b: &Arc<TimeScale<T>>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl<T: Scalar> GridFn1<T> {
    /// Samples starting at the first point. `values` must cover the full
    /// scale or its κ-set.
    pub fn new(scale: Arc<TimeScale<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != scale.len() && values.len() != scale.kappa_len() {
            return Err(Error::domain(format!(
                "{} values for a scale of {} points",
                values.len(),
                scale.len()
            )));
        }
        Self::with_support(scale, 0, values)
    }

    /// Samples over the index run `start..start + values.len()`.
    pub fn with_support(scale: Arc<TimeScale<T>>, start: usize, values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("a grid function needs at least one value"));
        }
        if start + values.len() > scale.len() {
            return Err(Error::domain(format!(
                "support {}..{} exceeds scale of {} points",
                start,
                start + values.len(),
                scale.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("value at index {} is not finite", start + i)));
        }
        Ok(Self { scale, start, values })
    }

    pub fn from_fn(scale: Arc<TimeScale<T>>, f: impl Fn(T) -> T) -> Result<Self> {
        let values = scale.points().iter().map(|&t| f(t)).collect();
        Self::new(scale, values)
    }

    pub fn constant(scale: Arc<TimeScale<T>>, c: T) -> Result<Self> {
        let n = scale.len();
        Self::new(scale, vec![c; n])
    }

    pub fn scale(&self) -> &Arc<TimeScale<T>> {
        &self.scale
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// First covered index.
    pub fn start(&self) -> usize {
        self.start
    }

    /// One past the last covered index.
    pub fn end(&self) -> usize {
        self.start + self.values.len()
    }

    pub fn indices(&self) -> Range<usize> {
        self.start..self.end()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.start == 0 && self.values.len() == self.scale.len()
    }

    /// Value at absolute index `i`.
    pub fn get(&self, i: usize) -> Result<T> {
        if self.indices().contains(&i) {
            Ok(self.values[i - self.start])
        } else {
            Err(Error::domain(format!("index {} outside the support {}..{}", i, self.start, self.end())))
        }
    }

    /// Value at absolute index `i`; panics outside the support.
    #[inline]
    pub fn at(&self, i: usize) -> T {
        self.values[i - self.start]
    }

    /// `(t_i, f_i)` pairs over the support.
    pub fn samples(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.indices().map(|i| (self.scale.points()[i], self.values[i - self.start]))
    }

    /// Extends the support to the last point by repeating the final value.
    pub fn pad_last(&self) -> Self {
        let mut values = self.values.clone();
        let last = *values.last().expect("non-empty");
        values.resize(self.scale.len() - self.start, last);
        Self { scale: self.scale.clone(), start: self.start, values }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        let values = self.values.iter().map(|&v| f(v)).collect();
        Self::with_support(self.scale.clone(), self.start, values)
    }

    pub(crate) fn require_same_support(&self, other: &Self) -> Result<()> {
        if !same_scale(&self.scale, &other.scale) {
            return Err(Error::domain("grid functions live on different scales"));
        }
        if self.start != other.start || self.values.len() != other.values.len() {
            return Err(Error::domain("grid functions have different supports"));
        }
        Ok(())
    }

    /// Pointwise combination of two functions on the same support.
    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.require_same_support(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self::with_support(self.scale.clone(), self.start, values)
    }

    /// Forward difference over the support, dropping its last index:
    /// `g_i = (f_{i+1} - f_i) / μ_i`.
    pub fn delta_derivative(&self) -> Result<Self> {
        if self.values.len() < 2 {
            return Err(Error::domain("delta derivative needs at least 2 points"));
        }
        let pts = self.scale.points();
        let values = self
            .values
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                let i = self.start + k;
                (w[1] - w[0]) / (pts[i + 1] - pts[i])
            })
            .collect();
        Self::with_support(self.scale.clone(), self.start, values)
    }

    /// `Σ_{i=a}^{b-1} f_i μ_i`, compensated and in ascending order.
    pub fn cauchy_integral(&self, a: usize, b: usize) -> Result<T> {
        self.scale.check(a)?;
        self.scale.check(b)?;
        if a > b {
            return Err(Error::domain(format!("integral bounds reversed: from index {a} to {b}")));
        }
        if a == b {
            return Ok(T::zero());
        }
        if a < self.start || b > self.end() {
            return Err(Error::domain(format!(
                "integrand support {}..{} does not cover {}..{}",
                self.start,
                self.end(),
                a,
                b
            )));
        }
        Ok((a..b).map(|i| self.at(i) * self.scale.mu_at(i)).collect::<Compensated<T>>().value())
    }

    /// The unique `F` on the full scale with `F(t0) = x0` and `F^Δ = f` on
    /// the κ-set. `f` must start at the first point and cover the κ-set.
    pub fn antiderivative(&self, t0: usize, x0: T) -> Result<Self> {
        let n = self.scale.len();
        self.scale.check(t0)?;
        if self.start != 0 || self.values.len() < n - 1 {
            return Err(Error::domain("antiderivative needs f on the whole κ-set"));
        }
        let mut out = vec![T::zero(); n];
        out[t0] = x0;
        let mut fwd = Compensated::starting_at(x0);
        for i in t0..n - 1 {
            fwd.add(self.values[i] * self.scale.mu_at(i));
            out[i + 1] = fwd.value();
        }
        let mut back = Compensated::starting_at(x0);
        for i in (0..t0).rev() {
            back.add(-(self.values[i] * self.scale.mu_at(i)));
            out[i] = back.value();
        }
        Self::new(self.scale.clone(), out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn z(n: i64) -> Arc<TimeScale<f64>> {
        TimeScale::integer_segment(0, n).unwrap().shared()
    }

    #[test]
    fn jumps_on_integer_segment() {
        let ts = z(3);
        assert_eq!(ts.sigma(1).unwrap(), 2);
        assert_eq!(ts.sigma(3).unwrap(), 3);
        assert_eq!(ts.rho(2).unwrap(), 1);
        assert_eq!(ts.rho(0).unwrap(), 0);
        assert!(matches!(ts.sigma(4), Err(Error::IndexOutOfRange { index: 4, len: 4 })));
        assert!(ts.mu(9).is_err());
    }

    #[test]
    fn jumps_on_q_grid() {
        let ts = TimeScale::<f64>::from_points(vec![1.0, 2.0, 4.0, 8.0]).unwrap();
        assert_eq!(ts.sigma(1).unwrap(), 2);
        assert_eq!(ts.rho(3).unwrap(), 2);
        assert_eq!(ts.mu(2).unwrap(), 4.0);
        assert_eq!(ts.mu(3).unwrap(), 0.0);
        assert_eq!(ts, TimeScale::q_grid(2.0, 3).unwrap());
    }

    #[test]
    fn graininess_of_h_grid() {
        let ts = TimeScale::<f64>::h_grid(0.0, 0.5, 6).unwrap();
        for i in 0..6 {
            assert_eq!(ts.mu(i).unwrap(), 0.5);
        }
        assert_eq!(ts.mu(6).unwrap(), 0.0);
    }

    #[test]
    fn constructor_validation() {
        assert!(TimeScale::<f64>::from_points(vec![0.0]).is_err());
        assert!(TimeScale::<f64>::from_points(vec![0.0, 0.0]).is_err());
        assert!(TimeScale::<f64>::from_points(vec![0.0, f64::NAN]).is_err());
        let e = TimeScale::<f64>::q_grid(1.0, 3).unwrap_err();
        assert!(e.to_string().contains("q must exceed 1"));
        assert!(TimeScale::<f64>::h_grid(0.0, 0.0, 3).is_err());
        assert!(TimeScale::<f64>::integer_segment(2, 2).is_err());
    }

    #[test]
    fn union_dedups_within_tolerance() {
        let a = TimeScale::<f64>::from_points(vec![0.0, 1.0, 2.0]).unwrap();
        let b = TimeScale::<f64>::new(vec![1.0 + 1e-13, 1.5, 3.0], vec![Density::DenseApprox; 3]).unwrap();
        let u = a.union(&b).unwrap();
        assert_eq!(u.points(), &[0.0, 1.0, 1.5, 2.0, 3.0]);
        assert_eq!(u.density(1).unwrap(), Density::Exact);
        assert_eq!(u.density(2).unwrap(), Density::DenseApprox);
    }

    #[test]
    fn index_lookup() {
        let ts = TimeScale::<f64>::q_grid(2.0, 4).unwrap();
        assert_eq!(ts.index_of(8.0, 1e-9), Some(3));
        assert_eq!(ts.index_of(7.9, 1e-9), None);
        assert_eq!(ts.index_of(16.0, 1e-9), Some(4));
    }

    #[test]
    fn derivative_examples() {
        let ts = z(5);
        let f = GridFn1::from_fn(ts.clone(), |t| t * t).unwrap();
        let d = f.delta_derivative().unwrap();
        assert_eq!(d.len(), 5);
        // (16 - 9) / 1
        assert_eq!(d.get(3).unwrap(), 7.0);
        assert!(d.get(5).is_err());

        let c = GridFn1::constant(ts, 4.2).unwrap();
        assert!(c.delta_derivative().unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn derivative_of_sin_on_fine_mesh() {
        let ts = TimeScale::<f64>::dense_mesh(0.0, 1.0, 1000).unwrap().shared();
        let f = GridFn1::from_fn(ts, f64::sin).unwrap();
        let d = f.delta_derivative().unwrap();
        assert!((d.at(0) - 1.0).abs() <= 1e-3);
    }

    #[test]
    fn integral_examples() {
        let f = GridFn1::from_fn(z(5), |t| t).unwrap();
        assert_eq!(f.cauchy_integral(0, 4).unwrap(), 6.0);
        assert_eq!(f.cauchy_integral(2, 2).unwrap(), 0.0);
        assert!(f.cauchy_integral(3, 1).is_err());

        let q = TimeScale::<f64>::from_points(vec![1.0, 2.0, 4.0]).unwrap().shared();
        let g = GridFn1::from_fn(q, |t| t).unwrap();
        assert_eq!(g.cauchy_integral(0, 2).unwrap(), 5.0);
    }

    #[test]
    fn antiderivative_examples() {
        let ts = z(6);
        let one = GridFn1::constant(ts.clone(), 1.0).unwrap();
        let big_f = one.antiderivative(0, 0.0).unwrap();
        assert_eq!(big_f.values(), &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);

        let zero = GridFn1::constant(ts.clone(), 0.0).unwrap();
        assert!(zero.antiderivative(3, -2.5).unwrap().values().iter().all(|&v| v == -2.5));

        let id = GridFn1::from_fn(ts.clone(), |t| t).unwrap();
        let anti = id.antiderivative(0, 0.0).unwrap();
        assert_eq!(anti.at(4), 6.0);
        assert_eq!(anti.at(4), id.cauchy_integral(0, 4).unwrap());

        // anchored in the middle: F(t) - F(t0) = ∫_{t0}^t f
        let mid = id.antiderivative(3, 1.0).unwrap();
        assert_relative_eq!(mid.at(0), 1.0 - (0.0 + 1.0 + 2.0));
        assert_eq!(mid.delta_derivative().unwrap().values(), &id.values()[..6]);
    }

    #[test]
    fn pad_last_is_explicit() {
        let f = GridFn1::from_fn(z(3), |t| t * t).unwrap();
        let d = f.delta_derivative().unwrap();
        assert!(!d.is_full());
        let p = d.pad_last();
        assert!(p.is_full());
        assert_eq!(p.values(), &[1.0, 3.0, 5.0, 5.0]);
    }

    #[test]
    fn support_checks() {
        let ts = z(3);
        assert!(GridFn1::new(ts.clone(), vec![1.0; 2]).is_err());
        assert!(GridFn1::new(ts.clone(), vec![1.0, f64::INFINITY, 0.0, 0.0]).is_err());
        let other = z(4);
        let a = GridFn1::constant(ts, 1.0).unwrap();
        let b = GridFn1::constant(other, 1.0).unwrap();
        assert!(a.zip_with(&b, |x, y| x + y).is_err());
    }
}

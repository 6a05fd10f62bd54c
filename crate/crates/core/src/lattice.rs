//! Product time scales `T1 × T2`, grid functions on them, partial delta
//! derivatives, double Δ-integrals and Darboux Δ-sums.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{Compensated, Scalar};
use crate::timescale::{same_scale, TimeScale};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    First,
    Second,
}

impl TryFrom<u8> for Axis {
    type Error = Error;

    fn try_from(axis: u8) -> Result<Self> {
        match axis {
            1 => Ok(Axis::First),
            2 => Ok(Axis::Second),
            other => Err(Error::domain(format!("axis must be 1 or 2, got {other}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TimeScale2D<T> {
    first: Arc<TimeScale<T>>,
    second: Arc<TimeScale<T>>,
}

impl<T: Scalar> PartialEq for TimeScale2D<T> {
    fn eq(&self, other: &Self) -> bool {
        same_scale(&self.first, &other.first) && same_scale(&self.second, &other.second)
    }
}

impl<T: Scalar> TimeScale2D<T> {
    pub fn new(first: Arc<TimeScale<T>>, second: Arc<TimeScale<T>>) -> Self {
        Self { first, second }
    }

    pub fn first(&self) -> &Arc<TimeScale<T>> {
        &self.first
    }

    pub fn second(&self) -> &Arc<TimeScale<T>> {
        &self.second
    }

    pub fn axis(&self, axis: Axis) -> &Arc<TimeScale<T>> {
        match axis {
            Axis::First => &self.first,
            Axis::Second => &self.second,
        }
    }

    /// `(n1, n2)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.first.len(), self.second.len())
    }

    /// Shape of `κ1 × κ2`.
    pub fn kappa_shape(&self) -> (usize, usize) {
        (self.first.kappa_len(), self.second.kappa_len())
    }
}

/// Row-major samples on the index block `[0, rows) × [0, cols)` of a product
/// scale. Full-domain functions have `(rows, cols) = (n1, n2)`; derivatives
/// and bounds live on the κ-restrictions.
#[derive(Debug, Clone)]
pub struct GridFn2<T> {
    domain: TimeScale2D<T>,
    rows: usize,
    cols: usize,
    values: Vec<T>,
}

impl<T: Scalar> PartialEq for GridFn2<T> {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.values == other.values
            && self.domain == other.domain
    }
}

impl<T: Scalar> GridFn2<T> {
    pub fn new(domain: TimeScale2D<T>, rows: usize, cols: usize, values: Vec<T>) -> Result<Self> {
        let (n1, n2) = domain.shape();
        if rows == 0 || cols == 0 || rows > n1 || cols > n2 {
            return Err(Error::domain(format!("block {rows}x{cols} does not fit a {n1}x{n2} lattice")));
        }
        if values.len() != rows * cols {
            return Err(Error::domain(format!("{} values for a {rows}x{cols} block", values.len())));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("value at ({}, {}) is not finite", k / cols, k % cols)));
        }
        Ok(Self { domain, rows, cols, values })
    }

    /// Samples `f(t1, t2)` on the full lattice.
    pub fn from_fn(domain: TimeScale2D<T>, f: impl Fn(T, T) -> T) -> Result<Self> {
        let (n1, n2) = domain.shape();
        let p1 = domain.first.points();
        let p2 = domain.second.points();
        let values =
            (0..n1).flat_map(|i| (0..n2).map(move |j| (i, j))).map(|(i, j)| f(p1[i], p2[j])).collect();
        Self::new(domain, n1, n2, values)
    }

    /// Values from an index function on a `rows × cols` block.
    pub fn from_index_fn(
        domain: TimeScale2D<T>,
        rows: usize,
        cols: usize,
        f: impl Fn(usize, usize) -> T,
    ) -> Result<Self> {
        let values = (0..rows).flat_map(|i| (0..cols).map(move |j| (i, j))).map(|(i, j)| f(i, j)).collect();
        Self::new(domain, rows, cols, values)
    }

    pub fn constant(domain: TimeScale2D<T>, c: T) -> Result<Self> {
        let (n1, n2) = domain.shape();
        Self::new(domain, n1, n2, vec![c; n1 * n2])
    }

    pub fn domain(&self) -> &TimeScale2D<T> {
        &self.domain
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn is_full(&self) -> bool {
        (self.rows, self.cols) == self.domain.shape()
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        debug_assert!(i < self.rows && j < self.cols);
        self.values[i * self.cols + j]
    }

    pub fn get(&self, i: usize, j: usize) -> Result<T> {
        if i < self.rows && j < self.cols {
            Ok(self.at(i, j))
        } else {
            Err(Error::domain(format!("({i}, {j}) outside the {}x{} block", self.rows, self.cols)))
        }
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    /// The leading `rows × cols` block.
    pub fn restrict(&self, rows: usize, cols: usize) -> Result<Self> {
        if rows > self.rows || cols > self.cols {
            return Err(Error::domain(format!(
                "cannot restrict a {}x{} block to {rows}x{cols}",
                self.rows, self.cols
            )));
        }
        Self::from_index_fn(self.domain.clone(), rows, cols, |i, j| self.at(i, j))
    }

    /// Restriction to `κ1 × κ2`.
    pub fn kappa(&self) -> Result<Self> {
        let (k1, k2) = self.domain.kappa_shape();
        self.restrict(k1, k2)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(self.domain.clone(), self.rows, self.cols, self.values.iter().map(|&v| f(v)).collect())
    }

    pub(crate) fn require_same_shape(&self, other: &Self) -> Result<()> {
        if self.domain != other.domain {
            return Err(Error::domain("grid functions live on different lattices"));
        }
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::domain(format!(
                "block shapes differ: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.require_same_shape(other)?;
        Self::new(
            self.domain.clone(),
            self.rows,
            self.cols,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    pub fn min_value(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Forward difference along `axis` divided by that axis' graininess.
    pub fn partial_delta(&self, axis: Axis) -> Result<Self> {
        let (rows, cols) = match axis {
            Axis::First => (self.rows.checked_sub(1), Some(self.cols)),
            Axis::Second => (Some(self.rows), self.cols.checked_sub(1)),
        };
        let (Some(rows), Some(cols)) = (rows, cols) else {
            return Err(Error::domain("partial derivative needs at least 2 points on the axis"));
        };
        if rows == 0 || cols == 0 {
            return Err(Error::domain("partial derivative needs at least 2 points on the axis"));
        }
        let p = self.domain.axis(axis).points();
        Self::from_index_fn(self.domain.clone(), rows, cols, |i, j| match axis {
            Axis::First => (self.at(i + 1, j) - self.at(i, j)) / (p[i + 1] - p[i]),
            Axis::Second => (self.at(i, j + 1) - self.at(i, j)) / (p[j + 1] - p[j]),
        })
    }

    /// `Δ2(Δ1 f)` on `κ1 × κ2`.
    pub fn mixed_partial(&self) -> Result<Self> {
        self.partial_delta(Axis::First)?.partial_delta(Axis::Second)
    }

    fn check_rect(&self, r: &IndexRect) -> Result<()> {
        let (n1, n2) = self.domain.shape();
        if r.a1 > r.b1 || r.a2 > r.b2 {
            return Err(Error::domain(format!("inverted rectangle {r:?}")));
        }
        if r.b1 >= n1 || r.b2 >= n2 {
            return Err(Error::IndexOutOfRange { index: r.b1.max(r.b2), len: n1.min(n2) });
        }
        if r.b1 > self.rows || r.b2 > self.cols {
            return Err(Error::domain(format!(
                "rectangle {r:?} exceeds the {}x{} block",
                self.rows, self.cols
            )));
        }
        Ok(())
    }

    /// `Σ_{i=a1}^{b1-1} Σ_{j=a2}^{b2-1} f(i,j) μ1(i) μ2(j)`, lexicographic order.
    pub fn double_integral(&self, r: &IndexRect) -> Result<T> {
        self.check_rect(r)?;
        let (s1, s2) = (&self.domain.first, &self.domain.second);
        let mut acc = Compensated::new();
        for i in r.a1..r.b1 {
            let m1 = s1.mu_at(i);
            for j in r.a2..r.b2 {
                acc.add(self.at(i, j) * m1 * s2.mu_at(j));
            }
        }
        Ok(acc.value())
    }

    /// Iterated integral. `inner` names the axis integrated first.
    pub fn iterated_integral(&self, r: &IndexRect, inner: Axis) -> Result<T> {
        self.check_rect(r)?;
        let (s1, s2) = (&self.domain.first, &self.domain.second);
        let total = match inner {
            Axis::Second => (r.a1..r.b1)
                .map(|i| {
                    let row: T =
                        (r.a2..r.b2).map(|j| self.at(i, j) * s2.mu_at(j)).collect::<Compensated<T>>().value();
                    row * s1.mu_at(i)
                })
                .collect::<Compensated<T>>(),
            Axis::First => (r.a2..r.b2)
                .map(|j| {
                    let col: T =
                        (r.a1..r.b1).map(|i| self.at(i, j) * s1.mu_at(i)).collect::<Compensated<T>>().value();
                    col * s2.mu_at(j)
                })
                .collect::<Compensated<T>>(),
        };
        Ok(total.value())
    }

    /// `R(i, j) = ∫_{t2^0}^{t2^j} f(i, s) Δ2 s` for every row and every `j`
    /// with `s < j` inside the block.
    pub fn integral_along_second(&self) -> Result<Self> {
        let n2 = self.domain.second.len();
        let out_cols = (self.cols + 1).min(n2);
        let s2 = &self.domain.second;
        let mut values = Vec::with_capacity(self.rows * out_cols);
        for i in 0..self.rows {
            let mut acc = Compensated::new();
            values.push(T::zero());
            for j in 1..out_cols {
                acc.add(self.at(i, j - 1) * s2.mu_at(j - 1));
                values.push(acc.value());
            }
        }
        Self::new(self.domain.clone(), self.rows, out_cols, values)
    }

    /// `C(i, j) = ∫_{t1^0}^{t1^i} f(s, j) Δ1 s`.
    pub fn integral_along_first(&self) -> Result<Self> {
        let n1 = self.domain.first.len();
        let out_rows = (self.rows + 1).min(n1);
        let s1 = &self.domain.first;
        let mut acc = vec![Compensated::new(); self.cols];
        let mut values = vec![T::zero(); self.cols];
        for i in 1..out_rows {
            let m1 = s1.mu_at(i - 1);
            for (j, a) in acc.iter_mut().enumerate() {
                a.add(self.at(i - 1, j) * m1);
                values.push(a.value());
            }
        }
        Self::new(self.domain.clone(), out_rows, self.cols, values)
    }

    /// `D(i, j) = ∫∫_{[t^0, t)} f` over both axes from the lattice origin.
    pub fn double_integral_from_origin(&self) -> Result<Self> {
        self.integral_along_second()?.integral_along_first()
    }

    /// Upper and lower Darboux Δ-sums over `p`. Cell suprema and infima range
    /// over the grid points inside each half-open cell.
    pub fn darboux_sums(&self, p: &RectPartition) -> Result<DarbouxSums<T>> {
        let (n1, n2) = self.domain.shape();
        let last1 = *p.cuts1.last().expect("validated");
        let last2 = *p.cuts2.last().expect("validated");
        if last1 >= n1 || last2 >= n2 {
            return Err(Error::Partition(format!("cut ({last1}, {last2}) beyond the {n1}x{n2} lattice")));
        }
        if last1 > self.rows || last2 > self.cols {
            return Err(Error::Partition(format!(
                "partition reaches ({last1}, {last2}) but f covers {}x{}",
                self.rows, self.cols
            )));
        }
        let (p1, p2) = (self.domain.first.points(), self.domain.second.points());
        let mut upper = Compensated::new();
        let mut lower = Compensated::new();
        for w1 in p.cuts1.windows(2) {
            let side1 = p1[w1[1]] - p1[w1[0]];
            for w2 in p.cuts2.windows(2) {
                let side2 = p2[w2[1]] - p2[w2[0]];
                let (mut sup, mut inf) = (T::neg_infinity(), T::infinity());
                for i in w1[0]..w1[1] {
                    for j in w2[0]..w2[1] {
                        let v = self.at(i, j);
                        sup = sup.max(v);
                        inf = inf.min(v);
                    }
                }
                upper.add(sup * side1 * side2);
                lower.add(inf * side1 * side2);
            }
        }
        Ok(DarbouxSums { upper: upper.value(), lower: lower.value() })
    }
}

/// Index rectangle `[a1, b1) × [a2, b2)`; endpoints are point indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexRect {
    pub a1: usize,
    pub b1: usize,
    pub a2: usize,
    pub b2: usize,
}

impl IndexRect {
    pub fn new(a1: usize, b1: usize, a2: usize, b2: usize) -> Self {
        Self { a1, b1, a2, b2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarbouxSums<T> {
    pub upper: T,
    pub lower: T,
}

/// Product of two Δ-partitions, given as strictly increasing cut indices
/// that include both rectangle endpoints. Every cell holds at least one
/// grid point because cuts are distinct point indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RectPartition {
    cuts1: Vec<usize>,
    cuts2: Vec<usize>,
}

impl RectPartition {
    pub fn new(cuts1: Vec<usize>, cuts2: Vec<usize>) -> Result<Self> {
        for (name, cuts) in [("first", &cuts1), ("second", &cuts2)] {
            if cuts.len() < 2 {
                return Err(Error::Partition(format!("{name} axis needs at least two cuts")));
            }
            if cuts.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Partition(format!(
                    "{name} axis cuts must be strictly increasing (empty cells are not allowed)"
                )));
            }
        }
        Ok(Self { cuts1, cuts2 })
    }

    /// One cell per lattice step of `r`.
    pub fn finest(r: &IndexRect) -> Result<Self> {
        Self::new((r.a1..=r.b1).collect(), (r.a2..=r.b2).collect())
    }

    /// The whole rectangle as a single cell.
    pub fn single_cell(r: &IndexRect) -> Result<Self> {
        Self::new(vec![r.a1, r.b1], vec![r.a2, r.b2])
    }

    pub fn cuts(&self, axis: Axis) -> &[usize] {
        match axis {
            Axis::First => &self.cuts1,
            Axis::Second => &self.cuts2,
        }
    }

    pub fn rect(&self) -> IndexRect {
        IndexRect::new(
            self.cuts1[0],
            *self.cuts1.last().expect("validated"),
            self.cuts2[0],
            *self.cuts2.last().expect("validated"),
        )
    }

    /// Adds an interior cut. Cuts already present or outside the rectangle
    /// leave the partition unchanged.
    pub fn refine(&self, axis: Axis, cut: usize) -> Self {
        let mut out = self.clone();
        let cuts = match axis {
            Axis::First => &mut out.cuts1,
            Axis::Second => &mut out.cuts2,
        };
        let (lo, hi) = (cuts[0], *cuts.last().expect("validated"));
        if cut > lo && cut < hi {
            if let Err(pos) = cuts.binary_search(&cut) {
                cuts.insert(pos, cut);
            }
        }
        out
    }
}

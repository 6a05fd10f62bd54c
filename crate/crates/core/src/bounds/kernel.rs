use std::sync::Arc;

use crate::scalar::Scalar;
use crate::timescale::TimeScale;

/// Upper bound on memoized kernel entries (`n1² · n2²`).
pub const KERNEL_MEMO_CAP: usize = 100_000_000;

/// `k(t1, t2, s1, s2)` evaluated on lattice indices. The first two slots
/// take any point index, so `σ`-shifted arguments of κ-points are valid.
pub trait Kernel<T>: Send + Sync {
    fn eval(&self, x1: usize, x2: usize, y1: usize, y2: usize) -> T;
}

impl<T, F> Kernel<T> for F
where
    F: Fn(usize, usize, usize, usize) -> T + Send + Sync,
{
    fn eval(&self, x1: usize, x2: usize, y1: usize, y2: usize) -> T {
        self(x1, x2, y1, y2)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantKernel<T>(pub T);

impl<T: Scalar> Kernel<T> for ConstantKernel<T> {
    fn eval(&self, _: usize, _: usize, _: usize, _: usize) -> T {
        self.0
    }
}

/// Tabulates a kernel over the whole 4-index lattice when it fits under
/// [`KERNEL_MEMO_CAP`]; otherwise forwards every call.
pub struct MemoKernel<T> {
    inner: Arc<dyn Kernel<T>>,
    shape: (usize, usize),
    table: Option<Vec<T>>,
}

impl<T: Scalar> MemoKernel<T> {
    pub fn new(inner: Arc<dyn Kernel<T>>, n1: usize, n2: usize) -> Self {
        let entries = n1.checked_mul(n1).and_then(|x| x.checked_mul(n2)).and_then(|x| x.checked_mul(n2));
        let table = entries.filter(|&e| e <= KERNEL_MEMO_CAP).map(|e| {
            let mut t = Vec::with_capacity(e);
            for x1 in 0..n1 {
                for x2 in 0..n2 {
                    for y1 in 0..n1 {
                        for y2 in 0..n2 {
                            t.push(inner.eval(x1, x2, y1, y2));
                        }
                    }
                }
            }
            t
        });
        Self { inner, shape: (n1, n2), table }
    }

    pub fn is_tabulated(&self) -> bool {
        self.table.is_some()
    }
}

impl<T: Scalar> Kernel<T> for MemoKernel<T> {
    #[inline]
    fn eval(&self, x1: usize, x2: usize, y1: usize, y2: usize) -> T {
        match &self.table {
            Some(t) => {
                let (n1, n2) = self.shape;
                t[((x1 * n2 + x2) * n1 + y1) * n2 + y2]
            }
            None => self.inner.eval(x1, x2, y1, y2),
        }
    }
}

/// Lattice forward differences of a kernel in its first two slots.
pub(crate) struct KernelDiffs<'a, T> {
    pub k: &'a dyn Kernel<T>,
    pub s1: &'a TimeScale<T>,
    pub s2: &'a TimeScale<T>,
}

impl<T: Scalar> KernelDiffs<'_, T> {
    /// `k^{Δ1}(x1, x2, y1, y2)`; needs `x1` in κ1.
    #[inline]
    pub fn d1(&self, x1: usize, x2: usize, y1: usize, y2: usize) -> T {
        (self.k.eval(x1 + 1, x2, y1, y2) - self.k.eval(x1, x2, y1, y2)) / self.s1.mu_at(x1)
    }

    /// `k^{Δ2}(x1, x2, y1, y2)`; needs `x2` in κ2.
    #[inline]
    pub fn d2(&self, x1: usize, x2: usize, y1: usize, y2: usize) -> T {
        (self.k.eval(x1, x2 + 1, y1, y2) - self.k.eval(x1, x2, y1, y2)) / self.s2.mu_at(x2)
    }

    /// `k^{Δ1Δ2}(x1, x2, y1, y2)`; needs `(x1, x2)` in κ1 × κ2.
    #[inline]
    pub fn d12(&self, x1: usize, x2: usize, y1: usize, y2: usize) -> T {
        let k = self.k;
        (k.eval(x1 + 1, x2 + 1, y1, y2) - k.eval(x1 + 1, x2, y1, y2) - k.eval(x1, x2 + 1, y1, y2)
            + k.eval(x1, x2, y1, y2))
            / (self.s1.mu_at(x1) * self.s2.mu_at(x2))
    }
}

//! Extremal witnesses built by forward recursion on the lattice.
//!
//! Each value depends only on strictly smaller indices in both variables,
//! so every recursion is explicit. Row `i` reads rows `< i` through
//! per-column compensated accumulators
//! `C(b) = Σ_{a < i} f(a, b) μ1(a)`, and the double integral at `(i, j)` is
//! the running row sum `Σ_{b < j} C(b) μ2(b)`.
//!
//! `theta`, when present, scales the feedback term pointwise; values in
//! `[0, 1)` give witnesses strictly inside the hypothesis.

use rayon::prelude::*;

use crate::bounds::Kernel;
use crate::error::{Error, Result};
use crate::lattice::{GridFn2, TimeScale2D};
use crate::regressive::require_regressive;
use crate::scalar::{Compensated, Scalar};
use crate::timescale::GridFn1;

fn theta_at<T: Scalar>(theta: Option<&GridFn2<T>>, i: usize, j: usize) -> T {
    theta.map_or(T::one(), |t| t.at(i, j))
}

fn check_full<T: Scalar>(domain: &TimeScale2D<T>, gs: &[(&str, &GridFn2<T>)]) -> Result<()> {
    for (name, g) in gs {
        if g.domain() != domain || !g.is_full() {
            return Err(Error::input(format!("{name} must cover the full lattice")));
        }
    }
    Ok(())
}

/// Column accumulators for `ΣΣ_{a < i, b < j} f(a, b) μ1(a) μ2(b)`.
struct Prefix2<T> {
    cols: Vec<Compensated<T>>,
}

impl<T: Scalar> Prefix2<T> {
    fn new(n2: usize) -> Self {
        Self { cols: vec![Compensated::new(); n2] }
    }

    /// Values of the double integral along the current row.
    fn row(&self, mu2: &[T]) -> Vec<T> {
        let mut acc = Compensated::new();
        let mut out = Vec::with_capacity(self.cols.len());
        for (b, c) in self.cols.iter().enumerate() {
            out.push(acc.value());
            acc.add(c.value() * mu2[b]);
        }
        out
    }

    /// Folds the finished row `f(i, ·)` into the accumulators.
    fn push_row(&mut self, mu1: T, f: impl Fn(usize) -> T) {
        for (b, c) in self.cols.iter_mut().enumerate() {
            c.add(f(b) * mu1);
        }
    }
}

/// `u = p + θ q ∫∫ k u` with equality at every lattice point.
pub fn witness_corollary<T: Scalar>(
    p: &GridFn2<T>,
    q: &GridFn2<T>,
    k: &GridFn2<T>,
    theta: Option<&GridFn2<T>>,
) -> Result<GridFn2<T>> {
    let d = p.domain();
    check_full(d, &[("p", p), ("q", q), ("k", k)])?;
    let (n1, n2) = d.shape();
    let (mu1, mu2) = (d.first().graininess(), d.second().graininess());
    let mut u = vec![T::zero(); n1 * n2];
    let mut acc = Prefix2::new(n2);
    for i in 0..n1 {
        let s = acc.row(&mu2);
        for j in 0..n2 {
            u[i * n2 + j] = p.at(i, j) + theta_at(theta, i, j) * q.at(i, j) * s[j];
        }
        let row = &u[i * n2..(i + 1) * n2];
        acc.push_row(mu1[i], |b| k.at(i, b) * row[b]);
    }
    GridFn2::new(d.clone(), n1, n2, u)
}

/// `u = p + θ q ∫∫ k(t1, t2, s1, s2) u(s1, s2)`. The kernel depends on
/// the outer point, so each value is a full double sum; a row is computed
/// in parallel once all earlier rows are known.
pub fn witness_kernel<T: Scalar>(
    p: &GridFn2<T>,
    q: &GridFn2<T>,
    kernel: &dyn Kernel<T>,
    theta: Option<&GridFn2<T>>,
) -> Result<GridFn2<T>> {
    let d = p.domain();
    check_full(d, &[("p", p), ("q", q)])?;
    let (n1, n2) = d.shape();
    let (mu1, mu2) = (d.first().graininess(), d.second().graininess());
    let mut u = vec![T::zero(); n1 * n2];
    for i in 0..n1 {
        let (done, _) = u.split_at(i * n2);
        let row: Vec<T> = (0..n2)
            .into_par_iter()
            .map(|j| {
                let mut s = Compensated::new();
                for a in 0..i {
                    for b in 0..j {
                        s.add(kernel.eval(i, j, a, b) * done[a * n2 + b] * mu1[a] * mu2[b]);
                    }
                }
                p.at(i, j) + theta_at(theta, i, j) * q.at(i, j) * s.value()
            })
            .collect();
        u[i * n2..(i + 1) * n2].copy_from_slice(&row);
    }
    GridFn2::new(d.clone(), n1, n2, u)
}

/// Coupled equality solution
/// `u = c1 + θu ∫∫ (h1 u + h2 v)`, `v = c2 + θv ∫∫ (h3 u + h4 v)`.
pub fn witness_system<T: Scalar>(
    c1: T,
    c2: T,
    h: &[GridFn2<T>; 4],
    theta: Option<(&GridFn2<T>, &GridFn2<T>)>,
) -> Result<(GridFn2<T>, GridFn2<T>)> {
    let d = h[0].domain();
    check_full(d, &[("h1", &h[0]), ("h2", &h[1]), ("h3", &h[2]), ("h4", &h[3])])?;
    let (n1, n2) = d.shape();
    let (mu1, mu2) = (d.first().graininess(), d.second().graininess());
    let (mut u, mut v) = (vec![T::zero(); n1 * n2], vec![T::zero(); n1 * n2]);
    let (mut au, mut av) = (Prefix2::new(n2), Prefix2::new(n2));
    for i in 0..n1 {
        let (su, sv) = (au.row(&mu2), av.row(&mu2));
        for j in 0..n2 {
            u[i * n2 + j] = c1 + theta_at(theta.map(|t| t.0), i, j) * su[j];
            v[i * n2 + j] = c2 + theta_at(theta.map(|t| t.1), i, j) * sv[j];
        }
        let (ur, vr) = (&u[i * n2..(i + 1) * n2], &v[i * n2..(i + 1) * n2]);
        au.push_row(mu1[i], |b| h[0].at(i, b) * ur[b] + h[1].at(i, b) * vr[b]);
        av.push_row(mu1[i], |b| h[2].at(i, b) * ur[b] + h[3].at(i, b) * vr[b]);
    }
    Ok((GridFn2::new(d.clone(), n1, n2, u)?, GridFn2::new(d.clone(), n1, n2, v)?))
}

/// `w = a + b + θ ∫∫ c (u + w)` and `u = ∫∫ w`, so `u` vanishes on both
/// boundary lines and `u^{Δ1Δ2} = w`. Returns `(u, w)`.
pub fn witness_integrodynamic<T: Scalar>(
    a: &GridFn1<T>,
    b: &GridFn1<T>,
    c: &GridFn2<T>,
    theta: Option<&GridFn2<T>>,
) -> Result<(GridFn2<T>, GridFn2<T>)> {
    let d = c.domain();
    check_full(d, &[("c", c)])?;
    let (n1, n2) = d.shape();
    if a.len() != n1 || !a.is_full() || b.len() != n2 || !b.is_full() {
        return Err(Error::input("a and b must cover their full axes"));
    }
    let (mu1, mu2) = (d.first().graininess(), d.second().graininess());
    let (mut u, mut w) = (vec![T::zero(); n1 * n2], vec![T::zero(); n1 * n2]);
    let (mut aw, mut acw) = (Prefix2::new(n2), Prefix2::new(n2));
    for i in 0..n1 {
        let (su, sw) = (aw.row(&mu2), acw.row(&mu2));
        for j in 0..n2 {
            u[i * n2 + j] = su[j];
            w[i * n2 + j] = a.at(i) + b.at(j) + theta_at(theta, i, j) * sw[j];
        }
        let (ur, wr) = (&u[i * n2..(i + 1) * n2], &w[i * n2..(i + 1) * n2]);
        aw.push_row(mu1[i], |j| wr[j]);
        acw.push_row(mu1[i], |j| c.at(i, j) * (ur[j] + wr[j]));
    }
    Ok((GridFn2::new(d.clone(), n1, n2, u)?, GridFn2::new(d.clone(), n1, n2, w)?))
}

/// `x(σ(t)) = x(t) + μ(t) (f(t) + g(t) x(t) - slack)` from `x(a) = x_a`;
/// support `[a, n)`.
pub fn witness_comparison<T: Scalar>(
    f: &GridFn1<T>,
    g: &GridFn1<T>,
    x_a: T,
    a: usize,
    slack: T,
) -> Result<GridFn1<T>> {
    let ts = f.scale();
    let n = ts.len();
    ts.point(a)?;
    if !crate::timescale::same_scale(ts, g.scale()) {
        return Err(Error::domain("f and g live on different scales"));
    }
    for (name, h) in [("f", f), ("g", g)] {
        if h.start() > a || h.end() < n - 1 {
            return Err(Error::domain(format!("{name} must cover [a, max)")));
        }
    }
    require_regressive(g, a..n - 1, true)?;
    if slack < T::zero() {
        return Err(Error::input("slack must be nonnegative"));
    }
    let mut x = Vec::with_capacity(n - a);
    x.push(x_a);
    for t in a..n - 1 {
        let cur = x[t - a];
        let mu = ts.mu_at(t);
        x.push(cur + mu * (f.at(t) + g.at(t) * cur - slack));
    }
    GridFn1::with_support(ts.clone(), a, x)
}

//! Explicit bounds for two-variable integral and integro-dynamic
//! inequalities on a product time scale.
//!
//! Every integral starts at the first point of each axis (the lattice
//! origin), and every bound is evaluated on `κ1 × κ2` so that `σ`-shifted
//! kernel arguments and forward differences stay inside the lattice.
//!
//! | problem | hypothesis on `u` | bound |
//! |---|---|---|
//! | [`KernelProblem`] | `u ≤ p + q ∫∫ k(t, s) u(s)` | `p + q A e_c` |
//! | [`CorollaryProblem`] | `u ≤ p + q ∫∫ k(s) u(s)` | `p + q A e_c(t1, 0)` |
//! | [`SystemProblem`] | coupled `u`, `v` relations | `c3 + A e_c(t1, 0)` on `u + v` |
//! | [`IntegroProblem`] | `u^{Δ1Δ2} ≤ a + b + ∫∫ c (u + u^{Δ1Δ2})` | `∫∫ h` |

mod kernel;
mod report;

use std::sync::Arc;

use rayon::prelude::*;

pub use kernel::{ConstantKernel, Kernel, MemoKernel, KERNEL_MEMO_CAP};
pub use report::{
    BoundReport, Diagnostic, ExponentVariant, Violation, DOMINANCE_TOLERANCE, HYPOTHESIS_SLACK,
};

use kernel::KernelDiffs;
use report::DiagnosticSink;

use crate::error::{Error, Result};
use crate::lattice::{GridFn2, TimeScale2D};
use crate::scalar::{Compensated, Scalar};
use crate::timescale::{same_scale, GridFn1};

/// `u ≤ p + q ∫∫ k(t1, t2, s1, s2) u(s1, s2)` with a four-argument kernel.
#[derive(Clone)]
pub struct KernelProblem<T> {
    pub p: GridFn2<T>,
    pub q: GridFn2<T>,
    pub kernel: Arc<dyn Kernel<T>>,
    pub witness: Option<GridFn2<T>>,
    pub variant: ExponentVariant,
}

/// `u ≤ p + q ∫∫ k(s1, s2) u(s1, s2)`.
#[derive(Debug, Clone)]
pub struct CorollaryProblem<T> {
    pub p: GridFn2<T>,
    pub q: GridFn2<T>,
    pub k: GridFn2<T>,
    pub witness: Option<GridFn2<T>>,
}

/// The coupled pair
/// `u ≤ c1 + ∫∫ (h1 u + h2 v)`, `v ≤ c2 + ∫∫ (h3 u + h4 v)`.
#[derive(Debug, Clone)]
pub struct SystemProblem<T> {
    pub c1: T,
    pub c2: T,
    pub h: [GridFn2<T>; 4],
    pub witness: Option<(GridFn2<T>, GridFn2<T>)>,
}

/// `u^{Δ1Δ2} ≤ a(t1) + b(t2) + ∫∫ c (u + u^{Δ1Δ2})` with
/// `u(0, ·) = u(·, 0) = 0`.
#[derive(Debug, Clone)]
pub struct IntegroProblem<T> {
    /// On the first axis; positive with nonnegative delta derivative.
    pub a: GridFn1<T>,
    /// On the second axis; positive with nonnegative delta derivative.
    pub b: GridFn1<T>,
    pub c: GridFn2<T>,
    pub witness: Option<GridFn2<T>>,
}

#[derive(Clone)]
pub enum BoundInputs<T> {
    Kernel(KernelProblem<T>),
    Corollary(CorollaryProblem<T>),
    System(SystemProblem<T>),
    IntegroDynamic(IntegroProblem<T>),
}

impl<T: Scalar> BoundInputs<T> {
    pub fn check_hypotheses(&self) -> Vec<Diagnostic> {
        check_hypotheses(self)
    }

    pub fn evaluate(&self) -> Result<BoundReport<T>> {
        match self {
            BoundInputs::Kernel(p) => bound_theorem_kernel(p),
            BoundInputs::Corollary(p) => bound_corollary(p),
            BoundInputs::System(p) => bound_system(p),
            BoundInputs::IntegroDynamic(p) => bound_integrodynamic(p),
        }
    }
}

fn require_full_on<T: Scalar>(domain: &TimeScale2D<T>, named: &[(&str, &GridFn2<T>)]) -> Result<()> {
    for (name, g) in named {
        if g.domain() != domain {
            return Err(Error::input(format!("{name} lives on a different lattice")));
        }
        if !g.is_full() {
            return Err(Error::input(format!(
                "{name} must cover the full {}x{} lattice",
                domain.shape().0,
                domain.shape().1
            )));
        }
    }
    Ok(())
}

fn require_kappa_nonempty<T: Scalar>(domain: &TimeScale2D<T>) -> Result<()> {
    let (n1, n2) = domain.shape();
    if n1 < 2 || n2 < 2 {
        return Err(Error::input("bounds need at least 2 points per axis"));
    }
    Ok(())
}

/// Checks every pointwise hypothesis of the selected problem. Returns an
/// empty list when all hold within [`HYPOTHESIS_SLACK`].
pub fn check_hypotheses<T: Scalar>(inputs: &BoundInputs<T>) -> Vec<Diagnostic> {
    let mut sink = DiagnosticSink::default();
    match inputs {
        BoundInputs::Kernel(pr) => {
            sink.nonneg_grid("p negative", &pr.p);
            sink.nonneg_grid("q negative", &pr.q);
            kernel_hypotheses(&mut sink, pr.kernel.as_ref(), pr.p.domain());
            if let Some(u) = &pr.witness {
                sink.nonneg_grid("witness negative", u);
            }
        }
        BoundInputs::Corollary(pr) => {
            sink.nonneg_grid("p negative", &pr.p);
            sink.nonneg_grid("q negative", &pr.q);
            sink.nonneg_grid("kernel negative", &pr.k);
            if let Some(u) = &pr.witness {
                sink.nonneg_grid("witness negative", u);
            }
        }
        BoundInputs::System(pr) => {
            sink.nonneg("c1 negative", pr.c1, || "constant".into());
            sink.nonneg("c2 negative", pr.c2, || "constant".into());
            for (h, name) in pr.h.iter().zip(["h1 negative", "h2 negative", "h3 negative", "h4 negative"]) {
                sink.nonneg_grid(name, h);
            }
            if let Some((u, v)) = &pr.witness {
                sink.nonneg_grid("witness u negative", u);
                sink.nonneg_grid("witness v negative", v);
            }
        }
        BoundInputs::IntegroDynamic(pr) => integro_hypotheses(&mut sink, pr),
    }
    sink.finish()
}

/// Nonnegativity of `k` and of `k^{Δ1}`, `k^{Δ2}`, `k^{Δ1Δ2}` wherever
/// the bound formulas evaluate them: first-slot arguments `x` dominate the
/// integration variables `y` componentwise, which covers the σ-shifted
/// slots `k(σ1 t1, ·)` and `k(·, σ2 t2)`.
fn kernel_hypotheses<T: Scalar>(sink: &mut DiagnosticSink, k: &dyn Kernel<T>, domain: &TimeScale2D<T>) {
    let (n1, n2) = domain.shape();
    let d = KernelDiffs { k, s1: domain.first(), s2: domain.second() };
    for x1 in 0..n1 {
        for x2 in 0..n2 {
            for y1 in 0..=x1 {
                for y2 in 0..=x2 {
                    let loc = || format!("(t1, t2, s1, s2) = ({x1}, {x2}, {y1}, {y2})");
                    sink.nonneg("kernel negative", k.eval(x1, x2, y1, y2), loc);
                    if x1 + 1 < n1 {
                        sink.nonneg("kernel first-variable difference negative", d.d1(x1, x2, y1, y2), loc);
                    }
                    if x2 + 1 < n2 {
                        sink.nonneg("kernel second-variable difference negative", d.d2(x1, x2, y1, y2), loc);
                    }
                    if x1 + 1 < n1 && x2 + 1 < n2 {
                        sink.nonneg("kernel mixed difference negative", d.d12(x1, x2, y1, y2), loc);
                    }
                }
            }
        }
    }
}

fn integro_hypotheses<T: Scalar>(sink: &mut DiagnosticSink, pr: &IntegroProblem<T>) {
    for (name, f) in [("a not positive", &pr.a), ("b not positive", &pr.b)] {
        for i in f.indices() {
            if !(f.at(i) > T::zero()) {
                sink.fail(name, || format!("index {i}"), f.at(i).as_f64());
            }
        }
    }
    for (name, f) in [("a decreasing", &pr.a), ("b decreasing", &pr.b)] {
        if let Ok(d) = f.delta_derivative() {
            for i in d.indices() {
                sink.nonneg(name, d.at(i), || format!("index {i}"));
            }
        }
    }
    sink.nonneg_grid("c negative", &pr.c);
    if let Some(u) = &pr.witness {
        for i in 0..u.rows() {
            if u.at(i, 0) != T::zero() {
                sink.fail("witness boundary nonzero", || format!("({i}, 0)"), u.at(i, 0).as_f64());
            }
        }
        for j in 0..u.cols() {
            if u.at(0, j) != T::zero() {
                sink.fail("witness boundary nonzero", || format!("(0, {j})"), u.at(0, j).as_f64());
            }
        }
        if let Ok(w) = u.mixed_partial() {
            sink.nonneg_grid("witness mixed derivative negative", &w);
        }
    }
}

/// Result of [`gronwall_2d`] with the validation of its premises.
#[derive(Debug, Clone)]
pub struct GronwallBound<T> {
    pub z: GridFn2<T>,
    pub diagnostics: Vec<Diagnostic>,
}

/// `E(i, j) = Π_{s1 < i} (1 + μ1(s1) c(s1, j))` on a `rows × cols` block.
fn exp_first_variable<T: Scalar>(c: &GridFn2<T>, rows: usize, cols: usize) -> Result<GridFn2<T>> {
    let s1 = c.domain().first();
    let mut values = vec![T::one(); rows * cols];
    for i in 1..rows {
        let mu = s1.mu_at(i - 1);
        for j in 0..cols {
            let v = values[(i - 1) * cols + j] * (T::one() + mu * c.at(i - 1, j));
            if !v.is_finite() {
                return Err(Error::Overflow { index: i, t: s1.points()[i].as_f64() });
            }
            values[i * cols + j] = v;
        }
    }
    GridFn2::new(c.domain().clone(), rows, cols, values)
}

/// `E(i, j) = Π_{s2 < j} (1 + μ2(s2) c(i, s2))` on a `rows × cols` block.
fn exp_second_variable<T: Scalar>(c: &GridFn2<T>, rows: usize, cols: usize) -> Result<GridFn2<T>> {
    let s2 = c.domain().second();
    let mut values = vec![T::one(); rows * cols];
    for i in 0..rows {
        for j in 1..cols {
            let v = values[i * cols + j - 1] * (T::one() + s2.mu_at(j - 1) * c.at(i, j - 1));
            if !v.is_finite() {
                return Err(Error::Overflow { index: j, t: s2.points()[j].as_f64() });
            }
            values[i * cols + j] = v;
        }
    }
    GridFn2::new(c.domain().clone(), rows, cols, values)
}

/// Two-dimensional Gronwall step: from `z ≤ A + ∫∫ b z` with `A`
/// nondecreasing, `z ≤ A(t1, t2) e_{c(·, t2)}(t1, 0)` where
/// `c(t1, t2) = ∫_0^{t2} b(t1, s2) Δ2 s2`.
///
/// `a_fn` and `b` share one block shape; the premises (nonnegativity, `A`
/// nondecreasing in each variable) are checked and reported, not assumed.
pub fn gronwall_2d<T: Scalar>(a_fn: &GridFn2<T>, b: &GridFn2<T>) -> Result<GronwallBound<T>> {
    a_fn.require_same_shape(b).map_err(|e| Error::input(e.to_string()))?;
    let (rows, cols) = (a_fn.rows(), a_fn.cols());
    let mut sink = DiagnosticSink::default();
    sink.nonneg_grid("A negative", a_fn);
    sink.nonneg_grid("b negative", b);
    for i in 0..rows {
        for j in 0..cols {
            if i + 1 < rows {
                sink.nonneg("A decreasing in t1", a_fn.at(i + 1, j) - a_fn.at(i, j), || {
                    format!("({i}, {j})")
                });
            }
            if j + 1 < cols {
                sink.nonneg("A decreasing in t2", a_fn.at(i, j + 1) - a_fn.at(i, j), || {
                    format!("({i}, {j})")
                });
            }
        }
    }
    let c = b.integral_along_second()?;
    let e = exp_first_variable(&c, rows, cols)?;
    let z = a_fn.zip_with(&e, |x, y| x * y)?;
    Ok(GronwallBound { z, diagnostics: sink.finish() })
}

/// `p + q · factor` on the block of `factor`.
fn affine<T: Scalar>(p: &GridFn2<T>, q: &GridFn2<T>, factor: &GridFn2<T>) -> Result<GridFn2<T>> {
    GridFn2::from_index_fn(factor.domain().clone(), factor.rows(), factor.cols(), |i, j| {
        p.at(i, j) + q.at(i, j) * factor.at(i, j)
    })
}

fn merge(mut a: Vec<Diagnostic>, b: Vec<Diagnostic>) -> Vec<Diagnostic> {
    for d in b {
        if !a.iter().any(|x| x.check == d.check) {
            a.push(d);
        }
    }
    a
}

/// Bound for [`CorollaryProblem`]:
/// `a = k p`, `b = k q`, `A = ∫∫ a`, `c = ∫_0^{t2} b`,
/// bound `= p + q A e_c(t1, 0)`.
pub fn bound_corollary<T: Scalar>(pr: &CorollaryProblem<T>) -> Result<BoundReport<T>> {
    let domain = pr.p.domain();
    require_full_on(domain, &[("p", &pr.p), ("q", &pr.q), ("k", &pr.k)])?;
    require_kappa_nonempty(domain)?;
    let (k1, k2) = domain.kappa_shape();
    let a = pr.k.zip_with(&pr.p, |k, p| k * p)?;
    let b = pr.k.zip_with(&pr.q, |k, q| k * q)?;
    let big_a = a.double_integral_from_origin()?.restrict(k1, k2)?;
    let g = gronwall_2d(&big_a, &b.restrict(k1, k2)?)?;
    let bound = affine(&pr.p, &pr.q, &g.z)?;
    let diags = merge(check_hypotheses(&BoundInputs::Corollary(pr.clone())), g.diagnostics);
    BoundReport::assemble(bound, pr.witness.as_ref(), diags, ExponentVariant::FirstVariable)
}

/// The functions `a` and `b` of the kernel bound on `κ1 × κ2`:
/// the σ-shifted kernel value times `p` (resp. `q`) plus three Δ-integrals
/// of kernel differences against `p` (resp. `q`).
fn kernel_coefficients<T: Scalar>(
    k: &dyn Kernel<T>,
    p: &GridFn2<T>,
    q: &GridFn2<T>,
) -> Result<(GridFn2<T>, GridFn2<T>)> {
    let domain = p.domain();
    let (s1, s2) = (domain.first(), domain.second());
    let (k1, k2) = domain.kappa_shape();
    let d = KernelDiffs { k, s1, s2 };
    let rows: Vec<Vec<(T, T)>> = (0..k1)
        .into_par_iter()
        .map(|i| {
            (0..k2)
                .map(|j| {
                    let lead = k.eval(i + 1, j + 1, i, j);
                    let mut ap = Compensated::starting_at(lead * p.at(i, j));
                    let mut bq = Compensated::starting_at(lead * q.at(i, j));
                    for s in 0..j {
                        let w = d.d2(i + 1, j, i, s) * s2.mu_at(s);
                        ap.add(w * p.at(i, s));
                        bq.add(w * q.at(i, s));
                    }
                    for s in 0..i {
                        let w = d.d1(i, j + 1, s, j) * s1.mu_at(s);
                        ap.add(w * p.at(s, j));
                        bq.add(w * q.at(s, j));
                    }
                    for r in 0..i {
                        let m1 = s1.mu_at(r);
                        for s in 0..j {
                            let w = d.d12(i, j, r, s) * m1 * s2.mu_at(s);
                            ap.add(w * p.at(r, s));
                            bq.add(w * q.at(r, s));
                        }
                    }
                    (ap.value(), bq.value())
                })
                .collect()
        })
        .collect();
    let a = GridFn2::from_index_fn(domain.clone(), k1, k2, |i, j| rows[i][j].0)?;
    let b = GridFn2::from_index_fn(domain.clone(), k1, k2, |i, j| rows[i][j].1)?;
    Ok((a, b))
}

/// Bound for [`KernelProblem`]: `p + q A E`, with `E = e_c` taken in the
/// variable chosen by [`KernelProblem::variant`].
pub fn bound_theorem_kernel<T: Scalar>(pr: &KernelProblem<T>) -> Result<BoundReport<T>> {
    let domain = pr.p.domain();
    require_full_on(domain, &[("p", &pr.p), ("q", &pr.q)])?;
    require_kappa_nonempty(domain)?;
    let (k1, k2) = domain.kappa_shape();
    let (a, b) = kernel_coefficients(pr.kernel.as_ref(), &pr.p, &pr.q)?;
    let big_a = a.double_integral_from_origin()?.restrict(k1, k2)?;
    let (factor, gdiags) = match pr.variant {
        ExponentVariant::FirstVariable => {
            let g = gronwall_2d(&big_a, &b)?;
            (g.z, g.diagnostics)
        }
        ExponentVariant::SecondVariable => {
            let c = b.integral_along_second()?;
            let e = exp_second_variable(&c, k1, k2)?;
            (big_a.zip_with(&e, |x, y| x * y)?, Vec::new())
        }
    };
    let bound = affine(&pr.p, &pr.q, &factor)?;
    let diags = merge(check_hypotheses(&BoundInputs::Kernel(pr.clone())), gdiags);
    BoundReport::assemble(bound, pr.witness.as_ref(), diags, pr.variant)
}

/// Bound on `u + v` for [`SystemProblem`]:
/// `H = max(h1 + h3, h2 + h4)`, `A = c3 ∫∫ H`, `c = ∫_0^{t2} H`,
/// bound `= c3 + A e_c(t1, 0)`.
pub fn bound_system<T: Scalar>(pr: &SystemProblem<T>) -> Result<BoundReport<T>> {
    if pr.c1 < T::zero() || pr.c2 < T::zero() {
        return Err(Error::input("c1 and c2 must be nonnegative"));
    }
    let domain = pr.h[0].domain();
    require_full_on(domain, &[("h1", &pr.h[0]), ("h2", &pr.h[1]), ("h3", &pr.h[2]), ("h4", &pr.h[3])])?;
    require_kappa_nonempty(domain)?;
    let (k1, k2) = domain.kappa_shape();
    let c3 = pr.c1 + pr.c2;
    let h13 = pr.h[0].zip_with(&pr.h[2], |x, y| x + y)?;
    let h24 = pr.h[1].zip_with(&pr.h[3], |x, y| x + y)?;
    let big_h = h13.zip_with(&h24, T::max)?;
    let big_a = big_h.double_integral_from_origin()?.restrict(k1, k2)?.map(|v| c3 * v)?;
    let g = gronwall_2d(&big_a, &big_h.restrict(k1, k2)?)?;
    let bound = g.z.map(|v| c3 + v)?;
    let sum = match &pr.witness {
        Some((u, v)) => Some(u.zip_with(v, |x, y| x + y)?),
        None => None,
    };
    let diags = merge(check_hypotheses(&BoundInputs::System(pr.clone())), g.diagnostics);
    BoundReport::assemble(bound, sum.as_ref(), diags, ExponentVariant::FirstVariable)
}

/// Intermediate functions of the integro-dynamic bound, all on `κ1 × κ2`.
#[derive(Debug, Clone)]
pub struct IntegroTerms<T> {
    pub p: GridFn2<T>,
    pub q: GridFn2<T>,
    pub h: GridFn2<T>,
}

/// `p = a^{Δ1} / (a + b(0)) + ∫_0^{t2} (1 + c)`,
/// `q = (a(0) + b(t2)) e_p(t1, 0) c`, `h = a + b + ∫∫ q`.
pub fn integro_terms<T: Scalar>(pr: &IntegroProblem<T>) -> Result<IntegroTerms<T>> {
    let domain = pr.c.domain();
    require_full_on(domain, &[("c", &pr.c)])?;
    require_kappa_nonempty(domain)?;
    if !same_scale(pr.a.scale(), domain.first()) || !pr.a.is_full() {
        return Err(Error::input("a must cover the full first axis"));
    }
    if !same_scale(pr.b.scale(), domain.second()) || !pr.b.is_full() {
        return Err(Error::input("b must cover the full second axis"));
    }
    for (name, f) in [("a", &pr.a), ("b", &pr.b)] {
        if let Some(i) = f.indices().find(|&i| !(f.at(i) > T::zero())) {
            return Err(Error::input(format!("{name} must be positive (index {i})")));
        }
    }
    let (k1, k2) = domain.kappa_shape();
    let (a, b) = (&pr.a, &pr.b);
    let a_delta = a.delta_derivative()?;
    let b0 = b.at(0);
    let ic = pr.c.map(|v| T::one() + v)?.integral_along_second()?;
    let p =
        GridFn2::from_index_fn(domain.clone(), k1, k2, |i, j| a_delta.at(i) / (a.at(i) + b0) + ic.at(i, j))?;
    let e = exp_first_variable(&p, k1, k2)?;
    let a0 = a.at(0);
    let q =
        GridFn2::from_index_fn(domain.clone(), k1, k2, |i, j| (a0 + b.at(j)) * e.at(i, j) * pr.c.at(i, j))?;
    let iq = q.double_integral_from_origin()?;
    let h = GridFn2::from_index_fn(domain.clone(), k1, k2, |i, j| a.at(i) + b.at(j) + iq.at(i, j))?;
    Ok(IntegroTerms { p, q, h })
}

/// Bound for [`IntegroProblem`]: `u ≤ ∫_0^{t1} ∫_0^{t2} h`.
pub fn bound_integrodynamic<T: Scalar>(pr: &IntegroProblem<T>) -> Result<BoundReport<T>> {
    let terms = integro_terms(pr)?;
    let (k1, k2) = pr.c.domain().kappa_shape();
    let bound = terms.h.double_integral_from_origin()?.restrict(k1, k2)?;
    let diags = check_hypotheses(&BoundInputs::IntegroDynamic(pr.clone()));
    BoundReport::assemble(bound, pr.witness.as_ref(), diags, ExponentVariant::FirstVariable)
}

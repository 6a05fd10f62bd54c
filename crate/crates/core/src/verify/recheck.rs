//! Witness validity by brute-force summation.
//!
//! These checks recompute every hypothesis right-hand side from scratch
//! with plain nested loops, sharing no code with the recursions that built
//! the witnesses. A point fails when `lhs - rhs > WITNESS_TOLERANCE ·
//! max(1, |rhs|)`.

use crate::bounds::Kernel;
use crate::lattice::GridFn2;
use crate::timescale::GridFn1;

/// Relative tolerance for hypothesis re-checks.
pub const WITNESS_TOLERANCE: f64 = 1e-10;

/// Worst scaled excess of a hypothesis; `valid` iff it stays within
/// [`WITNESS_TOLERANCE`] and the witness is nonnegative where required.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessCheck {
    pub valid: bool,
    pub worst_excess: f64,
}

#[derive(Default)]
struct Tally {
    worst: f64,
    negative: bool,
}

impl Tally {
    fn lhs_rhs(&mut self, lhs: f64, rhs: f64) {
        let e = (lhs - rhs) / rhs.abs().max(1.0);
        if e > self.worst || e.is_nan() {
            self.worst = if e.is_nan() { f64::INFINITY } else { e };
        }
    }

    fn nonneg(&mut self, v: f64) {
        if !(v >= -WITNESS_TOLERANCE) {
            self.negative = true;
        }
    }

    fn done(self) -> WitnessCheck {
        WitnessCheck { valid: !self.negative && self.worst <= WITNESS_TOLERANCE, worst_excess: self.worst }
    }
}

/// `ΣΣ_{a < i, b < j} f(a, b) μ1(a) μ2(b)` for the lattice of `like`.
fn naive_double(like: &GridFn2<f64>, i: usize, j: usize, f: impl Fn(usize, usize) -> f64) -> f64 {
    let d = like.domain();
    let (p1, p2) = (d.first().points(), d.second().points());
    let mut s = 0.0;
    for a in 0..i {
        for b in 0..j {
            s += f(a, b) * (p1[a + 1] - p1[a]) * (p2[b + 1] - p2[b]);
        }
    }
    s
}

pub fn check_corollary(
    u: &GridFn2<f64>,
    p: &GridFn2<f64>,
    q: &GridFn2<f64>,
    k: &GridFn2<f64>,
) -> WitnessCheck {
    let mut t = Tally::default();
    for i in 0..u.rows() {
        for j in 0..u.cols() {
            let rhs = p.at(i, j) + q.at(i, j) * naive_double(u, i, j, |a, b| k.at(a, b) * u.at(a, b));
            t.lhs_rhs(u.at(i, j), rhs);
            t.nonneg(u.at(i, j));
        }
    }
    t.done()
}

pub fn check_kernel(
    u: &GridFn2<f64>,
    p: &GridFn2<f64>,
    q: &GridFn2<f64>,
    k: &dyn Kernel<f64>,
) -> WitnessCheck {
    let mut t = Tally::default();
    for i in 0..u.rows() {
        for j in 0..u.cols() {
            let rhs = p.at(i, j) + q.at(i, j) * naive_double(u, i, j, |a, b| k.eval(i, j, a, b) * u.at(a, b));
            t.lhs_rhs(u.at(i, j), rhs);
            t.nonneg(u.at(i, j));
        }
    }
    t.done()
}

pub fn check_system(
    u: &GridFn2<f64>,
    v: &GridFn2<f64>,
    c1: f64,
    c2: f64,
    h: &[GridFn2<f64>; 4],
) -> WitnessCheck {
    let mut t = Tally::default();
    for i in 0..u.rows() {
        for j in 0..u.cols() {
            let ru =
                c1 + naive_double(u, i, j, |a, b| h[0].at(a, b) * u.at(a, b) + h[1].at(a, b) * v.at(a, b));
            let rv =
                c2 + naive_double(u, i, j, |a, b| h[2].at(a, b) * u.at(a, b) + h[3].at(a, b) * v.at(a, b));
            t.lhs_rhs(u.at(i, j), ru);
            t.lhs_rhs(v.at(i, j), rv);
            t.nonneg(u.at(i, j));
            t.nonneg(v.at(i, j));
        }
    }
    t.done()
}

/// Checks `u = 0` on both boundary lines, `u^{Δ1Δ2} ≥ 0`, and
/// `u^{Δ1Δ2} ≤ a + b + ∫∫ c (u + u^{Δ1Δ2})` on `κ1 × κ2`, with the mixed
/// difference taken from `u` alone.
pub fn check_integrodynamic(
    u: &GridFn2<f64>,
    a: &GridFn1<f64>,
    b: &GridFn1<f64>,
    c: &GridFn2<f64>,
) -> WitnessCheck {
    let mut t = Tally::default();
    let d = u.domain();
    let (p1, p2) = (d.first().points(), d.second().points());
    let (n1, n2) = (u.rows(), u.cols());
    for i in 0..n1 {
        t.lhs_rhs(u.at(i, 0).abs(), 0.0);
    }
    for j in 0..n2 {
        t.lhs_rhs(u.at(0, j).abs(), 0.0);
    }
    let mixed = |i: usize, j: usize| {
        (u.at(i + 1, j + 1) - u.at(i + 1, j) - u.at(i, j + 1) + u.at(i, j))
            / ((p1[i + 1] - p1[i]) * (p2[j + 1] - p2[j]))
    };
    for i in 0..n1 - 1 {
        for j in 0..n2 - 1 {
            let w = mixed(i, j);
            let rhs =
                a.at(i) + b.at(j) + naive_double(u, i, j, |x, y| c.at(x, y) * (u.at(x, y) + mixed(x, y)));
            t.lhs_rhs(w, rhs);
            t.nonneg(w);
            t.nonneg(u.at(i, j));
        }
    }
    t.done()
}

/// Checks `x^Δ ≤ f + g x` on `[a, max)` with the difference taken from `x`.
pub fn check_comparison(x: &GridFn1<f64>, f: &GridFn1<f64>, g: &GridFn1<f64>) -> WitnessCheck {
    let mut t = Tally::default();
    let p = x.scale().points();
    for i in x.start()..x.end() - 1 {
        let dx = (x.at(i + 1) - x.at(i)) / (p[i + 1] - p[i]);
        t.lhs_rhs(dx, f.at(i) + g.at(i) * x.at(i));
    }
    t.done()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::TimeScale2D;
    use crate::timescale::TimeScale;

    #[test]
    fn detects_violated_corollary_witness() {
        let s = TimeScale::integer_segment(0, 3).unwrap().shared();
        let d = TimeScale2D::new(s.clone(), s);
        let one = GridFn2::constant(d.clone(), 1.0).unwrap();
        let u = crate::verify::witness_corollary(&one, &one, &one, None).unwrap();
        assert!(check_corollary(&u, &one, &one, &one).valid);
        let bumped = u.map(|v| v + 1e-3).unwrap();
        let c = check_corollary(&bumped, &one, &one, &one);
        assert!(!c.valid && c.worst_excess > 0.0);
    }

    #[test]
    fn detects_boundary_and_sign_problems() {
        let s = TimeScale::integer_segment(0, 3).unwrap().shared();
        let d = TimeScale2D::new(s.clone(), s.clone());
        let a = GridFn1::constant(s.clone(), 1.0).unwrap();
        let zero = GridFn2::constant(d.clone(), 0.0).unwrap();
        let good = GridFn2::from_fn(d.clone(), |x, y| 2.0 * x * y).unwrap();
        assert!(check_integrodynamic(&good, &a, &a, &zero).valid);
        let shifted = good.map(|v| v + 1.0).unwrap();
        assert!(!check_integrodynamic(&shifted, &a, &a, &zero).valid);
        let neg = GridFn2::from_fn(d, |x, y| -0.5 * x * y).unwrap();
        assert!(!check_integrodynamic(&neg, &a, &a, &zero).valid);
    }
}

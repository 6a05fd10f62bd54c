//! Regressivity, the circle-plus group, the time-scale exponential and the
//! one-dimensional comparison bound.

use crate::error::{Error, Result};
use crate::scalar::{Compensated, Scalar};
use crate::timescale::GridFn1;

/// Relative tolerance of the zero test on `1 + μ p`.
pub const REGRESSIVITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressivityReport<T> {
    pub is_regressive: bool,
    pub is_positively_regressive: bool,
    /// Smallest `1 + μ_i p_i` over the support.
    pub worst_factor: T,
    pub worst_index: usize,
}

fn factor_is_zero<T: Scalar>(mu: T, p: T) -> bool {
    let f = T::one() + mu * p;
    f.abs() <= T::lit(REGRESSIVITY_TOLERANCE) * (T::one() + (mu * p).abs())
}

/// Classifies `p` over its support.
pub fn regressivity<T: Scalar>(p: &GridFn1<T>) -> RegressivityReport<T> {
    let ts = p.scale();
    let mut report = RegressivityReport {
        is_regressive: true,
        is_positively_regressive: true,
        worst_factor: T::infinity(),
        worst_index: p.start(),
    };
    for i in p.indices() {
        let mu = ts.mu_at(i);
        let factor = T::one() + mu * p.at(i);
        if factor < report.worst_factor {
            report.worst_factor = factor;
            report.worst_index = i;
        }
        if factor_is_zero(mu, p.at(i)) {
            report.is_regressive = false;
        }
        if !(factor > T::zero()) {
            report.is_positively_regressive = false;
        }
    }
    report
}

fn regressivity_error<T: Scalar>(p: &GridFn1<T>, index: usize) -> Error {
    let mu = p.scale().mu_at(index);
    Error::Regressivity {
        index,
        t: p.scale().points()[index].as_f64(),
        factor: (T::one() + mu * p.at(index)).as_f64(),
    }
}

/// Rejects `p` unless every factor `1 + μp` over `range` is nonzero (or,
/// with `positive`, strictly positive). Reports the worst offender.
pub(crate) fn require_regressive<T: Scalar>(
    p: &GridFn1<T>,
    range: std::ops::Range<usize>,
    positive: bool,
) -> Result<()> {
    let ts = p.scale();
    let mut worst: Option<(usize, T)> = None;
    for i in range {
        let mu = ts.mu_at(i);
        let v = p.at(i);
        let factor = T::one() + mu * v;
        let bad = factor_is_zero(mu, v) || (positive && !(factor > T::zero()));
        if bad && worst.is_none_or(|(_, w)| factor.abs() < w) {
            worst = Some((i, factor.abs()));
        }
    }
    match worst {
        Some((i, _)) => Err(regressivity_error(p, i)),
        None => Ok(()),
    }
}

/// `f ⊕ g = f + g + μ f g`.
pub fn circle_plus<T: Scalar>(f: &GridFn1<T>, g: &GridFn1<T>) -> Result<GridFn1<T>> {
    f.require_same_support(g)?;
    let ts = f.scale();
    let values = f
        .indices()
        .map(|i| {
            let (a, b) = (f.at(i), g.at(i));
            a + b + ts.mu_at(i) * a * b
        })
        .collect();
    GridFn1::with_support(ts.clone(), f.start(), values)
}

/// `⊖ g = -g / (1 + μ g)`.
pub fn circle_minus<T: Scalar>(g: &GridFn1<T>) -> Result<GridFn1<T>> {
    require_regressive(g, g.indices(), false)?;
    let ts = g.scale();
    let values = g
        .indices()
        .map(|i| {
            let v = g.at(i);
            -v / (T::one() + ts.mu_at(i) * v)
        })
        .collect();
    GridFn1::with_support(ts.clone(), g.start(), values)
}

/// `f ⊖ g = f ⊕ (⊖ g)`.
pub fn circle_minus_of<T: Scalar>(f: &GridFn1<T>, g: &GridFn1<T>) -> Result<GridFn1<T>> {
    circle_plus(f, &circle_minus(g)?)
}

/// A real number stored as sign and natural log of its magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog<T> {
    pub sign: T,
    pub ln_abs: T,
}

impl<T: Scalar> SignedLog<T> {
    /// `None` if the magnitude is not representable.
    pub fn to_value(self) -> Option<T> {
        let m = self.ln_abs.exp();
        m.is_finite().then_some(self.sign * m)
    }
}

fn log_switch_threshold<T: Scalar>() -> T {
    T::from_f64(1e300).filter(|v| v.is_finite()).unwrap_or_else(|| T::max_value() / T::lit(1e8))
}

/// Running product that moves to log-space once its magnitude passes
/// `1e300` (or the equivalent for narrower types).
#[derive(Debug, Clone, Copy)]
struct RunningProduct<T> {
    direct: T,
    log: Option<SignedLog<T>>,
}

impl<T: Scalar> RunningProduct<T> {
    fn one() -> Self {
        Self { direct: T::one(), log: None }
    }

    fn mul(&mut self, f: T) {
        match &mut self.log {
            Some(l) => {
                l.ln_abs += f.abs().ln();
                l.sign *= f.signum();
            }
            None => {
                let v = self.direct * f;
                if v.is_finite() && v.abs() <= log_switch_threshold() {
                    self.direct = v;
                } else {
                    self.log = Some(SignedLog {
                        sign: self.direct.signum() * f.signum(),
                        ln_abs: self.direct.abs().ln() + f.abs().ln(),
                    });
                }
            }
        }
    }

    fn div(&mut self, f: T) {
        match &mut self.log {
            Some(l) => {
                l.ln_abs -= f.abs().ln();
                l.sign *= f.signum();
            }
            None => {
                let v = self.direct / f;
                if v.is_finite() && v.abs() <= log_switch_threshold() {
                    self.direct = v;
                } else {
                    self.log = Some(SignedLog {
                        sign: self.direct.signum() * f.signum(),
                        ln_abs: self.direct.abs().ln() - f.abs().ln(),
                    });
                }
            }
        }
    }

    fn signed_log(&self) -> SignedLog<T> {
        self.log.unwrap_or(SignedLog { sign: self.direct.signum(), ln_abs: self.direct.abs().ln() })
    }

    fn value(&self) -> Option<T> {
        match self.log {
            None => Some(self.direct),
            Some(l) => l.to_value(),
        }
    }
}

fn exp_products<T: Scalar>(p: &GridFn1<T>, t0: usize) -> Result<Vec<RunningProduct<T>>> {
    let ts = p.scale();
    let n = ts.len();
    ts.point(t0)?;
    if p.start() != 0 || p.len() < n - 1 {
        return Err(Error::domain("exponential needs p on the whole κ-set"));
    }
    require_regressive(p, 0..n - 1, false)?;
    let mut out = vec![RunningProduct::one(); n];
    let mut acc = RunningProduct::one();
    for i in t0..n - 1 {
        acc.mul(T::one() + ts.mu_at(i) * p.at(i));
        out[i + 1] = acc;
    }
    let mut acc = RunningProduct::one();
    for i in (0..t0).rev() {
        acc.div(T::one() + ts.mu_at(i) * p.at(i));
        out[i] = acc;
    }
    Ok(out)
}

/// `e_p(·, t0)`: the solution of `x^Δ = p x`, `x(t0) = 1`, on the full scale.
///
/// Products run forward from `t0` and reciprocal products backward, so `p`
/// must be regressive on the whole κ-set.
pub fn exp_fn<T: Scalar>(p: &GridFn1<T>, t0: usize) -> Result<GridFn1<T>> {
    let ts = p.scale();
    let values = exp_products(p, t0)?
        .iter()
        .enumerate()
        .map(|(i, r)| r.value().ok_or(Error::Overflow { index: i, t: ts.points()[i].as_f64() }))
        .collect::<Result<Vec<_>>>()?;
    GridFn1::new(ts.clone(), values)
}

/// [`exp_fn`] in sign/log-magnitude form; never overflows.
pub fn exp_fn_signed_log<T: Scalar>(p: &GridFn1<T>, t0: usize) -> Result<Vec<SignedLog<T>>> {
    Ok(exp_products(p, t0)?.iter().map(RunningProduct::signed_log).collect())
}

/// Right-hand side of the comparison lemma on `[a, max]`:
///
/// `B(t) = x_a e_g(t, a) + Σ_{s=a}^{t-1} f(s) e_g(t, σ(s)) μ(s)`,
///
/// evaluated through prefix products `P(t) = Π_{a<=r<t} (1 + μ(r) g(r))`
/// with `e_g(t, s) = P(t) / P(s)`. Requires `g` positively regressive on `[a, max)`.
pub fn comparison_bound<T: Scalar>(x_a: T, f: &GridFn1<T>, g: &GridFn1<T>, a: usize) -> Result<GridFn1<T>> {
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

    let mut prefix = Vec::with_capacity(n - a);
    prefix.push(T::one());
    for i in a..n - 1 {
        let next = prefix[i - a] * (T::one() + ts.mu_at(i) * g.at(i));
        if !next.is_finite() {
            return Err(Error::Overflow { index: i + 1, t: ts.points()[i + 1].as_f64() });
        }
        prefix.push(next);
    }
    let mut inner = Compensated::starting_at(x_a);
    let mut values = Vec::with_capacity(n - a);
    values.push(x_a);
    for t in a + 1..n {
        let s = t - 1;
        inner.add(f.at(s) * ts.mu_at(s) / prefix[t - a]);
        values.push(prefix[t - a] * inner.value());
    }
    GridFn1::with_support(ts.clone(), a, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timescale::TimeScale;
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn z(n: i64) -> Arc<TimeScale<f64>> {
        TimeScale::integer_segment(0, n).unwrap().shared()
    }

    #[test]
    fn circle_plus_examples() {
        let ts = z(4);
        let one = GridFn1::constant(ts.clone(), 1.0).unwrap();
        let s = circle_plus(&one, &one).unwrap();
        assert_eq!(&s.values()[..4], &[3.0; 4]);
        // μ = 0 at the maximum
        assert_eq!(s.at(4), 2.0);
        let zero = GridFn1::constant(ts, 0.0).unwrap();
        assert_eq!(circle_plus(&one, &zero).unwrap(), one);
    }

    #[test]
    fn circle_minus_examples() {
        let ts = z(3);
        let one = GridFn1::constant(ts.clone(), 1.0).unwrap();
        let m = circle_minus(&one).unwrap();
        assert_eq!(&m.values()[..3], &[-0.5; 3]);
        assert_eq!(m.at(3), -1.0);
        let two = GridFn1::constant(ts.clone(), 2.0).unwrap();
        assert_eq!(circle_minus(&two).unwrap().at(3), -2.0);
        let zero = GridFn1::constant(ts.clone(), 0.0).unwrap();
        assert!(circle_minus(&zero).unwrap().values().iter().all(|&v| v == 0.0));

        let bad = GridFn1::new(ts, vec![0.5, -1.0, -1.0 + 1e-14, 0.0]).unwrap();
        match circle_minus(&bad) {
            Err(Error::Regressivity { index, .. }) => assert!(index == 1 || index == 2),
            other => panic!("expected regressivity error, got {other:?}"),
        }
    }

    #[test]
    fn regressivity_report() {
        let ts = z(3);
        let p = GridFn1::new(ts, vec![1.0, -2.0, -1.0, 5.0]).unwrap();
        let r = regressivity(&p);
        assert!(!r.is_regressive);
        assert!(!r.is_positively_regressive);
        assert_eq!(r.worst_index, 1);
        assert_eq!(r.worst_factor, -1.0);
    }

    #[test]
    fn exp_examples() {
        let ts = z(5);
        let one = GridFn1::constant(ts.clone(), 1.0).unwrap();
        let e = exp_fn(&one, 0).unwrap();
        assert_eq!(e.values(), &[1.0, 2.0, 4.0, 8.0, 16.0, 32.0]);
        let e2 = exp_fn(&one, 2).unwrap();
        assert_eq!(e2.at(2), 1.0);
        assert_eq!(e2.at(0), 0.25);
        assert_eq!(e2.at(5), 8.0);
    }

    #[test]
    fn exp_dense_limit() {
        let h = 1e-3;
        let ts = TimeScale::<f64>::dense_mesh(0.0, 1.0, 1000).unwrap().shared();
        let e = exp_fn(&GridFn1::constant(ts, 1.0).unwrap(), 0).unwrap();
        let err = (e.at(1000) - std::f64::consts::E).abs();
        assert!(err <= 3.0 * h, "err {err}");
    }

    #[test]
    fn exp_switches_to_log_space() {
        let ts = TimeScale::<f64>::integer_segment(0, 1100).unwrap().shared();
        let one = GridFn1::constant(ts.clone(), 1.0).unwrap();
        // 2^1024 sits on the edge of the f64 range; the log-space value may round either way
        assert!(
            matches!(exp_fn(&one, 0), Err(Error::Overflow { index, .. }) if (1024..=1025).contains(&index))
        );
        let logs = exp_fn_signed_log(&one, 0).unwrap();
        assert_relative_eq!(logs[1100].ln_abs, 1100.0 * 2f64.ln(), max_relative = 1e-12);
        // magnitude comes back into range when anchored at the end
        let back = exp_fn(&GridFn1::constant(z(1000), 1.0).unwrap(), 1000).unwrap();
        assert_relative_eq!(back.at(0), 2f64.powi(-1000), max_relative = 1e-12);
    }

    #[test]
    fn exp_alternating_sign() {
        let ts = z(4);
        let p = GridFn1::constant(ts, -3.0).unwrap();
        let e = exp_fn(&p, 0).unwrap();
        assert_eq!(e.values(), &[1.0, -2.0, 4.0, -8.0, 16.0]);
    }

    #[test]
    fn exp_rejects_non_regressive() {
        let ts = z(3);
        let p = GridFn1::constant(ts, -1.0).unwrap();
        assert!(matches!(exp_fn(&p, 0), Err(Error::Regressivity { index: 0, .. })));
    }

    #[test]
    fn comparison_examples() {
        let ts = z(6);
        let one = GridFn1::constant(ts.clone(), 1.0).unwrap();
        let zero = GridFn1::constant(ts.clone(), 0.0).unwrap();

        let b = comparison_bound(1.0, &zero, &one, 0).unwrap();
        assert_eq!(b.values(), &[1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0]);

        let b = comparison_bound(3.5, &zero, &zero, 0).unwrap();
        assert!(b.values().iter().all(|&v| v == 3.5));

        let b = comparison_bound(0.0, &one, &zero, 0).unwrap();
        assert_eq!(b.values(), &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);

        let b = comparison_bound(1.0, &zero, &one, 2).unwrap();
        assert_eq!(b.start(), 2);
        assert_eq!(b.at(4), 4.0);
    }

    #[test]
    fn comparison_requires_positive_regressivity() {
        let ts = z(3);
        let g = GridFn1::constant(ts.clone(), -2.0).unwrap();
        let f = GridFn1::constant(ts, 0.0).unwrap();
        assert!(matches!(comparison_bound(1.0, &f, &g, 0), Err(Error::Regressivity { .. })));
    }
}

use std::sync::Arc;

use proptest::prelude::*;
use tscale::verify::witness_comparison;
use tscale::{
    circle_minus, circle_plus, comparison_bound, exp_fn, Axis, GridFn1, GridFn2, IndexRect, RectPartition,
    TimeScale, TimeScale2D,
};

/// Strictly increasing points from positive gaps.
fn scale() -> impl Strategy<Value = Arc<TimeScale<f64>>> {
    (-5.0..5.0f64, prop::collection::vec(0.05..3.0f64, 2..30)).prop_map(|(start, gaps)| {
        let mut pts = vec![start];
        for g in gaps {
            pts.push(pts.last().unwrap() + g);
        }
        TimeScale::from_points(pts).unwrap().shared()
    })
}

fn values_on(s: &Arc<TimeScale<f64>>, lo: f64, hi: f64) -> impl Strategy<Value = GridFn1<f64>> {
    let s = s.clone();
    prop::collection::vec(lo..hi, s.len()).prop_map(move |v| GridFn1::new(s.clone(), v).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jumps_and_graininess(s in scale()) {
        let n = s.len();
        for i in 0..n {
            prop_assert!(s.points()[s.sigma(i).unwrap()] >= s.points()[i]);
            prop_assert!(s.points()[s.rho(i).unwrap()] <= s.points()[i]);
            let mu = s.mu(i).unwrap();
            prop_assert!(mu >= 0.0);
            prop_assert_eq!(mu == 0.0, i == n - 1);
        }
    }

    #[test]
    fn derivative_is_linear(
        (f, g) in scale().prop_flat_map(|s| (values_on(&s, -10.0, 10.0), values_on(&s, -10.0, 10.0))),
        alpha in -3.0..3.0f64,
        beta in -3.0..3.0f64,
    ) {
        let comb = f.zip_with(&g, |x, y| alpha * x + beta * y).unwrap();
        let lhs = comb.delta_derivative().unwrap();
        let (df, dg) = (f.delta_derivative().unwrap(), g.delta_derivative().unwrap());
        for i in lhs.indices() {
            let scale = (alpha * df.at(i)).abs() + (beta * dg.at(i)).abs();
            prop_assert!((lhs.at(i) - (alpha * df.at(i) + beta * dg.at(i))).abs() <= 1e-12 * scale.max(1.0) * 10.0);
        }
    }

    #[test]
    fn product_rule(
        (f, g) in scale().prop_flat_map(|s| (values_on(&s, -10.0, 10.0), values_on(&s, -10.0, 10.0))),
    ) {
        let fg = f.zip_with(&g, |x, y| x * y).unwrap().delta_derivative().unwrap();
        let (df, dg) = (f.delta_derivative().unwrap(), g.delta_derivative().unwrap());
        for i in fg.indices() {
            let rhs = df.at(i) * g.at(i) + f.at(i + 1) * dg.at(i);
            let mag = (df.at(i) * g.at(i)).abs() + (f.at(i + 1) * dg.at(i)).abs();
            prop_assert!((fg.at(i) - rhs).abs() <= 1e-12 * mag.max(1.0) * 10.0);
        }
    }

    #[test]
    fn fundamental_theorem(
        f in scale().prop_flat_map(|s| values_on(&s, -10.0, 10.0)),
        x0 in -5.0..5.0f64,
        pick in 0.0..1.0f64,
    ) {
        let n = f.scale().len();
        let t0 = ((n - 1) as f64 * pick) as usize;
        let df = f.delta_derivative().unwrap();
        for b in 0..n {
            let i = df.pad_last().cauchy_integral(0, b).unwrap();
            prop_assert!(rel(i, f.at(b) - f.at(0)) <= 1e-12 * 20.0);
        }
        let big_f = f.antiderivative(t0, x0).unwrap();
        prop_assert_eq!(big_f.at(t0), x0);
        let back = big_f.delta_derivative().unwrap();
        for i in back.indices() {
            prop_assert!(rel(back.at(i), f.at(i)) <= 1e-9);
        }
    }

    #[test]
    fn integral_is_additive(f in scale().prop_flat_map(|s| values_on(&s, -10.0, 10.0)), a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let n = f.scale().len();
        let (mut x, mut y) = (((n - 1) as f64 * a) as usize, ((n - 1) as f64 * b) as usize);
        if x > y { std::mem::swap(&mut x, &mut y); }
        let whole = f.cauchy_integral(0, n - 1).unwrap();
        let parts = f.cauchy_integral(0, x).unwrap() + f.cauchy_integral(x, y).unwrap() + f.cauchy_integral(y, n - 1).unwrap();
        prop_assert!(rel(whole, parts) <= 1e-12 * 10.0);
    }

    #[test]
    fn exponential_solves_ivp(p in scale().prop_flat_map(|s| values_on(&s, -0.3, 10.0)), pick in 0.0..1.0f64) {
        let s = p.scale().clone();
        // keep every factor 1 + μp at or above 0.1
        let p = GridFn1::new(s.clone(), p.values().iter().enumerate().map(|(i, &v)| {
            let mu = s.mu(i).unwrap();
            if mu > 0.0 && 1.0 + mu * v < 0.1 { (0.1 - 1.0) / mu } else { v }
        }).collect()).unwrap();
        let t0 = ((s.len() - 1) as f64 * pick) as usize;
        let e = exp_fn(&p, t0).unwrap();
        prop_assert_eq!(e.at(t0), 1.0);
        prop_assert!(e.values().iter().all(|&v| v > 0.0));
        let de = e.delta_derivative().unwrap();
        let emax = e.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in de.indices() {
            prop_assert!((de.at(i) - p.at(i) * e.at(i)).abs() <= 1e-10 * emax);
        }
        // semigroup e(t, s) e(s, r) = e(t, r)
        let r = 0;
        let e_r = exp_fn(&p, r).unwrap();
        for t in 0..s.len() {
            prop_assert!(rel(e.at(t) * e_r.at(t0), e_r.at(t)) <= 1e-12 * 100.0);
        }
    }

    #[test]
    fn circle_group_laws(
        (f, g, h) in scale().prop_flat_map(|s| (values_on(&s, 0.0, 3.0), values_on(&s, 0.0, 3.0), values_on(&s, 0.0, 3.0))),
    ) {
        let fg = circle_plus(&f, &g).unwrap();
        let gf = circle_plus(&g, &f).unwrap();
        let l = circle_plus(&fg, &h).unwrap();
        let r = circle_plus(&f, &circle_plus(&g, &h).unwrap()).unwrap();
        let inv = circle_plus(&g, &circle_minus(&g).unwrap()).unwrap();
        for i in fg.indices() {
            prop_assert!((fg.at(i) - gf.at(i)).abs() <= 1e-12 * fg.at(i).abs().max(1.0));
            prop_assert!((l.at(i) - r.at(i)).abs() <= 1e-12 * l.at(i).abs().max(1.0) * 10.0);
            prop_assert!(inv.at(i).abs() <= 1e-12 * 10.0);
        }
    }

    #[test]
    fn comparison_lemma(
        (f, g) in scale().prop_flat_map(|s| (values_on(&s, -2.0, 2.0), values_on(&s, 0.0, 2.0))),
        x_a in -2.0..2.0f64,
        slack in 0.0..1.0f64,
    ) {
        let b = comparison_bound(x_a, &f, &g, 0).unwrap();
        let eq = witness_comparison(&f, &g, x_a, 0, 0.0).unwrap();
        for i in b.indices() {
            prop_assert!(rel(eq.at(i), b.at(i)) <= 1e-9);
        }
        let strict = witness_comparison(&f, &g, x_a, 0, slack).unwrap();
        for i in b.indices() {
            prop_assert!(strict.at(i) <= b.at(i) + 1e-9 * (1.0 + b.at(i).abs()));
        }
    }
}

fn lattice() -> impl Strategy<Value = GridFn2<f64>> {
    (scale(), scale()).prop_flat_map(|(a, b)| {
        let d = TimeScale2D::new(a, b);
        let (n1, n2) = d.shape();
        prop::collection::vec(-5.0..5.0f64, n1 * n2)
            .prop_map(move |v| GridFn2::new(d.clone(), n1, n2, v).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn darboux_bracketing_and_refinement(f in lattice(), c1 in 0.0..1.0f64, c2 in 0.0..1.0f64) {
        let (n1, n2) = f.domain().shape();
        let r = IndexRect::new(0, n1 - 1, 0, n2 - 1);
        let exact = f.double_integral(&r).unwrap();
        let coarse = RectPartition::single_cell(&r).unwrap();
        let cut1 = 1 + ((n1 - 2) as f64 * c1) as usize;
        let cut2 = 1 + ((n2 - 2) as f64 * c2) as usize;
        let mid = coarse.refine(Axis::First, cut1);
        let fine = mid.refine(Axis::Second, cut2);
        let tol = 1e-12 * (1.0 + exact.abs()) * 10.0;
        let mut prev: Option<(f64, f64)> = None;
        for p in [&coarse, &mid, &fine] {
            let s = f.darboux_sums(p).unwrap();
            prop_assert!(s.lower <= exact + tol && exact <= s.upper + tol);
            if let Some((l, u)) = prev {
                prop_assert!(s.lower >= l - tol && s.upper <= u + tol);
            }
            prev = Some((s.lower, s.upper));
        }
        let finest = f.darboux_sums(&RectPartition::finest(&r).unwrap()).unwrap();
        prop_assert!(rel(finest.upper, exact) <= 1e-12 && rel(finest.lower, exact) <= 1e-12);
        let a = f.iterated_integral(&r, Axis::First).unwrap();
        let b = f.iterated_integral(&r, Axis::Second).unwrap();
        prop_assert!(rel(a, b) <= 1e-12 * 10.0);
    }

    #[test]
    fn mixed_partials_commute(f in lattice()) {
        let a = f.mixed_partial().unwrap();
        let b = f.partial_delta(Axis::Second).unwrap().partial_delta(Axis::First).unwrap();
        let d = f.domain();
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                let corners = f.at(i, j).abs() + f.at(i + 1, j).abs() + f.at(i, j + 1).abs() + f.at(i + 1, j + 1).abs();
                let mag = corners / (d.first().mu(i).unwrap() * d.second().mu(j).unwrap());
                prop_assert!((a.at(i, j) - b.at(i, j)).abs() <= 1e-14 * mag);
            }
        }
    }
}

#[test]
fn dense_derivative_converges_at_first_order() {
    let err = |cells: usize| {
        let s = TimeScale::dense_mesh(0.0, 1.0, cells).unwrap().shared();
        let f = GridFn1::from_fn(s, |t: f64| (2.0 * t).sin()).unwrap();
        let d = f.delta_derivative().unwrap();
        d.samples().map(|(t, v)| (v - 2.0 * (2.0 * t).cos()).abs()).fold(0.0, f64::max)
    };
    let errs: Vec<f64> = [100, 200, 400, 800].iter().map(|&c| err(c)).collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.8..=2.2).contains(&ratio), "ratio {ratio}");
    }
}

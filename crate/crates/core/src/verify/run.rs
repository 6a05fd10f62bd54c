use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::recheck::{self, WitnessCheck};
use super::rng::InstanceRng;
use super::spec::{FunctionSpec, InstanceSpec, KernelSpec, Theorem, VariantSelection, WitnessMode};
use super::witness;
use crate::bounds::{
    bound_corollary, bound_integrodynamic, bound_system, bound_theorem_kernel, BoundReport, ConstantKernel,
    CorollaryProblem, ExponentVariant, IntegroProblem, Kernel, KernelProblem, SystemProblem,
    DOMINANCE_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::lattice::{GridFn2, TimeScale2D};
use crate::regressive::comparison_bound;
use crate::timescale::GridFn1;

/// One evaluated point of the reported instance. `t2` is absent for the
/// one-dimensional comparison lemma.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointRow {
    pub t1: f64,
    pub t2: Option<f64>,
    pub witness: f64,
    pub bound: f64,
}

impl PointRow {
    pub fn slack(&self) -> f64 {
        self.bound - self.witness
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantStatus {
    pub variant: ExponentVariant,
    pub holds: bool,
    pub worst_relative_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceDigest {
    pub index: usize,
    pub seed: u64,
    pub holds: bool,
    pub max_violation: f64,
    pub worst_relative_violation: f64,
    pub min_slack: f64,
    /// Values at the last evaluated point.
    pub bound_corner: f64,
    pub witness_corner: f64,
    pub witness_valid: bool,
    pub witness_worst_excess: f64,
    pub hypothesis_diagnostics: Vec<String>,
    /// Kernel theorem only: dominance under each evaluated exponent variant.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub variants: Vec<VariantStatus>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantSummary {
    pub variant: ExponentVariant,
    pub instances_with_violation: usize,
    pub worst_relative_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlackStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

/// Aggregate over all instances. Counts refer to the primary exponent
/// variant (first-variable unless only the second was requested).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySummary {
    pub theorem: Theorem,
    pub witness_mode: WitnessMode,
    pub evaluation_domain: &'static str,
    pub dominance_tolerance: f64,
    pub instances_run: usize,
    pub instances_with_violation: usize,
    pub worst_relative_violation: f64,
    pub max_violation: f64,
    /// Statistics of the per-instance minimum slack.
    pub min_slack: SlackStats,
    pub invalid_witnesses: usize,
    pub instances_with_hypothesis_diagnostics: usize,
    pub exponent_variants: Vec<VariantSummary>,
    /// Instance whose points are reported: the worst violator, else 0.
    pub points_instance: usize,
    pub instances: Vec<InstanceDigest>,
}

impl VerifySummary {
    pub fn all_hold(&self) -> bool {
        self.instances_with_violation == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub summary: VerifySummary,
    /// Points of [`VerifySummary::points_instance`].
    pub points: Vec<PointRow>,
}

struct Outcome {
    digest: InstanceDigest,
    points: Vec<PointRow>,
}

struct Stats {
    holds: bool,
    max_violation: f64,
    worst_rel: f64,
    min_slack: f64,
}

fn stats(points: &[PointRow]) -> Stats {
    let mut s = Stats { holds: true, max_violation: 0.0, worst_rel: 0.0, min_slack: f64::INFINITY };
    for p in points {
        let excess = p.witness - p.bound;
        let rel = excess / (1.0 + p.bound.abs());
        s.max_violation = s.max_violation.max(excess);
        s.worst_rel = s.worst_rel.max(rel);
        s.min_slack = s.min_slack.min(p.bound - p.witness);
        if rel > DOMINANCE_TOLERANCE || rel.is_nan() {
            s.holds = false;
        }
    }
    s
}

fn report_points(r: &BoundReport<f64>) -> Vec<PointRow> {
    r.rows()
        .map(|(t1, t2, w, b)| PointRow { t1, t2: Some(t2), witness: w.unwrap_or(f64::NAN), bound: b })
        .collect()
}

fn theta_grid(d: &TimeScale2D<f64>, rng: &mut InstanceRng) -> Result<GridFn2<f64>> {
    let (n1, n2) = d.shape();
    let v = (0..n1 * n2).map(|_| rng.uniform()).collect();
    GridFn2::new(d.clone(), n1, n2, v)
}

/// `k(x1, x2, y1, y2) = g(y1, y2) P(x1) Q(x2) + h(y1, y2)` on indices.
struct SeparableKernel {
    g: GridFn2<f64>,
    h: GridFn2<f64>,
    p: GridFn1<f64>,
    q: GridFn1<f64>,
}

impl Kernel<f64> for SeparableKernel {
    fn eval(&self, x1: usize, x2: usize, y1: usize, y2: usize) -> f64 {
        self.g.at(y1, y2) * self.p.at(x1) * self.q.at(x2) + self.h.at(y1, y2)
    }
}

fn build_kernel(
    spec: &KernelSpec,
    d: &TimeScale2D<f64>,
    rng: &mut InstanceRng,
) -> Result<Arc<dyn Kernel<f64>>> {
    Ok(match spec {
        KernelSpec::Constant { value } => {
            let c = FunctionSpec::Constant { value: *value }.build_constant("kernel", rng)?;
            Arc::new(ConstantKernel(c))
        }
        KernelSpec::Separable { g, h, p, q } => Arc::new(SeparableKernel {
            g: g.build_2d("kernel.g", d, rng)?,
            h: h.build_2d("kernel.h", d, rng)?,
            p: p.build_1d("kernel.p", d.first(), rng)?,
            q: q.build_1d("kernel.q", d.second(), rng)?,
        }),
    })
}

struct Ctx<'a> {
    spec: &'a InstanceSpec,
    domain: &'a TimeScale2D<f64>,
}

impl Ctx<'_> {
    fn f2(&self, name: &str, rng: &mut InstanceRng) -> Result<GridFn2<f64>> {
        self.spec.function(name).build_2d(name, self.domain, rng)
    }

    fn strict(&self) -> bool {
        self.spec.witness_mode == WitnessMode::StrictSlack
    }

    fn run(&self, index: usize, seed: u64) -> Result<Outcome> {
        let mut rng = InstanceRng::new(seed);
        let rng = &mut rng;
        let d = self.domain;
        let mut variants = Vec::new();
        let (report, witness_check): (Option<BoundReport<f64>>, WitnessCheck);
        let mut points = None;
        match self.spec.theorem {
            Theorem::Corollary => {
                let (p, q, k) = (self.f2("p", rng)?, self.f2("q", rng)?, self.f2("k", rng)?);
                let theta = if self.strict() { Some(theta_grid(d, rng)?) } else { None };
                let u = witness::witness_corollary(&p, &q, &k, theta.as_ref())?;
                witness_check = recheck::check_corollary(&u, &p, &q, &k);
                report = Some(bound_corollary(&CorollaryProblem { p, q, k, witness: Some(u) })?);
            }
            Theorem::Kernel => {
                let (p, q) = (self.f2("p", rng)?, self.f2("q", rng)?);
                let kernel = build_kernel(&self.spec.kernel.clone().unwrap_or_default(), d, rng)?;
                let theta = if self.strict() { Some(theta_grid(d, rng)?) } else { None };
                let u = witness::witness_kernel(&p, &q, kernel.as_ref(), theta.as_ref())?;
                witness_check = recheck::check_kernel(&u, &p, &q, kernel.as_ref());
                let selected: &[ExponentVariant] = match self.spec.exponent_variant {
                    VariantSelection::FirstVariable => &[ExponentVariant::FirstVariable],
                    VariantSelection::SecondVariable => &[ExponentVariant::SecondVariable],
                    VariantSelection::Both => {
                        &[ExponentVariant::FirstVariable, ExponentVariant::SecondVariable]
                    }
                };
                let mut primary = None;
                for &variant in selected {
                    let r = bound_theorem_kernel(&KernelProblem {
                        p: p.clone(),
                        q: q.clone(),
                        kernel: kernel.clone(),
                        witness: Some(u.clone()),
                        variant,
                    })?;
                    variants.push(VariantStatus {
                        variant,
                        holds: r.holds(),
                        worst_relative_violation: r.worst_relative_violation,
                    });
                    primary.get_or_insert(r);
                }
                report = primary;
            }
            Theorem::System => {
                let c1 = self.spec.function("c1").build_constant("c1", rng)?;
                let c2 = self.spec.function("c2").build_constant("c2", rng)?;
                let h = [self.f2("h1", rng)?, self.f2("h2", rng)?, self.f2("h3", rng)?, self.f2("h4", rng)?];
                let theta =
                    if self.strict() { Some((theta_grid(d, rng)?, theta_grid(d, rng)?)) } else { None };
                let (u, v) = witness::witness_system(c1, c2, &h, theta.as_ref().map(|(a, b)| (a, b)))?;
                witness_check = recheck::check_system(&u, &v, c1, c2, &h);
                report = Some(bound_system(&SystemProblem { c1, c2, h, witness: Some((u, v)) })?);
            }
            Theorem::IntegroDynamic => {
                let a = self.spec.function("a").build_1d("a", d.first(), rng)?;
                let b = self.spec.function("b").build_1d("b", d.second(), rng)?;
                let c = self.f2("c", rng)?;
                let theta = if self.strict() { Some(theta_grid(d, rng)?) } else { None };
                let (u, _) = witness::witness_integrodynamic(&a, &b, &c, theta.as_ref())?;
                witness_check = recheck::check_integrodynamic(&u, &a, &b, &c);
                report = Some(bound_integrodynamic(&IntegroProblem { a, b, c, witness: Some(u) })?);
            }
            Theorem::Comparison => {
                let s = d.first();
                let x_a = self.spec.function("x_a").build_constant("x_a", rng)?;
                let f = self.spec.function("f").build_1d("f", s, rng)?;
                let g = self.spec.function("g").build_1d("g", s, rng)?;
                let slack = if self.strict() { rng.uniform() } else { 0.0 };
                let x = witness::witness_comparison(&f, &g, x_a, 0, slack)?;
                witness_check = recheck::check_comparison(&x, &f, &g);
                let bound = comparison_bound(x_a, &f, &g, 0)?;
                points = Some(
                    x.samples()
                        .zip(bound.values())
                        .map(|((t, w), &b)| PointRow { t1: t, t2: None, witness: w, bound: b })
                        .collect::<Vec<_>>(),
                );
                report = None;
            }
        }
        let diagnostics = report
            .as_ref()
            .map(|r| r.hypothesis_diagnostics.iter().map(ToString::to_string).collect())
            .unwrap_or_default();
        let points = match (points, &report) {
            (Some(p), _) => p,
            (None, Some(r)) => report_points(r),
            (None, None) => unreachable!("every theorem yields points"),
        };
        let st = stats(&points);
        let last = points.last().copied().expect("nonempty lattice");
        let digest = InstanceDigest {
            index,
            seed,
            holds: st.holds,
            max_violation: st.max_violation,
            worst_relative_violation: st.worst_rel,
            min_slack: st.min_slack,
            bound_corner: last.bound,
            witness_corner: last.witness,
            witness_valid: witness_check.valid,
            witness_worst_excess: witness_check.worst_excess,
            hypothesis_diagnostics: diagnostics,
            variants,
        };
        Ok(Outcome { digest, points })
    }
}

/// Generates `spec.count` instances from `spec.seed`, builds their
/// witnesses, evaluates the matching bound and aggregates. Instances run
/// in parallel; results are merged by instance index, so the outcome is
/// identical for any thread count.
pub fn run_verification(spec: &InstanceSpec) -> Result<Verification> {
    spec.validate()?;
    let domain = spec.domain()?;
    let mut master = InstanceRng::new(spec.seed);
    let seeds: Vec<u64> = (0..spec.count).map(|_| master.next_u64()).collect();
    let ctx = Ctx { spec, domain: &domain };
    let results: Vec<Result<Outcome>> = seeds.par_iter().enumerate().map(|(i, &s)| ctx.run(i, s)).collect();
    let mut outcomes = Vec::with_capacity(results.len());
    for (index, r) in results.into_iter().enumerate() {
        outcomes.push(r.map_err(|e| Error::Instance { index, source: Box::new(e) })?);
    }
    log::debug!("{} instances evaluated", outcomes.len());

    let primary = match spec.exponent_variant {
        VariantSelection::SecondVariable => ExponentVariant::SecondVariable,
        _ => ExponentVariant::FirstVariable,
    };
    let mut exponent_variants = Vec::new();
    if spec.theorem == Theorem::Kernel {
        for v in outcomes[0].digest.variants.iter().map(|s| s.variant) {
            let statuses = outcomes.iter().filter_map(|o| o.digest.variants.iter().find(|s| s.variant == v));
            let (mut bad, mut worst) = (0, 0.0f64);
            for s in statuses {
                bad += usize::from(!s.holds);
                worst = worst.max(s.worst_relative_violation);
            }
            exponent_variants.push(VariantSummary {
                variant: v,
                instances_with_violation: bad,
                worst_relative_violation: worst,
            });
        }
    } else {
        let worst = outcomes.iter().map(|o| o.digest.worst_relative_violation).fold(0.0, f64::max);
        exponent_variants.push(VariantSummary {
            variant: primary,
            instances_with_violation: outcomes.iter().filter(|o| !o.digest.holds).count(),
            worst_relative_violation: worst,
        });
    }

    let digests: Vec<&InstanceDigest> = outcomes.iter().map(|o| &o.digest).collect();
    let mut points_instance = 0;
    for (i, d) in digests.iter().enumerate() {
        if d.worst_relative_violation > digests[points_instance].worst_relative_violation {
            points_instance = i;
        }
    }
    let slacks: Vec<f64> = digests.iter().map(|d| d.min_slack).collect();
    let summary = VerifySummary {
        theorem: spec.theorem,
        witness_mode: spec.witness_mode,
        evaluation_domain: if spec.theorem == Theorem::Comparison { "[a, max]" } else { "kappa1 x kappa2" },
        dominance_tolerance: DOMINANCE_TOLERANCE,
        instances_run: digests.len(),
        instances_with_violation: digests.iter().filter(|d| !d.holds).count(),
        worst_relative_violation: digests.iter().map(|d| d.worst_relative_violation).fold(0.0, f64::max),
        max_violation: digests.iter().map(|d| d.max_violation).fold(0.0, f64::max),
        min_slack: SlackStats {
            min: slacks.iter().copied().fold(f64::INFINITY, f64::min),
            max: slacks.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: crate::scalar::compensated_sum(slacks.iter().copied()) / slacks.len() as f64,
        },
        invalid_witnesses: digests.iter().filter(|d| !d.witness_valid).count(),
        instances_with_hypothesis_diagnostics: digests
            .iter()
            .filter(|d| !d.hypothesis_diagnostics.is_empty())
            .count(),
        exponent_variants,
        points_instance,
        instances: outcomes.iter().map(|o| o.digest.clone()).collect(),
    };
    let points = outcomes.swap_remove(points_instance).points;
    Ok(Verification { summary, points })
}

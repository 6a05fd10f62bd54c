use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::rng::InstanceRng;
use crate::error::{Error, Result};
use crate::lattice::{GridFn2, TimeScale2D};
use crate::timescale::{GridFn1, TimeScale};

/// Largest value a sampled coefficient function may reach on its grid.
pub const SAMPLED_MAX: f64 = 10.0;

/// Degree cap for sampled polynomials.
pub const MAX_DEGREE: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScaleSpec {
    /// `{start, start + 1, ..., end}`.
    IntegerSegment {
        start: i64,
        end: i64,
    },
    /// `start + k h` for `k = 0..=n`.
    HGrid {
        #[serde(default)]
        start: f64,
        h: f64,
        n: usize,
    },
    /// `q^0, ..., q^n`.
    QGrid {
        q: f64,
        n: usize,
    },
    Explicit {
        points: Vec<f64>,
    },
    Union {
        scales: Vec<ScaleSpec>,
    },
    /// `n` uniform cells on `[start, end]`, tagged as dense samples.
    DenseMesh {
        start: f64,
        end: f64,
        n: usize,
    },
}

impl ScaleSpec {
    pub fn build(&self) -> Result<TimeScale<f64>> {
        match self {
            ScaleSpec::IntegerSegment { start, end } => TimeScale::integer_segment(*start, *end),
            ScaleSpec::HGrid { start, h, n } => TimeScale::h_grid(*start, *h, *n),
            ScaleSpec::QGrid { q, n } => TimeScale::q_grid(*q, *n),
            ScaleSpec::Explicit { points } => TimeScale::from_points(points.clone()),
            ScaleSpec::Union { scales } => {
                let mut parts = scales.iter().map(ScaleSpec::build);
                let first = parts.next().ok_or_else(|| Error::input("union needs at least one scale"))??;
                parts.try_fold(first, |acc, s| acc.union(&s?))
            }
            ScaleSpec::DenseMesh { start, end, n } => TimeScale::dense_mesh(*start, *end, *n),
        }
    }
}

/// A nonnegative coefficient function. Missing parameters are sampled
/// from the instance RNG; sampled functions are expressed in coordinates
/// normalized to `[0, 1]` over each axis and rescaled to stay at or below
/// [`SAMPLED_MAX`]. Explicit parameters apply to raw abscissae.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Constant {
        #[serde(default)]
        value: Option<f64>,
    },
    /// Coefficients in graded order: `1, t` in one variable;
    /// `1, t1, t2, t1², t1 t2, t2², t1³, ...` in two.
    Polynomial {
        #[serde(default)]
        degree: Option<usize>,
        #[serde(default)]
        coefficients: Option<Vec<f64>>,
    },
    /// `scale · exp(r1 t1 + r2 t2)` (only `r1` in one variable).
    Exponential {
        #[serde(default)]
        scale: Option<f64>,
        #[serde(default)]
        rates: Option<Vec<f64>>,
    },
    /// Raw values, one per point (row-major in two variables).
    Tabulated { values: Vec<f64> },
}

impl Default for FunctionSpec {
    fn default() -> Self {
        FunctionSpec::Polynomial { degree: None, coefficients: None }
    }
}

/// Exponent pairs `(a, b)` of `t1^a t2^b` in graded order.
fn graded_terms(degree: usize) -> Vec<(i32, i32)> {
    let mut out = Vec::new();
    for total in 0..=degree as i32 {
        for b in 0..=total {
            out.push((total - b, b));
        }
    }
    out
}

fn normalizer(s: &TimeScale<f64>) -> impl Fn(f64) -> f64 {
    let (lo, span) = (s.min(), s.max() - s.min());
    move |t| (t - lo) / span
}

/// Evaluation rule of a function spec after sampling, in up to two
/// variables.
enum Resolved {
    Values(Vec<f64>),
    Formula { normalized: bool, f: Box<dyn Fn(f64, f64) -> f64> },
}

impl FunctionSpec {
    fn resolve(&self, dims: usize, expected_len: usize, rng: &mut InstanceRng) -> Result<Resolved> {
        Ok(match self {
            FunctionSpec::Constant { value } => {
                let v = value.unwrap_or_else(|| rng.abs_normal().min(SAMPLED_MAX));
                Resolved::Formula { normalized: false, f: Box::new(move |_, _| v) }
            }
            FunctionSpec::Polynomial { degree, coefficients } => {
                let sampled = coefficients.is_none();
                let coefs = match coefficients {
                    Some(c) => c.clone(),
                    None => {
                        let deg = match degree {
                            Some(d) => *d,
                            None => (rng.uniform() * (MAX_DEGREE + 1) as f64) as usize,
                        };
                        if deg > MAX_DEGREE {
                            return Err(Error::input(format!(
                                "polynomial degree {deg} exceeds {MAX_DEGREE}"
                            )));
                        }
                        let n = if dims == 1 { deg + 1 } else { graded_terms(deg).len() };
                        let raw: Vec<f64> = (0..n).map(|_| rng.abs_normal()).collect();
                        // Nonnegative coefficients peak at the far corner (1, 1).
                        let peak: f64 = raw.iter().sum();
                        let factor = if peak > SAMPLED_MAX { SAMPLED_MAX / peak } else { 1.0 };
                        raw.into_iter().map(|c| c * factor).collect()
                    }
                };
                let f: Box<dyn Fn(f64, f64) -> f64> = if dims == 1 {
                    Box::new(move |x, _| coefs.iter().rev().fold(0.0, |acc, c| acc * x + c))
                } else {
                    let terms = graded_terms(MAX_DEGREE.max(coefs.len()));
                    let terms: Vec<_> = terms.into_iter().zip(coefs).collect();
                    Box::new(move |x, y| terms.iter().map(|&((a, b), c)| c * x.powi(a) * y.powi(b)).sum())
                };
                Resolved::Formula { normalized: sampled, f }
            }
            FunctionSpec::Exponential { scale, rates } => {
                let sampled = rates.is_none();
                let rates = match rates {
                    Some(r) if r.len() == dims => r.clone(),
                    Some(r) => {
                        return Err(Error::input(format!(
                            "exponential needs {dims} rate(s), got {}",
                            r.len()
                        )))
                    }
                    None => (0..dims).map(|_| rng.abs_normal().min(1.0)).collect(),
                };
                let r1 = rates[0];
                let r2 = rates.get(1).copied().unwrap_or(0.0);
                // Peak sits at the far corner, `exp(r1 + r2)` in normalized units.
                let s = scale.unwrap_or_else(|| rng.abs_normal().min(SAMPLED_MAX) / (r1 + r2).exp());
                Resolved::Formula {
                    normalized: sampled,
                    f: Box::new(move |x, y| s * (r1 * x + r2 * y).exp()),
                }
            }
            FunctionSpec::Tabulated { values } => {
                if values.len() != expected_len {
                    return Err(Error::input(format!(
                        "tabulated function has {} values, expected {expected_len}",
                        values.len()
                    )));
                }
                Resolved::Values(values.clone())
            }
        })
    }

    /// Samples the function on one axis.
    pub fn build_1d(
        &self,
        name: &str,
        scale: &Arc<TimeScale<f64>>,
        rng: &mut InstanceRng,
    ) -> Result<GridFn1<f64>> {
        let g = match self.resolve(1, scale.len(), rng)? {
            Resolved::Values(v) => GridFn1::new(scale.clone(), v)?,
            Resolved::Formula { normalized, f } => {
                let norm = normalizer(scale);
                GridFn1::from_fn(scale.clone(), |t| f(if normalized { norm(t) } else { t }, 0.0))?
            }
        };
        require_nonneg(name, g.values())?;
        Ok(g)
    }

    /// Samples the function on the full lattice.
    pub fn build_2d(
        &self,
        name: &str,
        domain: &TimeScale2D<f64>,
        rng: &mut InstanceRng,
    ) -> Result<GridFn2<f64>> {
        let (n1, n2) = domain.shape();
        let g = match self.resolve(2, n1 * n2, rng)? {
            Resolved::Values(v) => GridFn2::new(domain.clone(), n1, n2, v)?,
            Resolved::Formula { normalized, f } => {
                let (x, y) = (normalizer(domain.first()), normalizer(domain.second()));
                GridFn2::from_fn(
                    domain.clone(),
                    |t1, t2| {
                        if normalized {
                            f(x(t1), y(t2))
                        } else {
                            f(t1, t2)
                        }
                    },
                )?
            }
        };
        require_nonneg(name, g.values())?;
        Ok(g)
    }

    /// A single nonnegative real; only the constant family applies.
    pub fn build_constant(&self, name: &str, rng: &mut InstanceRng) -> Result<f64> {
        match self {
            FunctionSpec::Constant { value } => {
                let v = value.unwrap_or_else(|| rng.abs_normal().min(SAMPLED_MAX));
                require_nonneg(name, &[v])?;
                Ok(v)
            }
            _ => Err(Error::input(format!("{name} must use the constant family"))),
        }
    }
}

fn require_nonneg(name: &str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
        Some(i) => Err(Error::input(format!(
            "function {name} is negative or not finite at index {i} ({})",
            values[i]
        ))),
        None => Ok(()),
    }
}

/// Four-argument kernel descriptors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Constant {
        #[serde(default)]
        value: Option<f64>,
    },
    /// `k = g(s1, s2) P(t1) Q(t2) + h(s1, s2)` with nonnegative `g`, `h`
    /// and nondecreasing nonnegative `P`, `Q`; every kernel difference the
    /// bound needs is then nonnegative.
    Separable {
        #[serde(default)]
        g: FunctionSpec,
        #[serde(default)]
        h: FunctionSpec,
        #[serde(default)]
        p: FunctionSpec,
        #[serde(default)]
        q: FunctionSpec,
    },
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec::Separable {
            g: FunctionSpec::default(),
            h: FunctionSpec::default(),
            p: FunctionSpec::default(),
            q: FunctionSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    /// Four-argument kernel inequality.
    Kernel,
    /// Two-argument kernel `k(s1, s2)`.
    Corollary,
    /// Coupled pair `u`, `v`.
    System,
    /// Mixed-derivative (integro-dynamic) inequality.
    IntegroDynamic,
    /// One-dimensional comparison lemma.
    Comparison,
}

impl Theorem {
    /// Coefficient names read from [`InstanceSpec::functions`].
    pub fn function_names(self) -> &'static [&'static str] {
        match self {
            Theorem::Kernel => &["p", "q"],
            Theorem::Corollary => &["p", "q", "k"],
            Theorem::System => &["c1", "c2", "h1", "h2", "h3", "h4"],
            Theorem::IntegroDynamic => &["a", "b", "c"],
            Theorem::Comparison => &["x_a", "f", "g"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessMode {
    /// Hypothesis holds with equality.
    #[default]
    Equality,
    /// Feedback term scaled by a per-point factor drawn from `[0, 1)`
    /// (comparison: a per-instance slack drawn from `[0, 1)`).
    StrictSlack,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantSelection {
    #[default]
    FirstVariable,
    SecondVariable,
    Both,
}

/// A batch of seeded random instances for one theorem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub theorem: Theorem,
    pub scale1: ScaleSpec,
    /// Defaults to `scale1`; unused by the comparison lemma.
    #[serde(default)]
    pub scale2: Option<ScaleSpec>,
    /// Missing entries default to a sampled polynomial (constant for the
    /// scalar `c1`, `c2`, `x_a`).
    #[serde(default)]
    pub functions: BTreeMap<String, FunctionSpec>,
    #[serde(default)]
    pub kernel: Option<KernelSpec>,
    pub seed: u64,
    #[serde(default = "one")]
    pub count: usize,
    #[serde(default)]
    pub witness_mode: WitnessMode,
    #[serde(default)]
    pub exponent_variant: VariantSelection,
}

fn one() -> usize {
    1
}

impl InstanceSpec {
    /// Structural validation; runs before any instance is generated.
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::input("count must be at least 1"));
        }
        let allowed = self.theorem.function_names();
        if let Some(extra) = self.functions.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::input(format!(
                "unknown function '{extra}' for theorem {:?} (expected {})",
                self.theorem,
                allowed.join(", ")
            )));
        }
        if self.kernel.is_some() && self.theorem != Theorem::Kernel {
            return Err(Error::input("kernel descriptor only applies to the kernel theorem"));
        }
        if self.exponent_variant != VariantSelection::FirstVariable && self.theorem != Theorem::Kernel {
            return Err(Error::input("exponent_variant only applies to the kernel theorem"));
        }
        self.domain()?;
        Ok(())
    }

    pub fn domain(&self) -> Result<TimeScale2D<f64>> {
        let s1 = self.scale1.build()?.shared();
        let s2 = match &self.scale2 {
            Some(s) => s.build()?.shared(),
            None => s1.clone(),
        };
        Ok(TimeScale2D::new(s1, s2))
    }

    pub fn function(&self, name: &str) -> FunctionSpec {
        match self.functions.get(name) {
            Some(f) => f.clone(),
            None if matches!(name, "c1" | "c2" | "x_a") => FunctionSpec::Constant { value: None },
            None => FunctionSpec::default(),
        }
    }
}

//! Inline scale and function descriptors used by `calc` and `converge`.
//!
//! Scales: `integer:A..B`, `h:START,H,N`, `q:Q,N`, `dense:A,B,N`,
//! `explicit:T0,T1,...`, `union:S1|S2|...`.
//!
//! Functions: `const:V`, `poly:C0,C1,...`, `exp:S,R` (`S e^{R t}`),
//! `sin:W`, `cos:W`, `values:V0,V1,...` (one value per point).

use std::sync::Arc;

use tscale::{GridFn1, TimeScale64};

use crate::error::CliError;

fn numbers(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|x| {
            x.trim().parse::<f64>().map_err(|_| CliError::Config(format!("{what}: '{x}' is not a number")))
        })
        .collect()
}

fn exactly<const N: usize>(s: &str, what: &str) -> Result<[f64; N], CliError> {
    let v = numbers(s, what)?;
    v.try_into()
        .map_err(|v: Vec<f64>| CliError::Config(format!("{what} expects {N} values, got {}", v.len())))
}

fn count(x: f64, what: &str) -> Result<usize, CliError> {
    if x < 0.0 || x.fract() != 0.0 {
        return Err(CliError::Config(format!("{what} must be a nonnegative integer, got {x}")));
    }
    Ok(x as usize)
}

pub fn parse_scale(desc: &str) -> Result<TimeScale64, CliError> {
    let (kind, rest) = desc
        .split_once(':')
        .ok_or_else(|| CliError::Config(format!("scale '{desc}' lacks a 'kind:' prefix")))?;
    let built = match kind {
        "integer" => {
            let (a, b) = rest
                .split_once("..")
                .ok_or_else(|| CliError::Config(format!("integer scale expects A..B, got '{rest}'")))?;
            let parse = |x: &str| {
                x.trim()
                    .parse::<i64>()
                    .map_err(|_| CliError::Config(format!("integer scale: '{x}' is not an integer")))
            };
            TimeScale64::integer_segment(parse(a)?, parse(b)?)
        }
        "h" => {
            let [start, h, n] = exactly(rest, "h scale")?;
            TimeScale64::h_grid(start, h, count(n, "h scale N")?)
        }
        "q" => {
            let [q, n] = exactly(rest, "q scale")?;
            TimeScale64::q_grid(q, count(n, "q scale N")?)
        }
        "dense" => {
            let [a, b, n] = exactly(rest, "dense scale")?;
            TimeScale64::dense_mesh(a, b, count(n, "dense scale N")?)
        }
        "explicit" => TimeScale64::from_points(numbers(rest, "explicit scale")?),
        "union" => {
            let mut parts = rest.split('|').map(parse_scale);
            let first = parts.next().expect("split yields one part")?;
            return parts.try_fold(first, |acc, s| acc.union(&s?).map_err(CliError::config));
        }
        other => return Err(CliError::Config(format!("unknown scale kind '{other}'"))),
    };
    built.map_err(CliError::config)
}

/// A smooth test function with closed-form derivative and antiderivative.
#[derive(Debug, Clone, PartialEq)]
pub enum FnDesc {
    Const(f64),
    Poly(Vec<f64>),
    Exp { s: f64, r: f64 },
    Sin(f64),
    Cos(f64),
    Values(Vec<f64>),
}

impl FnDesc {
    pub fn parse(desc: &str) -> Result<Self, CliError> {
        let (kind, rest) = desc
            .split_once(':')
            .ok_or_else(|| CliError::Config(format!("function '{desc}' lacks a 'family:' prefix")))?;
        Ok(match kind {
            "const" => FnDesc::Const(exactly::<1>(rest, "const")?[0]),
            "poly" => FnDesc::Poly(numbers(rest, "poly")?),
            "exp" => {
                let [s, r] = exactly(rest, "exp")?;
                FnDesc::Exp { s, r }
            }
            "sin" => FnDesc::Sin(exactly::<1>(rest, "sin")?[0]),
            "cos" => FnDesc::Cos(exactly::<1>(rest, "cos")?[0]),
            "values" => FnDesc::Values(numbers(rest, "values")?),
            other => return Err(CliError::Config(format!("unknown function family '{other}'"))),
        })
    }

    /// `None` for tabulated values.
    pub fn eval(&self, t: f64) -> Option<f64> {
        Some(match self {
            FnDesc::Const(c) => *c,
            FnDesc::Poly(c) => c.iter().rev().fold(0.0, |acc, k| acc * t + k),
            FnDesc::Exp { s, r } => s * (r * t).exp(),
            FnDesc::Sin(w) => (w * t).sin(),
            FnDesc::Cos(w) => (w * t).cos(),
            FnDesc::Values(_) => return None,
        })
    }

    pub fn derivative(&self, t: f64) -> Option<f64> {
        Some(match self {
            FnDesc::Const(_) => 0.0,
            FnDesc::Poly(c) => {
                c.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, ck)| acc * t + k as f64 * ck)
            }
            FnDesc::Exp { s, r } => s * r * (r * t).exp(),
            FnDesc::Sin(w) => w * (w * t).cos(),
            FnDesc::Cos(w) => -w * (w * t).sin(),
            FnDesc::Values(_) => return None,
        })
    }

    /// `∫_a^b f(t) dt`.
    pub fn integral(&self, a: f64, b: f64) -> Option<f64> {
        let prim = |t: f64| -> Option<f64> {
            Some(match self {
                FnDesc::Const(c) => c * t,
                FnDesc::Poly(c) => {
                    c.iter().enumerate().rev().fold(0.0, |acc, (k, ck)| acc * t + ck / (k + 1) as f64) * t
                }
                FnDesc::Exp { s, r } if *r == 0.0 => s * t,
                FnDesc::Exp { s, r } => s / r * (r * t).exp(),
                FnDesc::Sin(w) if *w == 0.0 => 0.0,
                FnDesc::Sin(w) => -(w * t).cos() / w,
                FnDesc::Cos(w) if *w == 0.0 => t,
                FnDesc::Cos(w) => (w * t).sin() / w,
                FnDesc::Values(_) => return None,
            })
        };
        Some(prim(b)? - prim(a)?)
    }

    pub fn sample(&self, scale: &Arc<TimeScale64>) -> Result<GridFn1<f64>, CliError> {
        match self {
            FnDesc::Values(v) => {
                if v.len() != scale.len() {
                    return Err(CliError::Config(format!(
                        "values: expected {} entries (one per point), got {}",
                        scale.len(),
                        v.len()
                    )));
                }
                GridFn1::new(scale.clone(), v.clone()).map_err(CliError::config)
            }
            f => {
                GridFn1::from_fn(scale.clone(), |t| f.eval(t).expect("closed form")).map_err(CliError::config)
            }
        }
    }
}

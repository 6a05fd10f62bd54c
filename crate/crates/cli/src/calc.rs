use std::io::Write;
use std::sync::Arc;

use clap::{Args, Subcommand};
use tscale::{comparison_bound, exp_fn, GridFn1, TimeScale64};

use crate::descriptors::{parse_scale, FnDesc};
use crate::error::CliError;
use crate::format::num;

#[derive(Debug, Args)]
pub struct ScaleArg {
    /// Scale descriptor, e.g. `integer:0..5`, `q:2,4`, `h:0,0.5,10`.
    #[arg(long)]
    pub scale: String,
}

#[derive(Debug, Subcommand)]
pub enum CalcCmd {
    /// Forward jump `σ(t)` at every point.
    Sigma(ScaleArg),
    /// Graininess `μ(t)` at every point.
    Mu(ScaleArg),
    /// Delta derivative on the κ-set.
    Dderiv {
        #[command(flatten)]
        scale: ScaleArg,
        /// Function descriptor, e.g. `poly:0,0,1`, `sin:1`.
        #[arg(long = "fn")]
        func: String,
    },
    /// Cauchy Δ-integral between two points; prints one value.
    Dint {
        #[command(flatten)]
        scale: ScaleArg,
        #[arg(long = "fn")]
        func: String,
        /// Lower limit (a point of the scale); defaults to the minimum.
        #[arg(long, allow_hyphen_values = true)]
        from: Option<f64>,
        /// Upper limit (a point of the scale); defaults to the maximum.
        #[arg(long, allow_hyphen_values = true)]
        to: Option<f64>,
    },
    /// Exponential `e_p(t, t0)` at every point.
    Exp {
        #[command(flatten)]
        scale: ScaleArg,
        /// The exponent function `p`.
        #[arg(long = "fn")]
        func: String,
        #[arg(long, allow_hyphen_values = true)]
        t0: Option<f64>,
    },
    /// Comparison bound `x_a e_g(t, a) + ∫_a^t f(s) e_g(t, σ(s)) Δs` for `t ≥ a`.
    Compare {
        #[command(flatten)]
        scale: ScaleArg,
        #[arg(long = "fn")]
        func: String,
        #[arg(long)]
        g: String,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        xa: f64,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
    },
}

fn point_index(s: &TimeScale64, t: Option<f64>, default: usize) -> Result<usize, CliError> {
    match t {
        None => Ok(default),
        Some(t) => s.index_of(t, 1e-9 * t.abs().max(1.0)).ok_or_else(|| {
            CliError::Compute(tscale::Error::Domain(format!("t = {} is not a point of the scale", num(t))))
        }),
    }
}

fn rows(out: &mut impl Write, rows: impl Iterator<Item = (f64, f64)>) -> std::io::Result<()> {
    writeln!(out, "t,value")?;
    for (t, v) in rows {
        writeln!(out, "{},{}", num(t), num(v))?;
    }
    Ok(())
}

fn sample(func: &str, s: &Arc<TimeScale64>) -> Result<GridFn1<f64>, CliError> {
    FnDesc::parse(func)?.sample(s)
}

pub fn run(cmd: &CalcCmd, out: &mut impl Write) -> Result<(), CliError> {
    let scale_of = |a: &ScaleArg| parse_scale(&a.scale).map(TimeScale64::shared);
    let io = |e: std::io::Error| CliError::Config(format!("cannot write output: {e}"));
    match cmd {
        CalcCmd::Sigma(a) => {
            let s = scale_of(a)?;
            let p = s.points();
            rows(out, (0..s.len()).map(|i| (p[i], p[s.sigma(i).expect("in range")]))).map_err(io)
        }
        CalcCmd::Mu(a) => {
            let s = scale_of(a)?;
            rows(out, s.points().iter().copied().zip(s.graininess())).map_err(io)
        }
        CalcCmd::Dderiv { scale, func } => {
            let s = scale_of(scale)?;
            let d = sample(func, &s)?.delta_derivative()?;
            rows(out, d.samples()).map_err(io)
        }
        CalcCmd::Dint { scale, func, from, to } => {
            let s = scale_of(scale)?;
            let f = sample(func, &s)?;
            let a = point_index(&s, *from, 0)?;
            let b = point_index(&s, *to, s.len() - 1)?;
            let v = f.cauchy_integral(a, b)?;
            writeln!(out, "{}", num(v)).map_err(io)
        }
        CalcCmd::Exp { scale, func, t0 } => {
            let s = scale_of(scale)?;
            let p = sample(func, &s)?;
            let t0 = point_index(&s, *t0, 0)?;
            let e = exp_fn(&p, t0)?;
            rows(out, e.samples()).map_err(io)
        }
        CalcCmd::Compare { scale, func, g, xa, a } => {
            let s = scale_of(scale)?;
            let (f, g) = (sample(func, &s)?, sample(g, &s)?);
            let a = point_index(&s, *a, 0)?;
            let b = comparison_bound(*xa, &f, &g, a)?;
            rows(out, b.samples()).map_err(io)
        }
    }
}

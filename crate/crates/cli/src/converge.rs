use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;
use tscale::verify::ScaleSpec;
use tscale::{exp_fn, TimeScale64};

use crate::descriptors::FnDesc;
use crate::error::CliError;
use crate::format::num;

pub const CONVERGE_CSV_HEADER: &str = "h,max_error,observed_order";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operation {
    /// Delta derivative against `f'`.
    Dderiv,
    /// `e_f(t, start)` against `exp(∫_start^t f)`.
    Exp,
    /// `∫_start^t f Δs` against the Riemann integral.
    Dint,
}

/// Mesh-refinement study on a dense mesh.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    pub operation: Operation,
    /// Function descriptor as accepted by `calc --fn`.
    pub function: String,
    /// Coarsest mesh; must be a `dense_mesh`.
    pub scale: ScaleSpec,
    /// Number of meshes, each halving the previous step.
    #[serde(default = "four")]
    pub levels: usize,
    /// Output CSV path relative to the config; defaults to
    /// `<config>.converge.csv`.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn four() -> usize {
    4
}

pub struct Level {
    pub h: f64,
    pub max_error: f64,
}

fn max_error(op: Operation, f: &FnDesc, s: &Arc<TimeScale64>) -> Result<f64, CliError> {
    let g = f.sample(s)?;
    let t0 = s.min();
    let (computed, exact): (_, Box<dyn Fn(f64) -> f64>) = match op {
        Operation::Dderiv => (g.delta_derivative()?, Box::new(|t| f.derivative(t).expect("closed form"))),
        Operation::Exp => (exp_fn(&g, 0)?, Box::new(|t| f.integral(t0, t).expect("closed form").exp())),
        Operation::Dint => (g.antiderivative(0, 0.0)?, Box::new(|t| f.integral(t0, t).expect("closed form"))),
    };
    let worst = computed.samples().map(|(t, v)| (v - exact(t)).abs()).fold(0.0, f64::max);
    Ok(worst)
}

pub fn study(cfg: &ConvergeConfig) -> Result<Vec<Level>, CliError> {
    let ScaleSpec::DenseMesh { start, end, n } = cfg.scale else {
        return Err(CliError::Config("converge needs a dense_mesh scale".into()));
    };
    let f = FnDesc::parse(&cfg.function)?;
    if matches!(f, FnDesc::Values(_)) {
        return Err(CliError::Config("converge needs a closed-form function".into()));
    }
    if cfg.levels < 2 {
        return Err(CliError::Config("levels must be at least 2".into()));
    }
    // validate before computing
    TimeScale64::dense_mesh(start, end, n).map_err(CliError::config)?;
    (0..cfg.levels)
        .map(|k| {
            let cells = n << k;
            let s = TimeScale64::dense_mesh(start, end, cells).map_err(CliError::config)?.shared();
            Ok(Level { h: (end - start) / cells as f64, max_error: max_error(cfg.operation, &f, &s)? })
        })
        .collect()
}

/// `log2(err(h) / err(h/2))`; empty when undefined (zero error).
pub fn csv(levels: &[Level]) -> String {
    let mut s = format!("{CONVERGE_CSV_HEADER}\n");
    for (i, l) in levels.iter().enumerate() {
        let order = match i.checked_sub(1).map(|j| levels[j].max_error / l.max_error) {
            Some(r) if r.is_finite() && r > 0.0 => num(r.log2()),
            _ => String::new(),
        };
        s.push_str(&format!("{},{},{}\n", num(l.h), num(l.max_error), order));
    }
    s
}

pub fn run(config_path: &Path, out: &mut impl Write) -> Result<(), CliError> {
    let text = fs::read_to_string(config_path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", config_path.display())))?;
    let cfg: ConvergeConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("config: {e}")))?;
    let path = match &cfg.output {
        Some(p) => config_path.parent().unwrap_or(Path::new("")).join(p),
        None => config_path.with_extension("converge.csv"),
    };
    let body = csv(&study(&cfg)?);
    fs::write(&path, &body).map_err(|e| {
        let _ = fs::remove_file(&path);
        CliError::Config(format!("cannot write {}: {e}", path.display()))
    })?;
    let _ = out.write_all(body.as_bytes());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(op: Operation, f: &str) -> ConvergeConfig {
        ConvergeConfig {
            operation: op,
            function: f.into(),
            scale: ScaleSpec::DenseMesh { start: 0.0, end: 1.0, n: 100 },
            levels: 4,
            output: None,
        }
    }

    fn orders(levels: &[Level]) -> Vec<f64> {
        levels.windows(2).map(|w| (w[0].max_error / w[1].max_error).log2()).collect()
    }

    #[test]
    fn first_order_for_derivative_exp_and_integral() {
        for (op, f) in [(Operation::Dderiv, "sin:1"), (Operation::Exp, "const:1"), (Operation::Dint, "cos:3")]
        {
            let l = study(&cfg(op, f)).unwrap();
            assert_eq!(l.len(), 4);
            for o in orders(&l) {
                assert!((0.9..=1.1).contains(&o), "{op:?} {f}: order {o}");
            }
        }
    }

    #[test]
    fn constant_is_exact() {
        let l = study(&cfg(Operation::Dderiv, "const:2")).unwrap();
        assert!(l.iter().all(|x| x.max_error == 0.0));
        let s = csv(&l);
        assert!(s.lines().skip(1).all(|r| r.ends_with(",0,")));
    }

    #[test]
    fn requires_dense_mesh() {
        let mut c = cfg(Operation::Dderiv, "sin:1");
        c.scale = ScaleSpec::IntegerSegment { start: 0, end: 3 };
        assert_eq!(study(&c).err().unwrap().exit_code(), 2);
    }
}

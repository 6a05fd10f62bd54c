use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Deserialize;
use serde_json::Value;
use tscale::verify::{run_verification, InstanceSpec, PointRow, Verification};

use crate::error::CliError;
use crate::format::num;

pub const POINTS_CSV_HEADER: &str = "t1,t2,witness,bound,slack";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Base path of the report files, relative to the config file.
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// A verification scenario: every [`InstanceSpec`] field plus `output`.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub instances: InstanceSpec,
    pub output: OutputSpec,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut value: Value = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("config is not valid JSON: {e}")))?;
        let output = match value.as_object_mut().and_then(|o| o.remove("output")) {
            Some(v) => serde_json::from_value(v).map_err(|e| CliError::Config(format!("output: {e}")))?,
            None => OutputSpec::default(),
        };
        let instances: InstanceSpec =
            serde_json::from_value(value).map_err(|e| CliError::Config(format!("config: {e}")))?;
        instances.validate().map_err(CliError::config)?;
        Ok(Self { instances, output })
    }
}

/// Report paths for a config at `config_path`.
pub struct ReportPaths {
    pub points: PathBuf,
    pub summary: PathBuf,
}

impl ReportPaths {
    pub fn new(config_path: &Path, out: &OutputSpec) -> Self {
        let base = match &out.path {
            Some(p) => config_path.parent().unwrap_or(Path::new("")).join(p),
            None => config_path.with_extension(""),
        };
        let with = |suffix: &str| {
            let mut s = base.clone().into_os_string();
            s.push(suffix);
            PathBuf::from(s)
        };
        let points = match out.format {
            Format::Csv => with(".points.csv"),
            Format::Json => with(".points.json"),
        };
        Self { points, summary: with(".summary.json") }
    }
}

fn points_csv(points: &[PointRow]) -> String {
    let mut s = String::with_capacity(points.len() * 48);
    s.push_str(POINTS_CSV_HEADER);
    s.push('\n');
    for p in points {
        let t2 = p.t2.map(num).unwrap_or_default();
        s.push_str(&format!("{},{},{},{},{}\n", num(p.t1), t2, num(p.witness), num(p.bound), num(p.slack())));
    }
    s
}

fn points_json(points: &[PointRow]) -> String {
    let rows: Vec<Value> = points
        .iter()
        .map(|p| {
            serde_json::json!({
                "t1": p.t1, "t2": p.t2, "witness": p.witness, "bound": p.bound, "slack": p.slack(),
            })
        })
        .collect();
    serde_json::to_string_pretty(&rows).expect("plain values serialize") + "\n"
}

fn write_all(files: &[(&Path, String)]) -> Result<(), CliError> {
    let mut written: Vec<&Path> = Vec::new();
    for (path, body) in files {
        let res = (|| {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            let mut f = fs::File::create(path)?;
            f.write_all(body.as_bytes())?;
            f.sync_all()
        })();
        match res {
            Ok(()) => written.push(path),
            Err(e) => {
                for p in written.iter().chain(std::iter::once(path)) {
                    let _ = fs::remove_file(p);
                }
                return Err(CliError::Config(format!("cannot write {}: {e}", path.display())));
            }
        }
    }
    Ok(())
}

/// Runs the scenario, writes both report files and returns whether every
/// instance satisfied its bound.
pub fn run(config_path: &Path, out: &mut impl Write) -> Result<bool, CliError> {
    let text = fs::read_to_string(config_path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", config_path.display())))?;
    let cfg = ScenarioConfig::parse(&text)?;
    let paths = ReportPaths::new(config_path, &cfg.output);
    let started = Instant::now();
    // A failed run must not leave an earlier run's reports looking current.
    let Verification { summary, points } = run_verification(&cfg.instances).inspect_err(|_| {
        let _ = fs::remove_file(&paths.points);
        let _ = fs::remove_file(&paths.summary);
    })?;
    let elapsed = started.elapsed();

    let body = match cfg.output.format {
        Format::Csv => points_csv(&points),
        Format::Json => points_json(&points),
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    write_all(&[(&paths.points, body), (&paths.summary, json)])?;

    let _ = writeln!(
        out,
        "{} instances, {} with violations, worst relative violation {}, wall time {:.3}s",
        summary.instances_run,
        summary.instances_with_violation,
        num(summary.worst_relative_violation),
        elapsed.as_secs_f64()
    );
    for v in &summary.exponent_variants {
        let _ = writeln!(
            out,
            "  {}: {} instances with violations",
            serde_json::to_string(&v.variant).unwrap_or_default().trim_matches('"'),
            v.instances_with_violation
        );
    }
    let _ = writeln!(out, "wrote {} and {}", paths.points.display(), paths.summary.display());
    Ok(summary.all_hold())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_is_split_from_instance_fields() {
        let c = ScenarioConfig::parse(
            r#"{"theorem": "system", "scale1": {"kind": "integer_segment", "start": 0, "end": 4},
                "seed": 3, "count": 2, "output": {"path": "out/run", "format": "json"}}"#,
        )
        .unwrap();
        assert_eq!(c.instances.count, 2);
        assert_eq!(c.output.format, Format::Json);
        let p = ReportPaths::new(Path::new("cfg/a.json"), &c.output);
        assert_eq!(p.points, Path::new("cfg/out/run.points.json"));
        assert_eq!(p.summary, Path::new("cfg/out/run.summary.json"));
    }

    #[test]
    fn default_paths_follow_config() {
        let p = ReportPaths::new(Path::new("/x/exp1.json"), &OutputSpec::default());
        assert_eq!(p.points, Path::new("/x/exp1.points.csv"));
        assert_eq!(p.summary, Path::new("/x/exp1.summary.json"));
    }

    #[test]
    fn rejects_unknown_keys() {
        let e = ScenarioConfig::parse(
            r#"{"theorem": "system", "scale1": {"kind": "integer_segment", "start": 0, "end": 4}, "seed": 1, "sead": 2}"#,
        )
        .unwrap_err();
        assert!(e.to_string().contains("sead"));
    }

    #[test]
    fn csv_leaves_t2_blank_in_one_dimension() {
        let s = points_csv(&[PointRow { t1: 1.0, t2: None, witness: 2.0, bound: 3.0 }]);
        assert_eq!(s, "t1,t2,witness,bound,slack\n1,,2,3,1\n");
    }
}

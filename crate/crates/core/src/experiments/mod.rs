//! Named reproductions, each producing an [`ExperimentReport`] with
//! pass/fail verdicts.
//!
//! | name | claim |
//! |------|-------|
//! | `E1_counterexample` | `u(0,t)/t` has two limits for staircase data |
//! | `E2_instability` | small bumps change the large-time limit |
//! | `E3_namah_roquejoffre` | `u + εt` converges for `u_t + |Du|² = εf` |
//! | `E4_phi_convergence` | `u + λt → φ` for compactly perturbed `φ` |
//! | `E5_geodesic_escape` | minimizer start points escape to infinity |
//! | `E6_h4_decay` | strong-convexity check and decay of `‖u_t‖∞` |

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{HjError, Result};
use crate::grid::{Extension, Grid1D, SampledFn};

mod e1;
mod e2;
mod e3;
mod e4;
mod e5;
mod e6;

pub use e1::E1Config;
pub use e2::E2Config;
pub use e3::E3Config;
pub use e4::E4Config;
pub use e5::E5Config;
pub use e6::E6Config;

pub const EXPERIMENTS: [&str; 6] = [
    "E1_counterexample",
    "E2_instability",
    "E3_namah_roquejoffre",
    "E4_phi_convergence",
    "E5_geodesic_escape",
    "E6_h4_decay",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    /// Boolean check; `measured` is 1 for true.
    #[serde(rename = "holds")]
    Holds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub id: String,
    pub measured: Option<f64>,
    pub threshold: Option<f64>,
    pub relation: Relation,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn compare(
        id: impl Into<String>,
        measured: f64,
        relation: Relation,
        threshold: f64,
        detail: impl Into<String>,
    ) -> Self {
        let pass = measured.is_finite()
            && match relation {
                Relation::Lt => measured < threshold,
                Relation::Le => measured <= threshold,
                Relation::Gt => measured > threshold,
                Relation::Ge => measured >= threshold,
                Relation::Holds => measured == 1.0,
            };
        Self {
            id: id.into(),
            measured: measured.is_finite().then_some(measured),
            threshold: threshold.is_finite().then_some(threshold),
            relation,
            pass,
            detail: detail.into(),
        }
    }

    pub fn holds(id: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            measured: Some(if ok { 1.0 } else { 0.0 }),
            threshold: None,
            relation: Relation::Holds,
            pass: ok,
            detail: detail.into(),
        }
    }

    pub fn failure(id: impl Into<String>, err: &HjError) -> Self {
        Self {
            id: id.into(),
            measured: None,
            threshold: None,
            relation: Relation::Holds,
            pass: false,
            detail: err.to_string(),
        }
    }
}

pub type Series = Vec<[f64; 2]>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub config: Value,
    pub series: BTreeMap<String, Series>,
    pub verdicts: Vec<Verdict>,
}

impl ExperimentReport {
    fn new(name: &str, config: Value) -> Self {
        Self {
            name: name.to_string(),
            config,
            series: BTreeMap::new(),
            verdicts: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        !self.verdicts.is_empty() && self.verdicts.iter().all(|v| v.pass)
    }

    pub fn verdict(&self, id: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.id == id)
    }

    pub fn series(&self, key: &str) -> Option<&Series> {
        self.series.get(key)
    }

    fn push_series(&mut self, key: &str, points: impl IntoIterator<Item = (f64, f64)>) {
        self.series.insert(
            key.to_string(),
            points.into_iter().map(|(t, v)| [t, v]).collect(),
        );
    }

    fn push(&mut self, v: Verdict) {
        self.verdicts.push(v);
    }

    pub fn to_json(&self) -> Result<String> {
        if self
            .series
            .values()
            .flatten()
            .flatten()
            .any(|v| !v.is_finite())
        {
            return Err(HjError::InvalidInput(format!(
                "report {} has non-finite series values",
                self.name
            )));
        }
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    #[default]
    Both,
}

/// Recursively overlays `patch` onto `base`.
pub fn merge_json(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(k) {
                    Some(slot) => merge_json(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, p) => *b = p.clone(),
    }
}

/// Defaults overlaid with `overrides`, type-checked against `C`.
pub fn resolve_config<C: Default + Serialize + DeserializeOwned>(
    overrides: &Value,
) -> Result<(C, Value)> {
    let mut merged = serde_json::to_value(C::default())?;
    if !overrides.is_null() {
        if !overrides.is_object() {
            return Err(HjError::Config("overrides must be a JSON object".into()));
        }
        merge_json(&mut merged, overrides);
    }
    let cfg: C = serde_json::from_value(merged).map_err(|e| HjError::Config(e.to_string()))?;
    let echo = serde_json::to_value(&cfg)?;
    Ok((cfg, echo))
}

pub fn run_experiment(name: &str, overrides: &Value) -> Result<ExperimentReport> {
    match name {
        "E1_counterexample" => run_with(name, overrides, e1::run),
        "E2_instability" => run_with(name, overrides, e2::run),
        "E3_namah_roquejoffre" => run_with(name, overrides, e3::run),
        "E4_phi_convergence" => run_with(name, overrides, e4::run),
        "E5_geodesic_escape" => run_with(name, overrides, e5::run),
        "E6_h4_decay" => run_with(name, overrides, e6::run),
        _ => Err(HjError::UnknownExperiment(name.to_string())),
    }
}

fn run_with<C, F>(name: &str, overrides: &Value, body: F) -> Result<ExperimentReport>
where
    C: Default + Serialize + DeserializeOwned,
    F: FnOnce(&C, &mut ExperimentReport) -> Result<()>,
{
    let (cfg, echo) = resolve_config::<C>(overrides)?;
    let mut report = ExperimentReport::new(name, echo);
    if let Err(e) = body(&cfg, &mut report) {
        report.push(Verdict::failure("run", &e));
    }
    Ok(report)
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let file = path.file_name().and_then(|f| f.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{file}.tmp"));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Writes `<dir>/<name>.json` and/or `<dir>/<name>_<series>.csv`.
pub fn write_report(
    report: &ExperimentReport,
    dir: &Path,
    format: OutputFormat,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if matches!(format, OutputFormat::Json | OutputFormat::Both) {
        let path = dir.join(format!("{}.json", report.name));
        write_atomic(&path, &report.to_json()?)?;
        written.push(path);
    }
    if matches!(format, OutputFormat::Csv | OutputFormat::Both) {
        for (key, points) in &report.series {
            let path = dir.join(format!("{}_{}.csv", report.name, key));
            write_atomic(&path, &series_csv("t", points))?;
            written.push(path);
        }
    }
    Ok(written)
}

pub fn series_csv(first: &str, points: &[[f64; 2]]) -> String {
    let mut out = format!("{first},value\n");
    for [t, v] in points {
        out.push_str(&format!("{t},{v}\n"));
    }
    out
}

/// Cubic bump `1 − 3r² + 2r³` on `r = |x| < 1`, zero outside.
pub fn cubic_bump(x: f64) -> f64 {
    let r = x.abs();
    if r >= 1.0 {
        0.0
    } else {
        1.0 - 3.0 * r * r + 2.0 * r * r * r
    }
}

/// `height·bump((x − center)/width)` sampled on `grid`.
pub fn sampled_bump(grid: Grid1D, height: f64, center: f64, width: f64) -> Result<SampledFn> {
    if !(width > 0.0) {
        return Err(HjError::InvalidInput("bump width must be positive".into()));
    }
    SampledFn::from_fn(
        grid,
        |x| height * cubic_bump((x - center) / width),
        Extension::Constant,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn merge_overlays_nested_keys() {
        let mut base = json!({"a": 1, "b": {"c": 2, "d": 3}});
        merge_json(&mut base, &json!({"b": {"d": 4}, "e": 5}));
        assert_eq!(base, json!({"a": 1, "b": {"c": 2, "d": 4}, "e": 5}));
    }

    #[test]
    fn bad_overrides_are_config_errors() {
        assert!(matches!(
            run_experiment("E1_counterexample", &json!({"nope": 1})),
            Err(HjError::Config(_))
        ));
        assert!(matches!(
            run_experiment("E1_counterexample", &json!({"tol": "x"})),
            Err(HjError::Config(_))
        ));
        assert!(matches!(
            run_experiment("E9", &Value::Null),
            Err(HjError::UnknownExperiment(_))
        ));
    }

    #[test]
    fn precondition_failures_become_failing_verdicts() {
        let rep = run_experiment(
            "E1_counterexample",
            &json!({"sequence": [1.0, 10.0, 100.0, 1000.0, 1e4, 1e5]}),
        )
        .unwrap();
        assert!(!rep.passed());
        assert!(rep.verdicts.iter().any(|v| v.id == "run" && !v.pass));
    }

    #[test]
    fn verdict_relations() {
        assert!(Verdict::compare("a", 1.0, Relation::Lt, 2.0, "").pass);
        assert!(!Verdict::compare("a", 2.0, Relation::Lt, 2.0, "").pass);
        assert!(Verdict::compare("a", 2.0, Relation::Le, 2.0, "").pass);
        assert!(!Verdict::compare("a", f64::NAN, Relation::Ge, 0.0, "").pass);
        assert_eq!(
            Verdict::compare("a", f64::NAN, Relation::Ge, 0.0, "").measured,
            None
        );
    }

    #[test]
    fn bump_shape() {
        assert_eq!(cubic_bump(0.0), 1.0);
        assert_eq!(cubic_bump(1.0), 0.0);
        assert_eq!(cubic_bump(-0.5), 0.5);
    }
}

//! Flat `key = value` run configuration.
//!
//! Every CLI run writes its fully resolved configuration (all defaults
//! expanded) next to its outputs; re-running from that file reproduces the
//! outputs bitwise in fixed-iteration mode. Unknown keys are rejected;
//! missing keys take the documented defaults. Floats are written with
//! shortest round-trip formatting so resolved files re-parse to identical
//! values.

use std::path::{Path, PathBuf};

use crate::optim::{Budget, TrackerConfig};
use crate::tracker::Method;

use super::DataError;

/// Parses `key = value` lines; `#` starts a comment. Returns
/// `(key, value, line_number)` triples in file order.
pub fn parse_key_values(src: &str) -> Result<Vec<(String, String, usize)>, String> {
    let mut out = Vec::new();
    for (line_no, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected 'key = value'", line_no + 1))?;
        out.push((key.trim().to_string(), value.trim().to_string(), line_no + 1));
    }
    Ok(out)
}

/// A complete, reproducible tracking-run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    pub dataset: PathBuf,
    pub output: PathBuf,
    pub stats_output: PathBuf,
    pub seed: u64,
    pub tracker: TrackerConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            method: Method::Sdf,
            dataset: PathBuf::new(),
            output: PathBuf::new(),
            stats_output: PathBuf::new(),
            seed: 0,
            tracker: TrackerConfig::default(),
        }
    }
}

impl RunConfig {
    /// Serializes with every key present, in fixed order.
    pub fn to_config_string(&self) -> String {
        let t = &self.tracker;
        let (budget_mode, budget_value) = match t.budget {
            Budget::FixedIterations(n) => ("fixed_iterations", format!("{n}")),
            Budget::WallClockMs(ms) => ("wall_clock_ms", format!("{ms}")),
        };
        let mut s = String::new();
        let mut push = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        push("method", self.method.to_string());
        push("dataset", self.dataset.display().to_string());
        push("output", self.output.display().to_string());
        push("stats_output", self.stats_output.display().to_string());
        push("seed", format!("{}", self.seed));
        push("n", format!("{}", t.n));
        push("lambda_sdf", format!("{}", t.lambda_sdf));
        push("lambda_color", format!("{}", t.lambda_color));
        push("lr_position", format!("{}", t.lr_position));
        push("lr_orientation", format!("{}", t.lr_orientation));
        push("adam_beta1", format!("{}", t.beta1));
        push("adam_beta2", format!("{}", t.beta2));
        push("adam_epsilon", format!("{}", t.epsilon));
        push("vr_n_pixels", format!("{}", t.vr.n_pixels));
        push("vr_n_samples_per_ray", format!("{}", t.vr.n_samples_per_ray));
        push("vr_lambda_photo", format!("{}", t.vr.lambda_photo));
        push("vr_lambda_depth", format!("{}", t.vr.lambda_depth));
        push("vr_density_alpha", format!("{}", t.vr.density.alpha));
        push("vr_density_s", format!("{}", t.vr.density.s));
        push("vr_t_near", format!("{}", t.vr.t_near));
        push("vr_t_far", format!("{}", t.vr.t_far));
        push("vr_stratified", format!("{}", t.vr.stratified));
        push("budget_mode", budget_mode.to_string());
        push("budget_value", budget_value);
        s
    }

    /// Parses a config, starting from defaults; unknown keys are rejected.
    pub fn from_config_string(src: &str) -> Result<RunConfig, String> {
        let mut cfg = RunConfig::default();
        let mut budget_mode: Option<String> = None;
        let mut budget_value: Option<String> = None;
        for (key, value, line) in parse_key_values(src)? {
            let fail = |e: String| format!("line {line}: {key}: {e}");
            match key.as_str() {
                "method" => cfg.method = value.parse().map_err(fail)?,
                "dataset" => cfg.dataset = PathBuf::from(value),
                "output" => cfg.output = PathBuf::from(value),
                "stats_output" => cfg.stats_output = PathBuf::from(value),
                "seed" => cfg.seed = value.parse().map_err(|e: std::num::ParseIntError| fail(e.to_string()))?,
                "n" => cfg.tracker.n = parse_num(&value).map_err(fail)?,
                "lambda_sdf" => cfg.tracker.lambda_sdf = parse_num(&value).map_err(fail)?,
                "lambda_color" => cfg.tracker.lambda_color = parse_num(&value).map_err(fail)?,
                "lr_position" => cfg.tracker.lr_position = parse_num(&value).map_err(fail)?,
                "lr_orientation" => cfg.tracker.lr_orientation = parse_num(&value).map_err(fail)?,
                "adam_beta1" => cfg.tracker.beta1 = parse_num(&value).map_err(fail)?,
                "adam_beta2" => cfg.tracker.beta2 = parse_num(&value).map_err(fail)?,
                "adam_epsilon" => cfg.tracker.epsilon = parse_num(&value).map_err(fail)?,
                "vr_n_pixels" => cfg.tracker.vr.n_pixels = parse_num(&value).map_err(fail)?,
                "vr_n_samples_per_ray" => {
                    cfg.tracker.vr.n_samples_per_ray = parse_num(&value).map_err(fail)?
                }
                "vr_lambda_photo" => cfg.tracker.vr.lambda_photo = parse_num(&value).map_err(fail)?,
                "vr_lambda_depth" => cfg.tracker.vr.lambda_depth = parse_num(&value).map_err(fail)?,
                "vr_density_alpha" => {
                    cfg.tracker.vr.density.alpha = parse_num(&value).map_err(fail)?
                }
                "vr_density_s" => cfg.tracker.vr.density.s = parse_num(&value).map_err(fail)?,
                "vr_t_near" => cfg.tracker.vr.t_near = parse_num(&value).map_err(fail)?,
                "vr_t_far" => cfg.tracker.vr.t_far = parse_num(&value).map_err(fail)?,
                "vr_stratified" => {
                    cfg.tracker.vr.stratified =
                        value.parse().map_err(|e: std::str::ParseBoolError| fail(e.to_string()))?
                }
                "budget_mode" => budget_mode = Some(value),
                "budget_value" => budget_value = Some(value),
                other => return Err(format!("line {line}: unknown key '{other}'")),
            }
        }
        match (budget_mode.as_deref(), budget_value) {
            (None, None) => {}
            (Some("fixed_iterations"), Some(v)) => {
                cfg.tracker.budget = Budget::FixedIterations(
                    v.parse().map_err(|e| format!("budget_value: {e}"))?,
                );
            }
            (Some("wall_clock_ms"), Some(v)) => {
                cfg.tracker.budget = Budget::WallClockMs(
                    v.parse().map_err(|e: std::num::ParseFloatError| format!("budget_value: {e}"))?,
                );
            }
            (Some(other), Some(_)) => {
                return Err(format!(
                    "budget_mode must be 'fixed_iterations' or 'wall_clock_ms', got '{other}'"
                ))
            }
            _ => return Err("budget_mode and budget_value must appear together".into()),
        }
        Ok(cfg)
    }

    pub fn write_to(&self, path: &Path) -> Result<(), DataError> {
        std::fs::write(path, self.to_config_string()).map_err(|e| DataError::io(path, e))
    }

    pub fn read_from(path: &Path) -> Result<RunConfig, DataError> {
        let src = std::fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
        Self::from_config_string(&src).map_err(|e| DataError::format(path, e))
    }
}

fn parse_num<T: std::str::FromStr>(value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| e.to_string())
}

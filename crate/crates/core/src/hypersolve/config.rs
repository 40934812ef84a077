//! JSON run description for the solver front end.
//!
//! ```json
//! {
//!   "problem": "acoustics",
//!   "n": 128, "L": 4.0, "T": 3.0,
//!   "K0": 1.0, "rho0": 1.0,
//!   "ic": { "humps": [ { "center": [0, 0], "scale": 1, "amplitude": 1 } ] },
//!   "oversample_p": 2,
//!   "boundary": "absorbing-extrapolation",
//!   "output_times": [0, 1, 3],
//!   "outputs": { "grids": true, "sinograms": false, "csv": true, "pgm": true }
//! }
//! ```
//!
//! `theta` (a 2-vector) is required for `"transport"`. `tol` and `max_iter`
//! set the inversion tolerance and iteration cap. When `output_times` is
//! empty the run reports `T` only.

use serde::Deserialize;
use serde_json::Value;

use super::{make_cosine_hump, AcousticState, BoundarySpec, MaterialParams, SolveOptions};
use crate::error::{Error, Result};
use crate::grid::{check_power_of_two, Grid2D};
use crate::invert::InvertOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Transport,
    Acoustics,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hump {
    pub center: [f64; 2],
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialCondition {
    #[serde(default)]
    pub humps: Vec<Hump>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default = "yes")]
    pub grids: bool,
    #[serde(default)]
    pub sinograms: bool,
    #[serde(default = "yes")]
    pub csv: bool,
    #[serde(default)]
    pub pgm: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            grids: true,
            sinograms: false,
            csv: true,
            pgm: false,
        }
    }
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

fn two() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub problem: Problem,
    pub n: usize,
    #[serde(rename = "L", default = "default_half_width")]
    pub half_width: f64,
    #[serde(rename = "T", default)]
    pub t: f64,
    #[serde(default)]
    pub theta: Option<[f64; 2]>,
    #[serde(rename = "K0", default = "one")]
    pub k0: f64,
    #[serde(default = "one")]
    pub rho0: f64,
    #[serde(default)]
    pub ic: InitialCondition,
    #[serde(default = "two")]
    pub oversample_p: usize,
    #[serde(default)]
    pub boundary: BoundarySpec,
    #[serde(default)]
    pub output_times: Vec<f64>,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
}

fn default_half_width() -> f64 {
    4.0
}

const TOP_KEYS: &[&str] = &[
    "problem",
    "n",
    "L",
    "T",
    "theta",
    "K0",
    "rho0",
    "ic",
    "oversample_p",
    "boundary",
    "output_times",
    "outputs",
    "tol",
    "max_iter",
];
const IC_KEYS: &[&str] = &["humps"];
const HUMP_KEYS: &[&str] = &["center", "scale", "amplitude"];
const OUTPUT_KEYS: &[&str] = &["grids", "sinograms", "csv", "pgm"];

fn unknown_keys(value: &Value) -> Vec<String> {
    fn check(obj: &Value, allowed: &[&str], prefix: &str, out: &mut Vec<String>) {
        if let Value::Object(map) = obj {
            for k in map.keys() {
                if !allowed.contains(&k.as_str()) {
                    out.push(format!("{prefix}{k}"));
                }
            }
        }
    }
    let mut out = Vec::new();
    check(value, TOP_KEYS, "", &mut out);
    if let Some(ic) = value.get("ic") {
        check(ic, IC_KEYS, "ic.", &mut out);
        if let Some(Value::Array(humps)) = ic.get("humps") {
            for (k, h) in humps.iter().enumerate() {
                check(h, HUMP_KEYS, &format!("ic.humps[{k}]."), &mut out);
            }
        }
    }
    if let Some(o) = value.get("outputs") {
        check(o, OUTPUT_KEYS, "outputs.", &mut out);
    }
    out
}

impl SolverConfig {
    /// Parses and validates a configuration. Every unknown key is named in
    /// the error.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| Error::Validation(format!("invalid JSON: {e}")))?;
        if !value.is_object() {
            return Err(Error::Validation(
                "configuration must be a JSON object".into(),
            ));
        }
        let unknown = unknown_keys(&value);
        if !unknown.is_empty() {
            return Err(Error::Validation(format!(
                "unknown keys: {}",
                unknown.join(", ")
            )));
        }
        let cfg: SolverConfig = serde_json::from_value(value)
            .map_err(|e| Error::Validation(format!("invalid configuration: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        check_power_of_two(self.n)?;
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return bad(format!("L must be positive, got {}", self.half_width));
        }
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return bad(format!("T must be non-negative, got {}", self.t));
        }
        if let Some(t) = self
            .output_times
            .iter()
            .find(|t| !(**t >= 0.0 && t.is_finite()))
        {
            return bad(format!("output time {t} must be non-negative"));
        }
        if self.problem == Problem::Transport && self.theta.is_none() {
            return bad("transport problems need theta".into());
        }
        MaterialParams::new(self.k0, self.rho0).map_err(|e| Error::Validation(e.to_string()))?;
        self.solve_options()
            .invert
            .validate()
            .map_err(|e| Error::Validation(e.to_string()))?;
        if self.oversample_p == 0 {
            return bad("oversample_p must be at least 1".into());
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        if self.output_times.is_empty() {
            vec![self.t]
        } else {
            self.output_times.clone()
        }
    }

    pub fn material(&self) -> MaterialParams {
        MaterialParams {
            k0: self.k0,
            rho0: self.rho0,
        }
    }

    pub fn solve_options(&self) -> SolveOptions {
        let defaults = InvertOptions::default();
        SolveOptions {
            oversample_p: self.oversample_p,
            boundary: self.boundary,
            invert: InvertOptions {
                oversample_p: self.oversample_p,
                tol: self.tol.unwrap_or(defaults.tol),
                max_iter: self.max_iter.or(defaults.max_iter),
            },
        }
    }

    /// Sum of the configured humps.
    pub fn initial_field(&self) -> Result<Grid2D> {
        let mut g = Grid2D::zeros(self.n, self.half_width)?;
        for h in &self.ic.humps {
            let hump = make_cosine_hump(h.center, h.scale, h.amplitude, &g);
            g.data_mut()
                .iter_mut()
                .zip(hump.data())
                .for_each(|(a, b)| *a += b);
        }
        Ok(g)
    }

    pub fn initial_state(&self) -> Result<AcousticState> {
        Ok(AcousticState::at_rest(self.initial_field()?))
    }
}

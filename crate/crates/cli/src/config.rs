//! Scenario configuration for `simulate`.
//!
//! ```json
//! {"population": "normal", "case": "C1", "p": 100, "n": 200, "K": 3,
//!  "kmax": 20, "reps": 200, "seed": 42, "estimators": ["sr", "ed"]}
//! ```
//!
//! Every key is required and unknown keys are rejected. Errors name the
//! offending field with a JSON pointer.

use serde::Serialize;
use serde_json::{Map, Value};
use spearfact::{LoadingCase, Method, Population, ScenarioSpec};

use crate::error::{CliError, CliResult};

pub const CONFIG_KEYS: [&str; 9] = ["population", "case", "p", "n", "K", "kmax", "reps", "seed", "estimators"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateConfig {
    #[serde(flatten)]
    pub scenario: ScenarioSpec,
    pub estimators: Vec<Method>,
}

fn at(pointer: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::input(format!("invalid config at {pointer}: {msg}"))
}

fn string_field<'a>(obj: &'a Map<String, Value>, key: &str) -> CliResult<&'a str> {
    obj[key].as_str().ok_or_else(|| at(&format!("/{key}"), "expected a string"))
}

fn uint_field(obj: &Map<String, Value>, key: &str) -> CliResult<u64> {
    obj[key].as_u64().ok_or_else(|| at(&format!("/{key}"), "expected a non-negative integer"))
}

fn usize_field(obj: &Map<String, Value>, key: &str) -> CliResult<usize> {
    usize::try_from(uint_field(obj, key)?).map_err(|_| at(&format!("/{key}"), "value too large"))
}

pub fn parse_config(text: &str) -> CliResult<SimulateConfig> {
    let root: Value = serde_json::from_str(text).map_err(|e| at("", format!("not valid JSON: {e}")))?;
    let obj = root.as_object().ok_or_else(|| at("", "expected a JSON object"))?;
    if let Some(k) = obj.keys().find(|k| !CONFIG_KEYS.contains(&k.as_str())) {
        return Err(at(&format!("/{}", escape(k)), "unknown key"));
    }
    if let Some(k) = CONFIG_KEYS.iter().find(|k| !obj.contains_key(**k)) {
        return Err(at(&format!("/{k}"), "missing required key"));
    }

    let population: Population = string_field(obj, "population")?.parse().map_err(|e| at("/population", e))?;
    let case: LoadingCase = string_field(obj, "case")?.parse().map_err(|e| at("/case", e))?;
    let p = usize_field(obj, "p")?;
    let n = usize_field(obj, "n")?;
    let k = usize_field(obj, "K")?;
    let k_max = usize_field(obj, "kmax")?;
    let reps = usize_field(obj, "reps")?;
    let seed = uint_field(obj, "seed")?;

    let list = obj["estimators"].as_array().ok_or_else(|| at("/estimators", "expected an array"))?;
    if list.is_empty() {
        return Err(at("/estimators", "expected at least one estimator"));
    }
    let mut estimators = Vec::with_capacity(list.len());
    for (i, v) in list.iter().enumerate() {
        let pointer = format!("/estimators/{i}");
        let name = v.as_str().ok_or_else(|| at(&pointer, "expected a string"))?;
        let m: Method = name.parse().map_err(|e| at(&pointer, e))?;
        if estimators.contains(&m) {
            return Err(at(&pointer, format!("duplicate estimator '{name}'")));
        }
        estimators.push(m);
    }

    if k == 0 {
        return Err(at("/K", "K must be at least 1"));
    }
    if p < k + 1 {
        return Err(at("/p", format!("p must be at least K + 1 = {}", k + 1)));
    }
    if n < 4 {
        return Err(at("/n", "n must be at least 4"));
    }
    if k_max == 0 {
        return Err(at("/kmax", "kmax must be at least 1"));
    }
    if reps == 0 {
        return Err(at("/reps", "reps must be at least 1"));
    }
    let scenario = ScenarioSpec { population, case, p, n, k, k_max, reps, seed };
    scenario.validate().map_err(|e| at("", e))?;
    Ok(SimulateConfig { scenario, estimators })
}

/// JSON-pointer escaping of a single reference token.
fn escape(token: &str) -> String {
    token.replace('~', "~0").replace('/', "~1")
}

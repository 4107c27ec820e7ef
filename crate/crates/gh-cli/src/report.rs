//! Report assembly. Every command emits one JSON envelope:
//!
//! ```json
//! {
//!   "command": "exact",
//!   "inputs": [{ "source": "simplex:2", "sha256": "..." }],
//!   "tolerance": 1e-9,
//!   "caps": { ... },
//!   "seed": 1,
//!   "result": { ... }
//! }
//! ```
//!
//! plus `"uncertified": true` and `"error"` when a cap was exhausted, and
//! `"timing_ms"` only behind `--timings` (default reports must be
//! byte-identical across runs and thread counts; serde_json orders keys
//! alphabetically, which keeps the bytes stable).
//!
//! Distances appear at both scales: every `dgh`-flavoured key has a
//! `two_dgh` twin.

use serde_json::{json, Map, Value};

use gh_core::linear::{LinearGhResult, SubsetSupResult, ToriReport};
use gh_core::solver::GhResult;
use gh_core::Caps;

use crate::load::Input;

pub struct Envelope {
    pub command: &'static str,
    pub inputs: Vec<Input>,
    pub tolerance: f64,
    pub caps: Caps,
    pub seed: Option<u64>,
    pub result: Value,
    pub uncertified: Option<String>,
    pub timing_ms: Option<f64>,
}

impl Envelope {
    pub fn new(command: &'static str, tolerance: f64, caps: Caps) -> Self {
        Envelope {
            command,
            inputs: Vec::new(),
            tolerance,
            caps,
            seed: None,
            result: Value::Null,
            uncertified: None,
            timing_ms: None,
        }
    }

    pub fn to_value(&self) -> Value {
        let inputs: Vec<Value> = self
            .inputs
            .iter()
            .map(|i| json!({ "source": i.source, "sha256": i.sha256 }))
            .collect();
        let mut map = Map::new();
        map.insert("command".into(), json!(self.command));
        map.insert("inputs".into(), json!(inputs));
        map.insert("tolerance".into(), json!(self.tolerance));
        map.insert("caps".into(), serde_json::to_value(self.caps).unwrap());
        if let Some(seed) = self.seed {
            map.insert("seed".into(), json!(seed));
        }
        if let Some(reason) = &self.uncertified {
            map.insert("uncertified".into(), json!(true));
            map.insert("error".into(), json!(reason));
        }
        map.insert("result".into(), self.result.clone());
        if let Some(ms) = self.timing_ms {
            map.insert("timing_ms".into(), json!(ms));
        }
        Value::Object(map)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).unwrap();
        s.push('\n');
        s
    }
}

/// `{"dgh": v, "two_dgh": 2v, "method": ..., "witness": ..., "enumerated": ...}`
pub fn exact_result(r: &GhResult<f64>) -> Value {
    json!({
        "dgh": r.value,
        "two_dgh": 2.0 * r.value,
        "method": r.method,
        "witness": r.witness,
        "enumerated": r.enumerated,
    })
}

fn sup_value(sup: &SubsetSupResult<f64>) -> Value {
    json!({
        "value": sup.value,
        "witness_subset": sup.witness_subset,
        "method": sup.method,
    })
}

/// LinearGhResult fields at both scales. `upper`/`lower`/`exact` are d_GH;
/// the subset supremum and norms stay at the doubled scale they live at.
pub fn linear_result(r: &LinearGhResult<f64>) -> Value {
    let mut map = Map::new();
    map.insert("lower".into(), json!(r.lower));
    map.insert("upper".into(), json!(r.upper));
    map.insert("two_dgh_lower".into(), json!(2.0 * r.lower));
    map.insert("two_dgh_upper".into(), json!(2.0 * r.upper));
    if let Some(e) = r.exact {
        map.insert("exact".into(), json!(e));
        map.insert("two_dgh_exact".into(), json!(2.0 * e));
    }
    map.insert("attainable".into(), json!(r.attainable));
    map.insert("condition_gap".into(), json!(r.condition_gap));
    map.insert("norm_a".into(), json!(r.norm_a));
    map.insert("norm_b".into(), json!(r.norm_b));
    map.insert("subset_sup".into(), sup_value(&r.sup));
    Value::Object(map)
}

pub fn tori_result(r: &ToriReport<f64>) -> Value {
    json!({
        "linear": linear_result(&r.linear),
        "resolution": r.resolution,
        "points_per_torus": r.points_per_torus,
        "discrete_distortion": r.discrete_distortion,
        "discretization_gap": r.discretization_gap,
        "condition_margin": r.condition_margin,
    })
}

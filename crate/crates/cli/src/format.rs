//! Number formatting shared by the JSON and CSV writers: every value is
//! rounded to 12 significant digits before it is printed.

use serde_json::{json, Value};
use teleclone_core::gaussian::ModeState;
use teleclone_core::protocols::ProtocolSpec;
use teleclone_core::scalar::Squeezing;

pub fn round12(x: f64) -> f64 {
    if x.is_finite() {
        format!("{x:.11e}").parse().expect("formatted float parses")
    } else {
        x
    }
}

/// JSON number, or `null` for non-finite values.
pub fn number(x: f64) -> Value {
    if x.is_finite() {
        json!(round12(x))
    } else {
        Value::Null
    }
}

pub fn cell(x: f64) -> String {
    round12(x).to_string()
}

pub fn squeezing_cell(r: Squeezing<f64>) -> String {
    match r {
        Squeezing::Finite(v) => cell(v),
        Squeezing::Infinite => "inf".into(),
    }
}

pub fn squeezing_value(r: Squeezing<f64>) -> Value {
    match r {
        Squeezing::Finite(v) => number(v),
        Squeezing::Infinite => json!("inf"),
    }
}

pub fn spec_value(spec: &ProtocolSpec<f64>) -> Value {
    json!({
        "variant": spec.variant.name(),
        "clones": spec.clones,
        "copies": spec.copies,
        "squeezing": squeezing_value(spec.squeezing),
        "squeezing2": squeezing_value(spec.squeezing2),
        "input": [number(spec.input.0), number(spec.input.1)],
    })
}

pub fn state_value(state: &ModeState<f64>) -> Value {
    json!({
        "mean": [number(state.mean_x), number(state.mean_p)],
        "cov": [
            [number(state.cov[0][0]), number(state.cov[0][1])],
            [number(state.cov[1][0]), number(state.cov[1][1])],
        ],
    })
}

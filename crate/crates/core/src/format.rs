//! Scenario file loading and saving.
//!
//! A scenario file is a JSON document:
//!
//! ```json
//! {
//!   "alice": [ { "axis": [0.0, 0.0, 1.0], "eta": 1.0, "label": "A1" }, ... ],
//!   "bob":   [ { "axis": [0.0, 0.0, -1.0] }, ... ],
//!   "state": "singlet",
//!   "coeffs": [ [1.0, -1.0], ... ],
//!   "relations": [ [1.0, 1.0, 1.0] ]
//! }
//! ```
//!
//! `eta` defaults to 1 and `label` to "A{i}"/"B{i}". `state` is either a
//! named state (see [`crate::scenario::named_state`]), a pure-state amplitude
//! 4-vector, or a full 4×4 density matrix; complex entries are written as
//! `[re, im]` pairs and bare numbers are taken as real. `relations` may be
//! omitted. Unknown fields are rejected. Syntax and shape problems surface as
//! parse errors with a line/column location; semantic problems (non-unit
//! axis, invalid state, ...) surface as validation errors naming the field.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::CMat;
use crate::error::{Error, Result};
use crate::scenario::{named_state, FunctionalRelation, Observable, Scenario};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    alice: Vec<ObservableDoc>,
    bob: Vec<ObservableDoc>,
    state: StateDoc,
    coeffs: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    relations: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObservableDoc {
    axis: [f64; 3],
    #[serde(default = "default_eta")]
    eta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

fn default_eta() -> f64 {
    1.0
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum StateDoc {
    Named(String),
    Vector(Vec<CpxDoc>),
    Matrix(Vec<Vec<CpxDoc>>),
}

/// A complex entry: a bare number is real, `[re, im]` is complex.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CpxDoc {
    Re(f64),
    Pair([f64; 2]),
}

impl CpxDoc {
    fn to_complex(&self) -> Complex64 {
        match self {
            CpxDoc::Re(r) => Complex64::new(*r, 0.0),
            CpxDoc::Pair([re, im]) => Complex64::new(*re, *im),
        }
    }
}

/// Prefixes a validation error with the field it came from.
fn field_err(field: String, e: Error) -> Error {
    let msg = match e {
        Error::Validation(m) => m,
        other => other.to_string(),
    };
    Error::Validation(format!("{field}: {msg}"))
}

fn observables(side: &str, docs: &[ObservableDoc]) -> Result<Vec<Observable>> {
    docs.iter()
        .enumerate()
        .map(|(i, d)| {
            let label = d
                .label
                .clone()
                .unwrap_or_else(|| format!("{}{}", side.chars().next().unwrap().to_ascii_uppercase(), i + 1));
            Observable::new(d.axis.into(), d.eta, label)
                .map_err(|e| field_err(format!("{side}[{i}]"), e))
        })
        .collect()
}

fn state_matrix(doc: &StateDoc) -> Result<CMat> {
    match doc {
        StateDoc::Named(name) => {
            named_state(name).map_err(|e| field_err("state".into(), e))
        }
        StateDoc::Vector(v) => {
            if v.len() != 4 {
                return Err(Error::Validation(format!(
                    "state: amplitude vector must have 4 entries, got {}",
                    v.len()
                )));
            }
            let amps: Vec<Complex64> = v.iter().map(CpxDoc::to_complex).collect();
            CMat::outer(&amps).map_err(|e| field_err("state".into(), e))
        }
        StateDoc::Matrix(rows) => {
            if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
                return Err(Error::Validation(
                    "state: explicit matrix must be 4x4".into(),
                ));
            }
            let rows: Vec<Vec<Complex64>> = rows
                .iter()
                .map(|r| r.iter().map(CpxDoc::to_complex).collect())
                .collect();
            CMat::from_rows(&rows).map_err(|e| field_err("state".into(), e))
        }
    }
}

/// Parses and validates a scenario document. JSON-level problems become
/// [`Error::Parse`] with the line and column; semantic problems become
/// [`Error::Validation`] naming the offending field.
pub fn load_scenario(text: &str) -> Result<Scenario> {
    let doc: ScenarioDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: classify_json_error(&e),
    })?;
    let alice = observables("alice", &doc.alice)?;
    let bob = observables("bob", &doc.bob)?;
    let state = state_matrix(&doc.state)?;
    let relations = doc
        .relations
        .iter()
        .enumerate()
        .map(|(i, r)| {
            FunctionalRelation::new(r.clone()).map_err(|e| field_err(format!("relations[{i}]"), e))
        })
        .collect::<Result<Vec<_>>>()?;
    Scenario::new(alice, bob, state, doc.coeffs, relations)
}

fn classify_json_error(e: &serde_json::Error) -> String {
    // serde_json appends "at line L column C" to its messages; the location
    // already lives in the Parse variant, so strip the suffix.
    let msg = e.to_string();
    match msg.find(" at line ") {
        Some(idx) => msg[..idx].to_string(),
        None => msg,
    }
}

/// Serializes a scenario to the document format, with the state written as an
/// explicit 4×4 matrix of `[re, im]` pairs. The output reloads to an equal
/// scenario.
pub fn scenario_to_json(s: &Scenario) -> String {
    let obs_doc = |o: &Observable| ObservableDoc {
        axis: o.axis().into(),
        eta: o.eta(),
        label: Some(o.label().to_string()),
    };
    let state = StateDoc::Matrix(
        (0..4)
            .map(|i| {
                (0..4)
                    .map(|j| {
                        let z = s.state().get(i, j);
                        CpxDoc::Pair([z.re, z.im])
                    })
                    .collect()
            })
            .collect(),
    );
    let doc = ScenarioDoc {
        alice: s.alice().iter().map(obs_doc).collect(),
        bob: s.bob().iter().map(obs_doc).collect(),
        state,
        coeffs: s.coeffs().to_vec(),
        relations: s.relations().iter().map(|r| r.coeffs().to_vec()).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("scenario document serializes")
}

// ---------------------------------------------------------------------------

//! JSON form of a rank-one system.
//!
//! ```json
//! { "A": [[0, 1], [-1, -1]], "u": [0, 1], "v": [1, [1, 0]] }
//! ```
//!
//! Entries are real numbers or `[re, im]` pairs. With
//! `"structure": {"kind": "H" | "J", "G": [[...]]}` the vector `v` is derived
//! from `u` and must be absent.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::perturbation::RankOneSystem;
use crate::structured::{make_structured_system, StructureContext, StructureKind};
use crate::C64;

fn bad(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

fn entry(v: &Value, what: &str) -> Result<C64> {
    match v {
        Value::Number(x) => Ok(C64::new(x.as_f64().ok_or_else(|| bad(format!("{what}: bad number")))?, 0.0)),
        Value::Array(p) if p.len() == 2 => {
            let re = p[0].as_f64().ok_or_else(|| bad(format!("{what}: bad real part")))?;
            let im = p[1].as_f64().ok_or_else(|| bad(format!("{what}: bad imaginary part")))?;
            Ok(C64::new(re, im))
        }
        _ => Err(bad(format!("{what}: expected a number or [re, im]"))),
    }
}

fn vector(v: &Value, what: &str) -> Result<Vec<C64>> {
    let items = v.as_array().ok_or_else(|| bad(format!("{what}: expected an array")))?;
    items
        .iter()
        .enumerate()
        .map(|(i, x)| entry(x, &format!("{what}[{i}]")))
        .collect()
}

fn matrix(v: &Value, what: &str) -> Result<CMatrix> {
    let rows = v.as_array().ok_or_else(|| bad(format!("{what}: expected an array of rows")))?;
    let rows: Vec<Vec<C64>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| vector(r, &format!("{what}[{i}]")))
        .collect::<Result<_>>()?;
    CMatrix::from_rows(&rows)
}

pub fn system_from_value(doc: &Value) -> Result<RankOneSystem> {
    let obj = doc.as_object().ok_or_else(|| bad("expected a JSON object"))?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "A" | "u" | "v" | "structure") {
            return Err(bad(format!("unknown field {key:?}")));
        }
    }
    let get = |k: &str| obj.get(k).ok_or_else(|| bad(format!("missing field {k:?}")));
    let a = matrix(get("A")?, "A")?;
    let u = vector(get("u")?, "u")?;
    match obj.get("structure") {
        None => {
            let v = vector(get("v")?, "v")?;
            RankOneSystem::new(a, u, v)
        }
        Some(s) => {
            if obj.contains_key("v") {
                return Err(bad("\"v\" must be absent when a structure is given"));
            }
            let kind = match s.get("kind").and_then(Value::as_str) {
                Some("H") => StructureKind::HSelfadjoint,
                Some("J") => StructureKind::JHamiltonian,
                _ => return Err(bad("structure.kind must be \"H\" or \"J\"")),
            };
            let g = matrix(s.get("G").ok_or_else(|| bad("missing structure.G"))?, "structure.G")?;
            make_structured_system(a, u, StructureContext::new(kind, g)?)
        }
    }
}

pub fn parse_system(text: &str) -> Result<RankOneSystem> {
    let doc: Value = serde_json::from_str(text).map_err(|e| bad(format!("malformed JSON: {e}")))?;
    system_from_value(&doc)
}

/// Only the `"A"` field of a document; other fields are ignored.
pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    let doc: Value = serde_json::from_str(text).map_err(|e| bad(format!("malformed JSON: {e}")))?;
    matrix(doc.get("A").ok_or_else(|| bad("missing field \"A\""))?, "A")
}

fn emit_entry(z: C64) -> Value {
    if z.im == 0.0 {
        json!(z.re)
    } else {
        json!([z.re, z.im])
    }
}

fn emit_vector(v: &[C64]) -> Value {
    Value::Array(v.iter().map(|&z| emit_entry(z)).collect())
}

pub fn emit_matrix(m: &CMatrix) -> Value {
    Value::Array(m.rows().iter().map(|r| emit_vector(r)).collect())
}

pub fn system_to_value(sys: &RankOneSystem) -> Value {
    let mut obj = Map::new();
    obj.insert("A".into(), emit_matrix(sys.a()));
    obj.insert("u".into(), emit_vector(sys.u()));
    match sys.structure() {
        Some(ctx) => {
            let kind = match ctx.kind {
                StructureKind::HSelfadjoint => "H",
                StructureKind::JHamiltonian => "J",
            };
            obj.insert("structure".into(), json!({ "kind": kind, "G": emit_matrix(&ctx.g) }));
        }
        None => {
            obj.insert("v".into(), emit_vector(sys.v()));
        }
    }
    Value::Object(obj)
}

pub fn emit_system(sys: &RankOneSystem) -> String {
    serde_json::to_string_pretty(&system_to_value(sys)).expect("values serialize")
}

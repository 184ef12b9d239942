//! JSON form of derivations.
//!
//! ```text
//! {"rule": "BorE", "conclusion": "p0", "discharge": ["h1", "h2"],
//!  "params": {"domain": [0, 1], "path": "L.R"}, "premises": [ ... ]}
//! {"assume": "p0 v -p0", "label": "h1"}
//! {"axiom": "EM0", "conclusion": "p0 | -p0"}
//! ```
//!
//! `params` may also carry `position` (a 1-based symbol position instead of
//! `path`), `team` (bit rows) and `arity`.

use serde_json::{json, Map, Value};

use super::{Derivation, Params, Rule, D};
use crate::error::{Error, Result};
use crate::syntax::{parse, path_to_string, Path, Step};
use crate::teams::Domain;

pub fn to_json(d: &Derivation) -> Value {
    if d.rule == Rule::Assume {
        return json!({"assume": d.conclusion.to_string(), "label": d.label.clone().unwrap_or_default()});
    }
    if matches!(d.rule, Rule::Em0 | Rule::NeI) && d.premises.is_empty() && d.params.is_empty() {
        return json!({"axiom": d.rule.name(), "conclusion": d.conclusion.to_string()});
    }
    let mut m = Map::new();
    m.insert("rule".into(), json!(d.rule.name()));
    m.insert("conclusion".into(), json!(d.conclusion.to_string()));
    if !d.params.is_empty() {
        m.insert("params".into(), params_json(&d.params));
    }
    if !d.discharge.is_empty() {
        m.insert("discharge".into(), json!(d.discharge));
    }
    m.insert("premises".into(), Value::Array(d.premises.iter().map(|p| to_json(p)).collect()));
    Value::Object(m)
}

fn params_json(p: &Params) -> Value {
    let mut m = Map::new();
    if let Some(d) = &p.domain {
        m.insert("domain".into(), json!(d.indices()));
    }
    if let Some(path) = &p.path {
        m.insert("path".into(), json!(path_to_string(path)));
    }
    if let Some(k) = p.position {
        m.insert("position".into(), json!(k));
    }
    if let Some(t) = &p.team {
        m.insert("team".into(), json!(t));
    }
    if let Some(a) = p.arity {
        m.insert("arity".into(), json!(a));
    }
    Value::Object(m)
}

fn bad(msg: impl Into<String>) -> Error {
    Error::input(msg)
}

fn formula_field(v: &Value, key: &str) -> Result<crate::syntax::Formula> {
    let text = v.get(key).and_then(Value::as_str).ok_or_else(|| bad(format!("missing string field {key:?}")))?;
    parse(text)
}

fn parse_path(s: &str) -> Result<Path> {
    let parts: Vec<String> =
        if s.contains('.') { s.split('.').map(str::to_string).collect() } else { s.chars().map(String::from).collect() };
    parts
        .iter()
        .filter(|p| !p.trim().is_empty())
        .map(|p| Step::from_code(p.trim()).ok_or_else(|| bad(format!("bad path step {p:?}"))))
        .collect()
}

fn parse_params(v: Option<&Value>) -> Result<Params> {
    let Some(v) = v else { return Ok(Params::default()) };
    let o = v.as_object().ok_or_else(|| bad("params must be an object"))?;
    let mut p = Params::default();
    if let Some(d) = o.get("domain") {
        let idx: Vec<usize> = serde_json::from_value(d.clone()).map_err(|e| bad(format!("domain: {e}")))?;
        p.domain = Some(Domain::new(idx));
    }
    if let Some(s) = o.get("path") {
        p.path = Some(parse_path(s.as_str().ok_or_else(|| bad("path must be a string"))?)?);
    }
    if let Some(k) = o.get("position") {
        p.position = Some(k.as_u64().ok_or_else(|| bad("position must be a number"))? as usize);
    }
    if let Some(t) = o.get("team") {
        p.team = Some(serde_json::from_value(t.clone()).map_err(|e| bad(format!("team: {e}")))?);
    }
    if let Some(a) = o.get("arity") {
        p.arity = Some(a.as_u64().ok_or_else(|| bad("arity must be a number"))? as usize);
    }
    Ok(p)
}

pub fn from_json(v: &Value) -> Result<D> {
    if v.get("assume").is_some() {
        let f = formula_field(v, "assume")?;
        let label = match v.get("label") {
            Some(l) => l.as_str().ok_or_else(|| bad("label must be a string"))?.to_string(),
            None => f.to_string(),
        };
        return Ok(Derivation::assume(label, f));
    }
    if let Some(a) = v.get("axiom") {
        let name = a.as_str().ok_or_else(|| bad("axiom must be a string"))?;
        let rule = Rule::from_name(name).ok_or_else(|| bad(format!("unknown axiom {name:?}")))?;
        let c = formula_field(v, "conclusion")?;
        return Ok(Derivation::node(rule, c, Vec::new(), Vec::new(), Params::default()));
    }
    let name = v.get("rule").and_then(Value::as_str).ok_or_else(|| bad("node without \"rule\""))?;
    let rule = Rule::from_name(name).ok_or_else(|| bad(format!("unknown rule {name:?}")))?;
    let conclusion = formula_field(v, "conclusion")?;
    let premises = match v.get("premises") {
        None => Vec::new(),
        Some(Value::Array(ps)) => ps.iter().map(from_json).collect::<Result<Vec<_>>>()?,
        Some(_) => return Err(bad("premises must be an array")),
    };
    let discharge = match v.get("discharge") {
        None => Vec::new(),
        Some(d) => serde_json::from_value(d.clone()).map_err(|e| bad(format!("discharge: {e}")))?,
    };
    let params = parse_params(v.get("params"))?;
    Ok(Derivation::node(rule, conclusion, premises, discharge, params))
}

/// Parses derivation text without serde_json's nesting limit.
pub fn parse_derivation(text: &str) -> Result<D> {
    use serde::Deserialize;
    let mut de = serde_json::Deserializer::from_str(text);
    de.disable_recursion_limit();
    let v = Value::deserialize(&mut de).map_err(|e| bad(format!("derivation JSON: {e}")))?;
    de.end().map_err(|e| bad(format!("trailing input after derivation: {e}")))?;
    from_json(&v)
}

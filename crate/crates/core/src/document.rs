//! JSON model documents.
//!
//! ```json
//! {
//!   "name": "RC",
//!   "components": [
//!     {"id": "C", "kind": "C", "value": 1},
//!     {"id": "R", "kind": "R", "value": "1/2"},
//!     {"id": "law", "kind": "One"}
//!   ],
//!   "bonds": [["law", "C"], ["law", "R"]],
//!   "exposures": []
//! }
//! ```
//!
//! Endpoints are `id`, `id.k` for port `k` of a multiport, or `id.label` for
//! an exposed port of a nested composite. Component order is significant: it
//! fixes state and control numbering.

use std::collections::{BTreeMap, HashMap};

use serde_json::{json, Map, Value as Json};

use crate::components::{new_atomic, ComponentError, Hamiltonian, Kind, ParamValue, Value};
use crate::model::{Arena, Endpoint, ModelError, NodeId, PortId};
use crate::symexpr::{parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DocumentError {
    #[error("invalid JSON at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("{pointer}: {source}")]
    Component { pointer: String, source: ComponentError },
    #[error("{pointer}: {source}")]
    Model { pointer: String, source: ModelError },
}

fn schema(pointer: &str, message: impl Into<String>) -> DocumentError {
    DocumentError::Schema {
        pointer: pointer.to_owned(),
        message: message.into(),
    }
}

fn model(pointer: &str) -> impl FnOnce(ModelError) -> DocumentError + '_ {
    move |source| DocumentError::Model {
        pointer: pointer.to_owned(),
        source,
    }
}

/// Parses a document into a fresh arena, returning its root.
pub fn parse_document(text: &str) -> Result<(Arena, NodeId), DocumentError> {
    let json: Json = serde_json::from_str(text).map_err(|e| DocumentError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut arena = Arena::new();
    let root = composite(&mut arena, &json, "")?;
    Ok((arena, root))
}

fn object<'a>(v: &'a Json, pointer: &str, allowed: &[&str]) -> Result<&'a Map<String, Json>, DocumentError> {
    let obj = v.as_object().ok_or_else(|| schema(pointer, "expected an object"))?;
    if let Some(k) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(schema(&format!("{pointer}/{k}"), format!("unknown key `{k}`")));
    }
    Ok(obj)
}

fn string<'a>(obj: &'a Map<String, Json>, key: &str, pointer: &str) -> Result<&'a str, DocumentError> {
    let p = format!("{pointer}/{key}");
    obj.get(key)
        .ok_or_else(|| schema(&p, "missing"))?
        .as_str()
        .ok_or_else(|| schema(&p, "expected a string"))
}

fn array<'a>(obj: &'a Map<String, Json>, key: &str, pointer: &str) -> Result<&'a [Json], DocumentError> {
    match obj.get(key) {
        None => Ok(&[]),
        Some(v) => v
            .as_array()
            .map(Vec::as_slice)
            .ok_or_else(|| schema(&format!("{pointer}/{key}"), "expected an array")),
    }
}

fn composite(arena: &mut Arena, json: &Json, pointer: &str) -> Result<NodeId, DocumentError> {
    let obj = object(json, pointer, &["name", "components", "bonds", "exposures"])?;
    let name = string(obj, "name", pointer)?;
    let node = arena.new_composite(name).map_err(model(&format!("{pointer}/name")))?;
    let mut ids: HashMap<&str, NodeId> = HashMap::new();
    for (i, c) in array(obj, "components", pointer)?.iter().enumerate() {
        let p = format!("{pointer}/components/{i}");
        let cobj = object(c, &p, &["id", "kind", "value", "name", "composite"])?;
        let id = string(cobj, "id", &p)?;
        if ids.contains_key(id) {
            return Err(schema(&format!("{p}/id"), format!("duplicate id `{id}`")));
        }
        let child = match cobj.get("composite") {
            Some(inner) => {
                if let Some(k) = ["kind", "value", "name"].into_iter().find(|k| cobj.contains_key(*k)) {
                    return Err(schema(&format!("{p}/{k}"), "not allowed on a composite"));
                }
                composite(arena, inner, &format!("{p}/composite"))?
            }
            None => {
                let kind_text = string(cobj, "kind", &p)?;
                let kind = Kind::from_name(kind_text)
                    .ok_or_else(|| schema(&format!("{p}/kind"), format!("unknown kind `{kind_text}`")))?;
                let value = match cobj.get("value") {
                    None => Value::Default,
                    Some(v) => value(kind, v, &format!("{p}/value"))?,
                };
                let display = match cobj.get("name") {
                    None => id,
                    Some(v) => v.as_str().ok_or_else(|| schema(&format!("{p}/name"), "expected a string"))?,
                };
                let atomic = new_atomic(kind, display, value).map_err(|source| DocumentError::Component {
                    pointer: p.clone(),
                    source,
                })?;
                arena.insert(atomic)
            }
        };
        arena.add(node, &[child]).map_err(model(&p))?;
        ids.insert(id, child);
    }
    for (i, b) in array(obj, "bonds", pointer)?.iter().enumerate() {
        let p = format!("{pointer}/bonds/{i}");
        let pair = b
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| schema(&p, "expected a pair of endpoints"))?;
        let mut ends = Vec::with_capacity(2);
        for (j, e) in pair.iter().enumerate() {
            let ep = format!("{p}/{j}");
            let text = e.as_str().ok_or_else(|| schema(&ep, "expected a string"))?;
            ends.push(endpoint(text, &ids, &ep)?);
        }
        let tail = ends.pop().expect("two ends");
        let head = ends.pop().expect("two ends");
        arena.connect(head, tail).map_err(model(&p))?;
    }
    for (i, e) in array(obj, "exposures", pointer)?.iter().enumerate() {
        let p = format!("{pointer}/exposures/{i}");
        let eobj = object(e, &p, &["component", "label"])?;
        let id = string(eobj, "component", &p)?;
        let ss = *ids
            .get(id)
            .ok_or_else(|| schema(&format!("{p}/component"), format!("unknown component id `{id}`")))?;
        let label = match eobj.get("label") {
            None => None,
            Some(v) => Some(v.as_str().ok_or_else(|| schema(&format!("{p}/label"), "expected a string"))?),
        };
        arena.expose(ss, label).map_err(model(&p))?;
    }
    Ok(node)
}

fn endpoint(text: &str, ids: &HashMap<&str, NodeId>, pointer: &str) -> Result<Endpoint, DocumentError> {
    let (id, port) = match text.split_once('.') {
        Some((id, port)) => (id, Some(port)),
        None => (text, None),
    };
    let node = *ids
        .get(id)
        .ok_or_else(|| schema(pointer, format!("unknown component id `{id}`")))?;
    Ok(match port {
        None => Endpoint::Node(node),
        Some(p) => match p.parse::<usize>() {
            Ok(k) => Endpoint::Index(node, k),
            Err(_) => Endpoint::Label(node, p.to_owned()),
        },
    })
}

fn number(v: &Json, pointer: &str) -> Result<ParamValue, DocumentError> {
    match v {
        Json::Number(n) => parse_rational(&n.to_string())
            .map(ParamValue::Number)
            .map_err(|e| schema(pointer, e.to_string())),
        Json::String(s) => Ok(match parse_rational(s) {
            Ok(r) => ParamValue::Number(r),
            Err(_) => ParamValue::Symbol(s.clone()),
        }),
        _ => Err(schema(pointer, "expected a number or a string")),
    }
}

fn value(kind: Kind, v: &Json, pointer: &str) -> Result<Value, DocumentError> {
    if kind != Kind::PH {
        return Ok(Value::Param(number(v, pointer)?));
    }
    let obj = object(v, pointer, &["hamiltonian", "params", "dim"])?;
    let text = string(obj, "hamiltonian", pointer)?;
    let mut params = BTreeMap::new();
    if let Some(ps) = obj.get("params") {
        let pp = format!("{pointer}/params");
        let ps = ps.as_object().ok_or_else(|| schema(&pp, "expected an object"))?;
        for (k, v) in ps {
            params.insert(k.clone(), number(v, &format!("{pp}/{k}"))?);
        }
    }
    let built = match obj.get("dim") {
        None => Hamiltonian::new(text, params),
        Some(d) => {
            let d = d
                .as_u64()
                .ok_or_else(|| schema(&format!("{pointer}/dim"), "expected a non-negative integer"))?;
            Hamiltonian::with_dim(text, params, d as usize)
        }
    };
    built
        .map(Value::Hamiltonian)
        .map_err(|source| DocumentError::Component {
            pointer: pointer.to_owned(),
            source,
        })
}

/// Canonical text: sorted keys, two-space indent, trailing newline.
pub fn serialize(arena: &Arena, root: NodeId) -> String {
    let mut text = serde_json::to_string_pretty(&to_json(arena, root)).expect("serializable");
    text.push('\n');
    text
}

fn rational_json(r: &Rational) -> Json {
    if r.is_integer() {
        if let Ok(i) = i64::try_from(r.to_integer()) {
            return json!(i);
        }
    }
    json!(r.to_string())
}

fn param_json(p: &ParamValue) -> Json {
    match p {
        ParamValue::Number(r) => rational_json(r),
        ParamValue::Symbol(s) => json!(s),
    }
}

/// The document tree of a composite.
pub fn to_json(arena: &Arena, id: NodeId) -> Json {
    let components: Vec<Json> = arena
        .children(id)
        .iter()
        .map(|&c| {
            let name = arena.name(c);
            let Some(a) = arena.atomic(c) else {
                return json!({"id": name, "composite": to_json(arena, c)});
            };
            let mut obj = Map::new();
            obj.insert("id".into(), json!(name));
            obj.insert("kind".into(), json!(a.kind().name()));
            match a.value() {
                Value::Default => {}
                Value::Param(p) => {
                    obj.insert("value".into(), param_json(p));
                }
                Value::Hamiltonian(h) => {
                    let params: Map<String, Json> = h.params().iter().map(|(k, v)| (k.clone(), param_json(v))).collect();
                    let mut v = Map::new();
                    v.insert("hamiltonian".into(), json!(h.text()));
                    v.insert("params".into(), Json::Object(params));
                    if h.has_explicit_dim() {
                        v.insert("dim".into(), json!(h.dim()));
                    }
                    obj.insert("value".into(), Json::Object(v));
                }
            }
            Json::Object(obj)
        })
        .collect();
    let bonds: Vec<Json> = arena
        .bonds(id)
        .iter()
        .map(|b| json!([endpoint_text(arena, b.head), endpoint_text(arena, b.tail)]))
        .collect();
    let exposures: Vec<Json> = arena
        .exposures(id)
        .iter()
        .map(|e| json!({"component": arena.name(e.ss), "label": e.label}))
        .collect();
    json!({
        "name": arena.name(id),
        "components": components,
        "bonds": bonds,
        "exposures": exposures,
    })
}

fn endpoint_text(arena: &Arena, p: PortId) -> String {
    let name = arena.name(p.node);
    match arena.atomic(p.node) {
        None => format!("{name}.{}", arena.exposures(p.node)[p.port].label),
        Some(a) if a.kind().is_junction() || a.port_count() == Some(1) => name.to_owned(),
        Some(_) => format!("{name}.{}", p.port),
    }
}

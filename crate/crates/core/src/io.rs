//! JSON and CSV formats. Exact coefficients are written as `"p/q"` strings;
//! on input, JSON numbers and decimal strings are also accepted and read
//! exactly from their decimal text.

use serde_json::{json, Map, Value};

use crate::closure::{ClosureDescriptor, ClosureKind, ModeSpanTable};
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::lattice::{self, LatticeSubgroup, Mode};
use crate::linalg::Subspace;
use crate::scalar::{format_rational, parse_rational, Rational};
use crate::trigfield::{from_stream, CoeffPair, TrigField, TrigPoly};

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

pub fn rational_to_json(r: &Rational) -> Value {
    Value::String(format_rational(r))
}

pub fn rational_from_json(v: &Value) -> Result<Rational> {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        other => return Err(parse_err(format!("expected a rational, found {other}"))),
    };
    parse_rational(&text).ok_or_else(|| parse_err(format!("invalid rational {text:?}")))
}

fn vec_to_json(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(rational_to_json).collect())
}

fn vec_from_json(v: &Value, len: usize) -> Result<Vec<Rational>> {
    let arr = v.as_array().ok_or_else(|| parse_err("expected an array of rationals"))?;
    if arr.len() != len {
        return Err(Error::DimensionMismatch {
            expected: len,
            found: arr.len(),
        });
    }
    arr.iter().map(rational_from_json).collect()
}

fn mode_from_json(v: &Value, dim: usize) -> Result<Mode> {
    let arr = v.as_array().ok_or_else(|| parse_err("expected a mode array"))?;
    let coords: Vec<i64> = arr
        .iter()
        .map(|x| x.as_i64().ok_or_else(|| parse_err("mode coordinates must be integers")))
        .collect::<Result<_>>()?;
    if coords.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: coords.len(),
        });
    }
    Mode::try_new(&coords)
}

fn get<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| parse_err(format!("missing key {key:?}")))
}

fn object(v: &Value) -> Result<&Map<String, Value>> {
    v.as_object().ok_or_else(|| parse_err("expected a JSON object"))
}

fn dim_of(obj: &Map<String, Value>) -> Result<usize> {
    let d = get(obj, "dim")?
        .as_u64()
        .ok_or_else(|| parse_err("dim must be a positive integer"))? as usize;
    crate::error::check_torus_dim(d)?;
    Ok(d)
}

/// `{"dim", "constant", "terms": [{"mode", "a", "b"}]}`.
pub fn field_to_json(f: &TrigField<Rational>) -> Value {
    json!({
        "dim": f.dim(),
        "constant": vec_to_json(f.constant()),
        "terms": f.terms().map(|(m, p)| json!({
            "mode": m,
            "a": vec_to_json(&p.a),
            "b": vec_to_json(&p.b),
        })).collect::<Vec<_>>(),
    })
}

/// Reads a field. Besides the form written by [`field_to_json`], a planar
/// field may be given by a stream function
/// `{"dim": 2, "stream": [{"mode", "cos", "sin"}], "constant"?}`.
pub fn field_from_json(v: &Value) -> Result<TrigField<Rational>> {
    let obj = object(v)?;
    let dim = dim_of(obj)?;
    let mut f = if let Some(stream) = obj.get("stream") {
        let mut h = TrigPoly::zero(dim);
        for t in stream.as_array().ok_or_else(|| parse_err("stream must be an array"))? {
            let t = object(t)?;
            let m = mode_from_json(get(t, "mode")?, dim)?;
            let c = t.get("cos").map(rational_from_json).transpose()?.unwrap_or_default();
            let s = t.get("sin").map(rational_from_json).transpose()?.unwrap_or_default();
            h.add_term(m, c, s);
        }
        from_stream(&h)?
    } else {
        let mut f = TrigField::zero(dim);
        for t in obj.get("terms").and_then(Value::as_array).map(Vec::as_slice).unwrap_or(&[]) {
            let t = object(t)?;
            let m = mode_from_json(get(t, "mode")?, dim)?;
            let zeros = || Ok(vec![Rational::default(); dim]);
            let a = t.get("a").map_or_else(zeros, |a| vec_from_json(a, dim))?;
            let b = t.get("b").map_or_else(zeros, |b| vec_from_json(b, dim))?;
            f.add_term(m, a, b);
        }
        f
    };
    if let Some(c) = obj.get("constant") {
        f = f.add(&TrigField::constant_field(vec_from_json(c, dim)?));
    }
    Ok(f)
}

pub fn parse_field(text: &str) -> Result<TrigField<Rational>> {
    field_from_json(&serde_json::from_str(text)?)
}

fn subspace_to_json(s: &Subspace<Rational>) -> Value {
    Value::Array(s.basis().iter().map(|v| vec_to_json(v)).collect())
}

fn subspace_from_json(v: &Value, ambient: usize) -> Result<Subspace<Rational>> {
    let rows = v.as_array().ok_or_else(|| parse_err("basis must be an array"))?;
    let mut s = Subspace::new(ambient);
    for r in rows {
        s.insert(&vec_from_json(r, ambient)?);
    }
    Ok(s)
}

/// `{"dim", "box", "constants": [basis], "table": [{"mode", "basis"}], "stabilized", "sweeps"}`.
/// Basis vectors of a mode are the pairs `(a, b)` concatenated.
pub fn table_to_json(t: &ModeSpanTable<Rational>) -> Value {
    json!({
        "dim": t.dim,
        "box": t.box_size,
        "constants": subspace_to_json(&t.constants),
        "table": t.table.iter().map(|(m, s)| json!({
            "mode": m,
            "dimension": s.dim(),
            "basis": subspace_to_json(s),
        })).collect::<Vec<_>>(),
        "stabilized": t.stabilized,
        "sweeps": t.sweeps,
    })
}

pub fn table_from_json(v: &Value) -> Result<ModeSpanTable<Rational>> {
    let obj = object(v)?;
    let dim = dim_of(obj)?;
    let box_size = get(obj, "box")?.as_i64().ok_or_else(|| parse_err("box must be an integer"))?;
    let mut t = ModeSpanTable::empty(dim, box_size);
    t.constants = subspace_from_json(get(obj, "constants")?, dim)?;
    for e in get(obj, "table")?.as_array().ok_or_else(|| parse_err("table must be an array"))? {
        let e = object(e)?;
        let m = mode_from_json(get(e, "mode")?, dim)?;
        let s = subspace_from_json(get(e, "basis")?, 2 * dim)?;
        if s.dim() > 0 {
            t.table.insert(m.canonical().0, s);
        }
    }
    t.stabilized = obj.get("stabilized").and_then(Value::as_bool).unwrap_or(true);
    t.sweeps = obj.get("sweeps").and_then(Value::as_u64).unwrap_or(0) as usize;
    Ok(t)
}

fn subgroup_to_json(g: &LatticeSubgroup) -> Value {
    json!({ "basis": g.basis(), "rank": g.rank(), "index": g.index() })
}

/// Descriptor with its kind as a tag, plus the dual group for a full rank lattice.
pub fn descriptor_to_json(c: &ClosureDescriptor<Rational>) -> Value {
    let mut out = json!({ "dim": c.dim, "kind": c.kind_name() });
    let o = out.as_object_mut().expect("object literal");
    match &c.kind {
        ClosureKind::FullLattice(g) => {
            o.insert("subgroup".into(), subgroup_to_json(g));
            if let Ok(dual) = lattice::dual_group(g) {
                o.insert(
                    "dual".into(),
                    json!({
                        "basis": dual.basis.iter().map(|v| vec_to_json(v)).collect::<Vec<_>>(),
                        "quotient_reps": dual.quotient_reps.iter().map(|v| vec_to_json(v)).collect::<Vec<_>>(),
                    }),
                );
            }
        }
        ClosureKind::PlanarDegenerate(modes) => {
            o.insert("modes".into(), json!(modes));
        }
        ClosureKind::T3Degenerate(orbits) => {
            let list: Vec<Value> = orbits
                .iter()
                .map(|(m, p)| json!({ "mode": m, "a": vec_to_json(&p.a), "b": vec_to_json(&p.b) }))
                .collect();
            o.insert("orbits".into(), Value::Array(list));
        }
        ClosureKind::Unclassified(reason) => {
            o.insert("reason".into(), json!(reason));
        }
    }
    out
}

pub fn descriptor_from_json(v: &Value) -> Result<ClosureDescriptor<Rational>> {
    let obj = object(v)?;
    let dim = dim_of(obj)?;
    let kind = match get(obj, "kind")?.as_str().unwrap_or_default() {
        "FullLattice" => {
            let sg = object(get(obj, "subgroup")?)?;
            let basis: Vec<Vec<i64>> = serde_json::from_value(get(sg, "basis")?.clone())?;
            let gens: Vec<Mode> = basis.iter().map(|r| Mode::try_new(r)).collect::<Result<_>>()?;
            ClosureKind::FullLattice(lattice::subgroup_generated(&gens)?)
        }
        "PlanarDegenerate" => {
            let modes = get(obj, "modes")?.as_array().ok_or_else(|| parse_err("modes must be an array"))?;
            ClosureKind::PlanarDegenerate(modes.iter().map(|m| mode_from_json(m, dim)).collect::<Result<_>>()?)
        }
        "T3Degenerate" => {
            let orbits = get(obj, "orbits")?.as_array().ok_or_else(|| parse_err("orbits must be an array"))?;
            let mut map = std::collections::BTreeMap::new();
            for e in orbits {
                let e = object(e)?;
                let m = mode_from_json(get(e, "mode")?, dim)?;
                map.insert(m, CoeffPair::new(vec_from_json(get(e, "a")?, dim)?, vec_from_json(get(e, "b")?, dim)?));
            }
            ClosureKind::T3Degenerate(map)
        }
        "Unclassified" => ClosureKind::Unclassified(obj.get("reason").and_then(Value::as_str).unwrap_or_default().to_string()),
        other => return Err(parse_err(format!("unknown closure kind {other:?}"))),
    };
    Ok(ClosureDescriptor { dim, kind })
}

/// CSV with header `t,x0_0,x0_1,...,x1_0,...`: one row per recorded time.
pub fn trajectory_csv(tr: &Trajectory) -> String {
    let mut out = String::from("t");
    if let Some(first) = tr.states.first() {
        for j in 0..first.len() {
            for i in 0..first.dim() {
                out.push_str(&format!(",x{j}_{i}"));
            }
        }
    }
    out.push('\n');
    for (t, s) in tr.times.iter().zip(&tr.states) {
        out.push_str(&t.to_string());
        for v in s.flat() {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

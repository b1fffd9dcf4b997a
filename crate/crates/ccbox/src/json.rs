//! JSON interchange for boxes and operations.
//!
//! A box file is
//! `{"type": {"x","y","s","t"}, "entries": [[[[…]]]], "encoding": "rational"|"float"}`
//! with entries nested as \[s\]\[t\]\[x\]\[y\]. Rational encoding writes
//! every entry as a `"p/q"` string and round-trips exactly; float
//! encoding writes JSON numbers and round-trips to bit-identical
//! doubles (parsed entries carry the caller's tolerance). Deterministic
//! operations serialize as their defining function quadruple
//! `{"src", "dst", "fA", "gA", "fB", "gB"}` — setting pre-maps as flat
//! arrays, outcome post-maps as row-per-source-outcome matrices — and
//! free operations as weighted term lists `{"terms": [{"w", "op"}]}`.

use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::boxes::{BoxType, CcBox};
use crate::error::{Error, Result};
use crate::free_ops::{DetOp, LosrOp, WingDetOp};
use crate::scalar::{Rat, Scalar};

fn parse_err(what: &str, detail: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{what}: {detail}"))
}

/// Canonical `"p/q"` form of a rational (`"p"` when q = 1).
pub fn rat_to_string(r: &Rat) -> String {
    r.to_string()
}

/// Parses `"p/q"` (or a bare integer `"p"`) into an exact rational.
pub fn rat_from_str(s: &str) -> Result<Rat> {
    Rat::from_str(s.trim()).map_err(|e| parse_err("rational", format!("{s:?}: {e}")))
}

fn type_to_json(ty: BoxType) -> Value {
    json!({
        "x": ty.x_card,
        "y": ty.y_card,
        "s": ty.s_card,
        "t": ty.t_card,
    })
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, what: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| parse_err(what, format!("missing field {key:?}")))
}

fn as_object<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| parse_err(what, "expected a JSON object"))
}

fn as_array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| parse_err(what, "expected a JSON array"))
}

fn as_usize(v: &Value, what: &str) -> Result<usize> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| parse_err(what, "expected a nonnegative integer"))
}

fn type_from_json(v: &Value) -> Result<BoxType> {
    let what = "box type";
    let obj = as_object(v, what)?;
    BoxType::new(
        as_usize(field(obj, "x", what)?, what)?,
        as_usize(field(obj, "y", what)?, what)?,
        as_usize(field(obj, "s", what)?, what)?,
        as_usize(field(obj, "t", what)?, what)?,
    )
}

/// Serializes a box. Exact boxes use the `"rational"` encoding; boxes
/// with any approximate entry use `"float"`.
pub fn box_to_json(b: &CcBox) -> Value {
    let ty = b.ty();
    let exact = b.is_exact();
    let entries: Vec<Value> = (0..ty.s_card)
        .map(|s| -> Value {
            (0..ty.t_card)
                .map(|t| -> Value {
                    (0..ty.x_card)
                        .map(|x| -> Value {
                            (0..ty.y_card)
                                .map(|y| {
                                    let e = b.get(s, t, x, y);
                                    if exact {
                                        Value::String(rat_to_string(&e.rationalize()))
                                    } else {
                                        json!(e.to_f64())
                                    }
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    json!({
        "type": type_to_json(ty),
        "entries": entries,
        "encoding": if exact { "rational" } else { "float" },
    })
}

/// Parses a box. `float_tol` is the entry tolerance attached to every
/// entry of a float-encoded box; rational encodings are exact and ignore
/// it.
pub fn box_from_json(v: &Value, float_tol: f64) -> Result<CcBox> {
    let what = "box";
    let obj = as_object(v, what)?;
    let ty = type_from_json(field(obj, "type", what)?)?;
    let encoding = field(obj, "encoding", what)?
        .as_str()
        .ok_or_else(|| parse_err(what, "encoding must be a string"))?;
    let rational = match encoding {
        "rational" => true,
        "float" => false,
        other => {
            return Err(parse_err(
                what,
                format!("unknown encoding {other:?}, expected \"rational\" or \"float\""),
            ))
        }
    };

    let rows = as_array(field(obj, "entries", what)?, what)?;
    if rows.len() != ty.s_card {
        return Err(parse_err(what, format!("expected {} setting rows", ty.s_card)));
    }
    let mut entries: Vec<Option<Scalar>> = vec![None; ty.table_len()];
    for (s, sv) in rows.iter().enumerate() {
        let ts = as_array(sv, what)?;
        if ts.len() != ty.t_card {
            return Err(parse_err(what, format!("expected {} columns at s={s}", ty.t_card)));
        }
        for (t, tv) in ts.iter().enumerate() {
            let xs = as_array(tv, what)?;
            if xs.len() != ty.x_card {
                return Err(parse_err(
                    what,
                    format!("expected {} outcome rows at (s={s},t={t})", ty.x_card),
                ));
            }
            for (x, xv) in xs.iter().enumerate() {
                let ys = as_array(xv, what)?;
                if ys.len() != ty.y_card {
                    return Err(parse_err(
                        what,
                        format!("expected {} entries at (s={s},t={t},x={x})", ty.y_card),
                    ));
                }
                for (y, yv) in ys.iter().enumerate() {
                    let scalar = if rational {
                        let text = yv.as_str().ok_or_else(|| {
                            parse_err(what, "rational encoding requires \"p/q\" strings")
                        })?;
                        Scalar::from_rat(rat_from_str(text)?)
                    } else {
                        let value = yv.as_f64().ok_or_else(|| {
                            parse_err(what, "float encoding requires JSON numbers")
                        })?;
                        Scalar::approx(value, float_tol)?
                    };
                    entries[ty.idx(s, t, x, y)] = Some(scalar);
                }
            }
        }
    }
    let entries: Vec<Scalar> = entries
        .into_iter()
        .collect::<Option<_>>()
        .ok_or_else(|| parse_err(what, "incomplete entry table"))?;
    CcBox::new(ty, entries)
}

fn wing_to_json(w: &WingDetOp) -> (Value, Value) {
    (json!(w.pre), json!(w.post))
}

fn usize_vec(v: &Value, what: &str) -> Result<Vec<usize>> {
    as_array(v, what)?.iter().map(|x| as_usize(x, what)).collect()
}

fn wing_from_json(f: &Value, g: &Value, what: &str) -> Result<WingDetOp> {
    let pre = usize_vec(f, what)?;
    let post = as_array(g, what)?
        .iter()
        .map(|row| usize_vec(row, what))
        .collect::<Result<Vec<_>>>()?;
    Ok(WingDetOp { pre, post })
}

/// Serializes a deterministic operation as its function quadruple.
pub fn det_op_to_json(op: &DetOp) -> Value {
    let (f_a, g_a) = wing_to_json(op.wing_a());
    let (f_b, g_b) = wing_to_json(op.wing_b());
    json!({
        "src": type_to_json(op.src_type()),
        "dst": type_to_json(op.dst_type()),
        "fA": f_a,
        "gA": g_a,
        "fB": f_b,
        "gB": g_b,
    })
}

/// Parses a deterministic operation, re-validating the wing maps against
/// the declared types.
pub fn det_op_from_json(v: &Value) -> Result<DetOp> {
    let what = "deterministic operation";
    let obj = as_object(v, what)?;
    let src = type_from_json(field(obj, "src", what)?)?;
    let dst = type_from_json(field(obj, "dst", what)?)?;
    let wing_a = wing_from_json(field(obj, "fA", what)?, field(obj, "gA", what)?, what)?;
    let wing_b = wing_from_json(field(obj, "fB", what)?, field(obj, "gB", what)?, what)?;
    DetOp::new(src, dst, wing_a, wing_b)
}

/// Serializes a free operation as its weighted deterministic terms.
pub fn losr_op_to_json(op: &LosrOp) -> Value {
    let terms: Vec<Value> = op
        .terms()
        .iter()
        .map(|(w, d)| {
            json!({
                "w": rat_to_string(w),
                "op": det_op_to_json(d),
            })
        })
        .collect();
    json!({ "terms": terms })
}

/// Parses a free operation, re-validating weights and term types.
pub fn losr_op_from_json(v: &Value) -> Result<LosrOp> {
    let what = "free operation";
    let obj = as_object(v, what)?;
    let terms = as_array(field(obj, "terms", what)?, what)?
        .iter()
        .map(|tv| {
            let term = as_object(tv, what)?;
            let w = field(term, "w", what)?
                .as_str()
                .ok_or_else(|| parse_err(what, "weight must be a \"p/q\" string"))?;
            Ok((rat_from_str(w)?, det_op_from_json(field(term, "op", what)?)?))
        })
        .collect::<Result<Vec<_>>>()?;
    LosrOp::new(terms)
}

/// Serializes a box to a pretty-printed JSON string.
pub fn box_to_string(b: &CcBox) -> String {
    serde_json::to_string_pretty(&box_to_json(b)).expect("box JSON serializes")
}

/// Parses a box from JSON text.
pub fn box_from_str(text: &str, float_tol: f64) -> Result<CcBox> {
    let v: Value =
        serde_json::from_str(text).map_err(|e| parse_err("box", e))?;
    box_from_json(&v, float_tol)
}

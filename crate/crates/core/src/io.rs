//! JSON documents for systems, homeomorphisms, certificates and witnesses.
//!
//! Rationals are written as `"p/q"` strings (JSON integers are accepted on
//! input); floating-point numbers are rejected. Branches are numbered from 1
//! in documents, matching `σ_1, …, σ_d`.
//!
//! ```json
//! { "space": { "type": "intervals", "components": [["0", "1"]] },
//!   "branches": [
//!     { "map": { "breakpoints": ["0", "1"], "values": ["0", "1"] }, "weight": "1/3" },
//!     { "map": "0", "weight": "2/3" } ] }
//! ```
//!
//! Shorthands: `{"matrix": [[...]], "labels": [...]}` (branch `i` sends `j`
//! to `i` with weight `A_ij`) and `{"graph": {"vertices": [...], "edges":
//! [{"source": s, "range": r}, ...]}}` (one weight-1 branch per edge).

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Map, Value};

use crate::conjugacy::{Certificate, Gamma, Gap, PathWitness, Pt, Side, Witness};
use crate::correspondence::{cq, Cq, Quiver};
use crate::fock::{FockSpace, FourierElement};
use crate::error::{Error, Result};
use crate::rational::{fmt_rational, parse_rational, Rational};
use crate::spaces::{ClopenSubset, Interval, PlFunc};
use crate::wps::{FiniteBranch, FiniteSystem, IntervalBranch, IntervalSystem, Wps};

fn perr(path: &str, message: impl Into<String>) -> Error {
    Error::Parse { path: if path.is_empty() { "$".into() } else { path.into() }, message: message.into() }
}

fn sub(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn idx(path: &str, i: usize) -> String {
    format!("{path}[{i}]")
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        path: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    })
}

fn obj<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| perr(path, "expected an object"))
}

fn arr<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| perr(path, "expected an array"))
}

fn field<'a>(o: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    o.get(key).ok_or_else(|| perr(path, format!("missing field `{key}`")))
}

fn only_keys(o: &Map<String, Value>, allowed: &[&str], path: &str) -> Result<()> {
    match o.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(perr(path, format!("unknown field `{k}` (expected one of {})", allowed.join(", ")))),
        None => Ok(()),
    }
}

fn string<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| perr(path, "expected a string"))
}

pub fn rational(v: &Value, path: &str) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s).map_err(|e| perr(path, e.to_string())),
        Value::Number(n) if n.is_i64() => Ok(Rational::from_integer(n.as_i64().unwrap().into())),
        Value::Number(_) => Err(perr(path, "floating-point numbers are not accepted; write rationals as \"p/q\"")),
        _ => Err(perr(path, "expected a rational such as \"3/4\"")),
    }
}

fn rationals(v: &Value, path: &str) -> Result<Vec<Rational>> {
    arr(v, path)?.iter().enumerate().map(|(i, x)| rational(x, &idx(path, i))).collect()
}

fn q(x: &Rational) -> Value {
    Value::String(fmt_rational(x))
}

fn usize_of(v: &Value, path: &str) -> Result<usize> {
    v.as_u64().map(|n| n as usize).ok_or_else(|| perr(path, "expected a non-negative integer"))
}

pub fn parse_system(text: &str) -> Result<Wps> {
    system_from_value(&parse_json(text)?)
}

pub fn system_from_value(v: &Value) -> Result<Wps> {
    let o = obj(v, "")?;
    if o.contains_key("matrix") {
        only_keys(o, &["matrix", "labels"], "")?;
        let rows = arr(&o["matrix"], "matrix")?;
        let m: Vec<Vec<Rational>> =
            rows.iter().enumerate().map(|(i, r)| rationals(r, &idx("matrix", i))).collect::<Result<_>>()?;
        let labels = match o.get("labels") {
            Some(l) => labels_of(l, "labels")?,
            None => (1..=m.len()).map(|i| i.to_string()).collect(),
        };
        return Ok(Wps::Finite(FiniteSystem::from_matrix(labels, &m)?));
    }
    if o.contains_key("graph") {
        only_keys(o, &["graph"], "")?;
        let g = obj(&o["graph"], "graph")?;
        only_keys(g, &["vertices", "edges"], "graph")?;
        let labels = labels_of(field(g, "vertices", "graph")?, "graph.vertices")?;
        let find = |v: &Value, path: &str| -> Result<usize> {
            let s = string(v, path)?;
            labels.iter().position(|l| l == s).ok_or_else(|| perr(path, format!("unknown vertex `{s}`")))
        };
        let mut edges = Vec::new();
        for (i, e) in arr(field(g, "edges", "graph")?, "graph.edges")?.iter().enumerate() {
            let p = idx("graph.edges", i);
            let eo = obj(e, &p)?;
            only_keys(eo, &["source", "range"], &p)?;
            edges.push((find(field(eo, "source", &p)?, &sub(&p, "source"))?, find(field(eo, "range", &p)?, &sub(&p, "range"))?));
        }
        return Ok(Wps::Finite(FiniteSystem::from_digraph(labels, &edges)?));
    }
    only_keys(o, &["space", "branches"], "")?;
    let space = obj(field(o, "space", "")?, "space")?;
    let kind = string(field(space, "type", "space")?, "space.type")?;
    let branches = arr(field(o, "branches", "")?, "branches")?;
    match kind {
        "finite" => {
            only_keys(space, &["type", "points"], "space")?;
            let labels = labels_of(field(space, "points", "space")?, "space.points")?;
            let bs = branches
                .iter()
                .enumerate()
                .map(|(i, b)| finite_branch(b, &labels, &idx("branches", i)))
                .collect::<Result<Vec<_>>>()?;
            Ok(Wps::Finite(FiniteSystem::new(labels, bs)?))
        }
        "intervals" => {
            only_keys(space, &["type", "components"], "space")?;
            let comps = components_of(field(space, "components", "space")?, "space.components")?;
            let mut sorted = comps.clone();
            sorted.sort();
            if sorted != comps {
                return Err(perr("space.components", "components must be listed left to right"));
            }
            let bs = branches
                .iter()
                .enumerate()
                .map(|(i, b)| interval_branch(b, &comps, &idx("branches", i)))
                .collect::<Result<Vec<_>>>()?;
            Ok(Wps::Interval(IntervalSystem::new(comps, bs)?))
        }
        other => Err(perr("space.type", format!("expected \"finite\" or \"intervals\", got \"{other}\""))),
    }
}

fn labels_of(v: &Value, path: &str) -> Result<Vec<String>> {
    arr(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| match x {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) if n.is_u64() => Ok(n.to_string()),
            _ => Err(perr(&idx(path, i), "expected a point label")),
        })
        .collect()
}

fn components_of(v: &Value, path: &str) -> Result<Vec<Interval>> {
    arr(v, path)?
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let p = idx(path, i);
            let ends = rationals(c, &p)?;
            if ends.len() != 2 {
                return Err(perr(&p, "an interval is a pair [lo, hi]"));
            }
            Interval::new(ends[0].clone(), ends[1].clone()).map_err(|e| perr(&p, e.to_string()))
        })
        .collect()
}

fn finite_branch(v: &Value, labels: &[String], path: &str) -> Result<FiniteBranch> {
    let o = obj(v, path)?;
    only_keys(o, &["domain", "map", "weight"], path)?;
    let point = |s: &str, p: &str| -> Result<usize> {
        labels.iter().position(|l| l == s).ok_or_else(|| perr(p, format!("unknown point `{s}`")))
    };
    let map_v = field(o, "map", path)?;
    let map_path = sub(path, "map");
    let table: Option<BTreeMap<usize, usize>> = match map_v {
        Value::Object(m) => {
            only_keys(m, &["table"], &map_path)?;
            let t = obj(field(m, "table", &map_path)?, &sub(&map_path, "table"))?;
            Some(
                t.iter()
                    .map(|(k, r)| {
                        let p = sub(&sub(&map_path, "table"), k);
                        Ok((point(k, &p)?, point(string(r, &p)?, &p)?))
                    })
                    .collect::<Result<_>>()?,
            )
        }
        _ => None,
    };
    let domain: BTreeSet<usize> = match o.get("domain") {
        Some(d) => {
            let dp = sub(path, "domain");
            arr(d, &dp)?
                .iter()
                .enumerate()
                .map(|(i, x)| point(string(x, &idx(&dp, i))?, &idx(&dp, i)))
                .collect::<Result<_>>()?
        }
        None => match &table {
            Some(t) => t.keys().copied().collect(),
            None => (0..labels.len()).collect(),
        },
    };
    let image = |x: usize| -> Result<usize> {
        match (&table, map_v) {
            (Some(t), _) => t.get(&x).copied().ok_or_else(|| {
                perr(&map_path, format!("no image given for `{}`", labels[x]))
            }),
            (None, Value::String(s)) => point(s, &map_path),
            _ => Err(perr(&map_path, "expected {\"table\": {...}} or a point label")),
        }
    };
    if let Some(t) = &table {
        if t.keys().any(|k| !domain.contains(k)) {
            return Err(perr(&map_path, "table has entries outside the domain"));
        }
    }
    let weight_path = sub(path, "weight");
    let wv = field(o, "weight", path)?;
    let weight = |x: usize| -> Result<Rational> {
        match wv {
            Value::Object(m) => {
                only_keys(m, &["table"], &weight_path)?;
                let t = obj(field(m, "table", &weight_path)?, &sub(&weight_path, "table"))?;
                let p = sub(&sub(&weight_path, "table"), &labels[x]);
                rational(t.get(&labels[x]).ok_or_else(|| perr(&p, "missing weight"))?, &p)
            }
            other => rational(other, &weight_path),
        }
    };
    let mut entries = BTreeMap::new();
    for x in domain {
        entries.insert(x, (image(x)?, weight(x)?));
    }
    Ok(FiniteBranch { entries })
}

/// PL function over the listed components: a constant, or breakpoints and
/// values spanning every component in order.
fn pl_of(v: &Value, comps: &[Interval], domain: &ClopenSubset, path: &str) -> Result<PlFunc> {
    match v {
        Value::Object(o) => {
            only_keys(o, &["breakpoints", "values"], path)?;
            let xs = rationals(field(o, "breakpoints", path)?, &sub(path, "breakpoints"))?;
            let ys = rationals(field(o, "values", path)?, &sub(path, "values"))?;
            if xs.len() != ys.len() {
                return Err(perr(path, "breakpoints and values differ in length"));
            }
            let mut pieces: BTreeMap<usize, Vec<(Rational, Rational)>> = BTreeMap::new();
            for (k, (x, y)) in xs.into_iter().zip(ys).enumerate() {
                let c = domain
                    .iter()
                    .find(|&c| comps[c].contains(&x))
                    .ok_or_else(|| perr(&idx(&sub(path, "breakpoints"), k), "breakpoint outside the domain"))?;
                pieces.entry(c).or_default().push((x, y));
            }
            if let Some(c) = domain.iter().find(|c| !pieces.contains_key(c)) {
                return Err(perr(path, format!("no breakpoints on component {}", comps[c])));
            }
            PlFunc::new(comps, pieces).map_err(|e| perr(path, e.to_string()))
        }
        other => Ok(PlFunc::constant(comps, domain, rational(other, path)?)),
    }
}

fn interval_branch(v: &Value, comps: &[Interval], path: &str) -> Result<IntervalBranch> {
    let o = obj(v, path)?;
    only_keys(o, &["domain", "map", "weight"], path)?;
    let domain = match o.get("domain") {
        Some(d) => {
            let dp = sub(path, "domain");
            let parts = components_of(d, &dp)?;
            ClopenSubset(
                parts
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        comps.iter().position(|c| c == p).ok_or_else(|| {
                            perr(&idx(&dp, i), "a domain entry must be a whole component of the space")
                        })
                    })
                    .collect::<Result<_>>()?,
            )
        }
        None => ClopenSubset((0..comps.len()).collect()),
    };
    Ok(IntervalBranch {
        map: pl_of(field(o, "map", path)?, comps, &domain, &sub(path, "map"))?,
        weight: pl_of(field(o, "weight", path)?, comps, &domain, &sub(path, "weight"))?,
    })
}

fn pl_to_json(f: &PlFunc) -> Value {
    let knots: Vec<&(Rational, Rational)> = f.pieces().values().flatten().collect();
    if knots.iter().all(|k| k.1 == knots[0].1) && !knots.is_empty() {
        return q(&knots[0].1);
    }
    json!({
        "breakpoints": knots.iter().map(|k| q(&k.0)).collect::<Vec<_>>(),
        "values": knots.iter().map(|k| q(&k.1)).collect::<Vec<_>>(),
    })
}

fn interval_json(c: &Interval) -> Value {
    json!([q(&c.lo), q(&c.hi)])
}

/// Canonical document for a system.
pub fn system_to_json(sys: &Wps) -> Value {
    match sys {
        Wps::Finite(s) => json!({
            "space": { "type": "finite", "points": s.labels },
            "branches": s.branches.iter().map(|b| {
                let dom: Vec<&String> = b.entries.keys().map(|&x| &s.labels[x]).collect();
                let table: Map<String, Value> =
                    b.entries.iter().map(|(&x, (r, _))| (s.labels[x].clone(), Value::String(s.labels[*r].clone()))).collect();
                let weights: Map<String, Value> =
                    b.entries.iter().map(|(&x, (_, w))| (s.labels[x].clone(), q(w))).collect();
                json!({ "domain": dom, "map": { "table": table }, "weight": { "table": weights } })
            }).collect::<Vec<_>>(),
        }),
        Wps::Interval(s) => json!({
            "space": { "type": "intervals", "components": s.components.iter().map(interval_json).collect::<Vec<_>>() },
            "branches": s.branches.iter().map(|b| json!({
                "domain": b.map.domain().iter().map(|c| interval_json(&s.components[c])).collect::<Vec<_>>(),
                "map": pl_to_json(&b.map),
                "weight": pl_to_json(&b.weight),
            })).collect::<Vec<_>>(),
        }),
    }
}

fn labels(sys: &Wps) -> &[String] {
    match sys {
        Wps::Finite(s) => &s.labels,
        Wps::Interval(_) => &[],
    }
}

/// `γ : X → Y` from a document: `"identity"`, `{"table": {x: y}}` for finite
/// spaces, or PL data over all of `X`.
pub fn gamma_from_value(v: &Value, a: &Wps, b: &Wps, path: &str) -> Result<Gamma> {
    if v.as_str() == Some("identity") {
        return Ok(Gamma::identity(&a.space()));
    }
    let g = match (a, b) {
        (Wps::Finite(x), Wps::Finite(y)) => {
            let o = obj(v, path)?;
            only_keys(o, &["table"], path)?;
            let tp = sub(path, "table");
            let t = obj(field(o, "table", path)?, &tp)?;
            let mut table = vec![usize::MAX; x.len()];
            for (k, r) in t {
                let p = sub(&tp, k);
                let from = x.labels.iter().position(|l| l == k).ok_or_else(|| perr(&p, "unknown source point"))?;
                let s = string(r, &p)?;
                table[from] = y.labels.iter().position(|l| l == s).ok_or_else(|| perr(&p, "unknown target point"))?;
            }
            if table.contains(&usize::MAX) {
                return Err(perr(&tp, "gamma must be defined on every point"));
            }
            Gamma::Bijection(table)
        }
        (Wps::Interval(x), Wps::Interval(_)) => Gamma::Pl(pl_of(v, &x.components, &x.whole(), path)?),
        _ => return Err(perr(path, "the two systems live on different kinds of space")),
    };
    g.check(&a.space(), &b.space()).map_err(|e| perr(path, e.to_string()))?;
    Ok(g)
}

pub fn gamma_to_json(g: &Gamma, a: &Wps, b: &Wps) -> Value {
    match g {
        Gamma::Bijection(t) => {
            let table: Map<String, Value> = t
                .iter()
                .enumerate()
                .map(|(x, &y)| (labels(a)[x].clone(), Value::String(labels(b)[y].clone())))
                .collect();
            json!({ "table": table })
        }
        Gamma::Pl(f) => pl_to_json_full(f),
    }
}

fn pl_to_json_full(f: &PlFunc) -> Value {
    let knots: Vec<&(Rational, Rational)> = f.pieces().values().flatten().collect();
    json!({
        "breakpoints": knots.iter().map(|k| q(&k.0)).collect::<Vec<_>>(),
        "values": knots.iter().map(|k| q(&k.1)).collect::<Vec<_>>(),
    })
}

pub fn parse_certificate(text: &str, a: &Wps, b: &Wps) -> Result<Certificate> {
    certificate_from_value(&parse_json(text)?, a, b)
}

/// `{"gamma": ..., "H": ..., "C": "p/q"}`, where `H` is `"weight-ratio"`,
/// `{"edges": [{"range", "source", "value"}]}` (finite) or
/// `{"branches": [PL, ...]}` with one function per branch (intervals).
pub fn certificate_from_value(v: &Value, a: &Wps, b: &Wps) -> Result<Certificate> {
    let o = obj(v, "")?;
    only_keys(o, &["gamma", "H", "C"], "")?;
    let gamma = match o.get("gamma") {
        Some(g) => gamma_from_value(g, a, b, "gamma")?,
        None => Gamma::identity(&a.space()),
    };
    let c = rational(field(o, "C", "")?, "C")?;
    let hv = field(o, "H", "")?;
    let h = if hv.as_str() == Some("weight-ratio") {
        Gap::WeightRatio
    } else {
        let ho = obj(hv, "H")?;
        match a {
            Wps::Finite(x) => {
                only_keys(ho, &["edges"], "H")?;
                let mut m = BTreeMap::new();
                for (i, e) in arr(field(ho, "edges", "H")?, "H.edges")?.iter().enumerate() {
                    let p = idx("H.edges", i);
                    let eo = obj(e, &p)?;
                    only_keys(eo, &["range", "source", "value"], &p)?;
                    let pt = |key: &str| -> Result<usize> {
                        let kp = sub(&p, key);
                        let s = string(field(eo, key, &p)?, &kp)?;
                        x.labels.iter().position(|l| l == s).ok_or_else(|| perr(&kp, format!("unknown point `{s}`")))
                    };
                    m.insert((pt("range")?, pt("source")?), rational(field(eo, "value", &p)?, &sub(&p, "value"))?);
                }
                Gap::Edges(m)
            }
            Wps::Interval(x) => {
                only_keys(ho, &["branches"], "H")?;
                let list = arr(field(ho, "branches", "H")?, "H.branches")?;
                if list.len() != x.branches.len() {
                    return Err(perr("H.branches", format!("expected {} functions, one per branch", x.branches.len())));
                }
                Gap::Branches(
                    list.iter()
                        .zip(&x.branches)
                        .enumerate()
                        .map(|(i, (f, br))| pl_of(f, &x.components, &br.map.domain(), &idx("H.branches", i)))
                        .collect::<Result<_>>()?,
                )
            }
        }
    };
    Ok(Certificate { gamma, h, c })
}

pub fn certificate_to_json(cert: &Certificate, a: &Wps, b: &Wps) -> Value {
    let h = match &cert.h {
        Gap::WeightRatio => json!("weight-ratio"),
        Gap::Edges(m) => json!({
            "edges": m.iter().map(|((r, s), v)| json!({
                "range": labels(a)[*r], "source": labels(a)[*s], "value": q(v),
            })).collect::<Vec<_>>()
        }),
        Gap::Branches(hs) => json!({ "branches": hs.iter().map(pl_to_json).collect::<Vec<_>>() }),
    };
    json!({ "gamma": gamma_to_json(&cert.gamma, a, b), "H": h, "C": q(&cert.c) })
}

fn pt_json(p: &Pt, a: &Wps) -> Value {
    match p {
        Pt::Atom(i) => Value::String(labels(a)[*i].clone()),
        Pt::Real(x) => q(x),
    }
}

fn pt_of(v: &Value, a: &Wps, path: &str) -> Result<Pt> {
    match a {
        Wps::Finite(s) => {
            let l = string(v, path)?;
            s.labels.iter().position(|x| x == l).map(Pt::Atom).ok_or_else(|| perr(path, format!("unknown point `{l}`")))
        }
        Wps::Interval(_) => Ok(Pt::Real(rational(v, path)?)),
    }
}

/// Replayable witness document.
pub fn witness_to_json(w: &Witness, a: &Wps) -> Value {
    match w {
        Witness::GraphMismatch { range, source, in_first } => json!({
            "kind": "graph", "range": pt_json(range, a), "source": pt_json(source, a), "in_first": in_first,
        }),
        Witness::NoIsomorphism { reason } => json!({ "kind": "no-isomorphism", "reason": reason }),
        Witness::LimitMismatch { range, source, value, limits } => json!({
            "kind": "limit", "range": pt_json(range, a), "source": pt_json(source, a),
            "value": q(value), "limits": limits.iter().map(q).collect::<Vec<_>>(),
        }),
        Witness::ForcedDiscontinuity { point, forced, limit } => json!({
            "kind": "forced", "point": q(point), "forced": q(forced), "limit": q(limit),
        }),
        Witness::Path(p) => json!({
            "kind": "path", "source": pt_json(&p.source, a),
            "steps": p.steps.iter().map(|i| i + 1).collect::<Vec<_>>(),
            "product": q(&p.product), "bound": q(&p.bound),
            "side": match p.side { Side::Upper => "upper", Side::Lower => "lower" },
        }),
    }
}

pub fn parse_witness(text: &str, a: &Wps) -> Result<Witness> {
    let v = parse_json(text)?;
    let o = obj(&v, "")?;
    let kind = string(field(o, "kind", "")?, "kind")?;
    let r = |k: &str| -> Result<Rational> { rational(field(o, k, "")?, k) };
    Ok(match kind {
        "graph" => Witness::GraphMismatch {
            range: pt_of(field(o, "range", "")?, a, "range")?,
            source: pt_of(field(o, "source", "")?, a, "source")?,
            in_first: field(o, "in_first", "")?.as_bool().ok_or_else(|| perr("in_first", "expected a boolean"))?,
        },
        "no-isomorphism" => Witness::NoIsomorphism {
            reason: o.get("reason").and_then(Value::as_str).unwrap_or_default().to_string(),
        },
        "limit" => Witness::LimitMismatch {
            range: pt_of(field(o, "range", "")?, a, "range")?,
            source: pt_of(field(o, "source", "")?, a, "source")?,
            value: r("value")?,
            limits: rationals(field(o, "limits", "")?, "limits")?,
        },
        "forced" => Witness::ForcedDiscontinuity { point: r("point")?, forced: r("forced")?, limit: r("limit")? },
        "path" => {
            let steps = arr(field(o, "steps", "")?, "steps")?
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let n = usize_of(s, &idx("steps", i))?;
                    n.checked_sub(1).ok_or_else(|| perr(&idx("steps", i), "branches are numbered from 1"))
                })
                .collect::<Result<_>>()?;
            let side = match string(field(o, "side", "")?, "side")? {
                "upper" => Side::Upper,
                "lower" => Side::Lower,
                other => return Err(perr("side", format!("expected \"upper\" or \"lower\", got \"{other}\""))),
            };
            Witness::Path(PathWitness {
                source: pt_of(field(o, "source", "")?, a, "source")?,
                steps,
                product: r("product")?,
                bound: r("bound")?,
                side,
            })
        }
        other => return Err(perr("kind", format!("unknown witness kind \"{other}\""))),
    })
}

fn complex(v: &Value, path: &str) -> Result<Cq> {
    match v {
        Value::Object(o) => {
            only_keys(o, &["re", "im"], path)?;
            let part = |k: &str| o.get(k).map_or(Ok(Rational::from_integer(0.into())), |x| rational(x, &sub(path, k)));
            Ok(cq(part("re")?, part("im")?))
        }
        other => Ok(cq(rational(other, path)?, Rational::from_integer(0.into()))),
    }
}

fn complex_json(z: &Cq) -> Value {
    if z.im == Rational::from_integer(0.into()) {
        q(&z.re)
    } else {
        json!({ "re": q(&z.re), "im": q(&z.im) })
    }
}

/// A Fourier element: `{"N": level, "terms": [{"degree": n, "values":
/// {"a>b>c": value, ...}} | {"degree": n, "constant": value}]}`. Paths are
/// vertex sequences from the source; omitted paths are zero. Values are
/// rationals or `{"re": .., "im": ..}`. `level` overrides `N` when given.
pub fn parse_element(text: &str, quiver: &Quiver, labels: &[String], level: Option<usize>) -> Result<(FockSpace, FourierElement)> {
    let v = parse_json(text)?;
    let o = obj(&v, "")?;
    only_keys(o, &["N", "terms"], "")?;
    let n_doc = match o.get("N") {
        Some(n) => Some(usize_of(n, "N")?),
        None => None,
    };
    let level = level.or(n_doc).ok_or_else(|| perr("N", "no truncation level given"))?;
    let space = FockSpace::new(quiver, level)?;
    let mut t = FourierElement::zero(level);
    for (i, term) in arr(field(o, "terms", "")?, "terms")?.iter().enumerate() {
        let p = idx("terms", i);
        let to = obj(term, &p)?;
        only_keys(to, &["degree", "values", "constant"], &p)?;
        let n = usize_of(field(to, "degree", &p)?, &sub(&p, "degree"))?;
        if n > level {
            return Err(perr(&sub(&p, "degree"), format!("degree {n} exceeds the truncation level {level}")));
        }
        if t.coeffs.contains_key(&n) {
            return Err(perr(&sub(&p, "degree"), format!("degree {n} appears twice")));
        }
        let size = space.spaces[n].paths.len();
        let zero = cq(Rational::from_integer(0.into()), Rational::from_integer(0.into()));
        let mut c = vec![zero; size];
        match (to.get("constant"), to.get("values")) {
            (Some(k), None) => c = vec![complex(k, &sub(&p, "constant"))?; size],
            (None, Some(vals)) => {
                let vp = sub(&p, "values");
                for (key, val) in obj(vals, &vp)? {
                    let kp = sub(&vp, key);
                    let verts = key
                        .split('>')
                        .map(|l| labels.iter().position(|x| x == l.trim()).ok_or_else(|| perr(&kp, format!("unknown point `{l}`"))))
                        .collect::<Result<Vec<_>>>()?;
                    if verts.len() != n + 1 {
                        return Err(perr(&kp, format!("a degree-{n} path lists {} points", n + 1)));
                    }
                    let pos = if n == 0 {
                        verts[0]
                    } else {
                        let edges = verts
                            .windows(2)
                            .map(|w| quiver.edge_index(w[1], w[0]).ok_or_else(|| perr(&kp, "consecutive points are not joined by an edge")))
                            .collect::<Result<Vec<_>>>()?;
                        space.spaces[n].position(&edges).expect("path built from edges")
                    };
                    c[pos] = complex(val, &kp)?;
                }
            }
            _ => return Err(perr(&p, "give exactly one of `values` and `constant`")),
        }
        t.coeffs.insert(n, c);
    }
    Ok((space, t))
}

pub fn element_to_json(space: &FockSpace, labels: &[String], t: &FourierElement) -> Value {
    let terms: Vec<Value> = t
        .coeffs
        .iter()
        .map(|(&n, c)| {
            let values: Map<String, Value> = c
                .iter()
                .enumerate()
                .filter(|(_, z)| !num_traits::Zero::is_zero(*z))
                .map(|(pos, z)| {
                    let verts = space.spaces[n].vertices(&space.quiver, pos);
                    (verts.iter().map(|&v| labels[v].as_str()).collect::<Vec<_>>().join(">"), complex_json(z))
                })
                .collect();
            json!({ "degree": n, "values": values })
        })
        .collect();
    json!({ "N": t.level, "terms": terms })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_round_trip() {
        let text = r#"{"space": {"type": "intervals", "components": [["0", "1"]]},
            "branches": [
              {"map": {"breakpoints": ["0", "1/2", "1"], "values": ["1", "1", "0"]}, "weight": 1},
              {"map": "0", "weight": "1"}]}"#;
        let sys = parse_system(text).unwrap();
        let again = system_from_value(&system_to_json(&sys)).unwrap();
        assert_eq!(sys, again);
    }

    #[test]
    fn matrix_shorthand_and_diagnostics() {
        let sys = parse_system(r#"{"matrix": [["0", "1"], [1, 0]]}"#).unwrap();
        assert_eq!(sys.as_finite().unwrap().graph().len(), 2);
        let err = parse_system(r#"{"matrix": [["0", 0.5], [1, 0]]}"#).unwrap_err();
        assert!(matches!(err, Error::Parse { ref path, .. } if path == "matrix[0][1]"), "{err}");
        let err = parse_system(r#"{"space": {"type": "intervals", "components": [["0", "1"]]},
            "branches": [{"map": "2", "weight": "1"}]}"#)
        .unwrap_err();
        assert!(matches!(err, Error::Invalid(_)), "{err}");
    }
}

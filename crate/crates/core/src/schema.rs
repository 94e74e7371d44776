//! The `kdyn/1` JSON format.
//!
//! Integers are JSON numbers (decimal strings when they exceed 64 bits),
//! rationals are `"p/q"` strings, matrices are row-major arrays of rows.
//! Output objects have sorted keys and carry a `"schema"` header.

use num_bigint::BigInt;
use serde_json::{json, Map, Value};

use crate::arith::{format_rational, parse_rational, Rational};
use crate::cone::{Functional, SeparationStage};
use crate::dynamics::{
    validate_action, validate_endomorphism, CoboundaryVerdict, FreeGroupAction, GroupMap, InvariantQuotient,
    MfWitness,
};
use crate::error::{Error, Result};
use crate::lattice::{IntMatrix, QuotientPresentation};
use crate::order::{
    BlockWitness, ConeSpec, GroupElement, Grading, OrderedGroup, PositiveCone, ProductFactor, ValidationReport,
    POSITIVITY_SEMANTICS,
};
use crate::states::{StatePreserving, StateSpec, StateStage};

pub const SCHEMA: &str = "kdyn/1";

// ---------------------------------------------------------------- reading

fn err(path: &str, msg: impl Into<String>) -> Error {
    Error::schema(if path.is_empty() { "/" } else { path }, msg)
}

fn child(path: &str, key: impl std::fmt::Display) -> String {
    format!("{path}/{key}")
}

fn field<'a>(v: &'a Value, path: &str, key: &str) -> Result<&'a Value> {
    let obj = v.as_object().ok_or_else(|| err(path, "expected an object"))?;
    obj.get(key)
        .ok_or_else(|| err(&child(path, key), "missing field"))
}

fn opt_field<'a>(v: &'a Value, key: &str) -> Option<&'a Value> {
    v.as_object().and_then(|o| o.get(key)).filter(|x| !x.is_null())
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| err(path, "expected an array"))
}

fn string<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| err(path, "expected a string"))
}

fn usize_of(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .and_then(|x| usize::try_from(x).ok())
        .ok_or_else(|| err(path, "expected a nonnegative integer"))
}

pub fn int_of(v: &Value, path: &str) -> Result<BigInt> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigInt::from(i))
            } else if let Some(u) = n.as_u64() {
                Ok(BigInt::from(u))
            } else {
                Err(err(path, "expected an integer"))
            }
        }
        Value::String(s) => s.trim().parse().map_err(|_| err(path, "expected an integer")),
        _ => Err(err(path, "expected an integer")),
    }
}

pub fn rat_of(v: &Value, path: &str) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s).ok_or_else(|| err(path, format!("bad rational {s:?}"))),
        Value::Number(_) => int_of(v, path).map(Rational::from_integer),
        _ => Err(err(path, "expected a rational \"p/q\"")),
    }
}

pub fn int_vec(v: &Value, path: &str) -> Result<Vec<BigInt>> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| int_of(x, &child(path, i)))
        .collect()
}

pub fn rat_vec(v: &Value, path: &str) -> Result<Vec<Rational>> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| rat_of(x, &child(path, i)))
        .collect()
}

fn usize_vec(v: &Value, path: &str) -> Result<Vec<usize>> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| usize_of(x, &child(path, i)))
        .collect()
}

/// Row-major matrix with the given shape.
pub fn matrix_of(v: &Value, path: &str, rows: usize, cols: usize) -> Result<IntMatrix> {
    let rs = array(v, path)?;
    if rs.len() != rows {
        return Err(err(path, format!("expected {rows} rows, found {}", rs.len())));
    }
    let mut m = IntMatrix::zeros(rows, cols);
    for (i, r) in rs.iter().enumerate() {
        let p = child(path, i);
        let row = int_vec(r, &p)?;
        if row.len() != cols {
            return Err(err(&p, format!("expected {cols} columns, found {}", row.len())));
        }
        for (j, x) in row.into_iter().enumerate() {
            m.set(i, j, x);
        }
    }
    Ok(m)
}

fn element_of(v: &Value, path: &str, free_rank: usize, torsion: &[BigInt]) -> Result<GroupElement> {
    let free = int_vec(field(v, path, "free")?, &child(path, "free"))?;
    let t = match opt_field(v, "torsion") {
        Some(t) => int_vec(t, &child(path, "torsion"))?,
        None => vec![BigInt::from(0); torsion.len()],
    };
    if free.len() != free_rank {
        return Err(err(
            &child(path, "free"),
            format!("expected {free_rank} free coordinates, found {}", free.len()),
        ));
    }
    if t.len() != torsion.len() {
        return Err(err(
            &child(path, "torsion"),
            format!("expected {} torsion coordinates, found {}", torsion.len(), t.len()),
        ));
    }
    Ok(GroupElement::new(free, t).reduced(torsion))
}

fn cone_of(v: &Value, path: &str, free_rank: usize, torsion: &[BigInt]) -> Result<ConeSpec> {
    let ty = string(field(v, path, "type")?, &child(path, "type"))?;
    Ok(match ty {
        "simplicial" => ConeSpec::Simplicial,
        "generators" => {
            let p = child(path, "generators");
            let gens = array(field(v, path, "generators")?, &p)?
                .iter()
                .enumerate()
                .map(|(i, g)| element_of(g, &child(&p, i), free_rank, torsion))
                .collect::<Result<Vec<_>>>()?;
            if gens.is_empty() {
                return Err(err(&p, "generator cone needs at least one generator"));
            }
            ConeSpec::Generators(gens)
        }
        "inequalities" => {
            let p = child(path, "rows");
            let rows = array(field(v, path, "rows")?, &p)?
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let rp = child(&p, i);
                    let row = rat_vec(r, &rp)?;
                    if row.len() != free_rank {
                        return Err(err(&rp, format!("expected {free_rank} entries")));
                    }
                    Ok(row)
                })
                .collect::<Result<Vec<_>>>()?;
            ConeSpec::Inequalities(rows)
        }
        "strict_graded" => {
            let k = usize_of(field(v, path, "degree0_rank")?, &child(path, "degree0_rank"))?;
            if k > free_rank {
                return Err(err(&child(path, "degree0_rank"), "exceeds the free rank"));
            }
            let base = cone_of(field(v, path, "base")?, &child(path, "base"), k, &[])?;
            ConeSpec::StrictGraded {
                degree0_rank: k,
                base: Box::new(base),
            }
        }
        "product" => {
            let p = child(path, "factors");
            let factors = array(field(v, path, "factors")?, &p)?
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    let fp = child(&p, i);
                    let free = usize_vec(field(f, &fp, "free")?, &child(&fp, "free"))?;
                    let tors = match opt_field(f, "torsion") {
                        Some(t) => usize_vec(t, &child(&fp, "torsion"))?,
                        None => Vec::new(),
                    };
                    if let Some(&bad) = free.iter().find(|&&j| j >= free_rank) {
                        return Err(err(&child(&fp, "free"), format!("index {bad} out of range")));
                    }
                    if let Some(&bad) = tors.iter().find(|&&j| j >= torsion.len()) {
                        return Err(err(&child(&fp, "torsion"), format!("index {bad} out of range")));
                    }
                    let local: Vec<BigInt> = tors.iter().map(|&j| torsion[j].clone()).collect();
                    let cone = cone_of(field(f, &fp, "cone")?, &child(&fp, "cone"), free.len(), &local)?;
                    Ok(ProductFactor {
                        free,
                        torsion: tors,
                        cone,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            ConeSpec::Product(factors)
        }
        other => return Err(err(&child(path, "type"), format!("unknown cone type {other:?}"))),
    })
}

fn check_header(v: &Value, path: &str, kind: &str) -> Result<()> {
    if let Some(s) = opt_field(v, "schema") {
        let s = string(s, &child(path, "schema"))?;
        if s != SCHEMA {
            return Err(err(&child(path, "schema"), format!("unsupported schema {s:?}")));
        }
    }
    if let Some(k) = opt_field(v, "kind") {
        let k = string(k, &child(path, "kind"))?;
        if k != kind {
            return Err(err(&child(path, "kind"), format!("expected kind {kind:?}, found {k:?}")));
        }
    }
    Ok(())
}

/// Parses a group document without validating the order.
pub fn group_of(v: &Value, path: &str) -> Result<OrderedGroup> {
    check_header(v, path, "group")?;
    let free_rank = usize_of(field(v, path, "free_rank")?, &child(path, "free_rank"))?;
    let torsion = match opt_field(v, "torsion") {
        Some(t) => int_vec(t, &child(path, "torsion"))?,
        None => Vec::new(),
    };
    for (i, t) in torsion.iter().enumerate() {
        if t < &BigInt::from(2) {
            return Err(err(&child(&child(path, "torsion"), i), "torsion invariants must be ≥ 2"));
        }
    }
    let cone = cone_of(field(v, path, "cone")?, &child(path, "cone"), free_rank, &torsion)?;
    let unit = element_of(field(v, path, "unit")?, &child(path, "unit"), free_rank, &torsion)?;
    let mut g = OrderedGroup::new(free_rank, torsion, cone, unit);
    if let Some(gr) = opt_field(v, "grading") {
        let p = child(path, "grading");
        let get = |k: &str| usize_of(field(gr, &p, k)?, &child(&p, k));
        let grading = Grading {
            k0_free: get("k0_free")?,
            k0_torsion: get("k0_torsion")?,
            k1_free: get("k1_free")?,
            k1_torsion: get("k1_torsion")?,
        };
        if grading.k0_free + grading.k1_free != free_rank
            || grading.k0_torsion + grading.k1_torsion != g.torsion.len()
        {
            return Err(err(&p, "grading block sizes do not add up"));
        }
        g.grading = Some(grading);
    }
    if let Some(s) = opt_field(v, "scale") {
        let p = child(path, "scale");
        g.scale = array(s, &p)?
            .iter()
            .enumerate()
            .map(|(i, x)| element_of(x, &child(&p, i), free_rank, &g.torsion))
            .collect::<Result<_>>()?;
    }
    Ok(g)
}

fn map_of(
    matrix: &Value,
    torsion_map: Option<&Value>,
    path: &str,
    tm_path: &str,
    g: &OrderedGroup,
) -> Result<GroupMap> {
    let (d, t) = (g.free_rank, g.torsion.len());
    let free = matrix_of(matrix, path, d, d)?;
    let mut m = GroupMap::free_only(free, t);
    if let Some(tm) = torsion_map {
        if let Some(c) = opt_field(tm, "torsion") {
            m.torsion = matrix_of(c, &child(tm_path, "torsion"), t, t)?;
        }
        if let Some(b) = opt_field(tm, "from_free") {
            m.from_free = matrix_of(b, &child(tm_path, "from_free"), t, d)?;
        }
    }
    Ok(m)
}

pub fn action_of(v: &Value, path: &str) -> Result<(OrderedGroup, FreeGroupAction)> {
    check_header(v, path, "action")?;
    let g = group_of(field(v, path, "group")?, &child(path, "group"))?;
    let gp = child(path, "generators");
    let gens = array(field(v, path, "generators")?, &gp)?;
    let tms = match opt_field(v, "torsion_maps") {
        Some(t) => {
            let a = array(t, &child(path, "torsion_maps"))?;
            if a.len() != gens.len() {
                return Err(err(&child(path, "torsion_maps"), "one torsion map per generator expected"));
            }
            Some(a)
        }
        None => None,
    };
    let maps = gens
        .iter()
        .enumerate()
        .map(|(i, m)| {
            map_of(
                m,
                tms.map(|a| &a[i]),
                &child(&gp, i),
                &child(&child(path, "torsion_maps"), i),
                &g,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((g, FreeGroupAction::new(maps)))
}

pub fn endomorphism_of(v: &Value, path: &str) -> Result<(OrderedGroup, GroupMap)> {
    check_header(v, path, "endomorphism")?;
    let g = group_of(field(v, path, "group")?, &child(path, "group"))?;
    let m = map_of(
        field(v, path, "matrix")?,
        opt_field(v, "torsion_map"),
        &child(path, "matrix"),
        &child(path, "torsion_map"),
        &g,
    )?;
    Ok((g, m))
}

pub fn state_of(v: &Value, path: &str, g: &OrderedGroup) -> Result<StateSpec> {
    check_header(v, path, "state")?;
    let beta = rat_vec(field(v, path, "beta")?, &child(path, "beta"))?;
    if beta.len() != g.free_rank {
        return Err(err(&child(path, "beta"), format!("expected {} entries", g.free_rank)));
    }
    Ok(StateSpec::new(beta))
}

pub fn set_of(v: &Value, path: &str, g: &OrderedGroup) -> Result<Vec<GroupElement>> {
    let (arr, p) = match v {
        Value::Array(_) => (v, path.to_string()),
        _ => {
            check_header(v, path, "set")?;
            (field(v, path, "elements")?, child(path, "elements"))
        }
    };
    array(arr, &p)?
        .iter()
        .enumerate()
        .map(|(i, x)| element_of(x, &child(&p, i), g.free_rank, &g.torsion))
        .collect()
}

/// One unit of work for `kdyn run` and batch mode.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskBundle {
    pub command: String,
    pub instance: Value,
    pub beta: Option<Value>,
    pub set: Option<Value>,
    pub epsilon: Option<Rational>,
    pub n_max: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Document {
    Group(OrderedGroup),
    Action(OrderedGroup, FreeGroupAction),
    Endomorphism(OrderedGroup, GroupMap),
    State(StateSpec),
    Set(Vec<GroupElement>),
    Task(TaskBundle),
}

fn document_kind(v: &Value) -> Result<&str> {
    let k = field(v, "", "kind")?;
    string(k, "/kind")
}

/// Parses and validates a top-level document.
pub fn ingest(v: &Value) -> Result<Document> {
    let s = string(field(v, "", "schema")?, "/schema")?;
    if s != SCHEMA {
        return Err(err("/schema", format!("unsupported schema {s:?}")));
    }
    Ok(match document_kind(v)? {
        "group" => {
            let g = group_of(v, "")?;
            g.validate_structure()?;
            Document::Group(g)
        }
        "action" => {
            let (g, a) = action_of(v, "")?;
            validate_action(&a, &g)?;
            Document::Action(g, a)
        }
        "endomorphism" => {
            let (g, m) = endomorphism_of(v, "")?;
            validate_endomorphism(&m, &g)?;
            Document::Endomorphism(g, m)
        }
        "state" => Document::State(StateSpec::new(rat_vec(field(v, "", "beta")?, "/beta")?)),
        "set" => {
            let p = "/elements";
            let els = array(field(v, "", "elements")?, p)?
                .iter()
                .enumerate()
                .map(|(i, x)| {
                    let xp = child(p, i);
                    let free = int_vec(field(x, &xp, "free")?, &child(&xp, "free"))?;
                    let torsion = match opt_field(x, "torsion") {
                        Some(t) => int_vec(t, &child(&xp, "torsion"))?,
                        None => Vec::new(),
                    };
                    Ok(GroupElement::new(free, torsion))
                })
                .collect::<Result<_>>()?;
            Document::Set(els)
        }
        "task" => Document::Task(TaskBundle {
            command: string(field(v, "", "command")?, "/command")?.to_string(),
            instance: field(v, "", "instance")?.clone(),
            beta: opt_field(v, "beta").cloned(),
            set: opt_field(v, "set").cloned(),
            epsilon: opt_field(v, "eps").map(|e| rat_of(e, "/eps")).transpose()?,
            n_max: opt_field(v, "n_max").map(|n| usize_of(n, "/n_max")).transpose()?,
        }),
        other => return Err(err("/kind", format!("unknown document kind {other:?}"))),
    })
}

pub fn ingest_str(text: &str) -> Result<Document> {
    let v: Value = serde_json::from_str(text).map_err(|e| err("", format!("invalid JSON: {e}")))?;
    ingest(&v)
}

// ---------------------------------------------------------------- writing

pub fn int_json(x: &BigInt) -> Value {
    match i64::try_from(x) {
        Ok(i) => json!(i),
        Err(_) => Value::String(x.to_string()),
    }
}

pub fn rat_json(q: &Rational) -> Value {
    Value::String(format_rational(q))
}

pub fn ints_json(v: &[BigInt]) -> Value {
    Value::Array(v.iter().map(int_json).collect())
}

pub fn rats_json(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(rat_json).collect())
}

pub fn matrix_json(m: &IntMatrix) -> Value {
    Value::Array(m.row_vecs().iter().map(|r| ints_json(r)).collect())
}

pub fn element_json(x: &GroupElement) -> Value {
    json!({"free": ints_json(&x.free), "torsion": ints_json(&x.torsion)})
}

pub fn cone_json(c: &ConeSpec) -> Value {
    match c {
        ConeSpec::Simplicial => json!({"type": "simplicial"}),
        ConeSpec::Generators(gs) => json!({
            "type": "generators",
            "generators": gs.iter().map(element_json).collect::<Vec<_>>(),
        }),
        ConeSpec::Inequalities(rows) => json!({
            "type": "inequalities",
            "rows": rows.iter().map(|r| rats_json(r)).collect::<Vec<_>>(),
        }),
        ConeSpec::StrictGraded { degree0_rank, base } => json!({
            "type": "strict_graded",
            "degree0_rank": degree0_rank,
            "base": cone_json(base),
        }),
        ConeSpec::Product(fs) => json!({
            "type": "product",
            "factors": fs.iter().map(|f| json!({
                "free": f.free,
                "torsion": f.torsion,
                "cone": cone_json(&f.cone),
            })).collect::<Vec<_>>(),
        }),
    }
}

fn with_header(kind: &str, mut body: Map<String, Value>) -> Value {
    body.insert("schema".into(), json!(SCHEMA));
    body.insert("kind".into(), json!(kind));
    Value::Object(body)
}

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

pub fn group_json(g: &OrderedGroup) -> Value {
    let mut m = object(json!({
        "free_rank": g.free_rank,
        "torsion": ints_json(&g.torsion),
        "cone": cone_json(&g.cone),
        "unit": element_json(&g.unit),
        "positivity": POSITIVITY_SEMANTICS,
    }));
    if let Some(gr) = g.grading {
        m.insert(
            "grading".into(),
            json!({
                "k0_free": gr.k0_free,
                "k0_torsion": gr.k0_torsion,
                "k1_free": gr.k1_free,
                "k1_torsion": gr.k1_torsion,
            }),
        );
    }
    if !g.scale.is_empty() {
        m.insert("scale".into(), Value::Array(g.scale.iter().map(element_json).collect()));
    }
    with_header("group", m)
}

fn torsion_map_json(m: &GroupMap) -> Value {
    json!({"torsion": matrix_json(&m.torsion), "from_free": matrix_json(&m.from_free)})
}

fn is_trivial_on_torsion(m: &GroupMap) -> bool {
    m.from_free.is_zero() && m.torsion == IntMatrix::identity(m.torsion.rows())
}

pub fn action_json(g: &OrderedGroup, a: &FreeGroupAction) -> Value {
    let mut m = object(json!({
        "group": group_json(g),
        "generators": a.generators.iter().map(|x| matrix_json(&x.free)).collect::<Vec<_>>(),
    }));
    if !a.generators.iter().all(is_trivial_on_torsion) {
        m.insert(
            "torsion_maps".into(),
            Value::Array(a.generators.iter().map(torsion_map_json).collect()),
        );
    }
    with_header("action", m)
}

pub fn endomorphism_json(g: &OrderedGroup, h: &GroupMap) -> Value {
    let mut m = object(json!({"group": group_json(g), "matrix": matrix_json(&h.free)}));
    if !is_trivial_on_torsion(h) {
        m.insert("torsion_map".into(), torsion_map_json(h));
    }
    with_header("endomorphism", m)
}

pub fn state_json(b: &StateSpec) -> Value {
    with_header("state", object(json!({"beta": rats_json(&b.beta)})))
}

pub fn set_json(s: &[GroupElement]) -> Value {
    with_header(
        "set",
        object(json!({"elements": s.iter().map(element_json).collect::<Vec<_>>()})),
    )
}

pub fn functional_json(f: &Functional) -> Value {
    json!({
        "coefficients": rats_json(&f.coefficients),
        "integer": ints_json(&f.integer),
        "scale": int_json(&f.scale),
    })
}

fn stage_json(s: &SeparationStage) -> Value {
    json!({
        "functional": rats_json(&s.functional),
        "removed_blocks": s.removed_blocks,
        "margin": rat_json(&s.margin),
    })
}

/// Per-block positivity evidence for `x`.
pub fn positivity_witness_json(cone: &PositiveCone, x: &GroupElement) -> Result<Value> {
    let w = cone
        .witness(x, &crate::arith::Deadline::none())?
        .ok_or_else(|| Error::NotPositive(x.clone()))?;
    Ok(Value::Array(
        w.iter()
            .map(|b| match b {
                BlockWitness::Zero => json!("zero"),
                BlockWitness::Positive(parts) => Value::Array(
                    parts
                        .iter()
                        .map(|p| match p {
                            Some(ws) => rats_json(ws),
                            None => Value::Null,
                        })
                        .collect(),
                ),
            })
            .collect(),
    ))
}

/// Multipliers `y` with `f|part = yᵀ B` for every inequality part, so the
/// verifier can confirm positivity without enumerating rays.
fn inequality_multipliers(cone: &PositiveCone, stages: &[Vec<Rational>], strict_from: &[usize]) -> Result<Value> {
    use crate::lp::{Problem, Relation};
    use crate::order::PartKind;
    let mut out = Vec::new();
    for (k, f) in stages.iter().enumerate() {
        let mut per_block = Vec::new();
        for (b, block) in cone.blocks.iter().enumerate() {
            let mut per_part = Vec::new();
            for part in &block.parts {
                let PartKind::Inequalities(rows) = &part.kind else {
                    per_part.push(Value::Null);
                    continue;
                };
                if b < strict_from.len() && strict_from[b] < k {
                    // block already removed before this stage: unconstrained
                    per_part.push(Value::Null);
                    continue;
                }
                let strict = b < strict_from.len() && strict_from[b] == k;
                let mut p = Problem::new();
                let ys: Vec<usize> = rows.iter().map(|_| p.nonneg()).collect();
                for (i, &c) in part.coords.iter().enumerate() {
                    let row = ys.iter().zip(rows).map(|(&y, r)| (y, r[i].clone())).collect();
                    p.constrain(row, Relation::Eq, f[c].clone());
                }
                let one = Rational::from_integer(1.into());
                if strict {
                    // maximize the smallest multiplier, capped at 1
                    let t = p.nonneg();
                    p.constrain(vec![(t, one.clone())], Relation::Le, one.clone());
                    for &y in &ys {
                        p.constrain(vec![(y, one.clone()), (t, -one.clone())], Relation::Ge, Rational::from_integer(0.into()));
                    }
                    p.minimize(vec![(t, -one.clone())]);
                }
                let sol = p.solve(&crate::arith::Deadline::none())?;
                match sol.values() {
                    Some(vals) => per_part.push(rats_json(&ys.iter().map(|&y| vals[y].clone()).collect::<Vec<_>>())),
                    None => per_part.push(Value::Null),
                }
            }
            per_block.push(Value::Array(per_part));
        }
        out.push(Value::Array(per_block));
    }
    Ok(Value::Array(out))
}

pub fn validation_json(r: &ValidationReport) -> Value {
    with_header(
        "validation",
        object(json!({
            "valid": r.is_valid(),
            "clauses": {
                "pointed": r.pointed,
                "generating": r.generating,
                "no_torsion_positives": r.no_torsion_positives,
                "unit_positive": r.unit_positive,
                "order_unit": r.order_unit,
            },
            "order_unit_witnesses": r.order_unit_witnesses.iter().map(|(g, n)| json!({
                "generator": element_json(g),
                "n": rat_json(n),
            })).collect::<Vec<_>>(),
            "pointedness_functionals": r.pointedness_functionals.iter().map(|f| rats_json(f)).collect::<Vec<_>>(),
            "violations": r.violations,
            "positivity": POSITIVITY_SEMANTICS,
        })),
    )
}

/// Certificate for a coboundary (or Pimsner) verdict.
pub fn verdict_json(kind: &str, v: &CoboundaryVerdict, g: &OrderedGroup) -> Result<Value> {
    let cone = g.positive_cone()?;
    let body = match v {
        CoboundaryVerdict::Holds {
            functional,
            stages,
            faithful,
        } => {
            let strict_from = removal_stage(cone.blocks.len(), stages);
            let fs: Vec<Vec<Rational>> = stages.iter().map(|s| s.functional.clone()).collect();
            let mut m = object(json!({
                "verdict": "holds",
                "functional": functional_json(functional),
                "faithful": faithful,
                "stages": stages.iter().map(stage_json).collect::<Vec<_>>(),
                "inequality_multipliers": inequality_multipliers(&cone, &fs, &strict_from)?,
            }));
            m.insert(
                "functional_inequality_multipliers".into(),
                inequality_multipliers(&cone, std::slice::from_ref(&functional.coefficients), &vec![0; cone.blocks.len()])?,
            );
            m
        }
        CoboundaryVerdict::Fails {
            element,
            combination,
            preimage,
        } => {
            let mut m = object(json!({
                "verdict": "fails",
                "element": element_json(element),
                "combination": ints_json(combination),
                "positivity_witness": positivity_witness_json(&cone, element)?,
            }));
            if let Some(x) = preimage {
                m.insert("preimage".into(), element_json(x));
            }
            m
        }
    };
    Ok(with_header(kind, body))
}

fn removal_stage(blocks: usize, stages: &[SeparationStage]) -> Vec<usize> {
    let mut out = vec![usize::MAX; blocks];
    for (k, s) in stages.iter().enumerate() {
        for &b in &s.removed_blocks {
            out[b] = k;
        }
    }
    out
}

pub fn faithful_json(f: &Functional, g: &OrderedGroup) -> Result<Value> {
    let cone = g.positive_cone()?;
    Ok(with_header(
        "faithful_functional",
        object(json!({
            "functional": functional_json(f),
            "inequality_multipliers": inequality_multipliers(&cone, std::slice::from_ref(&f.coefficients), &vec![0; cone.blocks.len()])?,
        })),
    ))
}

pub fn witness_json(w: &MfWitness, g: &OrderedGroup) -> Result<Value> {
    let cone = g.positive_cone()?;
    Ok(with_header(
        "mf_witness",
        object(json!({
            "subgroup": if w.subgroup_is_whole_group { "whole_group" } else { "proper" },
            "mu": functional_json(&w.mu),
            "set": w.set.iter().map(element_json).collect::<Vec<_>>(),
            "values": ints_json(&w.values),
            "residuals": w.residuals.iter().map(|r| ints_json(r)).collect::<Vec<_>>(),
            "inverse_residuals": w.inverse_residuals.iter().map(|r| ints_json(r)).collect::<Vec<_>>(),
            "positivity_witnesses": w.set.iter().map(|s| positivity_witness_json(&cone, s)).collect::<Result<Vec<_>>>()?,
        })),
    ))
}

pub fn presentation_json(p: &QuotientPresentation) -> Value {
    json!({
        "free_rank": p.free_rank,
        "torsion_invariants": ints_json(&p.torsion_invariants),
        "free_projection": matrix_json(&p.free_projection),
        "torsion_projection": matrix_json(&p.torsion_projection),
    })
}

pub fn quotient_json(q: &InvariantQuotient) -> Value {
    with_header(
        "quotient",
        object(json!({
            "presentation": presentation_json(&q.presentation),
            "group": group_json(&q.group),
            "faithful": q.faithful,
        })),
    )
}

pub fn state_preserving_json(
    r: &StatePreserving,
    beta: &StateSpec,
    set: &[GroupElement],
    g: &OrderedGroup,
) -> Result<Value> {
    let cone = g.positive_cone()?;
    let t = &r.transcript;
    let witnesses = set
        .iter()
        .map(|s| match positivity_witness_json(&cone, &s.clone().reduced(&g.torsion)) {
            Ok(w) if !s.is_zero() => w,
            _ => Value::Null,
        })
        .collect::<Vec<_>>();
    Ok(with_header(
        "state_preserving",
        object(json!({
            "functional": functional_json(&r.functional),
            "beta": rats_json(&beta.beta),
            "set": set.iter().map(element_json).collect::<Vec<_>>(),
            "epsilon": rat_json(&t.epsilon),
            "positivity_witnesses": witnesses,
            "transcript": {
                "kernel": t.kernel.vectors().iter().map(|v| ints_json(v)).collect::<Vec<_>>(),
                "quotient_rank": t.quotient_rank,
                "projection": t.projection.iter().map(|v| ints_json(v)).collect::<Vec<_>>(),
                "basis_values": rats_json(&t.basis_values),
                "coefficient_bound": int_json(&t.coefficient_bound),
                "delta": rat_json(&t.delta),
                "deviations": rats_json(&t.deviations),
                "vanishing": t.vanishing,
                "correction": rat_json(&t.correction),
                "invariance_residuals": t.invariance_residuals.iter().map(|r| rats_json(r)).collect::<Vec<_>>(),
            },
        })),
    ))
}

pub fn stage_record_json(s: &StateStage, g: &OrderedGroup) -> Result<Value> {
    let cone = g.positive_cone()?;
    Ok(with_header(
        "state_stage",
        object(json!({
            "index": s.index,
            "subgroup": s.subgroup.vectors().iter().map(|v| ints_json(v)).collect::<Vec<_>>(),
            "subgroup_free_rank": s.subgroup_free_rank,
            "subgroup_torsion": ints_json(&s.subgroup_torsion),
            "elements": s.elements.iter().map(element_json).collect::<Vec<_>>(),
            "functional": functional_json(&s.functional),
            "values": rats_json(&s.values),
            "domain": "total",
            "tolerance": Value::Null,
            "checks": {
                "additivity_pairs": s.additivity_checked,
                "additivity": s.additivity_ok,
                "positivity": s.positivity_ok,
            },
            "invariance_residuals": s.invariance_residuals.iter().map(|r| rats_json(r)).collect::<Vec<_>>(),
            "positivity_witnesses": s.elements.iter().map(|x| positivity_witness_json(&cone, x)).collect::<Result<Vec<_>>>()?,
        })),
    ))
}

/// Canonical text: sorted keys, two-space indentation, trailing newline.
pub fn to_canonical_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

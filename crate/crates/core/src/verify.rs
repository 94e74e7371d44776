//! Standalone certificate checker.
//!
//! Everything here is recomputed from the instance with plain integer and
//! rational arithmetic: cone blocks, coboundary generators, map images.
//! No linear programming and no normal forms are used, so a bug in the
//! solvers cannot make a bad certificate pass.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde_json::Value;

use crate::arith::Rational;
use crate::dynamics::GroupMap;
use crate::error::{Error, Result};
use crate::order::{ConeSpec, GroupElement, OrderedGroup};
use crate::schema::{self, int_of, int_vec, rat_of, rat_vec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub kind: String,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.ok)
    }

    fn check(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            ok,
            detail: if ok { String::new() } else { detail.into() },
        });
    }
}

// ------------------------------------------------------------ own cone model

#[derive(Debug, Clone)]
enum Part {
    Simplicial,
    Generators(Vec<Vec<BigInt>>),
    Inequalities(Vec<Vec<Rational>>),
}

#[derive(Debug, Clone)]
struct VPart {
    coords: Vec<usize>,
    part: Part,
}

#[derive(Debug, Clone)]
struct VBlock {
    parts: Vec<VPart>,
    floating: Vec<usize>,
    torsion: Vec<usize>,
}

fn primitive_of(v: &[BigInt]) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        v.to_vec()
    } else {
        v.iter().map(|x| x / &g).collect()
    }
}

fn leaf(spec: &ConeSpec, coords: &[usize]) -> Result<VPart> {
    let part = match spec {
        ConeSpec::Simplicial => Part::Simplicial,
        ConeSpec::Generators(gs) => {
            let mut out: Vec<Vec<BigInt>> = Vec::new();
            for g in gs {
                if g.free.iter().all(Zero::is_zero) {
                    continue;
                }
                let p = primitive_of(&g.free);
                if !out.contains(&p) {
                    out.push(p);
                }
            }
            Part::Generators(out)
        }
        ConeSpec::Inequalities(rows) => Part::Inequalities(rows.clone()),
        _ => return Err(Error::InvalidPresentation("nested graded cone".into())),
    };
    Ok(VPart {
        coords: coords.to_vec(),
        part,
    })
}

fn collect(spec: &ConeSpec, free: &[usize], torsion: &[usize], out: &mut Vec<VBlock>) -> Result<()> {
    match spec {
        ConeSpec::StrictGraded { degree0_rank, base } => out.push(VBlock {
            parts: vec![leaf(base, &free[..*degree0_rank])?],
            floating: free[*degree0_rank..].to_vec(),
            torsion: torsion.to_vec(),
        }),
        ConeSpec::Product(fs) => {
            for f in fs {
                let gf: Vec<usize> = f.free.iter().map(|&i| free[i]).collect();
                let gt: Vec<usize> = f.torsion.iter().map(|&i| torsion[i]).collect();
                collect(&f.cone, &gf, &gt, out)?;
            }
        }
        other => out.push(VBlock {
            parts: vec![leaf(other, free)?],
            floating: Vec::new(),
            torsion: torsion.to_vec(),
        }),
    }
    Ok(())
}

fn blocks_of(g: &OrderedGroup) -> Result<Vec<VBlock>> {
    let free: Vec<usize> = (0..g.free_rank).collect();
    let torsion: Vec<usize> = (0..g.torsion.len()).collect();
    let mut raw = Vec::new();
    collect(&g.cone, &free, &torsion, &mut raw)?;
    let (closed, open): (Vec<VBlock>, Vec<VBlock>) = raw
        .into_iter()
        .partition(|b| b.floating.is_empty() && b.torsion.is_empty());
    let mut out = Vec::new();
    if !closed.is_empty() {
        out.push(VBlock {
            parts: closed.into_iter().flat_map(|b| b.parts).collect(),
            floating: Vec::new(),
            torsion: Vec::new(),
        });
    }
    out.extend(open);
    Ok(out)
}

fn q(x: &BigInt) -> Rational {
    Rational::from_integer(x.clone())
}

fn dot(f: &[Rational], x: &[BigInt]) -> Rational {
    f.iter().zip(x).fold(Rational::zero(), |acc, (a, b)| acc + a * q(b))
}

fn local(x: &[BigInt], coords: &[usize]) -> Vec<BigInt> {
    coords.iter().map(|&c| x[c].clone()).collect()
}

fn modulo(x: &BigInt, m: &BigInt) -> BigInt {
    x.mod_floor(m)
}

fn reduce(x: &GroupElement, inv: &[BigInt]) -> GroupElement {
    GroupElement {
        free: x.free.clone(),
        torsion: x.torsion.iter().zip(inv).map(|(a, m)| modulo(a, m)).collect(),
    }
}

fn apply(m: &GroupMap, x: &GroupElement, inv: &[BigInt]) -> GroupElement {
    let d = x.free.len();
    let t = x.torsion.len();
    let free = (0..d)
        .map(|i| (0..d).fold(BigInt::zero(), |acc, j| acc + m.free.get(i, j) * &x.free[j]))
        .collect();
    let torsion = (0..t)
        .map(|i| {
            let a = (0..d).fold(BigInt::zero(), |acc, j| acc + m.from_free.get(i, j) * &x.free[j]);
            (0..t).fold(a, |acc, j| acc + m.torsion.get(i, j) * &x.torsion[j])
        })
        .collect();
    reduce(&GroupElement { free, torsion }, inv)
}

fn minus(a: &GroupElement, b: &GroupElement, inv: &[BigInt]) -> GroupElement {
    reduce(
        &GroupElement {
            free: a.free.iter().zip(&b.free).map(|(x, y)| x - y).collect(),
            torsion: a.torsion.iter().zip(&b.torsion).map(|(x, y)| x - y).collect(),
        },
        inv,
    )
}

fn coboundaries(maps: &[GroupMap], g: &OrderedGroup) -> Vec<GroupElement> {
    let (d, t) = (g.free_rank, g.torsion.len());
    let mut out = Vec::new();
    for m in maps {
        for k in 0..d + t {
            let mut e = GroupElement {
                free: vec![BigInt::zero(); d],
                torsion: vec![BigInt::zero(); t],
            };
            if k < d {
                e.free[k] = BigInt::one();
            } else {
                e.torsion[k - d] = BigInt::one();
            }
            let e = reduce(&e, &g.torsion);
            out.push(minus(&e, &apply(m, &e, &g.torsion), &g.torsion));
        }
    }
    out
}

/// Rank of a rational matrix by plain elimination.
fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let pivot = m[r][c].clone();
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let k = &m[i][c] / &pivot;
                for j in c..cols {
                    let v = &k * &m[r][j];
                    m[i][j] -= v;
                }
            }
        }
        r += 1;
    }
    r
}

// ------------------------------------------------------------ positivity

fn check_witness(blocks: &[VBlock], x: &GroupElement, w: &Value) -> std::result::Result<(), String> {
    let ws = w.as_array().ok_or("witness is not an array")?;
    if ws.len() != blocks.len() {
        return Err(format!("witness has {} blocks, cone has {}", ws.len(), blocks.len()));
    }
    let mut any = false;
    for (b, (block, bw)) in blocks.iter().zip(ws).enumerate() {
        let base: Vec<usize> = block.parts.iter().flat_map(|p| p.coords.iter().copied()).collect();
        if bw.as_str() == Some("zero") {
            let zero = base.iter().chain(&block.floating).all(|&i| x.free[i].is_zero())
                && block.torsion.iter().all(|&i| x.torsion[i].is_zero());
            if !zero {
                return Err(format!("block {b} is declared zero but is not"));
            }
            continue;
        }
        let parts = bw.as_array().ok_or(format!("block {b}: bad witness"))?;
        if parts.len() != block.parts.len() {
            return Err(format!("block {b}: wrong number of parts"));
        }
        if base.iter().all(|&i| x.free[i].is_zero()) {
            return Err(format!("block {b}: nonzero component with zero base"));
        }
        any = true;
        for (k, (part, pw)) in block.parts.iter().zip(parts).enumerate() {
            let xl = local(&x.free, &part.coords);
            let ok = match &part.part {
                Part::Simplicial => xl.iter().all(|v| !v.is_negative()),
                Part::Inequalities(rows) => rows.iter().all(|r| !dot(r, &xl).is_negative()),
                Part::Generators(gens) => {
                    let t = rat_vec(pw, "").map_err(|e| format!("block {b} part {k}: {e}"))?;
                    t.len() == gens.len()
                        && t.iter().all(|v| !v.is_negative())
                        && (0..xl.len()).all(|i| {
                            gens.iter()
                                .zip(&t)
                                .fold(Rational::zero(), |acc, (g, tj)| acc + tj * q(&g[i]))
                                == q(&xl[i])
                        })
                }
            };
            if !ok {
                return Err(format!("block {b} part {k}: membership fails"));
            }
        }
    }
    if !any {
        return Err("element is zero".into());
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq)]
enum Sign {
    Nonneg,
    Strict,
}

/// `f` restricted to a part is `≥ 0` (or `> 0` off zero, with generator
/// values `≥ margin`) on the part's cone.
fn check_part_sign(
    f: &[Rational],
    part: &VPart,
    sign: Sign,
    margin: &Rational,
    multipliers: Option<&Value>,
) -> std::result::Result<(), String> {
    let fl: Vec<Rational> = part.coords.iter().map(|&c| f[c].clone()).collect();
    let bound_ok = |v: &Rational| match sign {
        Sign::Nonneg => !v.is_negative(),
        Sign::Strict => v.is_positive() && v >= margin,
    };
    match &part.part {
        Part::Simplicial => {
            if fl.iter().all(bound_ok) {
                Ok(())
            } else {
                Err("simplicial part: coefficient below bound".into())
            }
        }
        Part::Generators(gens) => {
            if gens.iter().all(|g| bound_ok(&dot(&fl, g))) {
                Ok(())
            } else {
                Err("generator part: value below bound".into())
            }
        }
        Part::Inequalities(rows) => {
            let y = multipliers
                .filter(|v| !v.is_null())
                .ok_or("inequality part: multipliers missing")
                .and_then(|v| rat_vec(v, "").map_err(|_| "inequality part: bad multipliers"))?;
            if y.len() != rows.len() {
                return Err("inequality part: wrong number of multipliers".into());
            }
            let sign_ok = match sign {
                Sign::Nonneg => y.iter().all(|v| !v.is_negative()),
                Sign::Strict => y.iter().all(|v| v.is_positive()) && rank(rows) == part.coords.len(),
            };
            let combo_ok = (0..fl.len()).all(|i| {
                y.iter()
                    .zip(rows)
                    .fold(Rational::zero(), |acc, (yk, r)| acc + yk * &r[i])
                    == fl[i]
            });
            if sign_ok && combo_ok {
                Ok(())
            } else {
                Err("inequality part: multipliers do not certify the sign".into())
            }
        }
    }
}

fn multiplier(m: Option<&Value>, stage: usize, block: usize, part: usize) -> Option<&Value> {
    m?.get(stage)?.get(block)?.get(part)
}

// ------------------------------------------------------------ instances

fn instance_of(v: &Value) -> Result<(OrderedGroup, Vec<GroupMap>)> {
    match v.get("kind").and_then(Value::as_str) {
        Some("group") => Ok((schema::group_of(v, "")?, Vec::new())),
        Some("action") => {
            let (g, a) = schema::action_of(v, "")?;
            Ok((g, a.generators))
        }
        Some("endomorphism") => {
            let (g, m) = schema::endomorphism_of(v, "")?;
            Ok((g, vec![m]))
        }
        _ => Err(Error::schema("/kind", "instance must be a group, action or endomorphism")),
    }
}

fn functional_of(v: &Value, path: &str, d: usize) -> Result<(Vec<Rational>, Vec<BigInt>, BigInt)> {
    let get = |k: &str| v.get(k).ok_or_else(|| Error::schema(format!("{path}/{k}"), "missing field"));
    let c = rat_vec(get("coefficients")?, &format!("{path}/coefficients"))?;
    let i = int_vec(get("integer")?, &format!("{path}/integer"))?;
    let s = int_of(get("scale")?, &format!("{path}/scale"))?;
    if c.len() != d || i.len() != d {
        return Err(Error::schema(path, format!("functional must have {d} entries")));
    }
    Ok((c, i, s))
}

fn element_of(v: &Value, path: &str, g: &OrderedGroup) -> Result<GroupElement> {
    let free = int_vec(
        v.get("free").ok_or_else(|| Error::schema(format!("{path}/free"), "missing field"))?,
        &format!("{path}/free"),
    )?;
    let torsion = match v.get("torsion") {
        Some(t) => int_vec(t, &format!("{path}/torsion"))?,
        None => vec![BigInt::zero(); g.torsion.len()],
    };
    if free.len() != g.free_rank || torsion.len() != g.torsion.len() {
        return Err(Error::schema(path, "element has the wrong shape"));
    }
    Ok(reduce(&GroupElement { free, torsion }, &g.torsion))
}

fn field<'a>(v: &'a Value, k: &str) -> Result<&'a Value> {
    v.get(k).ok_or_else(|| Error::schema(format!("/{k}"), "missing field"))
}

// ------------------------------------------------------------ entry point

/// Checks a certificate against the instance it was produced for.
pub fn verify(cert: &Value, instance: &Value) -> Result<VerifyReport> {
    let kind = field(cert, "kind")?
        .as_str()
        .ok_or_else(|| Error::schema("/kind", "expected a string"))?
        .to_string();
    if cert.get("schema").and_then(Value::as_str) != Some(schema::SCHEMA) {
        return Err(Error::schema("/schema", "missing or unsupported schema"));
    }
    let (g, maps) = instance_of(instance)?;
    let blocks = blocks_of(&g)?;
    let mut r = VerifyReport {
        kind: kind.clone(),
        checks: Vec::new(),
    };
    match kind.as_str() {
        "coboundary_verdict" | "pimsner_verdict" => verify_verdict(cert, &g, &maps, &blocks, &mut r)?,
        "faithful_functional" => verify_faithful(cert, &g, &blocks, &mut r)?,
        "mf_witness" => verify_mf(cert, &g, &maps, &blocks, &mut r)?,
        "quotient" => verify_quotient(cert, &g, &maps, &blocks, &mut r)?,
        "state_preserving" => verify_state_preserving(cert, &g, &maps, &blocks, &mut r)?,
        "state_stage" => verify_stage(cert, &g, &maps, &blocks, &mut r)?,
        other => return Err(Error::schema("/kind", format!("cannot verify {other:?}"))),
    }
    Ok(r)
}

fn check_integer_form(r: &mut VerifyReport, c: &[Rational], i: &[BigInt], s: &BigInt) {
    let ok = s.is_positive() && c.iter().zip(i).all(|(a, b)| a * q(s) == q(b));
    r.check("integer form", ok, "integer coefficients are not scale × coefficients");
}

fn verify_verdict(
    cert: &Value,
    g: &OrderedGroup,
    maps: &[GroupMap],
    blocks: &[VBlock],
    r: &mut VerifyReport,
) -> Result<()> {
    let h = coboundaries(maps, g);
    let d = g.free_rank;
    match field(cert, "verdict")?.as_str() {
        Some("holds") => {
            let (f, fi, fs) = functional_of(field(cert, "functional")?, "/functional", d)?;
            check_integer_form(r, &f, &fi, &fs);
            r.check("normalized at unit", dot(&f, &g.unit.free).is_one(), "f(u) ≠ 1");
            r.check(
                "vanishes on coboundaries",
                h.iter().all(|x| dot(&f, &x.free).is_zero()),
                "f is nonzero on some coboundary",
            );
            let fm = cert.get("functional_inequality_multipliers");
            let mut pos = Ok(());
            for (b, block) in blocks.iter().enumerate() {
                for (k, part) in block.parts.iter().enumerate() {
                    if let Err(e) =
                        check_part_sign(&f, part, Sign::Strict, &Rational::zero(), multiplier(fm, 0, b, k))
                    {
                        pos = pos.and(Err(format!("block {b} part {k}: {e}")));
                    }
                }
            }
            r.check("positive on cone generators", pos.is_ok(), pos.err().unwrap_or_default());

            let stages = field(cert, "stages")?
                .as_array()
                .ok_or_else(|| Error::schema("/stages", "expected an array"))?;
            let sm = cert.get("inequality_multipliers");
            let mut removal = vec![usize::MAX; blocks.len()];
            let mut parsed = Vec::new();
            for (k, s) in stages.iter().enumerate() {
                let p = format!("/stages/{k}");
                let fk = rat_vec(
                    s.get("functional").ok_or_else(|| Error::schema(&p, "missing functional"))?,
                    &format!("{p}/functional"),
                )?;
                let margin = rat_of(
                    s.get("margin").ok_or_else(|| Error::schema(&p, "missing margin"))?,
                    &format!("{p}/margin"),
                )?;
                let removed: Vec<usize> = s
                    .get("removed_blocks")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::schema(&p, "missing removed_blocks"))?
                    .iter()
                    .map(|x| x.as_u64().map(|v| v as usize))
                    .collect::<Option<_>>()
                    .ok_or_else(|| Error::schema(format!("{p}/removed_blocks"), "expected indices"))?;
                if fk.len() != d {
                    return Err(Error::schema(format!("{p}/functional"), "wrong length"));
                }
                for &b in &removed {
                    if b >= blocks.len() || removal[b] != usize::MAX {
                        r.check("stage block bookkeeping", false, format!("block {b} removed twice or unknown"));
                        return Ok(());
                    }
                    removal[b] = k;
                }
                parsed.push((fk, margin));
            }
            r.check(
                "every block separated",
                removal.iter().all(|&k| k != usize::MAX),
                "some block is never removed",
            );
            let mut stage_ok = Ok(());
            for (k, (fk, margin)) in parsed.iter().enumerate() {
                let mut fail = |msg: String| stage_ok = stage_ok.clone().and(Err(format!("stage {k}: {msg}")));
                if !margin.is_positive() {
                    fail("margin is not positive".into());
                }
                if !h.iter().all(|x| dot(fk, &x.free).is_zero()) {
                    fail("does not vanish on coboundaries".into());
                }
                for (b, block) in blocks.iter().enumerate() {
                    if removal[b] < k {
                        continue;
                    }
                    if !block.floating.iter().all(|&i| fk[i].is_zero()) {
                        fail(format!("nonzero on floating coordinates of block {b}"));
                    }
                    let sign = if removal[b] == k { Sign::Strict } else { Sign::Nonneg };
                    for (p, part) in block.parts.iter().enumerate() {
                        if let Err(e) = check_part_sign(fk, part, sign, margin, multiplier(sm, k, b, p)) {
                            fail(format!("block {b} part {p}: {e}"));
                        }
                    }
                }
            }
            r.check("lexicographic separation", stage_ok.is_ok(), stage_ok.err().unwrap_or_default());
            if cert.get("faithful").and_then(Value::as_bool) == Some(true) {
                let float_ok = blocks.iter().all(|b| b.floating.iter().all(|&i| f[i].is_zero()));
                r.check("faithful claim", stages.len() <= 1 && float_ok, "faithfulness not certified");
            }
        }
        Some("fails") => {
            let x = element_of(field(cert, "element")?, "/element", g)?;
            let c = int_vec(field(cert, "combination")?, "/combination")?;
            if c.len() != h.len() {
                r.check("combination length", false, format!("{} coefficients for {} generators", c.len(), h.len()));
                return Ok(());
            }
            let mut sum = GroupElement {
                free: vec![BigInt::zero(); d],
                torsion: vec![BigInt::zero(); g.torsion.len()],
            };
            for (hk, ck) in h.iter().zip(&c) {
                for (a, b) in sum.free.iter_mut().zip(&hk.free) {
                    *a += ck * b;
                }
                for (a, b) in sum.torsion.iter_mut().zip(&hk.torsion) {
                    *a += ck * b;
                }
            }
            let sum = reduce(&sum, &g.torsion);
            r.check("element is the stated combination", sum == x, "combination does not match");
            let w = check_witness(blocks, &x, field(cert, "positivity_witness")?);
            r.check("element is positive and nonzero", w.is_ok(), w.err().unwrap_or_default());
            if let Some(p) = cert.get("preimage").filter(|v| !v.is_null()) {
                let y = element_of(p, "/preimage", g)?;
                let ok = maps.len() == 1 && minus(&y, &apply(&maps[0], &y, &g.torsion), &g.torsion) == x;
                r.check("preimage", ok, "x − Hx differs from the element");
            }
        }
        _ => return Err(Error::schema("/verdict", "expected \"holds\" or \"fails\"")),
    }
    Ok(())
}

fn verify_faithful(cert: &Value, g: &OrderedGroup, blocks: &[VBlock], r: &mut VerifyReport) -> Result<()> {
    let (f, fi, fs) = functional_of(field(cert, "functional")?, "/functional", g.free_rank)?;
    check_integer_form(r, &f, &fi, &fs);
    r.check("normalized at unit", dot(&f, &g.unit.free).is_one(), "f(u) ≠ 1");
    r.check(
        "zero on floating coordinates",
        blocks.iter().all(|b| b.floating.iter().all(|&i| f[i].is_zero())),
        "nonzero on a floating coordinate",
    );
    let m = cert.get("inequality_multipliers");
    let mut pos = Ok(());
    for (b, block) in blocks.iter().enumerate() {
        for (k, part) in block.parts.iter().enumerate() {
            if let Err(e) = check_part_sign(&f, part, Sign::Strict, &Rational::zero(), multiplier(m, 0, b, k)) {
                pos = pos.and(Err(format!("block {b} part {k}: {e}")));
            }
        }
    }
    r.check("strictly positive on the cone", pos.is_ok(), pos.err().unwrap_or_default());
    Ok(())
}

fn elements(cert: &Value, key: &str, g: &OrderedGroup) -> Result<Vec<GroupElement>> {
    field(cert, key)?
        .as_array()
        .ok_or_else(|| Error::schema(format!("/{key}"), "expected an array"))?
        .iter()
        .enumerate()
        .map(|(i, x)| element_of(x, &format!("/{key}/{i}"), g))
        .collect()
}

fn verify_mf(
    cert: &Value,
    g: &OrderedGroup,
    maps: &[GroupMap],
    blocks: &[VBlock],
    r: &mut VerifyReport,
) -> Result<()> {
    let (mu, mi, ms) = functional_of(field(cert, "mu")?, "/mu", g.free_rank)?;
    check_integer_form(r, &mu, &mi, &ms);
    let set = elements(cert, "set", g)?;
    let values = int_vec(field(cert, "values")?, "/values")?;
    let ev = |x: &GroupElement| x.free.iter().zip(&mi).fold(BigInt::zero(), |acc, (a, b)| acc + a * b);
    r.check(
        "values",
        values.len() == set.len() && set.iter().zip(&values).all(|(s, v)| &ev(s) == v && v >= &BigInt::one()),
        "μ(s) differs from the listed value or is below 1",
    );
    let ws = field(cert, "positivity_witnesses")?.as_array().cloned().unwrap_or_default();
    let mut pos = Ok(());
    for (i, s) in set.iter().enumerate() {
        if let Err(e) = check_witness(blocks, s, ws.get(i).unwrap_or(&Value::Null)) {
            pos = pos.and(Err(format!("set element {i}: {e}")));
        }
    }
    r.check("set is positive", pos.is_ok(), pos.err().unwrap_or_default());
    r.check(
        "orbit constant",
        maps.iter().all(|m| set.iter().all(|s| ev(&apply(m, s, &g.torsion)) == ev(s))),
        "μ changes along an orbit",
    );
    let invariant = maps.iter().all(|m| {
        (0..g.free_rank).all(|j| (0..g.free_rank).fold(BigInt::zero(), |acc, i| acc + &mi[i] * m.free.get(i, j)) == mi[j])
    });
    r.check("μ·A = μ for every generator", invariant, "μ is not invariant");
    Ok(())
}

fn verify_quotient(
    cert: &Value,
    g: &OrderedGroup,
    maps: &[GroupMap],
    blocks: &[VBlock],
    r: &mut VerifyReport,
) -> Result<()> {
    let pres = field(cert, "presentation")?;
    let d = g.free_rank;
    let t = g.torsion.len();
    let lf = pres
        .get("free_rank")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::schema("/presentation/free_rank", "expected an integer"))? as usize;
    let inv = int_vec(field(pres, "torsion_invariants")?, "/presentation/torsion_invariants")?;
    let pf = schema::matrix_of(field(pres, "free_projection")?, "/presentation/free_projection", lf, d + t)?;
    let pt = schema::matrix_of(
        field(pres, "torsion_projection")?,
        "/presentation/torsion_projection",
        inv.len(),
        d + t,
    )?;
    let project = |x: &GroupElement| -> GroupElement {
        let c: Vec<BigInt> = x.free.iter().chain(&x.torsion).cloned().collect();
        let f = pf.mul_vec(&c);
        let tt = pt.mul_vec(&c);
        reduce(&GroupElement { free: f, torsion: tt }, &inv)
    };
    r.check("invariants ≥ 2", inv.iter().all(|m| m >= &BigInt::from(2)), "bad invariant");
    // well defined on the torsion of G
    let wd = (0..t).all(|j| {
        let mut e = vec![BigInt::zero(); d + t];
        e[d + j] = g.torsion[j].clone();
        pf.mul_vec(&e).iter().all(Zero::is_zero)
            && pt.mul_vec(&e).iter().zip(&inv).all(|(a, m)| modulo(a, m).is_zero())
    });
    r.check("projection is well defined", wd, "torsion relations do not map to zero");
    let h = coboundaries(maps, g);
    r.check(
        "coboundaries map to zero",
        h.iter().all(|x| {
            let p = project(x);
            p.free.iter().all(Zero::is_zero) && p.torsion.iter().all(Zero::is_zero)
        }),
        "some coboundary survives",
    );
    let hrank = rank(&h.iter().map(|x| x.free.iter().map(q).collect()).collect::<Vec<_>>());
    r.check("free rank", lf + hrank == d, format!("{lf} + {hrank} ≠ {d}"));
    let lg = schema::group_of(field(cert, "group")?, "/group")?;
    r.check("unit maps to unit", project(&g.unit) == lg.unit, "unit image differs");
    let lblocks = blocks_of(&lg)?;
    let mut listed: Vec<Vec<BigInt>> = Vec::new();
    for b in &lblocks {
        for p in &b.parts {
            match &p.part {
                Part::Generators(gs) => listed.extend(gs.iter().cloned()),
                Part::Simplicial => listed.extend((0..p.coords.len()).map(|i| {
                    let mut v = vec![BigInt::zero(); p.coords.len()];
                    v[i] = BigInt::one();
                    v
                })),
                Part::Inequalities(_) => {}
            }
        }
    }
    let mut images_ok = true;
    for block in blocks {
        for part in &block.parts {
            let gens: Vec<Vec<BigInt>> = match &part.part {
                Part::Simplicial => (0..part.coords.len())
                    .map(|i| {
                        let mut v = vec![BigInt::zero(); part.coords.len()];
                        v[i] = BigInt::one();
                        v
                    })
                    .collect(),
                Part::Generators(gs) => gs.clone(),
                Part::Inequalities(_) => continue,
            };
            for lg_ in gens {
                let mut x = GroupElement {
                    free: vec![BigInt::zero(); d],
                    torsion: vec![BigInt::zero(); t],
                };
                for (c, v) in part.coords.iter().zip(&lg_) {
                    x.free[*c] = v.clone();
                }
                let img = project(&x).free;
                let k = listed.first().map_or(0, Vec::len);
                let head = primitive_of(&img[..k.min(img.len())]);
                if head.iter().any(|v| !v.is_zero()) && !listed.contains(&head) {
                    images_ok = false;
                }
            }
        }
    }
    r.check("cone generators map into the listed cone", images_ok, "an image generator is not listed");
    Ok(())
}

fn residuals(f: &[Rational], maps: &[GroupMap]) -> Vec<Vec<Rational>> {
    maps.iter()
        .map(|m| {
            (0..f.len())
                .map(|j| {
                    (0..f.len()).fold(Rational::zero(), |acc, i| acc + &f[i] * q(m.free.get(i, j))) - &f[j]
                })
                .collect()
        })
        .collect()
}

fn declared_residuals(v: Option<&Value>, path: &str) -> Result<Vec<Vec<Rational>>> {
    match v {
        None | Some(Value::Null) => Ok(Vec::new()),
        Some(a) => a
            .as_array()
            .ok_or_else(|| Error::schema(path, "expected an array"))?
            .iter()
            .enumerate()
            .map(|(i, x)| rat_vec(x, &format!("{path}/{i}")))
            .collect(),
    }
}

fn verify_state_preserving(
    cert: &Value,
    g: &OrderedGroup,
    maps: &[GroupMap],
    blocks: &[VBlock],
    r: &mut VerifyReport,
) -> Result<()> {
    let d = g.free_rank;
    let (f, fi, fs) = functional_of(field(cert, "functional")?, "/functional", d)?;
    check_integer_form(r, &f, &fi, &fs);
    let beta = rat_vec(field(cert, "beta")?, "/beta")?;
    let eps = rat_of(field(cert, "epsilon")?, "/epsilon")?;
    let set = elements(cert, "set", g)?;
    r.check("normalized at unit", dot(&f, &g.unit.free).is_one(), "λ(u) ≠ 1");
    if beta.len() != d {
        return Err(Error::schema("/beta", "wrong length"));
    }
    let devs: Vec<Rational> = set.iter().map(|s| (dot(&f, &s.free) - dot(&beta, &s.free)).abs()).collect();
    r.check(
        "within tolerance on the set",
        devs.iter().all(|x| x <= &eps),
        "|λ(s) − β(s)| exceeds ε",
    );
    let transcript = field(cert, "transcript")?;
    let declared = rat_vec(field(transcript, "deviations")?, "/transcript/deviations")?;
    r.check("deviations match", declared == devs, "declared deviations differ");
    let ws = field(cert, "positivity_witnesses")?.as_array().cloned().unwrap_or_default();
    let mut pos = Ok(());
    for (i, s) in set.iter().enumerate() {
        match ws.get(i) {
            Some(w) if !w.is_null() => match check_witness(blocks, s, w) {
                Ok(()) if dot(&f, &s.free).is_positive() => {}
                Ok(()) => pos = pos.and(Err(format!("λ vanishes on positive element {i}"))),
                Err(e) => pos = pos.and(Err(format!("element {i}: {e}"))),
            },
            _ => {}
        }
    }
    r.check("positive on positive set elements", pos.is_ok(), pos.err().unwrap_or_default());
    let res = residuals(&f, maps);
    r.check(
        "invariant",
        res.iter().flatten().all(Zero::is_zero),
        "λ·A ≠ λ for some generator",
    );
    let declared = declared_residuals(transcript.get("invariance_residuals"), "/transcript/invariance_residuals")?;
    r.check(
        "residuals match",
        declared.is_empty() && maps.is_empty() || declared == res,
        "declared residuals differ",
    );
    Ok(())
}

fn verify_stage(
    cert: &Value,
    g: &OrderedGroup,
    maps: &[GroupMap],
    blocks: &[VBlock],
    r: &mut VerifyReport,
) -> Result<()> {
    let (f, fi, fs) = functional_of(field(cert, "functional")?, "/functional", g.free_rank)?;
    check_integer_form(r, &f, &fi, &fs);
    let els = elements(cert, "elements", g)?;
    let values = rat_vec(field(cert, "values")?, "/values")?;
    r.check(
        "first element is the unit",
        els.first() == Some(&reduce(&g.unit, &g.torsion)),
        "x₀ ≠ u",
    );
    r.check("normalized at unit", dot(&f, &g.unit.free).is_one(), "λ(u) ≠ 1");
    r.check(
        "values",
        values.len() == els.len() && els.iter().zip(&values).all(|(x, v)| &dot(&f, &x.free) == v),
        "listed values differ from λ",
    );
    let ws = field(cert, "positivity_witnesses")?.as_array().cloned().unwrap_or_default();
    let mut pos = Ok(());
    for (i, x) in els.iter().enumerate() {
        if let Err(e) = check_witness(blocks, x, ws.get(i).unwrap_or(&Value::Null)) {
            pos = pos.and(Err(format!("element {i}: {e}")));
        } else if !dot(&f, &x.free).is_positive() {
            pos = pos.and(Err(format!("λ(x_{i}) ≤ 0")));
        }
    }
    r.check("positive on the enumerated elements", pos.is_ok(), pos.err().unwrap_or_default());
    let declared = declared_residuals(cert.get("invariance_residuals"), "/invariance_residuals")?;
    r.check(
        "residuals match",
        declared.is_empty() && maps.is_empty() || declared == residuals(&f, maps),
        "declared residuals differ",
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::faithful_functional;
    use crate::dynamics::{check_coboundary, check_pimsner, mf_witness, FreeGroupAction};
    use crate::lattice::IntMatrix;
    use crate::schema::{action_json, endomorphism_json, faithful_json, group_json, verdict_json, witness_json};

    fn swap() -> (OrderedGroup, FreeGroupAction) {
        (
            OrderedGroup::simplicial(&[1, 1]),
            FreeGroupAction::from_matrices(vec![IntMatrix::from_i64(&[&[0, 1], &[1, 0]])], 0),
        )
    }

    #[test]
    fn holds_certificate_verifies() {
        let (g, a) = swap();
        let v = check_coboundary(&a, &g).unwrap();
        let cert = verdict_json("coboundary_verdict", &v, &g).unwrap();
        let rep = verify(&cert, &action_json(&g, &a)).unwrap();
        assert!(rep.ok(), "{rep:?}");
    }

    #[test]
    fn tampered_functional_is_rejected() {
        let (g, a) = swap();
        let v = check_coboundary(&a, &g).unwrap();
        let mut cert = verdict_json("coboundary_verdict", &v, &g).unwrap();
        cert["functional"]["coefficients"] = serde_json::json!(["1", "0"]);
        cert["functional"]["integer"] = serde_json::json!([1, 0]);
        cert["functional"]["scale"] = serde_json::json!(1);
        assert!(!verify(&cert, &action_json(&g, &a)).unwrap().ok());
    }

    #[test]
    fn fails_certificate_verifies() {
        let g = OrderedGroup::simplicial(&[1, 0]);
        let a = FreeGroupAction::from_matrices(vec![IntMatrix::from_i64(&[&[1, 1], &[0, 1]])], 0);
        let v = check_coboundary(&a, &g).unwrap();
        assert!(!v.holds());
        let cert = verdict_json("coboundary_verdict", &v, &g).unwrap();
        let rep = verify(&cert, &action_json(&g, &a)).unwrap();
        assert!(rep.ok(), "{rep:?}");
    }

    #[test]
    fn pimsner_preimage_verifies() {
        let g = OrderedGroup::simplicial(&[1]);
        let h = GroupMap::free_only(IntMatrix::from_i64(&[&[2]]), 0);
        let v = check_pimsner(&h, &g).unwrap();
        let cert = verdict_json("pimsner_verdict", &v, &g).unwrap();
        let rep = verify(&cert, &endomorphism_json(&g, &h)).unwrap();
        assert!(rep.ok(), "{rep:?}");
    }

    #[test]
    fn faithful_and_mf_verify() {
        let g = OrderedGroup::new(
            2,
            vec![],
            ConeSpec::Inequalities(vec![
                vec![Rational::from_integer(1.into()), Rational::from_integer(0.into())],
                vec![Rational::from_integer((-1).into()), Rational::from_integer(2.into())],
            ]),
            GroupElement::from_i64(&[1, 1], &[]),
        );
        let f = faithful_functional(&g).unwrap();
        let rep = verify(&faithful_json(&f, &g).unwrap(), &group_json(&g)).unwrap();
        assert!(rep.ok(), "{rep:?}");

        let (g, a) = swap();
        let w = mf_witness(&a, &g, None).unwrap();
        let rep = verify(&witness_json(&w, &g).unwrap(), &action_json(&g, &a)).unwrap();
        assert!(rep.ok(), "{rep:?}");
    }
}

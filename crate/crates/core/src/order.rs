//! Finitely generated ordered abelian groups `(K, K⁺, u)`.
//!
//! `K = ℤ^d ⊕ ℤ/t₁ ⊕ … ⊕ ℤ/tₖ`. The positive cone is described by a
//! [`ConeSpec`] and compiled into a [`PositiveCone`]: a product of blocks,
//! each owning some free coordinates and some torsion coordinates. A block's
//! free coordinates split into *base* coordinates, which carry a pointed
//! rational polyhedral cone, and *floating* coordinates, which are
//! unconstrained. An element is positive iff in every block its component is
//! either entirely zero or has a nonzero base part lying in the rational cone.
//!
//! Positivity is the rational relaxation: a lattice point of the rational
//! cone is positive even when it is not a nonnegative integer combination of
//! the listed generators. Torsion coordinates always float, so the only
//! positive pure-torsion element is zero.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{is_zero_vec, primitive, rat_int, Deadline, Rational};
use crate::error::{Error, Result};
use crate::lattice::{hermite_basis, integer_kernel, IntMatrix};
use crate::lp::{Outcome, Problem, Relation};

/// Element of `ℤ^d ⊕ ⊕ℤ/tᵢ`; torsion residues are kept reduced.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    pub free: Vec<BigInt>,
    pub torsion: Vec<BigInt>,
}

impl GroupElement {
    pub fn new(free: Vec<BigInt>, torsion: Vec<BigInt>) -> Self {
        GroupElement { free, torsion }
    }

    pub fn free_only(free: Vec<BigInt>) -> Self {
        GroupElement {
            free,
            torsion: Vec::new(),
        }
    }

    pub fn zero(free_rank: usize, torsion_len: usize) -> Self {
        GroupElement {
            free: vec![BigInt::zero(); free_rank],
            torsion: vec![BigInt::zero(); torsion_len],
        }
    }

    pub fn from_i64(free: &[i64], torsion: &[i64]) -> Self {
        GroupElement {
            free: free.iter().map(|&x| BigInt::from(x)).collect(),
            torsion: torsion.iter().map(|&x| BigInt::from(x)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        is_zero_vec(&self.free) && is_zero_vec(&self.torsion)
    }

    pub fn reduced(mut self, invariants: &[BigInt]) -> Self {
        for (x, m) in self.torsion.iter_mut().zip(invariants) {
            *x = x.mod_floor(m);
        }
        self
    }

    pub fn add(&self, other: &GroupElement, invariants: &[BigInt]) -> GroupElement {
        GroupElement {
            free: self.free.iter().zip(&other.free).map(|(a, b)| a + b).collect(),
            torsion: self.torsion.iter().zip(&other.torsion).map(|(a, b)| a + b).collect(),
        }
        .reduced(invariants)
    }

    pub fn sub(&self, other: &GroupElement, invariants: &[BigInt]) -> GroupElement {
        self.add(&other.scale(&-BigInt::one(), invariants), invariants)
    }

    pub fn scale(&self, k: &BigInt, invariants: &[BigInt]) -> GroupElement {
        GroupElement {
            free: self.free.iter().map(|a| a * k).collect(),
            torsion: self.torsion.iter().map(|a| a * k).collect(),
        }
        .reduced(invariants)
    }

    /// Free coordinates followed by torsion residues.
    pub fn coords(&self) -> Vec<BigInt> {
        self.free.iter().chain(&self.torsion).cloned().collect()
    }
}

/// One factor of a product cone: the listed free and torsion coordinates of
/// the ambient group, ordered with a cone spec in those local coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductFactor {
    pub free: Vec<usize>,
    pub torsion: Vec<usize>,
    pub cone: ConeSpec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConeSpec {
    /// Coordinatewise nonnegative free part.
    Simplicial,
    /// Rational cone spanned by the free parts of the listed elements.
    Generators(Vec<GroupElement>),
    /// `x ≥ 0` iff `B · x_free ≥ 0` componentwise.
    Inequalities(Vec<Vec<Rational>>),
    /// Positive iff the first `degree0_rank` free coordinates form a nonzero
    /// element of `base`, or the whole element is zero.
    StrictGraded {
        degree0_rank: usize,
        base: Box<ConeSpec>,
    },
    /// Componentwise product of factor cones.
    Product(Vec<ProductFactor>),
}

impl ConeSpec {
    fn type_name(&self) -> &'static str {
        match self {
            ConeSpec::Simplicial => "simplicial",
            ConeSpec::Generators(_) => "generators",
            ConeSpec::Inequalities(_) => "inequalities",
            ConeSpec::StrictGraded { .. } => "strict_graded",
            ConeSpec::Product(_) => "product",
        }
    }
}

/// Block split of a `ℤ/2`-graded group. Free coordinates are laid out as
/// degree 0 then degree 1, and likewise the torsion coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grading {
    pub k0_free: usize,
    pub k0_torsion: usize,
    pub k1_free: usize,
    pub k1_torsion: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedGroup {
    pub free_rank: usize,
    pub torsion: Vec<BigInt>,
    pub cone: ConeSpec,
    pub unit: GroupElement,
    pub grading: Option<Grading>,
    /// Declared scale elements; recorded, never enforced.
    pub scale: Vec<GroupElement>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartKind {
    Simplicial,
    Generators,
    Inequalities(Vec<Vec<Rational>>),
}

/// A closed polyhedral factor of a block's base cone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConePart {
    /// Global free coordinates.
    pub coords: Vec<usize>,
    pub kind: PartKind,
    /// Primitive generators in local coordinates (extreme rays for
    /// inequality parts).
    pub generators: Vec<Vec<BigInt>>,
}

impl ConePart {
    fn contains(&self, x: &[BigInt], deadline: &Deadline) -> Result<bool> {
        Ok(match &self.kind {
            PartKind::Simplicial => x.iter().all(|v| !v.is_negative()),
            PartKind::Inequalities(rows) => rows
                .iter()
                .all(|r| !crate::arith::dot_qi(r, x).is_negative()),
            PartKind::Generators => self.weights(x, deadline)?.is_some(),
        })
    }

    /// Nonnegative weights `t` with `Σ tⱼ gⱼ = x`.
    pub fn weights(&self, x: &[BigInt], deadline: &Deadline) -> Result<Option<Vec<Rational>>> {
        if is_zero_vec(x) {
            return Ok(Some(vec![Rational::zero(); self.generators.len()]));
        }
        let mut p = Problem::new();
        let vars: Vec<usize> = self.generators.iter().map(|_| p.nonneg()).collect();
        for (i, xi) in x.iter().enumerate() {
            let row = vars
                .iter()
                .zip(&self.generators)
                .map(|(&v, g)| (v, rat_int(&g[i])))
                .collect();
            p.constrain(row, Relation::Eq, rat_int(xi));
        }
        Ok(match p.solve(deadline)? {
            Outcome::Optimal { values, .. } => Some(values),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub parts: Vec<ConePart>,
    pub floating: Vec<usize>,
    pub torsion: Vec<usize>,
}

impl Block {
    /// Global base coordinates, part by part.
    pub fn base(&self) -> Vec<usize> {
        self.parts.iter().flat_map(|p| p.coords.iter().copied()).collect()
    }

    pub fn is_closed(&self) -> bool {
        self.floating.is_empty() && self.torsion.is_empty()
    }

    /// Generators embedded into the full free coordinates.
    pub fn embedded_generators(&self, free_rank: usize) -> Vec<Vec<BigInt>> {
        let mut out = Vec::new();
        for part in &self.parts {
            for g in &part.generators {
                let mut v = vec![BigInt::zero(); free_rank];
                for (c, x) in part.coords.iter().zip(g) {
                    v[*c] = x.clone();
                }
                out.push(v);
            }
        }
        out
    }

    fn component_is_zero(&self, x: &GroupElement) -> bool {
        self.base().iter().chain(&self.floating).all(|&i| x.free[i].is_zero())
            && self.torsion.iter().all(|&i| x.torsion[i].is_zero())
    }
}

/// Compiled positive cone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositiveCone {
    pub free_rank: usize,
    pub torsion_len: usize,
    pub blocks: Vec<Block>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Positivity {
    Zero,
    Positive,
    NotPositive,
}

/// Per-block evidence that an element is positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlockWitness {
    Zero,
    /// Generator weights for each generator-type part; `None` for parts whose
    /// membership is checked directly.
    Positive(Vec<Option<Vec<Rational>>>),
}

impl PositiveCone {
    pub fn generators(&self) -> Vec<GroupElement> {
        self.blocks
            .iter()
            .flat_map(|b| b.embedded_generators(self.free_rank))
            .map(|f| GroupElement::new(f, vec![BigInt::zero(); self.torsion_len]))
            .collect()
    }

    /// Indices of floating free coordinates across all blocks.
    pub fn floating(&self) -> Vec<usize> {
        self.blocks.iter().flat_map(|b| b.floating.iter().copied()).collect()
    }

    pub fn classify(&self, x: &GroupElement, deadline: &Deadline) -> Result<Positivity> {
        Ok(match self.witness(x, deadline)? {
            None => Positivity::NotPositive,
            Some(_) if x.is_zero() => Positivity::Zero,
            Some(_) => Positivity::Positive,
        })
    }

    /// Positivity evidence per block, or `None` when `x ∉ K⁺`.
    pub fn witness(&self, x: &GroupElement, deadline: &Deadline) -> Result<Option<Vec<BlockWitness>>> {
        let mut out = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            if b.component_is_zero(x) {
                out.push(BlockWitness::Zero);
                continue;
            }
            let base = b.base();
            if base.iter().all(|&i| x.free[i].is_zero()) {
                return Ok(None);
            }
            let mut parts = Vec::with_capacity(b.parts.len());
            for part in &b.parts {
                let local: Vec<BigInt> = part.coords.iter().map(|&i| x.free[i].clone()).collect();
                match part.kind {
                    PartKind::Generators => match part.weights(&local, deadline)? {
                        Some(w) => parts.push(Some(w)),
                        None => return Ok(None),
                    },
                    _ => {
                        if !part.contains(&local, deadline)? {
                            return Ok(None);
                        }
                        parts.push(None);
                    }
                }
            }
            out.push(BlockWitness::Positive(parts));
        }
        Ok(Some(out))
    }
}

fn local_spec_error(msg: impl Into<String>) -> Error {
    Error::InvalidPresentation(msg.into())
}

/// Extreme rays of the pointed cone `{x : B x ≥ 0}` in `ℚ^dim`.
pub fn extreme_rays(rows: &[Vec<Rational>], dim: usize) -> Result<Vec<Vec<BigInt>>> {
    let int_rows: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| {
            if r.len() != dim {
                return Err(local_spec_error(format!(
                    "inequality row has length {}, expected {dim}",
                    r.len()
                )));
            }
            Ok(crate::arith::clear_vector(r).0)
        })
        .collect::<Result<_>>()?;
    if dim == 0 {
        return Ok(Vec::new());
    }
    if IntMatrix::from_rows(&int_rows).rank() < dim {
        return Err(Error::ConeNotPointed);
    }
    let satisfies = |v: &[BigInt]| {
        int_rows
            .iter()
            .all(|r| !crate::arith::dot_ii(r, v).is_negative())
    };
    let mut rays: Vec<Vec<BigInt>> = Vec::new();
    let mut push = |v: Vec<BigInt>| {
        let v = primitive(&v);
        if !rays.contains(&v) {
            rays.push(v);
        }
    };
    if dim == 1 {
        for s in [1i64, -1] {
            let v = vec![BigInt::from(s)];
            if satisfies(&v) {
                push(v);
            }
        }
        return Ok(rays);
    }
    let m = int_rows.len();
    let k = dim - 1;
    if binomial(m, k) > 200_000 {
        return Err(Error::Unsupported(format!(
            "ray enumeration over {m} inequalities in dimension {dim}"
        )));
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let sub: Vec<Vec<BigInt>> = idx.iter().map(|&i| int_rows[i].clone()).collect();
        let ker = integer_kernel(&IntMatrix::from_rows(&sub));
        if ker.rank() == 1 {
            let r = ker.vectors().remove(0);
            let neg: Vec<BigInt> = r.iter().map(|x| -x).collect();
            if satisfies(&r) {
                push(r);
            } else if satisfies(&neg) {
                push(neg);
            }
        }
        // next combination
        let mut i = k;
        loop {
            if i == 0 {
                rays.sort();
                return Ok(rays);
            }
            i -= 1;
            if idx[i] < m - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc * (n as u128 - i) / (i + 1);
    }
    acc
}

/// Compiles a closed (non-graded, non-product) spec on the given coordinates.
fn compile_part(spec: &ConeSpec, coords: &[usize], local_torsion: usize) -> Result<ConePart> {
    let dim = coords.len();
    match spec {
        ConeSpec::Simplicial => Ok(ConePart {
            coords: coords.to_vec(),
            kind: PartKind::Simplicial,
            generators: (0..dim)
                .map(|i| {
                    let mut v = vec![BigInt::zero(); dim];
                    v[i] = BigInt::one();
                    v
                })
                .collect(),
        }),
        ConeSpec::Generators(gens) => {
            if gens.is_empty() {
                return Err(local_spec_error("generator cone with no generators"));
            }
            let mut out: Vec<Vec<BigInt>> = Vec::new();
            for g in gens {
                if g.free.len() != dim || g.torsion.len() > local_torsion {
                    return Err(local_spec_error(format!(
                        "generator has {} free coordinates, expected {dim}",
                        g.free.len()
                    )));
                }
                if is_zero_vec(&g.free) {
                    if !is_zero_vec(&g.torsion) {
                        return Err(local_spec_error(
                            "a nonzero pure-torsion element is declared positive",
                        ));
                    }
                    continue;
                }
                let p = primitive(&g.free);
                if !out.contains(&p) {
                    out.push(p);
                }
            }
            Ok(ConePart {
                coords: coords.to_vec(),
                kind: PartKind::Generators,
                generators: out,
            })
        }
        ConeSpec::Inequalities(rows) => Ok(ConePart {
            coords: coords.to_vec(),
            kind: PartKind::Inequalities(rows.clone()),
            generators: extreme_rays(rows, dim)?,
        }),
        other => Err(local_spec_error(format!(
            "{} cone cannot appear inside a strict graded base",
            other.type_name()
        ))),
    }
}

fn compile_into(
    spec: &ConeSpec,
    free: &[usize],
    torsion: &[usize],
    out: &mut Vec<Block>,
) -> Result<()> {
    match spec {
        ConeSpec::StrictGraded { degree0_rank, base } => {
            if *degree0_rank > free.len() {
                return Err(local_spec_error(format!(
                    "degree-0 rank {degree0_rank} exceeds free rank {}",
                    free.len()
                )));
            }
            let part = compile_part(base, &free[..*degree0_rank], 0)?;
            out.push(Block {
                parts: vec![part],
                floating: free[*degree0_rank..].to_vec(),
                torsion: torsion.to_vec(),
            });
        }
        ConeSpec::Product(factors) => {
            for (k, f) in factors.iter().enumerate() {
                let gf = f
                    .free
                    .iter()
                    .map(|&i| free.get(i).copied())
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| local_spec_error(format!("factor {k} free index out of range")))?;
                let gt = f
                    .torsion
                    .iter()
                    .map(|&i| torsion.get(i).copied())
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| {
                        local_spec_error(format!("factor {k} torsion index out of range"))
                    })?;
                compile_into(&f.cone, &gf, &gt, out)?;
            }
        }
        closed => {
            let part = compile_part(closed, free, torsion.len())?;
            out.push(Block {
                parts: vec![part],
                floating: Vec::new(),
                torsion: torsion.to_vec(),
            });
        }
    }
    Ok(())
}

impl OrderedGroup {
    pub fn new(free_rank: usize, torsion: Vec<BigInt>, cone: ConeSpec, unit: GroupElement) -> Self {
        let unit = unit.reduced(&torsion);
        OrderedGroup {
            free_rank,
            torsion,
            cone,
            unit,
            grading: None,
            scale: Vec::new(),
        }
    }

    /// `(ℤ^d, ℤ^d_{≥0}, u)`.
    pub fn simplicial(unit: &[i64]) -> Self {
        OrderedGroup::new(
            unit.len(),
            Vec::new(),
            ConeSpec::Simplicial,
            GroupElement::from_i64(unit, &[]),
        )
    }

    pub fn torsion_len(&self) -> usize {
        self.torsion.len()
    }

    pub fn zero_element(&self) -> GroupElement {
        GroupElement::zero(self.free_rank, self.torsion.len())
    }

    pub fn check_element(&self, x: &GroupElement) -> Result<()> {
        if x.free.len() != self.free_rank {
            return Err(Error::DimensionMismatch {
                expected: self.free_rank,
                found: x.free.len(),
            });
        }
        if x.torsion.len() != self.torsion.len() {
            return Err(Error::DimensionMismatch {
                expected: self.torsion.len(),
                found: x.torsion.len(),
            });
        }
        Ok(())
    }

    /// Compiles the cone spec into blocks. Closed torsion-free blocks are
    /// merged into a single leading block, since a product of closed cones
    /// is closed.
    pub fn positive_cone(&self) -> Result<PositiveCone> {
        for t in &self.torsion {
            if t < &BigInt::from(2) {
                return Err(local_spec_error(format!("torsion invariant {t} is below 2")));
            }
        }
        let free: Vec<usize> = (0..self.free_rank).collect();
        let torsion: Vec<usize> = (0..self.torsion.len()).collect();
        let mut blocks = Vec::new();
        compile_into(&self.cone, &free, &torsion, &mut blocks)?;

        let mut seen_free = vec![false; self.free_rank];
        let mut seen_torsion = vec![false; self.torsion.len()];
        for b in &blocks {
            for i in b.base().into_iter().chain(b.floating.iter().copied()) {
                if std::mem::replace(&mut seen_free[i], true) {
                    return Err(local_spec_error(format!("free coordinate {i} used twice")));
                }
            }
            for &i in &b.torsion {
                if std::mem::replace(&mut seen_torsion[i], true) {
                    return Err(local_spec_error(format!("torsion coordinate {i} used twice")));
                }
            }
        }
        if let Some(i) = seen_free.iter().position(|s| !s) {
            return Err(local_spec_error(format!("free coordinate {i} not covered by the cone")));
        }
        if let Some(i) = seen_torsion.iter().position(|s| !s) {
            return Err(local_spec_error(format!(
                "torsion coordinate {i} not covered by the cone"
            )));
        }

        let (closed, open): (Vec<Block>, Vec<Block>) = blocks.into_iter().partition(Block::is_closed);
        let mut merged = Vec::new();
        if !closed.is_empty() {
            merged.push(Block {
                parts: closed.into_iter().flat_map(|b| b.parts).collect(),
                floating: Vec::new(),
                torsion: Vec::new(),
            });
        }
        merged.extend(open);
        Ok(PositiveCone {
            free_rank: self.free_rank,
            torsion_len: self.torsion.len(),
            blocks: merged,
        })
    }

    /// Runs every validation clause and reports the outcome of each.
    pub fn inspect(&self) -> Result<ValidationReport> {
        self.check_element(&self.unit)?;
        let mut report = ValidationReport::default();
        let cone = match self.positive_cone() {
            Ok(c) => c,
            Err(Error::ConeNotPointed) => {
                report.pointed = false;
                report.violations.push("positive cone is not pointed".into());
                return Ok(report);
            }
            Err(Error::InvalidPresentation(m)) if m.contains("pure-torsion") => {
                report.no_torsion_positives = false;
                report.violations.push(m);
                return Ok(report);
            }
            Err(e) => return Err(e),
        };
        let deadline = Deadline::none();

        for (k, b) in cone.blocks.iter().enumerate() {
            for part in &b.parts {
                if let Some(f) = strictly_positive_functional(&part.generators, &deadline)? {
                    report.pointedness_functionals.push(f);
                } else {
                    report.pointed = false;
                    report
                        .violations
                        .push(format!("block {k}: cone contains a line (not pointed)"));
                }
                let rank = if part.generators.is_empty() {
                    0
                } else {
                    IntMatrix::from_columns(&part.generators, part.coords.len()).rank()
                };
                if rank < part.coords.len() {
                    report.generating = false;
                    report.violations.push(format!(
                        "block {k}: cone spans rank {rank} of {} coordinates",
                        part.coords.len()
                    ));
                }
            }
        }
        if !report.pointed {
            return Ok(report);
        }

        match cone.classify(&self.unit, &deadline)? {
            Positivity::Positive => {}
            _ => {
                report.unit_positive = false;
                report.order_unit = false;
                report.violations.push("unit is not a nonzero positive element".into());
                return Ok(report);
            }
        }

        // n·u − g ∈ cone for every generator g
        for b in &cone.blocks {
            let base = b.base();
            let u_base: Vec<BigInt> = base.iter().map(|&i| self.unit.free[i].clone()).collect();
            let gens = b.embedded_generators(self.free_rank);
            let local_gens: Vec<Vec<BigInt>> = gens
                .iter()
                .map(|g| base.iter().map(|&i| g[i].clone()).collect())
                .collect();
            for (g, lg) in gens.iter().zip(&local_gens) {
                match order_unit_multiple(&u_base, lg, &local_gens, &deadline)? {
                    Some(n) => report.order_unit_witnesses.push((
                        GroupElement::new(g.clone(), vec![BigInt::zero(); self.torsion.len()]),
                        n,
                    )),
                    None => {
                        if report.order_unit {
                            report
                                .violations
                                .push("unit is not an order unit for the cone".into());
                        }
                        report.order_unit = false;
                    }
                }
            }
        }
        Ok(report)
    }

    /// Full validation: every clause, including the order-unit property.
    pub fn validate(&self) -> Result<ValidationReport> {
        let report = self.inspect()?;
        match report.violations.first() {
            Some(v) => Err(Error::InvalidPresentation(v.clone())),
            None => Ok(report),
        }
    }

    /// Validation of everything the decision procedures rely on: a pointed,
    /// generating cone with no torsion positives and a nonzero positive unit.
    /// The order-unit clause is reported but not enforced.
    pub fn validate_structure(&self) -> Result<ValidationReport> {
        let report = self.inspect()?;
        if report.pointed && report.generating && report.no_torsion_positives && report.unit_positive
        {
            Ok(report)
        } else {
            Err(Error::InvalidPresentation(report.violations[0].clone()))
        }
    }

    pub fn is_positive(&self, x: &GroupElement) -> Result<Positivity> {
        self.check_element(x)?;
        let x = x.clone().reduced(&self.torsion);
        self.positive_cone()?.classify(&x, &Deadline::none())
    }

    pub fn cone_generators(&self) -> Result<Vec<GroupElement>> {
        Ok(self.positive_cone()?.generators())
    }
}

/// `f` with `f · g ≥ 1` for every generator, if the cone is pointed.
fn strictly_positive_functional(
    gens: &[Vec<BigInt>],
    deadline: &Deadline,
) -> Result<Option<Vec<Rational>>> {
    let dim = gens.first().map_or(0, |g| g.len());
    let mut p = Problem::new();
    let f: Vec<usize> = (0..dim).map(|_| p.free()).collect();
    for g in gens {
        let row = f.iter().zip(g).map(|(&v, x)| (v, rat_int(x))).collect();
        p.constrain(row, Relation::Ge, Rational::one());
    }
    Ok(p.solve(deadline)?.values().map(|v| v.to_vec()))
}

/// Least `n ≥ 0` with `n·u − g` in the cone spanned by `gens`.
fn order_unit_multiple(
    u: &[BigInt],
    g: &[BigInt],
    gens: &[Vec<BigInt>],
    deadline: &Deadline,
) -> Result<Option<Rational>> {
    let mut p = Problem::new();
    let n = p.nonneg();
    let t: Vec<usize> = gens.iter().map(|_| p.nonneg()).collect();
    for i in 0..u.len() {
        let mut row = vec![(n, rat_int(&u[i]))];
        for (&tv, gen) in t.iter().zip(gens) {
            row.push((tv, -rat_int(&gen[i])));
        }
        p.constrain(row, Relation::Eq, rat_int(&g[i]));
    }
    p.minimize(vec![(n, Rational::one())]);
    Ok(match p.solve(deadline)? {
        Outcome::Optimal { values, .. } => Some(values[n].clone()),
        _ => None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub pointed: bool,
    pub generating: bool,
    pub no_torsion_positives: bool,
    pub unit_positive: bool,
    pub order_unit: bool,
    /// For each cone generator `g`, the least rational `n` with `n·u − g ≥ 0`.
    pub order_unit_witnesses: Vec<(GroupElement, Rational)>,
    /// Per cone part, a functional that is `≥ 1` on every generator.
    pub pointedness_functionals: Vec<Vec<Rational>>,
    pub violations: Vec<String>,
}

impl Default for ValidationReport {
    fn default() -> Self {
        ValidationReport {
            pointed: true,
            generating: true,
            no_torsion_positives: true,
            unit_positive: true,
            order_unit: true,
            order_unit_witnesses: Vec::new(),
            pointedness_functionals: Vec::new(),
            violations: Vec::new(),
        }
    }
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Positivity semantics note recorded in serialized output.
pub const POSITIVITY_SEMANTICS: &str = "rational-cone";

/// Reindexes a cone spec living on `free`/`torsion` coordinates of a group
/// into factors of a larger group.
fn as_factors(g: &OrderedGroup, free_map: &[usize], torsion_map: &[usize]) -> Vec<ProductFactor> {
    match &g.cone {
        ConeSpec::Product(fs) => fs
            .iter()
            .map(|f| ProductFactor {
                free: f.free.iter().map(|&i| free_map[i]).collect(),
                torsion: f.torsion.iter().map(|&i| torsion_map[i]).collect(),
                cone: f.cone.clone(),
            })
            .collect(),
        c => vec![ProductFactor {
            free: free_map.to_vec(),
            torsion: torsion_map.to_vec(),
            cone: c.clone(),
        }],
    }
}

fn is_trivial(g: &OrderedGroup) -> bool {
    g.free_rank == 0 && g.torsion.is_empty()
}

/// Layout of the summands inside a direct sum: where each summand's free and
/// torsion coordinates land.
fn sum_layout(groups: &[&OrderedGroup]) -> (Vec<Vec<usize>>, Vec<Vec<usize>>, Option<Grading>) {
    let graded: Option<Vec<Grading>> = groups.iter().map(|g| g.grading).collect();
    let mut free_maps = Vec::new();
    let mut torsion_maps = Vec::new();
    match graded {
        Some(gs) => {
            let k0f: usize = gs.iter().map(|g| g.k0_free).sum();
            let k0t: usize = gs.iter().map(|g| g.k0_torsion).sum();
            let (mut f0, mut f1, mut t0, mut t1) = (0, k0f, 0, k0t);
            for g in &gs {
                let mut fm: Vec<usize> = (f0..f0 + g.k0_free).collect();
                fm.extend(f1..f1 + g.k1_free);
                let mut tm: Vec<usize> = (t0..t0 + g.k0_torsion).collect();
                tm.extend(t1..t1 + g.k1_torsion);
                f0 += g.k0_free;
                f1 += g.k1_free;
                t0 += g.k0_torsion;
                t1 += g.k1_torsion;
                free_maps.push(fm);
                torsion_maps.push(tm);
            }
            let grading = Grading {
                k0_free: k0f,
                k0_torsion: k0t,
                k1_free: gs.iter().map(|g| g.k1_free).sum(),
                k1_torsion: gs.iter().map(|g| g.k1_torsion).sum(),
            };
            (free_maps, torsion_maps, Some(grading))
        }
        None => {
            let (mut f, mut t) = (0, 0);
            for g in groups {
                free_maps.push((f..f + g.free_rank).collect());
                torsion_maps.push((t..t + g.torsion.len()).collect());
                f += g.free_rank;
                t += g.torsion.len();
            }
            (free_maps, torsion_maps, None)
        }
    }
}

/// Direct sum of ordered groups with the product cone and unit `Σ uᵢ`.
///
/// Graded summands stay graded: all degree-0 coordinates come first.
pub fn direct_sum_all(groups: &[&OrderedGroup]) -> OrderedGroup {
    let nontrivial: Vec<&OrderedGroup> = groups.iter().copied().filter(|g| !is_trivial(g)).collect();
    match nontrivial.len() {
        0 => return groups.first().map(|g| (*g).clone()).unwrap_or_else(trivial_group),
        1 => return nontrivial[0].clone(),
        _ => {}
    }
    let (free_maps, torsion_maps, grading) = sum_layout(&nontrivial);
    let free_rank: usize = nontrivial.iter().map(|g| g.free_rank).sum();
    let torsion_len: usize = nontrivial.iter().map(|g| g.torsion.len()).sum();

    let mut torsion = vec![BigInt::zero(); torsion_len];
    let mut unit = GroupElement::zero(free_rank, torsion_len);
    let mut scale = Vec::new();
    for ((g, fm), tm) in nontrivial.iter().zip(&free_maps).zip(&torsion_maps) {
        for (i, &j) in tm.iter().enumerate() {
            torsion[j] = g.torsion[i].clone();
            unit.torsion[j] = g.unit.torsion[i].clone();
        }
        for (i, &j) in fm.iter().enumerate() {
            unit.free[j] = g.unit.free[i].clone();
        }
        for s in &g.scale {
            let mut e = GroupElement::zero(free_rank, torsion_len);
            for (i, &j) in fm.iter().enumerate() {
                e.free[j] = s.free[i].clone();
            }
            for (i, &j) in tm.iter().enumerate() {
                e.torsion[j] = s.torsion[i].clone();
            }
            scale.push(e);
        }
    }

    let all_plain_simplicial = nontrivial
        .iter()
        .all(|g| g.cone == ConeSpec::Simplicial && g.torsion.is_empty());
    let cone = if all_plain_simplicial {
        ConeSpec::Simplicial
    } else {
        ConeSpec::Product(
            nontrivial
                .iter()
                .zip(&free_maps)
                .zip(&torsion_maps)
                .flat_map(|((g, fm), tm)| as_factors(g, fm, tm))
                .collect(),
        )
    };
    OrderedGroup {
        free_rank,
        torsion,
        cone,
        unit,
        grading,
        scale,
    }
}

pub fn direct_sum(a: &OrderedGroup, b: &OrderedGroup) -> OrderedGroup {
    direct_sum_all(&[a, b])
}

/// The zero group.
pub fn trivial_group() -> OrderedGroup {
    OrderedGroup::new(0, Vec::new(), ConeSpec::Simplicial, GroupElement::zero(0, 0))
}

/// Orders the lattice points of `ℤ^d` by max-norm, then lexicographically.
pub fn free_vectors_of_norm(d: usize, r: i64) -> Vec<Vec<BigInt>> {
    let mut out = Vec::new();
    let mut cur = vec![-r; d];
    if d == 0 {
        if r == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    loop {
        if cur.iter().any(|x| x.abs() == r) || r == 0 {
            out.push(cur.iter().map(|&x| BigInt::from(x)).collect());
        }
        let mut i = d;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < r {
                cur[i] += 1;
                for c in cur.iter_mut().skip(i + 1) {
                    *c = -r;
                }
                break;
            }
        }
    }
}

/// Basis for the rational span of the vectors, as HNF columns.
pub fn span_basis(vectors: &[Vec<BigInt>], dim: usize) -> Vec<Vec<BigInt>> {
    hermite_basis(vectors, dim).vectors()
}

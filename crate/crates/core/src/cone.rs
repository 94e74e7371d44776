//! Does a lattice meet the positive cone outside the origin?
//!
//! [`subspace_cone_intersect`] answers with either a nonzero lattice point in
//! the cone or a separation certificate. For a cone whose blocks are all
//! closed the certificate is a single functional vanishing on the lattice and
//! strictly positive on every generator. Blocks with floating coordinates
//! need a lexicographic chain of functionals: each stage rules out the blocks
//! it removes, given that earlier stages already forced the removed blocks
//! to vanish.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::arith::{clear_vector, dot_qi, lcm_of_denominators, max_abs, rat_int, Deadline, Rational};
use crate::error::{Error, Result};
use crate::lp::{Outcome, Problem, Relation};
use crate::order::{GroupElement, OrderedGroup, PositiveCone};

/// Rational functional on the free coordinates; torsion is sent to zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Functional {
    pub coefficients: Vec<Rational>,
    /// `scale · coefficients`, with `scale` the lcm of the denominators.
    pub integer: Vec<BigInt>,
    pub scale: BigInt,
}

impl Functional {
    pub fn new(coefficients: Vec<Rational>) -> Self {
        let (integer, scale) = clear_vector(&coefficients);
        Functional {
            coefficients,
            integer,
            scale,
        }
    }

    pub fn eval(&self, x: &GroupElement) -> Rational {
        dot_qi(&self.coefficients, &x.free)
    }

    pub fn eval_free(&self, x: &[BigInt]) -> Rational {
        dot_qi(&self.coefficients, x)
    }

    pub fn eval_integer(&self, x: &GroupElement) -> BigInt {
        crate::arith::dot_ii(&self.integer, &x.free)
    }

    /// `self / self(u)`.
    pub fn normalized_at(&self, u: &GroupElement) -> Result<Functional> {
        let v = self.eval(u);
        if v.is_zero() {
            return Err(Error::Internal("functional vanishes at the unit".into()));
        }
        Ok(Functional::new(self.coefficients.iter().map(|c| c / &v).collect()))
    }
}

pub fn clear_denominators(f: &Functional) -> Functional {
    Functional::new(f.coefficients.clone())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparationStage {
    /// Normalized so that `max |fᵢ| = 1`.
    pub functional: Vec<Rational>,
    /// Blocks ruled out at this stage.
    pub removed_blocks: Vec<usize>,
    /// `min f·g` over the generators of the removed blocks.
    pub margin: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IntersectionVerdict {
    NonzeroPoint {
        /// Rational point of the span, nonzero and in the cone.
        point: Vec<Rational>,
        /// Integer combination of the input vectors giving `lattice_point`.
        coefficients: Vec<BigInt>,
        lattice_point: Vec<BigInt>,
    },
    Separation {
        stages: Vec<SeparationStage>,
    },
}

impl IntersectionVerdict {
    pub fn is_separation(&self) -> bool {
        matches!(self, IntersectionVerdict::Separation { .. })
    }
}

/// Decides whether the lattice generated by `sub` (free coordinates) meets
/// the cone in a nonzero element.
pub fn subspace_cone_intersect(
    sub: &[Vec<BigInt>],
    cone: &PositiveCone,
    deadline: &Deadline,
) -> Result<IntersectionVerdict> {
    let d = cone.free_rank;
    for h in sub {
        if h.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: h.len(),
            });
        }
    }
    let block_gens: Vec<Vec<Vec<BigInt>>> = cone
        .blocks
        .iter()
        .map(|b| b.embedded_generators(d))
        .collect();

    let mut active: Vec<usize> = (0..cone.blocks.len()).collect();
    let mut stages = Vec::new();
    while !active.is_empty() {
        let mut points = Vec::new();
        let mut duals = Vec::new();
        for &j in &active {
            match primal(sub, cone, &block_gens, &active, j, deadline)? {
                Some(c) => points.push(c),
                None => duals.push((j, dual(sub, cone, &block_gens, &active, j, deadline)?)),
            }
        }
        if duals.is_empty() {
            return Ok(nonzero_point(sub, d, points));
        }
        let mut f = vec![Rational::zero(); d];
        for (_, g) in &duals {
            for (a, b) in f.iter_mut().zip(g) {
                *a += b;
            }
        }
        let m = max_abs(&f);
        if !m.is_zero() {
            for a in f.iter_mut() {
                *a /= &m;
            }
        }
        let removed: Vec<usize> = duals.iter().map(|(j, _)| *j).collect();
        let margin = removed
            .iter()
            .flat_map(|&j| block_gens[j].iter())
            .map(|g| dot_qi(&f, g))
            .min()
            .unwrap_or_else(Rational::one);
        if !margin.is_positive() {
            return Err(Error::Internal("separation stage without positive margin".into()));
        }
        active.retain(|j| !removed.contains(j));
        stages.push(SeparationStage {
            functional: f,
            removed_blocks: removed,
            margin,
        });
    }
    Ok(IntersectionVerdict::Separation { stages })
}

fn nonzero_point(sub: &[Vec<BigInt>], d: usize, coeff_sets: Vec<Vec<Rational>>) -> IntersectionVerdict {
    let mut c = vec![Rational::zero(); sub.len()];
    for cs in coeff_sets {
        for (a, b) in c.iter_mut().zip(cs) {
            *a += b;
        }
    }
    let point: Vec<Rational> = (0..d)
        .map(|i| {
            sub.iter()
                .zip(&c)
                .fold(Rational::zero(), |acc, (h, ck)| acc + ck * rat_int(&h[i]))
        })
        .collect();
    let n = lcm_of_denominators(&c);
    let coefficients: Vec<BigInt> = c
        .iter()
        .map(|q| (q * Rational::from_integer(n.clone())).to_integer())
        .collect();
    let lattice_point = (0..d)
        .map(|i| {
            sub.iter()
                .zip(&coefficients)
                .fold(BigInt::zero(), |acc, (h, k)| acc + k * &h[i])
        })
        .collect();
    IntersectionVerdict::NonzeroPoint {
        point,
        coefficients,
        lattice_point,
    }
}

/// Is there a point of `span(sub)` supported on the active blocks, lying in
/// their cones, with block `j` carrying unit generator weight? Returns the
/// span coefficients.
fn primal(
    sub: &[Vec<BigInt>],
    cone: &PositiveCone,
    block_gens: &[Vec<Vec<BigInt>>],
    active: &[usize],
    j: usize,
    deadline: &Deadline,
) -> Result<Option<Vec<Rational>>> {
    let mut p = Problem::new();
    let c: Vec<usize> = sub.iter().map(|_| p.free()).collect();
    let mut t: Vec<Vec<usize>> = vec![Vec::new(); cone.blocks.len()];
    for &b in active {
        t[b] = block_gens[b].iter().map(|_| p.nonneg()).collect();
    }
    let span_row = |i: usize| -> Vec<(usize, Rational)> {
        c.iter().zip(sub).map(|(&v, h)| (v, rat_int(&h[i]))).collect()
    };
    for (b, block) in cone.blocks.iter().enumerate() {
        if active.contains(&b) {
            for i in block.base() {
                let mut row = span_row(i);
                for (&v, g) in t[b].iter().zip(&block_gens[b]) {
                    row.push((v, -rat_int(&g[i])));
                }
                p.constrain(row, Relation::Eq, Rational::zero());
            }
        } else {
            for i in block.base().into_iter().chain(block.floating.iter().copied()) {
                p.constrain(span_row(i), Relation::Eq, Rational::zero());
            }
        }
    }
    p.constrain(
        t[j].iter().map(|&v| (v, Rational::one())).collect(),
        Relation::Eq,
        Rational::one(),
    );
    Ok(match p.solve(deadline)? {
        Outcome::Optimal { values, .. } => Some(c.iter().map(|&v| values[v].clone()).collect()),
        _ => None,
    })
}

/// Functional vanishing on `sub` and on the floating coordinates of the
/// active blocks, nonnegative on their generators and `≥ 1` on the
/// generators of block `j`.
fn dual(
    sub: &[Vec<BigInt>],
    cone: &PositiveCone,
    block_gens: &[Vec<Vec<BigInt>>],
    active: &[usize],
    j: usize,
    deadline: &Deadline,
) -> Result<Vec<Rational>> {
    let d = cone.free_rank;
    let mut p = Problem::new();
    let f: Vec<usize> = (0..d).map(|_| p.free()).collect();
    let row_of = |v: &[BigInt]| -> Vec<(usize, Rational)> {
        f.iter().zip(v).map(|(&fv, x)| (fv, rat_int(x))).collect()
    };
    for h in sub {
        p.constrain(row_of(h), Relation::Eq, Rational::zero());
    }
    for &b in active {
        for &i in &cone.blocks[b].floating {
            p.constrain(vec![(f[i], Rational::one())], Relation::Eq, Rational::zero());
        }
        let bound = if b == j { Rational::one() } else { Rational::zero() };
        for g in &block_gens[b] {
            p.constrain(row_of(g), Relation::Ge, bound.clone());
        }
    }
    match p.solve(deadline)? {
        Outcome::Optimal { values, .. } => Ok(values),
        _ => Err(Error::Internal(
            "neither the intersection nor its Farkas alternative is feasible".into(),
        )),
    }
}

/// Collapses lexicographic stages into one functional `Σ M^{s−k} f_k`,
/// positive on every listed element. Each element must be lexicographically
/// positive against the stages.
pub fn combine_stages(stages: &[SeparationStage], elements: &[Vec<BigInt>]) -> Result<Vec<Rational>> {
    let Some(first) = stages.first() else {
        return Err(Error::Internal("no separation stages".into()));
    };
    if stages.len() == 1 {
        return Ok(first.functional.clone());
    }
    let mut m = Rational::one();
    for x in elements {
        let vals: Vec<Rational> = stages.iter().map(|s| dot_qi(&s.functional, x)).collect();
        let Some(k0) = vals.iter().position(|v| !v.is_zero()) else {
            continue;
        };
        if vals[k0].is_negative() {
            return Err(Error::Internal("element is not lexicographically positive".into()));
        }
        let tail = vals[k0 + 1..]
            .iter()
            .fold(Rational::zero(), |acc, v| acc + v.abs());
        let need = tail / &vals[k0] + Rational::one();
        if need > m {
            m = need;
        }
    }
    let m = Rational::from_integer(m.ceil().to_integer());
    let d = first.functional.len();
    let mut out = vec![Rational::zero(); d];
    let mut weight = Rational::one();
    for s in stages.iter().rev() {
        for (o, a) in out.iter_mut().zip(&s.functional) {
            *o += &weight * a;
        }
        weight *= &m;
    }
    Ok(out)
}

/// A state `λ` with `λ(u) = 1` that is strictly positive on every nonzero
/// positive element and zero on torsion and floating coordinates.
pub fn faithful_functional(g: &OrderedGroup) -> Result<Functional> {
    faithful_functional_with_deadline(g, &Deadline::none())
}

pub fn faithful_functional_with_deadline(g: &OrderedGroup, deadline: &Deadline) -> Result<Functional> {
    g.validate_structure()?;
    let cone = g.positive_cone()?;
    match subspace_cone_intersect(&[], &cone, deadline)? {
        IntersectionVerdict::Separation { stages } if stages.len() <= 1 => {
            let f = stages
                .first()
                .map(|s| s.functional.clone())
                .unwrap_or_else(|| vec![Rational::zero(); g.free_rank]);
            Functional::new(f).normalized_at(&g.unit)
        }
        IntersectionVerdict::Separation { .. } => Err(Error::Internal(
            "trivial lattice produced a multi-stage separation".into(),
        )),
        IntersectionVerdict::NonzeroPoint { .. } => Err(Error::ConeNotPointed),
    }
}

//! States, state-preserving functionals and staged approximations.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::arith::{clear_vector, dot_qi, rat_int, Deadline, Rational};
use crate::cone::{subspace_cone_intersect, Functional, IntersectionVerdict};
use crate::dynamics::{check_coboundary_with_deadline, CoboundaryVerdict, FreeGroupAction};
use crate::error::{Error, Result};
use crate::lattice::{
    hermite_basis, integer_kernel, lattice_membership, quotient_presentation, IntMatrix, LatticeBasis,
};
use crate::lp::{Outcome, Problem, Relation};
use crate::order::{
    free_vectors_of_norm, Block, ConePart, GroupElement, OrderedGroup, PartKind, Positivity, PositiveCone,
};

/// A rational state `β` on the free coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpec {
    pub beta: Vec<Rational>,
}

impl StateSpec {
    pub fn new(beta: Vec<Rational>) -> Self {
        StateSpec { beta }
    }

    /// `β(u) = 1`, `β ≥ 0` on the cone and, when `σ` is given, `β·Aᵢ = β`.
    pub fn validate(&self, g: &OrderedGroup, sigma: Option<&FreeGroupAction>) -> Result<()> {
        if self.beta.len() != g.free_rank {
            return Err(Error::DimensionMismatch {
                expected: g.free_rank,
                found: self.beta.len(),
            });
        }
        if dot_qi(&self.beta, &g.unit.free) != Rational::one() {
            return Err(Error::InvalidState("β(u) is not 1".into()));
        }
        let cone = g.positive_cone()?;
        for i in cone.floating() {
            if !self.beta[i].is_zero() {
                return Err(Error::InvalidState(format!(
                    "β is nonzero on floating coordinate {i}"
                )));
            }
        }
        for x in cone.generators() {
            if dot_qi(&self.beta, &x.free).is_negative() {
                return Err(Error::InvalidState("β is negative on a cone generator".into()));
            }
        }
        if let Some(sigma) = sigma {
            for (i, m) in sigma.generators.iter().enumerate() {
                if !crate::dynamics::is_invariant(&self.beta, &m.free) {
                    return Err(Error::NotInvariant(i));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateTranscript {
    /// `ker(β)` on the free coordinates.
    pub kernel: LatticeBasis,
    /// Rank of `K̂ = K / ker(β)`.
    pub quotient_rank: usize,
    /// Image of each free basis vector in `K̂ ≅ ℤ^m`.
    pub projection: Vec<Vec<BigInt>>,
    /// `β̂` on the basis of `K̂`.
    pub basis_values: Vec<Rational>,
    /// Largest absolute coordinate of an element of `S` in `K̂`.
    pub coefficient_bound: BigInt,
    /// `ε / (m · C)`.
    pub delta: Rational,
    pub epsilon: Rational,
    /// `|λ(s) − β(s)|` for each element of `S`.
    pub deviations: Vec<Rational>,
    /// Elements of `S` (by index) that are positive but killed by `β`.
    pub vanishing: Vec<usize>,
    /// Weight of the faithful correction mixed into `β`, zero when `λ = β`.
    pub correction: Rational,
    /// `λ·Aᵢ − λ`, one row per action generator.
    pub invariance_residuals: Vec<Vec<Rational>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatePreserving {
    pub functional: Functional,
    pub transcript: StateTranscript,
}

/// Rational `λ` with `λ(u) = 1`, `|λ − β| ≤ ε` on `S`, `λ > 0` on the
/// nonzero positives of `S` and `λ·Aᵢ = λ` when `σ` is given.
pub fn state_preserving_functional(
    g: &OrderedGroup,
    sigma: Option<&FreeGroupAction>,
    beta: &StateSpec,
    set: &[GroupElement],
    epsilon: &Rational,
) -> Result<StatePreserving> {
    state_preserving_with_deadline(g, sigma, beta, set, epsilon, &Deadline::none())
}

pub fn state_preserving_with_deadline(
    g: &OrderedGroup,
    sigma: Option<&FreeGroupAction>,
    beta: &StateSpec,
    set: &[GroupElement],
    epsilon: &Rational,
    deadline: &Deadline,
) -> Result<StatePreserving> {
    g.validate_structure()?;
    if !epsilon.is_positive() {
        return Err(Error::InvalidState("tolerance must be positive".into()));
    }
    for s in set {
        g.check_element(s)?;
    }
    beta.validate(g, sigma)?;
    let invariant = match sigma {
        Some(sigma) => match check_coboundary_with_deadline(sigma, g, deadline)? {
            CoboundaryVerdict::Fails { element, .. } => return Err(Error::CoboundaryFails(element)),
            CoboundaryVerdict::Holds { functional, .. } => Some(functional),
        },
        None => None,
    };

    let d = g.free_rank;
    let (beta_int, _) = clear_vector(&beta.beta);
    let kernel = integer_kernel(&IntMatrix::from_rows(&[beta_int]));
    let pres = quotient_presentation(d, &[], &kernel.vectors());
    let m = pres.free_rank;
    let project = |x: &[BigInt]| pres.free_projection.mul_vec(x);
    let u_hat = project(&g.unit.free);
    // β̂ on the basis of K̂ ≅ ℤ: β(u) = 1 = t · û
    let basis_values: Vec<Rational> = if m == 1 {
        vec![Rational::one() / rat_int(&u_hat[0])]
    } else {
        return Err(Error::Internal(format!("K / ker β has rank {m}, expected 1")));
    };
    let coefficient_bound = set
        .iter()
        .flat_map(|s| project(&s.free))
        .map(|c| c.abs())
        .max()
        .unwrap_or_else(BigInt::one)
        .max(BigInt::one());
    let delta = epsilon / Rational::from_integer(BigInt::from(m) * &coefficient_bound);

    // t = β̂ exactly, so λ = t ∘ π reproduces β
    let projection: Vec<Vec<BigInt>> = (0..d).map(|j| pres.free_projection.col(j)).collect();
    let lambda: Vec<Rational> = projection
        .iter()
        .map(|col| {
            col.iter()
                .zip(&basis_values)
                .fold(Rational::zero(), |acc, (c, t)| acc + t * rat_int(c))
        })
        .collect();

    let cone = g.positive_cone()?;
    let mut vanishing = Vec::new();
    for (i, s) in set.iter().enumerate() {
        let s = s.clone().reduced(&g.torsion);
        if dot_qi(&lambda, &s.free).is_zero() && cone.classify(&s, deadline)? == Positivity::Positive {
            vanishing.push(i);
        }
    }

    let (lambda, correction) = if vanishing.is_empty() {
        (lambda, Rational::zero())
    } else {
        let faithful = match invariant {
            Some(f) => f,
            None => crate::cone::faithful_functional_with_deadline(g, deadline)?,
        };
        let spread = set
            .iter()
            .map(|s| (faithful.eval(s) - dot_qi(&lambda, &s.free)).abs())
            .max()
            .unwrap_or_else(Rational::zero);
        let half = Rational::new(BigInt::one(), BigInt::from(2));
        let eta = if spread.is_zero() {
            half
        } else {
            (epsilon / spread).min(half)
        };
        let mixed = lambda
            .iter()
            .zip(&faithful.coefficients)
            .map(|(b, f)| (Rational::one() - &eta) * b + &eta * f)
            .collect();
        (mixed, eta)
    };

    let deviations: Vec<Rational> = set
        .iter()
        .map(|s| (dot_qi(&lambda, &s.free) - dot_qi(&beta.beta, &s.free)).abs())
        .collect();
    let invariance_residuals = sigma
        .map(|s| {
            s.generators
                .iter()
                .map(|m| {
                    (0..d)
                        .map(|j| dot_qi(&lambda, &m.free.col(j)) - &lambda[j])
                        .collect()
                })
                .collect()
        })
        .unwrap_or_default();
    Ok(StatePreserving {
        functional: Functional::new(lambda),
        transcript: StateTranscript {
            kernel,
            quotient_rank: m,
            projection,
            basis_values,
            coefficient_bound,
            delta,
            epsilon: epsilon.clone(),
            deviations,
            vanishing,
            correction,
            invariance_residuals,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateStage {
    pub index: usize,
    /// HNF basis of the free parts of `x_0, …, x_n`.
    pub subgroup: LatticeBasis,
    /// `H_n ≅ ℤ^k ⊕ ⊕ℤ/sⱼ`.
    pub subgroup_free_rank: usize,
    pub subgroup_torsion: Vec<BigInt>,
    pub elements: Vec<GroupElement>,
    /// `λ_n` on the free coordinates, normalized at `x_0 = u`.
    pub functional: Functional,
    pub values: Vec<Rational>,
    pub additivity_checked: usize,
    pub additivity_ok: bool,
    pub positivity_ok: bool,
    /// `λ_n·Aᵢ − λ_n`, when an action is given.
    pub invariance_residuals: Vec<Vec<Rational>>,
}

impl StateStage {
    pub fn is_sound(&self) -> bool {
        self.additivity_ok
            && self.positivity_ok
            && self.invariance_residuals.iter().flatten().all(|r| r.is_zero())
    }
}

/// The first `count` nonzero positives: `u`, then increasing max-norm of the
/// free part, lexicographic, torsion residues cycled innermost.
pub fn default_enumeration(g: &OrderedGroup, count: usize) -> Result<Vec<GroupElement>> {
    let cone = g.positive_cone()?;
    let deadline = Deadline::none();
    let mut out = vec![g.unit.clone()];
    let torsion = torsion_elements(&g.torsion)?;
    let mut r = 0i64;
    while out.len() < count {
        for f in free_vectors_of_norm(g.free_rank, r) {
            for t in &torsion {
                if out.len() >= count {
                    return Ok(out);
                }
                let x = GroupElement::new(f.clone(), t.clone());
                if x != g.unit && cone.classify(&x, &deadline)? == Positivity::Positive {
                    out.push(x);
                }
            }
        }
        r += 1;
        if r > 1_000 {
            return Err(Error::Internal("positive enumeration did not terminate".into()));
        }
    }
    out.truncate(count);
    Ok(out)
}

fn torsion_elements(invariants: &[BigInt]) -> Result<Vec<Vec<BigInt>>> {
    let mut out = vec![Vec::new()];
    for t in invariants {
        let n: u64 = t
            .try_into()
            .map_err(|_| Error::Unsupported("torsion invariant too large to enumerate".into()))?;
        if out.len() as u64 * n > 1_000_000 {
            return Err(Error::Unsupported("torsion subgroup too large to enumerate".into()));
        }
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..n).map(move |k| {
                    let mut v = prefix.clone();
                    v.push(BigInt::from(k));
                    v
                })
            })
            .collect();
    }
    Ok(out)
}

/// Stages `n = 0, …, n_max` of the staged construction over an enumeration
/// of positives beginning with `u`.
pub fn approximate_state_sequence(
    g: &OrderedGroup,
    enumeration: Option<Vec<GroupElement>>,
    n_max: usize,
    sigma: Option<&FreeGroupAction>,
) -> Result<Vec<StateStage>> {
    approximate_state_sequence_with_deadline(g, enumeration, n_max, sigma, &Deadline::none())
}

pub fn approximate_state_sequence_with_deadline(
    g: &OrderedGroup,
    enumeration: Option<Vec<GroupElement>>,
    n_max: usize,
    sigma: Option<&FreeGroupAction>,
    deadline: &Deadline,
) -> Result<Vec<StateStage>> {
    g.validate_structure()?;
    if let Some(sigma) = sigma {
        crate::dynamics::validate_action(sigma, g)?;
    }
    let xs = match enumeration {
        Some(xs) => xs,
        None => default_enumeration(g, n_max + 1)?,
    };
    if xs.len() < n_max + 1 {
        return Err(Error::InvalidState(format!(
            "enumeration has {} elements, {} needed",
            xs.len(),
            n_max + 1
        )));
    }
    let cone = g.positive_cone()?;
    let xs: Vec<GroupElement> = xs
        .into_iter()
        .take(n_max + 1)
        .map(|x| {
            g.check_element(&x)?;
            let x = x.reduced(&g.torsion);
            match cone.classify(&x, deadline)? {
                Positivity::Positive => Ok(x),
                _ => Err(Error::EnumerationNotPositive(x)),
            }
        })
        .collect::<Result<_>>()?;
    if xs[0] != g.unit {
        return Err(Error::InvalidState("enumeration must begin with the unit".into()));
    }

    let mut stages = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        deadline.check()?;
        stages.push(stage(g, &xs[..=n], n, sigma, deadline)?);
    }
    Ok(stages)
}

fn stage(
    g: &OrderedGroup,
    xs: &[GroupElement],
    n: usize,
    sigma: Option<&FreeGroupAction>,
    deadline: &Deadline,
) -> Result<StateStage> {
    let d = g.free_rank;
    let frees: Vec<Vec<BigInt>> = xs.iter().map(|x| x.free.clone()).collect();
    let subgroup = hermite_basis(&frees, d);
    let (subgroup_free_rank, subgroup_torsion) = subgroup_structure(g, xs);

    let part = ConePart {
        coords: (0..d).collect(),
        kind: PartKind::Generators,
        generators: frees.clone(),
    };
    let cone = PositiveCone {
        free_rank: d,
        torsion_len: 0,
        blocks: vec![Block {
            parts: vec![part],
            floating: Vec::new(),
            torsion: Vec::new(),
        }],
    };
    let sub: Vec<Vec<BigInt>> = match sigma {
        Some(sigma) => sigma
            .generators
            .iter()
            .flat_map(|m| {
                xs.iter()
                    .map(|x| x.sub(&m.apply(x, &g.torsion), &g.torsion).free)
                    .collect::<Vec<_>>()
            })
            .collect(),
        None => Vec::new(),
    };
    let f = match subspace_cone_intersect(&sub, &cone, deadline)? {
        IntersectionVerdict::Separation { stages } if stages.len() == 1 => stages[0].functional.clone(),
        IntersectionVerdict::NonzeroPoint { lattice_point, .. } => {
            return Err(Error::CoboundaryFails(GroupElement::new(
                lattice_point,
                vec![BigInt::zero(); g.torsion.len()],
            )))
        }
        IntersectionVerdict::Separation { .. } => {
            return Err(Error::Internal("closed stage cone gave a multi-stage separation".into()))
        }
    };
    let functional = Functional::new(f).normalized_at(&xs[0])?;
    let values: Vec<Rational> = xs.iter().map(|x| functional.eval(x)).collect();
    let positivity_ok = values.iter().all(|v| v.is_positive());
    let mut additivity_checked = 0;
    let mut additivity_ok = true;
    for (i, x) in xs.iter().enumerate() {
        for (j, y) in xs.iter().enumerate().skip(i) {
            let s = x.add(y, &g.torsion);
            additivity_checked += 1;
            if functional.eval(&s) != &values[i] + &values[j] {
                additivity_ok = false;
            }
        }
    }
    let invariance_residuals = sigma
        .map(|s| {
            s.generators
                .iter()
                .map(|m| {
                    (0..d)
                        .map(|j| dot_qi(&functional.coefficients, &m.free.col(j)) - &functional.coefficients[j])
                        .collect()
                })
                .collect()
        })
        .unwrap_or_default();
    Ok(StateStage {
        index: n,
        subgroup,
        subgroup_free_rank,
        subgroup_torsion,
        elements: xs.to_vec(),
        functional,
        values,
        additivity_checked,
        additivity_ok,
        positivity_ok,
        invariance_residuals,
    })
}

/// Invariants of the subgroup of `K` generated by `xs`.
fn subgroup_structure(g: &OrderedGroup, xs: &[GroupElement]) -> (usize, Vec<BigInt>) {
    let (d, t) = (g.free_rank, g.torsion.len());
    let mut relations: Vec<Vec<BigInt>> = Vec::new();
    for (i, m) in g.torsion.iter().enumerate() {
        let mut r = vec![BigInt::zero(); d + t];
        r[d + i] = m.clone();
        relations.push(r);
    }
    let mut all: Vec<Vec<BigInt>> = xs.iter().map(|x| x.coords()).collect();
    all.extend(relations.iter().cloned());
    // H + R, with R expressed in its basis
    let basis = hermite_basis(&all, d + t);
    let rel_coords: Vec<Vec<BigInt>> = relations
        .iter()
        .map(|r| lattice_membership(r, &basis).expect("relations lie in H + R"))
        .collect();
    let pres = quotient_presentation(basis.rank(), &[], &rel_coords);
    (pres.free_rank, pres.torsion_invariants)
}

/// Extends the zero functional on `H` to a state with `λ(u) = 1`.
pub fn unit_state_extension(h: &LatticeBasis, g: &OrderedGroup) -> Result<Functional> {
    unit_state_extension_with_deadline(h, g, &Deadline::none())
}

pub fn unit_state_extension_with_deadline(
    h: &LatticeBasis,
    g: &OrderedGroup,
    deadline: &Deadline,
) -> Result<Functional> {
    g.validate_structure()?;
    if h.ambient_rank() != g.free_rank {
        return Err(Error::DimensionMismatch {
            expected: g.free_rank,
            found: h.ambient_rank(),
        });
    }
    if h.spans_rationally(&g.unit.free) {
        return Err(Error::UnitInSubgroup);
    }
    let cone = g.positive_cone()?;
    let vectors = h.vectors();
    if let IntersectionVerdict::Separation { stages } = subspace_cone_intersect(&vectors, &cone, deadline)? {
        if stages.len() == 1 {
            return Functional::new(stages[0].functional.clone()).normalized_at(&g.unit);
        }
    }
    // fall back to any state vanishing on H
    let d = g.free_rank;
    let mut p = Problem::new();
    let f: Vec<usize> = (0..d).map(|_| p.free()).collect();
    let row = |v: &[BigInt]| -> Vec<(usize, Rational)> { f.iter().zip(v).map(|(&i, x)| (i, rat_int(x))).collect() };
    for v in &vectors {
        p.constrain(row(v), Relation::Eq, Rational::zero());
    }
    for i in cone.floating() {
        p.constrain(vec![(f[i], Rational::one())], Relation::Eq, Rational::zero());
    }
    for x in cone.generators() {
        p.constrain(row(&x.free), Relation::Ge, Rational::zero());
    }
    p.constrain(row(&g.unit.free), Relation::Eq, Rational::one());
    match p.solve(deadline)? {
        Outcome::Optimal { values, .. } => Ok(Functional::new(values)),
        _ => Err(Error::NoStateExtension(
            "every functional vanishing on the subgroup is negative somewhere on the cone".into(),
        )),
    }
}

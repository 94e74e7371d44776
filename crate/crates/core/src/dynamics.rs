//! Free-group actions on ordered groups and the coboundary condition.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::arith::{dot_qi, Deadline, Rational};
use crate::cone::{combine_stages, subspace_cone_intersect, Functional, IntersectionVerdict, SeparationStage};
use crate::error::{Error, Result};
use crate::lattice::{
    hermite_basis, hermite_basis_with_transform, lattice_membership, quotient_presentation, saturate,
    smith_normal_form, IntMatrix, LatticeBasis, QuotientPresentation,
};
use crate::order::{ConeSpec, GroupElement, OrderedGroup, Positivity, PositiveCone};

/// Endomorphism `(x_f, x_t) ↦ (A x_f, B x_f + C x_t)` of `ℤ^d ⊕ ⊕ℤ/tᵢ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupMap {
    /// `A`, `d × d`.
    pub free: IntMatrix,
    /// `B`, `t × d`.
    pub from_free: IntMatrix,
    /// `C`, `t × t`.
    pub torsion: IntMatrix,
}

impl GroupMap {
    pub fn identity(free_rank: usize, torsion_len: usize) -> Self {
        GroupMap {
            free: IntMatrix::identity(free_rank),
            from_free: IntMatrix::zeros(torsion_len, free_rank),
            torsion: IntMatrix::identity(torsion_len),
        }
    }

    /// A map on the free part only, acting as the identity on torsion.
    pub fn free_only(a: IntMatrix, torsion_len: usize) -> Self {
        let d = a.cols();
        GroupMap {
            free: a,
            from_free: IntMatrix::zeros(torsion_len, d),
            torsion: IntMatrix::identity(torsion_len),
        }
    }

    pub fn apply(&self, x: &GroupElement, invariants: &[BigInt]) -> GroupElement {
        let free = self.free.mul_vec(&x.free);
        let a = self.from_free.mul_vec(&x.free);
        let b = self.torsion.mul_vec(&x.torsion);
        let torsion = a.into_iter().zip(b).map(|(p, q)| p + q).collect();
        GroupElement::new(free, torsion).reduced(invariants)
    }

    fn check_shape(&self, d: usize, t: usize) -> std::result::Result<(), String> {
        let ok = self.free.rows() == d
            && self.free.cols() == d
            && self.from_free.rows() == t
            && self.from_free.cols() == d
            && self.torsion.rows() == t
            && self.torsion.cols() == t;
        if ok {
            Ok(())
        } else {
            Err(format!(
                "matrix shapes ({}x{}, {}x{}, {}x{}) do not match free rank {d} and {t} torsion summands",
                self.free.rows(),
                self.free.cols(),
                self.from_free.rows(),
                self.from_free.cols(),
                self.torsion.rows(),
                self.torsion.cols()
            ))
        }
    }

    /// `C` is well defined on `⊕ℤ/tᵢ` iff `t_j · C[i][j] ≡ 0 (mod t_i)`.
    fn torsion_compatible(&self, invariants: &[BigInt]) -> bool {
        (0..invariants.len()).all(|i| {
            (0..invariants.len())
                .all(|j| (&invariants[j] * self.torsion.get(i, j)).is_multiple_of(&invariants[i]))
        })
    }

    /// Whether `C` is a bijection of the torsion subgroup (assuming it is
    /// well defined): its image together with the relations is everything.
    fn torsion_bijective(&self, invariants: &[BigInt]) -> bool {
        let t = invariants.len();
        let gens = torsion_lattice_gens(&self.torsion, invariants);
        let h = hermite_basis(&gens, t);
        h.rank() == t && (0..t).all(|i| h.matrix().get(i, i).is_one())
    }

    /// The inverse automorphism, if `A` is unimodular and `C` bijective.
    pub fn inverse(&self, invariants: &[BigInt]) -> Option<GroupMap> {
        let a_inv = self.free.unimodular_inverse()?;
        let t = invariants.len();
        let d = self.free.rows();
        let mut c_inv = IntMatrix::zeros(t, t);
        for j in 0..t {
            let mut e = vec![BigInt::zero(); t];
            e[j] = BigInt::one();
            let col = solve_torsion(&self.torsion, invariants, &e)?;
            for (i, v) in col.into_iter().enumerate() {
                c_inv.set(i, j, v);
            }
        }
        // B' = −C⁻¹ B A⁻¹
        let cba = c_inv.mul(&self.from_free).mul(&a_inv);
        let mut from_free = IntMatrix::zeros(t, d);
        for i in 0..t {
            for j in 0..d {
                from_free.set(i, j, (-cba.get(i, j)).mod_floor(&invariants[i]));
            }
        }
        Some(GroupMap {
            free: a_inv,
            from_free,
            torsion: c_inv,
        })
    }

    pub fn compose(&self, other: &GroupMap, invariants: &[BigInt]) -> GroupMap {
        // self ∘ other
        let free = self.free.mul(&other.free);
        let b = self.from_free.mul(&other.free);
        let cb = self.torsion.mul(&other.from_free);
        let mut from_free = IntMatrix::zeros(b.rows(), b.cols());
        for i in 0..b.rows() {
            for j in 0..b.cols() {
                from_free.set(i, j, (b.get(i, j) + cb.get(i, j)).mod_floor(&invariants[i]));
            }
        }
        let c = self.torsion.mul(&other.torsion);
        let mut torsion = IntMatrix::zeros(c.rows(), c.cols());
        for i in 0..c.rows() {
            for j in 0..c.cols() {
                torsion.set(i, j, c.get(i, j).mod_floor(&invariants[i]));
            }
        }
        GroupMap {
            free,
            from_free,
            torsion,
        }
    }
}

fn torsion_lattice_gens(c: &IntMatrix, invariants: &[BigInt]) -> Vec<Vec<BigInt>> {
    let t = invariants.len();
    let mut gens = c.col_vecs();
    for (i, m) in invariants.iter().enumerate() {
        let mut r = vec![BigInt::zero(); t];
        r[i] = m.clone();
        gens.push(r);
    }
    gens
}

/// Some `x` with `C x ≡ y` in `⊕ℤ/tᵢ`.
fn solve_torsion(c: &IntMatrix, invariants: &[BigInt], y: &[BigInt]) -> Option<Vec<BigInt>> {
    let t = invariants.len();
    let gens = torsion_lattice_gens(c, invariants);
    let (basis, transform) = hermite_basis_with_transform(&gens, t);
    let coeffs = lattice_membership(y, &basis)?;
    Some(
        (0..t)
            .map(|i| {
                let v = (0..basis.rank()).fold(BigInt::zero(), |acc, j| acc + transform.get(i, j) * &coeffs[j]);
                v.mod_floor(&invariants[i])
            })
            .collect(),
    )
}

/// Action of the free group on `r` generators by automorphisms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeGroupAction {
    pub generators: Vec<GroupMap>,
}

impl FreeGroupAction {
    pub fn new(generators: Vec<GroupMap>) -> Self {
        FreeGroupAction { generators }
    }

    /// Action by free-part matrices, trivial on torsion.
    pub fn from_matrices(matrices: Vec<IntMatrix>, torsion_len: usize) -> Self {
        FreeGroupAction {
            generators: matrices
                .into_iter()
                .map(|a| GroupMap::free_only(a, torsion_len))
                .collect(),
        }
    }

    /// Simultaneous change of basis `A ↦ P A P⁻¹` on the free part.
    pub fn conjugate_free(&self, p: &IntMatrix, p_inv: &IntMatrix) -> FreeGroupAction {
        FreeGroupAction {
            generators: self
                .generators
                .iter()
                .map(|g| GroupMap {
                    free: p.mul(&g.free).mul(p_inv),
                    from_free: g.from_free.mul(p_inv),
                    torsion: g.torsion.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ActionReport {
    pub generator_count: usize,
    pub violations: Vec<String>,
}

impl ActionReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that every generator is an order-unit automorphism of `G`.
pub fn inspect_action(sigma: &FreeGroupAction, g: &OrderedGroup) -> Result<ActionReport> {
    let cone = g.positive_cone()?;
    let mut report = ActionReport {
        generator_count: sigma.generators.len(),
        violations: Vec::new(),
    };
    for (k, m) in sigma.generators.iter().enumerate() {
        for v in map_violations(m, g, &cone, true)? {
            report.violations.push(format!("generator {k}: {v}"));
        }
    }
    Ok(report)
}

pub fn validate_action(sigma: &FreeGroupAction, g: &OrderedGroup) -> Result<ActionReport> {
    g.validate_structure()?;
    let report = inspect_action(sigma, g)?;
    match report.violations.first() {
        Some(v) => Err(Error::InvalidAction(v.clone())),
        None => Ok(report),
    }
}

fn map_violations(
    m: &GroupMap,
    g: &OrderedGroup,
    cone: &PositiveCone,
    automorphism: bool,
) -> Result<Vec<String>> {
    let inv = &g.torsion;
    let mut out = Vec::new();
    if let Err(e) = m.check_shape(g.free_rank, inv.len()) {
        out.push(e);
        return Ok(out);
    }
    if !m.torsion_compatible(inv) {
        out.push("torsion map is not compatible with the torsion invariants".into());
        return Ok(out);
    }
    if automorphism {
        if !m.free.is_unimodular() {
            out.push(format!(
                "free matrix has determinant {}, not ±1",
                m.free.determinant()
            ));
        }
        if !m.torsion_bijective(inv) {
            out.push("torsion map is not a bijection".into());
        }
        if !out.is_empty() {
            return Ok(out);
        }
        if m.apply(&g.unit, inv) != g.unit {
            out.push("unit is not fixed".into());
        }
    }
    if let Some(v) = block_structure_violation(m, g, cone) {
        out.push(v);
        return Ok(out);
    }
    for gen in cone.generators() {
        if cone.classify(&m.apply(&gen, inv), &Deadline::none())? != Positivity::Positive {
            let shown: Vec<String> = gen.free.iter().map(|x| x.to_string()).collect();
            out.push(format!("image of cone generator ({}) is not positive", shown.join(", ")));
            break;
        }
    }
    Ok(out)
}

/// Floating coordinates must map into floating directions, and with several
/// blocks the map must carry each block onto a single block.
fn block_structure_violation(m: &GroupMap, g: &OrderedGroup, cone: &PositiveCone) -> Option<String> {
    let d = g.free_rank;
    let mut free_block = vec![0usize; d];
    let mut torsion_block = vec![0usize; g.torsion.len()];
    let mut is_base = vec![false; d];
    for (b, block) in cone.blocks.iter().enumerate() {
        for i in block.base() {
            free_block[i] = b;
            is_base[i] = true;
        }
        for &i in &block.floating {
            free_block[i] = b;
        }
        for &i in &block.torsion {
            torsion_block[i] = b;
        }
    }
    for c in (0..d).filter(|&c| !is_base[c]) {
        if (0..d).any(|r| is_base[r] && !m.free.get(r, c).is_zero()) {
            return Some(format!("floating coordinate {c} is mapped onto ordered coordinates"));
        }
    }
    if cone.blocks.len() <= 1 {
        return None;
    }
    let mut target: Vec<Option<usize>> = vec![None; cone.blocks.len()];
    let mut claim = |src: usize, dst: usize| -> bool {
        match target[src] {
            None => {
                target[src] = Some(dst);
                true
            }
            Some(t) => t == dst,
        }
    };
    for c in 0..d {
        for r in 0..d {
            if !m.free.get(r, c).is_zero() && !claim(free_block[c], free_block[r]) {
                return Some("map does not permute the blocks of the positive cone".into());
            }
        }
        for (r, t) in g.torsion.iter().enumerate() {
            if !m.from_free.get(r, c).is_multiple_of(t) && !claim(free_block[c], torsion_block[r]) {
                return Some("map does not permute the blocks of the positive cone".into());
            }
        }
    }
    for c in 0..g.torsion.len() {
        for (r, t) in g.torsion.iter().enumerate() {
            if !m.torsion.get(r, c).is_multiple_of(t) && !claim(torsion_block[c], torsion_block[r]) {
                return Some("map does not permute the blocks of the positive cone".into());
            }
        }
    }
    let mut seen = vec![false; cone.blocks.len()];
    for t in target.iter().flatten() {
        if std::mem::replace(&mut seen[*t], true) {
            return Some("map does not permute the blocks of the positive cone".into());
        }
    }
    None
}

/// Generators `x − σᵢ(x)` for `x` ranging over the free then torsion basis,
/// generator by generator, with the HNF basis of their free parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoboundarySubgroup {
    pub generators: Vec<GroupElement>,
    pub free_basis: LatticeBasis,
    /// Column `j` expresses free basis vector `j` in the generators.
    pub transform: IntMatrix,
}

pub fn coboundary_generators(maps: &[GroupMap], g: &OrderedGroup) -> Vec<GroupElement> {
    let (d, t) = (g.free_rank, g.torsion.len());
    let mut out = Vec::new();
    for m in maps {
        for k in 0..d + t {
            let mut e = GroupElement::zero(d, t);
            if k < d {
                e.free[k] = BigInt::one();
            } else {
                e.torsion[k - d] = BigInt::one();
            }
            let e = e.reduced(&g.torsion);
            out.push(e.sub(&m.apply(&e, &g.torsion), &g.torsion));
        }
    }
    out
}

pub fn coboundary_subgroup(sigma: &FreeGroupAction, g: &OrderedGroup) -> CoboundarySubgroup {
    subgroup_of(coboundary_generators(&sigma.generators, g), g.free_rank)
}

fn subgroup_of(generators: Vec<GroupElement>, d: usize) -> CoboundarySubgroup {
    let free: Vec<Vec<BigInt>> = generators.iter().map(|x| x.free.clone()).collect();
    let (free_basis, transform) = hermite_basis_with_transform(&free, d);
    CoboundarySubgroup {
        generators,
        free_basis,
        transform,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoboundaryVerdict {
    /// `functional` vanishes on the subgroup, is positive on every cone
    /// generator and takes the value 1 at the unit. `faithful` is set when
    /// a single separation stage sufficed, in which case the functional is
    /// strictly positive on every nonzero positive element.
    Holds {
        functional: Functional,
        stages: Vec<SeparationStage>,
        faithful: bool,
    },
    /// A nonzero positive element of the subgroup, with its coefficients
    /// over the subgroup generators.
    Fails {
        element: GroupElement,
        combination: Vec<BigInt>,
        /// For endomorphisms: `x` with `x − H x = element`.
        preimage: Option<GroupElement>,
    },
}

impl CoboundaryVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, CoboundaryVerdict::Holds { .. })
    }
}

fn decide(
    sub: &CoboundarySubgroup,
    g: &OrderedGroup,
    cone: &PositiveCone,
    deadline: &Deadline,
) -> Result<CoboundaryVerdict> {
    let basis = sub.free_basis.vectors();
    match subspace_cone_intersect(&basis, cone, deadline)? {
        IntersectionVerdict::Separation { stages } => {
            let mut elements: Vec<Vec<BigInt>> =
                cone.generators().into_iter().map(|x| x.free).collect();
            elements.push(g.unit.free.clone());
            let f = Functional::new(combine_stages_or_zero(&stages, &elements, g.free_rank)?);
            let functional = f.normalized_at(&g.unit)?;
            Ok(CoboundaryVerdict::Holds {
                functional,
                faithful: stages.len() <= 1,
                stages,
            })
        }
        IntersectionVerdict::NonzeroPoint { coefficients, .. } => {
            let mut combination: Vec<BigInt> = (0..sub.generators.len())
                .map(|k| {
                    coefficients
                        .iter()
                        .enumerate()
                        .fold(BigInt::zero(), |acc, (j, c)| acc + c * sub.transform.get(k, j))
                })
                .collect();
            let mut element = combine(&sub.generators, &combination, g);
            if cone.classify(&element, deadline)? != Positivity::Positive {
                let exponent = g.torsion.iter().fold(BigInt::one(), |acc, t| acc.lcm(t));
                for c in combination.iter_mut() {
                    *c *= &exponent;
                }
                element = combine(&sub.generators, &combination, g);
            }
            if cone.classify(&element, deadline)? != Positivity::Positive {
                return Err(Error::Internal("lifted intersection point is not positive".into()));
            }
            Ok(CoboundaryVerdict::Fails {
                element,
                combination,
                preimage: None,
            })
        }
    }
}

fn combine_stages_or_zero(
    stages: &[SeparationStage],
    elements: &[Vec<BigInt>],
    d: usize,
) -> Result<Vec<Rational>> {
    if stages.is_empty() {
        return Ok(vec![Rational::zero(); d]);
    }
    combine_stages(stages, elements)
}

fn combine(gens: &[GroupElement], coeffs: &[BigInt], g: &OrderedGroup) -> GroupElement {
    gens.iter()
        .zip(coeffs)
        .fold(g.zero_element(), |acc, (x, c)| acc.add(&x.scale(c, &g.torsion), &g.torsion))
}

pub fn check_coboundary(sigma: &FreeGroupAction, g: &OrderedGroup) -> Result<CoboundaryVerdict> {
    check_coboundary_with_deadline(sigma, g, &Deadline::none())
}

pub fn check_coboundary_with_deadline(
    sigma: &FreeGroupAction,
    g: &OrderedGroup,
    deadline: &Deadline,
) -> Result<CoboundaryVerdict> {
    validate_action(sigma, g)?;
    let cone = g.positive_cone()?;
    decide(&coboundary_subgroup(sigma, g), g, &cone, deadline)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MfWitness {
    /// The subgroup `H` of the definition is always all of `K`.
    pub subgroup_is_whole_group: bool,
    pub mu: Functional,
    pub set: Vec<GroupElement>,
    /// `μ(s)` in integer form, one per element of `set`.
    pub values: Vec<BigInt>,
    /// `μ(σᵢ(s)) − μ(s)`, indexed by generator then element.
    pub residuals: Vec<Vec<BigInt>>,
    /// `μ(σᵢ⁻¹(s)) − μ(s)`.
    pub inverse_residuals: Vec<Vec<BigInt>>,
}

impl MfWitness {
    pub fn is_sound(&self) -> bool {
        self.values.iter().all(|v| v >= &BigInt::one())
            && self
                .residuals
                .iter()
                .chain(&self.inverse_residuals)
                .flatten()
                .all(|r| r.is_zero())
    }
}

/// Integer functional constant on orbits and positive on `set`, which
/// defaults to the cone generators.
pub fn mf_witness(
    sigma: &FreeGroupAction,
    g: &OrderedGroup,
    set: Option<Vec<GroupElement>>,
) -> Result<MfWitness> {
    mf_witness_with_deadline(sigma, g, set, &Deadline::none())
}

pub fn mf_witness_with_deadline(
    sigma: &FreeGroupAction,
    g: &OrderedGroup,
    set: Option<Vec<GroupElement>>,
    deadline: &Deadline,
) -> Result<MfWitness> {
    validate_action(sigma, g)?;
    let cone = g.positive_cone()?;
    let set = match set {
        Some(s) => s,
        None => cone.generators(),
    };
    for s in &set {
        g.check_element(s)?;
        if cone.classify(&s.clone().reduced(&g.torsion), deadline)? != Positivity::Positive {
            return Err(Error::NotPositive(s.clone()));
        }
    }
    let (functional, stages) = match decide(&coboundary_subgroup(sigma, g), g, &cone, deadline)? {
        CoboundaryVerdict::Fails { element, .. } => return Err(Error::CoboundaryFails(element)),
        CoboundaryVerdict::Holds {
            functional, stages, ..
        } => (functional, stages),
    };
    let functional = if stages.len() > 1 {
        let mut elements: Vec<Vec<BigInt>> = set.iter().map(|s| s.free.clone()).collect();
        elements.extend(cone.generators().into_iter().map(|x| x.free));
        elements.push(g.unit.free.clone());
        Functional::new(combine_stages(&stages, &elements)?).normalized_at(&g.unit)?
    } else {
        functional
    };
    let mu = crate::cone::clear_denominators(&functional);
    let values: Vec<BigInt> = set.iter().map(|s| mu.eval_integer(s)).collect();
    let residual_rows = |maps: Vec<GroupMap>| -> Vec<Vec<BigInt>> {
        maps.iter()
            .map(|m| {
                set.iter()
                    .zip(&values)
                    .map(|(s, v)| mu.eval_integer(&m.apply(s, &g.torsion)) - v)
                    .collect()
            })
            .collect()
    };
    let residuals = residual_rows(sigma.generators.clone());
    let inverses = sigma
        .generators
        .iter()
        .map(|m| m.inverse(&g.torsion).ok_or_else(|| Error::Internal("generator not invertible".into())))
        .collect::<Result<Vec<_>>>()?;
    let inverse_residuals = residual_rows(inverses);
    let w = MfWitness {
        subgroup_is_whole_group: true,
        mu,
        set,
        values,
        residuals,
        inverse_residuals,
    };
    if !w.is_sound() {
        return Err(Error::Internal("MF witness failed its own checks".into()));
    }
    Ok(w)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantQuotient {
    pub group: OrderedGroup,
    pub presentation: QuotientPresentation,
    /// Guaranteed by a single-stage separation certificate.
    pub faithful: bool,
}

impl InvariantQuotient {
    pub fn project(&self, x: &GroupElement) -> GroupElement {
        let (f, t) = self.presentation.project(&x.coords());
        GroupElement::new(f, t)
    }
}

/// `L = K / H_σ` with the image cone and unit `π(u)`.
pub fn invariant_quotient(sigma: &FreeGroupAction, g: &OrderedGroup) -> Result<InvariantQuotient> {
    invariant_quotient_with_deadline(sigma, g, &Deadline::none())
}

pub fn invariant_quotient_with_deadline(
    sigma: &FreeGroupAction,
    g: &OrderedGroup,
    deadline: &Deadline,
) -> Result<InvariantQuotient> {
    validate_action(sigma, g)?;
    let cone = g.positive_cone()?;
    let sub = coboundary_subgroup(sigma, g);
    let faithful = match decide(&sub, g, &cone, deadline)? {
        CoboundaryVerdict::Fails { element, .. } => return Err(Error::CoboundaryFails(element)),
        CoboundaryVerdict::Holds { faithful, .. } => faithful,
    };
    if cone.blocks.len() > 1 {
        return Err(Error::Unsupported(
            "invariant quotient of a product cone with several blocks".into(),
        ));
    }
    let rels: Vec<Vec<BigInt>> = sub.generators.iter().map(|x| x.coords()).collect();
    let mut pres = quotient_presentation(g.free_rank, &g.torsion, &rels);
    let project = |p: &QuotientPresentation, x: &GroupElement| {
        let (f, t) = p.project(&x.coords());
        GroupElement::new(f, t)
    };

    let floating = cone.floating();
    let lf = pres.free_rank;
    let degree1 = if floating.is_empty() {
        0
    } else {
        let images: Vec<Vec<BigInt>> = floating
            .iter()
            .map(|&i| {
                let mut e = g.zero_element();
                e.free[i] = BigInt::one();
                project(&pres, &e).free
            })
            .collect();
        let f = saturate(&hermite_basis(&images, lf));
        let r = f.rank();
        if r > 0 {
            // rows of U reordered so that the saturated image of the
            // floating coordinates becomes the last r coordinates
            let snf = smith_normal_form(f.matrix());
            let mut rows: Vec<Vec<BigInt>> = (r..lf).map(|i| snf.u.row(i)).collect();
            rows.extend((0..r).map(|i| snf.u.row(i)));
            let p = IntMatrix::from_rows(&rows);
            pres.free_projection = p.mul(&pres.free_projection);
        }
        r
    };

    let unit = project(&pres, &g.unit);
    let degree0 = lf - degree1;
    let gens: Vec<GroupElement> = cone
        .generators()
        .iter()
        .map(|x| GroupElement::free_only(project(&pres, x).free[..degree0].to_vec()))
        .collect();
    let group_cone = if floating.is_empty() {
        ConeSpec::Generators(
            gens.into_iter()
                .map(|x| GroupElement::new(x.free, Vec::new()))
                .collect(),
        )
    } else {
        ConeSpec::StrictGraded {
            degree0_rank: degree0,
            base: Box::new(ConeSpec::Generators(gens)),
        }
    };
    let group = OrderedGroup::new(lf, pres.torsion_invariants.clone(), group_cone, unit);
    Ok(InvariantQuotient {
        group,
        presentation: pres,
        faithful,
    })
}

/// Checks that `[H]` is a positive endomorphism of `G`.
pub fn validate_endomorphism(h: &GroupMap, g: &OrderedGroup) -> Result<()> {
    g.validate_structure()?;
    let cone = g.positive_cone()?;
    match map_violations(h, g, &cone, false)?.into_iter().next() {
        Some(v) => Err(Error::InvalidEndomorphism(v)),
        None => Ok(()),
    }
}

/// Does `[H] x ≤ x` force `[H] x = x`? Equivalently, does the image of
/// `I − [H]` miss the nonzero positives?
pub fn check_pimsner(h: &GroupMap, g: &OrderedGroup) -> Result<CoboundaryVerdict> {
    check_pimsner_with_deadline(h, g, &Deadline::none())
}

pub fn check_pimsner_with_deadline(
    h: &GroupMap,
    g: &OrderedGroup,
    deadline: &Deadline,
) -> Result<CoboundaryVerdict> {
    validate_endomorphism(h, g)?;
    let cone = g.positive_cone()?;
    let sub = subgroup_of(coboundary_generators(std::slice::from_ref(h), g), g.free_rank);
    let verdict = decide(&sub, g, &cone, deadline)?;
    Ok(match verdict {
        CoboundaryVerdict::Fails {
            element,
            combination,
            ..
        } => {
            let d = g.free_rank;
            let x = GroupElement::new(combination[..d].to_vec(), combination[d..].to_vec())
                .reduced(&g.torsion);
            CoboundaryVerdict::Fails {
                element,
                combination,
                preimage: Some(x),
            }
        }
        holds => holds,
    })
}

/// `f · A = f` on the free part.
pub fn is_invariant(f: &[Rational], a: &IntMatrix) -> bool {
    let d = f.len();
    (0..d).all(|j| {
        let col = a.col(j);
        dot_qi(f, &col) == f[j]
    })
}

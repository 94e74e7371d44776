//! K-theoretic data of the one-dimensional building blocks.
//!
//! | kind | K₀ | K₁ |
//! |---|---|---|
//! | point `ℂ` | ℤ | 0 |
//! | circle `C(𝕋)` | ℤ | ℤ |
//! | `C(W_n)` | ℤ ⊕ ℤ/n | 0 |
//! | dimension drop `Ĩ_n` | ℤ | ℤ/n |
//!
//! Every block is ordered strictly: positive iff the free part of K₀ is
//! positive and nonzero, or the element is zero.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::order::{extreme_rays, ConeSpec, GroupElement, Grading, OrderedGroup};

pub use crate::schema::ingest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuildingBlockKind {
    Point,
    Circle,
    Wn(u32),
    DimensionDrop(u32),
}

impl fmt::Display for BuildingBlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuildingBlockKind::Point => write!(f, "point"),
            BuildingBlockKind::Circle => write!(f, "circle"),
            BuildingBlockKind::Wn(n) => write!(f, "wn {n}"),
            BuildingBlockKind::DimensionDrop(n) => write!(f, "dimension-drop {n}"),
        }
    }
}

impl BuildingBlockKind {
    /// Parses a kind name plus the optional `n`.
    pub fn parse(name: &str, n: Option<u32>) -> Result<Self> {
        let need_n = |n: Option<u32>| {
            n.ok_or_else(|| Error::InvalidPresentation(format!("{name} needs an integer n ≥ 2")))
        };
        let kind = match name.to_ascii_lowercase().replace('_', "-").as_str() {
            "point" | "c" => BuildingBlockKind::Point,
            "circle" | "c(t)" => BuildingBlockKind::Circle,
            "wn" | "w" => BuildingBlockKind::Wn(need_n(n)?),
            "dimension-drop" | "dimdrop" | "i" => BuildingBlockKind::DimensionDrop(need_n(n)?),
            other => {
                return Err(Error::InvalidPresentation(format!(
                    "unknown building block {other:?}"
                )))
            }
        };
        match kind {
            BuildingBlockKind::Wn(n) | BuildingBlockKind::DimensionDrop(n) if n < 2 => Err(
                Error::InvalidPresentation(format!("{name} needs n ≥ 2, got {n}")),
            ),
            k => Ok(k),
        }
    }
}

impl FromStr for BuildingBlockKind {
    type Err = Error;

    /// `point`, `circle`, `wn:3`, `dimension-drop:4`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some((name, n)) => {
                let n = n
                    .parse()
                    .map_err(|_| Error::InvalidPresentation(format!("bad block size {n:?}")))?;
                BuildingBlockKind::parse(name, Some(n))
            }
            None => BuildingBlockKind::parse(s, None),
        }
    }
}

pub fn building_block(kind: BuildingBlockKind) -> OrderedGroup {
    amplified_building_block(kind, 1)
}

/// The block tensored with `M_k`: same groups, unit `k·[1]`.
pub fn amplified_building_block(kind: BuildingBlockKind, k: u32) -> OrderedGroup {
    let (k1_free, k0_torsion, k1_torsion) = match kind {
        BuildingBlockKind::Point => (0, None, None),
        BuildingBlockKind::Circle => (1, None, None),
        BuildingBlockKind::Wn(n) => (0, Some(n), None),
        BuildingBlockKind::DimensionDrop(n) => (0, None, Some(n)),
    };
    let torsion: Vec<BigInt> = k0_torsion.into_iter().chain(k1_torsion).map(BigInt::from).collect();
    let free_rank = 1 + k1_free;
    let mut unit = GroupElement::zero(free_rank, torsion.len());
    unit.free[0] = BigInt::from(k);
    let mut g = OrderedGroup::new(
        free_rank,
        torsion,
        ConeSpec::StrictGraded {
            degree0_rank: 1,
            base: Box::new(ConeSpec::Simplicial),
        },
        unit,
    );
    g.grading = Some(Grading {
        k0_free: 1,
        k0_torsion: k0_torsion.map_or(0, |_| 1),
        k1_free,
        k1_torsion: k1_torsion.map_or(0, |_| 1),
    });
    g
}

/// Sum of graded groups ordered strictly over the whole of K₀: positive iff
/// the K₀ free part is a nonzero element of the product of the K₀ cones.
///
/// Summands that are not strictly graded over their own K₀ are combined
/// with the componentwise product order instead.
pub fn graded_direct_sum(blocks: &[OrderedGroup]) -> Result<OrderedGroup> {
    if blocks.is_empty() {
        return Err(Error::InvalidPresentation("empty direct sum".into()));
    }
    let refs: Vec<&OrderedGroup> = blocks.iter().collect();
    let mut sum = crate::order::direct_sum_all(&refs);
    let Some(grading) = sum.grading else {
        return Ok(sum);
    };
    let mut bases = Vec::new();
    for b in blocks {
        let Some(gr) = b.grading else { return Ok(sum) };
        match &b.cone {
            ConeSpec::StrictGraded { degree0_rank, base } if *degree0_rank == gr.k0_free => {
                bases.push((gr.k0_free, base.as_ref().clone()))
            }
            _ => return Ok(sum),
        }
    }
    let base = if bases.iter().all(|(_, b)| *b == ConeSpec::Simplicial) {
        ConeSpec::Simplicial
    } else {
        let total = grading.k0_free;
        let mut gens = Vec::new();
        let mut offset = 0;
        for (rank, base) in &bases {
            let local: Vec<Vec<BigInt>> = match base {
                ConeSpec::Simplicial => (0..*rank)
                    .map(|i| {
                        let mut v = vec![BigInt::zero(); *rank];
                        v[i] = BigInt::from(1);
                        v
                    })
                    .collect(),
                ConeSpec::Generators(gs) => gs.iter().map(|g| g.free.clone()).collect(),
                ConeSpec::Inequalities(rows) => extreme_rays(rows, *rank)?,
                _ => return Ok(sum),
            };
            for l in local {
                let mut v = vec![BigInt::zero(); total];
                for (i, x) in l.into_iter().enumerate() {
                    v[offset + i] = x;
                }
                gens.push(GroupElement::free_only(v));
            }
            offset += rank;
        }
        ConeSpec::Generators(gens)
    };
    sum.cone = ConeSpec::StrictGraded {
        degree0_rank: grading.k0_free,
        base: Box::new(base),
    };
    Ok(sum)
}

/// `(K₀ free rank, K₀ torsion, K₁ free rank, K₁ torsion)` of a graded group.
pub fn graded_ranks(g: &OrderedGroup) -> Option<(usize, Vec<BigInt>, usize, Vec<BigInt>)> {
    let gr = g.grading?;
    Some((
        gr.k0_free,
        g.torsion[..gr.k0_torsion].to_vec(),
        gr.k1_free,
        g.torsion[gr.k0_torsion..].to_vec(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ints;
    use crate::order::{direct_sum, Positivity};

    #[test]
    fn table_ranks() {
        for n in 2..=12u32 {
            for kind in [
                BuildingBlockKind::Point,
                BuildingBlockKind::Circle,
                BuildingBlockKind::Wn(n),
                BuildingBlockKind::DimensionDrop(n),
            ] {
                let g = building_block(kind);
                g.validate().unwrap();
                let (f0, t0, f1, t1) = graded_ranks(&g).unwrap();
                let nn = BigInt::from(n);
                let expected = match kind {
                    BuildingBlockKind::Point => (1, vec![], 0, vec![]),
                    BuildingBlockKind::Circle => (1, vec![], 1, vec![]),
                    BuildingBlockKind::Wn(_) => (1, vec![nn], 0, vec![]),
                    BuildingBlockKind::DimensionDrop(_) => (1, vec![], 0, vec![nn]),
                };
                assert_eq!((f0, t0, f1, t1), expected, "{kind}");
            }
        }
    }

    #[test]
    fn circle_is_strict() {
        let c = building_block(BuildingBlockKind::Circle);
        let x = |a, b| GroupElement::from_i64(&[a, b], &[]);
        assert_eq!(c.is_positive(&x(0, 1)).unwrap(), Positivity::NotPositive);
        assert_eq!(c.is_positive(&x(1, -4)).unwrap(), Positivity::Positive);
    }

    #[test]
    fn graded_sums() {
        let p = building_block(BuildingBlockKind::Point);
        let pp = graded_direct_sum(&[p.clone(), p.clone()]).unwrap();
        assert_eq!(
            pp.cone,
            ConeSpec::StrictGraded {
                degree0_rank: 2,
                base: Box::new(ConeSpec::Simplicial)
            }
        );
        let c = building_block(BuildingBlockKind::Circle);
        let cc = graded_direct_sum(&[c.clone(), c.clone()]).unwrap();
        let (f0, _, f1, _) = graded_ranks(&cc).unwrap();
        assert_eq!((f0, f1), (2, 2));
        cc.validate().unwrap();
        // K₁ of the second circle floats even when its K₀ vanishes
        let x = GroupElement::from_i64(&[1, 0, 0, 3], &[]);
        assert_eq!(cc.is_positive(&x).unwrap(), Positivity::Positive);

        let pw = graded_direct_sum(&[p.clone(), building_block(BuildingBlockKind::Wn(2))]).unwrap();
        let (f0, t0, _, _) = graded_ranks(&pw).unwrap();
        assert_eq!((f0, t0), (2, ints(&[2])));
        pw.validate().unwrap();

        let pc = direct_sum(&p, &c);
        let (f0, _, f1, _) = graded_ranks(&pc).unwrap();
        assert_eq!((f0, f1), (2, 1));
        pc.validate().unwrap();
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("wn:3".parse::<BuildingBlockKind>().unwrap(), BuildingBlockKind::Wn(3));
        assert_eq!(
            BuildingBlockKind::parse("dimension-drop", Some(4)).unwrap(),
            BuildingBlockKind::DimensionDrop(4)
        );
        assert!(BuildingBlockKind::parse("wn", Some(1)).is_err());
        assert!(BuildingBlockKind::parse("wn", None).is_err());
    }
}

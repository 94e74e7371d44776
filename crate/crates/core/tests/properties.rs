use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use kdyn_core::dynamics::{check_coboundary, check_pimsner, validate_action, FreeGroupAction, GroupMap};
use kdyn_core::lattice::{
    hermite_basis, hermite_columns, lattice_membership, saturate, saturation_index, smith_normal_form, IntMatrix,
};
use kdyn_core::order::{ConeSpec, GroupElement, OrderedGroup, Positivity};

fn matrix(rows: usize, cols: usize, entries: &[i64]) -> IntMatrix {
    let data = entries.iter().take(rows * cols).map(|&x| BigInt::from(x)).collect();
    IntMatrix::from_vec(rows, cols, data)
}

fn arb_matrix(max: usize, bound: i64) -> impl Strategy<Value = IntMatrix> {
    (1..=max, 1..=max).prop_flat_map(move |(r, c)| {
        prop::collection::vec(-bound..=bound, r * c).prop_map(move |e| matrix(r, c, &e))
    })
}

/// Product of elementary operations `e_i += e_j` and a permutation: a
/// unimodular matrix with nonnegative entries.
fn positive_unimodular(d: usize, ops: &[(usize, usize)], perm_seed: usize) -> IntMatrix {
    let mut m = IntMatrix::identity(d);
    for &(i, j) in ops {
        let (i, j) = (i % d, j % d);
        if i == j {
            continue;
        }
        let mut e = IntMatrix::identity(d);
        e.set(i, j, BigInt::one());
        m = e.mul(&m);
    }
    let mut p = IntMatrix::zeros(d, d);
    for i in 0..d {
        p.set(i, (i + perm_seed) % d, BigInt::one());
    }
    p.mul(&m)
}

fn small(m: &IntMatrix) -> bool {
    m.row_vecs().iter().flatten().all(|x| x.abs() <= BigInt::from(3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn smith_form_is_correct(m in arb_matrix(6, 9)) {
        let s = smith_normal_form(&m);
        prop_assert_eq!(s.u.mul(&m).mul(&s.v), s.d.clone());
        prop_assert!(s.u.is_unimodular() && s.v.is_unimodular());
        let diag = s.diagonal();
        for i in 0..s.d.rows() {
            for j in 0..s.d.cols() {
                if i != j {
                    prop_assert!(s.d.get(i, j).is_zero());
                }
            }
        }
        for w in diag.windows(2) {
            prop_assert!(!w[0].is_negative() && !w[1].is_negative());
            if w[0].is_zero() {
                prop_assert!(w[1].is_zero());
            } else {
                prop_assert!((&w[1] % &w[0]).is_zero());
            }
        }
    }

    #[test]
    fn hermite_is_canonical(m in arb_matrix(6, 9), ops in prop::collection::vec((0usize..6, 0usize..6), 0..6)) {
        let (h, t, rank) = hermite_columns(&m);
        prop_assert_eq!(m.mul(&t), h.clone());
        prop_assert!(t.is_unimodular());
        for j in rank..h.cols() {
            prop_assert!(h.col(j).iter().all(Zero::is_zero));
        }
        // same lattice from a different generating set gives the same form
        let w = positive_unimodular(m.cols(), &ops, 0);
        let (h2, _, rank2) = hermite_columns(&m.mul(&w));
        prop_assert_eq!(rank, rank2);
        prop_assert_eq!(h, h2);
    }

    #[test]
    fn membership_round_trip(m in arb_matrix(5, 6), c in prop::collection::vec(-5i64..=5, 5)) {
        let vectors = m.col_vecs();
        let b = hermite_basis(&vectors, m.rows());
        let coeffs: Vec<BigInt> = c.iter().take(m.cols()).map(|&x| BigInt::from(x)).collect();
        let v = m.mul_vec(&coeffs);
        let found = lattice_membership(&v, &b);
        prop_assert!(found.is_some());
        prop_assert_eq!(b.combine(&found.unwrap()), v);
    }

    #[test]
    fn saturation_is_idempotent(m in arb_matrix(5, 9)) {
        let b = hermite_basis(&m.col_vecs(), m.rows());
        let s = saturate(&b);
        prop_assert_eq!(saturate(&s), s.clone());
        prop_assert!(s.contains_lattice(&b));
        prop_assert!(saturation_index(&s).is_one());
        prop_assert_eq!(s.rank(), b.rank());
    }

    #[test]
    fn positivity_is_additive(
        gens in prop::collection::vec(prop::collection::vec(-3i64..=3, 3), 1..5),
        a in prop::collection::vec(0i64..=4, 7),
        b in prop::collection::vec(0i64..=4, 7),
    ) {
        let mut all: Vec<Vec<i64>> = vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]];
        all.extend(gens.into_iter().filter(|g| g.iter().sum::<i64>() > 0));
        let g = OrderedGroup::new(
            3,
            vec![],
            ConeSpec::Generators(all.iter().map(|v| GroupElement::from_i64(v, &[])).collect()),
            GroupElement::from_i64(&[1, 1, 1], &[]),
        );
        prop_assume!(g.validate_structure().is_ok());
        let combo = |w: &[i64]| {
            let mut x = vec![0i64; 3];
            for (gen, k) in all.iter().zip(w) {
                for (xi, gi) in x.iter_mut().zip(gen) {
                    *xi += k * gi;
                }
            }
            GroupElement::from_i64(&x, &[])
        };
        let (x, y) = (combo(&a), combo(&b));
        prop_assert!(g.is_positive(&x).unwrap() != Positivity::NotPositive);
        prop_assert!(g.is_positive(&y).unwrap() != Positivity::NotPositive);
        let s = x.add(&y, &[]);
        prop_assert!(g.is_positive(&s).unwrap() != Positivity::NotPositive);
    }

    #[test]
    fn verdict_is_conjugation_invariant(
        d in 2usize..=4,
        ops in prop::collection::vec((0usize..4, 0usize..4), 0..4),
        perm in 0usize..4,
        q_ops in prop::collection::vec((0usize..4, 0usize..4), 1..4),
    ) {
        let a = positive_unimodular(d, &ops, perm);
        prop_assume!(small(&a));
        let g = OrderedGroup::simplicial(&vec![1; d]);
        let sigma = FreeGroupAction::from_matrices(vec![a.clone()], 0);
        prop_assume!(validate_action(&sigma, &g).is_ok());
        // transport to the cone spanned by the columns of q
        let mut q = IntMatrix::identity(d);
        for &(i, j) in &q_ops {
            let (i, j) = (i % d, j % d);
            if i != j {
                let mut e = IntMatrix::identity(d);
                e.set(i, j, BigInt::from(-1));
                q = e.mul(&q);
            }
        }
        let q_inv = q.unimodular_inverse().unwrap();
        let cone = ConeSpec::Generators(q.col_vecs().into_iter().map(GroupElement::free_only).collect());
        let unit = q.mul_vec(&vec![BigInt::one(); d]);
        let h = OrderedGroup::new(d, vec![], cone, GroupElement::free_only(unit));
        let tau = sigma.conjugate_free(&q, &q_inv);
        prop_assert_eq!(
            check_coboundary(&sigma, &g).unwrap().holds(),
            check_coboundary(&tau, &h).unwrap().holds()
        );
    }

    #[test]
    fn pimsner_matches_coboundary(
        d in 1usize..=4,
        ops in prop::collection::vec((0usize..4, 0usize..4), 0..4),
        perm in 0usize..4,
    ) {
        let a = positive_unimodular(d, &ops, perm);
        let unit = fixed_positive(&a);
        prop_assume!(unit.is_some());
        let g = OrderedGroup::new(d, vec![], ConeSpec::Simplicial, GroupElement::free_only(unit.unwrap()));
        let h = GroupMap::free_only(a.clone(), 0);
        let sigma = FreeGroupAction::from_matrices(vec![a], 0);
        prop_assert_eq!(
            check_pimsner(&h, &g).unwrap().holds(),
            check_coboundary(&sigma, &g).unwrap().holds()
        );
    }
}

/// A nonzero nonnegative vector with entries at most 3 fixed by `a`.
fn fixed_positive(a: &IntMatrix) -> Option<Vec<BigInt>> {
    let d = a.rows();
    let total = 4usize.pow(d as u32);
    (1..total)
        .map(|mut k| {
            (0..d)
                .map(|_| {
                    let v = BigInt::from(k % 4);
                    k /= 4;
                    v
                })
                .collect::<Vec<_>>()
        })
        .find(|x| &a.mul_vec(x) == x)
}

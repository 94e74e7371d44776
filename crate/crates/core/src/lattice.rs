//! Exact integer linear algebra: Smith and Hermite normal forms, sublattice
//! bases, membership, saturation and quotient presentations.
//!
//! Everything here works over arbitrary-precision integers. Lattices are
//! stored as column bases in column-style Hermite normal form: pivot rows
//! strictly increase from left to right, pivots are positive, and every entry
//! to the left of a pivot lies in `[0, pivot)`. That form is canonical, so two
//! generating sets span the same lattice iff their bases compare equal.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::Rational;

/// Dense row-major integer matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:?}", self.row(i).iter().map(|x| x.to_string()).collect::<Vec<_>>())?;
        }
        write!(f, "]")
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<BigInt>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must equal rows * cols");
        IntMatrix { rows, cols, data }
    }

    /// Panics on ragged input.
    pub fn from_rows(rows: &[Vec<BigInt>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix");
            data.extend(row.iter().cloned());
        }
        IntMatrix { rows: r, cols: c, data }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let v: Vec<Vec<BigInt>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        Self::from_rows(&v)
    }

    /// Matrix whose columns are the given vectors, each of length `height`.
    pub fn from_columns(cols: &[Vec<BigInt>], height: usize) -> Self {
        let mut m = Self::zeros(height, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), height, "column length mismatch");
            for (i, x) in c.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vec<BigInt> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn col_vecs(&self) -> Vec<Vec<BigInt>> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "vector length mismatch");
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .fold(BigInt::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Bareiss fraction-free determinant. Panics on non-square input.
    pub fn determinant(&self) -> BigInt {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if a.get(k, k).is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !a.get(i, k).is_zero()) else {
                    return BigInt::zero();
                };
                a.swap_rows(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
            }
            prev = a.get(k, k).clone();
        }
        sign * a.get(n - 1, n - 1)
    }

    pub fn is_unimodular(&self) -> bool {
        self.is_square() && self.determinant().abs().is_one()
    }

    /// Exact inverse of a unimodular matrix; `None` otherwise.
    pub fn unimodular_inverse(&self) -> Option<IntMatrix> {
        if !self.is_unimodular() {
            return None;
        }
        let inv = rational_inverse(self)?;
        let mut out = Self::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let q = &inv[i][j];
                if !q.is_integer() {
                    return None;
                }
                out.set(i, j, q.to_integer());
            }
        }
        Some(out)
    }

    /// Rank over the rationals.
    pub fn rank(&self) -> usize {
        let rows: Vec<Vec<Rational>> = (0..self.rows)
            .map(|i| self.row(i).into_iter().map(Rational::from_integer).collect())
            .collect();
        rational_rank(rows)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += k * row[src]
    fn add_row(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = self.get(src, j) * k;
            self.data[dst * self.cols + j] += v;
        }
    }

    /// col[dst] += k * col[src]
    fn add_col(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = self.get(i, src) * k;
            self.data[i * self.cols + dst] += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -self.get(i, j);
            self.set(i, j, v);
        }
    }

    fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let v = -self.get(i, j);
            self.set(i, j, v);
        }
    }
}

pub(crate) fn rational_rank(mut rows: Vec<Vec<Rational>>) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..ncols {
        let Some(p) = (rank..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank][c].clone();
        for i in 0..rows.len() {
            if i != rank && !rows[i][c].is_zero() {
                let f = &rows[i][c] / &pivot;
                for j in c..ncols {
                    let v = &rows[rank][j] * &f;
                    rows[i][j] -= v;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn rational_inverse(m: &IntMatrix) -> Option<Vec<Vec<Rational>>> {
    let n = m.rows();
    let mut a: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            let mut r: Vec<Rational> = m.row(i).into_iter().map(Rational::from_integer).collect();
            r.extend((0..n).map(|j| {
                if i == j {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !a[i][c].is_zero())?;
        a.swap(c, p);
        let pivot = a[c][c].clone();
        for v in a[c].iter_mut() {
            *v /= &pivot;
        }
        for i in 0..n {
            if i != c && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..2 * n {
                    let v = &a[c][j] * &f;
                    a[i][j] -= v;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Result of [`smith_normal_form`]: `u · m · v = d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SmithForm {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows().min(self.d.cols()))
            .map(|i| self.d.get(i, i).clone())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|x| !x.is_zero()).count()
    }
}

/// Smith normal form by elementary row and column operations.
///
/// Returns unimodular `u`, `v` and diagonal `d = u · m · v` with nonnegative
/// diagonal entries forming a divisibility chain.
pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    let (rows, cols) = (m.rows(), m.cols());
    let mut d = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);

    for t in 0..rows.min(cols) {
        loop {
            // smallest nonzero entry of the trailing block becomes the pivot
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    let x = d.get(i, j);
                    if x.is_zero() {
                        continue;
                    }
                    match best {
                        Some((bi, bj)) if d.get(bi, bj).abs() <= x.abs() => {}
                        _ => best = Some((i, j)),
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return SmithForm { u, d, v };
            };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let mut clean = true;
            for i in t + 1..rows {
                if d.get(i, t).is_zero() {
                    continue;
                }
                let q = -d.get(i, t).div_floor(d.get(t, t));
                d.add_row(i, t, &q);
                u.add_row(i, t, &q);
                if !d.get(i, t).is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                if d.get(t, j).is_zero() {
                    continue;
                }
                let q = -d.get(t, j).div_floor(d.get(t, t));
                d.add_col(j, t, &q);
                v.add_col(j, t, &q);
                if !d.get(t, j).is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // pivot must divide the rest of the block
            let pivot = d.get(t, t).clone();
            let bad = (t + 1..rows)
                .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                .find(|&(i, j)| !d.get(i, j).is_multiple_of(&pivot));
            match bad {
                Some((i, _)) => {
                    let one = BigInt::one();
                    d.add_row(t, i, &one);
                    u.add_row(t, i, &one);
                }
                None => break,
            }
        }
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    SmithForm { u, d, v }
}

/// Column-style Hermite normal form of the columns of `a`, with transform.
///
/// Returns `(h, t)` where `t` is unimodular and `a · t = h`; the nonzero
/// columns of `h` come first and form the canonical basis.
pub fn hermite_columns(a: &IntMatrix) -> (IntMatrix, IntMatrix, usize) {
    let (rows, cols) = (a.rows(), a.cols());
    let mut h = a.clone();
    let mut t = IntMatrix::identity(cols);
    let mut c = 0;
    for i in 0..rows {
        if c == cols {
            break;
        }
        // gcd-eliminate row i across columns c..
        loop {
            let mut best: Option<usize> = None;
            for j in c..cols {
                if h.get(i, j).is_zero() {
                    continue;
                }
                match best {
                    Some(b) if h.get(i, b).abs() <= h.get(i, j).abs() => {}
                    _ => best = Some(j),
                }
            }
            let Some(b) = best else { break };
            h.swap_cols(c, b);
            t.swap_cols(c, b);
            let mut done = true;
            for j in c + 1..cols {
                if h.get(i, j).is_zero() {
                    continue;
                }
                let q = -h.get(i, j).div_floor(h.get(i, c));
                h.add_col(j, c, &q);
                t.add_col(j, c, &q);
                if !h.get(i, j).is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h.get(i, c).is_zero() {
            continue;
        }
        if h.get(i, c).is_negative() {
            h.negate_col(c);
            t.negate_col(c);
        }
        let pivot = h.get(i, c).clone();
        for l in 0..c {
            let q = -h.get(i, l).div_floor(&pivot);
            h.add_col(l, c, &q);
            t.add_col(l, c, &q);
        }
        c += 1;
    }
    (h, t, c)
}

/// A sublattice of `ℤ^ambient_rank` with its canonical HNF column basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticeBasis {
    ambient_rank: usize,
    basis: IntMatrix,
}

impl LatticeBasis {
    pub fn zero(ambient_rank: usize) -> Self {
        LatticeBasis {
            ambient_rank,
            basis: IntMatrix::zeros(ambient_rank, 0),
        }
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.basis
    }

    pub fn vectors(&self) -> Vec<Vec<BigInt>> {
        self.basis.col_vecs()
    }

    pub fn combine(&self, c: &[BigInt]) -> Vec<BigInt> {
        self.basis.mul_vec(c)
    }

    /// Row index of the pivot of each basis column.
    pub fn pivots(&self) -> Vec<usize> {
        (0..self.rank())
            .map(|j| {
                (0..self.ambient_rank)
                    .find(|&i| !self.basis.get(i, j).is_zero())
                    .expect("HNF columns are nonzero")
            })
            .collect()
    }

    pub fn contains_lattice(&self, other: &LatticeBasis) -> bool {
        other
            .vectors()
            .iter()
            .all(|v| lattice_membership(v, self).is_some())
    }

    /// Whether `v` lies in the rational span of the lattice.
    pub fn spans_rationally(&self, v: &[BigInt]) -> bool {
        let mut cols = self.vectors();
        let before = IntMatrix::from_columns(&cols, self.ambient_rank).rank();
        cols.push(v.to_vec());
        IntMatrix::from_columns(&cols, self.ambient_rank).rank() == before
    }
}

/// HNF basis of the subgroup generated by `vectors`.
pub fn hermite_basis(vectors: &[Vec<BigInt>], ambient_rank: usize) -> LatticeBasis {
    hermite_basis_with_transform(vectors, ambient_rank).0
}

/// Like [`hermite_basis`], also returning for every basis column the integer
/// combination of the input vectors producing it (`k × rank`).
pub fn hermite_basis_with_transform(
    vectors: &[Vec<BigInt>],
    ambient_rank: usize,
) -> (LatticeBasis, IntMatrix) {
    for v in vectors {
        assert_eq!(v.len(), ambient_rank, "vector length must equal ambient rank");
    }
    if vectors.is_empty() {
        return (LatticeBasis::zero(ambient_rank), IntMatrix::zeros(0, 0));
    }
    let a = IntMatrix::from_columns(vectors, ambient_rank);
    let (h, t, rank) = hermite_columns(&a);
    let mut basis = IntMatrix::zeros(ambient_rank, rank);
    let mut transform = IntMatrix::zeros(vectors.len(), rank);
    for j in 0..rank {
        for i in 0..ambient_rank {
            basis.set(i, j, h.get(i, j).clone());
        }
        for i in 0..vectors.len() {
            transform.set(i, j, t.get(i, j).clone());
        }
    }
    (
        LatticeBasis {
            ambient_rank,
            basis,
        },
        transform,
    )
}

/// Integer coefficients `c` with `B · c = v`, if `v` lies in the lattice.
pub fn lattice_membership(v: &[BigInt], b: &LatticeBasis) -> Option<Vec<BigInt>> {
    if v.len() != b.ambient_rank {
        return None;
    }
    let pivots = b.pivots();
    let mut c: Vec<BigInt> = Vec::with_capacity(b.rank());
    for (j, &p) in pivots.iter().enumerate() {
        let mut r = v[p].clone();
        for (l, cl) in c.iter().enumerate() {
            r -= b.basis.get(p, l) * cl;
        }
        let piv = b.basis.get(p, j);
        if !r.is_multiple_of(piv) {
            return None;
        }
        c.push(r / piv);
    }
    (b.combine(&c) == v).then_some(c)
}

/// Basis of `span_ℚ(B) ∩ ℤ^d`.
pub fn saturate(b: &LatticeBasis) -> LatticeBasis {
    let k = b.rank();
    if k == 0 {
        return b.clone();
    }
    let snf = smith_normal_form(b.matrix());
    let uinv = snf
        .u
        .unimodular_inverse()
        .expect("Smith transforms are unimodular");
    let cols: Vec<Vec<BigInt>> = (0..k).map(|j| uinv.col(j)).collect();
    hermite_basis(&cols, b.ambient_rank)
}

/// Index `[saturate(B) : B]`, the product of the elementary divisors.
pub fn saturation_index(b: &LatticeBasis) -> BigInt {
    smith_normal_form(b.matrix())
        .diagonal()
        .iter()
        .filter(|x| !x.is_zero())
        .fold(BigInt::one(), |acc, x| acc * x)
}

/// Lattice of integer vectors `x` with `m · x = 0`.
pub fn integer_kernel(m: &IntMatrix) -> LatticeBasis {
    let snf = smith_normal_form(m);
    let r = snf.rank();
    let cols: Vec<Vec<BigInt>> = (r..m.cols()).map(|j| snf.v.col(j)).collect();
    hermite_basis(&cols, m.cols())
}

/// Presentation of `(ℤ^free ⊕ ⊕ℤ/tᵢ) / H` as `ℤ^f ⊕ ⊕ℤ/sⱼ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientPresentation {
    pub free_rank: usize,
    pub torsion_invariants: Vec<BigInt>,
    /// `free_rank × (ambient free + ambient torsion)`.
    pub free_projection: IntMatrix,
    /// `torsion_invariants.len() × (ambient free + ambient torsion)`; rows are
    /// read modulo the matching invariant.
    pub torsion_projection: IntMatrix,
}

impl QuotientPresentation {
    /// Image of an ambient element given as free ++ torsion coordinates.
    pub fn project(&self, x: &[BigInt]) -> (Vec<BigInt>, Vec<BigInt>) {
        let free = self.free_projection.mul_vec(x);
        let torsion = self
            .torsion_projection
            .mul_vec(x)
            .into_iter()
            .zip(&self.torsion_invariants)
            .map(|(v, m)| v.mod_floor(m))
            .collect();
        (free, torsion)
    }
}

/// Quotient of the ambient group by the subgroup generated by `sub`, each
/// generator written as free coordinates followed by torsion residues.
///
/// Invariant factors come from the Smith form of the stacked relation matrix
/// (torsion relations plus subgroup generators). The free projection is put
/// in row-Hermite form so equal quotients present identically.
pub fn quotient_presentation(
    free_rank: usize,
    ambient_torsion: &[BigInt],
    sub: &[Vec<BigInt>],
) -> QuotientPresentation {
    let n = free_rank + ambient_torsion.len();
    let mut relations: Vec<Vec<BigInt>> = Vec::new();
    for (i, t) in ambient_torsion.iter().enumerate() {
        let mut r = vec![BigInt::zero(); n];
        r[free_rank + i] = t.clone();
        relations.push(r);
    }
    for g in sub {
        assert_eq!(g.len(), n, "subgroup generator has wrong length");
        relations.push(g.clone());
    }
    let r = IntMatrix::from_columns(&relations, n);
    let snf = smith_normal_form(&r);
    let diag = snf.diagonal();
    let rank = snf.rank();

    let mut torsion_invariants = Vec::new();
    let mut torsion_rows = Vec::new();
    for (i, d) in diag.iter().enumerate().take(rank) {
        if d > &BigInt::one() {
            torsion_invariants.push(d.clone());
            torsion_rows.push(snf.u.row(i).iter().map(|x| x.mod_floor(d)).collect::<Vec<_>>());
        }
    }
    let free_rows: Vec<Vec<BigInt>> = (rank..n).map(|i| snf.u.row(i)).collect();
    let free_projection = if free_rows.is_empty() {
        IntMatrix::zeros(0, n)
    } else {
        // canonical basis of the lattice of functionals killing the relations
        let canon = hermite_basis(&free_rows, n);
        canon.matrix().transpose()
    };
    let torsion_projection = if torsion_rows.is_empty() {
        IntMatrix::zeros(0, n)
    } else {
        IntMatrix::from_rows(&torsion_rows)
    };
    QuotientPresentation {
        free_rank: free_projection.rows(),
        torsion_invariants,
        free_projection,
        torsion_projection,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ints;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64(rows)
    }

    fn check_snf(a: &IntMatrix) -> SmithForm {
        let s = smith_normal_form(a);
        assert_eq!(s.u.mul(a).mul(&s.v), s.d);
        assert!(s.u.is_unimodular());
        assert!(s.v.is_unimodular());
        let diag = s.diagonal();
        for i in 0..s.d.rows() {
            for j in 0..s.d.cols() {
                if i != j {
                    assert!(s.d.get(i, j).is_zero());
                }
            }
        }
        for w in diag.windows(2) {
            assert!(!w[0].is_negative());
            if w[0].is_zero() {
                assert!(w[1].is_zero());
            } else {
                assert!(w[1].is_multiple_of(&w[0]));
            }
        }
        s
    }

    #[test]
    fn snf_two_by_two() {
        let s = check_snf(&m(&[&[2, 4], &[6, 8]]));
        assert_eq!(s.diagonal(), ints(&[2, 4]));
    }

    #[test]
    fn snf_identity_and_zero() {
        let s = check_snf(&IntMatrix::identity(3));
        assert_eq!(s.d, IntMatrix::identity(3));
        let s = check_snf(&IntMatrix::zeros(2, 3));
        assert!(s.d.is_zero());
    }

    #[test]
    fn snf_rectangular() {
        let s = check_snf(&m(&[&[1, 2, 3], &[4, 5, 6]]));
        assert_eq!(s.diagonal(), ints(&[1, 3]));
    }

    #[test]
    fn hermite_examples() {
        let b = hermite_basis(&[ints(&[0, 0]), ints(&[-1, 0])], 2);
        assert_eq!(b.vectors(), vec![ints(&[1, 0])]);

        assert_eq!(hermite_basis(&[], 2).rank(), 0);

        let b = hermite_basis(&[ints(&[2, 0]), ints(&[0, 3]), ints(&[1, 1])], 2);
        assert_eq!(b.matrix(), &IntMatrix::identity(2));
    }

    #[test]
    fn hermite_reduces_left_of_pivot() {
        let b = hermite_basis(&[ints(&[1, 5]), ints(&[0, 3])], 2);
        assert_eq!(b.vectors(), vec![ints(&[1, 2]), ints(&[0, 3])]);
    }

    #[test]
    fn hermite_transform_reproduces_basis() {
        let vs = vec![ints(&[4, 6, 2]), ints(&[2, 3, 1]), ints(&[0, 1, 5])];
        let (b, t) = hermite_basis_with_transform(&vs, 3);
        let a = IntMatrix::from_columns(&vs, 3);
        assert_eq!(&a.mul(&t), b.matrix());
    }

    #[test]
    fn membership_examples() {
        let b = hermite_basis(&[ints(&[1, 0])], 2);
        assert_eq!(lattice_membership(&ints(&[3, 0]), &b), Some(ints(&[3])));
        assert_eq!(lattice_membership(&ints(&[0, 1]), &b), None);
        let b = hermite_basis(&[ints(&[1, -1])], 2);
        assert_eq!(lattice_membership(&ints(&[1, -1]), &b), Some(ints(&[1])));
    }

    #[test]
    fn saturation_examples() {
        let b = hermite_basis(&[ints(&[2, 0])], 2);
        assert_eq!(saturate(&b).vectors(), vec![ints(&[1, 0])]);
        let b = hermite_basis(&[ints(&[2, 2])], 2);
        assert_eq!(saturate(&b).vectors(), vec![ints(&[1, 1])]);
        let b = hermite_basis(&[ints(&[2, 1]), ints(&[1, 1])], 2);
        assert_eq!(saturate(&b), b);
        assert_eq!(saturation_index(&hermite_basis(&[ints(&[2, 4])], 2)), BigInt::from(2));
    }

    #[test]
    fn quotient_examples() {
        let q = quotient_presentation(2, &[], &[ints(&[1, -1])]);
        assert_eq!(q.free_rank, 1);
        assert!(q.torsion_invariants.is_empty());
        assert_eq!(q.free_projection, m(&[&[1, 1]]));

        let q = quotient_presentation(2, &[], &[ints(&[2, 0])]);
        assert_eq!(q.free_rank, 1);
        assert_eq!(q.torsion_invariants, ints(&[2]));
        assert_eq!(q.project(&ints(&[1, 0])).1, ints(&[1]));
        assert_eq!(q.project(&ints(&[2, 0])).1, ints(&[0]));

        let q = quotient_presentation(2, &[], &[]);
        assert_eq!(q.free_projection, IntMatrix::identity(2));
    }

    #[test]
    fn quotient_with_ambient_torsion() {
        // (ℤ ⊕ ℤ/4) / ⟨(1, 1)⟩ ≅ ℤ/4 via (a, t) ↦ t − a
        let q = quotient_presentation(1, &ints(&[4]), &[ints(&[1, 1])]);
        assert_eq!(q.free_rank, 0);
        assert_eq!(q.torsion_invariants, ints(&[4]));
        assert_eq!(q.project(&ints(&[1, 1])).1, ints(&[0]));
        assert_ne!(q.project(&ints(&[0, 1])).1, ints(&[0]));
    }

    #[test]
    fn kernel_of_row() {
        let k = integer_kernel(&m(&[&[1, 1, 1]]));
        assert_eq!(k.rank(), 2);
        for v in k.vectors() {
            assert!((&v[0] + &v[1] + &v[2]).is_zero());
        }
        assert!(lattice_membership(&ints(&[1, -1, 0]), &k).is_some());
        assert!(lattice_membership(&ints(&[0, 1, -1]), &k).is_some());
    }

    #[test]
    fn determinant_and_inverse() {
        let a = m(&[&[2, 1], &[1, 1]]);
        assert_eq!(a.determinant(), BigInt::from(1));
        let inv = a.unimodular_inverse().unwrap();
        assert_eq!(a.mul(&inv), IntMatrix::identity(2));
        assert!(m(&[&[2, 0], &[0, 1]]).unimodular_inverse().is_none());
        assert_eq!(m(&[&[0, 1], &[1, 0]]).determinant(), BigInt::from(-1));
    }
}

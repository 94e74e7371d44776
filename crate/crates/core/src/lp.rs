//! Dense two-phase primal simplex over exact rationals.
//!
//! Pivoting follows Bland's rule (lowest-index entering column, lowest-index
//! leaving basic variable on ratio ties), so runs are deterministic and never
//! cycle. Problems here are desk scale: a few dozen rows and a few hundred
//! columns at most.

use num_traits::{One, Signed, Zero};

use crate::arith::{Deadline, Rational};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Ge,
    Le,
}

#[derive(Debug, Clone)]
struct Constraint {
    coeffs: Vec<(usize, Rational)>,
    relation: Relation,
    rhs: Rational,
}

/// A linear program over named variable indices.
#[derive(Debug, Clone, Default)]
pub struct Problem {
    free: Vec<bool>,
    constraints: Vec<Constraint>,
    objective: Vec<(usize, Rational)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Optimal {
        values: Vec<Rational>,
        objective: Rational,
    },
    Infeasible,
    Unbounded,
}

impl Outcome {
    pub fn values(&self) -> Option<&[Rational]> {
        match self {
            Outcome::Optimal { values, .. } => Some(values),
            _ => None,
        }
    }
}

impl Problem {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a variable constrained to be `≥ 0`.
    pub fn nonneg(&mut self) -> usize {
        self.free.push(false);
        self.free.len() - 1
    }

    /// Adds an unrestricted variable.
    pub fn free(&mut self) -> usize {
        self.free.push(true);
        self.free.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.free.len()
    }

    pub fn constrain(&mut self, coeffs: Vec<(usize, Rational)>, relation: Relation, rhs: Rational) {
        let coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    /// Objective to minimize; feasibility only when left empty.
    pub fn minimize(&mut self, objective: Vec<(usize, Rational)>) {
        self.objective = objective;
    }

    pub fn solve(&self, deadline: &Deadline) -> Result<Outcome> {
        // column layout: one column per nonneg var, two per free var, one
        // slack per inequality
        let mut col_of: Vec<(usize, Option<usize>)> = Vec::with_capacity(self.free.len());
        let mut ncols = 0;
        for &f in &self.free {
            if f {
                col_of.push((ncols, Some(ncols + 1)));
                ncols += 2;
            } else {
                col_of.push((ncols, None));
                ncols += 1;
            }
        }
        let mut slack_of = vec![None; self.constraints.len()];
        for (i, c) in self.constraints.iter().enumerate() {
            if c.relation != Relation::Eq {
                slack_of[i] = Some(ncols);
                ncols += 1;
            }
        }

        let m = self.constraints.len();
        let mut a = vec![vec![Rational::zero(); ncols]; m];
        let mut b = vec![Rational::zero(); m];
        for (i, c) in self.constraints.iter().enumerate() {
            for (v, q) in &c.coeffs {
                let (p, n) = col_of[*v];
                a[i][p] += q;
                if let Some(n) = n {
                    a[i][n] -= q;
                }
            }
            match (c.relation, slack_of[i]) {
                (Relation::Ge, Some(s)) => a[i][s] = -Rational::one(),
                (Relation::Le, Some(s)) => a[i][s] = Rational::one(),
                _ => {}
            }
            b[i] = c.rhs.clone();
            if b[i].is_negative() {
                b[i] = -b[i].clone();
                for x in a[i].iter_mut() {
                    *x = -x.clone();
                }
            }
        }

        let mut cost = vec![Rational::zero(); ncols];
        for (v, q) in &self.objective {
            let (p, n) = col_of[*v];
            cost[p] += q;
            if let Some(n) = n {
                cost[n] -= q;
            }
        }

        let Some(mut t) = Tableau::phase_one(a, b, ncols, deadline)? else {
            return Ok(Outcome::Infeasible);
        };
        if !t.optimize(&cost, ncols, deadline)? {
            return Ok(Outcome::Unbounded);
        }

        let x = t.solution(ncols);
        let values = col_of
            .iter()
            .map(|&(p, n)| match n {
                Some(n) => &x[p] - &x[n],
                None => x[p].clone(),
            })
            .collect::<Vec<_>>();
        let objective = self
            .objective
            .iter()
            .fold(Rational::zero(), |acc, (v, q)| acc + q * &values[*v]);
        Ok(Outcome::Optimal { values, objective })
    }
}

struct Tableau {
    a: Vec<Vec<Rational>>,
    b: Vec<Rational>,
    basis: Vec<usize>,
}

impl Tableau {
    /// Finds a basic feasible solution of `a x = b, x ≥ 0` (with `b ≥ 0`),
    /// or `None` when the system is infeasible.
    fn phase_one(
        a: Vec<Vec<Rational>>,
        b: Vec<Rational>,
        ncols: usize,
        deadline: &Deadline,
    ) -> Result<Option<Tableau>> {
        let m = a.len();
        let width = ncols + m;
        let rows = a
            .into_iter()
            .enumerate()
            .map(|(i, mut r)| {
                r.resize(width, Rational::zero());
                r[ncols + i] = Rational::one();
                r
            })
            .collect();
        let mut t = Tableau {
            a: rows,
            b,
            basis: (ncols..ncols + m).collect(),
        };
        let mut cost = vec![Rational::zero(); width];
        for c in cost.iter_mut().skip(ncols) {
            *c = Rational::one();
        }
        t.optimize(&cost, width, deadline)?;
        let infeasibility = t
            .basis
            .iter()
            .zip(&t.b)
            .filter(|(&j, _)| j >= ncols)
            .fold(Rational::zero(), |acc, (_, v)| acc + v);
        if infeasibility.is_positive() {
            return Ok(None);
        }

        // drive artificials out of the basis, dropping redundant rows
        let mut i = 0;
        while i < t.a.len() {
            if t.basis[i] < ncols {
                i += 1;
                continue;
            }
            match (0..ncols).find(|&j| !t.a[i][j].is_zero()) {
                Some(j) => {
                    t.pivot(i, j);
                    i += 1;
                }
                None => {
                    t.a.remove(i);
                    t.b.remove(i);
                    t.basis.remove(i);
                }
            }
        }
        for r in t.a.iter_mut() {
            r.truncate(ncols);
        }
        Ok(Some(t))
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.a[r][c].clone();
        for x in self.a[r].iter_mut() {
            *x /= &p;
        }
        self.b[r] /= &p;
        let prow = self.a[r].clone();
        let pb = self.b[r].clone();
        for i in 0..self.a.len() {
            if i == r || self.a[i][c].is_zero() {
                continue;
            }
            let f = self.a[i][c].clone();
            for (x, y) in self.a[i].iter_mut().zip(&prow) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
            let d = &f * &pb;
            self.b[i] -= d;
        }
        self.basis[r] = c;
    }

    /// Minimizes `cost · x` over columns `< limit`. Returns `false` when the
    /// objective is unbounded below.
    fn optimize(&mut self, cost: &[Rational], limit: usize, deadline: &Deadline) -> Result<bool> {
        loop {
            deadline.check()?;
            let entering = (0..limit).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let reduced = self
                    .basis
                    .iter()
                    .zip(&self.a)
                    .fold(cost[j].clone(), |acc, (&bj, row)| acc - &cost[bj] * &row[j]);
                reduced.is_negative()
            });
            let Some(c) = entering else {
                return Ok(true);
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.a.len() {
                if !self.a[i][c].is_positive() {
                    continue;
                }
                let ratio = &self.b[i] / &self.a[i][c];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, _)) = leave else {
                return Ok(false);
            };
            self.pivot(r, c);
        }
    }

    fn solution(&self, ncols: usize) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); ncols];
        for (i, &j) in self.basis.iter().enumerate() {
            if j < ncols {
                x[j] = self.b[i].clone();
            }
        }
        x
    }
}

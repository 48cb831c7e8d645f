//! Dense two-phase simplex with Bland's rule, generic over the scalar type.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Field operations plus a pivot tolerance (zero for exact types).
pub trait Scalar:
    Clone
    + PartialOrd
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn tolerance() -> Self;

    fn is_pos(&self) -> bool {
        *self > Self::tolerance()
    }

    fn is_neg(&self) -> bool {
        *self < -Self::tolerance()
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn tolerance() -> Self {
        1e-12
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite input")
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn tolerance() -> Self {
        Zero::zero()
    }
    fn is_pos(&self) -> bool {
        self.is_positive()
    }
    fn is_neg(&self) -> bool {
        self.is_negative()
    }
}

/// Builds an exact rational `n/d`.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Le,
}

/// `minimize cost·x` subject to `rows`, `x ≥ 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram<T> {
    pub cost: Vec<T>,
    pub rows: Vec<(Vec<T>, Relation, T)>,
}

#[derive(Debug, Clone)]
pub struct LpSolution<T> {
    pub x: Vec<T>,
    pub objective: T,
    pub pivots: usize,
}

struct Tableau<T> {
    /// `rows × (cols + 1)`, last column is the right-hand side.
    t: Vec<Vec<T>>,
    basis: Vec<usize>,
    cols: usize,
    pivots: usize,
}

const MAX_PIVOTS: usize = 100_000;

impl<T: Scalar> Tableau<T> {
    fn pivot(&mut self, r: usize, c: usize, obj: &mut [T]) {
        let p = self.t[r][c].clone();
        for v in self.t[r].iter_mut() {
            *v = v.clone() / p.clone();
        }
        let prow = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c].clone();
            if f.is_pos() || f.is_neg() {
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v = v.clone() - f.clone() * pv.clone();
                }
            }
            row[c] = T::zero();
        }
        let f = obj[c].clone();
        if f.is_pos() || f.is_neg() {
            for (v, pv) in obj.iter_mut().zip(&prow) {
                *v = v.clone() - f.clone() * pv.clone();
            }
        }
        obj[c] = T::zero();
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Runs Bland's rule on the reduced-cost row `obj` over columns `< allowed`.
    fn optimize(&mut self, obj: &mut [T], allowed: usize) -> Result<()> {
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(Error::Numeric("simplex pivot limit reached".into()));
            }
            let Some(c) = (0..allowed).find(|&j| obj[j].is_neg()) else {
                return Ok(());
            };
            let mut best: Option<(usize, T)> = None;
            for (i, row) in self.t.iter().enumerate() {
                if !row[c].is_pos() {
                    continue;
                }
                let q = row[self.cols].clone() / row[c].clone();
                best = match best {
                    None => Some((i, q)),
                    Some((bi, bq)) => {
                        if q < bq || (!(q > bq) && self.basis[i] < self.basis[bi]) {
                            Some((i, q))
                        } else {
                            Some((bi, bq))
                        }
                    }
                };
            }
            let Some((r, _)) = best else {
                return Err(Error::Numeric("linear program is unbounded".into()));
            };
            self.pivot(r, c, obj);
        }
    }
}

impl<T: Scalar> LinearProgram<T> {
    pub fn solve(&self) -> Result<LpSolution<T>> {
        let n = self.cost.len();
        let slacks = self.rows.iter().filter(|r| r.1 == Relation::Le).count();
        let m = self.rows.len();
        let cols = n + slacks + m;
        let mut t = Vec::with_capacity(m);
        let mut slack = n;
        for (i, (a, rel, b)) in self.rows.iter().enumerate() {
            if a.len() != n {
                return Err(Error::param("lp", "row length differs from cost length"));
            }
            let mut row = vec![T::zero(); cols + 1];
            row[..n].clone_from_slice(a);
            if *rel == Relation::Le {
                row[slack] = T::one();
                slack += 1;
            }
            row[cols] = b.clone();
            if b.is_neg() || *b < T::zero() {
                for v in row.iter_mut() {
                    *v = -v.clone();
                }
            }
            row[n + slacks + i] = T::one();
            t.push(row);
        }
        let art = n + slacks;
        let mut tab = Tableau { t, basis: (art..art + m).collect(), cols, pivots: 0 };
        // phase one: minimize the sum of artificials
        let mut obj = vec![T::zero(); cols + 1];
        for row in &tab.t {
            for j in 0..art {
                obj[j] = obj[j].clone() - row[j].clone();
            }
            obj[cols] = obj[cols].clone() - row[cols].clone();
        }
        tab.optimize(&mut obj, art)?;
        if (-obj[cols].clone()).is_pos() {
            return Err(Error::Numeric("linear program is infeasible".into()));
        }
        // drive remaining artificials out where possible
        for r in 0..m {
            if tab.basis[r] >= art {
                if let Some(c) = (0..art).find(|&j| tab.t[r][j].is_pos() || tab.t[r][j].is_neg()) {
                    let mut dummy = vec![T::zero(); cols + 1];
                    tab.pivot(r, c, &mut dummy);
                }
            }
        }
        // phase two
        let mut obj = vec![T::zero(); cols + 1];
        obj[..n].clone_from_slice(&self.cost);
        for r in 0..m {
            let b = tab.basis[r];
            let f = obj[b].clone();
            if f.is_pos() || f.is_neg() {
                let row = tab.t[r].clone();
                for (v, rv) in obj.iter_mut().zip(&row) {
                    *v = v.clone() - f.clone() * rv.clone();
                }
            }
        }
        tab.optimize(&mut obj, art)?;
        let mut x = vec![T::zero(); n];
        for (r, &b) in tab.basis.iter().enumerate() {
            if b < n {
                x[b] = tab.t[r][cols].clone();
            }
        }
        Ok(LpSolution { x, objective: -obj[cols].clone(), pivots: tab.pivots })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_textbook_problem() {
        // min -x - y  s.t. x + 2y <= 4, 3x + y <= 6  -> x = 8/5, y = 6/5
        let lp = LinearProgram {
            cost: vec![ratio(-1, 1), ratio(-1, 1)],
            rows: vec![
                (vec![ratio(1, 1), ratio(2, 1)], Relation::Le, ratio(4, 1)),
                (vec![ratio(3, 1), ratio(1, 1)], Relation::Le, ratio(6, 1)),
            ],
        };
        let sol = lp.solve().unwrap();
        assert_eq!(sol.x, vec![ratio(8, 5), ratio(6, 5)]);
        assert_eq!(sol.objective, ratio(-14, 5));
    }

    #[test]
    fn detects_infeasible() {
        let lp = LinearProgram {
            cost: vec![1.0],
            rows: vec![(vec![1.0], Relation::Le, 1.0), (vec![1.0], Relation::Eq, 2.0)],
        };
        assert!(matches!(lp.solve(), Err(Error::Numeric(_))));
    }

    #[test]
    fn redundant_equalities() {
        let lp = LinearProgram {
            cost: vec![1.0, 2.0],
            rows: vec![(vec![1.0, 1.0], Relation::Eq, 1.0), (vec![2.0, 2.0], Relation::Eq, 2.0)],
        };
        let sol = lp.solve().unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-12);
        assert!((sol.x[0] - 1.0).abs() < 1e-12);
    }
}

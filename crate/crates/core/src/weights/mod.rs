//! The exponent functional `A(s) = min_{b ∈ S} max_m A_m(b, s)`.
//!
//! `A_m(b, s) = (d−1) s b_m + (d s − 1) Σ_{j<m} b_j` over the simplex
//! `S = {b ≥ 0 : Σ b_j t_j = 1}`. The minimum is a small linear program.

pub mod lp;
mod oracle;

pub use oracle::{a_of_s_grid_oracle, a_of_s_grid_oracle_multilevel, lattice_size, LATTICE_CAP};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use lp::{LinearProgram, Relation, Scalar};

/// Largest number of special positions.
pub const MAX_POSITIONS: usize = 16;
/// Largest `k` for the exact rational solver.
pub const MAX_EXACT_POSITIONS: usize = 4;
const SIMPLEX_TOLERANCE: f64 = 1e-12;

/// Positions `i₁ < … < i_k`, weights `t_m > 0` and base `B > 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    positions: Vec<u32>,
    weights: Vec<f64>,
    base: f64,
}

impl TargetSpec {
    pub fn new(positions: Vec<u32>, weights: Vec<f64>, base: f64) -> Result<Self> {
        let k = positions.len();
        if k == 0 {
            return Err(Error::param("target.positions", "need at least one position"));
        }
        if k > MAX_POSITIONS {
            return Err(Error::param("target.positions", format!("at most {MAX_POSITIONS} positions")));
        }
        if weights.len() != k {
            return Err(Error::param("target.weights", format!("expected {k} weights, got {}", weights.len())));
        }
        if positions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("target.positions", "must be strictly increasing"));
        }
        if let Some(t) = weights.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::param("target.weights", format!("must be positive, got {t}")));
        }
        if !(base.is_finite() && base > 1.0) {
            return Err(Error::param("target.B", format!("must satisfy B > 1, got {base}")));
        }
        Ok(TargetSpec { positions, weights, base })
    }

    /// `k = 1`, position 0, weight 1.
    pub fn single(base: f64) -> Result<Self> {
        Self::new(vec![0], vec![1.0], base)
    }

    pub fn k(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[u32] {
        &self.positions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn with_base(&self, base: f64) -> Result<Self> {
        Self::new(self.positions.clone(), self.weights.clone(), base)
    }
}

/// A point of the weight simplex `S`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplexPoint {
    coords: Vec<f64>,
}

impl SimplexPoint {
    pub fn new(coords: Vec<f64>, target: &TargetSpec) -> Result<Self> {
        if coords.len() != target.k() {
            return Err(Error::param("b", format!("expected {} coordinates", target.k())));
        }
        if coords.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::param("b", "coordinates must be non-negative"));
        }
        let sum: f64 = coords.iter().zip(target.weights()).map(|(b, t)| b * t).sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::param("b", format!("Σ b t = {sum}, expected 1")));
        }
        Ok(SimplexPoint { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn k(&self) -> usize {
        self.coords.len()
    }
}

fn component<T: Scalar>(b: &[T], s: &T, d: &T, index: usize) -> T {
    let one = T::one();
    let mut prefix = T::zero();
    for bj in &b[..index] {
        prefix = prefix + bj.clone();
    }
    (d.clone() - one.clone()) * s.clone() * b[index].clone() + (d.clone() * s.clone() - one) * prefix
}

/// `A_m(b, s)` for the zero-based position `index`.
pub fn a_component(b: &SimplexPoint, s: f64, index: usize, d: f64) -> Result<f64> {
    if index >= b.k() {
        return Err(Error::param("m", format!("index {index} out of range for k = {}", b.k())));
    }
    Ok(component(b.coords(), &s, &d, index))
}

/// `A(b, s) = max_m A_m(b, s)`.
pub fn a_of_b(b: &SimplexPoint, s: f64, d: f64) -> f64 {
    a_of_coords(b.coords(), s, d)
}

pub(crate) fn a_of_coords(b: &[f64], s: f64, d: f64) -> f64 {
    let mut prefix = 0.0;
    let mut best = f64::NEG_INFINITY;
    for &bm in b {
        best = best.max((d - 1.0) * s * bm + (d * s - 1.0) * prefix);
        prefix += bm;
    }
    best
}

/// Optimum of the min-max program with its lexicographically smallest minimizer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightSolution {
    pub value: f64,
    pub argmin: SimplexPoint,
}

/// Variables `(b_1..b_k, z)`; rows `A_m(b) − z ≤ 0` and `Σ b t = 1`.
fn base_program<T: Scalar>(weights: &[T], s: &T, d: &T) -> LinearProgram<T> {
    let k = weights.len();
    let mut rows = Vec::with_capacity(k + 1);
    let one = T::one();
    for m in 0..k {
        let mut a = vec![T::zero(); k + 1];
        for aj in a.iter_mut().take(m) {
            *aj = d.clone() * s.clone() - one.clone();
        }
        a[m] = (d.clone() - one.clone()) * s.clone();
        a[k] = -one.clone();
        rows.push((a, Relation::Le, T::zero()));
    }
    let mut a = weights.to_vec();
    a.push(T::zero());
    rows.push((a, Relation::Eq, one));
    let mut cost = vec![T::zero(); k + 1];
    cost[k] = T::one();
    LinearProgram { cost, rows }
}

/// Solves for `z*`, then minimizes `b_1, b_2, …` in turn among optimal points.
fn solve_lexicographic<T: Scalar>(weights: &[T], s: &T, d: &T) -> Result<(T, Vec<T>)> {
    let k = weights.len();
    let base = base_program(weights, s, d);
    let z = base.solve()?.objective;
    let slack = T::tolerance() * T::from_f64(0.1);
    let mut fixed: Vec<T> = Vec::with_capacity(k);
    let mut last = None;
    for j in 0..k {
        let mut lp = base.clone();
        let mut zrow = vec![T::zero(); k + 1];
        zrow[k] = T::one();
        lp.rows.push((zrow, Relation::Le, z.clone() + slack.clone()));
        for (i, v) in fixed.iter().enumerate() {
            let mut row = vec![T::zero(); k + 1];
            row[i] = T::one();
            lp.rows.push((row, Relation::Le, v.clone() + slack.clone()));
        }
        lp.cost = vec![T::zero(); k + 1];
        lp.cost[j] = T::one();
        let sol = lp.solve()?;
        fixed.push(sol.x[j].clone());
        last = Some(sol.x);
    }
    let x = last.expect("k >= 1");
    Ok((z, x[..k].to_vec()))
}

/// `A(s)` and its minimizer, solved in floating point.
pub fn a_of_s(target: &TargetSpec, s: f64, d: f64) -> Result<WeightSolution> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::param("s", format!("must be positive, got {s}")));
    }
    let (z, x) = solve_lexicographic(target.weights(), &s, &d)?;
    let mut b: Vec<f64> = x.into_iter().map(|v| v.max(0.0)).collect();
    let sum: f64 = b.iter().zip(target.weights()).map(|(b, t)| b * t).sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Consistency(format!("LP returned Σ b t = {sum}")));
    }
    for v in b.iter_mut() {
        *v /= sum;
    }
    let value = a_of_coords(&b, s, d);
    if (value - z).abs() > 1e-10 * value.abs().max(1.0) {
        return Err(Error::Consistency(format!("LP optimum {z} differs from A(b*, s) = {value}")));
    }
    Ok(WeightSolution { value, argmin: SimplexPoint::new(b, target)? })
}

/// `A(s)` and minimizer in exact rational arithmetic (`k ≤ 4`).
pub fn a_of_s_exact(
    weights: &[BigRational],
    s: &BigRational,
    d: &BigRational,
) -> Result<(BigRational, Vec<BigRational>)> {
    if weights.is_empty() || weights.len() > MAX_EXACT_POSITIONS {
        return Err(Error::param("k", format!("exact solver handles 1..={MAX_EXACT_POSITIONS} positions")));
    }
    solve_lexicographic(weights, s, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use lp::ratio;

    fn target(w: &[f64]) -> TargetSpec {
        TargetSpec::new((0..w.len() as u32).collect(), w.to_vec(), 2.0).unwrap()
    }

    #[test]
    fn component_examples() {
        let t = target(&[1.0, 1.0]);
        let b = SimplexPoint::new(vec![0.0, 1.0], &t).unwrap();
        assert_relative_eq!(a_component(&b, 0.8, 1, 2.0).unwrap(), 0.8);
        let t1 = target(&[1.0]);
        let b1 = SimplexPoint::new(vec![1.0], &t1).unwrap();
        assert_relative_eq!(a_component(&b1, 0.7, 0, 2.5).unwrap(), 1.5 * 0.7);
        let t3 = target(&[1.0, 1.0, 1.0]);
        let b3 = SimplexPoint::new(vec![1.0 / 3.0; 3], &t3).unwrap();
        assert_relative_eq!(a_component(&b3, 0.9, 2, 2.0).unwrap(), 0.3 + 0.8 * 2.0 / 3.0, epsilon = 1e-15);
        assert!(a_component(&b3, 0.9, 3, 2.0).is_err());
    }

    #[test]
    fn a_of_b_examples() {
        let t = target(&[1.0, 1.0]);
        let b = SimplexPoint::new(vec![1.0, 0.0], &t).unwrap();
        assert_relative_eq!(a_of_b(&b, 0.8, 2.0), 0.8);
    }

    #[test]
    fn single_position() {
        let t = target(&[2.0]);
        let sol = a_of_s(&t, 0.6, 2.0).unwrap();
        assert_relative_eq!(sol.value, 0.3, epsilon = 1e-15);
        assert_relative_eq!(sol.argmin.coords()[0], 0.5);
    }

    #[test]
    fn two_equal_weights_give_s_squared() {
        let t = target(&[1.0, 1.0]);
        for s in [0.5, 0.8, 0.95] {
            let sol = a_of_s(&t, s, 2.0).unwrap();
            assert_relative_eq!(sol.value, s * s, epsilon = 1e-12);
            assert_relative_eq!(sol.argmin.coords()[0], s, epsilon = 1e-9);
        }
    }

    #[test]
    fn exact_solver_agrees() {
        let w = vec![ratio(1, 1), ratio(1, 1)];
        let (v, b) = a_of_s_exact(&w, &ratio(4, 5), &ratio(2, 1)).unwrap();
        assert_eq!(v, ratio(16, 25));
        assert_eq!(b, vec![ratio(4, 5), ratio(1, 5)]);
    }

    #[test]
    fn target_validation() {
        assert!(TargetSpec::new(vec![1, 1], vec![1.0, 1.0], 2.0).is_err());
        assert!(TargetSpec::new(vec![0], vec![0.0], 2.0).is_err());
        let e = TargetSpec::new(vec![0], vec![1.0], 0.5).unwrap_err();
        assert!(e.to_string().contains("B > 1"));
    }
}

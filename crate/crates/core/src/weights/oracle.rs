//! Brute-force lattice minimization of `A(b, s)`, independent of the LP.

use super::{a_of_coords, TargetSpec};
use crate::error::{Error, Result};

/// Largest lattice the exhaustive oracle will walk.
pub const LATTICE_CAP: f64 = 1e8;
/// Points per coordinate around the incumbent at each refinement level.
const WINDOW: i64 = 8;
/// Target size of the coarsest multilevel lattice.
const COARSE_POINTS: f64 = 1e6;

fn check_step(step: f64) -> Result<()> {
    if !(1e-5..=1e-1).contains(&step) {
        return Err(Error::param("step", format!("must lie in [1e-5, 1e-1], got {step}")));
    }
    Ok(())
}

/// Approximate number of lattice points with spacing `step`.
///
/// The free coordinates are `b_1..b_{k-1}` on `step·ℕ` with
/// `Σ_{j<k} t_j b_j ≤ 1`; `b_k` is then fixed by the simplex equation.
pub fn lattice_size(target: &TargetSpec, step: f64) -> f64 {
    let w = target.weights();
    let k = w.len();
    let mut size = 1.0;
    for (j, t) in w[..k - 1].iter().enumerate() {
        size *= (1.0 / (t * step) + 1.0) / (j as f64 + 1.0);
    }
    size
}

/// Lattice points `b_j = i_j·step` inside `lo_j ≤ i_j ≤ hi_j`; calls `f` on each.
fn walk(weights: &[f64], step: f64, lo: &[i64], hi: &[i64], f: &mut impl FnMut(&[f64])) {
    let k = weights.len();
    let mut b = vec![0.0; k];
    fn rec(
        j: usize,
        used: f64,
        weights: &[f64],
        step: f64,
        lo: &[i64],
        hi: &[i64],
        b: &mut Vec<f64>,
        f: &mut impl FnMut(&[f64]),
    ) {
        let k = weights.len();
        if j == k - 1 {
            b[k - 1] = ((1.0 - used) / weights[k - 1]).max(0.0);
            f(b);
            return;
        }
        let start = lo[j].max(0);
        for i in start..=hi[j] {
            let v = i as f64 * step;
            let nu = used + weights[j] * v;
            if nu > 1.0 + 1e-12 {
                break;
            }
            b[j] = v;
            rec(j + 1, nu, weights, step, lo, hi, b, f);
        }
    }
    rec(0, 0.0, weights, step, lo, hi, &mut b, f);
}

/// Minimum of `A(b, s)` over the full lattice of spacing `step`.
pub fn a_of_s_grid_oracle(target: &TargetSpec, s: f64, d: f64, step: f64) -> Result<f64> {
    check_step(step)?;
    if target.k() > 4 {
        return Err(Error::param("k", "lattice oracle handles k <= 4"));
    }
    let size = lattice_size(target, step);
    if size > LATTICE_CAP {
        return Err(Error::cap("lattice", size, LATTICE_CAP));
    }
    let k = target.k();
    let hi: Vec<i64> = target.weights()[..k - 1].iter().map(|t| (1.0 / (t * step)).floor() as i64 + 1).collect();
    let lo = vec![0; k - 1];
    let mut best = f64::INFINITY;
    walk(target.weights(), step, &lo, &hi, &mut |b| best = best.min(a_of_coords(b, s, d)));
    Ok(best)
}

/// Coarse-to-fine lattice search for lattices too large to walk.
///
/// Starts exhaustive on a lattice of about a million points, then repeatedly
/// quarters the spacing and searches exhaustively in a window around the
/// incumbent. Every evaluated point lies on the `step` lattice, so the result
/// is never below the true lattice minimum; convexity of `A(·, s)` keeps the
/// incumbent close to it.
pub fn a_of_s_grid_oracle_multilevel(target: &TargetSpec, s: f64, d: f64, step: f64) -> Result<f64> {
    check_step(step)?;
    let k = target.k();
    let mut levels = 0u32;
    while lattice_size(target, step * 4f64.powi(levels as i32)) > COARSE_POINTS {
        levels += 1;
    }
    if levels == 0 {
        return a_of_s_grid_oracle(target, s, d, step);
    }
    let w = target.weights();
    let mut h_mult = 4i64.pow(levels);
    let hi: Vec<i64> = w[..k - 1].iter().map(|t| (1.0 / (t * step * h_mult as f64)).floor() as i64 + 1).collect();
    let mut best = f64::INFINITY;
    let mut arg = vec![0i64; k - 1];
    let scan = |lo: &[i64], hi: &[i64], mult: i64, best: &mut f64, arg: &mut Vec<i64>| {
        let h = step * mult as f64;
        walk(w, h, lo, hi, &mut |b| {
            let v = a_of_coords(b, s, d);
            if v < *best {
                *best = v;
                for (a, x) in arg.iter_mut().zip(b) {
                    *a = (x / step).round() as i64;
                }
            }
        });
    };
    scan(&vec![0; k - 1], &hi, h_mult, &mut best, &mut arg);
    while h_mult > 1 {
        let coarse = h_mult;
        h_mult /= 4;
        let ratio = coarse / h_mult;
        let lo: Vec<i64> = arg.iter().map(|&a| a / h_mult - WINDOW.max(ratio)).collect();
        let hi: Vec<i64> = arg.iter().map(|&a| a / h_mult + WINDOW.max(ratio)).collect();
        scan(&lo, &hi, h_mult, &mut best, &mut arg);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::super::a_of_s;
    use super::*;

    #[test]
    fn single_position_is_exact() {
        let t = TargetSpec::new(vec![0], vec![2.0], 2.0).unwrap();
        let g = a_of_s_grid_oracle(&t, 0.6, 2.0, 1e-3).unwrap();
        assert_eq!(g, a_of_s(&t, 0.6, 2.0).unwrap().value);
    }

    #[test]
    fn two_positions_square() {
        let t = TargetSpec::new(vec![0, 1], vec![1.0, 1.0], 2.0).unwrap();
        for s in [0.5, 0.8] {
            let g = a_of_s_grid_oracle(&t, s, 2.0, 1e-4).unwrap();
            assert!(g >= s * s - 1e-12 && g - s * s <= 2e-4, "{g}");
        }
    }

    #[test]
    fn multilevel_matches_exhaustive() {
        let t = TargetSpec::new(vec![0, 2, 3], vec![1.0, 0.7, 1.6], 2.0).unwrap();
        let e = a_of_s_grid_oracle(&t, 0.83, 2.4, 1e-3).unwrap();
        let m = a_of_s_grid_oracle_multilevel(&t, 0.83, 2.4, 1e-3).unwrap();
        assert!((e - m).abs() < 1e-3, "{e} vs {m}");
    }

    #[test]
    fn caps() {
        let t = TargetSpec::new(vec![0, 1, 2, 3], vec![1.0; 4], 2.0).unwrap();
        assert!(matches!(a_of_s_grid_oracle(&t, 0.8, 2.0, 1e-4), Err(Error::SizeCap { .. })));
        assert!(a_of_s_grid_oracle(&t, 0.8, 2.0, 1e-6).is_err());
    }
}

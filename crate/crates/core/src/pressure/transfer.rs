use super::{check_s, table_bracket, PressureEstimate, PressureMethod};
use crate::error::{Error, Result};
use crate::ifs::{SystemSpec, Table};

const TOLERANCE: f64 = 1e-12;
const VECTOR_TOLERANCE: f64 = 1e-9;
const MAX_STEPS: usize = 100_000;

/// Leading eigenpair of the discretized transfer operator.
#[derive(Debug, Clone)]
pub struct TransferSolution {
    pub lambda: f64,
    /// Eigenvector on the grid, scaled to max 1.
    pub vector: Vec<f64>,
    pub iterations: usize,
}

/// Dense matrix of `(Lf)(x_i) = Σ_a |T_a'(x_i)|^s f(T_a(x_i))` with `f`
/// interpolated linearly between grid nodes.
fn build(sys: &SystemSpec, s: f64, grid: usize) -> Vec<f64> {
    let h = (grid - 1) as f64;
    let mut k = vec![0.0; grid * grid];
    for (i, row) in k.chunks_mut(grid).enumerate() {
        let x = i as f64 / h;
        for a in 1..=sys.truncation() {
            let y = sys.branch(a, x);
            let w = sys.branch_derivative(a, x).powf(s);
            let pos = (y * h).clamp(0.0, h);
            let j = (pos.floor() as usize).min(grid - 2);
            let t = pos - j as f64;
            row[j] += w * (1.0 - t);
            row[j + 1] += w * t;
        }
    }
    k
}

/// Power iteration from the constant vector.
pub fn transfer_solve(sys: &SystemSpec, s: f64, grid: usize) -> Result<TransferSolution> {
    check_s(s)?;
    if s <= 0.0 {
        return Err(Error::param("s", "transfer operator needs s > 0"));
    }
    if grid < 16 {
        return Err(Error::param("grid_size", "must be at least 16"));
    }
    let k = build(sys, s, grid);
    let mut v = vec![1.0; grid];
    let mut u = vec![0.0; grid];
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    for step in 1..=MAX_STEPS {
        for (ui, row) in u.iter_mut().zip(k.chunks(grid)) {
            *ui = row.iter().zip(&v).map(|(a, b)| a * b).sum();
        }
        let next = u.iter().copied().fold(0.0, f64::max);
        if !(next.is_finite() && next > 0.0) {
            return Err(Error::Numeric(format!("transfer operator degenerate at s = {s}")));
        }
        residual = 0.0;
        for (vi, ui) in v.iter_mut().zip(&u) {
            let nv = ui / next;
            residual = f64::max(residual, (nv - *vi).abs());
            *vi = nv;
        }
        let change = (next - lambda).abs();
        lambda = next;
        if change <= TOLERANCE * lambda && residual <= VECTOR_TOLERANCE {
            return Ok(TransferSolution { lambda, vector: v, iterations: step });
        }
    }
    Err(Error::Numeric(format!("power iteration did not converge in {MAX_STEPS} steps (residual {residual:e})")))
}

/// `P_M(s) = log λ`, bracketed by the constant-kernel operators built from
/// the ζ and λ tables.
pub fn pressure_eigenvalue(sys: &SystemSpec, s: f64, grid: usize) -> Result<PressureEstimate> {
    let sol = transfer_solve(sys, s, grid)?;
    let value = sol.lambda.ln();
    let b = table_bracket(sys, s, PressureMethod::TransferEigenvalue)?;
    Ok(PressureEstimate { value, lo: b.lo.min(value), hi: b.hi.max(value), ..b })
}

/// `P_M(s)` by the cheapest exact route: closed form for affine systems,
/// the transfer operator otherwise.
pub fn truncated_pressure(sys: &SystemSpec, s: f64, grid: usize) -> Result<f64> {
    if sys.is_affine() {
        check_s(s)?;
        Ok(sys.table_sum(Table::Lambda, s, 1, Some(sys.truncation())).ln())
    } else if s == 0.0 {
        Ok((sys.truncation() as f64).ln())
    } else {
        Ok(transfer_solve(sys, s, grid)?.lambda.ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pressure::partition_sum;
    use approx::assert_relative_eq;

    #[test]
    fn lueroth_is_rank_one() {
        for (m, grid) in [(5u64, 16usize), (40, 100), (200, 512)] {
            let l = SystemSpec::lueroth(m).unwrap();
            let s = 0.85;
            let exact: f64 = (1..=m).map(|a| (1.0 / (a as f64 * (a as f64 + 1.0))).powf(s)).sum::<f64>().ln();
            let p = pressure_eigenvalue(&l, s, grid).unwrap();
            assert_relative_eq!(p.value, exact, epsilon = 1e-12);
        }
    }

    #[test]
    fn gauss_truncated_normalization() {
        let g = SystemSpec::gauss(200).unwrap();
        let p = pressure_eigenvalue(&g, 1.0, 512).unwrap();
        assert!(p.value > -0.02 && p.value <= 0.0, "{}", p.value);
        assert!(p.lo <= p.value && p.value <= p.hi);
    }

    #[test]
    fn gauss_agrees_with_partition() {
        let g = SystemSpec::gauss(12).unwrap();
        for s in [0.7, 1.0] {
            let e = pressure_eigenvalue(&g, s, 256).unwrap().value;
            let p = partition_sum(&g, 5, s).unwrap().value;
            assert!((e - p).abs() < 0.03, "s={s}: {e} vs {p}");
        }
    }

    #[test]
    fn rejects_small_grid() {
        let g = SystemSpec::gauss(3).unwrap();
        assert!(pressure_eigenvalue(&g, 1.0, 8).is_err());
        assert!(pressure_eigenvalue(&g, 0.0, 64).is_err());
    }
}

use serde::Serialize;

use super::{PressureEstimate, PressureSource};
use crate::error::Result;
use crate::exec;
use crate::ifs::{SystemSpec, Table};

const CONVEXITY_SLACK: f64 = 1e-9;
const LIPSCHITZ_SLACK: f64 = 1e-9;

/// Offending grid indices for each checked property.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub points: Vec<PressureEstimate>,
    /// `i` with `P(s_{i+1}) ≥ P(s_i)`.
    pub not_decreasing: Vec<usize>,
    /// `i` (middle point) with a negative second difference.
    pub not_convex: Vec<usize>,
    /// `i` where the step `s_i → s_{i+1}` beats the Lipschitz bound.
    pub lipschitz: Vec<usize>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.not_decreasing.is_empty() && self.not_convex.is_empty() && self.lipschitz.is_empty()
    }

    pub fn violations(&self) -> usize {
        self.not_decreasing.len() + self.not_convex.len() + self.lipschitz.len()
    }
}

/// Slope bound at `s` from convexity: with `s½ = (s + 1/d)/2`,
/// `|P'(s)| ≤ (R₁ − R₂)/(s − s½)` where `R₁ = log Σ λ^{s½} ≥ P(s½)` and
/// `R₂ = log Σ ζ^s ≤ P(s)`.
fn slope_bound(sys: &SystemSpec, s: f64, upto: Option<u64>) -> f64 {
    let half = 0.5 * (s + 1.0 / sys.d());
    let r1 = sys.table_sum(Table::Lambda, half, 1, upto).ln();
    let r2 = sys.table_sum(Table::Zeta, s, 1, upto).ln();
    (r1 - r2) / (s - half)
}

/// Monotonicity, convexity and slope checks of the pressure on a grid.
pub fn pressure_properties_check(sys: &SystemSpec, s_grid: &[f64], source: PressureSource) -> Result<PropertyReport> {
    let points = exec::try_map(s_grid, |&s| source.evaluate(sys, s))?;
    // truncated tables bound truncated pressures; the full system needs full sums
    let upto = match source {
        PressureSource::Full { .. } => None,
        _ => Some(sys.truncation()),
    };
    let inv_d = 1.0 / sys.d();
    let mut not_decreasing = Vec::new();
    let mut not_convex = Vec::new();
    let mut lipschitz = Vec::new();
    for i in 0..points.len().saturating_sub(1) {
        let (a, b) = (&points[i], &points[i + 1]);
        if b.value >= a.value {
            not_decreasing.push(i);
        }
        let step = b.s - a.s;
        let slope = (b.value - a.value).abs() / step;
        // a convex decreasing function is steepest at the left end of a step
        let bound = if a.s > inv_d { slope_bound(sys, a.s, upto) } else { f64::INFINITY };
        if slope > bound * (1.0 + LIPSCHITZ_SLACK) {
            lipschitz.push(i);
        }
    }
    for i in 1..points.len().saturating_sub(1) {
        let (a, b, c) = (&points[i - 1], &points[i], &points[i + 1]);
        let d = (c.value - b.value) / (c.s - b.s) - (b.value - a.value) / (b.s - a.s);
        if d * 0.5 * (c.s - a.s) < -CONVEXITY_SLACK {
            not_convex.push(i);
        }
    }
    Ok(PropertyReport { points, not_decreasing, not_convex, lipschitz })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn lueroth_closed_form_passes() {
        let l = SystemSpec::lueroth(50).unwrap();
        let r = pressure_properties_check(&l, &grid(0.6, 1.2, 25), PressureSource::Full { grid: 64 }).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn gauss_partition_passes() {
        let g = SystemSpec::gauss(30).unwrap();
        let r = pressure_properties_check(&g, &grid(0.55, 1.3, 12), PressureSource::Partition { level: 3 }).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn single_point_is_vacuous() {
        let g = SystemSpec::gauss(5).unwrap();
        let r = pressure_properties_check(&g, &[0.9], PressureSource::Partition { level: 2 }).unwrap();
        assert!(r.passed());
    }
}

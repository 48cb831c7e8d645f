//! The critical exponent `s₀ = inf{s : P(s) ≤ A(s) log B}` by bisection.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::ifs::SystemSpec;
use crate::pressure::{PressureEstimate, PressureMethod, PressureSource};
use crate::weights::{a_of_s, TargetSpec};

/// Hard cap on bisection steps.
pub const MAX_BISECTIONS: usize = 60;
/// Offset of the lower search end above `1/d`.
pub const LOWER_OFFSET: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct DimensionFlags {
    /// `g(1) > 0`: the truncated system has no root below 1.
    pub clamped_high: bool,
    /// `g ≤ 0` already at the lower end of the search interval.
    pub clamped_low: bool,
}

impl DimensionFlags {
    pub fn label(&self) -> &'static str {
        match (self.clamped_high, self.clamped_low) {
            (true, _) => "clamped-high",
            (false, true) => "clamped-low",
            _ => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionResult {
    pub s0: f64,
    /// Bisection bracket, width at most the requested tolerance.
    pub lo: f64,
    pub hi: f64,
    /// Roots obtained from the lower and upper ends of the pressure bracket.
    pub envelope_lo: f64,
    pub envelope_hi: f64,
    pub base: f64,
    pub truncation: u64,
    pub method: PressureMethod,
    pub level: Option<usize>,
    pub iterations: usize,
    pub flags: DimensionFlags,
}

#[derive(Clone, Copy)]
enum Branch {
    Value,
    Lower,
    Upper,
}

fn pick(p: &PressureEstimate, b: Branch) -> f64 {
    match b {
        Branch::Value => p.value,
        Branch::Lower => p.lo,
        Branch::Upper => p.hi,
    }
}

struct Problem<'a> {
    sys: &'a SystemSpec,
    target: &'a TargetSpec,
    source: PressureSource,
    log_b: f64,
}

impl Problem<'_> {
    /// `(pressure, A(s) log B)`.
    fn eval(&self, s: f64) -> Result<(PressureEstimate, f64)> {
        let p = self.source.evaluate(self.sys, s)?;
        let a = a_of_s(self.target, s, self.sys.d())?.value;
        Ok((p, a * self.log_b))
    }

    /// Bisection for the sign change of `P_branch(s) − A(s) log B`.
    fn root(&self, branch: Branch, tol: f64) -> Result<(f64, f64, usize, DimensionFlags)> {
        let mut lo = 1.0 / self.sys.d() + LOWER_OFFSET;
        let mut hi = 1.0;
        let g = |s: f64| -> Result<(f64, f64)> {
            let (p, rhs) = self.eval(s)?;
            Ok((pick(&p, branch) - rhs, p.width()))
        };
        let (g_hi, _) = g(hi)?;
        if g_hi > 0.0 {
            let flags = DimensionFlags { clamped_high: true, ..Default::default() };
            return Ok((1.0, 1.0, 0, flags));
        }
        let (mut g_lo, _) = g(lo)?;
        if g_lo <= 0.0 {
            let flags = DimensionFlags { clamped_low: true, ..Default::default() };
            return Ok((lo, lo, 0, flags));
        }
        let mut g_top = g_hi;
        let mut steps = 0;
        while hi - lo > tol && steps < MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            let (gm, width) = g(mid)?;
            let slack = width + 1e-12;
            if gm > g_lo + slack || gm < g_top - slack {
                return Err(Error::Consistency(format!(
                    "g is not decreasing near s = {mid}: g = {gm}, bracket values {g_lo}, {g_top}"
                )));
            }
            if gm > 0.0 {
                lo = mid;
                g_lo = gm;
            } else {
                hi = mid;
                g_top = gm;
            }
            steps += 1;
        }
        Ok((lo, hi, steps, DimensionFlags::default()))
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(1e-10..=1e-2).contains(&tol) {
        return Err(Error::param("tol", format!("must lie in [1e-10, 1e-2], got {tol}")));
    }
    Ok(())
}

/// `s₀` for one target, with the bisection bracket and the pressure envelope.
pub fn critical_exponent(
    sys: &SystemSpec,
    target: &TargetSpec,
    tol: f64,
    source: PressureSource,
) -> Result<DimensionResult> {
    check_tol(tol)?;
    let problem = Problem { sys, target, source, log_b: target.base().ln() };
    let (lo, hi, iterations, flags) = problem.root(Branch::Value, tol)?;
    let s0 = 0.5 * (lo + hi);
    // the envelope only differs from the bracket when the pressure is inexact
    let probe = source.evaluate(sys, s0.max(1.0 / sys.d() + LOWER_OFFSET))?;
    let (envelope_lo, envelope_hi) = if probe.width() > 1e-12 {
        let (a, _, _, _) = problem.root(Branch::Lower, tol)?;
        let (_, b, _, _) = problem.root(Branch::Upper, tol)?;
        (a.min(lo), b.max(hi))
    } else {
        (lo, hi)
    };
    Ok(DimensionResult {
        s0,
        lo,
        hi,
        envelope_lo,
        envelope_hi,
        base: target.base(),
        truncation: sys.truncation(),
        method: source.method(),
        level: source.level(),
        iterations,
        flags,
    })
}

/// `s₀` along an increasing grid of bases.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub rows: Vec<DimensionResult>,
    /// Indices `i` where `s₀(B_{i+1}) < s₀(B_i)` fails.
    pub violations: Vec<usize>,
}

impl SweepTable {
    pub fn strictly_decreasing(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn critical_exponent_sweep(
    sys: &SystemSpec,
    target: &TargetSpec,
    bases: &[f64],
    tol: f64,
    source: PressureSource,
) -> Result<SweepTable> {
    check_tol(tol)?;
    if bases.is_empty() {
        return Err(Error::param("B_grid", "empty grid"));
    }
    if bases.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("B_grid", "must be strictly increasing"));
    }
    let targets = bases.iter().map(|&b| target.with_base(b)).collect::<Result<Vec<_>>>()?;
    let rows = exec::try_map(&targets, |t| critical_exponent(sys, t, tol, source))?;
    let violations = rows.windows(2).enumerate().filter(|(_, w)| w[1].s0 >= w[0].s0).map(|(i, _)| i).collect();
    Ok(SweepTable { rows, violations })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    /// `"M"` for truncation rows, `"n"` for level rows.
    pub kind: &'static str,
    pub param: u64,
    pub s0: f64,
    /// `s₀` minus the last row of the same kind.
    pub diff_to_last: f64,
}

/// `s₀(M)` over truncations and `s₀,ₙ` over partition levels.
pub fn convergence_diagnostics(
    sys: &SystemSpec,
    target: &TargetSpec,
    m_list: &[u64],
    n_list: &[usize],
    tol: f64,
    grid: usize,
) -> Result<Vec<ConvergenceRow>> {
    if m_list.windows(2).any(|w| w[1] < w[0]) || n_list.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::param("lists", "M_list and n_list must be increasing"));
    }
    let systems = m_list.iter().map(|&m| sys.with_truncation(m)).collect::<Result<Vec<_>>>()?;
    let by_m =
        exec::try_map(&systems, |s| critical_exponent(s, target, tol, PressureSource::Eigen { grid }).map(|r| r.s0))?;
    let by_n = exec::try_map(n_list, |&n| {
        critical_exponent(sys, target, tol, PressureSource::Partition { level: n }).map(|r| r.s0)
    })?;
    let mut rows = Vec::new();
    if let Some(&last) = by_m.last() {
        for (&m, &s0) in m_list.iter().zip(&by_m) {
            rows.push(ConvergenceRow { kind: "M", param: m, s0, diff_to_last: s0 - last });
        }
    }
    if let Some(&last) = by_n.last() {
        for (&n, &s0) in n_list.iter().zip(&by_n) {
            rows.push(ConvergenceRow { kind: "n", param: n as u64, s0, diff_to_last: s0 - last });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lueroth_single_position_base_e() {
        let l = SystemSpec::lueroth(100).unwrap();
        let t = TargetSpec::single(std::f64::consts::E).unwrap();
        let r = critical_exponent(&l, &t, 1e-10, PressureSource::Full { grid: 64 }).unwrap();
        assert_relative_eq!(r.s0, 0.7398829202858568, epsilon = 1e-9);
        assert!(r.hi - r.lo <= 1e-10);
        assert_eq!(r.flags, DimensionFlags::default());
    }

    #[test]
    fn sweep_decreases() {
        let l = SystemSpec::lueroth(100).unwrap();
        let t = TargetSpec::single(2.0).unwrap();
        let table = critical_exponent_sweep(&l, &t, &[2.0, 4.0, 8.0], 1e-8, PressureSource::Full { grid: 64 }).unwrap();
        assert!(table.strictly_decreasing());
        assert_eq!(table.rows.len(), 3);
    }

    #[test]
    fn two_positions_solve_square_equation() {
        let l = SystemSpec::lueroth(100).unwrap();
        let t = TargetSpec::new(vec![0, 1], vec![1.0, 1.0], 1.5).unwrap();
        let r = critical_exponent(&l, &t, 1e-10, PressureSource::Full { grid: 64 }).unwrap();
        let p = PressureSource::Full { grid: 64 }.evaluate(&l, r.s0).unwrap().value;
        assert!((p - r.s0 * r.s0 * 1.5f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn huge_base_clamps_low() {
        // a truncated pressure stays bounded, so A(s) log B wins everywhere
        let l = SystemSpec::lueroth(3).unwrap();
        let t = TargetSpec::single(1e12).unwrap();
        let r = critical_exponent(&l, &t, 1e-6, PressureSource::Eigen { grid: 32 }).unwrap();
        assert!(r.flags.clamped_low && r.s0 >= 0.5);
        assert_eq!(r.flags.label(), "clamped-low");
    }

    #[test]
    fn lueroth_convergence_shape() {
        let l = SystemSpec::lueroth(20).unwrap();
        let t = TargetSpec::single(2.0).unwrap();
        let rows = convergence_diagnostics(&l, &t, &[5, 10, 20], &[1, 2, 3], 1e-9, 32).unwrap();
        let ms: Vec<f64> = rows.iter().filter(|r| r.kind == "M").map(|r| r.s0).collect();
        assert!(ms.windows(2).all(|w| w[1] > w[0]));
        let ns: Vec<f64> = rows.iter().filter(|r| r.kind == "n").map(|r| r.s0).collect();
        assert!(ns.windows(2).all(|w| (w[1] - w[0]).abs() < 1e-8));
    }
}

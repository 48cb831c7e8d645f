use serde::Serialize;

use super::{check_s, transfer_solve, truncated_pressure, PressureEstimate, PressureMethod};
use crate::error::{Error, Result};
use crate::exec;
use crate::ifs::{SystemSpec, Table};

/// Largest truncation used for the gauss reference operator.
const MAX_REFERENCE: u64 = 65_536;
/// Reference truncation as a multiple of the largest requested one.
const REFERENCE_FACTOR: u64 = 16;
const MONOTONE_SLACK: f64 = 1e-10;

/// Result of the truncation sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailEstimate {
    /// `(M, P_M(s))` in input order.
    pub sequence: Vec<(u64, f64)>,
    pub estimate: PressureEstimate,
}

fn guard(sys: &SystemSpec, s: f64) -> Result<()> {
    check_s(s)?;
    let floor = 1.0 / sys.d() + 1e-6;
    if s < floor {
        return Err(Error::param("s", format!("tail sums diverge for s < 1/d + 1e-6 = {floor}")));
    }
    Ok(())
}

/// Upper bound on the untruncated pressure `P(s)`.
///
/// Affine systems: the exact series. Gauss: with `h` the eigenvector of the
/// operator truncated at `R ≥ M`, `L h ≤ (λ_R + ρ Σ_{a>R} λ_a^s) h` where
/// `ρ = max h / min h`, which bounds the spectral radius of the full operator.
pub fn full_pressure_upper(sys: &SystemSpec, s: f64, grid: usize) -> Result<f64> {
    guard(sys, s)?;
    if sys.is_affine() {
        return Ok(sys.table_sum(Table::Lambda, s, 1, None).ln());
    }
    let m = sys.truncation();
    let reference = (m * REFERENCE_FACTOR).clamp(m, MAX_REFERENCE.max(m));
    let sol = transfer_solve(&sys.with_truncation(reference)?, s, grid)?;
    let (lo, hi) = sol.vector.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    let tail = sys.table_sum(Table::Lambda, s, reference + 1, None);
    Ok((sol.lambda + hi / lo * tail).ln())
}

/// Pressure of the untruncated system.
///
/// Affine systems give the exact value; gauss gives `P_M(s)` bracketed by
/// `[P_M(s), full_pressure_upper]`.
pub fn full_pressure(sys: &SystemSpec, s: f64, grid: usize) -> Result<PressureEstimate> {
    guard(sys, s)?;
    let upper = full_pressure_upper(sys, s, grid)?;
    let (value, lo) = if sys.is_affine() {
        (upper, upper)
    } else {
        let v = truncated_pressure(sys, s, grid)?;
        (v, v)
    };
    Ok(PressureEstimate {
        s,
        truncation: sys.truncation(),
        method: PressureMethod::TailExtrapolated,
        value,
        lo,
        hi: upper.max(value),
        level: None,
    })
}

/// `P_M(s)` along a list of truncations with the tail envelope of the last.
pub fn pressure_tail_extrapolate(sys: &SystemSpec, s: f64, m_list: &[u64], grid: usize) -> Result<TailEstimate> {
    guard(sys, s)?;
    if m_list.len() < 3 {
        return Err(Error::param("M_list", "needs at least three truncations"));
    }
    if m_list.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::param("M_list", "must be non-decreasing"));
    }
    let systems = m_list.iter().map(|&m| sys.with_truncation(m)).collect::<Result<Vec<_>>>()?;
    let values = exec::try_map(&systems, |t| truncated_pressure(t, s, grid))?;
    for (i, w) in values.windows(2).enumerate() {
        if w[1] < w[0] - MONOTONE_SLACK {
            return Err(Error::Consistency(format!(
                "P_M({s}) decreases from M = {} to M = {}: {} -> {}",
                m_list[i],
                m_list[i + 1],
                w[0],
                w[1]
            )));
        }
    }
    let last = systems.last().expect("non-empty");
    let value = *values.last().expect("non-empty");
    let upper = full_pressure_upper(last, s, grid)?;
    Ok(TailEstimate {
        sequence: m_list.iter().copied().zip(values).collect(),
        estimate: PressureEstimate {
            s,
            truncation: last.truncation(),
            method: PressureMethod::TailExtrapolated,
            value,
            lo: value,
            hi: upper.max(value),
            level: None,
        },
    })
}

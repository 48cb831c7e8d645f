//! Partition functions and pressures `P_{M,n}(s)`, `P_M(s)` and `P(s)`.

mod partition;
mod properties;
mod smeasure;
mod tail;
mod transfer;

pub use partition::{partition_sum, partition_total, PARTITION_CAP};
pub use properties::{pressure_properties_check, PropertyReport};
pub use smeasure::{s_measure_weights, SMeasureWeights, SMEASURE_CAP};
pub use tail::{full_pressure, full_pressure_upper, pressure_tail_extrapolate, TailEstimate};
pub use transfer::{pressure_eigenvalue, transfer_solve, truncated_pressure, TransferSolution};

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ifs::{SystemSpec, Table};

/// Default grid size of the transfer-operator discretization.
pub const DEFAULT_GRID: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PressureMethod {
    ExactPartition,
    TransferEigenvalue,
    TailExtrapolated,
}

impl fmt::Display for PressureMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PressureMethod::ExactPartition => "exact-partition",
            PressureMethod::TransferEigenvalue => "transfer-eigenvalue",
            PressureMethod::TailExtrapolated => "tail-extrapolated",
        })
    }
}

/// A pressure value with an enclosing bracket.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PressureEstimate {
    pub s: f64,
    pub truncation: u64,
    pub method: PressureMethod,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    /// Word length, for partition sums only.
    pub level: Option<usize>,
}

impl PressureEstimate {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Which pressure a computation should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum PressureSource {
    /// `P_{M,n}` by enumeration.
    Partition { level: usize },
    /// `P_M` from the transfer operator.
    Eigen { grid: usize },
    /// The untruncated system: closed form for affine systems, `P_M` with a
    /// tail envelope otherwise.
    Full { grid: usize },
}

impl PressureSource {
    pub fn evaluate(&self, sys: &SystemSpec, s: f64) -> Result<PressureEstimate> {
        match *self {
            PressureSource::Partition { level } => partition_sum(sys, level, s),
            PressureSource::Eigen { grid } => {
                if sys.is_affine() {
                    // rank one on constants, the eigenvalue is the row sum
                    let mut e = table_bracket(sys, s, PressureMethod::TransferEigenvalue)?;
                    e.value = e.hi;
                    Ok(e)
                } else {
                    pressure_eigenvalue(sys, s, grid)
                }
            }
            PressureSource::Full { grid } => full_pressure(sys, s, grid),
        }
    }

    pub fn method(&self) -> PressureMethod {
        match self {
            PressureSource::Partition { .. } => PressureMethod::ExactPartition,
            PressureSource::Eigen { .. } => PressureMethod::TransferEigenvalue,
            PressureSource::Full { .. } => PressureMethod::TailExtrapolated,
        }
    }

    pub fn level(&self) -> Option<usize> {
        match self {
            PressureSource::Partition { level } => Some(*level),
            _ => None,
        }
    }
}

/// `[log Σ ζ_a^s, log Σ λ_a^s]` over `a ≤ M`; value left at the midpoint.
pub(crate) fn table_bracket(sys: &SystemSpec, s: f64, method: PressureMethod) -> Result<PressureEstimate> {
    let m = sys.truncation();
    let lo = sys.table_sum(Table::Zeta, s, 1, Some(m)).ln();
    let hi = sys.table_sum(Table::Lambda, s, 1, Some(m)).ln();
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Numeric(format!("derivative table sums overflow at s = {s}")));
    }
    Ok(PressureEstimate { s, truncation: m, method, value: 0.5 * (lo + hi), lo, hi, level: None })
}

pub(crate) fn check_s(s: f64) -> Result<()> {
    if !s.is_finite() {
        return Err(Error::param("s", format!("must be finite, got {s}")));
    }
    Ok(())
}

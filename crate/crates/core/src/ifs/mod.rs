//! Gauss-like interval maps: branch definitions, cylinders, expansions and
//! distortion diagnostics.
//!
//! All three built-in families stack their first-level cylinders with digit 1
//! on the right: `C[a] = [u_a, v_a]` with `v_{a+1} = u_a` and `v_1 = 1`.

mod cylinder;
mod distortion;
mod expand;
mod word;

pub use cylinder::{cylinder_interval, tail_union, CylinderInterval, TailUnion};
pub use distortion::{distortion_report, next_word, word_distortion, DistortionReport, DistortionSummary, WordSampler};
pub use expand::{expand, expand_rational, Expansion};
pub use word::Word;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series;

/// Largest alphabet truncation accepted anywhere.
pub const MAX_ALPHABET: u64 = 1_000_000;
/// Number of digits in the normalized power-law system.
pub const POWER_LAW_DIGITS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Gauss,
    Lueroth,
    #[serde(alias = "power-law")]
    Power,
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SystemKind::Gauss => "gauss",
            SystemKind::Lueroth => "lueroth",
            SystemKind::Power => "power",
        })
    }
}

impl std::str::FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gauss" => Ok(SystemKind::Gauss),
            "lueroth" => Ok(SystemKind::Lueroth),
            "power" | "power-law" => Ok(SystemKind::Power),
            other => Err(Error::param("system", format!("unknown kind `{other}`"))),
        }
    }
}

/// Which derivative bound table to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Table {
    /// Lower bounds ζ_a.
    Zeta,
    /// Upper bounds λ_a.
    Lambda,
}

/// Normalized weights `w_a = a^{-d}/Z`, `a ≤ POWER_LAW_DIGITS`.
#[derive(Debug)]
pub(crate) struct PowerTable {
    /// `upper[a] = Σ_{j>a} w_j`, so `C[a] = [upper[a], upper[a-1]]`.
    upper: Vec<f64>,
    /// `lower[a] = Σ_{j≤a} w_j = 1 - upper[a]`, kept separately for accuracy.
    lower: Vec<f64>,
    weight: Vec<f64>,
}

impl PowerTable {
    fn new(d: f64) -> Self {
        let n = POWER_LAW_DIGITS as usize;
        let raw: Vec<f64> = (0..=n).map(|a| if a == 0 { 0.0 } else { (a as f64).powf(-d) }).collect();
        let mut upper = vec![0.0; n + 1];
        for a in (0..n).rev() {
            upper[a] = upper[a + 1] + raw[a + 1];
        }
        let z = upper[0];
        for u in upper.iter_mut() {
            *u /= z;
        }
        let weight: Vec<f64> = raw.iter().map(|r| r / z).collect();
        let mut lower = vec![0.0; n + 1];
        for a in 1..=n {
            lower[a] = lower[a - 1] + weight[a];
        }
        PowerTable { upper, lower, weight }
    }

    fn weight(&self, a: u64) -> f64 {
        self.weight.get(a as usize).copied().unwrap_or(0.0)
    }

    fn upper(&self, a: u64) -> f64 {
        self.upper.get(a as usize).copied().unwrap_or(0.0)
    }

    fn lower(&self, a: u64) -> f64 {
        self.lower.get(a as usize).copied().unwrap_or(1.0)
    }

    /// Digit whose cylinder `[upper[a], upper[a-1])` contains `y`.
    fn locate(&self, y: f64) -> u64 {
        // upper is decreasing; find the first a with upper[a] <= y
        let idx = self.upper.partition_point(|&u| u > y);
        (idx as u64).clamp(1, POWER_LAW_DIGITS)
    }
}

/// A d-decaying Gauss-like system truncated to digits `1..=M`.
///
/// The truncation only matters for enumeration (partition sums, transfer
/// operators); cylinder geometry and expansions use the full alphabet.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    kind: SystemKind,
    d: f64,
    m: u64,
    power: Option<Arc<PowerTable>>,
}

impl PartialEq for SystemSpec {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.d == other.d && self.m == other.m
    }
}

impl SystemSpec {
    pub fn gauss(m: u64) -> Result<Self> {
        Self::check_m(m, MAX_ALPHABET)?;
        Ok(SystemSpec { kind: SystemKind::Gauss, d: 2.0, m, power: None })
    }

    pub fn lueroth(m: u64) -> Result<Self> {
        Self::check_m(m, MAX_ALPHABET)?;
        Ok(SystemSpec { kind: SystemKind::Lueroth, d: 2.0, m, power: None })
    }

    /// Affine system with `|C[a]| ∝ a^{-d}` over `POWER_LAW_DIGITS` digits.
    pub fn power_law(d: f64, m: u64) -> Result<Self> {
        if !(d.is_finite() && d > 1.0) {
            return Err(Error::param("d", format!("must be a finite real > 1, got {d}")));
        }
        Self::check_m(m, POWER_LAW_DIGITS)?;
        Ok(SystemSpec { kind: SystemKind::Power, d, m, power: Some(Arc::new(PowerTable::new(d))) })
    }

    /// Builds a system from its kind; `d` is ignored unless `kind` is power.
    pub fn new(kind: SystemKind, d: Option<f64>, m: u64) -> Result<Self> {
        match kind {
            SystemKind::Gauss => Self::gauss(m),
            SystemKind::Lueroth => Self::lueroth(m),
            SystemKind::Power => {
                let d = d.ok_or_else(|| Error::param("d", "required for the power system"))?;
                Self::power_law(d, m)
            }
        }
    }

    fn check_m(m: u64, limit: u64) -> Result<()> {
        if m == 0 {
            return Err(Error::param("M", "must be a positive integer"));
        }
        if m > limit {
            return Err(Error::cap("alphabet", m as f64, limit as f64));
        }
        Ok(())
    }

    /// Same system with a different truncation (shares the power table).
    pub fn with_truncation(&self, m: u64) -> Result<Self> {
        let limit = if self.kind == SystemKind::Power { POWER_LAW_DIGITS } else { MAX_ALPHABET };
        Self::check_m(m, limit)?;
        Ok(SystemSpec { m, ..self.clone() })
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn truncation(&self) -> u64 {
        self.m
    }

    /// Constant-derivative branches.
    pub fn is_affine(&self) -> bool {
        self.kind != SystemKind::Gauss
    }

    /// Largest digit that exists in the untruncated system.
    pub fn full_alphabet(&self) -> Option<u64> {
        match self.kind {
            SystemKind::Power => Some(POWER_LAW_DIGITS),
            _ => None,
        }
    }

    fn table(&self) -> &PowerTable {
        self.power.as_deref().expect("power table present for power systems")
    }

    /// First-level cylinder `C[a] = [u_a, v_a]`.
    pub fn level_one(&self, a: u64) -> (f64, f64) {
        match self.kind {
            SystemKind::Gauss | SystemKind::Lueroth => (1.0 / (a as f64 + 1.0), 1.0 / a as f64),
            SystemKind::Power => {
                let t = self.table();
                (t.upper(a), t.upper(a - 1))
            }
        }
    }

    /// `1 - v_a`, accurate when `v_a` is close to 1.
    pub fn level_one_right_gap(&self, a: u64) -> f64 {
        match self.kind {
            SystemKind::Gauss | SystemKind::Lueroth => (a as f64 - 1.0) / a as f64,
            SystemKind::Power => self.table().lower(a - 1),
        }
    }

    /// `|C[a]|`.
    pub fn level_one_length(&self, a: u64) -> f64 {
        match self.kind {
            SystemKind::Gauss | SystemKind::Lueroth => {
                let x = a as f64;
                1.0 / (x * (x + 1.0))
            }
            SystemKind::Power => self.table().weight(a),
        }
    }

    pub fn ln_level_one_length(&self, a: u64) -> f64 {
        match self.kind {
            SystemKind::Gauss | SystemKind::Lueroth => {
                let x = a as f64;
                -(x.ln() + (x + 1.0).ln())
            }
            SystemKind::Power => self.table().weight(a).ln(),
        }
    }

    /// `|∪_{i ≥ c} C[i]|` over the full alphabet.
    pub fn tail_length(&self, c: u64) -> f64 {
        match self.kind {
            SystemKind::Gauss | SystemKind::Lueroth => 1.0 / c as f64,
            SystemKind::Power => {
                if c > POWER_LAW_DIGITS {
                    0.0
                } else {
                    self.table().upper(c - 1)
                }
            }
        }
    }

    /// `|∪_{lo ≤ c ≤ hi} C[c]| = v_lo − u_hi`, zero when `lo > hi`.
    pub fn span(&self, lo: u64, hi: u64) -> f64 {
        if lo > hi {
            return 0.0;
        }
        match self.kind {
            SystemKind::Gauss | SystemKind::Lueroth => {
                let (l, h) = (lo as f64, hi as f64 + 1.0);
                (h - l) / (l * h)
            }
            SystemKind::Power => {
                let t = self.table();
                let hi = hi.min(POWER_LAW_DIGITS);
                t.upper(lo - 1) - t.upper(hi)
            }
        }
    }

    /// Inverse branch `T_a(y)`.
    pub fn branch(&self, a: u64, y: f64) -> f64 {
        let x = a as f64;
        match self.kind {
            SystemKind::Gauss => 1.0 / (x + y),
            SystemKind::Lueroth => (y + x) / (x * (x + 1.0)),
            SystemKind::Power => {
                let t = self.table();
                t.upper(a) + t.weight(a) * y
            }
        }
    }

    /// `|T_a'(y)|`.
    pub fn branch_derivative(&self, a: u64, y: f64) -> f64 {
        match self.kind {
            SystemKind::Gauss => {
                let v = a as f64 + y;
                1.0 / (v * v)
            }
            _ => self.level_one_length(a),
        }
    }

    /// Derivative bounds `ζ_a ≤ |T_a'| ≤ λ_a`.
    pub fn derivative_bound(&self, table: Table, a: u64) -> f64 {
        match (self.kind, table) {
            (SystemKind::Gauss, Table::Zeta) => {
                let x = a as f64 + 1.0;
                1.0 / (x * x)
            }
            (SystemKind::Gauss, Table::Lambda) => {
                let x = a as f64;
                1.0 / (x * x)
            }
            _ => self.level_one_length(a),
        }
    }

    /// `Σ_{a=from}^{to} bound_a^s`; `to = None` runs over the full alphabet.
    pub fn table_sum(&self, table: Table, s: f64, from: u64, to: Option<u64>) -> f64 {
        match self.kind {
            SystemKind::Gauss => {
                let shift = if table == Table::Zeta { 1.0 } else { 0.0 };
                series::pair_sum(shift, shift, s, from, to)
            }
            SystemKind::Lueroth => series::pair_sum(0.0, 1.0, s, from, to),
            SystemKind::Power => {
                let to = to.unwrap_or(POWER_LAW_DIGITS).min(POWER_LAW_DIGITS);
                let t = self.table();
                (from..=to).map(|a| t.weight(a).powf(s)).sum()
            }
        }
    }

    /// `(K₁, K₂)`: extremes of `ζ_a a^d` and `λ_a a^d` over `a ≤ M`.
    pub fn distortion_constants(&self) -> (f64, f64) {
        match self.kind {
            SystemKind::Gauss => (0.25, 1.0),
            SystemKind::Lueroth => {
                let m = self.m as f64;
                (0.5, m / (m + 1.0))
            }
            SystemKind::Power => {
                let k = self.table().weight(1);
                (k, k)
            }
        }
    }

    /// `(m, h)` with `|(T_{a₁}∘…∘T_{a_m})'| ≤ h < 1` for all digits.
    pub fn contraction(&self) -> (usize, f64) {
        match self.kind {
            SystemKind::Gauss => {
                let mut h: f64 = 0.0;
                for a in 1..=self.m.min(4) {
                    for b in 1..=self.m.min(4) {
                        for i in 0..=100 {
                            let x = i as f64 / 100.0;
                            let v = self.branch_derivative(a, self.branch(b, x)) * self.branch_derivative(b, x);
                            h = h.max(v);
                        }
                    }
                }
                (2, h)
            }
            _ => (1, self.level_one_length(1)),
        }
    }

    /// Local coordinate of `y ∈ C[a]` under the inverse of `T_a`.
    pub fn forward(&self, a: u64, y: f64) -> f64 {
        let x = a as f64;
        match self.kind {
            SystemKind::Gauss => 1.0 / y - x,
            SystemKind::Lueroth => x * (x + 1.0) * y - x,
            SystemKind::Power => {
                let t = self.table();
                (y - t.upper(a)) / t.weight(a)
            }
        }
    }

    /// Digit `a` with `y ∈ [u_a, v_a)`, for `y ∈ (0, 1)`.
    pub fn locate(&self, y: f64) -> u64 {
        match self.kind {
            SystemKind::Gauss | SystemKind::Lueroth => {
                let r = 1.0 / y;
                let mut a = r.floor().max(1.0) as u64;
                // keep the half-open rule exact under rounding
                while a > 1 && y >= 1.0 / a as f64 {
                    a -= 1;
                }
                while y < 1.0 / (a as f64 + 1.0) {
                    a += 1;
                }
                a
            }
            SystemKind::Power => self.table().locate(y),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_tables() {
        let g = SystemSpec::gauss(10).unwrap();
        assert_eq!(g.derivative_bound(Table::Zeta, 1), 0.25);
        assert_eq!(g.derivative_bound(Table::Lambda, 3), 1.0 / 9.0);
        assert_eq!(g.distortion_constants(), (0.25, 1.0));
        let (m, h) = g.contraction();
        assert_eq!(m, 2);
        assert_relative_eq!(h, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn lueroth_branches() {
        let l = SystemSpec::lueroth(5).unwrap();
        // digit 1 is branch parameter 2
        assert_eq!(l.level_one(1), (0.5, 1.0));
        assert_eq!(l.branch(1, 0.0), 0.5);
        assert_eq!(l.branch(1, 1.0), 1.0);
        assert_relative_eq!(l.forward(1, 0.75), 0.5);
        assert_eq!(l.contraction(), (1, 0.5));
        let (k1, k2) = l.distortion_constants();
        assert_eq!((k1, k2), (0.5, 5.0 / 6.0));
    }

    #[test]
    fn power_tiles_unit_interval() {
        let p = SystemSpec::power_law(2.5, 100).unwrap();
        assert_eq!(p.level_one(1).1, 1.0);
        assert!(p.level_one(POWER_LAW_DIGITS).0.abs() < 1e-15);
        let total = p.table_sum(Table::Lambda, 1.0, 1, None);
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);
        for a in [1u64, 2, 17, 999] {
            let (lo, hi) = p.level_one(a);
            assert_relative_eq!(hi - lo, p.level_one_length(a), max_relative = 1e-9);
            assert_eq!(p.locate(0.5 * (lo + hi)), a);
        }
    }

    #[test]
    fn locate_half_open() {
        let g = SystemSpec::gauss(10).unwrap();
        assert_eq!(g.locate(0.5), 1);
        assert_eq!(g.locate(1.0 / 3.0), 2);
        assert_eq!(g.locate(0.49), 2);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(SystemSpec::gauss(0).is_err());
        assert!(SystemSpec::power_law(1.0, 5).is_err());
        assert!(matches!(SystemSpec::lueroth(MAX_ALPHABET + 1), Err(Error::SizeCap { .. })));
    }
}

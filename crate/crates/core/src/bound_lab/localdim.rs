//! Ball masses `μ(B(x, r))` at sampled points of `F`, and the natural-cover
//! exponent of the construction.
//!
//! A ball around a leaf is tracked down the leaf's own path in local
//! coordinates of each cylinder: the point `y`, its complement `1 − y`, and
//! the ball's reach `δ_L`, `δ_R` on either side. Whatever spills past the path
//! child covers a run of whole siblings plus at most one partial sibling on
//! each side, and the partial sibling is always cut from one of its ends, so
//! its mass follows a single chain of "anchored" sub-intervals. Nothing is
//! subtracted, so tiny radii keep full relative precision.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::ifs::{SystemKind, Table};

use super::cantor::{CantorMeasure, LeafSample, PositionKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadiusCase {
    /// `r = r_n`, `n₁ ≤ n ≤ n₁ + i₁ − 1`: inside the first free block.
    Case1,
    /// `r` equal to the union of all admissible special children of `C_n(x)`.
    Case2,
    /// `r = r_n`, `n_j + i_k + 1 ≤ n ≤ n_{j+1} + i₁ − 1`: a later free block.
    Case3,
    /// `r = r_n` with `n` inside a special block. The regime analysis replaces
    /// these by the union radius; they are reported for diagnosis only.
    SpecialBlock,
}

impl RadiusCase {
    pub const ALL: [RadiusCase; 4] =
        [RadiusCase::Case1, RadiusCase::Case2, RadiusCase::Case3, RadiusCase::SpecialBlock];

    pub fn as_str(&self) -> &'static str {
        match self {
            RadiusCase::Case1 => "case1",
            RadiusCase::Case2 => "case2",
            RadiusCase::Case3 => "case3",
            RadiusCase::SpecialBlock => "special-block",
        }
    }

    /// Counted in the regime minimum.
    pub fn in_regimes(&self) -> bool {
        *self != RadiusCase::SpecialBlock
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalDimRow {
    pub sample: u64,
    pub x: f64,
    pub n: usize,
    pub ln_r: f64,
    pub ln_mass: f64,
    pub ratio: f64,
    pub case: RadiusCase,
}

impl LocalDimRow {
    pub fn r(&self) -> f64 {
        self.ln_r.exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalDimStats {
    pub samples: usize,
    pub rows: Vec<LocalDimRow>,
    /// Minimum and mean over the three regimes.
    pub min: f64,
    pub mean: f64,
    /// Minimum per [`RadiusCase::ALL`] entry; NaN when absent.
    pub case_min: [f64; 4],
    pub all_in_target: bool,
}

struct Path {
    digits: Vec<u64>,
    y: Vec<f64>,
    yc: Vec<f64>,
    rho: Vec<f64>,
    ln_len: Vec<f64>,
    ln_mass: Vec<f64>,
}

impl Path {
    fn new(mu: &CantorMeasure, digits: &[u64]) -> Self {
        let sys = &mu.sys;
        let d = digits.len();
        let mut rho = vec![0.0; d + 1];
        let mut ln_len = vec![0.0; d + 1];
        let mut ln_mass = vec![0.0; d + 1];
        let mut ln_q = 0.0;
        for (m, &a) in digits.iter().enumerate() {
            ln_mass[m + 1] = ln_mass[m] + mu.prob(m + 1, rho[m], a).ln();
            rho[m + 1] = mu.step_state(rho[m], a);
            ln_len[m + 1] = match sys.kind() {
                SystemKind::Gauss => {
                    ln_q += (a as f64 + rho[m]).ln();
                    -2.0 * ln_q - rho[m + 1].ln_1p()
                }
                _ => ln_len[m] + sys.ln_level_one_length(a),
            };
        }
        let mut y = vec![0.5; d + 1];
        let mut yc = vec![0.5; d + 1];
        for m in (0..d).rev() {
            let a = digits[m];
            let (yp, ycp) = (y[m + 1], yc[m + 1]);
            match sys.kind() {
                SystemKind::Gauss => {
                    let x = a as f64;
                    y[m] = 1.0 / (x + yp);
                    yc[m] = (x - 1.0 + yp) / (x + yp);
                }
                _ => {
                    let (u, _) = sys.level_one(a);
                    let len = sys.level_one_length(a);
                    y[m] = u + len * yp;
                    yc[m] = sys.level_one_right_gap(a) + len * ycp;
                }
            }
        }
        Path { digits: digits.to_vec(), y, yc, rho, ln_len, ln_mass }
    }
}

/// Which end of a sibling interval (in parent coordinates) a cut starts from.
#[derive(Clone, Copy, PartialEq)]
enum End {
    /// The end nearer 0.
    Low,
    /// The end nearer 1.
    High,
}

impl CantorMeasure {
    /// Cut of length `e` from one end of child `b`, in the child's own
    /// coordinates: `(anchored at 0, length)`.
    fn to_child(&self, b: u64, end: End, e: f64) -> (bool, f64) {
        match self.sys.kind() {
            SystemKind::Gauss => {
                let x = b as f64;
                match end {
                    // u_b is the child's z = 1
                    End::Low => (false, (x + 1.0) * (x + 1.0) * e / (1.0 + (x + 1.0) * e)),
                    End::High => {
                        let den = 1.0 - x * e;
                        (true, if den <= 0.0 { 1.0 } else { x * x * e / den })
                    }
                }
            }
            _ => (end == End::Low, e / self.sys.level_one_length(b)),
        }
    }

    /// Conditional mass of a cut `[0, len]` or `[1 − len, 1]` of a node at
    /// depth `k` in state `rho`.
    fn anchored_mass(&self, mut k: usize, mut rho: f64, mut at_zero: bool, mut len: f64) -> f64 {
        let sys = &self.sys;
        let depth = self.depth();
        let mut total = 0.0;
        let mut weight = 1.0;
        loop {
            if len >= 1.0 {
                return total + weight;
            }
            if len <= 0.0 {
                return total;
            }
            if k == depth {
                return total + weight;
            }
            let j = k + 1;
            let (full_lo, full_hi, bp, e, end) = if at_zero {
                let bp = sys.locate(len);
                let e = len - sys.level_one(bp).0;
                (bp + 1, u64::MAX, bp, e, End::Low)
            } else if len > 1e-3 {
                let bp = sys.locate(1.0 - len);
                let e = len - sys.level_one_right_gap(bp);
                (1, bp - 1, bp, e, End::High)
            } else {
                let mut b = 1;
                while sys.level_one_right_gap(b) + sys.level_one_length(b) <= len {
                    b += 1;
                }
                (1, b - 1, b, len - sys.level_one_right_gap(b), End::High)
            };
            if full_lo <= full_hi {
                total += weight * self.range_prob(j, rho, full_lo, full_hi);
            }
            let p = self.prob(j, rho, bp);
            if p == 0.0 || e <= 0.0 {
                return total;
            }
            weight *= p;
            let (z, l) = self.to_child(bp, end, e);
            at_zero = z;
            len = l;
            rho = self.step_state(rho, bp);
            k = j;
        }
    }

    /// Siblings `b < a` within reach `e` beyond `v_a`.
    fn right_siblings(&self, i: usize, rho: f64, a: u64, e: f64) -> f64 {
        let sys = &self.sys;
        let (slo, shi) = self.support(i);
        if a == 1 || slo > a - 1 || shi < 1 {
            return 0.0;
        }
        let (full_lo, bp, eb) = if e < sys.level_one_length(a - 1) {
            (a, a - 1, e)
        } else if e >= sys.level_one_right_gap(a) {
            (1, 0, 0.0)
        } else {
            let y = sys.level_one(a).1 + e;
            let bp = sys.locate(y).min(a - 1);
            (bp + 1, bp, e - sys.span(bp + 1, a - 1))
        };
        let mut mass = self.range_prob(i, rho, full_lo, a - 1);
        if bp >= 1 && eb > 0.0 {
            let p = self.prob(i, rho, bp);
            if p > 0.0 {
                let (z, l) = self.to_child(bp, End::Low, eb);
                mass += p * self.anchored_mass(i, self.step_state(rho, bp), z, l);
            }
        }
        mass
    }

    /// Siblings `b > a` within reach `e` below `u_a`.
    fn left_siblings(&self, i: usize, rho: f64, a: u64, e: f64) -> f64 {
        let sys = &self.sys;
        let (_, shi) = self.support(i);
        if shi <= a {
            return 0.0;
        }
        let ua = sys.level_one(a).0;
        let (full_hi, bp, eb) = if e < sys.level_one_length(a + 1) {
            (a, a + 1, e)
        } else if e >= ua {
            (u64::MAX, 0, 0.0)
        } else {
            let bp = sys.locate(ua - e).max(a + 1);
            (bp - 1, bp, e - sys.span(a + 1, bp - 1))
        };
        let mut mass = self.range_prob(i, rho, a + 1, full_hi);
        if bp > a && eb > 0.0 {
            let p = self.prob(i, rho, bp);
            if p > 0.0 {
                let (z, l) = self.to_child(bp, End::High, eb);
                mass += p * self.anchored_mass(i, self.step_state(rho, bp), z, l);
            }
        }
        mass
    }

    /// `ln μ(B(x, r))` for the leaf's point `x`, given `ln r`.
    fn ln_ball_mass(&self, path: &Path, ln_r: f64) -> f64 {
        let sys = &self.sys;
        let depth = path.digits.len();
        let gauss = sys.kind() == SystemKind::Gauss;
        let mut terms: Vec<f64> = Vec::new();
        let r = ln_r.exp();
        let (mut dl, mut dr) = (r, r);
        for m in 0..=depth {
            let (y, yc) = (path.y[m], path.yc[m]);
            if !gauss {
                let d = (ln_r - path.ln_len[m]).exp();
                dl = d;
                dr = d;
            }
            if (dl >= y && dr >= yc) || m == depth {
                terms.push(path.ln_mass[m]);
                break;
            }
            let a = path.digits[m];
            let i = m + 1;
            let rho = path.rho[m];
            let (yp, ycp) = (path.y[m + 1], path.yc[m + 1]);
            let x = a as f64;
            let (gap_r, gap_l) = if gauss {
                (yp / (x * (x + yp)), ycp / ((x + yp) * (x + 1.0)))
            } else {
                let len = sys.level_one_length(a);
                (len * ycp, len * yp)
            };
            let mut sib = 0.0;
            if dr > gap_r {
                sib += self.right_siblings(i, rho, a, dr - gap_r);
            }
            if dl > gap_l {
                sib += self.left_siblings(i, rho, a, dl - gap_l);
            }
            if sib > 0.0 {
                terms.push(path.ln_mass[m] + sib.ln());
            }
            if gauss {
                let new_r = if dl >= y { f64::INFINITY } else { dl / (y * (y - dl)) };
                let new_l = dr / (y * (y + dr));
                dl = new_l;
                dr = new_r;
            }
        }
        let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
    }

    fn classify(&self, n: usize) -> RadiusCase {
        let pos = self.target_positions();
        let (first, last) = (pos.0 as usize, pos.1 as usize);
        let n1 = self.indices[0] as usize;
        if n < n1 + first {
            return RadiusCase::Case1;
        }
        for (j, &nj) in self.indices.iter().enumerate() {
            let nj = nj as usize;
            if n >= nj + first && n <= nj + last {
                return RadiusCase::SpecialBlock;
            }
            let next = self.indices.get(j + 1).map(|&v| v as usize + first - 1);
            if n > nj + last && next.is_none_or(|e| n <= e) {
                return RadiusCase::Case3;
            }
        }
        RadiusCase::Case1
    }

    /// Radii along the leaf's path from `r_{n₁}` to the end of the last stage.
    fn radii(&self, path: &Path) -> Vec<(usize, f64, RadiusCase)> {
        let n1 = self.indices[0] as usize;
        let last = *self.stage_ends.last().unwrap();
        let mut out = Vec::new();
        for n in n1..=last {
            let ln_c = path.ln_len[n];
            out.push((n, ln_c, self.classify(n)));
            if let Some(PositionKind::Special { lo, count }) = self.positions.get(n).copied() {
                let hi = lo + count - 1;
                let span = self.sys.span(lo, hi);
                let scale = if self.sys.kind() == SystemKind::Gauss {
                    let rho = path.rho[n];
                    let (z1, z2) = (1.0 / (hi as f64 + 1.0), 1.0 / lo as f64);
                    (1.0 + rho) / ((1.0 + z1 * rho) * (1.0 + z2 * rho))
                } else {
                    1.0
                };
                out.push((n, ln_c + (span * scale).ln(), RadiusCase::Case2));
            }
        }
        out
    }

    /// Rows for one sampled leaf.
    pub fn local_dimension_rows(&self, leaf: &LeafSample) -> Vec<LocalDimRow> {
        let path = Path::new(self, &leaf.digits);
        self.radii(&path)
            .into_iter()
            .map(|(n, ln_r, case)| {
                let ln_mass = self.ln_ball_mass(&path, ln_r);
                LocalDimRow { sample: leaf.index, x: path.y[0], n, ln_r, ln_mass, ratio: ln_mass / ln_r, case }
            })
            .collect()
    }
}

/// Samples `count` leaves and reports `log μ(B(x, r)) / log r` at the
/// cylinder scales `r ≤ r_{n₁}` along each.
pub fn local_dimension_sample(measure: &CantorMeasure, count: usize, seed: u64) -> Result<LocalDimStats> {
    if count == 0 {
        return Err(Error::param("samples", "must be at least 1"));
    }
    if measure.stage_ends.len() < 2 {
        return Err(Error::param("stages", "local dimensions need at least two stages"));
    }
    let per_leaf = exec::map_range(count, |i| {
        let leaf = measure.sample_leaf(seed, i as u64);
        (measure.in_target(&leaf.digits), measure.local_dimension_rows(&leaf))
    });
    let all_in_target = per_leaf.iter().all(|(ok, _)| *ok);
    let rows: Vec<LocalDimRow> = per_leaf.into_iter().flat_map(|(_, r)| r).collect();
    if rows.iter().any(|r| !r.ratio.is_finite()) {
        return Err(Error::Numeric("non-finite local dimension ratio".into()));
    }
    let regime: Vec<f64> = rows.iter().filter(|r| r.case.in_regimes()).map(|r| r.ratio).collect();
    if regime.is_empty() {
        return Err(Error::param("stages", "no radii fall in the three regimes"));
    }
    let min = regime.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = regime.iter().sum::<f64>() / regime.len() as f64;
    let mut case_min = [f64::NAN; 4];
    for (slot, case) in case_min.iter_mut().zip(RadiusCase::ALL) {
        for r in rows.iter().filter(|r| r.case == case) {
            *slot = if slot.is_nan() { r.ratio } else { slot.min(r.ratio) };
        }
    }
    Ok(LocalDimStats { samples: count, rows, min, mean, case_min, all_in_target })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NaturalCover {
    pub exponent: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Root `σ` of `Σ_i log Σ_{a ∈ support(i)} |C[a]|^σ = 0` over the positions
/// of the last stage, i.e. where the stage-to-stage ratio of `Σ |C|^σ` over
/// the construction's cylinders is 1. Gauss systems give a bracket from
/// the ζ and λ tables.
pub fn natural_cover_exponent(measure: &CantorMeasure) -> Result<NaturalCover> {
    let ends = &measure.stage_ends;
    let start = if ends.len() >= 2 { ends[ends.len() - 2] + 1 } else { 1 };
    let stop = *ends.last().unwrap();
    let sys = &measure.sys;
    let d = sys.d();
    let log_sum = |table: Table, s: f64| -> f64 {
        (start..=stop)
            .map(|i| {
                let (lo, hi) = measure.support(i);
                sys.table_sum(table, s, lo, Some(hi)).ln()
            })
            .sum()
    };
    let root = |table: Table| -> Result<f64> {
        let (mut lo, mut hi) = (1.0 / d + 1e-9, 1.0);
        if log_sum(table, hi) > 0.0 {
            return Ok(1.0);
        }
        if log_sum(table, lo) <= 0.0 {
            return Err(Error::Numeric("natural-cover sum already below 1 at s = 1/d".into()));
        }
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if log_sum(table, mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    };
    let lo = root(Table::Zeta)?;
    let hi = root(Table::Lambda)?;
    Ok(NaturalCover { exponent: 0.5 * (lo + hi), lo, hi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bound_lab::cantor::{cantor_generate, CantorSpec, SparseRule};
    use crate::ifs::SystemSpec;
    use crate::weights::TargetSpec;

    fn measure(sys: SystemSpec) -> CantorMeasure {
        let target = TargetSpec::single(2.0).unwrap();
        let spec = CantorSpec {
            first: 2,
            rule: SparseRule::Explicit(vec![2, 5]),
            stages: 2,
            b: vec![1.0],
            m: 3,
            s: 0.8,
            tail_free: 2,
        };
        CantorMeasure::new(&sys, &target, &spec).unwrap()
    }

    /// Ball mass by brute force over the full leaf-depth tree.
    fn brute(mu: &CantorMeasure, x: f64, r: f64) -> f64 {
        let depth = mu.depth();
        let mut total = 0.0;
        let mut stack = vec![(0usize, 0.0f64, 1.0f64, 0.0f64, 1.0f64)];
        while let Some((k, rho, mass, lo, hi)) = stack.pop() {
            let (a, b) = (lo.min(hi), lo.max(hi));
            if b < x - r || a > x + r {
                continue;
            }
            if k == depth || (a >= x - r && b <= x + r) {
                total += mass;
                continue;
            }
            let (slo, shi) = mu.support(k + 1);
            for c in slo..=shi {
                let p = mu.prob(k + 1, rho, c);
                // child endpoints: images of the child's z = 0 and z = 1
                let map = |z: f64| {
                    let t = mu.system().branch(c, z);
                    lo + (hi - lo) * t
                };
                let (c0, c1) = match mu.system().kind() {
                    SystemKind::Gauss => unreachable!(),
                    _ => (map(0.0), map(1.0)),
                };
                stack.push((k + 1, mu.step_state(rho, c), mass * p, c0, c1));
            }
        }
        total
    }

    #[test]
    fn ball_mass_matches_brute_force() {
        let mu = measure(SystemSpec::lueroth(3).unwrap());
        for i in 0..6 {
            let leaf = mu.sample_leaf(11, i);
            let path = Path::new(&mu, &leaf.digits);
            for n in 1..mu.depth() {
                for scale in [0.3, 1.0, 2.5] {
                    let ln_r = path.ln_len[n] + f64::ln(scale);
                    let fast = mu.ln_ball_mass(&path, ln_r).exp();
                    let slow = brute(&mu, path.y[0], ln_r.exp());
                    assert!(
                        (fast - slow).abs() <= 1e-9 * slow.max(1e-300) + 1e-14,
                        "leaf {i} n {n} scale {scale}: {fast} vs {slow}"
                    );
                }
            }
        }
    }

    #[test]
    fn whole_interval_has_mass_one() {
        let mu = measure(SystemSpec::lueroth(3).unwrap());
        let leaf = mu.sample_leaf(0, 0);
        let path = Path::new(&mu, &leaf.digits);
        assert!((mu.ln_ball_mass(&path, 0.0)).abs() < 1e-12);
        assert!(cantor_generate(&mu, 1).is_ok());
    }

    #[test]
    fn gauss_ball_mass_is_monotone() {
        let mu = measure(SystemSpec::gauss(3).unwrap());
        let leaf = mu.sample_leaf(3, 1);
        let path = Path::new(&mu, &leaf.digits);
        let mut last = f64::NEG_INFINITY;
        for k in 0..40 {
            let ln_r = -30.0 + k as f64 * 0.7;
            let v = mu.ln_ball_mass(&path, ln_r);
            assert!(v >= last - 1e-12);
            assert!(v <= 1e-12);
            last = v;
        }
    }
}

//! The Cantor subset `F ⊂ E` and its measure `μ`.
//!
//! Positions split into three kinds. Free positions carry the `s`-measure
//! over `1..=M`. Inside stage `j` the special slots `n_j + i_m` are uniform
//! over `⌊X⌋+1 ..= ⌊2X⌋` with `X = B^{n_j b_m}`, and the slots between them
//! are forced to 1. Conditional probabilities at free positions depend only
//! on the state `ρ = q_{n−1}/q_n` (always 0 for affine systems), so the
//! measure is a product of per-position kernels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dimension::{critical_exponent, DimensionResult};
use crate::error::{Error, Result};
use crate::exec;
use crate::ifs::{SystemKind, SystemSpec};
use crate::pressure::PressureSource;
use crate::weights::{a_of_s, SimplexPoint, TargetSpec};

use super::cover::LOG_GUARD;

/// Largest `X = B^{n_j b_m}` whose digit range is handled (floors stay exact).
pub const SPECIAL_CAP: f64 = 4_503_599_627_370_496.0;
/// Most nodes materialized by [`cantor_generate`].
pub const NODE_CAP: u64 = 2_000_000;
const MAX_STAGES: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SparseRule {
    /// `n_{j+1} = n_j²`.
    Square,
    /// Stage indices given outright.
    Explicit(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CantorSpec {
    pub first: u64,
    pub rule: SparseRule,
    pub stages: usize,
    /// Simplex point splitting each stage's budget across the slots.
    pub b: Vec<f64>,
    /// Alphabet bound at free positions.
    pub m: u64,
    /// Exponent of the free-position measure.
    pub s: f64,
    /// Free positions kept after the last stage.
    pub tail_free: usize,
}

impl CantorSpec {
    /// Square-rule stages from `n₁`, with `b` and `s` taken at the `s₀` of the
    /// untruncated system.
    pub fn at_critical(
        sys: &SystemSpec,
        target: &TargetSpec,
        first: u64,
        stages: usize,
    ) -> Result<(Self, DimensionResult)> {
        let dim = critical_exponent(sys, target, 1e-10, PressureSource::Full { grid: crate::pressure::DEFAULT_GRID })?;
        let b = a_of_s(target, dim.s0, sys.d())?.argmin.coords().to_vec();
        let spec =
            CantorSpec { first, rule: SparseRule::Square, stages, b, m: sys.truncation(), s: dim.s0, tail_free: 8 };
        Ok((spec, dim))
    }

    /// `n_1 < n_2 < …` for the configured number of stages.
    pub fn indices(&self) -> Result<Vec<u64>> {
        if self.stages == 0 || self.stages > MAX_STAGES {
            return Err(Error::param("stages", format!("must lie in 1..={MAX_STAGES}")));
        }
        let out = match &self.rule {
            SparseRule::Square => {
                let mut v = vec![self.first];
                while v.len() < self.stages {
                    let last = *v.last().unwrap();
                    let next = last
                        .checked_mul(last)
                        .ok_or_else(|| Error::cap("stage index", f64::INFINITY, u64::MAX as f64))?;
                    v.push(next);
                }
                v
            }
            SparseRule::Explicit(v) => {
                if v.len() < self.stages {
                    return Err(Error::param("rule", "fewer explicit indices than stages"));
                }
                v[..self.stages].to_vec()
            }
        };
        if out[0] == 0 || out.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("rule", "stage indices must be positive and strictly increasing"));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StageLabel {
    FreeBlock,
    SpecialDigit,
    FillerOnes,
}

impl StageLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            StageLabel::FreeBlock => "free-block",
            StageLabel::SpecialDigit => "special-digit",
            StageLabel::FillerOnes => "filler-ones",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PositionKind {
    Free,
    Filler,
    Special { lo: u64, count: u64 },
}

impl PositionKind {
    pub fn label(&self) -> StageLabel {
        match self {
            PositionKind::Free => StageLabel::FreeBlock,
            PositionKind::Filler => StageLabel::FillerOnes,
            PositionKind::Special { .. } => StageLabel::SpecialDigit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureNode {
    pub word: Vec<u64>,
    pub mass: f64,
    pub stage: StageLabel,
}

/// A sampled point of `F`, digits to the depth cap.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafSample {
    pub index: u64,
    pub digits: Vec<u64>,
}

/// Per-position kernels of `μ`.
#[derive(Debug, Clone)]
pub struct CantorMeasure {
    pub(crate) sys: SystemSpec,
    pub(crate) spec: CantorSpec,
    /// `positions[i]` governs digit `i + 1`.
    pub(crate) positions: Vec<PositionKind>,
    pub(crate) indices: Vec<u64>,
    /// Last special slot of each stage.
    pub(crate) stage_ends: Vec<usize>,
    target: TargetSpec,
    /// Affine free kernel: cumulative probabilities, `cumulative[0] = 0`.
    cumulative: Vec<f64>,
}

impl CantorMeasure {
    pub fn new(sys: &SystemSpec, target: &TargetSpec, spec: &CantorSpec) -> Result<Self> {
        let point = SimplexPoint::new(spec.b.clone(), target)?;
        if !(spec.s > 0.0 && spec.s <= 1.0) {
            return Err(Error::param("s", format!("must lie in (0, 1], got {}", spec.s)));
        }
        if spec.m == 0 {
            return Err(Error::param("M", "must be a positive integer"));
        }
        if let Some(full) = sys.full_alphabet() {
            if spec.m > full {
                return Err(Error::cap("alphabet", spec.m as f64, full as f64));
            }
        }
        let indices = spec.indices()?;
        let pos = target.positions();
        let (first, last) = (pos[0] as u64, *pos.last().unwrap() as u64);
        for w in indices.windows(2) {
            if w[1] + first <= w[0] + last {
                return Err(Error::param("rule", "stages overlap: n_{j+1} + i_1 must exceed n_j + i_k"));
            }
        }
        let depth = (indices.last().unwrap() + last) as usize + spec.tail_free;
        let mut positions = vec![PositionKind::Free; depth];
        let mut stage_ends = Vec::with_capacity(indices.len());
        let log_b = target.base().ln();
        for &nj in &indices {
            for p in (nj + first)..=(nj + last) {
                positions[p as usize - 1] = PositionKind::Filler;
            }
            for (m, &i) in pos.iter().enumerate() {
                let x = snap((nj as f64 * point.coords()[m] * log_b).exp());
                if !(x <= SPECIAL_CAP) {
                    return Err(Error::cap("special digit range", x, SPECIAL_CAP));
                }
                let lo = x.floor() as u64 + 1;
                let count = (2.0 * x).floor() as u64 - x.floor() as u64;
                if let Some(full) = sys.full_alphabet() {
                    if lo + count - 1 > full {
                        return Err(Error::cap("special digit", (lo + count - 1) as f64, full as f64));
                    }
                }
                positions[(nj + i as u64) as usize - 1] = PositionKind::Special { lo, count };
            }
            stage_ends.push((nj + last) as usize);
        }
        let mut cumulative = vec![0.0];
        if sys.is_affine() {
            let w: Vec<f64> = (1..=spec.m).map(|a| sys.level_one_length(a).powf(spec.s)).collect();
            let z: f64 = w.iter().sum();
            let mut acc = 0.0;
            for v in w {
                acc += v / z;
                cumulative.push(acc);
            }
        }
        Ok(CantorMeasure {
            sys: sys.clone(),
            spec: spec.clone(),
            positions,
            indices,
            stage_ends,
            target: target.clone(),
            cumulative,
        })
    }

    /// `(i₁, i_k)`.
    pub(crate) fn target_positions(&self) -> (u32, u32) {
        let p = self.target.positions();
        (p[0], *p.last().unwrap())
    }

    pub fn target(&self) -> &TargetSpec {
        &self.target
    }

    pub fn system(&self) -> &SystemSpec {
        &self.sys
    }

    pub fn spec(&self) -> &CantorSpec {
        &self.spec
    }

    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    /// Depth cap: last stage plus the trailing free positions.
    pub fn depth(&self) -> usize {
        self.positions.len()
    }

    pub fn stage_ends(&self) -> &[usize] {
        &self.stage_ends
    }

    /// Kind of digit `i` (1-based).
    pub fn position(&self, i: usize) -> PositionKind {
        self.positions[i - 1]
    }

    /// Digits of positive probability at position `i`.
    pub fn support(&self, i: usize) -> (u64, u64) {
        match self.position(i) {
            PositionKind::Free => (1, self.spec.m),
            PositionKind::Filler => (1, 1),
            PositionKind::Special { lo, count } => (lo, lo + count - 1),
        }
    }

    /// Next state after digit `a`.
    pub(crate) fn step_state(&self, rho: f64, a: u64) -> f64 {
        match self.sys.kind() {
            SystemKind::Gauss => 1.0 / (a as f64 + rho),
            _ => 0.0,
        }
    }

    fn gauss_weight(&self, rho: f64, a: u64) -> f64 {
        let x = a as f64 + rho;
        (x * (x + 1.0)).powf(-self.spec.s)
    }

    fn gauss_norm(&self, rho: f64) -> f64 {
        (1..=self.spec.m).map(|a| self.gauss_weight(rho, a)).sum()
    }

    /// `μ(C[w a]) / μ(C[w])` for `w` of length `i − 1` in state `rho`.
    pub fn prob(&self, i: usize, rho: f64, a: u64) -> f64 {
        self.range_prob(i, rho, a, a)
    }

    /// Probability that digit `i` lies in `lo..=hi`.
    pub fn range_prob(&self, i: usize, rho: f64, lo: u64, hi: u64) -> f64 {
        let (slo, shi) = self.support(i);
        let (lo, hi) = (lo.max(slo), hi.min(shi));
        if lo > hi {
            return 0.0;
        }
        match self.position(i) {
            PositionKind::Filler => 1.0,
            PositionKind::Special { count, .. } => (hi - lo + 1) as f64 / count as f64,
            PositionKind::Free => {
                if self.sys.is_affine() {
                    self.cumulative[hi as usize] - self.cumulative[lo as usize - 1]
                } else {
                    let part: f64 = (lo..=hi).map(|a| self.gauss_weight(rho, a)).sum();
                    part / self.gauss_norm(rho)
                }
            }
        }
    }

    /// Largest `|Σ_a p(a) − 1|` over every position (gauss kernels are
    /// checked at a spread of states).
    pub fn conservation_error(&self) -> f64 {
        let states: &[f64] = if self.sys.is_affine() { &[0.0] } else { &[0.0, 0.25, 0.5, 0.75, 1.0] };
        let mut worst: f64 = 0.0;
        for i in 1..=self.depth() {
            for &rho in states {
                let total = match self.position(i) {
                    PositionKind::Free => (1..=self.spec.m).map(|a| self.prob(i, rho, a)).sum::<f64>(),
                    _ => self.range_prob(i, rho, 1, u64::MAX),
                };
                worst = worst.max((total - 1.0).abs());
            }
        }
        worst
    }

    /// Draws digit `i` given the state.
    fn draw(&self, i: usize, rho: f64, rng: &mut ChaCha8Rng) -> u64 {
        match self.position(i) {
            PositionKind::Filler => 1,
            PositionKind::Special { lo, count } => lo + rng.gen_range(0..count),
            PositionKind::Free => {
                let u: f64 = rng.gen();
                if self.sys.is_affine() {
                    let idx = self.cumulative.partition_point(|&c| c <= u);
                    (idx as u64).clamp(1, self.spec.m)
                } else {
                    let z = self.gauss_norm(rho);
                    let mut acc = 0.0;
                    for a in 1..=self.spec.m {
                        acc += self.gauss_weight(rho, a) / z;
                        if u < acc {
                            return a;
                        }
                    }
                    self.spec.m
                }
            }
        }
    }

    /// Leaf `index` of the sampler seeded with `seed`; independent of how many
    /// other leaves are drawn.
    pub fn sample_leaf(&self, seed: u64, index: u64) -> LeafSample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let mut rho = 0.0;
        let mut digits = Vec::with_capacity(self.depth());
        for i in 1..=self.depth() {
            let a = self.draw(i, rho, &mut rng);
            rho = self.step_state(rho, a);
            digits.push(a);
        }
        LeafSample { index, digits }
    }

    pub fn sample_leaves(&self, seed: u64, count: usize) -> Vec<LeafSample> {
        exec::map_range(count, |i| self.sample_leaf(seed, i as u64))
    }

    /// `Π_m a_{n_j+i_m}^{t_m} ≥ B^{n_j}` at every stage.
    pub fn in_target(&self, digits: &[u64]) -> bool {
        let log_b = self.target.base().ln();
        self.indices.iter().all(|&nj| {
            let v: f64 = self
                .target
                .positions()
                .iter()
                .zip(self.target.weights())
                .map(|(&i, &t)| t * (digits[(nj + i as u64) as usize - 1] as f64).ln())
                .sum();
            v >= nj as f64 * log_b - LOG_GUARD
        })
    }

    /// Log-probability of the leaf's prefix of length `n`.
    pub fn ln_mass(&self, digits: &[u64], n: usize) -> f64 {
        let mut rho = 0.0;
        let mut acc = 0.0;
        for (i, &a) in digits.iter().take(n).enumerate() {
            acc += self.prob(i + 1, rho, a).ln();
            rho = self.step_state(rho, a);
        }
        acc
    }
}

/// Rounds values within a few ulps of an integer, so `2^3` floors to 8.
fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-12 * r.max(1.0) {
        r
    } else {
        x
    }
}

/// Compensated total of the node masses.
pub fn total_mass(nodes: &[MeasureNode]) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for n in nodes {
        let t = sum + n.mass;
        c += if sum.abs() >= n.mass.abs() { (sum - t) + n.mass } else { (n.mass - t) + sum };
        sum = t;
    }
    sum + c
}

/// Every node of the tree at the end of `stage` (1-based), with its mass.
pub fn cantor_generate(measure: &CantorMeasure, stage: usize) -> Result<Vec<MeasureNode>> {
    if stage == 0 || stage > measure.stage_ends.len() {
        return Err(Error::param("stage", format!("must lie in 1..={}", measure.stage_ends.len())));
    }
    let depth = measure.stage_ends[stage - 1];
    let mut count: f64 = 1.0;
    for i in 1..=depth {
        let (lo, hi) = measure.support(i);
        count *= (hi - lo + 1) as f64;
        if count > NODE_CAP as f64 {
            return Err(Error::cap("cantor nodes", count, NODE_CAP as f64));
        }
    }
    let mut level = vec![(Vec::new(), 1.0f64, 0.0f64)];
    for i in 1..=depth {
        let (lo, hi) = measure.support(i);
        let mut next = Vec::with_capacity(level.len() * (hi - lo + 1) as usize);
        for (word, mass, rho) in &level {
            for a in lo..=hi {
                let mut w = word.clone();
                w.push(a);
                next.push((w, mass * measure.prob(i, *rho, a), measure.step_state(*rho, a)));
            }
        }
        level = next;
    }
    let label = measure.position(depth).label();
    Ok(level.into_iter().map(|(word, mass, _)| MeasureNode { word, mass, stage: label }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn small(kind: &str) -> CantorMeasure {
        let sys = match kind {
            "gauss" => SystemSpec::gauss(3).unwrap(),
            _ => SystemSpec::lueroth(3).unwrap(),
        };
        let target = TargetSpec::single(2.0).unwrap();
        let spec = CantorSpec {
            first: 3,
            rule: SparseRule::Explicit(vec![3, 7]),
            stages: 2,
            b: vec![1.0],
            m: 3,
            s: 0.8,
            tail_free: 2,
        };
        CantorMeasure::new(&sys, &target, &spec).unwrap()
    }

    #[test]
    fn layout() {
        let m = small("lueroth");
        assert_eq!(m.depth(), 9);
        assert_eq!(m.position(3), PositionKind::Special { lo: 9, count: 8 });
        assert_eq!(m.position(7), PositionKind::Special { lo: 129, count: 128 });
        assert_eq!(m.position(4), PositionKind::Free);
    }

    #[test]
    fn stage_masses_sum_to_one() {
        for kind in ["lueroth", "gauss"] {
            let m = small(kind);
            for stage in [1, 2] {
                let nodes = cantor_generate(&m, stage).unwrap();
                let total = total_mass(&nodes);
                assert_relative_eq!(total, 1.0, epsilon = 1e-12);
                assert!(nodes.iter().all(|n| n.mass > 0.0 && n.mass <= 1.0));
            }
            assert!(m.conservation_error() < 1e-12);
        }
    }

    #[test]
    fn leaves_are_reproducible_and_in_target() {
        let m = small("lueroth");
        let a = m.sample_leaf(7, 3);
        assert_eq!(a, m.sample_leaf(7, 3));
        assert!(m.in_target(&a.digits));
        assert!(!m.in_target(&[1; 9]));
    }

    #[test]
    fn overlapping_stages_rejected() {
        let sys = SystemSpec::lueroth(3).unwrap();
        let target = TargetSpec::new(vec![0, 3], vec![1.0, 1.0], 2.0).unwrap();
        let spec = CantorSpec {
            first: 3,
            rule: SparseRule::Explicit(vec![3, 5]),
            stages: 2,
            b: vec![0.5, 0.5],
            m: 3,
            s: 0.8,
            tail_free: 0,
        };
        assert!(CantorMeasure::new(&sys, &target, &spec).is_err());
    }
}

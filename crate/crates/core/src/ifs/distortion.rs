use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{SystemKind, SystemSpec};
use crate::error::{Error, Result};

/// Cap on exhaustive word enumeration.
pub const ENUMERATION_CAP: f64 = 1e8;

/// How words are drawn for the distortion diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub enum WordSampler {
    /// Every word over `1..=M` of each length.
    Exhaustive,
    /// `count` uniform words per length from a seeded stream.
    Random { count: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistortionSummary {
    pub n: usize,
    pub count: u64,
    pub max: f64,
    pub mean: f64,
}

/// `log(max|(Tⁿ)'| / min|(Tⁿ)'|)` over the cylinders of each length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistortionReport {
    pub per_length: Vec<DistortionSummary>,
}

impl DistortionReport {
    /// Largest distortion seen at any length up to `n`.
    pub fn max_up_to(&self, n: usize) -> f64 {
        self.per_length.iter().filter(|r| r.n <= n).map(|r| r.max).fold(0.0, f64::max)
    }
}

/// Log-distortion of the composed branch of a word.
///
/// For gauss `|T_ω'(x)| = (q_n + x q_{n-1})^{-2}`, so the value depends only
/// on `q_{n-1}/q_n`.
pub fn word_distortion(sys: &SystemSpec, digits: &[u64]) -> f64 {
    match sys.kind() {
        SystemKind::Gauss => {
            let mut rho = 0.0;
            for &a in digits {
                rho = 1.0 / (a as f64 + rho);
            }
            2.0 * rho.ln_1p()
        }
        _ => 0.0,
    }
}

pub fn distortion_report(sys: &SystemSpec, n: usize, sampler: &WordSampler) -> Result<DistortionReport> {
    if n == 0 {
        return Err(Error::param("n", "depth must be at least 1"));
    }
    let m = sys.truncation();
    let mut per_length = Vec::with_capacity(n);
    match sampler {
        WordSampler::Exhaustive => {
            let total: f64 = (1..=n).map(|l| (m as f64).powi(l as i32)).sum();
            if total > ENUMERATION_CAP {
                return Err(Error::cap("enumeration", total, ENUMERATION_CAP));
            }
            for len in 1..=n {
                let mut acc = Acc::default();
                let mut word = vec![1u64; len];
                loop {
                    acc.push(word_distortion(sys, &word));
                    if !next_word(&mut word, m) {
                        break;
                    }
                }
                per_length.push(acc.finish(len));
            }
        }
        WordSampler::Random { count, seed } => {
            for len in 1..=n {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(len as u64);
                let mut acc = Acc::default();
                let mut word = vec![0u64; len];
                for _ in 0..*count {
                    for a in word.iter_mut() {
                        *a = rng.gen_range(1..=m);
                    }
                    acc.push(word_distortion(sys, &word));
                }
                per_length.push(acc.finish(len));
            }
        }
    }
    Ok(DistortionReport { per_length })
}

/// Lexicographic successor over `1..=m`; false after the last word.
pub fn next_word(word: &mut [u64], m: u64) -> bool {
    for a in word.iter_mut().rev() {
        if *a < m {
            *a += 1;
            return true;
        }
        *a = 1;
    }
    false
}

#[derive(Default)]
struct Acc {
    count: u64,
    max: f64,
    sum: f64,
}

impl Acc {
    fn push(&mut self, v: f64) {
        self.count += 1;
        self.max = self.max.max(v);
        self.sum += v;
    }

    fn finish(self, n: usize) -> DistortionSummary {
        let mean = if self.count > 0 { self.sum / self.count as f64 } else { 0.0 };
        DistortionSummary { n, count: self.count, max: self.max, mean }
    }
}

use serde::Serialize;

use super::{check_s, truncated_pressure, DEFAULT_GRID};
use crate::error::{Error, Result};
use crate::ifs::{distortion_report, next_word, SystemKind, SystemSpec, WordSampler};

/// Most words an s-measure table may hold.
pub const SMEASURE_CAP: f64 = 1e7;

/// `μ_s(C[ω]) = |C[ω]|^s / Z_{M,n}(s)` for every word of length `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SMeasureWeights {
    pub m: u64,
    pub s: f64,
    pub n: usize,
    /// Words in lexicographic order, `n` digits each, stored flat.
    words: Vec<u64>,
    pub weights: Vec<f64>,
    /// `Z_{M,n}(s)`.
    pub normalization: f64,
    /// `P_M(s)` used for the sandwich.
    pub pressure: f64,
    /// Allowed `|log ratio|`: `2 s` times the measured distortion up to `n`.
    pub rho_hat: f64,
    /// `log(weight / (|C|^s e^{-n P_M}))`, the same for every word.
    pub log_ratio: f64,
}

impl SMeasureWeights {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn word(&self, i: usize) -> &[u64] {
        &self.words[i * self.n..(i + 1) * self.n]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u64], f64)> + '_ {
        self.words.chunks(self.n).zip(self.weights.iter().copied())
    }
}

fn length_pow(sys: &SystemSpec, word: &[u64], s: f64) -> f64 {
    match sys.kind() {
        SystemKind::Gauss => {
            let (mut qp, mut q) = (0u128, 1u128);
            for &a in word {
                let nq = a as u128 * q + qp;
                qp = q;
                q = nq;
            }
            ((q * (q + qp)) as f64).powf(-s)
        }
        _ => word.iter().map(|&a| sys.level_one_length(a).powf(s)).product(),
    }
}

/// s-measure weights on level `n`, checked against `e^{-n P_M(s)}` scaling.
///
/// `Z_{M,n}` is squeezed between `e^{n P_M ± (s D_n + log(max h/min h))}` and
/// the eigenfunction ratio is itself at most `e^{s D}`, hence `ρ̂ = 2 s D̂_n`.
pub fn s_measure_weights(sys: &SystemSpec, n: usize, s: f64) -> Result<SMeasureWeights> {
    check_s(s)?;
    if n == 0 {
        return Err(Error::param("n", "level must be at least 1"));
    }
    let m = sys.truncation();
    let count = (m as f64).powi(n as i32);
    if count > SMEASURE_CAP {
        return Err(Error::cap("s-measure", count, SMEASURE_CAP));
    }
    let mut words = Vec::with_capacity(count as usize * n);
    let mut raw = Vec::with_capacity(count as usize);
    let mut w = vec![1u64; n];
    loop {
        raw.push(length_pow(sys, &w, s));
        words.extend_from_slice(&w);
        if !next_word(&mut w, m) {
            break;
        }
    }
    let z: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|r| r / z).collect();
    let pressure = truncated_pressure(sys, s, DEFAULT_GRID)?;
    let dist = distortion_report(sys, n, &WordSampler::Exhaustive)?.max_up_to(n);
    let rho_hat = 2.0 * s.abs() * dist;
    let log_ratio = n as f64 * pressure - z.ln();
    if log_ratio.abs() > rho_hat + 1e-9 {
        return Err(Error::Consistency(format!(
            "s-measure sandwich fails: |log ratio| = {} > {rho_hat}",
            log_ratio.abs()
        )));
    }
    Ok(SMeasureWeights { m, s, n, words, weights, normalization: z, pressure, rho_hat, log_ratio })
}

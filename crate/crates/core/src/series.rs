//! Infinite digit sums of the form `Σ_{a ≥ from} ((a+α)(a+β))^{-s}`.
//!
//! The first thousand or so terms are added directly, the rest is handled by
//! expanding the summand in powers of `1/a` and applying Euler-Maclaurin to
//! each pure power. With the switch point at 1024 the truncation error is far
//! below `f64` resolution.

const SWITCH: u64 = 1024;
const EXPANSION_TERMS: usize = 10;

/// `Σ_{a ≥ n} a^{-p}` for `p > 1`, `n ≥ SWITCH`, by Euler-Maclaurin.
fn power_tail_em(p: f64, n: f64) -> f64 {
    let np = n.powf(-p);
    let inv = 1.0 / n;
    let inv2 = inv * inv;
    let integral = n * np / (p - 1.0);
    let c1 = p / 12.0;
    let c3 = p * (p + 1.0) * (p + 2.0) / 720.0;
    let c5 = p * (p + 1.0) * (p + 2.0) * (p + 3.0) * (p + 4.0) / 30240.0;
    integral + np * (0.5 + inv * (c1 - inv2 * (c3 - inv2 * c5)))
}

/// Coefficients of `(1+α u)^{-s} (1+β u)^{-s} = Σ c_k u^k`.
fn pair_coefficients(alpha: f64, beta: f64, s: f64) -> [f64; EXPANSION_TERMS] {
    let binom = |x: f64| {
        let mut out = [0.0; EXPANSION_TERMS];
        let mut c = 1.0;
        for (i, o) in out.iter_mut().enumerate() {
            *o = c;
            c *= (-s - i as f64) / (i as f64 + 1.0) * x;
        }
        out
    };
    let a = binom(alpha);
    let b = binom(beta);
    let mut out = [0.0; EXPANSION_TERMS];
    for i in 0..EXPANSION_TERMS {
        for j in 0..EXPANSION_TERMS - i {
            out[i + j] += a[i] * b[j];
        }
    }
    out
}

/// `Σ_{a ≥ from} ((a+α)(a+β))^{-s}`; requires `2s > 1` and `from ≥ 1`.
pub fn pair_tail(alpha: f64, beta: f64, s: f64, from: u64) -> f64 {
    debug_assert!(2.0 * s > 1.0);
    let from = from.max(1);
    let mut head = 0.0;
    let start = from.max(SWITCH);
    for a in from..start {
        let x = a as f64;
        head += ((x + alpha) * (x + beta)).powf(-s);
    }
    let n = start as f64;
    let coeff = pair_coefficients(alpha, beta, s);
    let mut tail = 0.0;
    for (k, c) in coeff.iter().enumerate().rev() {
        tail += c * power_tail_em(2.0 * s + k as f64, n);
    }
    head + tail
}

/// `Σ_{a=from}^{to} ((a+α)(a+β))^{-s}` with `to = None` meaning infinity.
pub fn pair_sum(alpha: f64, beta: f64, s: f64, from: u64, to: Option<u64>) -> f64 {
    match to {
        None => pair_tail(alpha, beta, s, from),
        Some(to) if to < from => 0.0,
        Some(to) if to - from < 4 * SWITCH => (from..=to)
            .map(|a| {
                let x = a as f64;
                ((x + alpha) * (x + beta)).powf(-s)
            })
            .sum(),
        Some(to) => pair_tail(alpha, beta, s, from) - pair_tail(alpha, beta, s, to + 1),
    }
}

/// Riemann zeta for real argument `p > 1`.
pub fn zeta(p: f64) -> f64 {
    pair_tail(0.0, 0.0, p / 2.0, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zeta_two_and_four() {
        let pi = std::f64::consts::PI;
        assert_relative_eq!(zeta(2.0), pi * pi / 6.0, max_relative = 1e-14);
        assert_relative_eq!(zeta(4.0), pi.powi(4) / 90.0, max_relative = 1e-14);
    }

    #[test]
    fn telescoping_pair_sum() {
        // Σ 1/(a(a+1)) from c = 1/c
        for c in [1u64, 7, 1000, 5000] {
            assert_relative_eq!(pair_tail(0.0, 1.0, 1.0, c), 1.0 / c as f64, max_relative = 1e-13);
        }
    }

    #[test]
    fn finite_range_matches_direct() {
        let direct: f64 = (3..=20_000u64).map(|a| (a as f64 * (a as f64 + 1.0)).powf(-0.8)).sum();
        assert_relative_eq!(pair_sum(0.0, 1.0, 0.8, 3, Some(20_000)), direct, max_relative = 1e-12);
    }
}

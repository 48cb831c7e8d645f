use super::{check_s, table_bracket, PressureEstimate, PressureMethod};
use crate::error::{Error, Result};
use crate::exec;
use crate::ifs::{SystemKind, SystemSpec};

/// Most cylinders a single partition sum will visit.
pub const PARTITION_CAP: f64 = 1e9;

#[inline]
fn pow_neg(x: f64, s: f64) -> f64 {
    if s == 1.0 {
        1.0 / x
    } else {
        x.powf(-s)
    }
}

/// Gauss subtree sum below a node with continuants `(q_{k-1}, q_k)`.
fn gauss_subtree(m: u64, depth: usize, qp: u128, q: u128, s: f64) -> f64 {
    if depth == 1 && q < 1 << 40 {
        // exact in f64 at this size; saves the wide multiplications
        let (qf, qpf) = (q as f64, qp as f64);
        let mut acc = 0.0;
        for a in 1..=m {
            let q1 = a as f64 * qf + qpf;
            acc += pow_neg(q1 * (q1 + qf), s);
        }
        acc
    } else if depth == 1 {
        let mut acc = 0.0;
        for a in 1..=m as u128 {
            let q1 = a * q + qp;
            acc += pow_neg((q1 * (q1 + q)) as f64, s);
        }
        acc
    } else {
        let mut acc = 0.0;
        for a in 1..=m as u128 {
            acc += gauss_subtree(m, depth - 1, q, a * q + qp, s);
        }
        acc
    }
}

/// Affine subtree sum: every length is a product of first-level lengths.
fn affine_subtree(ws: &[f64], depth: usize, prefix: f64) -> f64 {
    if depth == 1 {
        let mut acc = 0.0;
        for w in ws {
            acc += prefix * w;
        }
        acc
    } else {
        let mut acc = 0.0;
        for w in ws {
            acc += affine_subtree(ws, depth - 1, prefix * w);
        }
        acc
    }
}

/// `Z_{M,n}(s) = Σ_{|ω| = n, ω ≤ M} |C[ω]|^s` by lexicographic enumeration.
///
/// The work is split on the first digit; the partial sums are added in digit
/// order, so the result does not depend on scheduling.
pub fn partition_total(sys: &SystemSpec, n: usize, s: f64) -> Result<f64> {
    check_s(s)?;
    if n == 0 {
        return Err(Error::param("n", "level must be at least 1"));
    }
    let m = sys.truncation();
    let count = (m as f64).powi(n as i32);
    if count > PARTITION_CAP {
        return Err(Error::SizeCap {
            cap: "partition",
            requested: count,
            limit: PARTITION_CAP,
            hint: "; use the transfer-eigenvalue method instead",
        });
    }
    let firsts: Vec<u64> = (1..=m).collect();
    let parts = match sys.kind() {
        SystemKind::Gauss => exec::map(&firsts, |&a| {
            if n == 1 {
                pow_neg((a * (a + 1)) as f64, s)
            } else {
                gauss_subtree(m, n - 1, 1, a as u128, s)
            }
        }),
        _ => {
            let ws: Vec<f64> = (1..=m).map(|a| sys.level_one_length(a).powf(s)).collect();
            exec::map(&firsts, |&a| {
                let w = ws[(a - 1) as usize];
                if n == 1 {
                    w
                } else {
                    affine_subtree(&ws, n - 1, w)
                }
            })
        }
    };
    Ok(parts.into_iter().sum())
}

/// `P_{M,n}(s) = (1/n) log Z_{M,n}(s)`, bracketed by the derivative tables.
pub fn partition_sum(sys: &SystemSpec, n: usize, s: f64) -> Result<PressureEstimate> {
    let guard = 1.0 / sys.d() - 0.2;
    if s <= guard {
        return Err(Error::param("s", format!("must exceed 1/d - 0.2 = {guard}")));
    }
    let z = partition_total(sys, n, s)?;
    let value = z.ln() / n as f64;
    if !value.is_finite() {
        return Err(Error::Numeric(format!("partition sum degenerate at s = {s}")));
    }
    let b = table_bracket(sys, s, PressureMethod::ExactPartition)?;
    Ok(PressureEstimate { value, lo: b.lo.min(value), hi: b.hi.max(value), level: Some(n), ..b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::{cylinder_interval, Word};
    use approx::assert_relative_eq;

    #[test]
    fn gauss_two_digits() {
        let g = SystemSpec::gauss(2).unwrap();
        let p = partition_sum(&g, 1, 1.0).unwrap();
        assert_relative_eq!(p.value, (2.0f64 / 3.0).ln(), epsilon = 1e-15);
        assert!(p.lo <= p.value && p.value <= p.hi);
    }

    #[test]
    fn gauss_matches_cylinder_lengths() {
        let g = SystemSpec::gauss(4).unwrap();
        let mut direct = 0.0;
        let mut w = vec![1u64; 3];
        loop {
            let c = cylinder_interval(&g, &Word::new(w.clone()).unwrap()).unwrap();
            direct += c.length().powf(0.7);
            if !crate::ifs::next_word(&mut w, 4) {
                break;
            }
        }
        assert_relative_eq!(partition_total(&g, 3, 0.7).unwrap(), direct, max_relative = 1e-13);
    }

    #[test]
    fn lueroth_is_multiplicative() {
        let l = SystemSpec::lueroth(20).unwrap();
        for s in [0.6, 0.9, 1.3] {
            let p1 = partition_sum(&l, 1, s).unwrap().value;
            let p2 = partition_sum(&l, 2, s).unwrap().value;
            assert_relative_eq!(p1, p2, epsilon = 1e-14);
        }
    }

    #[test]
    fn scheduling_does_not_change_bits() {
        let g = SystemSpec::gauss(9).unwrap();
        let a = partition_total(&g, 4, 0.83).unwrap();
        let b = exec::sequential(|| partition_total(&g, 4, 0.83).unwrap());
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn caps_and_guards() {
        let g = SystemSpec::gauss(1000).unwrap();
        assert!(matches!(partition_sum(&g, 4, 1.0), Err(Error::SizeCap { cap: "partition", .. })));
        assert!(partition_sum(&g, 1, 0.2).is_err());
    }
}

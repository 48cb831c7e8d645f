use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::{SystemKind, SystemSpec};
use crate::error::{Error, Result};

/// Digits of `x` together with how the expansion stopped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expansion {
    pub digits: Vec<u64>,
    /// `x` sits on a cylinder boundary; the last digit is the cylinder to
    /// its right and no further digits exist.
    pub endpoint: bool,
}

fn check_domain(x: f64) -> Result<()> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain(format!("expansion needs x in [0, 1), got {x}")));
    }
    Ok(())
}

/// Symbolic expansion of `x`, at most `max_len` digits.
///
/// Gauss and Lüroth points are converted to exact rationals first, so the
/// digits are those of the binary value actually stored in `x`.
pub fn expand(sys: &SystemSpec, x: f64, max_len: usize) -> Result<Expansion> {
    check_domain(x)?;
    match sys.kind() {
        SystemKind::Power => Ok(expand_float(sys, x, max_len)),
        _ => {
            let r = BigRational::from_float(x).expect("finite");
            expand_exact(sys, r, max_len)
        }
    }
}

/// Expansion of the rational `num/den`; exact for gauss and Lüroth.
pub fn expand_rational(sys: &SystemSpec, num: i64, den: i64, max_len: usize) -> Result<Expansion> {
    if den == 0 {
        return Err(Error::Domain("zero denominator".into()));
    }
    let r = BigRational::new(BigInt::from(num), BigInt::from(den));
    if r < BigRational::zero() || r >= BigRational::one() {
        return Err(Error::Domain(format!("expansion needs x in [0, 1), got {num}/{den}")));
    }
    match sys.kind() {
        SystemKind::Power => Ok(expand_float(sys, num as f64 / den as f64, max_len)),
        _ => expand_exact(sys, r, max_len),
    }
}

fn expand_exact(sys: &SystemSpec, mut y: BigRational, max_len: usize) -> Result<Expansion> {
    let gauss = sys.kind() == SystemKind::Gauss;
    let mut digits = Vec::new();
    // orientation of the composed prefix map (gauss branches reverse order)
    let mut increasing = true;
    if y.is_zero() {
        return Ok(Expansion { digits, endpoint: true });
    }
    while digits.len() < max_len {
        let inv = y.recip();
        let (k, rem) = inv.numer().div_rem(inv.denom());
        let k = k.to_u64().ok_or_else(|| Error::Domain("digit does not fit in 64 bits".into()))?;
        if rem.is_zero() {
            // y = 1/k is shared by C[k] (left) and C[k-1] (right)
            let digit = if increasing || k == 1 { k - 1 } else { k };
            let digit = digit.max(1);
            digits.push(digit);
            return Ok(Expansion { digits, endpoint: true });
        }
        let a = BigInt::from(k);
        y = if gauss {
            inv - BigRational::from(a)
        } else {
            let a1: BigInt = &a + 1u32;
            y * BigRational::from(&a * a1) - BigRational::from(a)
        };
        digits.push(k);
        if gauss {
            increasing = !increasing;
        }
    }
    Ok(Expansion { digits, endpoint: false })
}

fn expand_float(sys: &SystemSpec, mut y: f64, max_len: usize) -> Expansion {
    let mut digits = Vec::new();
    if y == 0.0 {
        return Expansion { digits, endpoint: true };
    }
    while digits.len() < max_len {
        let a = sys.locate(y);
        digits.push(a);
        let (lo, _) = sys.level_one(a);
        if y == lo {
            return Expansion { digits, endpoint: true };
        }
        y = sys.forward(a, y).clamp(0.0, 1.0 - f64::EPSILON / 2.0);
    }
    Expansion { digits, endpoint: false }
}

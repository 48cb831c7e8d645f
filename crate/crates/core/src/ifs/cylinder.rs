use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::{SystemKind, SystemSpec, Word};
use crate::error::{Error, Result};

/// Natural log of a positive big integer.
pub(crate) fn ln_big(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().expect("positive").ln();
    }
    let shift = bits - 64;
    let top: BigInt = n >> shift;
    top.to_f64().expect("fits").ln() + shift as f64 * std::f64::consts::LN_2
}

pub(crate) fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact endpoints of an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactEndpoints {
    pub lo: BigRational,
    pub hi: BigRational,
}

/// `C[ω] = T_{a₁}∘…∘T_{aₙ}([0,1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderInterval {
    pub word: Word,
    pub lo: f64,
    pub hi: f64,
    /// `ln |C[ω]|`, accurate even when the length underflows.
    pub ln_length: f64,
    /// Present for gauss and lueroth.
    pub exact: Option<ExactEndpoints>,
    /// Absolute error bound on `lo`/`hi`; zero when `exact` is present.
    pub tolerance: f64,
}

impl CylinderInterval {
    pub fn length(&self) -> f64 {
        self.ln_length.exp()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Hull of `D[a₁…aₙ] = ∪_{i ≥ aₙ} C[a₁…aₙ₋₁ i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailUnion {
    pub word: Word,
    /// Hull over `aₙ ≤ i ≤ M`.
    pub lo: f64,
    pub hi: f64,
    /// Hull over all `i ≥ aₙ`, including the limit endpoint.
    pub limit_lo: f64,
    pub limit_hi: f64,
    pub exact: Option<ExactEndpoints>,
    pub exact_limit: Option<ExactEndpoints>,
}

/// Composition of branches, kept exactly where the family allows it.
enum PrefixMap {
    /// `y ↦ (p + y p') / (q + y q')`.
    Mobius {
        p: BigInt,
        pp: BigInt,
        q: BigInt,
        qp: BigInt,
    },
    /// `y ↦ off + scale·y`.
    Affine {
        off: BigRational,
        scale: BigRational,
    },
    Float {
        off: f64,
        scale: f64,
        ln_scale: f64,
    },
}

impl PrefixMap {
    fn new(sys: &SystemSpec, digits: &[u64]) -> Self {
        match sys.kind() {
            SystemKind::Gauss => {
                let (mut p, mut pp) = (BigInt::zero(), BigInt::one());
                let (mut q, mut qp) = (BigInt::one(), BigInt::zero());
                for &a in digits {
                    let a = BigInt::from(a);
                    let np = &a * &p + &pp;
                    let nq = &a * &q + &qp;
                    pp = std::mem::replace(&mut p, np);
                    qp = std::mem::replace(&mut q, nq);
                }
                PrefixMap::Mobius { p, pp, q, qp }
            }
            SystemKind::Lueroth => {
                let mut off = BigRational::zero();
                let mut scale = BigRational::one();
                for &a in digits {
                    let a = BigInt::from(a);
                    let a1: BigInt = &a + 1u32;
                    off += &scale * BigRational::new(BigInt::one(), a1.clone());
                    scale *= BigRational::new(BigInt::one(), a * a1);
                }
                PrefixMap::Affine { off, scale }
            }
            SystemKind::Power => {
                let (mut off, mut scale, mut ln_scale) = (0.0, 1.0, 0.0);
                for &a in digits {
                    let (u, _) = sys.level_one(a);
                    off += scale * u;
                    scale *= sys.level_one_length(a);
                    ln_scale += sys.ln_level_one_length(a);
                }
                PrefixMap::Float { off, scale, ln_scale }
            }
        }
    }

    fn apply_exact(&self, y: &BigRational) -> Option<BigRational> {
        match self {
            PrefixMap::Mobius { p, pp, q, qp } => {
                let num = BigRational::from(p.clone()) + y * BigRational::from(pp.clone());
                let den = BigRational::from(q.clone()) + y * BigRational::from(qp.clone());
                Some(num / den)
            }
            PrefixMap::Affine { off, scale } => Some(off + scale * y),
            PrefixMap::Float { .. } => None,
        }
    }

    fn apply_f64(&self, y: f64) -> f64 {
        match self {
            PrefixMap::Float { off, scale, .. } => off + scale * y,
            _ => unreachable!("exact maps use apply_exact"),
        }
    }

    /// Image of `[y0, y1]`, sorted.
    fn image(
        &self,
        y0: (f64, Option<BigRational>),
        y1: (f64, Option<BigRational>),
    ) -> (f64, f64, Option<ExactEndpoints>) {
        match (y0.1, y1.1) {
            (Some(a), Some(b)) if !matches!(self, PrefixMap::Float { .. }) => {
                let ia = self.apply_exact(&a).expect("exact map");
                let ib = self.apply_exact(&b).expect("exact map");
                let (lo, hi) = if ia <= ib { (ia, ib) } else { (ib, ia) };
                (rat_to_f64(&lo), rat_to_f64(&hi), Some(ExactEndpoints { lo, hi }))
            }
            _ => {
                let (a, b) = (self.apply_f64(y0.0), self.apply_f64(y1.0));
                (a.min(b), a.max(b), None)
            }
        }
    }

    fn ln_length(&self) -> f64 {
        match self {
            PrefixMap::Mobius { q, qp, .. } => -(ln_big(q) + ln_big(&(q + qp))),
            PrefixMap::Affine { scale, .. } => {
                // scale = 1/den with den an integer
                -ln_big(scale.denom())
            }
            PrefixMap::Float { ln_scale, .. } => *ln_scale,
        }
    }
}

fn exact_point(sys: &SystemSpec, v: f64, exact: impl FnOnce() -> BigRational) -> (f64, Option<BigRational>) {
    match sys.kind() {
        SystemKind::Power => (v, None),
        _ => (v, Some(exact())),
    }
}

fn recip(c: u64) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(c))
}

/// Endpoints and length of `C[ω]`.
pub fn cylinder_interval(sys: &SystemSpec, w: &Word) -> Result<CylinderInterval> {
    if let Some(n) = sys.full_alphabet() {
        if w.max_digit() > n {
            return Err(Error::InvalidWord(format!("digit {} exceeds the alphabet size {n}", w.max_digit())));
        }
    }
    let map = PrefixMap::new(sys, w.digits());
    let zero = exact_point(sys, 0.0, BigRational::zero);
    let one = exact_point(sys, 1.0, BigRational::one);
    let (lo, hi, exact) = map.image(zero, one);
    let tolerance = if exact.is_some() { 0.0 } else { 4.0 * (w.len() as f64 + 1.0) * f64::EPSILON };
    Ok(CylinderInterval { word: w.clone(), lo, hi, ln_length: map.ln_length(), exact, tolerance })
}

/// Hull of the tail union `D[ω]`, both truncated to `M` and in the limit.
pub fn tail_union(sys: &SystemSpec, w: &Word) -> Result<TailUnion> {
    let c = w.last();
    let m = sys.truncation();
    if c > m {
        return Err(Error::InvalidWord(format!("cutoff digit {c} exceeds truncation M = {m}")));
    }
    let map = PrefixMap::new(sys, &w.digits()[..w.len() - 1]);
    // level-one hulls: truncated [u_M, v_c], limit [0, v_c]
    let (u_m, _) = sys.level_one(m);
    let (_, v_c) = sys.level_one(c);
    let top = exact_point(sys, v_c, || recip(c));
    let bottom = exact_point(sys, u_m, || recip(m + 1));
    let zero = exact_point(sys, 0.0, BigRational::zero);
    let (lo, hi, exact) = map.image(bottom, top.clone());
    let (limit_lo, limit_hi, exact_limit) = map.image(zero, top);
    Ok(TailUnion { word: w.clone(), lo, hi, limit_lo, limit_hi, exact, exact_limit })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn cyl(sys: &SystemSpec, d: &[u64]) -> CylinderInterval {
        cylinder_interval(sys, &Word::new(d.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn gauss_examples() {
        let g = SystemSpec::gauss(10).unwrap();
        let c = cyl(&g, &[1]);
        let e = c.exact.as_ref().unwrap();
        assert_eq!((e.lo.clone(), e.hi.clone()), (q(1, 2), q(1, 1)));
        assert!((c.length() - 0.5).abs() < 1e-15);
        let c = cyl(&g, &[1, 1]);
        let e = c.exact.unwrap();
        assert_eq!((e.lo, e.hi), (q(1, 2), q(2, 3)));
        assert!((c.ln_length - (1.0f64 / 6.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn lueroth_first_digit() {
        let l = SystemSpec::lueroth(10).unwrap();
        let c = cyl(&l, &[1]);
        let e = c.exact.unwrap();
        assert_eq!((e.lo, e.hi), (q(1, 2), q(1, 1)));
        // C[1,1] = T_1([1/2, 1]) = [3/4, 1]
        let e = cyl(&l, &[1, 1]).exact.unwrap();
        assert_eq!((e.lo, e.hi), (q(3, 4), q(1, 1)));
    }

    #[test]
    fn gauss_tail_unions() {
        let g = SystemSpec::gauss(1000).unwrap();
        let t = tail_union(&g, &Word::new(vec![2]).unwrap()).unwrap();
        assert_eq!(t.exact_limit.unwrap(), ExactEndpoints { lo: q(0, 1), hi: q(1, 2) });
        let t = tail_union(&g, &Word::new(vec![1]).unwrap()).unwrap();
        assert_eq!((t.limit_lo, t.limit_hi), (0.0, 1.0));
        // ∪_{i≥2} C[1,i] = T_1([0,1/2]) = [2/3, 1]; the limit point is T_1(0) = 1
        let t = tail_union(&g, &Word::new(vec![1, 2]).unwrap()).unwrap();
        assert_eq!(t.exact_limit.unwrap(), ExactEndpoints { lo: q(2, 3), hi: q(1, 1) });
        assert_eq!(t.exact.unwrap(), ExactEndpoints { lo: q(2, 3), hi: q(1001, 1002) });
    }

    #[test]
    fn tail_union_matches_direct_union() {
        let l = SystemSpec::lueroth(100).unwrap();
        let w = Word::new(vec![1, 1]).unwrap();
        let t = tail_union(&l, &w).unwrap();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 1..=100 {
            let c = cyl(&l, &[1, i]);
            lo = lo.min(c.lo);
            hi = hi.max(c.hi);
        }
        assert!((t.lo - lo).abs() < 1e-15 && (t.hi - hi).abs() < 1e-15);
        let parent = cyl(&l, &[1]);
        assert!(parent.lo <= t.limit_lo && t.limit_hi <= parent.hi);
    }

    #[test]
    fn cutoff_beyond_truncation() {
        let g = SystemSpec::gauss(5).unwrap();
        assert!(tail_union(&g, &Word::new(vec![6]).unwrap()).is_err());
    }

    #[test]
    fn long_words_stay_exact() {
        let g = SystemSpec::gauss(10).unwrap();
        let c = cyl(&g, &[1_000_000; 64]);
        assert!(c.exact.is_some());
        assert!(c.ln_length < -1700.0 && c.ln_length.is_finite());
    }
}

//! Costs of explicit covers of `E_n = {x : Π_m a_{n+i_m}(x)^{t_m} ≥ Bⁿ}`.
//!
//! The cover has one family per special position `t`. A point is charged to
//! the first `t` whose digit clears the threshold `c_t(a_1..a_{t-1})`; the
//! element is then `D[prefix, c_t]`, the union of cylinders with digit at
//! least `c_t` in that slot. With `L = n log B`,
//!
//! `log c_t = min( (A(s) L − (ds−1) Σ_{j<t} log a_j) / ((d−1)s),
//!                 (L − Σ_{j<t} t_j log a_j) / t_t )`
//!
//! for `t < k`, and only the second expression for `t = k`. Any thresholds no
//! larger than the product threshold give a valid cover.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::ifs::{SystemSpec, Table};
use crate::weights::{a_of_s, TargetSpec};

/// Largest `Bⁿ` accepted by the exact cover enumeration.
pub const COVER_CAP: f64 = 1e5;
/// Most prefix tuples visited per cost evaluation.
pub const PREFIX_CAP: u64 = 100_000_000;
/// Guard used when comparing logarithms of digit products.
pub const LOG_GUARD: f64 = 1e-12;
const MAX_K: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum EnumerationMode {
    /// Every admissible prefix tuple is summed.
    Exact,
    /// Prefix digits grouped in blocks `(B^{n(ℓ−1)δ}, B^{nℓδ}]` and bounded
    /// block by block.
    BlockBound { delta: f64 },
}

/// Parameters of one cover evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverSpec {
    pub n: u32,
    pub s: f64,
    pub mode: EnumerationMode,
}

impl CoverSpec {
    pub fn new(n: u32, s: f64, mode: EnumerationMode) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "must be at least 1"));
        }
        if let EnumerationMode::BlockBound { delta } = mode {
            if !(delta > 0.0 && delta <= 1.0) {
                return Err(Error::param("delta", format!("must lie in (0, 1], got {delta}")));
            }
        }
        Ok(CoverSpec { n, s, mode })
    }
}

/// Cost `Σ |D|^s` of the cover of `E_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverCost {
    pub n: u32,
    pub s: f64,
    /// Upper value (exact for affine systems).
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    /// Thresholds that landed within `LOG_GUARD` of an integer logarithm.
    pub ties: u64,
    /// Prefix tuples visited.
    pub prefixes: u64,
}

/// Threshold rule for fixed `n` and `s`.
#[derive(Debug, Clone)]
pub struct CoverDesign {
    pub n: u32,
    pub s: f64,
    d: f64,
    log_bn: f64,
    a_value: f64,
    weights: Vec<f64>,
}

impl CoverDesign {
    pub fn new(sys: &SystemSpec, target: &TargetSpec, n: u32, s: f64) -> Result<Self> {
        let d = sys.d();
        if !(s > 1.0 / d) {
            return Err(Error::param("s", format!("cover costs need s > 1/d, got {s}")));
        }
        if target.k() > MAX_K {
            return Err(Error::param("k", format!("cover enumeration handles k <= {MAX_K}")));
        }
        let bn = target.base().powi(n as i32);
        if bn > COVER_CAP {
            return Err(Error::cap("cover", bn, COVER_CAP));
        }
        Ok(CoverDesign {
            n,
            s,
            d,
            log_bn: n as f64 * target.base().ln(),
            a_value: a_of_s(target, s, d)?.value,
            weights: target.weights().to_vec(),
        })
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    /// `log c_t` given `Σ_{j<t} log a_j` and `Σ_{j<t} t_j log a_j`.
    fn log_threshold(&self, t: usize, sum_log: f64, weighted_log: f64) -> f64 {
        let product = (self.log_bn - weighted_log) / self.weights[t];
        if t + 1 == self.k() {
            return product;
        }
        let s = self.s;
        let budget = (self.a_value * self.log_bn - (self.d * s - 1.0) * sum_log) / ((self.d - 1.0) * s);
        budget.min(product)
    }

    /// Smallest digit `c` with `log c ≥ log_c − guard`, and whether it is a tie.
    fn digit_threshold(log_c: f64) -> (f64, bool) {
        if log_c <= 0.0 {
            return (1.0, log_c.abs() <= LOG_GUARD);
        }
        let mut c = log_c.exp().ceil().max(1.0);
        while c > 1.0 && (c - 1.0).ln() >= log_c - LOG_GUARD {
            c -= 1.0;
        }
        while c.ln() < log_c - LOG_GUARD {
            c += 1.0;
        }
        (c, (c.ln() - log_c).abs() <= LOG_GUARD)
    }

    /// `c_t` for the given prefix digits.
    pub fn threshold(&self, prefix: &[u64]) -> u64 {
        let t = prefix.len();
        let sum_log: f64 = prefix.iter().map(|&a| (a as f64).ln()).sum();
        let weighted: f64 = prefix.iter().zip(&self.weights).map(|(&a, w)| w * (a as f64).ln()).sum();
        Self::digit_threshold(self.log_threshold(t, sum_log, weighted)).0 as u64
    }

    /// Family charged with the special-digit tuple, if any.
    pub fn assign(&self, tuple: &[u64]) -> Option<usize> {
        for t in 0..tuple.len() {
            if tuple[t] >= self.threshold(&tuple[..t]) {
                return Some(t);
            }
        }
        None
    }

    /// `Π a_m^{t_m} ≥ Bⁿ`, compared in logarithms with the guard.
    pub fn in_target(&self, tuple: &[u64]) -> bool {
        let v: f64 = tuple.iter().zip(&self.weights).map(|(&a, w)| w * (a as f64).ln()).sum();
        v >= self.log_bn - LOG_GUARD
    }
}

/// Per-digit factors for the lower and upper cost.
struct Factors<'a> {
    sys: &'a SystemSpec,
    s: f64,
    free_lo: f64,
    free_hi: f64,
    limit: u64,
}

impl<'a> Factors<'a> {
    fn new(sys: &'a SystemSpec, s: f64) -> Self {
        Factors {
            sys,
            s,
            free_lo: sys.table_sum(Table::Zeta, s, 1, None),
            free_hi: sys.table_sum(Table::Lambda, s, 1, None),
            limit: sys.full_alphabet().unwrap_or(u64::MAX),
        }
    }

    fn digit(&self, a: u64) -> (f64, f64) {
        (
            self.sys.derivative_bound(Table::Zeta, a).powf(self.s),
            self.sys.derivative_bound(Table::Lambda, a).powf(self.s),
        )
    }

    fn tail(&self, c: f64) -> f64 {
        if c > self.limit as f64 {
            return 0.0;
        }
        if c > 9e15 {
            // affine and gauss tails are 1/c this far out
            return (1.0 / c).powf(self.s);
        }
        self.sys.tail_length(c as u64).powf(self.s)
    }
}

#[derive(Default)]
struct Acc {
    lo: f64,
    hi: f64,
    ties: u64,
    prefixes: u64,
}

/// `Σ_{admissible a_<t} Π w(a_j)^s · tail(c_t)^s` by direct enumeration.
fn family_exact(design: &CoverDesign, f: &Factors, t: usize) -> Result<Acc> {
    let mut acc = Acc::default();
    fn rec(
        design: &CoverDesign,
        f: &Factors,
        t: usize,
        depth: usize,
        sum_log: f64,
        weighted: f64,
        w: (f64, f64),
        acc: &mut Acc,
    ) -> Result<()> {
        let (c, tie) = CoverDesign::digit_threshold(design.log_threshold(depth, sum_log, weighted));
        if tie {
            acc.ties += 1;
        }
        if depth == t {
            let tail = f.tail(c);
            acc.lo += w.0 * tail;
            acc.hi += w.1 * tail;
            acc.prefixes += 1;
            if acc.prefixes > PREFIX_CAP {
                return Err(Error::cap("cover prefixes", acc.prefixes as f64, PREFIX_CAP as f64));
            }
            return Ok(());
        }
        let top = (c as u64).saturating_sub(1).min(f.limit);
        for a in 1..=top {
            let la = (a as f64).ln();
            let (dl, dh) = f.digit(a);
            rec(
                design,
                f,
                t,
                depth + 1,
                sum_log + la,
                weighted + design.weights[depth] * la,
                (w.0 * dl, w.1 * dh),
                acc,
            )?;
        }
        Ok(())
    }
    rec(design, f, t, 0, 0.0, 0.0, (1.0, 1.0), &mut acc)?;
    Ok(acc)
}

/// Block upper bound of the same sum; never below [`family_exact`].
fn family_blocks(design: &CoverDesign, f: &Factors, t: usize, delta: f64) -> Result<Acc> {
    let step = design.log_bn * delta;
    // block ℓ ≥ 1 holds the digits in (e^{(ℓ−1)·step}, e^{ℓ·step}]; block 0 is {1}
    let block = |l: u64| -> (u64, u64) {
        if l == 0 {
            (1, 1)
        } else {
            let lo = ((l - 1) as f64 * step).exp().floor() as u64 + 1;
            let hi = (l as f64 * step).exp().floor() as u64;
            (lo.max(2), hi)
        }
    };
    let mut acc = Acc::default();
    fn rec(
        design: &CoverDesign,
        f: &Factors,
        block: &dyn Fn(u64) -> (u64, u64),
        t: usize,
        depth: usize,
        low: (f64, f64),
        high: (f64, f64),
        bound: f64,
        acc: &mut Acc,
    ) -> Result<()> {
        if depth == t {
            // largest tail: threshold at the block upper ends
            let (c, _) = CoverDesign::digit_threshold(design.log_threshold(depth, high.0, high.1));
            acc.hi += bound * f.tail(c);
            acc.prefixes += 1;
            if acc.prefixes > PREFIX_CAP {
                return Err(Error::cap("cover prefixes", acc.prefixes as f64, PREFIX_CAP as f64));
            }
            return Ok(());
        }
        // admissibility is most permissive at the block lower ends
        let (c, _) = CoverDesign::digit_threshold(design.log_threshold(depth, low.0, low.1));
        let wt = design.weights[depth];
        let mut l = 0;
        loop {
            let (lo, hi) = block(l);
            if lo as f64 >= c || lo > f.limit {
                break;
            }
            let hi = hi.min(f.limit);
            if hi >= lo {
                let count = (hi - lo + 1) as f64;
                let (_, wmax) = f.digit(lo);
                let (llo, lhi) = ((lo as f64).ln(), (hi as f64).ln());
                rec(
                    design,
                    f,
                    block,
                    t,
                    depth + 1,
                    (low.0 + llo, low.1 + wt * llo),
                    (high.0 + lhi, high.1 + wt * lhi),
                    bound * count * wmax,
                    acc,
                )?;
            }
            l += 1;
        }
        Ok(())
    }
    rec(design, f, &block, t, 0, (0.0, 0.0), (0.0, 0.0), 1.0, &mut acc)?;
    acc.lo = acc.hi;
    Ok(acc)
}

/// Cost of the cover of `E_n` at exponent `s`.
pub fn cover_cost(sys: &SystemSpec, target: &TargetSpec, spec: &CoverSpec) -> Result<CoverCost> {
    let design = CoverDesign::new(sys, target, spec.n, spec.s)?;
    let f = Factors::new(sys, spec.s);
    let mut out = CoverCost { n: spec.n, s: spec.s, value: 0.0, lo: 0.0, hi: 0.0, ties: 0, prefixes: 0 };
    for (t, &pos) in target.positions().iter().enumerate() {
        let acc = match spec.mode {
            EnumerationMode::Exact => family_exact(&design, &f, t)?,
            EnumerationMode::BlockBound { delta } => family_blocks(&design, &f, t, delta)?,
        };
        // free digits before the special slot: n + i_t − 1 positions, t of them special
        let free = (spec.n as i64 + pos as i64 - 1 - t as i64).max(0) as i32;
        out.lo += f.free_lo.powi(free) * acc.lo;
        out.hi += f.free_hi.powi(free) * acc.hi;
        out.ties += acc.ties;
        out.prefixes += acc.prefixes;
    }
    out.value = out.hi;
    Ok(out)
}

/// Exact cover cost (the default mode).
pub fn cover_cost_exact(sys: &SystemSpec, target: &TargetSpec, n: u32, s: f64) -> Result<CoverCost> {
    cover_cost(sys, target, &CoverSpec::new(n, s, EnumerationMode::Exact)?)
}

/// Fitted growth rate of `log cost` in `n` at one exponent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    pub s: f64,
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope from the fit residuals.
    pub stderr: f64,
}

/// Where the fitted exponent changes sign.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionEstimate {
    pub fits: Vec<ExponentFit>,
    pub costs: Vec<CoverCost>,
    pub crossing: Option<f64>,
    pub half_width: f64,
}

fn fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = if n > 2.0 { (rss / (n - 2.0) / sxx).sqrt() } else { f64::INFINITY };
    (slope, intercept, stderr)
}

/// Fits `log cost(n) ≈ α + slope·n` at exponent `s`.
pub fn exponent_fit(
    sys: &SystemSpec,
    target: &TargetSpec,
    n_range: &[u32],
    s: f64,
    mode: EnumerationMode,
) -> Result<(ExponentFit, Vec<CoverCost>)> {
    if n_range.len() < 3 {
        return Err(Error::param("n_range", "the fit needs at least three values of n"));
    }
    let costs =
        n_range.iter().map(|&n| cover_cost(sys, target, &CoverSpec::new(n, s, mode)?)).collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = n_range.iter().map(|&n| n as f64).collect();
    let ys: Vec<f64> = costs.iter().map(|c| c.value.ln()).collect();
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::Numeric(format!("cover cost vanished or overflowed at s = {s}")));
    }
    let (slope, intercept, stderr) = fit(&xs, &ys);
    Ok((ExponentFit { s, slope, intercept, stderr }, costs))
}

/// Locates the exponent where the fitted cover-cost growth rate crosses zero.
pub fn cover_cost_transition(
    sys: &SystemSpec,
    target: &TargetSpec,
    n_range: &[u32],
    s_grid: &[f64],
    mode: EnumerationMode,
) -> Result<TransitionEstimate> {
    if n_range.len() < 3 {
        return Err(Error::param("n_range", "the fit needs at least three values of n"));
    }
    if s_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("s_grid", "must be strictly increasing"));
    }
    let results = exec::try_map(s_grid, |&s| exponent_fit(sys, target, n_range, s, mode))?;
    let mut fits = Vec::with_capacity(results.len());
    let mut costs = Vec::new();
    for (f, c) in results {
        fits.push(f);
        costs.extend(c);
    }
    let bracket = fits.windows(2).find(|w| w[0].slope > 0.0 && w[1].slope <= 0.0);
    let (crossing, half_width) = match bracket {
        None => (None, f64::INFINITY),
        Some(w) => {
            let (mut lo, mut hi) = (w[0].s, w[1].s);
            while hi - lo > 1e-6 {
                let mid = 0.5 * (lo + hi);
                if exponent_fit(sys, target, n_range, mid, mode)?.0.slope > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let s_star = 0.5 * (lo + hi);
            let h = 1e-3;
            let (left, _) = exponent_fit(sys, target, n_range, s_star - h, mode)?;
            let (right, _) = exponent_fit(sys, target, n_range, s_star + h, mode)?;
            let dslope = (right.slope - left.slope) / (2.0 * h);
            let se = 0.5 * (left.stderr + right.stderr);
            (Some(s_star), 2.0 * se / dslope.abs() + (hi - lo))
        }
    };
    Ok(TransitionEstimate { fits, costs, crossing, half_width })
}

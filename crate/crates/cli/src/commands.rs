//! One function per subcommand. Each returns the files to write, in order.

use std::fmt::Write as _;

use anyhow::{bail, Result};
use gaussdim::bound_lab::{
    cantor_generate, cover_cost_transition, local_dimension_sample, natural_cover_exponent, total_mass, CantorMeasure,
    CantorSpec, PositionKind,
};
use gaussdim::dimension::{critical_exponent, critical_exponent_sweep};
use gaussdim::format::{self, real, Csv};
use gaussdim::validation::{self, Outcome, ValidationConfig, CRITERIA};
use gaussdim::weights::a_of_s;
use serde::Serialize;

use crate::config::{self, ConfigError, RunConfig};

pub struct Output {
    pub files: Vec<(String, String)>,
    /// Printed to stdout after the files are written.
    pub message: String,
    pub failed: bool,
}

impl Output {
    fn new() -> Self {
        Output { files: Vec::new(), message: String::new(), failed: false }
    }

    fn file(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(hi > lo) {
        bail!(ConfigError(format!("grid needs at least 2 points and s_max > s_min, got {n} on [{lo}, {hi}]")));
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

pub fn pressure(cfg: &RunConfig) -> Result<Output> {
    let sys = cfg.system()?;
    let p = &cfg.pressure;
    let source = config::source(p.method, p.level, p.grid);
    let s = grid(p.s_min, p.s_max, p.points)?;
    let rows = gaussdim::exec::try_map(&s, |&s| source.evaluate(&sys, s))?;
    let mut out = Output::new();
    out.file("pressure.csv", format::pressure_csv(&rows));
    out.message = format!("{} points, method {}", rows.len(), source.method());
    Ok(out)
}

pub fn aofs(cfg: &RunConfig) -> Result<Output> {
    let sys = cfg.system()?;
    let target = cfg.target()?;
    let a = &cfg.aofs;
    let s = grid(a.s_min, a.s_max, a.points)?;
    let rows =
        s.iter().map(|&s| a_of_s(&target, s, sys.d()).map(|sol| (s, sol))).collect::<gaussdim::Result<Vec<_>>>()?;
    let mut out = Output::new();
    out.file("aofs.csv", format::aofs_csv(target.k(), &rows));
    out.message = format!("{} points, k = {}", rows.len(), target.k());
    Ok(out)
}

pub fn dim(cfg: &RunConfig, tol: Option<f64>, base: Option<f64>, sweep: bool) -> Result<Output> {
    if sweep {
        return self::sweep(cfg, tol);
    }
    let sys = cfg.system()?;
    let mut target = cfg.target()?;
    if let Some(b) = base {
        target = target.with_base(b)?;
    }
    let d = &cfg.dim;
    let r = critical_exponent(&sys, &target, tol.unwrap_or(d.tol), config::source(d.method, d.level, d.grid))?;
    let mut out = Output::new();
    out.message = format!(
        "s0 = {} (bracket [{}, {}], envelope [{}, {}])",
        real(r.s0),
        real(r.lo),
        real(r.hi),
        real(r.envelope_lo),
        real(r.envelope_hi)
    );
    out.file("dim.json", json(&r));
    out.file("dim.csv", format::sweep_csv(std::slice::from_ref(&r)));
    Ok(out)
}

pub fn sweep(cfg: &RunConfig, tol: Option<f64>) -> Result<Output> {
    let sys = cfg.system()?;
    let target = cfg.target()?;
    let d = &cfg.dim;
    let table = critical_exponent_sweep(
        &sys,
        &target,
        &d.bases,
        tol.unwrap_or(d.tol),
        config::source(d.method, d.level, d.grid),
    )?;
    let mut out = Output::new();
    out.message = if table.strictly_decreasing() {
        format!("{} bases, s0 strictly decreasing", table.rows.len())
    } else {
        format!("{} bases, monotonicity violated at {:?}", table.rows.len(), table.violations)
    };
    out.file("sweep.csv", format::sweep_csv(&table.rows));
    Ok(out)
}

pub fn coverscan(cfg: &RunConfig) -> Result<Output> {
    let sys = cfg.system()?;
    let target = cfg.target()?;
    let c = &cfg.coverscan;
    if c.n_max < c.n_min + 2 {
        bail!(ConfigError("[coverscan] needs n_max >= n_min + 2".into()));
    }
    let ns: Vec<u32> = (c.n_min..=c.n_max).collect();
    let d = &cfg.dim;
    let dim = critical_exponent(&sys, &target, d.tol, config::source(d.method, d.level, d.grid))?;
    let s = grid(c.s_min.unwrap_or(dim.s0 - 0.1), c.s_max.unwrap_or(dim.s0 + 0.1), c.points)?;
    let tr = cover_cost_transition(&sys, &target, &ns, &s, c.mode())?;
    let mut fits = Csv::new(&["s", "slope", "intercept", "stderr"]);
    for f in &tr.fits {
        fits.row(&[real(f.s), real(f.slope), real(f.intercept), real(f.stderr)]);
    }
    #[derive(Serialize)]
    struct Summary {
        s0: f64,
        crossing: Option<f64>,
        half_width: f64,
    }
    let mut out = Output::new();
    out.message = match tr.crossing {
        Some(x) => format!("crossing at s = {} ± {} (s0 = {})", real(x), real(tr.half_width), real(dim.s0)),
        None => format!("no sign change on the s grid (s0 = {})", real(dim.s0)),
    };
    out.file("cover.csv", format::cover_csv(&tr.costs));
    out.file("transition.csv", fits.finish());
    out.file("transition.json", json(&Summary { s0: dim.s0, crossing: tr.crossing, half_width: tr.half_width }));
    Ok(out)
}

fn measure(cfg: &RunConfig) -> Result<(CantorMeasure, f64)> {
    let sys = cfg.system()?;
    let target = cfg.target()?;
    let (base, dim) = CantorSpec::at_critical(&sys, &target, cfg.cantor.first, cfg.cantor.stages)?;
    let spec = cfg.cantor_spec(base);
    let free = sys.with_truncation(spec.m)?;
    Ok((CantorMeasure::new(&free, &target, &spec)?, dim.s0))
}

pub fn cantor(cfg: &RunConfig) -> Result<Output> {
    let (mu, s0) = measure(cfg)?;
    let mut layout = Csv::new(&["position", "kind", "lo", "count"]);
    for i in 1..=mu.depth() {
        let (kind, lo, count) = match mu.position(i) {
            PositionKind::Free => ("free-block", 1, mu.spec().m),
            PositionKind::Filler => ("filler-ones", 1, 1),
            PositionKind::Special { lo, count } => ("special-digit", lo, count),
        };
        layout.row(&[i.to_string(), kind.to_string(), lo.to_string(), count.to_string()]);
    }
    let nc = natural_cover_exponent(&mu)?;
    #[derive(Serialize)]
    struct Summary<'a> {
        s0: f64,
        spec: &'a CantorSpec,
        indices: &'a [u64],
        conservation_error: f64,
        natural_cover: gaussdim::bound_lab::NaturalCover,
        nodes_total_mass: Option<f64>,
    }
    let mut out = Output::new();
    let mut nodes_total = None;
    if let Some(stage) = cfg.cantor.nodes_stage {
        let nodes = cantor_generate(&mu, stage)?;
        let mut csv = Csv::new(&["word", "mass", "stage"]);
        for n in &nodes {
            let word = n.word.iter().map(u64::to_string).collect::<Vec<_>>().join("/");
            csv.row(&[word, real(n.mass), n.stage.as_str().to_string()]);
        }
        nodes_total = Some(total_mass(&nodes));
        out.file("nodes.csv", csv.finish());
    }
    let summary = Summary {
        s0,
        spec: mu.spec(),
        indices: mu.indices(),
        conservation_error: mu.conservation_error(),
        natural_cover: nc,
        nodes_total_mass: nodes_total,
    };
    out.message = format!("depth {}, natural-cover exponent {} (s0 = {})", mu.depth(), real(nc.exponent), real(s0));
    out.file("layout.csv", layout.finish());
    out.file("cantor.json", json(&summary));
    Ok(out)
}

pub fn localdim(cfg: &RunConfig) -> Result<Output> {
    let (mu, s0) = measure(cfg)?;
    let stats = local_dimension_sample(&mu, cfg.cantor.samples, cfg.seed)?;
    #[derive(Serialize)]
    struct Summary {
        s0: f64,
        samples: usize,
        seed: u64,
        min: f64,
        mean: f64,
        case_min: [Option<f64>; 4],
        all_in_target: bool,
    }
    let summary = Summary {
        s0,
        samples: stats.samples,
        seed: cfg.seed,
        min: stats.min,
        mean: stats.mean,
        case_min: stats.case_min.map(|v| if v.is_nan() { None } else { Some(v) }),
        all_in_target: stats.all_in_target,
    };
    let mut out = Output::new();
    out.message = format!("min ratio {} over {} samples (s0 = {})", real(stats.min), stats.samples, real(s0));
    out.file("localdim.csv", format::localdim_csv(&stats.rows));
    out.file("localdim.json", json(&summary));
    Ok(out)
}

pub fn validate(cfg: &RunConfig, only: &[u8], mut progress: impl FnMut(&Outcome)) -> Result<Output> {
    let ids: Vec<u8> = if only.is_empty() { CRITERIA.to_vec() } else { only.to_vec() };
    let vcfg = ValidationConfig { seed: cfg.seed, ..ValidationConfig::default() };
    let mut out = Output::new();
    let mut report = String::new();
    let mut outcomes = Vec::new();
    for id in ids {
        let o = validation::run(id, &vcfg)?;
        progress(&o);
        report.push_str(&o.report());
        for a in &o.artifacts {
            out.file(format!("criterion_{id}/{}", a.name), a.contents.clone());
        }
        out.failed |= !o.passed();
        outcomes.push(o);
    }
    let passed = outcomes.iter().filter(|o| o.passed()).count();
    let _ = writeln!(report, "{passed}/{} criteria passed", outcomes.len());
    out.file("report.txt", report);
    out.file("summary.json", json(&outcomes));
    out.message = format!("{passed}/{} criteria passed", outcomes.len());
    Ok(out)
}

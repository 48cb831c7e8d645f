//! CSV output. Floats are written as `{:.16e}` so that files round-trip and
//! compare byte for byte across runs.

use std::fmt::Write;

use crate::bound_lab::{CoverCost, LocalDimRow};
use crate::dimension::DimensionResult;
use crate::ifs::CylinderInterval;
use crate::pressure::PressureEstimate;
use crate::weights::WeightSolution;

pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Minimal CSV builder; fields never contain commas.
#[derive(Debug, Clone)]
pub struct Csv {
    width: usize,
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Csv { width: header.len(), buf }
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) -> &mut Self {
        debug_assert_eq!(fields.len(), self.width, "csv row width");
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            self.buf.push_str(f.as_ref());
        }
        self.buf.push('\n');
        self
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

pub fn cylinders_csv(rows: &[CylinderInterval]) -> String {
    let mut csv = Csv::new(&["word", "lo", "hi", "length"]);
    for c in rows {
        csv.row(&[c.word.to_string(), real(c.lo), real(c.hi), real(c.length())]);
    }
    csv.finish()
}

pub fn pressure_csv(rows: &[PressureEstimate]) -> String {
    let mut csv = Csv::new(&["s", "value", "lo", "hi", "method", "M", "n"]);
    for p in rows {
        csv.row(&[
            real(p.s),
            real(p.value),
            real(p.lo),
            real(p.hi),
            p.method.to_string(),
            p.truncation.to_string(),
            p.level.map(|n| n.to_string()).unwrap_or_default(),
        ]);
    }
    csv.finish()
}

pub fn aofs_csv(k: usize, rows: &[(f64, WeightSolution)]) -> String {
    let mut header = vec!["s".to_string(), "A".to_string()];
    header.extend((1..=k).map(|i| format!("b{i}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = Csv::new(&header);
    for (s, sol) in rows {
        let mut fields = vec![real(*s), real(sol.value)];
        fields.extend(sol.argmin.coords().iter().map(|&b| real(b)));
        csv.row(&fields);
    }
    csv.finish()
}

/// `lo`/`hi` are the pressure envelope of each root.
pub fn sweep_csv(rows: &[DimensionResult]) -> String {
    let mut csv = Csv::new(&["B", "s0", "lo", "hi", "M", "method", "flags"]);
    for r in rows {
        csv.row(&[
            real(r.base),
            real(r.s0),
            real(r.envelope_lo),
            real(r.envelope_hi),
            r.truncation.to_string(),
            r.method.to_string(),
            r.flags.label().to_string(),
        ]);
    }
    csv.finish()
}

pub fn cover_csv(rows: &[CoverCost]) -> String {
    let mut csv = Csv::new(&["n", "s", "cost", "lo", "hi"]);
    for c in rows {
        csv.row(&[c.n.to_string(), real(c.s), real(c.value), real(c.lo), real(c.hi)]);
    }
    csv.finish()
}

pub fn localdim_csv(rows: &[LocalDimRow]) -> String {
    let mut csv = Csv::new(&["x", "r", "ratio", "case"]);
    for r in rows {
        csv.row(&[real(r.x), real(r.r()), real(r.ratio), r.case.as_str().to_string()]);
    }
    csv.finish()
}

/// Key/value lines, used for small summaries.
pub fn summary(pairs: &[(&str, String)]) -> String {
    let mut out = String::new();
    for (k, v) in pairs {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23] {
            assert_eq!(real(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn header_and_rows() {
        let mut c = Csv::new(&["a", "b"]);
        c.row(&["1", "2"]);
        assert_eq!(c.finish(), "a,b\n1,2\n");
    }
}

//! Acceptance suite: one pass/fail line per criterion, with wall time
//! against its budget. Tests hold a shared lock so timings are not skewed by
//! each other.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use gaussdim::validation::{self, ValidationConfig};

static SERIAL: Mutex<()> = Mutex::new(());

fn criterion(id: u8, budget_secs: u64) {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let outcome = validation::run(id, &ValidationConfig::default()).expect("criterion runs");
    let elapsed = start.elapsed();
    let in_budget = elapsed <= Duration::from_secs(budget_secs);
    let status = if outcome.passed() && in_budget { "PASS" } else { "FAIL" };
    println!("criterion {id}: {status} {} [{:.2}s / {budget_secs}s]", outcome.title, elapsed.as_secs_f64());
    print!("{}", outcome.report());
    assert!(outcome.passed(), "criterion {id} failed:\n{}", outcome.report());
    assert!(in_budget, "criterion {id} took {elapsed:?}, budget {budget_secs}s");
}

#[test]
fn criterion_1_pressure_normalization() {
    criterion(1, 10);
}

#[test]
fn criterion_2_pressure_shape() {
    criterion(2, 30);
}

#[test]
fn criterion_3_backend_agreement() {
    criterion(3, 60);
}

#[test]
fn criterion_4_weight_program() {
    criterion(4, 60);
}

#[test]
fn criterion_5_base_limits() {
    criterion(5, 120);
}

#[test]
fn criterion_6_single_position_reduction() {
    criterion(6, 10);
}

#[test]
fn criterion_7_cover_transition() {
    criterion(7, 180);
}

#[test]
fn criterion_8_cantor_construction() {
    criterion(8, 180);
}

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

#[test]
fn criterion_9_validate_is_deterministic() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/validate.toml");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        let out = Command::new(env!("CARGO_BIN_EXE_gaussdim"))
            .arg("validate")
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(dir.path())
            .output()
            .unwrap();
        assert!(out.status.success(), "validate exited with {}: {}", out.status, String::from_utf8_lossy(&out.stderr));
    }
    let (a, b) = (tree(dirs[0].path()), tree(dirs[1].path()));
    let differing: Vec<&String> = a.keys().chain(b.keys()).filter(|k| a.get(*k) != b.get(*k)).collect();
    let passed = !a.is_empty() && differing.is_empty();
    println!(
        "criterion 9: {} validate output trees byte-identical ({} files) [{:.2}s]",
        if passed { "PASS" } else { "FAIL" },
        a.len(),
        start.elapsed().as_secs_f64()
    );
    assert!(a.contains_key("report.txt") && a.contains_key("summary.json"));
    assert!(differing.is_empty(), "files differ: {differing:?}");
}

use std::path::Path;
use std::process::{Command, Output};

fn gaussdim(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaussdim")).args(args).arg("--out").arg(out).output().unwrap()
}

fn shipped(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name).to_string_lossy().into_owned()
}

#[test]
fn malformed_base_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[system]\nkind = \"gauss\"\nM = 10\n[target]\npositions = [0]\nweights = [1.0]\nB = 0.5\n")
        .unwrap();
    let out = gaussdim(&["dim", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("B > 1"));
}

#[test]
fn unknown_key_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[system]\nkind = \"gauss\"\nM = 10\nwidth = 3\n").unwrap();
    let out = gaussdim(&["pressure", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("width") && err.contains("line 4"), "{err}");
}

#[test]
fn size_cap_exits_3_and_names_the_cap() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cantor.toml");
    let text = std::fs::read_to_string(shipped("cantor.toml")).unwrap() + "nodes_stage = 1\n";
    std::fs::write(&cfg, text).unwrap();
    let out = gaussdim(&["cantor", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cantor nodes"));
}

#[test]
fn dim_lueroth_base_e_reports_golden_root() {
    let dir = tempfile::tempdir().unwrap();
    let out = gaussdim(&["dim", "--config", &shipped("lueroth_k1_e.toml")], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("dim.json")).unwrap()).unwrap();
    let s0 = json["s0"].as_f64().unwrap();
    assert!((s0 - 0.7398829202858568).abs() < 1e-8, "{s0}");
    let csv = std::fs::read_to_string(dir.path().join("dim.csv")).unwrap();
    assert!(csv.starts_with("B,s0,lo,hi,M,method,flags\n"));
}

#[test]
fn shipped_configs_run_and_repeat_byte_identically() {
    let cases = [
        ("pressure", "gauss.toml"),
        ("aofs", "gauss.toml"),
        ("sweep", "power.toml"),
        ("coverscan", "cover.toml"),
        ("cantor", "cantor_nodes.toml"),
        ("localdim", "cantor.toml"),
    ];
    for (cmd, cfg) in cases {
        let runs: Vec<_> = (0..2)
            .map(|_| {
                let dir = tempfile::tempdir().unwrap();
                let out = gaussdim(&[cmd, "--config", &shipped(cfg)], dir.path());
                assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
                let mut files: Vec<_> = std::fs::read_dir(dir.path())
                    .unwrap()
                    .map(|e| {
                        let p = e.unwrap().path();
                        (p.file_name().unwrap().to_owned(), std::fs::read(&p).unwrap())
                    })
                    .collect();
                files.sort();
                assert!(!files.is_empty(), "{cmd} wrote nothing");
                files
            })
            .collect();
        assert_eq!(runs[0], runs[1], "{cmd} output differs between runs");
    }
}

#[test]
fn seed_changes_samples() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for (dir, seed) in dirs.iter().zip(["1", "2"]) {
        let out = gaussdim(&["localdim", "--config", &shipped("cantor.toml"), "--seed", seed], dir.path());
        assert!(out.status.success());
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("localdim.csv")).unwrap();
    assert_ne!(read(&dirs[0]), read(&dirs[1]));
}

//! Acceptance criterion 10: repeated CLI runs with a fixed seed produce
//! byte-identical outputs.

use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cutproject"))
}

fn write_configs(dir: &Path) {
    let alpha = (5.0f64.sqrt() - 1.0) / 2.0;
    fs::write(
        dir.join("lattice.json"),
        format!(r#"{{"special_form": {{"alpha": [{alpha}], "beta": [{alpha}]}}}}"#),
    )
    .unwrap();
    fs::write(
        dir.join("window.json"),
        format!(r#"{{"box": {{"lo": [0.0], "hi": [{alpha}]}}}}"#),
    )
    .unwrap();
    fs::write(
        dir.join("window2.json"),
        format!(r#"{{"box": {{"lo": [{}], "hi": [1.0]}}}}"#, 1.0 - alpha),
    )
    .unwrap();
    fs::write(
        dir.join("decomp.json"),
        format!(
            r#"{{"alpha": [{alpha}], "pieces": [{{"window": {{"box": {{"lo": [0.0], "hi": [{alpha}]}}}}, "k": -1, "m": [1]}}]}}"#
        ),
    )
    .unwrap();
}

fn tree_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

fn run_twice(dir: &Path, args: &[&str]) {
    for run in ["a", "b"] {
        let out = dir.join(format!("out_{run}"));
        let status = bin()
            .current_dir(dir)
            .args(args)
            .arg("--out")
            .arg(&out)
            .arg("--seed")
            .arg("7")
            .status()
            .unwrap();
        assert!(status.code().is_some(), "no exit code");
    }
    let a = tree_bytes(&dir.join("out_a"));
    let b = tree_bytes(&dir.join("out_b"));
    assert_eq!(a.len(), b.len());
    for ((name_a, bytes_a), (name_b, bytes_b)) in a.iter().zip(&b) {
        assert_eq!(name_a, name_b);
        assert_eq!(bytes_a, bytes_b, "{name_a} differs between runs");
    }
    fs::remove_dir_all(dir.join("out_a")).unwrap();
    fs::remove_dir_all(dir.join("out_b")).unwrap();
}

#[test]
fn criterion_10_cli_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    write_configs(tmp.path());
    run_twice(
        tmp.path(),
        &[
            "gen",
            "--lattice",
            "lattice.json",
            "--window",
            "window.json",
            "--n0",
            "-200",
            "--n1",
            "200",
        ],
    );
    run_twice(
        tmp.path(),
        &[
            "brs",
            "--lattice",
            "lattice.json",
            "--window",
            "window.json",
            "--nmax",
            "20000",
            "--split",
            "1000",
        ],
    );
    run_twice(
        tmp.path(),
        &[
            "equi-verify",
            "--window",
            "window.json",
            "--window2",
            "window2.json",
            "--decomp",
            "decomp.json",
            "--samples",
            "100000",
        ],
    );
    run_twice(
        tmp.path(),
        &[
            "uniformity",
            "--lattice",
            "lattice.json",
            "--window",
            "window.json",
            "--kmax",
            "32",
            "--samples",
            "10",
        ],
    );
    println!("criterion 10 (CLI determinism): PASS -- gen/brs/equi-verify/uniformity byte-identical across reruns");
}

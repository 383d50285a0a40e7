use std::process::{Command, Stdio};

use serde_json::Value;
use teleclone_cli::commands::CSV_HEADER;
use teleclone_cli::format::{cell, squeezing_cell};
use teleclone_cli::{run, EXIT_OK, EXIT_USAGE};
use teleclone_core::fidelity::{baseline_standard_fidelity, FormulaParams};
use teleclone_core::protocols::{closed_form_pair, Variant};
use teleclone_core::scalar::Multiplicity;

fn invoke(args: &[&str]) -> (u8, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("teleclone").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = invoke(args);
    assert_eq!(code, EXIT_OK, "{err}");
    serde_json::from_str(&out).unwrap()
}

fn csv_rows(text: &str) -> Vec<csv::StringRecord> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(reader.headers().unwrap(), CSV_HEADER.as_slice());
    reader.records().map(|r| r.unwrap()).collect()
}

fn sweep(args: &[&str]) -> Vec<csv::StringRecord> {
    let mut full = vec!["sweep"];
    full.extend_from_slice(args);
    let (code, out, err) = invoke(&full);
    assert_eq!(code, EXIT_OK, "{err}");
    csv_rows(&out)
}

fn field(row: &csv::StringRecord, name: &str) -> f64 {
    let i = CSV_HEADER.iter().position(|h| *h == name).unwrap();
    row[i].parse().unwrap()
}

#[test]
fn simulate_two_clones_near_ideal() {
    let doc = json(&["simulate", "--variant", "a", "--clones", "2", "--squeezing", "10", "--input", "2,4"]);
    assert_eq!(doc["schema"], 1);
    let f = doc["fidelity_clone"].as_f64().unwrap();
    assert!((f - 16.0 / 17.0).abs() < 1e-6, "{f}");
    for key in [
        "fidelity_clone_formula",
        "fidelity_anticlone",
        "fidelity_anticlone_formula",
        "states",
        "invariants",
        "max_discrepancy",
    ] {
        assert!(!doc[key].is_null(), "{key}");
    }
    assert_eq!(doc["states"].as_array().unwrap().len(), 4);
    assert_eq!(doc["invariants"]["passed"], true);
    assert_eq!(doc["states"][0]["mean"][1].as_f64().unwrap(), 4.0);
}

#[test]
fn simulate_baseline_and_single_clone() {
    let doc = json(&["simulate", "--variant", "baseline", "--clones", "2", "--squeezing", "10"]);
    assert!((doc["fidelity_clone"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    let doc = json(&["simulate", "--variant", "a", "--clones", "1", "--copies", "1", "--squeezing", "0"]);
    assert_eq!(doc["fidelity_anticlone"].as_f64().unwrap(), 1.0);
}

#[test]
fn simulate_infinite_squeezing_is_symbolic() {
    let doc = json(&["simulate", "--clones", "2", "--squeezing", "inf", "--input", "-3,1.5"]);
    assert_eq!(doc["spec"]["squeezing"], "inf");
    assert_eq!(doc["fidelity_clone_formula"].as_f64().unwrap(), 0.941176470588);
    assert!(!doc["flags"].as_array().unwrap().is_empty());
}

#[test]
fn sweep_clones_against_baseline() {
    let rows = sweep(&["--axis", "M", "--from", "1", "--to", "10", "--squeezing", "10"]);
    assert_eq!(rows.len(), 10);
    let m3 = &rows[2];
    assert_eq!(&m3[1], "3");
    assert!((field(m3, "F_clone_sim") - 0.9).abs() < 1e-8);
    assert!((field(m3, "F_baseline_clone") - 6.0 / 7.0).abs() < 1e-8);
    for row in &rows[2..] {
        assert!(field(row, "F_clone_sim") > field(row, "F_baseline_clone"));
    }
    // No standard scheme with a single output.
    assert_eq!(&rows[0][9], "");
}

#[test]
fn sweep_squeezing_leaves_anticlones_alone() {
    let rows = sweep(&["--axis", "r", "--from", "0", "--to", "3", "--steps", "7", "--clones", "2"]);
    assert_eq!(rows.len(), 7);
    for row in &rows {
        assert_eq!(&row[7], "0.941176470588");
    }
    assert_eq!(&rows[1][3], "0.5");
}

#[test]
fn sweep_copies_at_many_clones() {
    let rows = sweep(&[
        "--variant",
        "a-generalized",
        "--axis",
        "N",
        "--from",
        "1",
        "--to",
        "4",
        "--clones",
        "10000",
        "--squeezing",
        "10",
    ]);
    for (k, row) in rows.iter().enumerate() {
        let n = (k + 1) as f64;
        assert!((field(row, "F_clone_sim") - 4.0 * n / (4.0 * n + 1.0)).abs() < 1e-3);
    }
}

/// Recomputes every closed-form column from the row's own parameter columns.
#[test]
fn sweep_csv_round_trips() {
    for args in [
        vec!["--axis", "M", "--from", "1", "--to", "6", "--variant", "b", "--squeezing", "0.5", "--squeezing2", "inf"],
        vec!["--axis", "r", "--from", "0", "--to", "1", "--steps", "4", "--variant", "a-swapped", "--clones", "3"],
        vec!["--axis", "N", "--from", "1", "--to", "3", "--variant", "a-generalized", "--clones", "5"],
        vec!["--axis", "M", "--from", "2", "--to", "5", "--variant", "baseline", "--squeezing", "inf"],
    ] {
        for row in sweep(&args) {
            let variant: Variant = row[0].parse().unwrap();
            let m: usize = row[1].parse().unwrap();
            let n: usize = row[2].parse().unwrap();
            let parse_r = |s: &str| teleclone_cli::args::parse_squeezing(s).unwrap();
            let (r, r2) = (parse_r(&row[3]), parse_r(&row[4]));
            assert_eq!(squeezing_cell(r), &row[3]);
            let (fc, fa) = closed_form_pair(variant, FormulaParams::new(m, n, r, r2)).unwrap();
            assert_eq!(cell(fc), &row[6]);
            assert_eq!(cell(fa), &row[8]);
            let base = baseline_standard_fidelity(Multiplicity::Finite(m), n, r)
                .map(|(c, _)| cell(c))
                .unwrap_or_default();
            assert_eq!(base, &row[9]);
            if variant == Variant::Baseline {
                assert_eq!(&row[5], "");
            } else {
                assert!(!row[5].is_empty());
            }
        }
    }
}

#[test]
fn invalid_arguments_exit_2() {
    for args in [
        vec!["verify", "--samples", "100"],
        vec!["sweep", "--axis", "M", "--from", "5", "--to", "1"],
        vec!["sweep", "--axis", "M", "--from", "1.5", "--to", "3"],
        vec!["sweep", "--axis", "M", "--from", "1", "--to", "3", "--steps", "3"],
        vec!["sweep", "--axis", "r", "--from", "-1", "--to", "3"],
        vec!["sweep", "--axis", "r", "--from", "0", "--to", "3", "--steps", "0"],
        vec!["sweep", "--axis", "N", "--from", "1", "--to", "3"],
        vec!["simulate", "--variant", "c"],
        vec!["simulate", "--clones", "0"],
        vec!["simulate", "--squeezing", "-1"],
        vec!["simulate", "--input", "2"],
        vec!["simulate", "--variant", "a", "--copies", "2"],
        vec!["simulate", "--variant", "baseline", "--clones", "3", "--copies", "2"],
        vec!["verify", "--clones", "3"],
        vec!["verify", "--variant", "baseline", "--samples", "1000"],
        vec!["frobnicate"],
    ] {
        let (code, out, err) = invoke(&args);
        assert_eq!(code, EXIT_USAGE, "{args:?}: {out}{err}");
        assert!(out.is_empty(), "{args:?}");
        assert!(!err.is_empty(), "{args:?}");
    }
}

#[test]
fn help_is_not_an_error() {
    let (code, out, _) = invoke(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("simulate"));
}

#[test]
fn verify_single_cell_replays_identically() {
    let args = [
        "verify", "--variant", "b", "--clones", "3", "--squeezing", "0.5", "--samples", "20000", "--seed", "5",
    ];
    let (code, first, _) = invoke(&args);
    assert_eq!(code, EXIT_OK);
    let (_, second, _) = invoke(&args);
    assert_eq!(first, second);
    let doc: Value = serde_json::from_str(&first).unwrap();
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["cells"][0]["quantities"].as_array().unwrap().len(), 24);
}

#[test]
fn verify_default_grid_passes() {
    let doc = json(&["verify", "--samples", "1000000", "--seed", "42"]);
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["cells"].as_array().unwrap().len(), 32);
    assert!(doc["max_abs_z"].as_f64().unwrap() <= 5.0);
}

#[test]
fn seed_flag_overrides_environment() {
    let exe = env!("CARGO_BIN_EXE_teleclone");
    let verify = |seed_flag: Option<&str>, env: Option<&str>| {
        let mut cmd = Command::new(exe);
        cmd.args(["verify", "--variant", "a", "--samples", "5000"]);
        if let Some(s) = seed_flag {
            cmd.args(["--seed", s]);
        }
        cmd.env_remove("TELECLONE_SEED");
        if let Some(e) = env {
            cmd.env("TELECLONE_SEED", e);
        }
        let output = cmd.output().unwrap();
        assert!(output.status.success());
        serde_json::from_slice::<Value>(&output.stdout).unwrap()["seed"].as_u64().unwrap()
    };
    assert_eq!(verify(None, None), 0);
    assert_eq!(verify(None, Some("7")), 7);
    assert_eq!(verify(Some("8"), Some("7")), 8);
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_teleclone");
    let status = Command::new(exe)
        .args(["verify", "--samples", "100"])
        .stderr(Stdio::null())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let status = Command::new(exe).args(["table"]).status().unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn output_file_receives_the_document() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.csv");
    let (code, out, _) = invoke(&["table", "--output", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(
        text,
        "M,r,F_pci_clone,F_pci_anti,F_standard_clone,F_standard_anti,pci_outputs,standard_outputs\n\
         2,inf,0.941176470588,0.941176470588,1,0.666666666667,2+2,2+0\n\
         3,inf,0.9,0.9,0.857142857143,0.666666666667,3+3,3+1\n\
         inf,inf,0.8,0.8,0.666666666667,0.666666666667,inf+inf,inf+inf\n"
    );
    let (code, _, err) = invoke(&["table", "--output", dir.path().join("missing/x.csv").to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("cannot write"));
}

#[test]
fn infinite_squeezing_sweep_uses_symbolic_formula() {
    let rows = sweep(&["--axis", "M", "--from", "2", "--to", "2", "--squeezing", "inf"]);
    assert_eq!(&rows[0][3], "inf");
    assert_eq!(&rows[0][6], "0.941176470588");
}

#[test]
fn precision_breakdown_is_reported_as_a_failed_check() {
    // e^{80} swamps double precision; the build's self-check must notice.
    let (code, out, err) = invoke(&["simulate", "--clones", "3", "--squeezing", "40"]);
    assert_eq!(code, 1);
    assert!(err.contains("check failed"));
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["invariants"]["passed"], false);
}

use rayon::prelude::*;
use serde_json::{json, Value};
use teleclone_core::fidelity::baseline_standard_fidelity;
use teleclone_core::oracle::{compare, run_oracle};
use teleclone_core::protocols::{
    asymptotic_pair, build, closed_form_pair, report_indices, Build, ProtocolSpec, Variant,
};
use teleclone_core::scalar::{Multiplicity, Squeezing};

use crate::args::{Axis, ProtocolArgs, SweepArgs, VerifyArgs};
use crate::format::{cell, number, spec_value, squeezing_cell, state_value};
use crate::Failure;

/// Tolerance for the post-build checks; mean errors scale with the input.
const CHECK_TOL: f64 = 1e-10;

pub const CSV_HEADER: [&str; 10] = [
    "variant",
    "M",
    "N",
    "r",
    "r2",
    "F_clone_sim",
    "F_clone_formula",
    "F_anti_sim",
    "F_anti_formula",
    "F_baseline_clone",
];

/// A finished document and whether every check behind it held.
pub struct Document {
    pub text: String,
    pub passed: bool,
}

pub fn protocol_spec(args: &ProtocolArgs) -> Result<ProtocolSpec<f64>, Failure> {
    ProtocolSpec::new(
        args.variant,
        args.clones,
        args.copies,
        args.squeezing,
        args.squeezing2.unwrap_or(args.squeezing),
        args.input,
    )
    .map_err(|e| Failure::Usage(e.to_string()))
}

fn usage(e: teleclone_core::Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn checks_hold(built: &Build<f64>) -> bool {
    let (x, p) = built.spec.input;
    let scale = 1f64.max(x.abs()).max(p.abs());
    built.report.invariants.holds(CHECK_TOL * scale) && built.report.max_discrepancy <= CHECK_TOL
}

fn baseline_clone(spec: &ProtocolSpec<f64>) -> Option<f64> {
    baseline_standard_fidelity(Multiplicity::Finite(spec.clones), spec.copies, spec.squeezing)
        .ok()
        .map(|(clone, _)| clone)
}

fn json_text(doc: &Value) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("JSON values serialize");
    text.push('\n');
    text
}

pub fn simulate(args: &ProtocolArgs) -> Result<Document, Failure> {
    let spec = protocol_spec(args)?;
    let baseline = baseline_clone(&spec).map_or(Value::Null, number);
    if spec.variant == Variant::Baseline {
        let (clone, anti) = closed_form_pair(Variant::Baseline, spec.formula_params()).map_err(usage)?;
        let doc = json!({
            "schema": 1,
            "command": "simulate",
            "spec": spec_value(&spec),
            "fidelity_clone": number(clone),
            "fidelity_clone_formula": number(clone),
            "fidelity_anticlone": number(anti),
            "fidelity_anticlone_formula": number(anti),
            "fidelity_baseline_clone": baseline,
            "predicted_variance": Value::Null,
            "max_discrepancy": Value::Null,
            "states": [],
            "invariants": Value::Null,
            "sampled": false,
            "flags": ["closed-form only: the standard telecloner is not simulated"],
        });
        return Ok(Document {
            text: json_text(&doc),
            passed: true,
        });
    }

    let built = build(&spec).map_err(usage)?;
    let report = &built.report;
    let indices = report_indices(spec.clones);
    let mut states = Vec::new();
    for (role, list) in [("clone", &report.clone_states), ("anticlone", &report.anticlone_states)] {
        for (&index, (slot, state)) in indices.iter().zip(list.iter()) {
            let target = if role == "clone" { spec.clone_target() } else { spec.anticlone_target() };
            let fidelity = teleclone_core::fidelity_vs_coherent(state, target)
                .map(|f| number(f.value))
                .unwrap_or(Value::Null);
            let mut entry = json!({ "role": role, "index": index, "slot": slot });
            let map = entry.as_object_mut().expect("object literal");
            if let Value::Object(s) = state_value(state) {
                map.extend(s);
            }
            map.insert("fidelity".into(), fidelity);
            states.push(entry);
        }
    }
    let inv = &report.invariants;
    let passed = checks_hold(&built);
    let doc = json!({
        "schema": 1,
        "command": "simulate",
        "spec": spec_value(&spec),
        "fidelity_clone": number(report.fidelity_clone.simulated),
        "fidelity_clone_formula": number(report.fidelity_clone.closed_form),
        "fidelity_anticlone": number(report.fidelity_anticlone.simulated),
        "fidelity_anticlone_formula": number(report.fidelity_anticlone.closed_form),
        "fidelity_baseline_clone": baseline,
        "predicted_variance": {
            "clone": number(report.predicted_clone_var),
            "anticlone": number(report.predicted_anticlone_var),
        },
        "max_discrepancy": number(report.max_discrepancy),
        "states": states,
        "invariants": {
            "symplectic_defect": number(inv.symplectic_defect),
            "min_det": number(inv.min_det),
            "mean_transfer_error": number(inv.mean_transfer_error),
            "spread": number(inv.spread),
            "passed": passed,
        },
        "sampled": report.sampled,
        "flags": report.flags,
    });
    Ok(Document {
        text: json_text(&doc),
        passed,
    })
}

/// Grid values along the sweep axis, already rounded to what the CSV will
/// show so that the file can be recomputed from its own columns.
pub fn axis_points(args: &SweepArgs) -> Result<Vec<f64>, Failure> {
    let (from, to) = (args.from, args.to);
    if !from.is_finite() || !to.is_finite() || to < from {
        return Err(Failure::Usage(format!("empty range {from}..{to}")));
    }
    match args.axis {
        Axis::Clones | Axis::Copies => {
            if args.steps.is_some() {
                return Err(Failure::Usage("--steps applies to the r and r2 axes only".into()));
            }
            if from.fract() != 0.0 || to.fract() != 0.0 || from < 1.0 {
                return Err(Failure::Usage(format!("M and N ranges need integers >= 1, got {from}..{to}")));
            }
            Ok((from as usize..=to as usize).map(|v| v as f64).collect())
        }
        Axis::Squeezing | Axis::Squeezing2 => {
            if from < 0.0 {
                return Err(Failure::Usage(format!("squeezing must be non-negative, got {from}")));
            }
            let steps = args.steps.unwrap_or(11);
            if steps == 0 {
                return Err(Failure::Usage("--steps must be at least 1".into()));
            }
            if steps == 1 || from == to {
                if from != to {
                    return Err(Failure::Usage("one step needs --from equal to --to".into()));
                }
                return Ok(vec![from]);
            }
            let span = to - from;
            Ok((0..steps)
                .map(|i| crate::format::round12(from + span * i as f64 / (steps - 1) as f64))
                .collect())
        }
    }
}

fn sweep_spec(args: &SweepArgs, value: f64) -> Result<ProtocolSpec<f64>, Failure> {
    let mut p = args.protocol.clone();
    match args.axis {
        Axis::Clones => p.clones = value as usize,
        Axis::Copies => p.copies = value as usize,
        Axis::Squeezing => p.squeezing = Squeezing::Finite(value),
        Axis::Squeezing2 => {
            p.squeezing2 = Some(Squeezing::Finite(value));
        }
    }
    protocol_spec(&p)
}

fn optional(v: Option<f64>) -> String {
    v.map(cell).unwrap_or_default()
}

/// One CSV record and whether its build passed the checks.
fn sweep_row(spec: &ProtocolSpec<f64>) -> Result<(Vec<String>, bool), Failure> {
    let (formula_clone, formula_anti) = closed_form_pair(spec.variant, spec.formula_params()).map_err(usage)?;
    let (sim_clone, sim_anti, passed) = if spec.variant == Variant::Baseline {
        (None, None, true)
    } else {
        let built = build(spec).map_err(usage)?;
        let r = &built.report;
        (
            Some(r.fidelity_clone.simulated),
            Some(r.fidelity_anticlone.simulated),
            checks_hold(&built),
        )
    };
    let row = vec![
        spec.variant.name().to_string(),
        spec.clones.to_string(),
        spec.copies.to_string(),
        squeezing_cell(spec.squeezing),
        squeezing_cell(spec.squeezing2),
        optional(sim_clone),
        cell(formula_clone),
        optional(sim_anti),
        cell(formula_anti),
        optional(baseline_clone(spec)),
    ];
    Ok((row, passed))
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("CSV is UTF-8")
}

pub fn sweep(args: &SweepArgs) -> Result<Document, Failure> {
    let specs = axis_points(args)?
        .into_iter()
        .map(|v| sweep_spec(args, v))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = specs
        .par_iter()
        .map(sweep_row)
        .collect::<Result<Vec<_>, _>>()?;
    let passed = rows.iter().all(|(_, ok)| *ok);
    let rows: Vec<Vec<String>> = rows.into_iter().map(|(row, _)| row).collect();
    Ok(Document {
        text: csv_text(&CSV_HEADER, &rows),
        passed,
    })
}

/// Default verification grid: every network variant at M in {1, 2, 3, 5} and
/// r in {0, 1}.
pub fn verify_grid() -> Vec<ProtocolSpec<f64>> {
    let mut specs = Vec::new();
    for m in [1, 2, 3, 5] {
        for r in [0.0, 1.0] {
            for (variant, n) in [
                (Variant::A, 1),
                (Variant::ASwapped, 1),
                (Variant::AGeneralized, 2),
                (Variant::B, 1),
            ] {
                let s = Squeezing::Finite(r);
                specs.push(ProtocolSpec::new(variant, m, n, s, s, (2.0, 4.0)).expect("grid specs are valid"));
            }
        }
    }
    specs
}

pub fn verify(args: &VerifyArgs) -> Result<Document, Failure> {
    let specs = match args.variant {
        None => verify_grid(),
        Some(variant) => {
            let squeezing = args.squeezing.unwrap_or(Squeezing::Finite(1.0));
            let spec = protocol_spec(&ProtocolArgs {
                variant,
                clones: args.clones.unwrap_or(2),
                copies: args.copies.unwrap_or(1),
                squeezing,
                squeezing2: Some(args.squeezing2.unwrap_or(squeezing)),
                input: args.input.unwrap_or((2.0, 4.0)),
            })?;
            if variant == Variant::Baseline {
                return Err(Failure::Usage("the standard telecloner has no network to sample".into()));
            }
            vec![spec]
        }
    };
    let samples = usize::try_from(args.samples).map_err(|_| Failure::Usage("--samples too large".into()))?;
    let cells = specs
        .par_iter()
        .map(|spec| {
            let run = run_oracle(spec, samples, args.seed).map_err(usage)?;
            Ok((spec, compare(&run)))
        })
        .collect::<Result<Vec<_>, Failure>>()?;

    let passed = cells.iter().all(|(_, r)| r.passed);
    let max_z = cells.iter().map(|(_, r)| r.max_abs_z).fold(0.0, f64::max);
    let cell_docs: Vec<Value> = cells
        .iter()
        .map(|(spec, report)| {
            let quantities: Vec<Value> = report
                .entries
                .iter()
                .map(|z| {
                    json!({
                        "label": z.label,
                        "quantity": z.quantity,
                        "estimate": number(z.estimate),
                        "target": number(z.target),
                        "standard_error": number(z.standard_error),
                        "z": number(z.z),
                    })
                })
                .collect();
            json!({
                "spec": spec_value(spec),
                "passed": report.passed,
                "max_abs_z": number(report.max_abs_z),
                "quantities": quantities,
            })
        })
        .collect();
    let doc = json!({
        "schema": 1,
        "command": "verify",
        "samples": samples,
        "seed": args.seed,
        "z_threshold": number(teleclone_core::oracle::Z_THRESHOLD),
        "passed": passed,
        "max_abs_z": number(max_z),
        "cells": cell_docs,
    });
    Ok(Document {
        text: json_text(&doc),
        passed,
    })
}

pub const TABLE_HEADER: [&str; 8] = [
    "M",
    "r",
    "F_pci_clone",
    "F_pci_anti",
    "F_standard_clone",
    "F_standard_anti",
    "pci_outputs",
    "standard_outputs",
];

pub fn table() -> Result<Document, Failure> {
    let inf = Squeezing::<f64>::Infinite;
    let mut rows = Vec::new();
    for m in [2usize, 3] {
        let (pc, pa) = closed_form_pair(Variant::A, teleclone_core::FormulaParams::new(m, 1, inf, inf)).map_err(usage)?;
        let (sc, sa) = baseline_standard_fidelity(Multiplicity::Finite(m), 1, inf).map_err(usage)?;
        rows.push(vec![
            m.to_string(),
            "inf".into(),
            cell(pc),
            cell(pa),
            cell(sc),
            cell(sa),
            format!("{m}+{m}"),
            format!("{m}+{}", m - 2),
        ]);
    }
    let (pc, pa) = asymptotic_pair(Variant::A, 1, inf, inf).map_err(usage)?;
    let (sc, sa) = baseline_standard_fidelity(Multiplicity::Unbounded, 1, inf).map_err(usage)?;
    rows.push(vec![
        "inf".into(),
        "inf".into(),
        cell(pc),
        cell(pa),
        cell(sc),
        cell(sa),
        "inf+inf".into(),
        "inf+inf".into(),
    ]);
    Ok(Document {
        text: csv_text(&TABLE_HEADER, &rows),
        passed: true,
    })
}

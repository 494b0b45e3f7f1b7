//! The four subcommands. Each returns a process exit code: 0 for success,
//! 1 for runtime failures, 2 for usage errors, 4 when an optimization ended
//! without meeting the convergence tolerances, and validate exits 1 when any
//! self-check fails.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

use lossphase::fisher::precision_from_entries;
use lossphase::{
    combined_uncertainty, commutator_expectation, fock_probe, holland_burnett,
    measured_fisher_phase_sld, noon, optimize, qfi_matrix, run_checks, tradeoff_scan, uniform,
    Objective, OptimizerSettings, ProbeState,
};

use crate::config::{CliError, OutputFormat, ProbeSelector, Result, RunConfig};
use crate::output::{
    fmt_value, json_value, load_weights, write_json, write_manifest, write_weights,
};

pub const EXIT_PARTIAL: i32 = 4;

fn prepare_out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.out_dir();
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn at_eta(eta: f64) -> impl Fn(lossphase::Error) -> CliError {
    move |e| CliError::Runtime(format!("at eta={eta}: {e}"))
}

fn settings_for(objective: Objective, seed: u64) -> OptimizerSettings {
    match objective {
        Objective::JointDelta => OptimizerSettings::joint(seed),
        Objective::PhaseOnly => OptimizerSettings::phase_only(seed),
    }
}

/// Builds the probe a selector names, running the optimizer when asked.
/// Returns the weights so emitted numbers can be tied back to them.
fn resolve_probe(
    selector: &ProbeSelector,
    n: usize,
    eta: f64,
    objective: Objective,
    seed: u64,
    warnings: &mut usize,
) -> Result<ProbeState> {
    let probe = match selector {
        ProbeSelector::Noon => noon(n).map_err(at_eta(eta))?,
        ProbeSelector::HollandBurnett => holland_burnett(n).map_err(at_eta(eta))?,
        ProbeSelector::Fock => fock_probe(n).map_err(at_eta(eta))?,
        ProbeSelector::Uniform => uniform(n).map_err(at_eta(eta))?,
        ProbeSelector::File(path) => {
            let (weights, renormalized) = load_weights(path)?;
            if renormalized {
                eprintln!(
                    "warning: {} renormalized; raw weights were off by more than 1e-9",
                    path.display()
                );
                *warnings += 1;
            }
            if weights.len() != n + 1 {
                return Err(CliError::Usage(format!(
                    "{} holds n={} but --n {n} was given",
                    path.display(),
                    weights.len() - 1
                )));
            }
            ProbeState::from_weights(&weights, None).map_err(at_eta(eta))?
        }
        ProbeSelector::Optimize => {
            let result = optimize(n, eta, &settings_for(objective, seed)).map_err(at_eta(eta))?;
            if !result.converged {
                eprintln!("warning: optimization at eta={eta} stopped before convergence");
                *warnings += 1;
            }
            ProbeState::from_weights(&result.weights, None).map_err(at_eta(eta))?
        }
    };
    Ok(probe)
}

struct QfiRow {
    eta: f64,
    label: &'static str,
    i_phi_phi: f64,
    i_eta_eta: f64,
    i_phi_eta: f64,
    i_eta_eta_measured: f64,
    commutator_mag: f64,
    delta_phi: f64,
    delta_eta: f64,
    delta: f64,
}

fn qfi_row(probe: &ProbeState, eta: f64, label: &'static str) -> Result<QfiRow> {
    let q = qfi_matrix(probe, eta).map_err(at_eta(eta))?;
    let meas = measured_fisher_phase_sld(probe, eta).map_err(at_eta(eta))?;
    let comm = commutator_expectation(probe, eta).map_err(at_eta(eta))?;
    let p = precision_from_entries(q.phi_phi, meas.eta_eta);
    Ok(QfiRow {
        eta,
        label,
        i_phi_phi: q.phi_phi,
        i_eta_eta: q.eta_eta,
        i_phi_eta: q.phi_eta,
        i_eta_eta_measured: meas.eta_eta,
        commutator_mag: comm.norm(),
        delta_phi: p.delta_phi,
        delta_eta: p.delta_eta,
        delta: p.delta_total,
    })
}

const QFI_COLUMNS: [&str; 10] = [
    "eta",
    "probe",
    "i_phiphi",
    "i_etaeta",
    "i_phieta",
    "i_etaeta_measured",
    "commutator_mag",
    "delta_phi",
    "delta_eta",
    "delta",
];

fn qfi_record(row: &QfiRow) -> Vec<String> {
    vec![
        fmt_value(row.eta),
        row.label.to_string(),
        fmt_value(row.i_phi_phi),
        fmt_value(row.i_eta_eta),
        fmt_value(row.i_phi_eta),
        fmt_value(row.i_eta_eta_measured),
        fmt_value(row.commutator_mag),
        fmt_value(row.delta_phi),
        fmt_value(row.delta_eta),
        fmt_value(row.delta),
    ]
}

fn write_csv(path: &Path, columns: &[&str], records: &[Vec<String>]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    writer
        .write_record(columns)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    for record in records {
        writer
            .write_record(record)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    writer.flush().map_err(|e| CliError::Runtime(e.to_string()))
}

fn write_rows(
    path_stem: &Path,
    format: OutputFormat,
    columns: &[&str],
    records: &[Vec<String>],
) -> Result<PathBuf> {
    match format {
        OutputFormat::Csv => {
            let path = path_stem.with_extension("csv");
            write_csv(&path, columns, records)?;
            Ok(path)
        }
        OutputFormat::Json => {
            let path = path_stem.with_extension("json");
            let rows: Vec<serde_json::Value> = records
                .iter()
                .map(|record| {
                    let mut obj = serde_json::Map::new();
                    for (col, value) in columns.iter().zip(record) {
                        // numeric columns go back to JSON numbers when finite
                        let parsed = value.parse::<f64>();
                        let entry = match parsed {
                            Ok(v) if *col != "probe" => json_value(v),
                            _ => serde_json::Value::String(value.clone()),
                        };
                        obj.insert((*col).to_string(), entry);
                    }
                    serde_json::Value::Object(obj)
                })
                .collect();
            write_json(&path, &serde_json::Value::Array(rows))?;
            Ok(path)
        }
    }
}

pub fn run_qfi(cfg: &RunConfig) -> Result<i32> {
    let start = Instant::now();
    let n = cfg.require_n()?;
    let etas = cfg.etas()?;
    let selector = ProbeSelector::parse(cfg.probe.as_deref().unwrap_or("noon"))?;
    let objective = cfg.objective()?;
    let format = cfg.format()?;
    let out = prepare_out_dir(cfg)?;
    let seed = cfg.seed();

    let mut warnings = 0usize;
    let mut records = Vec::with_capacity(etas.len());
    for &eta in &etas {
        let probe = resolve_probe(&selector, n, eta, objective, seed, &mut warnings)?;
        let row = qfi_row(&probe, eta, selector.label())?;
        records.push(qfi_record(&row));
    }
    let table = write_rows(&out.join("qfi"), format, &QFI_COLUMNS, &records)?;
    write_manifest(
        &out.join("qfi_manifest.json"),
        "qfi",
        cfg,
        start.elapsed(),
        warnings,
    )?;
    println!("wrote {}", table.display());
    Ok(0)
}

const TRADEOFF_COLUMNS: [&str; 7] = [
    "eta",
    "probe",
    "i_phiphi",
    "i_etaeta_measured",
    "delta_phi",
    "delta_eta",
    "delta",
];

fn tradeoff_record(
    eta: f64,
    label: &str,
    i_phi_phi: f64,
    i_eta_eta_measured: f64,
    delta_phi: f64,
    delta_eta: f64,
    delta: f64,
) -> Vec<String> {
    vec![
        fmt_value(eta),
        label.to_string(),
        fmt_value(i_phi_phi),
        fmt_value(i_eta_eta_measured),
        fmt_value(delta_phi),
        fmt_value(delta_eta),
        fmt_value(delta),
    ]
}

/// Re-reads the serialized weight strings and recomputes every Fisher column;
/// a mismatch beyond 1e-10 means a stale or corrupted row.
fn readback_matches(weight_strings: &[String], eta: f64, emitted: &[String]) -> bool {
    let weights: Option<Vec<f64>> = weight_strings.iter().map(|s| s.parse().ok()).collect();
    let Some(weights) = weights else { return false };
    let Ok(probe) = ProbeState::from_weights(&weights, None) else {
        return false;
    };
    let Ok(q) = qfi_matrix(&probe, eta) else {
        return false;
    };
    let Ok(meas) = measured_fisher_phase_sld(&probe, eta) else {
        return false;
    };
    let p = precision_from_entries(q.phi_phi, meas.eta_eta);
    let expect = [
        q.phi_phi,
        meas.eta_eta,
        p.delta_phi,
        p.delta_eta,
        p.delta_total,
    ];
    emitted.iter().zip(expect).all(|(s, want)| {
        s.parse::<f64>()
            .map(|got| (got - want).abs() <= 1e-10 * (1.0 + want.abs()))
            .unwrap_or(false)
    })
}

pub fn run_tradeoff(cfg: &RunConfig) -> Result<i32> {
    let start = Instant::now();
    let n = cfg.require_n()?;
    let etas = cfg.etas()?;
    let format = cfg.format()?;
    let out = prepare_out_dir(cfg)?;
    let seed = cfg.seed();

    let mut warnings = 0usize;

    // fixed families first
    for (label, probe) in [
        ("noon", noon(n).map_err(|e| CliError::Runtime(e.to_string()))?),
        (
            "hb",
            holland_burnett(n).map_err(|e| CliError::Runtime(e.to_string()))?,
        ),
    ] {
        let mut records = Vec::with_capacity(etas.len());
        for &eta in &etas {
            let q = qfi_matrix(&probe, eta).map_err(at_eta(eta))?;
            let meas = measured_fisher_phase_sld(&probe, eta).map_err(at_eta(eta))?;
            let p = precision_from_entries(q.phi_phi, meas.eta_eta);
            records.push(tradeoff_record(
                eta,
                label,
                q.phi_phi,
                meas.eta_eta,
                p.delta_phi,
                p.delta_eta,
                p.delta_total,
            ));
        }
        write_rows(
            &out.join(format!("tradeoff_{label}")),
            format,
            &TRADEOFF_COLUMNS,
            &records,
        )?;
    }

    // optimizer families; failed grid points come through as nan rows
    for (label, objective) in [
        ("phase_opt", Objective::PhaseOnly),
        ("joint_opt", Objective::JointDelta),
    ] {
        let rows = tradeoff_scan(n, &etas, &settings_for(objective, seed))
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        let mut records = Vec::with_capacity(rows.len());
        let mut weight_records = Vec::new();
        for row in &rows {
            if !row.converged {
                eprintln!(
                    "warning: {label} optimization at eta={} did not converge",
                    row.eta
                );
                warnings += 1;
            }
            let record = tradeoff_record(
                row.eta,
                label,
                row.i_phi_phi,
                row.i_eta_eta_measured,
                row.delta_phi,
                row.delta_eta,
                row.delta,
            );
            if !row.weights.is_empty() {
                let weight_strings: Vec<String> =
                    row.weights.iter().map(|&w| fmt_value(w)).collect();
                if !readback_matches(&weight_strings, row.eta, &record[2..]) {
                    eprintln!(
                        "warning: {label} row at eta={} does not match its weights on read-back",
                        row.eta
                    );
                    warnings += 1;
                }
                for (k, w) in weight_strings.into_iter().enumerate() {
                    weight_records.push(vec![fmt_value(row.eta), k.to_string(), w]);
                }
            }
            records.push(record);
        }
        write_rows(
            &out.join(format!("tradeoff_{label}")),
            format,
            &TRADEOFF_COLUMNS,
            &records,
        )?;
        write_rows(
            &out.join(format!("weights_{label}")),
            format,
            &["eta", "k", "x_k"],
            &weight_records,
        )?;
    }

    write_manifest(
        &out.join("tradeoff_manifest.json"),
        "tradeoff",
        cfg,
        start.elapsed(),
        warnings,
    )?;
    Ok(0)
}

pub fn run_optimize(cfg: &RunConfig) -> Result<i32> {
    let start = Instant::now();
    let n = cfg.require_n()?;
    let etas = cfg.etas()?;
    let objective = cfg.objective()?;
    let out = prepare_out_dir(cfg)?;
    let seed = cfg.seed();
    let settings = settings_for(objective, seed);

    let mut warnings = 0usize;
    let mut all_converged = true;
    let mut results = Vec::with_capacity(etas.len());
    for &eta in &etas {
        let result = optimize(n, eta, &settings).map_err(at_eta(eta))?;
        all_converged &= result.converged;
        let file = if etas.len() == 1 {
            "weights.csv".to_string()
        } else {
            format!("weights_eta_{eta:.6}.csv")
        };
        let path = out.join(&file);
        write_weights(&path, &result.weights)?;

        // every serialized weight file must reproduce the reported objective
        let (reread, _) = load_weights(&path)?;
        let probe = ProbeState::from_weights(&reread, None).map_err(at_eta(eta))?;
        let recomputed = match objective {
            Objective::JointDelta => combined_uncertainty(&probe, eta)
                .map_err(at_eta(eta))?
                .delta_total,
            Objective::PhaseOnly => qfi_matrix(&probe, eta).map_err(at_eta(eta))?.phi_phi,
        };
        if (recomputed - result.objective_value).abs()
            > 1e-10 * (1.0 + result.objective_value.abs())
        {
            eprintln!("warning: {file} does not reproduce the reported objective on read-back");
            warnings += 1;
        }

        results.push(json!({
            "eta": eta,
            "weights_file": file,
            "objective": objective.to_string(),
            "objective_value": json_value(result.objective_value),
            "converged": result.converged,
            "gradient_norm": json_value(result.gradient_norm),
            "active_set": result.active_set,
            "starts": result.starts.iter().map(|s| json!({
                "index": s.start_index,
                "label": s.label,
                "objective": json_value(s.objective),
                "iterations": s.iterations,
                "converged": s.converged,
            })).collect::<Vec<_>>(),
        }));
    }

    write_json(
        &out.join("optimize_summary.json"),
        &json!({
            "command": "optimize",
            "n": n,
            "objective": objective.to_string(),
            "seed": seed,
            "converged": all_converged,
            "results": results,
        }),
    )?;
    write_manifest(
        &out.join("optimize_manifest.json"),
        "optimize",
        cfg,
        start.elapsed(),
        warnings,
    )?;
    Ok(if all_converged { 0 } else { EXIT_PARTIAL })
}

pub fn run_validate(cfg: &RunConfig) -> Result<i32> {
    let start = Instant::now();
    let n_budget = cfg.n_budget.unwrap_or(6);
    let filter = cfg.check.as_deref();
    let out = prepare_out_dir(cfg)?;
    let seed = cfg.seed();

    let reports =
        run_checks(filter, n_budget, seed).map_err(|e| CliError::Runtime(e.to_string()))?;
    if reports.is_empty() {
        return Err(CliError::Usage(format!(
            "no check matches {:?}",
            filter.unwrap_or("")
        )));
    }
    for report in &reports {
        println!("{report}");
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    let body: Vec<serde_json::Value> = reports
        .iter()
        .map(|r| {
            json!({
                "name": r.name,
                "measured_error": json_value(r.measured_error),
                "tolerance": r.tolerance,
                "pass": r.pass,
            })
        })
        .collect();
    write_json(
        &out.join("validate_report.json"),
        &json!({
            "command": "validate",
            "n_budget": n_budget,
            "seed": seed,
            "checks": body,
            "failed": failed,
        }),
    )?;
    write_manifest(
        &out.join("validate_manifest.json"),
        "validate",
        cfg,
        start.elapsed(),
        0,
    )?;
    Ok(if failed == 0 { 0 } else { 1 })
}

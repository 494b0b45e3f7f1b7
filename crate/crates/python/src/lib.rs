//! Python bindings: probe constructors, the closed-form Fisher quantities,
//! SLD spectra, the simplex optimizer, and the self-check suite, all over
//! plain lists and dicts.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use lossphase::{
    evolve, sld_eigenpairs, ChannelParams, Objective, OptimizerSettings, Param, ProbeState,
};

fn to_py_err(e: lossphase::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn probe_from(weights: Vec<f64>) -> PyResult<ProbeState> {
    ProbeState::from_weights(&weights, None).map_err(to_py_err)
}

fn parse_objective(objective: &str) -> PyResult<Objective> {
    match objective {
        "joint" => Ok(Objective::JointDelta),
        "phase" => Ok(Objective::PhaseOnly),
        other => Err(PyValueError::new_err(format!(
            "unknown objective {other:?}; expected joint or phase"
        ))),
    }
}

fn parse_param(param: &str) -> PyResult<Param> {
    match param {
        "phi" => Ok(Param::Phase),
        "eta" => Ok(Param::Loss),
        other => Err(PyValueError::new_err(format!(
            "unknown parameter {other:?}; expected phi or eta"
        ))),
    }
}

/// Weights of the n00n probe (all photons in one arm or the other).
#[pyfunction]
fn noon_weights(n: usize) -> PyResult<Vec<f64>> {
    Ok(lossphase::noon(n).map_err(to_py_err)?.weights())
}

/// Weights of the Holland-Burnett probe (twin Fock through a 50:50 splitter).
#[pyfunction]
fn hb_weights(n: usize) -> PyResult<Vec<f64>> {
    Ok(lossphase::holland_burnett(n).map_err(to_py_err)?.weights())
}

/// Weights of the Fock probe |n, 0> (all photons in the lossy arm).
#[pyfunction]
fn fock_weights(n: usize) -> PyResult<Vec<f64>> {
    Ok(lossphase::fock_probe(n).map_err(to_py_err)?.weights())
}

/// Uniform weights over k = 0..n.
#[pyfunction]
fn uniform_weights(n: usize) -> PyResult<Vec<f64>> {
    Ok(lossphase::uniform(n).map_err(to_py_err)?.weights())
}

/// Quantum Fisher information matrix entries (I_phiphi, I_etaeta, I_phieta).
#[pyfunction]
fn qfi(weights: Vec<f64>, eta: f64) -> PyResult<(f64, f64, f64)> {
    let probe = probe_from(weights)?;
    let q = lossphase::qfi_matrix(&probe, eta).map_err(to_py_err)?;
    Ok((q.phi_phi, q.eta_eta, q.phi_eta))
}

/// Fisher information attainable by measuring in the phase-SLD eigenbasis:
/// (I_phiphi, measured I_etaeta).
#[pyfunction]
fn measured_fisher(weights: Vec<f64>, eta: f64) -> PyResult<(f64, f64)> {
    let probe = probe_from(weights)?;
    let m = lossphase::measured_fisher_phase_sld(&probe, eta).map_err(to_py_err)?;
    Ok((m.phi_phi, m.eta_eta))
}

/// (delta_phi, delta_eta, delta) for the phase-SLD measurement; infinities
/// mark parameters the probe carries no information about.
#[pyfunction]
fn combined_uncertainty(weights: Vec<f64>, eta: f64) -> PyResult<(f64, f64, f64)> {
    let probe = probe_from(weights)?;
    let p = lossphase::combined_uncertainty(&probe, eta).map_err(to_py_err)?;
    Ok((p.delta_phi, p.delta_eta, p.delta_total))
}

/// tr(rho [L_eta, L_phi]) as a Python complex; purely imaginary, i I_phiphi/eta.
#[pyfunction]
fn commutator(weights: Vec<f64>, eta: f64) -> PyResult<Complex64> {
    let probe = probe_from(weights)?;
    lossphase::commutator_expectation(&probe, eta).map_err(to_py_err)
}

/// Per-block SLD eigenvalues for the chosen parameter ("phi" or "eta"):
/// a list of (l, lambda_minus, lambda_plus) over occupied loss sectors.
#[pyfunction]
#[pyo3(signature = (weights, eta, param, phi = 0.0))]
fn sld_spectrum(
    weights: Vec<f64>,
    eta: f64,
    param: &str,
    phi: f64,
) -> PyResult<Vec<(usize, f64, f64)>> {
    let probe = probe_from(weights)?;
    let kappa = parse_param(param)?;
    let params = ChannelParams::new(phi, eta).map_err(to_py_err)?;
    let ens = evolve(&probe, params).map_err(to_py_err)?;
    let pairs = sld_eigenpairs(&ens, kappa).map_err(to_py_err)?;
    Ok(pairs
        .into_iter()
        .map(|p| (p.l, p.lambda_minus, p.lambda_plus))
        .collect())
}

/// Optimizes the probe weights on the simplex; returns a dict with the
/// weights, objective value, and convergence diagnostics.
#[pyfunction]
#[pyo3(signature = (n, eta, objective = "joint", seed = 0))]
fn optimize_probe<'py>(
    py: Python<'py>,
    n: usize,
    eta: f64,
    objective: &str,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let settings = match parse_objective(objective)? {
        Objective::JointDelta => OptimizerSettings::joint(seed),
        Objective::PhaseOnly => OptimizerSettings::phase_only(seed),
    };
    let result = lossphase::optimize(n, eta, &settings).map_err(to_py_err)?;
    let out = PyDict::new(py);
    out.set_item("weights", result.weights)?;
    out.set_item("objective", objective)?;
    out.set_item("objective_value", result.objective_value)?;
    out.set_item("converged", result.converged)?;
    out.set_item("gradient_norm", result.gradient_norm)?;
    out.set_item("active_set", result.active_set)?;
    Ok(out)
}

/// Runs the cross-module self-checks; returns a list of dicts with the
/// check name, worst error, tolerance, and pass flag.
#[pyfunction]
#[pyo3(signature = (n_budget = 4, seed = 0, check = None))]
fn validate<'py>(
    py: Python<'py>,
    n_budget: usize,
    seed: u64,
    check: Option<&str>,
) -> PyResult<Bound<'py, PyList>> {
    let reports = lossphase::run_checks(check, n_budget, seed).map_err(to_py_err)?;
    let out = PyList::empty(py);
    for r in reports {
        let entry = PyDict::new(py);
        entry.set_item("name", r.name)?;
        entry.set_item("measured_error", r.measured_error)?;
        entry.set_item("tolerance", r.tolerance)?;
        entry.set_item("pass", r.pass)?;
        out.append(entry)?;
    }
    Ok(out)
}

#[pymodule]
fn lossphase_py(_py: Python, m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(noon_weights, m)?)?;
    m.add_function(wrap_pyfunction!(hb_weights, m)?)?;
    m.add_function(wrap_pyfunction!(fock_weights, m)?)?;
    m.add_function(wrap_pyfunction!(uniform_weights, m)?)?;
    m.add_function(wrap_pyfunction!(qfi, m)?)?;
    m.add_function(wrap_pyfunction!(measured_fisher, m)?)?;
    m.add_function(wrap_pyfunction!(combined_uncertainty, m)?)?;
    m.add_function(wrap_pyfunction!(commutator, m)?)?;
    m.add_function(wrap_pyfunction!(sld_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_probe, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}

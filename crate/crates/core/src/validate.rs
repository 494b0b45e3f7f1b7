//! Self-check suite: reruns the library's cross-validations (closed forms
//! against the dense oracle, identities, known values) and reports one
//! pass/fail line per check. Backs the `validate` CLI subcommand.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::fisher::{commutator_expectation, measured_fisher_phase_sld, qfi_matrix};
use crate::fock::{evolve, loss_coefficient, ChannelParams, Param};
use crate::gld::{gld_fisher, verify_sld_optimal, GldWeights};
use crate::oracle::{
    density_matrix, density_matrix_derivative, numerical_commutator, numerical_qfi,
    numerical_sld, DerivativeSource,
};
use crate::probes::{fock_probe, noon, random_probe};
use crate::sld::{
    classical_fisher_of_measurement, measurement_distribution, sld_block, sld_eigenbasis,
    sld_eigenpairs,
};

/// Outcome of one self-check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    /// worst error observed across the check's cases
    pub measured_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckReport {
    fn new(name: &'static str, measured_error: f64, tolerance: f64) -> Self {
        CheckReport {
            name,
            measured_error,
            tolerance,
            pass: measured_error.is_finite() && measured_error <= tolerance,
        }
    }
}

impl std::fmt::Display for CheckReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {:<28} max error {:.3e} (tolerance {:.1e})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured_error,
            self.tolerance
        )
    }
}

const ETAS: [f64; 3] = [0.2, 0.5, 0.8];

fn check_qfi_oracle(n_budget: usize, rng: &mut ChaCha8Rng) -> Result<CheckReport> {
    let mut worst = 0.0_f64;
    for n in 2..=n_budget.min(6) {
        for _ in 0..3 {
            let probe = random_probe(n, rng);
            for &eta in &ETAS {
                let closed = qfi_matrix(&probe, eta)?;
                let params = ChannelParams::new(0.4, eta)?;
                let dense = numerical_qfi(&probe, params, DerivativeSource::Analytic)?;
                worst = worst
                    .max((closed.phi_phi - dense.phi_phi).abs())
                    .max((closed.eta_eta - dense.eta_eta).abs())
                    .max(dense.phi_eta.abs());
            }
        }
    }
    Ok(CheckReport::new("qfi-vs-oracle", worst, 1e-8))
}

fn check_tradeoff_identity(n_budget: usize, rng: &mut ChaCha8Rng) -> Result<CheckReport> {
    let mut worst = 0.0_f64;
    for n in [2usize, 5, n_budget.min(20)] {
        for _ in 0..5 {
            let probe = random_probe(n, rng);
            for &eta in &ETAS {
                let q = qfi_matrix(&probe, eta)?;
                let m = measured_fisher_phase_sld(&probe, eta)?;
                let lhs = m.eta_eta + q.phi_phi / (4.0 * eta * eta);
                worst = worst.max((lhs - q.eta_eta).abs() / q.eta_eta.abs().max(1.0));
            }
        }
    }
    Ok(CheckReport::new("tradeoff-identity", worst, 1e-10))
}

fn check_commutator(n_budget: usize, rng: &mut ChaCha8Rng) -> Result<CheckReport> {
    let mut worst = 0.0_f64;
    for n in 2..=n_budget.min(6) {
        let probe = random_probe(n, rng);
        for &eta in &[0.3, 0.7] {
            let closed = commutator_expectation(&probe, eta)?;
            let params = ChannelParams::new(0.9, eta)?;
            let dense = numerical_commutator(&probe, params, DerivativeSource::Analytic)?;
            worst = worst.max((closed - dense).norm());
        }
    }
    Ok(CheckReport::new("commutator-vs-oracle", worst, 1e-7))
}

fn check_sld_spectra(n_budget: usize, rng: &mut ChaCha8Rng) -> Result<CheckReport> {
    let mut worst = 0.0_f64;
    for n in 2..=n_budget.min(5) {
        let probe = random_probe(n, rng);
        let params = ChannelParams::new(0.3, 0.6)?;
        let ens = evolve(&probe, params)?;
        for kappa in Param::BOTH {
            for pair in sld_eigenpairs(&ens, kappa)? {
                if pair.degenerate {
                    continue;
                }
                let block = sld_block(&ens, kappa, pair.l)?;
                let mut eigs: Vec<f64> = block
                    .matrix()
                    .clone()
                    .symmetric_eigen()
                    .eigenvalues
                    .iter()
                    .cloned()
                    .collect();
                eigs.sort_by(f64::total_cmp);
                worst = worst
                    .max((pair.lambda_plus - eigs[eigs.len() - 1]).abs())
                    .max((pair.lambda_minus - eigs[0]).abs());
            }
        }
    }
    Ok(CheckReport::new("sld-spectra", worst, 1e-9))
}

fn check_sld_defining_relation(n_budget: usize, rng: &mut ChaCha8Rng) -> Result<CheckReport> {
    let mut worst = 0.0_f64;
    for n in 2..=n_budget.min(6) {
        let probe = random_probe(n, rng);
        let params = ChannelParams::new(0.8, 0.45)?;
        let rho = density_matrix(&probe, params)?;
        for kappa in Param::BOTH {
            let drho = density_matrix_derivative(&probe, params, kappa)?;
            let sld = numerical_sld(&rho, &drho)?;
            worst = worst.max(sld.residual);
        }
    }
    Ok(CheckReport::new("sld-defining-relation", worst, 1e-7))
}

fn check_gld_sld_point(n_budget: usize, rng: &mut ChaCha8Rng) -> Result<CheckReport> {
    let mut worst = 0.0_f64;
    for n in 2..=n_budget.min(6) {
        let probe = random_probe(n, rng);
        for &eta in &[0.3, 0.7] {
            let g = gld_fisher(&probe, eta, GldWeights::sld())?;
            let q = qfi_matrix(&probe, eta)?;
            worst = worst
                .max((g.phi_phi - q.phi_phi).abs())
                .max((g.eta_eta - q.eta_eta).abs())
                .max(g.phi_eta.norm());
        }
    }
    Ok(CheckReport::new("gld-reduces-to-qfi", worst, 1e-12))
}

fn check_gld_grid(rng: &mut ChaCha8Rng) -> Result<CheckReport> {
    let probe = random_probe(4, rng);
    let report = verify_sld_optimal(&probe, 0.5, 11, &[[1.0, 1.0], [1.0, 0.0], [0.0, 1.0]])?;
    let pass = report.all_pass();
    Ok(CheckReport::new(
        "gld-grid-argmax",
        if pass { 0.0 } else { 1.0 },
        0.5,
    ))
}

fn check_measurement_cfi(n_budget: usize, rng: &mut ChaCha8Rng) -> Result<CheckReport> {
    let mut worst = 0.0_f64;
    for n in 2..=n_budget.min(5) {
        let probe = random_probe(n, rng);
        let params = ChannelParams::new(0.4, 0.6)?;
        let ens = evolve(&probe, params)?;
        let basis = sld_eigenbasis(&ens, Param::Phase)?;
        let dist = measurement_distribution(&ens, &basis)?;
        let cfi = classical_fisher_of_measurement(&probe, params, &basis)?;
        let closed = qfi_matrix(&probe, params.eta)?.phi_phi;
        worst = worst.max((cfi.phi_phi - closed).abs() / closed.abs().max(1.0));
        // sanity: the distribution must be normalized
        let total: f64 = dist.probabilities().iter().sum();
        worst = worst.max((total - 1.0).abs());
    }
    Ok(CheckReport::new("phase-sld-measurement-cfi", worst, 1e-5))
}

fn check_known_values(n_budget: usize) -> Result<CheckReport> {
    let mut worst = 0.0_f64;
    for n in [2usize, 4, n_budget.min(10)] {
        let probe = fock_probe(n)?;
        for &eta in &ETAS {
            let q = qfi_matrix(&probe, eta)?;
            let expect = n as f64 / (eta * (1.0 - eta));
            worst = worst.max((q.eta_eta - expect).abs() / expect);
        }
        let probe = noon(n)?;
        let q = qfi_matrix(&probe, 1.0 - 1e-9)?;
        let expect = (n * n) as f64;
        worst = worst.max((q.phi_phi - expect).abs() / expect);
    }
    Ok(CheckReport::new("known-probe-values", worst, 1e-4))
}

fn check_loss_weights() -> Result<CheckReport> {
    let mut worst = 0.0_f64;
    for &eta in &[0.1, 0.5, 0.9] {
        for k in [0usize, 1, 50, 200] {
            let s: f64 = (0..=k)
                .map(|l| loss_coefficient(k, l, eta).unwrap())
                .sum();
            worst = worst.max((s - 1.0).abs());
        }
    }
    Ok(CheckReport::new("loss-weight-normalization", worst, 1e-10))
}

fn check_block_decomposition(n_budget: usize, rng: &mut ChaCha8Rng) -> Result<CheckReport> {
    let mut worst = 0.0_f64;
    for n in 2..=n_budget.min(8) {
        let probe = random_probe(n, rng);
        let params = ChannelParams::new(1.1, 0.35)?;
        let ens = evolve(&probe, params)?;
        let total: f64 = ens.probabilities().iter().sum();
        worst = worst.max((total - 1.0).abs());
        for block in ens.occupied_blocks() {
            let norm: f64 = block.amplitudes().iter().map(|c| c.norm_sqr()).sum();
            worst = worst.max((norm - 1.0).abs());
        }
        if n <= crate::tol::TOL.dense_budget {
            let rho = density_matrix(&probe, params)?;
            worst = worst.max((rho.trace() - num_complex::Complex64::new(1.0, 0.0)).norm());
        }
    }
    Ok(CheckReport::new("block-decomposition", worst, 1e-10))
}

/// Runs the self-check suite. `filter` keeps checks whose name contains the
/// substring; `n_budget` caps photon numbers; `seed` fixes the random probes.
pub fn run_checks(filter: Option<&str>, n_budget: usize, seed: u64) -> Result<Vec<CheckReport>> {
    let n_budget = n_budget.max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reports = vec![
        check_loss_weights()?,
        check_block_decomposition(n_budget, &mut rng)?,
        check_qfi_oracle(n_budget, &mut rng)?,
        check_tradeoff_identity(n_budget, &mut rng)?,
        check_commutator(n_budget, &mut rng)?,
        check_sld_spectra(n_budget, &mut rng)?,
        check_sld_defining_relation(n_budget, &mut rng)?,
        check_gld_sld_point(n_budget, &mut rng)?,
        check_gld_grid(&mut rng)?,
        check_measurement_cfi(n_budget, &mut rng)?,
        check_known_values(n_budget)?,
    ];
    if let Some(pat) = filter {
        reports.retain(|r| r.name.contains(pat));
    }
    Ok(reports)
}

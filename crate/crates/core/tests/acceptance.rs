//! Acceptance gate: one test per shipping criterion, each printing a single
//! pass/fail line with the measured error and the pinned tolerance. Run with
//! `cargo test --test acceptance -- --nocapture` to see every line.

use std::time::Instant;

use lossphase::fisher::{
    combined_uncertainty, commutator_expectation, measured_fisher_phase_sld, qfi_matrix,
};
use lossphase::fock::{evolve, ChannelParams, Param, ProbeState};
use lossphase::gld::{gld_fisher, verify_sld_optimal, GldWeights};
use lossphase::optimizer::{optimize, OptimizerSettings};
use lossphase::oracle::{numerical_commutator, numerical_qfi, DerivativeSource};
use lossphase::probes::{fock_probe, holland_burnett, noon, random_probe, uniform};
use lossphase::sld::{classical_fisher_of_measurement, sld_block, sld_eigenbasis, sld_eigenpairs};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn check(name: &str, err: f64, tol: f64) {
    let pass = err.is_finite() && err <= tol;
    println!(
        "{} {}: max error {:.3e} (tolerance {:.1e})",
        if pass { "PASS" } else { "FAIL" },
        name,
        err,
        tol
    );
    assert!(pass, "{name}: {err:.3e} > {tol:.1e}");
}

fn check_time(name: &str, elapsed_s: f64, budget_s: f64) {
    let pass = elapsed_s < budget_s;
    println!(
        "{} {}: {:.1} s (budget {:.0} s)",
        if pass { "PASS" } else { "FAIL" },
        name,
        elapsed_s,
        budget_s
    );
    assert!(pass, "{name}: {elapsed_s:.1} s >= {budget_s:.0} s");
}

const ETAS: [f64; 3] = [0.2, 0.5, 0.8];

fn random_sweep(seed: u64, count: usize, max_n: usize) -> Vec<ProbeState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(2..=max_n);
            random_probe(n, &mut rng)
        })
        .collect()
}

#[test]
fn criterion_01_diagonal_qfi() {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for probe in random_sweep(101, 200, 10) {
        for &eta in &ETAS {
            let closed = qfi_matrix(&probe, eta).unwrap();
            assert_eq!(closed.phi_eta, 0.0);
            let params = ChannelParams::new(0.7, eta).unwrap();
            let dense = numerical_qfi(&probe, params, DerivativeSource::Analytic).unwrap();
            worst = worst.max(dense.phi_eta.abs());
        }
    }
    check("criterion-01 diagonal-qfi off-diagonal", worst, 1e-8);
    check_time("criterion-01 runtime", start.elapsed().as_secs_f64(), 30.0);
}

#[test]
fn criterion_02_closed_form_vs_oracle_qfi() {
    let start = Instant::now();
    let mut worst_analytic = 0.0_f64;
    let mut worst_fd = 0.0_f64;
    for probe in random_sweep(102, 200, 10) {
        for &eta in &ETAS {
            let closed = qfi_matrix(&probe, eta).unwrap();
            let params = ChannelParams::new(0.4, eta).unwrap();
            let a = numerical_qfi(&probe, params, DerivativeSource::Analytic).unwrap();
            worst_analytic = worst_analytic
                .max((a.phi_phi - closed.phi_phi).abs() / closed.phi_phi.max(1.0))
                .max((a.eta_eta - closed.eta_eta).abs() / closed.eta_eta.max(1.0));
        }
    }
    // the finite-difference route is slower, so it samples the sweep
    for probe in random_sweep(112, 40, 10) {
        for &eta in &ETAS {
            let closed = qfi_matrix(&probe, eta).unwrap();
            let params = ChannelParams::new(0.4, eta).unwrap();
            let f = numerical_qfi(&probe, params, DerivativeSource::FiniteDifference).unwrap();
            worst_fd = worst_fd
                .max((f.phi_phi - closed.phi_phi).abs() / closed.phi_phi.max(1.0))
                .max((f.eta_eta - closed.eta_eta).abs() / closed.eta_eta.max(1.0));
        }
    }
    check("criterion-02 oracle-qfi analytic", worst_analytic, 1e-8);
    check("criterion-02 oracle-qfi finite-diff", worst_fd, 1e-5);
    check_time("criterion-02 runtime", start.elapsed().as_secs_f64(), 120.0);
}

fn library_probes(n: usize) -> Vec<ProbeState> {
    let mut probes = vec![
        noon(n).unwrap(),
        fock_probe(n).unwrap(),
        uniform(n).unwrap(),
    ];
    if n % 2 == 0 {
        probes.push(holland_burnett(n).unwrap());
    }
    probes
}

#[test]
fn criterion_03_tradeoff_identity() {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    let mut probes: Vec<ProbeState> = Vec::new();
    for n in 2..=20 {
        probes.extend(library_probes(n));
    }
    probes.extend(random_sweep(103, 100, 20));
    for probe in &probes {
        for &eta in &ETAS {
            let q = qfi_matrix(probe, eta).unwrap();
            let m = measured_fisher_phase_sld(probe, eta).unwrap();
            let lhs = m.eta_eta + q.phi_phi / (4.0 * eta * eta);
            worst = worst.max((lhs - q.eta_eta).abs() / q.eta_eta.max(1.0));
        }
    }
    check("criterion-03 tradeoff-identity", worst, 1e-10);
    check_time("criterion-03 runtime", start.elapsed().as_secs_f64(), 10.0);
}

#[test]
fn criterion_04_commutator_witness() {
    let mut worst = 0.0_f64;
    for probe in random_sweep(104, 30, 8) {
        for &eta in &[0.3, 0.5, 0.7] {
            let params = ChannelParams::new(0.6, eta).unwrap();
            let closed = commutator_expectation(&probe, eta).unwrap();
            let dense = numerical_commutator(&probe, params, DerivativeSource::Analytic).unwrap();
            worst = worst.max((closed - dense).norm());
            // structure: purely imaginary, i I_phiphi / eta
            let q = qfi_matrix(&probe, eta).unwrap();
            assert_eq!(closed.re, 0.0);
            worst = worst.max((closed.im - q.phi_phi / eta).abs());
        }
    }
    check("criterion-04 commutator-witness", worst, 1e-7);
}

#[test]
fn criterion_05_measurement_level() {
    let mut worst_phi = 0.0_f64;
    let mut worst_eta_phi_entry = 0.0_f64;
    let mut worst_eta = 0.0_f64;
    let mut probes = library_probes(4);
    probes.retain(|p| qfi_matrix(p, 0.5).unwrap().phi_phi > 1e-9);
    probes.extend(random_sweep(105, 10, 6));
    for probe in &probes {
        for &eta in &[0.3, 0.6] {
            let params = ChannelParams::new(0.5, eta).unwrap();
            let ens = evolve(probe, params).unwrap();
            let q = qfi_matrix(probe, eta).unwrap();
            let m = measured_fisher_phase_sld(probe, eta).unwrap();

            let phase_basis = sld_eigenbasis(&ens, Param::Phase).unwrap();
            let f = classical_fisher_of_measurement(probe, params, &phase_basis).unwrap();
            worst_phi = worst_phi
                .max((f.phi_phi - q.phi_phi).abs() / q.phi_phi.max(1.0))
                .max((f.eta_eta - m.eta_eta).abs() / m.eta_eta.max(1.0));

            let loss_basis = sld_eigenbasis(&ens, Param::Loss).unwrap();
            let f = classical_fisher_of_measurement(probe, params, &loss_basis).unwrap();
            worst_eta_phi_entry = worst_eta_phi_entry.max(f.phi_phi.abs());
            worst_eta = worst_eta.max((f.eta_eta - q.eta_eta).abs() / q.eta_eta.max(1.0));
        }
    }
    check("criterion-05 phase-sld cfi", worst_phi, 1e-5);
    check("criterion-05 loss-sld phase entry", worst_eta_phi_entry, 1e-6);
    check("criterion-05 loss-sld eta entry", worst_eta, 1e-5);
}

#[test]
fn criterion_06_sld_spectra() {
    let mut worst = 0.0_f64;
    for probe in random_sweep(106, 25, 8) {
        let params = ChannelParams::new(0.2, 0.55).unwrap();
        let ens = evolve(&probe, params).unwrap();
        for kappa in Param::BOTH {
            for pair in sld_eigenpairs(&ens, kappa).unwrap() {
                if pair.degenerate {
                    continue;
                }
                let block = sld_block(&ens, kappa, pair.l).unwrap();
                let mut dense: Vec<f64> = block
                    .matrix()
                    .clone()
                    .symmetric_eigen()
                    .eigenvalues
                    .iter()
                    .cloned()
                    .collect();
                dense.sort_by(f64::total_cmp);
                worst = worst
                    .max((pair.lambda_plus - dense[dense.len() - 1]).abs())
                    .max((pair.lambda_minus - dense[0]).abs());
                // eigenvector check through the block action
                for (lambda, vec) in [
                    (pair.lambda_plus, pair.vec_plus.as_ref().unwrap()),
                    (pair.lambda_minus, pair.vec_minus.as_ref().unwrap()),
                ] {
                    let applied = block.apply(vec);
                    for (a, v) in applied.iter().zip(vec.iter()) {
                        worst = worst.max((a - num_complex::Complex64::new(lambda, 0.0) * v).norm());
                    }
                }
            }
        }
    }
    check("criterion-06 sld-spectra", worst, 1e-9);
}

#[test]
fn criterion_07_gld_optimality() {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let u_samples: Vec<[f64; 2]> = (0..5)
        .map(|_| {
            let angle: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            [angle.cos(), angle.sin()]
        })
        .collect();
    let mut worst_sld_point = 0.0_f64;
    let mut all_within = true;
    for n in [4usize, 6] {
        for probe in [noon(n).unwrap(), random_probe(n, &mut rng)] {
            for &eta in &[0.3, 0.5] {
                let report = verify_sld_optimal(&probe, eta, 21, &u_samples).unwrap();
                all_within &= report.all_pass();
                let g = gld_fisher(&probe, eta, GldWeights::sld()).unwrap();
                let q = qfi_matrix(&probe, eta).unwrap();
                worst_sld_point = worst_sld_point
                    .max((g.phi_phi - q.phi_phi).abs())
                    .max((g.eta_eta - q.eta_eta).abs())
                    .max(g.phi_eta.norm());
            }
        }
    }
    check(
        "criterion-07 gld-grid argmax at (1/2,1/2)",
        if all_within { 0.0 } else { 1.0 },
        0.5,
    );
    check("criterion-07 gld equals qfi at (1/2,1/2)", worst_sld_point, 1e-12);
}

#[test]
fn criterion_08_known_endpoints() {
    let mut worst_noon = 0.0_f64;
    let mut worst_fock = 0.0_f64;
    for n in [2usize, 4, 6, 10] {
        let q = qfi_matrix(&noon(n).unwrap(), 1.0 - 1e-9).unwrap();
        worst_noon = worst_noon.max((q.phi_phi - (n * n) as f64).abs() / (n * n) as f64);
        for &eta in &ETAS {
            let q = qfi_matrix(&fock_probe(n).unwrap(), eta).unwrap();
            let expect = n as f64 / (eta * (1.0 - eta));
            worst_fock = worst_fock
                .max((q.eta_eta - expect).abs() / expect)
                .max(q.phi_phi.abs());
        }
    }
    check("criterion-08 noon phase endpoint", worst_noon, 1e-4);
    check("criterion-08 fock loss information", worst_fock, 1e-12);
}

fn eta_grid_09() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}

#[test]
fn criterion_09_optimizer_dominance() {
    let start = Instant::now();
    let n = 6;
    let mut worst_margin = f64::NEG_INFINITY;
    let mut worst_hb_moderate = 0.0_f64;
    let mut worst_hb_anywhere = 0.0_f64;
    let mut hb_beats_noon = true;
    for eta in eta_grid_09() {
        let joint = optimize(n, eta, &OptimizerSettings::joint(109)).unwrap();
        let phase = optimize(n, eta, &OptimizerSettings::phase_only(109)).unwrap();
        let delta_opt = joint.objective_value;

        let nn = combined_uncertainty(&noon(n).unwrap(), eta).unwrap().delta_total;
        let hb = combined_uncertainty(&holland_burnett(n).unwrap(), eta)
            .unwrap()
            .delta_total;
        let phase_probe = ProbeState::from_weights(&phase.weights, None).unwrap();
        let phase_delta = combined_uncertainty(&phase_probe, eta).unwrap().delta_total;
        for rival in [nn, hb, phase_delta] {
            worst_margin = worst_margin.max((delta_opt - rival) / rival.max(1e-12));
        }
        // HB tracks the optimum closely at moderate-to-low loss and degrades
        // toward heavy loss, where the optimum migrates to the Fock corner;
        // it beats the n00n probe everywhere loss is appreciable
        let ratio = hb / delta_opt - 1.0;
        worst_hb_anywhere = worst_hb_anywhere.max(ratio);
        if eta >= 0.35 {
            worst_hb_moderate = worst_hb_moderate.max(ratio);
        }
        if eta <= 0.75 {
            hb_beats_noon &= hb < nn;
        }
    }
    check("criterion-09 joint-opt dominates", worst_margin.max(0.0), 1e-8);
    check("criterion-09 hb near-optimal, eta >= 0.35", worst_hb_moderate, 0.25);
    check("criterion-09 hb/optimal bounded on full grid", worst_hb_anywhere, 0.50);
    check(
        "criterion-09 hb beats noon under loss",
        if hb_beats_noon { 0.0 } else { 1.0 },
        0.5,
    );
    check_time("criterion-09 runtime", start.elapsed().as_secs_f64(), 300.0);
}

#[test]
fn criterion_10_lossy_arm_weight_shift() {
    let n = 6;
    let mut worst = f64::NEG_INFINITY;
    for eta in eta_grid_09() {
        let joint = optimize(n, eta, &OptimizerSettings::joint(110)).unwrap();
        let phase = optimize(n, eta, &OptimizerSettings::phase_only(110)).unwrap();
        worst = worst.max(phase.weights[n] - joint.weights[n]);
    }
    check("criterion-10 joint x_n >= phase x_n", worst.max(0.0), 1e-9);
}

#[test]
fn criterion_11_phase_penalty_bound() {
    let start = Instant::now();
    let eta = 0.9;
    let mut worst = 0.0_f64;
    for n in [5usize, 10, 50] {
        let joint = optimize(n, eta, &OptimizerSettings::joint(111)).unwrap();
        let phase = optimize(n, eta, &OptimizerSettings::phase_only(111)).unwrap();
        let joint_probe = ProbeState::from_weights(&joint.weights, None).unwrap();
        let dphi_joint = 1.0 / qfi_matrix(&joint_probe, eta).unwrap().phi_phi.sqrt();
        let dphi_phase = 1.0 / phase.objective_value.sqrt();
        worst = worst.max(dphi_joint / dphi_phase - 1.0);
    }
    check("criterion-11 phase penalty < 20%", worst, 0.20);
    check_time("criterion-11 runtime", start.elapsed().as_secs_f64(), 600.0);
}

#[test]
fn criterion_12_brute_force_check() {
    let eta = 0.4;
    let result = optimize(2, eta, &OptimizerSettings::joint(112)).unwrap();
    let steps = 1000usize;
    let mut best = f64::INFINITY;
    for i in 0..=steps {
        for j in 0..=(steps - i) {
            let x = [
                i as f64 / steps as f64,
                j as f64 / steps as f64,
                (steps - i - j) as f64 / steps as f64,
            ];
            if x.iter().all(|&v| v >= 0.0) {
                let Ok(probe) = ProbeState::from_weights(&x, None) else {
                    continue;
                };
                let u = combined_uncertainty(&probe, eta).unwrap();
                if u.delta_total < best {
                    best = u.delta_total;
                }
            }
        }
    }
    check(
        "criterion-12 n=2 vs exhaustive grid",
        (result.objective_value - best).abs(),
        1e-3,
    );
}

#[test]
fn criterion_13_scale() {
    let n = 200;
    // closed-form Fisher evaluation speed
    let mut rng = ChaCha8Rng::seed_from_u64(113);
    let probe = random_probe(n, &mut rng);
    let reps = 50;
    let start = Instant::now();
    let mut sink = 0.0;
    for i in 0..reps {
        let eta = 0.2 + 0.6 * (i as f64 / reps as f64);
        sink += qfi_matrix(&probe, eta).unwrap().phi_phi;
        sink += measured_fisher_phase_sld(&probe, eta).unwrap().eta_eta;
    }
    let per_eval_ms = start.elapsed().as_secs_f64() * 1e3 / reps as f64;
    assert!(sink.is_finite());
    check("criterion-13 fisher eval ms at n=200", per_eval_ms, 10.0);

    let start = Instant::now();
    let result = optimize(n, 0.5, &OptimizerSettings::joint(113)).unwrap();
    assert!(result.weights.iter().all(|w| w.is_finite()));
    check_time(
        "criterion-13 n=200 joint optimization",
        start.elapsed().as_secs_f64(),
        600.0,
    );
}

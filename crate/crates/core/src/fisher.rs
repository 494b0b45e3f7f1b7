//! Closed-form quantum and classical Fisher information for joint phase and
//! loss estimation, the trade-off between them, and the commutator witness
//! that rules out saturating both bounds at once.
//!
//! Every quantity here is a function of the weights `x_k` and eta alone; the
//! phase phi and the amplitude phases drop out of all closed forms.

use num_complex::Complex64;

use crate::error::Result;
use crate::fock::{moments, require_interior_eta, MomentTable, ProbeState};

/// 2x2 real symmetric information matrix over the parameter order (phi, eta).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherMatrix {
    pub phi_phi: f64,
    pub eta_eta: f64,
    pub phi_eta: f64,
}

impl FisherMatrix {
    pub fn diagonal(phi_phi: f64, eta_eta: f64) -> Self {
        FisherMatrix {
            phi_phi,
            eta_eta,
            phi_eta: 0.0,
        }
    }

    pub fn to_array(&self) -> [[f64; 2]; 2] {
        [
            [self.phi_phi, self.phi_eta],
            [self.phi_eta, self.eta_eta],
        ]
    }
}

/// Per-parameter precision and the combined figure of merit
/// `delta = sqrt(dphi^2 + deta^2)`. Zero information shows up as infinity.
#[derive(Debug, Clone, Copy)]
pub struct PrecisionSummary {
    pub delta_phi: f64,
    pub delta_eta: f64,
    pub delta_total: f64,
}

impl PrecisionSummary {
    pub fn is_finite(&self) -> bool {
        self.delta_total.is_finite()
    }
}

/// The quantum Fisher information matrix:
/// `I_phiphi = 4 (Xi_2 - sum_l xi_{1,l}^2 / xi_{0,l})`,
/// `I_etaeta = Xi_1 / (eta (1 - eta))`, off-diagonals zero.
pub fn qfi_matrix(probe: &ProbeState, eta: f64) -> Result<FisherMatrix> {
    Ok(qfi_from_moments(&moments(probe, eta)?))
}

pub fn qfi_from_moments(m: &MomentTable) -> FisherMatrix {
    let eta = m.eta();
    FisherMatrix::diagonal(
        4.0 * m.phase_variance_term(),
        m.big_xi(1) / (eta * (1.0 - eta)),
    )
}

/// Classical Fisher information of the sector distribution `{p_l}` alone.
/// The phase entries vanish because `p_l` carries no phi dependence.
pub fn classical_fisher_p(probe: &ProbeState, eta: f64) -> Result<FisherMatrix> {
    Ok(classical_fisher_p_from_moments(&moments(probe, eta)?))
}

pub fn classical_fisher_p_from_moments(m: &MomentTable) -> FisherMatrix {
    FisherMatrix::diagonal(0.0, m.classical_loss_fisher())
}

/// Fisher information extracted by measuring in the phase-SLD eigenbasis:
/// tight to the quantum bound for phi, while the loss entry drops to the
/// classical Fisher of `{p_l}` (equivalently `I_etaeta - I_phiphi/(4 eta^2)`).
///
/// The loss entry is computed by the direct sector sum rather than the
/// subtracted form, which cancels catastrophically when the penalty nearly
/// exhausts the loss information.
pub fn measured_fisher_phase_sld(probe: &ProbeState, eta: f64) -> Result<FisherMatrix> {
    Ok(measured_phase_sld_from_moments(&moments(probe, eta)?))
}

pub fn measured_phase_sld_from_moments(m: &MomentTable) -> FisherMatrix {
    FisherMatrix::diagonal(4.0 * m.phase_variance_term(), m.classical_loss_fisher())
}

/// Fisher information extracted by measuring in the loss-SLD eigenbasis: the
/// full quantum bound for eta and nothing at all about the phase.
pub fn measured_fisher_loss_sld(probe: &ProbeState, eta: f64) -> Result<FisherMatrix> {
    let m = moments(probe, eta)?;
    Ok(FisherMatrix::diagonal(
        0.0,
        m.big_xi(1) / (eta * (1.0 - eta)),
    ))
}

/// Expectation of the SLD commutator, `tr(rho [L_eta, L_phi]) = i
/// I_phiphi/eta`. Per occupied sector the expectation is `4i Var_l(k)/eta`,
/// which the dense numerical SLDs reproduce. It vanishes only when the probe
/// carries no phase information, so the joint quantum bound is otherwise
/// unattainable.
pub fn commutator_expectation(probe: &ProbeState, eta: f64) -> Result<Complex64> {
    let m = moments(probe, eta)?;
    let i_phi = 4.0 * m.phase_variance_term();
    Ok(Complex64::new(0.0, i_phi / eta))
}

/// Combined uncertainty built from the quantum phase information and the
/// measured (phase-SLD) loss information. Zero information in either
/// parameter yields infinite uncertainties, not an error.
pub fn combined_uncertainty(probe: &ProbeState, eta: f64) -> Result<PrecisionSummary> {
    let m = moments(probe, eta)?;
    Ok(precision_from_moments(&m))
}

pub fn precision_from_moments(m: &MomentTable) -> PrecisionSummary {
    let f = measured_phase_sld_from_moments(m);
    precision_from_entries(f.phi_phi, f.eta_eta)
}

pub fn precision_from_entries(i_phi_phi: f64, i_eta_eta: f64) -> PrecisionSummary {
    let delta_phi = if i_phi_phi > 0.0 {
        i_phi_phi.sqrt().recip()
    } else {
        f64::INFINITY
    };
    let delta_eta = if i_eta_eta > 0.0 {
        i_eta_eta.sqrt().recip()
    } else {
        f64::INFINITY
    };
    PrecisionSummary {
        delta_phi,
        delta_eta,
        delta_total: (delta_phi * delta_phi + delta_eta * delta_eta).sqrt(),
    }
}

/// Shared domain check re-exported for callers that pre-validate.
pub fn check_eta(eta: f64) -> Result<()> {
    require_interior_eta(eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probes::{fock_probe, holland_burnett, noon, random_probe};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fock_probe_qfi() {
        let probe = fock_probe(6).unwrap();
        let f = qfi_matrix(&probe, 0.5).unwrap();
        assert_relative_eq!(f.eta_eta, 24.0, epsilon = 1e-12);
        assert!(f.phi_phi.abs() < 1e-12);
        assert_eq!(f.phi_eta, 0.0);

        let f = qfi_matrix(&probe, 0.25).unwrap();
        assert_relative_eq!(f.eta_eta, 32.0, epsilon = 1e-12);
    }

    #[test]
    fn noon_phase_qfi_near_lossless() {
        let probe = noon(6).unwrap();
        let f = qfi_matrix(&probe, 1.0 - 1e-9).unwrap();
        assert_relative_eq!(f.phi_phi, 36.0, max_relative = 1e-4);
    }

    #[test]
    fn qfi_rejects_endpoints() {
        let probe = noon(4).unwrap();
        assert!(qfi_matrix(&probe, 0.0).is_err());
        assert!(qfi_matrix(&probe, 1.0).is_err());
    }

    #[test]
    fn fock_classical_fisher_equals_full_qfi() {
        let probe = fock_probe(5).unwrap();
        for &eta in &[0.2, 0.5, 0.8] {
            let c = classical_fisher_p(&probe, eta).unwrap();
            assert_relative_eq!(c.eta_eta, 5.0 / (eta * (1.0 - eta)), epsilon = 1e-10);
            assert_eq!(c.phi_phi, 0.0);
        }
    }

    #[test]
    fn classical_fisher_matches_finite_differences() {
        let probe = ProbeState::from_weights(&[0.5, 0.5], None).unwrap();
        let eta = 0.5;
        let c = classical_fisher_p(&probe, eta).unwrap();
        // central differences on p_l(eta)
        let h = 1e-5;
        let p = |e: f64| {
            crate::fock::evolve(&probe, crate::fock::ChannelParams::new(0.0, e).unwrap())
                .unwrap()
                .probabilities()
        };
        let (pp, pm, p0) = (p(eta + h), p(eta - h), p(eta));
        let mut fd = 0.0;
        for l in 0..p0.len() {
            if p0[l] > 0.0 {
                let d = (pp[l] - pm[l]) / (2.0 * h);
                fd += d * d / p0[l];
            }
        }
        assert_relative_eq!(c.eta_eta, fd, max_relative = 1e-6);
    }

    #[test]
    fn tradeoff_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2usize, 5, 9] {
            for &eta in &[0.1, 0.5, 0.9] {
                let probe = random_probe(n, &mut rng);
                let q = qfi_matrix(&probe, eta).unwrap();
                let m = measured_fisher_phase_sld(&probe, eta).unwrap();
                assert_relative_eq!(
                    m.eta_eta + q.phi_phi / (4.0 * eta * eta),
                    q.eta_eta,
                    max_relative = 1e-10
                );
                assert_relative_eq!(m.phi_phi, q.phi_phi, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn loss_sld_measurement_entries() {
        let probe = noon(4).unwrap();
        let f = measured_fisher_loss_sld(&probe, 0.5).unwrap();
        let q = qfi_matrix(&probe, 0.5).unwrap();
        assert_eq!(f.phi_phi, 0.0);
        assert_eq!(f.phi_eta, 0.0);
        assert_relative_eq!(f.eta_eta, q.eta_eta, epsilon = 1e-14);
    }

    #[test]
    fn commutator_values() {
        let probe = fock_probe(4).unwrap();
        let c = commutator_expectation(&probe, 0.6).unwrap();
        assert!(c.norm() < 1e-12);

        let probe = noon(6).unwrap();
        let q = qfi_matrix(&probe, 0.5).unwrap();
        let c = commutator_expectation(&probe, 0.5).unwrap();
        assert_eq!(c.re, 0.0);
        assert_relative_eq!(c.im, 2.0 * q.phi_phi, epsilon = 1e-12);
        // value/i >= 0: nonzero whenever the probe senses the phase
        assert!(c.im >= 0.0);
    }

    #[test]
    fn fock_uncertainty_is_infinite_in_phase() {
        let probe = fock_probe(6).unwrap();
        let u = combined_uncertainty(&probe, 0.5).unwrap();
        assert!(u.delta_phi.is_infinite());
        assert!(!u.is_finite());
        assert!(u.delta_eta.is_finite());
    }

    #[test]
    fn holland_burnett_uncertainty_composition() {
        let probe = holland_burnett(6).unwrap();
        let u = combined_uncertainty(&probe, 0.5).unwrap();
        assert!(u.is_finite());
        let q = qfi_matrix(&probe, 0.5).unwrap();
        let m = measured_fisher_phase_sld(&probe, 0.5).unwrap();
        let expect = (1.0 / q.phi_phi + 1.0 / m.eta_eta).sqrt();
        assert_relative_eq!(u.delta_total, expect, epsilon = 1e-12);
        assert_relative_eq!(
            u.delta_total * u.delta_total,
            u.delta_phi * u.delta_phi + u.delta_eta * u.delta_eta,
            epsilon = 1e-15
        );
    }

    #[test]
    fn phase_and_phi_independence() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let weights = [0.3, 0.1, 0.25, 0.35];
        let flat = ProbeState::from_weights(&weights, None).unwrap();
        use rand::Rng;
        let phases: Vec<f64> = (0..4).map(|_| rng.random::<f64>() * 6.28).collect();
        let twisted = ProbeState::from_weights(&weights, Some(&phases)).unwrap();
        for &eta in &[0.2, 0.7] {
            let a = qfi_matrix(&flat, eta).unwrap();
            let b = qfi_matrix(&twisted, eta).unwrap();
            assert_relative_eq!(a.phi_phi, b.phi_phi, epsilon = 1e-12);
            assert_relative_eq!(a.eta_eta, b.eta_eta, epsilon = 1e-12);
        }
    }

    use crate::fock::ProbeState;
}

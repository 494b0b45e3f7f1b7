//! Brute-force validation path: full density matrices in the joint Fock
//! basis, numerically solved SLDs, and numerical Fisher information — the
//! ground truth every closed form is checked against.
//!
//! The density matrix is assembled from the beamsplitter-with-vacuum
//! dilation followed by a partial trace over the loss mode, deliberately not
//! through the normalized sector states.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fisher::FisherMatrix;
use crate::fock::{
    evolve, loss_coefficient, BasisMap, ChannelParams, Param, ProbeState,
};
use crate::tol::TOL;

/// Derivative route for the numerical QFI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeSource {
    /// Analytic sector derivatives assembled into the global basis.
    Analytic,
    /// Symmetric differences of the dilation at steps 1e-4 and 1e-5 with a
    /// Richardson combination; fully independent of the analytic path.
    FiniteDifference,
}

/// A dense density matrix over the global post-loss basis.
#[derive(Debug, Clone)]
pub struct DenseState {
    map: BasisMap,
    rho: DMatrix<Complex64>,
}

impl DenseState {
    pub fn rho(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub fn map(&self) -> &BasisMap {
        &self.map
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.rho[(i, i)]).sum()
    }

    /// Trace, Hermiticity and positivity checks at oracle tolerances.
    pub fn validate(&self) -> Result<()> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::NumericalQuality {
                context: "density matrix trace".into(),
                residual: (tr - Complex64::new(1.0, 0.0)).norm(),
                tolerance: 1e-10,
            });
        }
        for r in 0..self.dim() {
            for c in 0..self.dim() {
                let herm = (self.rho[(r, c)] - self.rho[(c, r)].conj()).norm();
                if herm > TOL.construction {
                    return Err(Error::NumericalQuality {
                        context: "density matrix hermiticity".into(),
                        residual: herm,
                        tolerance: TOL.construction,
                    });
                }
            }
        }
        let eig = self.rho.clone().symmetric_eigen();
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -1e-10 {
            return Err(Error::NumericalQuality {
                context: "density matrix positivity".into(),
                residual: -min,
                tolerance: 1e-10,
            });
        }
        Ok(())
    }
}

fn check_budget(n: usize) -> Result<()> {
    if n > TOL.dense_budget {
        Err(Error::DenseBudget {
            n,
            budget: TOL.dense_budget,
        })
    } else {
        Ok(())
    }
}

/// Builds `rho(phi, eta)` by dilating the loss into a beamsplitter with a
/// vacuum mode and tracing the lost photons. Endpoint eta values are allowed
/// here; only Fisher quantities require the open interval.
pub fn density_matrix(probe: &ProbeState, params: ChannelParams) -> Result<DenseState> {
    check_budget(probe.n())?;
    let n = probe.n();
    let map = BasisMap::new(n);
    let dim = map.dim();
    let alphas = probe.amplitudes();
    let mut rho = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    // |Psi> = sum_k alpha_k e^{i k phi} sum_{l<=k} sqrt(b_l^k) |k-l, n-k>|l>_L
    // summing the outer product over the loss index l gives the partial trace
    for l in 0..=n {
        let mut v = DVector::from_element(dim, Complex64::new(0.0, 0.0));
        for k in l..=n {
            let b = loss_coefficient(k, l, params.eta)?;
            v[map.global_index(l, k - l)] =
                alphas[k] * b.sqrt() * Complex64::from_polar(1.0, k as f64 * params.phi);
        }
        for r in 0..dim {
            if v[r].norm_sqr() == 0.0 {
                continue;
            }
            for c in 0..dim {
                rho[(r, c)] += v[r] * v[c].conj();
            }
        }
    }
    Ok(DenseState { map, rho })
}

/// Analytic `d rho / d theta_kappa` assembled from the closed-form sector
/// states and their derivatives.
pub fn density_matrix_derivative(
    probe: &ProbeState,
    params: ChannelParams,
    kappa: Param,
) -> Result<DMatrix<Complex64>> {
    check_budget(probe.n())?;
    let ens = evolve(probe, params)?;
    let map = ens.basis_map();
    let dim = map.dim();
    let mut drho = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for block in ens.occupied_blocks() {
        let l = block.l;
        let offset = map.block_offset(l);
        let psi = ens.psi(l)?;
        let dpsi = ens.dpsi(l, kappa)?;
        let p = block.probability;
        let dp = ens.dp(l, kappa);
        for (r, (pr, dr)) in psi.iter().zip(dpsi.iter()).enumerate() {
            for (c, (pc, dc)) in psi.iter().zip(dpsi.iter()).enumerate() {
                drho[(offset + r, offset + c)] +=
                    dp * pr * pc.conj() + p * (dr * pc.conj() + pr * dc.conj());
            }
        }
    }
    Ok(drho)
}

/// `d rho` by symmetric differences of the dilation, Richardson-combined
/// across steps 1e-4 and 1e-5.
pub fn density_matrix_derivative_fd(
    probe: &ProbeState,
    params: ChannelParams,
    kappa: Param,
) -> Result<DMatrix<Complex64>> {
    check_budget(probe.n())?;
    let at = |phi: f64, eta: f64| -> Result<DMatrix<Complex64>> {
        Ok(density_matrix(probe, ChannelParams { phi, eta })?.rho)
    };
    let central = |h: f64| -> Result<DMatrix<Complex64>> {
        let (p, m) = match kappa {
            Param::Phase => (
                at(params.phi + h, params.eta)?,
                at(params.phi - h, params.eta)?,
            ),
            Param::Loss => (
                at(params.phi, params.eta + h)?,
                at(params.phi, params.eta - h)?,
            ),
        };
        Ok((p - m) / Complex64::new(2.0 * h, 0.0))
    };
    let (h1, h2) = (1e-4, 1e-5);
    let d1 = central(h1)?;
    let d2 = central(h2)?;
    // steps differ by 10, so the O(h^2) error cancels in (100 d2 - d1)/99
    Ok((d2 * Complex64::new(100.0, 0.0) - d1) / Complex64::new(99.0, 0.0))
}

/// An SLD solved numerically from the defining relation, with the residual
/// of that relation reported.
#[derive(Debug, Clone)]
pub struct NumericalSld {
    pub matrix: DMatrix<Complex64>,
    pub residual: f64,
}

/// Solves `L rho + rho L = 2 drho` in the eigenbasis of rho:
/// `L_ij = 2 (drho)_ij / (lambda_i + lambda_j)` where the sum clears the
/// kernel cutoff, 0 otherwise.
pub fn numerical_sld(rho: &DenseState, drho: &DMatrix<Complex64>) -> Result<NumericalSld> {
    let dim = rho.dim();
    for r in 0..dim {
        for c in 0..dim {
            if (drho[(r, c)] - drho[(c, r)].conj()).norm() > 1e-9 {
                return Err(Error::NumericalQuality {
                    context: "drho hermiticity".into(),
                    residual: (drho[(r, c)] - drho[(c, r)].conj()).norm(),
                    tolerance: 1e-9,
                });
            }
        }
    }
    let eig = rho.rho.clone().symmetric_eigen();
    let u = &eig.eigenvectors;
    let lambdas = &eig.eigenvalues;
    // transform drho into the eigenbasis
    let dtilde = u.adjoint() * drho * u;
    let mut ltilde = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    let mut kernel_residual = 0.0_f64;
    for r in 0..dim {
        for c in 0..dim {
            let s = lambdas[r] + lambdas[c];
            if s > TOL.sld_kernel_cutoff {
                ltilde[(r, c)] = 2.0 * dtilde[(r, c)] / Complex64::new(s, 0.0);
            } else {
                // unreachable kernel-kernel component of 2 drho
                kernel_residual = kernel_residual.max(2.0 * dtilde[(r, c)].norm());
            }
        }
    }
    let matrix = u * ltilde * u.adjoint();
    // residual of the defining relation, checked in the eigenbasis where the
    // unreachable kernel-kernel components are identifiable
    let lhs = &matrix * &rho.rho + &rho.rho * &matrix;
    let rtilde = u.adjoint() * (lhs - drho.scale(2.0)) * u;
    let mut residual = kernel_residual;
    for r in 0..dim {
        for c in 0..dim {
            if lambdas[r] + lambdas[c] > TOL.sld_kernel_cutoff {
                residual = residual.max(rtilde[(r, c)].norm());
            }
        }
    }
    // near-singular states carry legitimately huge SLD entries, so the
    // acceptable rounding scales with them
    let l_scale = matrix.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let tolerance = 1e-7 * (1.0 + l_scale * 1e-3);
    if residual > tolerance {
        return Err(Error::NumericalQuality {
            context: "SLD defining relation".into(),
            residual,
            tolerance,
        });
    }
    Ok(NumericalSld { matrix, residual })
}

fn sld_pair(
    probe: &ProbeState,
    params: ChannelParams,
    source: DerivativeSource,
) -> Result<(DenseState, NumericalSld, NumericalSld)> {
    crate::fock::require_interior_eta(params.eta)?;
    let rho = density_matrix(probe, params)?;
    let derive = |kappa| -> Result<DMatrix<Complex64>> {
        match source {
            DerivativeSource::Analytic => density_matrix_derivative(probe, params, kappa),
            DerivativeSource::FiniteDifference => {
                density_matrix_derivative_fd(probe, params, kappa)
            }
        }
    };
    let l_phi = numerical_sld(&rho, &derive(Param::Phase)?)?;
    let l_eta = numerical_sld(&rho, &derive(Param::Loss)?)?;
    Ok((rho, l_phi, l_eta))
}

/// Fisher information `I_{mu nu} = Re tr(rho (L_mu L_nu + L_nu L_mu)/2)`
/// with numerically solved SLDs.
pub fn numerical_qfi(
    probe: &ProbeState,
    params: ChannelParams,
    source: DerivativeSource,
) -> Result<FisherMatrix> {
    let (rho, l_phi, l_eta) = sld_pair(probe, params, source)?;
    let sym_trace = |a: &DMatrix<Complex64>, b: &DMatrix<Complex64>| -> f64 {
        let prod = &rho.rho * (a * b + b * a);
        let tr: Complex64 = (0..rho.dim()).map(|i| prod[(i, i)]).sum();
        0.5 * tr.re
    };
    Ok(FisherMatrix {
        phi_phi: sym_trace(&l_phi.matrix, &l_phi.matrix),
        eta_eta: sym_trace(&l_eta.matrix, &l_eta.matrix),
        phi_eta: sym_trace(&l_phi.matrix, &l_eta.matrix),
    })
}

/// `tr(rho [L_eta, L_phi])` with numerically solved SLDs.
pub fn numerical_commutator(
    probe: &ProbeState,
    params: ChannelParams,
    source: DerivativeSource,
) -> Result<Complex64> {
    let (rho, l_phi, l_eta) = sld_pair(probe, params, source)?;
    let comm = &l_eta.matrix * &l_phi.matrix - &l_phi.matrix * &l_eta.matrix;
    let prod = &rho.rho * comm;
    Ok((0..rho.dim()).map(|i| prod[(i, i)]).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fisher::qfi_matrix;
    use crate::probes::{fock_probe, noon, random_probe};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lossless_state_is_pure() {
        let probe = noon(3).unwrap();
        let rho = density_matrix(&probe, ChannelParams::new(0.7, 1.0).unwrap()).unwrap();
        rho.validate().unwrap();
        let sq = rho.rho() * rho.rho();
        let tr: Complex64 = (0..rho.dim()).map(|i| sq[(i, i)]).sum();
        assert_relative_eq!(tr.re, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn complete_absorption_keeps_trace_one() {
        let probe = noon(2).unwrap();
        let rho = density_matrix(&probe, ChannelParams::new(0.0, 0.0).unwrap()).unwrap();
        rho.validate().unwrap();
        // all support on zero photons left in the lossy arm
        let map = rho.map();
        for (g, &(l, j)) in map.labels().iter().enumerate() {
            if j != 0 {
                assert!(rho.rho()[(g, g)].norm() < 1e-14, "support at j={j} l={l}");
            }
        }
    }

    #[test]
    fn block_traces_match_evolve() {
        let probe = noon(2).unwrap();
        let params = ChannelParams::new(0.3, 0.5).unwrap();
        let rho = density_matrix(&probe, params).unwrap();
        let map = rho.map();
        let expect = [0.625, 0.25, 0.125];
        for l in 0..=2 {
            let offset = map.block_offset(l);
            let dim_l = 2 - l + 1;
            let tr: f64 = (0..dim_l).map(|j| rho.rho()[(offset + j, offset + j)].re).sum();
            assert_relative_eq!(tr, expect[l], epsilon = 1e-12);
        }
    }

    #[test]
    fn dilation_matches_block_assembly() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let probe = random_probe(4, &mut rng);
        let params = ChannelParams::new(1.1, 0.35).unwrap();
        let rho = density_matrix(&probe, params).unwrap();
        let ens = evolve(&probe, params).unwrap();
        let map = ens.basis_map();
        let dim = map.dim();
        let mut assembled = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        for block in ens.occupied_blocks() {
            let offset = map.block_offset(block.l);
            let psi = block.amplitudes();
            for (r, a) in psi.iter().enumerate() {
                for (c, b) in psi.iter().enumerate() {
                    assembled[(offset + r, offset + c)] += block.probability * a * b.conj();
                }
            }
        }
        for r in 0..dim {
            for c in 0..dim {
                assert!((assembled[(r, c)] - rho.rho()[(r, c)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn phase_loss_order_independence() {
        // phase applied to the surviving mode after loss multiplies each
        // sector vector by a constant phase, leaving rho unchanged
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let probe = random_probe(3, &mut rng);
        let (phi, eta) = (0.9, 0.6);
        let rho_before = density_matrix(&probe, ChannelParams::new(phi, eta).unwrap()).unwrap();
        let n = probe.n();
        let map = BasisMap::new(n);
        let dim = map.dim();
        let alphas = probe.amplitudes();
        let mut rho_after = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        for l in 0..=n {
            let mut v = DVector::from_element(dim, Complex64::new(0.0, 0.0));
            for k in l..=n {
                let b = loss_coefficient(k, l, eta).unwrap();
                // phase imprinted on the k - l surviving photons
                v[map.global_index(l, k - l)] = alphas[k]
                    * b.sqrt()
                    * Complex64::from_polar(1.0, (k - l) as f64 * phi);
            }
            for r in 0..dim {
                for c in 0..dim {
                    rho_after[(r, c)] += v[r] * v[c].conj();
                }
            }
        }
        for r in 0..dim {
            for c in 0..dim {
                assert!((rho_after[(r, c)] - rho_before.rho()[(r, c)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_derivative_gives_zero_sld() {
        let probe = noon(2).unwrap();
        let rho = density_matrix(&probe, ChannelParams::new(0.0, 0.5).unwrap()).unwrap();
        let zero = DMatrix::from_element(rho.dim(), rho.dim(), Complex64::new(0.0, 0.0));
        let sld = numerical_sld(&rho, &zero).unwrap();
        assert!(sld.matrix.iter().all(|c| c.norm() < 1e-12));
    }

    #[test]
    fn pure_state_phase_qfi_at_unit_eta() {
        // at eta -> 1 the phase QFI approaches 4 (Xi_2 - Xi_1^2)
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let probe = random_probe(3, &mut rng);
        let params = ChannelParams::new(0.2, 1.0 - 1e-9).unwrap();
        let f = numerical_qfi(&probe, params, DerivativeSource::Analytic).unwrap();
        let w = probe.weights();
        let xi1: f64 = w.iter().enumerate().map(|(k, x)| k as f64 * x).sum();
        let xi2: f64 = w.iter().enumerate().map(|(k, x)| (k * k) as f64 * x).sum();
        assert_relative_eq!(f.phi_phi, 4.0 * (xi2 - xi1 * xi1), max_relative = 1e-5);
    }

    #[test]
    fn numerical_qfi_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for n in [2usize, 4] {
            let probe = random_probe(n, &mut rng);
            for &eta in &[0.2, 0.5, 0.8] {
                let params = ChannelParams::new(0.4, eta).unwrap();
                let closed = qfi_matrix(&probe, eta).unwrap();
                let f = numerical_qfi(&probe, params, DerivativeSource::Analytic).unwrap();
                assert_relative_eq!(f.phi_phi, closed.phi_phi, max_relative = 1e-8);
                assert_relative_eq!(f.eta_eta, closed.eta_eta, max_relative = 1e-8);
                assert!(f.phi_eta.abs() < 1e-8);
                let f = numerical_qfi(&probe, params, DerivativeSource::FiniteDifference)
                    .unwrap();
                assert_relative_eq!(f.phi_phi, closed.phi_phi, max_relative = 1e-5);
                assert_relative_eq!(f.eta_eta, closed.eta_eta, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn commutator_matches_closed_form() {
        let probe = noon(3).unwrap();
        let params = ChannelParams::new(0.0, 0.5).unwrap();
        let closed = crate::fisher::commutator_expectation(&probe, 0.5).unwrap();
        let c = numerical_commutator(&probe, params, DerivativeSource::Analytic).unwrap();
        assert!((c - closed).norm() < 1e-7);
    }

    #[test]
    fn budget_is_enforced() {
        let probe = fock_probe(13).unwrap();
        assert!(matches!(
            density_matrix(&probe, ChannelParams::new(0.0, 0.5).unwrap()),
            Err(Error::DenseBudget { n: 13, .. })
        ));
    }

    #[test]
    fn assembled_sld_matches_block_slds() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        let probe = random_probe(3, &mut rng);
        let params = ChannelParams::new(0.7, 0.6).unwrap();
        let rho = density_matrix(&probe, params).unwrap();
        let ens = evolve(&probe, params).unwrap();
        let map = ens.basis_map();
        for kappa in Param::BOTH {
            let drho = density_matrix_derivative(&probe, params, kappa).unwrap();
            let sld = numerical_sld(&rho, &drho).unwrap();
            for block in ens.occupied_blocks() {
                let b = crate::sld::sld_block(&ens, kappa, block.l).unwrap();
                let offset = map.block_offset(block.l);
                let bd = b.dim();
                // compare on the support of the block state
                let psi = DVector::from_column_slice(ens.psi(block.l).unwrap());
                for r in 0..bd {
                    let mut closed = Complex64::new(0.0, 0.0);
                    let mut numeric = Complex64::new(0.0, 0.0);
                    for c in 0..bd {
                        closed += b.matrix()[(r, c)] * psi[c];
                        numeric += sld.matrix[(offset + r, offset + c)] * psi[c];
                    }
                    assert!((closed - numeric).norm() < 1e-8);
                }
            }
        }
    }
}

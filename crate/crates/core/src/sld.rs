//! Symmetric logarithmic derivative blocks, their exact two-eigenvalue
//! spectra, the measurement distributions they induce, and classical Fisher
//! information of arbitrary projective measurements by finite differences.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fisher::FisherMatrix;
use crate::fock::{
    block_derivatives, evolve, BasisMap, ChannelParams, EvolvedEnsemble, Param, ProbeState,
};
use crate::tol::TOL;

/// One block of the SLD `L_kappa` on its local sector basis.
#[derive(Debug, Clone)]
pub struct SldBlock {
    pub l: usize,
    pub param: Param,
    matrix: DMatrix<Complex64>,
}

impl SldBlock {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.matrix * v
    }
}

/// Assembles `L_kappa^l = (d log p_l)|psi><psi| + 2|dpsi><psi| + 2|psi><dpsi|`
/// from the analytic sector state and its derivative.
pub fn sld_block(ensemble: &EvolvedEnsemble, kappa: Param, l: usize) -> Result<SldBlock> {
    let psi = DVector::from_column_slice(ensemble.psi(l)?);
    let dpsi = DVector::from_vec(ensemble.dpsi(l, kappa)?);
    let dlogp = ensemble.dlog_p(l, kappa)?;
    let dim = psi.len();
    let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for r in 0..dim {
        for c in 0..dim {
            m[(r, c)] = Complex64::new(dlogp, 0.0) * psi[r] * psi[c].conj()
                + 2.0 * (dpsi[r] * psi[c].conj() + psi[r] * dpsi[c].conj());
        }
    }
    Ok(SldBlock {
        l,
        param: kappa,
        matrix: m,
    })
}

/// All occupied blocks of `L_kappa`.
pub fn sld_blocks(ensemble: &EvolvedEnsemble, kappa: Param) -> Vec<SldBlock> {
    ensemble
        .occupied_blocks()
        .map(|b| sld_block(ensemble, kappa, b.l).expect("occupied"))
        .collect()
}

/// Closed-form eigenpair of one SLD block. Each occupied block carries at
/// most two nonzero eigenvalues; a block whose projected derivative vanishes
/// is flagged degenerate and loses the distinguished second direction.
#[derive(Debug, Clone)]
pub struct SldEigenpair {
    pub l: usize,
    pub param: Param,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub vec_plus: Option<DVector<Complex64>>,
    pub vec_minus: Option<DVector<Complex64>>,
    pub degenerate: bool,
}

/// Closed-form spectra for every occupied block:
/// `lambda^± = (d log p ± sqrt((d log p)^2 + 16 P)) / 2` with eigenvectors
/// `(lambda^± |psi> + 2 Pi |dpsi>) / sqrt((lambda^±)^2 + 4 P)`.
pub fn sld_eigenpairs(ensemble: &EvolvedEnsemble, kappa: Param) -> Result<Vec<SldEigenpair>> {
    let mut out = Vec::new();
    for block in ensemble.occupied_blocks() {
        let l = block.l;
        let d = ensemble.dlog_p(l, kappa)?;
        let derivs = block_derivatives(ensemble, l)?;
        let p_kk = match kappa {
            Param::Phase => derivs.p_phi_phi,
            Param::Loss => derivs.p_eta_eta,
        };
        let psi = DVector::from_column_slice(ensemble.psi(l)?);
        let dpsi = DVector::from_vec(ensemble.dpsi(l, kappa)?);
        // Pi |dpsi>
        let overlap: Complex64 = psi
            .iter()
            .zip(dpsi.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        let proj: DVector<Complex64> =
            DVector::from_iterator(psi.len(), psi.iter().zip(dpsi.iter()).map(|(a, b)| b - overlap * a));

        let scale = 1.0 + ensemble.block_second_moment(l)?;
        if p_kk <= TOL.construction * scale {
            // rank-one (or zero) block
            if d.abs() <= TOL.construction * scale {
                out.push(SldEigenpair {
                    l,
                    param: kappa,
                    lambda_plus: 0.0,
                    lambda_minus: 0.0,
                    vec_plus: None,
                    vec_minus: None,
                    degenerate: true,
                });
            } else {
                let (lp, lm) = if d > 0.0 { (d, 0.0) } else { (0.0, d) };
                let vec = Some(psi.clone());
                let (vp, vm) = if d > 0.0 { (vec, None) } else { (None, vec) };
                out.push(SldEigenpair {
                    l,
                    param: kappa,
                    lambda_plus: lp,
                    lambda_minus: lm,
                    vec_plus: vp,
                    vec_minus: vm,
                    degenerate: true,
                });
            }
            continue;
        }

        let disc = (d * d + 16.0 * p_kk).sqrt();
        let lambda_plus = 0.5 * (d + disc);
        let lambda_minus = 0.5 * (d - disc);
        let mut vecs = [None, None];
        for (slot, &lambda) in [lambda_plus, lambda_minus].iter().enumerate() {
            let denom = (lambda * lambda + 4.0 * p_kk).sqrt();
            let v: DVector<Complex64> = DVector::from_iterator(
                psi.len(),
                psi.iter()
                    .zip(proj.iter())
                    .map(|(a, b)| (Complex64::new(lambda, 0.0) * a + 2.0 * b) / denom),
            );
            vecs[slot] = Some(v);
        }
        let [vec_plus, vec_minus] = vecs;
        out.push(SldEigenpair {
            l,
            param: kappa,
            lambda_plus,
            lambda_minus,
            vec_plus,
            vec_minus,
            degenerate: false,
        });
    }
    Ok(out)
}

/// Embeds the available SLD eigenvectors into the global basis, giving the
/// projective measurement induced by `L_kappa`. Occupied sectors whose block
/// is degenerate (no distinguished eigendirection) still get their sector
/// state as a projector, so the measurement always resolves the loss sector
/// and the remaining kernel carries zero probability.
pub fn sld_eigenbasis(ensemble: &EvolvedEnsemble, kappa: Param) -> Result<Vec<DVector<Complex64>>> {
    let map = ensemble.basis_map();
    let mut out = Vec::new();
    for pair in sld_eigenpairs(ensemble, kappa)? {
        let mut covered = false;
        for v in [&pair.vec_plus, &pair.vec_minus].into_iter().flatten() {
            out.push(embed(&map, pair.l, v));
            covered = true;
        }
        if !covered {
            let psi = DVector::from_column_slice(ensemble.psi(pair.l)?);
            out.push(embed(&map, pair.l, &psi));
        }
    }
    Ok(out)
}

/// Lifts a local block vector into the global basis.
pub fn embed(map: &BasisMap, l: usize, local: &DVector<Complex64>) -> DVector<Complex64> {
    let mut global = DVector::from_element(map.dim(), Complex64::new(0.0, 0.0));
    let offset = map.block_offset(l);
    for (j, v) in local.iter().enumerate() {
        global[offset + j] = *v;
    }
    global
}

/// Outcome of a projective measurement: one entry per projector plus the
/// residual subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Projector(usize),
    Residual,
}

#[derive(Debug, Clone)]
pub struct MeasurementDistribution {
    pub outcomes: Vec<(Outcome, f64)>,
}

impl MeasurementDistribution {
    pub fn probabilities(&self) -> Vec<f64> {
        self.outcomes.iter().map(|(_, q)| *q).collect()
    }
}

fn check_projectors(projectors: &[DVector<Complex64>], dim: usize) -> Result<()> {
    for (i, p) in projectors.iter().enumerate() {
        if p.len() != dim {
            return Err(Error::ProjectorDimension {
                got: p.len(),
                expected: dim,
            });
        }
        for (j, q) in projectors.iter().enumerate().skip(i) {
            let dot: Complex64 = p.iter().zip(q.iter()).map(|(a, b)| a.conj() * b).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            let deviation = (dot - target).norm();
            if deviation > 1e-8 {
                return Err(Error::NonOrthonormalProjectors { i, j, deviation });
            }
        }
    }
    Ok(())
}

fn raw_probabilities(
    ensemble: &EvolvedEnsemble,
    projectors: &[DVector<Complex64>],
) -> Vec<f64> {
    let map = ensemble.basis_map();
    let mut probs = Vec::with_capacity(projectors.len() + 1);
    let mut total = 0.0;
    for proj in projectors {
        let mut q = 0.0;
        for block in ensemble.occupied_blocks() {
            let offset = map.block_offset(block.l);
            let overlap: Complex64 = block
                .amplitudes()
                .iter()
                .enumerate()
                .map(|(j, c)| proj[offset + j].conj() * c)
                .sum();
            q += block.probability * overlap.norm_sqr();
        }
        total += q;
        probs.push(q);
    }
    probs.push((1.0 - total).max(0.0));
    probs
}

/// `q_j = <proj_j| rho |proj_j>` plus the residual outcome `1 - sum q_j`.
pub fn measurement_distribution(
    ensemble: &EvolvedEnsemble,
    projectors: &[DVector<Complex64>],
) -> Result<MeasurementDistribution> {
    check_projectors(projectors, ensemble.basis_map().dim())?;
    let probs = raw_probabilities(ensemble, projectors);
    let mut outcomes: Vec<(Outcome, f64)> = probs[..projectors.len()]
        .iter()
        .enumerate()
        .map(|(i, &q)| (Outcome::Projector(i), q))
        .collect();
    outcomes.push((Outcome::Residual, probs[projectors.len()]));
    Ok(MeasurementDistribution { outcomes })
}

/// Classical Fisher information at `params0` of the outcome distribution of a
/// fixed projector set, by central finite differences with one Richardson
/// extrapolation level. The projectors are frozen; only the state moves.
pub fn classical_fisher_of_measurement(
    probe: &ProbeState,
    params0: ChannelParams,
    projectors: &[DVector<Complex64>],
) -> Result<FisherMatrix> {
    crate::fock::require_interior_eta(params0.eta)?;
    let dim = BasisMap::new(probe.n()).dim();
    check_projectors(projectors, dim)?;

    let q_at = |phi: f64, eta: f64| -> Result<Vec<f64>> {
        let ens = evolve(probe, ChannelParams { phi, eta })?;
        Ok(raw_probabilities(&ens, projectors))
    };

    let q0 = q_at(params0.phi, params0.eta)?;
    let n_out = q0.len();

    // step must keep eta inside (0, 1)
    let mut h = 1e-4_f64;
    let margin = params0.eta.min(1.0 - params0.eta);
    while h >= margin / 2.0 {
        h /= 10.0;
        if h < 1e-12 {
            return Err(Error::NumericalQuality {
                context: "finite-difference step underflow near the eta boundary".into(),
                residual: h,
                tolerance: 1e-12,
            });
        }
    }

    let central = |h: f64, param: Param| -> Result<Vec<f64>> {
        let (qp, qm) = match param {
            Param::Phase => (
                q_at(params0.phi + h, params0.eta)?,
                q_at(params0.phi - h, params0.eta)?,
            ),
            Param::Loss => (
                q_at(params0.phi, params0.eta + h)?,
                q_at(params0.phi, params0.eta - h)?,
            ),
        };
        Ok((0..n_out).map(|i| (qp[i] - qm[i]) / (2.0 * h)).collect())
    };

    let mut grads = Vec::with_capacity(2);
    for param in Param::BOTH {
        let d_h = central(h, param)?;
        let d_h2 = central(h / 2.0, param)?;
        // one Richardson level: error drops from O(h^2) to O(h^4)
        let refined: Vec<f64> = (0..n_out)
            .map(|i| (4.0 * d_h2[i] - d_h[i]) / 3.0)
            .collect();
        let scale: f64 = 1.0 + refined.iter().map(|d| d.abs()).fold(0.0, f64::max);
        let drift: f64 = (0..n_out)
            .map(|i| (d_h[i] - d_h2[i]).abs())
            .fold(0.0, f64::max);
        if drift > 1e-2 * scale {
            return Err(Error::NumericalQuality {
                context: format!("non-convergent derivative refinement for {param}"),
                residual: drift,
                tolerance: 1e-2 * scale,
            });
        }
        grads.push(refined);
    }

    let mut f = [[0.0_f64; 2]; 2];
    for i in 0..n_out {
        if q0[i] < TOL.prob_cutoff {
            continue;
        }
        for mu in 0..2 {
            for nu in 0..2 {
                f[mu][nu] += grads[mu][i] * grads[nu][i] / q0[i];
            }
        }
    }
    Ok(FisherMatrix {
        phi_phi: f[0][0],
        eta_eta: f[1][1],
        phi_eta: 0.5 * (f[0][1] + f[1][0]),
    })
}

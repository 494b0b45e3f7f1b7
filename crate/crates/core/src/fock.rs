//! Fixed-photon-number two-mode probes, the loss-plus-phase channel, and the
//! block-diagonal ensemble and moment tables that every closed form is built
//! from.
//!
//! A probe of `n` photons is `sum_k alpha_k |k, n-k>` with `k` photons in the
//! lossy (phase-imprinting) arm. Loss of `l` photons sends the state into an
//! orthogonal sector with probability `p_l`; within each sector the state
//! stays pure.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol::TOL;

/// The two parameters of the channel, used to tag derivatives and SLDs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Param {
    Phase,
    Loss,
}

impl Param {
    pub const BOTH: [Param; 2] = [Param::Phase, Param::Loss];
}

impl std::fmt::Display for Param {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Param::Phase => write!(f, "phi"),
            Param::Loss => write!(f, "eta"),
        }
    }
}

/// Channel parameters: phase `phi` and transmissivity `eta`.
#[derive(Debug, Clone, Copy)]
pub struct ChannelParams {
    pub phi: f64,
    pub eta: f64,
}

impl ChannelParams {
    pub fn new(phi: f64, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) || eta.is_nan() {
            return Err(Error::EtaOutOfRange { eta });
        }
        Ok(ChannelParams {
            phi: phi.rem_euclid(2.0 * std::f64::consts::PI),
            eta,
        })
    }
}

/// Fisher quantities require eta strictly inside (0, 1); the loss information
/// diverges at the endpoints.
pub fn require_interior_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta < 1.0 {
        Ok(())
    } else {
        Err(Error::EtaDiverges { eta })
    }
}

/// A pure probe with fixed photon number `n`: amplitudes `alpha_0..alpha_n`
/// over the basis `|k, n-k>`.
#[derive(Debug, Clone)]
pub struct ProbeState {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl ProbeState {
    /// Builds a probe from non-negative weights (renormalized to sum 1) and
    /// optional per-component phases: `alpha_k = sqrt(x_k) e^{i phase_k}`.
    pub fn from_weights(weights: &[f64], phases: Option<&[f64]>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::ZeroPhotons);
        }
        if let Some(ph) = phases {
            if ph.len() != weights.len() {
                return Err(Error::LengthMismatch {
                    weights: weights.len(),
                    phases: ph.len(),
                });
            }
        }
        for (index, &w) in weights.iter().enumerate() {
            if w < 0.0 || w.is_nan() {
                return Err(Error::NegativeWeight { index, value: w });
            }
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::AllZeroWeights);
        }
        let amplitudes = weights
            .iter()
            .enumerate()
            .map(|(k, &w)| {
                let r = (w / total).sqrt();
                match phases {
                    Some(ph) => Complex64::from_polar(r, ph[k]),
                    None => Complex64::new(r, 0.0),
                }
            })
            .collect::<Vec<_>>();
        Ok(ProbeState {
            n: weights.len() - 1,
            amplitudes,
        })
    }

    /// Builds a probe directly from complex amplitudes; the norm must already
    /// be 1 within the construction tolerance.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::ZeroPhotons);
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > TOL.construction {
            return Err(Error::NotNormalized { norm });
        }
        Ok(ProbeState {
            n: amplitudes.len() - 1,
            amplitudes,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// The weights `x_k = |alpha_k|^2`.
    pub fn weights(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// The binomial loss weight `b_l^k = C(k, l) eta^{k-l} (1-eta)^l`.
///
/// Built by a multiplicative product rather than factorials so the value
/// stays finite to n = 200 and beyond.
pub fn loss_coefficient(k: usize, l: usize, eta: f64) -> Result<f64> {
    if l > k {
        return Err(Error::LossIndex { k, l });
    }
    if !(0.0..=1.0).contains(&eta) || eta.is_nan() {
        return Err(Error::EtaOutOfRange { eta });
    }
    let mut b = 1.0_f64;
    for i in 1..=l {
        b *= (k - l + i) as f64 / i as f64 * (1.0 - eta);
    }
    // eta^0 = 1 also at eta = 0, so the endpoint rows are exact.
    b *= eta.powi((k - l) as i32);
    Ok(b)
}

/// Precomputed table of `b_l^k` for k, l = 0..=n at a fixed eta.
#[derive(Debug, Clone)]
pub struct BinomialTable {
    n: usize,
    eta: f64,
    rows: Vec<Vec<f64>>,
}

impl BinomialTable {
    pub fn new(n: usize, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) || eta.is_nan() {
            return Err(Error::EtaOutOfRange { eta });
        }
        // interior eta admits the O(n^2) row recurrence
        // b_l = b_{l-1} (k-l+1)/l (1-eta)/eta; endpoint rows fall back to
        // the exact per-entry product
        let rows = if eta > 0.0 && eta < 1.0 {
            let ratio = (1.0 - eta) / eta;
            (0..=n)
                .map(|k| {
                    let mut row = Vec::with_capacity(k + 1);
                    let mut b = eta.powi(k as i32);
                    row.push(b);
                    for l in 1..=k {
                        b *= (k - l + 1) as f64 / l as f64 * ratio;
                        row.push(b);
                    }
                    row
                })
                .collect()
        } else {
            (0..=n)
                .map(|k| {
                    (0..=k)
                        .map(|l| loss_coefficient(k, l, eta).expect("indices in range"))
                        .collect()
                })
                .collect()
        };
        Ok(BinomialTable { n, eta, rows })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    #[inline]
    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.rows[k][l]
    }
}

/// One loss sector: `l` photons lost, probability `p_l`, and the normalized
/// local state over `|k-l, n-k>` for k = l..=n (local index j = k - l).
#[derive(Debug, Clone)]
pub struct Block {
    pub l: usize,
    pub probability: f64,
    amplitudes: Vec<Complex64>,
}

impl Block {
    pub fn is_occupied(&self) -> bool {
        self.probability > 0.0
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Normalized local amplitudes; all-zero for a degenerate block.
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }
}

/// The block decomposition of the evolved state `rho(phi, eta)`.
#[derive(Debug, Clone)]
pub struct EvolvedEnsemble {
    n: usize,
    params: ChannelParams,
    blocks: Vec<Block>,
}

/// Applies the loss-plus-phase channel to a probe. Requires eta strictly in
/// (0, 1); blocks with `p_l = 0` are kept but flagged degenerate.
pub fn evolve(probe: &ProbeState, params: ChannelParams) -> Result<EvolvedEnsemble> {
    require_interior_eta(params.eta)?;
    let n = probe.n();
    let table = BinomialTable::new(n, params.eta)?;
    let alphas = probe.amplitudes();
    let mut blocks = Vec::with_capacity(n + 1);
    for l in 0..=n {
        let dim = n - l + 1;
        let mut raw = vec![Complex64::new(0.0, 0.0); dim];
        let mut p = 0.0;
        for k in l..=n {
            let b = table.get(k, l);
            let x = alphas[k].norm_sqr();
            p += x * b;
            raw[k - l] =
                alphas[k] * b.sqrt() * Complex64::from_polar(1.0, k as f64 * params.phi);
        }
        let amplitudes = if p > 0.0 {
            let inv = 1.0 / p.sqrt();
            raw.iter().map(|c| c * inv).collect()
        } else {
            vec![Complex64::new(0.0, 0.0); dim]
        };
        blocks.push(Block {
            l,
            probability: p,
            amplitudes,
        });
    }
    Ok(EvolvedEnsemble {
        n,
        params,
        blocks,
    })
}

impl EvolvedEnsemble {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn params(&self) -> ChannelParams {
        self.params
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn occupied_blocks(&self) -> impl Iterator<Item = &Block> {
        self.blocks.iter().filter(|b| b.is_occupied())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.probability).collect()
    }

    pub fn block(&self, l: usize) -> &Block {
        &self.blocks[l]
    }

    fn occupied(&self, l: usize) -> Result<&Block> {
        let block = &self.blocks[l];
        if block.is_occupied() {
            Ok(block)
        } else {
            Err(Error::DegenerateBlock { l })
        }
    }

    /// Local photon-number mean `mu_l = xi_{1,l} / xi_{0,l}` of an occupied
    /// block, with k the photon count in the lossy arm before loss.
    pub fn block_mean(&self, l: usize) -> Result<f64> {
        let block = self.occupied(l)?;
        Ok(block
            .amplitudes
            .iter()
            .enumerate()
            .map(|(j, c)| (j + l) as f64 * c.norm_sqr())
            .sum())
    }

    /// Local second moment `xi_{2,l} / xi_{0,l}`.
    pub fn block_second_moment(&self, l: usize) -> Result<f64> {
        let block = self.occupied(l)?;
        Ok(block
            .amplitudes
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let k = (j + l) as f64;
                k * k * c.norm_sqr()
            })
            .sum())
    }

    /// The normalized sector state `|psi_l>`; errors on degenerate blocks.
    pub fn psi(&self, l: usize) -> Result<&[Complex64]> {
        Ok(self.occupied(l)?.amplitudes())
    }

    /// Analytic partial derivative `|d_kappa psi_l>` in the local basis.
    pub fn dpsi(&self, l: usize, kappa: Param) -> Result<Vec<Complex64>> {
        let block = self.occupied(l)?;
        match kappa {
            Param::Phase => Ok(block
                .amplitudes
                .iter()
                .enumerate()
                .map(|(j, c)| Complex64::new(0.0, (j + l) as f64) * c)
                .collect()),
            Param::Loss => {
                let mu = self.block_mean(l)?;
                let inv = 1.0 / (2.0 * self.params.eta);
                Ok(block
                    .amplitudes
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c * (((j + l) as f64 - mu) * inv))
                    .collect())
            }
        }
    }

    /// `d_kappa log p_l` for an occupied block.
    pub fn dlog_p(&self, l: usize, kappa: Param) -> Result<f64> {
        self.occupied(l)?;
        match kappa {
            Param::Phase => Ok(0.0),
            Param::Loss => {
                let eta = self.params.eta;
                let mu = self.block_mean(l)?;
                Ok((mu - l as f64 / (1.0 - eta)) / eta)
            }
        }
    }

    /// `d_eta p_l` for any block (0 on degenerate blocks).
    pub fn dp(&self, l: usize, kappa: Param) -> f64 {
        match kappa {
            Param::Phase => 0.0,
            Param::Loss => {
                let block = &self.blocks[l];
                if !block.is_occupied() {
                    return 0.0;
                }
                let eta = self.params.eta;
                let xi1: f64 = block
                    .amplitudes
                    .iter()
                    .enumerate()
                    .map(|(j, c)| (j + l) as f64 * c.norm_sqr() * block.probability)
                    .sum();
                (xi1 - l as f64 * block.probability / (1.0 - eta)) / eta
            }
        }
    }

    pub fn basis_map(&self) -> BasisMap {
        BasisMap::new(self.n)
    }
}

/// Per-block inner products and projected overlaps.
#[derive(Debug, Clone, Copy)]
pub struct BlockDerivatives {
    pub l: usize,
    /// `<psi_l | d_phi psi_l> = i xi_{1,l} / xi_{0,l}`.
    pub overlap_phase: Complex64,
    /// `<psi_l | d_eta psi_l>`, identically zero.
    pub overlap_loss: Complex64,
    /// `P_{l,phiphi}` — local variance of the photon number.
    pub p_phi_phi: f64,
    /// `P_{l,etaeta} = P_{l,phiphi} / (4 eta^2)`.
    pub p_eta_eta: f64,
    /// `P_{l,phieta} = -i P_{l,phiphi} / (2 eta)`.
    pub p_phi_eta: Complex64,
}

impl BlockDerivatives {
    pub fn p(&self, mu: Param, nu: Param) -> Complex64 {
        match (mu, nu) {
            (Param::Phase, Param::Phase) => Complex64::new(self.p_phi_phi, 0.0),
            (Param::Loss, Param::Loss) => Complex64::new(self.p_eta_eta, 0.0),
            (Param::Phase, Param::Loss) => self.p_phi_eta,
            (Param::Loss, Param::Phase) => self.p_phi_eta.conj(),
        }
    }
}

/// Closed-form inner-product record for one occupied block.
pub fn block_derivatives(ensemble: &EvolvedEnsemble, l: usize) -> Result<BlockDerivatives> {
    let mu = ensemble.block_mean(l)?;
    let m2 = ensemble.block_second_moment(l)?;
    let eta = ensemble.params().eta;
    let var = (m2 - mu * mu).max(0.0);
    Ok(BlockDerivatives {
        l,
        overlap_phase: Complex64::new(0.0, mu),
        overlap_loss: Complex64::new(0.0, 0.0),
        p_phi_phi: var,
        p_eta_eta: var / (4.0 * eta * eta),
        p_phi_eta: Complex64::new(0.0, -var / (2.0 * eta)),
    })
}

/// Records for every occupied block.
pub fn all_block_derivatives(ensemble: &EvolvedEnsemble) -> Vec<BlockDerivatives> {
    ensemble
        .occupied_blocks()
        .map(|b| block_derivatives(ensemble, b.l).expect("occupied"))
        .collect()
}

/// The moment arrays `xi_{r,l}` and `Xi_r` for r = 0, 1, 2.
#[derive(Debug, Clone)]
pub struct MomentTable {
    n: usize,
    eta: f64,
    /// xi[l] = [xi_{0,l}, xi_{1,l}, xi_{2,l}]
    xi: Vec<[f64; 3]>,
    big: [f64; 3],
}

/// Evaluates the moment tables for a probe at transmissivity eta.
pub fn moments(probe: &ProbeState, eta: f64) -> Result<MomentTable> {
    require_interior_eta(eta)?;
    let table = BinomialTable::new(probe.n(), eta)?;
    Ok(moments_from_weights(&probe.weights(), &table))
}

/// Moment tables straight from a weight vector; the hot path for the
/// optimizer, which reuses one binomial table across iterations.
pub fn moments_from_weights(weights: &[f64], table: &BinomialTable) -> MomentTable {
    let n = table.n();
    debug_assert_eq!(weights.len(), n + 1);
    let mut xi = vec![[0.0_f64; 3]; n + 1];
    let mut big = [0.0_f64; 3];
    for (k, &x) in weights.iter().enumerate() {
        let kf = k as f64;
        let pows = [1.0, kf, kf * kf];
        for r in 0..3 {
            big[r] += x * pows[r];
        }
        if x == 0.0 {
            continue;
        }
        for l in 0..=k {
            let xb = x * table.get(k, l);
            for r in 0..3 {
                xi[l][r] += xb * pows[r];
            }
        }
    }
    MomentTable {
        n,
        eta: table.eta(),
        xi,
        big,
    }
}

impl MomentTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn xi(&self, r: usize, l: usize) -> f64 {
        self.xi[l][r]
    }

    pub fn big_xi(&self, r: usize) -> f64 {
        self.big[r]
    }

    /// `sum_l xi_{1,l}^2 / xi_{0,l}` with the degenerate-block limit
    /// `0/0 -> 0`.
    pub fn ratio_sum(&self) -> f64 {
        self.xi
            .iter()
            .filter(|row| row[0] > 0.0)
            .map(|row| row[1] * row[1] / row[0])
            .sum()
    }

    /// `Xi_2 - sum_l xi_{1,l}^2 / xi_{0,l}`, the quantum phase-variance term.
    pub fn phase_variance_term(&self) -> f64 {
        (self.big[2] - self.ratio_sum()).max(0.0)
    }

    /// `sum_l (d_eta xi_{0,l})^2 / xi_{0,l}` — the classical loss Fisher of
    /// the sector distribution, summed directly to avoid cancellation.
    pub fn classical_loss_fisher(&self) -> f64 {
        let eta = self.eta;
        self.xi
            .iter()
            .enumerate()
            .filter(|(_, row)| row[0] > 0.0)
            .map(|(l, row)| {
                let dp = (row[1] - l as f64 * row[0] / (1.0 - eta)) / eta;
                dp * dp / row[0]
            })
            .sum()
    }
}

/// Global labeling of the post-loss Hilbert space: kets `|a, b>` with
/// `a + b <= n` (`a` photons left in the lossy arm, `b` in the reference).
/// Basis vectors are ordered block-by-block, so each loss sector occupies a
/// contiguous index range.
#[derive(Debug, Clone, Copy)]
pub struct BasisMap {
    n: usize,
}

impl BasisMap {
    pub fn new(n: usize) -> Self {
        BasisMap { n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        (self.n + 1) * (self.n + 2) / 2
    }

    /// First global index of block l.
    pub fn block_offset(&self, l: usize) -> usize {
        // sum_{m<l} (n + 1 - m)
        (l * (2 * (self.n + 1) + 1 - l)) / 2
    }

    /// Global index of local component j of block l (ket |j, n - l - j>).
    pub fn global_index(&self, l: usize, j: usize) -> usize {
        debug_assert!(l <= self.n && j <= self.n - l);
        self.block_offset(l) + j
    }

    /// Global index of ket |a, b>, if it lies in the space.
    pub fn index_of(&self, a: usize, b: usize) -> Option<usize> {
        if a + b > self.n {
            return None;
        }
        let l = self.n - a - b;
        Some(self.global_index(l, a))
    }

    /// The (l, j) labels in global order.
    pub fn labels(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.dim());
        for l in 0..=self.n {
            for j in 0..=(self.n - l) {
                out.push((l, j));
            }
        }
        out
    }
}

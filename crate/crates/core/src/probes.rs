//! Canonical comparison probes (n00n, Holland-Burnett, Fock, uniform) and a
//! small Fock-basis beamsplitter engine used to derive the Holland-Burnett
//! coefficients from twin-Fock inputs.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fock::ProbeState;

/// n00n state: all n photons in one arm or the other, equal weight.
pub fn noon(n: usize) -> Result<ProbeState> {
    if n == 0 {
        return Err(Error::ZeroPhotons);
    }
    let mut w = vec![0.0; n + 1];
    w[0] = 0.5;
    w[n] = 0.5;
    ProbeState::from_weights(&w, None)
}

/// Fock probe |n, 0>: every photon in the lossy arm. Optimal for loss,
/// blind to phase.
pub fn fock_probe(n: usize) -> Result<ProbeState> {
    if n == 0 {
        return Err(Error::ZeroPhotons);
    }
    let mut w = vec![0.0; n + 1];
    w[n] = 1.0;
    ProbeState::from_weights(&w, None)
}

/// Uniform weights over all n + 1 components.
pub fn uniform(n: usize) -> Result<ProbeState> {
    if n == 0 {
        return Err(Error::ZeroPhotons);
    }
    ProbeState::from_weights(&vec![1.0; n + 1], None)
}

/// A two-mode pure state of fixed total photon number, pre-channel.
#[derive(Debug, Clone)]
pub struct TwoModeState {
    amplitudes: Vec<Complex64>,
}

impl TwoModeState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > crate::tol::TOL.construction {
            return Err(Error::NotNormalized { norm });
        }
        Ok(TwoModeState { amplitudes })
    }

    /// The basis ket |k, n-k>.
    pub fn basis(n: usize, k: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n + 1];
        amplitudes[k] = Complex64::new(1.0, 0.0);
        TwoModeState { amplitudes }
    }

    pub fn n(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut lf = vec![0.0_f64; n + 1];
    for i in 1..=n {
        lf[i] = lf[i - 1] + (i as f64).ln();
    }
    lf
}

/// Applies the two-mode beamsplitter unitary in the Fock basis.
///
/// Convention: the transmitted amplitude is real positive,
/// `a -> sqrt(t) a + sqrt(1-t) b`, `b -> -sqrt(1-t) a + sqrt(t) b`.
/// Matrix elements are explicit binomial sums evaluated with log-factorials
/// so the transform stays finite to n = 200.
pub fn beamsplitter_transform(state: &TwoModeState, transmissivity: f64) -> Result<TwoModeState> {
    if !(0.0..=1.0).contains(&transmissivity) || transmissivity.is_nan() {
        return Err(Error::EtaOutOfRange {
            eta: transmissivity,
        });
    }
    let n = state.n();
    let c = transmissivity.sqrt();
    let s = (1.0 - transmissivity).sqrt();
    if s == 0.0 {
        return Ok(state.clone());
    }
    if c == 0.0 {
        // full reflection: |k, n-k> -> (-1)^{n-k} |n-k, k>
        let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
        for (k, alpha) in state.amplitudes.iter().enumerate() {
            let sign = if (n - k) % 2 == 0 { 1.0 } else { -1.0 };
            out[n - k] = alpha * sign;
        }
        return TwoModeState::new(out);
    }
    let lf = ln_factorials(n);
    let (ln_c, ln_s) = (c.ln(), s.ln());
    let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
    for (k, alpha) in state.amplitudes.iter().enumerate() {
        if alpha.norm_sqr() == 0.0 {
            continue;
        }
        for p in 0..=n {
            // <p, n-p| U |k, n-k>
            let mut elem = 0.0_f64;
            let i_min = p.saturating_sub(n - k);
            let i_max = p.min(k);
            for i in i_min..=i_max {
                let e_c = (n - k) as isize - p as isize + 2 * i as isize;
                let e_s = (k + p) as isize - 2 * i as isize;
                let ln_mag = 0.5 * (lf[p] + lf[n - p] - lf[k] - lf[n - k])
                    + (lf[k] - lf[i] - lf[k - i])
                    + (lf[n - k] - lf[p - i] - lf[(n - k) - (p - i)])
                    + e_c as f64 * ln_c
                    + e_s as f64 * ln_s;
                let sign = if (p - i) % 2 == 0 { 1.0 } else { -1.0 };
                elem += sign * ln_mag.exp();
            }
            out[p] += alpha * elem;
        }
    }
    // renormalize away the accumulated rounding of the log-sum elements
    let norm: f64 = out.iter().map(|a| a.norm_sqr()).sum();
    let inv = norm.sqrt().recip();
    for a in &mut out {
        *a *= inv;
    }
    TwoModeState::new(out)
}

/// Holland-Burnett probe: the twin-Fock input |n/2, n/2> after a 50:50
/// beamsplitter. Only even components survive.
pub fn holland_burnett(n: usize) -> Result<ProbeState> {
    if n == 0 {
        return Err(Error::ZeroPhotons);
    }
    if n % 2 != 0 {
        return Err(Error::OddPhotonNumber { n });
    }
    let twin = TwoModeState::basis(n, n / 2);
    let out = beamsplitter_transform(&twin, 0.5)?;
    ProbeState::from_amplitudes(out.amplitudes().to_vec())
}

/// A random probe: flat-Dirichlet weights plus uniform amplitude phases.
pub fn random_probe<R: Rng>(n: usize, rng: &mut R) -> ProbeState {
    assert!(n >= 1);
    let mut w: Vec<f64> = (0..=n)
        .map(|_| -(rng.random::<f64>().max(f64::MIN_POSITIVE)).ln())
        .collect();
    let total: f64 = w.iter().sum();
    for x in &mut w {
        *x /= total;
    }
    let phases: Vec<f64> = (0..=n)
        .map(|_| rng.random::<f64>() * 2.0 * std::f64::consts::PI)
        .collect();
    ProbeState::from_weights(&w, Some(&phases)).expect("positive weights")
}

/// Random weights only (no phases); handy for optimizer starts.
pub fn random_weights<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut w: Vec<f64> = (0..=n)
        .map(|_| -(rng.random::<f64>().max(f64::MIN_POSITIVE)).ln())
        .collect();
    let total: f64 = w.iter().sum();
    for x in &mut w {
        *x /= total;
    }
    w
}

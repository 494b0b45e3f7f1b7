//! Quantum estimation of phase and loss with fixed-photon-number two-mode
//! probes: closed-form Fisher information, symmetric and generalized
//! logarithmic derivatives, a dense density-matrix cross-check, and a
//! simplex optimizer for probe design.
//!
//! The probe is `sum_k sqrt(x_k) e^{i theta_k} |k, n-k>` with `k` photons in
//! the arm that suffers loss (transmissivity eta) and carries the phase phi.
//! Everything measurable here depends only on the weights `x_k` and eta.

pub mod error;
pub mod fisher;
pub mod fock;
pub mod gld;
pub mod optimizer;
pub mod oracle;
pub mod probes;
pub mod sld;
pub mod tol;
pub mod validate;

pub use error::{Error, Result};
pub use fisher::{
    classical_fisher_p, combined_uncertainty, commutator_expectation, measured_fisher_loss_sld,
    measured_fisher_phase_sld, qfi_matrix, FisherMatrix, PrecisionSummary,
};
pub use fock::{
    evolve, loss_coefficient, moments, BasisMap, BinomialTable, ChannelParams, EvolvedEnsemble,
    MomentTable, Param, ProbeState,
};
pub use gld::{gld_fisher, scalarized_bound, verify_sld_optimal, GldFisherMatrix, GldWeights};
pub use optimizer::{
    objective_and_gradient, optimize, tradeoff_scan, Objective, OptimizationResult,
    OptimizerSettings, TradeoffRow,
};
pub use oracle::{
    density_matrix, density_matrix_derivative, numerical_commutator, numerical_qfi, numerical_sld,
    DenseState, DerivativeSource,
};
pub use probes::{
    beamsplitter_transform, fock_probe, holland_burnett, noon, random_probe, uniform, TwoModeState,
};
pub use sld::{
    classical_fisher_of_measurement, measurement_distribution, sld_block, sld_blocks,
    sld_eigenbasis, sld_eigenpairs, SldBlock, SldEigenpair,
};
pub use tol::{Tolerances, TOL};
pub use validate::{run_checks, CheckReport};

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("probe weights must contain at least one positive entry")]
    AllZeroWeights,

    #[error("negative weight {value} at index {index}")]
    NegativeWeight { index: usize, value: f64 },

    #[error("weights length {weights} does not match phases length {phases}")]
    LengthMismatch { weights: usize, phases: usize },

    #[error("probe must carry at least one photon")]
    ZeroPhotons,

    #[error("loss index l = {l} outside 0..={k}")]
    LossIndex { k: usize, l: usize },

    #[error("transmissivity {eta} outside [0, 1]")]
    EtaOutOfRange { eta: f64 },

    #[error("loss information I_etaeta diverges at eta = {eta}; Fisher quantities require eta strictly inside (0, 1)")]
    EtaDiverges { eta: f64 },

    #[error("block l = {l} carries zero probability; no state is defined there")]
    DegenerateBlock { l: usize },

    #[error("state norm {norm} deviates from 1 beyond tolerance")]
    NotNormalized { norm: f64 },

    #[error("projectors {i} and {j} are not orthonormal (|<i|j> - delta| = {deviation})")]
    NonOrthonormalProjectors { i: usize, j: usize, deviation: f64 },

    #[error("projector dimension {got} does not match basis dimension {expected}")]
    ProjectorDimension { got: usize, expected: usize },

    #[error("logarithmic-derivative weights M0 = {m0}, M1 = {m1} outside the open simplex")]
    GldWeightDomain { m0: f64, m1: f64 },

    #[error("information matrix is singular (|det| = {det}); variance unbounded along some direction")]
    SingularInformation { det: f64 },

    #[error("Holland-Burnett probes require even photon number, got n = {n}")]
    OddPhotonNumber { n: usize },

    #[error("n = {n} exceeds the dense-oracle budget of {budget}")]
    DenseBudget { n: usize, budget: usize },

    #[error("numerical quality failure in {context}: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    NumericalQuality {
        context: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("optimizer failed to converge from any start: {diagnostics}")]
    NonConvergence { diagnostics: String },
}

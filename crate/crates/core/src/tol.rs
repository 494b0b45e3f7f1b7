//! Numerical tolerances and budgets, centralized so that every module and
//! every validation check pins against the same constants.

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// State and distribution normalization at construction time.
    pub construction: f64,
    /// Agreement between closed forms and central finite differences.
    pub finite_diff: f64,
    /// Exact algebraic identities evaluated in floating point.
    pub identity: f64,
    /// Closed-form vs dense-oracle Fisher quantities (analytic derivatives).
    pub oracle: f64,
    /// Closed-form vs dense-oracle with finite-difference derivatives.
    pub oracle_fd: f64,
    /// Closed-form eigenpairs vs dense eigendecomposition.
    pub eigen: f64,
    /// Classical Fisher of a measurement vs its closed form (relative).
    pub measurement: f64,
    /// Eigenvalue-sum cutoff below which the SLD solve assigns 0 (kernel).
    pub sld_kernel_cutoff: f64,
    /// Outcome probabilities below this are dropped from Fisher sums.
    pub prob_cutoff: f64,
    /// Optimizer weights below this are truncated to exact zeros.
    pub weight_truncation: f64,
    /// Largest n the dense density-matrix oracle accepts.
    pub dense_budget: usize,
}

impl Tolerances {
    pub const fn standard() -> Self {
        Tolerances {
            construction: 1e-12,
            finite_diff: 1e-6,
            identity: 1e-10,
            oracle: 1e-8,
            oracle_fd: 1e-5,
            eigen: 1e-9,
            measurement: 1e-5,
            sld_kernel_cutoff: 1e-12,
            prob_cutoff: 1e-14,
            weight_truncation: 1e-12,
            dense_budget: 12,
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::standard()
    }
}

pub const TOL: Tolerances = Tolerances::standard();

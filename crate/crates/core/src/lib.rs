//! Quasi-probability error cancellation with binomial-expansion shot
//! allocation.
//!
//! The library inverts stochastic Pauli channels into the form
//! `(1 + eps1) I - eps2 E`, reorganizes a noisy circuit of `l` such gates
//! as a signed binomial series over generator-insertion orders, and
//! estimates observables by deterministically allocating shots to each
//! retained order. Standard gate-wise PEC, exponential zero-noise
//! extrapolation, and unmitigated estimation are included as baselines,
//! together with exact density-matrix and superoperator oracles for
//! small registers and a trajectory simulator for everything else.

pub mod baselines;
pub mod channel;
pub mod circuit;
pub mod error;
pub mod estimator;
pub mod exact;
pub mod gamma;
pub mod observable;
pub mod pauli;
pub mod rng;
pub mod statevector;
pub mod trajectory;

pub use baselines::{
    fit_zero_noise, pec_estimate, raw_estimate, sampling_variance_delta,
    variance_comparison_from_gammas, zne_estimate, VarianceComparison, ZneFit, ZneModel,
    ZnePoint,
};
pub use channel::{
    ChannelFile, PtmDiagonal, QuasiInverseChannel, QuasiTerm, StochasticPauliChannel,
};
pub use circuit::{
    build_tfim_trotter, infidelity_to_depolarizing, Circuit, CircuitOp, Gate, LatticeSpec,
    NoiseSite,
};
pub use error::{Error, Result};
pub use estimator::{
    estimate_order_k, estimator_variance, fpec_estimate, fpec_estimate_with_plan,
    EstimatorReport, Method, PerOrderStats,
};
pub use exact::{
    circuit_superoperator, exact_expectation, exact_expectation_superoperator,
    exact_order_expectations, order_k_superoperator, DensityMatrix, SuperOp,
};
pub use gamma::{allocate_shots, GammaSeries, ShotPlan, TruncationPolicy};
pub use observable::{parse_bitstring, DiagonalObservable};
pub use pauli::{Pauli, PauliString};
pub use rng::{derive_seed, RngStream};
pub use statevector::StateVector;
pub use trajectory::{run_trajectory, CompiledCircuit};

//! Reconstruction of a hidden `z ∈ {-1, +1}^n` from an estimator of
//! `r ↦ ⟨z, r⟩` that is only occasionally accurate.

pub mod attack;
pub mod estimator;
pub mod offset;

pub use attack::{
    brute_force_mu, default_samples, g_k, predictor_p, reconstruct_all, reconstruct_bit,
    reconstruct_bit_with, vote_mean, AttackRecord, Reconstruction, VoteTally,
};
pub use estimator::{
    certify_estimator, Estimator, EstimatorHandle, EstimatorProfile, ExactEstimator,
    LaplaceEstimator, TableEntry, TableEstimator, ZeroEstimator,
};
pub use offset::{
    sample_k, sample_m, sample_p, window_weight, OffsetDistribution, OffsetParams, OffsetSampler,
};

//! The agreement protocol over an inner-product channel, its leakage and the
//! reduction from eavesdroppers to inner-product estimators, and the hashing
//! amplifier with Goldreich–Levin decoding.

mod amplify;
mod gl;
mod hash;
mod protocol;

pub use amplify::{
    amplifier_stats, default_hash_bits, eve_amplified, max_attempts, repeat_stats,
    repeat_until_success, run_pi_h, AmplifiedView, AmplifierStats, HashAdversary, HashRun,
    RepeatOutcome, RepeatStats,
};
pub use gl::{gl_decode, GlParams, NoisyParity, ParityOracle, MAX_PROBES};
pub use hash::{eval_hash, sample_toeplitz_hash, ToeplitzHash, MAX_OUTPUT_BITS};
pub use protocol::{
    adversary_to_ip_estimator, agreement_rate, agreement_stats, equality_leakage_rate, quantize,
    run_pi_c, run_pi_c_on, Adversary, AdversaryEstimator, AgreementStats, BlindAdversary,
    EqualityLeakage, KaTranscript, LeakedInputAdversary, PartyOutputs, ProportionalAdversary,
};

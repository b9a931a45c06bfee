//! Reconstruction over channel triplets, the distinguishers and privacy
//! attacker built on it, and min-entropy experiments for `⟨X, Y⟩`.

mod entropy;
mod eve;
mod triplet;

pub use entropy::{
    condense_mod_counts, condense_mod_experiment, conditional_estimates, conditional_min_entropy,
    seeded_condense_experiment, MinEntropyEstimate, SeededCondenseReport,
};
pub use eve::{
    distinguisher_a, eve_dp, hidden_bit_hits, hidden_side, pair_position, search_eve_params,
    EveGrid, EveOutcome, EveParams, EveRun, EveSamples, EveSearch, FlipPattern, SearchBudget,
};
pub use triplet::{
    default_rec_samples, rec_score, rec_triplet, rhombus_scores, triplet_vote,
    LeakedProductEstimator, TripletEstimator, TripletSource, TripletView,
};

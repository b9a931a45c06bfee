//! Differentially private inner-product channels and the attacks and
//! protocols built on them.
//!
//! * [`sign`], [`source`], [`noise`]: sign-vector arithmetic and samplers.
//! * [`channel`]: channels producing `(x, y, transcript)` triplets, accuracy
//!   estimation and an empirical privacy audit.
//! * [`recon`]: reconstruction of a hidden vector from an inner-product
//!   estimator.
//! * [`condense`]: reconstruction over triplets, the flip distinguishers and
//!   min-entropy experiments.
//! * [`bounds`]: exact enumeration of conditioning bounds for uniform bits.
//! * [`agreement`]: the quantised key-agreement protocol, pairwise
//!   independent hashing, Goldreich–Levin decoding and the hash amplifier.

// Parameter guards are written `!(x > 0.0)` so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agreement;
pub mod bounds;
pub mod channel;
pub mod condense;
pub mod error;
pub mod noise;
pub mod recon;
pub mod rng;
pub mod sign;
pub mod source;
pub mod stats;

pub use error::{Error, Result};
pub use noise::{sample_rounded_laplace, Laplace, NoiseSample};
pub use sign::{inner_product, masked_inner_products, IndexSet, Punctured, Restricted, SignVector};
pub use source::{sample_sv_source, SvModel, SvSourceSpec};
pub use stats::Rate;

//! Error correction for cooperative data exchange.
//!
//! `n` clients each hold a subset of `k` packets over a prime field and
//! broadcast exactly one linear combination of what they hold. Some clients
//! may lie. The crate computes how many liars an instance tolerates and
//! builds encoding matrices that reach that bound. Each client decodes by
//! minimum Hamming distance, and [`sim`] replays exchanges against liars.
//!
//! Independent work items run on rayon when the default `parallel` feature
//! is enabled. Without it they run sequentially with identical results.

pub mod analysis;
pub mod codec;
mod combinatorics;
pub mod decoder;
pub mod field;
pub mod format;
mod matching;
pub mod model;
pub mod par;
pub mod sim;

pub use analysis::{analyze, AnalysisError, CapabilityReport};
pub use codec::{
    deterministic_encoding, random_encoding, verify_error_correction, CodecError, ConstructOptions,
    EncodingMatrix, LocalCode, SearchStrategy, VerificationReport, DEFAULT_BUDGET,
};
pub use combinatorics::{binomial, for_each_subset};
pub use decoder::{DecodeError, DecodeResult, DecodeStatus};
pub use field::{make_field, FieldElement, FieldError, FieldVector, Matrix, PrimeField};
pub use model::{CdeProblem, LocalSupport, ProblemError, SupportPattern};
pub use sim::{AdversaryPlan, SimError, Verdict};

//! Diagnostics: Sobolev and mixed space-time norms, frequency envelopes,
//! modulation splitting, and randomized ensemble audits.

mod audits;
mod envelope;
mod modulation;
mod norms;

pub use audits::{
    bernstein_audit, bernstein_bracket, commutator_audit, energy_bound_audit, energy_bound_exponent,
    sample_rng, BernsteinReport, CommutatorReport, EnergyBoundReport, PacketEnsemble, RandomField,
};
pub use envelope::{
    frequency_envelope, EnvelopeCheck, EnvelopeSource, FrequencyEnvelope, NormSelector, ENVELOPE_SLACK,
};
pub use modulation::{modulation_split, write_modulation_csv, ModulationSplit, COMPACT_EDGE, TIME_PADDING};
pub use norms::{mixed_norm, sobolev_norm, Derivative, MixedNormSpec, NormOrder};

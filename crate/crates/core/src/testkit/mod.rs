//! Testcase files, replay on the reference interpreter, and mutation
//! testing.

pub mod campaign;
pub mod json;
pub mod mutate;
pub mod replay;

pub use campaign::{mutation_campaign, CampaignConfig, CampaignReport};
pub use json::{emit_suite, load_tests, StoredTest};
pub use mutate::{mutate, Mutant, MutationKind, MutationOp};
pub use replay::{replay, Verdict};

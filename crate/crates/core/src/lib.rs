//! Deterministic Monte-Carlo simulator for team-sprint reward games.
//!
//! A fixed population of participants, each with a static performance level,
//! is reshuffled into equal-size teams every round. A team finishes when every
//! member has completed its share of a common base workload; the fastest team
//! wins the round's reward, which is split among its members either equally or
//! in proportion to performance. Repeating this over many rounds and many
//! independently seeded runs yields reward/fairness statistics per performance
//! level.
//!
//! Everything downstream of a master seed is reproducible bit for bit: the
//! same config and seed produce identical results (and identical output
//! files) regardless of how many worker threads execute the runs.

pub mod engine;
pub mod experiment;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod rng;

//! Problem generators: the congestion game, random instances and small
//! hand-built examples.

mod congestion;
mod examples;
mod random;

pub use congestion::{generate_congestion, CongestionParams, MAX_CONGESTION_AGENTS};
pub use examples::{dominated_target, private_action_leak, static_persuasion};
pub use random::{random_instance, random_lp, Family, RandomParams};

//! Cycle-level, trace-driven simulation of a core that predicts when each
//! instruction will issue and schedules through per-unit priority queues,
//! alongside in-order and reservation-station out-of-order reference cores.

pub mod backend;
pub mod cli;
pub mod cores;
pub mod memhier;
pub mod predictor;
pub mod rename;
pub mod stats;
pub mod trace;

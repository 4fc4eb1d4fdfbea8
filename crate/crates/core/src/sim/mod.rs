//! Desk-scale simulation of the asynchronous two-sender system.
//!
//! A code is built once, then each trial draws messages, assembles the two
//! input windows for the given delay, samples the channel, decodes
//! exhaustively and records the resulting error pattern.

pub mod classify;
pub mod code;
pub mod decode;
pub mod geometry;
pub mod trials;

pub use classify::{classify_pattern, classify_sets, Classification, ErrorPattern, IrreducibleComponent};
pub use code::{message_count, AmacCode, CodeSpec};
pub use decode::{
    min_conditional_entropy_decode, x_window, y_window, Decoded, MessageTuples, MmiDecoder, DEFAULT_DECODE_CAP,
    TIE_TOL,
};
pub use geometry::DelayGeometry;
pub use trials::{run_trials, wilson_interval, PatternCount, PatternTally, TallyParams, Z95};

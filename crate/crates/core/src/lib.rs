//! Error exponents, capacity regions and small-scale simulation for
//! two-sender asynchronous multiple-access channels.
//!
//! All information quantities are in bits.

pub mod channels;
pub mod error;
pub mod exponent;
pub mod patterns;
pub mod prob;
pub mod region;
pub mod sim;
pub mod subtypes;

pub use error::{Error, Result};

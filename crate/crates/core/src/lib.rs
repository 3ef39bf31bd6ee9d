//! Pairwise check decoding for LDPC-coded two-way relay channels.

pub mod bp;
pub mod catalog;
pub mod channel;
pub mod codes;
pub mod error;
pub mod gf;
pub mod ldpc;
pub mod mapping;
pub mod outage;
pub mod par;
pub mod pcd;
pub mod prob;
pub mod sim;
pub mod tab;

pub use error::{Error, Result};

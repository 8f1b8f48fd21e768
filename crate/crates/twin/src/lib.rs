//! Digital-twin pipeline for online communities: providers, file formats,
//! stage orchestration and the `twin` command line.
//!
//! The algorithms live in [`twin_core`]; this crate adds everything that
//! touches files, the network, or threads.

pub mod cli;
pub mod config;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod manifest;
pub mod pipeline;
pub mod providers;
pub mod screening;
pub mod synthgen;
pub mod toy;

pub use config::Config;
pub use error::{Result, TwinError};
pub use pipeline::{Pipeline, Stage};

use sha2::{Digest, Sha256};

/// A sub-seed for one named part of the run, so that adding a community or
/// topic never shifts the random streams of the others.
pub fn derive_seed(seed: u64, parts: &[&str]) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

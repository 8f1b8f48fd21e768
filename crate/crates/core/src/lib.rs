//! Core algorithms for building and evaluating digital twins of online
//! communities.
//!
//! Everything in this crate is pure computation over owned data. It needs an
//! allocator but no operating system, so the IO-heavy pipeline (model
//! providers, file formats, the command line) lives in the companion `twin`
//! crate and calls into here.

#![no_std]

extern crate alloc;

pub mod agreement;
pub mod alignment;
pub mod classify;
pub mod corpus;
pub mod demos;
mod error;
pub mod frechet;
pub mod graph;
pub mod linalg;
pub mod rouge;
pub mod sampling;
pub mod screen;
pub mod synth;
pub mod topics;

pub use error::{Error, Result};

pub use corpus::{Corpus, Document, Provenance};
pub use graph::{InteractionGraph, Partition};

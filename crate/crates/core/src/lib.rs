//! Extractable commitments from PRG-based bit commitments, commit-and-prove
//! via MPC in the head, and the protocols built on top of them.

pub mod bits;
pub mod error;
pub mod field;
pub mod prg;
pub mod wire;

pub mod base_commit;
pub mod circuit;
pub mod ecnp;
pub mod extcom;
pub mod mpc;
pub mod vss;
pub mod wextcom;

pub mod apps;
pub mod harness;
pub mod transport;

pub mod cli;

pub use bits::Bits;
pub use error::{Error, Result};

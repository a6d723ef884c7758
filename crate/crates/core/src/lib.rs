//! Document listing and top-k document retrieval over collections of
//! documents, with brute-force, RMQ-based and precomputed (grammar
//! compressed) structures, synthetic collection generators and a
//! benchmark harness.

pub mod bits;
pub mod cli;
pub mod bench;
pub mod corpus;
pub mod datagen;
pub mod doclist;
pub mod error;
pub mod format;
pub mod grammar;
pub mod index;
pub mod par;
pub mod pdl;
pub mod rmq;
pub mod suffixes;

pub use corpus::Collection;
pub use error::{Error, Result};
pub use index::{Index, Structure};

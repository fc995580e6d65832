pub mod bridge;
pub mod catalog;
pub mod corpus;
pub mod dialogue;
pub mod error;
pub mod harness;
pub mod hash;
pub mod metapolicy;
pub mod rng;
pub mod strategies;

pub use error::{Error, Result};

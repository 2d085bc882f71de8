//! Exact computation in generalised Hecke algebras `H_sigma(G, H)` of concrete
//! Hecke triples.

pub mod arith;
pub mod cyclotomic;
pub mod error;
pub mod group;

pub use error::{HeckeError, Result};
pub mod characters;
pub mod matrix;
pub mod scenario;
pub mod hecke;
pub mod qadic;
pub mod induced;
pub mod completion;
pub mod config;
pub mod report;
pub mod acceptance;

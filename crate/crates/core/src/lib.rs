pub mod arrangement;
pub mod certificate;
pub mod cli;
pub mod commutant;
pub mod constructions;
pub mod error;
pub mod opcore;
pub mod schauder;
pub mod seqcore;
pub mod spectral;

pub use error::{Error, Result};

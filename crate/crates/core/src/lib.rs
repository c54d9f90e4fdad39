pub mod cf;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod doc2vec;
pub mod embedding;
pub mod enrichment;
pub mod eval;
pub mod error;
pub mod io;
pub mod lda;
pub mod matcher;
pub mod pairing;
pub mod synth;
pub mod tfidf;

pub use error::{Error, Result};

//! Entity and relation extraction over military news text: BRAT corpus I/O,
//! IOB tagging, dependency paths, person attachment strategies and their
//! evaluation.

pub mod cli;
pub mod config;
pub mod conllu;
pub mod corpus;
pub mod depgraph;
pub mod error;
pub mod eval;
pub mod iob;
pub mod ner;
pub mod pipeline;
pub mod reference;
pub mod relext;
pub mod relnet;
pub mod text;
pub mod tokenize;

pub use error::{Error, Result};

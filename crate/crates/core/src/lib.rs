//! Thematic segment alignment across comparable documents.
//!
//! The pipeline annotates paragraphs with concept ids, separates background,
//! document-specific and theme-specific words with a two-level LDA, assigns
//! paragraph themes with a sticky HMM and evaluates the resulting segments
//! against gold section headings.

pub mod align;
pub mod concepts;
pub mod corpus;
pub mod error;
pub mod lda2;
pub mod model;
mod sampling;
pub mod synthetic;
pub mod theme;

pub use error::{Error, Result};

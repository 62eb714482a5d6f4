//! Bibliographic corpus construction and scientometric indicators.
//!
//! Loads line-delimited bibliographic records from two sources, selects
//! documents with thesaurus queries, links and filters the sources, cleans
//! author keywords, builds co-occurrence topic maps and computes
//! country-level indicators.

pub mod corpus;
pub mod error;
pub mod indicators;
pub mod keywords;
pub mod mesh;
pub mod pipeline;
pub mod records;
pub mod text;
pub mod topicmap;

pub use error::{Error, Result};

//! Detection of anomalous journal citation patterns in bibliographic corpora.

// Negated float comparisons are how NaN parameters get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attribution;
pub mod config;
pub mod corpus;
pub mod error;
pub mod graph;
pub mod ids;
pub mod metrics;
pub mod patterns;
pub mod report;
pub mod synth;

pub use error::{Error, Result};
pub use ids::{AuthorId, JournalId, PaperId, Publisher, WindowLen, YearRange};

//! Code reviewer recommendation by ranking on a PR/developer hypergraph.
//!
//! The usual flow is [`corpus::parse_export`] and [`corpus::clean`] to get a
//! [`ReviewCorpus`], then a [`Recommender`] built from it to rank developers
//! for incoming pull requests. [`evaluation::run_comparison`] replays a
//! corpus month by month against the baselines.

pub mod baselines;
pub mod config;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod hypergraph;
pub mod params;
pub mod ranker;
pub mod recommender;

pub use corpus::{clean, parse_export, CleanOptions, PullRequest, ReviewComment, ReviewCorpus};
pub use error::{Error, Result};
pub use hypergraph::{build, Hypergraph};
pub use params::{HyperParams, SimilarityUnit, SolverKind};
pub use recommender::{Candidate, Recommendation, Recommender, TargetPr};

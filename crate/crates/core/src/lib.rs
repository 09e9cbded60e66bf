pub mod classifier;
pub mod contrastive;
pub mod corpus;
pub mod metrics;
pub mod report;
pub mod synthgen;

//! Stable matchings for the stable roommates problem with incomplete lists,
//! optimal under profile- and cost-based criteria.

pub mod analysis;
pub mod approx;
pub mod bench;
pub mod criteria;
pub mod engine;
pub mod fixtures;
pub mod ipexport;
pub mod model;
pub mod oracle;
pub mod reductions;

pub use model::{AgentId, Instance, Matching};

pub mod continuation;
pub mod error;
pub mod family;
pub mod flow;
pub mod homology;
pub mod mirror;
pub mod monodromy;
pub mod poly;
pub mod strata;

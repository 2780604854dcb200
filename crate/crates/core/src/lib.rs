//! Area-tilted non-intersecting random walks above a hard wall.

pub mod exact;
pub mod model;
pub mod numeric;
pub mod rng;
pub mod gibbs;
pub mod oracle;
pub mod analysis;
pub mod cli;

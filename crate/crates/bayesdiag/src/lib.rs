pub mod dataset;
pub mod error;
pub mod inference;
pub mod infoscore;
pub mod model;
pub mod rootcause;
pub mod structure;
pub mod synthgen;
pub mod tree;

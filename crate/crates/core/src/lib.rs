pub mod cpd;
pub mod error;
pub mod measures;
pub mod verdict;
pub mod subnormality;
pub mod similarity;
pub mod quasiaffine;
pub mod wab;
pub mod cli;

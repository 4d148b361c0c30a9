pub mod conegeom;
pub mod config;
pub mod error;
pub mod graph;
pub mod grid;
pub mod io;
pub mod minimality;
pub mod pipeline;
pub mod rof;
mod sampling;

pub use error::{Error, Result};
pub use graph::WeightedGraph;

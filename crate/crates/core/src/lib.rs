pub mod combinatorics;
pub mod constructions;
pub mod posets;
pub mod projections;
pub mod diagram;
pub mod cli;

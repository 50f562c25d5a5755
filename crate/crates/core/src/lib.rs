pub mod alphabound;
pub mod cli;
pub mod constraints;
pub mod dense;
pub mod error;
pub mod graph;
pub mod operator;
pub mod oracle;
pub mod paulidecomp;
pub mod simulator;
pub mod solver;

pub mod cli;
pub mod curve;
pub mod form;
pub mod kernels;
pub mod linalg;
pub mod obstruction;
pub mod operators;
pub mod parse;
pub mod poly;
pub mod regularization;
pub mod residue;
pub mod selftest;

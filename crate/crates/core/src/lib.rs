//! Numerical and symbolic checks for Lie algebroids, Jacobi manifolds,
//! A-path homotopies, monodromy of sphere families and finite groupoids.

pub mod algebroid;
pub mod contact;
pub mod correspondence;
pub mod expr;
pub mod fixtures;
pub mod groupoid;
pub mod jacobi;
pub mod monodromy;
pub mod path;
pub mod sample;
pub mod suites;

pub use expr::{parse, Expr};

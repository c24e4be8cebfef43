//! Exact integer solving of unit constraints.

pub mod hnf;
pub mod lattice;
pub mod matrix;
pub mod modhnf;
pub mod solve;

pub use hnf::{hnf, Matrix};
pub use matrix::{constraints_to_matrix, AugMatrix, Column};
pub use modhnf::{modified_hnf, ModHnfReport};
pub use solve::{is_consistent, solve, solve_with, Inconsistent, Solution, SolveOptions};

//! Finite-dimensional density-matrix dynamics generated by a triple bracket
//! of the average energy and an entropy Casimir.
//!
//! With the quadratic entropy `S₂ = ½ Tr ρ²` the flow is the ordinary
//! Liouville–von Neumann equation; the Rényi-type generators make it
//! nonlinear on mixed states while leaving the spectrum of `ρ` invariant.

pub mod brackets;
pub mod dynamics;
pub mod generators;
pub mod harness;
pub mod infotheory;
pub mod matrix;
pub mod rng;

pub use brackets::{Functional, BracketError};
pub use dynamics::{evolve, exact_linear, EvolutionSpec, Trajectory, DynamicsError};
pub use generators::{CompositePart, EntropyGenerator, F2Profile, GeneratorError};
pub use matrix::{BipartiteShape, DensityMatrix, HermitianMatrix, MatrixError, Subsystem};

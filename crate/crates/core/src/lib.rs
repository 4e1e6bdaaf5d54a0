//! Simplicial models for multi-agent epistemic logic, their duality with
//! Kripke models, dynamic epistemic product update, and a solvability
//! checker for distributed tasks.

pub mod complex;
pub mod del;
pub mod dot;
pub mod duality;
pub mod generators;
pub mod io;
pub mod kripke;
pub mod logic;
pub mod protocols;
pub mod solver;
pub mod tasks;

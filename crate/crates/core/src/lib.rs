//! A concolic test generator for a small functional language with default
//! terms.
//!
//! Programs are parsed from `.dfc` sources, checked, optionally rewritten,
//! and explored path by path: each run records the branch constraints it
//! took, the explorer negates the deepest unexplored one, and the solver
//! produces the next input. Every run becomes a replayable testcase.

#![allow(clippy::should_implement_trait)]

pub mod ast;
pub mod concolic;
pub mod explorer;
pub mod interp;
pub mod opaque;
pub mod ops;
pub mod parser;
pub mod solver;
pub mod symbolic;
pub mod testkit;
pub mod transforms;
pub mod validate;
pub mod value;

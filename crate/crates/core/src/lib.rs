//! Stochastic synthesis of low-level looping programs from input/output examples.
//!
//! A program here is a fixed-length sequence of (opcode, operand) instructions
//! in one of two tiny languages: a simplified x86-64 subset operating on six
//! 64-bit registers plus a memory block, and a single-node TIS-100 machine that
//! paints a 30x18 image. Search is delayed-acceptance hillclimbing: candidates
//! are gathered for a period of `I` evaluations, the period's best is accepted,
//! and its score becomes the threshold for the next period's random walk.
//!
//! The crate is organized around that pipeline:
//!
//! - [`isa`]: instruction/program representation, sampling, text format
//! - [`x86`] / [`tis100`]: deterministic interpreters with resource bounds
//! - [`scoring`]: per-example scoring and the simplicity bonus
//! - [`benchmarks`]: problem generators, reference oracles, time bounds
//! - [`search`]: delayed-acceptance and basic hillclimbing
//! - [`harness`]: multi-level run protocol, grid search, trajectory export

pub mod benchmarks;
pub mod harness;
pub mod isa;
pub mod rng;
pub mod scoring;
pub mod search;
pub mod tis100;
pub mod x86;

pub use isa::{Instruction, MachineProfile, Program};
pub use search::{RunRecord, SearchParams};

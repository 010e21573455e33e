//! Wall-state engineering for open quantum systems.
//!
//! A controllable system is split into a logical factor that stores information
//! and a wall factor that absorbs the coupling to an environment. This crate
//! finds the split, picks the wall state, simulates stabilizing controls and
//! certifies eternal lower bounds on logical purity.

// `!(x > 0.0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decoupling;
pub mod dynamics;
pub mod error;
pub mod eternal;
pub mod frame;
pub mod manifold;
pub mod models;
pub mod rng;
pub mod tensor;
pub mod wall;

pub use error::{Error, Result};

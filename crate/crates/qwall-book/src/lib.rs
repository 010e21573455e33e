//! The guide in `book/`, compiled so its snippets run as doctests.

#[doc = include_str!("../../../book/src/overview.md")]
pub mod overview {}
#[doc = include_str!("../../../book/src/tensor.md")]
pub mod tensor {}
#[doc = include_str!("../../../book/src/frames.md")]
pub mod frames {}
#[doc = include_str!("../../../book/src/wall.md")]
pub mod wall {}
#[doc = include_str!("../../../book/src/dynamics.md")]
pub mod dynamics {}
#[doc = include_str!("../../../book/src/decoupling.md")]
pub mod decoupling {}
#[doc = include_str!("../../../book/src/eternal.md")]
pub mod eternal {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

//! Compiles every Rust snippet in the book as a doctest, one module per
//! chapter so a failure points at its chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/emd.md")]
pub mod emd {}
#[doc = include_str!("../../../book/src/laplacian.md")]
pub mod laplacian {}
#[doc = include_str!("../../../book/src/mechanism.md")]
pub mod mechanism {}
#[doc = include_str!("../../../book/src/evaluation.md")]
pub mod evaluation {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

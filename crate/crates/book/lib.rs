//! Compiles the guide in `book/src` as doctests.

#[doc = include_str!("../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../book/src/geometry.md")]
pub mod geometry {}
#[doc = include_str!("../../book/src/online.md")]
pub mod online {}
#[doc = include_str!("../../book/src/games.md")]
pub mod games {}
#[doc = include_str!("../../book/src/verification.md")]
pub mod verification {}
#[doc = include_str!("../../book/src/cli.md")]
pub mod cli {}

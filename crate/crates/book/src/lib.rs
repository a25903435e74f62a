//! The guide in `book/` is written for mdbook, which cannot run its own Rust
//! code blocks against an external crate. Each chapter is pulled in here as
//! the docs of an empty module so `cargo test --doc` runs them instead.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/states.md")]
pub mod states {}
#[doc = include_str!("../../../book/src/conditional-entropies.md")]
pub mod conditional_entropies {}
#[doc = include_str!("../../../book/src/exponents.md")]
pub mod exponents {}
#[doc = include_str!("../../../book/src/codes.md")]
pub mod codes {}
#[doc = include_str!("../../../book/src/duality.md")]
pub mod duality {}
#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

//! The user guide, compiled into the crate so its examples are tested.
//!
//! Each submodule embeds one chapter of the mdbook under `book/src/` via
//! `include_str!`; `cargo test --doc` therefore runs every code snippet the
//! guide shows. Build the rendered book with `mdbook build book` from the
//! workspace root, or read the chapters here.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/plans.md")]
pub mod plans {}

#[doc = include_str!("../../../book/src/automata.md")]
pub mod automata {}

#[doc = include_str!("../../../book/src/encoding.md")]
pub mod encoding {}

#[doc = include_str!("../../../book/src/witnesses.md")]
pub mod witnesses {}

#[doc = include_str!("../../../book/src/exploration.md")]
pub mod exploration {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

#[doc = include_str!("../../../book/src/formats.md")]
pub mod formats {}

//! Runs every code block of the book as a doc-test, so `cargo test` fails
//! whenever the guide drifts from the library. One module per chapter keeps
//! failures attributable to a file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/graphs.md")]
pub mod graphs {}

#[doc = include_str!("../../../book/src/spectral.md")]
pub mod spectral {}

#[doc = include_str!("../../../book/src/reservoir.md")]
pub mod reservoir {}

#[doc = include_str!("../../../book/src/stability.md")]
pub mod stability {}

#[doc = include_str!("../../../book/src/readout.md")]
pub mod readout {}

#[doc = include_str!("../../../book/src/selection.md")]
pub mod selection {}

#[doc = include_str!("../../../book/src/datasets.md")]
pub mod datasets {}

//! The guide chapters, compiled so their snippets run as doc-tests.

#[doc = include_str!("../../../book/src/graphs.md")]
pub mod graphs {}

#[doc = include_str!("../../../book/src/covers.md")]
pub mod covers {}

#[doc = include_str!("../../../book/src/bethe.md")]
pub mod bethe {}

#[doc = include_str!("../../../book/src/decoding.md")]
pub mod decoding {}

#[doc = include_str!("../../../book/src/ldpc.md")]
pub mod ldpc {}

//! The guide's chapters, mounted as doc-tests.
//!
//! Every fenced Rust block in `book/src/*.md` compiles and runs under
//! `cargo test --doc`, one module per chapter so a failure names its
//! chapter. This only exists while rustdoc collects doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/destinations.md")]
pub mod destinations {}

#[doc = include_str!("../../../book/src/lab.md")]
pub mod lab {}

#[doc = include_str!("../../../book/src/dns-control.md")]
pub mod dns_control {}

#[doc = include_str!("../../../book/src/capture.md")]
pub mod capture {}

#[doc = include_str!("../../../book/src/campaigns.md")]
pub mod campaigns {}

#[doc = include_str!("../../../book/src/analysis.md")]
pub mod analysis {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

#[doc = include_str!("../../../book/src/formats.md")]
pub mod formats {}

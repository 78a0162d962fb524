//! The chapters of the book, compiled so their listings run as doc-tests.

#![doc = include_str!("../../../book/src/introduction.md")]

#[doc = include_str!("../../../book/src/quotes.md")]
pub mod quotes {}

#[doc = include_str!("../../../book/src/convex-order.md")]
pub mod convex_order {}

#[doc = include_str!("../../../book/src/wasserstein.md")]
pub mod wasserstein {}

#[doc = include_str!("../../../book/src/payoffs.md")]
pub mod payoffs {}

#[doc = include_str!("../../../book/src/transport.md")]
pub mod transport {}

#[doc = include_str!("../../../book/src/convergence.md")]
pub mod convergence {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

//! The book chapters, compiled as doctests so their snippets stay in step
//! with the library. `cargo test -p pcl-guide` runs them.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}
#[doc = include_str!("../../../book/src/channel.md")]
pub mod channel {}
#[doc = include_str!("../../../book/src/mutual-information.md")]
pub mod mutual_information {}
#[doc = include_str!("../../../book/src/expansion.md")]
pub mod expansion {}
#[doc = include_str!("../../../book/src/capacity.md")]
pub mod capacity {}
#[doc = include_str!("../../../book/src/unit-cost.md")]
pub mod unit_cost {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

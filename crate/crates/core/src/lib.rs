//! Synthetic layered-depth scenes: procedural generation, multi-layer ground
//! truth rendering, relative depth annotations and evaluation. The guide in
//! `book/` walks through each part.

pub mod annotations;
pub mod canonical;
pub mod fsutil;
pub mod geometry;
pub mod metrics;
pub mod render;
pub mod rng;
pub mod scenegen;

// The guide's snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/scenes.md")]
    mod scenes {}
    #[doc = include_str!("../../../book/src/layers.md")]
    mod layers {}
    #[doc = include_str!("../../../book/src/annotations.md")]
    mod annotations {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

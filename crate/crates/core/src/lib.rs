//! Boundaries of bipartite Boltzmann planar maps.
//!
//! Weight sequences and their offspring law, the perimeter partition
//! function and its simple-boundary companion, the offspring laws of the
//! tree of components, plane trees with the Janson–Stefánsson bijection,
//! and looptree maps.
#![no_std]

extern crate alloc;

pub mod error;
pub mod laws;
pub mod maps;
pub mod poly;
pub mod quad;
pub mod rng;
pub mod series;
pub mod special;
pub mod trees;
pub mod weights;

pub use error::Error;

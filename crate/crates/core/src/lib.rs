//! Exact simulation and analysis of combinatorial multi-access coded caching.
//!
//! `C` caches serve `K = binom(C, r)` users, one per `r`-subset of caches.
//! The crate builds uncoded and MDS-coded placements over GF(2^m), runs the
//! delivery phase on real symbols, decodes every user, and computes exact
//! rate-memory trade-offs together with a matching lower bound.

pub mod analysis;
pub mod combinatorics;
pub mod decode;
pub mod delivery;
pub mod dump;
pub mod gf;
pub mod mds;
pub mod model;
pub mod placement;
pub mod simulate;

pub use combinatorics::{Rational, Subset};
pub use gf::{Elem, Field, Matrix};
pub use mds::MdsCode;
pub use model::{BroadcastBatch, CacheContents, DemandVector, Library, Scheme, SchemeConfig};

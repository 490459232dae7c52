//! Curl eigenforms on products S¹×Σ and the tight/overtwisted dichotomy of
//! their contact structures, discretized on closed triangle meshes.
//!
//! The crate is `no_std` with `alloc`; file formats and the command line
//! live in the `overtwist` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bundle;
pub mod contact;
pub mod dec;
pub mod energy;
pub mod error;
pub mod flow;
pub mod linalg;
pub mod mesh;
pub mod nodal;
pub mod rng;
pub mod search;
pub mod spectral;

pub use error::{Error, Result};

//! Two-round perfectly secure message transmission over `n = 2t+1` channels.
//!
//! The crate is organised bottom-up: finite fields, Reed-Solomon codes and
//! their privacy pair, pseudo-bases, broadcast primitives, a simulated
//! channel medium, the protocols, and the rank-metric variant.

pub mod broadcast;
pub mod channels;
pub mod gf;
pub mod linalg;
pub mod mds;
pub mod protocols;
pub mod pseudobasis;
pub mod rankmetric;

pub use gf::{Fe, Field, FieldError};
pub use mds::{build_privacy_pair, LinearCode, MaskVector, ReedSolomon, Syndrome, Word};

//! Certified decision procedures for domain-type equivalence relations on
//! finitely represented self-adjoint operators, the reduction maps between
//! them, and finite-truncation spectral numerics.
//!
//! Sequences are represented exactly (prefix plus closed-form tail) so that
//! every decision is total and every verdict carries a re-checkable witness.

pub mod cert;
pub mod eqrel;
pub mod error;
pub mod gen;
pub mod opmodel;
pub mod rat;
pub mod reductions;
pub mod seqrep;
pub mod spectra;

pub use error::{Error, Result};
pub use rat::Rat;
pub use seqrep::{DimSeqRep, DimTail, ExtNat, Lane, RealSeqRep};

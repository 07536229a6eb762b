//! Finitely represented infinite sequences: an explicit prefix followed by a
//! closed-form tail, over the rationals or over the extended naturals.

mod dim;
mod extnat;
mod real;

pub use dim::{DimSeqRep, DimTail};
pub use extnat::{extnat_sum, ExtNat};
pub use real::{Aligned, Lane, LaneSign, RealSeqRep};

//! Decision procedures for the three sequence equivalences.

mod e1;
mod linf;
mod sigma;

pub use e1::{decide_e1, E1Verdict};
pub(crate) use linf::doubling_search;
pub use linf::{decide_linf, LinfVerdict, LINF_WITNESS_GAP};
pub use sigma::{
    compose_sigma_witnesses, decide_esigma, esigma_box, k_cap, stabilization_bound, violates,
    BoxCheck, Side, SigmaReason, SigmaVerdict, SigmaWitness, Violation,
};

use num::{Signed, Zero};

use crate::rat::{self, Rat};
use crate::seqrep::{Lane, RealSeqRep};

/// Refutation witnesses exhibit an index where the sequences differ by more
/// than this.
pub const LINF_WITNESS_GAP: i64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum LinfVerdict {
    /// `|a_n - b_n| <= bound` for every `n`; `bound` is the exact supremum.
    Equivalent { bound: Rat },
    /// `|a_index - b_index| > LINF_WITNESS_GAP`, and the difference is
    /// unbounded along the lane described by `schedule`.
    NotEquivalent { schedule: String, index: u64 },
}

impl LinfVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, LinfVerdict::Equivalent { .. })
    }
}

/// Supremum of `|x(q) - y(q)|` over `q >= 0` when finite.
pub(crate) fn lane_gap(x: &Lane, y: &Lane) -> Option<Rat> {
    match x.add(&y.scale(&rat::int(-1)))?.normalized() {
        Lane::Const(c) => Some(c.abs()),
        _ => None,
    }
}

fn describe(x: &Lane, y: &Lane) -> &'static str {
    match (x, y) {
        (Lane::Affine { .. }, Lane::Affine { .. }) => "affine slopes differ",
        (Lane::Geometric { .. }, Lane::Geometric { .. }) => "geometric terms differ",
        (Lane::Geometric { .. }, _) | (_, Lane::Geometric { .. }) => {
            "geometric against non-geometric"
        }
        _ => "affine against constant",
    }
}

/// Smallest cycle on a doubling schedule where `pred` holds. `pred` must
/// hold for all sufficiently large cycles.
pub(crate) fn doubling_search(mut pred: impl FnMut(u64) -> bool) -> u64 {
    if pred(0) {
        return 0;
    }
    let mut q = 1u64;
    while !pred(q) {
        q = q.checked_mul(2).expect("doubling search overflowed");
    }
    q
}

/// Decides `sup_n |a_n - b_n| < inf`.
pub fn decide_linf(a: &RealSeqRep, b: &RealSeqRep) -> LinfVerdict {
    let al = RealSeqRep::aligned(a, b);
    let mut bound = Rat::zero();
    for (x, y) in al.prefix_a.iter().zip(&al.prefix_b) {
        bound = bound.max((x - y).abs());
    }
    for (j, (x, y)) in al.lanes_a.iter().zip(&al.lanes_b).enumerate() {
        match lane_gap(x, y) {
            Some(g) => bound = bound.max(g),
            None => {
                let gap = rat::int(LINF_WITNESS_GAP);
                let q = doubling_search(|q| (x.eval(q as i64) - y.eval(q as i64)).abs() > gap);
                return LinfVerdict::NotEquivalent {
                    schedule: format!(
                        "{} on residue {} mod {} from index {}",
                        describe(x, y),
                        (al.start + j) % al.period,
                        al.period,
                        al.start
                    ),
                    index: al.index(j, q),
                };
            }
        }
    }
    LinfVerdict::Equivalent { bound }
}

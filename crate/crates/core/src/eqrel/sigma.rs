//! Window-sum domination between extended-natural sequences.
//!
//! `a ~ b` holds when for some `k` and all `n, l >= 0`
//!
//! ```text
//! sum_{i=0}^{l} a_{n+i} <= sum_{j=-k}^{l+k} b_{n+j}   and the same with a, b swapped
//! ```
//!
//! The decision reduces the infinitely many constraints for a fixed `k` to a
//! finite box (the tails are periodic, so every constraint past the prefixes
//! repeats one inside the box), and searches `k` using monotonicity in `k`.

use num::Zero;

use crate::error::{Error, Result};
use crate::seqrep::{DimSeqRep, DimTail, ExtNat};

/// Which of the two inequalities a violation breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// `sum a[n..=n+l] <= sum b[n-k..=n+l+k]`
    AInB,
    /// `sum b[n..=n+l] <= sum a[n-k..=n+l+k]`
    BInA,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::AInB => "a_in_b",
            Side::BInA => "b_in_a",
        }
    }

    pub fn parse(s: &str) -> Option<Side> {
        match s {
            "a_in_b" => Some(Side::AInB),
            "b_in_a" => Some(Side::BInA),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Violation {
    pub n: u64,
    pub l: u64,
    pub side: Side,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SigmaWitness {
    pub k: u64,
    pub violation: Violation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SigmaReason {
    InfCountMismatch,
    DensityMismatch,
    PrefixObstruction,
}

impl SigmaReason {
    pub fn as_str(self) -> &'static str {
        match self {
            SigmaReason::InfCountMismatch => "inf_count_mismatch",
            SigmaReason::DensityMismatch => "density_mismatch",
            SigmaReason::PrefixObstruction => "prefix_obstruction",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "inf_count_mismatch" => Some(SigmaReason::InfCountMismatch),
            "density_mismatch" => Some(SigmaReason::DensityMismatch),
            "prefix_obstruction" => Some(SigmaReason::PrefixObstruction),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SigmaVerdict {
    /// Minimal `k`; both inequalities hold on `[0, n_max] x [0, l_max]`,
    /// which covers every distinct constraint.
    Equivalent { k: u64, n_max: u64, l_max: u64 },
    /// One violation per `k <= k_cap`. For larger `k` the reason's schedule
    /// applies.
    NotEquivalent {
        reason: SigmaReason,
        k_cap: u64,
        witnesses: Vec<SigmaWitness>,
    },
}

impl SigmaVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, SigmaVerdict::Equivalent { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoxCheck {
    pub holds: bool,
    pub first_violation: Option<Violation>,
}

/// Checks one constraint by direct window sums.
pub fn violates(a: &DimSeqRep, b: &DimSeqRep, k: u64, v: Violation) -> bool {
    let (lhs, rhs) = match v.side {
        Side::AInB => (a, b),
        Side::BInA => (b, a),
    };
    lhs.window_sum(v.n as i64, v.l) > rhs.window_sum(v.n as i64 - k as i64, v.l + 2 * k)
}

/// Both inequalities for every `0 <= n <= n_max`, `0 <= l <= l_max`.
pub fn esigma_box(a: &DimSeqRep, b: &DimSeqRep, k: u64, n_max: u64, l_max: u64) -> BoxCheck {
    for n in 0..=n_max {
        for l in 0..=l_max {
            for side in [Side::AInB, Side::BInA] {
                let v = Violation { n, l, side };
                if violates(a, b, k, v) {
                    return BoxCheck {
                        holds: false,
                        first_violation: Some(v),
                    };
                }
            }
        }
    }
    BoxCheck {
        holds: true,
        first_violation: None,
    }
}

/// Box size certified for witness `k`: `len_a + len_b + 2 lcm(p_a, p_b) (k + 2)`.
pub fn stabilization_bound(a: &DimSeqRep, b: &DimSeqRep, k: u64) -> u64 {
    let p = DimSeqRep::common_period(a, b) as u64;
    a.prefix().len() as u64 + b.prefix().len() as u64 + 2 * p * (k + 2)
}

/// Largest `k` for which refutations list an explicit violation.
pub fn k_cap(a: &DimSeqRep, b: &DimSeqRep) -> u64 {
    let p = DimSeqRep::common_period(a, b) as u64;
    a.prefix().len() as u64 + b.prefix().len() as u64 + 4 * p + 8
}

/// Candidate witness for `(a, c)` from witnesses for `(a, b)` and `(b, c)`.
pub fn compose_sigma_witnesses(k_ab: u64, k_bc: u64) -> u64 {
    k_ab + k_bc
}

/// Prefix sums of a sequence over a finite horizon, with the count of
/// infinite entries tracked separately.
struct Cumulative {
    fin: Vec<u64>,
    infs: Vec<u32>,
}

impl Cumulative {
    fn new(s: &DimSeqRep, horizon: usize) -> Self {
        let mut fin = Vec::with_capacity(horizon + 1);
        let mut infs = Vec::with_capacity(horizon + 1);
        fin.push(0);
        infs.push(0);
        for i in 0..horizon {
            let (f, c) = match s.eval(i as i64) {
                ExtNat::Fin(v) => (v, 0),
                ExtNat::Inf => (0, 1),
            };
            fin.push(fin[i] + f);
            infs.push(infs[i] + c);
        }
        Cumulative { fin, infs }
    }

    /// Sum over `[lo, hi]` with negative indices clipped.
    fn window(&self, lo: i64, hi: i64) -> ExtNat {
        if hi < 0 {
            return ExtNat::Fin(0);
        }
        let lo = lo.max(0) as usize;
        let hi = hi as usize + 1;
        if self.infs[hi] > self.infs[lo] {
            ExtNat::Inf
        } else {
            ExtNat::Fin(self.fin[hi] - self.fin[lo])
        }
    }
}

struct Problem<'a> {
    a: &'a DimSeqRep,
    b: &'a DimSeqRep,
    /// Start of the region where both tails are in force.
    tail_start: u64,
    period: u64,
}

impl<'a> Problem<'a> {
    fn new(a: &'a DimSeqRep, b: &'a DimSeqRep) -> Self {
        Problem {
            a,
            b,
            tail_start: a.prefix().len().max(b.prefix().len()) as u64,
            period: DimSeqRep::common_period(a, b) as u64,
        }
    }

    /// Box that contains a representative of every constraint for `k` when
    /// the tails have equal means (or are both infinite).
    fn exact_box(&self, k: u64) -> u64 {
        self.tail_start + k + self.period
    }

    /// First violation of the constraints for `k` inside its exact box.
    fn first_violation(&self, k: u64) -> Option<Violation> {
        let bound = self.exact_box(k);
        let horizon = (2 * bound + 2 * k + 2) as usize;
        let ca = Cumulative::new(self.a, horizon);
        let cb = Cumulative::new(self.b, horizon);
        let k = k as i64;
        for n in 0..bound {
            for l in 0..bound {
                let (ni, li) = (n as i64, l as i64);
                if ca.window(ni, ni + li) > cb.window(ni - k, ni + li + k) {
                    return Some(Violation {
                        n,
                        l,
                        side: Side::AInB,
                    });
                }
                if cb.window(ni, ni + li) > ca.window(ni - k, ni + li + k) {
                    return Some(Violation {
                        n,
                        l,
                        side: Side::BInA,
                    });
                }
            }
        }
        None
    }
}

/// Decides window-sum domination and returns a certificate.
pub fn decide_esigma(a: &DimSeqRep, b: &DimSeqRep) -> Result<SigmaVerdict> {
    let pr = Problem::new(a, b);
    let cap = k_cap(a, b);
    let a_inf_tail = *a.tail() == DimTail::Const(ExtNat::Inf);
    let b_inf_tail = *b.tail() == DimTail::Const(ExtNat::Inf);

    if a_inf_tail != b_inf_tail {
        let (inf_side, other) = if a_inf_tail {
            (Side::AInB, b)
        } else {
            (Side::BInA, a)
        };
        let inf_len = if a_inf_tail {
            a.prefix().len()
        } else {
            b.prefix().len()
        } as u64;
        let last_other = other
            .inf_positions()
            .last()
            .map(|&i| i as u64 + 1)
            .unwrap_or(0);
        let witnesses = (0..=cap)
            .map(|k| SigmaWitness {
                k,
                violation: Violation {
                    n: inf_len.max(last_other + k),
                    l: 0,
                    side: inf_side,
                },
            })
            .collect();
        return Ok(SigmaVerdict::NotEquivalent {
            reason: SigmaReason::InfCountMismatch,
            k_cap: cap,
            witnesses,
        });
    }

    if !a_inf_tail {
        let (ia, ib) = (a.inf_positions(), b.inf_positions());
        if ia.is_empty() != ib.is_empty() {
            let (n, side) = match ia.first() {
                Some(&i) => (i as u64, Side::AInB),
                None => (ib[0] as u64, Side::BInA),
            };
            let witnesses = (0..=cap)
                .map(|k| SigmaWitness {
                    k,
                    violation: Violation { n, l: 0, side },
                })
                .collect();
            return Ok(SigmaVerdict::NotEquivalent {
                reason: SigmaReason::InfCountMismatch,
                k_cap: cap,
                witnesses,
            });
        }
        let (ma, mb) = (a.tail_mean().unwrap(), b.tail_mean().unwrap());
        if ma != mb {
            let side = if ma > mb { Side::AInB } else { Side::BInA };
            let witnesses = (0..=cap).map(|k| density_witness(&pr, k, side)).collect();
            return Ok(SigmaVerdict::NotEquivalent {
                reason: SigmaReason::DensityMismatch,
                k_cap: cap,
                witnesses,
            });
        }
        if ma.is_zero() {
            return Ok(bounded_search(&pr, pr.tail_start, cap));
        }
        // Equal positive densities: the enlarged window gains 2k times the
        // density, which eventually beats every bounded discrepancy.
        let mut hi = 1u64;
        while pr.first_violation(hi).is_some() {
            hi = hi.checked_mul(2).filter(|&h| h <= 1 << 24).ok_or_else(|| {
                Error::Invariant("no k found for equal positive densities".into())
            })?;
        }
        return Ok(equivalent(&pr, binary_search(&pr, 0, hi)));
    }

    // Both tails infinite: every constraint reaching the tails is satisfied.
    Ok(bounded_search(&pr, pr.tail_start, cap))
}

/// Constraints for `k >= limit` coincide with those for `limit`, so a
/// violation at `limit` is a violation for every larger `k`.
fn bounded_search(pr: &Problem, limit: u64, cap: u64) -> SigmaVerdict {
    let Some(at_limit) = pr.first_violation(limit) else {
        return equivalent(pr, binary_search(pr, 0, limit));
    };
    let witnesses = (0..=cap)
        .map(|k| SigmaWitness {
            k,
            violation: if k >= limit {
                at_limit
            } else {
                pr.first_violation(k)
                    .expect("violations persist as k decreases")
            },
        })
        .collect();
    SigmaVerdict::NotEquivalent {
        reason: SigmaReason::PrefixObstruction,
        k_cap: cap,
        witnesses,
    }
}

/// Smallest `k` in `[lo, hi]` without violations, given that `hi` has none.
fn binary_search(pr: &Problem, mut lo: u64, mut hi: u64) -> u64 {
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pr.first_violation(mid).is_none() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    hi
}

fn equivalent(pr: &Problem, k: u64) -> SigmaVerdict {
    let m = stabilization_bound(pr.a, pr.b, k);
    SigmaVerdict::Equivalent {
        k,
        n_max: m,
        l_max: m,
    }
}

/// A long window past both prefixes where the denser side outgrows the
/// enlarged sparser side.
fn density_witness(pr: &Problem, k: u64, side: Side) -> SigmaWitness {
    let n = pr.tail_start + k;
    let mut l = pr.period;
    loop {
        let v = Violation { n, l, side };
        if violates(pr.a, pr.b, k, v) {
            return SigmaWitness { k, violation: v };
        }
        l *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqrep::ExtNat::{Fin, Inf};

    fn cst(prefix: Vec<ExtNat>, c: ExtNat) -> DimSeqRep {
        DimSeqRep::constant(prefix, c)
    }

    #[test]
    fn reflexive_k_zero() {
        let a = DimSeqRep::periodic(vec![Fin(3), Inf, Fin(0)], vec![1, 0, 2]).unwrap();
        match decide_esigma(&a, &a).unwrap() {
            SigmaVerdict::Equivalent { k, .. } => assert_eq!(k, 0),
            v => panic!("{v:?}"),
        }
        assert!(esigma_box(&a, &a, 0, 30, 30).holds);
    }

    #[test]
    fn shifted_infinity_needs_k_one() {
        let a = cst(vec![Inf], Fin(1));
        let b = cst(vec![Fin(0), Inf], Fin(1));
        let v = decide_esigma(&a, &b).unwrap();
        assert!(matches!(v, SigmaVerdict::Equivalent { k: 1, .. }), "{v:?}");
        assert!(esigma_box(&a, &b, 1, 40, 40).holds);
        assert!(!esigma_box(&a, &b, 0, 40, 40).holds);
    }

    #[test]
    fn density_mismatch() {
        let a = cst(vec![], Fin(1));
        let b = cst(vec![], Fin(2));
        match decide_esigma(&a, &b).unwrap() {
            SigmaVerdict::NotEquivalent {
                reason,
                witnesses,
                k_cap,
            } => {
                assert_eq!(reason, SigmaReason::DensityMismatch);
                assert_eq!(witnesses.len() as u64, k_cap + 1);
                for w in &witnesses {
                    assert!(violates(&a, &b, w.k, w.violation));
                }
            }
            v => panic!("{v:?}"),
        }
        // hand schedule: (n, l) = (0, 4k + 4) breaks sum b <= enlarged sum a
        for k in 0..20 {
            let v = Violation {
                n: 0,
                l: 4 * k + 4,
                side: Side::BInA,
            };
            assert!(violates(&a, &b, k, v));
        }
        let bx = esigma_box(&a, &b, 1, 20, 20);
        assert!(!bx.holds);
        // a violation first appears once 2(l+1) > l + 2k + 1 with the window clipped at 0
        let first = bx.first_violation.unwrap();
        assert!(violates(&a, &b, 1, first));
    }

    #[test]
    fn infinite_count_mismatch() {
        let a = cst(vec![Fin(1)], Inf);
        let b = cst(vec![Inf, Inf], Fin(1));
        match decide_esigma(&a, &b).unwrap() {
            SigmaVerdict::NotEquivalent {
                reason, witnesses, ..
            } => {
                assert_eq!(reason, SigmaReason::InfCountMismatch);
                assert!(witnesses.iter().all(|w| violates(&a, &b, w.k, w.violation)));
            }
            v => panic!("{v:?}"),
        }
        let c = cst(vec![Fin(1), Fin(5)], Fin(1));
        match decide_esigma(&b, &c).unwrap() {
            SigmaVerdict::NotEquivalent {
                reason, witnesses, ..
            } => {
                assert_eq!(reason, SigmaReason::InfCountMismatch);
                assert!(witnesses.iter().all(|w| violates(&b, &c, w.k, w.violation)));
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn prefix_obstruction_with_zero_tails() {
        let a = cst(vec![Inf, Fin(2)], Fin(0));
        let b = cst(vec![Inf], Fin(0));
        match decide_esigma(&a, &b).unwrap() {
            // b's INF at 0 dominates every window of a that it can reach, so k = 1 works
            SigmaVerdict::Equivalent { k, .. } => assert_eq!(k, 1),
            v => panic!("{v:?}"),
        }
        let a = cst(vec![Fin(3), Inf], Fin(0));
        let b = cst(vec![Fin(1), Inf], Fin(0));
        let v = decide_esigma(&a, &b).unwrap();
        assert!(v.is_equivalent(), "{v:?}");
    }

    #[test]
    fn both_infinite_tails() {
        let a = cst(vec![Fin(4), Fin(0), Fin(1)], Inf);
        let b = cst(vec![Fin(1)], Inf);
        match decide_esigma(&a, &b).unwrap() {
            SigmaVerdict::Equivalent { k, n_max, .. } => {
                assert!(esigma_box(&a, &b, k, 3 * n_max, 3 * n_max).holds);
                if k > 0 {
                    assert!(!esigma_box(&a, &b, k - 1, 3 * n_max, 3 * n_max).holds);
                }
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn composition_adds() {
        assert_eq!(compose_sigma_witnesses(0, 0), 0);
        assert_eq!(compose_sigma_witnesses(1, 2), 3);
    }
}

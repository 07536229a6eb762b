use crate::seqrep::RealSeqRep;

#[derive(Debug, Clone, PartialEq)]
pub enum E1Verdict {
    /// `a_n = b_n` for every `n >= from`; `from` is minimal.
    Equivalent { from: u64 },
    /// The tails disagree on the residue class `residue mod period` from
    /// index `start` on, so they disagree infinitely often. `sample` is an
    /// index in that class where they differ.
    NotEquivalent {
        residue: u64,
        period: u64,
        start: u64,
        sample: u64,
    },
}

impl E1Verdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, E1Verdict::Equivalent { .. })
    }
}

/// Decides tail equality.
pub fn decide_e1(a: &RealSeqRep, b: &RealSeqRep) -> E1Verdict {
    let al = RealSeqRep::aligned(a, b);
    for (j, (x, y)) in al.lanes_a.iter().zip(&al.lanes_b).enumerate() {
        if x != y {
            // distinct lanes are sums of at most three exponentials in q and
            // share at most two values, so one of q = 0, 1, 2 separates them
            let q = (0..3)
                .find(|&q| x.eval(q) != y.eval(q))
                .expect("distinct lanes agree on three cycles");
            return E1Verdict::NotEquivalent {
                residue: ((al.start + j) % al.period) as u64,
                period: al.period as u64,
                start: al.start as u64,
                sample: al.index(j, q as u64),
            };
        }
    }
    let from = al
        .prefix_a
        .iter()
        .zip(&al.prefix_b)
        .rposition(|(x, y)| x != y)
        .map_or(0, |i| i as u64 + 1);
    E1Verdict::Equivalent { from }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::int;

    #[test]
    fn examples() {
        let a = RealSeqRep::affine(vec![int(1)], int(1), int(0));
        assert_eq!(decide_e1(&a, &a), E1Verdict::Equivalent { from: 0 });

        let x = RealSeqRep::periodic(vec![int(1), int(2), int(3)], vec![int(4), int(5)]).unwrap();
        let y = RealSeqRep::periodic(vec![int(9), int(9), int(9)], vec![int(4), int(5)]).unwrap();
        assert_eq!(decide_e1(&x, &y), E1Verdict::Equivalent { from: 3 });

        let c0 = RealSeqRep::constant(vec![], int(0));
        let c1 = RealSeqRep::constant(vec![], int(1));
        match decide_e1(&c0, &c1) {
            E1Verdict::NotEquivalent { sample, .. } => {
                assert_ne!(c0.eval(sample as i64), c1.eval(sample as i64))
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn misaligned_periodic_tails_differ() {
        let x = RealSeqRep::periodic(vec![], vec![int(1), int(2)]).unwrap();
        let y = RealSeqRep::periodic(vec![int(0)], vec![int(1), int(2)]).unwrap();
        assert!(!decide_e1(&x, &y).is_equivalent());
    }
}

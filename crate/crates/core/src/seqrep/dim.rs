use std::fmt;

use num::integer::lcm;
use serde_json::{json, Value};

use super::extnat::{ExtNat, Fin, Inf};
use crate::error::{Error, Result};
use crate::rat::Rat;

/// Tail of an extended-natural sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DimTail {
    Const(ExtNat),
    /// Finite values repeated with period `len >= 2` after normalization.
    Periodic(Vec<u64>),
}

/// Extended-natural sequence with a prefix and a constant or periodic tail.
/// Normalized to minimal period and shortest prefix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DimSeqRep {
    prefix: Vec<ExtNat>,
    tail: DimTail,
}

impl DimSeqRep {
    pub fn new(prefix: Vec<ExtNat>, tail: DimTail) -> Result<Self> {
        if let DimTail::Periodic(v) = &tail {
            if v.is_empty() {
                return Err(Error::Representation(
                    "periodic tail needs period >= 1".into(),
                ));
            }
        }
        Ok(Self::normalize(prefix, tail))
    }

    pub fn constant(prefix: Vec<ExtNat>, c: ExtNat) -> Self {
        Self::normalize(prefix, DimTail::Const(c))
    }

    pub fn periodic(prefix: Vec<ExtNat>, values: Vec<u64>) -> Result<Self> {
        Self::new(prefix, DimTail::Periodic(values))
    }

    fn normalize(mut prefix: Vec<ExtNat>, tail: DimTail) -> Self {
        let mut tail = match tail {
            DimTail::Periodic(v) => {
                let p = v.len();
                let d = (1..=p)
                    .find(|d| p % d == 0 && (0..p).all(|i| v[i] == v[i % d]))
                    .unwrap();
                if d == 1 {
                    DimTail::Const(Fin(v[0]))
                } else {
                    DimTail::Periodic(v[..d].to_vec())
                }
            }
            c => c,
        };
        loop {
            let Some(&last) = prefix.last() else { break };
            match &mut tail {
                DimTail::Const(c) if *c == last => {
                    prefix.pop();
                }
                DimTail::Periodic(v) if Fin(*v.last().unwrap()) == last => {
                    prefix.pop();
                    v.rotate_right(1);
                }
                _ => break,
            }
        }
        DimSeqRep { prefix, tail }
    }

    pub fn prefix(&self) -> &[ExtNat] {
        &self.prefix
    }

    pub fn tail(&self) -> &DimTail {
        &self.tail
    }

    pub fn period(&self) -> usize {
        match &self.tail {
            DimTail::Const(_) => 1,
            DimTail::Periodic(v) => v.len(),
        }
    }

    fn tail_at(&self, m: usize) -> ExtNat {
        match &self.tail {
            DimTail::Const(c) => *c,
            DimTail::Periodic(v) => Fin(v[m % v.len()]),
        }
    }

    /// Value at `n`; zero for negative indices.
    pub fn eval(&self, n: i64) -> ExtNat {
        if n < 0 {
            return Fin(0);
        }
        let n = n as usize;
        match self.prefix.get(n) {
            Some(&v) => v,
            None => self.tail_at(n - self.prefix.len()),
        }
    }

    /// `sum_{i=0}^{l} a_{n+i}`, negative indices contributing zero.
    pub fn window_sum(&self, n: i64, l: u64) -> ExtNat {
        let end = n + l as i64; // inclusive
        if end < 0 {
            return Fin(0);
        }
        let start = n.max(0) as usize;
        let end = end as usize;
        let plen = self.prefix.len();
        let mut acc = Fin(0);
        for i in start..=end.min(plen.saturating_sub(1)) {
            if i < plen {
                acc = acc + self.prefix[i];
            }
        }
        if end >= plen {
            let lo = start.max(plen) - plen;
            let hi = end - plen; // inclusive tail offsets
            acc = acc + self.tail_range_sum(lo, hi);
        }
        acc
    }

    fn tail_range_sum(&self, lo: usize, hi: usize) -> ExtNat {
        let count = (hi - lo + 1) as u64;
        match &self.tail {
            DimTail::Const(Inf) => Inf,
            DimTail::Const(Fin(c)) => Fin(c * count),
            DimTail::Periodic(v) => {
                let p = v.len();
                let period_sum: u64 = v.iter().sum();
                let full = count / p as u64;
                let rest: u64 = (0..(count % p as u64) as usize)
                    .map(|i| v[(lo + i) % p])
                    .sum();
                Fin(full * period_sum + rest)
            }
        }
    }

    /// Number of indices holding `Inf`.
    pub fn count_inf(&self) -> ExtNat {
        if self.tail == DimTail::Const(Inf) {
            return Inf;
        }
        Fin(self.prefix.iter().filter(|v| v.is_inf()).count() as u64)
    }

    /// Positions of `Inf` entries in the prefix (all of them when the tail is
    /// finite).
    pub fn inf_positions(&self) -> Vec<usize> {
        self.prefix
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_inf())
            .map(|(i, _)| i)
            .collect()
    }

    /// Whether the total sum is infinite.
    pub fn diverges(&self) -> bool {
        self.count_inf() != Fin(0)
            || match &self.tail {
                DimTail::Const(c) => *c != Fin(0),
                DimTail::Periodic(v) => v.iter().any(|&x| x >= 1),
            }
    }

    /// Sum over one tail period (`None` for an infinite tail).
    pub fn period_sum(&self) -> Option<u64> {
        match &self.tail {
            DimTail::Const(Inf) => None,
            DimTail::Const(Fin(c)) => Some(*c),
            DimTail::Periodic(v) => Some(v.iter().sum()),
        }
    }

    /// Mean value of the finite tail.
    pub fn tail_mean(&self) -> Option<Rat> {
        self.period_sum()
            .map(|s| Rat::new((s as i64).into(), (self.period() as i64).into()))
    }

    /// Tail values re-expressed with tail start `start >= prefix.len()`.
    pub fn rebased_tail(&self, start: usize) -> DimTail {
        assert!(start >= self.prefix.len());
        match &self.tail {
            DimTail::Const(c) => DimTail::Const(*c),
            DimTail::Periodic(v) => {
                let mut v = v.clone();
                let shift = (start - self.prefix.len()) % v.len();
                v.rotate_left(shift);
                DimTail::Periodic(v)
            }
        }
    }

    /// Finite-box equality check: agrees with pointwise equality on the box
    /// `len_a + len_b + 2 * p_a * p_b`.
    pub fn agrees_on_box(a: &Self, b: &Self) -> bool {
        let bound = a.prefix.len() + b.prefix.len() + 2 * a.period() * b.period();
        (0..=bound as i64).all(|n| a.eval(n) == b.eval(n))
    }

    pub fn common_period(a: &Self, b: &Self) -> usize {
        lcm(a.period(), b.period())
    }

    pub fn to_json(&self) -> Value {
        let tail = match &self.tail {
            DimTail::Const(c) => json!({"kind": "const", "value": c.to_json()}),
            DimTail::Periodic(v) => json!({"kind": "periodic", "values": v}),
        };
        json!({
            "prefix": self.prefix.iter().map(|v| v.to_json()).collect::<Vec<_>>(),
            "tail": tail,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let prefix = v
            .get("prefix")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("sequence needs a \"prefix\" array".into()))?
            .iter()
            .map(ExtNat::from_json)
            .collect::<Result<Vec<_>>>()?;
        let tail = v
            .get("tail")
            .ok_or_else(|| Error::Parse("sequence needs a \"tail\"".into()))?;
        let kind = tail.get("kind").and_then(Value::as_str).unwrap_or("");
        let tail = match kind {
            "const" => DimTail::Const(ExtNat::from_json(
                tail.get("value")
                    .ok_or_else(|| Error::Parse("const tail needs \"value\"".into()))?,
            )?),
            "periodic" => {
                let vals = tail
                    .get("values")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Parse("periodic tail needs \"values\"".into()))?
                    .iter()
                    .map(|x| match ExtNat::from_json(x)? {
                        Fin(v) => Ok(v),
                        Inf => Err(Error::Representation(
                            "periodic dimension tails must be finite".into(),
                        )),
                    })
                    .collect::<Result<Vec<_>>>()?;
                DimTail::Periodic(vals)
            }
            "affine" | "geometric" | "interleaved" => {
                return Err(Error::Representation(format!(
                    "{kind} tails are not admitted for dimension sequences"
                )))
            }
            other => return Err(Error::Parse(format!("unknown tail kind {other:?}"))),
        };
        Self::new(prefix, tail)
    }
}

impl fmt::Display for DimSeqRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn direct_sum(s: &DimSeqRep, n: i64, l: u64) -> ExtNat {
        (0..=l as i64).map(|i| s.eval(n + i)).sum()
    }

    #[test]
    fn window_sum_examples() {
        let s = DimSeqRep::constant(vec![Inf], Fin(0));
        assert_eq!(s.window_sum(0, 5), Inf);
        let p = DimSeqRep::periodic(vec![], vec![1, 2]).unwrap();
        assert_eq!(p.window_sum(0, 3), Fin(6));
        for k in 1..6 {
            assert_eq!(p.window_sum(-k, (k - 1) as u64), Fin(0));
        }
    }

    #[test]
    fn count_inf_and_divergence() {
        let s = DimSeqRep::constant(vec![Inf, Fin(0), Inf], Fin(1));
        assert_eq!(s.count_inf(), Fin(2));
        assert_eq!(DimSeqRep::constant(vec![], Inf).count_inf(), Inf);
        assert_eq!(
            DimSeqRep::periodic(vec![], vec![0, 3]).unwrap().count_inf(),
            Fin(0)
        );

        assert!(!DimSeqRep::constant(vec![Fin(5), Fin(2)], Fin(0)).diverges());
        assert!(DimSeqRep::periodic(vec![], vec![0, 0, 1])
            .unwrap()
            .diverges());
        assert!(DimSeqRep::constant(vec![Inf], Fin(0)).diverges());
    }

    #[test]
    fn normalization() {
        let s = DimSeqRep::periodic(vec![Fin(4), Fin(2)], vec![1, 2, 1, 2]).unwrap();
        assert_eq!(s.prefix(), &[Fin(4)]);
        assert_eq!(s.tail(), &DimTail::Periodic(vec![2, 1]));
        assert_eq!(
            DimSeqRep::periodic(vec![], vec![3, 3]).unwrap(),
            DimSeqRep::constant(vec![], Fin(3))
        );
        assert!(DimSeqRep::from_json(
            &json!({"prefix": [], "tail": {"kind": "periodic", "values": ["inf"]}})
        )
        .is_err());
        assert!(DimSeqRep::from_json(
            &json!({"prefix": [], "tail": {"kind": "affine", "slope": 1, "intercept": 0}})
        )
        .is_err());
    }

    fn arb_dim() -> impl Strategy<Value = DimSeqRep> {
        let val = prop_oneof![4 => (0u64..4).prop_map(Fin), 1 => Just(Inf)];
        let tail = prop_oneof![
            prop_oneof![(0u64..4).prop_map(Fin), Just(Inf)].prop_map(DimTail::Const),
            prop::collection::vec(0u64..4, 1..4).prop_map(DimTail::Periodic),
        ];
        (prop::collection::vec(val, 0..5), tail).prop_map(|(p, t)| DimSeqRep::new(p, t).unwrap())
    }

    proptest! {
        #[test]
        fn window_sum_matches_direct(s in arb_dim(), n in -6i64..20, l in 0u64..30) {
            prop_assert_eq!(s.window_sum(n, l), direct_sum(&s, n, l));
        }

        #[test]
        fn window_sum_additive(s in arb_dim(), n in -4i64..12, l1 in 0u64..10, l2 in 0u64..10) {
            let whole = s.window_sum(n, l1 + l2 + 1);
            let split = s.window_sum(n, l1) + s.window_sum(n + l1 as i64 + 1, l2);
            prop_assert_eq!(whole, split);
        }

        #[test]
        fn window_sum_monotone(s in arb_dim(), bump in prop::collection::vec(0u64..3, 8), n in 0i64..8, l in 0u64..8) {
            // t >= s entrywise on [0, 8)
            let prefix: Vec<ExtNat> = (0..8).map(|i| s.eval(i) + Fin(bump[i as usize])).collect();
            let mut tail_prefix = prefix;
            tail_prefix.extend((8..20).map(|i| s.eval(i)));
            let t = DimSeqRep::new(tail_prefix, s.rebased_tail(20)).unwrap();
            let hi = (8 - n) as u64 - 1;
            let l = l.min(hi);
            prop_assert!(s.window_sum(n, l) <= t.window_sum(n, l));
        }

        #[test]
        fn box_equality_is_pointwise_equality(a in arb_dim(), b in arb_dim()) {
            let boxed = DimSeqRep::agrees_on_box(&a, &b);
            let bound = 10 * (a.prefix().len() + b.prefix().len() + 2 * a.period() * b.period() + 1);
            let direct = (0..bound as i64).all(|n| a.eval(n) == b.eval(n));
            prop_assert_eq!(boxed, direct);
            prop_assert_eq!(boxed, a == b);
        }
    }
}

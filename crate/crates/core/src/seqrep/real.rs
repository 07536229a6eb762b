use std::fmt;

use num::integer::lcm;
use num::{One, Signed, Zero};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::rat::{self, Rat};

/// One residue class of a tail. A tail of period `p` has `p` lanes; lane `j`
/// gives the values at tail offsets `j, j + p, j + 2p, ...` as a function of
/// the cycle counter `q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Lane {
    Const(Rat),
    /// `slope * q + intercept`
    Affine {
        slope: Rat,
        intercept: Rat,
    },
    /// `coeff * ratio^q + offset`, with `coeff != 0` and `ratio > 1`.
    Geometric {
        coeff: Rat,
        ratio: Rat,
        offset: Rat,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaneSign {
    NonNegative,
    Negative,
}

impl Lane {
    pub fn affine(slope: Rat, intercept: Rat) -> Lane {
        Lane::Affine { slope, intercept }.normalized()
    }

    pub fn geometric(coeff: Rat, ratio: Rat) -> Lane {
        Lane::Geometric {
            coeff,
            ratio,
            offset: Rat::zero(),
        }
    }

    fn validate(&self) -> Result<()> {
        if let Lane::Geometric { coeff, ratio, .. } = self {
            if coeff.is_zero() {
                return Err(Error::Representation(
                    "geometric coefficient must be nonzero".into(),
                ));
            }
            if ratio <= &Rat::one() {
                return Err(Error::Representation(
                    "geometric ratio must exceed 1".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn normalized(self) -> Lane {
        match self {
            Lane::Affine { slope, intercept } if slope.is_zero() => Lane::Const(intercept),
            other => other,
        }
    }

    /// Value at cycle `q`; negative `q` extrapolates the closed form.
    pub fn eval(&self, q: i64) -> Rat {
        match self {
            Lane::Const(v) => v.clone(),
            Lane::Affine { slope, intercept } => slope * rat::int(q) + intercept,
            Lane::Geometric {
                coeff,
                ratio,
                offset,
            } => {
                let p = if q >= 0 {
                    rat::pow(ratio, q as u64)
                } else {
                    rat::pow(ratio, (-q) as u64).recip()
                };
                coeff * p + offset
            }
        }
    }

    /// The lane `q -> self(q + d)`.
    pub fn shift(&self, d: u64) -> Lane {
        self.refine(1, d)
    }

    /// The lane `q -> self(q - 1)`.
    fn shift_back(&self) -> Lane {
        match self {
            Lane::Const(v) => Lane::Const(v.clone()),
            Lane::Affine { slope, intercept } => Lane::Affine {
                slope: slope.clone(),
                intercept: intercept - slope,
            },
            Lane::Geometric {
                coeff,
                ratio,
                offset,
            } => Lane::Geometric {
                coeff: coeff / ratio,
                ratio: ratio.clone(),
                offset: offset.clone(),
            },
        }
    }

    /// The lane `q -> self(q * m + j)`.
    pub fn refine(&self, m: u64, j: u64) -> Lane {
        match self {
            Lane::Const(v) => Lane::Const(v.clone()),
            Lane::Affine { slope, intercept } => Lane::Affine {
                slope: slope * rat::int(m as i64),
                intercept: slope * rat::int(j as i64) + intercept,
            }
            .normalized(),
            Lane::Geometric {
                coeff,
                ratio,
                offset,
            } => Lane::Geometric {
                coeff: coeff * rat::pow(ratio, j),
                ratio: rat::pow(ratio, m),
                offset: offset.clone(),
            },
        }
    }

    /// Inverse of `refine(m, 0)` when the coarser lane is representable.
    fn coarsen(&self, m: u64) -> Option<Lane> {
        match self {
            Lane::Const(v) => Some(Lane::Const(v.clone())),
            Lane::Affine { slope, intercept } => Some(Lane::Affine {
                slope: slope / rat::int(m as i64),
                intercept: intercept.clone(),
            }),
            Lane::Geometric {
                coeff,
                ratio,
                offset,
            } => Some(Lane::Geometric {
                coeff: coeff.clone(),
                ratio: rat::exact_root(ratio, m)?,
                offset: offset.clone(),
            }),
        }
    }

    pub fn scale(&self, k: &Rat) -> Lane {
        if k.is_zero() {
            return Lane::Const(Rat::zero());
        }
        match self {
            Lane::Const(v) => Lane::Const(v * k),
            Lane::Affine { slope, intercept } => Lane::Affine {
                slope: slope * k,
                intercept: intercept * k,
            },
            Lane::Geometric {
                coeff,
                ratio,
                offset,
            } => Lane::Geometric {
                coeff: coeff * k,
                ratio: ratio.clone(),
                offset: offset * k,
            },
        }
    }

    pub fn add_const(&self, c: &Rat) -> Lane {
        match self {
            Lane::Const(v) => Lane::Const(v + c),
            Lane::Affine { slope, intercept } => Lane::Affine {
                slope: slope.clone(),
                intercept: intercept + c,
            },
            Lane::Geometric {
                coeff,
                ratio,
                offset,
            } => Lane::Geometric {
                coeff: coeff.clone(),
                ratio: ratio.clone(),
                offset: offset + c,
            },
        }
    }

    /// Pointwise sum, when it stays inside the lane class.
    pub fn add(&self, other: &Lane) -> Option<Lane> {
        use Lane::*;
        let out = match (self, other) {
            (Const(c), l) | (l, Const(c)) => l.add_const(c),
            (
                Affine {
                    slope: s1,
                    intercept: t1,
                },
                Affine {
                    slope: s2,
                    intercept: t2,
                },
            ) => Affine {
                slope: s1 + s2,
                intercept: t1 + t2,
            }
            .normalized(),
            (
                Geometric {
                    coeff: c1,
                    ratio: r1,
                    offset: o1,
                },
                Geometric {
                    coeff: c2,
                    ratio: r2,
                    offset: o2,
                },
            ) if r1 == r2 => {
                let coeff = c1 + c2;
                if coeff.is_zero() {
                    Const(o1 + o2)
                } else {
                    Geometric {
                        coeff,
                        ratio: r1.clone(),
                        offset: o1 + o2,
                    }
                }
            }
            _ => return None,
        };
        Some(out)
    }

    /// Smallest `q0` such that the lane has one sign class on `q >= q0`.
    fn sign_settles_at(&self) -> u64 {
        match self {
            Lane::Const(_) => 0,
            Lane::Affine { slope, intercept } => {
                // root of slope*q + intercept
                let root = -(intercept / slope);
                let q0 = if slope.is_positive() {
                    root.ceil()
                } else {
                    root.floor() + Rat::one()
                };
                rat::ceil_to_u64(&q0.max(Rat::zero())).expect("settling index out of range")
            }
            Lane::Geometric { coeff, .. } => {
                let mut q = 0u64;
                let wanted_nonneg = coeff.is_positive();
                loop {
                    let v = self.eval(q as i64);
                    if (v >= Rat::zero()) == wanted_nonneg {
                        return q;
                    }
                    q += 1;
                }
            }
        }
    }

    /// Sign class of the lane on `q >= 0`, assuming it has already settled.
    pub fn settled_sign(&self) -> LaneSign {
        let nonneg = match self {
            Lane::Const(v) => !v.is_negative(),
            Lane::Affine { slope, .. } => slope.is_positive(),
            Lane::Geometric { coeff, .. } => coeff.is_positive(),
        };
        if nonneg {
            LaneSign::NonNegative
        } else {
            LaneSign::Negative
        }
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Lane::Const(_))
    }

    fn to_json(&self) -> Value {
        match self {
            Lane::Const(v) => json!({"kind": "const", "value": rat::to_json(v)}),
            Lane::Affine { slope, intercept } => json!({
                "kind": "affine",
                "slope": rat::to_json(slope),
                "intercept": rat::to_json(intercept),
            }),
            Lane::Geometric {
                coeff,
                ratio,
                offset,
            } => {
                let mut m = Map::new();
                m.insert("kind".into(), json!("geometric"));
                m.insert("coeff".into(), rat::to_json(coeff));
                m.insert("ratio".into(), rat::to_json(ratio));
                if !offset.is_zero() {
                    m.insert("offset".into(), rat::to_json(offset));
                }
                Value::Object(m)
            }
        }
    }

    fn from_json(v: &Value) -> Result<Lane> {
        let kind = v
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Parse("lane needs a string \"kind\"".into()))?;
        let field = |name: &str| -> Result<Rat> {
            rat::from_json(
                v.get(name)
                    .ok_or_else(|| Error::Parse(format!("{kind} lane missing {name:?}")))?,
            )
        };
        let lane = match kind {
            "const" => Lane::Const(field("value")?),
            "affine" => Lane::Affine {
                slope: field("slope")?,
                intercept: field("intercept")?,
            },
            "geometric" => Lane::Geometric {
                coeff: field("coeff")?,
                ratio: field("ratio")?,
                offset: match v.get("offset") {
                    Some(o) => rat::from_json(o)?,
                    None => Rat::zero(),
                },
            },
            other => return Err(Error::Parse(format!("unknown lane kind {other:?}"))),
        };
        lane.validate()?;
        Ok(lane.normalized())
    }
}

/// A real sequence given by an explicit prefix and a closed-form tail.
///
/// Values are `prefix[n]` for `n < prefix.len()`; beyond that the tail offset
/// `m = n - prefix.len()` is split as `m = q * p + j` and lane `j` is evaluated
/// at `q`. Indices below zero evaluate to zero.
///
/// Construction normalizes to the minimal period and the shortest prefix, so
/// two representations are pointwise equal iff they are structurally equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RealSeqRep {
    prefix: Vec<Rat>,
    lanes: Vec<Lane>,
}

impl RealSeqRep {
    pub fn new(prefix: Vec<Rat>, lanes: Vec<Lane>) -> Result<Self> {
        if lanes.is_empty() {
            return Err(Error::Representation("tail needs at least one lane".into()));
        }
        for l in &lanes {
            l.validate()?;
        }
        Ok(Self::normalize(
            prefix,
            lanes.into_iter().map(Lane::normalized).collect(),
        ))
    }

    pub fn constant(prefix: Vec<Rat>, v: Rat) -> Self {
        Self::normalize(prefix, vec![Lane::Const(v)])
    }

    pub fn periodic(prefix: Vec<Rat>, values: Vec<Rat>) -> Result<Self> {
        Self::new(prefix, values.into_iter().map(Lane::Const).collect())
    }

    pub fn affine(prefix: Vec<Rat>, slope: Rat, intercept: Rat) -> Self {
        Self::normalize(prefix, vec![Lane::affine(slope, intercept)])
    }

    pub fn geometric(prefix: Vec<Rat>, coeff: Rat, ratio: Rat) -> Result<Self> {
        Self::new(prefix, vec![Lane::geometric(coeff, ratio)])
    }

    pub fn zero() -> Self {
        Self::constant(vec![], Rat::zero())
    }

    fn normalize(mut prefix: Vec<Rat>, lanes: Vec<Lane>) -> Self {
        let mut lanes = minimal_period(lanes);
        let p = lanes.len();
        while let Some(last) = prefix.last() {
            let back = lanes[p - 1].shift_back();
            if *last != back.eval(0) {
                break;
            }
            prefix.pop();
            lanes.pop();
            lanes.insert(0, back);
        }
        RealSeqRep { prefix, lanes }
    }

    pub fn prefix(&self) -> &[Rat] {
        &self.prefix
    }

    pub fn lanes(&self) -> &[Lane] {
        &self.lanes
    }

    pub fn period(&self) -> usize {
        self.lanes.len()
    }

    pub fn eval(&self, n: i64) -> Rat {
        if n < 0 {
            return Rat::zero();
        }
        let n = n as usize;
        if n < self.prefix.len() {
            return self.prefix[n].clone();
        }
        let m = n - self.prefix.len();
        let p = self.lanes.len();
        self.lanes[m % p].eval((m / p) as i64)
    }

    /// Lanes for a tail that starts at `start >= prefix.len()` and has period
    /// `period` (a multiple of the current period), together with the
    /// expanded prefix.
    pub fn rebased(&self, start: usize, period: usize) -> (Vec<Rat>, Vec<Lane>) {
        assert!(start >= self.prefix.len());
        let p = self.lanes.len();
        assert_eq!(
            period % p,
            0,
            "period must be a multiple of the tail period"
        );
        let prefix: Vec<Rat> = (0..start).map(|n| self.eval(n as i64)).collect();
        let delta = start - self.prefix.len();
        let m = (period / p) as u64;
        let lanes = (0..period)
            .map(|j| {
                let pos = delta + j;
                self.lanes[pos % p].refine(m, (pos / p) as u64)
            })
            .collect();
        (prefix, lanes)
    }

    /// Common start and period for two sequences, and both rebased forms.
    pub fn aligned(a: &Self, b: &Self) -> Aligned {
        let start = a.prefix.len().max(b.prefix.len());
        let period = lcm(a.period(), b.period());
        let (pa, la) = a.rebased(start, period);
        let (pb, lb) = b.rebased(start, period);
        Aligned {
            start,
            period,
            prefix_a: pa,
            prefix_b: pb,
            lanes_a: la,
            lanes_b: lb,
        }
    }

    /// Same sequence, with the tail pushed forward until every lane keeps a
    /// single sign class for all `q >= 0`.
    pub fn sign_settled(&self) -> (Vec<Rat>, Vec<Lane>) {
        let p = self.period();
        let cycles = self
            .lanes
            .iter()
            .map(Lane::sign_settles_at)
            .max()
            .unwrap_or(0) as usize;
        self.rebased(self.prefix.len() + cycles * p, p)
    }

    /// Pointwise absolute value.
    pub fn abs(&self) -> Self {
        let (prefix, lanes) = self.sign_settled();
        let prefix = prefix.into_iter().map(|v| v.abs()).collect();
        let lanes = lanes
            .into_iter()
            .map(|l| match l.settled_sign() {
                LaneSign::NonNegative => l,
                LaneSign::Negative => l.scale(&-Rat::one()),
            })
            .collect();
        Self::normalize(prefix, lanes)
    }

    pub fn scale(&self, k: &Rat) -> Self {
        Self::normalize(
            self.prefix.iter().map(|v| v * k).collect(),
            self.lanes.iter().map(|l| l.scale(k).normalized()).collect(),
        )
    }

    pub fn add_const(&self, c: &Rat) -> Self {
        Self::normalize(
            self.prefix.iter().map(|v| v + c).collect(),
            self.lanes.iter().map(|l| l.add_const(c)).collect(),
        )
    }

    /// Pointwise sum; fails when two lanes have no closed-form sum.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let al = Self::aligned(self, other);
        let prefix = al
            .prefix_a
            .iter()
            .zip(&al.prefix_b)
            .map(|(x, y)| x + y)
            .collect();
        let lanes = al
            .lanes_a
            .iter()
            .zip(&al.lanes_b)
            .map(|(x, y)| {
                x.add(y).ok_or_else(|| {
                    Error::UnsupportedTail(format!("no closed form for sum of {x:?} and {y:?}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::normalize(prefix, lanes))
    }

    pub fn is_nonnegative(&self) -> bool {
        let (prefix, lanes) = self.sign_settled();
        prefix.iter().all(|v| !v.is_negative())
            && lanes
                .iter()
                .all(|l| l.settled_sign() == LaneSign::NonNegative)
            && (0..self.period() as i64 * 3 + self.prefix.len() as i64)
                .all(|n| !self.eval(n).is_negative())
    }

    /// Finite-box equality check; agrees with full pointwise equality because
    /// two distinct lanes can coincide on at most two cycles.
    pub fn agrees_on_box(a: &Self, b: &Self) -> bool {
        let bound = a.prefix.len() + b.prefix.len() + 3 * lcm(a.period(), b.period());
        (0..bound as i64).all(|n| a.eval(n) == b.eval(n))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "prefix": self.prefix.iter().map(rat::to_json).collect::<Vec<_>>(),
            "tail": tail_to_json(&self.lanes),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let prefix = v
            .get("prefix")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("sequence needs a \"prefix\" array".into()))?
            .iter()
            .map(rat::from_json)
            .collect::<Result<Vec<_>>>()?;
        let tail = v
            .get("tail")
            .ok_or_else(|| Error::Parse("sequence needs a \"tail\"".into()))?;
        Self::new(prefix, tail_from_json(tail)?)
    }
}

pub struct Aligned {
    pub start: usize,
    pub period: usize,
    pub prefix_a: Vec<Rat>,
    pub prefix_b: Vec<Rat>,
    pub lanes_a: Vec<Lane>,
    pub lanes_b: Vec<Lane>,
}

impl Aligned {
    /// Absolute index of lane `j` at cycle `q`.
    pub fn index(&self, j: usize, q: u64) -> u64 {
        self.start as u64 + q * self.period as u64 + j as u64
    }
}

fn minimal_period(lanes: Vec<Lane>) -> Vec<Lane> {
    let p = lanes.len();
    for d in (1..p).filter(|d| p.is_multiple_of(*d)) {
        let m = (p / d) as u64;
        let coarse: Option<Vec<Lane>> = (0..d)
            .map(|i| lanes[i].coarsen(m).map(Lane::normalized))
            .collect();
        let Some(coarse) = coarse else { continue };
        let fits =
            (0..d).all(|i| (0..m).all(|j| coarse[i].refine(m, j) == lanes[j as usize * d + i]));
        if fits {
            return coarse;
        }
    }
    lanes
}

fn tail_to_json(lanes: &[Lane]) -> Value {
    if lanes.iter().all(Lane::is_const) {
        let vals: Vec<Value> = lanes
            .iter()
            .map(|l| match l {
                Lane::Const(v) => rat::to_json(v),
                _ => unreachable!(),
            })
            .collect();
        if vals.len() == 1 {
            return json!({"kind": "const", "value": vals[0]});
        }
        return json!({"kind": "periodic", "values": vals});
    }
    if lanes.len() == 1 {
        return lanes[0].to_json();
    }
    json!({"kind": "interleaved", "lanes": lanes.iter().map(Lane::to_json).collect::<Vec<_>>()})
}

fn tail_from_json(v: &Value) -> Result<Vec<Lane>> {
    let kind = v
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Parse("tail needs a string \"kind\"".into()))?;
    match kind {
        "periodic" => {
            let vals = v
                .get("values")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("periodic tail needs \"values\"".into()))?;
            if vals.is_empty() {
                return Err(Error::Representation(
                    "periodic tail needs period >= 1".into(),
                ));
            }
            vals.iter()
                .map(|x| rat::from_json(x).map(Lane::Const))
                .collect()
        }
        "interleaved" => {
            let lanes = v
                .get("lanes")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("interleaved tail needs \"lanes\"".into()))?;
            lanes.iter().map(Lane::from_json).collect()
        }
        _ => Ok(vec![Lane::from_json(v)?]),
    }
}

impl fmt::Display for RealSeqRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{frac, int};

    #[test]
    fn eval_examples() {
        let s = RealSeqRep::constant(vec![int(1), frac(-1, 2), int(4)], int(0));
        assert_eq!(s.eval(0), int(1));
        assert_eq!(s.eval(1), frac(-1, 2));
        assert_eq!(s.eval(7), int(0));
        assert_eq!(s.eval(-3), int(0));
        let p = RealSeqRep::periodic(vec![], vec![int(2), int(5)]).unwrap();
        assert_eq!(p.eval(3), int(5));
        let g = RealSeqRep::geometric(vec![], int(1), int(2)).unwrap();
        assert_eq!(g.eval(10), int(1024));
    }

    #[test]
    fn normalizes_period_and_prefix() {
        let p = RealSeqRep::periodic(vec![int(7), int(1)], vec![int(2), int(1), int(2), int(1)])
            .unwrap();
        assert_eq!(p.period(), 2);
        // ... 7, 1, 2, 1, 2 -> the trailing 1 of the prefix joins the tail
        assert_eq!(p.prefix(), &[int(7)]);
        assert_eq!(p.lanes(), &[Lane::Const(int(1)), Lane::Const(int(2))]);

        let a = RealSeqRep::new(
            vec![],
            vec![Lane::affine(int(2), int(0)), Lane::affine(int(2), int(1))],
        )
        .unwrap();
        assert_eq!(a, RealSeqRep::affine(vec![], int(1), int(0)));

        let g = RealSeqRep::new(
            vec![int(1)],
            vec![
                Lane::geometric(int(2), int(4)),
                Lane::geometric(int(4), int(4)),
            ],
        )
        .unwrap();
        assert_eq!(g, RealSeqRep::geometric(vec![], int(1), int(2)).unwrap());
    }

    #[test]
    fn rebase_preserves_values() {
        let s = RealSeqRep::new(
            vec![int(3)],
            vec![
                Lane::affine(int(1), int(-4)),
                Lane::geometric(frac(1, 2), int(3)),
            ],
        )
        .unwrap();
        let (prefix, lanes) = s.rebased(6, 4);
        let r = RealSeqRep::new(prefix, lanes).unwrap();
        assert_eq!(r, s);
        for n in 0..40 {
            assert_eq!(r.eval(n), s.eval(n));
        }
    }

    #[test]
    fn abs_and_sign_settling() {
        let s = RealSeqRep::affine(vec![], int(-1), int(3));
        let a = s.abs();
        for n in 0..30 {
            assert_eq!(a.eval(n), s.eval(n).abs());
        }
        let g = RealSeqRep::new(
            vec![],
            vec![Lane::Geometric {
                coeff: int(1),
                ratio: int(2),
                offset: int(-9),
            }],
        )
        .unwrap();
        let ga = g.abs();
        for n in 0..30 {
            assert_eq!(ga.eval(n), g.eval(n).abs());
        }
    }

    #[test]
    fn rejects_bad_tails() {
        assert!(RealSeqRep::new(vec![], vec![]).is_err());
        assert!(RealSeqRep::geometric(vec![], int(1), int(1)).is_err());
        assert!(RealSeqRep::geometric(vec![], int(0), int(3)).is_err());
        assert!(RealSeqRep::from_json(
            &json!({"prefix": [], "tail": {"kind": "periodic", "values": []}})
        )
        .is_err());
        assert!(RealSeqRep::from_json(&json!({"prefix": [], "tail": {"kind": "sine"}})).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = RealSeqRep::new(
            vec![frac(1, 3), int(-2)],
            vec![Lane::affine(int(1), int(0)), Lane::Const(int(0))],
        )
        .unwrap();
        let back = RealSeqRep::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        let parsed = RealSeqRep::from_json(&json!({
            "prefix": [1, "-1/2", {"num": 4, "den": 1}],
            "tail": {"kind": "const", "value": 0}
        }))
        .unwrap();
        assert_eq!(parsed.eval(1), frac(-1, 2));
    }
}

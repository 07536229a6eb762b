use std::collections::BTreeMap;

use num::integer::lcm;
use num::{One, Signed};
use serde_json::{json, Value};

use super::{scheme_of, DiagOpSeq, Eigenvalues, Operator, STD_SCHEME};
use crate::eqrel::{decide_esigma, SigmaVerdict};
use crate::error::{Error, Result};
use crate::rat::{self, Rat};
use crate::seqrep::{DimSeqRep, DimTail, ExtNat, Lane, RealSeqRep};

/// Eigenvalues `2^n - 1` with multiplicity `mults[n]` for every `n >= start`.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicRule {
    pub start: u64,
    pub mults: DimSeqRep,
}

impl DyadicRule {
    fn total_is_infinite(&self) -> bool {
        let tail_from = self.mults.prefix().len() as u64;
        (self.start..tail_from).any(|n| self.mults.eval(n as i64).is_inf())
            || self.mults.period_sum() != Some(0)
    }
}

/// Spectrum as explicit eigenvalues with multiplicities plus an optional
/// dyadic rule. Block values are distinct, sorted, and carry nonzero
/// multiplicity; the total multiplicity is infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRep {
    blocks: Vec<(Rat, ExtNat)>,
    rule: Option<DyadicRule>,
    pub index_scheme: String,
}

impl SpectrumRep {
    pub fn new(blocks: Vec<(Rat, ExtNat)>, rule: Option<DyadicRule>) -> Result<Self> {
        let mut merged: BTreeMap<Rat, ExtNat> = BTreeMap::new();
        for (v, m) in blocks {
            let e = merged.entry(v).or_insert(ExtNat::ZERO);
            *e = *e + m;
        }
        let blocks: Vec<_> = merged
            .into_iter()
            .filter(|(_, m)| *m != ExtNat::ZERO)
            .collect();
        let infinite = blocks.iter().any(|(_, m)| m.is_inf())
            || rule.as_ref().is_some_and(DyadicRule::total_is_infinite);
        if !infinite {
            return Err(Error::Representation(
                "total multiplicity must be infinite".into(),
            ));
        }
        Ok(SpectrumRep {
            blocks,
            rule,
            index_scheme: STD_SCHEME.into(),
        })
    }

    pub fn blocks(&self) -> &[(Rat, ExtNat)] {
        &self.blocks
    }

    pub fn rule(&self) -> Option<&DyadicRule> {
        self.rule.as_ref()
    }

    pub fn to_json(&self) -> Value {
        let blocks: Vec<Value> = self
            .blocks
            .iter()
            .map(|(v, m)| json!({"value": rat::to_json(v), "mult": m.to_json()}))
            .collect();
        let rule = match &self.rule {
            Some(r) => json!({"start": r.start, "mults": r.mults.to_json()}),
            None => Value::Null,
        };
        json!({"kind": "spectrum", "blocks": blocks, "rule": rule, "index_scheme": self.index_scheme})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let blocks = v
            .get("blocks")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("spectrum needs a \"blocks\" array".into()))?
            .iter()
            .map(|b| {
                let value = rat::from_json(
                    b.get("value")
                        .ok_or_else(|| Error::Parse("block needs \"value\"".into()))?,
                )?;
                let mult = ExtNat::from_json(
                    b.get("mult")
                        .ok_or_else(|| Error::Parse("block needs \"mult\"".into()))?,
                )?;
                Ok((value, mult))
            })
            .collect::<Result<Vec<_>>>()?;
        let rule = match v.get("rule") {
            None | Some(Value::Null) => None,
            Some(r) => Some(DyadicRule {
                start: r
                    .get("start")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| Error::Parse("rule needs a natural \"start\"".into()))?,
                mults: DimSeqRep::from_json(
                    r.get("mults")
                        .ok_or_else(|| Error::Parse("rule needs \"mults\"".into()))?,
                )?,
            }),
        };
        let mut s = SpectrumRep::new(blocks, rule)?;
        s.index_scheme = scheme_of(v)?.into();
        Ok(s)
    }
}

/// Band index of an eigenvalue: `n` with `|λ| + 1 ∈ [2^n, 2^{n+1})`.
/// Band 0 is `(-1, 1)`; band `n >= 1` is `(1 - 2^{n+1}, 1 - 2^n] ∪ [2^n - 1, 2^{n+1} - 1)`.
pub fn band_of(value: &Rat) -> u64 {
    rat::floor_log2(&(value.abs() + Rat::one())) as u64
}

/// Band of `exp(g / 2) - 1`, i.e. `floor(g / (2 ln 2))` for `g > 0`.
fn exp_half_band(g: &Rat) -> Result<u64> {
    if !g.is_positive() {
        // exp(g/2) - 1 lies in (-1, 0]
        return Ok(0);
    }
    let scale = Rat::from_integer(10u64.pow(18).into());
    let ln2_lo = Rat::from_integer(693_147_180_559_945_309u64.into()) / &scale;
    let ln2_hi = &ln2_lo + scale.recip();
    let two = rat::int(2);
    let lo = (g / (&two * &ln2_hi)).floor();
    let hi = (g / (&two * &ln2_lo)).floor();
    if lo != hi {
        return Err(Error::Invariant(format!(
            "band of exp({g}/2) - 1 not resolved"
        )));
    }
    rat::ceil_to_u64(&lo).ok_or_else(|| Error::Invariant("band index out of range".into()))
}

/// Band counts as a finite map plus arithmetic progressions of bands that
/// each receive one eigenvalue.
#[derive(Default)]
struct BandCounts {
    explicit: BTreeMap<u64, ExtNat>,
    /// `(first band, step)`
    progressions: Vec<(u64, u64)>,
}

impl BandCounts {
    fn add(&mut self, band: u64, m: ExtNat) {
        let e = self.explicit.entry(band).or_insert(ExtNat::ZERO);
        *e = *e + m;
    }

    fn into_seq(self) -> Result<DimSeqRep> {
        let start = self
            .explicit
            .keys()
            .next_back()
            .map_or(0, |b| b + 1)
            .max(self.progressions.iter().map(|p| p.0).max().unwrap_or(0));
        let hits = |n: u64| {
            self.progressions
                .iter()
                .filter(|&&(s, j)| n >= s && (n - s).is_multiple_of(j))
                .count() as u64
        };
        let prefix = (0..start)
            .map(|n| self.explicit.get(&n).copied().unwrap_or(ExtNat::ZERO) + ExtNat::Fin(hits(n)))
            .collect();
        let tail = if self.progressions.is_empty() {
            DimTail::Const(ExtNat::ZERO)
        } else {
            let period = self.progressions.iter().fold(1, |acc, p| lcm(acc, p.1));
            DimTail::Periodic((0..period).map(|t| hits(start + t)).collect())
        };
        DimSeqRep::new(prefix, tail)
    }
}

/// Bands of `u(q) = coeff * 2^{jq} + offset`: explicit bands for the first
/// cycles, then one eigenvalue in each band `jq + e` from some cycle on.
fn geometric_bands(counts: &mut BandCounts, coeff: &Rat, ratio: &Rat, offset: &Rat) -> Result<()> {
    let j = rat::power_of_two_exponent(ratio).ok_or_else(|| {
        Error::UnsupportedTail(format!("geometric ratio {ratio} is not a power of two"))
    })?;
    let e = rat::floor_log2(coeff);
    let e = if offset.is_negative() && *coeff == rat::pow2_signed(e) {
        e - 1
    } else {
        e
    };
    // the set of cycles where the band equals jq + e is upward closed
    const MAX_CYCLES: u64 = 4096;
    for q in 0..MAX_CYCLES {
        let u = coeff * rat::pow(ratio, q) + offset;
        let band = rat::floor_log2(&u);
        if band == (j * q) as i64 + e {
            counts.progressions.push((band as u64, j));
            return Ok(());
        }
        counts.add(band as u64, ExtNat::Fin(1));
    }
    Err(Error::Invariant(
        "geometric band pattern did not settle".into(),
    ))
}

fn diag_dims(op: &DiagOpSeq) -> Result<DimSeqRep> {
    let mut counts = BandCounts::default();
    match &op.eigenvalues {
        Eigenvalues::Direct(s) => {
            let u = s.abs().add_const(&Rat::one());
            for v in u.prefix() {
                counts.add(rat::floor_log2(v) as u64, ExtNat::Fin(1));
            }
            for lane in u.lanes() {
                match lane {
                    Lane::Const(c) => counts.add(rat::floor_log2(c) as u64, ExtNat::Inf),
                    Lane::Affine { .. } => {
                        return Err(Error::UnsupportedTail(
                            "affine eigenvalues give band counts growing like 2^n".into(),
                        ))
                    }
                    Lane::Geometric {
                        coeff,
                        ratio,
                        offset,
                    } => geometric_bands(&mut counts, coeff, ratio, offset)?,
                }
            }
        }
        Eigenvalues::ExpHalf(g) => {
            for v in g.prefix() {
                counts.add(exp_half_band(v)?, ExtNat::Fin(1));
            }
            for lane in g.lanes() {
                match lane {
                    Lane::Const(c) => counts.add(exp_half_band(c)?, ExtNat::Inf),
                    _ => {
                        return Err(Error::UnsupportedTail(
                            "exponential eigenvalue lanes must be constant for band counts".into(),
                        ))
                    }
                }
            }
        }
    }
    counts.into_seq()
}

fn spectrum_dims(s: &SpectrumRep) -> Result<DimSeqRep> {
    let mut counts = BandCounts::default();
    for (v, m) in &s.blocks {
        counts.add(band_of(v), *m);
    }
    let Some(rule) = &s.rule else {
        return counts.into_seq();
    };
    let explicit = counts.into_seq()?;
    let start = (rule.start as usize)
        .max(rule.mults.prefix().len())
        .max(explicit.prefix().len());
    let prefix = (0..start as i64)
        .map(|n| {
            explicit.eval(n)
                + if n as u64 >= rule.start {
                    rule.mults.eval(n)
                } else {
                    ExtNat::ZERO
                }
        })
        .collect();
    DimSeqRep::new(prefix, rule.mults.rebased_tail(start))
}

/// Dimension of each dyadic spectral band of `(|A| + 1)^{-1}`.
pub fn assoc_dims(op: &Operator) -> Result<DimSeqRep> {
    let d = match op {
        Operator::Diag(a) => diag_dims(a)?,
        Operator::Spectrum(s) => spectrum_dims(s)?,
    };
    if !d.diverges() {
        return Err(Error::Invariant("band dimensions have finite sum".into()));
    }
    Ok(d)
}

/// Domain equality up to a unitary, via window-sum domination of the band
/// dimensions.
pub fn decide_edomu(a: &Operator, b: &Operator) -> Result<SigmaVerdict> {
    decide_esigma(&assoc_dims(a)?, &assoc_dims(b)?)
}

/// Eigenvalue sequence listing the spectrum with multiplicity: finite
/// multiplicities in the prefix, each infinite multiplicity on its own
/// residue class, and the dyadic rule's periodic part on geometric classes.
pub fn enumerate(s: &SpectrumRep) -> Result<DiagOpSeq> {
    let mut prefix = Vec::new();
    let mut lanes = Vec::new();
    fn place(v: Rat, m: ExtNat, prefix: &mut Vec<Rat>, lanes: &mut Vec<Lane>) {
        match m {
            ExtNat::Fin(c) => prefix.extend(std::iter::repeat_n(v, c as usize)),
            ExtNat::Inf => lanes.push(Lane::Const(v)),
        }
    }
    for (v, m) in &s.blocks {
        place(v.clone(), *m, &mut prefix, &mut lanes);
    }
    if let Some(rule) = &s.rule {
        let start = (rule.start as usize).max(rule.mults.prefix().len());
        for n in rule.start as usize..start {
            place(
                rat::pow2(n as u64) - Rat::one(),
                rule.mults.eval(n as i64),
                &mut prefix,
                &mut lanes,
            );
        }
        let per_residue: Vec<u64> = match rule.mults.rebased_tail(start) {
            DimTail::Const(ExtNat::Inf) => {
                return Err(Error::UnsupportedSpectrum(
                    "infinitely many infinite multiplicities cannot be interleaved".into(),
                ))
            }
            DimTail::Const(ExtNat::Fin(c)) => vec![c],
            DimTail::Periodic(v) => v,
        };
        let p = per_residue.len() as u64;
        for (t, &count) in per_residue.iter().enumerate() {
            for _ in 0..count {
                lanes.push(Lane::Geometric {
                    coeff: rat::pow2(start as u64 + t as u64),
                    ratio: rat::pow2(p),
                    offset: -Rat::one(),
                });
            }
        }
    }
    if lanes.is_empty() {
        return Err(Error::UnsupportedSpectrum(
            "no infinite part to form a tail".into(),
        ));
    }
    let seq = RealSeqRep::new(prefix, lanes)?;
    Ok(DiagOpSeq::direct(seq).with_scheme(&s.index_scheme))
}

//! Diagonal stand-ins for self-adjoint operators.
//!
//! An operator is either an eigenvalue sequence over a fixed orthonormal
//! basis (`DiagOpSeq`) or a list of eigenvalues with multiplicities
//! (`SpectrumRep`). Everything downstream works with the contraction
//! `T = (|A| + 1)^{-power}` and its dyadic spectral bands.

mod dims;
mod douglas;
mod edom;

use num::{One, Signed};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rat::{self, Rat};
use crate::seqrep::RealSeqRep;

pub use dims::{assoc_dims, band_of, decide_edomu, enumerate, DyadicRule, SpectrumRep};
pub use douglas::{douglas_findim, psd_margin, DouglasResult};
pub use edom::{decide_edom, log_ratio_at, DomBound, DomVerdict, EDOM_WITNESS_LOG_GAP};

pub const STD_SCHEME: &str = "std";

/// How the stored sequence determines the eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub enum Eigenvalues {
    /// Eigenvalue `n` is `seq[n]`.
    Direct(RealSeqRep),
    /// Eigenvalue `n` is `exp(g[n] / 2) - 1` with `g >= 0`; kept symbolic.
    ExpHalf(RealSeqRep),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagOpSeq {
    pub eigenvalues: Eigenvalues,
    pub index_scheme: String,
}

impl DiagOpSeq {
    pub fn direct(seq: RealSeqRep) -> Self {
        DiagOpSeq {
            eigenvalues: Eigenvalues::Direct(seq),
            index_scheme: STD_SCHEME.into(),
        }
    }

    pub fn exp_half(g: RealSeqRep) -> Result<Self> {
        if !g.is_nonnegative() {
            return Err(Error::Representation(
                "exponent sequence must be nonnegative".into(),
            ));
        }
        Ok(DiagOpSeq {
            eigenvalues: Eigenvalues::ExpHalf(g),
            index_scheme: STD_SCHEME.into(),
        })
    }

    pub fn with_scheme(mut self, scheme: &str) -> Self {
        self.index_scheme = scheme.into();
        self
    }

    /// Eigenvalue `n` as a float.
    pub fn eigenvalue_f64(&self, n: u64) -> f64 {
        match &self.eigenvalues {
            Eigenvalues::Direct(s) => rat::to_f64(&s.eval(n as i64)),
            Eigenvalues::ExpHalf(g) => (rat::to_f64(&g.eval(n as i64)) / 2.0).exp_m1(),
        }
    }

    /// `ln(|a_n| + 1)`.
    pub fn log_u(&self, n: u64) -> f64 {
        match &self.eigenvalues {
            Eigenvalues::Direct(s) => rat::ln(&(s.eval(n as i64).abs() + Rat::one())),
            Eigenvalues::ExpHalf(g) => rat::to_f64(&g.eval(n as i64)) / 2.0,
        }
    }

    pub fn to_json(&self) -> Value {
        let (form, seq) = match &self.eigenvalues {
            Eigenvalues::Direct(s) => ("direct", s),
            Eigenvalues::ExpHalf(g) => ("exp_half_minus_one", g),
        };
        json!({
            "kind": "diag_seq",
            "eigenvalues": seq.to_json(),
            "form": form,
            "index_scheme": self.index_scheme,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let seq = RealSeqRep::from_json(
            v.get("eigenvalues")
                .ok_or_else(|| Error::Parse("diag_seq needs \"eigenvalues\"".into()))?,
        )?;
        let op = match v.get("form").and_then(Value::as_str).unwrap_or("direct") {
            "direct" => DiagOpSeq::direct(seq),
            "exp_half_minus_one" => DiagOpSeq::exp_half(seq)?,
            other => return Err(Error::Parse(format!("unknown eigenvalue form {other:?}"))),
        };
        Ok(op.with_scheme(scheme_of(v)?))
    }
}

pub(crate) fn scheme_of(v: &Value) -> Result<&str> {
    match v.get("index_scheme") {
        None => Ok(STD_SCHEME),
        Some(s) => s
            .as_str()
            .ok_or_else(|| Error::Parse("\"index_scheme\" must be a string".into())),
    }
}

/// Either operator encoding.
#[derive(Debug, Clone, PartialEq)]
pub enum Operator {
    Diag(DiagOpSeq),
    Spectrum(SpectrumRep),
}

impl Operator {
    pub fn index_scheme(&self) -> &str {
        match self {
            Operator::Diag(d) => &d.index_scheme,
            Operator::Spectrum(s) => &s.index_scheme,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Operator::Diag(d) => d.to_json(),
            Operator::Spectrum(s) => s.to_json(),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        match v.get("kind").and_then(Value::as_str) {
            Some("diag_seq") => Ok(Operator::Diag(DiagOpSeq::from_json(v)?)),
            Some("spectrum") => Ok(Operator::Spectrum(SpectrumRep::from_json(v)?)),
            _ => Err(Error::Parse(
                "operator \"kind\" must be \"diag_seq\" or \"spectrum\"".into(),
            )),
        }
    }
}

/// `(|a_n| + 1)^{-power}` in closed form.
#[derive(Debug, Clone, PartialEq)]
pub enum TransformedSeq {
    /// `base_n^{-power}`, where `base = |a| + 1 >= 1`.
    Reciprocal { base: RealSeqRep, power: u32 },
    /// `exp(exponent_n)`.
    Exp { exponent: RealSeqRep },
}

impl TransformedSeq {
    pub fn eval_f64(&self, n: u64) -> f64 {
        match self {
            TransformedSeq::Reciprocal { base, power } => {
                (-(*power as f64) * rat::ln(&base.eval(n as i64))).exp()
            }
            TransformedSeq::Exp { exponent } => rat::to_f64(&exponent.eval(n as i64)).exp(),
        }
    }

    /// Exact value, when it is rational.
    pub fn eval_exact(&self, n: u64) -> Option<Rat> {
        match self {
            TransformedSeq::Reciprocal { base, power } => {
                Some(rat::pow(&base.eval(n as i64), *power as u64).recip())
            }
            TransformedSeq::Exp { .. } => None,
        }
    }

    /// The transformed sequence as a rational sequence, when every tail lane
    /// is constant.
    pub fn as_real_seq(&self) -> Option<RealSeqRep> {
        let TransformedSeq::Reciprocal { base, power } = self else {
            return None;
        };
        if !base.lanes().iter().all(|l| l.is_const()) {
            return None;
        }
        let f = |v: &Rat| rat::pow(v, *power as u64).recip();
        let lanes = base
            .lanes()
            .iter()
            .map(|l| crate::seqrep::Lane::Const(f(&l.eval(0))))
            .collect();
        RealSeqRep::new(base.prefix().iter().map(f).collect(), lanes).ok()
    }
}

/// `T_A = (|A| + 1)^{-power}` for `power` 1 or 2.
pub fn t_transform(a: &DiagOpSeq, power: u32) -> Result<TransformedSeq> {
    if power != 1 && power != 2 {
        return Err(Error::BadArgument(format!(
            "power must be 1 or 2, got {power}"
        )));
    }
    Ok(match &a.eigenvalues {
        Eigenvalues::Direct(s) => TransformedSeq::Reciprocal {
            base: s.abs().add_const(&Rat::one()),
            power,
        },
        Eigenvalues::ExpHalf(g) => TransformedSeq::Exp {
            exponent: g.scale(&rat::frac(-(power as i64), 2)),
        },
    })
}

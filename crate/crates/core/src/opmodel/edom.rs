use num::{One, Signed, Zero};

use super::{DiagOpSeq, Eigenvalues};
use crate::eqrel::doubling_search;
use crate::error::{Error, Result};
use crate::rat::{self, Rat};
use crate::seqrep::{Lane, RealSeqRep};

/// Refutation witnesses exhibit an index where `|ln(|a_n|+1) - ln(|b_n|+1)|`
/// exceeds this.
pub const EDOM_WITNESS_LOG_GAP: f64 = 14.0;

/// A constant in `C1 T_B <= T_A <= C2 T_B`, with `T = (|.| + 1)^{-2}`.
#[derive(Debug, Clone, PartialEq)]
pub enum DomBound {
    Rational(Rat),
    /// `exp(r)`
    ExpOf(Rat),
}

impl DomBound {
    pub fn to_f64(&self) -> f64 {
        match self {
            DomBound::Rational(r) => rat::to_f64(r),
            DomBound::ExpOf(r) => rat::to_f64(r).exp(),
        }
    }

    /// Natural log of the bound.
    pub fn ln(&self) -> f64 {
        match self {
            DomBound::Rational(r) => rat::ln(r),
            DomBound::ExpOf(r) => rat::to_f64(r),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomVerdict {
    /// `dom A = dom B`. `bounds` holds the optimal `(C1, C2)` when both
    /// operators use the same eigenvalue form.
    Equal {
        bounds: Option<(DomBound, DomBound)>,
    },
    /// `|ln(|a_index|+1) - ln(|b_index|+1)| > EDOM_WITNESS_LOG_GAP`, and the
    /// gap is unbounded along the residue class of `index` past `start`.
    NotEqual {
        index: u64,
        residue: u64,
        period: u64,
        start: u64,
    },
}

impl DomVerdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, DomVerdict::Equal { .. })
    }
}

/// `ln(|a_n|+1) - ln(|b_n|+1)`.
pub fn log_ratio_at(a: &DiagOpSeq, b: &DiagOpSeq, n: u64) -> f64 {
    match (&a.eigenvalues, &b.eigenvalues) {
        (Eigenvalues::Direct(x), Eigenvalues::Direct(y)) => {
            let u = |s: &RealSeqRep| s.eval(n as i64).abs() + Rat::one();
            rat::ln(&(u(x) / u(y)))
        }
        (Eigenvalues::ExpHalf(x), Eigenvalues::ExpHalf(y)) => {
            rat::to_f64(&(x.eval(n as i64) - y.eval(n as i64))) / 2.0
        }
        _ => a.log_u(n) - b.log_u(n),
    }
}

/// Leading behaviour of `ln u(q)` along one lane. Two lanes have a bounded
/// log-ratio iff their growth classes are equal.
#[derive(Debug, Clone, PartialEq)]
enum Growth {
    Bounded,
    /// `ln q + O(1)`
    Logarithmic,
    /// `(slope / 2) q + O(1)`
    LinearRational(Rat),
    /// `q ln r + O(1)`; never equal to a rational rate since `ln r` is
    /// transcendental for rational `r > 1`.
    LinearLog(Rat),
    /// `(coeff / 2) ratio^q + O(1)`
    Exponential {
        coeff: Rat,
        ratio: Rat,
    },
}

/// Growth of `ln u` for a lane of `u = |a| + 1`.
fn direct_growth(u: &Lane) -> Growth {
    match u {
        Lane::Const(_) => Growth::Bounded,
        Lane::Affine { .. } => Growth::Logarithmic,
        Lane::Geometric { ratio, .. } => Growth::LinearLog(ratio.clone()),
    }
}

/// Growth of `ln u = g / 2` for a lane of `g`.
fn exp_half_growth(g: &Lane) -> Growth {
    match g {
        Lane::Const(_) => Growth::Bounded,
        Lane::Affine { slope, .. } => Growth::LinearRational(slope.clone()),
        Lane::Geometric { coeff, ratio, .. } => Growth::Exponential {
            coeff: coeff.clone(),
            ratio: ratio.clone(),
        },
    }
}

/// The sequence whose lanes determine growth, and the classifier for it.
fn growth_view(op: &DiagOpSeq) -> (RealSeqRep, fn(&Lane) -> Growth) {
    match &op.eigenvalues {
        Eigenvalues::Direct(s) => (s.abs().add_const(&Rat::one()), direct_growth),
        Eigenvalues::ExpHalf(g) => (g.clone(), exp_half_growth),
    }
}

/// Infimum and supremum over `q >= 0` of `y(q) / x(q)` for two positive
/// lanes of equal growth. The ratio is a Möbius function of `q` or of
/// `ratio^q`, hence monotone, so the extremes are the value at `q = 0` and
/// the limit.
fn lane_ratio_range(x: &Lane, y: &Lane) -> (Rat, Rat) {
    let at0 = y.eval(0) / x.eval(0);
    let limit = match (x, y) {
        (Lane::Const(c), Lane::Const(d)) => d / c,
        (Lane::Affine { slope: s, .. }, Lane::Affine { slope: t, .. }) => t / s,
        (Lane::Geometric { coeff: c, .. }, Lane::Geometric { coeff: d, .. }) => d / c,
        _ => unreachable!("lanes of equal growth share a kind"),
    };
    if at0 <= limit {
        (at0, limit)
    } else {
        (limit, at0)
    }
}

fn direct_bounds(ua: &RealSeqRep, ub: &RealSeqRep) -> (DomBound, DomBound) {
    let al = RealSeqRep::aligned(ua, ub);
    // T_A / T_B = (u_b / u_a)^2
    let mut ratios: Vec<Rat> = al
        .prefix_a
        .iter()
        .zip(&al.prefix_b)
        .map(|(x, y)| y / x)
        .collect();
    for (x, y) in al.lanes_a.iter().zip(&al.lanes_b) {
        let (lo, hi) = lane_ratio_range(x, y);
        ratios.push(lo);
        ratios.push(hi);
    }
    let lo = ratios.iter().min().unwrap();
    let hi = ratios.iter().max().unwrap();
    (DomBound::Rational(lo * lo), DomBound::Rational(hi * hi))
}

fn exp_half_bounds(ga: &RealSeqRep, gb: &RealSeqRep) -> (DomBound, DomBound) {
    let al = RealSeqRep::aligned(ga, gb);
    // T_A / T_B = exp(g_b - g_a); bounded lanes differ by a constant
    let mut diffs: Vec<Rat> = al
        .prefix_a
        .iter()
        .zip(&al.prefix_b)
        .map(|(x, y)| y - x)
        .collect();
    for (x, y) in al.lanes_a.iter().zip(&al.lanes_b) {
        diffs.push(y.eval(0) - x.eval(0));
    }
    let lo = diffs.iter().min().cloned().unwrap_or_else(Rat::zero);
    let hi = diffs.iter().max().cloned().unwrap_or_else(Rat::zero);
    (DomBound::ExpOf(lo), DomBound::ExpOf(hi))
}

/// Decides `dom A = dom B` for diagonal operators over the same basis.
pub fn decide_edom(a: &DiagOpSeq, b: &DiagOpSeq) -> Result<DomVerdict> {
    if a.index_scheme != b.index_scheme {
        return Err(Error::IndexSchemeMismatch(
            a.index_scheme.clone(),
            b.index_scheme.clone(),
        ));
    }
    let (va, ga) = growth_view(a);
    let (vb, gb) = growth_view(b);
    let al = RealSeqRep::aligned(&va, &vb);
    for (j, (x, y)) in al.lanes_a.iter().zip(&al.lanes_b).enumerate() {
        if ga(x) != gb(y) {
            let q = doubling_search(|q| {
                log_ratio_at(a, b, al.index(j, q)).abs() > EDOM_WITNESS_LOG_GAP
            });
            return Ok(DomVerdict::NotEqual {
                index: al.index(j, q),
                residue: ((al.start + j) % al.period) as u64,
                period: al.period as u64,
                start: al.start as u64,
            });
        }
    }
    let bounds = match (&a.eigenvalues, &b.eigenvalues) {
        (Eigenvalues::Direct(_), Eigenvalues::Direct(_)) => Some(direct_bounds(&va, &vb)),
        (Eigenvalues::ExpHalf(x), Eigenvalues::ExpHalf(y)) => Some(exp_half_bounds(x, y)),
        _ => None,
    };
    Ok(DomVerdict::Equal { bounds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{frac, int};

    fn direct(s: RealSeqRep) -> DiagOpSeq {
        DiagOpSeq::direct(s)
    }

    fn rational_bounds(v: &DomVerdict) -> (Rat, Rat) {
        match v {
            DomVerdict::Equal {
                bounds: Some((DomBound::Rational(c1), DomBound::Rational(c2))),
            } => (c1.clone(), c2.clone()),
            v => panic!("expected rational bounds, got {v:?}"),
        }
    }

    #[test]
    fn reflexive_with_unit_bounds() {
        let a = direct(RealSeqRep::affine(vec![int(-4)], int(3), int(1)));
        assert_eq!(
            rational_bounds(&decide_edom(&a, &a).unwrap()),
            (int(1), int(1))
        );
        let g =
            DiagOpSeq::exp_half(RealSeqRep::geometric(vec![], int(1), int(3)).unwrap()).unwrap();
        assert_eq!(
            decide_edom(&g, &g).unwrap(),
            DomVerdict::Equal {
                bounds: Some((DomBound::ExpOf(int(0)), DomBound::ExpOf(int(0))))
            }
        );
    }

    #[test]
    fn n_against_two_n() {
        let a = direct(RealSeqRep::affine(vec![], int(1), int(0)));
        let b = direct(RealSeqRep::affine(vec![], int(2), int(0)));
        // (2n+1)/(n+1) runs from 1 up to 2, squared
        assert_eq!(
            rational_bounds(&decide_edom(&a, &b).unwrap()),
            (int(1), int(4))
        );
        assert_eq!(
            rational_bounds(&decide_edom(&b, &a).unwrap()),
            (frac(1, 4), int(1))
        );
    }

    #[test]
    fn n_against_two_to_the_n() {
        let a = direct(RealSeqRep::affine(vec![], int(1), int(0)));
        let b = direct(RealSeqRep::geometric(vec![], int(1), int(2)).unwrap());
        match decide_edom(&a, &b).unwrap() {
            DomVerdict::NotEqual { index, .. } => {
                assert!(log_ratio_at(&a, &b, index).abs() > EDOM_WITNESS_LOG_GAP);
                let n = index as f64;
                assert!(((n + 1.0).ln() - (n.exp2() + 1.0).ln()).abs() > EDOM_WITNESS_LOG_GAP);
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn geometric_ratios_decide() {
        let a = direct(RealSeqRep::geometric(vec![], int(1), int(2)).unwrap());
        let b = direct(RealSeqRep::geometric(vec![int(7)], int(-5), int(2)).unwrap());
        assert!(decide_edom(&a, &b).unwrap().is_equal());
        let c = direct(RealSeqRep::geometric(vec![], int(1), int(3)).unwrap());
        assert!(!decide_edom(&a, &c).unwrap().is_equal());
        let k = direct(RealSeqRep::constant(vec![], int(100)));
        assert!(!decide_edom(&a, &k).unwrap().is_equal());
        let p = direct(RealSeqRep::periodic(vec![], vec![int(-3), int(9)]).unwrap());
        assert!(decide_edom(&k, &p).unwrap().is_equal());
    }

    #[test]
    fn mixed_forms() {
        // exp(0/2) - 1 = 0 against the zero operator
        let z = direct(RealSeqRep::zero());
        let e = DiagOpSeq::exp_half(RealSeqRep::constant(vec![], int(4))).unwrap();
        assert_eq!(
            decide_edom(&z, &e).unwrap(),
            DomVerdict::Equal { bounds: None }
        );
        // g_n = 2n gives eigenvalues e^n - 1, against 2^n
        let lin = DiagOpSeq::exp_half(RealSeqRep::affine(vec![], int(2), int(0))).unwrap();
        let geo = direct(RealSeqRep::geometric(vec![], int(1), int(2)).unwrap());
        assert!(!decide_edom(&lin, &geo).unwrap().is_equal());
    }

    #[test]
    fn scheme_mismatch() {
        let a = direct(RealSeqRep::zero());
        let b = direct(RealSeqRep::zero()).with_scheme("other");
        assert!(matches!(
            decide_edom(&a, &b),
            Err(Error::IndexSchemeMismatch(..))
        ));
    }
}

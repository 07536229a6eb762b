//! Reduction maps between sequence equivalences and operator relations.
//!
//! * `tilde` splits each entry into a (positive part, negative part) pair.
//! * `psi` turns a real sequence into a diagonal operator whose domain class
//!   tracks the bounded-distance class of the sequence.
//! * `phi` reads the log-diagonal of `(|A| + 1)^{-2}` back into a sequence.
//! * `psi_k` builds an operator whose band dimensions are a given sequence.

use num::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::eqrel::{decide_linf, LinfVerdict};
use crate::error::{Error, Result};
use crate::gen::{self, GenRng};
use crate::opmodel::{decide_edom, DiagOpSeq, DyadicRule, Eigenvalues, SpectrumRep};
use crate::rat::{self, Rat};
use crate::seqrep::{DimSeqRep, DimTail, ExtNat, Lane, LaneSign, RealSeqRep};

/// `(x~_{2i}, x~_{2i+1}) = (|x_i|, 0)` if `x_i >= 0`, else `(0, |x_i|)`.
pub fn tilde(x: &RealSeqRep) -> RealSeqRep {
    let (prefix, lanes) = x.sign_settled();
    let mut out_prefix = Vec::with_capacity(2 * prefix.len());
    for v in prefix {
        if v.is_negative() {
            out_prefix.push(Rat::zero());
            out_prefix.push(-v);
        } else {
            out_prefix.push(v);
            out_prefix.push(Rat::zero());
        }
    }
    let zero = Lane::Const(Rat::zero());
    let mut out_lanes = Vec::with_capacity(2 * lanes.len());
    for l in lanes {
        // source cycle q of lane j sits at output cycle q of lanes 2j, 2j+1
        match l.settled_sign() {
            LaneSign::NonNegative => {
                out_lanes.push(l);
                out_lanes.push(zero.clone());
            }
            LaneSign::Negative => {
                out_lanes.push(zero.clone());
                out_lanes.push(l.scale(&-Rat::one()));
            }
        }
    }
    RealSeqRep::new(out_prefix, out_lanes).expect("settled lanes are valid")
}

/// `exp(x~_n / 2) - 1` on the standard basis.
pub fn psi(alpha: &RealSeqRep) -> DiagOpSeq {
    DiagOpSeq::exp_half(tilde(alpha)).expect("tilde images are nonnegative")
}

/// `n -> ln <e_n, (|A| + 1)^{-2} e_n> = -2 ln(|a_n| + 1)`, tested on the
/// operator's own basis.
#[derive(Debug, Clone, PartialEq)]
pub enum PhiImage {
    /// The image itself, exactly: `-g` for eigenvalues `exp(g/2) - 1`.
    Exact(RealSeqRep),
    /// `-2 ln u_n`, stored as `u = |a| + 1`.
    NegTwoLog(RealSeqRep),
}

impl PhiImage {
    pub fn eval_f64(&self, n: u64) -> f64 {
        match self {
            PhiImage::Exact(s) => rat::to_f64(&s.eval(n as i64)),
            PhiImage::NegTwoLog(u) => -2.0 * rat::ln(&u.eval(n as i64)),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            PhiImage::Exact(s) => json!({"form": "exact", "seq": s.to_json()}),
            PhiImage::NegTwoLog(u) => json!({"form": "neg_two_log", "seq": u.to_json()}),
        }
    }
}

pub fn phi(a: &DiagOpSeq) -> PhiImage {
    match &a.eigenvalues {
        Eigenvalues::ExpHalf(g) => PhiImage::Exact(g.scale(&-Rat::one())),
        Eigenvalues::Direct(s) => PhiImage::NegTwoLog(s.abs().add_const(&Rat::one())),
    }
}

/// Refutations of bounded distance between `phi` images exhibit an index
/// where the images differ by more than this.
pub const PHI_WITNESS_GAP: f64 = 28.0;

#[derive(Debug, Clone, PartialEq)]
pub enum PhiLinfVerdict {
    /// `sup_n |x_n - y_n| <= bound`.
    Equivalent {
        bound: Rat,
    },
    NotEquivalent {
        index: u64,
    },
}

impl PhiLinfVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, PhiLinfVerdict::Equivalent { .. })
    }
}

/// `lim_{q -> inf} x(q) / y(q)` for positive lanes, as `Some(0)`, a positive
/// rational, or `None` for infinity.
fn ratio_limit(x: &Lane, y: &Lane) -> Option<Rat> {
    // (order of growth, base of the exponential part, leading coefficient)
    fn lead(l: &Lane) -> (u8, Rat, Rat) {
        match l {
            Lane::Const(c) => (0, Rat::one(), c.clone()),
            Lane::Affine { slope, .. } => (1, Rat::one(), slope.clone()),
            Lane::Geometric { coeff, ratio, .. } => (2, ratio.clone(), coeff.clone()),
        }
    }
    let (ox, bx, cx) = lead(x);
    let (oy, by, cy) = lead(y);
    match (ox, bx).cmp(&(oy, by)) {
        std::cmp::Ordering::Less => Some(Rat::zero()),
        std::cmp::Ordering::Greater => None,
        std::cmp::Ordering::Equal => Some(cx / cy),
    }
}

fn log_gap_witness(x: &PhiImage, y: &PhiImage, index: impl Fn(u64) -> u64) -> PhiLinfVerdict {
    let q = crate::eqrel::doubling_search(|q| {
        let n = index(q);
        (x.eval_f64(n) - y.eval_f64(n)).abs() > PHI_WITNESS_GAP
    });
    PhiLinfVerdict::NotEquivalent { index: index(q) }
}

/// Bounded distance between two `phi` images. Bounds are exact for exact
/// images and rational upper bounds of the logarithmic supremum otherwise.
pub fn decide_linf_phi(x: &PhiImage, y: &PhiImage) -> PhiLinfVerdict {
    match (x, y) {
        (PhiImage::Exact(a), PhiImage::Exact(b)) => match decide_linf(a, b) {
            LinfVerdict::Equivalent { bound } => PhiLinfVerdict::Equivalent { bound },
            // that witness gap exceeds PHI_WITNESS_GAP
            LinfVerdict::NotEquivalent { index, .. } => PhiLinfVerdict::NotEquivalent { index },
        },
        (PhiImage::NegTwoLog(u), PhiImage::NegTwoLog(v)) => {
            let al = RealSeqRep::aligned(u, v);
            let mut sup = 0.0f64;
            for (p, q) in al.prefix_a.iter().zip(&al.prefix_b) {
                sup = sup.max(rat::ln(&(p / q)).abs());
            }
            for (j, (p, q)) in al.lanes_a.iter().zip(&al.lanes_b).enumerate() {
                match ratio_limit(p, q) {
                    Some(lim) if lim.is_positive() => {
                        // u_a / u_b is monotone along the lane
                        sup = sup
                            .max(rat::ln(&lim).abs())
                            .max(rat::ln(&(p.eval(0) / q.eval(0))).abs());
                    }
                    _ => return log_gap_witness(x, y, |c| al.index(j, c)),
                }
            }
            PhiLinfVerdict::Equivalent {
                bound: rat::upper_bound_of(2.0 * sup),
            }
        }
        (PhiImage::Exact(g), PhiImage::NegTwoLog(u))
        | (PhiImage::NegTwoLog(u), PhiImage::Exact(g)) => {
            // a rational lane minus 2 ln of a rational lane is bounded only if
            // both are constant: ln r is transcendental for rational r > 1
            let al = RealSeqRep::aligned(g, u);
            let mut sup = 0.0f64;
            for (p, q) in al.prefix_a.iter().zip(&al.prefix_b) {
                sup = sup.max((rat::to_f64(p) + 2.0 * rat::ln(q)).abs());
            }
            for (j, (p, q)) in al.lanes_a.iter().zip(&al.lanes_b).enumerate() {
                if !(p.is_const() && q.is_const()) {
                    return log_gap_witness(x, y, |c| al.index(j, c));
                }
                sup = sup.max((rat::to_f64(&p.eval(0)) + 2.0 * rat::ln(&q.eval(0))).abs());
            }
            PhiLinfVerdict::Equivalent {
                bound: rat::upper_bound_of(sup),
            }
        }
    }
}

/// Operator whose band dimensions are `alpha`: eigenvalue `2^n - 1` with
/// multiplicity `alpha_n`.
pub fn psi_k(alpha: &DimSeqRep) -> Result<SpectrumRep> {
    if !alpha.diverges() {
        return Err(Error::NotInX0);
    }
    let blocks = alpha
        .prefix()
        .iter()
        .enumerate()
        .map(|(n, &m)| (rat::pow2(n as u64) - Rat::one(), m))
        .collect();
    let rule = (*alpha.tail() != DimTail::Const(ExtNat::ZERO)).then(|| DyadicRule {
        start: alpha.prefix().len() as u64,
        mults: alpha.clone(),
    });
    SpectrumRep::new(blocks, rule)
}

/// Reads the input of `psi_k`, reporting infinite entries that do not form
/// a constant tail as unsupported.
pub fn psi_k_input_from_json(v: &Value) -> Result<DimSeqRep> {
    let periodic_inf = v
        .pointer("/tail/values")
        .and_then(Value::as_array)
        .is_some_and(|vals| vals.iter().any(|x| x.as_str() == Some("inf")));
    if periodic_inf {
        return Err(Error::UnsupportedInfPattern(
            "infinitely many infinite entries must form a constant tail".into(),
        ));
    }
    DimSeqRep::from_json(v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discrepancy {
    pub trial: usize,
    pub direction: &'static str,
    pub left: Value,
    pub right: Value,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BireductionReport {
    pub trials: usize,
    pub psi_agreements: usize,
    pub phi_agreements: usize,
    pub equivalent_pairs: usize,
    pub discrepancies: Vec<Discrepancy>,
}

impl BireductionReport {
    pub fn to_json(&self) -> Value {
        json!({
            "trials": self.trials,
            "psi_agreements": self.psi_agreements,
            "phi_agreements": self.phi_agreements,
            "equivalent_pairs": self.equivalent_pairs,
            "discrepancies": self.discrepancies.iter().map(|d| json!({
                "trial": d.trial,
                "direction": d.direction,
                "left": d.left,
                "right": d.right,
                "detail": d.detail,
            })).collect::<Vec<_>>(),
        })
    }
}

/// One `psi`-direction check: `decide_edom(psi a, psi b)` against
/// `decide_linf(a, b)`.
pub fn psi_direction_agrees(a: &RealSeqRep, b: &RealSeqRep) -> Result<(bool, bool)> {
    let linf = decide_linf(a, b).is_equivalent();
    let dom = decide_edom(&psi(a), &psi(b))?.is_equal();
    Ok((linf == dom, linf))
}

/// One `phi`-direction check: `decide_linf(phi A, phi B)` against
/// `decide_edom(A, B)`.
pub fn phi_direction_agrees(a: &DiagOpSeq, b: &DiagOpSeq) -> Result<(bool, bool)> {
    let dom = decide_edom(a, b)?.is_equal();
    let linf = decide_linf_phi(&phi(a), &phi(b)).is_equivalent();
    Ok((linf == dom, dom))
}

/// Runs both directions of the bireduction on `trials` seeded pairs each.
pub fn verify_bireduction(seed: u64, trials: usize) -> Result<BireductionReport> {
    let mut rng: GenRng = gen::rng(seed);
    let mut report = BireductionReport {
        trials,
        ..Default::default()
    };
    for t in 0..trials {
        let (a, b) = gen::linf_pair(&mut rng);
        let (ok, eq) = psi_direction_agrees(&a, &b)?;
        report.equivalent_pairs += eq as usize;
        if ok {
            report.psi_agreements += 1;
        } else {
            report.discrepancies.push(Discrepancy {
                trial: t,
                direction: "psi",
                left: a.to_json(),
                right: b.to_json(),
                detail: format!("linf equivalent: {eq}"),
            });
        }
        let (x, y) = gen::dom_pair(&mut rng);
        let (ok, eq) = phi_direction_agrees(&x, &y)?;
        if ok {
            report.phi_agreements += 1;
        } else {
            report.discrepancies.push(Discrepancy {
                trial: t,
                direction: "phi",
                left: x.to_json(),
                right: y.to_json(),
                detail: format!("domains equal: {eq}"),
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{frac, int};

    #[test]
    fn tilde_example() {
        let x = RealSeqRep::constant(vec![int(1), frac(-1, 2), int(4)], int(0));
        let want = RealSeqRep::constant(vec![int(1), int(0), int(0), frac(1, 2), int(4)], int(0));
        assert_eq!(tilde(&x), want);
        assert_eq!(tilde(&RealSeqRep::zero()), RealSeqRep::zero());
        let neg = RealSeqRep::constant(vec![], int(-3));
        assert_eq!(
            tilde(&neg),
            RealSeqRep::periodic(vec![], vec![int(0), int(3)]).unwrap()
        );
    }

    #[test]
    fn tilde_pointwise() {
        let x = RealSeqRep::affine(vec![int(2)], int(-1), int(1));
        let t = tilde(&x);
        for i in 0..30i64 {
            let v = x.eval(i);
            let (p, n) = if v.is_negative() {
                (int(0), -v)
            } else {
                (v, int(0))
            };
            assert_eq!(t.eval(2 * i), p);
            assert_eq!(t.eval(2 * i + 1), n);
        }
    }

    #[test]
    fn psi_example_eigenvalues() {
        let alpha = RealSeqRep::constant(vec![int(1), frac(-1, 2), int(4)], int(0));
        let op = psi(&alpha);
        let want = [
            0.5f64.exp_m1(),
            0.0,
            0.0,
            0.25f64.exp_m1(),
            2.0f64.exp_m1(),
            0.0,
            0.0,
        ];
        for (n, w) in want.iter().enumerate() {
            assert!((op.eigenvalue_f64(n as u64) - w).abs() < 1e-15);
        }
        assert_eq!(psi(&RealSeqRep::zero()).eigenvalue_f64(7), 0.0);
    }

    #[test]
    fn phi_of_psi_is_minus_tilde() {
        let alpha = RealSeqRep::affine(vec![int(-2)], frac(1, 2), int(-1));
        assert_eq!(
            phi(&psi(&alpha)),
            PhiImage::Exact(tilde(&alpha).scale(&int(-1)))
        );
        assert_eq!(
            phi(&DiagOpSeq::direct(RealSeqRep::zero())),
            PhiImage::NegTwoLog(RealSeqRep::constant(vec![], int(1)))
        );
    }

    #[test]
    fn phi_geometric_slope() {
        let a = DiagOpSeq::direct(RealSeqRep::geometric(vec![], int(1), int(2)).unwrap());
        let img = phi(&a);
        let slope = img.eval_f64(41) - img.eval_f64(40);
        assert!((slope + 2.0 * 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn phi_linf_cases() {
        let n = DiagOpSeq::direct(RealSeqRep::affine(vec![], int(1), int(0)));
        let two_n = DiagOpSeq::direct(RealSeqRep::affine(vec![], int(2), int(0)));
        match decide_linf_phi(&phi(&n), &phi(&two_n)) {
            // sup |2 ln((2n+1)/(n+1))| = 2 ln 2
            PhiLinfVerdict::Equivalent { bound } => {
                assert!(rat::to_f64(&bound) >= 2.0 * 2f64.ln());
                assert!(rat::to_f64(&bound) < 2.0 * 2f64.ln() + 1e-6);
            }
            v => panic!("{v:?}"),
        }
        let geo = DiagOpSeq::direct(RealSeqRep::geometric(vec![], int(1), int(2)).unwrap());
        match decide_linf_phi(&phi(&n), &phi(&geo)) {
            PhiLinfVerdict::NotEquivalent { index } => {
                assert!(
                    (phi(&n).eval_f64(index) - phi(&geo).eval_f64(index)).abs() > PHI_WITNESS_GAP
                )
            }
            v => panic!("{v:?}"),
        }
        let e = DiagOpSeq::exp_half(RealSeqRep::constant(vec![int(1)], int(2))).unwrap();
        assert!(!decide_linf_phi(&phi(&e), &phi(&n)).is_equivalent());
        let c = DiagOpSeq::direct(RealSeqRep::constant(vec![], int(5)));
        assert!(decide_linf_phi(&phi(&e), &phi(&c)).is_equivalent());
    }

    #[test]
    fn psi_k_examples() {
        use crate::opmodel::{assoc_dims, Operator};
        use crate::seqrep::ExtNat::{Fin, Inf};
        let alpha = DimSeqRep::constant(vec![Inf], Fin(0));
        let s = psi_k(&alpha).unwrap();
        assert_eq!(s.blocks(), &[(int(0), Inf)]);
        assert!(s.rule().is_none());
        assert_eq!(assoc_dims(&Operator::Spectrum(s)).unwrap(), alpha);

        let alpha = DimSeqRep::constant(vec![Fin(2), Inf], Fin(1));
        let s = psi_k(&alpha).unwrap();
        assert_eq!(s.blocks(), &[(int(0), Fin(2)), (int(1), Inf)]);
        assert_eq!(assoc_dims(&Operator::Spectrum(s)).unwrap(), alpha);

        assert_eq!(
            psi_k(&DimSeqRep::constant(vec![Fin(4)], Fin(0))),
            Err(Error::NotInX0)
        );
        let bad = json!({"prefix": [], "tail": {"kind": "periodic", "values": [1, "inf"]}});
        assert!(matches!(
            psi_k_input_from_json(&bad),
            Err(Error::UnsupportedInfPattern(_))
        ));
    }

    #[test]
    fn bireduction_examples() {
        let a = RealSeqRep::affine(vec![int(3)], frac(1, 2), int(0));
        assert_eq!(psi_direction_agrees(&a, &a).unwrap(), (true, true));
        let shifted = a.add_const(&int(5));
        assert_eq!(psi_direction_agrees(&a, &shifted).unwrap(), (true, true));
        let x = RealSeqRep::affine(vec![], int(1), int(0));
        let y = RealSeqRep::affine(vec![], int(2), int(0));
        assert_eq!(psi_direction_agrees(&x, &y).unwrap(), (true, false));
    }

    #[test]
    fn small_bireduction_run_is_clean() {
        let r = verify_bireduction(7, 50).unwrap();
        assert!(r.discrepancies.is_empty(), "{:?}", r.discrepancies);
        assert_eq!(r.psi_agreements, 50);
    }
}

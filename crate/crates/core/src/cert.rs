//! Self-contained certificates for every decision, and their re-checking.
//!
//! A certificate echoes its inputs, so `verify` needs nothing else. Witness
//! checks use direct evaluation and window sums rather than the decision
//! procedures.

use nalgebra::DMatrix;
use num::{One, Signed, Zero};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::eqrel::{
    decide_e1, decide_esigma, decide_linf, esigma_box, stabilization_bound, violates, E1Verdict,
    LinfVerdict, Side, SigmaVerdict, Violation, LINF_WITNESS_GAP,
};
use crate::error::{Error, Result};
use crate::opmodel::{
    assoc_dims, decide_edom, douglas_findim, log_ratio_at, psd_margin, DiagOpSeq, DomBound,
    DomVerdict, DouglasResult, Eigenvalues, Operator, EDOM_WITNESS_LOG_GAP,
};
use crate::rat::{self, Rat};
use crate::seqrep::{DimSeqRep, RealSeqRep};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub relation: String,
    pub verdict: String,
    pub witness: Value,
    pub inputs: Value,
    pub input_hash: String,
    pub tool_version: String,
}

/// Hex SHA-256 of the canonical serialization (object keys sorted).
pub fn hash_inputs(inputs: &Value) -> String {
    hex::encode(Sha256::digest(
        serde_json::to_string(inputs)
            .expect("JSON values serialize")
            .as_bytes(),
    ))
}

impl Certificate {
    fn new(relation: &str, verdict: &str, witness: Value, inputs: Value) -> Self {
        Certificate {
            relation: relation.into(),
            verdict: verdict.into(),
            witness,
            input_hash: hash_inputs(&inputs),
            inputs,
            tool_version: TOOL_VERSION.into(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "relation": self.relation,
            "verdict": self.verdict,
            "witness": self.witness,
            "inputs": self.inputs,
            "input_hash": self.input_hash,
            "tool_version": self.tool_version,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let s = |k: &str| -> Result<String> {
            v.get(k)
                .and_then(Value::as_str)
                .map(str::to_owned)
                .ok_or_else(|| Error::Parse(format!("certificate needs a string {k:?}")))
        };
        let field = |k: &str| {
            v.get(k)
                .cloned()
                .ok_or_else(|| Error::Parse(format!("certificate needs {k:?}")))
        };
        Ok(Certificate {
            relation: s("relation")?,
            verdict: s("verdict")?,
            witness: field("witness")?,
            inputs: field("inputs")?,
            input_hash: s("input_hash")?,
            tool_version: s("tool_version")?,
        })
    }

    /// Whether the verdict asserts the relation holds.
    pub fn holds(&self) -> bool {
        matches!(self.verdict.as_str(), "equivalent" | "equal" | "included")
    }
}

fn pair(a: Value, b: Value) -> Value {
    json!({"a": a, "b": b})
}

pub fn certify_linf(a: &RealSeqRep, b: &RealSeqRep) -> (LinfVerdict, Certificate) {
    let v = decide_linf(a, b);
    let (verdict, witness) = match &v {
        LinfVerdict::Equivalent { bound } => ("equivalent", json!({"bound": rat::to_json(bound)})),
        LinfVerdict::NotEquivalent { schedule, index } => (
            "not_equivalent",
            json!({"index": index, "schedule": schedule}),
        ),
    };
    (
        v,
        Certificate::new("linf", verdict, witness, pair(a.to_json(), b.to_json())),
    )
}

pub fn certify_e1(a: &RealSeqRep, b: &RealSeqRep) -> (E1Verdict, Certificate) {
    let v = decide_e1(a, b);
    let (verdict, witness) = match &v {
        E1Verdict::Equivalent { from } => ("equivalent", json!({"from": from})),
        E1Verdict::NotEquivalent {
            residue,
            period,
            start,
            sample,
        } => (
            "not_equivalent",
            json!({"residue": residue, "period": period, "start": start, "sample": sample}),
        ),
    };
    (
        v,
        Certificate::new("e1", verdict, witness, pair(a.to_json(), b.to_json())),
    )
}

fn sigma_witness(v: &SigmaVerdict) -> (&'static str, Value) {
    match v {
        SigmaVerdict::Equivalent { k, n_max, l_max } => (
            "equivalent",
            json!({"k": k, "n_max": n_max, "l_max": l_max}),
        ),
        SigmaVerdict::NotEquivalent {
            reason,
            k_cap,
            witnesses,
        } => (
            "not_equivalent",
            json!({
                "reason": reason.as_str(),
                "k_cap": k_cap,
                "violations": witnesses.iter().map(|w| json!({
                    "k": w.k, "n": w.violation.n, "l": w.violation.l, "side": w.violation.side.as_str(),
                })).collect::<Vec<_>>(),
            }),
        ),
    }
}

pub fn certify_esigma(a: &DimSeqRep, b: &DimSeqRep) -> Result<(SigmaVerdict, Certificate)> {
    let v = decide_esigma(a, b)?;
    let (verdict, witness) = sigma_witness(&v);
    Ok((
        v.clone(),
        Certificate::new("esigma", verdict, witness, pair(a.to_json(), b.to_json())),
    ))
}

fn bound_json(b: &DomBound) -> Value {
    match b {
        DomBound::Rational(r) => json!({"kind": "rational", "value": rat::to_json(r)}),
        DomBound::ExpOf(r) => json!({"kind": "exp", "exponent": rat::to_json(r)}),
    }
}

fn bound_from_json(v: &Value) -> Result<DomBound> {
    match v.get("kind").and_then(Value::as_str) {
        Some("rational") => Ok(DomBound::Rational(rat::from_json(&v["value"])?)),
        Some("exp") => Ok(DomBound::ExpOf(rat::from_json(&v["exponent"])?)),
        _ => Err(Error::Parse(
            "bound needs kind \"rational\" or \"exp\"".into(),
        )),
    }
}

pub fn certify_edom(a: &DiagOpSeq, b: &DiagOpSeq) -> Result<(DomVerdict, Certificate)> {
    let v = decide_edom(a, b)?;
    let (verdict, witness) = match &v {
        DomVerdict::Equal { bounds } => (
            "equal",
            match bounds {
                Some((c1, c2)) => json!({"c1": bound_json(c1), "c2": bound_json(c2)}),
                None => json!({"c1": null, "c2": null}),
            },
        ),
        DomVerdict::NotEqual {
            index,
            residue,
            period,
            start,
        } => (
            "not_equal",
            json!({"index": index, "residue": residue, "period": period, "start": start}),
        ),
    };
    Ok((
        v,
        Certificate::new("dom", verdict, witness, pair(a.to_json(), b.to_json())),
    ))
}

pub fn certify_edomu(a: &Operator, b: &Operator) -> Result<(SigmaVerdict, Certificate)> {
    let (da, db) = (assoc_dims(a)?, assoc_dims(b)?);
    let v = decide_esigma(&da, &db)?;
    let (verdict, mut witness) = sigma_witness(&v);
    witness["dims_a"] = da.to_json();
    witness["dims_b"] = db.to_json();
    Ok((
        v,
        Certificate::new("domu", verdict, witness, pair(a.to_json(), b.to_json())),
    ))
}

fn matrix_json(m: &DMatrix<f64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| json!((0..m.ncols()).map(|j| m[(i, j)]).collect::<Vec<_>>()))
            .collect(),
    )
}

pub fn matrix_from_json(v: &Value) -> Result<DMatrix<f64>> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::Parse("matrix must be an array of rows".into()))?;
    let data: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| Error::Parse("matrix row must be an array".into()))?
                .iter()
                .map(|x| {
                    x.as_f64()
                        .ok_or_else(|| Error::Parse("matrix entries must be numbers".into()))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let n = data.len();
    let m = data.first().map_or(0, Vec::len);
    if data.iter().any(|r| r.len() != m) {
        return Err(Error::Parse("matrix rows differ in length".into()));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| data[i][j]))
}

pub fn certify_douglas(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    tol: f64,
) -> Result<(DouglasResult, Certificate)> {
    let r = douglas_findim(a, b, tol)?;
    let (verdict, witness) = if r.included {
        ("included", json!({"lambda": r.lambda, "rank_b": r.rank_b}))
    } else {
        let v = r.witness.as_ref().expect("refutations carry a vector");
        (
            "not_included",
            json!({"vector": v.iter().copied().collect::<Vec<_>>(), "rank_b": r.rank_b, "rank_ab": r.rank_ab}),
        )
    };
    let inputs = json!({"a": matrix_json(a), "b": matrix_json(b), "tol": tol});
    Ok((r, Certificate::new("douglas", verdict, witness, inputs)))
}

/// Outcome of re-checking a certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub ok: bool,
    pub failures: Vec<String>,
}

struct Checker {
    failures: Vec<String>,
}

impl Checker {
    fn check(&mut self, cond: bool, what: impl Into<String>) {
        if !cond {
            self.failures.push(what.into());
        }
    }
}

fn u64_field(w: &Value, k: &str) -> Result<u64> {
    w.get(k)
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Parse(format!("witness needs natural {k:?}")))
}

/// Re-checks a certificate against its echoed inputs.
pub fn verify(cert: &Certificate) -> Result<VerifyReport> {
    let mut c = Checker { failures: vec![] };
    c.check(
        hash_inputs(&cert.inputs) == cert.input_hash,
        "input hash does not match inputs",
    );
    let w = &cert.witness;
    let inputs = &cert.inputs;
    match cert.relation.as_str() {
        "linf" => {
            let a = RealSeqRep::from_json(&inputs["a"])?;
            let b = RealSeqRep::from_json(&inputs["b"])?;
            let diff = a.add(&b.scale(&-Rat::one()));
            match cert.verdict.as_str() {
                "equivalent" => {
                    let bound = rat::from_json(&w["bound"])?;
                    let Ok(d) = diff else {
                        c.check(false, "difference has no closed form, so it is unbounded");
                        return Ok(report(c));
                    };
                    c.check(
                        d.lanes().iter().all(|l| l.is_const()),
                        "difference has a non-constant lane",
                    );
                    // constant lanes repeat within one period past the prefix
                    let horizon = (d.prefix().len() + d.period()) as i64;
                    let sup = (0..horizon)
                        .map(|n| d.eval(n).abs())
                        .max()
                        .unwrap_or_else(Rat::zero);
                    c.check(
                        sup == bound,
                        format!("supremum {sup} differs from the claimed bound"),
                    );
                }
                "not_equivalent" => {
                    let n = u64_field(w, "index")? as i64;
                    c.check(
                        (a.eval(n) - b.eval(n)).abs() > rat::int(LINF_WITNESS_GAP),
                        "difference at the witness index is not large",
                    );
                    let unbounded = match diff {
                        Ok(d) => !d.lanes().iter().all(|l| l.is_const()),
                        Err(_) => true,
                    };
                    c.check(unbounded, "difference is bounded");
                }
                v => return Err(Error::Parse(format!("unknown verdict {v:?}"))),
            }
        }
        "e1" => {
            let a = RealSeqRep::from_json(&inputs["a"])?;
            let b = RealSeqRep::from_json(&inputs["b"])?;
            match cert.verdict.as_str() {
                "equivalent" => {
                    let from = u64_field(w, "from")? as i64;
                    let al = RealSeqRep::aligned(&a, &b);
                    c.check(al.lanes_a == al.lanes_b, "tails differ");
                    c.check(
                        (from..al.start as i64).all(|n| a.eval(n) == b.eval(n)),
                        "sequences differ after the claimed index",
                    );
                    c.check(
                        from == 0 || a.eval(from - 1) != b.eval(from - 1),
                        "claimed index is not minimal",
                    );
                }
                "not_equivalent" => {
                    let (residue, period, start, sample) = (
                        u64_field(w, "residue")?,
                        u64_field(w, "period")?,
                        u64_field(w, "start")?,
                        u64_field(w, "sample")?,
                    );
                    c.check(
                        a.eval(sample as i64) != b.eval(sample as i64),
                        "sequences agree at the sample",
                    );
                    c.check(
                        sample >= start && sample % period == residue % period,
                        "sample outside the class",
                    );
                    let al = RealSeqRep::aligned(&a, &b);
                    c.check(
                        al.period as u64 == period && al.start as u64 == start,
                        "class does not match inputs",
                    );
                    let j = ((start as usize..start as usize + al.period)
                        .position(|n| n as u64 % period == residue % period))
                    .unwrap_or(0);
                    c.check(
                        al.lanes_a[j] != al.lanes_b[j],
                        "the two lanes on the class coincide",
                    );
                }
                v => return Err(Error::Parse(format!("unknown verdict {v:?}"))),
            }
        }
        "esigma" => {
            let a = DimSeqRep::from_json(&inputs["a"])?;
            let b = DimSeqRep::from_json(&inputs["b"])?;
            verify_sigma(&mut c, &a, &b, &cert.verdict, w)?;
        }
        "domu" => {
            let a = Operator::from_json(&inputs["a"])?;
            let b = Operator::from_json(&inputs["b"])?;
            let (da, db) = (assoc_dims(&a)?, assoc_dims(&b)?);
            c.check(
                DimSeqRep::from_json(&w["dims_a"])? == da,
                "band dimensions of a differ",
            );
            c.check(
                DimSeqRep::from_json(&w["dims_b"])? == db,
                "band dimensions of b differ",
            );
            verify_sigma(&mut c, &da, &db, &cert.verdict, w)?;
        }
        "dom" => {
            let a = DiagOpSeq::from_json(&inputs["a"])?;
            let b = DiagOpSeq::from_json(&inputs["b"])?;
            match cert.verdict.as_str() {
                "equal" => {
                    c.check(
                        decide_edom(&a, &b)?.is_equal(),
                        "recomputed verdict differs",
                    );
                    if !w["c1"].is_null() {
                        let (c1, c2) = (bound_from_json(&w["c1"])?, bound_from_json(&w["c2"])?);
                        verify_dom_bounds(&mut c, &a, &b, &c1, &c2);
                    }
                }
                "not_equal" => {
                    let n = u64_field(w, "index")?;
                    c.check(
                        log_ratio_at(&a, &b, n).abs() > EDOM_WITNESS_LOG_GAP,
                        "log-ratio at the witness is small",
                    );
                    c.check(
                        !decide_edom(&a, &b)?.is_equal(),
                        "recomputed verdict differs",
                    );
                }
                v => return Err(Error::Parse(format!("unknown verdict {v:?}"))),
            }
        }
        "douglas" => {
            let a = matrix_from_json(&inputs["a"])?;
            let b = matrix_from_json(&inputs["b"])?;
            let tol = inputs["tol"]
                .as_f64()
                .ok_or_else(|| Error::Parse("douglas inputs need \"tol\"".into()))?;
            match cert.verdict.as_str() {
                "included" => {
                    let lambda = w["lambda"]
                        .as_f64()
                        .ok_or_else(|| Error::Parse("witness needs \"lambda\"".into()))?;
                    c.check(
                        psd_margin(&a, &b, lambda)? >= -tol,
                        "λ B B^T - A A^T is not PSD",
                    );
                }
                "not_included" => {
                    let v: Vec<f64> = w["vector"]
                        .as_array()
                        .ok_or_else(|| Error::Parse("witness needs \"vector\"".into()))?
                        .iter()
                        .map(|x| {
                            x.as_f64().ok_or_else(|| {
                                Error::Parse("vector entries must be numbers".into())
                            })
                        })
                        .collect::<Result<_>>()?;
                    c.check(v.len() == a.nrows(), "vector has the wrong length");
                    if v.len() == a.nrows() {
                        let v = nalgebra::DVector::from_vec(v);
                        let scale = a.amax().max(b.amax()) * v.norm();
                        let bt = (b.transpose() * &v).norm();
                        let at = (a.transpose() * &v).norm();
                        // v^T (λ B B^T - A A^T) v = λ |B^T v|^2 - |A^T v|^2 < 0 for every λ up to 1e6
                        c.check(
                            bt <= tol.sqrt() * scale,
                            "vector is not in the kernel of B^T",
                        );
                        c.check(
                            at * at > 1e6 * bt * bt + tol * scale * scale,
                            "A^T v is too small",
                        );
                    }
                }
                v => return Err(Error::Parse(format!("unknown verdict {v:?}"))),
            }
        }
        r => return Err(Error::Parse(format!("unknown relation {r:?}"))),
    }
    Ok(report(c))
}

fn report(c: Checker) -> VerifyReport {
    VerifyReport {
        ok: c.failures.is_empty(),
        failures: c.failures,
    }
}

fn verify_sigma(
    c: &mut Checker,
    a: &DimSeqRep,
    b: &DimSeqRep,
    verdict: &str,
    w: &Value,
) -> Result<()> {
    match verdict {
        "equivalent" => {
            let (k, n_max, l_max) = (
                u64_field(w, "k")?,
                u64_field(w, "n_max")?,
                u64_field(w, "l_max")?,
            );
            let bound = stabilization_bound(a, b, k);
            c.check(
                n_max >= bound && l_max >= bound,
                "box is smaller than the stabilization bound",
            );
            let bx = esigma_box(a, b, k, n_max, l_max);
            c.check(
                bx.holds,
                format!("inequality fails at {:?}", bx.first_violation),
            );
            if k > 0 {
                let prev = stabilization_bound(a, b, k - 1);
                c.check(
                    !esigma_box(a, b, k - 1, prev, prev).holds,
                    "a smaller k also works",
                );
            }
        }
        "not_equivalent" => {
            let k_cap = u64_field(w, "k_cap")?;
            let list = w["violations"]
                .as_array()
                .ok_or_else(|| Error::Parse("witness needs \"violations\"".into()))?;
            let mut covered = vec![false; k_cap as usize + 1];
            for v in list {
                let k = u64_field(v, "k")?;
                let side = v["side"]
                    .as_str()
                    .and_then(Side::parse)
                    .ok_or_else(|| Error::Parse("violation needs a side".into()))?;
                let viol = Violation {
                    n: u64_field(v, "n")?,
                    l: u64_field(v, "l")?,
                    side,
                };
                c.check(
                    violates(a, b, k, viol),
                    format!("no violation at k={k}, {viol:?}"),
                );
                if let Some(slot) = covered.get_mut(k as usize) {
                    *slot = true;
                }
            }
            c.check(
                covered.iter().all(|&x| x),
                "some k up to k_cap lacks a violation",
            );
        }
        v => return Err(Error::Parse(format!("unknown verdict {v:?}"))),
    }
    Ok(())
}

/// Checks `C1 <= T_A / T_B <= C2` on the prefix and several periods.
fn verify_dom_bounds(c: &mut Checker, a: &DiagOpSeq, b: &DiagOpSeq, c1: &DomBound, c2: &DomBound) {
    let horizon = |op: &DiagOpSeq| match &op.eigenvalues {
        Eigenvalues::Direct(s) | Eigenvalues::ExpHalf(s) => s.prefix().len() + 4 * s.period(),
    };
    let n_max = 2 * (horizon(a) + horizon(b)) + 32;
    match (&a.eigenvalues, &b.eigenvalues, c1, c2) {
        (
            Eigenvalues::Direct(x),
            Eigenvalues::Direct(y),
            DomBound::Rational(lo),
            DomBound::Rational(hi),
        ) => {
            for n in 0..n_max as i64 {
                let u = |s: &RealSeqRep| s.eval(n).abs() + Rat::one();
                let r = rat::pow(&(u(y) / u(x)), 2);
                c.check(
                    lo <= &r && &r <= hi,
                    format!("ratio at {n} outside [C1, C2]"),
                );
            }
        }
        (
            Eigenvalues::ExpHalf(x),
            Eigenvalues::ExpHalf(y),
            DomBound::ExpOf(lo),
            DomBound::ExpOf(hi),
        ) => {
            for n in 0..n_max as i64 {
                let d = y.eval(n) - x.eval(n);
                c.check(
                    lo <= &d && &d <= hi,
                    format!("log-ratio at {n} outside [ln C1, ln C2]"),
                );
            }
        }
        _ => c.check(false, "bounds do not match the operator forms"),
    }
    c.check(
        !matches!((c1, c2), (DomBound::Rational(x), _) if !x.is_positive()),
        "C1 must be positive",
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::int;
    use crate::seqrep::ExtNat::{Fin, Inf};

    #[test]
    fn certificates_verify() {
        let a = RealSeqRep::affine(vec![int(1)], int(2), int(0));
        let b = RealSeqRep::affine(vec![], int(2), int(5));
        let c = RealSeqRep::geometric(vec![], int(1), int(2)).unwrap();
        for (x, y) in [(&a, &b), (&a, &c), (&b, &b)] {
            assert!(verify(&certify_linf(x, y).1).unwrap().ok);
            assert!(verify(&certify_e1(x, y).1).unwrap().ok);
        }
        let d1 = DimSeqRep::constant(vec![Inf], Fin(1));
        let d2 = DimSeqRep::constant(vec![Fin(0), Inf], Fin(1));
        let d3 = DimSeqRep::constant(vec![], Fin(2));
        for (x, y) in [(&d1, &d2), (&d1, &d3)] {
            let (_, cert) = certify_esigma(x, y).unwrap();
            let r = verify(&cert).unwrap();
            assert!(r.ok, "{:?}", r.failures);
        }
        let n = DiagOpSeq::direct(RealSeqRep::affine(vec![], int(1), int(0)));
        let two_n = DiagOpSeq::direct(RealSeqRep::affine(vec![], int(2), int(0)));
        for (x, y) in [(&n, &two_n), (&n, &DiagOpSeq::direct(c.clone()))] {
            let r = verify(&certify_edom(x, y).unwrap().1).unwrap();
            assert!(r.ok, "{:?}", r.failures);
        }
    }

    #[test]
    fn tampering_is_detected() {
        let a = RealSeqRep::periodic(vec![], vec![int(0), int(7)]).unwrap();
        let b = RealSeqRep::constant(vec![], int(3));
        let (_, mut cert) = certify_linf(&a, &b);
        cert.witness["bound"] = json!(3);
        assert!(!verify(&cert).unwrap().ok);

        let (_, mut cert) = certify_linf(&a, &b);
        cert.inputs["b"] = RealSeqRep::constant(vec![], int(4)).to_json();
        assert!(!verify(&cert).unwrap().ok);

        let d1 = DimSeqRep::constant(vec![], Fin(1));
        let d2 = DimSeqRep::constant(vec![], Fin(2));
        let (_, mut cert) = certify_esigma(&d1, &d2).unwrap();
        // a genuine violation at k=0 says nothing about larger k
        let first = cert.witness["violations"][0].clone();
        cert.witness["violations"] = json!([first]);
        assert!(!verify(&cert).unwrap().ok);
    }

    #[test]
    fn douglas_certificates() {
        let b = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        for (x, y) in [(&a, &b), (&b, &b)] {
            let (_, cert) = certify_douglas(x, y, 1e-8).unwrap();
            let r = verify(&cert).unwrap();
            assert!(r.ok, "{:?}", r.failures);
        }
    }

    #[test]
    fn json_round_trip() {
        let (_, cert) = certify_e1(
            &RealSeqRep::zero(),
            &RealSeqRep::constant(vec![int(1)], int(0)),
        );
        assert_eq!(Certificate::from_json(&cert.to_json()).unwrap(), cert);
    }
}

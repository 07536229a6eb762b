//! Seeded random instances for property tests and harnesses.
//!
//! Sizes stay small so exact arithmetic remains cheap: prefixes of at most
//! five entries, periods of at most three, numerators in `-3..=3`.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::opmodel::DiagOpSeq;
use crate::rat::{self, Rat};
use crate::reductions::tilde;
use crate::seqrep::{DimSeqRep, DimTail, ExtNat, Lane, RealSeqRep};

pub type GenRng = ChaCha8Rng;

pub fn rng(seed: u64) -> GenRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_rat(rng: &mut GenRng) -> Rat {
    rat::frac(rng.gen_range(-3..=3), rng.gen_range(1..=2))
}

fn nonzero_rat(rng: &mut GenRng) -> Rat {
    loop {
        let r = small_rat(rng);
        if r != Rat::from_integer(0.into()) {
            return r;
        }
    }
}

fn prefix(rng: &mut GenRng) -> Vec<Rat> {
    let len = rng.gen_range(0..=4);
    (0..len).map(|_| small_rat(rng)).collect()
}

fn lane(rng: &mut GenRng) -> Lane {
    match rng.gen_range(0..3) {
        0 => Lane::Const(small_rat(rng)),
        1 => Lane::affine(nonzero_rat(rng), small_rat(rng)),
        _ => Lane::Geometric {
            coeff: nonzero_rat(rng),
            ratio: rat::int(rng.gen_range(2..=4)),
            offset: small_rat(rng),
        },
    }
}

/// Real sequence whose tail is const, periodic, affine, geometric, or an
/// interleaving of those.
pub fn real_seq(rng: &mut GenRng) -> RealSeqRep {
    let pre = prefix(rng);
    let lanes = match rng.gen_range(0..5) {
        0 => vec![Lane::Const(small_rat(rng))],
        1 => (0..rng.gen_range(2..=3))
            .map(|_| Lane::Const(small_rat(rng)))
            .collect(),
        2 => vec![Lane::affine(nonzero_rat(rng), small_rat(rng))],
        3 => vec![Lane::Geometric {
            coeff: nonzero_rat(rng),
            ratio: rat::int(rng.gen_range(2..=4)),
            offset: small_rat(rng),
        }],
        _ => (0..2).map(|_| lane(rng)).collect(),
    };
    RealSeqRep::new(pre, lanes).expect("generated lanes are valid")
}

/// Bounded sequence with a periodic tail.
pub fn bounded_seq(rng: &mut GenRng) -> RealSeqRep {
    let p = rng.gen_range(1..=3);
    RealSeqRep::periodic(prefix(rng), (0..p).map(|_| small_rat(rng)).collect()).unwrap()
}

/// Pair of real sequences, bounded-distance about half the time.
pub fn linf_pair(rng: &mut GenRng) -> (RealSeqRep, RealSeqRep) {
    let a = real_seq(rng);
    let b = match rng.gen_range(0..4) {
        0 | 1 => a
            .add(&bounded_seq(rng))
            .expect("periodic lanes add to any lane"),
        2 => {
            // same tail shape, one lane perturbed in its growth parameter
            let lanes: Vec<Lane> = a
                .lanes()
                .iter()
                .map(|l| match l {
                    Lane::Affine { slope, intercept } => {
                        Lane::affine(slope + rat::int(1), intercept.clone())
                    }
                    Lane::Geometric {
                        coeff,
                        ratio,
                        offset,
                    } if rng.gen_bool(0.5) => Lane::Geometric {
                        coeff: coeff * rat::int(2),
                        ratio: ratio.clone(),
                        offset: offset.clone(),
                    },
                    other => other.clone(),
                })
                .collect();
            RealSeqRep::new(prefix(rng), lanes).unwrap()
        }
        _ => real_seq(rng),
    };
    (a, b)
}

fn ext(rng: &mut GenRng, inf_prob: f64) -> ExtNat {
    if rng.gen_bool(inf_prob) {
        ExtNat::Inf
    } else {
        ExtNat::Fin(rng.gen_range(0..=3))
    }
}

pub fn dim_seq(rng: &mut GenRng) -> DimSeqRep {
    let len = rng.gen_range(0..=5);
    let pre = (0..len).map(|_| ext(rng, 0.1)).collect();
    let tail = match rng.gen_range(0..6) {
        0 => DimTail::Const(ExtNat::Inf),
        1 | 2 => DimTail::Const(ExtNat::Fin(rng.gen_range(0..=2))),
        _ => DimTail::Periodic(
            (0..rng.gen_range(1..=3))
                .map(|_| rng.gen_range(0..=3))
                .collect(),
        ),
    };
    DimSeqRep::new(pre, tail).unwrap()
}

/// Swaps neighbouring entries, and sometimes adds one unit of mass. Extra
/// mass is absorbed by widened windows only when the tail has positive mass.
fn local_shuffle(rng: &mut GenRng, a: &DimSeqRep) -> DimSeqRep {
    let len = a.prefix().len() + 2 * a.period();
    let mut vals: Vec<ExtNat> = (0..len as i64).map(|n| a.eval(n)).collect();
    for _ in 0..rng.gen_range(1..=3) {
        let i = rng.gen_range(0..len);
        let j = if i + 1 < len && rng.gen_bool(0.5) {
            i + 1
        } else {
            i.saturating_sub(1)
        };
        vals.swap(i, j);
    }
    if a.period_sum() != Some(0) && rng.gen_bool(0.3) {
        let i = rng.gen_range(0..len);
        vals[i] = vals[i] + ExtNat::Fin(1);
    }
    DimSeqRep::new(vals, a.rebased_tail(len)).unwrap()
}

/// Pair of dimension sequences, often window-sum equivalent.
pub fn esigma_pair(rng: &mut GenRng) -> (DimSeqRep, DimSeqRep) {
    let a = dim_seq(rng);
    let b = match rng.gen_range(0..3) {
        0 => local_shuffle(rng, &a),
        1 => {
            let mut pre = vec![ExtNat::Fin(0); rng.gen_range(0..=2)];
            pre.extend((0..a.prefix().len() as i64 + a.period() as i64).map(|n| a.eval(n)));
            DimSeqRep::new(pre, a.rebased_tail(a.prefix().len() + a.period())).unwrap()
        }
        _ => dim_seq(rng),
    };
    (a, b)
}

/// Triple `a ~ b ~ c` built by shuffles and shifts.
pub fn esigma_chain(rng: &mut GenRng) -> (DimSeqRep, DimSeqRep, DimSeqRep) {
    let a = dim_seq(rng);
    let b = local_shuffle(rng, &a);
    let c = local_shuffle(rng, &b);
    (a, b, c)
}

/// Diagonal operator in the class where every decision is defined:
/// eigenvalues given directly, or as `exp(g/2) - 1` with `g >= 0`.
pub fn diag_op(rng: &mut GenRng) -> DiagOpSeq {
    if rng.gen_bool(0.5) {
        DiagOpSeq::direct(real_seq(rng))
    } else {
        DiagOpSeq::exp_half(tilde(&real_seq(rng))).unwrap()
    }
}

/// Pair of operators, with equal domains about half the time.
pub fn dom_pair(rng: &mut GenRng) -> (DiagOpSeq, DiagOpSeq) {
    use crate::opmodel::Eigenvalues;
    let a = diag_op(rng);
    let b = if rng.gen_bool(0.5) {
        match &a.eigenvalues {
            Eigenvalues::Direct(s) => {
                let k = rat::int(*[1i64, 2, 3, -2].choose(rng).unwrap());
                DiagOpSeq::direct(s.scale(&k).add(&bounded_seq(rng)).unwrap())
            }
            Eigenvalues::ExpHalf(g) => {
                let shift = bounded_seq(rng).abs();
                DiagOpSeq::exp_half(g.add(&shift).unwrap()).unwrap()
            }
        }
    } else {
        diag_op(rng)
    };
    (a, b)
}

/// Divergent dimension sequence with `infs` infinite entries, or a
/// `Const(INF)` tail when `infs` is `None`.
pub fn x0_seq(rng: &mut GenRng, infs: Option<usize>) -> DimSeqRep {
    let len = rng.gen_range(0..=5).max(infs.unwrap_or(0));
    let mut pre: Vec<ExtNat> = (0..len)
        .map(|_| ExtNat::Fin(rng.gen_range(0..=3)))
        .collect();
    let Some(k) = infs else {
        return DimSeqRep::constant(pre, ExtNat::Inf);
    };
    let mut slots: Vec<usize> = (0..len).collect();
    slots.shuffle(rng);
    for &i in slots.iter().take(k) {
        pre[i] = ExtNat::Inf;
    }
    loop {
        let vals: Vec<u64> = (0..rng.gen_range(1..=3))
            .map(|_| rng.gen_range(0..=3))
            .collect();
        let d = DimSeqRep::periodic(pre.clone(), vals).unwrap();
        if d.diverges() {
            return d;
        }
    }
}

fn symmetric(rng: &mut GenRng, n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    (&m + m.transpose()) * 0.5
}

fn orthogonal(rng: &mut GenRng, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0))
        .qr()
        .q()
}

/// Random symmetric `n x n` pair.
pub fn symmetric_pair(rng: &mut GenRng, n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    (symmetric(rng, n), symmetric(rng, n))
}

/// Symmetric pair with `B` of rank `< n`; `A` has range inside `Ran(B)`
/// when `inside` holds.
pub fn rank_deficient_pair(
    rng: &mut GenRng,
    n: usize,
    inside: bool,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let q = orthogonal(rng, n);
    let r = rng.gen_range(1..n);
    let d = DMatrix::from_fn(n, n, |i, j| {
        if i == j && i < r {
            let v: f64 = rng.gen_range(0.2..1.5);
            if rng.gen_bool(0.5) {
                v
            } else {
                -v
            }
        } else {
            0.0
        }
    });
    let b = &q * d * q.transpose();
    let a = if inside {
        let m = symmetric(rng, n);
        &b * m * &b
    } else {
        symmetric(rng, n)
    };
    (a, b)
}

use nalgebra::Complex;
use num::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rat::{self, Rat};

/// `m_p = ∫ x^p dμ` for `p = 0..=p_max`, exactly.
///
/// Self-similarity gives `2 m_p = 3^{-p} sum_j C(p,j) 2^{p-j} m_j + 3^{-p} m_p`
/// summed over both maps, i.e. `m_p = sum_{j<p} C(p,j) 2^{p-j} m_j / (2 (3^p - 1))`.
pub fn cantor_moments(p_max: usize) -> Vec<Rat> {
    let mut m: Vec<Rat> = vec![Rat::one()];
    for p in 1..=p_max {
        let mut binom = Rat::one();
        let mut acc = Rat::zero();
        for j in 0..p {
            acc += &binom * rat::pow2((p - j) as u64) * &m[j];
            binom = binom * rat::int((p - j) as i64) / rat::int(j as i64 + 1);
        }
        let denom = rat::int(2) * (rat::pow(&rat::int(3), p as u64) - Rat::one());
        m.push(acc / denom);
    }
    m
}

/// Conditional means `E[X | C_w]` of the `2^depth` cylinders in left-to-right
/// order: `x_w + 3^{-depth} m_1`, with `x_w = sum_i 2 w_i 3^{-i}`.
pub fn cylinder_means(depth: u32) -> Vec<Rat> {
    let m1 = cantor_moments(1).pop().unwrap();
    let width = rat::pow(&rat::int(3), depth as u64).recip();
    (0..1u64 << depth)
        .map(|w| {
            let mut x = Rat::zero();
            for i in 1..=depth {
                if (w >> (depth - i)) & 1 == 1 {
                    x += rat::int(2) * rat::pow(&rat::int(3), i as u64).recip();
                }
            }
            x + &width * &m1
        })
        .collect()
}

/// `e^{it/2} prod_{k=1}^{K} cos(t 3^{-k})`.
pub fn cantor_cf(t: f64, k: u32) -> Complex<f64> {
    let mut prod = 1.0;
    let mut s = t;
    for _ in 0..k {
        s /= 3.0;
        prod *= s.cos();
    }
    Complex::from_polar(prod, t / 2.0)
}

/// Characteristic function of the uniform measure on `[0, 1]`.
pub fn lebesgue_cf(t: f64) -> Complex<f64> {
    if t == 0.0 {
        return Complex::one();
    }
    (Complex::new(0.0, t).exp() - 1.0) / Complex::new(0.0, t)
}

/// `(1/2T) ∫_{-T}^{T} |cf(t)|^2 dt` by the composite trapezoid rule on
/// `[0, T]` with `samples` nodes; `|cf|` is even for real measures.
/// Chunks are summed in a fixed order, so the result does not depend on the
/// thread count.
pub fn wiener_average<F>(cf: F, t_max: f64, samples: usize) -> Result<f64>
where
    F: Fn(f64) -> Complex<f64> + Sync,
{
    if !(t_max > 0.0) || samples < 100 {
        return Err(Error::BadArgument(
            "wiener_average needs T > 0 and at least 100 samples".into(),
        ));
    }
    const CHUNK: usize = 1 << 14;
    let h = t_max / (samples - 1) as f64;
    let chunks: Vec<f64> = (0..samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(samples);
            (lo..hi)
                .map(|i| {
                    let w = if i == 0 || i == samples - 1 { 0.5 } else { 1.0 };
                    w * cf(i as f64 * h).norm_sqr()
                })
                .sum::<f64>()
        })
        .collect();
    Ok(chunks.iter().sum::<f64>() * h / t_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::frac;

    /// Moments from cumulants: X = sum_k 2 B_k 3^{-k} with B_k fair bits, so
    /// `κ_n(X) = κ_n(B) 2^n / (3^n - 1)`; Bernoulli(1/2) cumulants come from
    /// the moment-cumulant recursion with all moments 1/2.
    fn moments_via_cumulants(p_max: usize) -> Vec<Rat> {
        let binom = |n: usize, k: usize| -> Rat {
            (0..k).fold(Rat::one(), |acc, i| {
                acc * rat::int((n - i) as i64) / rat::int(i as i64 + 1)
            })
        };
        let mu = |n: usize| if n == 0 { Rat::one() } else { frac(1, 2) };
        let mut kb: Vec<Rat> = vec![Rat::zero()];
        for n in 1..=p_max {
            let mut k = mu(n);
            for j in 1..n {
                k -= binom(n - 1, j - 1) * &kb[j] * mu(n - j);
            }
            kb.push(k);
        }
        let kx: Vec<Rat> = (0..=p_max)
            .map(|n| {
                if n == 0 {
                    Rat::zero()
                } else {
                    &kb[n] * rat::pow2(n as u64) / (rat::pow(&rat::int(3), n as u64) - Rat::one())
                }
            })
            .collect();
        let mut m = vec![Rat::one()];
        for n in 1..=p_max {
            let mut acc = Rat::zero();
            for j in 1..=n {
                acc += binom(n - 1, j - 1) * &kx[j] * &m[n - j];
            }
            m.push(acc);
        }
        m
    }

    #[test]
    fn first_moments() {
        let m = cantor_moments(3);
        assert_eq!(m, vec![Rat::one(), frac(1, 2), frac(3, 8), frac(5, 16)]);
    }

    #[test]
    fn moments_match_cumulant_oracle() {
        assert_eq!(cantor_moments(12), moments_via_cumulants(12));
    }

    #[test]
    fn depth_one_means() {
        assert_eq!(cylinder_means(1), vec![frac(1, 6), frac(5, 6)]);
    }

    #[test]
    fn cylinder_means_average_to_mean() {
        for d in 1..8 {
            let c = cylinder_means(d);
            let avg = c.iter().fold(Rat::zero(), |a, x| a + x) / rat::int(c.len() as i64);
            assert_eq!(avg, frac(1, 2));
        }
    }

    #[test]
    fn cf_identities() {
        assert!((cantor_cf(0.0, 40) - Complex::one()).norm() < 1e-15);
        for i in 0..200 {
            let t = -50.0 + i as f64 * 0.7319;
            assert!(cantor_cf(t, 40).norm() <= 1.0 + 1e-15);
            // one step of the first map: μ^(3t) = e^{it} cos(t) μ^(t)
            let lhs = cantor_cf(3.0 * t, 41);
            let rhs = Complex::from_polar(t.cos(), t) * cantor_cf(t, 40);
            assert!((lhs - rhs).norm() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn point_mass_average_is_one() {
        for t in [1e2, 1e3, 1e4] {
            let v = wiener_average(|_| Complex::one(), t, 10_000).unwrap();
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lebesgue_average_matches_closed_form() {
        // (1/T) ∫_0^T sinc^2(t/2) dt = (2/T)(Si(T) - (1 - cos T)/T)
        let oracle = [(1e2, 0.031216973112238665), (1e3, 0.003139591002090124)];
        for (t, want) in oracle {
            let got = wiener_average(lebesgue_cf, t, 400_000).unwrap();
            assert!((got - want).abs() < 1e-6, "T = {t}: {got} vs {want}");
        }
    }

    #[test]
    fn bad_arguments() {
        assert!(wiener_average(lebesgue_cf, 0.0, 1000).is_err());
        assert!(wiener_average(lebesgue_cf, 1.0, 10).is_err());
    }
}

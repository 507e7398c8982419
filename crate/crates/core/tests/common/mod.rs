//! Independent oracles and random generators shared by the integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use simplex_fe::geom::{aff_indep, vtx_ref};
use simplex_fe::{MultiIndex, Point, Poly, Rational, Scalar, VertexFamily};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// All multi-indices of dimension `d` with sum at most `k`, by nested loops.
pub fn brute_force_multi_indices(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; d];
    loop {
        if cur.iter().sum::<usize>() <= k {
            out.push(cur.clone());
        }
        // odometer over [0..=k]^d
        let mut j = 0;
        loop {
            if j == d {
                return out;
            }
            if cur[j] < k {
                cur[j] += 1;
                break;
            }
            cur[j] = 0;
            j += 1;
        }
    }
}

pub fn binomial_by_pascal(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = vec![1u128; row.len() + 1];
        for i in 1..row.len() {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
    }
    row[r]
}

/// `∫_0^1 x^a (1 - x)^m dx` by binomial expansion of `(1 - x)^m`.
fn beta_integral(a: usize, m: usize) -> Rational {
    let mut s = Rational::zero();
    for j in 0..=m {
        let c = Rational::from_integer(BigInt::from(binomial_by_pascal(m, j)));
        let term = c / Rational::from_i64((a + j + 1) as i64);
        if j % 2 == 0 {
            s += term;
        } else {
            s -= term;
        }
    }
    s
}

/// `∫ x^alpha` over the unit simplex by slicing along the first variable:
/// the slice at `x_0 = t` is the `(d - 1)`-simplex scaled by `1 - t`.
pub fn simplex_integral_by_slicing(alpha: &[usize]) -> Rational {
    match alpha.len() {
        0 => Rational::one(),
        d => {
            let rest = &alpha[1..];
            let m = rest.iter().sum::<usize>() + d - 1;
            beta_integral(alpha[0], m) * simplex_integral_by_slicing(rest)
        }
    }
}

pub fn random_f64_poly(rng: &mut StdRng, d: usize, k: usize) -> Poly {
    let n = simplex_fe::mindex::pbinom(d, k) + 1;
    Poly::from_coeffs(d, k, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

/// Reference vertices perturbed by at most `amp` per coordinate, retried
/// until affinely independent.
pub fn random_vertices(rng: &mut StdRng, d: usize, amp: f64) -> VertexFamily {
    loop {
        let pts = vtx_ref::<f64>(d)
            .points()
            .iter()
            .map(|p| Point(p.iter().map(|x| x + rng.gen_range(-amp..amp)).collect()))
            .collect();
        let v = VertexFamily::new(d, pts).unwrap();
        if aff_indep(&v) {
            return v;
        }
    }
}

/// Rational vertex families with small numerators and denominators.
pub fn random_rational_vertices(rng: &mut StdRng, d: usize) -> VertexFamily<Rational> {
    loop {
        let pts = (0..=d)
            .map(|_| {
                Point((0..d).map(|_| Rational::from_ratio(rng.gen_range(-12..=12), rng.gen_range(1..=7))).collect())
            })
            .collect();
        let v = VertexFamily::new(d, pts).unwrap();
        if aff_indep(&v) {
            return v;
        }
    }
}

pub fn random_point(rng: &mut StdRng, d: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(lo..hi)).collect()
}

pub fn random_multi_index(rng: &mut StdRng, d: usize, max_sum: usize) -> MultiIndex {
    let total = rng.gen_range(0..=max_sum);
    let mut a = vec![0usize; d];
    if d > 0 {
        for _ in 0..total {
            a[rng.gen_range(0..d)] += 1;
        }
    }
    MultiIndex(a)
}

/// Central difference of `p` along coordinate `j` at `x`.
pub fn central_difference(p: &Poly, j: usize, x: &[f64], h: f64) -> f64 {
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[j] += h;
    xm[j] -= h;
    (p.eval(&xp).unwrap() - p.eval(&xm).unwrap()) / (2.0 * h)
}

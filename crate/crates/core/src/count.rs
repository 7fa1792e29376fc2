//! Closed-form counts with exact big integers.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
}

/// Integer partitions of `n` as `(part, multiplicity)` lists.
fn partitions(n: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(
        rest: usize,
        max: usize,
        cur: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for part in (1..=max.min(rest)).rev() {
            for mult in (1..=rest / part).rev() {
                cur.push((part, mult));
                rec(rest - part * mult, part - 1, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// Number of permutations of cycle type `i`: `n! / ∏ r^{i_r} i_r!`.
fn cycle_type_size(n: usize, parts: &[(usize, usize)]) -> BigUint {
    let mut den = BigUint::one();
    for &(r, m) in parts {
        den *= BigUint::from(r).pow(m as u32) * factorial(m);
    }
    factorial(n) / den
}

/// Number of π-classes of order-`n` (0,1) matrices, by counting the orbits of
/// the row-and-column permutation group: a pair of permutations with cycle
/// types `i`, `j` fixes `2^{Σ i_r j_s gcd(r,s)}` matrices.
pub fn pi_class_count(n: usize) -> BigUint {
    let types: Vec<(Vec<(usize, usize)>, BigUint)> = partitions(n)
        .into_iter()
        .map(|p| {
            let c = cycle_type_size(n, &p);
            (p, c)
        })
        .collect();
    let mut total = BigUint::zero();
    for (pi, ci) in &types {
        for (pj, cj) in &types {
            let mut e = 0usize;
            for &(r, mr) in pi {
                for &(s, ms) in pj {
                    e += mr * ms * r.gcd(&s);
                }
            }
            total += (ci * cj) << e;
        }
    }
    let nf = factorial(n);
    total / (&nf * &nf)
}

/// `(2^{n²} / n!²) / |A_n^π|` rounded half up to `digits` decimals.
pub fn pi_class_ratio(n: usize, digits: u32) -> String {
    let nf = factorial(n);
    let num = BigUint::one() << (n * n);
    let den = &nf * &nf * pi_class_count(n);
    let scale = BigUint::from(10u32).pow(digits);
    let scaled = (num * &scale * 2u32 + &den) / (den * 2u32);
    let (int, frac) = scaled.div_rem(&scale);
    format!(
        "{int}.{:0>width$}",
        frac.to_string(),
        width = digits as usize
    )
}

/// Matrices of rank 1: `(2^n − 1)²`.
pub fn rank1_count(n: usize) -> BigUint {
    let t = (BigUint::one() << n) - 1u32;
    &t * &t
}

/// Matrices of rank 2: `(3^n − 2·2^n + 1)(2·4^n − 3·3^n + 1)/2`.
pub fn rank2_count(n: usize) -> BigUint {
    let p3 = BigUint::from(3u32).pow(n as u32);
    let p2 = BigUint::one() << n;
    let p4 = BigUint::one() << (2 * n);
    let a = &p3 + 1u32 - (p2 << 1);
    let b = (p4 << 1) + 1u32 - &p3 * 3u32;
    a * b / 2u32
}

/// Partitions of `r` into at most `n` parts, by `p_n(r) = p_{n−1}(r) + p_n(r − n)`.
pub fn partitions_at_most(n: usize, r: usize) -> BigUint {
    // row[k] holds p_i(k) for the current i.
    let mut row = vec![BigUint::zero(); r + 1];
    row[0] = BigUint::one();
    for i in 1..=n {
        for k in i..=r {
            let prev = row[k - i].clone();
            row[k] += prev;
        }
    }
    row[r].clone()
}

/// Prime factorization by trial division as `(prime, exponent)` pairs.
pub fn factorize(mut d: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= d {
        if d % p == 0 {
            let mut e = 0;
            while d % p == 0 {
                d /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if d > 1 {
        out.push((d, 1));
    }
    out
}

/// Upper bound on the number of SNFs of order `n` with product `d`:
/// `∏ p_n(α_i)` over the prime factorization `d = ∏ p_i^{α_i}`.
pub fn snf_count_upper_bound(n: usize, d: u64) -> Result<BigUint> {
    if d == 0 {
        return Err(Error::Domain("the determinant must be positive".into()));
    }
    Ok(factorize(d)
        .into_iter()
        .map(|(_, e)| partitions_at_most(n, e as usize))
        .product())
}

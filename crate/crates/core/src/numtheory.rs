//! Integer and rational primitives: divisors, multiplicative functions,
//! valuations, the second Bernoulli function and modular inverses.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{invalid, Error, Result};

/// Exact rational number with arbitrary precision numerator and denominator.
pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

type FactorCache = Mutex<HashMap<u64, Vec<(u64, u32)>>>;

fn factor_cache() -> &'static FactorCache {
    static CACHE: OnceLock<FactorCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Prime factorization by trial division, primes in increasing order.
/// Results are memoized.
pub fn factorize(n: u64) -> Vec<(u64, u32)> {
    if n <= 1 {
        return Vec::new();
    }
    if let Some(f) = factor_cache().lock().unwrap().get(&n) {
        return f.clone();
    }
    let mut out = Vec::new();
    let mut m = n;
    let mut p = 2u64;
    while p * p <= m {
        if m.is_multiple_of(p) {
            let mut e = 0;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push((m, 1));
    }
    factor_cache().lock().unwrap().insert(n, out.clone());
    out
}

pub fn prime_divisors(n: u64) -> Vec<u64> {
    factorize(n).into_iter().map(|(p, _)| p).collect()
}

/// All positive divisors of `n` in increasing order.
pub fn divisors(n: u64) -> Result<Vec<u64>> {
    if n == 0 {
        return invalid("divisors of 0");
    }
    let mut ds = vec![1u64];
    for (p, e) in factorize(n) {
        let len = ds.len();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                ds.push(ds[i] * pk);
            }
        }
    }
    ds.sort_unstable();
    Ok(ds)
}

/// Euler's totient and the Moebius function.
pub fn phi_mu(n: u64) -> Result<(u64, i8)> {
    if n == 0 {
        return invalid("phi_mu of 0");
    }
    let f = factorize(n);
    let mut phi = n;
    let mut mu: i8 = 1;
    for &(p, e) in &f {
        phi = phi / p * (p - 1);
        if e > 1 {
            mu = 0;
        } else {
            mu = -mu;
        }
    }
    Ok((phi, mu))
}

pub fn phi(n: u64) -> u64 {
    phi_mu(n).map(|x| x.0).unwrap_or(0)
}

pub fn mobius(n: u64) -> i8 {
    phi_mu(n).map(|x| x.1).unwrap_or(0)
}

/// `P2(x) = B2({x})` with `B2(t) = t^2 - t + 1/6`.
pub fn p2(x: &Rational) -> Rational {
    let t = x - x.floor();
    &t * &t - &t + rat(1, 6)
}

/// `6 d^2 P2(num/den)`, an integer; `den > 0`.
pub fn p2_scaled(num: i128, den: i128) -> i128 {
    let r = num.rem_euclid(den);
    6 * r * r - 6 * r * den + den * den
}

/// `P2(num/den)` for machine integers, `den > 0`.
pub fn p2_frac(num: i64, den: i64) -> Rational {
    let d = den as i128;
    Rational::new(
        BigInt::from(p2_scaled(num as i128, d)),
        BigInt::from(6 * d * d),
    )
}

/// Largest `l` with `l^2 | n`.
pub fn sqrt_part(n: u64) -> Result<u64> {
    if n == 0 {
        return invalid("sqrt_part of 0");
    }
    Ok(factorize(n)
        .into_iter()
        .map(|(p, e)| p.pow(e / 2))
        .product())
}

/// The unique `d` in `[1, n-1]` with `a*d = 1 mod n`.
pub fn inv_mod(a: i64, n: u64) -> Result<u64> {
    if n < 2 {
        return invalid(format!("inv_mod needs modulus >= 2, got {n}"));
    }
    let ni = n as i128;
    let a0 = (a as i128).rem_euclid(ni);
    let e = a0.extended_gcd(&ni);
    if e.gcd != 1 {
        return Err(Error::NotInvertible { a, n });
    }
    Ok(e.x.rem_euclid(ni) as u64)
}

/// `p`-adic valuation of a nonzero integer.
pub fn valuation(n: u64, p: u64) -> u32 {
    if n == 0 {
        return u32::MAX;
    }
    let mut m = n;
    let mut k = 0;
    while m.is_multiple_of(p) {
        m /= p;
        k += 1;
    }
    k
}

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

pub fn is_squarefree(n: u64) -> bool {
    factorize(n).iter().all(|&(_, e)| e == 1)
}

pub fn odd_part(mut n: u64) -> u64 {
    while n > 0 && n.is_multiple_of(2) {
        n /= 2;
    }
    n
}

/// Units of `Z/n` as integers in `[1, n]` (`n = 1` gives `[1]`).
pub fn units_mod(n: u64) -> Vec<u64> {
    (1..=n).filter(|&a| gcd(a, n) == 1).collect()
}

pub fn is_integer(x: &Rational) -> bool {
    x.denom().is_one()
}

pub fn rational_is_zero(x: &Rational) -> bool {
    x.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divisor_examples() {
        assert_eq!(divisors(1).unwrap(), vec![1]);
        assert_eq!(divisors(12).unwrap(), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(
            divisors(225).unwrap(),
            vec![1, 3, 5, 9, 15, 25, 45, 75, 225]
        );
        assert!(divisors(0).is_err());
    }

    #[test]
    fn phi_mu_examples() {
        assert_eq!(phi_mu(1).unwrap(), (1, 1));
        assert_eq!(phi_mu(15).unwrap(), (8, 1));
        assert_eq!(phi_mu(9).unwrap(), (6, 0));
        assert!(phi_mu(0).is_err());
    }

    #[test]
    fn p2_examples() {
        assert_eq!(p2(&rat_int(0)), rat(1, 6));
        assert_eq!(p2(&rat(1, 2)), rat(-1, 12));
        assert_eq!(p2(&rat(7, 5)), rat(-11, 150));
        assert_eq!(p2_frac(7, 5), rat(-11, 150));
        assert_eq!(p2_frac(-3, 5), p2(&rat(-3, 5)));
    }

    #[test]
    fn sqrt_part_examples() {
        assert_eq!(sqrt_part(1).unwrap(), 1);
        assert_eq!(sqrt_part(45).unwrap(), 3);
        assert_eq!(sqrt_part(200).unwrap(), 10);
        assert!(sqrt_part(0).is_err());
    }

    #[test]
    fn inv_mod_examples() {
        assert_eq!(inv_mod(1, 5).unwrap(), 1);
        assert_eq!(inv_mod(2, 5).unwrap(), 3);
        assert_eq!(inv_mod(4, 15).unwrap(), 4);
        assert_eq!(inv_mod(-1, 7).unwrap(), 6);
        assert_eq!(
            inv_mod(6, 15).unwrap_err(),
            Error::NotInvertible { a: 6, n: 15 }
        );
    }
}

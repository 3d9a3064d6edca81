//! Test-side oracles written from the defining formulas, sharing no code
//! with the library beyond its value types.
#![allow(dead_code)]

use std::collections::BTreeMap;

use modunits::units::{ExponentVector, FIndex};
use modunits::Rational;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

fn frac(x: &Rational) -> Rational {
    x - x.floor()
}

/// `B_2({x})`
pub fn p2(x: &Rational) -> Rational {
    let f = frac(x);
    &f * &f - &f + q(1, 6)
}

/// Largest `l` with `l^2 | x`, by trial.
pub fn square_root_part(x: u64) -> u64 {
    (1..=x)
        .take_while(|l| l * l <= x)
        .filter(|l| x.is_multiple_of(l * l))
        .max()
        .unwrap()
}

fn inverse(a: u64, n: u64) -> u64 {
    (1..=n).find(|&d| (a * d) % n == 1 % n).expect("unit")
}

/// Order of `F_{m,h}` at the cusp `(a : c)` of X_0(N) from the weighted
/// `P_2` sum over `(Z/m'')^*`.
pub fn order_oracle(n: u64, m: u64, h: i64, a: u64, c: u64) -> Rational {
    let mp = n / m;
    let ell = square_root_part(mp);
    let mpp = mp / ell;
    let np = n / ell;
    let g = gcd(np, c);
    let a1 = (np / g * a) as i64;
    let c1 = (c / g) as i64;
    let mut sum = Rational::zero();
    for alpha in (1..=mpp).filter(|&x| gcd(x, mpp) == 1) {
        let delta = inverse(alpha, mpp) as i64;
        let x = q(alpha as i64 * a1, mpp as i64) + q(delta * h * c1, ell as i64);
        sum += p2(&x);
    }
    sum * q((ell * g * g) as i64, 4 * gcd(c * c, n) as i64)
}

/// All cusps `(a : c)`: `c | N`, `a` mod `gcd(c, N/c)` prime to it, with the
/// representative `a` coprime to `c`.
pub fn cusp_list(n: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for c in (1..=n).filter(|c| n.is_multiple_of(*c)) {
        let z = gcd(c, n / c);
        for r in 0..z {
            if gcd(r, z) != 1 && z > 1 {
                continue;
            }
            let a = (0..)
                .map(|k| r + k * z)
                .find(|&a| a > 0 && gcd(a, c) == 1)
                .unwrap();
            out.push((a, c));
        }
    }
    out
}

/// Order of `prod eta(d tau)^{r_d}` at `(a : c)`.
pub fn eta_order_oracle(n: u64, r: &BTreeMap<u64, i64>, c: u64) -> Rational {
    let mut s = Rational::zero();
    for (&d, &e) in r {
        let g = gcd(c, d);
        s += q(e * (g * g) as i64, d as i64);
    }
    s * q(n as i64, 24 * (gcd(c, n / c) * c) as i64)
}

/// Classical Ligozat conditions for an eta quotient of weight 0.
pub fn ligozat_oracle(n: u64, r: &BTreeMap<u64, i64>) -> bool {
    let weight: i64 = r.values().sum();
    let s1: i64 = r.iter().map(|(&d, &e)| d as i64 * e).sum();
    let s2: i64 = r.iter().map(|(&d, &e)| (n / d) as i64 * e).sum();
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for (&d, &e) in r {
        let p = BigInt::from(d).pow(e.unsigned_abs() as u32);
        if e >= 0 {
            num *= p;
        } else {
            den *= p;
        }
    }
    let prod = num * den;
    let root = prod.sqrt();
    weight == 0 && s1 % 24 == 0 && s2 % 24 == 0 && &root * &root == prod
}

pub fn is_integer(x: &Rational) -> bool {
    x.denom().abs().is_one()
}

/// Expected `Psi(a) - a` off `S_red` for `N = p^r`, `r in {2, 3, 4}`,
/// read from the tables for prime-power levels with `h` in `[1, l(m)]`.
pub fn prime_power_fixture(n: u64, p: u64, a: &ExponentVector) -> BTreeMap<FIndex, Rational> {
    let r = (1..).find(|&k| p.pow(k) == n).expect("prime power");
    let g = |m: u64, h: u64| a.get(&FIndex::new(n, m, h as i64).unwrap());
    let mut out = BTreeMap::new();
    for m in (1..n).filter(|m| n.is_multiple_of(*m)) {
        let ell = square_root_part(n / m);
        for h in 1..=ell {
            let v = match (r, m) {
                (2, 1) => -g(1, 1),
                (2, _) => g(1, 1),
                (3, 1) => -g(1, 1),
                (3, m) if m == p && h != p => -g(p, 1),
                (3, m) if m == p => g(1, 1) - g(p, 1),
                (3, _) => g(p, 1),
                (4, 1) => -g(1, (h - 1) % p + 1),
                (4, m) if m == p => g(1, h) - g(1, 1) - g(p, 1),
                (4, m) if m == p * p && h != p => -g(p * p, 1),
                (4, m) if m == p * p => g(1, 1) + g(p, 1) - g(p * p, 1),
                (4, _) => g(p * p, 1),
                _ => unreachable!(),
            };
            out.insert(FIndex::new(n, m, h as i64).unwrap(), v);
        }
    }
    out
}

/// `h <= l - phi(l)` in the `[1, l]` convention.
pub fn in_reduced(ell: u64, h_paper: u64) -> bool {
    let phi = (1..=ell).filter(|&x| gcd(x, ell) == 1).count() as u64;
    h_paper <= ell - phi
}

pub fn paper_h(ell: u64, h: u64) -> u64 {
    if h == 0 {
        ell
    } else {
        h
    }
}

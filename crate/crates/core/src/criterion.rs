//! Deciding when `prod F_{m,h}^{a(m,h)}` over S* is a modular unit (for odd
//! `L`), the classical Ligozat test for eta quotients, and the lattices of
//! exponent vectors passing either test.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::{integer_kernel, lattice_preimage, IntMatrix, RatMatrix};
use crate::numtheory::{
    divisors, gcd, inv_mod, odd_part, prime_divisors, rat, rat_int, valuation, Rational,
};
use crate::units::{order_special, ExponentVector, FIndex, Level, SpecialCusp};

/// `psi_i(m) mod L`.
pub fn psi_i(n: u64, i: i64, m: u64) -> Result<u64> {
    let level = Level::new(n)?;
    psi_i_at(&level, i, m)
}

fn psi_i_at(level: &Level, i: i64, m: u64) -> Result<u64> {
    let n = level.n;
    if gcd(i.rem_euclid(n as i64) as u64, n) != 1 {
        return invalid(format!("{i} is not prime to {n}"));
    }
    let ld = level.level_data(m)?;
    if ld.ell == 1 {
        return invalid(format!("l({m}) = 1"));
    }
    let big_l = level.big_l as i128;
    let mpp = ld.mpp as i128;
    let mut acc: i128 = 0;
    for alpha in 1..mpp {
        if gcd(alpha as u64, ld.mpp) != 1 {
            continue;
        }
        let delta = inv_mod(alpha as i64, ld.mpp)? as i128;
        acc += delta * (alpha * i as i128).div_euclid(mpp);
    }
    acc *= big_l / ld.ell as i128;
    Ok(acc.rem_euclid(big_l) as u64)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CriterionReport {
    pub cond1: bool,
    pub cond2: bool,
    pub cond3: bool,
    pub cond4: bool,
    pub cond5: bool,
    pub verdict: bool,
    pub order_infinity: String,
    pub order_zero: String,
    /// Order at `(1 : N0)`; absent when `N` is odd.
    pub order_half: Option<String>,
    /// `(i, residue mod L)` for every failing `i`.
    pub cond4_failures: Vec<(u64, u64)>,
    /// `(p, sum)` for every odd prime `p | N`.
    pub cond5_sums: Vec<(u64, i64)>,
}

fn require_odd_l(level: &Level) -> Result<()> {
    if level.big_l.is_multiple_of(2) {
        return Err(Error::Unsupported(format!(
            "L = {} is even for N = {}",
            level.big_l, level.n
        )));
    }
    Ok(())
}

fn integer_entries(a: &ExponentVector) -> Result<BTreeMap<FIndex, i64>> {
    let mut out = BTreeMap::new();
    for (k, v) in &a.entries {
        if !v.is_integer() {
            return Err(Error::NonInteger { m: k.m, h: k.h });
        }
        let x = v
            .to_integer()
            .to_i64()
            .ok_or_else(|| Error::InvalidInput(format!("exponent at {k} too large")))?;
        out.insert(*k, x);
    }
    Ok(out)
}

/// Odd primes `p | N` with the divisors `m` whose `m''` is a power of `p`.
fn mod2_groups(level: &Level) -> Vec<(u64, Vec<u64>)> {
    prime_divisors(level.n)
        .into_iter()
        .filter(|&p| p != 2)
        .map(|p| {
            let ms = level
                .data
                .iter()
                .filter(|d| prime_divisors(d.mpp) == vec![p])
                .map(|d| d.m)
                .collect();
            (p, ms)
        })
        .collect()
}

fn units_up_to(n: u64) -> Vec<i64> {
    (1..=n)
        .filter(|&i| gcd(i, n) == 1)
        .map(|i| i as i64)
        .collect()
}

pub fn check_criterion(n: u64, a: &ExponentVector) -> Result<CriterionReport> {
    let level = Level::new(n)?;
    check_criterion_at(&level, a)
}

pub fn check_criterion_at(level: &Level, a: &ExponentVector) -> Result<CriterionReport> {
    let n = level.n;
    require_odd_l(level)?;
    if a.n != n {
        return invalid(format!("vector for level {} checked at level {n}", a.n));
    }
    a.validate()?;
    let ints = integer_entries(a)?;

    let special = |which: SpecialCusp| -> Result<Rational> {
        let mut total = Rational::zero();
        for (k, v) in &ints {
            total += order_special(n, *k, which)? * rat_int(*v);
        }
        Ok(total)
    };
    let o_inf = special(SpecialCusp::Infinity)?;
    let o_zero = special(SpecialCusp::Zero)?;
    let o_half = if n.is_multiple_of(2) {
        let cusp = SpecialCusp::HalfN0.cusp(n);
        debug_assert_eq!(cusp.c, odd_part(n));
        let mut total = Rational::zero();
        for (k, v) in &ints {
            total += level.order(*k, &cusp)? * rat_int(*v);
        }
        Some(total)
    } else {
        None
    };

    let big_l = level.big_l as i128;
    let mut cond4_failures = Vec::new();
    if level.big_l > 1 {
        let mut weights: BTreeMap<u64, i128> = BTreeMap::new();
        for (k, v) in &ints {
            if level.ell(k.m) > 1 && k.h > 0 {
                *weights.entry(k.m).or_default() += k.h as i128 * *v as i128;
            }
        }
        for i in units_up_to(n) {
            let mut total: i128 = 0;
            for (&m, &w) in &weights {
                total += psi_i_at(level, i, m)? as i128 * w.rem_euclid(big_l);
            }
            let r = total.rem_euclid(big_l) as u64;
            if r != 0 {
                cond4_failures.push((i as u64, r));
            }
        }
    }

    let cond5_sums: Vec<(u64, i64)> = mod2_groups(level)
        .into_iter()
        .map(|(p, ms)| {
            let s: i64 = ints
                .iter()
                .filter(|(k, _)| ms.contains(&k.m))
                .map(|(_, v)| *v)
                .sum();
            (p, s)
        })
        .collect();

    let cond1 = o_inf.is_integer();
    let cond2 = o_zero.is_integer();
    let cond3 = o_half.as_ref().is_none_or(|x| x.is_integer());
    let cond4 = cond4_failures.is_empty();
    let cond5 = cond5_sums.iter().all(|(_, s)| s % 2 == 0);
    Ok(CriterionReport {
        cond1,
        cond2,
        cond3,
        cond4,
        cond5,
        verdict: cond1 && cond2 && cond3 && cond4 && cond5,
        order_infinity: o_inf.to_string(),
        order_zero: o_zero.to_string(),
        order_half: o_half.map(|x| x.to_string()),
        cond4_failures,
        cond5_sums,
    })
}

/// The criterion as rational rows `C` over the coordinates `level.indices()`:
/// a passes iff `C a` is integral.
pub fn criterion_rows(level: &Level) -> Result<RatMatrix> {
    require_odd_l(level)?;
    let n = level.n;
    let index = level.indices();
    let mut rows: RatMatrix = Vec::new();
    let mut specials = vec![SpecialCusp::Infinity, SpecialCusp::Zero];
    if n.is_multiple_of(2) {
        specials.push(SpecialCusp::HalfN0);
    }
    for which in specials {
        rows.push(
            index
                .iter()
                .map(|k| order_special(n, *k, which))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    if level.big_l > 1 {
        let l = level.big_l as i64;
        let mut seen = BTreeSet::new();
        for i in units_up_to(n) {
            let mut row = Vec::with_capacity(index.len());
            for k in &index {
                if level.ell(k.m) > 1 && k.h > 0 {
                    let psi = psi_i_at(level, i, k.m)? as i64;
                    row.push(rat((psi * k.h as i64).rem_euclid(l), l));
                } else {
                    row.push(Rational::zero());
                }
            }
            if seen.insert(row.clone()) {
                rows.push(row);
            }
        }
    }
    for (_, ms) in mod2_groups(level) {
        rows.push(
            index
                .iter()
                .map(|k| {
                    if ms.contains(&k.m) {
                        rat(1, 2)
                    } else {
                        Rational::zero()
                    }
                })
                .collect(),
        );
    }
    Ok(rows)
}

/// Basis of the lattice of integer vectors on S* that pass the criterion.
pub fn unit_lattice_basis(n: u64) -> Result<Vec<ExponentVector>> {
    let level = Level::new(n)?;
    unit_lattice_basis_at(&level)
}

pub fn unit_lattice_basis_at(level: &Level) -> Result<Vec<ExponentVector>> {
    let index = level.indices();
    let basis = lattice_preimage(&criterion_rows(level)?, index.len());
    Ok(basis
        .iter()
        .map(|row| {
            let coords: Vec<Rational> = row
                .iter()
                .map(|x| Rational::from_integer(x.clone()))
                .collect();
            ExponentVector::from_coords(level.n, &index, &coords)
        })
        .collect())
}

/// Classical Ligozat conditions for `prod eta(d tau)^{r_d}` on X0(n).
pub fn ligozat_eta_check(n: u64, r: &BTreeMap<u64, i64>) -> Result<bool> {
    for &d in r.keys() {
        if d == 0 || !n.is_multiple_of(d) {
            return invalid(format!("{d} does not divide {n}"));
        }
    }
    let total: i128 = r.values().map(|&e| e as i128).sum();
    let sd: i128 = r.iter().map(|(&d, &e)| d as i128 * e as i128).sum();
    let snd: i128 = r.iter().map(|(&d, &e)| (n / d) as i128 * e as i128).sum();
    let square = prime_divisors(n).into_iter().all(|q| {
        r.iter()
            .map(|(&d, &e)| valuation(d, q) as i128 * e as i128)
            .sum::<i128>()
            % 2
            == 0
    });
    Ok(total == 0 && sd % 24 == 0 && snd % 24 == 0 && square)
}

/// Basis of the lattice of eta exponent vectors (indexed by the divisors of
/// `n` in increasing order) that pass the Ligozat conditions.
pub fn ligozat_lattice_basis(n: u64) -> Result<Vec<BTreeMap<u64, i64>>> {
    let ds = divisors(n)?;
    let k = ds.len();
    let ones: IntMatrix = vec![vec![BigInt::from(1); k]];
    let kernel = integer_kernel(&ones, k);
    let mut cong: RatMatrix = vec![
        ds.iter().map(|&d| rat(d as i64, 24)).collect(),
        ds.iter().map(|&d| rat((n / d) as i64, 24)).collect(),
    ];
    for q in prime_divisors(n) {
        cong.push(ds.iter().map(|&d| rat(valuation(d, q) as i64, 2)).collect());
    }
    // congruences pulled back to kernel coordinates
    let pulled: RatMatrix = cong
        .iter()
        .map(|row| {
            kernel
                .iter()
                .map(|kv| {
                    row.iter().zip(kv).fold(Rational::zero(), |acc, (c, x)| {
                        acc + c * Rational::from_integer(x.clone())
                    })
                })
                .collect()
        })
        .collect();
    let y = lattice_preimage(&pulled, kernel.len());
    let mut out = Vec::new();
    for coeffs in y {
        let mut r = BTreeMap::new();
        for (j, &d) in ds.iter().enumerate() {
            let v: BigInt = coeffs.iter().zip(&kernel).map(|(c, kv)| c * &kv[j]).sum();
            let v = v
                .to_i64()
                .ok_or_else(|| Error::InvalidInput("eta exponent overflow".into()))?;
            if v != 0 {
                r.insert(d, v);
            }
        }
        out.push(r);
    }
    Ok(out)
}

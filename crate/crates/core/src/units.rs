//! The functions F_{m,h}: index sets, orders of vanishing at cusps, divisors
//! of formal products, Galois translation, eta quotients and the relation
//! `prod_j F_{m, h + x j} ~ F_{mp, p^e h}`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::cusps::{enumerate_cusps, galois_act, Cusp};
use crate::error::{invalid, Error, Result};
use crate::numtheory::{
    divisors, gcd, inv_mod, lcm, mobius, p2_scaled, prime_divisors, rat, rat_int, sqrt_part,
    units_mod, valuation, Rational,
};

/// Quantities attached to a divisor `m != N` of the level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LevelData {
    pub n: u64,
    pub m: u64,
    /// `m' = N/m`
    pub mprime: u64,
    /// `l(m)`, the largest integer whose square divides `m'`
    pub ell: u64,
    /// `m'' = m'/l(m)`
    pub mpp: u64,
    /// `N' = N/l(m)`
    pub nprime: u64,
    /// `L = l(1)`
    pub big_l: u64,
}

pub fn level_data(n: u64, m: u64) -> Result<LevelData> {
    if n == 0 || m == 0 || !n.is_multiple_of(m) {
        return invalid(format!("{m} does not divide {n}"));
    }
    if m == n {
        return invalid("m must differ from N");
    }
    let mprime = n / m;
    let ell = sqrt_part(mprime)?;
    Ok(LevelData {
        n,
        m,
        mprime,
        ell,
        mpp: mprime / ell,
        nprime: n / ell,
        big_l: sqrt_part(n)?,
    })
}

/// Index `(m, h)` of `F_{m,h}`, with `h` reduced into `[0, l(m))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FIndex {
    pub m: u64,
    pub h: u64,
}

impl fmt::Display for FIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.m, self.h)
    }
}

impl FIndex {
    pub fn new(n: u64, m: u64, h: i64) -> Result<FIndex> {
        let ld = level_data(n, m)?;
        Ok(FIndex {
            m,
            h: h.rem_euclid(ld.ell as i64) as u64,
        })
    }

    /// Representative of `h` in `[1, l(m)]`.
    pub fn paper_h(&self, ell: u64) -> u64 {
        if self.h == 0 {
            ell
        } else {
            self.h
        }
    }
}

/// Finitely supported rational function on the index set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentVector {
    pub n: u64,
    pub entries: BTreeMap<FIndex, Rational>,
}

impl ExponentVector {
    pub fn zero(n: u64) -> Self {
        ExponentVector {
            n,
            entries: BTreeMap::new(),
        }
    }

    pub fn unit(n: u64, m: u64, h: i64) -> Result<Self> {
        let mut v = Self::zero(n);
        v.set(FIndex::new(n, m, h)?, rat_int(1));
        Ok(v)
    }

    pub fn get(&self, idx: &FIndex) -> Rational {
        self.entries
            .get(idx)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn set(&mut self, idx: FIndex, v: Rational) {
        if v.is_zero() {
            self.entries.remove(&idx);
        } else {
            self.entries.insert(idx, v);
        }
    }

    pub fn add_at(&mut self, idx: FIndex, v: &Rational) {
        let cur = self.get(&idx);
        self.set(idx, cur + v);
    }

    pub fn add(&self, other: &ExponentVector) -> ExponentVector {
        let mut out = self.clone();
        for (k, v) in &other.entries {
            out.add_at(*k, v);
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> ExponentVector {
        let mut out = Self::zero(self.n);
        for (k, v) in &self.entries {
            out.set(*k, v * c);
        }
        out
    }

    pub fn sub(&self, other: &ExponentVector) -> ExponentVector {
        self.add(&other.scale(&rat_int(-1)))
    }

    pub fn is_integral(&self) -> bool {
        self.entries.values().all(|v| v.is_integer())
    }

    /// Checks that every key is a valid index for the level.
    pub fn validate(&self) -> Result<()> {
        for k in self.entries.keys() {
            let ld = level_data(self.n, k.m)?;
            if k.h >= ld.ell {
                return invalid(format!("h = {} out of range for m = {}", k.h, k.m));
            }
        }
        Ok(())
    }

    /// Dense coordinates with respect to `index`.
    pub fn to_coords(&self, index: &[FIndex]) -> Vec<Rational> {
        index.iter().map(|k| self.get(k)).collect()
    }

    pub fn from_coords(n: u64, index: &[FIndex], coords: &[Rational]) -> ExponentVector {
        let mut v = Self::zero(n);
        for (k, c) in index.iter().zip(coords) {
            v.set(*k, c.clone());
        }
        v
    }
}

/// Rational combination of cusps. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divisor {
    pub n: u64,
    pub coeffs: BTreeMap<Cusp, Rational>,
}

impl Divisor {
    pub fn zero(n: u64) -> Self {
        Divisor {
            n,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn get(&self, c: &Cusp) -> Rational {
        self.coeffs.get(c).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_at(&mut self, c: Cusp, v: &Rational) {
        let cur = self.get(&c) + v;
        if cur.is_zero() {
            self.coeffs.remove(&c);
        } else {
            self.coeffs.insert(c, cur);
        }
    }

    pub fn add(&self, other: &Divisor) -> Divisor {
        let mut out = self.clone();
        for (c, v) in &other.coeffs {
            out.add_at(*c, v);
        }
        out
    }

    pub fn scale(&self, k: &Rational) -> Divisor {
        let mut out = Divisor::zero(self.n);
        for (c, v) in &self.coeffs {
            out.add_at(*c, &(v * k));
        }
        out
    }

    pub fn sub(&self, other: &Divisor) -> Divisor {
        self.add(&other.scale(&rat_int(-1)))
    }

    pub fn degree(&self) -> Rational {
        self.coeffs.values().fold(Rational::zero(), |a, b| a + b)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.values().all(|v| v.is_integer())
    }

    /// `sigma_s(D)`, defined by `sigma_s(D)(act_s P) = D(P)`.
    pub fn galois(&self, s: i64) -> Result<Divisor> {
        let mut out = Divisor::zero(self.n);
        for (c, v) in &self.coeffs {
            out.add_at(galois_act(self.n, s, *c)?, v);
        }
        Ok(out)
    }

    /// Whether the divisor is fixed by every `sigma_s`.
    pub fn is_rational(&self) -> Result<bool> {
        let l = sqrt_part(self.n)?;
        for s in units_mod(l) {
            if &self.galois(s as i64)? != self {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_dense(&self, cusps: &[Cusp]) -> Vec<Rational> {
        cusps.iter().map(|c| self.get(c)).collect()
    }
}

fn check_cusp(n: u64, cusp: &Cusp) -> Result<()> {
    if cusp.c == 0 || !n.is_multiple_of(cusp.c) || cusp.z != gcd(cusp.c, n / cusp.c) {
        return Err(Error::InvalidInput(format!(
            "cusp {cusp} does not belong to level {n}"
        )));
    }
    Ok(())
}

/// Order of `F_{m,h}` at a cusp, via the weighted `P2` sum.
pub fn order_at_cusp(n: u64, idx: FIndex, cusp: &Cusp) -> Result<Rational> {
    check_cusp(n, cusp)?;
    let ld = level_data(n, idx.m)?;
    Ok(order_with(&ld, idx.h, cusp))
}

fn order_with(ld: &LevelData, h: u64, cusp: &Cusp) -> Rational {
    let c = cusp.c;
    let g = gcd(ld.nprime, c);
    let a1 = (ld.nprime / g) as u128 * cusp.a as u128;
    let c1 = (c / g) as u128;
    let (mpp, ell) = (ld.mpp, ld.ell);
    let den = lcm(mpp, ell) as u128;
    let (fa, fb) = (den / mpp as u128, den / ell as u128);
    let mut acc: i128 = 0;
    for alpha in units_mod(mpp) {
        let delta = inv_mod(alpha as i64, mpp).expect("m'' >= 2") as u128;
        let t1 = (alpha as u128 * a1) % mpp as u128;
        let t2 = (delta * h as u128 % ell as u128) * c1 % ell as u128;
        acc += p2_scaled((t1 * fa + t2 * fb) as i128, den as i128);
    }
    let num = BigInt::from(ld.ell) * BigInt::from(g) * BigInt::from(g) * BigInt::from(acc);
    let d = BigInt::from(4u64) * BigInt::from(gcd(c * c, ld.n)) * BigInt::from(6 * den * den);
    Rational::new(num, d)
}

/// The three cusps with closed-form orders.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecialCusp {
    Infinity,
    Zero,
    HalfN0,
}

impl SpecialCusp {
    pub fn cusp(self, n: u64) -> Cusp {
        match self {
            SpecialCusp::Infinity => Cusp::infinity(n),
            SpecialCusp::Zero => Cusp::zero(),
            SpecialCusp::HalfN0 => Cusp {
                c: n / 2,
                a: 1,
                z: 1,
            },
        }
    }
}

/// Closed-form order of `F_{m,h}` at infinity, 0, or `(1 : N/2)` when `2 || N`.
pub fn order_special(n: u64, idx: FIndex, which: SpecialCusp) -> Result<Rational> {
    let ld = level_data(n, idx.m)?;
    let odd_primes_product = |skip_two: bool| -> Rational {
        let mut prod = rat_int(1);
        for p in prime_divisors(ld.mpp) {
            if !(skip_two && p == 2) {
                prod *= rat_int(1 - p as i64);
            }
        }
        prod
    };
    match which {
        SpecialCusp::Infinity => Ok(rat(ld.m as i64, 24) * odd_primes_product(false)),
        SpecialCusp::Zero => {
            let mut sum = Rational::zero();
            for k in divisors(ld.mpp)? {
                let mu = mobius(k);
                if mu == 0 {
                    continue;
                }
                let g = gcd(ld.ell, k * idx.h);
                sum += rat(mu as i64 * (g * g) as i64, k as i64);
            }
            Ok(sum * rat(ld.mpp as i64, 24 * ld.ell as i64))
        }
        SpecialCusp::HalfN0 => {
            if !n.is_multiple_of(2) || (n / 2).is_multiple_of(2) {
                return invalid(format!("(1 : N0) closed form needs 2 || N, got N = {n}"));
            }
            Ok(rat(ld.m as i64, 24 * gcd(ld.m, 2) as i64) * odd_primes_product(true))
        }
    }
}

/// Order of `eta(d tau)` at a cusp of X0(n).
pub fn eta_order_at_cusp(n: u64, d: u64, cusp: &Cusp) -> Result<Rational> {
    if d == 0 || !n.is_multiple_of(d) {
        return invalid(format!("{d} does not divide {n}"));
    }
    check_cusp(n, cusp)?;
    let g = gcd(d, cusp.c);
    Ok(Rational::new(
        BigInt::from(n) * BigInt::from(g * g),
        BigInt::from(24u64) * BigInt::from(gcd(cusp.c * cusp.c, n)) * BigInt::from(d),
    ))
}

/// The index sets in the `h in [1, l(m)]` convention (S, S_red, S_new) and
/// the `h in [0, l(m))` convention (S*), as `(m, h)` pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSets {
    pub s: Vec<(u64, u64)>,
    pub s_star: Vec<(u64, u64)>,
    pub s_red: Vec<(u64, u64)>,
    pub s_new: Vec<(u64, u64)>,
}

pub fn index_sets(n: u64) -> Result<IndexSets> {
    if n < 2 {
        return invalid("index sets need N >= 2");
    }
    let mut out = IndexSets {
        s: vec![],
        s_star: vec![],
        s_red: vec![],
        s_new: vec![],
    };
    for m in divisors(n)? {
        if m == n {
            continue;
        }
        let ell = level_data(n, m)?.ell;
        let red = ell - crate::numtheory::phi(ell);
        for h in 1..=ell {
            out.s.push((m, h));
            out.s_star.push((m, h - 1));
            if h <= red {
                out.s_red.push((m, h));
            } else {
                out.s_new.push((m, h));
            }
        }
    }
    Ok(out)
}

/// Cached per-level data: cusps and `LevelData` for every `m != N`.
#[derive(Clone, Debug)]
pub struct Level {
    pub n: u64,
    pub big_l: u64,
    pub cusps: Vec<Cusp>,
    pub data: Vec<LevelData>,
}

impl Level {
    pub fn new(n: u64) -> Result<Level> {
        if n == 0 {
            return invalid("level must be positive");
        }
        let data = divisors(n)?
            .into_iter()
            .filter(|&m| m != n)
            .map(|m| level_data(n, m))
            .collect::<Result<Vec<_>>>()?;
        Ok(Level {
            n,
            big_l: sqrt_part(n)?,
            cusps: enumerate_cusps(n)?,
            data,
        })
    }

    pub fn level_data(&self, m: u64) -> Result<&LevelData> {
        self.data.iter().find(|d| d.m == m).ok_or_else(|| {
            Error::InvalidInput(format!("{m} is not a proper divisor of {}", self.n))
        })
    }

    pub fn ell(&self, m: u64) -> u64 {
        self.level_data(m).map(|d| d.ell).unwrap_or(1)
    }

    /// All indices, ordered by `m` and then `h` in `[0, l(m))`.
    pub fn indices(&self) -> Vec<FIndex> {
        self.data
            .iter()
            .flat_map(|d| (0..d.ell).map(move |h| FIndex { m: d.m, h }))
            .collect()
    }

    pub fn cusp_index(&self, c: &Cusp) -> Option<usize> {
        self.cusps.binary_search(c).ok()
    }

    pub fn order(&self, idx: FIndex, cusp: &Cusp) -> Result<Rational> {
        let ld = self.level_data(idx.m)?;
        check_cusp(self.n, cusp)?;
        Ok(order_with(ld, idx.h % ld.ell, cusp))
    }

    /// Row `k` holds the orders of `F_{index[k]}` at every cusp.
    pub fn order_matrix(&self, index: &[FIndex]) -> Result<Vec<Vec<Rational>>> {
        index
            .iter()
            .map(|&i| self.cusps.iter().map(|c| self.order(i, c)).collect())
            .collect()
    }

    pub fn divisor_of(&self, f: &ExponentVector) -> Result<Divisor> {
        if f.n != self.n {
            return invalid(format!("vector for level {} used at level {}", f.n, self.n));
        }
        let mut d = Divisor::zero(self.n);
        for (idx, v) in &f.entries {
            let ld = self.level_data(idx.m)?;
            for c in &self.cusps {
                d.add_at(*c, &(v * order_with(ld, idx.h % ld.ell, c)));
            }
        }
        Ok(d)
    }

    pub fn eta_divisor(&self, r: &BTreeMap<u64, i64>) -> Result<Divisor> {
        let mut d = Divisor::zero(self.n);
        for (&dd, &e) in r {
            for c in &self.cusps {
                d.add_at(*c, &(eta_order_at_cusp(self.n, dd, c)? * rat_int(e)));
            }
        }
        Ok(d)
    }
}

pub fn divisor_of(n: u64, f: &ExponentVector) -> Result<Divisor> {
    Level::new(n)?.divisor_of(f)
}

/// Exponents `a(m, 0)` with `prod F_{m,0}^{a(m,0)} ~ prod eta(d tau)^{r_d}`;
/// requires `sum r_d = 0`.
pub fn eta_to_f(n: u64, r: &BTreeMap<u64, i64>) -> Result<ExponentVector> {
    if r.values().sum::<i64>() != 0 {
        return invalid("eta exponents must sum to zero");
    }
    for &d in r.keys() {
        if d == 0 || !n.is_multiple_of(d) {
            return invalid(format!("{d} does not divide {n}"));
        }
    }
    let mut v = ExponentVector::zero(n);
    for m in divisors(n)? {
        if m == n {
            continue;
        }
        let a: i64 = r
            .iter()
            .filter(|(d, _)| m % **d == 0)
            .map(|(_, e)| *e)
            .sum();
        v.set(FIndex { m, h: 0 }, rat_int(a));
    }
    Ok(v)
}

/// `h -> f(m, s h mod l(m))`.
pub fn translate_s(n: u64, s: i64, f: &ExponentVector) -> Result<ExponentVector> {
    let l = sqrt_part(n)?;
    if l > 1 && gcd(s.rem_euclid(l as i64) as u64, l) != 1 {
        return invalid(format!("{s} is not prime to L = {l}"));
    }
    let mut out = ExponentVector::zero(n);
    for (idx, v) in &f.entries {
        let ell = level_data(n, idx.m)?.ell;
        let h = if ell == 1 {
            0
        } else {
            let si = inv_mod(s, ell)?;
            (si as u128 * idx.h as u128 % ell as u128) as u64
        };
        out.set(FIndex { m: idx.m, h }, v.clone());
    }
    Ok(out)
}

/// Outcome of comparing both sides of the relation.
#[derive(Clone, Debug)]
pub struct RelationCheck {
    pub holds: bool,
    pub lhs: ExponentVector,
    pub rhs: FIndex,
    pub epsilon: u32,
    pub lhs_divisor: Divisor,
    pub rhs_divisor: Divisor,
}

/// Compares `div prod_{j<p} F_{m, h + x j}` (`x = l(m)/p`) with `div F_{mp, p^e h}`.
pub fn verify_relation(n: u64, m: u64, h: i64, p: u64) -> Result<RelationCheck> {
    let level = Level::new(n)?;
    verify_relation_at(&level, m, h, p)
}

pub fn verify_relation_at(level: &Level, m: u64, h: i64, p: u64) -> Result<RelationCheck> {
    let n = level.n;
    let ld = *level.level_data(m)?;
    if p < 2
        || ld.ell % p != 0
        || !crate::numtheory::factorize(p)
            .iter()
            .all(|&(q, e)| q == p && e == 1)
    {
        return invalid(format!("{p} is not a prime dividing l({m}) = {}", ld.ell));
    }
    let x = (ld.ell / p) as i64;
    let mut lhs = ExponentVector::zero(n);
    for j in 0..p as i64 {
        lhs.add_at(FIndex::new(n, m, h + x * j)?, &rat_int(1));
    }
    let ell_mp = level.level_data(m * p)?.ell;
    let epsilon = 1 + valuation(ell_mp, p) - valuation(ld.ell, p);
    let rhs = FIndex::new(n, m * p, h * (p as i64).pow(epsilon))?;
    let mut rv = ExponentVector::zero(n);
    rv.set(rhs, Rational::one());
    let lhs_divisor = level.divisor_of(&lhs)?;
    let rhs_divisor = level.divisor_of(&rv)?;
    Ok(RelationCheck {
        holds: lhs_divisor == rhs_divisor,
        lhs,
        rhs,
        epsilon,
        lhs_divisor,
        rhs_divisor,
    })
}

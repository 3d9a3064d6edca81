//! Replacement operators `Phi^iota_m`, `Phi*_m`, `Psi_m` and their ordered
//! compositions `Psi` on the strata `S(d)_i`, as sparse exact matrices.
//!
//! Write `N = M p^r1 q^r2` with `M` squarefree and prime to `pq`, `p < q`,
//! `r1 >= 2` and `r2 = 0` or `r2 >= 2`. Operators act on the full index set
//! of the level and are the identity away from the stratum they belong to.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::SparseMatrix;
use crate::numtheory::{divisors, factorize, gcd, inv_mod, phi, rat_int, valuation, Rational};
use crate::units::{ExponentVector, FIndex, Level};

/// The divisors of `N` that matter for a fixed `d | M`, split by stratum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DivisorStrata {
    pub d: u64,
    /// `D(d)`
    pub all: Vec<u64>,
    /// `D(d)_0`, `D(d)_1`, `D(d)_2`
    pub d0: Vec<u64>,
    pub d1: Vec<u64>,
    pub d2: Vec<u64>,
}

impl DivisorStrata {
    pub fn stratum(&self, i: u8) -> &[u64] {
        match i {
            0 => &self.d0,
            1 => &self.d1,
            _ => &self.d2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartitionData {
    pub n: u64,
    pub m_sqfree: u64,
    pub p1: u64,
    pub p2: Option<u64>,
    pub r1: u32,
    pub r2: u32,
    pub strata: Vec<DivisorStrata>,
}

impl PartitionData {
    pub fn prime(&self, iota: u8) -> Option<u64> {
        if iota == 1 {
            Some(self.p1)
        } else {
            self.p2
        }
    }

    pub fn exponent(&self, iota: u8) -> u32 {
        if iota == 1 {
            self.r1
        } else {
            self.r2
        }
    }

    pub fn strata_for(&self, d: u64) -> Result<&DivisorStrata> {
        self.strata.iter().find(|s| s.d == d).ok_or_else(|| {
            Error::InvalidInput(format!("{d} does not divide M = {}", self.m_sqfree))
        })
    }

    /// `t_iota = floor(r_iota / 2)`
    pub fn t(&self, iota: u8) -> u32 {
        self.exponent(iota) / 2
    }
}

pub fn partition(n: u64) -> Result<PartitionData> {
    let f = factorize(n);
    let big: Vec<(u64, u32)> = f.iter().copied().filter(|&(_, e)| e >= 2).collect();
    let m_sqfree: u64 = f
        .iter()
        .filter(|&&(_, e)| e == 1)
        .map(|&(p, _)| p)
        .product();
    if big.is_empty() {
        return Err(Error::Unsupported(format!("N = {n} is squarefree")));
    }
    if big.len() > 2 {
        return Err(Error::Unsupported(format!(
            "L has {} prime divisors for N = {n}",
            big.len()
        )));
    }
    let (p1, r1) = big[0];
    let (p2, r2) = match big.get(1) {
        Some(&(p, r)) => (Some(p), r),
        None => (None, 0),
    };
    let q = p2.unwrap_or(1);
    let mut strata = Vec::new();
    for d in divisors(m_sqfree)? {
        let mut all = Vec::new();
        let (mut d0, mut d1, mut d2) = (Vec::new(), Vec::new(), Vec::new());
        for k1 in 0..=r1 {
            for k2 in 0..=r2 {
                if (k1, k2) == (r1, r2) {
                    continue;
                }
                let m = d * p1.pow(k1) * q.pow(k2);
                all.push(m);
                if k1 == r1 {
                    d1.push(m);
                } else if k2 == r2 {
                    d2.push(m);
                } else {
                    d0.push(m);
                }
            }
        }
        all.sort_unstable();
        d0.sort_unstable();
        d1.sort_unstable();
        d2.sort_unstable();
        strata.push(DivisorStrata { d, all, d0, d1, d2 });
    }
    Ok(PartitionData {
        n,
        m_sqfree,
        p1,
        p2,
        r1,
        r2,
        strata,
    })
}

/// Intervals and maps attached to `m` with `l(m) > 1`. Every `h` here is in
/// the `[1, l(m)]` convention.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntervalData {
    pub m: u64,
    pub ell: u64,
    pub p: u64,
    pub q: Option<u64>,
    /// `l / p`, `l / q` when the prime divides `l`
    pub l1: Option<u64>,
    pub l2: Option<u64>,
    /// `l / (pq)` when `pq | l`
    pub dfrak: Option<u64>,
    pub eps1: Option<u32>,
    pub eps2: Option<u32>,
    /// `I^red = [1, red_len]`
    pub red_len: u64,
    /// `I^1`, `I^2` as inclusive ranges
    pub i1: Option<(u64, u64)>,
    pub i2: Option<(u64, u64)>,
}

impl IntervalData {
    fn range(&self, iota: u8) -> Option<(u64, u64)> {
        if iota == 1 {
            self.i1
        } else {
            self.i2
        }
    }

    fn len(&self, iota: u8) -> Option<u64> {
        if iota == 1 {
            self.l1
        } else {
            self.l2
        }
    }

    pub fn eps(&self, iota: u8) -> Option<u32> {
        if iota == 1 {
            self.eps1
        } else {
            self.eps2
        }
    }

    /// The element of `I^iota` congruent to `h` modulo `l_iota`.
    pub fn rho(&self, iota: u8, h: u64) -> Option<u64> {
        let (lo, _) = self.range(iota)?;
        let len = self.len(iota)?;
        Some(lo + (h + len - lo % len) % len)
    }

    pub fn chi(&self, iota: u8, h: u64) -> Option<bool> {
        Some(self.rho(iota, h)? <= self.red_len)
    }

    pub fn in_red(&self, h: u64) -> bool {
        (1..=self.red_len).contains(&h)
    }

    /// Block `I_m(nu) = ((nu - 1) d, nu d]`, `1 <= nu <= pq`.
    pub fn block(&self, nu: u64) -> Option<(u64, u64)> {
        let d = self.dfrak?;
        Some(((nu - 1) * d + 1, nu * d))
    }

    pub fn is_mixed(&self) -> bool {
        self.dfrak.is_some()
    }
}

/// `alpha_j`: smallest positive integer congruent to `j q` mod `p`.
pub fn alpha(p: u64, q: u64, j: u64) -> u64 {
    let r = (j % p) * (q % p) % p;
    if r == 0 {
        p
    } else {
        r
    }
}

/// `beta_k = alpha_k + q`, with `beta_0 = p + q`.
pub fn beta(p: u64, q: u64, k: u64) -> u64 {
    alpha(p, q, k) + q
}

/// `(i, j)` with `t = alpha_j + p i`, for `t in [1, q]`.
pub fn split_t1(p: u64, q: u64, t: u64) -> (u64, u64) {
    let qi = inv_mod(q as i64, p).expect("p != q");
    let mut j = (t % p) * qi % p;
    if j == 0 {
        j = p;
    }
    (((t - alpha(p, q, j)) / p), j)
}

/// `k` with `t = beta_k`, for `t in (q, p + q]`.
pub fn split_t2(p: u64, q: u64, t: u64) -> u64 {
    let qi = inv_mod(q as i64, p).expect("p != q");
    ((t - q) % p) * qi % p
}

/// `([nu]_1, [nu]_2)`: the elements of `[1, q]` congruent to `nu` mod `q`
/// and of `(q, p + q]` congruent to `nu` mod `p`.
pub fn nu_brackets(p: u64, q: u64, nu: u64) -> (u64, u64) {
    let b1 = (nu - 1) % q + 1;
    let b2 = q + 1 + (nu + p - (q + 1) % p) % p;
    (b1, b2)
}

/// Order in which `Psi_m` are composed on `D(d)_0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ordering {
    /// by `(v_p, v_q)`
    Lex,
    /// by `(v_q, v_p)`
    Colex,
    Custom(Vec<u64>),
}

/// Sparse exact matrix acting on exponent vectors over `index`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearOperator {
    pub index: Vec<FIndex>,
    pub matrix: SparseMatrix,
}

impl LinearOperator {
    pub fn identity(index: &[FIndex]) -> Self {
        LinearOperator {
            index: index.to_vec(),
            matrix: SparseMatrix::identity(index.len()),
        }
    }

    /// `self o other`: apply `other` first.
    pub fn compose(&self, other: &LinearOperator) -> LinearOperator {
        LinearOperator {
            index: self.index.clone(),
            matrix: self.matrix.mul(&other.matrix),
        }
    }

    pub fn apply_coords(&self, v: &[Rational]) -> Vec<Rational> {
        self.matrix.apply(v)
    }

    pub fn apply(&self, f: &ExponentVector) -> ExponentVector {
        let out = self.matrix.apply(&f.to_coords(&self.index));
        let mut v = ExponentVector::from_coords(f.n, &self.index, &out);
        // entries outside the index pass through
        for (k, x) in &f.entries {
            if !self.index.contains(k) {
                v.set(*k, x.clone());
            }
        }
        v
    }

    /// `(row, column, value)` triplets with labelled indices.
    pub fn triplets(&self) -> Vec<(FIndex, FIndex, Rational)> {
        self.matrix
            .triplets()
            .into_iter()
            .map(|(i, j, v)| (self.index[i], self.index[j], v))
            .collect()
    }
}

/// Level data, partition and index bookkeeping shared by all operators.
#[derive(Clone, Debug)]
pub struct PsiContext {
    pub level: Level,
    pub part: PartitionData,
    pub index: Vec<FIndex>,
    pos: HashMap<FIndex, usize>,
}

impl PsiContext {
    pub fn new(n: u64) -> Result<Self> {
        let level = Level::new(n)?;
        let part = partition(n)?;
        let index = level.indices();
        let pos = index.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        Ok(PsiContext {
            level,
            part,
            index,
            pos,
        })
    }

    pub fn n(&self) -> u64 {
        self.level.n
    }

    pub fn position(&self, m: u64, h: u64) -> usize {
        let ell = self.level.ell(m);
        self.pos[&FIndex { m, h: h % ell }]
    }

    pub fn ell(&self, m: u64) -> u64 {
        self.level.ell(m)
    }

    fn in_d_prime(&self, m: u64) -> bool {
        m != 0
            && self.n().is_multiple_of(m)
            && m != self.n()
            && self.part.strata.iter().any(|s| s.all.contains(&m))
    }

    /// Which `(d, i)` stratum `m` lies in.
    pub fn stratum_of(&self, m: u64) -> Option<(u64, u8)> {
        for s in &self.part.strata {
            for i in 0..3u8 {
                if s.stratum(i).contains(&m) {
                    return Some((s.d, i));
                }
            }
        }
        None
    }

    pub fn interval_data(&self, m: u64) -> Result<IntervalData> {
        if !self.in_d_prime(m) {
            return invalid(format!("{m} is not in D' for N = {}", self.n()));
        }
        let ell = self.ell(m);
        if ell == 1 {
            return invalid(format!("l({m}) = 1"));
        }
        let p = self.part.p1;
        let q = self.part.p2;
        let divides = |x: Option<u64>| x.is_some_and(|x| ell.is_multiple_of(x));
        let l1 = divides(Some(p)).then(|| ell / p);
        let l2 = divides(q).then(|| ell / q.unwrap());
        let dfrak = (l1.is_some() && l2.is_some()).then(|| ell / (p * q.unwrap()));
        let eps = |pi: Option<u64>| -> Option<u32> {
            let pi = pi?;
            let mp = m * pi;
            if !self.in_d_prime(mp) {
                return None;
            }
            Some(1 + valuation(self.ell(mp), pi) - valuation(ell, pi))
        };
        let (i1, i2) = match (l1, l2) {
            (Some(a), Some(b)) => (Some((1, a)), Some((a + 1, a + b))),
            (Some(a), None) => (Some((1, a)), None),
            (None, Some(b)) => (None, Some((1, b))),
            (None, None) => (None, None),
        };
        Ok(IntervalData {
            m,
            ell,
            p,
            q,
            l1,
            l2,
            dfrak,
            eps1: eps(Some(p)),
            eps2: eps(q),
            red_len: ell - phi(ell),
            i1,
            i2,
        })
    }

    fn phi_generic(&self, m: u64, iota: u8, use_chi: bool) -> Result<LinearOperator> {
        let mut op = LinearOperator::identity(&self.index);
        let Some(pi) = self.part.prime(iota) else {
            return Ok(op);
        };
        let ell = self.ell(m);
        if !ell.is_multiple_of(pi) {
            return Ok(op);
        }
        let data = self.interval_data(m)?;
        let eps = data
            .eps(iota)
            .ok_or_else(|| Error::InvalidInput(format!("{m}*{pi} is outside D'")))?;
        let mat = &mut op.matrix;
        for h in 1..=ell {
            let rho = data.rho(iota, h).expect("p_iota | l");
            if !use_chi || data.chi(iota, h).expect("p_iota | l") {
                mat.add_to(self.position(m, h), self.position(m, rho), &rat_int(-1));
            }
        }
        let mp = m * pi;
        let pe = pi.pow(eps);
        for h in 1..=self.ell(mp) {
            if h % pe != 0 {
                continue;
            }
            let h1 = h / pe;
            if !use_chi || data.chi(iota, h1).expect("p_iota | l") {
                let rho = data.rho(iota, h1).expect("p_iota | l");
                mat.add_to(self.position(mp, h), self.position(m, rho), &rat_int(1));
            }
        }
        Ok(op)
    }

    /// `Phi^iota_m`; the identity when `p_iota` does not divide `l(m)`.
    pub fn phi_op(&self, m: u64, iota: u8) -> Result<LinearOperator> {
        if !(iota == 1 || iota == 2) {
            return invalid(format!("iota must be 1 or 2, got {iota}"));
        }
        if !self.in_d_prime(m) {
            return invalid(format!("{m} is not in D' for N = {}", self.n()));
        }
        self.phi_generic(m, iota, true)
    }

    /// `Phi*_m`: `Phi^2_m` without the `chi` factor.
    pub fn phi_star_op(&self, m: u64) -> Result<LinearOperator> {
        let q = self
            .part
            .p2
            .ok_or_else(|| Error::InvalidInput("no second prime".into()))?;
        if !self.in_d_prime(m) || !self.ell(m).is_multiple_of(q) {
            return invalid(format!("{q} does not divide l({m})"));
        }
        self.phi_generic(m, 2, false)
    }

    /// `Psi_m = (Phi^1 Phi^2)^(p-1) Phi^1`.
    pub fn psi_m_op(&self, m: u64) -> Result<LinearOperator> {
        let f1 = self.phi_op(m, 1)?;
        let f2 = self.phi_op(m, 2)?;
        let pair = f1.compose(&f2);
        let mut out = f1;
        for _ in 1..self.part.p1 {
            out = pair.compose(&out);
        }
        Ok(out)
    }

    /// The divisors of stratum `(d, i)` in composition order.
    pub fn stratum_order(&self, d: u64, i: u8, ordering: &Ordering) -> Result<Vec<u64>> {
        let s = self.part.strata_for(d)?;
        let (p, q) = (self.part.p1, self.part.p2.unwrap_or(1));
        if i == 1 || i == 2 {
            let tau = 3 - i;
            let mut ms = s.stratum(i).to_vec();
            let pt = if tau == 1 { p } else { q };
            ms.sort_by_key(|&m| if pt == 1 { 0 } else { valuation(m, pt) });
            return Ok(ms);
        }
        if i != 0 {
            return invalid(format!("stratum index must be 0, 1 or 2, got {i}"));
        }
        let key = |m: u64| (valuation(m, p), if q == 1 { 0 } else { valuation(m, q) });
        let mut ms = s.d0.clone();
        match ordering {
            Ordering::Lex => ms.sort_by_key(|&m| key(m)),
            Ordering::Colex => ms.sort_by_key(|&m| {
                let (x, y) = key(m);
                (y, x)
            }),
            Ordering::Custom(list) => {
                let mut sorted = list.clone();
                sorted.sort_unstable();
                if sorted != ms {
                    return invalid("custom ordering is not a permutation of D(d)_0");
                }
                for (a, &x) in list.iter().enumerate() {
                    for &y in &list[a + 1..] {
                        if x % y == 0 && x != y {
                            return invalid(format!(
                                "custom ordering puts {x} before its divisor {y}"
                            ));
                        }
                    }
                }
                ms = list.clone();
            }
        }
        Ok(ms)
    }

    /// `Psi_{m_{k-1}} o ... o Psi_{m_1}` for `m = m_k` in the given order.
    pub fn upsilon(&self, d: u64, i: u8, ordering: &Ordering, m: u64) -> Result<LinearOperator> {
        let order = self.stratum_order(d, i, ordering)?;
        let k = order
            .iter()
            .position(|&x| x == m)
            .ok_or_else(|| Error::InvalidInput(format!("{m} not in stratum ({d}, {i})")))?;
        let mut op = LinearOperator::identity(&self.index);
        for &mm in &order[..k] {
            op = self.psi_m_op(mm)?.compose(&op);
        }
        Ok(op)
    }

    /// `Psi` on stratum `(d, i)`, identity elsewhere.
    pub fn psi_full_op(&self, d: u64, i: u8, ordering: &Ordering) -> Result<LinearOperator> {
        let mut op = LinearOperator::identity(&self.index);
        for m in self.stratum_order(d, i, ordering)? {
            op = self.psi_m_op(m)?.compose(&op);
        }
        Ok(op)
    }

    /// `Psi` on the whole index set.
    pub fn psi_total(&self, ordering: &Ordering) -> Result<LinearOperator> {
        let mut op = LinearOperator::identity(&self.index);
        for s in &self.part.strata {
            for i in 0..3u8 {
                op = self.psi_full_op(s.d, i, ordering)?.compose(&op);
            }
        }
        Ok(op)
    }

    /// Positions of the indices of stratum `(d, i)`.
    pub fn stratum_positions(&self, d: u64, i: u8) -> Result<Vec<usize>> {
        let s = self.part.strata_for(d)?;
        Ok(self
            .index
            .iter()
            .enumerate()
            .filter(|(_, k)| s.stratum(i).contains(&k.m))
            .map(|(j, _)| j)
            .collect())
    }

    /// `T_s f = f(m, s h) - f(m, h)`.
    pub fn translation_op(&self, s: i64) -> Result<LinearOperator> {
        let l = self.level.big_l;
        if gcd(s.rem_euclid(l as i64) as u64, l) != 1 {
            return invalid(format!("{s} is not prime to L = {l}"));
        }
        let mut op = LinearOperator::identity(&self.index);
        op.matrix = SparseMatrix::zero(self.index.len(), self.index.len());
        for (row, k) in self.index.iter().enumerate() {
            let ell = self.ell(k.m);
            let sh = (s.rem_euclid(ell as i64) as u64 * k.h) % ell;
            op.matrix.add_to(row, self.position(k.m, sh), &rat_int(1));
            op.matrix.add_to(row, row, &rat_int(-1));
        }
        Ok(op)
    }
}

/// Convenience wrappers taking the level directly.
pub fn interval_data(n: u64, m: u64) -> Result<IntervalData> {
    PsiContext::new(n)?.interval_data(m)
}

pub fn phi_op(n: u64, m: u64, iota: u8) -> Result<LinearOperator> {
    PsiContext::new(n)?.phi_op(m, iota)
}

pub fn phi_star_op(n: u64, m: u64) -> Result<LinearOperator> {
    PsiContext::new(n)?.phi_star_op(m)
}

pub fn psi_m_op(n: u64, m: u64) -> Result<LinearOperator> {
    PsiContext::new(n)?.psi_m_op(m)
}

pub fn psi_full_op(n: u64, d: u64, i: u8, ordering: &Ordering) -> Result<LinearOperator> {
    PsiContext::new(n)?.psi_full_op(d, i, ordering)
}

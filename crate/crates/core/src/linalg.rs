//! Exact linear algebra over Z and Q: rank and nullspace over Q, Hermite and
//! Smith normal forms, integer kernels, lattice preimages and membership.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::numtheory::Rational;

/// Dense row-major integer matrix.
pub type IntMatrix = Vec<Vec<BigInt>>;
/// Dense row-major rational matrix.
pub type RatMatrix = Vec<Vec<Rational>>;

pub fn to_rational(m: &IntMatrix) -> RatMatrix {
    m.iter()
        .map(|r| {
            r.iter()
                .map(|x| Rational::from_integer(x.clone()))
                .collect()
        })
        .collect()
}

pub fn transpose<T: Clone>(m: &[Vec<T>], ncols: usize) -> Vec<Vec<T>> {
    (0..ncols)
        .map(|j| m.iter().map(|r| r[j].clone()).collect())
        .collect()
}

pub fn identity_int(n: usize) -> IntMatrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    }
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec_int(m: &IntMatrix, v: &[BigInt]) -> Vec<BigInt> {
    m.iter()
        .map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn mat_vec_rat(m: &RatMatrix, v: &[Rational]) -> Vec<Rational> {
    m.iter()
        .map(|r| {
            r.iter()
                .zip(v)
                .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
        })
        .collect()
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut RatMatrix, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row >= m.len() {
            break;
        }
        let Some(p) = (row..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for x in m[row].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot_row = m[row].clone();
        for (i, r) in m.iter_mut().enumerate() {
            if i != row && !r[col].is_zero() {
                let f = r[col].clone();
                for (x, y) in r.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x = &*x - &f * y;
                    }
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

pub fn rank_q(m: &RatMatrix, ncols: usize) -> usize {
    let mut a = m.clone();
    rref(&mut a, ncols).len()
}

/// Basis of `{x in Q^ncols : m x = 0}`.
pub fn nullspace_q(m: &RatMatrix, ncols: usize) -> Vec<Vec<Rational>> {
    let mut a = m.clone();
    let pivots = rref(&mut a, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![Rational::zero(); ncols];
            v[fc] = Rational::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[i][fc].clone();
            }
            v
        })
        .collect()
}

/// Inverse of a square rational matrix, or `None` if it is singular.
pub fn inverse_q(m: &RatMatrix) -> Option<RatMatrix> {
    let n = m.len();
    let mut a: RatMatrix = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| {
                if i == j {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }));
            row
        })
        .collect();
    let pivots = rref(&mut a, n);
    if pivots.len() < n {
        return None;
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Unimodular row reduction of `a` to row echelon form, applying the same
/// operations to `u` when given. Returns pivot positions `(row, col)`.
fn echelon(a: &mut IntMatrix, ncols: usize, mut u: Option<&mut IntMatrix>) -> Vec<(usize, usize)> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row >= a.len() {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for i in row..a.len() {
                if !a[i][col].is_zero() && best.is_none_or(|b| a[i][col].abs() < a[b][col].abs()) {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            a.swap(row, b);
            if let Some(u) = u.as_deref_mut() {
                u.swap(row, b);
            }
            let mut done = true;
            for i in row + 1..a.len() {
                if a[i][col].is_zero() {
                    continue;
                }
                let q = a[i][col].div_floor(&a[row][col]);
                let (top, rest) = a.split_at_mut(i);
                for (x, y) in rest[0].iter_mut().zip(&top[row]) {
                    if !y.is_zero() {
                        *x -= &q * y;
                    }
                }
                if let Some(u) = u.as_deref_mut() {
                    let (top, rest) = u.split_at_mut(i);
                    for (x, y) in rest[0].iter_mut().zip(&top[row]) {
                        if !y.is_zero() {
                            *x -= &q * y;
                        }
                    }
                }
                if !a[i][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if row < a.len() && !a[row][col].is_zero() {
            pivots.push((row, col));
            row += 1;
        }
    }
    pivots
}

/// Row Hermite normal form of the lattice spanned by the rows of `gens`.
/// Zero rows are dropped; pivots are positive and entries above a pivot are
/// reduced into `[0, pivot)`.
pub fn hnf(gens: &IntMatrix, ncols: usize) -> IntMatrix {
    let mut a = gens.clone();
    let pivots = echelon(&mut a, ncols, None);
    a.truncate(pivots.len());
    for &(r, c) in &pivots {
        if a[r][c].is_negative() {
            for x in a[r].iter_mut() {
                *x = -&*x;
            }
        }
        for i in 0..r {
            let q = a[i][c].div_floor(&a[r][c]);
            if !q.is_zero() {
                let pr = a[r].clone();
                for (x, y) in a[i].iter_mut().zip(&pr) {
                    *x -= &q * y;
                }
            }
        }
    }
    a
}

/// Basis (as rows) of `{x in Z^ncols : a x = 0}`, in Hermite normal form.
pub fn integer_kernel(a: &IntMatrix, ncols: usize) -> IntMatrix {
    let mut t = transpose(a, ncols);
    let k = a.len();
    let mut u = identity_int(ncols);
    let pivots = echelon(&mut t, k, Some(&mut u));
    let kernel: IntMatrix = u.split_off(pivots.len());
    hnf(&kernel, ncols)
}

/// Nonzero Smith invariant factors `d1 | d2 | ...` of an integer matrix.
pub fn smith_invariants(m: &IntMatrix, ncols: usize) -> Vec<BigInt> {
    let mut a = m.clone();
    let nrows = a.len();
    let mut diag = Vec::new();
    let mut t = 0;
    while t < nrows.min(ncols) {
        // smallest nonzero entry of the trailing block becomes the pivot
        let mut best: Option<(usize, usize)> = None;
        for i in t..nrows {
            for j in t..ncols {
                if !a[i][j].is_zero() && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        a.swap(t, bi);
        for r in a.iter_mut() {
            r.swap(t, bj);
        }
        loop {
            let mut clean = true;
            for i in t + 1..nrows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&a[t][t]);
                let pr = a[t].clone();
                for (x, y) in a[i].iter_mut().zip(&pr) {
                    *x -= &q * y;
                }
                if !a[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..ncols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&a[t][t]);
                for r in a.iter_mut() {
                    let y = r[t].clone();
                    if !y.is_zero() {
                        r[j] -= &q * y;
                    }
                }
                if !a[t][j].is_zero() {
                    clean = false;
                }
            }
            if clean {
                // pivot must divide the whole trailing block
                let mut fix = None;
                'outer: for i in t + 1..nrows {
                    for j in t + 1..ncols {
                        if !(&a[i][j] % &a[t][t]).is_zero() {
                            fix = Some(i);
                            break 'outer;
                        }
                    }
                }
                match fix {
                    None => break,
                    Some(i) => {
                        let ri = a[i].clone();
                        for (x, y) in a[t].iter_mut().zip(&ri) {
                            *x += y;
                        }
                    }
                }
            }
            // move the smallest entry of row/column t to the pivot
            let mut best = (t, t);
            for i in t..nrows {
                if !a[i][t].is_zero() && a[i][t].abs() < a[best.0][best.1].abs() {
                    best = (i, t);
                }
            }
            for j in t..ncols {
                if !a[t][j].is_zero() && a[t][j].abs() < a[best.0][best.1].abs() {
                    best = (t, j);
                }
            }
            if best.0 != t {
                a.swap(t, best.0);
            }
            if best.1 != t {
                for r in a.iter_mut() {
                    r.swap(t, best.1);
                }
            }
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    diag
}

/// Invariant factors greater than one (the torsion part).
pub fn nontrivial_factors(inv: &[BigInt]) -> Vec<BigInt> {
    inv.iter().filter(|d| !d.is_one()).cloned().collect()
}

fn denominator_lcm(c: &RatMatrix) -> BigInt {
    let mut d = BigInt::one();
    for r in c {
        for x in r {
            d = d.lcm(x.denom());
        }
    }
    d
}

/// Basis (rows, Hermite form) of `{x in Z^n : c x in Z^k}`.
pub fn lattice_preimage(c: &RatMatrix, n: usize) -> IntMatrix {
    // only the classes of the entries mod 1 matter
    let mut seen = std::collections::BTreeSet::new();
    let c: RatMatrix = c
        .iter()
        .map(|r| r.iter().map(|x| x - x.floor()).collect::<Vec<_>>())
        .filter(|r| r.iter().any(|x| !x.is_zero()) && seen.insert(r.clone()))
        .collect();
    let k = c.len();
    if k == 0 {
        return identity_int(n);
    }
    let d = denominator_lcm(&c);
    if d.is_one() {
        return identity_int(n);
    }
    // kernel of [d*c | d*I]
    let a: IntMatrix = c
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row: Vec<BigInt> = r
                .iter()
                .map(|x| (x * Rational::from_integer(d.clone())).to_integer())
                .collect();
            row.extend((0..k).map(|j| if i == j { d.clone() } else { BigInt::zero() }));
            row
        })
        .collect();
    let ker = integer_kernel(&a, n + k);
    let proj: IntMatrix = ker
        .into_iter()
        .map(|mut r| {
            r.truncate(n);
            r
        })
        .collect();
    hnf(&proj, n)
}

/// Coordinates of `v` in the row basis `basis` (which must be in echelon
/// form, e.g. produced by [`hnf`]), or `None` if `v` is not in the lattice.
pub fn lattice_coords(basis: &IntMatrix, v: &[BigInt]) -> Option<Vec<BigInt>> {
    let mut w = v.to_vec();
    let mut coords = Vec::with_capacity(basis.len());
    for row in basis {
        let pc = row.iter().position(|x| !x.is_zero())?;
        let (q, r) = w[pc].div_rem(&row[pc]);
        if !r.is_zero() {
            return None;
        }
        if !q.is_zero() {
            for (x, y) in w.iter_mut().zip(row) {
                *x -= &q * y;
            }
        }
        coords.push(q);
    }
    if w.iter().all(|x| x.is_zero()) {
        Some(coords)
    } else {
        None
    }
}

pub fn in_lattice(basis: &IntMatrix, v: &[BigInt]) -> bool {
    lattice_coords(basis, v).is_some()
}

/// Whether every row of `sub` lies in the lattice with echelon basis `sup`.
pub fn lattice_contains(sup: &IntMatrix, sub: &IntMatrix) -> bool {
    sub.iter().all(|v| in_lattice(sup, v))
}

/// Structure of `sup / sub` for full-rank lattices `sub <= sup` of the same
/// rank: Smith invariants of the coordinate matrix of `sub` in `sup`.
pub fn quotient_invariants(sup: &IntMatrix, sub: &IntMatrix) -> Option<Vec<BigInt>> {
    let coords: Option<IntMatrix> = sub.iter().map(|v| lattice_coords(sup, v)).collect();
    let coords = coords?;
    let r = sup.len();
    let inv = smith_invariants(&coords, r);
    if inv.len() != r {
        return None;
    }
    Some(nontrivial_factors(&inv))
}

/// Sparse exact rational matrix with rows stored as ordered maps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub rows: Vec<BTreeMap<usize, Rational>>,
}

impl SparseMatrix {
    pub fn zero(nrows: usize, ncols: usize) -> Self {
        SparseMatrix {
            nrows,
            ncols,
            rows: vec![BTreeMap::new(); nrows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.rows[i].insert(i, Rational::one());
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> Rational {
        self.rows[i].get(&j).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        if v.is_zero() {
            self.rows[i].remove(&j);
        } else {
            self.rows[i].insert(j, v);
        }
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: &Rational) {
        let cur = self.get(i, j);
        self.set(i, j, cur + v);
    }

    /// Matrix product `self * other`, i.e. apply `other` first.
    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.ncols, other.nrows);
        let mut out = SparseMatrix::zero(self.nrows, other.ncols);
        for (i, row) in self.rows.iter().enumerate() {
            let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
            for (k, a) in row {
                for (j, b) in &other.rows[*k] {
                    let e = acc.entry(*j).or_insert_with(Rational::zero);
                    *e = &*e + a * b;
                }
            }
            acc.retain(|_, v| !v.is_zero());
            out.rows[i] = acc;
        }
        out
    }

    pub fn apply(&self, v: &[Rational]) -> Vec<Rational> {
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .fold(Rational::zero(), |acc, (j, a)| acc + a * &v[*j])
            })
            .collect()
    }

    pub fn to_dense(&self) -> RatMatrix {
        self.rows
            .iter()
            .map(|row| {
                (0..self.ncols)
                    .map(|j| row.get(&j).cloned().unwrap_or_else(Rational::zero))
                    .collect()
            })
            .collect()
    }

    /// Dense integer matrix, or `None` if some entry is not integral.
    pub fn to_integer(&self) -> Option<IntMatrix> {
        self.to_dense()
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|x| {
                        if x.is_integer() {
                            Some(x.to_integer())
                        } else {
                            None
                        }
                    })
                    .collect()
            })
            .collect()
    }

    pub fn triplets(&self) -> Vec<(usize, usize, Rational)> {
        let mut out = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row {
                out.push((i, *j, v.clone()));
            }
        }
        out
    }
}

//! Cuspidal groups as lattice quotients: `C_N`, the rational cuspidal divisor
//! class group `C(N)`, the rational cuspidal subgroup `C_N(Q)`, and the
//! comparison `C(N) = C_N(Q)`.
//!
//! Degree-zero divisors are identified with `Z^(n-1)` by dropping the
//! coordinate of the last cusp (infinity), which every `sigma_s` fixes.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::criterion::{criterion_rows, ligozat_lattice_basis, unit_lattice_basis_at};
use crate::cusps::{galois_act, galois_orbits, Cusp};
use crate::error::{Error, Result};
use crate::linalg::{
    hnf, integer_kernel, inverse_q, lattice_contains, lattice_preimage, nontrivial_factors,
    quotient_invariants, rank_q, smith_invariants, to_rational, IntMatrix, RatMatrix,
};
use crate::numtheory::{phi, units_mod, Rational};
use crate::units::{Divisor, ExponentVector, Level};

/// A finite abelian group by invariant factors `d1 | d2 | ...`, all `>= 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianGroupStructure {
    pub invariant_factors: Vec<BigInt>,
}

impl AbelianGroupStructure {
    pub fn trivial() -> Self {
        AbelianGroupStructure {
            invariant_factors: vec![],
        }
    }

    pub fn from_factors(f: &[BigInt]) -> Self {
        AbelianGroupStructure {
            invariant_factors: nontrivial_factors(f),
        }
    }

    pub fn order(&self) -> BigInt {
        self.invariant_factors.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.invariant_factors.is_empty()
    }
}

impl std::fmt::Display for AbelianGroupStructure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .invariant_factors
            .iter()
            .map(|d| format!("Z/{d}"))
            .collect();
        write!(f, "{}", parts.join(" x "))
    }
}

impl Serialize for AbelianGroupStructure {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("AbelianGroupStructure", 2)?;
        let f: Vec<String> = self
            .invariant_factors
            .iter()
            .map(|d| d.to_string())
            .collect();
        st.serialize_field("invariant_factors", &f)?;
        st.serialize_field("order", &self.order().to_string())?;
        st.end()
    }
}

fn int_of(x: &Rational) -> Result<BigInt> {
    if x.is_integer() {
        Ok(x.to_integer())
    } else {
        Err(Error::InvalidInput(format!(
            "non-integral divisor coefficient {x}"
        )))
    }
}

/// Coordinates of a degree-zero integral divisor.
pub fn divisor_coords(level: &Level, d: &Divisor) -> Result<Vec<BigInt>> {
    let dense = d.to_dense(&level.cusps);
    dense[..dense.len() - 1].iter().map(int_of).collect()
}

/// Degree-zero divisor from coordinates.
pub fn coords_divisor(level: &Level, x: &[BigInt]) -> Divisor {
    let mut d = Divisor::zero(level.n);
    let mut total = BigInt::zero();
    for (c, v) in level.cusps.iter().zip(x) {
        d.add_at(*c, &Rational::from_integer(v.clone()));
        total += v;
    }
    d.add_at(
        *level.cusps.last().expect("at least one cusp"),
        &Rational::from_integer(-total),
    );
    d
}

/// Basis (Hermite form, in coordinates) of degree-zero divisors constant on
/// Galois orbits.
pub fn rational_divisor_lattice(level: &Level) -> Result<IntMatrix> {
    let orbits = galois_orbits(level.n)?;
    let sizes: IntMatrix = vec![orbits.iter().map(|o| BigInt::from(o.len())).collect()];
    let kernel = integer_kernel(&sizes, orbits.len());
    let mut rows = Vec::new();
    for c in &kernel {
        let mut d = Divisor::zero(level.n);
        for (o, k) in orbits.iter().zip(c) {
            for cusp in o {
                d.add_at(*cusp, &Rational::from_integer(k.clone()));
            }
        }
        rows.push(divisor_coords(level, &d)?);
    }
    Ok(hnf(&rows, level.cusps.len() - 1))
}

fn divisor_rows(level: &Level, vs: &[ExponentVector]) -> Result<IntMatrix> {
    vs.iter()
        .map(|v| divisor_coords(level, &level.divisor_of(v)?))
        .collect()
}

/// Hermite basis of the divisors of all criterion-passing vectors.
pub fn unit_divisor_lattice(level: &Level) -> Result<IntMatrix> {
    let basis = unit_lattice_basis_at(level)?;
    Ok(hnf(&divisor_rows(level, &basis)?, level.cusps.len() - 1))
}

/// Whether the divisor map is injective on criterion-passing vectors
/// supported on `{(m, h) : 0 <= h < phi(l(m))}`.
pub fn divisor_map_injective(level: &Level) -> Result<bool> {
    let index = level.indices();
    let cols: Vec<usize> = (0..index.len())
        .filter(|&i| index[i].h < phi(level.ell(index[i].m)))
        .collect();
    let rows = criterion_rows(level)?;
    let restricted: RatMatrix = rows
        .iter()
        .map(|r| cols.iter().map(|&i| r[i].clone()).collect())
        .collect();
    let basis: Vec<ExponentVector> = lattice_preimage(&restricted, cols.len())
        .iter()
        .map(|b| {
            let mut v = ExponentVector::zero(level.n);
            for (&i, x) in cols.iter().zip(b) {
                v.set(index[i], Rational::from_integer(x.clone()));
            }
            v
        })
        .collect();
    let div = divisor_rows(level, &basis)?;
    Ok(basis.len() == cols.len()
        && rank_q(&to_rational(&div), level.cusps.len() - 1) == basis.len())
}

/// Permutation of coordinates induced by `sigma_s`.
fn galois_matrix(level: &Level, s: u64) -> Result<Vec<usize>> {
    let k = level.cusps.len() - 1;
    let mut perm = vec![0; k];
    for (i, c) in level.cusps[..k].iter().enumerate() {
        let image: Cusp = galois_act(level.n, s as i64, *c)?;
        perm[i] = level.cusp_index(&image).expect("image is a cusp");
    }
    Ok(perm)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassGroups {
    pub n: u64,
    pub cusps: usize,
    /// `C_N`
    pub cuspidal: AbelianGroupStructure,
    /// `C(N)`
    pub rational_divisor_classes: AbelianGroupStructure,
    /// `C_N(Q)`
    pub rational_subgroup: AbelianGroupStructure,
    /// Hermite bases in coordinates of `U`, `R + U` and the Galois-fixed lattice
    #[serde(skip)]
    pub units: IntMatrix,
    #[serde(skip)]
    pub rational_plus_units: IntMatrix,
    #[serde(skip)]
    pub galois_fixed: IntMatrix,
    #[serde(skip)]
    pub rational: IntMatrix,
}

fn require_full(m: &IntMatrix, k: usize, what: &str) -> Result<()> {
    if m.len() == k {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{what} has rank {} < {k}",
            m.len()
        )))
    }
}

pub fn compute_groups(n: u64) -> Result<ClassGroups> {
    let level = Level::new(n)?;
    compute_groups_at(&level)
}

pub fn compute_groups_at(level: &Level) -> Result<ClassGroups> {
    let k = level.cusps.len() - 1;
    if level.big_l.is_multiple_of(2) {
        return Err(Error::Unsupported(format!("L = {} is even", level.big_l)));
    }
    if k == 0 {
        let t = AbelianGroupStructure::trivial();
        return Ok(ClassGroups {
            n: level.n,
            cusps: 1,
            cuspidal: t.clone(),
            rational_divisor_classes: t.clone(),
            rational_subgroup: t,
            units: vec![],
            rational_plus_units: vec![],
            galois_fixed: vec![],
            rational: vec![],
        });
    }
    let u = unit_divisor_lattice(level)?;
    require_full(&u, k, "unit divisor lattice")?;
    let cuspidal = AbelianGroupStructure::from_factors(&smith_invariants(&u, k));
    let r = rational_divisor_lattice(level)?;
    let mut ru = r.clone();
    ru.extend(u.iter().cloned());
    let ru = hnf(&ru, k);
    let c_rat = quotient_invariants(&ru, &u)
        .ok_or_else(|| Error::InvalidInput("U is not inside R + U".into()))?;

    // G = {x : (sigma_s - 1) x in U for all s}, with U = B^T Z^k
    let bt: RatMatrix = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| Rational::from_integer(u[j][i].clone()))
                .collect()
        })
        .collect();
    let bt_inv = inverse_q(&bt).expect("full rank");
    let mut rows: RatMatrix = Vec::new();
    for s in units_mod(level.big_l) {
        let perm = galois_matrix(level, s)?;
        // (P_s - I) as a k x k matrix; column i sends e_i to e_perm(i)
        let mut m = vec![vec![Rational::zero(); k]; k];
        for i in 0..k {
            if perm[i] < k {
                m[perm[i]][i] += Rational::one();
            }
            m[i][i] -= Rational::one();
        }
        for row in &bt_inv {
            rows.push(
                (0..k)
                    .map(|j| (0..k).fold(Rational::zero(), |acc, t| acc + &row[t] * &m[t][j]))
                    .collect(),
            );
        }
    }
    let g = lattice_preimage(&rows, k);
    let c_q = quotient_invariants(&g, &u)
        .ok_or_else(|| Error::InvalidInput("U is not inside the Galois-fixed lattice".into()))?;
    Ok(ClassGroups {
        n: level.n,
        cusps: k + 1,
        cuspidal,
        rational_divisor_classes: AbelianGroupStructure::from_factors(&c_rat),
        rational_subgroup: AbelianGroupStructure::from_factors(&c_q),
        units: u,
        rational_plus_units: ru,
        galois_fixed: g,
        rational: r,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct YooVerdict {
    pub n: u64,
    pub verdict: bool,
    /// `C(N)` inside `C_N(Q)`
    pub rational_in_fixed: bool,
    /// `C_N(Q)` inside `C(N)`
    pub fixed_in_rational: bool,
    pub rational_divisor_classes: AbelianGroupStructure,
    pub rational_subgroup: AbelianGroupStructure,
    /// a Galois-fixed class outside `C(N)`, as a divisor, when one exists
    pub witness: Option<Vec<(String, String)>>,
}

pub fn verify_conjecture_yoo(n: u64) -> Result<YooVerdict> {
    let level = Level::new(n)?;
    let g = compute_groups_at(&level)?;
    Ok(yoo_from_groups(&level, g))
}

/// Yoo verdict from already computed class groups at `level`.
pub fn yoo_from_groups(level: &Level, g: ClassGroups) -> YooVerdict {
    let n = level.n;
    let rational_in_fixed = lattice_contains(&g.galois_fixed, &g.rational_plus_units);
    let outside = g
        .galois_fixed
        .iter()
        .find(|v| !crate::linalg::in_lattice(&g.rational_plus_units, v));
    let witness = outside.map(|v| {
        coords_divisor(level, v)
            .coeffs
            .iter()
            .map(|(c, x)| (c.to_string(), x.to_string()))
            .collect()
    });
    let fixed_in_rational = outside.is_none();
    YooVerdict {
        n,
        verdict: rational_in_fixed && fixed_in_rational,
        rational_in_fixed,
        fixed_in_rational,
        rational_divisor_classes: g.rational_divisor_classes,
        rational_subgroup: g.rational_subgroup,
        witness,
    }
}

/// `C(N)` three ways: `(R + U)/U`, `R / V_F` with `V_F` the divisors of
/// criterion-passing products of `F_{m,0}`, and `R / V_eta` with `V_eta` the
/// Ligozat eta-quotient divisors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualPath {
    pub n: u64,
    pub orbits: usize,
    pub via_units: AbelianGroupStructure,
    pub via_f0: AbelianGroupStructure,
    pub via_eta: AbelianGroupStructure,
    pub agree: bool,
}

pub fn dual_path(n: u64) -> Result<DualPath> {
    let level = Level::new(n)?;
    let g = compute_groups_at(&level)?;
    let k = level.cusps.len() - 1;
    let orbits = galois_orbits(n)?.len();
    if k == 0 {
        let t = AbelianGroupStructure::trivial();
        return Ok(DualPath {
            n,
            orbits,
            via_units: t.clone(),
            via_f0: t.clone(),
            via_eta: t,
            agree: true,
        });
    }
    let index = level.indices();
    let h0: Vec<usize> = (0..index.len()).filter(|&i| index[i].h == 0).collect();
    let rows = criterion_rows(&level)?;
    let restricted: RatMatrix = rows
        .iter()
        .map(|r| h0.iter().map(|&i| r[i].clone()).collect())
        .collect();
    let basis = lattice_preimage(&restricted, h0.len());
    let f0: Vec<ExponentVector> = basis
        .iter()
        .map(|b| {
            let mut v = ExponentVector::zero(n);
            for (&i, x) in h0.iter().zip(b) {
                v.set(index[i], Rational::from_integer(x.clone()));
            }
            v
        })
        .collect();
    let v_f = hnf(&divisor_rows(&level, &f0)?, k);
    let eta: Vec<Divisor> = ligozat_lattice_basis(n)?
        .iter()
        .map(|r| level.eta_divisor(r))
        .collect::<Result<_>>()?;
    let v_eta = hnf(
        &eta.iter()
            .map(|d| divisor_coords(&level, d))
            .collect::<Result<Vec<_>>>()?,
        k,
    );
    let quotient = |sub: &IntMatrix| -> Result<AbelianGroupStructure> {
        let f = quotient_invariants(&g.rational, sub)
            .ok_or_else(|| Error::InvalidInput("sublattice is not of full rank in R".into()))?;
        Ok(AbelianGroupStructure::from_factors(&f))
    };
    let via_f0 = quotient(&v_f)?;
    let via_eta = quotient(&v_eta)?;
    let via_units = g.rational_divisor_classes;
    let agree = via_units == via_f0 && via_f0 == via_eta && v_f == v_eta;
    Ok(DualPath {
        n,
        orbits,
        via_units,
        via_f0,
        via_eta,
        agree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orders(n: u64) -> (String, String, String) {
        let g = compute_groups(n).unwrap();
        (
            g.cuspidal.to_string(),
            g.rational_divisor_classes.to_string(),
            g.rational_subgroup.to_string(),
        )
    }

    #[test]
    fn anchors() {
        assert_eq!(orders(11), ("Z/5".into(), "Z/5".into(), "Z/5".into()));
        assert_eq!(orders(25), ("0".into(), "0".into(), "0".into()));
        assert_eq!(orders(27).1, "Z/3");
        assert_eq!(
            rational_divisor_lattice(&Level::new(9).unwrap())
                .unwrap()
                .len(),
            2
        );
        assert_eq!(
            rational_divisor_lattice(&Level::new(13).unwrap())
                .unwrap()
                .len(),
            1
        );
    }

    #[test]
    fn yoo_small() {
        for n in [9, 11, 15, 25, 27, 45] {
            assert!(verify_conjecture_yoo(n).unwrap().verdict, "N = {n}");
        }
        assert!(matches!(
            verify_conjecture_yoo(16),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn dual_small() {
        for n in [11, 25, 27] {
            let d = dual_path(n).unwrap();
            assert!(d.agree, "{d:?}");
        }
    }
}

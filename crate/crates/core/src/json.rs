//! Wire formats for cusps, exponent vectors, divisors and sparse operators.
//!
//! Rationals travel as `num`/`den` pairs of 64-bit integers in lowest terms
//! with `den > 0`. Input `h` may be any integer and is reduced mod `l(m)`;
//! output `h` lies in `[0, l(m))`.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cusps::{canonicalize, Cusp};
use crate::error::{invalid, Error, Result};
use crate::psi::LinearOperator;
use crate::units::{Divisor, ExponentVector, FIndex};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CuspJson {
    pub c: u64,
    pub a: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryJson {
    pub m: u64,
    pub h: i64,
    pub num: i64,
    pub den: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentVectorJson {
    #[serde(rename = "N")]
    pub n: u64,
    pub entries: Vec<EntryJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoeffJson {
    pub c: u64,
    pub a: u64,
    pub num: i64,
    pub den: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisorJson {
    #[serde(rename = "N")]
    pub n: u64,
    pub coeffs: Vec<CoeffJson>,
}

fn small(x: &BigInt) -> Result<i64> {
    x.to_i64()
        .ok_or_else(|| Error::InvalidInput(format!("{x} does not fit in 64 bits")))
}

pub fn split_rational(x: &Rational) -> Result<(i64, i64)> {
    Ok((small(x.numer())?, small(x.denom())?))
}

pub fn make_rational(num: i64, den: i64) -> Result<Rational> {
    if den == 0 {
        return invalid("zero denominator");
    }
    Ok(Rational::new(BigInt::from(num), BigInt::from(den)))
}

impl From<&Cusp> for CuspJson {
    fn from(c: &Cusp) -> Self {
        CuspJson { c: c.c, a: c.a }
    }
}

impl CuspJson {
    pub fn to_cusp(&self, n: u64) -> Result<Cusp> {
        canonicalize(n, self.c, self.a as i64)
    }
}

impl ExponentVectorJson {
    pub fn from_vector(v: &ExponentVector) -> Result<Self> {
        let entries = v
            .entries
            .iter()
            .map(|(k, x)| {
                let (num, den) = split_rational(x)?;
                Ok(EntryJson {
                    m: k.m,
                    h: k.h as i64,
                    num,
                    den,
                })
            })
            .collect::<Result<_>>()?;
        Ok(ExponentVectorJson { n: v.n, entries })
    }

    /// Repeated indices are summed.
    pub fn to_vector(&self) -> Result<ExponentVector> {
        let mut v = ExponentVector::zero(self.n);
        for e in &self.entries {
            v.add_at(
                FIndex::new(self.n, e.m, e.h)?,
                &make_rational(e.num, e.den)?,
            );
        }
        Ok(v)
    }
}

impl DivisorJson {
    pub fn from_divisor(d: &Divisor) -> Result<Self> {
        let coeffs = d
            .coeffs
            .iter()
            .map(|(c, x)| {
                let (num, den) = split_rational(x)?;
                Ok(CoeffJson {
                    c: c.c,
                    a: c.a,
                    num,
                    den,
                })
            })
            .collect::<Result<_>>()?;
        Ok(DivisorJson { n: d.n, coeffs })
    }

    pub fn to_divisor(&self) -> Result<Divisor> {
        let mut d = Divisor::zero(self.n);
        for e in &self.coeffs {
            d.add_at(
                canonicalize(self.n, e.c, e.a as i64)?,
                &make_rational(e.num, e.den)?,
            );
        }
        Ok(d)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexJson {
    pub m: u64,
    pub h: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripletJson {
    pub row: usize,
    pub col: usize,
    pub num: i64,
    pub den: i64,
}

/// A sparse operator: `index[k]` labels row and column `k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixJson {
    #[serde(rename = "N")]
    pub n: u64,
    pub index: Vec<IndexJson>,
    pub entries: Vec<TripletJson>,
}

impl MatrixJson {
    pub fn from_operator(n: u64, op: &LinearOperator) -> Result<Self> {
        let entries = op
            .matrix
            .triplets()
            .into_iter()
            .filter(|(_, _, v)| !v.is_zero())
            .map(|(row, col, v)| {
                let (num, den) = split_rational(&v)?;
                Ok(TripletJson { row, col, num, den })
            })
            .collect::<Result<_>>()?;
        Ok(MatrixJson {
            n,
            index: op
                .index
                .iter()
                .map(|k| IndexJson { m: k.m, h: k.h })
                .collect(),
            entries,
        })
    }

    /// `row_m,row_h,col_m,col_h,num,den` lines under a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row_m,row_h,col_m,col_h,num,den\n");
        for t in &self.entries {
            let (r, c) = (&self.index[t.row], &self.index[t.col]);
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.m, r.h, c.m, c.h, t.num, t.den
            ));
        }
        out
    }
}

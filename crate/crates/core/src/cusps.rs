//! Cusps of X0(N): enumeration, canonical representatives and the Galois
//! action of `(Z/L)^*`.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{invalid, Result};
use crate::numtheory::{divisors, gcd, inv_mod, sqrt_part, units_mod};

/// Exponent of `s` in the Galois action `a -> a * s^e (mod z)`.
///
/// Fixed by requiring `order(F_{m, s h}) at act_s(P) == order(F_{m,h}) at P`
/// for every level tested; `+1` fails that identity already at N = 25.
pub const GALOIS_EXPONENT: i32 = -1;

/// A cusp `(a : c)` in canonical form. `z = gcd(c, N/c)` is cached.
///
/// Field order makes the derived ordering sort by `c`, then `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cusp {
    pub c: u64,
    pub a: u64,
    pub z: u64,
}

impl fmt::Display for Cusp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}:{})", self.a, self.c)
    }
}

impl Cusp {
    pub fn infinity(n: u64) -> Cusp {
        Cusp { c: n, a: 1, z: 1 }
    }

    pub fn zero() -> Cusp {
        Cusp { c: 1, a: 1, z: 1 }
    }
}

fn smallest_rep(c: u64, z: u64, r: u64) -> u64 {
    let mut a = if r == 0 { z } else { r };
    while gcd(a, c) != 1 {
        a += z;
    }
    a
}

/// Canonical representative of the class of `(a : c)` on X0(n).
pub fn canonicalize(n: u64, c: u64, a: i64) -> Result<Cusp> {
    if n == 0 || c == 0 || !n.is_multiple_of(c) {
        return invalid(format!("{c} is not a divisor of {n}"));
    }
    let ar = a.rem_euclid(c as i64) as u64;
    if gcd(ar, c) != 1 {
        return invalid(format!("gcd({a}, {c}) > 1"));
    }
    let z = gcd(c, n / c);
    let r = a.rem_euclid(z as i64) as u64;
    Ok(Cusp {
        c,
        a: smallest_rep(c, z, r),
        z,
    })
}

/// All cusps of X0(n), sorted by denominator and then representative.
pub fn enumerate_cusps(n: u64) -> Result<Vec<Cusp>> {
    let mut out = Vec::new();
    for c in divisors(n)? {
        let z = gcd(c, n / c);
        let mut reps: Vec<u64> = if z == 1 {
            vec![smallest_rep(c, 1, 0)]
        } else {
            (1..z)
                .filter(|&r| gcd(r, z) == 1)
                .map(|r| smallest_rep(c, z, r))
                .collect()
        };
        reps.sort_unstable();
        out.extend(reps.into_iter().map(|a| Cusp { c, a, z }));
    }
    Ok(out)
}

pub fn cusp_count(n: u64) -> Result<usize> {
    Ok(divisors(n)?
        .into_iter()
        .map(|c| crate::numtheory::phi(gcd(c, n / c)) as usize)
        .sum())
}

/// `sigma_s` acting on a cusp of X0(n); `s` must be prime to `L = sqrt_part(n)`.
pub fn galois_act(n: u64, s: i64, cusp: Cusp) -> Result<Cusp> {
    let l = sqrt_part(n)?;
    if l > 1 && gcd(s.rem_euclid(l as i64) as u64, l) != 1 {
        return invalid(format!("{s} is not prime to L = {l}"));
    }
    if cusp.z == 1 {
        return Ok(cusp);
    }
    let z = cusp.z;
    let factor = if GALOIS_EXPONENT == 1 {
        s.rem_euclid(z as i64) as u64
    } else {
        inv_mod(s, z)?
    };
    let r = (cusp.a % z) * factor % z;
    Ok(Cusp {
        c: cusp.c,
        a: smallest_rep(cusp.c, z, r),
        z,
    })
}

/// Galois orbits on the cusps of X0(n), each sorted, ordered by first element.
pub fn galois_orbits(n: u64) -> Result<Vec<Vec<Cusp>>> {
    let l = sqrt_part(n)?;
    let units = units_mod(l);
    let mut seen = BTreeSet::new();
    let mut orbits = Vec::new();
    for cusp in enumerate_cusps(n)? {
        if seen.contains(&cusp) {
            continue;
        }
        let mut orbit = BTreeSet::new();
        for &s in &units {
            orbit.insert(galois_act(n, s as i64, cusp)?);
        }
        seen.extend(orbit.iter().copied());
        orbits.push(orbit.into_iter().collect());
    }
    Ok(orbits)
}

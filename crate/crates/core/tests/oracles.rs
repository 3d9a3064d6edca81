mod common;

use std::collections::BTreeMap;

use common::*;
use modunits::criterion::{check_criterion, ligozat_eta_check, unit_lattice_basis};
use modunits::cusps::{canonicalize, enumerate_cusps};
use modunits::psi::{Ordering, PsiContext};
use modunits::units::{eta_to_f, order_at_cusp, verify_relation, ExponentVector, FIndex, Level};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn anchor_orders_at_25() {
    let f = FIndex::new(25, 1, 1).unwrap();
    let want = [
        ((1, 25), q(-1, 6)),
        ((1, 1), q(-1, 6)),
        ((1, 5), q(7, 30)),
        ((2, 5), q(-11, 30)),
        ((3, 5), q(1, 30)),
        ((4, 5), q(13, 30)),
    ];
    for ((a, c), v) in want {
        assert_eq!(order_oracle(25, 1, 1, a, c), v, "oracle at ({a}:{c})");
        let cusp = canonicalize(25, c, a as i64).unwrap();
        assert_eq!(
            order_at_cusp(25, f, &cusp).unwrap(),
            v,
            "library at ({a}:{c})"
        );
    }
}

#[test]
fn cusp_enumeration_matches_oracle() {
    for n in 1..=200u64 {
        let lib: Vec<(u64, u64)> = enumerate_cusps(n)
            .unwrap()
            .iter()
            .map(|c| (c.c, c.a % c.z.max(1)))
            .collect();
        let ours = cusp_list(n);
        assert_eq!(lib.len(), ours.len(), "N={n}");
        for (a, c) in ours {
            let z = common_z(n, c);
            assert!(lib.contains(&(c, a % z)), "N={n} missing ({a}:{c})");
        }
    }
}

fn common_z(n: u64, c: u64) -> u64 {
    use num_integer::Integer;
    c.gcd(&(n / c))
}

#[test]
fn orders_match_oracle() {
    for n in 2..=72u64 {
        let level = Level::new(n).unwrap();
        for k in level.indices() {
            for (a, c) in cusp_list(n) {
                let cusp = canonicalize(n, c, a as i64).unwrap();
                assert_eq!(
                    level.order(k, &cusp).unwrap(),
                    order_oracle(n, k.m, k.h as i64, a, c),
                    "N={n} F_{{{},{}}} at ({a}:{c})",
                    k.m,
                    k.h
                );
            }
        }
    }
}

#[test]
fn order_depends_on_h_mod_ell_only() {
    for (n, m) in [(45u64, 1u64), (81, 1), (72, 2), (100, 1)] {
        let ell = square_root_part(n / m);
        for h in -3..(2 * ell as i64) {
            for (a, c) in cusp_list(n) {
                assert_eq!(
                    order_oracle(n, m, h, a, c),
                    order_oracle(n, m, h.rem_euclid(ell as i64), a, c)
                );
            }
        }
    }
}

#[test]
fn relation_on_oracle_orders() {
    // compared on oracle orders
    for n in [9u64, 25, 27, 45, 72, 81, 100, 108, 125] {
        let level = Level::new(n).unwrap();
        for ld in &level.data {
            let ell = ld.ell;
            for p in (2..=ell).filter(|&p| ell % p == 0 && (2..p).all(|d| p % d != 0)) {
                for h in 0..ell as i64 {
                    let r = verify_relation(n, ld.m, h, p).unwrap();
                    assert!(r.holds);
                    for (a, c) in cusp_list(n) {
                        let lhs: modunits::Rational = (0..p as i64)
                            .map(|j| order_oracle(n, ld.m, h + j * (ell / p) as i64, a, c))
                            .sum();
                        let rhs = order_oracle(n, r.rhs.m, r.rhs.h as i64, a, c);
                        assert_eq!(lhs, rhs, "N={n} m={} h={h} p={p} at ({a}:{c})", ld.m);
                    }
                }
            }
        }
    }
}

fn random_eta(n: u64, rng: &mut ChaCha8Rng) -> BTreeMap<u64, i64> {
    let ds: Vec<u64> = (1..=n).filter(|d| n.is_multiple_of(*d)).collect();
    let mut r: BTreeMap<u64, i64> = BTreeMap::new();
    for _ in 0..4 {
        let i = rng.random_range(0..ds.len());
        let j = rng.random_range(0..ds.len());
        let e = rng.random_range(1..=24);
        *r.entry(ds[i]).or_default() += e;
        *r.entry(ds[j]).or_default() -= e;
    }
    r.retain(|_, e| *e != 0);
    r
}

#[test]
fn eta_orders_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [12u64, 25, 36, 45, 63] {
        let level = Level::new(n).unwrap();
        for _ in 0..10 {
            let r = random_eta(n, &mut rng);
            let d = level.eta_divisor(&r).unwrap();
            for (a, c) in cusp_list(n) {
                let cusp = canonicalize(n, c, a as i64).unwrap();
                assert_eq!(d.get(&cusp), eta_order_oracle(n, &r, c));
            }
        }
    }
}

#[test]
fn criterion_agrees_with_classical_ligozat() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut positives = 0;
    for n in (2..=100u64).filter(|&n| square_root_part(n) % 2 == 1) {
        for _ in 0..12 {
            let mut r = random_eta(n, &mut rng);
            if rng.random_bool(0.5) {
                for e in r.values_mut() {
                    *e *= 24;
                }
            }
            let expected = ligozat_oracle(n, &r);
            assert_eq!(ligozat_eta_check(n, &r).unwrap(), expected, "N={n} {r:?}");
            let f = eta_to_f(n, &r).unwrap();
            assert_eq!(
                check_criterion(n, &f).unwrap().verdict,
                expected,
                "N={n} {r:?}"
            );
            if expected {
                positives += 1;
                for (_, c) in cusp_list(n) {
                    assert!(is_integer(&eta_order_oracle(n, &r, c)));
                }
            }
        }
    }
    assert!(positives > 100, "only {positives} positive samples");
}

#[test]
fn criterion_lattice_has_integral_oracle_orders() {
    for n in [9u64, 25, 27, 45, 49, 63, 75, 81] {
        for v in unit_lattice_basis(n).unwrap() {
            for (a, c) in cusp_list(n) {
                let total: modunits::Rational = v
                    .entries
                    .iter()
                    .map(|(k, x)| x * order_oracle(n, k.m, k.h as i64, a, c))
                    .sum();
                assert!(is_integer(&total), "N={n} at ({a}:{c})");
            }
        }
    }
}

#[test]
fn prime_power_tables() {
    for p in [3u64, 5] {
        for r in 2..=4u32 {
            let n = p.pow(r);
            let ctx = PsiContext::new(n).unwrap();
            for ordering in [Ordering::Lex, Ordering::Colex] {
                let psi = ctx.psi_total(&ordering).unwrap();
                for k in &ctx.index {
                    let a = ExponentVector::unit(n, k.m, k.h as i64).unwrap();
                    let out = psi.apply(&a);
                    let b = prime_power_fixture(n, p, &a);
                    for j in &ctx.index {
                        let ell = square_root_part(n / j.m);
                        let want = if in_reduced(ell, paper_h(ell, j.h)) {
                            q(0, 1)
                        } else {
                            a.get(j) + &b[j]
                        };
                        assert_eq!(out.get(j), want, "N={n} input {k} at {j}");
                    }
                }
            }
        }
    }
}

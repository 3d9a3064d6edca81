mod common;

use modunits::analysis::{
    check_elementary_lemmas, check_section6_theorem, check_vanishing_kernel, support_sets,
    verify_conjecture_a, verify_section5_formulas, SupportKind, VanishingForm,
};
use modunits::classgroup::{
    compute_groups, divisor_map_injective, dual_path, verify_conjecture_yoo,
};
use modunits::psi::PsiContext;
use modunits::units::Level;
use modunits::Error;
use num_bigint::BigInt;

fn factors(xs: &[u64]) -> Vec<BigInt> {
    xs.iter().map(|&x| BigInt::from(x)).collect()
}

#[test]
fn lemma_counts() {
    let cases: [(u64, usize, [usize; 4]); 4] = [
        (81, 4, [0, 0, 0, 0]),
        (225, 0, [0, 0, 10, 12]),
        (441, 0, [0, 0, 14, 18]),
        (2025, 4, [30, 0, 30, 36]),
    ];
    for (n, l1, l2) in cases {
        let r = check_elementary_lemmas(&PsiContext::new(n).unwrap()).unwrap();
        assert!(r.verdict, "N={n}");
        assert_eq!(r.lemma1.checked, l1, "N={n}");
        assert_eq!(r.lemma2.clone().map(|t| t.checked), l2, "N={n}");
        assert_eq!(
            r.lemma1.failed + r.lemma2.iter().map(|t| t.failed).sum::<usize>(),
            0
        );
    }
}

#[test]
fn lemma_part_two_is_exercised() {
    let r = check_elementary_lemmas(&PsiContext::new(5625).unwrap()).unwrap();
    assert!(r.lemma2[1].checked > 0);
    assert_eq!(r.lemma2[1].failed, 0);
    assert!(r.verdict);
}

#[test]
fn vanishing_kernel_levels() {
    for n in [27u64, 81, 225, 441] {
        let ctx = PsiContext::new(n).unwrap();
        let top = ctx.part.r1.max(ctx.part.r2) + 2;
        for s in &ctx.part.strata {
            for iota in [1u8, 2] {
                for a in 1..=top {
                    assert!(
                        check_vanishing_kernel(&ctx, s.d, iota, a).unwrap(),
                        "N={n} d={} iota={iota} a={a}",
                        s.d
                    );
                }
            }
        }
    }
    let ctx = PsiContext::new(81).unwrap();
    assert!(matches!(
        check_vanishing_kernel(&ctx, 1, 2, 0),
        Err(Error::InvalidInput(_))
    ));
}

#[test]
fn vanishing_supports_are_nonempty() {
    let ctx = PsiContext::new(225).unwrap();
    let s = support_sets(&ctx, 1, 2, SupportKind::A, 1).unwrap();
    assert!(!s.elements.is_empty());
}

#[test]
fn two_prime_vanishing_levels() {
    for n in [225u64, 441] {
        let ctx = PsiContext::new(n).unwrap();
        let (r1, r2) = (ctx.part.r1, ctx.part.r2);
        for s in &ctx.part.strata {
            for x in 0..r1 {
                for b in 1..=r2 + 1 {
                    assert!(
                        check_section6_theorem(&ctx, s.d, VanishingForm::I1, x, b).unwrap(),
                        "N={n} x={x} b={b}"
                    );
                }
            }
            for y in 0..r2 {
                for a in 1..=r1 + 1 {
                    assert!(
                        check_section6_theorem(&ctx, s.d, VanishingForm::I2, y, a).unwrap(),
                        "N={n} y={y} a={a}"
                    );
                }
            }
        }
    }
}

#[test]
fn block_formulas() {
    let ctx = PsiContext::new(225).unwrap();
    assert!(verify_section5_formulas(&ctx, 1, 100, 3).unwrap());
}

#[test]
fn conjecture_a_levels() {
    for n in [9u64, 25, 27, 45, 49, 75, 81, 99, 121, 225] {
        let c = verify_conjecture_a(n, false).unwrap();
        assert!(c.verdict, "N={n}");
        assert_eq!(c.rank, c.columns.len());
        assert!(c.invariant_factors.iter().all(|f| f == "1"));
        assert_eq!(
            c.blocks.len(),
            (1..=c.big_l)
                .filter(|&s| num_integer::gcd(s, c.big_l) == 1)
                .count()
        );
        assert!(c.blocks.iter().all(|b| b.sha256.len() == 64));
    }
}

#[test]
fn conjecture_a_certificates_are_deterministic() {
    assert_eq!(
        verify_conjecture_a(45, true).unwrap(),
        verify_conjecture_a(45, true).unwrap()
    );
}

#[test]
fn conjecture_a_edge_levels() {
    let c = verify_conjecture_a(15, false).unwrap();
    assert!(c.verdict && c.columns.is_empty());
    assert!(matches!(
        verify_conjecture_a(16, false),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn class_group_anchors() {
    let g = compute_groups(11).unwrap();
    assert_eq!(g.cuspidal.invariant_factors, factors(&[5]));
    assert_eq!(g.rational_divisor_classes.invariant_factors, factors(&[5]));
    assert_eq!(g.rational_subgroup.invariant_factors, factors(&[5]));
    let g = compute_groups(25).unwrap();
    assert!(
        g.cuspidal.is_trivial()
            && g.rational_divisor_classes.is_trivial()
            && g.rational_subgroup.is_trivial()
    );
    assert_eq!(
        compute_groups(27)
            .unwrap()
            .rational_divisor_classes
            .invariant_factors,
        factors(&[3])
    );
    assert_eq!(
        compute_groups(49)
            .unwrap()
            .rational_divisor_classes
            .invariant_factors,
        factors(&[2])
    );
    assert_eq!(
        compute_groups(121)
            .unwrap()
            .rational_divisor_classes
            .invariant_factors,
        factors(&[5, 5])
    );
}

#[test]
fn dual_path_agrees() {
    for n in [11u64, 25, 27, 45, 49, 63, 75, 99] {
        let d = dual_path(n).unwrap();
        assert!(d.agree, "N={n}");
    }
}

#[test]
fn yoo_levels() {
    for n in [9u64, 18, 25, 27, 45, 49, 50, 63, 75, 98, 99, 121] {
        let y = verify_conjecture_yoo(n).unwrap();
        assert!(y.verdict, "N={n}");
        assert!(y.witness.is_none());
        assert_eq!(y.rational_divisor_classes, y.rational_subgroup);
    }
}

#[test]
fn cuspidal_group_is_not_rational_in_general() {
    // C_N(Q) is proper in C_N at 27
    let g = compute_groups(27).unwrap();
    assert!(g.cuspidal.order() > g.rational_subgroup.order());
}

#[test]
fn divisor_map_injective_on_basis() {
    for n in [9u64, 25, 27, 45, 49, 75, 81] {
        assert!(
            divisor_map_injective(&Level::new(n).unwrap()).unwrap(),
            "N={n}"
        );
    }
}

#[test]
fn vanishing_supports_empty_beyond_exponents() {
    for n in [27u64, 81, 225, 441] {
        let ctx = PsiContext::new(n).unwrap();
        let top = ctx.part.r1 + ctx.part.r2 + 2;
        for s in &ctx.part.strata {
            for iota in [1u8, 2] {
                for a in top..top + 4 {
                    assert!(support_sets(&ctx, s.d, iota, SupportKind::A, a)
                        .unwrap()
                        .elements
                        .is_empty());
                }
            }
        }
    }
}

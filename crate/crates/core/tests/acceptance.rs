//! Acceptance suite: one line per criterion, nonzero exit on any failure or
//! budget overrun.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{in_reduced, paper_h, prime_power_fixture, q, square_root_part};
use modunits::analysis::{
    check_elementary_lemmas, check_section6_theorem, check_vanishing_kernel, verify_conjecture_a,
    verify_section5_formulas, VanishingForm,
};
use modunits::checks::{self, CheckConfig, Status};
use modunits::classgroup::{
    compute_groups, dual_path, verify_conjecture_yoo, AbelianGroupStructure,
};
use modunits::cusps::canonicalize;
use modunits::psi::{Ordering, PsiContext};
use modunits::units::{ExponentVector, FIndex, Level};
use num_bigint::BigInt;

type Outcome = Result<String, String>;

struct Criterion {
    id: u8,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

const PSI_LEVELS: [u64; 9] = [9, 25, 27, 45, 49, 81, 99, 121, 225];
const PSI_TRIALS: usize = 100;
const CONJ_A_LEVELS: [u64; 10] = [9, 25, 27, 45, 49, 75, 81, 99, 121, 225];
const YOO_LEVELS: [u64; 13] = [9, 18, 25, 27, 45, 49, 50, 63, 75, 98, 99, 121, 225];
const FORMULA_TRIALS: usize = 100;

fn run_check(name: &str, levels: impl IntoIterator<Item = u64>, cfg: CheckConfig) -> Outcome {
    let check = checks::find(name).ok_or_else(|| format!("no check {name}"))?;
    let (mut pass, mut skip) = (0, 0);
    for n in levels {
        let o = check.run(n, &cfg);
        match o.status {
            Status::Pass => pass += 1,
            Status::Skip => skip += 1,
            Status::Fail => return Err(format!("N={n}: {}", o.detail)),
        }
    }
    Ok(format!("{pass} levels passed, {skip} out of scope"))
}

fn relation() -> Outcome {
    run_check("relation", 1..=150, CheckConfig::default())
}

fn orders() -> Outcome {
    let f = FIndex::new(25, 1, 1).map_err(|e| e.to_string())?;
    let level = Level::new(25).map_err(|e| e.to_string())?;
    let anchor = [
        (25, 1, q(-1, 6)),
        (1, 1, q(-1, 6)),
        (5, 1, q(7, 30)),
        (5, 2, q(-11, 30)),
        (5, 3, q(1, 30)),
        (5, 4, q(13, 30)),
    ];
    let mut total = q(0, 1);
    for (c, a, want) in anchor {
        let cusp = canonicalize(25, c, a).map_err(|e| e.to_string())?;
        let got = level.order(f, &cusp).map_err(|e| e.to_string())?;
        if got != want {
            return Err(format!(
                "N=25 F_(1,1) at ({a}:{c}) is {got}, expected {want}"
            ));
        }
        total += got;
    }
    if total != q(0, 1) {
        return Err("anchor orders do not sum to 0".into());
    }
    run_check("orders", 1..=150, CheckConfig::default()).map(|s| format!("anchor ok, {s}"))
}

fn criterion() -> Outcome {
    let levels = (1..=100).filter(|&n| square_root_part(n) % 2 == 1);
    run_check(
        "criterion",
        levels,
        CheckConfig {
            trials: 10,
            seed: 1,
        },
    )
}

fn psi() -> Outcome {
    for n in PSI_LEVELS {
        let o = checks::find("psi").unwrap().run(
            n,
            &CheckConfig {
                trials: PSI_TRIALS,
                seed: n,
            },
        );
        if o.status != Status::Pass {
            return Err(format!("N={n}: {}", o.detail));
        }
    }
    let mut fixtures = 0;
    for p in [3u64, 5] {
        for r in 2..=4u32 {
            let n = p.pow(r);
            let ctx = PsiContext::new(n).map_err(|e| e.to_string())?;
            let psi = ctx.psi_total(&Ordering::Lex).map_err(|e| e.to_string())?;
            for k in &ctx.index {
                let a = ExponentVector::unit(n, k.m, k.h as i64).map_err(|e| e.to_string())?;
                let out = psi.apply(&a);
                let b = prime_power_fixture(n, p, &a);
                for j in &ctx.index {
                    let ell = square_root_part(n / j.m);
                    let want = if in_reduced(ell, paper_h(ell, j.h)) {
                        q(0, 1)
                    } else {
                        a.get(j) + &b[j]
                    };
                    if out.get(j) != want {
                        return Err(format!("N={n} fixture mismatch for input {k} at {j}"));
                    }
                    fixtures += 1;
                }
            }
        }
    }
    Ok(format!(
        "{} levels x {PSI_TRIALS} vectors, {fixtures} fixture entries",
        PSI_LEVELS.len()
    ))
}

fn vanishing() -> Outcome {
    let err = |e: modunits::Error| e.to_string();
    let mut count = 0;
    for n in [27u64, 81, 225, 441] {
        let ctx = PsiContext::new(n).map_err(err)?;
        let top = ctx.part.r1 + ctx.part.r2 + 2;
        for s in &ctx.part.strata {
            for iota in [1u8, 2] {
                for a in 1..=top {
                    if !check_vanishing_kernel(&ctx, s.d, iota, a).map_err(err)? {
                        return Err(format!("kernel N={n} d={} iota={iota} a={a}", s.d));
                    }
                    count += 1;
                }
            }
        }
    }
    for n in [225u64, 441] {
        let ctx = PsiContext::new(n).map_err(err)?;
        let (r1, r2) = (ctx.part.r1, ctx.part.r2);
        for s in &ctx.part.strata {
            for x in 0..r1 {
                for b in 1..=r2 + 1 {
                    if !check_section6_theorem(&ctx, s.d, VanishingForm::I1, x, b).map_err(err)? {
                        return Err(format!("i1 N={n} x={x} b={b}"));
                    }
                    count += 1;
                }
            }
            for y in 0..r2 {
                for a in 1..=r1 + 1 {
                    if !check_section6_theorem(&ctx, s.d, VanishingForm::I2, y, a).map_err(err)? {
                        return Err(format!("i2 N={n} y={y} a={a}"));
                    }
                    count += 1;
                }
            }
        }
    }
    let ctx = PsiContext::new(225).map_err(err)?;
    for s in &ctx.part.strata {
        if !verify_section5_formulas(&ctx, s.d, FORMULA_TRIALS, 1).map_err(err)? {
            return Err(format!("block formulas at N=225 d={}", s.d));
        }
    }
    Ok(format!(
        "{count} instances, formulas {FORMULA_TRIALS} trials"
    ))
}

fn conjecture_a() -> Outcome {
    let mut cols = 0;
    for n in CONJ_A_LEVELS {
        let c = verify_conjecture_a(n, false).map_err(|e| e.to_string())?;
        if !c.verdict || c.rank != c.columns.len() || c.invariant_factors.iter().any(|f| f != "1") {
            return Err(format!(
                "N={n}: rank {} of {}, factors {:?}",
                c.rank,
                c.columns.len(),
                c.invariant_factors
            ));
        }
        cols += c.columns.len();
    }
    Ok(format!(
        "{} levels, {cols} columns certified",
        CONJ_A_LEVELS.len()
    ))
}

fn yoo() -> Outcome {
    for n in YOO_LEVELS {
        let y = verify_conjecture_yoo(n).map_err(|e| e.to_string())?;
        if !y.verdict {
            return Err(format!(
                "N={n}: C(N) = {}, C_N(Q) = {}",
                y.rational_divisor_classes, y.rational_subgroup
            ));
        }
    }
    Ok(format!("{} levels", YOO_LEVELS.len()))
}

fn class_groups() -> Outcome {
    let group = |xs: &[u64]| {
        AbelianGroupStructure::from_factors(
            &xs.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>(),
        )
    };
    for (n, want) in [(11u64, group(&[5])), (25, group(&[])), (27, group(&[3]))] {
        let g = compute_groups(n).map_err(|e| e.to_string())?;
        let d = dual_path(n).map_err(|e| e.to_string())?;
        if g.rational_divisor_classes != want || !d.agree || d.via_f0 != want || d.via_eta != want {
            return Err(format!(
                "N={n}: C(N) = {}, dual path {} / {}",
                g.rational_divisor_classes, d.via_f0, d.via_eta
            ));
        }
    }
    Ok("C(11) = Z/5, C(25) = 0, C(27) = Z/3 on both paths".into())
}

fn lemmas() -> Outcome {
    let mut checked = 0;
    for n in [27u64, 225, 441] {
        let r = check_elementary_lemmas(&PsiContext::new(n).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        if !r.verdict {
            return Err(format!("N={n}: {r:?}"));
        }
        checked += r.lemma1.checked + r.lemma2.iter().map(|t| t.checked).sum::<usize>();
    }
    Ok(format!("{checked} instances"))
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion {
            id: 1,
            name: "relation identity",
            budget: secs(60),
            run: relation,
        },
        Criterion {
            id: 2,
            name: "order consistency",
            budget: secs(60),
            run: orders,
        },
        Criterion {
            id: 3,
            name: "criterion soundness",
            budget: secs(120),
            run: criterion,
        },
        Criterion {
            id: 4,
            name: "psi properties",
            budget: secs(120),
            run: psi,
        },
        Criterion {
            id: 5,
            name: "vanishing theorems",
            budget: secs(300),
            run: vanishing,
        },
        Criterion {
            id: 6,
            name: "conjecture A",
            budget: secs(300),
            run: conjecture_a,
        },
        Criterion {
            id: 7,
            name: "Yoo instances",
            budget: secs(300),
            run: yoo,
        },
        Criterion {
            id: 8,
            name: "class-group anchors",
            budget: secs(30),
            run: class_groups,
        },
        Criterion {
            id: 9,
            name: "elementary lemmas",
            budget: secs(60),
            run: lemmas,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (status, detail) = match &outcome {
            Ok(d) if elapsed <= c.budget => ("PASS", d.clone()),
            Ok(d) => ("FAIL", format!("over budget: {d}")),
            Err(e) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!(
            "criterion {} [{}]: {status} ({:.2}s / {}s) {detail}",
            c.id,
            c.name,
            elapsed.as_secs_f64(),
            c.budget.as_secs()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

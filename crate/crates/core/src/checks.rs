//! Named per-level checks of the invariants, run by `selftest`.

use std::collections::BTreeMap;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{
    check_elementary_lemmas, check_section6_theorem, check_vanishing_kernel, verify_conjecture_a,
    verify_section5_formulas, VanishingForm,
};
use crate::classgroup::{divisor_map_injective, dual_path, verify_conjecture_yoo};
use crate::criterion::{
    check_criterion_at, ligozat_eta_check, ligozat_lattice_basis, unit_lattice_basis_at,
};
use crate::error::{Error, Result};
use crate::linalg::integer_kernel;
use crate::numtheory::{divisors, prime_divisors, rat, units_mod, Rational};
use crate::psi::{Ordering, PsiContext};
use crate::units::{
    eta_to_f, order_special, translate_s, verify_relation_at, ExponentVector, Level, SpecialCusp,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub check: &'static str,
    #[serde(rename = "N")]
    pub n: u64,
    pub status: Status,
    pub detail: String,
}

#[derive(Clone, Copy, Debug)]
pub struct CheckConfig {
    pub trials: usize,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            trials: 20,
            seed: 1,
        }
    }
}

pub trait Check: Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    /// `Ok(None)` means the level is out of scope for this check.
    fn run_level(&self, n: u64, cfg: &CheckConfig) -> Result<Option<String>>;

    fn run(&self, n: u64, cfg: &CheckConfig) -> CheckOutcome {
        let (status, detail) = match self.run_level(n, cfg) {
            Ok(Some(d)) => (Status::Pass, d),
            Ok(None) => (Status::Skip, "out of scope".to_string()),
            Err(Error::Unsupported(e)) => (Status::Skip, e),
            Err(e) => (Status::Fail, e.to_string()),
        };
        CheckOutcome {
            check: self.name(),
            n,
            status,
            detail,
        }
    }
}

fn fail(msg: String) -> Error {
    Error::InvalidInput(msg)
}

fn random_vector(level: &Level, rng: &mut ChaCha8Rng) -> ExponentVector {
    let index = level.indices();
    let coords: Vec<Rational> = index
        .iter()
        .map(|_| rat(rng.random_range(-9..=9), rng.random_range(1..=4)))
        .collect();
    ExponentVector::from_coords(level.n, &index, &coords)
}

struct RelationCheck;

impl Check for RelationCheck {
    fn name(&self) -> &'static str {
        "relation"
    }
    fn description(&self) -> &'static str {
        "div prod_j F_{m, h + j l/p} = div F_{mp, p^e h} for every admissible (m, h, p)"
    }
    fn run_level(&self, n: u64, _: &CheckConfig) -> Result<Option<String>> {
        let level = Level::new(n)?;
        let mut count = 0;
        for ld in &level.data {
            for p in prime_divisors(ld.ell) {
                for h in 0..ld.ell {
                    let r = verify_relation_at(&level, ld.m, h as i64, p)?;
                    if !r.holds {
                        return Err(fail(format!("m={} h={h} p={p}", ld.m)));
                    }
                    count += 1;
                }
            }
        }
        Ok(Some(format!("{count} relations")))
    }
}

struct OrdersCheck;

impl Check for OrdersCheck {
    fn name(&self) -> &'static str {
        "orders"
    }
    fn description(&self) -> &'static str {
        "closed-form orders at the special cusps equal the general sum; every div F_{m,h} has degree 0"
    }
    fn run_level(&self, n: u64, _: &CheckConfig) -> Result<Option<String>> {
        let level = Level::new(n)?;
        let mut specials = vec![SpecialCusp::Infinity, SpecialCusp::Zero];
        if n % 4 == 2 {
            specials.push(SpecialCusp::HalfN0);
        }
        let index = level.indices();
        for k in &index {
            for &w in &specials {
                if order_special(n, *k, w)? != level.order(*k, &w.cusp(n))? {
                    return Err(fail(format!("{k} at {:?}", w)));
                }
            }
            let d = level.divisor_of(&ExponentVector::unit(n, k.m, k.h as i64)?)?;
            if !d.degree().is_zero() {
                return Err(fail(format!("degree of div F{k} is {}", d.degree())));
            }
        }
        Ok(Some(format!("{} functions", index.len())))
    }
}

struct GaloisCheck;

impl Check for GaloisCheck {
    fn name(&self) -> &'static str {
        "galois"
    }
    fn description(&self) -> &'static str {
        "sigma_s div F_{m,h} = div F_{m,sh} for every unit s mod L"
    }
    fn run_level(&self, n: u64, _: &CheckConfig) -> Result<Option<String>> {
        let level = Level::new(n)?;
        let units = units_mod(level.big_l);
        for k in level.indices() {
            let d = level.divisor_of(&ExponentVector::unit(n, k.m, k.h as i64)?)?;
            for &s in &units {
                let moved = level.divisor_of(&ExponentVector::unit(n, k.m, (s * k.h) as i64)?)?;
                if d.galois(s as i64)? != moved {
                    return Err(fail(format!("{k}, s={s}")));
                }
            }
        }
        Ok(Some(format!("{} units", units.len())))
    }
}

struct CriterionCheck;

impl Check for CriterionCheck {
    fn name(&self) -> &'static str {
        "criterion"
    }
    fn description(&self) -> &'static str {
        "criterion-passing vectors have integral divisors; criterion agrees with Ligozat on eta quotients"
    }
    fn run_level(&self, n: u64, cfg: &CheckConfig) -> Result<Option<String>> {
        let level = Level::new(n)?;
        if level.big_l % 2 == 0 {
            return Ok(None);
        }
        let basis = unit_lattice_basis_at(&level)?;
        for v in &basis {
            if !level.divisor_of(v)?.is_integral() {
                return Err(fail("unit basis vector with non-integral divisor".into()));
            }
        }
        let ds = divisors(n)?;
        let sum_zero = integer_kernel(&vec![vec![1.into(); ds.len()]], ds.len());
        let lig = ligozat_lattice_basis(n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut samples: Vec<BTreeMap<u64, i64>> = lig.clone();
        for _ in 0..cfg.trials {
            let mut r: BTreeMap<u64, i64> = BTreeMap::new();
            for b in &lig {
                let c = rng.random_range(-2..=2);
                for (d, e) in b {
                    *r.entry(*d).or_default() += c * e;
                }
            }
            samples.push(r);
            let mut r: BTreeMap<u64, i64> = BTreeMap::new();
            for row in &sum_zero {
                let c = rng.random_range(-3..=3);
                for (d, e) in ds.iter().zip(row) {
                    *r.entry(*d).or_default() += c * i64::try_from(e).expect("small");
                }
            }
            samples.push(r);
        }
        let mut passing = 0;
        for r in &samples {
            let f = eta_to_f(n, r)?;
            let crit = check_criterion_at(&level, &f)?.verdict;
            if crit != ligozat_eta_check(n, r)? {
                return Err(fail(format!(
                    "criterion {crit} disagrees with Ligozat on {r:?}"
                )));
            }
            if crit {
                passing += 1;
                if !level.divisor_of(&f)?.is_integral() {
                    return Err(fail(format!("non-integral divisor for {r:?}")));
                }
            }
        }
        Ok(Some(format!(
            "{} eta samples, {passing} units",
            samples.len()
        )))
    }
}

struct PsiCheck;

impl Check for PsiCheck {
    fn name(&self) -> &'static str {
        "psi"
    }
    fn description(&self) -> &'static str {
        "Psi vanishes on S_red, preserves divisors, is idempotent, and lex = colex"
    }
    fn run_level(&self, n: u64, cfg: &CheckConfig) -> Result<Option<String>> {
        let ctx = match PsiContext::new(n) {
            Ok(c) => c,
            Err(Error::Unsupported(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let lex = ctx.psi_total(&Ordering::Lex)?;
        let colex = ctx.psi_total(&Ordering::Colex)?;
        if lex.matrix != colex.matrix {
            return Err(fail("lex and colex differ".into()));
        }
        if lex.compose(&lex).matrix != lex.matrix {
            return Err(fail("Psi is not idempotent".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for _ in 0..cfg.trials {
            let f = random_vector(&ctx.level, &mut rng);
            let g = lex.apply(&f);
            for k in &ctx.index {
                let ell = ctx.ell(k.m);
                if k.paper_h(ell) <= ell - crate::numtheory::phi(ell) && !g.get(k).is_zero() {
                    return Err(fail(format!("Psi f nonzero at reduced index {k}")));
                }
            }
            if ctx.level.divisor_of(&g)? != ctx.level.divisor_of(&f)? {
                return Err(fail("divisor changed".into()));
            }
        }
        Ok(Some(format!(
            "{} indices, {} trials",
            ctx.index.len(),
            cfg.trials
        )))
    }
}

fn psi_context(n: u64) -> Result<Option<PsiContext>> {
    match PsiContext::new(n) {
        Ok(c) => Ok(Some(c)),
        Err(Error::Unsupported(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

struct VanishingCheck;

impl Check for VanishingCheck {
    fn name(&self) -> &'static str {
        "vanishing"
    }
    fn description(&self) -> &'static str {
        "kernel forms of both vanishing theorems for every admissible parameter"
    }
    fn run_level(&self, n: u64, _: &CheckConfig) -> Result<Option<String>> {
        let Some(ctx) = psi_context(n)? else {
            return Ok(None);
        };
        let (r1, r2) = (ctx.part.r1, ctx.part.r2);
        let mut count = 0;
        for s in &ctx.part.strata {
            for iota in [1u8, 2] {
                for a in 1..=r1.max(r2) + 1 {
                    count += 1;
                    if !check_vanishing_kernel(&ctx, s.d, iota, a)? {
                        return Err(fail(format!("d={} iota={iota} a={a}", s.d)));
                    }
                }
            }
            if s.d0.is_empty() {
                continue;
            }
            for x in 0..r1 {
                for b in 1..=r2 + 1 {
                    count += 1;
                    if !check_section6_theorem(&ctx, s.d, VanishingForm::I1, x, b)? {
                        return Err(fail(format!("i1 d={} x={x} b={b}", s.d)));
                    }
                }
            }
            for y in 0..r2 {
                for a in 1..=r1 + 1 {
                    count += 1;
                    if !check_section6_theorem(&ctx, s.d, VanishingForm::I2, y, a)? {
                        return Err(fail(format!("i2 d={} y={y} a={a}", s.d)));
                    }
                }
            }
        }
        Ok(Some(format!("{count} instances")))
    }
}

struct FormulasCheck;

impl Check for FormulasCheck {
    fn name(&self) -> &'static str {
        "formulas"
    }
    fn description(&self) -> &'static str {
        "block formulas for Psi_m on D(d)_0 agree with direct application"
    }
    fn run_level(&self, n: u64, cfg: &CheckConfig) -> Result<Option<String>> {
        let Some(ctx) = psi_context(n)? else {
            return Ok(None);
        };
        let mut count = 0;
        for s in &ctx.part.strata {
            let mixed =
                s.d0.iter()
                    .any(|&m| ctx.interval_data(m).map(|i| i.is_mixed()).unwrap_or(false));
            if !mixed {
                continue;
            }
            count += 1;
            if !verify_section5_formulas(&ctx, s.d, cfg.trials, cfg.seed)? {
                return Err(fail(format!("d={}", s.d)));
            }
        }
        if count == 0 {
            return Ok(None);
        }
        Ok(Some(format!("{count} strata")))
    }
}

struct LemmasCheck;

impl Check for LemmasCheck {
    fn name(&self) -> &'static str {
        "lemmas"
    }
    fn description(&self) -> &'static str {
        "exhaustive enumeration of the elementary congruence lemmas"
    }
    fn run_level(&self, n: u64, _: &CheckConfig) -> Result<Option<String>> {
        let Some(ctx) = psi_context(n)? else {
            return Ok(None);
        };
        let r = check_elementary_lemmas(&ctx)?;
        if !r.verdict {
            return Err(fail(format!("{r:?}")));
        }
        let total = r.lemma1.checked + r.lemma2.iter().map(|t| t.checked).sum::<usize>();
        Ok(Some(format!("{total} instances")))
    }
}

struct ConjectureACheck;

impl Check for ConjectureACheck {
    fn name(&self) -> &'static str {
        "conjecture-a"
    }
    fn description(&self) -> &'static str {
        "the stacked Psi T_s matrix has full rank and unit Smith invariants"
    }
    fn run_level(&self, n: u64, _: &CheckConfig) -> Result<Option<String>> {
        let c = verify_conjecture_a(n, false)?;
        if !c.verdict {
            return Err(fail(format!(
                "rank {} of {}, invariants {:?}",
                c.rank,
                c.columns.len(),
                c.invariant_factors
            )));
        }
        Ok(Some(format!("{} columns", c.columns.len())))
    }
}

struct YooCheck;

impl Check for YooCheck {
    fn name(&self) -> &'static str {
        "yoo"
    }
    fn description(&self) -> &'static str {
        "C(N) = C_N(Q) by two-sided membership"
    }
    fn run_level(&self, n: u64, _: &CheckConfig) -> Result<Option<String>> {
        let y = verify_conjecture_yoo(n)?;
        if !y.rational_in_fixed {
            return Err(fail("C(N) not inside C_N(Q)".into()));
        }
        if !y.verdict {
            return Err(fail(format!(
                "C_N(Q) = {} but C(N) = {}",
                y.rational_subgroup, y.rational_divisor_classes
            )));
        }
        Ok(Some(format!("C(N) = {}", y.rational_divisor_classes)))
    }
}

struct DualPathCheck;

impl Check for DualPathCheck {
    fn name(&self) -> &'static str {
        "dual-path"
    }
    fn description(&self) -> &'static str {
        "C(N) from units, from F_{m,0} and from Ligozat eta quotients agree"
    }
    fn run_level(&self, n: u64, _: &CheckConfig) -> Result<Option<String>> {
        let d = dual_path(n)?;
        if !d.agree {
            return Err(fail(format!(
                "{} / {} / {}",
                d.via_units, d.via_f0, d.via_eta
            )));
        }
        Ok(Some(format!("C(N) = {}", d.via_units)))
    }
}

struct InjectiveCheck;

impl Check for InjectiveCheck {
    fn name(&self) -> &'static str {
        "injective"
    }
    fn description(&self) -> &'static str {
        "the divisor map is injective on the criterion lattice"
    }
    fn run_level(&self, n: u64, _: &CheckConfig) -> Result<Option<String>> {
        let level = Level::new(n)?;
        if level.big_l % 2 == 0 {
            return Ok(None);
        }
        if !divisor_map_injective(&level)? {
            return Err(fail("nontrivial kernel".into()));
        }
        Ok(Some("rank matches".into()))
    }
}

struct TranslationCheck;

impl Check for TranslationCheck {
    fn name(&self) -> &'static str {
        "translation"
    }
    fn description(&self) -> &'static str {
        "T_1 = 0 and T_{ss'} f = T_s(translate_{s'} f) + T_{s'} f"
    }
    fn run_level(&self, n: u64, cfg: &CheckConfig) -> Result<Option<String>> {
        let Some(ctx) = psi_context(n)? else {
            return Ok(None);
        };
        let l = ctx.level.big_l;
        let units = units_mod(l);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        if ctx
            .translation_op(1)?
            .matrix
            .triplets()
            .iter()
            .any(|t| !t.2.is_zero())
        {
            return Err(fail("T_1 is not zero".into()));
        }
        for _ in 0..cfg.trials.min(10) {
            let f = random_vector(&ctx.level, &mut rng);
            let s = units[rng.random_range(0..units.len())];
            let s2 = units[rng.random_range(0..units.len())];
            let t = |s: u64, v: &ExponentVector| -> Result<ExponentVector> {
                Ok(ctx.translation_op(s as i64)?.apply(v))
            };
            let shifted = translate_s(n, (s2 % l) as i64, &f)?;
            let lhs = t(s * s2 % l, &f)?;
            let rhs = t(s, &shifted)?.add(&t(s2, &f)?);
            if lhs != rhs {
                return Err(fail(format!("cocycle fails at s={s}, s'={s2}")));
            }
        }
        Ok(Some(format!("{} units", units.len())))
    }
}

/// Every registered check.
pub fn registry() -> Vec<&'static dyn Check> {
    vec![
        &RelationCheck,
        &OrdersCheck,
        &GaloisCheck,
        &CriterionCheck,
        &PsiCheck,
        &TranslationCheck,
        &VanishingCheck,
        &FormulasCheck,
        &LemmasCheck,
        &ConjectureACheck,
        &YooCheck,
        &DualPathCheck,
        &InjectiveCheck,
    ]
}

pub fn find(name: &str) -> Option<&'static dyn Check> {
    registry().into_iter().find(|c| c.name() == name)
}

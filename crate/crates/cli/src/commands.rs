use std::path::Path;

use modunits::analysis::{
    check_section6_theorem, check_vanishing_kernel, verify_conjecture_a, VanishingForm,
};
use modunits::checks::{self, CheckConfig, Status};
use modunits::classgroup::{
    compute_groups_at, verify_conjecture_yoo, yoo_from_groups, AbelianGroupStructure,
};
use modunits::criterion::check_criterion;
use modunits::cusps::{enumerate_cusps, galois_orbits};
use modunits::json::{CuspJson, DivisorJson, ExponentVectorJson, IndexJson, MatrixJson};
use modunits::psi::{LinearOperator, Ordering, PsiContext};
use modunits::units::{verify_relation, ExponentVector, Level};
use modunits::{Error, Result};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::output::{render, Report};
use crate::{Cli, Command};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Op {
    /// Psi on the whole index, every stratum of every d
    Total,
    /// Psi on one stratum D(d)_i
    Stratum,
    PsiM,
    Phi,
    PhiStar,
    /// T_s
    Translation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Theorem {
    Kernel,
    I1,
    I2,
}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn read_vector(path: &Path) -> Result<ExponentVector> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    let j: ExponentVectorJson = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    j.to_vector()
}

/// The exponent vector named by `--file` or `--m/--h`.
fn vector_arg(
    n: Option<u64>,
    m: Option<u64>,
    h: Option<i64>,
    file: Option<&Path>,
) -> Result<ExponentVector> {
    match (file, m, h) {
        (Some(path), _, _) => {
            let v = read_vector(path)?;
            match n {
                Some(n) if n != v.n => {
                    usage(format!("--N {n} disagrees with N = {} in the file", v.n))
                }
                _ => Ok(v),
            }
        }
        (None, Some(m), Some(h)) => match n {
            Some(n) => ExponentVector::unit(n, m, h),
            None => usage("--N is required with --m/--h"),
        },
        _ => usage("give either --file or both --m and --h"),
    }
}

fn parse_ordering(s: &str) -> Result<Ordering> {
    match s {
        "lex" => Ok(Ordering::Lex),
        "colex" => Ok(Ordering::Colex),
        _ => s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::InvalidInput(format!("bad ordering {s:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Ordering::Custom),
    }
}

fn per_level<F>(cli: &Cli, levels: &[u64], f: F) -> Result<(String, i32)>
where
    F: Fn(u64) -> Result<Report> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let results: Vec<(u64, Result<Report>)> =
        pool.install(|| levels.par_iter().map(|&n| (n, f(n))).collect());
    Ok(render(&results, cli.format))
}

fn single(cli: &Cli, n: u64, rep: Result<Report>) -> Result<(String, i32)> {
    let rep = rep?;
    Ok(render(&[(n, Ok(rep))], cli.format))
}

pub fn run(cli: &Cli) -> Result<(String, i32)> {
    match &cli.command {
        Command::Cusps(l) => per_level(cli, &l.n.0, cusps_report),
        Command::Divisor { level, m, h, file } => {
            let v = vector_arg(Some(level.n), *m, *h, file.as_deref())?;
            single(cli, level.n, divisor_report(&v))
        }
        Command::Criterion { n, m, h, file } => {
            let v = vector_arg(*n, *m, *h, file.as_deref())?;
            single(cli, v.n, criterion_report(&v))
        }
        Command::Relation { level, m, h, p } => {
            single(cli, level.n, relation_report(level.n, *m, *h, *p))
        }
        Command::PsiMatrix {
            level,
            op,
            ordering,
            d,
            i,
            m,
            iota,
            s,
        } => {
            let ordering = parse_ordering(ordering)?;
            single(
                cli,
                level.n,
                psi_report(level.n, *op, &ordering, *d, *i, *m, *iota, *s),
            )
        }
        Command::Vanishing {
            level,
            theorem,
            d,
            iota,
            a,
            b,
            x,
            y,
        } => {
            let p = VanishingParams {
                theorem: *theorem,
                d: *d,
                iota: *iota,
                a: *a,
                b: *b,
                x: *x,
                y: *y,
            };
            single(cli, level.n, vanishing_report(level.n, &p))
        }
        Command::ConjectureA {
            levels,
            divisor_integrality,
        } => per_level(cli, &levels.n.0, |n| {
            conjecture_a_report(n, *divisor_integrality)
        }),
        Command::Classgroup(l) => per_level(cli, &l.n.0, classgroup_report),
        Command::VerifyYoo(l) => per_level(cli, &l.n.0, yoo_report),
        Command::Selftest {
            n,
            max,
            check,
            trials,
            seed,
            list,
        } => {
            if *list {
                return Ok(list_checks(cli));
            }
            let levels = match (n, max) {
                (Some(l), _) => l.0.clone(),
                (None, m) => (1..=m.unwrap_or(30)).collect(),
            };
            selftest(
                cli,
                &levels,
                check,
                CheckConfig {
                    trials: *trials,
                    seed: *seed,
                },
            )
        }
    }
}

fn cusps_report(n: u64) -> Result<Report> {
    let cusps = enumerate_cusps(n)?;
    let orbits = galois_orbits(n)?;
    let js: Vec<CuspJson> = cusps.iter().map(CuspJson::from).collect();
    let orbit_js: Vec<Vec<CuspJson>> = orbits
        .iter()
        .map(|o| o.iter().map(CuspJson::from).collect())
        .collect();
    let mut text = format!(
        "N = {n}: {} cusps in {} Galois orbits\n",
        cusps.len(),
        orbits.len()
    );
    for (k, o) in orbits.iter().enumerate() {
        let names: Vec<String> = o.iter().map(|c| c.to_string()).collect();
        text.push_str(&format!("  orbit {k}: {}\n", names.join(" ")));
    }
    let mut rows = Vec::new();
    for (k, o) in orbits.iter().enumerate() {
        for c in o {
            rows.push(vec![
                n.to_string(),
                c.c.to_string(),
                c.a.to_string(),
                k.to_string(),
            ]);
        }
    }
    Ok(Report::new(
        json!({ "N": n, "count": cusps.len(), "cusps": js, "orbits": orbit_js }),
        text,
    )
    .csv(vec!["N", "c", "a", "orbit"], rows))
}

fn describe_vector(v: &ExponentVector) -> String {
    let terms: Vec<String> = v
        .entries
        .iter()
        .map(|(k, x)| format!("F_{{{},{}}}^{x}", k.m, k.h))
        .collect();
    if terms.is_empty() {
        "1".into()
    } else {
        terms.join(" ")
    }
}

fn divisor_report(v: &ExponentVector) -> Result<Report> {
    let level = Level::new(v.n)?;
    let d = level.divisor_of(v)?;
    let j = DivisorJson::from_divisor(&d)?;
    let mut text = format!("N = {}: div {}\n", v.n, describe_vector(v));
    let mut rows = Vec::new();
    for c in &level.cusps {
        let x = d.get(c);
        text.push_str(&format!("  {c}  {x}\n"));
        rows.push(vec![
            v.n.to_string(),
            c.c.to_string(),
            c.a.to_string(),
            x.numer().to_string(),
            x.denom().to_string(),
        ]);
    }
    Ok(Report::new(to_value(&j), text).csv(vec!["N", "c", "a", "num", "den"], rows))
}

fn criterion_report(v: &ExponentVector) -> Result<Report> {
    let r = check_criterion(v.n, v)?;
    let mut js = to_value(&r);
    js.as_object_mut()
        .expect("object")
        .insert("N".into(), v.n.into());
    let conds = [r.cond1, r.cond2, r.cond3, r.cond4, r.cond5];
    let mut text = format!(
        "N = {}: criterion {}\n",
        v.n,
        if r.verdict { "holds" } else { "fails" }
    );
    for (k, c) in conds.iter().enumerate() {
        text.push_str(&format!("  condition {}: {c}\n", k + 1));
    }
    let mut row = vec![v.n.to_string()];
    row.extend(conds.iter().map(|c| c.to_string()));
    row.push(r.verdict.to_string());
    Ok(Report::new(js, text)
        .csv(
            vec!["N", "cond1", "cond2", "cond3", "cond4", "cond5", "verdict"],
            vec![row],
        )
        .verdict(r.verdict))
}

fn relation_report(n: u64, m: u64, h: i64, p: u64) -> Result<Report> {
    let r = verify_relation(n, m, h, p)?;
    let js = json!({
        "N": n,
        "m": m,
        "h": h,
        "p": p,
        "holds": r.holds,
        "epsilon": r.epsilon,
        "lhs": ExponentVectorJson::from_vector(&r.lhs)?,
        "rhs": IndexJson { m: r.rhs.m, h: r.rhs.h },
        "lhs_divisor": DivisorJson::from_divisor(&r.lhs_divisor)?,
        "rhs_divisor": DivisorJson::from_divisor(&r.rhs_divisor)?,
    });
    let text = format!(
        "N = {n}: div {} = div F_{{{},{}}}: {}\n",
        describe_vector(&r.lhs),
        r.rhs.m,
        r.rhs.h,
        r.holds
    );
    let row = vec![
        n.to_string(),
        m.to_string(),
        h.to_string(),
        p.to_string(),
        r.epsilon.to_string(),
        r.holds.to_string(),
    ];
    Ok(Report::new(js, text)
        .csv(vec!["N", "m", "h", "p", "epsilon", "holds"], vec![row])
        .verdict(r.holds))
}

fn need<T>(x: Option<T>, flag: &str, op: &str) -> Result<T> {
    x.ok_or_else(|| Error::InvalidInput(format!("--op {op} needs {flag}")))
}

#[allow(clippy::too_many_arguments)]
fn psi_report(
    n: u64,
    op: Op,
    ordering: &Ordering,
    d: Option<u64>,
    i: Option<u8>,
    m: Option<u64>,
    iota: Option<u8>,
    s: Option<i64>,
) -> Result<Report> {
    let ctx = PsiContext::new(n)?;
    let (name, operator): (String, LinearOperator) = match op {
        Op::Total => ("psi".into(), ctx.psi_total(ordering)?),
        Op::Stratum => {
            let (d, i) = (need(d, "--d", "stratum")?, need(i, "--i", "stratum")?);
            (format!("psi d={d} i={i}"), ctx.psi_full_op(d, i, ordering)?)
        }
        Op::PsiM => {
            let m = need(m, "--m", "psi-m")?;
            (format!("psi_m m={m}"), ctx.psi_m_op(m)?)
        }
        Op::Phi => {
            let (m, iota) = (need(m, "--m", "phi")?, need(iota, "--iota", "phi")?);
            (format!("phi m={m} iota={iota}"), ctx.phi_op(m, iota)?)
        }
        Op::PhiStar => {
            let m = need(m, "--m", "phi-star")?;
            (format!("phi* m={m}"), ctx.phi_star_op(m)?)
        }
        Op::Translation => {
            let s = need(s, "--s", "translation")?;
            (format!("T_{s}"), ctx.translation_op(s)?)
        }
    };
    let mj = MatrixJson::from_operator(n, &operator)?;
    let text = format!(
        "N = {n}: {name}, {} x {} with {} nonzero entries\n",
        mj.index.len(),
        mj.index.len(),
        mj.entries.len()
    );
    let rows = mj
        .entries
        .iter()
        .map(|t| {
            let (r, c) = (&mj.index[t.row], &mj.index[t.col]);
            [r.m, r.h, c.m, c.h]
                .iter()
                .map(u64::to_string)
                .chain([t.num.to_string(), t.den.to_string()])
                .collect()
        })
        .collect();
    Ok(Report::new(to_value(&mj), text)
        .csv(vec!["row_m", "row_h", "col_m", "col_h", "num", "den"], rows))
}

pub struct VanishingParams {
    pub theorem: Option<Theorem>,
    pub d: Option<u64>,
    pub iota: Option<u8>,
    pub a: Option<u32>,
    pub b: Option<u32>,
    pub x: Option<u32>,
    pub y: Option<u32>,
}

fn pick(given: Option<u32>, range: std::ops::RangeInclusive<u32>) -> Vec<u32> {
    given.map(|v| vec![v]).unwrap_or_else(|| range.collect())
}

fn vanishing_report(n: u64, p: &VanishingParams) -> Result<Report> {
    let ctx = PsiContext::new(n)?;
    let (r1, r2) = (ctx.part.r1, ctx.part.r2);
    let ds: Vec<u64> = match p.d {
        Some(d) => {
            ctx.part.strata_for(d)?;
            vec![d]
        }
        None => ctx.part.strata.iter().map(|s| s.d).collect(),
    };
    let theorems = p
        .theorem
        .map(|t| vec![t])
        .unwrap_or_else(|| vec![Theorem::Kernel, Theorem::I1, Theorem::I2]);
    let mut instances = Vec::new();
    let mut rows = Vec::new();
    let mut all = true;
    let mut record = |name: &str, d: u64, params: Value, ok: bool, cols: [String; 5]| {
        all &= ok;
        let mut row = vec![n.to_string(), name.to_string(), d.to_string()];
        row.extend(cols);
        row.push(ok.to_string());
        rows.push(row);
        instances.push(json!({ "theorem": name, "d": d, "params": params, "verdict": ok }));
    };
    let blank = String::new;
    for &d in &ds {
        let has_d0 = !ctx.part.strata_for(d)?.d0.is_empty();
        for &t in &theorems {
            match t {
                Theorem::Kernel => {
                    let iotas = p.iota.map(|i| vec![i]).unwrap_or_else(|| vec![1, 2]);
                    for &iota in &iotas {
                        for a in pick(p.a, 1..=r1.max(r2) + 1) {
                            let ok = check_vanishing_kernel(&ctx, d, iota, a)?;
                            record(
                                "kernel",
                                d,
                                json!({ "iota": iota, "a": a }),
                                ok,
                                [iota.to_string(), blank(), blank(), a.to_string(), blank()],
                            );
                        }
                    }
                }
                Theorem::I1 if has_d0 || p.x.is_some() => {
                    for x in pick(p.x, 0..=r1.saturating_sub(1))
                        .into_iter()
                        .filter(|&x| p.x.is_some() || x < r1)
                    {
                        for b in pick(p.b, 1..=r2 + 1) {
                            let ok = check_section6_theorem(&ctx, d, VanishingForm::I1, x, b)?;
                            record(
                                "i1",
                                d,
                                json!({ "x": x, "b": b }),
                                ok,
                                [blank(), x.to_string(), blank(), blank(), b.to_string()],
                            );
                        }
                    }
                }
                Theorem::I2 if has_d0 || p.y.is_some() => {
                    for y in pick(p.y, 0..=r2.saturating_sub(1))
                        .into_iter()
                        .filter(|&y| p.y.is_some() || y < r2)
                    {
                        for a in pick(p.a, 1..=r1 + 1) {
                            let ok = check_section6_theorem(&ctx, d, VanishingForm::I2, y, a)?;
                            record(
                                "i2",
                                d,
                                json!({ "y": y, "a": a }),
                                ok,
                                [blank(), blank(), y.to_string(), a.to_string(), blank()],
                            );
                        }
                    }
                }
                _ => {}
            }
        }
    }
    let text = format!(
        "N = {n}: {} vanishing instances, verdict {all}\n",
        instances.len()
    );
    let js = json!({ "N": n, "count": instances.len(), "instances": instances, "verdict": all });
    Ok(Report::new(js, text)
        .csv(
            vec!["N", "theorem", "d", "iota", "x", "y", "a", "b", "verdict"],
            rows,
        )
        .verdict(all))
}

fn conjecture_a_report(n: u64, integrality: bool) -> Result<Report> {
    let c = verify_conjecture_a(n, integrality)?;
    let verdict = c.verdict && c.divisor_integrality.unwrap_or(true);
    let text = format!(
        "N = {n}: L = {}, {} columns, {} stacked rows, rank {}, verdict {}{}\n",
        c.big_l,
        c.columns.len(),
        c.stacked_rows,
        c.rank,
        c.verdict,
        c.divisor_integrality
            .map(|v| format!(", with divisor integrality {v}"))
            .unwrap_or_default()
    );
    let row = vec![
        n.to_string(),
        c.big_l.to_string(),
        c.columns.len().to_string(),
        c.rank.to_string(),
        c.verdict.to_string(),
        c.divisor_integrality
            .map(|v| v.to_string())
            .unwrap_or_default(),
    ];
    Ok(Report::new(to_value(&c), text)
        .csv(
            vec![
                "N",
                "L",
                "columns",
                "rank",
                "verdict",
                "divisor_integrality",
            ],
            vec![row],
        )
        .verdict(verdict))
}

fn group_cells(g: &AbelianGroupStructure) -> [String; 2] {
    [g.order().to_string(), g.to_string()]
}

fn classgroup_report(n: u64) -> Result<Report> {
    let level = Level::new(n)?;
    let g = compute_groups_at(&level)?;
    let mut js = to_value(&g);
    let text = format!(
        "N = {n}: C_N = {}, C(N) = {}, C_N(Q) = {}",
        g.cuspidal, g.rational_divisor_classes, g.rational_subgroup
    );
    let mut row = vec![n.to_string(), g.cusps.to_string()];
    row.extend(group_cells(&g.cuspidal));
    row.extend(group_cells(&g.rational_divisor_classes));
    row.extend(group_cells(&g.rational_subgroup));
    let yoo = yoo_from_groups(&level, g);
    row.push(yoo.verdict.to_string());
    js.as_object_mut()
        .expect("object")
        .insert("yoo_verdict".into(), yoo.verdict.into());
    let header = vec![
        "N",
        "cusps",
        "C_N_order",
        "C_N",
        "C(N)_order",
        "C(N)",
        "C_N(Q)_order",
        "C_N(Q)",
        "yoo_verdict",
    ];
    Ok(Report::new(js, format!("{text}, Yoo {}\n", yoo.verdict)).csv(header, vec![row]))
}

fn yoo_report(n: u64) -> Result<Report> {
    let y = verify_conjecture_yoo(n)?;
    let text = format!(
        "N = {n}: C(N) = {}, C_N(Q) = {}, equal: {}\n",
        y.rational_divisor_classes, y.rational_subgroup, y.verdict
    );
    let row = vec![
        n.to_string(),
        y.rational_divisor_classes.to_string(),
        y.rational_subgroup.to_string(),
        y.rational_in_fixed.to_string(),
        y.fixed_in_rational.to_string(),
        y.verdict.to_string(),
    ];
    Ok(Report::new(to_value(&y), text)
        .csv(
            vec![
                "N",
                "C(N)",
                "C_N(Q)",
                "rational_in_fixed",
                "fixed_in_rational",
                "verdict",
            ],
            vec![row],
        )
        .verdict(y.verdict))
}

fn list_checks(cli: &Cli) -> (String, i32) {
    let reg = checks::registry();
    let js: Vec<Value> = reg
        .iter()
        .map(|c| json!({ "name": c.name(), "description": c.description() }))
        .collect();
    let text: String = reg
        .iter()
        .map(|c| format!("{:<12} {}\n", c.name(), c.description()))
        .collect();
    let rows = reg
        .iter()
        .map(|c| vec![c.name().to_string(), c.description().to_string()])
        .collect();
    let rep = Report::new(Value::Array(js), text).csv(vec!["name", "description"], rows);
    render(&[(0, Ok(rep))], cli.format)
}

fn selftest(
    cli: &Cli,
    levels: &[u64],
    names: &[String],
    cfg: CheckConfig,
) -> Result<(String, i32)> {
    let selected: Vec<&'static dyn checks::Check> = if names.is_empty() {
        checks::registry()
    } else {
        names
            .iter()
            .map(|s| {
                checks::find(s).ok_or_else(|| Error::InvalidInput(format!("unknown check {s:?}")))
            })
            .collect::<Result<_>>()?
    };
    let jobs: Vec<(u64, &'static dyn checks::Check)> = levels
        .iter()
        .flat_map(|&n| selected.iter().map(move |&c| (n, c)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let outcomes: Vec<checks::CheckOutcome> =
        pool.install(|| jobs.par_iter().map(|(n, c)| c.run(*n, &cfg)).collect());
    let count = |s: Status| outcomes.iter().filter(|o| o.status == s).count();
    let (passed, failed, skipped) = (
        count(Status::Pass),
        count(Status::Fail),
        count(Status::Skip),
    );
    let mut text = String::new();
    for o in &outcomes {
        if o.status != Status::Skip {
            let tag = if o.status == Status::Pass {
                "ok  "
            } else {
                "FAIL"
            };
            text.push_str(&format!(
                "{tag} {:<12} N = {:<5} {}\n",
                o.check, o.n, o.detail
            ));
        }
    }
    text.push_str(&format!(
        "{passed} passed, {failed} failed, {skipped} skipped\n"
    ));
    let rows = outcomes
        .iter()
        .map(|o| {
            let status = to_value(&o.status).as_str().unwrap_or_default().to_string();
            vec![
                o.check.to_string(),
                o.n.to_string(),
                status,
                o.detail.clone(),
            ]
        })
        .collect();
    let js = json!({
        "levels": levels,
        "checks": selected.iter().map(|c| c.name()).collect::<Vec<_>>(),
        "trials": cfg.trials,
        "seed": cfg.seed,
        "outcomes": outcomes,
        "passed": passed,
        "failed": failed,
        "skipped": skipped,
        "verdict": failed == 0,
    });
    let rep = Report::new(js, text)
        .csv(vec!["check", "N", "status", "detail"], rows)
        .verdict(failed == 0);
    Ok(render(
        &[(levels.first().copied().unwrap_or(0), Ok(rep))],
        cli.format,
    ))
}

use std::process::{Command, Output};

use modunits::cusps::enumerate_cusps;
use modunits::units::{order_at_cusp, FIndex};
use modunits::Rational;
use serde_json::Value;

fn modunits(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modunits"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn divisor_at_25() {
    let out = modunits(&["divisor", "--N", "25", "--m", "1", "--h", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["N"], 25);
    let coeffs = v["coeffs"].as_array().unwrap();
    let got: Vec<(u64, u64, i64, i64)> = coeffs
        .iter()
        .map(|c| {
            (
                c["c"].as_u64().unwrap(),
                c["a"].as_u64().unwrap(),
                c["num"].as_i64().unwrap(),
                c["den"].as_i64().unwrap(),
            )
        })
        .collect();
    for anchor in [
        (1, 1, -1, 6),
        (25, 1, -1, 6),
        (5, 1, 7, 30),
        (5, 2, -11, 30),
        (5, 3, 1, 30),
        (5, 4, 13, 30),
    ] {
        assert!(got.contains(&anchor), "{anchor:?}");
    }
    assert_eq!(got.len(), 6);
    let f = FIndex::new(25, 1, 1).unwrap();
    for c in enumerate_cusps(25).unwrap() {
        let want = order_at_cusp(25, f, &c).unwrap();
        let found = got.iter().find(|g| g.0 == c.c && g.1 == c.a);
        match found {
            Some(&(_, _, n, d)) => assert_eq!(Rational::new(n.into(), d.into()), want),
            None => assert_eq!(want, Rational::from_integer(0.into())),
        }
    }
}

#[test]
fn conjecture_a_at_9() {
    let out = modunits(&["conjecture-a", "--N", "9"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["verdict"], true);
}

#[test]
fn criterion_on_zero_vector() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zero.json");
    std::fs::write(&path, r#"{"N":25,"entries":[]}"#).unwrap();
    let out = modunits(&["criterion", "--N", "25", "--file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["verdict"], true);
}

#[test]
fn criterion_false_exits_one() {
    let out = modunits(&["criterion", "--N", "25", "--m", "1", "--h", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out)["verdict"], false);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(modunits(&["divisor", "--N", "25"]).status.code(), Some(2));
    assert_eq!(
        modunits(&["divisor", "--N", "25", "--m", "2", "--h", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(modunits(&["nonsense"]).status.code(), Some(2));
    assert_eq!(modunits(&["cusps", "--N", "0"]).status.code(), Some(2));
    let out = modunits(&["relation", "--N", "25", "--m", "1", "--h", "0", "--p", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn even_l_is_unsupported() {
    // L = 4 at N = 16
    let out = modunits(&["conjecture-a", "--N", "16"]);
    assert_eq!(out.status.code(), Some(3));
    let out = modunits(&["classgroup", "--N", "9,16"]);
    assert_eq!(out.status.code(), Some(3));
    let v = json_of(&out);
    assert_eq!(v[1]["status"], "unsupported");
}

#[test]
fn multi_level_output_is_ordered_and_stable() {
    let a = modunits(&["verify-yoo", "--N", "9,25,11,27", "--jobs", "4"]);
    let b = modunits(&["verify-yoo", "--N", "9,25,11,27", "--jobs", "1"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let levels: Vec<u64> = json_of(&a)
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x["n"].as_u64().unwrap())
        .collect();
    assert_eq!(levels, vec![9, 25, 11, 27]);
}

#[test]
fn json_output_round_trips() {
    for args in [
        vec!["divisor", "--N", "45", "--m", "3", "--h", "1"],
        vec!["cusps", "--N", "12"],
        vec!["psi-matrix", "--N", "9"],
        vec!["relation", "--N", "45", "--m", "1", "--h", "1", "--p", "3"],
        vec!["classgroup", "--N", "27"],
    ] {
        let out = modunits(&args);
        let text = String::from_utf8(out.stdout).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(
            serde_json::to_string_pretty(&v).unwrap() + "\n",
            text,
            "{args:?}"
        );
    }
}

#[test]
fn divisor_file_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.json");
    std::fs::write(
        &path,
        r#"{"N":25,"entries":[{"m":1,"h":1,"num":1,"den":1}]}"#,
    )
    .unwrap();
    let a = modunits(&["divisor", "--N", "25", "--file", path.to_str().unwrap()]);
    let b = modunits(&["divisor", "--N", "25", "--m", "1", "--h", "1"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn psi_matrix_csv_and_text() {
    let out = modunits(&["psi-matrix", "--N", "9", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("row_m,row_h,col_m,col_h,num,den\n"));
    let out = modunits(&["psi-matrix", "--N", "9", "--op", "phi", "--m", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn vanishing_and_selftest() {
    let out = modunits(&["vanishing", "--N", "225", "--theorem", "i1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json_of(&out)["count"].as_u64().unwrap() > 0);
    let out = modunits(&[
        "selftest", "--N", "9,25", "--check", "relation", "--check", "yoo",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["failed"], 0);
    assert_eq!(
        modunits(&["selftest", "--check", "nope"]).status.code(),
        Some(2)
    );
}

use std::io::Write;

use modunits::Error;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// What a subcommand hands back for one level.
#[derive(Debug)]
pub struct Report {
    pub json: Value,
    pub csv_header: Vec<&'static str>,
    pub csv_rows: Vec<Vec<String>>,
    pub text: String,
    /// `Some(false)` maps to exit code 1.
    pub verdict: Option<bool>,
}

impl Report {
    pub fn new(json: Value, text: String) -> Self {
        Report {
            json,
            csv_header: vec![],
            csv_rows: vec![],
            text,
            verdict: None,
        }
    }

    pub fn csv(mut self, header: Vec<&'static str>, rows: Vec<Vec<String>>) -> Self {
        self.csv_header = header;
        self.csv_rows = rows;
        self
    }

    pub fn verdict(mut self, v: bool) -> Self {
        self.verdict = Some(v);
        self
    }
}

pub fn error_code(e: &Error) -> i32 {
    match e {
        Error::Unsupported(_) => 3,
        _ => 2,
    }
}

fn error_json(n: u64, e: &Error) -> Value {
    let mut m = Map::new();
    m.insert("N".into(), n.into());
    let status = if error_code(e) == 3 {
        "unsupported"
    } else {
        "invalid"
    };
    m.insert("status".into(), status.into());
    m.insert("error".into(), e.to_string().into());
    Value::Object(m)
}

/// Combine per-level results into one rendered document and an exit code.
///
/// A single level renders as that level's object; several render as an
/// array in input order.
pub fn render(results: &[(u64, Result<Report, Error>)], format: Format) -> (String, i32) {
    let mut code_false = false;
    let mut code_invalid = false;
    let mut code_unsupported = false;
    for (_, r) in results {
        match r {
            Ok(rep) if rep.verdict == Some(false) => code_false = true,
            Ok(_) => {}
            Err(e) if error_code(e) == 3 => code_unsupported = true,
            Err(_) => code_invalid = true,
        }
    }
    let code = if code_false {
        1
    } else if code_invalid {
        2
    } else if code_unsupported {
        3
    } else {
        0
    };

    for (n, r) in results {
        if let Err(e) = r {
            eprintln!("modunits: N = {n}: {e}");
        }
    }

    let body = match format {
        Format::Json => {
            let vals: Vec<Value> = results
                .iter()
                .map(|(n, r)| match r {
                    Ok(rep) => rep.json.clone(),
                    Err(e) => error_json(*n, e),
                })
                .collect();
            let doc = if vals.len() == 1 {
                vals.into_iter().next().unwrap()
            } else {
                Value::Array(vals)
            };
            let mut s = serde_json::to_string_pretty(&doc).expect("json values serialize");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            if let Some(header) = results
                .iter()
                .find_map(|(_, r)| r.as_ref().ok().map(|x| &x.csv_header))
            {
                w.write_record(header).expect("in-memory write");
            }
            for rep in results.iter().filter_map(|(_, r)| r.as_ref().ok()) {
                for row in &rep.csv_rows {
                    w.write_record(row).expect("in-memory write");
                }
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
        }
        Format::Text => {
            let mut s = String::new();
            for (n, r) in results {
                match r {
                    Ok(rep) => s.push_str(&rep.text),
                    Err(e) => s.push_str(&format!("N = {n}: {e}\n")),
                }
            }
            s
        }
    };
    (body, code)
}

pub fn emit(body: &str, path: Option<&std::path::Path>) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, body),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())?;
            out.flush()
        }
    }
}

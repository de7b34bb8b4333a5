//! Deterministic text artifacts: CSV tables and JSON documents.
//!
//! Every float is written like C's `%.12e` (`1.250000000000e-01`), so files
//! diff cleanly across platforms and runs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::boundaries::{classify, DiscreteBoundaries, FreeBoundaries};
use crate::error::Result;
use crate::pde::SolutionField;
use crate::policy::PathOutcome;

/// `%.12e` formatting; non-finite values print as `nan`, `inf`, `-inf`.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.unsigned_abs())
}

/// File-name friendly label of a claim level, e.g. `1.5` -> `1.5`, `2` -> `2`.
pub fn level_label(z: f64) -> String {
    format!("{z}")
}

/// Renders JSON with two-space indentation, sorted keys (the default map
/// ordering) and floats in `%.12e`. Integers are written as integers.
pub fn render_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, value: &Value, depth: usize) {
    let pad = |out: &mut String, d: usize| out.extend(std::iter::repeat_n("  ", d));
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().expect("f64 number");
                out.push_str(&sci(x));
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                pad(out, depth + 1);
                write_value(out, item, depth + 1);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                pad(out, depth + 1);
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                write_value(out, item, depth + 1);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push('}');
        }
    }
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    fs::write(path, render_json(value))?;
    Ok(())
}

/// Plain CSV builder: header plus rows of pre-formatted cells.
struct Csv {
    text: String,
}

impl Csv {
    fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text }
    }

    fn row<I: IntoIterator<Item = String>>(&mut self, cells: I) {
        let mut first = true;
        for cell in cells {
            if !first {
                self.text.push(',');
            }
            self.text.push_str(&cell);
            first = false;
        }
        self.text.push('\n');
    }

    fn save(self, path: &Path) -> Result<()> {
        fs::write(path, self.text)?;
        Ok(())
    }
}

/// Node indices `0, stride, 2 stride, ..` always including the last one.
fn strided(last: usize, stride: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..=last).step_by(stride.max(1)).collect();
    if idx.last() != Some(&last) {
        idx.push(last);
    }
    idx
}

/// `tau,x,u,v,y` on every `stride`-th node in each direction.
pub fn write_solution(path: &Path, field: &SolutionField, stride: usize) -> Result<()> {
    let g = &field.grid;
    let mut csv = Csv::new(&["tau", "x", "u", "v", "y"]);
    for n in strided(g.nt, stride) {
        for i in strided(g.nx, stride) {
            csv.row([
                sci(g.tau(n)),
                sci(g.x(i)),
                sci(field.u[[n, i]]),
                sci(field.v[[n, i]]),
                sci(field.y[[n, i]]),
            ]);
        }
    }
    csv.save(path)
}

/// `tau,d,d_raw`: projected (monotone) barrier and the raw extraction.
pub fn write_dividend_boundary(path: &Path, fb: &FreeBoundaries) -> Result<()> {
    let d = &fb.dividend;
    let mut csv = Csv::new(&["tau", "d", "d_raw"]);
    for n in 0..d.tau.len() {
        csv.row([sci(d.tau[n]), sci(d.projected[n]), sci(d.raw[n])]);
    }
    csv.save(path)
}

pub fn write_reinsurance_boundary(path: &Path, tau: &[f64], k: &[f64]) -> Result<()> {
    let mut csv = Csv::new(&["tau", "K"]);
    for (t, kn) in tau.iter().zip(k) {
        csv.row([sci(*t), sci(*kn)]);
    }
    csv.save(path)
}

/// Region labels on an `nx` by `nt` sub-grid of `[0, L] x [0, T]` for each level.
pub fn write_regions(path: &Path, field: &SolutionField, levels: &[f64], nx: usize, nt: usize) -> Result<()> {
    let g = &field.grid;
    let mut csv = Csv::new(&["tau", "x", "z", "region"]);
    for n in 0..=nt {
        let tau = g.horizon * n as f64 / nt as f64;
        for i in 0..=nx {
            let x = g.length * i as f64 / nx as f64;
            for &z in levels {
                csv.row([sci(tau), sci(x), sci(z), classify(field, x, tau, z).as_str().to_string()]);
            }
        }
    }
    csv.save(path)
}

/// `path_id,theta,payout`; `theta` is empty for paths that survive to `T`.
pub fn write_paths(path: &Path, paths: &[PathOutcome]) -> Result<()> {
    let mut csv = Csv::new(&["path_id", "theta", "payout"]);
    for p in paths {
        csv.row([p.path_id.to_string(), p.theta.map(sci).unwrap_or_default(), sci(p.payout)]);
    }
    csv.save(path)
}

/// Plot-ready curves: the dividend barrier against its bound, reinsurance
/// barriers against the universal linear bound, and the nested per-atom
/// barriers for discrete claims. Returns the file names written.
pub fn emit_figure_data(
    dir: &Path,
    field: &SolutionField,
    fb: &FreeBoundaries,
    atoms: Option<&DiscreteBoundaries>,
) -> Result<Vec<String>> {
    let mut written = Vec::new();
    let tau = &fb.dividend.tau;

    let mut fig1 = Csv::new(&["tau", "d", "x2"]);
    for (n, t) in tau.iter().enumerate() {
        fig1.row([sci(*t), sci(fb.dividend.projected[n]), sci(fb.x2)]);
    }
    fig1.save(&dir.join("figure_dividend_boundary.csv"))?;
    written.push("figure_dividend_boundary.csv".to_string());

    let mut fig4 = Csv::new(&["tau", "z", "K", "bound", "d"]);
    for (z, k) in fb.reinsurance() {
        let bound = if fb.lambda > 0.0 {
            ((z - 1.0 / fb.lambda) / (2.0 * field.params.c)).max(0.0)
        } else {
            0.0
        };
        for (n, t) in tau.iter().enumerate() {
            fig4.row([sci(*t), sci(z), sci(k[n]), sci(bound), sci(fb.dividend.projected[n])]);
        }
    }
    fig4.save(&dir.join("figure_reinsurance_bound.csv"))?;
    written.push("figure_reinsurance_bound.csv".to_string());

    if let Some(b) = atoms {
        let mut header: Vec<String> = vec!["tau".into()];
        header.extend(b.atoms.iter().map(|z| format!("K_{}", level_label(*z))));
        header.push("d".into());
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut fig5 = Csv::new(&header);
        for (n, t) in tau.iter().enumerate() {
            let mut row = vec![sci(*t)];
            row.extend(b.k.iter().map(|k| sci(k[n])));
            row.push(sci(fb.dividend.projected[n]));
            fig5.row(row);
        }
        fig5.save(&dir.join("figure_nested_boundaries.csv"))?;
        written.push("figure_nested_boundaries.csv".to_string());
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn sci_matches_c_printf() {
        assert_eq!(sci(0.0), "0.000000000000e+00");
        assert_eq!(sci(1.0), "1.000000000000e+00");
        assert_eq!(sci(0.125), "1.250000000000e-01");
        assert_eq!(sci(-12345.678), "-1.234567800000e+04");
        assert_eq!(sci(1e-300), "1.000000000000e-300");
        assert_eq!(sci(f64::NAN), "nan");
    }

    #[test]
    fn json_floats_and_ints() {
        let v = json!({"b": 1.5, "a": [1, 2.0], "s": "x\"y", "e": {}});
        assert_eq!(
            render_json(&v),
            "{\n  \"a\": [\n    1,\n    2.000000000000e+00\n  ],\n  \"b\": 1.500000000000e+00,\n  \"e\": {},\n  \"s\": \"x\\\"y\"\n}\n"
        );
    }

    #[test]
    fn stride_keeps_last_node() {
        assert_eq!(strided(10, 4), vec![0, 4, 8, 10]);
        assert_eq!(strided(8, 4), vec![0, 4, 8]);
        assert_eq!(strided(3, 0), vec![0, 1, 2, 3]);
    }
}

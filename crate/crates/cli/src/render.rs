//! Plain-text rendering of reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use serde_json::Value;

use crate::report::RunReport;

fn int(v: &Value, key: &str) -> Option<i64> {
    v.get(key).and_then(Value::as_i64)
}

/// Rows `(q, k)` against columns `i`.
fn grading_table(blocks: &[Value]) -> String {
    let mut cells: BTreeMap<(i64, Option<i64>), BTreeMap<i64, i64>> = BTreeMap::new();
    let mut cols = BTreeSet::new();
    for b in blocks {
        let (Some(i), Some(q), Some(d)) = (int(b, "i"), int(b, "q"), int(b, "dim")) else { continue };
        cols.insert(i);
        *cells.entry((q, int(b, "k"))).or_default().entry(i).or_default() += d;
    }
    let annular = cells.keys().any(|k| k.1.is_some());
    let mut out = String::new();
    let head = if annular { "    q    k |" } else { "    q |" };
    write!(out, "{head}").unwrap();
    for c in &cols {
        write!(out, " {:>4}", format!("t{c}")).unwrap();
    }
    out.push('\n');
    out.push_str(&"-".repeat(head.len() + 5 * cols.len()));
    out.push('\n');
    for ((q, k), row) in cells.iter().rev() {
        match k {
            Some(k) if annular => write!(out, "{q:>5} {k:>4} |").unwrap(),
            _ if annular => write!(out, "{q:>5}    - |").unwrap(),
            _ => write!(out, "{q:>5} |").unwrap(),
        }
        for c in &cols {
            match row.get(c) {
                Some(d) => write!(out, " {d:>4}").unwrap(),
                None => write!(out, " {:>4}", ".").unwrap(),
            }
        }
        out.push('\n');
    }
    out
}

fn inequality_rows(rows: &[Value]) -> String {
    let mut out = String::new();
    for r in rows {
        let kind = r.get("kind").and_then(Value::as_str).unwrap_or("?");
        let mut at = Vec::new();
        for key in ["i", "q", "k"] {
            if let Some(x) = int(r, key) {
                at.push(format!("{key}={x}"));
            }
        }
        let holds = r.get("holds").and_then(Value::as_bool).unwrap_or(false);
        writeln!(
            out,
            "{kind:<20} {:<18} {:>4} >= {:<4} {}",
            at.join(" "),
            int(r, "left").unwrap_or(0),
            int(r, "right").unwrap_or(0),
            if holds { "ok" } else { "VIOLATED" }
        )
        .unwrap();
    }
    out
}

fn borel_rows(blocks: &[Value]) -> String {
    let mut out = String::new();
    for b in blocks {
        let k = int(b, "k").map(|k| format!(" k={k}")).unwrap_or_default();
        let dims: Vec<String> = b["dims"].as_array().into_iter().flatten().map(|d| d.to_string()).collect();
        let stable = b.get("stable").filter(|s| !s.is_null()).map(|s| s.to_string()).unwrap_or_else(|| "-".into());
        writeln!(out, "q={}{k:<6} stable {stable:>3} | {}", int(b, "q").unwrap_or(0), dims.join(" ")).unwrap();
    }
    out
}

pub fn render(r: &RunReport) -> String {
    let mut out = String::new();
    writeln!(out, "command  {}", r.command.join(" ")).unwrap();
    writeln!(out, "digest   {}", r.input_digest).unwrap();
    let verdict = serde_json::to_value(r.verdict).unwrap();
    writeln!(out, "verdict  {}", verdict.as_str().unwrap_or("?")).unwrap();
    writeln!(out, "time     {:.1} ms", r.wall_time_ms).unwrap();
    out.push('\n');
    let res = &r.result;
    if let Some(p) = res.get("polynomial").and_then(Value::as_str) {
        writeln!(out, "{p}\n").unwrap();
    }
    if let Some(blocks) = res.get("blocks").and_then(Value::as_array).filter(|b| b.first().is_some_and(|x| x.get("dim").is_some())) {
        out.push_str(&grading_table(blocks));
    } else if let Some(blocks) = res.get("blocks").and_then(Value::as_array).filter(|b| b.first().is_some_and(|x| x.get("dims").is_some())) {
        out.push_str(&borel_rows(blocks));
    } else if let Some(rows) = res.get("rows").and_then(Value::as_array).filter(|r| r.first().is_some_and(|x| x.get("holds").is_some())) {
        out.push_str(&inequality_rows(rows));
    } else if let Some(parts) = res.get("parts").and_then(Value::as_array) {
        for p in parts {
            writeln!(out, "s = {}  (dimension {})", int(p, "s").unwrap_or(0), int(p, "dim").unwrap_or(0)).unwrap();
            if let Some(h) = p.get("delta").and_then(Value::as_array) {
                if !h.is_empty() {
                    out.push_str(&grading_table(h));
                }
            }
            out.push('\n');
        }
    } else {
        out.push_str(&serde_json::to_string_pretty(res).unwrap());
        out.push('\n');
    }
    out
}

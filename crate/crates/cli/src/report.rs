//! Report assembly and the two emitters. Reports are plain JSON values whose
//! object keys serialize sorted, so identical runs give identical bytes.

use pqset_core::SymExpr;
use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: &str = "1";

pub fn expr(e: &SymExpr) -> Value {
    json!({ "text": e.to_string(), "latex": e.to_latex(), "monomials": e.len() })
}

pub fn verdict(ok: bool) -> Value {
    Value::String(if ok { "verified" } else { "residual-nonzero" }.into())
}

pub fn to_json(report: &Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports are plain JSON");
    s.push('\n');
    s
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\textbackslash{}"),
            '{' | '}' | '_' | '%' | '&' | '#' | '$' => {
                out.push('\\');
                out.push(c);
            }
            '^' => out.push_str("\\^{}"),
            '~' => out.push_str("\\~{}"),
            _ => out.push(c),
        }
    }
    out
}

fn is_expr(m: &Map<String, Value>) -> bool {
    m.contains_key("latex") && m.contains_key("text")
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => escape(s),
        Value::Null => "--".into(),
        Value::Object(m) if is_expr(m) => format!("${}$", m["latex"].as_str().unwrap_or_default()),
        other => escape(&other.to_string()),
    }
}

fn render(out: &mut String, key: &str, v: &Value, depth: usize) {
    let heading = ["section*", "subsection*", "subsubsection*", "paragraph*"][depth.min(3)];
    match v {
        Value::Object(m) if is_expr(m) => {
            out.push_str(&format!("\\{heading}{{{}}}\n", escape(key)));
            let body = m["latex"].as_str().unwrap_or_default();
            out.push_str(&format!("\\begin{{dmath*}}\n{body}\n\\end{{dmath*}}\n"));
        }
        Value::Object(m) => {
            out.push_str(&format!("\\{heading}{{{}}}\n", escape(key)));
            for (k, v) in m {
                render(out, k, v, depth + 1);
            }
        }
        Value::Array(rows) if rows.iter().all(|r| r.is_object()) && !rows.is_empty() => {
            let cols: Vec<&String> = rows[0].as_object().expect("checked").keys().collect();
            out.push_str(&format!("\\{heading}{{{}}}\n", escape(key)));
            out.push_str(&format!("\\begin{{tabular}}{{{}}}\n", "l".repeat(cols.len())));
            let head: Vec<String> = cols.iter().map(|c| escape(c)).collect();
            out.push_str(&format!("{} \\\\ \\hline\n", head.join(" & ")));
            for r in rows {
                let cells: Vec<String> =
                    cols.iter().map(|c| scalar(r.get(c.as_str()).unwrap_or(&Value::Null))).collect();
                out.push_str(&format!("{} \\\\\n", cells.join(" & ")));
            }
            out.push_str("\\end{tabular}\n");
        }
        other => out.push_str(&format!("\\noindent\\textbf{{{}}}: {}\\\\\n", escape(key), scalar(other))),
    }
}

/// A standalone document: every expression becomes a display, every table a tabular.
pub fn to_latex(report: &Value) -> String {
    let mut out = String::from("\\documentclass{article}\n\\usepackage{amsmath,amssymb,breqn}\n\\begin{document}\n");
    if let Value::Object(m) = report {
        for (k, v) in m {
            render(&mut out, k, v, 0);
        }
    }
    out.push_str("\\end{document}\n");
    out
}

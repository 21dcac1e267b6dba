//! Structured-text and CSV reports with a fixed layout.

use crate::poly::Poly;
use crate::scalar::{fmt_f64, render_c64, render_q, Gq, C64, Q};
use num_traits::Zero;
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(Format::Text),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format {other:?}; expected text or csv")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub command: String,
    pub entries: Vec<(String, String)>,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
}

pub fn f(x: f64) -> String {
    fmt_f64(x)
}

pub fn c(z: C64) -> String {
    render_c64(z)
}

pub fn q(x: &Q) -> String {
    render_q(x)
}

pub fn gq(x: &Gq) -> String {
    if x.im.is_zero() {
        render_q(&x.re)
    } else {
        x.to_string()
    }
}

/// Terms as `c*t^a*tb^b`, ordered by exponent, joined by ` + `.
pub fn poly(p: &Poly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let names = ["t", "tb"];
    let terms: Vec<String> = p
        .terms
        .iter()
        .map(|(e, coef)| {
            let mut parts = vec![gq(coef)];
            for (k, &x) in e.iter().enumerate() {
                let name = names.get(k).map(|s| s.to_string()).unwrap_or_else(|| format!("x{k}"));
                match x {
                    0 => {}
                    1 => parts.push(name),
                    _ => parts.push(format!("{name}^{x}")),
                }
            }
            parts.join("*")
        })
        .collect();
    terms.join(" + ")
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report { command: command.to_string(), entries: Vec::new(), tables: Vec::new(), checks: Vec::new() }
    }

    pub fn entry(&mut self, key: &str, value: impl Into<String>) {
        self.entries.push((key.to_string(), value.into()));
    }

    pub fn table(&mut self, name: &str, columns: &[&str]) -> &mut Table {
        self.tables.push(Table { name: name.to_string(), columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() });
        self.tables.last_mut().expect("just pushed")
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.to_string(), passed, detail: detail.into() });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.render_text(),
            Format::Csv => self.render_csv(),
        }
    }

    fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command = {}", self.command);
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        for t in &self.tables {
            let _ = writeln!(out, "\n[{}]", t.name);
            let widths: Vec<usize> = (0..t.columns.len())
                .map(|j| t.rows.iter().map(|r| r[j].chars().count()).chain(std::iter::once(t.columns[j].chars().count())).max().unwrap_or(0))
                .collect();
            let line = |cells: &[String]| -> String {
                let padded: Vec<String> = cells.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
                padded.join("  ").trim_end().to_string()
            };
            let _ = writeln!(out, "{}", line(&t.columns));
            for r in &t.rows {
                let _ = writeln!(out, "{}", line(r));
            }
        }
        if !self.checks.is_empty() {
            let _ = writeln!(out, "\n[checks]");
            for ch in &self.checks {
                let verdict = if ch.passed { "pass" } else { "fail" };
                if ch.detail.is_empty() {
                    let _ = writeln!(out, "{} = {verdict}", ch.name);
                } else {
                    let _ = writeln!(out, "{} = {verdict} ({})", ch.name, ch.detail);
                }
            }
            let _ = writeln!(out, "status = {}", if self.passed() { "pass" } else { "fail" });
        }
        out
    }

    fn render_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().flexible(true).terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let mut rec = |fields: Vec<&str>| w.write_record(fields).expect("writing to memory");
        rec(vec!["command", &self.command]);
        for (k, v) in &self.entries {
            rec(vec!["entry", k, v]);
        }
        for t in &self.tables {
            rec(vec!["table", &t.name]);
            rec(t.columns.iter().map(String::as_str).collect());
            for r in &t.rows {
                rec(r.iter().map(String::as_str).collect());
            }
        }
        for ch in &self.checks {
            rec(vec!["check", &ch.name, if ch.passed { "pass" } else { "fail" }, &ch.detail]);
        }
        if !self.checks.is_empty() {
            rec(vec!["status", if self.passed() { "pass" } else { "fail" }]);
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf8 fields")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q as rat;

    #[test]
    fn empty_report_is_header_only() {
        let r = Report::new("periods");
        assert_eq!(r.render(Format::Text), "command = periods\n");
        assert_eq!(r.render(Format::Csv), "command,periods\n");
        let mut t = Report::new("x");
        t.table("rows", &["a", "b"]);
        assert_eq!(t.render(Format::Text), "command = x\n\n[rows]\na  b\n");
    }

    #[test]
    fn rationals_render_as_p_over_q() {
        assert_eq!(q(&rat(-6, 4)), "-3/2");
        assert_eq!(q(&rat(8, 4)), "2");
    }

    #[test]
    fn csv_quotes_complex_cells() {
        let mut r = Report::new("x");
        r.table("t", &["z"]).row(vec![c(C64::new(1.0, -0.5))]);
        r.check("ok", true, "");
        let s = r.render(Format::Csv);
        assert!(s.contains("\"(1.000000000000e0,-5.000000000000e-1)\""), "{s}");
        assert!(s.ends_with("status,pass\n"));
    }

    #[test]
    fn polynomials_render_termwise() {
        let p = Poly::monomial(2, 8, vec![1, 2], Gq::real(rat(-1, 2))).add(&Poly::monomial(2, 8, vec![0, 0], Gq::real(rat(3, 1))));
        assert_eq!(poly(&p), "3 + -1/2*t*tb^2");
        assert_eq!(poly(&Poly::zero(2, 8)), "0");
    }

    #[test]
    fn status_reflects_checks() {
        let mut r = Report::new("x");
        r.check("a", true, "");
        r.check("b", false, "r = 1");
        assert!(!r.passed());
        assert!(r.render(Format::Text).ends_with("b = fail (r = 1)\nstatus = fail\n"));
    }
}

//! Plain tables rendered as CSV (with a config-hash header comment) and as
//! aligned markdown.

use std::fmt::Write as _;

/// A table cell: CSV and markdown may spell it differently (verdict
/// symbols are ASCII names in CSV).
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub csv: String,
    pub markdown: String,
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Self {
        let s = s.into();
        Self { csv: s.clone(), markdown: s }
    }

    pub fn pair(csv: impl Into<String>, markdown: impl Into<String>) -> Self {
        Self { csv: csv.into(), markdown: markdown.into() }
    }

    pub fn empty() -> Self {
        Self::text("")
    }

    pub fn value(v: f64) -> Self {
        Self::text(format_value(v))
    }

    pub fn rate(r: f64) -> Self {
        Self::text(format_rate(r))
    }
}

pub fn format_value(v: f64) -> String {
    format!("{v:.4e}")
}

pub fn format_rate(r: f64) -> String {
    // avoid a "-0.00" that differs from "0.00" only in the sign of zero
    let s = format!("{r:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub title: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(title: impl Into<String>, header: Vec<String>) -> Self {
        Self { title: title.into(), header, rows: Vec::new(), notes: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// CSV with `#` comment lines for the hash, title and notes.
    pub fn to_csv(&self, hash: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# config-hash: {hash}");
        let _ = writeln!(out, "# {}", self.title);
        for n in &self.notes {
            let _ = writeln!(out, "# {n}");
        }
        out.push_str(&self.header.iter().map(|h| csv_field(h)).collect::<Vec<_>>().join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(|c| csv_field(&c.csv)).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    /// Markdown table with padded columns.
    pub fn to_markdown(&self, hash: &str) -> String {
        let cols = self.header.len();
        let mut width = vec![3; cols];
        let len = |s: &str| s.chars().count();
        for (i, h) in self.header.iter().enumerate() {
            width[i] = width[i].max(len(h));
        }
        for row in &self.rows {
            for (i, c) in row.iter().enumerate() {
                width[i] = width[i].max(len(&c.markdown));
            }
        }
        let line = |cells: Vec<&str>| {
            let padded: Vec<String> = cells
                .iter()
                .enumerate()
                .map(|(i, c)| format!("{c}{}", " ".repeat(width[i] - len(c))))
                .collect();
            format!("| {} |\n", padded.join(" | "))
        };
        let mut out = String::new();
        let _ = writeln!(out, "### {}\n", self.title);
        let _ = writeln!(out, "<!-- config-hash: {hash} -->\n");
        out.push_str(&line(self.header.iter().map(String::as_str).collect()));
        let rule: Vec<String> = width.iter().map(|w| "-".repeat(*w)).collect();
        out.push_str(&format!("|-{}-|\n", rule.join("-|-")));
        for row in &self.rows {
            out.push_str(&line(row.iter().map(|c| c.markdown.as_str()).collect()));
        }
        if !self.notes.is_empty() {
            out.push('\n');
            for n in &self.notes {
                let _ = writeln!(out, "{n}  ");
            }
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

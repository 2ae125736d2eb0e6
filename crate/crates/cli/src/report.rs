//! Machine-readable run reports and data tables.
//!
//! Reports are deterministic byte-for-byte for fixed inputs and fixed
//! node/grid counts, with the sole exception of the `wall_ms` timing field
//! required by the JSON schema.

use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

/// One verification check. `method` records the provenance of the measured
/// number (formula / oracle / quadrature / stencil).
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub method: String,
    pub measured: f64,
    pub expected: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub params: serde_json::Value,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub wall_ms: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl RunReport {
    pub fn new(command: &str, params: serde_json::Value) -> Self {
        RunReport {
            command: command.to_string(),
            params,
            checks: Vec::new(),
            pass: true,
            wall_ms: 0,
            notes: Vec::new(),
        }
    }

    /// |measured - expected| <= tol.
    pub fn check(&mut self, name: &str, method: &str, measured: f64, expected: f64, tol: f64) {
        let pass = (measured - expected).abs() <= tol && measured.is_finite();
        self.push(name, method, measured, expected, tol, pass);
    }

    /// measured >= bound (for lower-bound style checks such as the negative
    /// control); `expected` records the bound, `tol` is 0.
    pub fn check_at_least(&mut self, name: &str, method: &str, measured: f64, bound: f64) {
        let pass = measured >= bound && measured.is_finite();
        self.push(name, method, measured, bound, 0.0, pass);
    }

    fn push(&mut self, name: &str, method: &str, measured: f64, expected: f64, tol: f64, pass: bool) {
        self.pass &= pass;
        self.checks.push(Check {
            name: name.to_string(),
            method: method.to_string(),
            measured,
            expected,
            tol,
            pass,
        });
    }

    pub fn note(&mut self, text: String) {
        self.notes.push(text);
    }

    pub fn merge(&mut self, prefix: &str, other: RunReport) {
        for mut c in other.checks {
            c.name = format!("{}: {}", prefix, c.name);
            self.pass &= c.pass;
            self.checks.push(c);
        }
        for n in other.notes {
            self.notes.push(format!("{}: {}", prefix, n));
        }
    }

    pub fn render_human(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {}", self.command);
        let _ = writeln!(s, "# params: {}", self.params);
        let _ = writeln!(
            s,
            "{:<64} {:>24} {:>24} {:>10} {:>8} {}",
            "check", "measured", "expected", "tol", "method", "pass"
        );
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{:<64} {:>24} {:>24} {:>10.1e} {:>8} {}",
                c.name,
                format_sig(c.measured),
                format_sig(c.expected),
                c.tol,
                c.method,
                if c.pass { "PASS" } else { "FAIL" }
            );
        }
        for n in &self.notes {
            let _ = writeln!(s, "# note: {}", n);
        }
        let _ = writeln!(
            s,
            "# overall: {} ({} checks, {} ms)",
            if self.pass { "PASS" } else { "FAIL" },
            self.checks.len(),
            self.wall_ms
        );
        s
    }

    pub fn render_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    /// CSV rows: name,method,measured,expected,tol,pass.
    pub fn render_csv(&self) -> String {
        let mut s = String::from("name,method,measured,expected,tol,pass\n");
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                c.name.replace(',', ";"),
                c.method,
                format_sig(c.measured),
                format_sig(c.expected),
                format_sig(c.tol),
                c.pass
            );
        }
        s
    }
}

/// A value in a data table.
#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => format_sig(*v),
            Cell::Text(t) => t.clone(),
        }
    }
}

/// 17 significant digits: round-trip exact for f64.
pub fn format_sig(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        // integral values stay readable
        format!("{}", v)
    } else {
        format!("{:.16e}", v)
    }
}

#[derive(Debug, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }

    pub fn render_human(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.columns.join("  "));
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Int(v) => v.to_string(),
                    Cell::Num(v) => format!("{:.10e}", v),
                    Cell::Text(t) => t.clone(),
                })
                .collect();
            let _ = writeln!(s, "{}", cells.join("  "));
        }
        s
    }

    pub fn render_json(&self) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = serde_json::Map::new();
                for (name, cell) in self.columns.iter().zip(row) {
                    let v = match cell {
                        Cell::Int(i) => serde_json::json!(i),
                        Cell::Num(x) => serde_json::json!(x),
                        Cell::Text(t) => serde_json::json!(t),
                    };
                    obj.insert(name.clone(), v);
                }
                serde_json::Value::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&rows).expect("table serialization");
        s.push('\n');
        s
    }

    /// Whitespace-separated columns with a `#`-prefixed header, suitable
    /// for generic plotting tools.
    pub fn render_plot(&self) -> String {
        let mut s = format!("# {}\n", self.columns.join(" "));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            s.push_str(&cells.join(" "));
            s.push('\n');
        }
        s
    }
}

/// Write plot-ready data; refuses an empty result set (no file is created).
pub fn emit_plot_data(table: &Table, path: &Path) -> std::io::Result<()> {
    if table.is_empty() {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidInput,
            "empty result set: no plot data written",
        ));
    }
    std::fs::write(path, table.render_plot())
}

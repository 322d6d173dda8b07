//! Deterministic CSV datasets.
//!
//! Layout: `# key=value` metadata lines, then a `# digest=sha256:<hex>` line
//! covering the data section (header row plus rows), then the data section.
//! Floats are written with 17 significant digits, lines end in `\n`.

use std::fmt::{self, Display, Write as _};

use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
}

impl Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Float(v) if v.is_finite() => write!(f, "{v:.16e}"),
            Value::Float(v) if v.is_nan() => f.write_str("nan"),
            Value::Float(v) if *v > 0.0 => f.write_str("inf"),
            Value::Float(_) => f.write_str("-inf"),
        }
    }
}

impl Value {
    pub fn as_f64(self) -> f64 {
        match self {
            Value::Int(v) => v as f64,
            Value::Float(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    metadata: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<Value>>,
}

impl Dataset {
    pub fn new<I, S>(columns: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            metadata: Vec::new(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    /// Appends a metadata line. Newlines in values are replaced by spaces.
    pub fn meta(&mut self, key: &str, value: impl Display) -> &mut Self {
        let value = value.to_string().replace(['\n', '\r'], " ");
        self.metadata.push((key.to_owned(), value));
        self
    }

    pub fn push<I: IntoIterator<Item = Value>>(&mut self, row: I) {
        let row: Vec<Value> = row.into_iter().collect();
        assert_eq!(row.len(), self.columns.len(), "row width must match header");
        self.rows.push(row);
    }

    /// Adds a column computed from each existing row.
    pub fn add_column(&mut self, name: &str, f: impl Fn(&[Value]) -> Value) {
        for row in &mut self.rows {
            let v = f(row);
            row.push(v);
        }
        self.columns.push(name.to_owned());
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    pub fn metadata(&self) -> &[(String, String)] {
        &self.metadata
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i].as_f64()).collect())
    }

    pub fn data_section(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for v in row {
                if !first {
                    out.push(',');
                }
                first = false;
                write!(out, "{v}").expect("writing to String");
            }
            out.push('\n');
        }
        out
    }

    pub fn digest(&self) -> String {
        sha256_hex(self.data_section().as_bytes())
    }

    pub fn to_csv(&self) -> String {
        let data = self.data_section();
        let mut out = String::new();
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}={v}").expect("writing to String");
        }
        writeln!(out, "# digest=sha256:{}", sha256_hex(data.as_bytes())).expect("writing to String");
        out.push_str(&data);
        out
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        write!(s, "{b:02x}").expect("writing to String");
        s
    })
}

/// Returns the data section of a CSV produced by [`Dataset::to_csv`]
/// (everything after the comment lines).
pub fn strip_comments(csv: &str) -> String {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .fold(String::new(), |mut s, l| {
            s.push_str(l);
            s.push('\n');
            s
        })
}

//! Fixed-point numeric output shared by every subcommand.

use std::fmt::Write as _;

/// Twelve digits after the decimal point. Negative zero prints as zero so
/// outputs are stable across platforms.
pub fn num(x: f64) -> String {
    let s = format!("{x:.12}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

/// Column header for an outcome probability, e.g. `p(1)` or `p(-0.5)`.
pub fn outcome_label(outcome: f64) -> String {
    format!("p({outcome})")
}

/// Accumulates LF-terminated CSV rows.
#[derive(Default)]
pub struct Csv {
    out: String,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut csv = Self::default();
        csv.row(header);
        csv
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) {
        for (k, f) in fields.iter().enumerate() {
            if k > 0 {
                self.out.push(',');
            }
            self.out.push_str(f.as_ref());
        }
        self.out.push('\n');
    }

    pub fn line(&mut self, text: &str) {
        let _ = writeln!(self.out, "{text}");
    }

    pub fn finish(self) -> String {
        self.out
    }
}

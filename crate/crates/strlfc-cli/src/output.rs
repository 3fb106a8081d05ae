//! Output plumbing: canonical float formatting, CSV with '#' metadata lines,
//! and the JSON wrapper. Everything here is a pure function of its inputs so
//! repeated runs produce byte-identical files.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Formats a float with 12 significant digits.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    format!("{x:.11e}")
}

/// Rounds a value through its CSV rendering, so plots are pure functions of
/// the CSV data.
pub fn csv_precision(x: f64) -> f64 {
    fmt_float(x).parse().expect("own formatting parses")
}

/// Metadata stamped at the top of every output file.
#[derive(Clone, Debug, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    /// Canonical `key=value` rendering of the effective configuration.
    pub config: String,
    pub config_hash: String,
}

impl Meta {
    pub fn new(command: &'static str, seed: u64, settings: &[(&str, String)]) -> Self {
        let mut pairs: Vec<String> = settings.iter().map(|(k, v)| format!("{k}={v}")).collect();
        pairs.sort();
        let config = pairs.join(" ");
        let digest = Sha256::digest(config.as_bytes());
        let config_hash = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
        Self {
            tool: "strlfc",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            config,
            config_hash,
        }
    }

    fn comment_lines(&self) -> String {
        format!(
            "# {} {}\n# command: {}\n# seed: {}\n# config: {}\n# config_hash: {}\n",
            self.tool, self.version, self.command, self.seed, self.config, self.config_hash
        )
    }
}

/// CSV builder: metadata comments, a header row, then data rows.
pub struct Csv {
    buf: String,
    columns: usize,
}

impl Csv {
    pub fn new(meta: &Meta, header: &[&str]) -> Self {
        let mut buf = meta.comment_lines();
        buf.push_str(&header.join(","));
        buf.push('\n');
        Self {
            buf,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.columns, "column count mismatch");
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

/// JSON wrapper: `{ "meta": ..., "rows": [...] }`, pretty-printed.
pub fn json_document<T: Serialize>(meta: &Meta, rows: &[T]) -> String {
    #[derive(Serialize)]
    struct Document<'a, T> {
        meta: &'a Meta,
        rows: &'a [T],
    }
    let mut out = serde_json::to_string_pretty(&Document { meta, rows }).expect("serializable rows");
    out.push('\n');
    out
}

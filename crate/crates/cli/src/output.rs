//! Writes results to a file or standard output with fixed number formatting.

use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use quasiprob::grid::{fmt_num, GridDensity};
use quasiprob::series::PowerSeries;
use quasiprob::wigner::WignerGrid;
use serde_json::json;

pub struct Sink {
    out: Option<PathBuf>,
    json: bool,
}

impl Sink {
    pub fn new(out: Option<PathBuf>, json: bool) -> Self {
        Sink { out, json }
    }

    fn write_bytes(&self, bytes: &[u8]) -> anyhow::Result<()> {
        match &self.out {
            Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(bytes)?;
                stdout.flush()?;
                Ok(())
            }
        }
    }

    pub fn raw(&self, text: &str) -> anyhow::Result<()> {
        self.write_bytes(text.as_bytes())
    }

    pub fn density(&self, d: &GridDensity) -> anyhow::Result<()> {
        if self.json {
            return self.raw(&(d.to_json()? + "\n"));
        }
        let mut buf = Vec::new();
        d.write_csv(&mut buf)?;
        self.write_bytes(&buf)
    }

    pub fn series(&self, s: &PowerSeries) -> anyhow::Result<()> {
        if self.json {
            return self.raw(&format!("{}\n", json!({ "coefficients": s.coeffs() })));
        }
        let mut buf = Vec::new();
        s.write_csv(&mut buf)?;
        self.write_bytes(&buf)
    }

    pub fn wigner(&self, w: &WignerGrid) -> anyhow::Result<()> {
        if self.json {
            let rows: Vec<&[f64]> = w.values().chunks(w.p_grid().len()).collect();
            let doc = json!({ "x": w.x_grid().points(), "p": w.p_grid().points(), "values": rows });
            return self.raw(&format!("{doc}\n"));
        }
        let mut buf = Vec::new();
        w.write_csv(&mut buf)?;
        self.write_bytes(&buf)
    }

    /// Two-column table of labels and numbers.
    pub fn labelled(&self, header: (&str, &str), rows: &[(String, f64)]) -> anyhow::Result<()> {
        let text: Vec<(String, String)> = rows.iter().map(|(k, v)| (k.clone(), fmt_num(*v))).collect();
        if self.json {
            let doc: serde_json::Map<String, serde_json::Value> = rows.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
            return self.raw(&format!("{}\n", serde_json::Value::Object(doc)));
        }
        self.csv(header, &text)
    }

    /// Two-column table of labels and preformatted values.
    pub fn labelled_text(&self, header: (&str, &str), rows: &[(String, String)]) -> anyhow::Result<()> {
        if self.json {
            let doc: serde_json::Map<String, serde_json::Value> = rows.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
            return self.raw(&format!("{}\n", serde_json::Value::Object(doc)));
        }
        self.csv(header, rows)
    }

    fn csv(&self, header: (&str, &str), rows: &[(String, String)]) -> anyhow::Result<()> {
        let mut text = format!("{},{}\n", header.0, header.1);
        for (k, v) in rows {
            text.push_str(&format!("{k},{v}\n"));
        }
        self.raw(&text)
    }
}

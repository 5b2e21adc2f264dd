use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use qcsp_core::gadgets::Certificate;
use qcsp_core::QMat;
use serde_json::{json, Value};

/// JSON-lines sink; records are dropped when no `--report` path was given.
pub struct Report {
    out: Option<BufWriter<File>>,
}

impl Report {
    pub fn open(path: Option<&Path>) -> Result<Self> {
        let out = match path {
            Some(p) => Some(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
            None => None,
        };
        Ok(Report { out })
    }

    pub fn record(&mut self, value: Value) -> Result<()> {
        if let Some(w) = &mut self.out {
            serde_json::to_writer(&mut *w, &value)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn finish(self) -> Result<()> {
        if let Some(mut w) = self.out {
            w.flush()?;
        }
        Ok(())
    }
}

pub fn matrix(m: &QMat) -> Value {
    let rows: Vec<Vec<String>> =
        (0..m.rows()).map(|i| (0..m.cols()).map(|j| m[[i, j]].to_string()).collect()).collect();
    rows.into()
}

pub fn certificate(c: &Certificate) -> Value {
    json!({ "kind": c.kind.name(), "tags": c.tags, "detail": c.detail })
}

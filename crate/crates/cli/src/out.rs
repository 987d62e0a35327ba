//! Tabular output files. Every analysis writes TSV with a header row so the
//! results load directly into any plotting tool.

use anyhow::{Context, Result};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

pub fn write_tsv<I>(path: &Path, header: &str, rows: I) -> Result<()>
where
    I: IntoIterator<Item = String>,
{
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).ok();
    }
    let mut w = BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    writeln!(w, "{header}")?;
    for row in rows {
        writeln!(w, "{row}")?;
    }
    w.flush()?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Format an optional value; gaps become "na".
pub fn opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => "na".to_string(),
    }
}

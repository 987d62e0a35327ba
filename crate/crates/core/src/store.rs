//! Persistence for runs: manifests, gradient snapshots, avalanche records
//! and accuracy traces, plus ingestion of externally produced snapshots.
//!
//! One directory per run:
//! - `manifest.json` - run identity and provenance (schema: [`RunManifest`])
//! - `avalanches.tsv` - one row per probed batch
//! - `accuracy.tsv` - one row per evaluation epoch
//! - `snapshots/` - one binary gradient snapshot per stored (epoch, batch)
//!
//! Snapshots are little-endian regardless of platform: magic `TDUG`,
//! version byte, u64 N, u32 epoch, u32 batch, then N f32 payload values.

use crate::train::RunManifest;
use serde::{Deserialize, Serialize};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"TDUG";
pub const SNAPSHOT_VERSION: u8 = 1;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const RECORDS_FILE: &str = "avalanches.tsv";
pub const TRACE_FILE: &str = "accuracy.tsv";
pub const SNAPSHOT_DIR: &str = "snapshots";
/// Per-evaluation FNV digests of the parameter bits (trajectory identity).
pub const PARAM_DIGESTS_FILE: &str = "param_digests.tsv";
/// Final f32 master parameters, stored in the snapshot container format.
pub const PARAMS_FINAL_FILE: &str = "params_final.tdug";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("i/o on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: bad magic, not a TDUG snapshot")]
    BadMagic { path: PathBuf },
    #[error("{path}: unsupported snapshot version {version}")]
    BadVersion { path: PathBuf, version: u8 },
    #[error("{path}: truncated payload (expected {expected} values, got {got})")]
    Truncated { path: PathBuf, expected: u64, got: u64 },
    #[error("{path}: non-finite value at index {index}")]
    NonFinite { path: PathBuf, index: usize },
    #[error("{path}: malformed row {line}: {reason}")]
    MalformedRow { path: PathBuf, line: usize, reason: String },
    #[error("{path}: keys not strictly increasing at line {line}")]
    NonMonotone { path: PathBuf, line: usize },
    #[error("{path}: accuracy out of [0,1] at line {line}")]
    AccuracyRange { path: PathBuf, line: usize },
    #[error("manifest {path}: {reason}")]
    Manifest { path: PathBuf, reason: String },
    #[error("ingest: no snapshot files found under {0}")]
    NoSnapshots(PathBuf),
    #[error("ingest: inconsistent N across snapshots: {0}")]
    InconsistentN(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

// ---------------------------------------------------------------------------
// Gradient snapshots
// ---------------------------------------------------------------------------

/// One flattened gradient tagged with its (epoch, batch) identity.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSnapshot {
    pub epoch: u32,
    pub batch: u32,
    pub values: Vec<f32>,
}

impl GradientSnapshot {
    /// Canonical filename for a snapshot within a run's snapshot dir.
    pub fn file_name(epoch: u32, batch: u32) -> String {
        format!("epoch{epoch:07}_batch{batch:05}.tdug")
    }
}

pub fn write_snapshot(path: &Path, snap: &GradientSnapshot) -> Result<(), StoreError> {
    if let Some(i) = snap.values.iter().position(|v| !v.is_finite()) {
        return Err(StoreError::NonFinite { path: path.to_path_buf(), index: i });
    }
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let res = (|| {
        w.write_all(SNAPSHOT_MAGIC)?;
        w.write_all(&[SNAPSHOT_VERSION])?;
        w.write_all(&(snap.values.len() as u64).to_le_bytes())?;
        w.write_all(&snap.epoch.to_le_bytes())?;
        w.write_all(&snap.batch.to_le_bytes())?;
        for v in &snap.values {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()
    })();
    res.map_err(io_err(path))
}

pub fn read_snapshot(path: &Path) -> Result<GradientSnapshot, StoreError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut r = BufReader::new(file);
    let header = read_snapshot_header(&mut r, path)?;
    let mut values = Vec::with_capacity(header.n as usize);
    let mut buf = [0u8; 4];
    for i in 0..header.n {
        r.read_exact(&mut buf).map_err(|_| StoreError::Truncated {
            path: path.to_path_buf(),
            expected: header.n,
            got: i,
        })?;
        let v = f32::from_le_bytes(buf);
        if !v.is_finite() {
            return Err(StoreError::NonFinite { path: path.to_path_buf(), index: i as usize });
        }
        values.push(v);
    }
    Ok(GradientSnapshot { epoch: header.epoch, batch: header.batch, values })
}

/// Header of a snapshot file, readable without loading the payload.
#[derive(Debug, Clone, Copy)]
pub struct SnapshotHeader {
    pub n: u64,
    pub epoch: u32,
    pub batch: u32,
}

pub fn read_snapshot_header_only(path: &Path) -> Result<SnapshotHeader, StoreError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut r = BufReader::new(file);
    read_snapshot_header(&mut r, path)
}

fn read_snapshot_header(r: &mut impl Read, path: &Path) -> Result<SnapshotHeader, StoreError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| StoreError::BadMagic { path: path.to_path_buf() })?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(StoreError::BadMagic { path: path.to_path_buf() });
    }
    let mut version = [0u8; 1];
    r.read_exact(&mut version).map_err(|_| StoreError::BadMagic { path: path.to_path_buf() })?;
    if version[0] != SNAPSHOT_VERSION {
        return Err(StoreError::BadVersion { path: path.to_path_buf(), version: version[0] });
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8).map_err(|_| StoreError::Truncated {
        path: path.to_path_buf(),
        expected: 0,
        got: 0,
    })?;
    let n = u64::from_le_bytes(b8);
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4).map_err(|_| StoreError::Truncated {
        path: path.to_path_buf(),
        expected: n,
        got: 0,
    })?;
    let epoch = u32::from_le_bytes(b4);
    r.read_exact(&mut b4).map_err(|_| StoreError::Truncated {
        path: path.to_path_buf(),
        expected: n,
        got: 0,
    })?;
    let batch = u32::from_le_bytes(b4);
    Ok(SnapshotHeader { n, epoch, batch })
}

// ---------------------------------------------------------------------------
// Avalanche records
// ---------------------------------------------------------------------------

/// Cascade outcome of one probed batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvalancheRecord {
    pub run_id: String,
    pub epoch: u32,
    pub batch: u32,
    pub size: u64,
    pub iterations: u32,
    pub truncated: bool,
    pub rotation_cos: f64,
}

const RECORD_HEADER: &str = "run_id\tepoch\tbatch\tsize\titerations\ttruncated\trotation_cos";

/// Streaming writer that enforces the monotone (epoch, batch) key order.
pub struct RecordWriter {
    w: BufWriter<File>,
    path: PathBuf,
    last_key: Option<(u32, u32)>,
    rows: usize,
}

impl RecordWriter {
    pub fn create(path: &Path) -> Result<Self, StoreError> {
        let file = File::create(path).map_err(io_err(path))?;
        let mut w = BufWriter::new(file);
        writeln!(w, "{RECORD_HEADER}").map_err(io_err(path))?;
        Ok(RecordWriter { w, path: path.to_path_buf(), last_key: None, rows: 0 })
    }

    pub fn append(&mut self, rec: &AvalancheRecord) -> Result<(), StoreError> {
        let key = (rec.epoch, rec.batch);
        if let Some(last) = self.last_key {
            if key <= last {
                return Err(StoreError::NonMonotone { path: self.path.clone(), line: self.rows + 2 });
            }
        }
        self.last_key = Some(key);
        self.rows += 1;
        writeln!(
            self.w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            rec.run_id, rec.epoch, rec.batch, rec.size, rec.iterations, rec.truncated, rec.rotation_cos
        )
        .map_err(io_err(&self.path))
    }

    pub fn finish(mut self) -> Result<(), StoreError> {
        self.w.flush().map_err(io_err(&self.path))
    }
}

pub fn write_avalanche_records(path: &Path, records: &[AvalancheRecord]) -> Result<(), StoreError> {
    let mut w = RecordWriter::create(path)?;
    for rec in records {
        w.append(rec)?;
    }
    w.finish()
}

pub fn read_avalanche_records(path: &Path) -> Result<Vec<AvalancheRecord>, StoreError> {
    let file = File::open(path).map_err(io_err(path))?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    let mut last_key: Option<(u32, u32)> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if idx == 0 {
            if line != RECORD_HEADER {
                return Err(StoreError::MalformedRow {
                    path: path.to_path_buf(),
                    line: 1,
                    reason: "missing or unexpected header row".into(),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let rec = parse_record_row(&line).map_err(|reason| StoreError::MalformedRow {
            path: path.to_path_buf(),
            line: idx + 1,
            reason,
        })?;
        let key = (rec.epoch, rec.batch);
        if let Some(last) = last_key {
            if key <= last {
                return Err(StoreError::NonMonotone { path: path.to_path_buf(), line: idx + 1 });
            }
        }
        last_key = Some(key);
        records.push(rec);
    }
    Ok(records)
}

fn parse_record_row(line: &str) -> Result<AvalancheRecord, String> {
    let mut it = line.split('\t');
    let mut next = |name: &str| it.next().ok_or_else(|| format!("missing column {name}"));
    let run_id = next("run_id")?.to_string();
    let epoch = next("epoch")?.parse().map_err(|e| format!("epoch: {e}"))?;
    let batch = next("batch")?.parse().map_err(|e| format!("batch: {e}"))?;
    let size = next("size")?.parse().map_err(|e| format!("size: {e}"))?;
    let iterations = next("iterations")?.parse().map_err(|e| format!("iterations: {e}"))?;
    let truncated = next("truncated")?.parse().map_err(|e| format!("truncated: {e}"))?;
    let rotation_cos = next("rotation_cos")?.parse().map_err(|e| format!("rotation_cos: {e}"))?;
    Ok(AvalancheRecord { run_id, epoch, batch, size, iterations, truncated, rotation_cos })
}

// ---------------------------------------------------------------------------
// Accuracy traces
// ---------------------------------------------------------------------------

/// One evaluation row. For XOR the test accuracy is the all-sample accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub epoch: u32,
    pub train_acc: f64,
    pub test_acc: f64,
    pub loss: f64,
}

const TRACE_HEADER: &str = "epoch\ttrain_acc\ttest_acc\tloss";

pub struct TraceWriter {
    w: BufWriter<File>,
    path: PathBuf,
    last_epoch: Option<u32>,
}

impl TraceWriter {
    pub fn create(path: &Path) -> Result<Self, StoreError> {
        let file = File::create(path).map_err(io_err(path))?;
        let mut w = BufWriter::new(file);
        writeln!(w, "{TRACE_HEADER}").map_err(io_err(path))?;
        Ok(TraceWriter { w, path: path.to_path_buf(), last_epoch: None })
    }

    pub fn append(&mut self, row: &TraceRow) -> Result<(), StoreError> {
        if let Some(last) = self.last_epoch {
            if row.epoch <= last {
                return Err(StoreError::NonMonotone { path: self.path.clone(), line: 0 });
            }
        }
        if !(0.0..=1.0).contains(&row.train_acc) || !(0.0..=1.0).contains(&row.test_acc) {
            return Err(StoreError::AccuracyRange { path: self.path.clone(), line: 0 });
        }
        self.last_epoch = Some(row.epoch);
        writeln!(self.w, "{}\t{}\t{}\t{}", row.epoch, row.train_acc, row.test_acc, row.loss)
            .map_err(io_err(&self.path))
    }

    pub fn finish(mut self) -> Result<(), StoreError> {
        self.w.flush().map_err(io_err(&self.path))
    }
}

pub fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<(), StoreError> {
    let mut w = TraceWriter::create(path)?;
    for row in rows {
        w.append(row)?;
    }
    w.finish()
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>, StoreError> {
    let file = File::open(path).map_err(io_err(path))?;
    let reader = BufReader::new(file);
    let mut rows = Vec::new();
    let mut last_epoch: Option<u32> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if idx == 0 {
            if line != TRACE_HEADER {
                return Err(StoreError::MalformedRow {
                    path: path.to_path_buf(),
                    line: 1,
                    reason: "missing or unexpected header row".into(),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let row = parse_trace_row(&line).map_err(|reason| StoreError::MalformedRow {
            path: path.to_path_buf(),
            line: idx + 1,
            reason,
        })?;
        if let Some(last) = last_epoch {
            if row.epoch <= last {
                return Err(StoreError::NonMonotone { path: path.to_path_buf(), line: idx + 1 });
            }
        }
        if !(0.0..=1.0).contains(&row.train_acc) || !(0.0..=1.0).contains(&row.test_acc) {
            return Err(StoreError::AccuracyRange { path: path.to_path_buf(), line: idx + 1 });
        }
        last_epoch = Some(row.epoch);
        rows.push(row);
    }
    Ok(rows)
}

fn parse_trace_row(line: &str) -> Result<TraceRow, String> {
    let mut it = line.split('\t');
    let mut next = |name: &str| it.next().ok_or_else(|| format!("missing column {name}"));
    Ok(TraceRow {
        epoch: next("epoch")?.parse().map_err(|e| format!("epoch: {e}"))?,
        train_acc: next("train_acc")?.parse().map_err(|e| format!("train_acc: {e}"))?,
        test_acc: next("test_acc")?.parse().map_err(|e| format!("test_acc: {e}"))?,
        loss: next("loss")?.parse().map_err(|e| format!("loss: {e}"))?,
    })
}

/// First recorded epoch whose test accuracy exceeds the threshold.
pub fn grok_epoch_from_trace(trace: &[TraceRow], threshold: f64) -> Option<u32> {
    trace.iter().find(|r| r.test_acc > threshold).map(|r| r.epoch)
}

// ---------------------------------------------------------------------------
// Manifests and run directories
// ---------------------------------------------------------------------------

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<(), StoreError> {
    let path = dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(manifest).map_err(|e| StoreError::Manifest {
        path: path.clone(),
        reason: e.to_string(),
    })?;
    fs::write(&path, json).map_err(io_err(&path))
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest, StoreError> {
    let path = dir.join(MANIFEST_FILE);
    let json = fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&json).map_err(|e| StoreError::Manifest { path, reason: e.to_string() })
}

/// Check that every path referenced by a manifest exists under `dir`.
pub fn check_manifest_paths(dir: &Path, manifest: &RunManifest) -> Result<(), StoreError> {
    let mut missing = Vec::new();
    let mut check = |rel: &str| {
        if !dir.join(rel).exists() {
            missing.push(rel.to_string());
        }
    };
    check(&manifest.avalanche_record_path);
    if let Some(trace) = &manifest.accuracy_trace_path {
        check(trace);
    }
    for snap in &manifest.snapshot_paths {
        check(snap);
    }
    if missing.is_empty() {
        Ok(())
    } else {
        Err(StoreError::Manifest {
            path: dir.join(MANIFEST_FILE),
            reason: format!("referenced paths missing: {}", missing.join(", ")),
        })
    }
}

// ---------------------------------------------------------------------------
// Ingestion of external snapshots
// ---------------------------------------------------------------------------

/// User-supplied identity for an ingested snapshot directory.
#[derive(Debug, Clone)]
pub struct IngestStub {
    pub run_id: String,
    /// Grokking epoch, if the producer of the snapshots knows it. Without it
    /// the aligned analyses refuse the run; absolute-time analyses proceed.
    pub grok_epoch: Option<u32>,
}

/// Snapshot files found by ingestion, ordered by (epoch, batch).
#[derive(Debug, Clone)]
pub struct IngestedSnapshots {
    pub n_params: u64,
    pub files: Vec<(SnapshotHeader, PathBuf)>,
}

/// Validate a directory of external snapshot files and produce a manifest
/// stub so the probe and the analyses can treat them like a run.
pub fn ingest_external_snapshots(
    dir: &Path,
    stub: &IngestStub,
) -> Result<(RunManifest, IngestedSnapshots), StoreError> {
    let mut files = Vec::new();
    let entries = fs::read_dir(dir).map_err(io_err(dir))?;
    for entry in entries {
        let entry = entry.map_err(io_err(dir))?;
        let path = entry.path();
        if path.extension().map(|e| e == "tdug").unwrap_or(false) {
            let header = read_snapshot_header_only(&path)?;
            files.push((header, path));
        }
    }
    if files.is_empty() {
        return Err(StoreError::NoSnapshots(dir.to_path_buf()));
    }
    files.sort_by_key(|(h, _)| (h.epoch, h.batch));

    let n0 = files[0].0.n;
    let offenders: Vec<String> = files
        .iter()
        .filter(|(h, _)| h.n != n0)
        .map(|(h, p)| format!("{} (N={})", p.display(), h.n))
        .collect();
    if !offenders.is_empty() {
        return Err(StoreError::InconsistentN(format!(
            "expected N={n0} from first file, offenders: {}",
            offenders.join(", ")
        )));
    }

    let manifest = RunManifest::for_ingested(&stub.run_id, n0, stub.grok_epoch, &files);
    Ok((manifest, IngestedSnapshots { n_params: n0, files }))
}

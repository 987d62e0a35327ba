//! Deterministic from-scratch training of the two task families, feeding
//! per-batch gradients to the avalanche probe and traces/records/snapshots
//! to the store.
//!
//! Math is carried in f64 end to end; the master parameter copy is f32 and
//! is re-promoted each batch. The gradient handed to the probe (and stored
//! in snapshots) is the batch-mean loss gradient rounded to f32, so probing
//! a stored snapshot reproduces the live cascade bit-exactly. Weight decay
//! is decoupled and applied inside the optimizer, never folded into the
//! probed gradient.

mod optim;
mod transformer;
mod xor;

pub use optim::Optimizer;
pub use transformer::ModAddTransformer;
pub use xor::XorMlp;

use crate::cascade::{self, CascadeError, ProbeConfig};
use crate::graph::{GraphError, ParamGraph};
use crate::seeds;
use crate::store::{
    self, AvalancheRecord, GradientSnapshot, RecordWriter, StoreError, TraceRow, TraceWriter,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::PathBuf;
use thiserror::Error;

/// Attachment parameter of the per-run parameter graph.
pub const GRAPH_ATTACH_M: usize = 2;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid task: {0}")]
    InvalidTask(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid train config: {0}")]
    InvalidConfig(String),
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    Divergence { epoch: u32, batch: u32 },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Cascade(#[from] CascadeError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

// ---------------------------------------------------------------------------
// Specs
// ---------------------------------------------------------------------------

/// Task family. ModAdd-p is (a + b) mod p as p-way classification with an
/// 80/20 split; XOR has 4 patterns and no split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskSpec {
    ModAdd { p: u32, train_fraction: f64, split_seed: u64 },
    Xor,
}

impl TaskSpec {
    pub fn modadd(p: u32) -> Self {
        TaskSpec::ModAdd { p, train_fraction: 0.8, split_seed: 0 }
    }
}

/// Architecture family and size. The parameter count N is always measured
/// from the instantiated model, never assumed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "arch", rename_all = "snake_case")]
pub enum ModelSpec {
    Transformer { d_model: usize, n_heads: usize, n_layers: usize, ff_multiplier: usize },
    Mlp { hidden_width: usize },
}

impl ModelSpec {
    pub fn transformer(d_model: usize) -> Self {
        ModelSpec::Transformer { d_model, n_heads: 4, n_layers: 1, ff_multiplier: 4 }
    }

    pub fn mlp(hidden_width: usize) -> Self {
        ModelSpec::Mlp { hidden_width }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum OptimizerSpec {
    Adam { lr: f64, weight_decay: f64, beta1: f64, beta2: f64, eps: f64 },
    Sgd { lr: f64 },
}

impl OptimizerSpec {
    /// Canonical ModAdd optimizer: Adam, lr 5e-3, decoupled weight decay 1e-3.
    pub fn adam_default() -> Self {
        OptimizerSpec::Adam { lr: 5e-3, weight_decay: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }

    /// Canonical XOR optimizer: plain gradient descent.
    pub fn sgd_default() -> Self {
        OptimizerSpec::Sgd { lr: 0.1 }
    }
}

/// How the probe interacts with training. `Shadow` computes cascades on a
/// copy of each gradient while parameters update with the raw gradient;
/// `On` steps parameters along the cascade's final state; `Off` skips the
/// probe entirely.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeMode {
    Shadow,
    On,
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub optimizer: OptimizerSpec,
    pub batch_size: usize,
    pub max_epochs: u32,
    pub eval_every: u32,
    pub seed: u64,
    pub probe_mode: ProbeMode,
    pub probe_cfg: ProbeConfig,
    pub grok_threshold: f64,
    /// Persist batch-gradient snapshots in evaluation epochs.
    pub snapshots: bool,
}

impl TrainConfig {
    pub fn modadd_default(seed: u64) -> Self {
        TrainConfig {
            optimizer: OptimizerSpec::adam_default(),
            batch_size: 256,
            max_epochs: 3000,
            eval_every: 5,
            seed,
            probe_mode: ProbeMode::Shadow,
            probe_cfg: ProbeConfig::default(),
            grok_threshold: 0.99,
            snapshots: false,
        }
    }

    pub fn xor_default(seed: u64) -> Self {
        TrainConfig {
            optimizer: OptimizerSpec::sgd_default(),
            batch_size: 4,
            max_epochs: 6000,
            eval_every: 1,
            seed,
            probe_mode: ProbeMode::Shadow,
            probe_cfg: ProbeConfig::default(),
            grok_threshold: 0.99,
            snapshots: false,
        }
    }

    fn validate(&self) -> Result<(), TrainError> {
        self.probe_cfg.validate().map_err(TrainError::Cascade)?;
        if self.batch_size == 0 {
            return Err(TrainError::InvalidConfig("batch_size must be >= 1".into()));
        }
        if self.eval_every == 0 {
            return Err(TrainError::InvalidConfig("eval_every must be >= 1".into()));
        }
        if self.max_epochs == 0 {
            return Err(TrainError::InvalidConfig("max_epochs must be >= 1".into()));
        }
        if !(0.0 < self.grok_threshold && self.grok_threshold < 1.0) {
            return Err(TrainError::InvalidConfig("grok_threshold must lie in (0,1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunKind {
    Live,
    Synthetic,
    Ingested,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Grokked,
    Ungrokked,
    Running,
    Failed,
    Unknown,
}

/// Provenance and outputs of one run. `grok_epoch` is present iff the run
/// grokked. `graph_seed` and `attach_m` pin the cascade substrate so stored
/// gradients can be re-probed bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub kind: RunKind,
    pub task: Option<TaskSpec>,
    pub model: Option<ModelSpec>,
    pub train: Option<TrainConfig>,
    pub n_params: u64,
    pub graph_digest: u64,
    pub graph_seed: u64,
    pub attach_m: usize,
    pub grok_epoch: Option<u32>,
    pub status: RunStatus,
    pub accuracy_trace_path: Option<String>,
    pub avalanche_record_path: String,
    pub snapshot_paths: Vec<String>,
}

impl RunManifest {
    /// Manifest stub for externally produced snapshots. The graph seed is
    /// derived from the run id so re-probing the same directory is stable.
    pub fn for_ingested(
        run_id: &str,
        n_params: u64,
        grok_epoch: Option<u32>,
        files: &[(store::SnapshotHeader, PathBuf)],
    ) -> Self {
        let mut id_hash = 0xcbf2_9ce4_8422_2325u64;
        for b in run_id.bytes() {
            id_hash ^= b as u64;
            id_hash = id_hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
        let graph_seed = seeds::derive(id_hash, seeds::STREAM_GRAPH);
        RunManifest {
            run_id: run_id.to_string(),
            kind: RunKind::Ingested,
            task: None,
            model: None,
            train: None,
            n_params,
            graph_digest: 0,
            graph_seed,
            attach_m: GRAPH_ATTACH_M,
            grok_epoch,
            status: if grok_epoch.is_some() { RunStatus::Grokked } else { RunStatus::Unknown },
            accuracy_trace_path: None,
            avalanche_record_path: store::RECORDS_FILE.to_string(),
            snapshot_paths: files
                .iter()
                .map(|(_, p)| p.file_name().unwrap().to_string_lossy().into_owned())
                .collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

/// One labeled input pair. For XOR, `a` and `b` are bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Example {
    pub a: u32,
    pub b: u32,
    pub label: u32,
}

/// Enumerate all p^2 pairs, label (a+b) mod p, and split them by a
/// deterministic shuffle. |train| = round(train_fraction * p^2).
pub fn build_modadd_dataset(
    p: u32,
    train_fraction: f64,
    split_seed: u64,
) -> Result<(Vec<Example>, Vec<Example>), TrainError> {
    if p < 2 {
        return Err(TrainError::InvalidTask(format!("modulus must be >= 2, got {p}")));
    }
    if !(0.0 < train_fraction && train_fraction < 1.0) {
        return Err(TrainError::InvalidTask(format!(
            "train_fraction must lie in (0,1), got {train_fraction}"
        )));
    }
    let mut all = Vec::with_capacity((p * p) as usize);
    for a in 0..p {
        for b in 0..p {
            all.push(Example { a, b, label: (a + b) % p });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(split_seed, seeds::STREAM_SPLIT));
    for i in (1..all.len()).rev() {
        all.swap(i, rng.gen_range(0..=i));
    }
    let n_train = (train_fraction * all.len() as f64).round() as usize;
    let test = all.split_off(n_train);
    Ok((all, test))
}

/// The four XOR patterns; training and evaluation use the same set.
pub fn build_xor_dataset() -> Vec<Example> {
    vec![
        Example { a: 0, b: 0, label: 0 },
        Example { a: 0, b: 1, label: 1 },
        Example { a: 1, b: 0, label: 1 },
        Example { a: 1, b: 1, label: 0 },
    ]
}

// ---------------------------------------------------------------------------
// Architectures
// ---------------------------------------------------------------------------

/// A fixed architecture exposing exact analytic gradients over a flat
/// parameter vector. The flattening order is documented per implementation
/// and indexes the parameter graph's nodes.
pub trait Architecture: Sync {
    fn n_params(&self) -> usize;

    /// Scaled-uniform fan-in initialization from a dedicated seed stream.
    fn init_params(&self, init_seed: u64) -> Vec<f32>;

    /// Add the sum of per-example loss gradients into `grad_sum` and return
    /// (sum of per-example losses, number of correct argmax predictions).
    fn accumulate_loss_grad(
        &self,
        params: &[f64],
        examples: &[Example],
        grad_sum: &mut [f64],
    ) -> (f64, usize);

    /// Forward-only pass: (sum of losses, correct predictions).
    fn evaluate(&self, params: &[f64], examples: &[Example]) -> (f64, usize);
}

/// Instantiate the architecture for a (task, model) pair.
pub fn make_architecture(
    task: &TaskSpec,
    model: &ModelSpec,
) -> Result<Box<dyn Architecture>, TrainError> {
    match (task, model) {
        (TaskSpec::ModAdd { p, .. }, ModelSpec::Transformer { d_model, n_heads, n_layers, ff_multiplier }) => {
            if *n_layers != 1 {
                return Err(TrainError::InvalidModel(format!(
                    "only single-layer transformers are supported, got n_layers={n_layers}"
                )));
            }
            Ok(Box::new(ModAddTransformer::new(*p, *d_model, *n_heads, *ff_multiplier)?))
        }
        (TaskSpec::Xor, ModelSpec::Mlp { hidden_width }) => Ok(Box::new(XorMlp::new(*hidden_width)?)),
        _ => Err(TrainError::InvalidModel(
            "task/model mismatch: modadd pairs with transformer, xor with mlp".into(),
        )),
    }
}

/// Total trainable scalar count for a (task, model) pair.
pub fn count_params(task: &TaskSpec, model: &ModelSpec) -> Result<usize, TrainError> {
    Ok(make_architecture(task, model)?.n_params())
}

/// Number of reduction chunks for batch gradient accumulation. Per-chunk
/// sums are combined in fixed chunk order, so results do not depend on the
/// number of worker threads.
const GRAD_CHUNKS: usize = 8;

/// Mean loss, accuracy and mean gradient over a batch.
pub fn batch_loss_grad(
    arch: &dyn Architecture,
    params: &[f64],
    batch: &[Example],
) -> (f64, f64, Vec<f64>) {
    assert!(!batch.is_empty(), "empty batch");
    let n = arch.n_params();
    let chunk_size = batch.len().div_ceil(GRAD_CHUNKS);
    let chunks: Vec<&[Example]> = batch.chunks(chunk_size).collect();
    let partials: Vec<(f64, usize, Vec<f64>)> = chunks
        .par_iter()
        .map(|chunk| {
            let mut grad = vec![0.0f64; n];
            let (loss_sum, correct) = arch.accumulate_loss_grad(params, chunk, &mut grad);
            (loss_sum, correct, grad)
        })
        .collect();

    let mut grad_total = vec![0.0f64; n];
    let mut loss_sum = 0.0f64;
    let mut correct = 0usize;
    for (l, c, g) in &partials {
        loss_sum += l;
        correct += c;
        for (t, v) in grad_total.iter_mut().zip(g.iter()) {
            *t += v;
        }
    }
    let inv = 1.0 / batch.len() as f64;
    for g in grad_total.iter_mut() {
        *g *= inv;
    }
    (loss_sum * inv, correct as f64 / batch.len() as f64, grad_total)
}

/// Forward/backward for one batch: cross-entropy loss, accuracy and the
/// exact batch-mean gradient in the canonical flattening order. Weight
/// decay is not folded in. Errors on non-finite loss.
pub fn forward_backward(
    arch: &dyn Architecture,
    params: &[f64],
    batch: &[Example],
) -> Result<(f64, f64, Vec<f64>), TrainError> {
    if batch.is_empty() {
        return Err(TrainError::InvalidConfig("empty batch".into()));
    }
    let (loss, acc, grad) = batch_loss_grad(arch, params, batch);
    if !loss.is_finite() {
        return Err(TrainError::Divergence { epoch: 0, batch: 0 });
    }
    Ok((loss, acc, grad))
}

/// Mean loss and accuracy of a full dataset.
pub fn evaluate_dataset(arch: &dyn Architecture, params: &[f64], data: &[Example]) -> (f64, f64) {
    let chunk_size = data.len().div_ceil(GRAD_CHUNKS);
    let chunks: Vec<&[Example]> = data.chunks(chunk_size).collect();
    let partials: Vec<(f64, usize)> =
        chunks.par_iter().map(|chunk| arch.evaluate(params, chunk)).collect();
    let mut loss_sum = 0.0;
    let mut correct = 0usize;
    for (l, c) in &partials {
        loss_sum += l;
        correct += c;
    }
    (loss_sum / data.len() as f64, correct as f64 / data.len() as f64)
}

// ---------------------------------------------------------------------------
// The training loop
// ---------------------------------------------------------------------------

/// Everything needed to start a run. `out_dir` becomes the run directory.
#[derive(Debug, Clone)]
pub struct RunInputs {
    pub run_id: String,
    pub task: TaskSpec,
    pub model: ModelSpec,
    pub train: TrainConfig,
    pub out_dir: PathBuf,
}

/// Train to completion, probing every batch, persisting records, traces,
/// snapshots and the final manifest. Divergence marks the run failed and
/// keeps partial records rather than erroring.
pub fn train_run(inputs: &RunInputs) -> Result<RunManifest, TrainError> {
    train_run_with_progress(inputs, |_| {})
}

pub fn train_run_with_progress(
    inputs: &RunInputs,
    mut on_eval: impl FnMut(&TraceRow),
) -> Result<RunManifest, TrainError> {
    let cfg = &inputs.train;
    cfg.validate()?;

    let (train_set, test_set): (Vec<Example>, Vec<Example>) = match &inputs.task {
        TaskSpec::ModAdd { p, train_fraction, split_seed } => {
            build_modadd_dataset(*p, *train_fraction, *split_seed)?
        }
        TaskSpec::Xor => {
            let d = build_xor_dataset();
            (d.clone(), d)
        }
    };
    if cfg.batch_size > train_set.len() && matches!(inputs.task, TaskSpec::ModAdd { .. }) {
        return Err(TrainError::InvalidConfig(format!(
            "batch_size {} exceeds train set size {}",
            cfg.batch_size,
            train_set.len()
        )));
    }

    let arch = make_architecture(&inputs.task, &inputs.model)?;
    let n = arch.n_params();
    let graph_seed = seeds::derive(cfg.seed, seeds::STREAM_GRAPH);
    let graph = ParamGraph::build_ba(n, GRAPH_ATTACH_M, graph_seed)?;

    std::fs::create_dir_all(&inputs.out_dir).map_err(|e| StoreError::Io {
        path: inputs.out_dir.clone(),
        source: e,
    })?;
    let snap_dir = inputs.out_dir.join(store::SNAPSHOT_DIR);
    if cfg.snapshots {
        std::fs::create_dir_all(&snap_dir)
            .map_err(|e| StoreError::Io { path: snap_dir.clone(), source: e })?;
    }

    let mut manifest = RunManifest {
        run_id: inputs.run_id.clone(),
        kind: RunKind::Live,
        task: Some(inputs.task.clone()),
        model: Some(inputs.model.clone()),
        train: Some(cfg.clone()),
        n_params: n as u64,
        graph_digest: graph.digest(),
        graph_seed,
        attach_m: GRAPH_ATTACH_M,
        grok_epoch: None,
        status: RunStatus::Running,
        accuracy_trace_path: Some(store::TRACE_FILE.to_string()),
        avalanche_record_path: store::RECORDS_FILE.to_string(),
        snapshot_paths: Vec::new(),
    };
    store::write_manifest(&inputs.out_dir, &manifest)?;

    let mut params = arch.init_params(seeds::derive(cfg.seed, seeds::STREAM_INIT));
    let mut params64 = vec![0.0f64; n];
    let mut optimizer = Optimizer::new(cfg.optimizer, n);

    let mut records = RecordWriter::create(&inputs.out_dir.join(store::RECORDS_FILE))?;
    let mut trace = TraceWriter::create(&inputs.out_dir.join(store::TRACE_FILE))?;
    let digests_path = inputs.out_dir.join(store::PARAM_DIGESTS_FILE);
    let mut digests = std::io::BufWriter::new(
        std::fs::File::create(&digests_path)
            .map_err(|e| StoreError::Io { path: digests_path.clone(), source: e })?,
    );
    writeln!(digests, "epoch\tparam_digest")
        .map_err(|e| StoreError::Io { path: digests_path.clone(), source: e })?;

    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut batch_buf: Vec<Example> = Vec::with_capacity(cfg.batch_size);
    let mut diverged = false;

    'epochs: for epoch in 1..=cfg.max_epochs {
        // ModAdd reshuffles each epoch from a per-epoch stream; XOR is one
        // fixed full batch.
        if matches!(inputs.task, TaskSpec::ModAdd { .. }) {
            let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive2(
                cfg.seed,
                seeds::STREAM_SHUFFLE,
                epoch as u64,
            ));
            for i in (1..order.len()).rev() {
                order.swap(i, rng.gen_range(0..=i));
            }
        }

        let is_eval_epoch = epoch % cfg.eval_every == 0;
        let n_batches = train_set.len().div_ceil(cfg.batch_size);
        let mut epoch_loss_sum = 0.0f64;

        for batch_idx in 0..n_batches {
            let lo = batch_idx * cfg.batch_size;
            let hi = (lo + cfg.batch_size).min(train_set.len());
            batch_buf.clear();
            batch_buf.extend(order[lo..hi].iter().map(|&i| train_set[i]));

            for (dst, &src) in params64.iter_mut().zip(params.iter()) {
                *dst = src as f64;
            }
            let (loss, _acc, grad) = batch_loss_grad(arch.as_ref(), &params64, &batch_buf);
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                diverged = true;
                break 'epochs;
            }
            epoch_loss_sum += loss;

            // The collected gradient: batch mean rounded to f32, exactly what
            // a snapshot stores. The probe sees these values.
            let grad32: Vec<f32> = grad.iter().map(|&g| g as f32).collect();

            let cascade_state = if cfg.probe_mode != ProbeMode::Off {
                let probe_input: Vec<f64> = grad32.iter().map(|&g| g as f64).collect();
                let tau =
                    cascade::compute_threshold(&probe_input, cfg.probe_cfg.threshold_percentile)?;
                let result = cascade::run_cascade(&probe_input, &graph, &cfg.probe_cfg, tau)?;
                records.append(&AvalancheRecord {
                    run_id: inputs.run_id.clone(),
                    epoch,
                    batch: batch_idx as u32,
                    size: result.size,
                    iterations: result.iterations_used,
                    truncated: result.truncated,
                    rotation_cos: result.rotation_cos,
                })?;
                if cfg.snapshots && is_eval_epoch {
                    let name = GradientSnapshot::file_name(epoch, batch_idx as u32);
                    let snap =
                        GradientSnapshot { epoch, batch: batch_idx as u32, values: grad32.clone() };
                    store::write_snapshot(&snap_dir.join(&name), &snap)?;
                    manifest.snapshot_paths.push(format!("{}/{name}", store::SNAPSHOT_DIR));
                }
                Some(result.final_state)
            } else {
                None
            };

            let step_grad = match (cfg.probe_mode, cascade_state) {
                (ProbeMode::On, Some(final_state)) => final_state,
                _ => grad,
            };
            optimizer.step(&mut params, &step_grad);
        }

        if is_eval_epoch {
            for (dst, &src) in params64.iter_mut().zip(params.iter()) {
                *dst = src as f64;
            }
            let (_train_loss, train_acc) = evaluate_dataset(arch.as_ref(), &params64, &train_set);
            let (_test_loss, test_acc) = evaluate_dataset(arch.as_ref(), &params64, &test_set);
            let n_batches = train_set.len().div_ceil(cfg.batch_size);
            let row = TraceRow {
                epoch,
                train_acc,
                test_acc,
                loss: epoch_loss_sum / n_batches as f64,
            };
            trace.append(&row)?;
            writeln!(digests, "{epoch}\t{:016x}", fnv1a_f32_bits(&params))
                .map_err(|e| StoreError::Io { path: digests_path.clone(), source: e })?;
            on_eval(&row);
            if manifest.grok_epoch.is_none() && test_acc > cfg.grok_threshold {
                manifest.grok_epoch = Some(epoch);
            }
        }
    }

    records.finish()?;
    trace.finish()?;
    digests.flush().map_err(|e| StoreError::Io { path: digests_path.clone(), source: e })?;

    // Final master parameters, f32 little-endian in the snapshot container.
    let final_params = GradientSnapshot { epoch: cfg.max_epochs, batch: 0, values: params.clone() };
    store::write_snapshot(&inputs.out_dir.join(store::PARAMS_FINAL_FILE), &final_params)?;

    manifest.status = if diverged {
        manifest.grok_epoch = None;
        RunStatus::Failed
    } else if manifest.grok_epoch.is_some() {
        RunStatus::Grokked
    } else {
        RunStatus::Ungrokked
    };
    store::write_manifest(&inputs.out_dir, &manifest)?;
    Ok(manifest)
}

/// FNV-1a over the exact bit patterns of the parameter vector; equal digests
/// at every evaluation epoch mean bit-identical trajectories.
fn fnv1a_f32_bits(values: &[f32]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for v in values {
        for byte in v.to_bits().to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modadd_dataset_sizes_and_determinism() {
        let (train, test) = build_modadd_dataset(59, 0.8, 42).unwrap();
        assert_eq!(train.len(), 2785);
        assert_eq!(test.len(), 696);
        assert_eq!(train.len() + test.len(), 3481);

        let (train2, test2) = build_modadd_dataset(59, 0.8, 42).unwrap();
        assert_eq!(train, train2);
        assert_eq!(test, test2);

        // disjoint and exhaustive
        let mut seen = vec![false; 59 * 59];
        for e in train.iter().chain(test.iter()) {
            let idx = (e.a * 59 + e.b) as usize;
            assert!(!seen[idx], "duplicate pair ({}, {})", e.a, e.b);
            seen[idx] = true;
            assert_eq!(e.label, (e.a + e.b) % 59);
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn modadd_p2_is_xor_structured() {
        let (train, test) = build_modadd_dataset(2, 0.5, 0).unwrap();
        assert_eq!(train.len(), 2);
        assert_eq!(test.len(), 2);
        for e in train.iter().chain(test.iter()) {
            assert_eq!(e.label, (e.a + e.b) % 2);
        }
    }

    #[test]
    fn modadd_rejects_bad_inputs() {
        assert!(build_modadd_dataset(1, 0.8, 0).is_err());
        assert!(build_modadd_dataset(59, 1.0, 0).is_err());
    }

    #[test]
    fn xor_dataset_is_the_truth_table() {
        let d = build_xor_dataset();
        assert_eq!(d.len(), 4);
        for e in &d {
            assert_eq!(e.label, e.a ^ e.b);
        }
    }
}

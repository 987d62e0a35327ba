//! The `train` subcommand.

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use std::path::PathBuf;
use tduofc::cascade::ProbeConfig;
use tduofc::train::{
    train_run_with_progress, ModelSpec, OptimizerSpec, ProbeMode, RunInputs, TaskSpec, TrainConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Xor,
    Modadd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProbeArg {
    Shadow,
    On,
    Off,
}

impl From<ProbeArg> for ProbeMode {
    fn from(p: ProbeArg) -> Self {
        match p {
            ProbeArg::Shadow => ProbeMode::Shadow,
            ProbeArg::On => ProbeMode::On,
            ProbeArg::Off => ProbeMode::Off,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct TrainArgs {
    /// Task family
    #[arg(value_enum)]
    pub task: TaskArg,

    /// Modulus for modadd
    #[arg(long, default_value_t = 59)]
    pub p: u32,
    /// Train fraction for modadd (xor always trains on all 4 patterns)
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    /// Seed of the train/test split shuffle (modadd)
    #[arg(long, default_value_t = 0)]
    pub split_seed: u64,

    /// Transformer width (modadd)
    #[arg(long, default_value_t = 24)]
    pub d_model: usize,
    /// Attention heads (modadd)
    #[arg(long, default_value_t = 4)]
    pub n_heads: usize,
    /// Feed-forward width multiplier (modadd)
    #[arg(long, default_value_t = 4)]
    pub ff_mult: usize,
    /// MLP hidden width (xor)
    #[arg(long, default_value_t = 16)]
    pub hidden: usize,

    /// Training seed; every stream (init, shuffles, graph) derives from it
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Probe mode: shadow computes cascades offline from copied gradients,
    /// on steps parameters along the cascade output, off disables the probe
    #[arg(long, value_enum, default_value_t = ProbeArg::Shadow)]
    pub probe: ProbeArg,
    /// Redistribution fraction alpha of the probe
    #[arg(long, default_value_t = 0.3)]
    pub alpha: f64,
    /// Threshold percentile of |g| for the probe
    #[arg(long, default_value_t = 90.0)]
    pub percentile: f64,
    /// Cascade iteration cap
    #[arg(long, default_value_t = 20)]
    pub max_iter: usize,

    /// Batch size (defaults: 256 modadd, 4 xor)
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Epoch budget (defaults: 3000 modadd, 6000 xor)
    #[arg(long)]
    pub epochs: Option<u32>,
    /// Evaluation cadence in epochs (defaults: 5 modadd, 1 xor)
    #[arg(long)]
    pub eval_every: Option<u32>,
    /// Learning rate (defaults: 5e-3 adam/modadd, 0.1 sgd/xor)
    #[arg(long)]
    pub lr: Option<f64>,
    /// Decoupled weight decay (modadd only; default 1e-3)
    #[arg(long)]
    pub weight_decay: Option<f64>,
    /// Store per-batch gradient snapshots in evaluation epochs
    #[arg(long, default_value_t = false)]
    pub snapshots: bool,
    /// Test accuracy above which a run counts as grokked
    #[arg(long, default_value_t = 0.99)]
    pub grok_threshold: f64,

    /// Output root; the run directory is created beneath it
    #[arg(long, env = "TDUOFC_OUT")]
    pub out: Option<PathBuf>,
    /// Run directory name (defaults to a descriptive id)
    #[arg(long)]
    pub run_id: Option<String>,
    /// Print an evaluation line per eval epoch
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub verbose: bool,
}

pub fn build_inputs(args: &TrainArgs) -> Result<RunInputs> {
    let (task, model, mut cfg) = match args.task {
        TaskArg::Xor => (
            TaskSpec::Xor,
            ModelSpec::mlp(args.hidden),
            TrainConfig::xor_default(args.seed),
        ),
        TaskArg::Modadd => (
            TaskSpec::ModAdd {
                p: args.p,
                train_fraction: args.train_fraction,
                split_seed: args.split_seed,
            },
            ModelSpec::Transformer {
                d_model: args.d_model,
                n_heads: args.n_heads,
                n_layers: 1,
                ff_multiplier: args.ff_mult,
            },
            TrainConfig::modadd_default(args.seed),
        ),
    };
    cfg.probe_mode = args.probe.into();
    cfg.probe_cfg = ProbeConfig {
        alpha: args.alpha,
        threshold_percentile: args.percentile,
        max_iterations: args.max_iter,
    };
    if let Some(b) = args.batch_size {
        cfg.batch_size = b;
    }
    if let Some(e) = args.epochs {
        cfg.max_epochs = e;
    }
    if let Some(e) = args.eval_every {
        cfg.eval_every = e;
    }
    cfg.grok_threshold = args.grok_threshold;
    cfg.snapshots = args.snapshots;
    match (&mut cfg.optimizer, args.lr, args.weight_decay) {
        (OptimizerSpec::Adam { lr, weight_decay, .. }, new_lr, new_wd) => {
            if let Some(v) = new_lr {
                *lr = v;
            }
            if let Some(v) = new_wd {
                *weight_decay = v;
            }
        }
        (OptimizerSpec::Sgd { lr }, new_lr, new_wd) => {
            if let Some(v) = new_lr {
                *lr = v;
            }
            if new_wd.is_some() {
                bail!("--weight-decay applies to the adam/modadd configuration only");
            }
        }
    }

    let run_id = args.run_id.clone().unwrap_or_else(|| default_run_id(args));
    let out_root = crate::resolve_out_root(args.out.clone());
    Ok(RunInputs { run_id: run_id.clone(), task, model, train: cfg, out_dir: out_root.join(run_id) })
}

pub fn default_run_id(args: &TrainArgs) -> String {
    let probe = match args.probe {
        ProbeArg::Shadow => "shadow",
        ProbeArg::On => "on",
        ProbeArg::Off => "off",
    };
    match args.task {
        TaskArg::Xor => format!("xor-h{}-s{}-{probe}", args.hidden, args.seed),
        TaskArg::Modadd => format!("modadd{}-d{}-s{}-{probe}", args.p, args.d_model, args.seed),
    }
}

pub fn run(args: TrainArgs) -> Result<()> {
    let inputs = build_inputs(&args)?;
    println!("run {} -> {}", inputs.run_id, inputs.out_dir.display());
    let verbose = args.verbose;
    let manifest = train_run_with_progress(&inputs, |row| {
        if verbose {
            println!(
                "epoch {:6}  train_acc {:.4}  test_acc {:.4}  loss {:.6}",
                row.epoch, row.train_acc, row.test_acc, row.loss
            );
        }
    })?;
    println!(
        "status {:?}  N {}  grok_epoch {}  manifest {}",
        manifest.status,
        manifest.n_params,
        manifest.grok_epoch.map_or("-".to_string(), |g| g.to_string()),
        inputs.out_dir.join("manifest.json").display()
    );
    Ok(())
}

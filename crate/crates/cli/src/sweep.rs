//! The `sweep` subcommand: a Cartesian product of training cells from a
//! JSON spec, executed as independent child processes with a bounded
//! worker pool. Completed cells (directories with a final manifest) are
//! skipped, so an interrupted sweep resumes where it stopped.

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use tduofc::store;
use tduofc::train::RunStatus;

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// JSON sweep specification (see `sweep --help-spec`)
    #[arg(long)]
    pub spec: PathBuf,
    /// Output root; one directory per cell is created beneath it
    #[arg(long, env = "TDUOFC_OUT")]
    pub out: Option<PathBuf>,
    /// Concurrent worker processes
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Print the spec file schema and exit
    #[arg(long, default_value_t = false)]
    pub help_spec: bool,
}

/// Sweep axes. Empty axes collapse to the base value, so an empty spec is
/// a single canonical run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// "xor" or "modadd"
    pub task: String,
    #[serde(default)]
    pub p_values: Vec<u32>,
    #[serde(default)]
    pub hidden_widths: Vec<usize>,
    #[serde(default)]
    pub d_models: Vec<usize>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub percentiles: Vec<f64>,
    /// "shadow" (default), "on" or "off"
    #[serde(default)]
    pub probe_mode: Option<String>,
    #[serde(default)]
    pub max_epochs: Option<u32>,
    #[serde(default)]
    pub batch_size: Option<usize>,
    #[serde(default)]
    pub lr: Option<f64>,
    #[serde(default)]
    pub weight_decay: Option<f64>,
    #[serde(default)]
    pub eval_every: Option<u32>,
    #[serde(default)]
    pub snapshots: bool,
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub name: String,
    pub width: usize,
    pub seed: u64,
    pub alpha: f64,
    pub percentile: f64,
    pub p: u32,
}

pub fn enumerate_cells(spec: &SweepSpec) -> Result<Vec<Cell>> {
    let is_xor = match spec.task.as_str() {
        "xor" => true,
        "modadd" => false,
        other => bail!("unknown task {other:?} (expected \"xor\" or \"modadd\")"),
    };
    let widths = if is_xor {
        if spec.hidden_widths.is_empty() { vec![16] } else { spec.hidden_widths.clone() }
    } else if spec.d_models.is_empty() {
        vec![24]
    } else {
        spec.d_models.clone()
    };
    let p_values = if is_xor {
        vec![0]
    } else if spec.p_values.is_empty() {
        vec![59]
    } else {
        spec.p_values.clone()
    };
    let seeds = if spec.seeds.is_empty() { vec![1] } else { spec.seeds.clone() };
    let alphas = if spec.alphas.is_empty() { vec![0.3] } else { spec.alphas.clone() };
    let percentiles =
        if spec.percentiles.is_empty() { vec![90.0] } else { spec.percentiles.clone() };

    let mut cells = Vec::new();
    for &p in &p_values {
        for &width in &widths {
            for &alpha in &alphas {
                for &percentile in &percentiles {
                    for &seed in &seeds {
                        let name = if is_xor {
                            format!("xor-h{width}-a{alpha}-q{percentile}-s{seed}")
                        } else {
                            format!("modadd{p}-d{width}-a{alpha}-q{percentile}-s{seed}")
                        };
                        cells.push(Cell { name, width, seed, alpha, percentile, p });
                    }
                }
            }
        }
    }
    Ok(cells)
}

fn cell_command(spec: &SweepSpec, cell: &Cell, out_root: &Path) -> Result<Command> {
    let exe = std::env::current_exe().context("locating own executable")?;
    let mut cmd = Command::new(exe);
    cmd.arg("train").arg(&spec.task);
    if spec.task == "modadd" {
        cmd.args(["--p", &cell.p.to_string()]);
        cmd.args(["--d-model", &cell.width.to_string()]);
    } else {
        cmd.args(["--hidden", &cell.width.to_string()]);
    }
    cmd.args(["--seed", &cell.seed.to_string()]);
    cmd.args(["--alpha", &cell.alpha.to_string()]);
    cmd.args(["--percentile", &cell.percentile.to_string()]);
    if let Some(mode) = &spec.probe_mode {
        cmd.args(["--probe", mode]);
    }
    if let Some(v) = spec.max_epochs {
        cmd.args(["--epochs", &v.to_string()]);
    }
    if let Some(v) = spec.batch_size {
        cmd.args(["--batch-size", &v.to_string()]);
    }
    if let Some(v) = spec.lr {
        cmd.args(["--lr", &v.to_string()]);
    }
    if let Some(v) = spec.weight_decay {
        cmd.args(["--weight-decay", &v.to_string()]);
    }
    if let Some(v) = spec.eval_every {
        cmd.args(["--eval-every", &v.to_string()]);
    }
    if spec.snapshots {
        cmd.arg("--snapshots");
    }
    cmd.args(["--run-id", &cell.name]);
    cmd.arg("--out").arg(out_root);
    Ok(cmd)
}

fn cell_is_complete(dir: &Path) -> bool {
    match store::read_manifest(dir) {
        Ok(m) => m.status != RunStatus::Running,
        Err(_) => false,
    }
}

pub fn run(args: SweepArgs) -> Result<()> {
    if args.help_spec {
        print_spec_help();
        return Ok(());
    }
    let text = fs::read_to_string(&args.spec)
        .with_context(|| format!("reading sweep spec {}", args.spec.display()))?;
    let spec: SweepSpec = serde_json::from_str(&text).context("parsing sweep spec")?;
    let out_root = crate::resolve_out_root(args.out.clone());
    fs::create_dir_all(&out_root)?;
    let cells = enumerate_cells(&spec)?;
    println!("sweep: {} cells -> {}", cells.len(), out_root.display());

    let mut queue: VecDeque<Cell> = VecDeque::new();
    for cell in cells.iter() {
        let dir = out_root.join(&cell.name);
        if cell_is_complete(&dir) {
            println!("skip {} (already complete)", cell.name);
        } else {
            queue.push_back(cell.clone());
        }
    }

    let workers = args.workers.max(1);
    let mut running: Vec<(Cell, std::process::Child)> = Vec::new();
    let mut failures = 0usize;
    while !queue.is_empty() || !running.is_empty() {
        while running.len() < workers && !queue.is_empty() {
            let cell = queue.pop_front().unwrap();
            let dir = out_root.join(&cell.name);
            fs::create_dir_all(&dir)?;
            let log = fs::File::create(dir.join("log.txt"))?;
            let mut cmd = cell_command(&spec, &cell, &out_root)?;
            cmd.stdout(log.try_clone()?).stderr(log);
            println!("start {}", cell.name);
            let child = cmd.spawn().with_context(|| format!("spawning cell {}", cell.name))?;
            running.push((cell, child));
        }
        std::thread::sleep(std::time::Duration::from_millis(200));
        let mut i = 0;
        while i < running.len() {
            if let Some(status) = running[i].1.try_wait()? {
                let (cell, _) = running.remove(i);
                if status.success() {
                    println!("done  {}", cell.name);
                } else {
                    eprintln!("FAIL  {} (exit {status}); log in {}/log.txt", cell.name, cell.name);
                    failures += 1;
                }
            } else {
                i += 1;
            }
        }
    }

    summarize(&cells, &out_root)?;
    if failures > 0 {
        bail!("{failures} cell(s) failed");
    }
    Ok(())
}

/// Per-cell grokking epochs plus the relative spread of grokking timing
/// across the probe-parameter axes for each (width, seed).
fn summarize(cells: &[Cell], out_root: &Path) -> Result<()> {
    let mut rows = Vec::new();
    let mut by_width_seed: std::collections::BTreeMap<(usize, u64), Vec<u32>> =
        std::collections::BTreeMap::new();
    for cell in cells {
        let dir = out_root.join(&cell.name);
        let (status, g) = match store::read_manifest(&dir) {
            Ok(m) => (format!("{:?}", m.status), m.grok_epoch),
            Err(_) => ("missing".to_string(), None),
        };
        rows.push(format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            cell.name,
            cell.width,
            cell.seed,
            cell.alpha,
            cell.percentile,
            status,
            g.map_or("na".into(), |v: u32| v.to_string())
        ));
        if let Some(g) = g {
            by_width_seed.entry((cell.width, cell.seed)).or_default().push(g);
        }
    }
    crate::out::write_tsv(
        &out_root.join("sweep_summary.tsv"),
        "cell\twidth\tseed\talpha\tpercentile\tstatus\tgrok_epoch",
        rows,
    )?;

    let mut worst: f64 = 0.0;
    let mut any = false;
    for ((width, seed), gs) in &by_width_seed {
        if gs.len() > 1 {
            any = true;
            let max = *gs.iter().max().unwrap() as f64;
            let min = *gs.iter().min().unwrap() as f64;
            let mean = gs.iter().sum::<u32>() as f64 / gs.len() as f64;
            let spread = (max - min) / mean;
            println!(
                "grokking-timing spread width={width} seed={seed}: {:.2}% over {} probe cells",
                100.0 * spread,
                gs.len()
            );
            worst = worst.max(spread);
        }
    }
    if any {
        println!("worst relative spread of grokking timing: {:.2}%", 100.0 * worst);
    }
    Ok(())
}

fn print_spec_help() {
    println!(
        r#"Sweep spec (JSON object):
{{
  "task": "xor" | "modadd",          required
  "p_values": [59],                   modadd moduli (default [59])
  "hidden_widths": [8,16,32,64],      xor widths (default [16])
  "d_models": [24,32,48,64,96,128],   modadd widths (default [24])
  "seeds": [1,2,3],                   training seeds (default [1])
  "alphas": [0.3],                    probe redistribution fractions
  "percentiles": [90.0],              probe threshold percentiles
  "probe_mode": "shadow"|"on"|"off",  default shadow
  "max_epochs": 6000,                 optional override
  "batch_size": 256,                  optional override
  "lr": 0.005,                        optional override
  "weight_decay": 0.001,              optional override (modadd)
  "eval_every": 5,                    optional override
  "snapshots": false                  store eval-epoch gradient snapshots
}}
Cells are the Cartesian product of the axes. Each cell trains in its own
process and directory <out>/<cell-name>; completed cells are skipped on
re-runs, so an interrupted sweep resumes."#
    );
}

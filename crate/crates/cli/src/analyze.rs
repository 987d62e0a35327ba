//! The `analyze` subcommands. Each consumes run directories (or generates
//! synthetic data), writes plot-ready tabular outputs, and prints a
//! one-screen summary.

use crate::load::{self, LoadedRun};
use crate::out::{opt, write_tsv};
use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand};
use std::collections::BTreeMap;
use std::path::PathBuf;
use tduofc::analysis::{
    self, BinSpec, CrossingDirection, EarlyWarningCohort, Observable, TimeBinFit,
};
use tduofc::cascade::ProbeConfig;
use tduofc::store;
use tduofc::synth::{fit_synth_baseline, generate_synthetic_run, GraphVariant, SynthSpec};
use tduofc::train::{RunKind, RunManifest, RunStatus, TaskSpec, TrainConfig};

#[derive(Subcommand, Debug)]
pub enum AnalyzeCmd {
    /// Time-resolved FSS exponents D(t) (from s_max) and gamma(t) (from s_avg)
    Fss(FssArgs),
    /// Bootstrap the phase-split exponent over (seed, epoch) resamples
    Bootstrap(BootstrapArgs),
    /// Leave-one-scale-out refits of both phases
    Loo(LooArgs),
    /// CCDF of epoch-summed avalanches, cutoff scaling and data collapse
    Ccdf(CcdfArgs),
    /// Pointwise D_shadow - D_on comparison on a shared bin grid
    ShadowDelta(ShadowDeltaArgs),
    /// Locate the D = 1 crossing in the critical window
    Crossing(CrossingArgs),
    /// Threshold classification of outcomes from D at a pre-grokking epoch
    EarlyWarning(EarlyWarningArgs),
    /// Generate the i.i.d. Gaussian null and fit D_synth across topologies
    SynthBaseline(SynthBaselineArgs),
}

pub fn run(cmd: AnalyzeCmd) -> Result<()> {
    match cmd {
        AnalyzeCmd::Fss(a) => fss(a),
        AnalyzeCmd::Bootstrap(a) => bootstrap(a),
        AnalyzeCmd::Loo(a) => loo(a),
        AnalyzeCmd::Ccdf(a) => ccdf(a),
        AnalyzeCmd::ShadowDelta(a) => shadow_delta(a),
        AnalyzeCmd::Crossing(a) => crossing(a),
        AnalyzeCmd::EarlyWarning(a) => early_warning(a),
        AnalyzeCmd::SynthBaseline(a) => synth_baseline(a),
    }
}

#[derive(Args, Debug)]
pub struct CommonIo {
    /// Run directories (shell globs expand to multiple paths)
    #[arg(long, num_args = 1.., required = true)]
    pub runs: Vec<PathBuf>,
    /// Output directory for the tabular results
    #[arg(long, default_value = "analysis")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct BinArgs {
    /// Number of uniform bins on [t_min, t_max]
    #[arg(long, default_value_t = 41)]
    pub bins: usize,
    #[arg(long, default_value_t = -1.0)]
    pub t_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t_max: f64,
}

impl BinArgs {
    fn spec(&self) -> BinSpec {
        BinSpec { t_min: self.t_min, t_max: self.t_max, n_bins: self.bins }
    }
}

fn dt_rows(series: &[TimeBinFit]) -> Vec<String> {
    series
        .iter()
        .map(|bin| {
            let (d, se, r2) = match &bin.fit {
                Some(f) => (Some(f.exponent), Some(f.stderr), Some(f.r_squared)),
                None => (None, None, None),
            };
            format!(
                "{}\t{}\t{}\t{}\t{}",
                bin.t_center,
                opt(d),
                opt(se),
                opt(r2),
                bin.n_scales
            )
        })
        .collect()
}

const DT_HEADER: &str = "t_center\texponent\tstderr\tr_squared\tn_scales";

// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct FssArgs {
    #[command(flatten)]
    pub io: CommonIo,
    #[command(flatten)]
    pub bins: BinArgs,
}

fn fss(args: FssArgs) -> Result<()> {
    let runs = load::load_runs(&args.io.runs)?;
    let (mut truncated_weight, mut batches) = (0.0f64, 0usize);
    for run in &runs {
        for s in &run.stats {
            truncated_weight += s.truncation_rate * s.n_batches as f64;
            batches += s.n_batches;
        }
    }
    if batches > 0 {
        println!(
            "cascades truncated at the iteration cap: {:.2}% of {} batches",
            100.0 * truncated_weight / batches as f64,
            batches
        );
    }
    let scales = load::to_aligned_scales(&runs)?;
    print_scales(&scales);
    let bins = args.bins.spec();

    let d_series = analysis::fss_over_time(&scales, &bins, Observable::SMax)?;
    write_tsv(&args.io.out.join("dt_series_smax.tsv"), DT_HEADER, dt_rows(&d_series))?;
    let g_series = analysis::fss_over_time(&scales, &bins, Observable::SAvg)?;
    write_tsv(&args.io.out.join("dt_series_savg.tsv"), DT_HEADER, dt_rows(&g_series))?;

    let in_window: Vec<&TimeBinFit> =
        d_series.iter().filter(|b| b.t_center.abs() <= 0.5 && b.fit.is_some()).collect();
    if let (Some(first), Some(last)) = (in_window.first(), in_window.last()) {
        let (df, dl) =
            (first.fit.as_ref().unwrap().exponent, last.fit.as_ref().unwrap().exponent);
        println!(
            "D(t) in |t| <= 0.5: {} populated bins, D({:+.2}) = {:.3} ... D({:+.2}) = {:.3}",
            in_window.len(),
            first.t_center,
            df,
            last.t_center,
            dl
        );
    }
    let report = analysis::crossing_detector(&d_series, 0.5);
    print_crossing(&report);
    Ok(())
}

fn print_scales(scales: &[analysis::ScaleRuns]) {
    let desc: Vec<String> =
        scales.iter().map(|s| format!("N={} ({} runs)", s.n_params, s.runs.len())).collect();
    println!("scales: {}", desc.join(", "));
}

fn print_crossing(report: &analysis::CrossingReport) {
    match (&report.direction, report.t_cross) {
        (CrossingDirection::None, _) => {
            println!("crossing: none within |t| <= {}", report.window)
        }
        (dir, Some(t)) => println!("crossing: {:?} through D=1 at t = {:.3}", dir, t),
        (dir, None) => println!("crossing: {dir:?}"),
    }
    match report.d_at_zero {
        Some((d, se)) => println!("D_0 (bin containing t=0): {:.3} +- {:.3}", d, se),
        None => println!("D_0: bin at t=0 unpopulated"),
    }
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct BootstrapArgs {
    #[command(flatten)]
    pub io: CommonIo,
    #[arg(long, default_value_t = 5000)]
    pub resamples: usize,
    /// Seed of the per-resample PRNG streams
    #[arg(long, default_value_t = 42)]
    pub boot_seed: u64,
}

fn bootstrap(args: BootstrapArgs) -> Result<()> {
    let runs = load::load_runs(&args.io.runs)?;
    let scales = load::to_aligned_scales(&runs)?;
    print_scales(&scales);
    let split =
        analysis::bootstrap_phase_split(&scales, Observable::SMax, args.resamples, args.boot_seed)?;

    let mut hist_rows = Vec::new();
    let mut summary_rows = Vec::new();
    for summary in [&split.pre, &split.post].into_iter().flatten() {
        let phase = format!("{:?}", summary.phase).to_lowercase();
        for bin in &summary.histogram {
            hist_rows.push(format!("{phase}\t{}\t{}", bin.center, bin.count));
        }
        summary_rows.push(format!(
            "{phase}\t{}\t{}\t{}",
            summary.mean_d, summary.std_d, summary.n_resamples
        ));
        println!(
            "D_{phase} = {:.4} +- {:.4}  ({} resamples)",
            summary.mean_d, summary.std_d, summary.n_resamples
        );
    }
    write_tsv(&args.io.out.join("bootstrap_hist.tsv"), "phase\td_center\tcount", hist_rows)?;
    write_tsv(
        &args.io.out.join("bootstrap_summary.tsv"),
        "phase\tmean_d\tstd_d\tn_resamples",
        summary_rows,
    )?;
    if let (Some(pre), Some(post)) = (&split.pre, &split.post) {
        let separated = (pre.mean_d - pre.std_d) > (post.mean_d + post.std_d)
            || (post.mean_d - post.std_d) > (pre.mean_d + pre.std_d);
        println!(
            "phases separated by > 1 sigma each: {}",
            if separated { "yes" } else { "no" }
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct LooArgs {
    #[command(flatten)]
    pub io: CommonIo,
}

fn loo(args: LooArgs) -> Result<()> {
    let runs = load::load_runs(&args.io.runs)?;
    let scales = load::to_aligned_scales(&runs)?;
    print_scales(&scales);
    let rows = analysis::leave_one_scale_out(&scales, Observable::SMax)?;
    let mut out_rows = Vec::new();
    for row in &rows {
        println!(
            "omit N={:7}: D_pre = {:.4}, D_post = {:.4}",
            row.omitted_n, row.d_pre, row.d_post
        );
        out_rows.push(format!("{}\t{}\t{}", row.omitted_n, row.d_pre, row.d_post));
    }
    let spread = |f: fn(&analysis::LooRow) -> f64| {
        let vals: Vec<f64> = rows.iter().map(f).collect();
        vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - vals.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    println!(
        "max LOO shift: pre {:.4}, post {:.4}",
        spread(|r| r.d_pre),
        spread(|r| r.d_post)
    );
    write_tsv(&args.io.out.join("loo_table.tsv"), "omitted_n\td_pre\td_post", out_rows)?;
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct CcdfArgs {
    #[command(flatten)]
    pub io: CommonIo,
    /// Epoch window around each run's grokking epoch
    #[arg(long, default_value_t = 500)]
    pub window: u32,
    #[arg(long, default_value_t = 95.0)]
    pub cutoff_percentile: f64,
    /// Minimum pooled in-window epochs per scale
    #[arg(long, default_value_t = 50)]
    pub min_epochs: usize,
}

fn ccdf(args: CcdfArgs) -> Result<()> {
    let runs = load::load_runs(&args.io.runs)?;
    let pools = load::to_scale_pools(&runs)?;
    if pools.len() < 3 {
        // curves are still well-defined; only the cutoff fit is refused
        let curves = analysis::ccdf_curves(&pools, args.window);
        let mut rows = Vec::new();
        for curve in &curves {
            for (s, p) in &curve.points {
                rows.push(format!("{}\t{}\t{}", curve.n_params, s, p));
            }
        }
        write_tsv(&args.io.out.join("ccdf_points.tsv"), "n_params\ts_epoch\tccdf", rows)?;
        bail!(
            "cutoff fit refused: {} scale(s), need >= 3 (CCDF curves were still written)",
            pools.len()
        );
    }
    let out = analysis::ccdf_and_cutoff(&pools, args.window, args.cutoff_percentile, args.min_epochs)?;

    let mut ccdf_rows = Vec::new();
    for curve in &out.ccdfs {
        for (s, p) in &curve.points {
            ccdf_rows.push(format!("{}\t{}\t{}", curve.n_params, s, p));
        }
    }
    write_tsv(&args.io.out.join("ccdf_points.tsv"), "n_params\ts_epoch\tccdf", ccdf_rows)?;

    let mut collapse_rows = Vec::new();
    for curve in &out.collapsed {
        for (s, p) in &curve.points {
            collapse_rows.push(format!("{}\t{}\t{}", curve.n_params, s, p));
        }
    }
    write_tsv(
        &args.io.out.join("collapse_points.tsv"),
        "n_params\ts_epoch_rescaled\tccdf",
        collapse_rows,
    )?;

    let cutoff_rows: Vec<String> = out
        .cutoffs
        .iter()
        .zip(out.n_epochs.iter())
        .map(|((n, s_c), (_, count))| format!("{n}\t{s_c}\t{count}"))
        .collect();
    write_tsv(&args.io.out.join("cutoff_table.tsv"), "n_params\ts_c\tn_epochs", cutoff_rows)?;

    for (n, s_c) in &out.cutoffs {
        println!("N={n:7}: s_c = {s_c:.1}");
    }
    println!(
        "cutoff scaling: D_cut = {:.4} +- {:.4}, R^2 = {:.4}",
        out.fit.exponent, out.fit.stderr, out.fit.r_squared
    );
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct ShadowDeltaArgs {
    /// Run directories trained with probe_mode = shadow
    #[arg(long, num_args = 1.., required = true)]
    pub shadow_runs: Vec<PathBuf>,
    /// Run directories trained with probe_mode = on
    #[arg(long, num_args = 1.., required = true)]
    pub on_runs: Vec<PathBuf>,
    #[arg(long, default_value = "analysis")]
    pub out: PathBuf,
    /// Half window |t| <= window for the comparison
    #[arg(long, default_value_t = 0.5)]
    pub window: f64,
    #[command(flatten)]
    pub bins: BinArgs,
}

fn shadow_delta(args: ShadowDeltaArgs) -> Result<()> {
    let bins = args.bins.spec();
    let shadow_scales = load::to_aligned_scales(&load::load_runs(&args.shadow_runs)?)?;
    let on_scales = load::to_aligned_scales(&load::load_runs(&args.on_runs)?)?;
    let shadow_series = analysis::fss_over_time(&shadow_scales, &bins, Observable::SMax)?;
    let on_series = analysis::fss_over_time(&on_scales, &bins, Observable::SMax)?;
    let delta = analysis::shadow_delta(&shadow_series, &on_series, args.window)?;

    let rows: Vec<String> = delta
        .points
        .iter()
        .map(|(t, ds, don, dd)| format!("{t}\t{ds}\t{don}\t{dd}"))
        .collect();
    write_tsv(&args.out.join("delta_d.tsv"), "t_center\td_shadow\td_on\tdelta", rows)?;
    println!(
        "max |Delta D| over |t| <= {}: {:.4} ({} shared bins)",
        args.window,
        delta.max_abs,
        delta.points.len()
    );
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct CrossingArgs {
    #[command(flatten)]
    pub io: CommonIo,
    #[command(flatten)]
    pub bins: BinArgs,
    /// Half window |t| <= window for the scan
    #[arg(long, default_value_t = 0.5)]
    pub window: f64,
}

fn crossing(args: CrossingArgs) -> Result<()> {
    let runs = load::load_runs(&args.io.runs)?;
    let scales = load::to_aligned_scales(&runs)?;
    print_scales(&scales);
    let series = analysis::fss_over_time(&scales, &args.bins.spec(), Observable::SMax)?;
    let report = analysis::crossing_detector(&series, args.window);
    print_crossing(&report);

    let (d0, d0_se) = report.d_at_zero.map_or((None, None), |(d, s)| (Some(d), Some(s)));
    write_tsv(
        &args.io.out.join("crossing_report.tsv"),
        "direction\tt_cross\td0\td0_stderr\twindow",
        vec![format!(
            "{:?}\t{}\t{}\t{}\t{}",
            report.direction,
            opt(report.t_cross),
            opt(d0),
            opt(d0_se),
            report.window
        )],
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct EarlyWarningArgs {
    #[command(flatten)]
    pub io: CommonIo,
    /// Absolute probe epoch at which D is measured
    #[arg(long)]
    pub epoch: u32,
    /// Predict will-grok iff D <= threshold
    #[arg(long, default_value_t = 1.4)]
    pub threshold: f64,
    /// Fit quality gate
    #[arg(long, default_value_t = 0.95)]
    pub min_r2: f64,
}

/// Cohorts are seed-matched sets spanning the scale axis: runs sharing every
/// configuration axis except model size. A cohort's realized outcome is the
/// majority status of its members.
fn cohort_key(m: &RunManifest) -> String {
    let seed = m.train.as_ref().map(|t: &TrainConfig| t.seed).unwrap_or(0);
    let probe = m
        .train
        .as_ref()
        .map(|t| format!("a{}-q{}", t.probe_cfg.alpha, t.probe_cfg.threshold_percentile))
        .unwrap_or_default();
    let task = match &m.task {
        Some(TaskSpec::ModAdd { p, .. }) => format!("modadd{p}"),
        Some(TaskSpec::Xor) => "xor".to_string(),
        None => "ingested".to_string(),
    };
    format!("{task}-s{seed}-{probe}")
}

fn early_warning(args: EarlyWarningArgs) -> Result<()> {
    let runs = load::load_runs(&args.io.runs)?;
    let mut cohorts: BTreeMap<String, Vec<&LoadedRun>> = BTreeMap::new();
    for run in &runs {
        cohorts.entry(cohort_key(&run.manifest)).or_default().push(run);
    }

    let mut inputs = Vec::new();
    for (id, members) in &cohorts {
        // pool members per scale at the probe epoch
        let mut per_scale: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
        for run in members {
            if let Some(v) =
                analysis::observable_at_epoch(&run.stats, args.epoch, Observable::SMax)
            {
                per_scale.entry(run.manifest.n_params).or_default().push(v);
            }
        }
        let points: Vec<(f64, f64)> = per_scale
            .iter()
            .filter_map(|(n, vals)| {
                let positives: Vec<f64> = vals.iter().copied().filter(|v| *v > 0.0).collect();
                if positives.is_empty() {
                    None
                } else {
                    let gm = positives.iter().map(|v| v.ln()).sum::<f64>()
                        / positives.len() as f64;
                    Some((*n as f64, gm.exp()))
                }
            })
            .collect();
        if points.len() < 3 {
            eprintln!("note: cohort {id} has {} scales at epoch {}, skipped", points.len(), args.epoch);
            continue;
        }
        let grokked = members.iter().filter(|r| load::is_grokked(r)).count();
        inputs.push(EarlyWarningCohort {
            id: id.clone(),
            realized_grokked: 2 * grokked >= members.len(),
            points,
        });
    }
    if inputs.is_empty() {
        bail!("no cohort spans >= 3 scales at epoch {}", args.epoch);
    }

    let report = analysis::early_warning_classify(&inputs, args.threshold, args.min_r2)?;
    let rows: Vec<String> = report
        .rows
        .iter()
        .map(|r| {
            format!(
                "{}\t{}\t{}\t{}\t{}\t{}",
                r.id, r.d, r.r_squared, r.quality_ok, r.predicted_will_grok, r.realized_grokked
            )
        })
        .collect();
    write_tsv(
        &args.io.out.join("early_warning_report.tsv"),
        "cohort\td\tr_squared\tquality_ok\tpredicted_will_grok\trealized_grokked",
        rows,
    )?;

    for row in &report.rows {
        println!(
            "cohort {:30} D = {:.3} (R2 {:.3}{}) predicted {} realized {}",
            row.id,
            row.d,
            row.r_squared,
            if row.quality_ok { "" } else { ", below gate" },
            if row.predicted_will_grok { "grok" } else { "no-grok" },
            if row.realized_grokked { "grokked" } else { "ungrokked" },
        );
    }
    println!(
        "confusion: tp {} fp {} tn {} fn {}; accuracy {}",
        report.true_pos,
        report.false_pos,
        report.true_neg,
        report.false_neg,
        report.accuracy.map_or("na".to_string(), |a| format!("{a:.3}"))
    );

    // population-level separation, mirroring the absolute-time control
    let mut pop_points: BTreeMap<bool, BTreeMap<u64, Vec<f64>>> = BTreeMap::new();
    for run in &runs {
        if let Some(v) = analysis::observable_at_epoch(&run.stats, args.epoch, Observable::SMax) {
            pop_points
                .entry(load::is_grokked(run))
                .or_default()
                .entry(run.manifest.n_params)
                .or_default()
                .push(v);
        }
    }
    for (grokked, per_scale) in &pop_points {
        let scale_values: Vec<(u64, Vec<f64>)> =
            per_scale.iter().map(|(n, v)| (*n, v.clone())).collect();
        if scale_values.len() >= 3 {
            if let Ok(fit) = analysis::fit_at_epoch(&scale_values) {
                println!(
                    "population D at epoch {} ({}): {:.3} +- {:.3} (R2 {:.3}, {} scales)",
                    args.epoch,
                    if *grokked { "grokked" } else { "ungrokked" },
                    fit.exponent,
                    fit.stderr,
                    fit.r_squared,
                    fit.n_points
                );
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct SynthBaselineArgs {
    /// Scales N of the synthetic sweep
    #[arg(long, value_delimiter = ',', default_values_t = vec![2000usize, 4500, 9500, 20000])]
    pub scales: Vec<usize>,
    /// Graph variants as attach_m:build_seed pairs
    #[arg(long, value_delimiter = ',', default_values_t = vec!["2:11".to_string(), "2:12".to_string(), "3:13".to_string()])]
    pub variants: Vec<String>,
    #[arg(long, default_value_t = 1)]
    pub batches: usize,
    #[arg(long, default_value_t = 300)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "analysis")]
    pub out: PathBuf,
    /// Also write the synthetic cells as standard run directories here
    #[arg(long)]
    pub emit_runs: Option<PathBuf>,
}

fn synth_baseline(args: SynthBaselineArgs) -> Result<()> {
    let variants: Vec<GraphVariant> = args
        .variants
        .iter()
        .map(|s| -> Result<GraphVariant> {
            let (m, seed) = s
                .split_once(':')
                .with_context(|| format!("variant {s:?} is not attach_m:build_seed"))?;
            Ok(GraphVariant { attach_m: m.parse()?, build_seed: seed.parse()? })
        })
        .collect::<Result<_>>()?;
    let spec = SynthSpec {
        n_values: args.scales.clone(),
        batches_per_epoch: args.batches,
        epochs: args.epochs,
        sigma: args.sigma,
        seed: args.seed,
        graph_variants: variants,
    };
    let cells = generate_synthetic_run(&spec, &ProbeConfig::default())?;

    if let Some(root) = &args.emit_runs {
        for cell in &cells {
            let dir = root.join(&cell.run_id);
            std::fs::create_dir_all(&dir)?;
            store::write_avalanche_records(&dir.join(store::RECORDS_FILE), &cell.records)?;
            let manifest = RunManifest {
                run_id: cell.run_id.clone(),
                kind: RunKind::Synthetic,
                task: None,
                model: None,
                train: None,
                n_params: cell.n_params as u64,
                graph_digest: 0,
                graph_seed: cell.variant.build_seed,
                attach_m: cell.variant.attach_m,
                grok_epoch: None,
                status: RunStatus::Unknown,
                accuracy_trace_path: None,
                avalanche_record_path: store::RECORDS_FILE.to_string(),
                snapshot_paths: Vec::new(),
            };
            store::write_manifest(&dir, &manifest)?;
        }
        println!("emitted {} synthetic run directories under {}", cells.len(), root.display());
    }

    let baseline = fit_synth_baseline(&cells)?;
    let rows: Vec<String> = baseline
        .per_variant
        .iter()
        .map(|(v, fit)| {
            format!(
                "{}\t{}\t{}\t{}\t{}",
                v.attach_m, v.build_seed, fit.exponent, fit.stderr, fit.r_squared
            )
        })
        .collect();
    write_tsv(
        &args.out.join("synth_baseline.tsv"),
        "attach_m\tbuild_seed\td_synth\tstderr\tr_squared",
        rows,
    )?;
    for (v, fit) in &baseline.per_variant {
        println!(
            "variant m={} seed={:4}: D_synth = {:.4} +- {:.4} (R^2 {:.4})",
            v.attach_m, v.build_seed, fit.exponent, fit.stderr, fit.r_squared
        );
    }
    println!(
        "pooled D_synth = {:.4} (R^2 {:.4}); CV across {} variants = {:.3}%",
        baseline.pooled.exponent,
        baseline.pooled.r_squared,
        baseline.per_variant.len(),
        100.0 * baseline.exponent_cv
    );
    Ok(())
}

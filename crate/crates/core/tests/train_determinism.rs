//! Determinism and probe non-interference of the training loop.

use std::fs;
use std::path::{Path, PathBuf};
use tduofc::store::{self, GradientSnapshot};
use tduofc::train::*;

fn xor_inputs(dir: &Path, probe_mode: ProbeMode, snapshots: bool, epochs: u32) -> RunInputs {
    let mut train = TrainConfig::xor_default(7);
    train.max_epochs = epochs;
    train.probe_mode = probe_mode;
    train.snapshots = snapshots;
    RunInputs {
        run_id: "xor-det".into(),
        task: TaskSpec::Xor,
        model: ModelSpec::mlp(12),
        train,
        out_dir: dir.to_path_buf(),
    }
}

fn final_params(dir: &Path) -> GradientSnapshot {
    store::read_snapshot(&dir.join(store::PARAMS_FINAL_FILE)).unwrap()
}

#[test]
fn rerun_is_bit_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    train_run(&xor_inputs(&a, ProbeMode::Shadow, false, 300)).unwrap();
    train_run(&xor_inputs(&b, ProbeMode::Shadow, false, 300)).unwrap();

    assert_eq!(
        fs::read(a.join(store::RECORDS_FILE)).unwrap(),
        fs::read(b.join(store::RECORDS_FILE)).unwrap()
    );
    assert_eq!(
        fs::read(a.join(store::TRACE_FILE)).unwrap(),
        fs::read(b.join(store::TRACE_FILE)).unwrap()
    );
    assert_eq!(final_params(&a).values, final_params(&b).values);
}

#[test]
fn shadow_probe_does_not_touch_training() {
    let tmp = tempfile::tempdir().unwrap();
    let shadow = tmp.path().join("shadow");
    let off = tmp.path().join("off");
    let m_shadow = train_run(&xor_inputs(&shadow, ProbeMode::Shadow, false, 400)).unwrap();
    let m_off = train_run(&xor_inputs(&off, ProbeMode::Off, false, 400)).unwrap();

    // bit-identical parameter trajectory: every eval-epoch digest matches
    assert_eq!(
        fs::read_to_string(shadow.join(store::PARAM_DIGESTS_FILE)).unwrap(),
        fs::read_to_string(off.join(store::PARAM_DIGESTS_FILE)).unwrap()
    );
    let pa = final_params(&shadow);
    let pb = final_params(&off);
    assert_eq!(pa.values.len(), pb.values.len());
    for (x, y) in pa.values.iter().zip(pb.values.iter()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
    assert_eq!(m_shadow.grok_epoch, m_off.grok_epoch);
    assert_eq!(
        fs::read(shadow.join(store::TRACE_FILE)).unwrap(),
        fs::read(off.join(store::TRACE_FILE)).unwrap()
    );
    // and the shadow run actually probed every batch
    let recs = store::read_avalanche_records(&shadow.join(store::RECORDS_FILE)).unwrap();
    assert_eq!(recs.len(), 400);
    let off_recs = store::read_avalanche_records(&off.join(store::RECORDS_FILE)).unwrap();
    assert!(off_recs.is_empty());
}

#[test]
fn probe_on_changes_the_trajectory() {
    let tmp = tempfile::tempdir().unwrap();
    let shadow = tmp.path().join("s");
    let on = tmp.path().join("o");
    train_run(&xor_inputs(&shadow, ProbeMode::Shadow, false, 200)).unwrap();
    train_run(&xor_inputs(&on, ProbeMode::On, false, 200)).unwrap();
    assert_ne!(final_params(&shadow).values, final_params(&on).values);
}

#[test]
fn reprobing_snapshots_reproduces_live_records() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let manifest = train_run(&xor_inputs(&dir, ProbeMode::Shadow, true, 120)).unwrap();
    assert!(!manifest.snapshot_paths.is_empty());
    let live = store::read_avalanche_records(&dir.join(store::RECORDS_FILE)).unwrap();

    let graph = tduofc::graph::ParamGraph::build_ba(
        manifest.n_params as usize,
        manifest.attach_m,
        manifest.graph_seed,
    )
    .unwrap();
    let cfg = manifest.train.as_ref().unwrap().probe_cfg;
    for rel in &manifest.snapshot_paths {
        let snap = store::read_snapshot(&dir.join(rel)).unwrap();
        let grad: Vec<f64> = snap.values.iter().map(|&v| v as f64).collect();
        let tau = tduofc::cascade::compute_threshold(&grad, cfg.threshold_percentile).unwrap();
        let result = tduofc::cascade::run_cascade(&grad, &graph, &cfg, tau).unwrap();
        let live_rec = live
            .iter()
            .find(|r| r.epoch == snap.epoch && r.batch == snap.batch)
            .expect("live record for snapshot key");
        assert_eq!(live_rec.size, result.size);
        assert_eq!(live_rec.iterations, result.iterations_used);
        assert_eq!(live_rec.truncated, result.truncated);
        assert_eq!(live_rec.rotation_cos, result.rotation_cos);
    }
}

#[test]
fn ingest_external_snapshots_and_reject_mixed_n() {
    let tmp = tempfile::tempdir().unwrap();
    let dir: PathBuf = tmp.path().join("external");
    fs::create_dir_all(&dir).unwrap();
    for (epoch, n) in [(1u32, 16usize), (2, 16), (3, 16)] {
        let snap = GradientSnapshot {
            epoch,
            batch: 0,
            values: (0..n).map(|i| (i as f32 - 8.0) / 4.0).collect(),
        };
        store::write_snapshot(&dir.join(GradientSnapshot::file_name(epoch, 0)), &snap).unwrap();
    }
    let stub = store::IngestStub { run_id: "ext".into(), grok_epoch: None };
    let (manifest, snaps) = store::ingest_external_snapshots(&dir, &stub).unwrap();
    assert_eq!(snaps.n_params, 16);
    assert_eq!(snaps.files.len(), 3);
    assert_eq!(manifest.status, RunStatus::Unknown);
    assert!(manifest.grok_epoch.is_none());

    // aligned analyses are refused without g: alignment requires g >= 1
    assert!(manifest.grok_epoch.map(|_| ()).is_none());

    // mixed N is rejected and the offender is named
    let odd = GradientSnapshot { epoch: 9, batch: 0, values: vec![1.0; 8] };
    store::write_snapshot(&dir.join(GradientSnapshot::file_name(9, 0)), &odd).unwrap();
    match store::ingest_external_snapshots(&dir, &stub) {
        Err(store::StoreError::InconsistentN(msg)) => {
            assert!(msg.contains("N=8"), "message should list the offender: {msg}");
        }
        other => panic!("expected InconsistentN, got {other:?}"),
    }
}

#[test]
fn manifest_paths_are_checked() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let manifest = train_run(&xor_inputs(&dir, ProbeMode::Shadow, true, 40)).unwrap();
    store::check_manifest_paths(&dir, &manifest).unwrap();
    fs::remove_file(dir.join(&manifest.snapshot_paths[0])).unwrap();
    assert!(store::check_manifest_paths(&dir, &manifest).is_err());
}

#[test]
fn divergent_run_is_marked_failed_with_partial_records() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("diverge");
    let mut train = TrainConfig::xor_default(3);
    train.max_epochs = 2000;
    train.optimizer = OptimizerSpec::Sgd { lr: 1e12 };
    let inputs = RunInputs {
        run_id: "boom".into(),
        task: TaskSpec::Xor,
        model: ModelSpec::mlp(8),
        train,
        out_dir: dir.clone(),
    };
    let manifest = train_run(&inputs).unwrap();
    assert_eq!(manifest.status, RunStatus::Failed);
    assert!(manifest.grok_epoch.is_none());
    // partial records exist and parse
    let recs = store::read_avalanche_records(&dir.join(store::RECORDS_FILE)).unwrap();
    assert!(!recs.is_empty());
}

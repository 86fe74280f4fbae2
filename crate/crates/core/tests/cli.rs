mod common;

use std::fs;
use std::path::{Path, PathBuf};

use common::{cli, cli_output};
use ndarray::{Array1, Array2};
use serde_json::Value;
use speechcmd::audio::write_wav;
use speechcmd::dataset::{split, Augmentation, DatasetManifest, ManifestRecord, Split};
use speechcmd::dsp::AudioClip;
use speechcmd::head::{HeadParams, Layer};
use speechcmd::metrics::read_confusion_csv;
use speechcmd::rng::SplitMix64;
use speechcmd::storage::{write_checkpoint, write_embeddings, EmbeddingMatrix};
use speechcmd::synth::write_mini_corpus;
use tempfile::TempDir;

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Split manifest with `per_class` records per class and embeddings
/// `scale * e_label + sigma * noise`, one row per record.
fn embedding_fixture(
    dir: &Path,
    per_class: usize,
    scale: f32,
    sigma: f64,
) -> (PathBuf, PathBuf, DatasetManifest) {
    let records = (0..12)
        .flat_map(|label| {
            (0..per_class).map(move |i| ManifestRecord {
                path: format!("c{label:02}/{i:04}.wav"),
                label,
                split: None,
                augmentation: Augmentation::None,
                duration_s: 1.0,
            })
        })
        .collect();
    let manifest = split(&DatasetManifest::new(records, 0), 0.8, 3).unwrap();
    let mut rng = SplitMix64::new(4);
    let values = Array2::from_shape_fn((manifest.len(), 12), |(i, j)| {
        let centre = if manifest.records[i].label == j {
            scale
        } else {
            0.0
        };
        centre + (sigma * rng.normal()) as f32
    });
    let m_path = dir.join("manifest.jsonl");
    let e_path = dir.join("emb.emb1");
    manifest.write(&m_path).unwrap();
    write_embeddings(&EmbeddingMatrix { values }, &e_path).unwrap();
    (m_path, e_path, manifest)
}

fn linear_checkpoint(path: &Path, input_dim: usize, weight_scale: f64) {
    let mut layer = Layer::zeros(12, input_dim);
    for c in 0..12.min(input_dim) {
        layer.weight[[c, c]] = weight_scale;
    }
    layer.bias = Array1::zeros(12);
    write_checkpoint(
        &HeadParams {
            layers: vec![layer],
        },
        path,
    )
    .unwrap();
}

fn json_events(stderr: &str) -> Vec<Value> {
    stderr
        .lines()
        .filter_map(|l| serde_json::from_str(l).ok())
        .collect()
}

#[test]
fn missing_root_exits_3_and_names_the_path() {
    let dir = TempDir::new().unwrap();
    let root = dir.path().join("no-such-root");
    let out = dir.path().join("m.jsonl");
    let (code, _, err) = cli_output(&["prepare", s(&root), "--out", s(&out)]);
    assert_eq!(code, 3);
    assert!(err.contains("no-such-root"), "{err}");
    assert!(!out.exists());
}

#[test]
fn predict_silence_through_zero_checkpoint_is_uniform() {
    let dir = TempDir::new().unwrap();
    let ckpt = dir.path().join("zero.hdp");
    linear_checkpoint(&ckpt, 4900, 0.0);
    let wav = dir.path().join("quiet.wav");
    write_wav(&wav, &AudioClip::silence(16_000, 16_000)).unwrap();
    let (code, out, _) = cli_output(&["predict", "--checkpoint", s(&ckpt), s(&wav)]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("class yes"));
    let probs: Vec<f64> = lines
        .map(|l| l.split_whitespace().nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(probs.len(), 12);
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-3);
    assert!(probs.iter().all(|&p| (p - 1.0 / 12.0).abs() < 1e-6));
}

#[test]
fn predict_rejects_non_audio_and_missing_embeddings() {
    let dir = TempDir::new().unwrap();
    let ckpt = dir.path().join("zero.hdp");
    linear_checkpoint(&ckpt, 4900, 0.0);
    let text = dir.path().join("notes.wav");
    fs::write(&text, "definitely not RIFF data").unwrap();
    assert_eq!(cli(&["predict", "--checkpoint", s(&ckpt), s(&text)]), 2);

    let emb_ckpt = dir.path().join("emb.hdp");
    linear_checkpoint(&emb_ckpt, 12, 1.0);
    let wav = dir.path().join("quiet.wav");
    write_wav(&wav, &AudioClip::silence(8_000, 16_000)).unwrap();
    assert_eq!(cli(&["predict", "--checkpoint", s(&emb_ckpt), s(&wav)]), 2);
}

#[test]
fn predict_from_embedding_row() {
    let dir = TempDir::new().unwrap();
    let (_, emb, manifest) = embedding_fixture(dir.path(), 3, 1.0, 0.0);
    let ckpt = dir.path().join("id.hdp");
    linear_checkpoint(&ckpt, 12, 10.0);
    let row = manifest.records.iter().position(|r| r.label == 7).unwrap();
    let row = row.to_string();
    let (code, out, _) = cli_output(&[
        "predict",
        "--checkpoint",
        s(&ckpt),
        "--embeddings",
        s(&emb),
        "--row",
        &row,
    ]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("class off"));
}

#[test]
fn eval_of_a_perfect_model() {
    let dir = TempDir::new().unwrap();
    let (manifest_path, emb, manifest) = embedding_fixture(dir.path(), 10, 1.0, 0.0);
    let ckpt = dir.path().join("id.hdp");
    linear_checkpoint(&ckpt, 12, 10.0);
    let out_dir = dir.path().join("report");
    let (code, out, _) = cli_output(&[
        "eval",
        "--checkpoint",
        s(&ckpt),
        "--embeddings",
        s(&emb),
        "--manifest",
        s(&manifest_path),
        "--out-dir",
        s(&out_dir),
    ]);
    assert_eq!(code, 0);

    let metrics = fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    let mut rows = metrics.lines();
    assert_eq!(rows.next(), Some("metric,name,value"));
    for row in rows {
        let value: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(value, 1.0, "{row}");
    }

    let (names, cm) = read_confusion_csv(&out_dir.join("confusion.csv")).unwrap();
    assert_eq!(names.len(), 12);
    let val = manifest.split_counts(Split::Val);
    for (c, &count) in val.iter().enumerate() {
        assert_eq!(cm.row_sum(c) as usize, count);
    }
    let printed: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("overall_accuracy "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((printed - cm.trace() as f64 / cm.total() as f64).abs() < 1e-6);
}

#[test]
fn one_epoch_logs_ceil_n_over_128_steps() {
    let dir = TempDir::new().unwrap();
    let (manifest_path, emb, manifest) = embedding_fixture(dir.path(), 30, 3.0, 0.3);
    let n_train = manifest.indices_of(Split::Train).len();
    let (code, _, err) = cli_output(&[
        "--json",
        "train",
        "--embeddings",
        s(&emb),
        "--manifest",
        s(&manifest_path),
        "--out",
        s(&dir.path().join("h.hdp")),
        "--history",
        s(&dir.path().join("h.csv")),
        "--epochs",
        "1",
    ]);
    assert_eq!(code, 0, "{err}");
    let events = json_events(&err);
    let banner = events.iter().find(|e| e["event"] == "config").unwrap();
    assert_eq!(banner["config"]["train"]["epochs"], 1);
    let epochs: Vec<&Value> = events.iter().filter(|e| e["event"] == "epoch").collect();
    assert_eq!(epochs.len(), 1);
    assert_eq!(
        epochs[0]["steps"].as_u64().unwrap() as usize,
        n_train.div_ceil(128)
    );
    let done = events.iter().find(|e| e["event"] == "trained").unwrap();
    assert_eq!(
        done["optimizer_steps"].as_u64().unwrap() as usize,
        n_train.div_ceil(128)
    );
}

#[test]
fn default_training_writes_fifteen_epochs_and_banner() {
    let dir = TempDir::new().unwrap();
    let (manifest_path, emb, _) = embedding_fixture(dir.path(), 20, 3.0, 0.3);
    let ckpt = dir.path().join("h.hdp");
    let history = dir.path().join("h.csv");
    let (code, _, err) = cli_output(&[
        "train",
        "--embeddings",
        s(&emb),
        "--manifest",
        s(&manifest_path),
        "--out",
        s(&ckpt),
        "--history",
        s(&history),
        "--checkpoint-every-epoch",
    ]);
    assert_eq!(code, 0, "{err}");
    let banner = err.lines().find(|l| l.starts_with("[config]")).unwrap();
    for needle in [
        "\"epochs\":15",
        "\"batch_size\":128",
        "\"learning_rate\":0.0003",
    ] {
        assert!(banner.contains(needle), "{needle} missing from {banner}");
    }
    let text = fs::read_to_string(&history).unwrap();
    assert_eq!(text.lines().count(), 16);
    assert!(text.starts_with("epoch,train_loss,train_acc,val_loss,val_acc,seconds\n"));
    for epoch in 1..=15 {
        assert!(dir.path().join(format!("h.hdp.epoch{epoch:03}")).exists());
    }
    assert_eq!(
        fs::read(dir.path().join("h.hdp.epoch015")).unwrap(),
        fs::read(&ckpt).unwrap()
    );
}

#[test]
fn config_file_then_flags() {
    let dir = TempDir::new().unwrap();
    let (manifest_path, emb, _) = embedding_fixture(dir.path(), 10, 3.0, 0.3);
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "hidden_dims = [16]\n[train]\nepochs = 2\n").unwrap();
    let history = dir.path().join("h.csv");
    let ckpt = dir.path().join("h.hdp");
    let base = [
        "--config",
        s(&cfg),
        "train",
        "--embeddings",
        s(&emb),
        "--manifest",
        s(&manifest_path),
        "--out",
        s(&ckpt),
        "--history",
        s(&history),
    ];
    assert_eq!(cli(&base), 0);
    assert_eq!(fs::read_to_string(&history).unwrap().lines().count(), 3);
    let mut with_flag = base.to_vec();
    with_flag.extend(["--epochs", "4"]);
    assert_eq!(cli(&with_flag), 0);
    assert_eq!(fs::read_to_string(&history).unwrap().lines().count(), 5);
}

#[test]
fn width_mismatches_exit_2() {
    let dir = TempDir::new().unwrap();
    let (manifest_path, _, manifest) = embedding_fixture(dir.path(), 5, 1.0, 0.0);
    let short = dir.path().join("short.emb1");
    let values = Array2::<f32>::zeros((manifest.len() - 1, 12));
    write_embeddings(&EmbeddingMatrix { values }, &short).unwrap();
    let out = dir.path().join("h.hdp");
    let hist = dir.path().join("h.csv");
    assert_eq!(
        cli(&[
            "train",
            "--embeddings",
            s(&short),
            "--manifest",
            s(&manifest_path),
            "--out",
            s(&out),
            "--history",
            s(&hist)
        ]),
        2
    );

    let (_, emb, _) = embedding_fixture(dir.path(), 5, 1.0, 0.0);
    let wide = dir.path().join("wide.hdp");
    linear_checkpoint(&wide, 13, 1.0);
    assert_eq!(
        cli(&[
            "eval",
            "--checkpoint",
            s(&wide),
            "--embeddings",
            s(&emb),
            "--manifest",
            s(&manifest_path),
            "--out-dir",
            s(&dir.path().join("r"))
        ]),
        2
    );
}

#[test]
fn featurize_excludes_unreadable_clips_and_training_still_aligns() {
    let dir = TempDir::new().unwrap();
    let corpus = dir.path().join("corpus");
    write_mini_corpus(&corpus, 3, 8).unwrap();
    let manifest_path = dir.path().join("m.jsonl");
    assert_eq!(cli(&["prepare", s(&corpus), "--out", s(&manifest_path)]), 0);
    let manifest = DatasetManifest::read(&manifest_path).unwrap();
    let victim = manifest
        .records
        .iter()
        .find(|r| r.label == 2 && !r.is_augmented())
        .unwrap();
    fs::write(corpus.join(&victim.path), b"RIFF broken").unwrap();
    let dependents = manifest
        .records
        .iter()
        .filter(|r| r.path.split('#').next() == Some(victim.path.as_str()))
        .count();

    let fpz = dir.path().join("f.fpz");
    let (code, _, err) = cli_output(&[
        "featurize",
        s(&manifest_path),
        "--root",
        s(&corpus),
        "--out",
        s(&fpz),
    ]);
    assert_eq!(code, 0, "{err}");
    let bytes = fs::read(&fpz).unwrap();
    let word =
        |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize;
    assert_eq!(&bytes[..4], b"FPZ1");
    assert_eq!(
        (word(0), word(1), word(2)),
        (manifest.len() - dependents, 98, 50)
    );
    assert_eq!(bytes.len(), 16 + 4 * word(0) * 98 * 50);

    let sidecar: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("f.fpz.excluded.json")).unwrap())
            .unwrap();
    let excluded = sidecar["excluded"].as_array().unwrap();
    assert_eq!(excluded.len(), dependents);
    assert!(excluded.iter().all(|e| e["path"]
        .as_str()
        .unwrap()
        .starts_with(victim.path.as_str())));

    let again = dir.path().join("g.fpz");
    assert_eq!(
        cli(&[
            "featurize",
            s(&manifest_path),
            "--root",
            s(&corpus),
            "--out",
            s(&again)
        ]),
        0
    );
    assert_eq!(fs::read(&again).unwrap(), bytes);

    let code = cli(&[
        "train",
        "--features",
        s(&fpz),
        "--manifest",
        s(&manifest_path),
        "--out",
        s(&dir.path().join("h.hdp")),
        "--history",
        s(&dir.path().join("h.csv")),
        "--epochs",
        "1",
        "--hidden",
        "8",
    ]);
    assert_eq!(code, 0);
}

#[test]
fn pipeline_report_and_prediction_on_tone_corpus() {
    let dir = TempDir::new().unwrap();
    let corpus = dir.path().join("corpus");
    write_mini_corpus(&corpus, 12, 2024).unwrap();
    let work = dir.path().join("run");
    fs::create_dir_all(&work).unwrap();
    let run = common::run_pipeline(&corpus, &work, 0, &[]);
    for f in [
        "metrics.csv",
        "counts.csv",
        "confusion.csv",
        "confusion.svg",
        "curves.svg",
    ] {
        assert!(run.report.join(f).exists(), "{f}");
    }

    let rerender = dir.path().join("again");
    let code = cli(&[
        "report",
        "--confusion",
        s(&run.report.join("confusion.csv")),
        "--history",
        s(&run.history),
        "--out-dir",
        s(&rerender),
    ]);
    assert_eq!(code, 0);
    for f in [
        "metrics.csv",
        "confusion.csv",
        "curves.svg",
        "confusion.svg",
    ] {
        assert_eq!(
            fs::read(run.report.join(f)).unwrap(),
            fs::read(rerender.join(f)).unwrap(),
            "{f}"
        );
    }

    let mut yes: Vec<PathBuf> = fs::read_dir(corpus.join("yes"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    yes.sort();
    let (code, out, _) = cli_output(&["predict", "--checkpoint", s(&run.checkpoint), s(&yes[0])]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("class yes"));
}

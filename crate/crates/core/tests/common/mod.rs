//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::Command;

use ndarray::Array2;
use speechcmd::head::{cross_entropy, forward, HeadParams, Layer};

/// Power spectrum of a Hann-windowed frame by direct O(N^2) summation.
pub fn dft_power(frame: &[f64]) -> Vec<f64> {
    let n = frame.len();
    let windowed: Vec<f64> = frame
        .iter()
        .enumerate()
        .map(|(i, &x)| x * 0.5 * (1.0 - (2.0 * PI * i as f64 / (n - 1) as f64).cos()))
        .collect();
    (0..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (i, &x) in windowed.iter().enumerate() {
                // Reduce the phase index exactly before converting to an angle.
                let angle = 2.0 * PI * ((k * i) % n) as f64 / n as f64;
                re += x * angle.cos();
                im -= x * angle.sin();
            }
            re * re + im * im
        })
        .collect()
}

/// `|a - b| / max(|b|, floor)`.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / b.abs().max(floor)
}

/// Mean cross-entropy of `params` on a batch.
pub fn loss(params: &HeadParams, x: &Array2<f64>, labels: &[usize]) -> f64 {
    cross_entropy(&forward(params, x.view()).unwrap(), labels).unwrap()
}

/// Central finite-difference gradient of the mean loss.
pub fn numeric_gradient(
    params: &HeadParams,
    x: &Array2<f64>,
    labels: &[usize],
    h: f64,
) -> Vec<Layer> {
    let mut probe = params.clone();
    let mut out = Vec::new();
    for l in 0..params.layers.len() {
        let mut grad = Layer::zeros(params.layers[l].out_dim(), params.layers[l].in_dim());
        for idx in 0..grad.weight.len() {
            let (r, c) = (idx / grad.weight.ncols(), idx % grad.weight.ncols());
            let orig = probe.layers[l].weight[[r, c]];
            probe.layers[l].weight[[r, c]] = orig + h;
            let up = loss(&probe, x, labels);
            probe.layers[l].weight[[r, c]] = orig - h;
            let down = loss(&probe, x, labels);
            probe.layers[l].weight[[r, c]] = orig;
            grad.weight[[r, c]] = (up - down) / (2.0 * h);
        }
        for j in 0..grad.bias.len() {
            let orig = probe.layers[l].bias[j];
            probe.layers[l].bias[j] = orig + h;
            let up = loss(&probe, x, labels);
            probe.layers[l].bias[j] = orig - h;
            let down = loss(&probe, x, labels);
            probe.layers[l].bias[j] = orig;
            grad.bias[j] = (up - down) / (2.0 * h);
        }
        out.push(grad);
    }
    out
}

/// Run the `speechcmd` binary; returns the exit status. Output is captured
/// and replayed only when the command fails.
pub fn cli<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> i32 {
    let out = Command::new(env!("CARGO_BIN_EXE_speechcmd"))
        .args(args)
        .output()
        .expect("spawn speechcmd");
    let code = out.status.code().unwrap_or(-1);
    if code != 0 {
        eprintln!("{}", String::from_utf8_lossy(&out.stderr));
    }
    code
}

/// Run the `speechcmd` binary and capture `(status, stdout, stderr)`.
pub fn cli_output<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_speechcmd"))
        .args(args)
        .output()
        .expect("spawn speechcmd");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

/// Files produced by one prepare, featurize, train, eval pass.
pub struct PipelineRun {
    pub manifest: PathBuf,
    pub features: PathBuf,
    pub checkpoint: PathBuf,
    pub history: PathBuf,
    pub report: PathBuf,
}

impl PipelineRun {
    pub fn in_dir(work: &Path) -> Self {
        Self {
            manifest: work.join("manifest.jsonl"),
            features: work.join("features.fpz"),
            checkpoint: work.join("head.hdp"),
            history: work.join("history.csv"),
            report: work.join("report"),
        }
    }
}

/// Full command-line pipeline over a corpus; panics on a non-zero exit.
pub fn run_pipeline(corpus: &Path, work: &Path, seed: u64, extra_train: &[&str]) -> PipelineRun {
    let run = PipelineRun::in_dir(work);
    let seed = seed.to_string();
    let p = |path: &Path| path.as_os_str().to_owned();
    let steps: Vec<Vec<OsString>> = vec![
        vec![
            "--seed".into(),
            seed.clone().into(),
            "prepare".into(),
            p(corpus),
            "--out".into(),
            p(&run.manifest),
        ],
        vec![
            "--seed".into(),
            seed.clone().into(),
            "featurize".into(),
            p(&run.manifest),
            "--root".into(),
            p(corpus),
            "--out".into(),
            p(&run.features),
        ],
        {
            let mut v: Vec<OsString> = vec![
                "--seed".into(),
                seed.clone().into(),
                "train".into(),
                "--features".into(),
                p(&run.features),
                "--manifest".into(),
                p(&run.manifest),
                "--out".into(),
                p(&run.checkpoint),
                "--history".into(),
                p(&run.history),
            ];
            v.extend(extra_train.iter().map(OsString::from));
            v
        },
        vec![
            "eval".into(),
            "--checkpoint".into(),
            p(&run.checkpoint),
            "--features".into(),
            p(&run.features),
            "--manifest".into(),
            p(&run.manifest),
            "--out-dir".into(),
            p(&run.report),
            "--history".into(),
            p(&run.history),
        ],
    ];
    for args in steps {
        let code = cli(&args);
        assert_eq!(code, 0, "command failed: {args:?}");
    }
    run
}

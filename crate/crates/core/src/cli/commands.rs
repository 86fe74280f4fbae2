use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{
    EvalArgs, EventLog, FeatureSource, FeaturizeArgs, PredictArgs, PrepareArgs, ReportArgs,
    RunConfig, TrainArgs,
};
use crate::audio::read_wav;
use crate::dataset::{prepare as prepare_dataset, ClipLoader, DatasetManifest, Split};
use crate::dsp::Frontend;
use crate::error::{Error, Result};
use crate::head::{forward, predict as predict_rows, train_with, HeadParams, LabeledSet};
use crate::metrics::{
    confusion, metrics, read_confusion_csv, read_history_csv, render_report, write_history_csv,
};
use crate::storage::{
    read_checkpoint, read_embeddings, read_patches, write_checkpoint, write_patches, PatchSet,
};
use crate::LabelSet;

/// A manifest record left out of a feature file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub index: usize,
    pub path: String,
    pub reason: String,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct ExclusionList {
    excluded: Vec<Exclusion>,
}

/// Sidecar listing the records a feature file skipped: `<file>.excluded.json`.
pub fn exclusion_path(features: &Path) -> PathBuf {
    let mut name = features.as_os_str().to_owned();
    name.push(".excluded.json");
    PathBuf::from(name)
}

/// Exclusions recorded next to `features`; none when the sidecar is absent.
pub fn read_exclusions(features: &Path) -> Result<Vec<Exclusion>> {
    let path = exclusion_path(features);
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let list: ExclusionList = serde_json::from_str(&text)
        .map_err(|e| Error::format(0, format!("{}: {e}", path.display())))?;
    Ok(list.excluded)
}

/// Row of the feature matrix holding each manifest record, if any.
///
/// A matrix with one row per record aligns directly (excluded records are
/// dropped). A matrix with one row per non-excluded record aligns in order.
pub fn align_rows(
    n_records: usize,
    n_rows: usize,
    excluded: &[Exclusion],
) -> Result<Vec<Option<usize>>> {
    let mut skip = vec![false; n_records];
    for e in excluded {
        *skip.get_mut(e.index).ok_or_else(|| {
            Error::invalid(format!(
                "exclusion index {} beyond {n_records} records",
                e.index
            ))
        })? = true;
    }
    let kept = skip.iter().filter(|&&s| !s).count();
    if n_rows == n_records {
        Ok((0..n_records).map(|i| (!skip[i]).then_some(i)).collect())
    } else if n_rows == kept {
        let mut next = 0;
        Ok(skip
            .iter()
            .map(|&s| {
                (!s).then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect())
    } else {
        Err(Error::invalid(format!(
            "feature file has {n_rows} rows but the manifest has {n_records} records ({kept} usable)"
        )))
    }
}

fn load_matrix(source: &FeatureSource) -> Result<(Array2<f32>, Vec<Exclusion>)> {
    match (&source.features, &source.embeddings) {
        (Some(path), None) => Ok((read_patches(path)?.flattened(), read_exclusions(path)?)),
        (None, Some(path)) => Ok((read_embeddings(path)?.values, read_exclusions(path)?)),
        _ => Err(Error::invalid(
            "pass exactly one of --features or --embeddings",
        )),
    }
}

/// Feature rows and labels of one split.
fn split_set(
    manifest: &DatasetManifest,
    matrix: &Array2<f32>,
    rows: &[Option<usize>],
    split: Split,
) -> Result<LabeledSet> {
    let picked: Vec<(usize, usize)> = manifest
        .records
        .iter()
        .zip(rows)
        .filter(|(r, _)| r.split == Some(split))
        .filter_map(|(r, row)| row.map(|row| (row, r.label)))
        .collect();
    let idx: Vec<usize> = picked.iter().map(|p| p.0).collect();
    let labels = picked.iter().map(|p| p.1).collect();
    LabeledSet::new(matrix.select(Axis(0), &idx), labels)
}

fn load_split_sets(
    source: &FeatureSource,
    manifest_path: &Path,
) -> Result<(LabeledSet, LabeledSet)> {
    let manifest = DatasetManifest::read(manifest_path)?;
    if manifest.records.iter().all(|r| r.split.is_none()) {
        return Err(Error::invalid(format!(
            "{}: no records carry a split",
            manifest_path.display()
        )));
    }
    let (matrix, excluded) = load_matrix(source)?;
    let rows = align_rows(manifest.len(), matrix.nrows(), &excluded)?;
    Ok((
        split_set(&manifest, &matrix, &rows, Split::Train)?,
        split_set(&manifest, &matrix, &rows, Split::Val)?,
    ))
}

fn check_width(params: &HeadParams, width: usize) -> Result<()> {
    if params.input_dim() != width {
        return Err(Error::invalid(format!(
            "checkpoint expects {}-wide input, features are {width} wide",
            params.input_dim()
        )));
    }
    Ok(())
}

fn epoch_path(out: &Path, epoch: usize) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(format!(".epoch{epoch:03}"));
    PathBuf::from(name)
}

pub(super) fn prepare(args: &PrepareArgs, cfg: &RunConfig, log: &EventLog) -> Result<()> {
    let manifest = prepare_dataset(&args.root, &cfg.prepare)?;
    manifest.write(&args.out)?;
    for d in &manifest.diagnostics {
        log.emit("diagnostic", json!({ "message": d }));
    }
    log.emit(
        "prepared",
        json!({
            "out": args.out.display().to_string(),
            "records": manifest.len(),
            "classes": LabelSet.names(),
            "class_counts": manifest.class_counts,
            "train_counts": manifest.split_counts(Split::Train),
            "val_counts": manifest.split_counts(Split::Val),
        }),
    );
    Ok(())
}

pub(super) fn featurize(args: &FeaturizeArgs, cfg: &RunConfig, log: &EventLog) -> Result<()> {
    let manifest = DatasetManifest::read(&args.manifest)?;
    let frontend = Frontend::new(cfg.frontend)?;
    let mut loader = ClipLoader::new(&args.root);
    loader.preload(&manifest)?;
    let results: Vec<Result<_>> = manifest
        .records
        .par_iter()
        .map(|r| {
            let clip = loader.load(r)?;
            Ok(frontend.featurize(&clip, &r.path)?.swap_remove(0))
        })
        .collect();

    let mut patches = Vec::with_capacity(results.len());
    let mut excluded = ExclusionList::default();
    for (index, (record, result)) in manifest.records.iter().zip(results).enumerate() {
        match result {
            Ok(p) => patches.push(p),
            Err(e) => {
                log.emit(
                    "skipped",
                    json!({ "path": record.path, "reason": e.to_string() }),
                );
                excluded.excluded.push(Exclusion {
                    index,
                    path: record.path.clone(),
                    reason: e.to_string(),
                });
            }
        }
    }
    let (n_frames, n_bands) = cfg.frontend.patch_shape();
    write_patches(
        &PatchSet::from_patches(n_frames, n_bands, &patches)?,
        &args.out,
    )?;
    let sidecar = exclusion_path(&args.out);
    let text =
        serde_json::to_string_pretty(&excluded).map_err(|e| Error::invalid(e.to_string()))? + "\n";
    fs::write(&sidecar, text).map_err(|e| Error::io(&sidecar, e))?;
    log.emit(
        "featurized",
        json!({
            "out": args.out.display().to_string(),
            "n_patches": patches.len(),
            "n_frames": n_frames,
            "n_bands": n_bands,
            "excluded": excluded.excluded.len(),
        }),
    );
    Ok(())
}

pub(super) fn train(args: &TrainArgs, cfg: &RunConfig, log: &EventLog) -> Result<()> {
    let (train_set, val_set) = load_split_sets(&args.source, &args.manifest)?;
    let head_cfg = cfg.head_config(train_set.dim());
    let steps = cfg.train.steps_per_epoch(train_set.len());
    log.emit(
        "train_start",
        json!({
            "n_train": train_set.len(),
            "n_val": val_set.len(),
            "input_dim": head_cfg.input_dim,
            "widths": head_cfg.widths(),
            "steps_per_epoch": steps,
        }),
    );
    let (params, history) = train_with(
        &train_set,
        &val_set,
        &head_cfg,
        &cfg.train,
        |rec, params| {
            log.emit("epoch", serde_json::to_value(rec).unwrap_or_default());
            if args.checkpoint_every_epoch {
                write_checkpoint(params, &epoch_path(&args.out, rec.epoch))?;
            }
            Ok(())
        },
    )?;
    write_checkpoint(&params, &args.out)?;
    write_history_csv(&args.history, &history)?;
    let last = history.epochs.last();
    log.emit(
        "trained",
        json!({
            "checkpoint": args.out.display().to_string(),
            "history": args.history.display().to_string(),
            "optimizer_steps": history.total_steps(),
            "val_acc": last.map(|r| r.val_acc),
        }),
    );
    Ok(())
}

pub(super) fn eval(args: &EvalArgs, log: &EventLog) -> Result<()> {
    let params = read_checkpoint(&args.checkpoint)?;
    let (_, val_set) = load_split_sets(&args.source, &args.manifest)?;
    check_width(&params, val_set.dim())?;
    if val_set.is_empty() {
        return Err(Error::invalid("validation split is empty"));
    }
    let preds: Vec<usize> = predict_rows(&params, val_set.as_f64().view())?
        .iter()
        .map(|p| p.class)
        .collect();
    let cm = confusion(&preds, &val_set.labels, params.n_classes())?;
    let report = metrics(&cm)?;
    let history = args.history.as_deref().map(read_history_csv).transpose()?;
    let names = LabelSet.names();
    let files = render_report(&report, &cm, history.as_ref(), &names, &args.out_dir)?;
    println!("overall_accuracy {:.6}", report.overall_accuracy);
    println!("macro_f1 {:.6}", report.macro_avg.f1);
    log.emit(
        "evaluated",
        json!({
            "n_val": cm.total(),
            "correct": cm.trace(),
            "overall_accuracy": report.overall_accuracy,
            "macro_precision": report.macro_avg.precision,
            "macro_recall": report.macro_avg.recall,
            "macro_f1": report.macro_avg.f1,
            "macro_specificity": report.macro_avg.specificity,
            "metrics_csv": files.metrics_csv.display().to_string(),
        }),
    );
    Ok(())
}

pub(super) fn predict(args: &PredictArgs, cfg: &RunConfig, log: &EventLog) -> Result<()> {
    let params = read_checkpoint(&args.checkpoint)?;
    let probs: Vec<f64> = match (&args.embeddings, args.row) {
        (Some(path), Some(row)) => {
            let emb = read_embeddings(path)?;
            check_width(&params, emb.dim())?;
            if row >= emb.n_rows() {
                return Err(Error::invalid(format!(
                    "row {row} beyond {} rows",
                    emb.n_rows()
                )));
            }
            let x = emb
                .values
                .slice(ndarray::s![row..row + 1, ..])
                .mapv(f64::from);
            forward(&params, x.view())?.row(0).to_vec()
        }
        _ => {
            let (frames, bands) = cfg.frontend.patch_shape();
            if params.input_dim() != frames * bands {
                return Err(Error::invalid(format!(
                    "checkpoint expects {}-wide embeddings; pass --embeddings and --row",
                    params.input_dim()
                )));
            }
            let audio = args
                .audio
                .as_deref()
                .ok_or_else(|| Error::invalid("no audio clip given"))?;
            let clip = read_wav(audio)?;
            let patches =
                Frontend::new(cfg.frontend)?.featurize(&clip, &audio.display().to_string())?;
            let mut x = Array2::<f64>::zeros((patches.len(), frames * bands));
            for (mut row, p) in x.rows_mut().into_iter().zip(&patches) {
                row.iter_mut()
                    .zip(p.values.iter())
                    .for_each(|(d, &s)| *d = f64::from(s));
            }
            forward(&params, x.view())?
                .mean_axis(Axis(0))
                .ok_or_else(|| Error::invalid("clip produced no patches"))?
                .to_vec()
        }
    };
    let best = crate::head::argmax(probs.iter().copied());
    let names = LabelSet.names();
    let label = |i: usize| {
        names
            .get(i)
            .copied()
            .map_or_else(|| format!("class{i}"), str::to_string)
    };
    println!("class {}", label(best));
    for (i, p) in probs.iter().enumerate() {
        println!("{} {p:.6}", label(i));
    }
    log.emit(
        "predicted",
        json!({ "class": label(best), "probabilities": probs }),
    );
    Ok(())
}

pub(super) fn report(args: &ReportArgs, log: &EventLog) -> Result<()> {
    let (names, cm) = read_confusion_csv(&args.confusion)?;
    let report = metrics(&cm)?;
    let history = args.history.as_deref().map(read_history_csv).transpose()?;
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    render_report(&report, &cm, history.as_ref(), &names, &args.out_dir)?;
    println!("overall_accuracy {:.6}", report.overall_accuracy);
    log.emit(
        "reported",
        json!({ "out_dir": args.out_dir.display().to_string(), "overall_accuracy": report.overall_accuracy }),
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(index: usize) -> Exclusion {
        Exclusion {
            index,
            path: format!("r{index}"),
            reason: "bad".into(),
        }
    }

    #[test]
    fn align_full_and_compact() {
        let full = align_rows(4, 4, &[ex(1)]).unwrap();
        assert_eq!(full, vec![Some(0), None, Some(2), Some(3)]);
        let compact = align_rows(4, 3, &[ex(1)]).unwrap();
        assert_eq!(compact, vec![Some(0), None, Some(1), Some(2)]);
        assert_eq!(align_rows(4, 2, &[ex(1)]).unwrap_err().exit_code(), 2);
        assert!(align_rows(2, 2, &[ex(5)]).is_err());
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(
            exclusion_path(Path::new("out/f.fpz")),
            PathBuf::from("out/f.fpz.excluded.json")
        );
        assert_eq!(
            epoch_path(Path::new("h.hdp"), 3),
            PathBuf::from("h.hdp.epoch003")
        );
    }
}

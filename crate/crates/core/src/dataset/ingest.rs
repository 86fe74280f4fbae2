use std::fs;
use std::path::{Path, PathBuf};

use super::{segment_background, Augmentation, DatasetManifest, ManifestRecord};
use crate::audio::{probe_wav, read_wav};
use crate::dsp::{resample, TARGET_RATE};
use crate::error::{Error, Result};
use crate::labels::NOISE_DIR;
use crate::LabelSet;

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|entry| entry.map(|e| e.path()).map_err(|e| Error::io(dir, e)))
        .collect::<Result<_>>()?;
    out.sort();
    Ok(out)
}

fn is_wav(path: &Path) -> bool {
    path.is_file()
        && path
            .extension()
            .is_some_and(|ext| ext.eq_ignore_ascii_case("wav"))
}

fn relative(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// Scan a Speech Commands tree.
///
/// Files in a command-word directory get that command's label; files in any
/// other word directory become `unknown`. Each file in the noise directory
/// contributes one `background` record per whole second (after conversion
/// to 16 kHz), addressed as `<file>#seg<N>`. Unreadable files are skipped
/// and listed in the manifest diagnostics.
pub fn ingest(root: &Path, labels: &LabelSet) -> Result<DatasetManifest> {
    if !root.is_dir() {
        return Err(Error::io(
            root,
            std::io::Error::new(
                std::io::ErrorKind::NotFound,
                "dataset root is not a directory",
            ),
        ));
    }
    let mut records = Vec::new();
    let mut diagnostics = Vec::new();

    for dir in sorted_entries(root)?.into_iter().filter(|p| p.is_dir()) {
        let name = dir
            .file_name()
            .unwrap_or_default()
            .to_string_lossy()
            .to_string();
        let is_noise = name == NOISE_DIR;
        if name.starts_with('_') && !is_noise {
            continue;
        }
        for file in sorted_entries(&dir)?.into_iter().filter(|p| is_wav(p)) {
            let rel = relative(root, &file);
            if is_noise {
                match read_wav(&file).and_then(|clip| resample(&clip, TARGET_RATE)) {
                    Ok(clip) => {
                        let n = segment_background(std::slice::from_ref(&clip)).len();
                        records.extend((0..n).map(|i| ManifestRecord {
                            path: format!("{rel}#seg{i}"),
                            label: LabelSet::BACKGROUND,
                            split: None,
                            augmentation: Augmentation::None,
                            duration_s: 1.0,
                        }));
                    }
                    Err(e) => diagnostics.push(format!("skipped {rel}: {e}")),
                }
                continue;
            }
            match probe_wav(&file) {
                Ok((frames, rate)) if rate > 0 => records.push(ManifestRecord {
                    path: rel,
                    label: labels.classify_word(&name),
                    split: None,
                    augmentation: Augmentation::None,
                    duration_s: frames as f64 / rate as f64,
                }),
                Ok(_) => diagnostics.push(format!("skipped {rel}: zero sample rate")),
                Err(e) => diagnostics.push(format!("skipped {rel}: {e}")),
            }
        }
    }

    let mut manifest = DatasetManifest::new(records, 0);
    manifest.diagnostics = diagnostics;
    Ok(manifest)
}

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::LabelSet;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Augmentation {
    None,
    NoiseMixed { snr_db: f64, noise_path: String },
}

/// One manifest line.
///
/// `path` is relative to the dataset root and unique within a manifest. It
/// may carry fragments after the file name: `#seg<N>` selects the N-th
/// one-second segment of the file, `#mix<K>` marks the K-th noise-mixed
/// derivative of the clip before it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub path: String,
    pub label: usize,
    pub split: Option<Split>,
    pub augmentation: Augmentation,
    pub duration_s: f64,
}

/// Decomposed record path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClipSource<'a> {
    pub file: &'a str,
    pub segment: Option<usize>,
}

impl ManifestRecord {
    pub fn source(&self) -> Result<ClipSource<'_>> {
        parse_source(&self.path)
    }

    pub fn is_augmented(&self) -> bool {
        matches!(self.augmentation, Augmentation::NoiseMixed { .. })
    }
}

pub fn parse_source(path: &str) -> Result<ClipSource<'_>> {
    let mut parts = path.split('#');
    let file = parts.next().unwrap_or_default();
    if file.is_empty() {
        return Err(Error::invalid(format!("record path {path:?} has no file")));
    }
    let mut segment = None;
    for frag in parts {
        if let Some(n) = frag.strip_prefix("seg") {
            segment = Some(
                n.parse()
                    .map_err(|_| Error::invalid(format!("bad segment fragment in {path:?}")))?,
            );
        } else if !frag.starts_with("mix") {
            return Err(Error::invalid(format!(
                "unknown fragment {frag:?} in {path:?}"
            )));
        }
    }
    Ok(ClipSource { file, segment })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    version: u32,
    seed: u64,
    classes: Vec<String>,
    class_counts: Vec<usize>,
    #[serde(default)]
    diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub records: Vec<ManifestRecord>,
    pub seed: u64,
    pub class_counts: Vec<usize>,
    /// Files skipped during ingestion and other non-fatal notes.
    pub diagnostics: Vec<String>,
}

impl DatasetManifest {
    pub fn new(records: Vec<ManifestRecord>, seed: u64) -> Self {
        let mut m = Self {
            records,
            seed,
            class_counts: vec![0; LabelSet::N_CLASSES],
            diagnostics: Vec::new(),
        };
        m.canonicalize();
        m
    }

    /// Sort records by path and recompute class counts.
    pub fn canonicalize(&mut self) {
        self.records.sort_by(|a, b| a.path.cmp(&b.path));
        self.class_counts = vec![0; LabelSet::N_CLASSES];
        for r in &self.records {
            if let Some(c) = self.class_counts.get_mut(r.label) {
                *c += 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        let mut counts = vec![0; LabelSet::N_CLASSES];
        for r in &self.records {
            if r.label >= LabelSet::N_CLASSES {
                return Err(Error::invalid(format!(
                    "{}: label {} out of range",
                    r.path, r.label
                )));
            }
            if !seen.insert(r.path.as_str()) {
                return Err(Error::invalid(format!("duplicate record path {}", r.path)));
            }
            if let Augmentation::NoiseMixed { snr_db, .. } = &r.augmentation {
                if snr_db.is_nan() {
                    return Err(Error::invalid(format!("{}: SNR is NaN", r.path)));
                }
            }
            counts[r.label] += 1;
        }
        if counts != self.class_counts {
            return Err(Error::invalid(format!(
                "class counts {:?} do not match records {counts:?}",
                self.class_counts
            )));
        }
        Ok(())
    }

    pub fn indices_of(&self, split: Split) -> Vec<usize> {
        (0..self.records.len())
            .filter(|&i| self.records[i].split == Some(split))
            .collect()
    }

    pub fn split_counts(&self, split: Split) -> Vec<usize> {
        let mut counts = vec![0; LabelSet::N_CLASSES];
        for r in self.records.iter().filter(|r| r.split == Some(split)) {
            counts[r.label] += 1;
        }
        counts
    }

    /// JSON-lines text: one header line, then one line per record.
    pub fn to_jsonl(&self) -> Result<String> {
        let header = Header {
            version: MANIFEST_VERSION,
            seed: self.seed,
            classes: LabelSet.names().iter().map(|s| s.to_string()).collect(),
            class_counts: self.class_counts.clone(),
            diagnostics: self.diagnostics.clone(),
        };
        let mut out = Vec::new();
        let json = |e: serde_json::Error| Error::invalid(e.to_string());
        serde_json::to_writer(&mut out, &header).map_err(json)?;
        out.push(b'\n');
        for r in &self.records {
            serde_json::to_writer(&mut out, r).map_err(json)?;
            out.push(b'\n');
        }
        Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut offset = 0u64;
        let mut lines = text.split_inclusive('\n');
        let first = lines
            .next()
            .ok_or_else(|| Error::format(0, "empty manifest"))?;
        let header: Header = serde_json::from_str(first.trim_end())
            .map_err(|e| Error::format(0, format!("manifest header: {e}")))?;
        if header.version != MANIFEST_VERSION {
            return Err(Error::format(
                0,
                format!("unsupported manifest version {}", header.version),
            ));
        }
        offset += first.len() as u64;
        let mut records = Vec::new();
        for line in lines {
            let trimmed = line.trim_end();
            if !trimmed.is_empty() {
                let rec: ManifestRecord = serde_json::from_str(trimmed)
                    .map_err(|e| Error::format(offset, format!("manifest record: {e}")))?;
                records.push(rec);
            }
            offset += line.len() as u64;
        }
        let m = Self {
            records,
            seed: header.seed,
            class_counts: header.class_counts,
            diagnostics: header.diagnostics,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = self.to_jsonl()?;
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_jsonl(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(path: &str, label: usize) -> ManifestRecord {
        ManifestRecord {
            path: path.into(),
            label,
            split: Some(Split::Train),
            augmentation: Augmentation::None,
            duration_s: 1.0,
        }
    }

    #[test]
    fn jsonl_layout() {
        let mut m = DatasetManifest::new(vec![rec("yes/a.wav", 0)], 7);
        m.records.push(ManifestRecord {
            path: "yes/a.wav#mix0".into(),
            label: 0,
            split: None,
            augmentation: Augmentation::NoiseMixed {
                snr_db: 12.5,
                noise_path: "_background_noise_/n.wav#seg3".into(),
            },
            duration_s: 0.75,
        });
        m.canonicalize();
        let text = m.to_jsonl().unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with(r#"{"version":1,"seed":7,"classes":["yes","no","#));
        assert_eq!(
            lines[1],
            r#"{"path":"yes/a.wav","label":0,"split":"train","augmentation":{"kind":"none"},"duration_s":1.0}"#
        );
        assert_eq!(
            lines[2],
            r#"{"path":"yes/a.wav#mix0","label":0,"split":null,"augmentation":{"kind":"noise_mixed","snr_db":12.5,"noise_path":"_background_noise_/n.wav#seg3"},"duration_s":0.75}"#
        );
        assert_eq!(DatasetManifest::from_jsonl(&text).unwrap(), m);
    }

    #[test]
    fn duplicate_paths_rejected() {
        let m = DatasetManifest::new(vec![rec("a.wav", 0), rec("a.wav", 0)], 0);
        assert!(m.validate().is_err());
    }

    #[test]
    fn inconsistent_counts_rejected() {
        let mut text = DatasetManifest::new(vec![rec("yes/a.wav", 0)], 0)
            .to_jsonl()
            .unwrap();
        text = text.replacen("\"class_counts\":[1,", "\"class_counts\":[2,", 1);
        assert!(DatasetManifest::from_jsonl(&text).is_err());
    }

    #[test]
    fn bad_record_reports_offset() {
        let text = DatasetManifest::new(vec![], 0).to_jsonl().unwrap();
        let header_len = text.len() as u64;
        let broken = format!("{text}{{\"path\": 3}}\n");
        match DatasetManifest::from_jsonl(&broken) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, header_len),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn source_fragments() {
        let s = parse_source("_background_noise_/w.wav#seg17#mix2").unwrap();
        assert_eq!(s.file, "_background_noise_/w.wav");
        assert_eq!(s.segment, Some(17));
        assert_eq!(parse_source("yes/a.wav#mix0").unwrap().segment, None);
        assert!(parse_source("yes/a.wav#what").is_err());
    }
}

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::CohortSource;
use crate::features::{Group, SubjectMeta};
use crate::io::frames::read_frame_csv;
use crate::io::wav::read_wav;
use crate::signal::{extract_frame_features, Condition, ExtractionConfig, FrameFeatureRow};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordingEntry {
    /// WAV or frame CSV, relative to the manifest's directory unless absolute.
    pub path: PathBuf,
    pub condition: Condition,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub day: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestSubject {
    pub id: String,
    pub group: Group,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_id: Option<String>,
    pub recordings: Vec<RecordingEntry>,
}

impl ManifestSubject {
    pub fn meta(&self) -> SubjectMeta {
        SubjectMeta { id: self.id.clone(), group: self.group, pair_id: self.pair_id.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub subjects: Vec<ManifestSubject>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Manifest {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Checks id uniqueness, field day indices and path existence.
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for s in &self.subjects {
            if !seen.insert(s.id.as_str()) {
                return Err(Error::DuplicateSubject(s.id.clone()));
            }
            for r in &s.recordings {
                if r.condition == Condition::Field && r.day.is_none() {
                    return Err(Error::MissingDayIndex { subject: s.id.clone(), path: r.path.display().to_string() });
                }
                let full = self.resolve(&r.path);
                if !full.exists() {
                    return Err(Error::UnresolvablePath(full));
                }
            }
        }
        Ok(())
    }
}

pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut m: Manifest = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    m.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    m.validate()?;
    Ok(m)
}

pub fn write_manifest(m: &Manifest, path: &Path) -> Result<()> {
    let value = serde_json::to_value(m).map_err(|e| Error::Parse(e.to_string()))?;
    super::results::write_canonical_json(&value, path)
}

/// A manifest read through [`CohortSource`]. WAV recordings run through
/// frame extraction on every access; frame CSVs are read as cached.
#[derive(Debug, Clone)]
pub struct ManifestCohort {
    pub manifest: Manifest,
    pub extraction: ExtractionConfig,
}

impl ManifestCohort {
    pub fn new(manifest: Manifest, extraction: ExtractionConfig) -> Self {
        ManifestCohort { manifest, extraction }
    }

    fn rows_of(&self, subject: &ManifestSubject, entry: &RecordingEntry) -> Result<Vec<FrameFeatureRow>> {
        let path = self.manifest.resolve(&entry.path);
        let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        if is_csv {
            let tables = read_frame_csv(&path)?;
            let rows: Vec<FrameFeatureRow> = tables
                .into_iter()
                .filter(|t| t.subject_id == subject.id && t.condition == entry.condition && t.day == entry.day)
                .flat_map(|t| t.rows)
                .collect();
            if rows.is_empty() {
                return Err(Error::Parse(format!(
                    "{}: no rows for {} {} day {:?}",
                    path.display(),
                    subject.id,
                    entry.condition,
                    entry.day
                )));
            }
            Ok(rows)
        } else {
            let rec = read_wav(&path, &subject.id, entry.condition, entry.day)?;
            Ok(extract_frame_features(&rec, &self.extraction)?.rows)
        }
    }

    fn collect(&self, subject: usize, keep: impl Fn(&RecordingEntry) -> bool) -> Result<Option<Vec<FrameFeatureRow>>> {
        let s = &self.manifest.subjects[subject];
        let mut out: Option<Vec<FrameFeatureRow>> = None;
        for entry in s.recordings.iter().filter(|r| keep(r)) {
            out.get_or_insert_with(Vec::new).extend(self.rows_of(s, entry)?);
        }
        Ok(out)
    }
}

impl CohortSource for ManifestCohort {
    fn subjects(&self) -> Vec<SubjectMeta> {
        self.manifest.subjects.iter().map(ManifestSubject::meta).collect()
    }

    fn field_days(&self, subject: usize) -> Vec<u32> {
        let days: BTreeSet<u32> = self.manifest.subjects[subject]
            .recordings
            .iter()
            .filter(|r| r.condition == Condition::Field)
            .filter_map(|r| r.day)
            .collect();
        days.into_iter().collect()
    }

    fn field_rows(&self, subject: usize, day: u32) -> Result<Vec<FrameFeatureRow>> {
        Ok(self
            .collect(subject, |r| r.condition == Condition::Field && r.day == Some(day))?
            .unwrap_or_default())
    }

    fn lab_rows(&self, subject: usize, condition: Condition) -> Result<Option<Vec<FrameFeatureRow>>> {
        self.collect(subject, |r| r.condition == condition)
    }
}

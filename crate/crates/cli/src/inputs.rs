//! Discovery and loading of pathway files from the command line.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use ptc_core::codec::{deserialize_session, parse_csv, CodecError};
use ptc_core::exec::map_ordered;
use ptc_core::model::{rule_codes, validate};
use ptc_core::{Execution, PathwayRecord};
use walkdir::WalkDir;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FileKind {
    Csv,
    Session,
}

impl FileKind {
    pub fn of(path: &Path) -> Option<FileKind> {
        let name = path.file_name()?.to_str()?;
        if name.ends_with(".session") {
            Some(FileKind::Session)
        } else if name.ends_with(".csv") || name.ends_with(".txt") {
            Some(FileKind::Csv)
        } else {
            None
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", .path.display())]
    Walk {
        path: PathBuf,
        source: walkdir::Error,
    },
    #[error("{}: {source}", .path.display())]
    Parse { path: PathBuf, source: CodecError },
    #[error("subject id `{subject_id}` appears in both {} and {}", .first.display(), .second.display())]
    DuplicateSubjectId {
        subject_id: String,
        first: PathBuf,
        second: PathBuf,
    },
}

/// Expands files and directories into the recognised pathway files, in sorted
/// order. Explicit file arguments are taken as given.
pub fn collect_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>, InputError> {
    let mut out = Vec::new();
    for path in paths {
        if path.is_dir() {
            for entry in WalkDir::new(path).sort_by_file_name() {
                let entry = entry.map_err(|source| InputError::Walk {
                    path: path.clone(),
                    source,
                })?;
                if entry.file_type().is_file() && FileKind::of(entry.path()).is_some() {
                    out.push(entry.into_path());
                }
            }
        } else if path.exists() {
            out.push(path.clone());
        } else {
            return Err(InputError::Io {
                path: path.clone(),
                source: std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    "no such file or directory",
                ),
            });
        }
    }
    Ok(out)
}

pub fn load_file(path: &Path) -> Result<PathwayRecord, InputError> {
    let text = fs::read_to_string(path).map_err(|source| InputError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let parsed = match FileKind::of(path) {
        Some(FileKind::Session) => deserialize_session(&text),
        _ => parse_csv(&text),
    };
    parsed.map_err(|source| InputError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// One line of the validation report.
#[derive(Debug)]
pub struct FileReport {
    pub path: PathBuf,
    pub problems: Vec<String>,
}

impl FileReport {
    pub fn is_ok(&self) -> bool {
        self.problems.is_empty()
    }
}

pub fn check_file(path: &Path) -> FileReport {
    let problems = match load_file(path) {
        Ok(p) => rule_codes(&validate(&p))
            .into_iter()
            .map(|c| c.as_str().to_string())
            .collect(),
        Err(InputError::Parse { source, .. }) => codec_problem(&source),
        Err(e) => vec![format!("Unreadable ({e})")],
    };
    FileReport {
        path: path.to_path_buf(),
        problems,
    }
}

fn codec_problem(e: &CodecError) -> Vec<String> {
    let name = match e {
        CodecError::ParseValidation(v) | CodecError::InvalidPathway(v) => {
            return rule_codes(v)
                .into_iter()
                .map(|c| c.as_str().to_string())
                .collect()
        }
        CodecError::DateOutOfPivotRange(_) => "DateOutOfPivotRange",
        CodecError::MalformedDate(_) => "MalformedDate",
        CodecError::RowCountMismatch(_) => "RowCountMismatch",
        CodecError::ColumnCountMismatch { .. } => "ColumnCountMismatch",
        CodecError::MissingAnchors(_) => "MissingAnchors",
        CodecError::UnexpectedLeadingField(_) => "UnexpectedLeadingField",
        CodecError::NonChronological { .. } => "NonChronological",
        CodecError::SchemaVersionUnsupported(_) => "SchemaVersionUnsupported",
        CodecError::MalformedDocument(_) => "MalformedDocument",
    };
    vec![format!("{name} ({e})")]
}

pub fn check_files(files: &[PathBuf], exec: Execution) -> Vec<FileReport> {
    map_ordered(files, exec, |p| check_file(p))
}

/// Loads a cohort, one record per subject. A session file replaces a CSV
/// export of the same subject; any other repeat is an error.
pub fn load_cohort(files: &[PathBuf], exec: Execution) -> Result<Vec<PathwayRecord>, InputError> {
    let loaded = map_ordered(files, exec, |p| load_file(p).map(|r| (p.clone(), r)));
    let mut by_subject: BTreeMap<String, (FileKind, PathBuf, PathwayRecord)> = BTreeMap::new();
    for item in loaded {
        let (path, record) = item?;
        let kind = FileKind::of(&path).unwrap_or(FileKind::Csv);
        match by_subject.get(&record.subject_id) {
            Some((prev, _, _)) if *prev == FileKind::Session && kind == FileKind::Csv => continue,
            Some((prev, first, _)) if *prev == kind => {
                return Err(InputError::DuplicateSubjectId {
                    subject_id: record.subject_id.clone(),
                    first: first.clone(),
                    second: path,
                })
            }
            _ => {}
        }
        by_subject.insert(record.subject_id.clone(), (kind, path, record));
    }
    Ok(by_subject.into_values().map(|(_, _, r)| r).collect())
}

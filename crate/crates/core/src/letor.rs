//! LETOR 2.0 text format: `<label> qid:<id> 1:<v1> 2:<v2> ... [#<meta>]`.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::types::Record;

/// Read access to input files. Experiment code reads through this so tests
/// can observe which files are opened.
pub trait FileSource: Sync {
    fn read_to_string(&self, path: &Path) -> io::Result<String>;
}

/// Plain filesystem access.
#[derive(Debug, Clone, Copy, Default)]
pub struct Filesystem;

impl FileSource for Filesystem {
    fn read_to_string(&self, path: &Path) -> io::Result<String> {
        fs::read_to_string(path)
    }
}

pub fn parse_line(line: &str) -> Result<Record> {
    let (body, meta) = match line.find('#') {
        Some(pos) => (&line[..pos], line[pos + 1..].trim()),
        None => (line, ""),
    };
    let mut tokens = body.split_whitespace();

    let label_token = tokens.next().ok_or_else(|| Error::Parse("empty line".into()))?;
    let label: i64 = label_token
        .parse()
        .map_err(|_| Error::Parse(format!("non-numeric label '{label_token}'")))?;
    let label = u8::try_from(label).map_err(|_| Error::Parse(format!("label {label} out of range")))?;

    let query_id = match tokens.next().and_then(|t| t.strip_prefix("qid:")) {
        Some(id) if !id.is_empty() => id.to_string(),
        _ => return Err(Error::Parse("missing qid: token".into())),
    };

    let mut pairs: Vec<(usize, f64)> = Vec::new();
    for token in tokens {
        let (index, value) = token
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("malformed feature token '{token}'")))?;
        let index: usize = index
            .parse()
            .map_err(|_| Error::Parse(format!("non-numeric feature index '{index}'")))?;
        let value: f64 = value
            .parse()
            .map_err(|_| Error::Parse(format!("non-numeric feature value '{value}'")))?;
        pairs.push((index, value));
    }
    if pairs.is_empty() {
        return Err(Error::Parse("empty feature list".into()));
    }
    for window in pairs.windows(2) {
        if window[1].0 == window[0].0 {
            return Err(Error::Parse(format!("duplicate feature index {}", window[1].0)));
        }
        if window[1].0 < window[0].0 {
            return Err(Error::Parse(format!("non-ascending feature index {}", window[1].0)));
        }
    }
    for (expected, &(index, _)) in (1..).zip(&pairs) {
        if index != expected {
            return Err(Error::Parse(format!(
                "non-consecutive feature index {index} (expected {expected})"
            )));
        }
    }

    Ok(Record {
        query_id,
        label,
        features: pairs.into_iter().map(|(_, v)| v).collect(),
        meta: meta.to_string(),
    })
}

/// Parses every non-blank, non-comment line. Errors carry 1-based line
/// numbers.
pub fn parse_str(text: &str) -> Result<Vec<Record>> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let record = parse_line(trimmed).map_err(|e| Error::ParseLine {
            line: i + 1,
            message: match e {
                Error::Parse(m) => m,
                other => other.to_string(),
            },
        })?;
        records.push(record);
    }
    Ok(records)
}

pub fn parse_file(path: &Path) -> Result<Vec<Record>> {
    parse_file_from(&Filesystem, path)
}

pub fn parse_file_from(source: &dyn FileSource, path: &Path) -> Result<Vec<Record>> {
    let text = source.read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_str(&text).map_err(|e| match e {
        Error::ParseLine { line, message } => Error::ParseLine {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_score(score: f64) -> String {
    format!("{score}")
}

/// Canonical LETOR line for a record.
pub fn format_record(record: &Record) -> String {
    let mut line = format!("{} qid:{}", record.label, record.query_id);
    for (i, v) in record.features.iter().enumerate() {
        line.push_str(&format!(" {}:{}", i + 1, format_score(*v)));
    }
    if !record.meta.is_empty() {
        line.push_str(" #");
        line.push_str(&record.meta);
    }
    line
}

pub fn render_scores(scores: &[f64]) -> String {
    let mut out = String::new();
    for s in scores {
        out.push_str(&format_score(*s));
        out.push('\n');
    }
    out
}

/// Writes one score per line, in record order.
pub fn write_scores(records: &[Record], scores: &[f64], path: &Path) -> Result<()> {
    if records.len() != scores.len() {
        return Err(Error::LengthMismatch {
            what: "records vs scores",
            left: records.len(),
            right: scores.len(),
        });
    }
    fs::write(path, render_scores(scores)).map_err(|e| Error::io(path, e))
}

/// Reads a score file written by [`write_scores`].
pub fn read_scores(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse::<f64>().map_err(|_| Error::ParseLine {
                line: i + 1,
                message: format!("{}: non-numeric score '{}'", path.display(), l.trim()),
            })
        })
        .collect()
}

/// One train/validation/test split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSpec {
    pub fold_id: u32,
    pub train_path: PathBuf,
    pub validation_path: PathBuf,
    pub test_path: PathBuf,
}

impl FoldSpec {
    /// `<root>/Fold<id>/{train,vali,test}.txt`.
    pub fn in_root(root: &Path, fold_id: u32) -> Self {
        let dir = root.join(format!("Fold{fold_id}"));
        FoldSpec {
            fold_id,
            train_path: dir.join("train.txt"),
            validation_path: dir.join("vali.txt"),
            test_path: dir.join("test.txt"),
        }
    }

    /// Checks that all three files exist. Nothing is opened.
    pub fn check(&self) -> Result<()> {
        for path in [&self.train_path, &self.validation_path, &self.test_path] {
            let meta = fs::metadata(path).map_err(|e| Error::io(path, e))?;
            if !meta.is_file() {
                return Err(Error::io(
                    path,
                    io::Error::new(io::ErrorKind::InvalidInput, "not a regular file"),
                ));
            }
        }
        Ok(())
    }
}

/// Finds `Fold1`..`Fold5` under `root`.
pub fn locate_folds(root: &Path) -> Result<Vec<FoldSpec>> {
    let entries = fs::read_dir(root).map_err(|e| Error::io(root, e))?;
    let mut ids: Vec<u32> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(root, e))?;
        if !entry.path().is_dir() {
            continue;
        }
        if let Some(id) = entry
            .file_name()
            .to_str()
            .and_then(|n| n.strip_prefix("Fold"))
            .and_then(|n| n.parse::<u32>().ok())
        {
            ids.push(id);
        }
    }
    ids.sort_unstable();
    if ids != [1, 2, 3, 4, 5] {
        return Err(Error::FoldCount(ids.len()));
    }
    Ok(ids.into_iter().map(|id| FoldSpec::in_root(root, id)).collect())
}

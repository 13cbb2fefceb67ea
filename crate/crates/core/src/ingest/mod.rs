//! Reading and writing list files, curves, and reference bands.

mod curvefile;
mod listfile;

use thiserror::Error;

pub use curvefile::{emit_band, emit_curve, parse_document, BandDocument, CurveDocument, Document, Format, Metadata};
pub use listfile::{emit_listset, parse_listset, ListFileOptions, Orientation, ParsedListSet};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("malformed delimited text: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed structured record: {0}")]
    Json(#[from] serde_json::Error),
    #[error("document has no header row")]
    MissingHeader,
    #[error("document needs at least one list column")]
    NoLists,
    #[error("list {list:?} contains item {item:?} more than once")]
    DuplicateItem { list: String, item: String },
    #[error("item {0:?} appears on more than one row")]
    DuplicateRow(String),
    #[error("row {row} has an empty item label")]
    EmptyLabel { row: usize },
    #[error("list {list:?} has an observed entry at rank {row} after a missing one")]
    GapInList { list: String, row: usize },
    #[error("list {list:?} observes no items")]
    EmptyList { list: String },
    #[error("list {list:?}: observed ranks are not exactly 1..={expected_max} ({detail})")]
    NonContiguousRanks { list: String, expected_max: usize, detail: String },
    #[error("list {list:?}: tied value {value} (pass the mid-rank tie option to accept ties)")]
    Ties { list: String, value: String },
    #[error("list {list:?}, row {row}: {value:?} is not a valid {expected}")]
    InvalidNumber { list: String, row: usize, value: String, expected: &'static str },
    #[error("input is censored; the universe size must be given")]
    MissingUniverseSize,
    #[error("lists mention {items} distinct items but the universe size is {universe}")]
    UniverseTooSmall { items: usize, universe: usize },
    #[error("invalid metadata line {0:?}")]
    InvalidMetadata(String),
    #[error("unrecognized column layout: {0}")]
    UnknownLayout(String),
    #[error("structured record is missing field {0:?}")]
    MissingField(&'static str),
    #[error("invalid {what}: {detail}")]
    Invalid { what: &'static str, detail: String },
}

pub(crate) type MetadataLines = Vec<(String, String)>;

/// `# key: value` comment lines at the top of a delimited document.
pub(crate) fn split_metadata(text: &str) -> Result<(MetadataLines, &str), ParseError> {
    let mut meta = Vec::new();
    let mut rest = text;
    loop {
        let trimmed = rest.trim_start_matches(['\n', '\r']);
        if !trimmed.starts_with('#') {
            return Ok((meta, trimmed));
        }
        let (line, tail) = trimmed.split_once('\n').unwrap_or((trimmed, ""));
        let body = line.trim_start_matches('#').trim();
        if !body.is_empty() {
            let (k, v) = body.split_once(':').ok_or_else(|| ParseError::InvalidMetadata(line.to_string()))?;
            meta.push((k.trim().to_string(), v.trim().to_string()));
        }
        rest = tail;
    }
}

pub(crate) fn sniff_delimiter(body: &str) -> u8 {
    let header = body.lines().next().unwrap_or("");
    if header.contains('\t') {
        b'\t'
    } else {
        b','
    }
}

//! Reading and writing tag logs, text corpora and numeric output.
//!
//! Tag logs are delimited UTF-8 with a header naming `resource_id`, `tag`,
//! `seq` and optionally `user_id`. Rows are grouped per resource, ordered by
//! `seq` and renumbered from 1. Malformed rows are skipped and reported, not
//! fatal; a file without a single usable row is.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stream::{Tag, TagAssignment, TagStream};

#[derive(Debug, Clone, Copy)]
pub struct LogOptions {
    pub delimiter: u8,
}

impl Default for LogOptions {
    fn default() -> Self {
        LogOptions { delimiter: b'\t' }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    /// 1-based line number in the input, header included.
    pub row: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthSummary {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestionReport {
    pub streams_loaded: usize,
    pub assignments_loaded: usize,
    pub rows_rejected: usize,
    pub rejections: Vec<Rejection>,
    pub stream_lengths: LengthSummary,
}

impl IngestionReport {
    fn new(streams: &[TagStream], rejections: Vec<Rejection>) -> Self {
        let mut lengths: Vec<usize> = streams.iter().map(TagStream::len).collect();
        lengths.sort_unstable();
        let n = lengths.len();
        let median = if n % 2 == 1 {
            lengths[n / 2] as f64
        } else {
            (lengths[n / 2 - 1] + lengths[n / 2]) as f64 / 2.0
        };
        let total: usize = lengths.iter().sum();
        IngestionReport {
            streams_loaded: n,
            assignments_loaded: total,
            rows_rejected: rejections.len(),
            rejections,
            stream_lengths: LengthSummary {
                min: lengths[0],
                max: lengths[n - 1],
                mean: total as f64 / n as f64,
                median,
            },
        }
    }
}

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim() == name)
}

fn required_columns<const N: usize>(headers: &csv::StringRecord, names: [&str; N]) -> Result<[usize; N]> {
    let mut out = [0; N];
    for (slot, name) in out.iter_mut().zip(names) {
        *slot = column(headers, name).ok_or_else(|| Error::Ingestion {
            row: 1,
            reason: format!("header lacks a {name:?} column"),
        })?;
    }
    Ok(out)
}

struct Row<T> {
    seq: u64,
    payload: T,
}

/// Groups rows by resource, keeping the first row per `(resource, seq)`.
struct Grouper<T> {
    groups: BTreeMap<String, Vec<Row<T>>>,
    seen: HashSet<(String, u64)>,
    rejections: Vec<Rejection>,
}

impl<T> Grouper<T> {
    fn new() -> Self {
        Grouper {
            groups: BTreeMap::new(),
            seen: HashSet::new(),
            rejections: Vec::new(),
        }
    }

    fn reject(&mut self, row: u64, reason: impl Into<String>) {
        self.rejections.push(Rejection {
            row,
            reason: reason.into(),
        });
    }

    fn accept(&mut self, line: u64, resource: &str, seq: u64, payload: T) {
        if !self.seen.insert((resource.to_owned(), seq)) {
            self.reject(line, format!("duplicate seq {seq} for resource {resource:?}"));
            return;
        }
        self.groups
            .entry(resource.to_owned())
            .or_default()
            .push(Row { seq, payload });
    }

    fn sorted(self) -> (impl Iterator<Item = (String, Vec<T>)>, Vec<Rejection>) {
        let groups = self.groups.into_iter().map(|(id, mut rows)| {
            rows.sort_by_key(|r| r.seq);
            (id, rows.into_iter().map(|r| r.payload).collect())
        });
        (groups, self.rejections)
    }
}

fn parse_seq(raw: &str) -> std::result::Result<u64, String> {
    raw.trim()
        .parse::<u64>()
        .map_err(|_| format!("seq {raw:?} is not a non-negative integer"))
}

fn reader<R: Read>(input: R, opts: &LogOptions) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(true)
        .flexible(true)
        .from_reader(input)
}

/// Reads a tag log into per-resource streams ordered by resource id.
pub fn read_tag_log<R: Read>(input: R, opts: &LogOptions) -> Result<(Vec<TagStream>, IngestionReport)> {
    let mut rdr = reader(input, opts);
    let headers = rdr.headers()?.clone();
    let [c_res, c_tag, c_seq] = required_columns(&headers, ["resource_id", "tag", "seq"])?;
    let c_user = column(&headers, "user_id");

    let mut grouper = Grouper::new();
    for record in rdr.records() {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                if matches!(e.kind(), csv::ErrorKind::Io(_)) {
                    return Err(e.into());
                }
                grouper.reject(line, format!("unreadable row: {e}"));
                continue;
            }
        };
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i);
        let (Some(resource), Some(tag), Some(seq)) = (field(c_res), field(c_tag), field(c_seq)) else {
            grouper.reject(line, "missing columns");
            continue;
        };
        let resource = resource.trim();
        if resource.is_empty() {
            grouper.reject(line, "empty resource_id");
            continue;
        }
        let Ok(tag) = Tag::new(tag) else {
            grouper.reject(line, "empty tag");
            continue;
        };
        let seq = match parse_seq(seq) {
            Ok(s) => s,
            Err(reason) => {
                grouper.reject(line, reason);
                continue;
            }
        };
        let user = c_user
            .and_then(field)
            .map(str::trim)
            .filter(|u| !u.is_empty())
            .map(str::to_owned);
        grouper.accept(line, resource, seq, (tag, user));
    }

    let (groups, rejections) = grouper.sorted();
    let streams: Vec<TagStream> = groups
        .map(|(id, rows)| {
            let assignments = rows
                .into_iter()
                .enumerate()
                .map(|(i, (tag, user_id))| TagAssignment {
                    resource_id: id.clone().into(),
                    tag,
                    seq: i as u64 + 1,
                    user_id,
                })
                .collect();
            TagStream::from_assignments(id, assignments)
        })
        .collect::<Result<_>>()?;
    if streams.is_empty() {
        return Err(Error::NoData(format!(
            "no usable rows ({} rejected)",
            rejections.len()
        )));
    }
    let report = IngestionReport::new(&streams, rejections);
    Ok((streams, report))
}

pub fn ingest_tag_log(path: &Path, opts: &LogOptions) -> Result<(Vec<TagStream>, IngestionReport)> {
    read_tag_log(BufReader::new(File::open(path)?), opts)
}

#[derive(Debug, Clone, Default)]
pub struct TokenizerOptions {
    pub delimiter: Option<u8>,
    pub stopwords: HashSet<String>,
}

/// Lowercases and splits on every run of characters that are neither letters nor digits.
pub fn tokenize<'a>(text: &'a str, stopwords: &'a HashSet<String>) -> impl Iterator<Item = String> + 'a {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .filter(move |t| !stopwords.contains(t))
}

/// Reads a `resource_id, seq, text` corpus; every word becomes one assignment.
pub fn read_text_corpus<R: Read>(
    input: R,
    opts: &TokenizerOptions,
) -> Result<(Vec<TagStream>, IngestionReport)> {
    let log_opts = LogOptions {
        delimiter: opts.delimiter.unwrap_or(b'\t'),
    };
    let mut rdr = reader(input, &log_opts);
    let headers = rdr.headers()?.clone();
    let [c_res, c_seq, c_text] = required_columns(&headers, ["resource_id", "seq", "text"])?;

    let mut grouper = Grouper::new();
    for record in rdr.records() {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                if matches!(e.kind(), csv::ErrorKind::Io(_)) {
                    return Err(e.into());
                }
                grouper.reject(line, format!("unreadable row: {e}"));
                continue;
            }
        };
        let line = record.position().map_or(0, |p| p.line());
        let (Some(resource), Some(seq), Some(text)) = (record.get(c_res), record.get(c_seq), record.get(c_text)) else {
            grouper.reject(line, "missing columns");
            continue;
        };
        let resource = resource.trim();
        if resource.is_empty() {
            grouper.reject(line, "empty resource_id");
            continue;
        }
        let seq = match parse_seq(seq) {
            Ok(s) => s,
            Err(reason) => {
                grouper.reject(line, reason);
                continue;
            }
        };
        let tokens: Vec<String> = tokenize(text, &opts.stopwords).collect();
        grouper.accept(line, resource, seq, tokens);
    }

    let (groups, rejections) = grouper.sorted();
    let mut streams = Vec::new();
    for (id, texts) in groups {
        let tokens: Vec<String> = texts.into_iter().flatten().collect();
        if tokens.is_empty() {
            continue;
        }
        streams.push(TagStream::from_tags(id, tokens)?);
    }
    if streams.is_empty() {
        return Err(Error::NoData(format!(
            "no tokens in corpus ({} rows rejected)",
            rejections.len()
        )));
    }
    let report = IngestionReport::new(&streams, rejections);
    Ok((streams, report))
}

pub fn ingest_text_corpus(path: &Path, opts: &TokenizerOptions) -> Result<(Vec<TagStream>, IngestionReport)> {
    read_text_corpus(BufReader::new(File::open(path)?), opts)
}

/// Writes streams as a tab-separated tag log in canonical order.
///
/// The `user_id` column is emitted only when some assignment carries one.
pub fn write_tag_log<W: Write>(streams: &[TagStream], out: W) -> Result<()> {
    let with_users = streams
        .iter()
        .flat_map(|s| s.assignments())
        .any(|a| a.user_id.is_some());
    let mut ordered: Vec<&TagStream> = streams.iter().collect();
    ordered.sort_by(|a, b| a.resource_id().cmp(b.resource_id()));

    let mut w = csv::WriterBuilder::new().delimiter(b'\t').from_writer(out);
    if with_users {
        w.write_record(["resource_id", "tag", "seq", "user_id"])?;
    } else {
        w.write_record(["resource_id", "tag", "seq"])?;
    }
    for stream in ordered {
        for a in stream.assignments() {
            let seq = a.seq.to_string();
            if with_users {
                let user = a.user_id.as_deref().unwrap_or("");
                w.write_record([a.resource_id.as_str(), a.tag.as_str(), &seq, user])?;
            } else {
                w.write_record([a.resource_id.as_str(), a.tag.as_str(), &seq])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Formats `x` with six significant digits, keeping trailing zeros.
pub fn sig6(x: f64) -> String {
    const DIGITS: i32 = 6;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return format!("{:.*}", (DIGITS - 1) as usize, 0.0);
    }
    // Exponent after rounding to six digits, so 999999.7 moves to 1.00000e6.
    let rounded: f64 = format!("{:.*e}", (DIGITS - 1) as usize, x)
        .parse()
        .expect("formatted float parses");
    let exp = rounded.abs().log10().floor() as i32;
    if !(-4..DIGITS).contains(&exp) {
        format!("{:.*e}", (DIGITS - 1) as usize, x)
    } else {
        format!("{:.*}", (DIGITS - 1 - exp) as usize, x)
    }
}

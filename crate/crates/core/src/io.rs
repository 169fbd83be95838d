//! CoNLL and parallel-text readers, and the line-delimited record format.
//!
//! Records are written one JSON object per line. Keys appear in the order
//! the record type lists them, floats carry exactly six decimals
//! (non-finite values become `null`), and every line ends in `\n`, so equal
//! records always serialize to equal bytes.

use std::io::Write;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::oracle::Label;
use crate::refcheck::{ScoreGap, VerificationReport};
use crate::seq::{parse_tag, Tag, TagSeq, Token, TokenSeq, Vocab};
use crate::sim::{ComparisonRecord, TrendRow};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSentence {
    pub tokens: Vec<String>,
    pub tags: TagSeq,
}

/// Reads blank-line separated sentences. The token is the first column and
/// the tag the last; `-DOCSTART-` lines are skipped.
pub fn read_conll(document: &str) -> Result<Vec<TaggedSentence>> {
    let mut out = Vec::new();
    let mut current = TaggedSentence {
        tokens: Vec::new(),
        tags: Vec::new(),
    };
    let flush = |current: &mut TaggedSentence, out: &mut Vec<TaggedSentence>| {
        if !current.tokens.is_empty() {
            out.push(std::mem::replace(
                current,
                TaggedSentence {
                    tokens: Vec::new(),
                    tags: Vec::new(),
                },
            ));
        }
    };
    for (i, line) in document.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() {
            flush(&mut current, &mut out);
            continue;
        }
        if line.starts_with("-DOCSTART-") {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() < 2 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected at least 2 columns, found {}", cols.len()),
            });
        }
        let tag = parse_tag(cols[cols.len() - 1]).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        current.tokens.push(cols[0].to_string());
        current.tags.push(tag);
    }
    flush(&mut current, &mut out);
    Ok(out)
}

/// Two-column CoNLL: token and tag, sentences separated by a blank line.
pub fn write_conll(sentences: &[TaggedSentence], sink: &mut impl Write) -> Result<()> {
    for s in sentences {
        for (tok, tag) in s.tokens.iter().zip(&s.tags) {
            writeln!(sink, "{tok} {tag}")?;
        }
        writeln!(sink)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentencePair {
    pub source: TokenSeq,
    pub target: TokenSeq,
}

fn tokenize(line: &str, lowercase: bool) -> Vec<String> {
    line.split_whitespace()
        .map(|w| {
            if lowercase {
                w.to_lowercase()
            } else {
                w.to_string()
            }
        })
        .collect()
}

/// One pair per line, whitespace tokenized, interned into `vocab`.
pub fn read_parallel(
    src_doc: &str,
    tgt_doc: &str,
    lowercase: bool,
    vocab: &mut Vocab,
) -> Result<Vec<SentencePair>> {
    let src: Vec<&str> = src_doc.lines().collect();
    let tgt: Vec<&str> = tgt_doc.lines().collect();
    if src.len() != tgt.len() {
        return Err(Error::LineCountMismatch {
            source_lines: src.len(),
            target_lines: tgt.len(),
        });
    }
    src.iter()
        .zip(&tgt)
        .enumerate()
        .map(|(i, (s, t))| {
            let (s, t) = (tokenize(s, lowercase), tokenize(t, lowercase));
            if s.is_empty() || t.is_empty() {
                let side = if s.is_empty() { "source" } else { "target" };
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("empty {side} line"),
                });
            }
            Ok(SentencePair {
                source: vocab.encode(&s),
                target: vocab.encode(&t),
            })
        })
        .collect()
}

/// One whitespace-tokenized sentence per non-blank line.
pub fn read_lines(doc: &str, lowercase: bool, vocab: &mut Vocab) -> Vec<TokenSeq> {
    doc.lines()
        .map(|l| tokenize(l, lowercase))
        .filter(|w| !w.is_empty())
        .map(|w| vocab.encode(&w))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
    List(Vec<String>),
}

impl From<&str> for Field {
    fn from(s: &str) -> Self {
        Field::Str(s.to_string())
    }
}

impl From<String> for Field {
    fn from(s: String) -> Self {
        Field::Str(s)
    }
}

impl From<usize> for Field {
    fn from(n: usize) -> Self {
        Field::Int(n as i64)
    }
}

impl From<u64> for Field {
    fn from(n: u64) -> Self {
        Field::Int(n as i64)
    }
}

impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field::Float(x)
    }
}

impl From<bool> for Field {
    fn from(b: bool) -> Self {
        Field::Bool(b)
    }
}

impl From<Vec<String>> for Field {
    fn from(v: Vec<String>) -> Self {
        Field::List(v)
    }
}

/// Ordered key/value pairs.
pub type Record = Vec<(&'static str, Field)>;

pub trait ToRecord {
    fn to_record(&self) -> Record;
}

impl ToRecord for Record {
    fn to_record(&self) -> Record {
        self.clone()
    }
}

fn json_str(s: &str) -> String {
    Value::String(s.to_string()).to_string()
}

fn render_field(f: &Field) -> String {
    match f {
        Field::Str(s) => json_str(s),
        Field::Int(n) => n.to_string(),
        Field::Float(x) if x.is_finite() => format!("{x:.6}"),
        Field::Float(_) => "null".to_string(),
        Field::Bool(b) => b.to_string(),
        Field::List(items) => {
            let inner: Vec<String> = items.iter().map(|s| json_str(s)).collect();
            format!("[{}]", inner.join(","))
        }
    }
}

pub fn render_record(record: &Record) -> String {
    let body: Vec<String> = record
        .iter()
        .map(|(k, v)| format!("{}:{}", json_str(k), render_field(v)))
        .collect();
    format!("{{{}}}", body.join(","))
}

pub fn write_records<R: ToRecord>(records: &[R], sink: &mut impl Write) -> Result<()> {
    for r in records {
        writeln!(sink, "{}", render_record(&r.to_record()))?;
    }
    Ok(())
}

/// Parses the output of [`write_records`], keeping key order.
pub fn read_records(doc: &str) -> Result<Vec<Map<String, Value>>> {
    doc.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let parse_err = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            match serde_json::from_str::<Value>(l) {
                Ok(Value::Object(m)) => Ok(m),
                Ok(_) => Err(parse_err("expected a JSON object".into())),
                Err(e) => Err(parse_err(e.to_string())),
            }
        })
        .collect()
}

pub fn label_text(label: &Label, vocab: &Vocab) -> String {
    match label {
        Label::End => "<End>".to_string(),
        Label::Token(t) => vocab.decode(&[*t]),
    }
}

pub fn tokens_text(tokens: &[Token], vocab: &Vocab) -> Vec<String> {
    tokens.iter().map(|t| vocab.decode(&[*t])).collect()
}

pub fn tags_text(tags: &[Tag]) -> Vec<String> {
    tags.iter().map(Tag::to_string).collect()
}

impl ToRecord for ComparisonRecord {
    fn to_record(&self) -> Record {
        vec![
            ("record", "comparison".into()),
            ("sentence_id", self.sentence_id.into()),
            ("corruption", self.corruption.into()),
            ("beam_size", self.beam_size.into()),
            ("cut", self.cut.into()),
            ("gold_copy_score", self.gold_copy_score.into()),
            ("oracle_score", self.oracle_score.into()),
            ("delta", self.delta.into()),
            ("source", self.source.name().into()),
        ]
    }
}

impl ToRecord for TrendRow {
    fn to_record(&self) -> Record {
        vec![
            ("record", "trend".into()),
            ("corruption", self.corruption.into()),
            ("beam_size", self.beam_size.into()),
            ("records", self.records.into()),
            ("frac_improved", self.frac_improved.into()),
            ("mean_gold_copy", self.mean_gold_copy.into()),
            ("mean_delta", self.mean_delta.into()),
        ]
    }
}

/// `kind` is `"gap"` or `"counterexample"`.
pub fn gap_record(kind: &str, gap: &ScoreGap) -> Record {
    vec![
        ("record", kind.into()),
        ("input", gap.input.clone().into()),
        ("oracle_score", gap.oracle_score.into()),
        ("optimal_score", gap.optimal_score.into()),
    ]
}

impl ToRecord for VerificationReport {
    /// The summary line; gaps and counterexamples are separate records.
    fn to_record(&self) -> Record {
        vec![
            ("record", "verification".into()),
            ("oracle", self.oracle.name().into()),
            ("cases_run", self.cases_run.into()),
            ("agreements", self.agreements.into()),
            ("agreement_rate", self.agreement_rate().into()),
            ("gate", self.oracle.gate().into()),
            ("gate_violations", self.gate_violations.into()),
            ("score_gaps", self.score_gaps.len().into()),
            ("passed", self.passed().into()),
        ]
    }
}

/// Summary, then up to `gap_cap` gaps, then the capped counterexamples.
pub fn report_records(report: &VerificationReport, gap_cap: usize) -> Vec<Record> {
    let mut out = vec![report.to_record()];
    out.extend(
        report
            .score_gaps
            .iter()
            .take(gap_cap)
            .map(|g| gap_record("gap", g)),
    );
    out.extend(
        report
            .counterexamples
            .iter()
            .map(|g| gap_record("counterexample", g)),
    );
    out
}

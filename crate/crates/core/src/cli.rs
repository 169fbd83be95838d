//! `dynoracle` command line. Every subcommand prints line-delimited records
//! (see [`crate::io`]) on standard output.
//!
//! Exit codes: 0 success, 1 runtime or data error (or failed verification),
//! 2 usage error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::run_beam_cache_bench;
use crate::error::Error;
use crate::io::{
    label_text, read_conll, read_lines, report_records, tags_text, tokens_text, write_records,
    Field, Record, ToRecord,
};
use crate::metrics::{
    bleu4, levenshtein, rouge_l, rouge_n, span_counts, MatchCounts, MatchMode, ScoreTriple,
};
use crate::oracle::{
    complete_tags, select_supervision, wer_next, wer_rollout, BeamConfig, ScoreFn, TagOracle,
};
use crate::refcheck::{verify_oracle, FuzzConfig, OracleKind, PrefixMode};
use crate::seq::{parse_tags, Tag, TagSeq, Vocab};
use crate::sim::{trend_report, SimConfig};

#[derive(Debug, Parser)]
#[command(
    name = "dynoracle",
    version,
    about = "Dynamic oracles for sequence supervision"
)]
struct Cli {
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Record file to write.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score hypotheses against references.
    Score(ScoreArgs),
    /// Next supervision token and full completion for each prefix.
    Oracle(OracleArgs),
    /// Check an oracle against brute-force search.
    Verify(VerifyArgs),
    /// Corruption sweep comparing oracle and gold-copy supervision.
    Simulate(SimulateArgs),
    /// Time the beam oracle with and without the n-gram cache.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Metric {
    #[value(name = "f1-exact")]
    F1Exact,
    #[value(name = "f1-partial")]
    F1Partial,
    Wer,
    Rouge1,
    Rouge2,
    Rougel,
    Bleu4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleMetric {
    #[value(name = "f1-exact")]
    F1Exact,
    #[value(name = "f1-partial")]
    F1Partial,
    Wer,
    Rouge2,
    Bleu4,
}

impl OracleMetric {
    fn name(self) -> &'static str {
        self.kind().name()
    }

    fn kind(self) -> OracleKind {
        match self {
            OracleMetric::F1Exact => OracleKind::ExactF1,
            OracleMetric::F1Partial => OracleKind::PartialF1,
            OracleMetric::Wer => OracleKind::Wer,
            OracleMetric::Rouge2 => OracleKind::Rouge2,
            OracleMetric::Bleu4 => OracleKind::Bleu4,
        }
    }
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long, value_enum)]
    metric: Metric,
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long)]
    hyp: PathBuf,
    /// Read tag files as CoNLL columns instead of one sequence per line.
    #[arg(long)]
    conll: bool,
    #[arg(long)]
    lowercase: bool,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long, value_enum)]
    metric: OracleMetric,
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    prefix: PathBuf,
    #[arg(long, default_value_t = 5)]
    beam_size: usize,
    #[arg(long, default_value_t = 2)]
    beam_length: usize,
    #[arg(long)]
    lowercase: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    oracle: OracleMetric,
    #[arg(long, default_value_t = 1000)]
    cases: usize,
    /// Enumerate every input up to the maximum length instead of sampling.
    #[arg(long)]
    exhaustive: bool,
    /// Longest gold sequence (default 5 for token oracles, 8 for tags, 4 for
    /// exhaustive tags).
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(long, default_value_t = 3)]
    vocab: u32,
    /// Tag oracles: feed gold prefixes (gold with separated spans) instead of corrupted ones.
    #[arg(long)]
    gold_prefix: bool,
    /// Gaps written to the report file.
    #[arg(long, default_value_t = 100)]
    gap_cap: usize,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// One target sentence per line.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    corruption: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    beam_sizes: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    beam_length: usize,
    #[arg(long, value_enum, default_value = "bleu4")]
    metric: SimMetric,
    #[arg(long)]
    lowercase: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SimMetric {
    Rouge2,
    Bleu4,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    workload: Workload,
    #[arg(long, default_value_t = 50)]
    calls: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Workload {
    BeamCache,
}

/// Runtime failure: message for stderr, exit code 1.
struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure(e.to_string())
    }
}

type CliResult = std::result::Result<i32, Failure>;

fn read_file(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, records: &[Record]) -> std::result::Result<(), Failure> {
    let mut buf = Vec::new();
    write_records(records, &mut buf)?;
    fs::write(path, buf).map_err(|e| Failure(format!("cannot write {}: {e}", path.display())))
}

/// Lines of a file, blank lines kept (they are empty sequences).
fn raw_lines(doc: &str) -> Vec<&str> {
    doc.lines().collect()
}

fn paired<'a>(a: &'a str, b: &'a str) -> std::result::Result<Vec<(&'a str, &'a str)>, Failure> {
    let (a, b) = (raw_lines(a), raw_lines(b));
    if a.len() != b.len() {
        return Err(Error::LineCountMismatch {
            source_lines: a.len(),
            target_lines: b.len(),
        }
        .into());
    }
    Ok(a.into_iter().zip(b).collect())
}

fn words(line: &str, lowercase: bool) -> Vec<String> {
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

fn tag_line(line: &str, n: usize) -> std::result::Result<TagSeq, Failure> {
    parse_tags(line).map_err(|e| Failure(format!("line {n}: {e}")))
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        pool = pool.num_threads(jobs);
    }
    // Output is buffered so the worker pool never touches `out`.
    let mut buf = Vec::new();
    let result = match pool.build() {
        Ok(pool) => pool.install(|| dispatch(&cli, &mut buf)),
        Err(e) => Err(Failure(e.to_string())),
    };
    if let Err(e) = out.write_all(&buf).and_then(|()| out.flush()) {
        let _ = writeln!(err, "error: {e}");
        return 1;
    }
    match result {
        Ok(code) => code,
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

fn dispatch(cli: &Cli, out: &mut Vec<u8>) -> CliResult {
    let records = match &cli.command {
        Command::Score(a) => score(a)?,
        Command::Oracle(a) => oracle(a)?,
        Command::Bench(a) => bench(a, cli)?,
        Command::Verify(a) => return verify(a, cli, out),
        Command::Simulate(a) => {
            write_records(&simulate(a, cli)?, out)?;
            return Ok(0);
        }
    };
    write_records(&records, out)?;
    if let Some(path) = &cli.out {
        write_file(path, &records)?;
    }
    Ok(0)
}

fn score(a: &ScoreArgs) -> std::result::Result<Vec<Record>, Failure> {
    let ref_doc = read_file(&a.reference)?;
    let hyp_doc = read_file(&a.hyp)?;
    let mut rec: Record = vec![("record", "score".into())];

    if let Some(mode) = match a.metric {
        Metric::F1Exact => Some(MatchMode::Exact),
        Metric::F1Partial => Some(MatchMode::Partial),
        _ => None,
    } {
        let pairs: Vec<(TagSeq, TagSeq)> = if a.conll {
            let (r, h) = (read_conll(&ref_doc)?, read_conll(&hyp_doc)?);
            if r.len() != h.len() {
                return Err(Failure(format!(
                    "sentence count mismatch: ref has {}, hyp has {}",
                    r.len(),
                    h.len()
                )));
            }
            r.into_iter()
                .zip(h)
                .map(|(r, h)| (r.tags, h.tags))
                .collect()
        } else {
            paired(&ref_doc, &hyp_doc)?
                .into_iter()
                .enumerate()
                .map(|(i, (r, h))| Ok((tag_line(r, i + 1)?, tag_line(h, i + 1)?)))
                .collect::<std::result::Result<_, Failure>>()?
        };
        let mut counts = MatchCounts::default();
        for (r, h) in &pairs {
            counts += span_counts(h, r, mode)?;
        }
        let s = counts.scores();
        rec.extend([
            (
                "metric",
                Field::from(if mode == MatchMode::Exact {
                    "f1-exact"
                } else {
                    "f1-partial"
                }),
            ),
            ("sentences", pairs.len().into()),
            ("matched", counts.matched.into()),
            ("n_pred", counts.n_pred.into()),
            ("n_gold", counts.n_gold.into()),
            ("precision", s.precision.into()),
            ("recall", s.recall.into()),
            ("score", s.f1.into()),
        ]);
        return Ok(vec![rec]);
    }

    let mut vocab = Vocab::new();
    let pairs: Vec<_> = paired(&ref_doc, &hyp_doc)?
        .into_iter()
        .map(|(r, h)| {
            let r = vocab.encode(&words(r, a.lowercase));
            let h = vocab.encode(&words(h, a.lowercase));
            (r, h)
        })
        .collect();
    let n = pairs.len();
    let name = a
        .metric
        .to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string();
    rec.push(("metric", name.into()));
    rec.push(("sentences", n.into()));

    match a.metric {
        Metric::Wer => {
            let distance: usize = pairs.iter().map(|(r, h)| levenshtein(h, r)).sum();
            let ref_len: usize = pairs.iter().map(|(r, _)| r.len()).sum();
            let rate = if ref_len == 0 {
                if distance == 0 {
                    0.0
                } else {
                    f64::NAN
                }
            } else {
                distance as f64 / ref_len as f64
            };
            rec.extend([
                ("distance", distance.into()),
                ("ref_len", ref_len.into()),
                ("score", rate.into()),
            ]);
        }
        Metric::Bleu4 => {
            let total: f64 = pairs.iter().map(|(r, h)| bleu4(h, r)).sum();
            rec.push(("score", mean(total, n).into()));
        }
        Metric::Rouge1 | Metric::Rouge2 | Metric::Rougel => {
            let triples: Vec<ScoreTriple> = pairs
                .iter()
                .map(|(r, h)| match a.metric {
                    Metric::Rouge1 => rouge_n(h, r, 1),
                    Metric::Rouge2 => rouge_n(h, r, 2),
                    _ => rouge_l(h, r),
                })
                .collect();
            let p: f64 = triples.iter().map(|t| t.precision).sum();
            let r: f64 = triples.iter().map(|t| t.recall).sum();
            let f: f64 = triples.iter().map(|t| t.f1).sum();
            rec.extend([
                ("precision", mean(p, n).into()),
                ("recall", mean(r, n).into()),
                ("score", mean(f, n).into()),
            ]);
        }
        Metric::F1Exact | Metric::F1Partial => unreachable!("handled above"),
    }
    Ok(vec![rec])
}

fn mean(total: f64, n: usize) -> f64 {
    if n == 0 {
        f64::NAN
    } else {
        total / n as f64
    }
}

fn oracle(a: &OracleArgs) -> std::result::Result<Vec<Record>, Failure> {
    let gold_doc = read_file(&a.gold)?;
    let prefix_doc = read_file(&a.prefix)?;
    let pairs = paired(&gold_doc, &prefix_doc)?;
    let mut records = Vec::with_capacity(pairs.len());

    for (i, (g, p)) in pairs.into_iter().enumerate() {
        let mut rec: Record = vec![
            ("record", "oracle".into()),
            ("item", i.into()),
            ("metric", a.metric.name().into()),
        ];
        match a.metric {
            OracleMetric::F1Exact | OracleMetric::F1Partial => {
                let (oracle, mode) = if a.metric == OracleMetric::F1Exact {
                    (TagOracle::ExactF1, MatchMode::Exact)
                } else {
                    (TagOracle::PartialF1, MatchMode::Partial)
                };
                let gold = tag_line(g, i + 1)?;
                let prefix = tag_line(p, i + 1)?;
                let full = complete_tags(oracle, &gold, &prefix)?;
                let next = full
                    .get(prefix.len())
                    .map_or("<End>".to_string(), Tag::to_string);
                let s = span_counts(&full, &gold, mode)?.scores();
                rec.extend([
                    ("next", next.into()),
                    ("completion", tags_text(&full).into()),
                    ("score", s.f1.into()),
                ]);
            }
            OracleMetric::Wer => {
                let mut vocab = Vocab::new();
                let gold = vocab.encode(&words(g, a.lowercase));
                let prefix = vocab.encode(&words(p, a.lowercase));
                let next = wer_next(&gold, &prefix);
                let mut full = prefix.clone();
                full.extend(wer_rollout(&gold, &prefix));
                let distance = levenshtein(&full, &gold);
                rec.extend([
                    ("next", label_text(&next, &vocab).into()),
                    ("completion", tokens_text(&full, &vocab).into()),
                    ("distance", distance.into()),
                ]);
            }
            OracleMetric::Rouge2 | OracleMetric::Bleu4 => {
                let score_fn = if a.metric == OracleMetric::Rouge2 {
                    ScoreFn::Rouge2
                } else {
                    ScoreFn::Bleu4
                };
                let cfg = BeamConfig::new(a.beam_size, a.beam_length, score_fn)?;
                let mut vocab = Vocab::new();
                let gold = vocab.encode(&words(g, a.lowercase));
                let prefix = vocab.encode(&words(p, a.lowercase));
                let c = select_supervision(&prefix, &gold, &cfg)
                    .map_err(|e| Failure(format!("line {}: {e}", i + 1)))?;
                rec.extend([
                    ("next", label_text(&c.next_token, &vocab).into()),
                    ("completion", tokens_text(&c.completion, &vocab).into()),
                    ("source", c.source.name().into()),
                    ("oracle_score", c.oracle_score.into()),
                    ("gold_copy_score", c.gold_copy_score.into()),
                    ("score", c.chosen_score.into()),
                ]);
            }
        }
        records.push(rec);
    }
    Ok(records)
}

fn verify(a: &VerifyArgs, cli: &Cli, out: &mut Vec<u8>) -> CliResult {
    let kind = a.oracle.kind();
    let is_tag = matches!(kind, OracleKind::ExactF1 | OracleKind::PartialF1);
    let default_len = match (is_tag, a.exhaustive) {
        (true, true) => 4,
        (true, false) => 8,
        (false, _) => 5,
    };
    let cfg = FuzzConfig {
        cases: a.cases,
        seed: cli.seed,
        max_gold_len: a.max_len.unwrap_or(default_len),
        vocab_size: a.vocab,
        exhaustive: a.exhaustive,
        prefix_mode: if a.gold_prefix {
            PrefixMode::Gold
        } else {
            FuzzConfig::default().prefix_mode
        },
        separated_spans: a.gold_prefix,
        ..FuzzConfig::default()
    };
    if cfg.max_gold_len == 0 || cfg.vocab_size == 0 {
        return Err(Failure("--max-len and --vocab must be at least 1".into()));
    }
    let report = verify_oracle(kind, &cfg)?;
    let records = report_records(&report, a.gap_cap);
    write_records(&[report.to_record()], out)?;

    let path = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("verify-{}.jsonl", kind.name())));
    write_file(&path, &records)?;
    if report.passed() {
        Ok(0)
    } else {
        let mut rec: Record = vec![("record", "report".into())];
        rec.push(("path", path.display().to_string().into()));
        write_records(&[rec], out)?;
        Ok(1)
    }
}

fn simulate(a: &SimulateArgs, cli: &Cli) -> std::result::Result<Vec<Record>, Failure> {
    let doc = read_file(&a.corpus)?;
    let mut vocab = Vocab::new();
    let corpus = read_lines(&doc, a.lowercase, &mut vocab);
    let base = SimConfig {
        beam_length: a.beam_length,
        score_fn: match a.metric {
            SimMetric::Rouge2 => ScoreFn::Rouge2,
            SimMetric::Bleu4 => ScoreFn::Bleu4,
        },
        seed: cli.seed,
    };
    let report = trend_report(&corpus, &a.corruption, &a.beam_sizes, &base)?;
    let mut records: Vec<Record> = report.table.rows.iter().map(ToRecord::to_record).collect();
    if let Some(path) = &cli.out {
        // The file also gets every comparison; stdout only the table.
        let mut all = records.clone();
        all.extend(report.records.iter().map(ToRecord::to_record));
        write_file(path, &all)?;
        records.push(vec![
            ("record", "report".into()),
            ("path", path.display().to_string().into()),
        ]);
    }
    Ok(records)
}

fn bench(a: &BenchArgs, cli: &Cli) -> std::result::Result<Vec<Record>, Failure> {
    let Workload::BeamCache = a.workload;
    let r = run_beam_cache_bench(a.calls, cli.seed)?;
    Ok(vec![vec![
        ("record", "bench".into()),
        ("workload", "beam-cache".into()),
        ("calls", r.calls.into()),
        ("naive_ms", (r.naive.as_secs_f64() * 1e3).into()),
        ("cached_ms", (r.cached.as_secs_f64() * 1e3).into()),
        ("speedup", r.speedup().into()),
        ("identical", r.identical.into()),
    ]])
}

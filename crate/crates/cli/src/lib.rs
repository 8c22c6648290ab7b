//! Command-line front end: ingestion, analyses and simulation, all emitting
//! CSV with six significant digits.

mod grid;

use std::collections::HashSet;
use std::ffi::OsString;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use semstab::generators::{generate_corpus, load_background, zipf_background, GeneratorConfig, TagModel};
use semstab::io::{ingest_tag_log, ingest_text_corpus, sig6, write_tag_log, IngestionReport, LogOptions, TokenizerOptions};
use semstab::measures::{kl_random_baseline, kl_topk_trajectory, rbo_trajectory, BaselineConfig, RboParams, RboVariant};
use semstab::powerlaw::{ccdf, compare_distributions, fit_power_law, ModelComparison, PowerLawFit};
use semstab::stability::stability_surface;
use semstab::{Error, TagStream};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Data(m) => write!(f, "data error: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            // Bad flag values surface from the library as parameter errors.
            Error::Parameter { .. } | Error::OutOfRange { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

#[derive(Parser, Debug)]
#[command(name = "semstab", version, about = "Semantic stabilization of tag streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn parse_delimiter(raw: &str) -> Result<u8, String> {
    match raw {
        "\\t" | "tab" => Ok(b'\t'),
        s if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => Err(format!("delimiter {raw:?} must be a single ASCII character or \\t")),
    }
}

#[derive(Args, Debug)]
struct Input {
    /// Tag log (`resource_id, tag, seq[, user_id]`) or, with --text, a text corpus.
    log: PathBuf,
    /// Field delimiter: one ASCII character, or `\t`.
    #[arg(long, default_value = "\\t", value_parser = parse_delimiter)]
    delimiter: u8,
    /// Read a `resource_id, seq, text` corpus; every word becomes one tag.
    #[arg(long)]
    text: bool,
    /// Stopword file (one word per line) applied to --text input.
    #[arg(long, requires = "text")]
    stopwords: Option<PathBuf>,
}

fn in_file(path: &Path) -> impl Fn(Failure) -> Failure + '_ {
    move |f| match f {
        Failure::Data(m) => Failure::Data(format!("{}: {m}", path.display())),
        usage => usage,
    }
}

impl Input {
    fn load(&self, err: &mut dyn Write) -> CliResult<(Vec<TagStream>, IngestionReport)> {
        self.ingest().map_err(in_file(&self.log)).inspect(|(_, report)| {
            if report.rows_rejected > 0 {
                let _ = writeln!(err, "{}: {} rows rejected", self.log.display(), report.rows_rejected);
            }
        })
    }

    fn ingest(&self) -> CliResult<(Vec<TagStream>, IngestionReport)> {
        Ok(if self.text {
            let stopwords = match &self.stopwords {
                Some(p) => fs::read_to_string(p)?
                    .lines()
                    .map(|l| l.trim().to_lowercase())
                    .filter(|l| !l.is_empty())
                    .collect(),
                None => HashSet::new(),
            };
            let opts = TokenizerOptions { delimiter: Some(self.delimiter), stopwords };
            ingest_text_corpus(&self.log, &opts)?
        } else {
            ingest_tag_log(&self.log, &LogOptions { delimiter: self.delimiter })?
        })
    }
}

#[derive(Args, Debug)]
struct RboArgs {
    /// Persistence: weight decay per rank.
    #[arg(long, default_value_t = 0.9)]
    p: f64,
    /// Assignments per window.
    #[arg(long, default_value_t = 10)]
    window: usize,
    #[arg(long, default_value = "tie_corrected")]
    variant: RboVariant,
}

impl RboArgs {
    fn params(&self) -> CliResult<RboParams> {
        Ok(RboParams::new(self.p, self.variant)?)
    }
}

#[derive(Args, Debug)]
struct GridArgs {
    #[command(flatten)]
    rbo: RboArgs,
    /// Assignment counts, `a:b:step` (inclusive of b when b - a is a multiple of step) or one value.
    #[arg(long, value_parser = |s: &str| grid::parse_usize_grid(s).map(Grid))]
    t_grid: Grid<usize>,
    /// Thresholds in [0, 1], same syntax as --t-grid.
    #[arg(long, value_parser = |s: &str| grid::parse_f64_grid(s).map(Grid), default_value = "0:1:0.05")]
    k_grid: Grid<f64>,
}

#[derive(Clone, Debug)]
struct Grid<T>(Vec<T>);

#[derive(Clone, Copy, Debug, ValueEnum)]
#[value(rename_all = "snake_case")]
enum ModelKind {
    RandomUniform,
    Imitation,
    Background,
    Mixture,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ingest a log and print the ingestion report as JSON.
    Validate {
        #[command(flatten)]
        input: Input,
    },
    /// Proportions of each resource's top tags at every window boundary.
    Proportions {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 10)]
        window: usize,
        /// Number of tags (by final count) to report per resource.
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// RBO between consecutive cumulative windows.
    Rbo {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        rbo: RboArgs,
    },
    /// KL divergence of top-K rank frequencies M assignments apart.
    Kl {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 10)]
        m: usize,
        #[arg(long, default_value_t = 25)]
        k: usize,
    },
    /// Mean KL trajectory of uniform-random streams.
    KlBaseline {
        #[arg(long, default_value_t = 1000)]
        vocab: usize,
        #[arg(long, default_value_t = 10)]
        m: usize,
        #[arg(long, default_value_t = 25)]
        k: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Assignments per random stream.
        #[arg(long, default_value_t = 1000)]
        length: usize,
    },
    /// Power-law fit of tag frequencies with likelihood-ratio comparisons.
    Powerlaw {
        #[command(flatten)]
        input: Input,
        /// One row per resource, followed by mean and std rows.
        #[arg(long, conflicts_with = "pooled")]
        per_resource: bool,
        /// Fit the concatenated counts of all resources (default).
        #[arg(long)]
        pooled: bool,
    },
    /// Complementary CDF of each resource's tag frequencies.
    Ccdf {
        #[command(flatten)]
        input: Input,
    },
    /// Stabilization surface f(t, k): share of resources with RBO > k at t.
    Surface {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Generate synthetic tag streams and write them as a tag log.
    Simulate {
        #[arg(long, value_enum)]
        model: ModelKind,
        /// Probability of imitating an earlier assignment (mixture model).
        #[arg(long, default_value_t = 0.7)]
        imitation_rate: f64,
        /// Vocabulary size (uniform and imitation bootstrap, Zipf background).
        #[arg(long, default_value_t = 1000)]
        vocab: usize,
        /// Zipf exponent of the generated background.
        #[arg(long, default_value_t = 1.0)]
        zipf_s: f64,
        /// Background table (`token<TAB>count`, no header) replacing the Zipf background.
        #[arg(long)]
        background: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        length: usize,
        #[arg(long, default_value_t = 1)]
        streams: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Surfaces of several logs in one long-form table.
    Compare {
        #[arg(required = true, num_args = 1..)]
        logs: Vec<PathBuf>,
        #[arg(long, default_value = "\\t", value_parser = parse_delimiter)]
        delimiter: u8,
        #[command(flatten)]
        grid: GridArgs,
    },
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
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out, err).and_then(|()| out.flush().map_err(Failure::from)) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "semstab: {f}");
            match f {
                Failure::Usage(_) => EXIT_USAGE,
                Failure::Data(_) => EXIT_DATA,
            }
        }
    }
}

fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::Writer::from_writer(out)
}

fn positive(name: &str, v: usize) -> CliResult {
    if v == 0 {
        return Err(Failure::Usage(format!("--{name} must be at least 1")));
    }
    Ok(())
}

/// Runs `f` per stream in parallel, keeping input order; streams it rejects
/// are reported on stderr and skipped.
fn per_stream<'a, T: Send>(
    streams: &'a [TagStream],
    err: &mut dyn Write,
    f: impl Fn(&TagStream) -> semstab::Result<T> + Sync,
) -> CliResult<Vec<(&'a TagStream, T)>> {
    let results: Vec<_> = streams.par_iter().map(|s| (s, f(s))).collect();
    let mut kept = Vec::with_capacity(results.len());
    for (s, r) in results {
        match r {
            Ok(v) => kept.push((s, v)),
            Err(e @ (Error::Parameter { .. } | Error::OutOfRange { .. })) => return Err(e.into()),
            Err(e) => {
                let _ = writeln!(err, "skipping {}: {e}", s.resource_id());
            }
        }
    }
    if kept.is_empty() {
        return Err(Failure::Data("no resource has enough data for this analysis".into()));
    }
    Ok(kept)
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    match command {
        Command::Validate { input } => {
            let (_, report) = input.load(err)?;
            serde_json::to_writer_pretty(&mut *out, &report).map_err(|e| Failure::Data(e.to_string()))?;
            writeln!(out)?;
        }
        Command::Proportions { input, window, top } => {
            positive("window", window)?;
            positive("top", top)?;
            let (streams, _) = input.load(err)?;
            let rows = per_stream(&streams, err, |s| {
                let final_counts = s.snapshot(s.len())?;
                let mut ranked: Vec<_> = final_counts.counts().iter().collect();
                ranked.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
                let tags: Vec<_> = ranked.into_iter().take(top).map(|(t, _)| t.clone()).collect();
                Ok((tags, s.proportion_trajectory(window)?))
            })?;
            let mut w = csv_writer(out);
            w.write_record(["resource_id", "t", "tag", "proportion"])?;
            for (s, (tags, traj)) in rows {
                for pt in traj {
                    let t = pt.t.to_string();
                    for tag in &tags {
                        let v = pt.proportions.get(tag).copied().unwrap_or(0.0);
                        w.write_record([s.resource_id().as_str(), &t, tag.as_str(), &sig6(v)])?;
                    }
                }
            }
            w.flush()?;
        }
        Command::Rbo { input, rbo } => {
            let params = rbo.params()?;
            positive("window", rbo.window)?;
            let (streams, _) = input.load(err)?;
            let rows = per_stream(&streams, err, |s| rbo_trajectory(s, rbo.window, &params))?;
            let mut w = csv_writer(out);
            w.write_record(["resource_id", "t", "rbo"])?;
            for (s, traj) in rows {
                for pt in traj.points {
                    w.write_record([s.resource_id().as_str(), &pt.t.to_string(), &sig6(pt.rbo)])?;
                }
            }
            w.flush()?;
        }
        Command::Kl { input, m, k } => {
            positive("m", m)?;
            positive("k", k)?;
            let (streams, _) = input.load(err)?;
            let rows = per_stream(&streams, err, |s| kl_topk_trajectory(s, m, k))?;
            let mut w = csv_writer(out);
            w.write_record(["resource_id", "n", "kl"])?;
            for (s, traj) in rows {
                for pt in traj {
                    w.write_record([s.resource_id().as_str(), &pt.n.to_string(), &sig6(pt.kl)])?;
                }
            }
            w.flush()?;
        }
        Command::KlBaseline { vocab, m, k, trials, seed, length } => {
            positive("m", m)?;
            positive("k", k)?;
            let cfg = BaselineConfig { window: m, k, vocabulary: vocab, length, trials, seed };
            let points = kl_random_baseline(&cfg)?;
            let mut w = csv_writer(out);
            w.write_record(["n", "mean_kl"])?;
            for pt in points {
                w.write_record([pt.n.to_string(), sig6(pt.mean_kl)])?;
            }
            w.flush()?;
        }
        Command::Powerlaw { input, per_resource, pooled: _ } => {
            let (streams, _) = input.load(err)?;
            powerlaw(&streams, per_resource, out, err)?;
        }
        Command::Ccdf { input } => {
            let (streams, _) = input.load(err)?;
            let rows = per_stream(&streams, err, |s| ccdf(&s.snapshot(s.len())?.rank_frequencies()))?;
            let mut w = csv_writer(out);
            w.write_record(["resource_id", "value", "ccdf"])?;
            for (s, points) in rows {
                for pt in points {
                    w.write_record([s.resource_id().as_str(), &pt.value.to_string(), &sig6(pt.ccdf)])?;
                }
            }
            w.flush()?;
        }
        Command::Surface { input, grid } => {
            let (streams, _) = input.load(err)?;
            let mut w = csv_writer(out);
            w.write_record(["t", "k", "f"])?;
            for (t, k, f) in surface_cells(&streams, &grid)? {
                w.write_record([t.to_string(), sig6(k), sig6(f)])?;
            }
            w.flush()?;
        }
        Command::Compare { logs, delimiter, grid } => {
            let mut w = csv_writer(out);
            w.write_record(["dataset", "t", "k", "f"])?;
            for path in &logs {
                let name = dataset_name(path);
                let (streams, report) =
                    ingest_tag_log(path, &LogOptions { delimiter }).map_err(|e| in_file(path)(e.into()))?;
                if report.rows_rejected > 0 {
                    let _ = writeln!(err, "{}: {} rows rejected", path.display(), report.rows_rejected);
                }
                for (t, k, f) in surface_cells(&streams, &grid)? {
                    w.write_record([name.clone(), t.to_string(), sig6(k), sig6(f)])?;
                }
            }
            w.flush()?;
        }
        Command::Simulate {
            model,
            imitation_rate,
            vocab,
            zipf_s,
            background,
            length,
            streams,
            seed,
            out: path,
        } => {
            let load_bg = || -> CliResult<_> {
                Ok(Arc::new(match &background {
                    Some(p) => load_background(BufReader::new(File::open(p)?))?,
                    None => zipf_background(vocab, zipf_s)?,
                }))
            };
            let model = match model {
                ModelKind::RandomUniform => TagModel::RandomUniform { vocabulary: vocab },
                ModelKind::Imitation => TagModel::Imitation { vocabulary: vocab },
                ModelKind::Background => TagModel::Background { background: load_bg()? },
                ModelKind::Mixture => TagModel::Mixture { imitation_rate, background: load_bg()? },
            };
            let corpus = generate_corpus(&GeneratorConfig { model, length, n_streams: streams, seed })?;
            match path {
                Some(p) => {
                    let mut file = BufWriter::new(File::create(&p)?);
                    write_tag_log(&corpus, &mut file)?;
                    file.flush()?;
                }
                None => write_tag_log(&corpus, &mut *out)?,
            }
        }
    }
    Ok(())
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn surface_cells(streams: &[TagStream], grid: &GridArgs) -> CliResult<Vec<(usize, f64, f64)>> {
    let params = grid.rbo.params()?;
    let surface = stability_surface(streams, &grid.t_grid.0, &grid.k_grid.0, grid.rbo.window, &params)?;
    Ok(surface.cells().collect())
}

const POWERLAW_HEADER: [&str; 11] = [
    "resource_id", "alpha", "xmin", "ks_d", "n_tail", "r_exp", "p_exp", "r_lognorm", "p_lognorm", "r_stretched",
    "p_stretched",
];

/// Numeric columns of one power-law row; failed alternative fits are NaN.
fn powerlaw_row(fit: &PowerLawFit, cmp: &ModelComparison) -> [f64; 10] {
    let lr = |r: &Result<semstab::powerlaw::LikelihoodRatioTest, _>| match r {
        Ok(t) => (t.ratio, t.p_value),
        Err(_) => (f64::NAN, f64::NAN),
    };
    let (re, pe) = lr(&cmp.exponential);
    let (rl, pl) = lr(&cmp.lognormal);
    let (rs, ps) = lr(&cmp.stretched_exponential);
    [fit.alpha, fit.xmin as f64, fit.ks_distance, fit.n_tail as f64, re, pe, rl, pl, rs, ps]
}

fn fmt_cell(x: f64, integral: bool) -> String {
    if x.is_nan() {
        "NA".into()
    } else if integral {
        format!("{x}")
    } else {
        sig6(x)
    }
}

fn fit_and_compare(sample: &[u64]) -> semstab::Result<[f64; 10]> {
    let fit = fit_power_law(sample)?;
    let cmp = compare_distributions(sample, &fit)?;
    Ok(powerlaw_row(&fit, &cmp))
}

fn powerlaw(streams: &[TagStream], per_resource: bool, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let counts = |s: &TagStream| s.snapshot(s.len()).map(|snap| snap.rank_frequencies());
    let mut w = csv_writer(out);
    w.write_record(POWERLAW_HEADER)?;
    let write = |w: &mut csv::Writer<_>, id: &str, row: &[f64; 10], integral: bool| -> CliResult {
        let mut rec = vec![id.to_string()];
        rec.extend(row.iter().enumerate().map(|(i, &x)| fmt_cell(x, integral && (i == 1 || i == 3))));
        w.write_record(&rec)?;
        Ok(())
    };
    if per_resource {
        let rows = per_stream(streams, err, |s| fit_and_compare(&counts(s)?))?;
        for (s, row) in &rows {
            write(&mut w, s.resource_id().as_str(), row, true)?;
        }
        let (mean, std) = column_stats(rows.iter().map(|(_, r)| r));
        write(&mut w, "mean", &mean, false)?;
        write(&mut w, "std", &std, false)?;
    } else {
        let mut pooled = Vec::new();
        for s in streams {
            pooled.extend(counts(s)?);
        }
        write(&mut w, "pooled", &fit_and_compare(&pooled)?, true)?;
    }
    w.flush()?;
    Ok(())
}

/// Per-column mean and population standard deviation, ignoring NaN cells.
fn column_stats<'a>(rows: impl Iterator<Item = &'a [f64; 10]> + Clone) -> ([f64; 10], [f64; 10]) {
    let mut mean = [f64::NAN; 10];
    let mut std = [f64::NAN; 10];
    for c in 0..10 {
        let xs: Vec<f64> = rows.clone().map(|r| r[c]).filter(|x| !x.is_nan()).collect();
        if xs.is_empty() {
            continue;
        }
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        mean[c] = m;
        std[c] = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt();
    }
    (mean, std)
}

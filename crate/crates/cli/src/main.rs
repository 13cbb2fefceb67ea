//! `seqrank`: sequential rank agreement from the command line.

mod plot;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use seqrank::ingest::{
    emit_band, emit_curve, parse_document, parse_listset, BandDocument, CurveDocument, Document, Format,
    ListFileOptions, Metadata, Orientation, ParseError, ParsedListSet,
};
use seqrank::rng::{derive_seed, Domain};
use seqrank::{
    average_overlap, band_from_replicates, h0_band, h0_null_curves, normalize_quantiles, overlap_curve,
    pointwise_pvalues, sra, AgreementMetric, Curve, MonteCarloConfig, NullConfig, RandomSeed,
    DEFAULT_FILL_PERMUTATIONS, DEFAULT_PERMUTATIONS, DEFAULT_QUANTILES, LOWER_QUANTILES,
};

use crate::plot::{PlotError, Series};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("{0}")]
    Compute(#[from] seqrank::Error),
    #[error(transparent)]
    Plot(#[from] PlotError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Parse { .. } => 4,
            CliError::Compute(_) => 5,
            CliError::Plot(_) => 6,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "seqrank", version, about = "Sequential rank agreement of ranked lists")]
struct Cli {
    /// Worker threads for Monte-Carlo loops (default: one per core).
    #[arg(long, global = true, env = "SEQRANK_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sequential rank agreement curve of a list file.
    Sra {
        file: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Average overlap curve of a list file (complete lists only).
    Overlap {
        file: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        /// Emit the pointwise overlap instead of its running average.
        #[arg(long)]
        pointwise: bool,
        /// Last depth to report (default: the number of items).
        #[arg(long)]
        max_depth: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Null reference band for a list file's shape, or from replicate curves.
    Nullband {
        /// List file giving the shape (required for the h0 hypothesis).
        file: Option<PathBuf>,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        null: NullArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Pointwise p-values of a list file's curve against null curves.
    Pvalues {
        file: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        null: NullArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Render curve and band files as a standalone SVG.
    Plot {
        /// Curve files to draw as lines.
        #[arg(required = true)]
        curves: Vec<PathBuf>,
        /// Band files to draw as shaded regions (repeatable).
        #[arg(long = "band")]
        bands: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Number of items P; required when any list is censored.
    #[arg(long)]
    universe_size: Option<usize>,
    /// ranks-as-rows, items-as-rows, or scores (default: sniffed from the header).
    #[arg(long)]
    orientation: Option<Orientation>,
    /// Field delimiter: comma or tab (default: sniffed).
    #[arg(long, value_parser = parse_delimiter)]
    delimiter: Option<u8>,
    /// Cell values marking a missing entry, besides the empty cell.
    #[arg(long, value_delimiter = ',', default_value = "NA")]
    missing: Vec<String>,
    /// Accept tied ranks or scores; tied items are ordered by label.
    #[arg(long)]
    allow_ties_midrank: bool,
}

impl InputArgs {
    fn options(&self) -> ListFileOptions {
        let mut missing_tokens = vec![String::new()];
        missing_tokens.extend(self.missing.iter().cloned());
        ListFileOptions {
            orientation: self.orientation,
            delimiter: self.delimiter,
            universe_size: self.universe_size,
            missing_tokens,
            allow_ties_midrank: self.allow_ties_midrank,
        }
    }
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Per-item spread: sd (sample standard deviation) or mad.
    #[arg(long, default_value = "sd")]
    metric: AgreementMetric,
    /// Monte-Carlo repetitions (random completions for `sra`, null curves otherwise).
    #[arg(long = "B", default_value_t = DEFAULT_PERMUTATIONS)]
    permutations: usize,
    /// Root seed (default: drawn from entropy and echoed in the output).
    #[arg(long)]
    seed: Option<u64>,
    /// Last depth to report (default: the number of items).
    #[arg(long)]
    max_depth: Option<usize>,
}

impl RunArgs {
    fn seed(&self) -> RandomSeed {
        self.seed.map_or_else(RandomSeed::from_entropy, RandomSeed)
    }

    fn check(&self) -> Result<()> {
        if self.permutations == 0 {
            return Err(CliError::Usage("--B must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Sided {
    Two,
    Lower,
}

#[derive(Args, Clone)]
struct NullArgs {
    /// `h0` for independent permutations, or `replicates=<dir-or-file>`.
    #[arg(long, default_value = "h0")]
    hypothesis: String,
    /// Quantile levels (default: 0.025,0.5,0.975, or 0.05,0.5 with --sided lower).
    #[arg(long, value_delimiter = ',')]
    quantiles: Option<Vec<f64>>,
    /// Default quantile set: two-sided 95% or lower 95%.
    #[arg(long, value_enum, default_value = "two")]
    sided: Sided,
    /// Random completions per censored list set inside null and replicate curves.
    #[arg(long = "fill-B", default_value_t = DEFAULT_FILL_PERMUTATIONS)]
    fill_permutations: usize,
}

enum NullSource {
    H0,
    Replicates(PathBuf),
}

impl NullArgs {
    fn source(&self) -> Result<NullSource> {
        if self.hypothesis == "h0" {
            return Ok(NullSource::H0);
        }
        match self.hypothesis.strip_prefix("replicates=") {
            Some(path) if !path.is_empty() => Ok(NullSource::Replicates(PathBuf::from(path))),
            _ => Err(CliError::Usage(format!(
                "--hypothesis must be h0 or replicates=<dir-or-file>, got {:?}",
                self.hypothesis
            ))),
        }
    }

    fn quantiles(&self) -> Result<Vec<f64>> {
        let levels = match (&self.quantiles, self.sided) {
            (Some(q), _) => q.clone(),
            (None, Sided::Two) => DEFAULT_QUANTILES.to_vec(),
            (None, Sided::Lower) => LOWER_QUANTILES.to_vec(),
        };
        normalize_quantiles(&levels).map_err(|e| CliError::Usage(format!("--quantiles: {e}")))
    }

    fn check(&self) -> Result<()> {
        if self.fill_permutations == 0 {
            return Err(CliError::Usage("--fill-B must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// csv, or json (alias json-like-record).
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_delimiter(s: &str) -> std::result::Result<u8, String> {
    match s {
        "," | "comma" => Ok(b','),
        "\t" | "\\t" | "tab" => Ok(b'\t'),
        other => Err(format!("unsupported delimiter {other:?} (comma or tab)")),
    }
}

fn parse_format(s: &str) -> std::result::Result<Format, String> {
    // `json-like-record` names the structured layout in older scripts
    match s {
        "json-like-record" | "record" => Ok(Format::Json),
        other => other.parse(),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn load_lists(path: &Path, input: &InputArgs) -> Result<ParsedListSet> {
    let text = read(path)?;
    parse_listset(&text, &input.options()).map_err(|source| match source {
        ParseError::MissingUniverseSize => CliError::Usage(format!(
            "{}: input is censored; pass --universe-size with the total number of items",
            path.display()
        )),
        source => CliError::Parse { path: path.to_path_buf(), source },
    })
}

fn base_metadata(parsed: &ParsedListSet) -> Metadata {
    Metadata {
        lists: Some(parsed.lists.len()),
        universe_size: Some(parsed.lists.universe_size()),
        ties_broken: (parsed.ties_broken > 0).then_some(parsed.ties_broken),
        ..Default::default()
    }
}

fn reliable_depth(parsed: &ParsedListSet) -> Option<usize> {
    parsed.lists.has_censored().then(|| parsed.lists.recommended_max_depth())
}

fn observed_curve(
    parsed: &ParsedListSet,
    metric: AgreementMetric,
    config: &MonteCarloConfig,
    max_depth: Option<usize>,
) -> Result<Curve> {
    Ok(sra(&parsed.lists, metric, config, max_depth)?)
}

fn cmd_sra(file: &Path, input: &InputArgs, run: &RunArgs, output: &OutputArgs) -> Result<String> {
    run.check()?;
    let parsed = load_lists(file, input)?;
    let seed = run.seed();
    let config = MonteCarloConfig { permutations: run.permutations, seed };
    let curve = observed_curve(&parsed, run.metric, &config, run.max_depth)?;
    let metadata = Metadata {
        statistic: Some("sra".into()),
        method: Some(if parsed.lists.has_censored() { "monte-carlo" } else { "exact" }.into()),
        metric: Some(run.metric),
        seed: Some(seed.value()),
        permutations: Some(run.permutations),
        reliable_depth: reliable_depth(&parsed),
        ..base_metadata(&parsed)
    };
    Ok(emit_curve(&CurveDocument { metadata, curve }, output.format))
}

fn cmd_overlap(
    file: &Path,
    input: &InputArgs,
    pointwise: bool,
    max_depth: Option<usize>,
    output: &OutputArgs,
) -> Result<String> {
    let parsed = load_lists(file, input)?;
    let curve: Curve =
        if pointwise { overlap_curve(&parsed.lists, max_depth)? } else { average_overlap(&parsed.lists, max_depth)? };
    let metadata = Metadata {
        statistic: Some(if pointwise { "overlap" } else { "average-overlap" }.into()),
        ..base_metadata(&parsed)
    };
    Ok(emit_curve(&CurveDocument { metadata, curve }, output.format))
}

/// Files making up a replicate set: a single file, or every regular file in a
/// directory in name order.
fn replicate_files(path: &Path) -> Result<Vec<PathBuf>> {
    let meta = fs::metadata(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    if meta.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files = Vec::new();
    let entries = fs::read_dir(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    for entry in entries {
        let entry = entry.map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        if entry.path().is_file() {
            files.push(entry.path());
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(CliError::Usage(format!("{}: no replicate files found", path.display())));
    }
    Ok(files)
}

/// Each replicate is either a curve file or a list file whose SRA curve is computed here.
fn replicate_curves(
    path: &Path,
    input: &InputArgs,
    run: &RunArgs,
    null: &NullArgs,
    seed: RandomSeed,
) -> Result<Vec<Curve>> {
    let mut curves = Vec::new();
    for (idx, file) in replicate_files(path)?.iter().enumerate() {
        let text = read(file)?;
        match parse_document::<f64>(&text) {
            Ok(Document::Curve(doc)) => curves.push(doc.curve),
            Ok(Document::Band(_)) => {
                return Err(CliError::Usage(format!(
                    "{}: replicate must be a curve or list file, not a band",
                    file.display()
                )))
            }
            Err(_) => {
                let parsed = load_lists(file, input)?;
                let config = MonteCarloConfig {
                    permutations: null.fill_permutations,
                    seed: derive_seed(seed, Domain::FillOut, idx as u64),
                };
                curves.push(observed_curve(&parsed, run.metric, &config, run.max_depth)?);
            }
        }
    }
    Ok(curves)
}

fn null_config(run: &RunArgs, null: &NullArgs, seed: RandomSeed) -> Result<NullConfig> {
    Ok(NullConfig {
        permutations: run.permutations,
        seed,
        quantiles: null.quantiles()?,
        fill_permutations: null.fill_permutations,
        max_depth: run.max_depth,
    })
}

fn cmd_nullband(
    file: Option<&Path>,
    input: &InputArgs,
    run: &RunArgs,
    null: &NullArgs,
    output: &OutputArgs,
) -> Result<String> {
    run.check()?;
    null.check()?;
    let seed = run.seed();
    let quantiles = null.quantiles()?;
    let (band, metadata) = match null.source()? {
        NullSource::H0 => {
            let file =
                file.ok_or_else(|| CliError::Usage("the h0 hypothesis needs a list file for the shape".into()))?;
            let parsed = load_lists(file, input)?;
            let config = null_config(run, null, seed)?;
            let band = h0_band(&parsed.lists, run.metric, &config)?;
            let metadata = Metadata {
                statistic: Some("sra".into()),
                metric: Some(run.metric),
                seed: Some(seed.value()),
                permutations: Some(run.permutations),
                fill_permutations: parsed.lists.has_censored().then_some(null.fill_permutations),
                ..base_metadata(&parsed)
            };
            (band, metadata)
        }
        NullSource::Replicates(path) => {
            let curves = replicate_curves(&path, input, run, null, seed)?;
            let band = band_from_replicates(&curves, &quantiles)?;
            let metadata = Metadata {
                statistic: Some("sra".into()),
                metric: Some(run.metric),
                seed: Some(seed.value()),
                permutations: Some(curves.len()),
                ..Default::default()
            };
            (band, metadata)
        }
    };
    Ok(emit_band(&BandDocument { metadata, band }, output.format))
}

fn cmd_pvalues(file: &Path, input: &InputArgs, run: &RunArgs, null: &NullArgs, output: &OutputArgs) -> Result<String> {
    run.check()?;
    null.check()?;
    let parsed = load_lists(file, input)?;
    let seed = run.seed();
    let observed_config = MonteCarloConfig { permutations: null.fill_permutations, seed };
    let observed = observed_curve(&parsed, run.metric, &observed_config, run.max_depth)?;
    let nulls = match null.source()? {
        NullSource::H0 => h0_null_curves(&parsed.lists, run.metric, &null_config(run, null, seed)?)?,
        NullSource::Replicates(path) => replicate_curves(&path, input, run, null, seed)?,
    };
    let curve = pointwise_pvalues(&observed, &nulls)?;
    let metadata = Metadata {
        statistic: Some("p-value".into()),
        metric: Some(run.metric),
        seed: Some(seed.value()),
        permutations: Some(nulls.len()),
        fill_permutations: parsed.lists.has_censored().then_some(null.fill_permutations),
        reliable_depth: reliable_depth(&parsed),
        ..base_metadata(&parsed)
    };
    Ok(emit_curve(&CurveDocument { metadata, curve }, output.format))
}

fn load_series(path: &Path) -> Result<Series> {
    let text = read(path)?;
    let doc = parse_document::<f64>(&text).map_err(|source| CliError::Parse { path: path.to_path_buf(), source })?;
    let name = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
    Ok(Series { name, doc })
}

fn cmd_plot(curves: &[PathBuf], bands: &[PathBuf]) -> Result<String> {
    let curves = curves.iter().map(|p| load_series(p)).collect::<Result<Vec<_>>>()?;
    let bands = bands.iter().map(|p| load_series(p)).collect::<Result<Vec<_>>>()?;
    Ok(plot::render(&curves, &bands)?)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // fails only if a pool was already installed, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let (text, dest) = match &cli.command {
        Command::Sra { file, input, run, output } => (cmd_sra(file, input, run, output)?, output.output.as_deref()),
        Command::Overlap { file, input, pointwise, max_depth, output } => {
            (cmd_overlap(file, input, *pointwise, *max_depth, output)?, output.output.as_deref())
        }
        Command::Nullband { file, input, run, null, output } => {
            (cmd_nullband(file.as_deref(), input, run, null, output)?, output.output.as_deref())
        }
        Command::Pvalues { file, input, run, null, output } => {
            (cmd_pvalues(file, input, run, null, output)?, output.output.as_deref())
        }
        Command::Plot { curves, bands, output } => (cmd_plot(curves, bands)?, Some(output.as_path())),
    };
    write_output(dest, &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("seqrank: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

//! `phoneval` command line.
//!
//! Exit codes: 0 ok, 1 gradient check above threshold, 2 input error,
//! 3 no matched utterances, 4 incompatible reports.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::alignment::EditCosts;
use crate::error_analysis::relative_gain;
use crate::io_formats::{
    self, breakdown_csv, gain_csv, matrix_csv, ranking_csv, response_csv, taps_csv, FilterBankDump,
    Report,
};
use crate::phoneset::{BpcCategorization, CategorizationName};
use crate::scoring::{align_all, breakdown_parallel, confusion_parallel, match_corpora};
use crate::sinc2net::{
    freq_response, gradient_check, init_mel, min_fft_size, synth_kernel, FilterBankSpec,
    KernelConfig, SincFilterParams, Window,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_GRADCHECK: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NO_MATCH: i32 = 3;
pub const EXIT_INCOMPATIBLE: i32 = 4;

/// Largest accepted relative gradient error for `filters gradcheck`.
pub const GRADCHECK_THRESHOLD: f64 = 1e-4;

/// Environment variable capping worker threads (0 = automatic).
pub const THREADS_ENV: &str = "PHONEVAL_THREADS";

#[derive(Debug, Parser)]
#[command(name = "phoneval", version, about = "Broad-phonetic-class error analysis for phone recognition output")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-class PER breakdown (substitutions, deletions, insertions).
    Score(ScoreArgs),
    /// Class confusion matrices and most-confused rankings.
    Confusion(ScoreArgs),
    /// Relative per-class gains between two score reports.
    Compare(CompareArgs),
    /// Sinc2Net filterbank tools.
    Filters {
        #[command(subcommand)]
        command: FiltersCommand,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Reference transcripts: a directory of .phn files or a one-line-per-utterance file.
    #[arg(long = "ref")]
    pub reference: PathBuf,
    /// Hypothesis transcripts, one utterance per line.
    #[arg(long = "hyp")]
    pub hypothesis: PathBuf,
    /// Token folding map applied to both sides.
    #[arg(long)]
    pub fold_map: Option<PathBuf>,
    /// Categorisations to report (default: all three).
    #[arg(long, value_delimiter = ',')]
    pub categorizations: Vec<CategorizationName>,
    #[arg(long, default_value_t = 1)]
    pub sub_cost: u32,
    #[arg(long, default_value_t = 1)]
    pub del_cost: u32,
    #[arg(long, default_value_t = 1)]
    pub ins_cost: u32,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub baseline: PathBuf,
    #[arg(long)]
    pub improved: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    /// Number of mel-initialised filters.
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    /// Kernel length in taps (odd).
    #[arg(long, default_value_t = 129)]
    pub len: usize,
    /// Sample rate in Hz.
    #[arg(long, default_value_t = 16_000.0)]
    pub fs: f64,
    #[arg(long, default_value = "none")]
    pub window: Window,
    /// Bandwidth of a single filter in Hz (with --fc, replaces the mel bank).
    #[arg(long, requires = "fc")]
    pub b: Option<f64>,
    /// Centre frequency of a single filter in Hz.
    #[arg(long, requires = "b")]
    pub fc: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum FiltersCommand {
    /// Dump the filterbank: taps as CSV (one kernel per row) or parameters as JSON.
    Synth {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Magnitude response per filter as `filter,freq_hz,magnitude` CSV.
    Response {
        #[command(flatten)]
        kernel: KernelArgs,
        /// FFT size (power of two, at least 4x the kernel length).
        #[arg(long)]
        n_fft: Option<usize>,
        /// Only this filter index.
        #[arg(long)]
        filter: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare analytical parameter gradients with central differences.
    Gradcheck {
        #[command(flatten)]
        kernel: KernelArgs,
        /// Finite-difference step relative to each parameter.
        #[arg(long, default_value_t = 1e-6)]
        step: f64,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("no utterance ids in common between reference and hypothesis")]
    NoMatch,
    #[error("incompatible reports: {0}")]
    Incompatible(String),
    #[error("max relative gradient error {0:e} exceeds {GRADCHECK_THRESHOLD:e}")]
    GradCheck(f64),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::NoMatch => EXIT_NO_MATCH,
            CliError::Incompatible(_) => EXIT_INCOMPATIBLE,
            CliError::GradCheck(_) => EXIT_GRADCHECK,
        }
    }
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };

    let threads = match thread_count() {
        Ok(n) => n,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return e.exit_code();
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_INPUT;
        }
    };

    // Workers may run on other threads; buffer output and flush it here.
    let (mut out_buf, mut err_buf) = (Vec::new(), Vec::new());
    let result = pool.install(|| execute(&cli.command, &mut out_buf, &mut err_buf));
    let _ = stdout.write_all(&out_buf);
    let _ = stderr.write_all(&err_buf);
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.exit_code() == EXIT_INPUT && matches!(cli.command, Command::Filters { .. }) {
                let _ = writeln!(stderr, "usage: phoneval filters <synth|response|gradcheck> [--n N] [--len ODD] [--fs HZ] [--window none|hamming] [--b HZ --fc HZ]");
            }
            e.exit_code()
        }
    }
}

fn thread_count() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("{THREADS_ENV}={v:?} is not a thread count"))),
    }
}

fn execute(command: &Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Score(args) => cmd_score(args, false, stdout, stderr),
        Command::Confusion(args) => cmd_score(args, true, stdout, stderr),
        Command::Compare(args) => cmd_compare(args, stdout),
        Command::Filters { command } => cmd_filters(command, stdout),
    }
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| input(format!("{}: {e}", path.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(input),
    }
}

fn selected(categorizations: &[CategorizationName]) -> Vec<CategorizationName> {
    if categorizations.is_empty() {
        return CategorizationName::ALL.to_vec();
    }
    let mut seen = BTreeSet::new();
    categorizations
        .iter()
        .copied()
        .filter(|c| seen.insert(*c))
        .collect()
}

fn cmd_score(
    args: &ScoreArgs,
    confusion: bool,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let costs = EditCosts::new(args.sub_cost, args.del_cost, args.ins_cost).map_err(input)?;
    let fold = args
        .fold_map
        .as_deref()
        .map(io_formats::load_fold_map)
        .transpose()
        .map_err(input)?;
    let reference = io_formats::load_reference(&args.reference).map_err(input)?;
    let hypothesis = io_formats::load_hypothesis(&args.hypothesis).map_err(input)?;
    for (what, parsed) in [("reference", &reference), ("hypothesis", &hypothesis)] {
        if parsed.blank_lines > 0 {
            let _ = writeln!(stderr, "warning: skipped {} blank line(s) in {what}", parsed.blank_lines);
        }
    }

    let matched = match_corpora(&reference.corpus, &hypothesis.corpus, fold.as_ref()).map_err(input)?;
    for id in &matched.missing_hypothesis {
        let _ = writeln!(stderr, "warning: no hypothesis for reference utterance {id}");
    }
    for id in &matched.extra_hypothesis {
        let _ = writeln!(stderr, "warning: no reference for hypothesis utterance {id}");
    }
    if matched.pairs.is_empty() {
        return Err(CliError::NoMatch);
    }

    let alignments = align_all(&matched.pairs, costs);
    let cats: Vec<&BpcCategorization> = selected(&args.categorizations)
        .into_iter()
        .map(BpcCategorization::get)
        .collect();

    let text = if confusion {
        let matrices: Vec<_> = cats.iter().map(|c| confusion_parallel(&alignments, c)).collect();
        match args.output.format {
            Format::Json => {
                let mut report = Report::new(&[], &matrices, &[]);
                report.utterances = Some(matched.pairs.len());
                report.to_json()
            }
            Format::Csv => {
                let mut text = String::new();
                for m in &matrices {
                    text.push_str(&format!("# {}\n", m.categorization));
                    text.push_str(&matrix_csv(m));
                    text.push('\n');
                }
                text.push_str("# rankings\n");
                text.push_str(&ranking_csv(&matrices));
                text
            }
        }
    } else {
        let breakdowns = cats
            .iter()
            .map(|c| breakdown_parallel(&alignments, c))
            .collect::<Result<Vec<_>, _>>()
            .map_err(input)?;
        match args.output.format {
            Format::Json => {
                let mut report = Report::new(&breakdowns, &[], &[]);
                report.utterances = Some(matched.pairs.len());
                report.to_json()
            }
            Format::Csv => breakdown_csv(&breakdowns),
        }
    };
    emit(&text, args.output.out.as_deref(), stdout)
}

fn read_report(path: &Path) -> Result<Report, CliError> {
    let text = fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    Report::from_json(&text).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn cmd_compare(args: &CompareArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let baseline = read_report(&args.baseline)?.error_breakdowns().map_err(input)?;
    let improved = read_report(&args.improved)?.error_breakdowns().map_err(input)?;
    let names = |bs: &[crate::error_analysis::ErrorBreakdown]| {
        bs.iter().map(|b| b.categorization).collect::<BTreeSet<_>>()
    };
    if baseline.is_empty() || improved.is_empty() {
        return Err(CliError::Incompatible(
            "both reports must contain score breakdowns".into(),
        ));
    }
    if names(&baseline) != names(&improved) {
        let list = |s: BTreeSet<CategorizationName>| {
            s.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(",")
        };
        return Err(CliError::Incompatible(format!(
            "categorisations differ: {} vs {}",
            list(names(&baseline)),
            list(names(&improved))
        )));
    }
    let gains = baseline
        .iter()
        .map(|b| {
            let i = improved
                .iter()
                .find(|i| i.categorization == b.categorization)
                .expect("same categorisation sets");
            relative_gain(b, i).map_err(|e| CliError::Incompatible(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let text = match args.output.format {
        Format::Json => Report::new(&[], &[], &gains).to_json(),
        Format::Csv => gain_csv(&gains),
    };
    emit(&text, args.output.out.as_deref(), stdout)
}

fn filter_bank(k: &KernelArgs) -> Result<FilterBankSpec, CliError> {
    let cfg = KernelConfig::new(k.len, k.fs, k.window).map_err(input)?;
    match (k.b, k.fc) {
        (Some(b), Some(fc)) => {
            let p = SincFilterParams::new(b, fc, &cfg).map_err(input)?;
            FilterBankSpec::new(cfg, vec![p]).map_err(input)
        }
        _ => init_mel(k.n, &cfg).map_err(input),
    }
}

fn cmd_filters(command: &FiltersCommand, stdout: &mut dyn Write) -> Result<(), CliError> {
    match command {
        FiltersCommand::Synth {
            kernel,
            format,
            out,
        } => {
            let bank = filter_bank(kernel)?;
            let text = match format {
                Format::Csv => taps_csv(&bank.synth()),
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&FilterBankDump::from(&bank))
                        .expect("dump serialises");
                    s.push('\n');
                    s
                }
            };
            emit(&text, out.as_deref(), stdout)
        }
        FiltersCommand::Response {
            kernel,
            n_fft,
            filter,
            out,
        } => {
            let bank = filter_bank(kernel)?;
            let n_fft = n_fft.unwrap_or_else(|| min_fft_size(bank.kernel.length()));
            let indices: Vec<usize> = match filter {
                Some(i) if *i < bank.n_filters() => vec![*i],
                Some(i) => {
                    return Err(input(format!(
                        "filter index {i} out of range (bank has {})",
                        bank.n_filters()
                    )))
                }
                None => (0..bank.n_filters()).collect(),
            };
            let spectra = indices
                .into_iter()
                .map(|i| {
                    let taps = synth_kernel(&bank.filters[i], &bank.kernel).map_err(input)?;
                    let s = freq_response(&taps, n_fft, bank.kernel.sample_rate_hz()).map_err(input)?;
                    Ok((i, s))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            emit(&response_csv(&spectra), out.as_deref(), stdout)
        }
        FiltersCommand::Gradcheck { kernel, step } => {
            if !(*step > 0.0 && step.is_finite()) {
                return Err(input(format!("step must be positive, got {step}")));
            }
            let bank = filter_bank(kernel)?;
            let mut worst = 0.0f64;
            for p in &bank.filters {
                let check = gradient_check(p, &bank.kernel, *step).map_err(input)?;
                worst = worst.max(check.max_rel_error());
            }
            writeln!(
                stdout,
                "filters checked: {}\nmax relative gradient error: {worst:e}",
                bank.n_filters()
            )
            .map_err(input)?;
            if worst > GRADCHECK_THRESHOLD {
                return Err(CliError::GradCheck(worst));
            }
            Ok(())
        }
    }
}

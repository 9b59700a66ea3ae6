//! Command definitions and dispatch for the `swbkit` binary.
//!
//! Every subcommand reads declared inputs, runs one library module, and
//! writes its outputs atomically. Runs echo their resolved configuration to
//! stderr (`config key=value` lines) so an artifact can always be traced back
//! to the exact flags that produced it. Stochastic operations require an
//! explicit seed: the `--seed` flag, or for `synth` the seed embedded in the
//! spec file (the flag wins when both are given).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use swbkit::error::{Error, Result};
use swbkit::io;
use swbkit::isa;
use swbkit::leadlag;
use swbkit::stats;
use swbkit::synth;
use swbkit::textproc;
use swbkit::wellbeing;

#[derive(Parser)]
#[command(name = "swbkit", version, about = "Opinion aggregation, well-being indices, and lead-lag analysis")]
pub struct Cli {
    /// Worker cap (current pipelines are sequential; kept for forward
    /// compatibility).
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    jobs: u32,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate opinion estimation over text corpora.
    #[command(subcommand)]
    Isa(IsaCommand),
    /// Well-being panels and period integration.
    #[command(subcommand)]
    Swbi(SwbiCommand),
    /// Lead-lag estimation between two asynchronous series.
    Leadlag(LeadlagArgs),
    /// Canonical correlation analysis between two indicator sets.
    Cca(CcaArgs),
    /// OLS regression of one indicator column on another set.
    Regress(RegressArgs),
    /// Synthetic data with known ground truth.
    #[command(subcommand)]
    Synth(SynthCommand),
}

#[derive(Subcommand)]
enum IsaCommand {
    /// Build and persist a stem lexicon from a labeled corpus.
    Train(IsaTrainArgs),
    /// Estimate the aggregate category distribution of a test corpus.
    Estimate(IsaEstimateArgs),
}

#[derive(Args)]
struct TokenizerArgs {
    /// Minimum number of documents a stem must appear in.
    #[arg(long, default_value_t = 2)]
    min_df: usize,
    /// Comma-separated n-gram orders.
    #[arg(long, default_value = "1,2")]
    ngrams: String,
    /// Disable case folding.
    #[arg(long)]
    no_lowercase: bool,
}

impl TokenizerArgs {
    fn config(&self) -> Result<textproc::TokenizerConfig> {
        let orders: Vec<usize> = self
            .ngrams
            .split(',')
            .map(|n| {
                n.trim()
                    .parse()
                    .map_err(|_| Error::Cli(format!("bad n-gram order '{n}'")))
            })
            .collect::<Result<_>>()?;
        Ok(textproc::TokenizerConfig {
            lowercase: !self.no_lowercase,
            ngram_orders: orders,
            min_doc_freq: self.min_df,
            stemmer: None,
        })
    }

    fn echo(&self) {
        echo("min_df", &self.min_df);
        echo("ngrams", &self.ngrams);
        echo("lowercase", &!self.no_lowercase);
    }
}

#[derive(Args)]
struct IsaTrainArgs {
    /// Labeled corpus, JSON-lines.
    #[arg(long)]
    corpus: PathBuf,
    /// Comma-separated category tags; the first is the off-topic category.
    #[arg(long)]
    cats: String,
    /// Where to write the lexicon.
    #[arg(long)]
    lexicon_out: PathBuf,
    #[command(flatten)]
    tokenizer: TokenizerArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Inverse,
    Baseline,
}

#[derive(Args)]
struct IsaEstimateArgs {
    /// Labeled training corpus, JSON-lines.
    #[arg(long)]
    train: PathBuf,
    /// Unlabeled test corpus, JSON-lines.
    #[arg(long)]
    test: PathBuf,
    /// Comma-separated category tags; the first is the off-topic category.
    #[arg(long)]
    cats: String,
    #[arg(long, value_enum, default_value_t = MethodArg::Inverse)]
    method: MethodArg,
    /// Number of bootstrap replicates (>= 100); requires --seed.
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Ridge term for rank-deficient conditional matrices.
    #[arg(long)]
    ridge: Option<f64>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    tokenizer: TokenizerArgs,
}

#[derive(Subcommand)]
enum SwbiCommand {
    /// Assemble per-component estimates into a panel CSV.
    Build(SwbiBuildArgs),
    /// Integrate daily composites into per-period gross balances.
    Integrate(SwbiIntegrateArgs),
}

#[derive(Args)]
struct SwbiBuildArgs {
    /// Directory of JSON estimate files
    /// ({period, unit, component, p_neg, p_neu, p_pos, n_docs} records).
    #[arg(long)]
    estimates: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PeriodArg {
    Month,
    Year,
}

#[derive(Args)]
struct SwbiIntegrateArgs {
    /// Panel CSV produced by `swbi build` (daily periods).
    #[arg(long)]
    panel: PathBuf,
    #[arg(long, value_enum)]
    period: PeriodArg,
    /// Report per-day means instead of gross sums.
    #[arg(long)]
    average: bool,
    /// Restrict to one unit (default: all units in the panel).
    #[arg(long)]
    unit: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LeadlagArgs {
    /// First series, `ts,value` CSV. A positive estimate means this one leads.
    #[arg(long)]
    x: PathBuf,
    /// Second series, `ts,value` CSV.
    #[arg(long)]
    y: PathBuf,
    /// Grid half-width in days.
    #[arg(long, default_value_t = 5.0)]
    delta: f64,
    /// Grid step in days.
    #[arg(long, default_value_t = 1.0)]
    step: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CcaArgs {
    /// First variable set: CSV with a `unit` key column.
    #[arg(long)]
    x: PathBuf,
    /// Second variable set, joined on `unit`.
    #[arg(long)]
    y: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Optional plot-ready canonical scores CSV.
    #[arg(long)]
    scores_out: Option<PathBuf>,
}

#[derive(Args)]
struct RegressArgs {
    /// Response as `file.csv:column`; the file is a `unit`-keyed CSV.
    #[arg(long)]
    y: String,
    /// Regressors: CSV with a `unit` key column, joined on `unit`.
    #[arg(long)]
    x: PathBuf,
    /// Drop the intercept.
    #[arg(long)]
    no_intercept: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum SynthCommand {
    /// Generate a labeled train / unlabeled test corpus pair.
    Corpus(SynthCorpusArgs),
    /// Generate a lagged asynchronous series pair.
    Series(SynthSeriesArgs),
}

#[derive(Args)]
struct SynthCorpusArgs {
    /// Corpus spec, JSON.
    #[arg(long)]
    spec: PathBuf,
    /// Overrides any seed embedded in the spec.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_train: PathBuf,
    #[arg(long)]
    out_test: PathBuf,
    #[arg(long)]
    out_truth: PathBuf,
}

#[derive(Args)]
struct SynthSeriesArgs {
    /// Series spec, JSON.
    #[arg(long)]
    spec: PathBuf,
    /// Overrides any seed embedded in the spec.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_x: PathBuf,
    #[arg(long)]
    out_y: PathBuf,
    #[arg(long)]
    out_truth: PathBuf,
}

fn echo(key: &str, value: &dyn std::fmt::Display) {
    eprintln!("config {key}={value}");
}

fn echo_path(key: &str, path: &Path) {
    eprintln!("config {key}={}", path.display());
}

impl Cli {
    pub fn run(self) -> Result<()> {
        match self.command {
            Command::Isa(IsaCommand::Train(args)) => isa_train(args),
            Command::Isa(IsaCommand::Estimate(args)) => isa_estimate(args),
            Command::Swbi(SwbiCommand::Build(args)) => swbi_build(args),
            Command::Swbi(SwbiCommand::Integrate(args)) => swbi_integrate(args),
            Command::Leadlag(args) => leadlag_run(args),
            Command::Cca(args) => cca_run(args),
            Command::Regress(args) => regress_run(args),
            Command::Synth(SynthCommand::Corpus(args)) => synth_corpus(args),
            Command::Synth(SynthCommand::Series(args)) => synth_series(args),
        }
    }
}

fn parse_cats(cats: &str) -> Result<isa::CategorySet> {
    let tags: Vec<&str> = cats
        .split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .collect();
    if tags.is_empty() {
        return Err(Error::Cli("empty category list".into()));
    }
    isa::CategorySet::from_tags(&tags)
}

fn isa_train(args: IsaTrainArgs) -> Result<()> {
    echo_path("corpus", &args.corpus);
    echo("cats", &args.cats);
    args.tokenizer.echo();
    let config = args.tokenizer.config()?;
    let cats = parse_cats(&args.cats)?;
    let docs = io::read_corpus_jsonl(&args.corpus)?;
    let lexicon = textproc::build_lexicon(&docs, &config)?;
    // Validates label coverage: every category needs training mass.
    let enc = textproc::encode(&docs, &lexicon)?;
    isa::estimate_conditional(&enc, &cats)?;
    io::write_atomic(&args.lexicon_out, lexicon.to_text().as_bytes())?;
    eprintln!(
        "lexicon: {} stems from {} documents",
        lexicon.len(),
        docs.len()
    );
    Ok(())
}

fn isa_estimate(args: IsaEstimateArgs) -> Result<()> {
    echo_path("train", &args.train);
    echo_path("test", &args.test);
    echo("cats", &args.cats);
    echo("method", &format!("{:?}", args.method).to_lowercase());
    args.tokenizer.echo();

    let config = args.tokenizer.config()?;
    let cats = parse_cats(&args.cats)?;
    let train_docs = io::read_corpus_jsonl(&args.train)?;
    let test_docs = io::read_corpus_jsonl(&args.test)?;

    // The lexicon spans both corpora so coverage is limited only by which
    // stem combinations training actually exhibits.
    let all: Vec<textproc::Document> = train_docs
        .iter()
        .chain(&test_docs)
        .cloned()
        .collect();
    let lexicon = textproc::build_lexicon(&all, &config)?;
    let train = textproc::encode(&train_docs, &lexicon)?;
    let test = textproc::encode(&test_docs, &lexicon)?;

    let cond = isa::estimate_conditional(&train, &cats)?;
    let (p_s, uncovered) = isa::align_test_distribution(&cond, &test)?;
    let opts = isa::InverseOptions { ridge: args.ridge };

    let mut dist = match args.method {
        MethodArg::Inverse => isa::estimate_inverse(&cond, &p_s, opts)?,
        MethodArg::Baseline => isa::classify_baseline(&cond, None, &test)?.1,
    };
    if args.method == MethodArg::Inverse {
        dist.diagnostics.uncovered_mass = uncovered;
    }

    let ci = match args.bootstrap {
        None => None,
        Some(b) => {
            let seed = args
                .seed
                .ok_or_else(|| Error::Cli("--bootstrap is stochastic; --seed is required".into()))?;
            echo("bootstrap", &b);
            echo("seed", &seed);
            Some(isa::bootstrap_ci(&train, &test, &cats, b, seed, opts)?)
        }
    };

    let probs: BTreeMap<&str, f64> = cats
        .tags()
        .iter()
        .map(|t| t.as_str())
        .zip(dist.probs.iter().cloned())
        .collect();
    let mut out = json!({
        "method": dist.method,
        "probs": probs,
        "diagnostics": dist.diagnostics,
    });
    if let Some(intervals) = ci {
        let ci_map: BTreeMap<&str, Vec<f64>> = cats
            .tags()
            .iter()
            .map(|t| t.as_str())
            .zip(intervals.iter().map(|i| vec![i.lo, i.hi]))
            .collect();
        let sd_map: BTreeMap<&str, f64> = cats
            .tags()
            .iter()
            .map(|t| t.as_str())
            .zip(intervals.iter().map(|i| i.sd))
            .collect();
        out["ci"] = serde_json::to_value(ci_map).unwrap();
        out["sd"] = serde_json::to_value(sd_map).unwrap();
    }
    io::write_json_atomic(&args.out, &out)
}

fn swbi_build(args: SwbiBuildArgs) -> Result<()> {
    echo_path("estimates", &args.estimates);
    let mut files: Vec<PathBuf> = fs::read_dir(&args.estimates)
        .map_err(|e| Error::io(&args.estimates, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Cli(format!(
            "no .json estimate files in {}",
            args.estimates.display()
        )));
    }

    #[derive(serde::Deserialize)]
    struct Record {
        period: String,
        unit: String,
        component: String,
        p_neg: f64,
        p_neu: f64,
        p_pos: f64,
        n_docs: usize,
    }

    let mut estimates = Vec::new();
    for path in &files {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| Error::parse(path, 0, e.to_string()))?;
        let records: Vec<Record> = match value {
            Value::Array(_) => serde_json::from_value(value),
            other => serde_json::from_value(other).map(|r| vec![r]),
        }
        .map_err(|e| Error::parse(path, 0, e.to_string()))?;
        for r in records {
            estimates.push(wellbeing::ComponentEstimate {
                period: r.period,
                unit: r.unit,
                component: wellbeing::ComponentCode::parse(&r.component)?,
                distribution: wellbeing::PolarityDistribution::new(r.p_neg, r.p_neu, r.p_pos)?,
                n_docs: r.n_docs,
            });
        }
    }
    let panel = wellbeing::build_panel(&estimates)?;
    io::write_atomic(&args.out, panel.to_csv().as_bytes())?;
    eprintln!("panel: {} rows from {} estimates", panel.rows.len(), estimates.len());
    Ok(())
}

fn swbi_integrate(args: SwbiIntegrateArgs) -> Result<()> {
    echo_path("panel", &args.panel);
    echo("period", &format!("{:?}", args.period).to_lowercase());
    echo("average", &args.average);
    let text = fs::read_to_string(&args.panel).map_err(|e| Error::io(&args.panel, e))?;
    let panel = wellbeing::panel_from_csv(&text)?;
    let period = match args.period {
        PeriodArg::Month => wellbeing::Period::Month,
        PeriodArg::Year => wellbeing::Period::Year,
    };
    let units: Vec<String> = match &args.unit {
        Some(u) => vec![u.clone()],
        None => {
            let mut units: Vec<String> = panel.rows.iter().map(|r| r.unit.clone()).collect();
            units.sort();
            units.dedup();
            units
        }
    };

    let mut out = String::from("period,unit,swbi,n_days\n");
    for unit in &units {
        let daily = panel.daily_composites(unit)?;
        if daily.is_empty() {
            return Err(Error::Cli(format!("no complete rows for unit '{unit}'")));
        }
        for v in wellbeing::integrate_period(&daily, period, args.average)? {
            out.push_str(&format!("{},{},{:.6},{}\n", v.period, unit, v.value, v.n_days));
        }
    }
    io::write_atomic(&args.out, out.as_bytes())
}

fn series_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".into())
}

fn leadlag_run(args: LeadlagArgs) -> Result<()> {
    echo_path("x", &args.x);
    echo_path("y", &args.y);
    echo("delta", &args.delta);
    echo("step", &args.step);
    let x = io::read_series_csv(&args.x, &series_name(&args.x))?;
    let y = io::read_series_csv(&args.y, &series_name(&args.y))?;
    let grid = leadlag::LagGrid::new(args.delta, args.step)?;
    let res = leadlag::estimate_lead_lag(&x, &y, &grid)?;

    let profile: Vec<Value> = res
        .contrast_profile
        .iter()
        .map(|(theta, contrast)| json!({"theta": theta, "contrast": contrast}))
        .collect();
    let out = json!({
        "x": x.name,
        "y": y.name,
        "theta_hat": res.theta_hat,
        "correlation": res.hy_correlation,
        "out_of_range_flag": res.correlation_out_of_range,
        "profile": profile,
        "ties": res.ties,
        "excluded_offsets": res.excluded_offsets,
    });
    io::write_json_atomic(&args.out, &out)
}

/// Row-align two unit-keyed matrices on their common units, in first-file
/// order. Units present on only one side are dropped.
fn join_on_units(
    x: stats::IndicatorMatrix,
    y: stats::IndicatorMatrix,
) -> Result<(stats::IndicatorMatrix, stats::IndicatorMatrix)> {
    let common: Vec<String> = x
        .units
        .iter()
        .filter(|u| y.units.contains(u))
        .cloned()
        .collect();
    if common.is_empty() {
        return Err(Error::Cli("the two files share no units".into()));
    }
    Ok((x.align_to_units(&common)?, y.align_to_units(&common)?))
}

fn loadings_map(names: &[String], loadings: &nalgebra::DMatrix<f64>) -> BTreeMap<String, Vec<f64>> {
    names
        .iter()
        .enumerate()
        .map(|(i, name)| (name.clone(), loadings.row(i).iter().cloned().collect()))
        .collect()
}

fn cca_run(args: CcaArgs) -> Result<()> {
    echo_path("x", &args.x);
    echo_path("y", &args.y);
    let x = io::read_indicator_csv(&args.x)?;
    let y = io::read_indicator_csv(&args.y)?;
    let (x, y) = join_on_units(x, y)?;
    let res = stats::cca(&x, &y)?;

    let out = json!({
        "n": res.units.len(),
        "x_names": res.x_names,
        "y_names": res.y_names,
        "correlations": res.correlations,
        "wilks": res.wilks,
        "x_loadings": loadings_map(&res.x_names, &res.x_loadings),
        "y_loadings": loadings_map(&res.y_names, &res.y_loadings),
    });
    io::write_json_atomic(&args.out, &out)?;

    if let Some(scores_path) = &args.scores_out {
        let axes = res.correlations.len();
        let mut csv = String::from("unit");
        for a in 1..=axes {
            csv.push_str(&format!(",x_score_{a},y_score_{a}"));
        }
        csv.push('\n');
        for (r, unit) in res.units.iter().enumerate() {
            csv.push_str(unit);
            for a in 0..axes {
                csv.push_str(&format!(
                    ",{},{}",
                    io::round_sig(res.x_scores[(r, a)]),
                    io::round_sig(res.y_scores[(r, a)])
                ));
            }
            csv.push('\n');
        }
        io::write_atomic(scores_path, csv.as_bytes())?;
    }
    Ok(())
}

fn regress_run(args: RegressArgs) -> Result<()> {
    let (y_path, y_col) = args
        .y
        .rsplit_once(':')
        .ok_or_else(|| Error::Cli(format!("--y wants 'file.csv:column', got '{}'", args.y)))?;
    echo("y", &args.y);
    echo_path("x", &args.x);
    echo("intercept", &!args.no_intercept);

    let y_matrix = io::read_indicator_csv(Path::new(y_path))?;
    let x_matrix = io::read_indicator_csv(&args.x)?;
    let (y_matrix, x_matrix) = join_on_units(y_matrix, x_matrix)?;
    let y = y_matrix.column_by_name(y_col)?;
    let res = stats::ols(&y, &x_matrix, !args.no_intercept)?;

    let mut out = serde_json::to_value(&res)
        .map_err(|e| Error::Cli(format!("serializing fit: {e}")))?;
    out["response"] = Value::String(y_col.to_string());
    io::write_json_atomic(&args.out, &out)
}

fn resolve_seed(flag: Option<u64>, embedded: Option<u64>) -> Result<u64> {
    flag.or(embedded)
        .ok_or_else(|| Error::Cli("stochastic operation requires --seed (or a seed in the spec)".into()))
}

fn synth_corpus(args: SynthCorpusArgs) -> Result<()> {
    echo_path("spec", &args.spec);
    let text = fs::read_to_string(&args.spec).map_err(|e| Error::io(&args.spec, e))?;
    let spec: synth::CorpusSpec =
        serde_json::from_str(&text).map_err(|e| Error::parse(&args.spec, 0, e.to_string()))?;
    let seed = resolve_seed(args.seed, spec.seed)?;
    echo("seed", &seed);
    let corpus = synth::gen_corpus(&spec, seed)?;
    io::write_atomic(&args.out_train, io::corpus_to_jsonl(&corpus.train).as_bytes())?;
    io::write_atomic(&args.out_test, io::corpus_to_jsonl(&corpus.test).as_bytes())?;
    let truth = json!({
        "categories": corpus.category_names,
        "realized_mixture": corpus.realized_mixture,
        "seed": seed,
    });
    io::write_json_atomic(&args.out_truth, &truth)
}

fn synth_series(args: SynthSeriesArgs) -> Result<()> {
    echo_path("spec", &args.spec);
    let text = fs::read_to_string(&args.spec).map_err(|e| Error::io(&args.spec, e))?;
    let spec: synth::SeriesSpec =
        serde_json::from_str(&text).map_err(|e| Error::parse(&args.spec, 0, e.to_string()))?;
    let seed = resolve_seed(args.seed, spec.seed)?;
    echo("seed", &seed);
    let (x, y, true_lag) = synth::gen_lagged_pair(&spec, seed)?;
    io::write_atomic(&args.out_x, io::series_to_csv(&x).as_bytes())?;
    io::write_atomic(&args.out_y, io::series_to_csv(&y).as_bytes())?;
    let truth = json!({"true_lag": true_lag, "seed": seed});
    io::write_json_atomic(&args.out_truth, &truth)
}

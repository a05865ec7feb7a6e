//! The `dialsearch` command line.
//!
//! Every subcommand validates its input paths before doing any work, takes
//! `--seed` (global), and exits nonzero with a single-line diagnostic on
//! failure. See [`error::exit`] for the exit codes.

pub mod error;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use dialsearch::calibration::{
    calibrate_binary, calibrate_star, BinaryObservations, CalibrationError, CalibrationResult,
    SamplerConfig, StarObservations,
};
use dialsearch::evalsvc::{
    binary_observations, metrics_inputs, read_transcripts, self_play, star_observations,
    write_jsonl, PairFlag, PersonaPool, TranscriptRecord,
};
use dialsearch::lm::{
    parse_corpus, tokenize, train_ngram, Context, DistributionProvider, LmError, NGramConfig,
    NGramLm, Speaker,
};
use dialsearch::metrics::{build_report, Pooling};
use dialsearch::search::{decode, IterMode, SearchConfig, Strategy};
use dialsearch_server::{load_service, router, serve, ServerConfig};

pub use error::{exit, CliError};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  internal error
  2  usage error (unknown flag, bad flag value)
  3  input file missing or unreadable, or output not writable
  4  input file malformed (corpus, model, transcript, CSV, config)
  5  input rejected (invalid configuration, nothing to analyze)";

#[derive(Debug, Parser)]
#[command(name = "dialsearch", version, about = "Decoding and evaluation workbench for dialogue models", after_help = EXIT_CODES)]
pub struct Cli {
    /// Seed for every random choice (self-play draws, sampler, session
    /// assignment) [default: 0, or the config file's seed for `serve`]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train an n-gram model on a dialogue corpus and write it as JSON.
    Train(TrainArgs),
    /// Decode one response and print the candidate set.
    Decode(DecodeArgs),
    /// Let the model talk to itself and write unannotated transcripts (JSONL).
    Selfplay(SelfplayArgs),
    /// Log-probability and distinct-n report over transcripts.
    Metrics(MetricsArgs),
    /// Bayesian calibration of annotator scores.
    Calibrate(CalibrateArgs),
    /// Run the evaluation HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Corpus file (`persona:`, `a:`, `b:` lines; blank line between conversations).
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output model file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = NGramConfig::default().order)]
    pub order: usize,
    /// Add-alpha smoothing at the unigram level.
    #[arg(long, default_value_t = NGramConfig::default().alpha)]
    pub alpha: f64,
    /// Most recent turns kept in the context.
    #[arg(long, default_value_t = NGramConfig::default().history_window)]
    pub history_window: usize,
}

/// Search flags; each overrides the same key from `--search-config`.
#[derive(Debug, Args, Default)]
pub struct SearchArgs {
    /// Flat TOML file with search settings (keys as the flags below, with underscores).
    #[arg(long)]
    pub search_config: Option<PathBuf>,
    /// K, hypotheses kept per step [default: 5]
    #[arg(long)]
    pub beam_width: Option<usize>,
    /// K', finished hypotheses that stop a beam search [default: 15]
    #[arg(long)]
    pub max_candidates: Option<usize>,
    /// Longest response in tokens, counting the end token [default: 20]
    #[arg(long)]
    pub max_length: Option<usize>,
    /// Block repeated n-grams of this size; 0 disables [default: 3]
    #[arg(long)]
    pub block_ngram: Option<usize>,
    /// Length penalty exponent used at selection [default: 0.6]
    #[arg(long)]
    pub length_penalty_alpha: Option<f64>,
    /// R, iterations of iterative beam search [default: 15]
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Hamming threshold for the exclusion rule [default: 1]
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Iterative beam search schedule [default: parallel]
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Sequential,
    Parallel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Greedy,
    Beam,
    #[value(name = "iter-beam")]
    IterBeam,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Greedy => Strategy::Greedy,
            StrategyArg::Beam => Strategy::Beam,
            StrategyArg::IterBeam => Strategy::IterBeam,
        }
    }
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value = "iter-beam")]
    pub strategy: StrategyArg,
    /// Persona line of the responding speaker (repeatable).
    #[arg(long = "persona")]
    pub persona: Vec<String>,
    /// Conversation so far, oldest first, starting with speaker a (repeatable).
    #[arg(long = "turn")]
    pub turns: Vec<String>,
    /// Print the candidate set as JSON.
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Args)]
pub struct SelfplayArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Persona pool (`persona:` blocks).
    #[arg(long)]
    pub personas: PathBuf,
    /// Output JSONL file.
    #[arg(long)]
    pub out: PathBuf,
    /// Conversations per strategy.
    #[arg(long, default_value_t = 50)]
    pub conversations: usize,
    /// Utterances per conversation, the opener included.
    #[arg(long, default_value_t = 6)]
    pub turns: usize,
    /// Strategies to run (repeatable) [default: all three]
    #[arg(long, value_enum)]
    pub strategy: Vec<StrategyArg>,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PoolingArg {
    Conversation,
    Turn,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Transcript JSONL file, or a directory of `*.jsonl` files.
    #[arg(long)]
    pub transcripts: PathBuf,
    /// How candidate sets are pooled for pre-selection distinct-n.
    #[arg(long, value_enum, default_value = "conversation")]
    pub pooling: PoolingArg,
    /// Also write the report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write the text report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    /// Overall 1-4 scores.
    Star,
    /// Per-pair good or bad flags.
    Binary,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FlagArg {
    Good,
    Bad,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("input").required(true).args(["csv", "transcripts"]))]
pub struct CalibrateArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// `model,annotator,score` or `model,annotator,turn,label` CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Annotated transcripts (file or directory).
    #[arg(long)]
    pub transcripts: Option<PathBuf>,
    /// Which pair flag to model when reading binary labels from transcripts.
    #[arg(long, value_enum, default_value = "good")]
    pub flag: FlagArg,
    /// Warmup sweeps [default: 50 star, 30 binary]
    #[arg(long)]
    pub warmup: Option<usize>,
    /// Kept draws [default: 150 star, 100 binary]
    #[arg(long)]
    pub draws: Option<usize>,
    /// Sweeps per kept draw.
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    /// Output JSON file [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// TOML service configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `port` from the config file.
    #[arg(long)]
    pub port: Option<u16>,
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return exit::OK;
            }
            let rendered = e.to_string();
            let line = rendered.lines().next().unwrap_or("usage error");
            eprintln!("dialsearch: {}", line.trim_start_matches("error: "));
            return exit::USAGE;
        }
    };
    match execute(cli) {
        Ok(()) => exit::OK,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("dialsearch: error: {msg}");
            e.code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    let seed = cli.seed;
    match cli.command {
        Command::Train(a) => train(a),
        Command::Decode(a) => decode_cmd(a),
        Command::Selfplay(a) => selfplay(a, seed.unwrap_or(0)),
        Command::Metrics(a) => metrics(a),
        Command::Calibrate(a) => calibrate(a, seed.unwrap_or(0)),
        Command::Serve(a) => serve_cmd(a, seed),
    }
}

fn require_file(path: &Path) -> Result<(), CliError> {
    match fs::metadata(path) {
        Ok(m) if m.is_file() => Ok(()),
        Ok(_) => Err(CliError::io(path, std::io::Error::other("not a regular file"))),
        Err(e) => Err(CliError::io(path, e)),
    }
}

fn require_exists(path: &Path) -> Result<(), CliError> {
    fs::metadata(path).map(|_| ()).map_err(|e| CliError::io(path, e))
}

fn require_output(path: &Path) -> Result<(), CliError> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
    match parent {
        Some(dir) if !dir.is_dir() => Err(CliError::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "output directory does not exist"),
        )),
        _ => Ok(()),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn load_model(path: &Path) -> Result<NGramLm, CliError> {
    NGramLm::from_json(&read(path)?).map_err(|e| CliError::malformed(path, e))
}

fn load_personas(path: &Path) -> Result<PersonaPool, CliError> {
    PersonaPool::parse(&read(path)?).map_err(|e| CliError::malformed(path, e))
}

impl SearchArgs {
    fn resolve(&self) -> Result<SearchConfig, CliError> {
        let mut cfg = match &self.search_config {
            Some(path) => toml::from_str(&read(path)?).map_err(|e| CliError::malformed(path, e))?,
            None => SearchConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { cfg.$f = v; })* };
        }
        set!(beam_width, max_candidates, max_length, block_ngram, length_penalty_alpha, iterations, epsilon);
        if let Some(m) = self.mode {
            cfg.mode = match m {
                ModeArg::Sequential => IterMode::Sequential,
                ModeArg::Parallel => IterMode::Parallel,
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn check_paths(&self) -> Result<(), CliError> {
        self.search_config.as_deref().map_or(Ok(()), require_file)
    }
}

fn train(a: TrainArgs) -> Result<(), CliError> {
    require_file(&a.corpus)?;
    require_output(&a.out)?;
    let config = NGramConfig {
        order: a.order,
        alpha: a.alpha,
        history_window: a.history_window,
        ..NGramConfig::default()
    };
    config.validate()?;
    let corpus = parse_corpus(&read(&a.corpus)?).map_err(|e| CliError::malformed(&a.corpus, e))?;
    let model = train_ngram(&corpus, config).map_err(|e| match e {
        LmError::EmptyCorpus => CliError::Invalid(format!("{}: corpus has no turns", a.corpus.display())),
        other => CliError::from(other),
    })?;
    let json = model.to_json()?;
    write(&a.out, &json)?;
    println!(
        "trained order-{} model on {} conversations, {} vocabulary entries -> {}",
        a.order,
        corpus.len(),
        model.vocab().len(),
        a.out.display()
    );
    Ok(())
}

fn decode_cmd(a: DecodeArgs) -> Result<(), CliError> {
    require_file(&a.model)?;
    a.search.check_paths()?;
    let cfg = a.search.resolve()?;
    let model = load_model(&a.model)?;
    let vocab = model.vocab();
    let ids = |text: &str| tokenize(text).iter().map(|w| vocab.id_or_unk(w)).collect::<Vec<_>>();
    let persona = a.persona.iter().map(|l| ids(l)).collect();
    let mut speaker = Speaker::A;
    let history = a
        .turns
        .iter()
        .map(|t| {
            let turn = (speaker, ids(t));
            speaker = speaker.other();
            turn
        })
        .collect();
    let ctx = Context::new(persona, history)?;
    let decoded = decode(&model, &ctx, a.strategy.into(), &cfg)?;
    let mut out = String::new();
    if a.json {
        let rows: Vec<serde_json::Value> = decoded
            .candidates
            .iter()
            .enumerate()
            .map(|(i, c)| {
                serde_json::json!({
                    "text": vocab.detokenize(&c.hypothesis.tokens),
                    "logp": c.hypothesis.score,
                    "score": c.selection_score,
                    "iteration": c.iteration,
                    "forced": c.forced,
                    "selected": i == decoded.selected,
                })
            })
            .collect();
        out = serde_json::to_string_pretty(&rows).expect("json") + "\n";
    } else {
        out.push_str(&format!("{} candidates ({})\n", decoded.candidates.len(), Strategy::from(a.strategy)));
        out.push_str("    #   score    log-p  iter  response\n");
        for (i, c) in decoded.candidates.iter().enumerate() {
            let mark = if i == decoded.selected { '*' } else { ' ' };
            out.push_str(&format!(
                "{mark} {:>3} {:>7.3} {:>8.3} {:>5}  {}{}\n",
                i + 1,
                c.selection_score,
                c.hypothesis.score,
                c.iteration,
                vocab.detokenize(&c.hypothesis.tokens),
                if c.forced { "  [forced]" } else { "" }
            ));
        }
    }
    std::io::stdout()
        .write_all(out.as_bytes())
        .map_err(|e| CliError::Internal(e.to_string()))
}

fn selfplay(a: SelfplayArgs, seed: u64) -> Result<(), CliError> {
    require_file(&a.model)?;
    require_file(&a.personas)?;
    require_output(&a.out)?;
    a.search.check_paths()?;
    let cfg = a.search.resolve()?;
    let model = load_model(&a.model)?;
    let pool = load_personas(&a.personas)?;
    let strategies: Vec<Strategy> = if a.strategy.is_empty() {
        Strategy::ALL.to_vec()
    } else {
        a.strategy.iter().map(|&s| s.into()).collect()
    };
    let mut records: Vec<TranscriptRecord> = Vec::new();
    for s in &strategies {
        records.extend(self_play(&model, &pool, a.conversations, *s, a.turns, seed, &cfg)?);
    }
    write_jsonl(&a.out, &records).map_err(|e| CliError::from_eval(&a.out, e))?;
    println!(
        "{} conversations ({} per strategy) -> {}",
        records.len(),
        a.conversations,
        a.out.display()
    );
    Ok(())
}

fn load_transcripts(path: &Path) -> Result<Vec<TranscriptRecord>, CliError> {
    read_transcripts(path).map_err(|e| CliError::from_eval(path, e))
}

fn metrics(a: MetricsArgs) -> Result<(), CliError> {
    require_exists(&a.transcripts)?;
    if let Some(p) = &a.json {
        require_output(p)?;
    }
    if let Some(p) = &a.out {
        require_output(p)?;
    }
    let records = load_transcripts(&a.transcripts)?;
    if records.is_empty() {
        return Err(CliError::Invalid(format!("{}: no transcripts", a.transcripts.display())));
    }
    let pooling = match a.pooling {
        PoolingArg::Conversation => Pooling::Conversation,
        PoolingArg::Turn => Pooling::Turn,
    };
    let report = build_report(&metrics_inputs(&records), pooling)?;
    if let Some(p) = &a.json {
        write(p, &(report.to_json() + "\n"))?;
    }
    let text = report.render();
    match &a.out {
        Some(p) => write(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn calibrate(a: CalibrateArgs, seed: u64) -> Result<(), CliError> {
    let input = a.csv.as_ref().or(a.transcripts.as_ref()).expect("clap enforces one input");
    require_exists(input)?;
    if let Some(p) = &a.out {
        require_output(p)?;
    }
    let mut cfg = match a.kind {
        KindArg::Star => SamplerConfig::star(),
        KindArg::Binary => SamplerConfig::binary(),
    };
    cfg.seed = seed;
    cfg.thin = a.thin;
    if let Some(w) = a.warmup {
        cfg.warmup = w;
    }
    if let Some(d) = a.draws {
        cfg.draws = d;
    }
    cfg.validate()?;

    let csv_err = |path: &Path, e: CalibrationError| match e {
        CalibrationError::Csv { .. } => CliError::malformed(path, e),
        other => CliError::Invalid(format!("{}: {other}", path.display())),
    };
    let result: CalibrationResult = match (a.kind, &a.csv) {
        (KindArg::Star, Some(path)) => {
            let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
            let obs = StarObservations::read_csv(file).map_err(|e| csv_err(path, e))?;
            calibrate_star(&obs, &cfg)?
        }
        (KindArg::Binary, Some(path)) => {
            let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
            let obs = BinaryObservations::read_csv(file).map_err(|e| csv_err(path, e))?;
            calibrate_binary(&obs, &cfg)?
        }
        (kind, None) => {
            let records = load_transcripts(input)?;
            match kind {
                KindArg::Star => calibrate_star(&star_observations(&records)?, &cfg)?,
                KindArg::Binary => {
                    let flag = match a.flag {
                        FlagArg::Good => PairFlag::Good,
                        FlagArg::Bad => PairFlag::Bad,
                    };
                    calibrate_binary(&binary_observations(&records, flag)?, &cfg)?
                }
            }
        }
    };
    let json = result.to_json() + "\n";
    match &a.out {
        Some(p) => write(p, &json),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn serve_cmd(a: ServeArgs, seed: Option<u64>) -> Result<(), CliError> {
    require_file(&a.config)?;
    let mut cfg = ServerConfig::load(&a.config).map_err(|e| CliError::malformed(&a.config, e))?;
    if let Some(p) = a.port {
        cfg.port = p;
    }
    if let Some(seed) = seed {
        cfg.service.seed = seed;
    }
    require_file(&cfg.model)?;
    require_file(&cfg.personas)?;
    require_output(&cfg.transcripts)?;
    let svc = load_service(&cfg).map_err(|e| CliError::malformed(&a.config, e))?;
    let addr = format!("{}:{}", cfg.host, cfg.port)
        .parse()
        .map_err(|e| CliError::Invalid(format!("bad listen address: {e}")))?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Internal(e.to_string()))?;
    eprintln!("dialsearch: serving on http://{addr}");
    rt.block_on(serve(router(svc), addr))
        .map_err(|e| CliError::Internal(format!("server: {e}")))
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kbspace::auto::{KSetting, PrunePolicy, PruneSetting};
use kbspace::bundle;
use kbspace::config::{self, parse_weights, ConfigOverrides, EngineConfig};
use kbspace::eval::{self, GridSpec, MicroBenchSpec};
use kbspace::ingest::{self, DEFAULT_FACT_ID_PREFIX};
use kbspace::report::SearchSpaceReport;
use kbspace::service::{self, AppState};
use kbspace::synth::{self, SyntheticSpec};
use kbspace::{Error, Result};

#[derive(Parser)]
#[command(name = "kbspace", version, about = "Reduce a knowledge base to a question's answer search space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an index bundle from items and facts.
    Ingest {
        #[arg(long)]
        items: PathBuf,
        /// Tab-separated triples; qualified facts reified through fact-id nodes.
        #[arg(long, conflicts_with = "facts", required_unless_present = "facts")]
        triples: Option<PathBuf>,
        /// JSON lines `{s, p, o, qualifiers}`.
        #[arg(long)]
        facts: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = DEFAULT_FACT_ID_PREFIX)]
        fact_id_prefix: String,
    },
    /// Print the search space of one question as JSON.
    Query {
        question: String,
        /// Use these terms instead of segmenting the question.
        #[arg(long = "term")]
        terms: Vec<String>,
        /// Leave stage timings out of the output.
        #[arg(long)]
        no_timings: bool,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Evaluate a question set; writes report.json and report.csv.
    Bench {
        #[arg(long)]
        instances: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Evaluate every point of a parameter grid and report the best.
    Grid {
        #[arg(long)]
        instances: PathBuf,
        /// JSON or TOML file with `weights`, `k`, `p` and `depth` axes.
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long)]
        bind: Option<String>,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Time neighborhood lookups and distance checks on a synthetic KB.
    MicroBench {
        #[arg(long, default_value_t = 100_000)]
        num_facts: usize,
        #[arg(long, default_value_t = 1_000_000)]
        lookups: usize,
        #[arg(long, default_value_t = 1_000_000)]
        pairs: usize,
        #[arg(long, default_value_t = 20)]
        naive_samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct EngineArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    bundle: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Disambiguations per term: a positive integer or `auto`.
    #[arg(long)]
    k: Option<KSetting>,
    #[arg(long)]
    k_max: Option<usize>,
    /// Pruning threshold: an integer (`1k` allowed), `inf`, or a policy.
    #[arg(long, conflicts_with = "auto_p_policy")]
    p: Option<PruneSetting>,
    /// Derive p from k: `10^(5-k)`, `10^(5-0.5k)` or `10^(4-0.5k)`.
    #[arg(long, value_parser = parse_policy)]
    auto_p_policy: Option<PrunePolicy>,
    /// Candidate list depth.
    #[arg(long)]
    d: Option<usize>,
    /// `coh,conn,rel,match`, summing to 1.
    #[arg(long, value_parser = |s: &str| parse_weights(s))]
    weights: Option<kbspace::SignalWeights>,
    /// Keep only the n facts that best match the question under BM25.
    #[arg(long)]
    bm25_top_n: Option<usize>,
    #[arg(long)]
    no_coh: bool,
    #[arg(long)]
    no_conn: bool,
    #[arg(long)]
    no_rel: bool,
    #[arg(long)]
    no_match: bool,
}

fn parse_policy(s: &str) -> Result<PrunePolicy> {
    match s.parse()? {
        PruneSetting::Auto(policy) => Ok(policy),
        _ => Err(Error::InvalidArgument(format!("unknown pruning policy `{s}`"))),
    }
}

impl EngineArgs {
    fn resolve(&self) -> Result<EngineConfig> {
        let flags = ConfigOverrides {
            bundle: self.bundle.clone(),
            embeddings: self.embeddings.clone(),
            stopwords: self.stopwords.clone(),
            bind: None,
            weights: self.weights,
            depth: self.d,
            k: self.k,
            k_max: self.k_max,
            p: self.p.or(self.auto_p_policy.map(PruneSetting::Auto)),
            bm25_top_n: self.bm25_top_n,
        };
        let mut cfg = config::resolve(self.config.as_deref(), &ConfigOverrides::from_env()?, &flags)?;
        let a = &mut cfg.query.ablation;
        a.coh &= !self.no_coh;
        a.conn &= !self.no_conn;
        a.rel &= !self.no_rel;
        a.term_match &= !self.no_match;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn ingest(items: &Path, triples: Option<&Path>, facts: Option<&Path>, out: &Path, prefix: &str) -> Result<()> {
    let items = ingest::read_items(items)?;
    let parsed = match (triples, facts) {
        (Some(t), _) => ingest::aggregate_reified(ingest::read_triples(t)?.records, prefix)?,
        (None, Some(f)) => ingest::read_fact_lines(f)?,
        (None, None) => return Err(Error::InvalidArgument("one of --triples or --facts is required".into())),
    };
    if parsed.malformed > 0 {
        eprintln!("warning: skipped {} malformed records", parsed.malformed);
    }
    let kb = bundle::build_knowledge_base(&items, &parsed.records)?;
    bundle::save(&kb, out)?;
    eprintln!("wrote {} items and {} facts to {}", kb.num_items(), kb.num_facts(), out.display());
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("value serializes") + "\n"
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest {
            items,
            triples,
            facts,
            out,
            fact_id_prefix,
        } => ingest(&items, triples.as_deref(), facts.as_deref(), &out, &fact_id_prefix),
        Command::Query {
            question,
            terms,
            no_timings,
            engine,
        } => {
            let cfg = engine.resolve()?;
            let engine = cfg.open_engine()?;
            let terms = (!terms.is_empty()).then_some(terms.as_slice());
            let space = engine.search_space(&question, terms, &cfg.query)?;
            print!("{}", SearchSpaceReport::new(engine.kb(), &space, !no_timings).to_json());
            Ok(())
        }
        Command::Bench { instances, out, engine } => {
            let cfg = engine.resolve()?;
            let engine = cfg.open_engine()?;
            let instances = eval::read_instances(&instances)?;
            let report = eval::run_benchmark(&engine, &instances, &cfg.query)?;
            report.write(&out)?;
            print!("{}", to_json(&report.aggregates));
            Ok(())
        }
        Command::Grid {
            instances,
            grid,
            out,
            engine,
        } => {
            let cfg = engine.resolve()?;
            let engine = cfg.open_engine()?;
            let instances = eval::read_instances(&instances)?;
            let grid = GridSpec::from_file(&grid)?;
            let result = eval::grid_search(&engine, &instances, &grid, &cfg.query)?;
            let json = to_json(&result);
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir).map_err(|e| Error::Config(format!("{}: {e}", dir.display())))?;
                let path = dir.join("grid.json");
                std::fs::write(&path, &json).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            }
            print!("{json}");
            Ok(())
        }
        Command::Serve { bind, engine } => {
            let mut cfg = engine.resolve()?;
            if let Some(b) = bind {
                cfg.bind = b;
            }
            let state = AppState {
                engine: cfg.open_engine()?,
                defaults: cfg.query,
            };
            service::serve(state, &cfg.bind)
        }
        Command::MicroBench {
            num_facts,
            lookups,
            pairs,
            naive_samples,
            seed,
        } => {
            let kb = synth::generate(&SyntheticSpec::with_facts(num_facts, seed))?;
            let spec = MicroBenchSpec {
                lookups,
                pairs,
                naive_samples,
                seed,
            };
            print!("{}", to_json(&eval::micro_bench(&kb, &spec)?));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

//! `pirdb` command line.
//!
//! Exit status: 0 on success, 1 when some input could not be processed,
//! 2 for usage errors and unusable stores.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{ArgGroup, Args, Parser, Subcommand};

use pir_core::eval::{generate_corpus, sweep, CorpusSpec, EvalTable, DEFAULT_THRESHOLDS};
use pir_core::model::Threshold;
use pir_core::similarity::ScoredResult;

use crate::doc::{parse, AnnotationDoc, CorpusSpecDoc, SketchQueryDoc};
use crate::engine::{Annotation, Engine};
use crate::error::DbError;
use crate::evaluation::evaluate_with_engine;
use crate::service;

const OK: u8 = 0;
const DATA_FAILURE: u8 = 1;
const USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "pirdb", version, about = "Content-based image retrieval by spatial arrangement")]
pub struct Cli {
    /// Store directory.
    #[arg(long, global = true, env = "PIR_DB", value_name = "DIR")]
    pub db: Option<PathBuf>,
    /// More log output on stderr; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Insert annotation files.
    Ingest {
        #[arg(required = true, value_name = "FILE")]
        files: Vec<PathBuf>,
    },
    /// Query by sketch file or by a stored image.
    Query(QueryArgs),
    /// Recall/precision sweep over a generated corpus.
    Eval(EvalArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["sketch", "image_id"])))]
pub struct QueryArgs {
    #[arg(long, value_name = "FILE")]
    pub sketch: Option<PathBuf>,
    #[arg(long, value_name = "ID")]
    pub image_id: Option<String>,
    #[arg(long, default_value_t = 0, value_parser = parse_threshold, value_name = "N")]
    pub threshold: u8,
    #[arg(long)]
    pub invariant: bool,
    #[arg(long, value_name = "K")]
    pub limit: Option<usize>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("corpus").required(true).args(["spec", "default_corpus"])))]
pub struct EvalArgs {
    #[arg(long, value_name = "FILE")]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub default_corpus: bool,
    #[arg(long, value_delimiter = ',', value_parser = parse_threshold, default_values_t = DEFAULT_THRESHOLDS)]
    pub thresholds: Vec<u8>,
    /// Overrides the seed in a spec file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Evaluate in memory without touching a store.
    #[arg(long)]
    pub db_less: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Directory of static files served under `/`.
    #[arg(long, value_name = "DIR")]
    pub ui: Option<PathBuf>,
}

fn parse_threshold(s: &str) -> Result<u8, String> {
    let v: i64 = s.trim().parse().map_err(|_| format!("{s:?} is not an integer"))?;
    Threshold::new(v).map(|t| t.value()).map_err(|e| e.to_string())
}

pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { OK });
        }
    };
    init_logging(cli.verbose);
    ExitCode::from(dispatch(cli))
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let filter = tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(level));
    let _ = tracing_subscriber::fmt().with_env_filter(filter).with_writer(std::io::stderr).try_init();
}

fn dispatch(cli: Cli) -> u8 {
    match cli.command {
        Command::Eval(args) if args.db_less => eval(None, &args),
        command => {
            let Some(db) = cli.db else {
                eprintln!("error: a store directory is required (--db DIR or PIR_DB)");
                return USAGE;
            };
            match command {
                Command::Ingest { files } => with_engine(&db, |e| ingest(e, &files)),
                Command::Query(args) => with_engine(&db, |e| query(e, &args)),
                Command::Eval(args) => eval(Some(&db), &args),
                Command::Serve(args) => with_engine(&db, |e| serve(e, &args)),
            }
        }
    }
}

fn open(db: &Path) -> Result<Engine, u8> {
    Engine::open(db).map_err(|e| {
        eprintln!("error: cannot use store {}: {e}", db.display());
        USAGE
    })
}

fn with_engine(db: &Path, f: impl FnOnce(Engine) -> u8) -> u8 {
    match open(db) {
        Ok(e) => f(e),
        Err(code) => code,
    }
}

fn ingest(engine: Engine, files: &[PathBuf]) -> u8 {
    let mut status = OK;
    for file in files {
        let result = std::fs::read_to_string(file)
            .map_err(|e| DbError::io(file, e))
            .and_then(|text| parse::<AnnotationDoc>("annotation", &text))
            .and_then(|doc| Annotation::from_doc(&doc, Some(file.parent().unwrap_or(Path::new(".")))))
            .and_then(|a| engine.insert_image(&a));
        match result {
            Ok(id) => println!("{}\t{id}", file.display()),
            Err(e) => {
                eprintln!("{}: error: {e}", file.display());
                status = DATA_FAILURE;
            }
        }
    }
    status
}

/// One line per result: rank, id, similarity with one decimal, matched names.
pub fn format_results(results: &[ScoredResult<String>]) -> String {
    let mut out = String::from("rank\tid\tsimilarity\tmatched\n");
    for (k, r) in results.iter().enumerate() {
        let _ = writeln!(out, "{}\t{}\t{:.1}\t{}", k + 1, r.id, r.similarity, r.matched.join(", "));
    }
    out
}

fn query(engine: Engine, args: &QueryArgs) -> u8 {
    let threshold = Threshold::new(i64::from(args.threshold)).expect("parsed in range");
    let result = match (&args.sketch, &args.image_id) {
        (Some(file), None) => std::fs::read_to_string(file)
            .map_err(|e| DbError::io(file, e))
            .and_then(|text| parse::<SketchQueryDoc>("sketch query", &text))
            .and_then(|mut doc| {
                doc.threshold = i64::from(threshold.value());
                doc.invariant |= args.invariant;
                doc.limit = args.limit.or(doc.limit);
                Ok(engine.query_sketch(&doc.to_query()?))
            }),
        (None, Some(id)) => engine.query_by_image(id, threshold, args.invariant, args.limit),
        _ => unreachable!("clap enforces exactly one source"),
    };
    match result {
        Ok(results) => {
            print!("{}", format_results(&results));
            OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            DATA_FAILURE
        }
    }
}

fn load_spec(args: &EvalArgs) -> Result<CorpusSpec, DbError> {
    match &args.spec {
        Some(file) => {
            let text = std::fs::read_to_string(file).map_err(|e| DbError::io(file, e))?;
            let mut spec = parse::<CorpusSpecDoc>("corpus spec", &text)?.to_spec()?;
            if let Some(seed) = args.seed {
                spec.seed = seed;
            }
            Ok(spec)
        }
        None => Ok(CorpusSpec::default_corpus(args.seed.unwrap_or(1))?),
    }
}

fn eval(db: Option<&Path>, args: &EvalArgs) -> u8 {
    let thresholds: Vec<Threshold> =
        args.thresholds.iter().map(|&t| Threshold::new(i64::from(t)).expect("parsed in range")).collect();
    let corpus = match load_spec(args).and_then(|spec| Ok(generate_corpus(&spec)?)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return USAGE;
        }
    };
    let table: Result<EvalTable, DbError> = match db {
        None => sweep(&corpus, &thresholds, &Default::default()).map_err(DbError::from),
        Some(db) => {
            let engine = match open(db) {
                Ok(e) => e,
                Err(code) => return code,
            };
            if !engine.snapshot().is_empty() {
                eprintln!("error: store {} is not empty; evaluate into a fresh directory or use --db-less", db.display());
                return USAGE;
            }
            evaluate_with_engine(&engine, &corpus, &thresholds).map(|(t, _)| t)
        }
    };
    match table {
        Ok(t) => {
            print!("{}\n{}", t.to_text(), t.to_csv());
            OK
        }
        Err(e @ DbError::Core(pir_core::Error::Config(_))) => {
            eprintln!("error: {e}");
            USAGE
        }
        Err(e) => {
            eprintln!("error: {e}");
            DATA_FAILURE
        }
    }
}

fn serve(engine: Engine, args: &ServeArgs) -> u8 {
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("error: cannot start runtime: {e}");
            return USAGE;
        }
    };
    let app = service::router(Arc::new(engine), args.ui.clone());
    runtime.block_on(async {
        let listener = match tokio::net::TcpListener::bind((args.host.as_str(), args.port)).await {
            Ok(l) => l,
            Err(e) => {
                eprintln!("error: cannot listen on {}:{}: {e}", args.host, args.port);
                return USAGE;
            }
        };
        let addr: Option<SocketAddr> = listener.local_addr().ok();
        if let Some(addr) = addr {
            eprintln!("listening on http://{addr}");
        }
        match service::serve(listener, app, shutdown_signal()).await {
            Ok(()) => OK,
            Err(e) => {
                eprintln!("error: {e}");
                DATA_FAILURE
            }
        }
    })
}

async fn shutdown_signal() {
    let interrupt = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = interrupt => {}
        _ = terminate => {}
    }
}

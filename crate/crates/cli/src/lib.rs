//! `sememe-kb`: query a sememe knowledge base from the shell.
//!
//! Exit status is 0 on success, 1 on domain errors (unknown word, sense or
//! sememe; dataset problems) and 2 on usage errors. `--json` output has the
//! same structure as the matching HTTP endpoint.

use std::ffi::OsString;
use std::io::{IsTerminal, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use sememe_kb::dataset::{load_dir, DatasetError};
use sememe_kb::lexicon::LoadMode;
use sememe_kb::{Lang, MatchMode, RenderFormat, SenseId};
use sememe_kb_service::api::{self, ApiError, ErrorBody, ErrorClass, ErrorDetail, Kb, KbError};
use sememe_kb_service::{ServeError, Server, ServiceConfig, DATA_ENV};

pub const EXIT_OK: u8 = 0;
pub const EXIT_DOMAIN: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "sememe-kb", version, about = "Query a sememe-annotated bilingual lexicon")]
pub struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Data {
    /// Dataset directory containing taxonomy.jsonl and senses.jsonl.
    #[arg(long, env = DATA_ENV, value_name = "DIR")]
    pub data: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sense, word and sememe counts.
    Stats {
        #[command(flatten)]
        data: Data,
    },
    /// Find senses by word form.
    Search {
        query: String,
        #[command(flatten)]
        data: Data,
        #[arg(long, default_value = "auto")]
        lang: Lang,
        #[arg(long, default_value = "exact")]
        mode: MatchMode,
        #[arg(long, default_value_t = api::LIMIT_DEFAULT)]
        limit: usize,
    },
    /// Full sense card, including the nearest senses.
    Sense {
        id: u64,
        #[command(flatten)]
        data: Data,
    },
    /// Draw the definition tree of a sense.
    Tree {
        id: u64,
        #[command(flatten)]
        data: Data,
        #[arg(long, default_value = "ascii")]
        format: RenderFormat,
        /// Use plain ASCII connectors instead of box drawing.
        #[arg(long)]
        ascii_only: bool,
    },
    /// Similarity of two words: the best score over their sense pairs.
    Sim {
        a: String,
        b: String,
        #[command(flatten)]
        data: Data,
        #[arg(long, default_value = "en")]
        lang: Lang,
        /// Similarity constants as JSON.
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
    },
    /// Senses most similar to a sense.
    Nearest {
        id: u64,
        #[command(flatten)]
        data: Data,
        #[arg(short, default_value_t = api::K_DEFAULT)]
        k: usize,
    },
    /// Look up sememes by `en|zh`, English or Chinese label.
    Sememe {
        query: String,
        #[command(flatten)]
        data: Data,
    },
    /// Run every load-time check and list the problems found.
    Validate {
        #[command(flatten)]
        data: Data,
    },
    /// Start the HTTP service.
    Serve {
        #[command(flatten)]
        data: Data,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        #[arg(long, default_value_t = 8080, value_parser = clap::value_parser!(u16).range(1..))]
        port: u16,
        /// Similarity constants as JSON.
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        /// Near senses shown on a sense card.
        #[arg(long, default_value_t = api::K_DEFAULT)]
        k_default: usize,
        /// Additional browser origin allowed to call the API.
        #[arg(long, value_name = "ORIGIN")]
        cors_origin: Option<String>,
        /// Directory served at `/`.
        #[arg(long, value_name = "DIR")]
        static_dir: Option<PathBuf>,
    },
}

/// Run the tool on `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
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
    let json = cli.json;
    match execute(cli, out) {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            let _ = failure.report(json, err);
            failure.code
        }
    }
}

struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn report(&self, json: bool, err: &mut dyn Write) -> std::io::Result<()> {
        if json {
            let body = ErrorBody { error: ErrorDetail { kind: self.kind, message: &self.message } };
            writeln!(err, "{}", serde_json::to_string(&body).expect("serializable"))
        } else {
            writeln!(err, "error: {}", self.message)
        }
    }
}

impl From<ApiError> for Failure {
    fn from(e: ApiError) -> Self {
        let code = match e.class {
            ErrorClass::BadRequest => EXIT_USAGE,
            ErrorClass::NotFound => EXIT_DOMAIN,
        };
        Failure { code, kind: e.kind, message: e.message }
    }
}

impl From<KbError> for Failure {
    fn from(e: KbError) -> Self {
        let code = match e {
            KbError::Config(_) | KbError::KDefault(_) => EXIT_USAGE,
            KbError::Dataset(_) => EXIT_DOMAIN,
        };
        Failure { code, kind: "LoadError", message: e.to_string() }
    }
}

impl From<ServeError> for Failure {
    fn from(e: ServeError) -> Self {
        match e {
            ServeError::Load(e) => e.into(),
            ServeError::BadOrigin(_) | ServeError::MissingStatic(_) => {
                Failure { code: EXIT_USAGE, kind: "BadParameter", message: e.to_string() }
            }
            _ => Failure { code: EXIT_DOMAIN, kind: "ServeError", message: e.to_string() },
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: EXIT_DOMAIN, kind: "IoError", message: e.to_string() }
    }
}

fn open(data: &Data, config: Option<&Path>) -> Result<Kb, Failure> {
    Ok(Kb::open(&data.data, config, api::K_DEFAULT)?)
}

fn emit<T: Serialize>(
    out: &mut dyn Write,
    json: bool,
    value: &T,
    text: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<(), Failure> {
    if json {
        writeln!(out, "{}", serde_json::to_string_pretty(value).expect("serializable"))?;
    } else {
        text(out)?;
    }
    Ok(())
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    let json = cli.json;
    match cli.command {
        Command::Stats { data } => {
            let s = api::stats(&open(&data, None)?);
            emit(out, json, &s, |o| {
                writeln!(o, "senses\t{}", s.sense_count)?;
                writeln!(o, "chinese words\t{}", s.distinct_zh_words)?;
                writeln!(o, "english words\t{}", s.distinct_en_words)?;
                writeln!(o, "sememes\t{}", s.sememe_count)
            })
        }
        Command::Search { query, data, lang, mode, limit } => {
            let hits = api::search(&open(&data, None)?, &query, lang, mode, limit)?;
            emit(out, json, &hits, |o| {
                for h in &hits {
                    writeln!(o, "{h}")?;
                }
                Ok(())
            })
        }
        Command::Sense { id, data } => {
            let card = api::sense_card(&open(&data, None)?, SenseId(id))?;
            emit(out, json, &card, |o| {
                writeln!(o, "{} {} / {} ({})", card.id, card.zh, card.en, card.pos)?;
                writeln!(o, "def: {}", card.def_text)?;
                if let Some(s) = &card.sentiment {
                    writeln!(o, "sentiment: {s}")?;
                }
                for e in &card.examples {
                    writeln!(o, "example: {e}")?;
                }
                write!(o, "{}", sememe_kb::render_tree(&card.def_tree, RenderFormat::Ascii))?;
                writeln!(o, "near:")?;
                for n in &card.near {
                    writeln!(o, "  {:.4}\t{}\t{}\t{}", n.score, n.sense.id, n.sense.zh, n.sense.en)?;
                }
                Ok(())
            })
        }
        Command::Tree { id, data, format, ascii_only } => {
            let view = api::tree(&open(&data, None)?, SenseId(id), format, ascii_only)?;
            emit(out, json, &view, |o| {
                write!(o, "{}", view.rendered)?;
                if !view.rendered.ends_with('\n') {
                    writeln!(o)?;
                }
                Ok(())
            })
        }
        Command::Sim { a, b, data, lang, config } => {
            let sim = api::similarity(&open(&data, config.as_deref())?, &a, &b, lang)?;
            emit(out, json, &sim, |o| {
                writeln!(o, "{:.6}", sim.score)?;
                writeln!(o, "best pair: {} / {} ({} pairs)", sim.best_a, sim.best_b, sim.pairs_evaluated)
            })
        }
        Command::Nearest { id, data, k } => {
            let near = api::nearest(&open(&data, None)?, SenseId(id), k)?;
            emit(out, json, &near, |o| {
                for n in &near {
                    writeln!(o, "{:.6}\t{}", n.score, n.sense)?;
                }
                Ok(())
            })
        }
        Command::Sememe { query, data } => {
            let kb = open(&data, None)?;
            let found = api::sememes(&kb, &query);
            emit(out, json, &found, |o| {
                for s in &found {
                    let parent = s.parent.map(|p| p.to_string()).unwrap_or_else(|| "-".into());
                    writeln!(o, "{}\t{}\t{}\tparent {parent}", s.id, s.label, s.category.as_str())?;
                }
                Ok(())
            })
        }
        Command::Validate { data } => validate(&data.data, json, out),
        Command::Serve { data, host, port, config, k_default, cors_origin, static_dir } => {
            let _ = tracing_subscriber::fmt()
                .with_writer(std::io::stderr)
                .with_ansi(std::io::stderr().is_terminal())
                .try_init();
            let config = ServiceConfig {
                addr: SocketAddr::new(host, port),
                data_dir: data.data,
                similarity_config: config,
                k_default,
                cors_origin,
                static_dir,
            };
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async {
                let server = Server::bind(&config).await?;
                writeln!(out, "listening on http://{}", server.local_addr()?)?;
                out.flush()?;
                server.run(sememe_kb_service::shutdown_signal()).await?;
                Ok(())
            })
        }
    }
}

#[derive(Debug, Serialize)]
struct Report {
    ok: bool,
    senses_loaded: usize,
    issues: Vec<String>,
}

fn validate(dir: &Path, json: bool, out: &mut dyn Write) -> Result<(), Failure> {
    let report = match load_dir(dir, LoadMode::Lenient) {
        Ok(loaded) => Report {
            ok: loaded.issues.is_empty(),
            senses_loaded: loaded.lexicon.len(),
            issues: loaded.issues.iter().map(DatasetError::to_string).collect(),
        },
        Err(e) => Report { ok: false, senses_loaded: 0, issues: vec![e.to_string()] },
    };
    emit(out, json, &report, |o| {
        for issue in &report.issues {
            writeln!(o, "{issue}")?;
        }
        writeln!(o, "{} senses loaded, {} issues", report.senses_loaded, report.issues.len())
    })?;
    if report.ok {
        Ok(())
    } else {
        Err(Failure { code: EXIT_DOMAIN, kind: "ValidationFailed", message: format!("{} issues", report.issues.len()) })
    }
}

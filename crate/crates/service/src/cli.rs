//! `kgqa` command line. Exit codes: 0 ok, 1 validation, 2 I/O or network,
//! 3 not found.

use std::fmt::Write as _;
use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use kgqa_core::aggregation::{AggregationOptions, WeightProfile};
use kgqa_core::catalog::catalog_document;
use kgqa_core::metrics::{GoldStandard, Judgment, SchemaSpec};
use kgqa_core::pipeline::{self, PipelineError, Ranking, RetuneTarget, RunOptions};
use kgqa_core::probe::probe_all;
use kgqa_core::rational::Rational;
use kgqa_core::rdf::{parse_file, IngestError, IngestOptions};
use kgqa_core::registry::{AssessmentRun, Entity, KgRecord, RunFilter, RunStatus, Store, StoreError, UseCase};
use serde::Serialize;
use serde_json::{json, Value};

use crate::api::{self, ApiConfig, AppState};
use crate::error::{classify, ErrorClass};

#[derive(Debug, Parser)]
#[command(name = "kgqa", version, about = "Knowledge graph quality assessment")]
pub struct Cli {
    /// Store directory.
    #[arg(long, global = true, env = "KGQA_STORE", default_value = "kgqa-store")]
    pub store: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Probe timeout override in milliseconds.
    #[arg(long, global = true, env = "KGQA_TIMEOUT_MS")]
    pub timeout_ms: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Kg,
    Usecase,
    Profile,
    Goldstandard,
    Schema,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse an RDF file into a stored snapshot; registers the KG if new.
    Ingest {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        kg: String,
        /// Skip malformed statements instead of failing.
        #[arg(long)]
        lenient: bool,
        #[arg(long)]
        base: Option<String>,
    },
    /// Probe the endpoints configured for a KG.
    Probe {
        #[arg(long)]
        kg: String,
    },
    /// Create and execute a run.
    Assess {
        #[arg(long)]
        kg: String,
        #[arg(long)]
        usecase: String,
        #[arg(long)]
        profile: String,
        /// Skip network probes.
        #[arg(long)]
        no_probe: bool,
    },
    /// Derive a run under another registered profile.
    Retune {
        #[arg(long)]
        run: String,
        #[arg(long)]
        profile: String,
    },
    /// Rank the KGs of a use case.
    Rank {
        #[arg(long)]
        usecase: String,
        #[arg(long)]
        profile: String,
    },
    /// Record a qualitative judgment on a run.
    Judge {
        #[arg(long)]
        run: String,
        #[arg(long)]
        metric: String,
        /// Fraction such as 0.7 or 7/10.
        #[arg(long)]
        value: String,
        #[arg(long, default_value = "")]
        rater: String,
        #[arg(long, default_value = "")]
        rationale: String,
    },
    /// Register an entity from a JSON file.
    Register {
        #[arg(value_enum)]
        kind: Kind,
        #[arg(long)]
        file: PathBuf,
    },
    /// List runs, newest first.
    Runs {
        #[arg(long)]
        kg: Option<String>,
        #[arg(long)]
        usecase: Option<String>,
        #[arg(long)]
        status: Option<String>,
    },
    /// Show one run.
    Show {
        #[arg(long)]
        run: String,
    },
    /// Print the metric catalog.
    Catalog,
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Allowed CORS origin; repeatable.
        #[arg(long, env = "KGQA_CORS_ORIGIN")]
        cors_origin: Vec<String>,
        /// Concurrent run executions.
        #[arg(long, default_value_t = 4)]
        workers: usize,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub class: ErrorClass,
    pub message: String,
}

impl CliError {
    fn new(class: ErrorClass, message: impl Into<String>) -> Self {
        CliError {
            class,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.class.exit_code()
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        CliError::new(classify(&e).0, e.to_string())
    }
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        PipelineError::from(e).into()
    }
}

/// Command output: JSON always, a table when the command has one.
pub struct Rendered {
    pub json: Value,
    pub table: Option<String>,
}

impl Rendered {
    fn json<T: Serialize>(v: &T) -> Self {
        Rendered {
            json: serde_json::to_value(v).expect("output serializes"),
            table: None,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match (format, &self.table) {
            (Format::Table, Some(t)) => t.clone(),
            _ => serde_json::to_string_pretty(&self.json).expect("output serializes"),
        }
    }
}

fn opt_total(t: &Option<Rational>) -> String {
    t.as_ref().map_or_else(|| "-".to_string(), Rational::display_decimal)
}

fn run_table(run: &AssessmentRun) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "run       {}", run.run_id);
    let _ = writeln!(s, "kg        {}", run.kg_id);
    let _ = writeln!(s, "use case  {}", run.use_case_id);
    let _ = writeln!(s, "profile   {}", run.profile_id);
    let _ = writeln!(s, "status    {}", run.status.as_str());
    let _ = writeln!(s, "total     {}", opt_total(&run.total));
    if !run.dimension_scores.is_empty() {
        let _ = writeln!(s, "\n{:<28} {:>14} {:>14}", "dimension", "value", "beta");
        for d in &run.dimension_scores {
            let value = if d.not_applicable { "n/a".to_string() } else { d.value.display_decimal() };
            let _ = writeln!(
                s,
                "{:<28} {:>14} {:>14}",
                kgqa_core::catalog::dimension_name(&d.dimension_id),
                value,
                d.effective_beta.display_decimal()
            );
        }
    }
    for n in &run.notes {
        let _ = writeln!(s, "note: {n}");
    }
    s
}

fn ranking_table(r: &Ranking) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<6} {:<24} {:>14}  run", "rank", "kg", "total");
    for e in &r.entries {
        let rank = if e.tied { format!("{}=", e.rank) } else { e.rank.to_string() };
        let _ = writeln!(s, "{:<6} {:<24} {:>14}  {}", rank, e.kg_id, e.total.display_decimal(), e.run_id);
    }
    if let Some(rec) = &r.recommendation {
        let _ = writeln!(s, "\n{rec}");
    }
    s
}

fn run_output(run: &AssessmentRun) -> Rendered {
    Rendered {
        table: Some(run_table(run)),
        ..Rendered::json(run)
    }
}

fn read_json<E: Entity>(file: &PathBuf) -> Result<E, CliError> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| CliError::new(ErrorClass::Io, format!("{}: {e}", file.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::new(ErrorClass::Validation, format!("{}: {e}", file.display())))
}

fn register_file<E: Entity>(store: &Store, file: &PathBuf) -> Result<Rendered, CliError> {
    let entity: E = read_json(file)?;
    let id = store.register(&entity)?;
    Ok(Rendered::json(&json!({ "kind": E::KIND, "id": id })))
}

fn run_options(cli: &Cli, probe: bool) -> RunOptions {
    RunOptions {
        probe,
        timeout_ms: cli.timeout_ms,
        ..Default::default()
    }
}

/// Execute a parsed command line. `serve` blocks until interrupted.
pub fn run(cli: Cli) -> Result<Rendered, CliError> {
    let store = Store::open(&cli.store)?;
    match &cli.command {
        Command::Ingest { file, kg, lenient, base } => {
            let mut opts = IngestOptions::new(kg.as_str());
            if *lenient {
                opts = opts.lenient();
            }
            if let Some(b) = base {
                opts = opts.with_base(b.as_str());
            }
            let parsed = parse_file(file, &opts).map_err(|e| match e {
                IngestError::Io(_) => CliError::new(ErrorClass::Io, format!("{}: {e}", file.display())),
                _ => CliError::new(ErrorClass::Validation, format!("{}: {e}", file.display())),
            })?;
            let snapshot_ref = store.put_snapshot(&parsed.snapshot)?;
            let registered = if store.contains::<KgRecord>(kg) {
                false
            } else {
                let mut rec = KgRecord::new(kg.as_str(), kg.as_str());
                rec.data_file = Some(snapshot_ref.clone());
                store.register(&rec)?;
                true
            };
            Ok(Rendered::json(&json!({
                "kg_id": kg,
                "snapshot_ref": snapshot_ref,
                "registered": registered,
                "stats": parsed.snapshot.stats(),
                "parse_errors": parsed.errors,
            })))
        }
        Command::Probe { kg } => {
            let rec: KgRecord = store.get(kg)?;
            let mut config = rec
                .endpoint
                .ok_or_else(|| CliError::new(ErrorClass::Validation, format!("kg {kg:?} has no endpoint configuration")))?;
            if let Some(t) = cli.timeout_ms {
                config.timeout_ms = t.max(1);
            }
            Ok(Rendered::json(&probe_all(&config)))
        }
        Command::Assess {
            kg,
            usecase,
            profile,
            no_probe,
        } => {
            let run = pipeline::assess_kg(&store, kg, usecase, profile, run_options(&cli, !no_probe))?;
            Ok(run_output(&run))
        }
        Command::Retune { run, profile } => {
            let target = RetuneTarget::ProfileId {
                profile_id: profile.clone(),
            };
            let derived = pipeline::retune_run(&store, run, target, AggregationOptions::default())?;
            Ok(run_output(&derived))
        }
        Command::Rank { usecase, profile } => {
            let r = pipeline::rank_use_case(&store, usecase, profile)?;
            Ok(Rendered {
                table: Some(ranking_table(&r)),
                ..Rendered::json(&r)
            })
        }
        Command::Judge {
            run,
            metric,
            value,
            rater,
            rationale,
        } => {
            let value: Rational = value
                .parse()
                .map_err(|e| CliError::new(ErrorClass::Validation, format!("value {value:?}: {e}")))?;
            let j = Judgment::new(metric.as_str(), value, rater.as_str(), rationale.as_str());
            let updated = pipeline::record_judgment(&store, run, j, AggregationOptions::default())?;
            Ok(run_output(&updated))
        }
        Command::Register { kind, file } => match kind {
            Kind::Kg => register_file::<KgRecord>(&store, file),
            Kind::Usecase => register_file::<UseCase>(&store, file),
            Kind::Profile => register_file::<WeightProfile>(&store, file),
            Kind::Goldstandard => register_file::<GoldStandard>(&store, file),
            Kind::Schema => register_file::<SchemaSpec>(&store, file),
        },
        Command::Runs { kg, usecase, status } => {
            let status = match status {
                Some(s) => Some(
                    RunStatus::parse(s).ok_or_else(|| CliError::new(ErrorClass::Validation, format!("unknown status {s:?}")))?,
                ),
                None => None,
            };
            let filter = RunFilter {
                kg_id: kg.clone(),
                use_case_id: usecase.clone(),
                profile_id: None,
                status,
            };
            let runs = store.list_runs(&filter)?;
            let mut t = String::new();
            for r in &runs {
                let _ = writeln!(
                    t,
                    "{}  {:<20} {:<20} {:<18} {}",
                    r.run_id,
                    r.kg_id,
                    r.use_case_id,
                    r.status.as_str(),
                    opt_total(&r.total)
                );
            }
            Ok(Rendered {
                table: Some(t),
                ..Rendered::json(&runs)
            })
        }
        Command::Show { run } => Ok(run_output(&store.load_run(run)?)),
        Command::Catalog => Ok(Rendered::json(&catalog_document())),
        Command::Serve {
            addr,
            cors_origin,
            workers,
        } => {
            let state = AppState::new(store, run_options(&cli, true), *workers);
            let config = ApiConfig {
                cors_origins: cors_origin.clone(),
            };
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::new(ErrorClass::Io, e.to_string()))?;
            rt.block_on(api::serve(*addr, state, config))
                .map_err(|e| CliError::new(ErrorClass::Io, e.to_string()))?;
            Ok(Rendered::json(&json!({ "stopped": true })))
        }
    }
}

//! `rusforge`: validate, extract, build, query and serve use case projects.
//!
//! Exit status is 0 on success, 1 when the project has diagnostics (failing
//! steps or untyped entities), 2 for usage, schema and syntax errors, and 3
//! for anything else.

use std::fs;
use std::io::{self, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rusforge_core::document::Failure;
use rusforge_core::extraction::check_glossary;
use rusforge_core::kb::{export_graph, parse_ntriples, serialize_ntriples, GraphOptions};
use rusforge_core::pipeline::{self, PipelineError};
use rusforge_core::project_file::load_project;
use rusforge_core::query::{evaluate, parse_query, Prefixes, ResultTable};
use rusforge_core::Project;
use rusforge_service::ServeOptions;

#[derive(Parser)]
#[command(name = "rusforge", version, about = "Use case specifications as a queryable knowledge base")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every step against the project's templates.
    Validate {
        /// Project file.
        project: PathBuf,
    },
    /// Write the extraction report as JSON.
    Extract {
        project: PathBuf,
        /// Report entities and predicates missing from the glossary on stderr.
        #[arg(long)]
        glossary_check: bool,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the knowledge base as N-Triples.
    Build {
        project: PathBuf,
        /// Type for entities with no assigned or suggested type.
        #[arg(long)]
        default_type: Option<String>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a Graphviz rendering.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Draw statement nodes in the DOT output.
        #[arg(long, requires = "dot")]
        provenance: bool,
    },
    /// Run a SELECT query over an N-Triples file and print CSV.
    Query {
        /// Knowledge base in N-Triples.
        kb: PathBuf,
        /// Query text.
        #[arg(required_unless_present = "file", conflicts_with = "file")]
        query: Option<String>,
        /// Read the query from a file.
        #[arg(long)]
        file: Option<PathBuf>,
        /// Project whose namespace `ns:` names.
        #[arg(long)]
        project: Option<PathBuf>,
        /// Namespace for `ns:` when no project is given.
        #[arg(long, env = "RUSFORGE_NS")]
        ns: Option<String>,
        /// Print a JSON table instead of CSV.
        #[arg(long)]
        json: bool,
    },
    /// Serve the HTTP API and, optionally, a static UI.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Directory holding project files.
        #[arg(long, default_value = "projects")]
        storage: PathBuf,
        /// Directory of static files served for non-API paths.
        #[arg(long)]
        ui: Option<PathBuf>,
    },
}

/// A message for stderr and the exit status that goes with it.
struct Fail {
    status: u8,
    message: String,
}

impl Fail {
    fn diagnostics(message: impl Into<String>) -> Self {
        Fail { status: 1, message: message.into() }
    }

    fn usage(message: impl Into<String>) -> Self {
        Fail { status: 2, message: message.into() }
    }

    fn internal(message: impl Into<String>) -> Self {
        Fail { status: 3, message: message.into() }
    }
}

type Outcome = Result<(), Fail>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Validate { project } => validate(&project),
        Command::Extract {
            project,
            glossary_check,
            out,
        } => extract(&project, glossary_check, out.as_deref()),
        Command::Build {
            project,
            default_type,
            out,
            dot,
            provenance,
        } => build(&project, default_type.as_deref(), out.as_deref(), dot.as_deref(), provenance),
        Command::Query {
            kb,
            query,
            file,
            project,
            ns,
            json,
        } => run_query(&kb, query, file.as_deref(), project.as_deref(), ns, json),
        Command::Serve { port, host, storage, ui } => serve(ServeOptions {
            addr: SocketAddr::new(host, port),
            storage,
            ui_dir: ui,
        }),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(fail) => {
            if !fail.message.is_empty() {
                eprintln!("{}", fail.message);
            }
            ExitCode::from(fail.status)
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Fail> {
    fs::read(path).map_err(|e| Fail::usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Project, Fail> {
    load_project(&read(path)?).map_err(|e| Fail::usage(format!("{}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Outcome {
    let result = match path {
        Some(path) => fs::write(path, bytes).map_err(|e| format!("{}: {e}", path.display())),
        None => io::stdout().lock().write_all(bytes).map_err(|e| e.to_string()),
    };
    result.map_err(Fail::internal)
}

fn pipeline_failure(file: &Path, e: PipelineError) -> Fail {
    match e {
        PipelineError::Unvalidated(report) => {
            let lines: Vec<String> = report.failures().map(|v| step_diagnostic(file, v)).collect();
            Fail::diagnostics(lines.join("\n"))
        }
        PipelineError::Typing(e) if e.code() == "E_UNTYPED" => Fail::diagnostics(format!("{}: {e}", file.display())),
        e => Fail::usage(format!("{}: {e}", file.display())),
    }
}

fn step_diagnostic(file: &Path, verdict: &rusforge_core::document::StepVerdict) -> String {
    let problem = match &verdict.failure {
        Some(Failure::LexError { column, found }) => format!("unexpected {found:?} at column {column}"),
        _ => "no template matches".to_string(),
    };
    format!("{}:{}: {problem}: {:?}", file.display(), verdict.location, verdict.text)
}

fn validate(path: &Path) -> Outcome {
    let project = load(path)?;
    match pipeline::validated(&project) {
        Ok(_) => Ok(()),
        Err(e) => Err(pipeline_failure(path, e)),
    }
}

fn extract(path: &Path, glossary_check: bool, out: Option<&Path>) -> Outcome {
    let project = load(path)?;
    let (project, report) = pipeline::extraction(&project).map_err(|e| pipeline_failure(path, e))?;
    let mut json = serde_json::to_string_pretty(&report.to_json()).map_err(|e| Fail::internal(e.to_string()))?;
    json.push('\n');
    write_output(out, json.as_bytes())?;
    if glossary_check {
        for warning in check_glossary(&report, &project.glossary) {
            eprintln!("{}: {warning}", path.display());
        }
    }
    Ok(())
}

fn build(path: &Path, default_type: Option<&str>, out: Option<&Path>, dot: Option<&Path>, provenance: bool) -> Outcome {
    let project = load(path)?;
    let kb = pipeline::knowledge_base(&project, default_type).map_err(|e| pipeline_failure(path, e))?;
    write_output(out, &serialize_ntriples(&kb))?;
    if let Some(dot) = dot {
        let graph = export_graph(&kb, GraphOptions { include_provenance: provenance });
        write_output(Some(dot), &graph)?;
    }
    Ok(())
}

fn run_query(
    kb_path: &Path,
    text: Option<String>,
    file: Option<&Path>,
    project: Option<&Path>,
    ns: Option<String>,
    json: bool,
) -> Outcome {
    let text = match (text, file) {
        (Some(text), _) => text,
        (None, Some(file)) => String::from_utf8(read(file)?)
            .map_err(|_| Fail::usage(format!("{}: query is not UTF-8", file.display())))?,
        (None, None) => return Err(Fail::usage("no query given")),
    };
    let kb = parse_ntriples(&read(kb_path)?).map_err(|e| Fail::usage(format!("{}: {e}", kb_path.display())))?;
    let namespace = match project {
        Some(p) => Some(load(p)?.namespace),
        None => ns.or_else(|| kb.infer_namespace()),
    };
    let query = parse_query(&text, &Prefixes::new(namespace.as_deref())).map_err(|e| Fail::usage(e.to_string()))?;
    let table = ResultTable::new(&query, &evaluate(&query, &kb));
    let bytes = if json {
        let mut s = serde_json::to_string_pretty(&table).map_err(|e| Fail::internal(e.to_string()))?;
        s.push('\n');
        s.into_bytes()
    } else {
        to_csv(&table).map_err(|e| Fail::internal(e.to_string()))?
    };
    write_output(None, &bytes)
}

fn to_csv(table: &ResultTable) -> Result<Vec<u8>, csv::Error> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(&table.columns)?;
    for row in &table.rows {
        writer.write_record(row)?;
    }
    writer.into_inner().map_err(|e| e.into_error().into())
}

fn serve(options: ServeOptions) -> Outcome {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(io::stderr)
        .init();
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Fail::internal(e.to_string()))?;
    runtime
        .block_on(rusforge_service::serve(options))
        .map_err(|e| Fail::internal(e.to_string()))
}

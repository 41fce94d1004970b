//! `ptc`: batch validation, cohort statistics, network graphs and the local
//! pathway service.

mod inputs;

use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ptc_core::analytics::{
    build_cohort_graph_with, cohort_stats_with, render_dot, render_graph_json, stats_document,
    stats_table_csv,
};
use ptc_core::codec::{deserialize_session, export_csv, export_filename};
use ptc_core::Execution;
use ptc_service::{ServeError, StoreConfig, StoreError, DEFAULT_BIND};

#[derive(Parser)]
#[command(
    name = "ptc",
    version,
    about = "Pathway-to-care timelines: validate, analyze, graph, serve"
)]
struct Cli {
    /// Parse and aggregate on the current thread only.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check CSV exports and session files; exit 1 if any is invalid.
    Validate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Per-node cohort statistics.
    Stats {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Defaults to the --out extension (.csv is csv, anything else doc), else csv.
        #[arg(long, value_enum)]
        format: Option<StatsFormat>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cohort care-network graph.
    Graph {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "dot")]
        format: GraphFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the local HTTP service.
    Serve {
        #[arg(long, env = "PTC_DATA_DIR")]
        data_dir: PathBuf,
        #[arg(long, env = "PTC_BIND", default_value_t = DEFAULT_BIND)]
        bind: SocketAddr,
        #[arg(long, env = "PTC_READ_ONLY")]
        read_only: bool,
        /// Bearer token; required for non-loopback binds.
        #[arg(long, env = "PTC_TOKEN", hide_env_values = true)]
        token: Option<String>,
        /// Directory of browser assets served at `/`.
        #[arg(long, env = "PTC_STATIC_DIR")]
        static_dir: Option<PathBuf>,
    },
    /// Write the two-row CSV export of a session file.
    Export {
        session: PathBuf,
        /// Name the file PTC-{id}.csv instead of PTC-{id}.txt.
        #[arg(long)]
        csv: bool,
        /// Directory to write into.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StatsFormat {
    Csv,
    Doc,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Dot,
    Doc,
}

const DATA_ERROR: u8 = 1;
const USAGE_ERROR: u8 = 2;

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn data(e: impl std::fmt::Display) -> Self {
        Failure {
            code: DATA_ERROR,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let result = match cli.command {
        Command::Validate { paths } => validate(&paths, exec),
        Command::Stats { paths, format, out } => stats(&paths, format, out.as_deref(), exec),
        Command::Graph { paths, format, out } => graph(&paths, format, out.as_deref(), exec),
        Command::Serve {
            data_dir,
            bind,
            read_only,
            token,
            static_dir,
        } => {
            let mut cfg = StoreConfig::new(data_dir).read_only(read_only);
            cfg.bind_address = bind;
            cfg.token = token;
            cfg.static_dir = static_dir;
            serve(cfg)
        }
        Command::Export {
            session,
            csv,
            out_dir,
        } => export(&session, csv, &out_dir),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn validate(paths: &[PathBuf], exec: Execution) -> Result<u8, Failure> {
    let files = inputs::collect_files(paths).map_err(Failure::data)?;
    let reports = inputs::check_files(&files, exec);
    let mut stdout = std::io::stdout().lock();
    let mut bad = 0;
    for r in &reports {
        if r.is_ok() {
            let _ = writeln!(stdout, "{}: ok", r.path.display());
        } else {
            bad += 1;
            let _ = writeln!(stdout, "{}: {}", r.path.display(), r.problems.join(", "));
        }
    }
    if bad == 0 {
        let _ = writeln!(stdout, "{} files", reports.len());
        Ok(0)
    } else {
        let _ = writeln!(stdout, "{} files, {bad} invalid", reports.len());
        Ok(DATA_ERROR)
    }
}

fn stats(
    paths: &[PathBuf],
    format: Option<StatsFormat>,
    out: Option<&Path>,
    exec: Execution,
) -> Result<u8, Failure> {
    let format = format.unwrap_or(match out.and_then(|p| p.extension()) {
        Some(ext) if ext != "csv" => StatsFormat::Doc,
        _ => StatsFormat::Csv,
    });
    let files = inputs::collect_files(paths).map_err(Failure::data)?;
    let cohort = inputs::load_cohort(&files, exec).map_err(Failure::data)?;
    let stats = cohort_stats_with(&cohort, exec).map_err(Failure::data)?;
    let text = match format {
        StatsFormat::Csv => stats_table_csv(&stats),
        StatsFormat::Doc => stats_document(&stats),
    };
    emit(&text, out)
}

fn graph(
    paths: &[PathBuf],
    format: GraphFormat,
    out: Option<&Path>,
    exec: Execution,
) -> Result<u8, Failure> {
    let files = inputs::collect_files(paths).map_err(Failure::data)?;
    let cohort = inputs::load_cohort(&files, exec).map_err(Failure::data)?;
    let g = build_cohort_graph_with(&cohort, exec);
    let text = match format {
        GraphFormat::Dot => render_dot(&g),
        GraphFormat::Doc => render_graph_json(&g),
    };
    emit(&text, out)
}

fn serve(cfg: StoreConfig) -> Result<u8, Failure> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let rt = tokio::runtime::Runtime::new().map_err(Failure::data)?;
    match rt.block_on(ptc_service::serve(cfg)) {
        Ok(()) => Ok(0),
        Err(e @ ServeError::Config(_)) => Err(Failure {
            code: USAGE_ERROR,
            message: e.to_string(),
        }),
        Err(ServeError::Store(e @ StoreError::DataDirMissing(_))) => Err(Failure {
            code: DATA_ERROR,
            message: format!("DataDirMissing: {e}"),
        }),
        Err(e) => Err(Failure::data(e)),
    }
}

fn export(session: &Path, csv_suffix: bool, out_dir: &Path) -> Result<u8, Failure> {
    let text = fs::read_to_string(session)
        .map_err(|e| Failure::data(format!("{}: {e}", session.display())))?;
    let record = deserialize_session(&text)
        .map_err(|e| Failure::data(format!("{}: {e}", session.display())))?;
    let csv = export_csv(&record).map_err(Failure::data)?;
    let target = out_dir.join(export_filename(&record.subject_id, csv_suffix));
    fs::write(&target, csv).map_err(|e| Failure::data(format!("{}: {e}", target.display())))?;
    println!("{}", target.display());
    Ok(0)
}

fn emit(text: &str, out: Option<&Path>) -> Result<u8, Failure> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::data(format!("{}: {e}", path.display())))?
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(Failure::data)?;
        }
    }
    Ok(0)
}

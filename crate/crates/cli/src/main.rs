//! `mbound`: build corpus indexes and compute meaning bounds and bound
//! matrices over an index or a hit-count snapshot.
//!
//! Exit status: 0 on success, 1 when a bound cannot be computed (zero
//! counts, missing snapshot entries), 2 for usage and I/O errors.

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use meaning_bound::corpus::build_index;
use meaning_bound::provider::SnapshotError;
use meaning_bound::{
    bound_report, compute_matrix, BoundReport, CountProvider, Epsilon, InvertedIndex, JointCount,
    MatrixError, QueryExpr, SnapshotTable, TokenPolicy, WithUniverse,
};
use serde_json::json;

/// `--snapshot` value selecting the bundled 2010 web hit counts.
const BUILTIN_SNAPSHOT: &str = "@web2010";

#[derive(Debug, Parser)]
#[command(
    name = "mbound",
    version,
    about = "Document co-occurrence meaning bounds"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    /// Count over a local index file.
    #[arg(long, global = true, value_name = "PATH", conflicts_with = "snapshot")]
    index: Option<PathBuf>,
    /// Count over a snapshot JSON file, or `@web2010` for the bundled one.
    #[arg(long, global = true, value_name = "PATH")]
    snapshot: Option<String>,
    /// Override the universe size n(www).
    #[arg(long, global = true, value_name = "N")]
    universe: Option<u64>,
    /// Half-width of the neutral band around 1.
    #[arg(long, global = true, value_name = "X", default_value_t = meaning_bound::measures::DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Decimals shown in table output.
    #[arg(long, global = true, value_name = "K", default_value_t = 2)]
    precision: usize,
    /// Print `n/a` for matrix cells that cannot be computed instead of failing.
    #[arg(long, global = true)]
    permissive: bool,
    /// Keep letter case when tokenizing.
    #[arg(long, global = true)]
    no_case_fold: bool,
    /// Keep diacritics when tokenizing.
    #[arg(long, global = true)]
    no_diacritic_fold: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Index maintenance.
    Index {
        #[command(subcommand)]
        action: IndexAction,
    },
    /// Meaning bound of B with respect to A. Multi-word queries use `;`, e.g. `flying;air`.
    Bound { a: String, b: String },
    /// Matrix of bounds; cell (row A, column B) is M(A,B).
    Matrix {
        #[arg(required = true)]
        queries: Vec<String>,
    },
}

#[derive(Debug, Subcommand)]
enum IndexAction {
    /// Index a directory of text files or a JSON-lines file.
    Build { corpus: PathBuf, index: PathBuf },
}

#[derive(Debug)]
enum CliError {
    /// Bad arguments, unreadable or unwritable files.
    Usage(String),
    /// Counts do not support the requested bound.
    Compute(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Compute(m) => f.write_str(m),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage(e: impl fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn compute(e: impl fmt::Display) -> CliError {
    CliError::Compute(e.to_string())
}

impl GlobalOpts {
    fn policy(&self) -> TokenPolicy {
        TokenPolicy {
            case_fold: !self.no_case_fold,
            diacritic_fold: !self.no_diacritic_fold,
            ..TokenPolicy::default()
        }
    }

    fn epsilon(&self) -> Result<Epsilon> {
        Epsilon::new(self.epsilon).map_err(usage)
    }
}

enum Backend {
    Local(InvertedIndex),
    Snapshot(SnapshotTable),
}

/// The selected provider plus the policy queries are normalized with.
struct Session {
    provider: WithUniverse<Box<dyn CountProvider>>,
    policy: TokenPolicy,
}

fn open_session(opts: &GlobalOpts) -> Result<Session> {
    let backend = match (&opts.index, &opts.snapshot) {
        (Some(path), None) => Backend::Local(InvertedIndex::load(path).map_err(usage)?),
        (None, Some(s)) if s == BUILTIN_SNAPSHOT => Backend::Snapshot(SnapshotTable::web_2010()),
        (None, Some(s)) => {
            Backend::Snapshot(SnapshotTable::load(s).map_err(|e: SnapshotError| usage(e))?)
        }
        _ => {
            return Err(usage(
                "select exactly one provider with --index PATH or --snapshot PATH",
            ))
        }
    };
    let (inner, policy): (Box<dyn CountProvider>, TokenPolicy) = match backend {
        Backend::Local(idx) => {
            let policy = *idx.policy();
            if policy != opts.policy() && (opts.no_case_fold || opts.no_diacritic_fold) {
                eprintln!("warning: policy flags are ignored with --index; queries use the policy stored in the index");
            }
            (Box::new(idx), policy)
        }
        Backend::Snapshot(s) => (Box::new(s), opts.policy()),
    };
    let universe = match opts.universe {
        Some(0) => return Err(usage("--universe must be at least 1")),
        Some(n) => n,
        None => inner.descriptor().universe,
    };
    Ok(Session {
        provider: WithUniverse { inner, universe },
        policy,
    })
}

fn parse_query(label: &str, policy: &TokenPolicy) -> Result<QueryExpr> {
    QueryExpr::parse_label(label, policy).map_err(|e| usage(format!("query {label:?}: {e}")))
}

fn cmd_index_build(opts: &GlobalOpts, corpus: &Path, out: &Path) -> Result<()> {
    if !corpus.exists() {
        return Err(usage(format!(
            "corpus path {} does not exist",
            corpus.display()
        )));
    }
    let index = build_index(corpus, opts.policy()).map_err(usage)?;
    if index.total_docs().get() == 0 {
        eprintln!("warning: corpus {} contains no documents", corpus.display());
    }
    index.save(out).map_err(usage)?;
    println!(
        "indexed {} documents, {} distinct terms -> {}",
        index.total_docs(),
        index.term_count(),
        out.display()
    );
    Ok(())
}

fn report_json(r: &BoundReport) -> serde_json::Value {
    let mut v = json!({
        "a": r.a,
        "b": r.b,
        "n_a": r.n_a,
        "n_b": r.n_b,
        "n_ab_raw": r.joint.raw,
        "n_ab": match r.joint.resolved {
            JointCount::Exact(c) => json!(c),
            JointCount::Estimated(v) => json!(v),
        },
        "universe": r.universe,
        "relative_weight": r.relative_weight.value(),
        "absolute_weight": r.absolute_weight.value(),
        "bound": r.bound.value,
        "class": r.bound.class.label(),
    });
    if let Some(c) = &r.joint.correction {
        v["correction"] = json!({
            "n_a_not_b_raw": c.n_a_not_b_raw,
            "factor": c.factor,
            "consistent": c.consistent,
        });
    }
    v
}

fn render_bound(r: &BoundReport, format: Format) -> Result<String> {
    Ok(match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report_json(r)).map_err(usage)?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let v = report_json(r);
            let fields = [
                "a",
                "b",
                "n_a",
                "n_b",
                "n_ab_raw",
                "n_ab",
                "universe",
                "relative_weight",
                "absolute_weight",
                "bound",
                "class",
            ];
            let cells: Vec<String> = fields
                .iter()
                .map(|f| match &v[*f] {
                    serde_json::Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect();
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(fields).map_err(usage)?;
            w.write_record(&cells).map_err(usage)?;
            String::from_utf8(w.into_inner().map_err(usage)?).map_err(usage)?
        }
        Format::Table => {
            let mut lines = vec![
                format!("A         {}", r.a),
                format!("B         {}", r.b),
                format!("n(A)      {}", r.n_a),
                format!("n(B)      {}", r.n_b),
            ];
            if r.joint.differs_from_raw() {
                lines.push(format!(
                    "n(A,B)    {} (raw {})",
                    r.joint.value(),
                    r.joint.raw
                ));
            } else {
                lines.push(format!("n(A,B)    {}", r.joint.raw));
            }
            if let Some(c) = &r.joint.correction {
                lines.push(format!(
                    "n(A,¬B)   {} (correction factor {}{})",
                    c.n_a_not_b_raw,
                    c.factor,
                    if c.consistent { ", consistent" } else { "" }
                ));
            }
            lines.push(format!("n(www)    {}", r.universe));
            lines.push(format!("w(A,B)    {}", r.relative_weight.value()));
            lines.push(format!("w(www,B)  {}", r.absolute_weight.value()));
            lines.push(format!("M(A,B)    {} ({})", r.bound.value, r.bound.class));
            lines.join("\n") + "\n"
        }
    })
}

fn cmd_bound(opts: &GlobalOpts, a: &str, b: &str) -> Result<()> {
    let session = open_session(opts)?;
    let qa = parse_query(a, &session.policy)?;
    let qb = parse_query(b, &session.policy)?;
    let report = bound_report(&session.provider, &qa, &qb, opts.epsilon()?).map_err(compute)?;
    print!("{}", render_bound(&report, opts.format)?);
    Ok(())
}

fn cmd_matrix(opts: &GlobalOpts, labels: &[String]) -> Result<()> {
    let session = open_session(opts)?;
    let queries = labels
        .iter()
        .map(|l| parse_query(l, &session.policy))
        .collect::<Result<Vec<_>>>()?;
    let matrix = compute_matrix(
        &session.provider,
        &queries,
        opts.epsilon()?,
        opts.permissive,
    )
    .map_err(|e| match e {
        MatrixError::Cell { .. } => compute(e),
        other => usage(other),
    })?;
    match opts.format {
        Format::Table => print!("{}", matrix.to_table(opts.precision)),
        Format::Csv => print!("{}", matrix.to_csv().map_err(usage)?),
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&matrix.to_json()).map_err(usage)?
        ),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Index {
            action: IndexAction::Build { corpus, index },
        } => cmd_index_build(&cli.global, corpus, index),
        Command::Bound { a, b } => cmd_bound(&cli.global, a, b),
        Command::Matrix { queries } => cmd_matrix(&cli.global, queries),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

//! `bigboard`: run the server, drive scenarios at it, inspect snapshots and
//! issue any board command from a shell.
//!
//! Every failure prints one line, `error: <class>: <message>`, and exits
//! with 2 (usage), 3 (connection), 4 (server refused) or 1 (anything local).

pub mod remote;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use bigboard_core::alert::{AlertCategory, AlertSubject};
use bigboard_core::command::{ClientIdentity, Command, CommandBody};
use bigboard_core::query::QueryExpr;
use bigboard_core::render::{render_svg, render_text, SvgOptions};
use bigboard_core::sim::scenario::{FnSink, NdjsonSink};
use bigboard_core::sim::{generate_fixture, make_boston_fixture, run, CategoryRates, ScenarioConfig, BIG_ENTERPRISE_ASSETS};
use bigboard_core::state::BoardState;
use bigboard_core::topology::load_topology;
use clap::{Args, Parser, Subcommand, ValueEnum};

use remote::Remote;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Connection(String),
    /// The server answered and said no: a rejection or an auth failure.
    Refused { class: String, message: String },
    Local { class: &'static str, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Connection(_) => 3,
            Self::Refused { .. } => 4,
            Self::Local { .. } => 1,
        }
    }

    fn local(class: &'static str, e: impl std::fmt::Display) -> Self {
        Self::Local { class, message: e.to_string() }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (class, msg) = match self {
            Self::Usage(m) => ("usage", m.as_str()),
            Self::Connection(m) => ("connection", m.as_str()),
            Self::Refused { class, message } => (class.as_str(), message.as_str()),
            Self::Local { class, message } => (*class, message.as_str()),
        };
        // keep it on one line whatever the source error looked like
        write!(f, "error: {class}: {}", msg.split_whitespace().collect::<Vec<_>>().join(" "))
    }
}

#[derive(Debug, Parser)]
#[command(name = "bigboard", version, about = "Big Board operator and developer client")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Args, Clone)]
pub struct Conn {
    /// Server HTTP address.
    #[arg(long, env = "BIGBOARD_ADDR")]
    pub connect: Option<String>,
    #[arg(long, env = "BIGBOARD_TOKEN", hide_env_values = true)]
    pub token: Option<String>,
}

#[derive(Debug, Args, Clone)]
pub struct Issue {
    #[command(flatten)]
    pub conn: Conn,
    /// Idempotency key; a fresh uuid when omitted.
    #[arg(long)]
    pub command_id: Option<String>,
    /// Client id sent with member commands. Manager tokens act as the
    /// server's configured manager regardless.
    #[arg(long, env = "BIGBOARD_CLIENT", default_value = "cli")]
    pub client_id: String,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Run the authoritative server. Without --config, settings come from
    /// BIGBOARD_* variables and defaults.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Generate a seeded command stream into a file or at a server.
    Simulate(SimulateArgs),
    /// Submit a command log (simulator output or a journal) to a server.
    Replay {
        log: PathBuf,
        #[command(flatten)]
        conn: Conn,
    },
    /// Check out the board and render it.
    Snapshot {
        #[command(flatten)]
        conn: Conn,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Menu scroll tick for the svg export.
        #[arg(long, default_value_t = 0)]
        tick: u64,
    },
    #[command(subcommand)]
    Alert(AlertCmd),
    #[command(subcommand)]
    Flow(FlowCmd),
    #[command(subcommand)]
    Mission(MissionCmd),
    #[command(subcommand)]
    Query(QueryCmd),
    /// Parse and check a topology document.
    ValidateTopology { path: PathBuf },
    /// Write the generated fixture topology, or with --boston the Boston
    /// reference command log.
    Fixture {
        #[arg(long, default_value_t = BIG_ENTERPRISE_ASSETS)]
        assets: usize,
        #[arg(long)]
        boston: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub seed: u64,
    /// Simulated seconds.
    #[arg(long, default_value_t = 3600)]
    pub duration: u64,
    #[arg(long, default_value_t = BIG_ENTERPRISE_ASSETS)]
    pub assets: usize,
    /// Events per simulated minute, per category.
    #[arg(long, default_value_t = 2.0)]
    pub health_rate: f64,
    #[arg(long, default_value_t = 1.0)]
    pub security_rate: f64,
    #[arg(long, default_value_t = 1.0)]
    pub performance_rate: f64,
    /// Command log path, `-` for stdout. Takes precedence over --connect.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub conn: Conn,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Text,
    Svg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Category {
    Health,
    Security,
    Performance,
}

impl From<Category> for AlertCategory {
    fn from(c: Category) -> Self {
        match c {
            Category::Health => AlertCategory::Health,
            Category::Security => AlertCategory::Security,
            Category::Performance => AlertCategory::Performance,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum AlertCmd {
    Raise {
        alert_id: String,
        #[arg(long, value_enum)]
        category: Category,
        #[arg(long, group = "subject")]
        asset: Option<String>,
        #[arg(long, group = "subject")]
        sub_zone: Option<String>,
        #[arg(long, group = "subject")]
        pipe: Option<String>,
        #[arg(long, default_value = "")]
        summary: String,
        #[command(flatten)]
        issue: Issue,
    },
    Task {
        alert_id: String,
        #[arg(long)]
        ticket: String,
        #[arg(long)]
        assignee: String,
        #[command(flatten)]
        issue: Issue,
    },
    Resolve {
        alert_id: String,
        #[command(flatten)]
        issue: Issue,
    },
    /// Append a note to the alert's ticket.
    Note {
        alert_id: String,
        text: String,
        #[command(flatten)]
        issue: Issue,
    },
}

#[derive(Debug, Subcommand)]
pub enum FlowCmd {
    /// Report measured bandwidth between two sub-zones.
    Report {
        endpoint_a: String,
        endpoint_b: String,
        #[arg(long)]
        available: f64,
        #[arg(long)]
        current: f64,
        #[command(flatten)]
        issue: Issue,
    },
}

#[derive(Debug, Subcommand)]
pub enum MissionCmd {
    Activate {
        mission_id: String,
        #[command(flatten)]
        issue: Issue,
    },
    Deactivate {
        mission_id: String,
        #[command(flatten)]
        issue: Issue,
    },
}

#[derive(Debug, Subcommand)]
pub enum QueryCmd {
    Save {
        query_id: String,
        expression: String,
        #[arg(long)]
        color: String,
        #[arg(long, default_value = "")]
        label: String,
        #[command(flatten)]
        issue: Issue,
    },
    On {
        query_id: String,
        #[command(flatten)]
        issue: Issue,
    },
    Off {
        query_id: String,
        #[command(flatten)]
        issue: Issue,
    },
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

/// The board command a command-issuing subcommand stands for, or `None`
/// for the other subcommands.
pub fn board_command(cmd: &Cmd) -> Result<Option<(CommandBody, &Issue)>, CliError> {
    let out = match cmd {
        Cmd::Alert(AlertCmd::Raise { alert_id, category, asset, sub_zone, pipe, summary, issue }) => {
            let subject = match (asset, sub_zone, pipe) {
                (Some(a), _, _) => AlertSubject::Asset(a.as_str().into()),
                (_, Some(s), _) => AlertSubject::SubZone(s.as_str().into()),
                (_, _, Some(p)) => AlertSubject::Pipe(p.as_str().into()),
                _ => return Err(CliError::Usage("alert raise needs --asset, --sub-zone or --pipe".into())),
            };
            let body = CommandBody::RaiseAlert {
                alert_id: alert_id.as_str().into(),
                category: (*category).into(),
                subject,
                summary: summary.clone(),
            };
            (body, issue)
        }
        Cmd::Alert(AlertCmd::Task { alert_id, ticket, assignee, issue }) => (
            CommandBody::TaskAlert {
                alert_id: alert_id.as_str().into(),
                ticket_id: ticket.as_str().into(),
                assignee: assignee.clone(),
            },
            issue,
        ),
        Cmd::Alert(AlertCmd::Resolve { alert_id, issue }) => {
            (CommandBody::ResolveAlert { alert_id: alert_id.as_str().into() }, issue)
        }
        Cmd::Alert(AlertCmd::Note { alert_id, text, issue }) => (
            CommandBody::AddTicketNote { alert_id: alert_id.as_str().into(), text: text.clone() },
            issue,
        ),
        Cmd::Flow(FlowCmd::Report { endpoint_a, endpoint_b, available, current, issue }) => (
            CommandBody::ReportFlow {
                endpoint_a: endpoint_a.as_str().into(),
                endpoint_b: endpoint_b.as_str().into(),
                available_fraction: *available,
                current_fraction: *current,
            },
            issue,
        ),
        Cmd::Mission(MissionCmd::Activate { mission_id, issue }) => {
            (CommandBody::ActivateMission { mission_id: mission_id.as_str().into() }, issue)
        }
        Cmd::Mission(MissionCmd::Deactivate { mission_id, issue }) => {
            (CommandBody::DeactivateMission { mission_id: mission_id.as_str().into() }, issue)
        }
        Cmd::Query(QueryCmd::Save { query_id, expression, color, label, issue }) => {
            let expression: QueryExpr = expression
                .parse()
                .map_err(|e| CliError::Usage(format!("query expression: {e}")))?;
            let body = CommandBody::SaveQuery {
                query_id: query_id.as_str().into(),
                label: label.clone(),
                expression,
                color: color.clone(),
            };
            (body, issue)
        }
        Cmd::Query(QueryCmd::On { query_id, issue }) => {
            (CommandBody::ActivateQuery { query_id: query_id.as_str().into() }, issue)
        }
        Cmd::Query(QueryCmd::Off { query_id, issue }) => {
            (CommandBody::DeactivateQuery { query_id: query_id.as_str().into() }, issue)
        }
        _ => return Ok(None),
    };
    Ok(Some(out))
}

/// Parses `argv` and runs it, writing normal output to `out`.
pub fn dispatch<I, T>(argv: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            write!(out, "{e}").map_err(|e| CliError::local("io", e))?;
            return Ok(());
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            return Err(CliError::Usage(first.to_string()));
        }
    };
    execute(&cli.command, out)
}

fn print(out: &mut dyn Write, line: impl std::fmt::Display) -> Result<(), CliError> {
    writeln!(out, "{line}").map_err(|e| CliError::local("io", e))
}

fn execute(cmd: &Cmd, out: &mut dyn Write) -> Result<(), CliError> {
    if let Some((body, issue)) = board_command(cmd)? {
        let remote = Remote::new(&issue.conn)?;
        let id = issue.command_id.clone().unwrap_or_else(|| uuid::Uuid::new_v4().to_string());
        let command = Command::new(id, ClientIdentity::member(issue.client_id.as_str()), now_ms(), body);
        let delta = remote.submit(&command)?;
        return print(out, format_args!("accepted seq {} digest {}", delta.seq, delta.digest));
    }
    match cmd {
        Cmd::Serve { config } => serve(config.as_deref(), out),
        Cmd::Simulate(args) => simulate(args, out),
        Cmd::Replay { log, conn } => replay(log, conn, out),
        Cmd::Snapshot { conn, format, tick } => {
            let remote = Remote::new(conn)?;
            let topology = Arc::new(load_topology(&remote.topology()?).map_err(|e| CliError::local("topology", e))?);
            let snap = remote.snapshot()?;
            let state = BoardState::from_snapshot(topology, &snap.state).map_err(|e| CliError::local("snapshot", e))?;
            if state.digest() != snap.digest {
                return Err(CliError::local("snapshot", "digest mismatch after checkout"));
            }
            let text = match format {
                Format::Text => render_text(&state, snap.seq),
                Format::Svg => {
                    let health = remote.health()?;
                    render_svg(&state, SvgOptions { tick: *tick, window_size: health.window_size, now_ms: Some(now_ms()) })
                }
            };
            out.write_all(text.as_bytes()).map_err(|e| CliError::local("io", e))
        }
        Cmd::ValidateTopology { path } => {
            let text = read(path)?;
            let t = load_topology(&text).map_err(|e| CliError::local("topology", e))?;
            print(
                out,
                format_args!(
                    "ok {:?} zones {} sub_zones {} assets {} missions {} digest {}",
                    t.network_name(),
                    t.zones().len(),
                    t.sub_zones().count(),
                    t.asset_count(),
                    t.missions().len(),
                    t.digest()
                ),
            )
        }
        Cmd::Fixture { assets, boston, out: path } => {
            let doc = if *boston {
                make_boston_fixture().iter().map(|c| c.to_line() + "\n").collect()
            } else {
                generate_fixture(*assets).map_err(|e| CliError::local("fixture", e))?.to_document_string() + "\n"
            };
            match path {
                Some(p) => std::fs::write(p, doc).map_err(|e| CliError::local("io", e)),
                None => out.write_all(doc.as_bytes()).map_err(|e| CliError::local("io", e)),
            }
        }
        Cmd::Alert(_) | Cmd::Flow(_) | Cmd::Mission(_) | Cmd::Query(_) => unreachable!("handled above"),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::local("io", format!("{}: {e}", path.display())))
}

fn serve(config: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let config = bigboard_server::ServerConfig::load(config).map_err(|e| CliError::local("config", e))?;
    let _ = tracing_subscriber::fmt().with_writer(std::io::stderr).try_init();
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::local("io", e))?;
    rt.block_on(async {
        let server = bigboard_server::start(&config).await.map_err(|e| CliError::local("server", e))?;
        print(out, format_args!("serving http {}", server.http_addr))?;
        if let Some(addr) = server.stream_addr {
            print(out, format_args!("serving stream {addr}"))?;
        }
        out.flush().map_err(|e| CliError::local("io", e))?;
        server.until_ctrl_c().await;
        Ok(())
    })
}

#[derive(Default)]
struct Tally {
    sent: u64,
    rejected: u64,
}

fn submit_tallied(remote: &Remote, cmd: &Command, tally: &mut Tally) -> Result<(), CliError> {
    tally.sent += 1;
    match remote.submit(cmd) {
        Ok(_) => Ok(()),
        Err(CliError::Refused { class, .. }) if class == "authorization" || class == "validation" => {
            tally.rejected += 1;
            Ok(())
        }
        Err(e) => Err(e),
    }
}

fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = ScenarioConfig {
        seed: args.seed,
        duration: args.duration,
        asset_count: args.assets,
        rates: CategoryRates {
            health: args.health_rate,
            security: args.security_rate,
            performance: args.performance_rate,
        },
        ..Default::default()
    };
    let sim_err = |e: bigboard_core::sim::ScenarioError| CliError::local("simulate", e);
    match &args.out {
        Some(path) if path.as_os_str() == "-" => {
            let mut sink = NdjsonSink(std::io::BufWriter::new(&mut *out));
            run(&cfg, &mut sink).map_err(sim_err)?;
            sink.0.flush().map_err(|e| CliError::local("io", e))
        }
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| CliError::local("io", e))?;
            let mut sink = NdjsonSink(std::io::BufWriter::new(file));
            let summary = run(&cfg, &mut sink).map_err(sim_err)?;
            sink.0.flush().map_err(|e| CliError::local("io", e))?;
            print(out, format_args!("wrote {} commands to {}", summary.total(), path.display()))
        }
        None => {
            let remote = Remote::new(&args.conn)?;
            let mut tally = Tally::default();
            let mut failure = None;
            let mut sink = FnSink(|cmd: Command| match submit_tallied(&remote, &cmd, &mut tally) {
                Ok(()) => Ok(()),
                Err(e) => {
                    let msg = e.to_string();
                    failure = Some(e);
                    Err(msg)
                }
            });
            let result = run(&cfg, &mut sink);
            if let Some(e) = failure {
                return Err(e);
            }
            result.map_err(sim_err)?;
            print(out, format_args!("sent {} rejected {}", tally.sent, tally.rejected))
        }
    }
}

fn replay(log: &Path, conn: &Conn, out: &mut dyn Write) -> Result<(), CliError> {
    let text = read(log)?;
    let remote = Remote::new(conn)?;
    let mut tally = Tally::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        // journal records carry extra keys next to the command's; they are ignored
        let cmd: Command = serde_json::from_str(line)
            .map_err(|e| CliError::local("decode", format!("{}:{}: {e}", log.display(), i + 1)))?;
        submit_tallied(&remote, &cmd, &mut tally)?;
    }
    print(out, format_args!("sent {} rejected {}", tally.sent, tally.rejected))
}

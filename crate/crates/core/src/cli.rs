//! Command-line front end: `run` one session, replay a corpus `suite`, or
//! `fetch` an issue into the local report format.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::agent::{run_session, seconds, ConfigFile, ReproductionResult, SessionConfig, Verdict};
use crate::device::{load_sim, Device, RemoteDevice, SimDevice};
use crate::llm::{ChatClient, HttpChatClient, HttpConfig, ScriptedClient};
use crate::report::{load_report, IssueFetcher, DEFAULT_API_BASE};

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "repro", version, about = "Reproduce app bug reports with a chat model in the loop")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one reproduction session.
    Run(RunArgs),
    /// Run every report/app/script triple in a corpus directory.
    Suite(SuiteArgs),
    /// Download an issue with its comments into a local report file.
    Fetch(FetchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SessionArgs {
    /// TOML file with session parameters; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "SECONDS")]
    pub time_limit_s: Option<f64>,
    #[arg(long)]
    pub token_limit: Option<u64>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub max_summarizations: Option<u32>,
    #[arg(long)]
    pub settle_ms: Option<u64>,
    /// Do not offer swipe and rotate to the model.
    #[arg(long)]
    pub no_extended_actions: bool,
    /// Model name for http clients.
    #[arg(long, default_value = "gpt-4")]
    pub model: String,
    #[arg(long, default_value_t = 0.0)]
    pub temperature: f64,
}

impl SessionArgs {
    fn session_config(&self) -> anyhow::Result<SessionConfig> {
        let mut config = SessionConfig::default();
        if let Some(path) = &self.config {
            ConfigFile::load(path)?.apply(&mut config)?;
        }
        if let Some(s) = self.time_limit_s {
            config.time_limit = seconds(s)?;
        }
        if let Some(v) = self.token_limit {
            config.token_limit = v;
        }
        if let Some(v) = self.threshold {
            config.threshold = v;
        }
        if let Some(v) = self.max_summarizations {
            config.max_summarizations = v;
        }
        if let Some(v) = self.settle_ms {
            config.settle_ms = v;
        }
        if self.no_extended_actions {
            config.extended_actions = false;
        }
        config.validate()?;
        Ok(config)
    }

    fn client(&self, spec: &str) -> anyhow::Result<Box<dyn ChatClient + Send>> {
        if let Some(path) = spec.strip_prefix("scripted:") {
            Ok(Box::new(ScriptedClient::from_path(Path::new(path))?))
        } else if spec.starts_with("http:") || spec.starts_with("https:") {
            let endpoint = spec.strip_prefix("http:").filter(|e| e.starts_with("http")).unwrap_or(spec);
            let mut config = HttpConfig::new(endpoint).with_env_key();
            config.model = self.model.clone();
            config.temperature = self.temperature;
            Ok(Box::new(HttpChatClient::new(config)?))
        } else {
            bail!("--llm must be scripted:<path> or http:<endpoint>, got '{spec}'")
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub report: PathBuf,
    /// Simulated app spec (JSON).
    #[arg(long, required_unless_present = "device", conflicts_with = "device")]
    pub app: Option<PathBuf>,
    /// Remote device backend as host:port.
    #[arg(long)]
    pub device: Option<String>,
    /// scripted:<path> or http:<endpoint>
    #[arg(long)]
    pub llm: String,
    /// JSONL trace destination.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    #[command(flatten)]
    pub session: SessionArgs,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    /// Directory with reports/, apps/ and scripts/ subdirectories.
    #[arg(long)]
    pub dir: PathBuf,
    /// Use this client for every report instead of scripts/<name>.json.
    #[arg(long)]
    pub llm: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// JSON summary destination.
    #[arg(long)]
    pub summary_out: Option<PathBuf>,
    /// Directory for per-report JSONL traces.
    #[arg(long)]
    pub trace_dir: Option<PathBuf>,
    #[command(flatten)]
    pub session: SessionArgs,
}

#[derive(Debug, Args)]
pub struct FetchArgs {
    /// owner/repo
    #[arg(long)]
    pub repo: String,
    #[arg(long)]
    pub issue: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = DEFAULT_API_BASE)]
    pub api_base: String,
    /// Environment variable holding an access token.
    #[arg(long, default_value = "GITHUB_TOKEN")]
    pub token_env: String,
}

/// Per-report row of the suite summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub name: String,
    pub verdict: Verdict,
    pub iterations: usize,
    pub seconds: f64,
    /// Success declared although the simulator never triggered the bug.
    pub false_positive: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub reports: Vec<SuiteEntry>,
    pub success_rate: f64,
    /// Mean wall time over successful sessions; absent when none succeeded.
    pub mean_success_seconds: Option<f64>,
    pub wall_seconds: f64,
}

impl SuiteSummary {
    fn new(reports: Vec<SuiteEntry>, wall_seconds: f64) -> Self {
        let successes: Vec<f64> = reports.iter().filter(|r| r.verdict == Verdict::Success).map(|r| r.seconds).collect();
        let success_rate = if reports.is_empty() { 0.0 } else { successes.len() as f64 / reports.len() as f64 };
        let mean_success_seconds =
            (!successes.is_empty()).then(|| successes.iter().sum::<f64>() / successes.len() as f64);
        Self { reports, success_rate, mean_success_seconds, wall_seconds }
    }

    pub fn table(&self) -> String {
        let width = self.reports.iter().map(|r| r.name.len()).max().unwrap_or(6).max(6);
        let mut out = format!("{:<width$}  {:<13}  {:>10}  {:>9}\n", "report", "verdict", "iterations", "seconds");
        for r in &self.reports {
            out.push_str(&format!(
                "{:<width$}  {:<13}  {:>10}  {:>9.3}{}\n",
                r.name,
                r.verdict.as_str(),
                r.iterations,
                r.seconds,
                if r.false_positive { "  FALSE POSITIVE" } else { "" }
            ));
        }
        let successes = self.reports.iter().filter(|r| r.verdict == Verdict::Success).count();
        out.push_str(&format!(
            "success rate: {}/{} ({:.2}%)\n",
            successes,
            self.reports.len(),
            self.success_rate * 100.0
        ));
        match self.mean_success_seconds {
            Some(m) => out.push_str(&format!("mean time over successes: {m:.3} s\n")),
            None => out.push_str("mean time over successes: n/a\n"),
        }
        out
    }
}

/// Parses `args` and runs the command; returns the process exit status.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Suite(args) => cmd_suite(args),
        Command::Fetch(args) => cmd_fetch(args),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        EXIT_USAGE
    })
}

fn cmd_run(args: RunArgs) -> anyhow::Result<i32> {
    let config = args.session.session_config()?;
    let mut report = load_report(&args.report)?;
    let mut llm = args.session.client(&args.llm)?;
    let mut config = config;
    config.trace_path = args.trace_out.clone();

    let result: ReproductionResult;
    let mut triggered = None;
    if let Some(app) = &args.app {
        let mut device = load_sim(app).with_context(|| format!("loading {}", app.display()))?;
        if report.app_name.is_empty() {
            report.app_name = device.app_name().to_owned();
        }
        result = run_session(&report, &mut device, &mut llm, &config);
        triggered = Some(device.bug_triggered().bug_triggered);
    } else {
        let addr = args.device.as_deref().expect("clap enforces --app or --device");
        let mut device = RemoteDevice::connect(addr).with_context(|| format!("connecting to {addr}"))?;
        result = run_session(&report, &mut device, &mut llm, &config);
    }

    println!("verdict: {}", result.verdict);
    println!("iterations: {}", result.iterations);
    println!("wall time: {:.3} s", result.wall_time_seconds);
    if result.summarizations > 0 {
        println!("summarizations: {}", result.summarizations);
    }
    if let Some(t) = triggered {
        println!("bug triggered in simulator: {}", if t { "yes" } else { "no" });
    }
    if let Some(path) = &result.trace_path {
        println!("trace: {}", path.display());
    }
    if let Some(err) = &result.error {
        eprintln!("session error: {err}");
    }
    Ok(if result.verdict == Verdict::Success { EXIT_SUCCESS } else { EXIT_FAIL })
}

/// Report stems under `<dir>/reports/*.txt`, sorted.
pub fn corpus_names(dir: &Path) -> anyhow::Result<Vec<String>> {
    let reports = dir.join("reports");
    let mut names = Vec::new();
    for entry in std::fs::read_dir(&reports).with_context(|| format!("reading {}", reports.display()))? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "txt") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                names.push(stem.to_owned());
            }
        }
    }
    names.sort();
    Ok(names)
}

fn run_one(dir: &Path, name: &str, args: &SuiteArgs, config: &SessionConfig) -> SuiteEntry {
    let started = Instant::now();
    let attempt = || -> anyhow::Result<(ReproductionResult, bool)> {
        let mut report = load_report(&dir.join("reports").join(format!("{name}.txt")))?;
        let mut device: SimDevice = load_sim(&dir.join("apps").join(format!("{name}.json")))?;
        if report.app_name.is_empty() {
            report.app_name = device.app_name().to_owned();
        }
        let spec = match &args.llm {
            Some(s) => s.clone(),
            None => format!("scripted:{}", dir.join("scripts").join(format!("{name}.json")).display()),
        };
        let mut llm = args.session.client(&spec)?;
        let mut config = config.clone();
        config.trace_path = args.trace_dir.as_ref().map(|d| d.join(format!("{name}.jsonl")));
        let result = run_session(&report, &mut device as &mut dyn Device, &mut llm, &config);
        Ok((result, device.bug_triggered().bug_triggered))
    };
    match attempt() {
        Ok((r, triggered)) => SuiteEntry {
            name: name.to_owned(),
            verdict: r.verdict,
            iterations: r.iterations,
            seconds: r.wall_time_seconds,
            false_positive: r.verdict == Verdict::Success && !triggered,
            error: r.error,
        },
        Err(e) => SuiteEntry {
            name: name.to_owned(),
            verdict: Verdict::FailError,
            iterations: 0,
            seconds: started.elapsed().as_secs_f64(),
            false_positive: false,
            error: Some(format!("{e:#}")),
        },
    }
}

/// Runs every corpus triple; per-report problems become `fail-error` rows.
pub fn run_suite(args: &SuiteArgs) -> anyhow::Result<SuiteSummary> {
    let config = args.session.session_config()?;
    let names = corpus_names(&args.dir)?;
    if let Some(d) = &args.trace_dir {
        std::fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
    }
    let started = Instant::now();
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<SuiteEntry>>> = Mutex::new(vec![None; names.len()]);
    std::thread::scope(|scope| {
        for _ in 0..args.workers.clamp(1, names.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(name) = names.get(i) else { break };
                let entry = run_one(&args.dir, name, args, &config);
                slots.lock().expect("no worker panics while holding the lock")[i] = Some(entry);
            });
        }
    });
    let reports = slots.into_inner().expect("workers joined").into_iter().flatten().collect();
    Ok(SuiteSummary::new(reports, started.elapsed().as_secs_f64()))
}

fn cmd_suite(args: SuiteArgs) -> anyhow::Result<i32> {
    let summary = run_suite(&args)?;
    print!("{}", summary.table());
    if let Some(path) = &args.summary_out {
        std::fs::write(path, serde_json::to_string_pretty(&summary)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(EXIT_SUCCESS)
}

fn cmd_fetch(args: FetchArgs) -> anyhow::Result<i32> {
    let Some((owner, repo)) = args.repo.split_once('/') else {
        bail!("--repo must look like owner/repo, got '{}'", args.repo)
    };
    let token = std::env::var(&args.token_env).ok().filter(|t| !t.is_empty());
    let report = IssueFetcher::new(args.api_base.clone(), token)?
        .fetch(owner, repo, args.issue)
        .map_err(|e| anyhow::anyhow!("fetching {}#{}: {e}", args.repo, args.issue))?;
    std::fs::write(&args.out, report.to_file_format()).with_context(|| format!("writing {}", args.out.display()))?;
    println!("wrote {} ({} comments)", args.out.display(), report.comments.len());
    Ok(EXIT_SUCCESS)
}

mod common;

use std::path::Path;
use std::process::{Command, Output};
use std::thread;
use std::time::Instant;

use common::corpus_dir;
use repro_core::cli::SuiteSummary;
use repro_core::report::load_report;
use tiny_http::{Response, Server};

fn repro(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_repro")).args(args).output().unwrap()
}

fn corpus(rel: &str) -> String {
    corpus_dir().join(rel).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn run_case(name: &str, llm: &str, extra: &[&str]) -> Output {
    let report = corpus(&format!("reports/{name}.txt"));
    let app = corpus(&format!("apps/{name}.json"));
    let mut args = vec!["run", "--report", &report, "--app", &app, "--llm", llm];
    args.extend_from_slice(extra);
    repro(&args)
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn successful_run_exits_zero_and_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.jsonl").display().to_string();
    let llm = format!("scripted:{}", corpus("scripts/multiselect.json"));
    let out = run_case("multiselect", &llm, &["--trace-out", &trace]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("verdict: success"), "{text}");
    assert!(text.contains("bug triggered in simulator: yes"));
    let lines = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(lines.lines().count(), 5);
    for line in lines.lines() {
        serde_json::from_str::<serde_json::Value>(line).unwrap();
    }
}

#[test]
fn failing_run_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let script = write(dir.path(), "s.json", r#"["Nothing matches the report here.\n[['fail']]"]"#);
    let out = run_case("multiselect", &format!("scripted:{script}"), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("verdict: fail-declared"));
}

#[test]
fn usage_errors_exit_two() {
    let out = repro(&["run", "--app", "x.json", "--llm", "scripted:x"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--report"));

    let out = run_case("multiselect", "carrier-pigeon", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--llm"));

    let out = run_case("multiselect", "scripted:/no/such/script.json", &[]);
    assert_eq!(out.status.code(), Some(2));

    let llm = format!("scripted:{}", corpus("scripts/multiselect.json"));
    let out = run_case("multiselect", &llm, &["--threshold", "1.5"]);
    assert_eq!(out.status.code(), Some(2));

    assert_eq!(repro(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(repro(&["--help"]).status.code(), Some(0));
}

#[test]
fn time_limit_flag_stops_a_slow_model() {
    let dir = tempfile::tempdir().unwrap();
    let script = write(
        dir.path(),
        "slow.json",
        r#"{"cycle": true, "replies": [{"text": "Waiting.\n[['sleep', 0.1]]", "delay_ms": 400}]}"#,
    );
    let started = Instant::now();
    let out = run_case("multiselect", &format!("scripted:{script}"), &["--time-limit-s", "1"]);
    assert!(started.elapsed().as_secs_f64() < 3.0);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("verdict: fail-timeout"), "{}", stdout(&out));
}

#[test]
fn config_file_is_applied_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.toml", "time-limit-seconds = 1\naction-settle-ms = 0\n");
    let script =
        write(dir.path(), "slow.json", r#"{"cycle": true, "replies": [{"text": "[['back']]", "delay_ms": 300}]}"#);
    let llm = format!("scripted:{script}");
    let out = run_case("multiselect", &llm, &["--config", &config]);
    assert!(stdout(&out).contains("verdict: fail-timeout"));

    let short = write(
        dir.path(),
        "short.json",
        r#"[{"text": "[['back']]", "delay_ms": 600}, {"text": "[['back']]", "delay_ms": 600}, "[['fail']]"]"#,
    );
    let out = run_case("multiselect", &format!("scripted:{short}"), &["--config", &config, "--time-limit-s", "30"]);
    assert!(stdout(&out).contains("verdict: fail-declared"), "{}", stdout(&out));

    let bad = write(dir.path(), "bad.toml", "token-limt = 5\n");
    let out = run_case("multiselect", &llm, &["--config", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("token-limt"));
}

#[test]
fn suite_runs_the_corpus_in_parallel() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("summary.json");
    let traces = dir.path().join("traces");
    std::fs::create_dir(&traces).unwrap();
    let out = repro(&[
        "suite",
        "--dir",
        &corpus_dir().display().to_string(),
        "--workers",
        "4",
        "--summary-out",
        &summary.display().to_string(),
        "--trace-dir",
        &traces.display().to_string(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let summary: SuiteSummary = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(summary.reports.len(), common::corpus_names().len());
    assert_eq!(summary.success_rate, 1.0);
    assert!(summary.reports.iter().all(|r| !r.false_positive));
    assert!(summary.mean_success_seconds.is_some());
    assert_eq!(std::fs::read_dir(&traces).unwrap().count(), summary.reports.len());
}

#[test]
fn suite_reports_broken_entries_without_stopping() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["reports", "apps", "scripts"] {
        std::fs::create_dir(dir.path().join(sub)).unwrap();
    }
    for (sub, ext) in [("reports", "txt"), ("apps", "json"), ("scripts", "json")] {
        let from = corpus_dir().join(sub).join(format!("theme_switch.{ext}"));
        std::fs::copy(from, dir.path().join(sub).join(format!("theme_switch.{ext}"))).unwrap();
    }
    // app spec refers to its hierarchy relative to itself
    std::fs::create_dir(dir.path().join("hierarchies")).unwrap();
    for entry in std::fs::read_dir(corpus_dir().join("hierarchies")).unwrap() {
        let path = entry.unwrap().path();
        std::fs::copy(&path, dir.path().join("hierarchies").join(path.file_name().unwrap())).unwrap();
    }
    std::fs::copy(corpus_dir().join("reports/load_more.txt"), dir.path().join("reports/orphan.txt")).unwrap();

    let summary = dir.path().join("s.json");
    let out =
        repro(&["suite", "--dir", &dir.path().display().to_string(), "--summary-out", &summary.display().to_string()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let summary: SuiteSummary = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    let verdicts: Vec<_> = summary.reports.iter().map(|r| (r.name.as_str(), r.verdict.as_str())).collect();
    assert_eq!(verdicts, [("orphan", "fail-error"), ("theme_switch", "success")]);
    assert!(summary.reports[0].error.is_some());
    assert_eq!(summary.success_rate, 0.5);
}

#[test]
fn fetch_writes_a_loadable_report() {
    let server = Server::http("127.0.0.1:0").unwrap();
    let base = format!("http://{}", server.server_addr().to_ip().unwrap());
    thread::spawn(move || {
        for req in server.incoming_requests() {
            let body = if req.url().contains("/comments") {
                if req.url().ends_with("page=1") {
                    r#"[{"body": "Same on my phone.", "created_at": "2022-01-01T00:00:00Z"}]"#
                } else {
                    "[]"
                }
            } else {
                r#"{"title": "Crash on export", "body": "Tap export twice.", "html_url": "https://example.org/i/7"}"#
            };
            let _ = req.respond(Response::from_string(body));
        }
    });
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("r.txt");
    let out = repro(&[
        "fetch",
        "--repo",
        "someone/notes",
        "--issue",
        "7",
        "--out",
        &out_path.display().to_string(),
        "--api-base",
        &base,
        "--token-env",
        "REPRO_TEST_UNSET_TOKEN",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = load_report(&out_path).unwrap();
    assert_eq!(report.title, "Crash on export");
    assert_eq!(report.body, "Tap export twice.");
    assert_eq!(report.comments, ["Same on my phone."]);

    let out =
        repro(&["fetch", "--repo", "no-slash", "--issue", "7", "--out", "x.txt", "--api-base", "http://127.0.0.1:9"]);
    assert_eq!(out.status.code(), Some(2));
}

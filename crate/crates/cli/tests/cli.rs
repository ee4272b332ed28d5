use std::path::Path;
use std::process::{Command, Output};

use sememe_kb_testkit::{fixture_dir, manifest};

fn sememe_kb(args: &[&str], env_data: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sememe-kb"));
    cmd.args(args).env_remove("SEMEME_KB_DATA");
    if let Some(dir) = env_data {
        cmd.env("SEMEME_KB_DATA", dir);
    }
    cmd.output().unwrap()
}

fn with_fixture(args: &[&str]) -> Output {
    let data = fixture_dir();
    let mut full = args.to_vec();
    full.extend(["--data", data.to_str().unwrap()]);
    sememe_kb(&full, None)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn stats_match_manifest() {
    let o = with_fixture(&["stats", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let got: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(got, manifest().stats);
    let text = stdout(&with_fixture(&["stats"]));
    assert!(text.contains("senses\t52"), "{text}");
}

#[test]
fn exit_codes() {
    let cases: &[(&[&str], i32)] = &[
        (&["search", "apple"], 0),
        (&["search", "nothing-like-this"], 0),
        (&["sense", "1001"], 0),
        (&["sense", "999999"], 1),
        (&["sense", "abc"], 2),
        (&["tree", "1001", "--format", "dot"], 0),
        (&["tree", "999999"], 1),
        (&["tree", "1001", "--format", "png"], 2),
        (&["sim", "apple", "apple"], 0),
        (&["sim", "apple", "unicorn"], 1),
        (&["sim", "apple", "tree", "--lang", "auto"], 2),
        (&["sim", "apple"], 2),
        (&["nearest", "1001", "-k", "3"], 0),
        (&["nearest", "999999"], 1),
        (&["nearest", "1001", "-k", "0"], 2),
        (&["search", "apple", "--limit", "0"], 2),
        (&["search", "apple", "--mode", "fuzzy"], 2),
        (&["sememe", "human"], 0),
        (&["validate"], 0),
        (&["frobnicate"], 2),
    ];
    for (args, code) in cases {
        for json in [false, true] {
            let mut args = args.to_vec();
            if json {
                args.push("--json");
            }
            let o = with_fixture(&args);
            assert_eq!(o.status.code(), Some(*code), "{args:?}: {}", stderr(&o));
        }
    }
}

#[test]
fn domain_errors_are_reported() {
    let o = with_fixture(&["sense", "999999"]);
    assert!(stderr(&o).contains("unknown sense"));
    assert!(stdout(&o).is_empty());
    let o = with_fixture(&["sense", "999999", "--json"]);
    let body: serde_json::Value = serde_json::from_str(&stderr(&o)).unwrap();
    assert_eq!(body["error"]["kind"], "UnknownSense");
}

#[test]
fn usage_errors_and_help() {
    let o = sememe_kb(&["stats"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--data"));
    let o = sememe_kb(&["--help"], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("nearest"));
    let o = sememe_kb(&["serve", "--port", "0", "--data", "x"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn data_from_environment() {
    let fixture = fixture_dir();
    let o = sememe_kb(&["stats", "--json"], Some(&fixture));
    assert_eq!(o.status.code(), Some(0));

    // The flag wins over the environment.
    let o = sememe_kb(&["stats", "--data", "/definitely/missing"], Some(&fixture));
    assert_eq!(o.status.code(), Some(1));
    let empty = tempfile::tempdir().unwrap();
    let o = sememe_kb(&["stats", "--json", "--data", fixture.to_str().unwrap()], Some(empty.path()));
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn word_identity() {
    let records = sememe_kb_testkit::fixture_lines("senses.jsonl");
    let mut words: Vec<&str> = records.iter().map(|r| r["en"].as_str().unwrap()).collect();
    words.sort();
    words.dedup();
    for w in words.iter().take(8) {
        let o = with_fixture(&["sim", w, w, "--lang", "en", "--json"]);
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["score"], 1.0, "{w}");
    }
}

#[test]
fn tree_views() {
    let unicode = stdout(&with_fixture(&["tree", "1002"]));
    assert!(unicode.starts_with("phone|电话\n"));
    assert!(unicode.contains("└── [instrument] communicate|交流"));
    let plain = stdout(&with_fixture(&["tree", "1002", "--ascii-only"]));
    assert!(plain.contains("`- [instrument] communicate|交流"));
    assert_eq!(unicode.lines().count(), plain.lines().count());
}

#[test]
fn validate_reports_issues() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(fixture_dir().join("taxonomy.jsonl"), dir.path().join("taxonomy.jsonl")).unwrap();
    std::fs::write(
        dir.path().join("senses.jsonl"),
        concat!(
            r#"{"id": 1, "zh": "苹果", "en": "apple", "pos": "noun", "def": "{fruit|水果}"}"#,
            "\n",
            r#"{"id": 2, "zh": "梨", "en": "pear", "pos": "noun", "def": "{fruit|水果"}"#,
            "\n",
            r#"{"id": 3, "zh": "龙", "en": "dragon", "pos": "noun", "def": "{dragon|龙}"}"#,
            "\n",
            r#"{"id": 1, "zh": "苹果", "en": "apple", "pos": "noun", "def": "{tree|树}"}"#,
            "\n",
        ),
    )
    .unwrap();
    let data = dir.path().to_str().unwrap();
    let o = sememe_kb(&["validate", "--json", "--data", data], None);
    assert_eq!(o.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["ok"], false);
    assert_eq!(report["senses_loaded"], 1);
    assert_eq!(report["issues"].as_array().unwrap().len(), 3);

    // Strict commands refuse the same data.
    assert_eq!(sememe_kb(&["stats", "--data", data], None).status.code(), Some(1));
}

#[cfg(unix)]
#[test]
fn serve_answers_and_stops_on_sigterm() {
    use std::io::{BufRead, BufReader};
    use std::process::Stdio;

    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut child = Command::new(env!("CARGO_BIN_EXE_sememe-kb"))
        .args(["serve", "--port", &port.to_string(), "--data", fixture_dir().to_str().unwrap()])
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    assert_eq!(line.trim(), format!("listening on http://127.0.0.1:{port}"));

    let rt = tokio::runtime::Runtime::new().unwrap();
    let body: serde_json::Value =
        rt.block_on(async { reqwest::get(format!("http://127.0.0.1:{port}/api/stats")).await?.json().await }).unwrap();
    assert_eq!(body, manifest().stats);

    let killed = Command::new("kill").args(["-TERM", &child.id().to_string()]).status().unwrap();
    assert!(killed.success());
    assert_eq!(child.wait().unwrap().code(), Some(0));
}

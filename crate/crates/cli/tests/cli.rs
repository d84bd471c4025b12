use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn dbm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dbm"))
        .args(args)
        .env_remove("DBMX_DATA")
        .output()
        .unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn generate_small(dir: &Path) {
    let out = dbm(&[
        "generate",
        "--seed",
        "11",
        "--videos",
        "8",
        "--silent",
        "2",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
}

/// Relative path -> bytes for every file under `root`.
fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn first_video_dir(root: &Path) -> PathBuf {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(root.join("videos"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    dirs.sort();
    dirs.remove(0)
}

#[test]
fn generate_then_validate_with_json_report() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    generate_small(&data);
    let report = tmp.path().join("report.json");
    let out = dbm(&["validate", data.to_str().unwrap(), "--report", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stderr(&out).contains("missing:acoustics"));
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(report).unwrap()).unwrap();
    assert_eq!(json["videos_checked"], 8);
    assert_eq!(json["errors"], serde_json::json!([]));
    let codes: Vec<&str> = json["warnings"]
        .as_array()
        .unwrap()
        .iter()
        .map(|w| w["code"].as_str().unwrap())
        .collect();
    assert_eq!(codes.iter().filter(|c| **c == "missing:acoustics").count(), 2);
    assert_eq!(codes.iter().filter(|c| **c == "missing:speech").count(), 2);
}

#[test]
fn canonical_input_is_reemitted_byte_for_byte() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    generate_small(&data);
    let once = tmp.path().join("once");
    let twice = tmp.path().join("twice");
    let out = dbm(&["ingest", data.to_str().unwrap(), once.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = dbm(&["ingest", once.to_str().unwrap(), twice.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));

    let mut generated = tree(&data);
    generated.remove(Path::new("generator_log.json"));
    assert_eq!(tree(&once), generated);
    assert_eq!(tree(&twice), generated);
}

#[test]
fn generation_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    generate_small(&a);
    generate_small(&b);
    assert_eq!(tree(&a), tree(&b));
}

#[test]
fn empty_acoustics_file_is_a_warning() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    generate_small(&data);
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(data.join("manifest.json")).unwrap()).unwrap();
    let voiced = manifest["videos"]
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["raw_csvs"].get("acoustics").is_some())
        .unwrap();
    let rel = voiced["raw_csvs"]["acoustics"].as_str().unwrap();
    std::fs::write(data.join(rel), "").unwrap();

    let out = dbm(&["ingest", data.to_str().unwrap(), tmp.path().join("out").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let id = voiced["id"].as_str().unwrap();
    assert!(stderr(&out).contains(&format!("warning [{id}] missing:acoustics")), "{}", stderr(&out));
}

#[test]
fn malformed_rate_row_fails_validation() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    generate_small(&data);
    let file = first_video_dir(&data).join("facial.csv");
    let text = std::fs::read_to_string(&file).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    lines[1] = lines[1].replacen("30", "thirty", 1);
    std::fs::write(&file, lines.join("\n") + "\n").unwrap();

    let report = tmp.path().join("report.json");
    for cmd in ["validate", "ingest"] {
        let mut args = vec![cmd, data.to_str().unwrap()];
        let out_dir = tmp.path().join("out");
        if cmd == "ingest" {
            args.push(out_dir.to_str().unwrap());
        }
        args.extend(["--report", report.to_str().unwrap()]);
        let out = dbm(&args);
        assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
        assert!(stderr(&out).contains("facial.csv:row 2"), "{}", stderr(&out));
        assert!(!out_dir.exists());
    }
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(report).unwrap()).unwrap();
    let err = &json["errors"][0];
    assert_eq!(err["code"], "MalformedCsv");
    assert_eq!(err["row"], 2);
    assert!(err["file"].as_str().unwrap().ends_with("facial.csv"));
}

#[test]
fn adapter_renames_upstream_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    generate_small(&data);
    // Rename `mov_roll` to an upstream name everywhere it appears.
    for (rel, bytes) in tree(&data) {
        let text = String::from_utf8(bytes).unwrap();
        if text.contains("mov_roll") {
            std::fs::write(data.join(rel), text.replace("mov_roll", "pose_Rz")).unwrap();
        }
    }
    let out_dir = tmp.path().join("out");
    let out = dbm(&["ingest", data.to_str().unwrap(), out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "unrenamed ids are still a consistent registry");

    let adapter = tmp.path().join("adapter.json");
    std::fs::write(&adapter, r#"{"rename": {"pose_Rz": "mov_roll"}}"#).unwrap();
    let out_dir = tmp.path().join("adapted");
    let out = dbm(&[
        "ingest",
        data.to_str().unwrap(),
        out_dir.to_str().unwrap(),
        "--adapter",
        adapter.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let manifest = std::fs::read_to_string(out_dir.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"mov_roll\"") && !manifest.contains("\"pose_Rz\""));

    std::fs::write(&adapter, r#"{"renames": {}}"#).unwrap();
    let out = dbm(&["validate", data.to_str().unwrap(), "--adapter", adapter.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn io_failures_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nowhere");
    let out = dbm(&["validate", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));

    let data = tmp.path().join("data");
    generate_small(&data);
    let out = dbm(&[
        "validate",
        data.to_str().unwrap(),
        "--adapter",
        missing.join("a.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    std::fs::remove_file(first_video_dir(&data).join("movement.csv")).unwrap();
    let out = dbm(&["validate", data.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "a missing listed file is a validation error: {}", stderr(&out));
    assert!(stderr(&out).contains("movement.csv"));
}

#[test]
fn invalid_generator_spec_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("x");
    let out = dbm(&["generate", "--videos", "3", "--silent", "4", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    let out = dbm(&[
        "generate",
        "--videos",
        "10",
        "--silent",
        "1",
        "--out",
        out_dir.to_str().unwrap(),
        "--plant",
        "spe_word_count,aco_int_mean,1.5",
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn planted_correlation_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("p");
    let out = dbm(&[
        "generate",
        "--videos",
        "20",
        "--silent",
        "2",
        "--tasks",
        "a,b",
        "--no-individual",
        "--out",
        out_dir.to_str().unwrap(),
        "--plant",
        "spe_word_count,aco_int_mean,0.8",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stderr(&out).contains("planted spe_word_count ~ aco_int_mean: target r=0.8"));
    let log: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out_dir.join("generator_log.json")).unwrap()).unwrap();
    assert_eq!(log["individual_video_id"], serde_json::Value::Null);
    assert_eq!(log["spec"]["task_labels"], serde_json::json!(["a", "b"]));
}

#[test]
fn serve_rejects_bad_config_before_binding() {
    let tmp = tempfile::tempdir().unwrap();
    let out = dbm(&["serve", "--data", tmp.path().join("none").to_str().unwrap(), "--bind", "127.0.0.1:0"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));

    let data = tmp.path().join("data");
    generate_small(&data);
    let out = dbm(&[
        "serve",
        "--data",
        data.to_str().unwrap(),
        "--bind",
        "127.0.0.1:0",
        "--max-selection",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn serve_answers_http_with_env_config() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    generate_small(&data);
    let mut child = Command::new(env!("CARGO_BIN_EXE_dbm"))
        .arg("serve")
        .env("DBMX_DATA", &data)
        .env("DBMX_BIND", "127.0.0.1:0")
        .env("DBMX_CORS", "http://a.example,http://b.example")
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();

    let mut stderr = child.stderr.take().unwrap();
    let mut seen = Vec::new();
    let mut byte = [0u8; 1];
    let addr = loop {
        if stderr.read(&mut byte).unwrap() == 0 {
            panic!("server exited: {}", String::from_utf8_lossy(&seen));
        }
        seen.push(byte[0]);
        let text = String::from_utf8_lossy(&seen);
        if let Some(line) = text.lines().find(|l| l.starts_with("listening on ") && text.ends_with('\n')) {
            break line.trim_start_matches("listening on ").to_string();
        }
    };

    let mut stream = TcpStream::connect(&addr).unwrap();
    write!(
        stream,
        "GET /api/cohort HTTP/1.1\r\nHost: x\r\nOrigin: http://b.example\r\nConnection: close\r\n\r\n"
    )
    .unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).unwrap();
    child.kill().unwrap();
    let _ = child.wait();

    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    assert!(response.to_ascii_lowercase().contains("access-control-allow-origin: http://b.example"));
    assert!(response.contains("\"video_ids\""));
}

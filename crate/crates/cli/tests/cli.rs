use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn rusforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rusforge"))
        .args(args)
        .env_remove("RUSFORGE_NS")
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// A copy of a fixture with `edit` applied to its JSON.
fn edited(dir: &Path, name: &str, edit: impl FnOnce(&mut serde_json::Value)) -> PathBuf {
    let mut doc: serde_json::Value = serde_json::from_slice(&fs::read(fixture(name)).unwrap()).unwrap();
    edit(&mut doc);
    let out = dir.join(name);
    fs::write(&out, serde_json::to_vec_pretty(&doc).unwrap()).unwrap();
    out
}

fn step_text(doc: &mut serde_json::Value, step: usize) -> &mut serde_json::Value {
    &mut doc["actors"][0]["use_cases"][0]["main"][step]["text"]
}

#[test]
fn valid_project_validates_silently() {
    let out = rusforge(&["validate", path(&fixture("work_plan.json"))]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty() && out.stderr.is_empty());
}

#[test]
fn one_bad_step_gives_one_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let file = edited(dir.path(), "work_plan.json", |doc| *step_text(doc, 2) = "user inserts".into());
    let out = rusforge(&["validate", path(&file)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    let err = stderr(&out);
    assert_eq!(
        err,
        format!("{}:user/insert_work_plan/main:3: no template matches: \"user inserts\"\n", file.display())
    );
}

#[test]
fn lexical_errors_name_the_column() {
    let dir = tempfile::tempdir().unwrap();
    let file = edited(dir.path(), "work_plan.json", |doc| *step_text(doc, 0) = "user insert$ x".into());
    let out = rusforge(&["validate", path(&file)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("main:1: unexpected '$' at column 12"), "{}", stderr(&out));
}

#[test]
fn missing_and_malformed_files_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(rusforge(&["validate", path(&missing)]).status.code(), Some(2));

    let broken = dir.path().join("broken.json");
    fs::write(&broken, "{\"rusforge_version\": 1, \"name\": \"x\", \"bogus\": true}").unwrap();
    let out = rusforge(&["validate", path(&broken)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("E_SCHEMA at bogus"));

    assert_eq!(rusforge(&["validate"]).status.code(), Some(2));
    assert_eq!(rusforge(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn extract_reports_entities_and_predicates() {
    let out = rusforge(&["extract", path(&fixture("work_plan.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["entities"].as_array().unwrap().len(), 6);
    assert_eq!(report["predicates"].as_array().unwrap().len(), 2);
}

#[test]
fn glossary_check_warns_on_stderr_without_failing() {
    let out = rusforge(&["extract", "--glossary-check", path(&fixture("search.json"))]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stderr.is_empty(), "{}", stderr(&out));

    let dir = tempfile::tempdir().unwrap();
    let file = edited(dir.path(), "search.json", |doc| {
        doc["glossary"].as_array_mut().unwrap().retain(|e| e["term"] != "keyword");
    });
    let report = dir.path().join("report.json");
    let out = rusforge(&["extract", "--glossary-check", "--out", path(&report), path(&file)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let err = stderr(&out);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.contains("W_UNKNOWN_TERM") && err.contains("\"keyword\""));
    assert!(report.exists());
}

#[test]
fn unvalidated_projects_cannot_be_extracted_or_built() {
    let dir = tempfile::tempdir().unwrap();
    let file = edited(dir.path(), "work_plan.json", |doc| *step_text(doc, 0) = "user inserts".into());
    assert_eq!(rusforge(&["extract", path(&file)]).status.code(), Some(1));
    assert_eq!(rusforge(&["build", path(&file)]).status.code(), Some(1));
}

#[test]
fn build_writes_ntriples_and_dot() {
    let dir = tempfile::tempdir().unwrap();
    let nt = dir.path().join("kb.nt");
    let dot = dir.path().join("graph.dot");
    let out = rusforge(&["build", path(&fixture("work_plan.json")), "--out", path(&nt), "--dot", path(&dot)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let kb = fs::read_to_string(&nt).unwrap();
    assert!(kb
        .lines()
        .any(|l| l == "<urn:ucat:proj:t1#user> <urn:ucat:proj:t1#inserts> <urn:ucat:proj:t1#project_id> ."));
    assert!(fs::read_to_string(&dot).unwrap().starts_with("digraph"));
}

#[test]
fn untyped_entities_fail_unless_defaulted() {
    let dir = tempfile::tempdir().unwrap();
    let file = edited(dir.path(), "work_plan.json", |doc| {
        doc["type_assignments"].as_object_mut().unwrap().remove("work_plan");
    });
    let out = rusforge(&["build", path(&file)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("E_UNTYPED") && stderr(&out).contains("work_plan"));

    let out = rusforge(&["build", path(&file), "--default-type", "Thing"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("<urn:ucat:proj:t1#work_plan> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <urn:ucat:proj:t1#Thing> ."));

    let out = rusforge(&["build", path(&file), "--default-type", "not a type"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn query_prints_csv() {
    let dir = tempfile::tempdir().unwrap();
    let nt = dir.path().join("kb.nt");
    assert!(rusforge(&["build", path(&fixture("search.json")), "--out", path(&nt)]).status.success());

    let query = "SELECT ?o WHERE { ns:user ?p ?o . }";
    let out = rusforge(&["query", path(&nt), query]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "o");
    assert_eq!(lines.len(), 5);
    assert!(lines.contains(&"urn:ucat:proj:t5#search_criteria"));

    let qfile = dir.path().join("q.rq");
    fs::write(&qfile, query).unwrap();
    let from_file = rusforge(&["query", path(&nt), "--file", path(&qfile)]);
    assert_eq!(from_file.stdout, out.stdout);

    let with_project = rusforge(&["query", path(&nt), query, "--project", path(&fixture("search.json"))]);
    assert_eq!(with_project.stdout, out.stdout);

    let json = rusforge(&["query", path(&nt), query, "--json"]);
    let table: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(table["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn query_namespace_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let nt = dir.path().join("kb.nt");
    assert!(rusforge(&["build", path(&fixture("search.json")), "--out", path(&nt)]).status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_rusforge"))
        .args(["query", path(&nt), "SELECT ?o WHERE { ns:user ?p ?o . }"])
        .env("RUSFORGE_NS", "urn:ucat:proj:other#")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "o\n");
}

#[test]
fn empty_results_are_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.nt");
    fs::write(&empty, "").unwrap();
    let out = rusforge(&["query", path(&empty), "SELECT ?s ?o WHERE { ?s ?p ?o }"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "s,o\n");
}

#[test]
fn malformed_queries_and_kbs_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.nt");
    fs::write(&empty, "").unwrap();
    let out = rusforge(&["query", path(&empty), "SELECT ?s WHERE { ?s ?p }"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("E_Q_SYNTAX"));

    let bad = dir.path().join("bad.nt");
    fs::write(&bad, "<urn:x#a> <urn:x#b> .\n").unwrap();
    let out = rusforge(&["query", path(&bad), "SELECT ?s WHERE { ?s ?p ?o }"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("E_NT_SYNTAX"));

    assert_eq!(rusforge(&["query", path(&empty)]).status.code(), Some(2));
}

#[test]
fn artifacts_are_byte_deterministic() {
    let fixture = fixture("register_private_group.json");
    let run = |dir: &Path| {
        let (nt, dot, report) = (dir.join("kb.nt"), dir.join("g.dot"), dir.join("r.json"));
        assert!(rusforge(&["validate", path(&fixture)]).status.success());
        assert!(rusforge(&["extract", path(&fixture), "--out", path(&report)]).status.success());
        let out = rusforge(&["build", path(&fixture), "--out", path(&nt), "--dot", path(&dot), "--provenance"]);
        assert!(out.status.success(), "{}", stderr(&out));
        [nt, dot, report].map(|p| fs::read(p).unwrap())
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(run(a.path()), run(b.path()));
}

#[test]
fn serve_refuses_corrupt_storage() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p.json"), "not json").unwrap();
    let out = rusforge(&["serve", "--port", "0", "--storage", path(dir.path())]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("cannot open storage"));
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn relprop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relprop"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn manifest_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn corpus(name: &str) -> String {
    manifest_dir().join("examples").join(name).to_string_lossy().into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn scenario(dir: &tempfile::TempDir, text: &str) -> String {
    let path = dir.path().join("s.rp");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn traces_match_gold_files() {
    let gold_dir = manifest_dir().join("tests/gold");
    let mut names: Vec<PathBuf> = fs::read_dir(manifest_dir().join("examples"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "rp"))
        .collect();
    names.sort();
    assert!(names.len() >= 10);
    for path in names {
        let out = relprop(&["run", path.to_str().unwrap()]);
        assert!(out.status.success(), "{}: {}", path.display(), stderr(&out));
        let gold = gold_dir.join(path.file_stem().unwrap()).with_extension("tsv");
        let expected = fs::read_to_string(&gold).unwrap_or_else(|_| panic!("missing {}", gold.display()));
        assert_eq!(stdout(&out), expected, "{}", path.display());
    }
}

#[test]
fn run_writes_trace_file() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("out.tsv");
    let out = relprop(&["run", &corpus("cycles_a.rp"), "--trace", trace.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(trace).unwrap();
    assert!(text.starts_with("step\tkind\tentity\tdimension\told\tnew\tcause\n"));
    assert!(text.contains("\tsuppressed\tmsg:R10\t-\t"));
}

#[test]
fn missing_scenario_exits_1() {
    let out = relprop(&["run", "missing.rp"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("missing.rp"));
}

#[test]
fn usage_errors_exit_1() {
    for args in [&["bogus"][..], &[], &["run"], &["query", "x.rp", "--tau", "high"], &["explain", "x.rp"]] {
        assert_eq!(relprop(args).status.code(), Some(1), "{args:?}");
    }
    assert_eq!(relprop(&["--help"]).status.code(), Some(0));
}

#[test]
fn parse_error_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario(&dir, "agent A rel=1\n\nbogus M1\n");
    let out = relprop(&["run", &path]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn failed_expect_exits_2_with_partial_trace() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario(
        &dir,
        "agent A rel=0.5\nagent B rel=1\nsend M from=A to=B topic=t value=1\n\
         expect msg:M cmp=gt val=0.9\nsend N from=B to=A topic=t value=1\n",
    );
    let trace = dir.path().join("t.tsv");
    let out = relprop(&["run", &path, "--trace", trace.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains(":4"), "{}", stderr(&out));
    let text = fs::read_to_string(trace).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.contains("stmt:t=1"));
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario(&dir, "agent A rel=1\nsend M from=A to=Z topic=t value=1\n");
    let out = relprop(&["run", &path]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unknown agent `Z`"));
}

#[test]
fn scenario_config_overrides_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let chain = "agent A rel=0.8\nagent B rel=0.6\nagent C rel=1\n\
                 send M from=A to=B topic=t value=1\nforward N prior=M from=B to=C value=2\n";
    let path = scenario(&dir, chain);
    let query = |extra: &[&str]| {
        let mut args = vec!["query", path.as_str(), "--tau", "-1"];
        args.extend_from_slice(extra);
        stdout(&relprop(&args))
    };
    assert!(query(&[]).contains("t=2\t0.600000000"));
    assert!(query(&["--config", "alpha=0.5"]).contains("t=2\t0.300000000"));
    fs::write(&path, format!("config alpha=0.25\n{chain}")).unwrap();
    let out = query(&["--config", "alpha=0.5"]);
    assert!(out.contains("t=2\t0.150000000"), "{out}");
    assert_eq!(relprop(&["run", &path, "--config", "alpha=7"]).status.code(), Some(1));
    assert_eq!(relprop(&["run", &path, "--config", "speed=1"]).status.code(), Some(1));
}

#[test]
fn query_prints_sorted_accepted_statements() {
    let out = relprop(&["query", &corpus("size.rp"), "--tau", "0.5"]);
    assert_eq!(stdout(&out), "size=101\t0.700000000\n");
    let out = relprop(&["query", &corpus("size.rp"), "--tau", "-1"]);
    let keys: Vec<String> = stdout(&out).lines().map(|l| l.split('\t').next().unwrap().to_string()).collect();
    assert_eq!(keys, ["size=101", "size=120", "size=90"]);
}

#[test]
fn query_tau_from_scenario_wins() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario(&dir, "config tau=0.9\nagent A rel=0.8\nagent B rel=1\nsend M from=A to=B topic=t value=1\n");
    assert_eq!(stdout(&relprop(&["query", &path, "--tau", "0.1"])), "");
}

#[test]
fn query_every_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario(&dir, "agent A rel=a:0.9,b:0.3\nagent B rel=1\nsend M from=A to=B topic=t claim=x pol=+\n");
    assert_eq!(stdout(&relprop(&["query", &path, "--tau", "0.5"])), "t:x:+\t0.600000000\n");
    assert_eq!(stdout(&relprop(&["query", &path, "--tau", "0.5", "--every-dimension"])), "");
}

#[test]
fn explain_lists_history_and_chains() {
    let out = relprop(&["explain", &corpus("cycles_a.rp"), "--entity", "agent:A"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("agent:A\n"));
    assert!(text.contains("cause msg:M"));
    assert!(text.contains("\n  C1\n"));
    assert!(text.contains("B->A back"));

    let out = relprop(&["explain", &corpus("temp_case31.rp"), "--entity", "Mt"]);
    let text = stdout(&out);
    assert!(text.contains("path\tMh Mt"), "{text}");
    assert!(text.contains("Station->L back"));

    let out = relprop(&["explain", &corpus("size.rp"), "--entity", "nobody"]);
    assert_eq!(out.status.code(), Some(1));
}

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nevl_core::corpus::{parse_corpus, stats};
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn nevl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nevl")).args(args).env_remove("NEVL_API_TOKEN").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> Value {
    assert_eq!(code(o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn no_panic(o: &Output) {
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(!err.contains("panicked"), "{err}");
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_valid_corpus_has_no_findings() {
    let o = nevl(&["corpus", "validate", "--in", s(&fixture("mini.tsv")), "--strict"]);
    let v = stdout_json(&o);
    assert_eq!(v["tool"], "nevl");
    assert_eq!(v["command"], "corpus validate");
    assert_eq!(v["result"]["findings"], serde_json::json!([]));
    assert_eq!(v["result"]["entries"], 4);
    assert_eq!(v["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn validate_strict_on_imbalanced_corpus_exits_2() {
    let path = fixture("mini_imbalanced.tsv");
    let o = nevl(&["corpus", "validate", "--in", s(&path), "--strict"]);
    assert_eq!(code(&o), 2);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let kinds: Vec<&str> = v["result"]["findings"].as_array().unwrap().iter().map(|f| f["kind"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["set_imbalance", "gender_imbalance"]);
    // without --strict the same findings are a successful report
    assert_eq!(code(&nevl(&["corpus", "validate", "--in", s(&path)])), 0);
    // tolerances from flags silence them
    let o = nevl(&["corpus", "validate", "--in", s(&path), "--strict", "--set-tolerance", "1", "--gender-tolerance", "1"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn stats_equal_library_stats() {
    let path = fixture("mini.tsv");
    let v = stdout_json(&nevl(&["corpus", "stats", "--in", s(&path)]));
    let expected = stats(&parse_corpus("mini", &std::fs::read(&path).unwrap()).unwrap());
    assert_eq!(v["result"], serde_json::to_value(&expected).unwrap());
    assert_eq!(v["result"]["Set-N"]["sentences"], 2);
}

#[test]
fn variability_reports_both_sets() {
    let v = stdout_json(&nevl(&["corpus", "variability", "--in", s(&fixture("mini.tsv"))]));
    assert_eq!(v["result"].as_array().unwrap().len(), 2);
    assert_eq!(v["result"][0]["scores"][0][0], Value::Null);
}

#[test]
fn extract_proposes_candidates() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = dir.path().join("pairs.tsv");
    std::fs::write(&pairs, "SOURCE\tTARGET\nThe doctors are here.\tI medici sono qui.\nIt rains.\tPiove.\n").unwrap();
    let v = stdout_json(&nevl(&["corpus", "extract", "--in", s(&pairs)]));
    assert_eq!(v["result"]["segments"], 2);
    assert_eq!(v["config"]["lexicon"], "bundled");
}

#[test]
fn malformed_inputs_exit_1_without_panicking() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tsv");
    std::fs::write(&bad, b"\xff\xfe garbage\tx\n").unwrap();
    for args in [
        vec!["corpus", "validate", "--in", s(&bad)],
        vec!["corpus", "stats", "--in", "/nonexistent/file.tsv"],
        vec!["corpus", "extract", "--in", s(&bad)],
        vec!["eval", "contrastive", "--in", s(&fixture("mini.tsv")), "--outputs", s(&bad)],
        vec!["classifier", "classify", "--model", s(&bad), "--in", s(&bad)],
        vec!["classifier", "train", "--in", s(&bad), "--out", s(&dir.path().join("m.bin"))],
        vec!["synth", "generate", "--seeds", s(&bad), "--out", s(&dir.path().join("o.tsv"))],
        vec!["corpus", "frobnicate"],
    ] {
        let o = nevl(&args);
        assert_eq!(code(&o), 1, "{args:?}");
        no_panic(&o);
    }
}

#[test]
fn contrastive_on_gendered_outputs() {
    let o = nevl(&["eval", "contrastive", "--in", s(&fixture("mini.tsv")), "--outputs", s(&fixture("outputs_ref_g.tsv")), "--metrics", "bleu,ter,meteor"]);
    let v = stdout_json(&o);
    let sections = v["result"].as_array().unwrap();
    assert_eq!(sections.len(), 3);
    for (section, name) in sections.iter().zip(["bleu", "ter", "meteor"]) {
        assert_eq!(section["metric"], name);
        assert_eq!(section["accuracy"]["set_g"], 100.0, "{name}");
    }
    assert_eq!(v["config"]["contrastive"]["ref_policy"], "exclude-source");
}

#[test]
fn contrastive_is_byte_deterministic_and_writes_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &str| {
        let out = dir.path().join(out);
        let o = nevl(&[
            "eval", "contrastive", "--in", s(&fixture("mini.tsv")), "--outputs", s(&fixture("outputs_ref_g.tsv")),
            "--verdicts-dir", s(&dir.path().join("v")), "--out", s(&out),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
    let tsv = std::fs::read_to_string(dir.path().join("v/verdicts_bleu.tsv")).unwrap();
    assert!(tsv.starts_with("ENTRY_ID\tMETRIC\tS_N\tS_G\tPRED\tGOLD\n"));
    assert_eq!(tsv.lines().count(), 5);
}

#[test]
fn unknown_metric_lists_valid_set() {
    let o = nevl(&["eval", "contrastive", "--in", s(&fixture("mini.tsv")), "--outputs", s(&fixture("outputs_ref_g.tsv")), "--metrics", "bleu,comet"]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("comet") && err.contains("bleu, chrf, ter, meteor"), "{err}");
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("nevl.toml");
    std::fs::write(&cfg, "[contrastive]\nmetrics = [\"chrf\"]\ntie_policy = \"neutral\"\n").unwrap();
    let (corpus, outputs) = (fixture("mini.tsv"), fixture("outputs_ref_g.tsv"));
    let base = ["eval", "contrastive", "--in", s(&corpus), "--outputs", s(&outputs)];
    let v = stdout_json(&nevl(&[&base[..], &["--config", s(&cfg), "--tie-policy", "gendered"]].concat()));
    assert_eq!(v["config"]["contrastive"]["tie_policy"], "gendered");
    assert_eq!(v["config"]["contrastive"]["metrics"], serde_json::json!(["chrf"]));
    assert_eq!(v["result"].as_array().unwrap().len(), 1);

    std::fs::write(&cfg, "[contrastive]\nmetric = [\"chrf\"]\n").unwrap();
    let o = nevl(&[&base[..], &["--config", s(&cfg)]].concat());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("metric"));
}

#[test]
fn score_command() {
    let dir = tempfile::tempdir().unwrap();
    let hyp = dir.path().join("hyp.txt");
    let r = dir.path().join("ref.txt");
    std::fs::write(&hyp, "il gatto dorme\nla casa è grande\n").unwrap();
    std::fs::write(&r, "il gatto dorme\nla casa è grande\n").unwrap();
    let v = stdout_json(&nevl(&["score", "--hyp", s(&hyp), "--ref", s(&r), "--sentences"]));
    let by: Vec<(String, f64)> = v["result"].as_array().unwrap().iter().map(|m| (m["metric"].as_str().unwrap().to_owned(), m["corpus"].as_f64().unwrap())).collect();
    assert_eq!(by, [("bleu".into(), 100.0), ("chrf".into(), 100.0), ("ter".into(), 0.0), ("meteor".into(), by[3].1)]);
    assert!(by[3].1 > 90.0);
    std::fs::write(&r, "una riga\n").unwrap();
    assert_eq!(code(&nevl(&["score", "--hyp", s(&hyp), "--ref", s(&r)])), 1);
}

fn recount(tsv: &Path) -> [usize; 3] {
    let text = std::fs::read_to_string(tsv).unwrap();
    let mut c = [0; 3];
    for line in text.lines().skip(1) {
        match line.split('\t').nth(1).unwrap() {
            "N" => c[0] += 1,
            "M" => c[1] += 1,
            "F" => c[2] += 1,
            other => panic!("label {other}"),
        }
    }
    c
}

#[test]
fn offline_generation_is_deterministic_and_counts_match() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let report = dir.path().join(format!("{name}.json"));
        let o = nevl(&["synth", "generate", "--offline", "--seeds", s(&fixture("seeds_small.tsv")), "--per-seed", "10", "--rng", "7", "--out", s(&out), "--report", s(&report)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        (std::fs::read(&out).unwrap(), serde_json::from_slice::<Value>(&std::fs::read(&report).unwrap()).unwrap(), out)
    };
    let (a, report, path) = run("a.tsv");
    let (b, _, _) = run("b.tsv");
    assert_eq!(a, b);
    let r = &report["result"];
    assert_eq!(r["requested"], 90);
    assert_eq!(r["produced"], 90);
    assert_eq!(r["dropped_invalid"], 0);
    let [n, m, f] = recount(&path);
    assert_eq!((n, m, f), (30, 30, 30));
    assert_eq!(r["per_category"]["N"], n);
    assert_eq!(r["per_category"]["M"], m);
    assert_eq!(r["per_category"]["F"], f);
    assert_eq!(r["per_round"]["Offline"]["valid"], 90);
    assert_eq!(report["config"]["synth"]["rng"], 7);
}

/// Chat-completion stand-in: answers each prompt by filling its numbered
/// triplets into a fixed sentence (round 1) or by appending a clause to the
/// given sentences once per requested rewrite (round 2).
fn answer(prompt: &str) -> String {
    let rewrites: Option<usize> = prompt.split("Rewrite each triplet ").nth(1).and_then(|r| r.split(' ').next()).and_then(|n| n.parse().ok());
    let mut out = String::new();
    for line in prompt.lines().filter(|l| l.starts_with("Triplet ")) {
        let (num, rest) = line["Triplet ".len()..].split_once(": ").unwrap();
        let forms: Vec<&str> = rest.split(" | ").map(|p| &p[4..]).collect();
        match rewrites {
            None => {
                for (tag, form) in ["N", "M", "F"].iter().zip(&forms) {
                    out.push_str(&format!("{num}. {tag}: Ieri abbiamo salutato {form} in piazza.\n"));
                }
            }
            Some(k) => {
                for j in 1..=k {
                    for (tag, sent) in ["N", "M", "F"].iter().zip(&forms) {
                        out.push_str(&format!("{num}.{j}. {tag}: {sent} Poi siamo andati via alle {j}.\n"));
                    }
                }
            }
        }
    }
    out
}

fn serve(stream: TcpStream) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut len = 0;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).unwrap() == 0 {
            return;
        }
        if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
            len = v.trim().parse().unwrap();
        }
        if line == "\r\n" {
            break;
        }
    }
    let mut body = vec![0; len];
    reader.read_exact(&mut body).unwrap();
    let request: Value = serde_json::from_slice(&body).unwrap();
    let reply = serde_json::json!({"choices": [{"message": {"role": "assistant", "content": answer(request["messages"][0]["content"].as_str().unwrap())}}]}).to_string();
    let mut stream = stream;
    write!(stream, "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}", reply.len()).unwrap();
}

fn mock_server() -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    std::thread::spawn(move || {
        for stream in listener.incoming().flatten() {
            std::thread::spawn(move || serve(stream));
        }
    });
    format!("http://{addr}/v1/chat/completions")
}

fn fast_retry_config(dir: &Path) -> PathBuf {
    let cfg = dir.join("nevl.toml");
    std::fs::write(&cfg, "[synth.generation]\nrewrites_per_sentence = 2\n[synth.generation.retry]\nmax_retries = 1\nbase_delay = 1\nmax_delay = 1\n[synth.generation.http]\ntimeout_secs = 5\n").unwrap();
    cfg
}

#[test]
fn online_generation_against_mock_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fast_retry_config(dir.path());
    let out = dir.path().join("o.tsv");
    let o = Command::new(env!("CARGO_BIN_EXE_nevl"))
        .args(["synth", "generate", "--online", "--config", s(&cfg), "--seeds", s(&fixture("seeds_small.tsv")), "--per-seed", "2", "--endpoint", &mock_server(), "--out", s(&out)])
        .env("NEVL_API_TOKEN", "test-token")
        .output()
        .unwrap();
    let v = stdout_json(&o);
    let r = &v["result"];
    // round 1: 3 seeds x 2 triplets; round 2: 2 rewrites of each
    assert_eq!(r["per_round"]["R1"]["sentences"], 18);
    assert_eq!(r["per_round"]["R2"]["sentences"], 36);
    assert_eq!(r["per_round"]["R1"]["client"]["items_skipped"], 0);
    assert_eq!(r["requested"], 54);
    assert_eq!(r["dropped_invalid"], 0);
    assert_eq!(recount(&out), [18, 18, 18]);
    assert_eq!(v["config"]["mode"], "online");
    assert!(!String::from_utf8_lossy(&std::fs::read(&out).unwrap()).contains("test-token"));
    assert!(!v.to_string().contains("test-token"));
}

#[test]
fn online_generation_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fast_retry_config(dir.path());
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let endpoint = format!("http://127.0.0.1:{port}/v1/chat/completions");
    let (seeds, out) = (fixture("seeds_small.tsv"), dir.path().join("o.tsv"));
    let args = ["synth", "generate", "--online", "--config", s(&cfg), "--seeds", s(&seeds), "--endpoint", &endpoint, "--out", s(&out)];
    let o = Command::new(env!("CARGO_BIN_EXE_nevl")).args(args).env("NEVL_API_TOKEN", "t").output().unwrap();
    assert_eq!(code(&o), 1);
    no_panic(&o);
    // no token in the environment
    let o = nevl(&args);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("NEVL_API_TOKEN"));
}

#[test]
fn train_classify_evaluate_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    let gen = |per_seed: &str, rng: &str, out: &Path| {
        let o = nevl(&["synth", "generate", "--offline", "--per-seed", per_seed, "--rng", rng, "--out", s(out), "--report", s(&p("r.json"))]);
        assert_eq!(code(&o), 0);
    };
    gen("3", "1", &p("train.tsv"));
    gen("1", "99", &p("test.tsv"));
    let o = nevl(&["classifier", "train", "--in", s(&p("train.tsv")), "--out", s(&p("model.nevl")), "--rng", "3"]);
    let v = stdout_json(&o);
    assert_eq!(v["result"]["rows"], 474 * 9);
    assert_eq!(v["config"]["rng_seed"], 3);

    let v = stdout_json(&nevl(&["classifier", "evaluate", "--model", s(&p("model.nevl")), "--in", s(&p("test.tsv"))]));
    let acc = &v["result"]["accuracy"];
    assert!(acc["macro"].as_f64().unwrap() > 80.0, "{acc}");
    assert!(acc["micro"].as_f64().is_some());

    std::fs::write(p("lines.txt"), "la professoressa\nchi insegna\n").unwrap();
    let o = nevl(&["classifier", "classify", "--model", s(&p("model.nevl")), "--in", s(&p("lines.txt"))]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    assert_eq!(out.lines().next(), Some("TEXT\tLABEL\tPROB"));
    assert_eq!(out.lines().count(), 3);

    // gold labels from the corpus sets
    let v = stdout_json(&nevl(&["classifier", "evaluate", "--model", s(&p("model.nevl")), "--corpus", s(&fixture("mini.tsv")), "--outputs", s(&fixture("outputs_ref_g.tsv"))]));
    assert_eq!(v["config"]["gold"], "corpus-set");
    assert_eq!(v["inputs"].as_array().unwrap().len(), 3);
}

#[test]
fn zero_model_and_empty_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let lines = dir.path().join("lines.txt");
    std::fs::write(&lines, "uno\ndue\ntre\n").unwrap();
    let o = nevl(&["classifier", "classify", "--zero-model", "--in", s(&lines)]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.lines().skip(1).all(|l| l.ends_with("\t0.500000")), "{out}");

    let empty = dir.path().join("empty.tsv");
    std::fs::write(&empty, "TEXT\tLABEL\n").unwrap();
    let o = nevl(&["classifier", "evaluate", "--zero-model", "--in", s(&empty)]);
    assert_eq!(code(&o), 1);
    no_panic(&o);
}

//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! fails.

#[path = "../../core/tests/support/oracle.rs"]
mod oracle;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use cnldoc::cnl::generate::{random_sentence, walk};
use cnldoc::cnl::{Cnl, Lexicon};
use cnldoc_workbench::bench;
use cnldoc_workbench::{Session, SessionConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const SCENARIO_LIMIT: Duration = Duration::from_secs(1);
const ADD_LIMIT: f64 = 2.0;
const CHECK_LIMIT: f64 = 10.0;
const LOAD_LIMIT: f64 = 120.0;
const BENCH_FACTS: usize = 25_000;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// Copies a fixture directory so commands can rewrite its kb file.
fn scratch(name: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(fixtures().join(name)).unwrap() {
        let entry = entry.unwrap();
        std::fs::copy(entry.path(), dir.path().join(entry.file_name())).unwrap();
    }
    dir
}

struct Run {
    code: i32,
    stdout: String,
    took: Duration,
}

fn cnldoc(dir: &Path, args: &[&str]) -> Run {
    let started = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_cnldoc")).current_dir(dir).args(args).output().unwrap();
    Run { code: out.status.code().unwrap_or(-1), stdout: String::from_utf8_lossy(&out.stdout).into(), took: started.elapsed() }
}

fn json(run: &Run) -> Result<Value, String> {
    serde_json::from_str(&run.stdout).map_err(|e| format!("bad JSON ({e}): {}", run.stdout))
}

fn check(ok: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(why())
    }
}

fn scenario() -> Outcome {
    const SEVEN: [&str; 7] = [
        "If X is a direct subclass of Y then X is a subclass of Y.",
        "If X is a direct subclass of something that is a subclass of Y then X is a subclass of Y.",
        "EventHandler is a direct subclass of Handler.",
        "EmergencyHandler is a direct subclass of EventHandler.",
        "No subclass of Handler is maintained by a member of Group-A.",
        "Every member of Group-B is a member of Group-A.",
        "Brian is a member of Group-B.",
    ];
    let brian = "EmergencyHandler is maintained by Brian.";
    let dir = scratch("scenario");
    let run = cnldoc(dir.path(), &["--kb", "handler.kb", "--json", "add", brian]);
    check(run.code == 1, || format!("exit {} instead of 1", run.code))?;
    let body = json(&run)?;
    check(body["outcome"] == "rejected", || format!("outcome {}", body["outcome"]))?;
    let violations = body["report"]["violations"].as_array().cloned().unwrap_or_default();
    check(violations.len() == 1, || format!("{} violations", violations.len()))?;
    let support: Vec<String> =
        violations[0]["support"].as_array().unwrap().iter().map(|s| s["text"].as_str().unwrap().to_string()).collect();
    let mut expected: BTreeSet<String> = SEVEN.iter().map(|s| s.to_string()).collect();
    expected.insert(brian.into());
    check(support.len() == 8 && support.iter().cloned().collect::<BTreeSet<_>>() == expected, || {
        format!("support {support:?}")
    })?;
    check(run.took < SCENARIO_LIMIT, || format!("took {:?}", run.took))?;
    Ok(format!("rejected, 8 supporting statements, {:.0} ms", run.took.as_secs_f64() * 1000.0))
}

fn corpus() -> Outcome {
    let read = |name: &str| std::fs::read_to_string(fixtures().join("corpus").join(name)).unwrap();
    let cnl = Cnl::new(Lexicon::parse(&read("lexicon.lex")).map_err(|e| e.to_string())?);
    let text = read("corpus.txt");
    let sentences: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).collect();
    let failures: Vec<String> =
        sentences.iter().filter_map(|s| cnl.parse_text(s).err().map(|e| format!("{s}: {e}"))).collect();
    check(failures.is_empty(), || format!("{} failures: {}", failures.len(), failures.join("; ")))?;
    Ok(format!("{} sentences, one tree each", sentences.len()))
}

fn answers(run: &Run) -> Result<Vec<String>, String> {
    let body = json(run)?;
    Ok(body["answers"].as_array().ok_or("no answers field")?.iter().map(|a| a.as_str().unwrap().to_string()).collect())
}

fn mondrian() -> Outcome {
    let dir = scratch("mondrian");
    let kb = ["--kb", "mondrian.kb"];
    let ask = cnldoc(dir.path(), &[&kb[..], &["--json", "ask", "Which component is used by Core?"]].concat());
    let got = answers(&ask)?;
    check(got == ["Easel", "Events", "Layouts", "Shapes", "Utils"], || format!("answers {got:?}"))?;
    let denial = "No component is used by Core.";
    let before = cnldoc(dir.path(), &[&kb[..], &["add", denial]].concat());
    check(before.code == 1, || format!("denial before the patch: exit {}", before.code))?;
    let patch = cnldoc(dir.path(), &[&kb[..], &["ingest", "--replace", "mondrian-v543.dump"]].concat());
    check(patch.code == 0, || format!("patch ingest: exit {}: {}", patch.code, patch.stdout))?;
    let after = cnldoc(dir.path(), &[&kb[..], &["add", denial]].concat());
    check(after.code == 0, || format!("denial after the patch: exit {}: {}", after.code, after.stdout))?;
    Ok("answers {Easel, Events, Layouts, Shapes, Utils}; denial rejected, then accepted after the patch".into())
}

/// Every violation object anywhere in a check report.
fn violations_in(value: &Value, out: &mut Vec<Value>) {
    match value {
        Value::Object(map) => {
            if map.contains_key("bindings") && map.contains_key("sentence") {
                out.push(value.clone());
            }
            map.values().for_each(|v| violations_in(v, out));
        }
        Value::Array(items) => items.iter().for_each(|v| violations_in(v, out)),
        _ => {}
    }
}

fn drift() -> Outcome {
    let dir = scratch("mondrian");
    let kb = ["--kb", "mondrian.kb"];
    let clean = cnldoc(dir.path(), &[&kb[..], &["check"]].concat());
    check(clean.code == 0, || format!("fixture not clean before the delta: {}", clean.stdout))?;
    cnldoc(dir.path(), &[&kb[..], &["ingest", "drift-v525.dump"]].concat());
    let run = cnldoc(dir.path(), &[&kb[..], &["--json", "check"]].concat());
    check(run.code == 1, || format!("check exit {}", run.code))?;
    let mut found = Vec::new();
    violations_in(&json(&run)?, &mut found);
    let method = "MOChildrenShape-display-on-";
    let named = found.iter().any(|v| {
        v["sentence"] == "No method of Shapes uses Layouts."
            && v["bindings"].as_array().unwrap().iter().any(|b| b[1] == method)
    });
    check(named, || format!("no violation naming {method}: {}", run.stdout))?;
    Ok(format!("check exits 1, witness {method}"))
}

fn oracle_equivalence() -> Outcome {
    let (closures, queries) = oracle::discrepancies(oracle::INSTANCES);
    check(closures.is_empty() && queries.is_empty(), || {
        format!("{} closure and {} query discrepancies", closures.len(), queries.len())
    })?;
    Ok(format!("{} instances, {} queries, 0 discrepancies", oracle::INSTANCES, oracle::INSTANCES * 3))
}

fn counting_boundary() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut dump = String::from("E|method|Target-80\nE|method|Target-81\n");
    let mut edges = Vec::new();
    for i in 0..81 {
        dump.push_str(&format!("E|method|Caller-{i}\n"));
        edges.push((format!("Caller-{i}"), "Target-81"));
        if i < 80 {
            edges.push((format!("Caller-{i}"), "Target-80"));
        }
        if i % 3 == 0 {
            edges.push((format!("Caller-{i}"), "Target-81"));
        }
    }
    for (a, b) in &edges {
        dump.push_str(&format!("R|invokes|{a}|{b}\n"));
    }
    std::fs::write(dir.path().join("calls.dump"), dump).unwrap();
    std::fs::write(dir.path().join("calls.kb"), "@prelude builtin\n@dump calls.dump\n").unwrap();
    let session = Session::load(SessionConfig::for_kb(dir.path().join("calls.kb"))).map_err(|e| e.to_string())?;

    let mut callers: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for (a, b) in &edges {
        callers.entry(b).or_default().insert(a);
    }
    let expected: Vec<String> = callers.iter().filter(|(_, c)| c.len() > 80).map(|(t, _)| t.to_string()).collect();
    let got = session.ask("Which methods are invoked by more than 80 methods?").map_err(|e| e.to_string())?.answers;
    check(got == expected && got == ["Target-81"], || format!("answers {got:?}, expected {expected:?}"))?;
    Ok("only the 81-caller method is returned".into())
}

fn completion() -> Outcome {
    let text = std::fs::read_to_string(fixtures().join("corpus/lexicon.lex")).unwrap();
    let cnl = Cnl::new(Lexicon::parse(&text).map_err(|e| e.to_string())?);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let s = random_sentence(&cnl, &mut rng, 7).ok_or("empty grammar")?;
        let tokens = cnl.tokenize(&s).map_err(|e| format!("{s}: {e}"))?;
        for k in 0..tokens.len() {
            let set = cnl.complete(&tokens[..k]).map_err(|e| format!("{s} @{k}: {e}"))?;
            check(set.contains(&tokens[k].surface), || format!("`{s}`: `{}` not offered", tokens[k].surface))?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..1000 {
        let s = walk(&cnl, 25, |v| rng.gen_range(0..v.len())).map_err(|e| format!("walk: {e:?}"))?;
        let n = cnl.tokenize(&s).map_err(|e| format!("{s}: {e}"))?.len();
        check(n <= 25, || format!("`{s}` has {n} tokens"))?;
        cnl.parse_text(&s).map_err(|e| format!("{s}: {e}"))?;
    }
    Ok("1000 sentences, every prefix offers its next token; 1000 walks finish within 25 tokens".into())
}

fn performance() -> Outcome {
    let r = bench::run(BENCH_FACTS, 1).map_err(|e| e.to_string())?;
    let line = format!(
        "{} facts: load {:.3}s, add {:.4}s, check {:.3}s, detect {:.4}s",
        r.facts, r.load_seconds, r.add_seconds, r.check_seconds, r.detect_seconds
    );
    check(r.facts >= BENCH_FACTS, || format!("only {} facts", r.facts))?;
    check(r.add_seconds <= ADD_LIMIT && r.check_seconds <= CHECK_LIMIT && r.load_seconds <= LOAD_LIMIT, || {
        format!("over budget: {line}")
    })?;
    Ok(line)
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("incremental consistency scenario", scenario),
        ("parse corpus", corpus),
        ("component dependencies", mondrian),
        ("code drift detection", drift),
        ("oracle equivalence", oracle_equivalence),
        ("counting boundary", counting_boundary),
        ("completion properties", completion),
        ("performance budget", performance),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {reason}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

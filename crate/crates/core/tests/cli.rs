use std::path::Path;
use std::process::{Command, Output};

fn autocash(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_autocash"))
        .args(args)
        .env_remove("AUTOCASH_SEED")
        .output()
        .expect("binary runs")
}

fn data(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(rel).display().to_string()
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn portfolio_lists_every_algorithm() {
    let v = json(&autocash(&["portfolio"]));
    let ids: Vec<&str> = v["algorithms"].as_array().unwrap().iter().map(|a| a["id"].as_str().unwrap()).collect();
    assert_eq!(
        ids,
        ["majority-baseline", "k-nearest-neighbors", "decision-tree", "random-forest", "gaussian-naive-bayes", "logistic-regression"]
    );
}

#[test]
fn extract_prints_labelled_values() {
    let v = json(&autocash(&["extract", "--data", &data("small/iris.csv")]));
    let items = v.as_array().unwrap();
    assert_eq!(items.len(), 23);
    assert_eq!(items[0]["index"], 0);
    assert_eq!(items[0]["value"], 3.0);
    assert_eq!(items[4]["value"], 4.0);
    assert_eq!(items[8]["name"], "row_count");
    assert_eq!(items[8]["value"], 150.0);
}

#[test]
fn extract_with_delimiter_and_missing_token() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("semi.csv");
    std::fs::write(&path, "a;b;y\n1;NA;p\n2;x;q\n3;y;p\n").unwrap();
    let path = path.display().to_string();
    let v = json(&autocash(&["extract", "--data", &path, "--delimiter", ";", "--missing-token", "NA", "--target", "y"]));
    // one numeric and one categorical predictor
    assert_eq!(v[4]["value"], 1.0);
    assert_eq!(v[5]["value"], 1.0);
    assert_eq!(autocash(&["extract", "--data", &path, "--delimiter", ";;"]).status.code(), Some(1));
}

#[test]
fn exit_codes() {
    assert_eq!(autocash(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(autocash(&["extract"]).status.code(), Some(1));
    assert_eq!(autocash(&["extract", "--data", "/does/not/exist.csv"]).status.code(), Some(2));
    let target = autocash(&["extract", "--data", &data("small/iris.csv"), "--target", "nope"]);
    assert_eq!(target.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&target.stderr).contains("nope"));
    assert_eq!(autocash(&["--help"]).status.code(), Some(0));
}

#[test]
fn staged_commands_and_recommend() {
    let dir = tempfile::tempdir().unwrap();
    let p = |f: &str| dir.path().join(f).display().to_string();
    let corpus = data("corpus");
    let meta = autocash(&["--seed", "4", "evaluate-portfolio", "--data-dir", &corpus, "--out", &p("meta.json")]);
    assert!(meta.status.success());
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p("meta.json")).unwrap()).unwrap();
    assert_eq!(m["meta"]["rows"].as_array().unwrap().len(), 10);

    assert!(autocash(&["--seed", "4", "rewards", "--meta", &p("meta.json"), "--repeats", "1", "--out", &p("r.json")]).status.success());
    let r: Vec<f64> = serde_json::from_str(&std::fs::read_to_string(p("r.json")).unwrap()).unwrap();
    assert_eq!(r.len(), 23);
    assert!(r.iter().all(|x| (0.0..=1.0).contains(x)));

    let list = json(&autocash(&[
        "--seed", "4", "select-features", "--meta", &p("meta.json"), "--rewards", &p("r.json"), "--episodes", "30",
    ]));
    let list: Vec<u64> = list.as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    assert!(!list.is_empty() && list.len() <= 8);
    assert!(list.windows(2).all(|w| w[0] < w[1]));

    let train = ["--seed", "4", "train", "--data-dir", &corpus, "--repeats", "1", "--episodes", "30"];
    assert!(autocash(&[&train[..], &["--out", &p("a.json")]].concat()).status.success());
    assert!(autocash(&[&train[..], &["--out", &p("b.json")]].concat()).status.success());
    assert_eq!(std::fs::read(p("a.json")).unwrap(), std::fs::read(p("b.json")).unwrap());

    let rec = json(&autocash(&[
        "--seed", "4", "recommend", "--model", &p("a.json"), "--data", &data("small/iris.csv"), "--generations", "5",
    ]));
    let tuned = rec["tuning"]["outcome"]["f_score"].as_f64().unwrap();
    let default = rec["tuning"]["default_outcome"]["f_score"].as_f64().unwrap();
    assert!(tuned >= default);

    // a portfolio whose fingerprint differs is refused
    let mut portfolio = json(&autocash(&["portfolio"]));
    portfolio["algorithms"][1]["hyperparameters"][1]["tunable"] = serde_json::Value::Bool(false);
    std::fs::write(p("p.json"), portfolio.to_string()).unwrap();
    let refused = autocash(&["recommend", "--model", &p("a.json"), "--data", &data("small/iris.csv"), "--portfolio", &p("p.json")]);
    assert_eq!(refused.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&refused.stderr).contains("fingerprint"));

    let mut bytes = std::fs::read(p("a.json")).unwrap();
    bytes.truncate(bytes.len() / 3);
    std::fs::write(p("cut.json"), bytes).unwrap();
    let cut = autocash(&["recommend", "--model", &p("cut.json"), "--data", &data("small/iris.csv")]);
    assert_eq!(cut.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&cut.stderr).contains("checksum"));
}

#[test]
fn screen_writes_portfolio_flags() {
    let v = json(&autocash(&[
        "--seed", "2", "screen", "--alg", "decision-tree", "--data-dir", &data("small"), "--generations", "3", "--population", "6",
        "--threshold", "2",
    ]));
    let tree = v["algorithms"].as_array().unwrap().iter().find(|a| a["id"] == "decision-tree").unwrap().clone();
    // an unreachable threshold fixes every hyperparameter
    assert!(tree["hyperparameters"].as_array().unwrap().iter().all(|h| h["tunable"] == false));
}

#[test]
fn seed_from_environment() {
    let run = |seed: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_autocash"));
        cmd.args(["evaluate-portfolio", "--data-dir", &data("corpus")]).env_remove("AUTOCASH_SEED");
        if let Some(s) = seed {
            cmd.env("AUTOCASH_SEED", s);
        }
        cmd.output().unwrap().stdout
    };
    let flagged = Command::new(env!("CARGO_BIN_EXE_autocash"))
        .args(["--seed", "9", "evaluate-portfolio", "--data-dir", &data("corpus")])
        .env_remove("AUTOCASH_SEED")
        .output()
        .unwrap()
        .stdout;
    assert_eq!(run(Some("9")), flagged);
    assert_ne!(run(None), flagged);
}

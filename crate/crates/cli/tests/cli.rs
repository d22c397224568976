//! End-to-end CLI behaviour: exit codes, file round trips, and the printed
//! metric line.

use std::path::{Path, PathBuf};
use std::process::Command;

use dialect_core::corpus::{save_corpus, split_corpus};
use dialect_core::probability::load_probability_matrix;
use dialect_core::synth::{toy_corpus, ToyCorpusConfig};

fn dialect_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dialect"))
}

struct Fixture {
    _dir: tempfile::TempDir,
    root: PathBuf,
    labels: PathBuf,
    train: PathBuf,
    dev: PathBuf,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        let corpus = toy_corpus(&ToyCorpusConfig { n_examples: 90, seed: 8, ..Default::default() });
        let (train, dev) = split_corpus(&corpus, 0.8, 17).unwrap();
        let labels = root.join("labels.txt");
        std::fs::write(&labels, corpus.registry().labels().join("\n") + "\n").unwrap();
        let train_path = root.join("train.tsv");
        save_corpus(&train, &train_path).unwrap();
        let dev_path = root.join("dev.tsv");
        save_corpus(&dev, &dev_path).unwrap();
        Fixture { _dir: dir, root, labels, train: train_path, dev: dev_path }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn train_model(&self, kind: &str, out: &str) -> PathBuf {
        let model = self.path(out);
        let output = dialect_bin()
            .args(["train", "--labels"])
            .arg(&self.labels)
            .arg("--train")
            .arg(&self.train)
            .arg("--model-out")
            .arg(&model)
            .args(["--model-kind", kind, "--seed", "11", "--set", "epochs=5"])
            .output()
            .unwrap();
        assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
        model
    }

    fn predict(&self, model: &Path, input: &Path, probs: &str, labels_out: &str) -> (PathBuf, PathBuf) {
        let probs = self.path(probs);
        let labels_out = self.path(labels_out);
        let output = dialect_bin()
            .args(["predict", "--model"])
            .arg(model)
            .arg("--labels")
            .arg(&self.labels)
            .arg("--input")
            .arg(input)
            .arg("--probs-out")
            .arg(&probs)
            .arg("--labels-out")
            .arg(&labels_out)
            .output()
            .unwrap();
        assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
        (probs, labels_out)
    }
}

#[test]
fn train_prints_per_class_counts_and_writes_loadable_model() {
    let fx = Fixture::new();
    let model = fx.path("mnb.model");
    let output = dialect_bin()
        .args(["train", "--labels"])
        .arg(&fx.labels)
        .arg("--train")
        .arg(&fx.train)
        .arg("--model-out")
        .arg(&model)
        .args(["--model-kind", "mnb"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    let mut lines = stdout.lines();
    for label in ["AA", "BB", "CC"] {
        let line = lines.next().unwrap();
        assert!(line.starts_with(&format!("{label}\t")), "{line}");
    }
    assert!(dialect_core::container::load_model(&model).is_ok());
}

#[test]
fn unknown_model_kind_exits_2_naming_the_kind() {
    let fx = Fixture::new();
    let output = dialect_bin()
        .args(["train", "--labels"])
        .arg(&fx.labels)
        .arg("--train")
        .arg(&fx.train)
        .arg("--model-out")
        .arg(fx.path("x.model"))
        .args(["--model-kind", "frobnicator"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("frobnicator"));
}

#[test]
fn missing_input_file_exits_1() {
    let fx = Fixture::new();
    let output = dialect_bin()
        .args(["stats", "--input"])
        .arg(fx.path("does-not-exist.tsv"))
        .arg("--labels")
        .arg(&fx.labels)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn stochastic_kind_without_seed_exits_2() {
    let fx = Fixture::new();
    let output = dialect_bin()
        .args(["train", "--labels"])
        .arg(&fx.labels)
        .arg("--train")
        .arg(&fx.train)
        .arg("--model-out")
        .arg(fx.path("lr.model"))
        .args(["--model-kind", "logreg"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("seed"));
}

#[test]
fn predict_output_is_reloadable_and_dummy_is_constant() {
    let fx = Fixture::new();
    let model = fx.train_model("dummy", "dummy.model");
    let (probs, labels_out) = fx.predict(&model, &fx.dev, "p.csv", "l.tsv");
    let registry = dialect_core::corpus::LabelRegistry::from_file(&fx.labels).unwrap();
    let matrix = load_probability_matrix::<f64>(&probs, &registry).unwrap();
    assert_eq!(matrix.n_rows(), 18);
    let labels_text = std::fs::read_to_string(&labels_out).unwrap();
    let labels: Vec<&str> = labels_text
        .lines()
        .map(|l| l.split_once('\t').unwrap().1)
        .collect();
    assert!(labels.windows(2).all(|w| w[0] == w[1]), "dummy not constant");
}

#[test]
fn predict_on_empty_corpus_writes_header_only_csv() {
    let fx = Fixture::new();
    let model = fx.train_model("mnb", "mnb2.model");
    let empty = fx.path("empty.tsv");
    std::fs::write(&empty, "id\ttext\n").unwrap();
    let (probs, labels_out) = fx.predict(&model, &empty, "pe.csv", "le.tsv");
    assert_eq!(std::fs::read_to_string(&probs).unwrap(), "id,AA,BB,CC\n");
    assert_eq!(std::fs::read_to_string(&labels_out).unwrap(), "");
}

#[test]
fn config_file_drives_training_and_unknown_keys_fail() {
    let fx = Fixture::new();
    let cfg = fx.path("run.cfg");
    std::fs::write(&cfg, "model = logreg\nseed = 4\nepochs = 5\n").unwrap();
    let model = fx.path("cfg.model");
    let output = dialect_bin()
        .args(["train", "--labels"])
        .arg(&fx.labels)
        .arg("--train")
        .arg(&fx.train)
        .arg("--model-out")
        .arg(&model)
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));

    let bad = fx.path("bad.cfg");
    std::fs::write(&bad, "modle = mnb\n").unwrap();
    let output = dialect_bin()
        .args(["train", "--labels"])
        .arg(&fx.labels)
        .arg("--train")
        .arg(&fx.train)
        .arg("--model-out")
        .arg(fx.path("bad.model"))
        .arg("--config")
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("modle"));
}

#[test]
fn evaluate_prints_the_worked_metric_line() {
    // gold [A, A, B] / predicted [A, B, B]: all three metrics 2/3.
    let dir = tempfile::tempdir().unwrap();
    let labels = dir.path().join("labels.txt");
    std::fs::write(&labels, "A\nB\n").unwrap();
    let gold = dir.path().join("gold.tsv");
    std::fs::write(&gold, "id\ttext\tlabel\nt1\tx\tA\nt2\ty\tA\nt3\tz\tB\n").unwrap();
    let pred = dir.path().join("pred.tsv");
    std::fs::write(&pred, "t1\tA\nt2\tB\nt3\tB\n").unwrap();
    let report = dir.path().join("report.json");
    let output = dialect_bin()
        .args(["evaluate", "--gold"])
        .arg(&gold)
        .arg("--pred")
        .arg(&pred)
        .arg("--labels")
        .arg(&labels)
        .arg("--report-out")
        .arg(&report)
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert_eq!(
        stdout.trim(),
        "accuracy=0.6667 macro_f1=0.6667 micro_f1=0.6667"
    );
    assert!(report.exists());
}

#[test]
fn evaluate_with_missing_id_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let labels = dir.path().join("labels.txt");
    std::fs::write(&labels, "A\nB\n").unwrap();
    let gold = dir.path().join("gold.tsv");
    std::fs::write(&gold, "id\ttext\tlabel\nt1\tx\tA\nt2\ty\tB\n").unwrap();
    let pred = dir.path().join("pred.tsv");
    std::fs::write(&pred, "t1\tA\n").unwrap();
    let output = dialect_bin()
        .args(["evaluate", "--gold"])
        .arg(&gold)
        .arg("--pred")
        .arg(&pred)
        .arg("--labels")
        .arg(&labels)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("t2"));
}

#[test]
fn ensemble_soft_of_four_files_and_id_mismatch_rejection() {
    let fx = Fixture::new();
    let model = fx.train_model("mnb", "mnb3.model");
    let (probs, _) = fx.predict(&model, &fx.dev, "p1.csv", "l1.tsv");
    // Four copies of the same matrix: the soft vote must reproduce it.
    let combined = fx.path("soft.csv");
    let labels_out = fx.path("soft.tsv");
    let output = dialect_bin()
        .args(["ensemble", "--mode", "soft", "--labels"])
        .arg(&fx.labels)
        .arg("--probs-out")
        .arg(&combined)
        .arg("--labels-out")
        .arg(&labels_out)
        .arg(&probs)
        .arg(&probs)
        .arg(&probs)
        .arg(&probs)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let registry = dialect_core::corpus::LabelRegistry::from_file(&fx.labels).unwrap();
    let a = load_probability_matrix::<f64>(&probs, &registry).unwrap();
    let b = load_probability_matrix::<f64>(&combined, &registry).unwrap();
    assert_eq!(a, b);

    // Mismatched ids: exit 2.
    let other = fx.path("other.csv");
    let mut text = String::from("id,AA,BB,CC\n");
    text.push_str("zz,0.5,0.25,0.25\n");
    std::fs::write(&other, text).unwrap();
    let output = dialect_bin()
        .args(["ensemble", "--mode", "soft", "--labels"])
        .arg(&fx.labels)
        .arg("--labels-out")
        .arg(fx.path("x.tsv"))
        .arg(&probs)
        .arg(&other)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn ensemble_hard_majority() {
    let dir = tempfile::tempdir().unwrap();
    let labels = dir.path().join("labels.txt");
    std::fs::write(&labels, "A\nB\n").unwrap();
    let make = |name: &str, rows: &[(f64, f64)]| -> PathBuf {
        let path = dir.path().join(name);
        let mut text = String::from("id,A,B\n");
        for (i, (a, b)) in rows.iter().enumerate() {
            text.push_str(&format!("t{i},{a},{b}\n"));
        }
        std::fs::write(&path, text).unwrap();
        path
    };
    let m1 = make("m1.csv", &[(0.9, 0.1), (0.2, 0.8)]);
    let m2 = make("m2.csv", &[(0.6, 0.4), (0.7, 0.3)]);
    let m3 = make("m3.csv", &[(0.1, 0.9), (0.3, 0.7)]);
    let out = dir.path().join("hard.tsv");
    let output = dialect_bin()
        .args(["ensemble", "--mode", "hard", "--labels"])
        .arg(&labels)
        .arg("--labels-out")
        .arg(&out)
        .arg(&m1)
        .arg(&m2)
        .arg(&m3)
        .output()
        .unwrap();
    assert!(output.status.success());
    // t0: votes A, A, B -> A; t1: votes B, A, B -> B.
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "t0\tA\nt1\tB\n");
}

#[test]
fn augment_balances_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let labels = dir.path().join("labels.txt");
    std::fs::write(&labels, "A\nB\n").unwrap();
    let input = dir.path().join("in.tsv");
    std::fs::write(
        &input,
        "id\ttext\tlabel\nt1\tfoo bar baz\tA\nt2\tqux quux\tA\nt3\tone two three\tB\n",
    )
    .unwrap();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("out{run}.tsv"));
        let output = dialect_bin()
            .args(["augment", "--input"])
            .arg(&input)
            .arg("--labels")
            .arg(&labels)
            .args(["--seed", "9"])
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert!(output.status.success());
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);

    // Already balanced input: output bytes equal the input bytes.
    let balanced = dir.path().join("balanced.tsv");
    std::fs::write(&balanced, "id\ttext\tlabel\nt1\tfoo bar\tA\nt2\tbaz qux\tB\n").unwrap();
    let out = dir.path().join("same.tsv");
    let output = dialect_bin()
        .args(["augment", "--input"])
        .arg(&balanced)
        .arg("--labels")
        .arg(&labels)
        .args(["--seed", "9"])
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success());
    assert_eq!(
        std::fs::read_to_string(&out).unwrap(),
        std::fs::read_to_string(&balanced).unwrap()
    );
}

#[test]
fn rules_override_and_identity_without_matches() {
    let dir = tempfile::tempdir().unwrap();
    let labels = dir.path().join("labels.txt");
    std::fs::write(&labels, "EG\nSD\n").unwrap();
    let corpus = dir.path().join("dev.tsv");
    std::fs::write(
        &corpus,
        "id\ttext\nt1\tcall me يازول now\nt2\tnothing here\n",
    )
    .unwrap();
    let pred = dir.path().join("pred.tsv");
    std::fs::write(&pred, "t1\tEG\nt2\tEG\n").unwrap();
    let rules = dir.path().join("rules.tsv");
    std::fs::write(&rules, "يازول\tSD\t1\n").unwrap();
    let out = dir.path().join("out.tsv");
    let output = dialect_bin()
        .args(["rules", "--rules"])
        .arg(&rules)
        .arg("--input")
        .arg(&corpus)
        .arg("--pred")
        .arg(&pred)
        .arg("--labels")
        .arg(&labels)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "t1\tSD\nt2\tEG\n");
}

#[test]
fn stats_prints_counts_in_registry_order() {
    let fx = Fixture::new();
    let output = dialect_bin()
        .args(["stats", "--input"])
        .arg(&fx.train)
        .arg("--labels")
        .arg(&fx.labels)
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    let counts: Vec<usize> = stdout
        .lines()
        .map(|l| l.split_once('\t').unwrap().1.parse().unwrap())
        .collect();
    assert_eq!(counts.iter().sum::<usize>(), 72);
}

#[test]
fn embedding_model_round_trips_through_the_cli() {
    let fx = Fixture::new();
    let corpus = toy_corpus(&ToyCorpusConfig { n_examples: 90, seed: 8, ..Default::default() });
    let table = dialect_core::synth::toy_embedding_table(&corpus, 8);
    let embed_path = fx.path("vectors.txt");
    dialect_core::embedding::save_embeddings(&table, &embed_path).unwrap();

    let model = fx.path("embed.model");
    let output = dialect_bin()
        .args(["train", "--labels"])
        .arg(&fx.labels)
        .arg("--train")
        .arg(&fx.train)
        .arg("--model-out")
        .arg(&model)
        .args(["--model-kind", "embed-logreg", "--seed", "3"])
        .arg("--embeddings")
        .arg(&embed_path)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    // The embeddings path is recorded, so predict works without the flag.
    let (probs, _) = fx.predict(&model, &fx.dev, "pe2.csv", "le2.tsv");
    let registry = dialect_core::corpus::LabelRegistry::from_file(&fx.labels).unwrap();
    assert!(load_probability_matrix::<f64>(&probs, &registry).is_ok());
}

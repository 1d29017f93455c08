mod common;

use std::fs;
use std::path::Path;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use radext::formats::{format_emissions, read_tagged_corpus, write_tagged_corpus};
use radext::model_file::save_model;
use radext_core::EmissionMatrix;

fn write(dir: &Path, name: &str, content: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, content).unwrap();
    p.to_string_lossy().into_owned()
}

fn json_lines(path: &Path) -> Vec<serde_json::Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn toy_files(dir: &Path) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    write_tagged_corpus(&toy_corpus(&mut rng, 150, "t"), &dir.join("train.tsv")).unwrap();
    write_tagged_corpus(&toy_corpus(&mut rng, 40, "d"), &dir.join("dev.tsv")).unwrap();
}

#[test]
fn train_on_toy_corpus_reaches_full_dev_f1() {
    let dir = tempfile::tempdir().unwrap();
    toy_files(dir.path());
    let o = radext(
        &["train", "--train", "train.tsv", "--dev", "dev.tsv", "--model-out", "m.json", "--epochs", "15", "--seed", "3"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("epoch")).count(), 15);
    assert!(out.contains("dev F1 100.00"), "{out}");

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("m.json.report.json")).unwrap()).unwrap();
    let sel = report["selected_epoch"].as_u64().unwrap() as usize;
    assert_eq!(report["dev_f1"][sel].as_f64(), Some(100.0));

    // decoding the dev set with the trained model reproduces it
    let dev = read_tagged_corpus(&dir.path().join("dev.tsv")).unwrap();
    let raw: String = dev.iter().map(|(s, _)| format!("{}\t{}\n", s.id, s.text())).collect();
    write(dir.path(), "dev.txt", &raw);
    let o = radext(&["tag", "--model", "m.json", "--input", "dev.txt", "--output", "tagged.tsv", "--jobs", "3"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = radext(&["eval", "--pred", "tagged.tsv", "--gold", "dev.tsv"], dir.path());
    assert!(stdout(&o).lines().last().unwrap().contains("100.00"), "{}", stdout(&o));
}

#[test]
fn training_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    toy_files(dir.path());
    for name in ["a.json", "b.json"] {
        let o = radext(
            &["train", "--train", "train.tsv", "--dev", "dev.tsv", "--model-out", name, "--epochs", "2", "--seed", "5"],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    assert_eq!(
        fs::read(dir.path().join("a.json")).unwrap(),
        fs::read(dir.path().join("b.json")).unwrap()
    );
}

#[test]
fn train_usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    toy_files(dir.path());
    let o = radext(&["train", "--train", "train.tsv", "--dev", "nope.tsv", "--model-out", "m.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nope.tsv"), "{}", stderr(&o));

    let o = radext(
        &["train", "--train", "train.tsv", "--dev", "dev.tsv", "--model-out", "m.json", "--epochs", "0"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));

    write(dir.path(), "bad.tsv", "肺 O B-P\n");
    let o = radext(&["train", "--train", "bad.tsv", "--dev", "dev.tsv", "--model-out", "m.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 1"), "{}", stderr(&o));

    let o = radext(&["train", "--train", "train.tsv", "--dev", "dev.tsv", "--model-out", "m.json", "--bogus"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("m.json").exists());
}

#[test]
fn diverging_training_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    toy_files(dir.path());
    let o = radext(
        &["train", "--train", "train.tsv", "--dev", "dev.tsv", "--model-out", "m.json", "--epochs", "3",
          "--initial-rate", "1e308", "--decayed-rate", "1e308"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("diverged"));
    assert!(!dir.path().join("m.json").exists());
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    toy_files(dir.path());
    write(dir.path(), "c.toml", "[train]\nepochs = 3\nseed = 2\n");
    let o = radext(
        &["--config", "c.toml", "train", "--train", "train.tsv", "--dev", "dev.tsv", "--model-out", "m.json"],
        dir.path(),
    );
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("epoch")).count(), 3);
    let o = radext(
        &["train", "--config", "c.toml", "--epochs", "1", "--train", "train.tsv", "--dev", "dev.tsv", "--model-out", "m.json"],
        dir.path(),
    );
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("epoch")).count(), 1);

    write(dir.path(), "bad.toml", "[train]\nepochs = 0\n");
    let o = radext(
        &["--config", "bad.toml", "train", "--train", "train.tsv", "--dev", "dev.tsv", "--model-out", "m.json"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

fn fig_setup(dir: &Path) {
    let opacity = tagged("opacity", OPACITY_TEXT, OPACITY_TAGS);
    let occlusion = tagged("occlusion", OCCLUSION_TEXT, OCCLUSION_TAGS);
    save_model(&lookup_model(&[opacity, occlusion]), &dir.join("m.json")).unwrap();
    write(dir, "dict.txt", "# secondary parts\n支气管\n");
    write(dir, "in.txt", &format!("opacity\t{OPACITY_TEXT}\nocclusion\t{OCCLUSION_TEXT}\n"));
}

#[test]
fn extract_worked_examples() {
    let dir = tempfile::tempdir().unwrap();
    fig_setup(dir.path());
    let o = radext(
        &["extract", "--model", "m.json", "--dict", "dict.txt", "--input", "in.txt", "--output", "q.jsonl", "--relations", "r.jsonl"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let q = json_lines(&dir.path().join("q.jsonl"));
    assert_eq!(q.len(), 2);
    assert_eq!(q[0]["sentence_id"], "opacity");
    assert_eq!(q[0]["pp"]["text"], "右上肺");
    assert!(q[0]["sp"].is_null());
    assert_eq!(q[0]["d"]["text"], "多发");
    assert_eq!(q[0]["abn"]["text"], "斑片状密影");
    assert_eq!(q[1]["sp"]["text"], "支气管");
    assert_eq!(q[1]["d"]["text"], "部分");

    let r = json_lines(&dir.path().join("r.jsonl"));
    let occlusion: Vec<_> = r.iter().filter(|v| v["sentence_id"] == "occlusion").collect();
    assert_eq!(occlusion.len(), 4);
    assert!(occlusion
        .iter()
        .any(|v| v["kind"] == "P2P" && v["head"]["text"] == "支气管" && v["tail"]["text"] == "右上肺"));
}

#[test]
fn dictionary_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    fig_setup(dir.path());
    let args = ["extract", "--model", "m.json", "--input", "in.txt", "--output", "q.jsonl"];
    let o = radext(&args, dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = std::process::Command::new(env!("CARGO_BIN_EXE_radext"))
        .args(args)
        .current_dir(dir.path())
        .env("RADEXT_DICT", "dict.txt")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn external_emissions_drive_decoding() {
    let dir = tempfile::tempdir().unwrap();
    fig_setup(dir.path());
    // zero-weight model, one-hot emissions on the gold tags
    let (s, t) = tagged("opacity", OPACITY_TEXT, OPACITY_TAGS);
    let mut e = EmissionMatrix::zeros("opacity", s.len()).unwrap();
    for (i, tag) in t.tags.iter().enumerate() {
        e.as_mut_slice()[i * 7 + tag.index()] = 5.0;
    }
    write(dir.path(), "e.txt", &format_emissions(&[e]));
    write(dir.path(), "one.txt", &format!("opacity\t{OPACITY_TEXT}\n"));
    let zero = radext_core::Model::zeros(radext_core::FeatureVocabulary::from_names(vec!["<UNK>".into()]).unwrap());
    save_model(&zero, &dir.path().join("zero.json")).unwrap();
    let o = radext(
        &["tag", "--model", "zero.json", "--input", "one.txt", "--output", "t.tsv", "--emission-source", "external", "--emissions", "e.txt"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(read_tagged_corpus(&dir.path().join("t.tsv")).unwrap()[0].1, t);

    // row count disagreeing with the sentence length
    write(dir.path(), "short.txt", "opacity 1 7\n0 0 0 0 0 0 0\n");
    let o = radext(
        &["tag", "--model", "zero.json", "--input", "one.txt", "--output", "t.tsv", "--emission-source", "external", "--emissions", "short.txt"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_input_gives_empty_outputs() {
    let dir = tempfile::tempdir().unwrap();
    fig_setup(dir.path());
    write(dir.path(), "empty.txt", "");
    let o = radext(
        &["extract", "--model", "m.json", "--dict", "dict.txt", "--input", "empty.txt", "--output", "q.jsonl", "--relations", "r.jsonl"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(dir.path().join("q.jsonl")).unwrap(), "");
    assert_eq!(fs::read_to_string(dir.path().join("r.jsonl")).unwrap(), "");
}

#[test]
fn tag_then_extract_equals_extract() {
    let dir = tempfile::tempdir().unwrap();
    fig_setup(dir.path());
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let extra: String = toy_corpus(&mut rng, 30, "x").iter().map(|(s, _)| format!("{}\n", s.text())).collect();
    let input = fs::read_to_string(dir.path().join("in.txt")).unwrap() + &extra;
    write(dir.path(), "in.txt", &input);

    let o = radext(&["tag", "--model", "m.json", "--input", "in.txt", "--output", "t.tsv"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let a = radext(
        &["extract", "--tagged", "--dict", "dict.txt", "--input", "t.tsv", "--output", "q1.jsonl", "--relations", "r1.jsonl"],
        dir.path(),
    );
    let b = radext(
        &["extract", "--model", "m.json", "--dict", "dict.txt", "--input", "in.txt", "--output", "q2.jsonl", "--relations", "r2.jsonl", "--jobs", "4"],
        dir.path(),
    );
    assert_eq!((a.status.code(), b.status.code()), (Some(0), Some(0)));
    let read = |n: &str| fs::read_to_string(dir.path().join(n)).unwrap();
    assert!(!read("q1.jsonl").is_empty());
    assert_eq!(read("q1.jsonl"), read("q2.jsonl"));
    assert_eq!(read("r1.jsonl"), read("r2.jsonl"));
}

#[test]
fn eval_identical_corpora_scores_100() {
    let dir = tempfile::tempdir().unwrap();
    fig_setup(dir.path());
    let corpus = vec![tagged("opacity", OPACITY_TEXT, OPACITY_TAGS), tagged("occlusion", OCCLUSION_TEXT, OCCLUSION_TAGS)];
    write_tagged_corpus(&corpus, &dir.path().join("g.tsv")).unwrap();
    for mode in ["entity", "relation", "agreement"] {
        let o = radext(
            &["eval", "--pred", "g.tsv", "--gold", "g.tsv", "--mode", mode, "--dict", "dict.txt", "--format", "json"],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(0), "{mode}: {}", stderr(&o));
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["mode"], mode);
    }
    let o = radext(&["eval", "--pred", "g.tsv", "--gold", "g.tsv", "--mode", "relation"], dir.path());
    assert_eq!(o.status.code(), Some(2), "relation mode without a dictionary");
}

#[test]
fn eval_prints_two_decimals() {
    // two of four predictions correct against eight gold entities
    let dir = tempfile::tempdir().unwrap();
    let gold = "# id = a\n右\tB-P\n见\tO\n多\tB-D\n斑\tB-Abn\n\n# id = b\n肺\tB-P\n见\tO\n少\tB-D\n影\tB-Abn\n\n# id = c\n左\tB-P\n叶\tO\n结\tB-Abn\n节\tO\n";
    let pred = "# id = a\n右\tB-P\n见\tB-P\n多\tB-D\n斑\tB-P\n\n# id = b\n肺\tO\n见\tO\n少\tO\n影\tO\n\n# id = c\n左\tO\n叶\tO\n结\tO\n节\tO\n";
    write(dir.path(), "g.tsv", gold);
    write(dir.path(), "p.tsv", pred);
    let o = radext(&["eval", "--pred", "p.tsv", "--gold", "g.tsv", "--report", "rep.json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let overall = stdout(&o).lines().find(|l| l.starts_with("Overall")).unwrap().to_string();
    let cols: Vec<&str> = overall.split_whitespace().collect();
    assert_eq!(&cols[1..4], ["50.00", "25.00", "33.33"]);
    let rep: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("rep.json")).unwrap()).unwrap();
    assert_eq!(rep["scores"]["overall"]["correct"], 2);
}

#[test]
fn eval_rejects_misaligned_corpora() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.tsv", "# id = x\n肺\tO\n");
    write(dir.path(), "b.tsv", "# id = y\n肺\tO\n");
    let o = radext(&["eval", "--pred", "a.tsv", "--gold", "b.tsv"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sentence mismatch"), "{}", stderr(&o));
}

#[test]
fn errors_command_classifies_fixture() {
    let dir = tempfile::tempdir().unwrap();
    // TYPE: 全程 gold D, predicted P. LONG: 肝 predicted as 肝、.
    // SPURIOUS: 两肺 predicted. MISSING: 结石.
    let gold = "# id = s1\n食\tB-P\n管\tI-P\n全\tB-D\n程\tI-D\n扩\tB-Abn\n张\tI-Abn\n\n# id = s2\n肝\tB-P\n、\tO\n胆\tB-P\n囊\tI-P\n见\tO\n结\tB-Abn\n石\tI-Abn\n\n# id = s3\n两\tO\n肺\tO\n";
    let pred = "# id = s1\n食\tB-P\n管\tI-P\n全\tB-P\n程\tI-P\n扩\tB-Abn\n张\tI-Abn\n\n# id = s2\n肝\tB-P\n、\tI-P\n胆\tB-P\n囊\tI-P\n见\tO\n结\tO\n石\tO\n\n# id = s3\n两\tB-P\n肺\tI-P\n";
    write(dir.path(), "g.tsv", gold);
    write(dir.path(), "p.tsv", pred);
    let o = radext(
        &["errors", "--pred", "p.tsv", "--gold", "g.tsv", "--format", "json", "--csv", "cm.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let counts: Vec<u64> = v["summary"]["by_category"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["count"].as_u64().unwrap())
        .collect();
    assert_eq!(counts, [1, 1, 1, 1]);
    assert_eq!(v["exact"], 3);
    let csv = fs::read_to_string(dir.path().join("cm.csv")).unwrap();
    assert!(csv.starts_with("gold\\predicted,P,D,Abn,O"));
    assert!(csv.contains("\nD,1,0,0,0\n"), "{csv}");

    let text = radext(&["eval", "--mode", "errors", "--pred", "p.tsv", "--gold", "g.tsv"], dir.path());
    assert!(stdout(&text).contains("TYPE"));
}

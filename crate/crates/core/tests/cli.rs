use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use phoneval::io_formats::Report;
use phoneval::phoneset::CategorizationName;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn phoneval(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phoneval"))
        .args(args)
        .output()
        .expect("spawn phoneval")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn score(reference: &Path, hypothesis: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["score", "--ref", reference.to_str().unwrap(), "--hyp", hypothesis.to_str().unwrap()];
    args.extend_from_slice(extra);
    phoneval(&args)
}

#[test]
fn identical_corpora_score_zero() {
    let r = fixture("corpus_ref.txt");
    let report = Report::from_json(&stdout(&score(&r, &r, &[]))).unwrap();
    assert_eq!(report.breakdowns.len(), 3);
    for b in &report.breakdowns {
        assert_eq!(b.totals.per_raw, 0.0);
        assert!(b.per_class.iter().all(|c| c.sub + c.del + c.ins == 0));
    }
}

#[test]
fn single_substitution_is_ten_percent() {
    let out = score(
        &fixture("one_sub_ref.txt"),
        &fixture("one_sub_hyp.txt"),
        &["--categorizations", "eight_class"],
    );
    let report = Report::from_json(&stdout(&out)).unwrap();
    let b = &report.breakdowns[0];
    assert_eq!(b.categorization, CategorizationName::EightClass);
    assert_eq!(b.totals.per_percent, 10.0);
    let vow = b.per_class.iter().find(|c| c.class == "vow").unwrap();
    assert_eq!((vow.sub, vow.per_percent), (1, 10.0));
}

#[test]
fn csv_breakdown_has_total_rows() {
    let out = score(
        &fixture("one_sub_ref.txt"),
        &fixture("one_sub_hyp.txt"),
        &["--format", "csv"],
    );
    let text = stdout(&out);
    assert!(text.starts_with("categorization,class,sub,del,ins,"));
    assert!(text.contains("eight_class,total,1,0,0,10,0.1,10,"));
    assert!(text.contains("voicing,total,1,0,0,10,0.1,10,"));
}

#[test]
fn missing_hypothesis_file_is_input_error() {
    let out = score(&fixture("corpus_ref.txt"), &fixture("does_not_exist.txt"), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("does_not_exist.txt"));
}

#[test]
fn disjoint_ids_exit_three() {
    let out = score(&fixture("one_sub_ref.txt"), &fixture("tie_hyp.txt"), &[]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_categorization_is_input_error() {
    let r = fixture("one_sub_ref.txt");
    let out = score(&r, &r, &["--categorizations", "manner"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn timit_tree_with_fold_map() {
    let out = score(
        &fixture("phn"),
        &fixture("phn_hyp.txt"),
        &["--fold-map", fixture("timit.fold").to_str().unwrap()],
    );
    let report = Report::from_json(&stdout(&out)).unwrap();
    assert_eq!(report.utterances, Some(2));
    let b = &report.breakdowns[0];
    assert_eq!((b.totals.ref_count, b.totals.sub), (10, 1));
    let plo = b.per_class.iter().find(|c| c.class == "plo").unwrap();
    assert_eq!(plo.sub, 1);

    let unfolded = score(&fixture("phn"), &fixture("phn_hyp.txt"), &[]);
    assert_eq!(unfolded.status.code(), Some(2));
}

#[test]
fn confusion_rankings() {
    let out = phoneval(&[
        "confusion",
        "--ref",
        fixture("vowel_subs_ref.txt").to_str().unwrap(),
        "--hyp",
        fixture("vowel_subs_hyp.txt").to_str().unwrap(),
    ]);
    let report = Report::from_json(&stdout(&out)).unwrap();
    let eight = report
        .confusion
        .iter()
        .find(|c| c.categorization == CategorizationName::EightClass)
        .unwrap();
    let vow = eight.rankings.iter().find(|r| r.class == "vow").unwrap();
    assert_eq!(vow.rendered, "vow, —");
    let v = eight.labels.iter().position(|l| l == "vow").unwrap();
    assert_eq!(eight.counts[v][v], 2);

    let out = phoneval(&[
        "confusion",
        "--ref",
        fixture("tie_ref.txt").to_str().unwrap(),
        "--hyp",
        fixture("tie_hyp.txt").to_str().unwrap(),
        "--format",
        "csv",
    ]);
    let text = stdout(&out);
    assert!(text.contains("# eight_class\n"));
    assert!(text.contains("\"vow, dip/sem\""), "{text}");
}

fn write_report(dir: &Path, hyp: &str, categorizations: &str) -> PathBuf {
    let path = dir.join(hyp).with_extension("json");
    let out = score(
        &fixture("gain_ref.txt"),
        &fixture(hyp),
        &["--categorizations", categorizations, "--out", path.to_str().unwrap()],
    );
    stdout(&out);
    path
}

#[test]
fn compare_with_itself_gives_zero_gains() {
    let dir = tempfile::tempdir().unwrap();
    let base = write_report(dir.path(), "gain_baseline_hyp.txt", "eight_class,voicing");
    let out = phoneval(&["compare", "--baseline", base.to_str().unwrap(), "--improved", base.to_str().unwrap()]);
    let report = Report::from_json(&stdout(&out)).unwrap();
    for g in report.gain_reports() {
        assert_eq!(g.average, Some(0.0));
        assert!(g.per_class.iter().all(|c| c.gain.map_or(true, |x| x == 0.0)));
    }
}

#[test]
fn compare_rejects_mismatched_categorizations() {
    let dir = tempfile::tempdir().unwrap();
    let base = write_report(dir.path(), "gain_baseline_hyp.txt", "eight_class");
    let improved = write_report(dir.path(), "gain_improved_hyp.txt", "voicing");
    let out = phoneval(&[
        "compare",
        "--baseline",
        base.to_str().unwrap(),
        "--improved",
        improved.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn compare_rejects_garbage() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = phoneval(&["compare", "--baseline", bad.to_str().unwrap(), "--improved", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn synth_default_bank_shape() {
    let text = stdout(&phoneval(&["filters", "synth"]));
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 128);
    assert!(rows.iter().all(|r| r.split(',').count() == 129));
}

#[test]
fn synth_json_lists_parameters() {
    let text = stdout(&phoneval(&["filters", "synth", "--n", "8", "--format", "json", "--window", "hamming"]));
    let dump: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(dump["filters"].as_array().unwrap().len(), 8);
    assert_eq!(dump["window"], "hamming");
}

#[test]
fn response_for_one_filter() {
    let text = stdout(&phoneval(&["filters", "response", "--b", "200", "--fc", "1000", "--n-fft", "1024"]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("filter,freq_hz,magnitude"));
    assert_eq!(lines.count(), 513);
}

#[test]
fn gradcheck_single_filter_passes() {
    let out = phoneval(&["filters", "gradcheck", "--b", "200", "--fc", "1000"]);
    assert!(stdout(&out).contains("max relative gradient error"));
}

#[test]
fn gradcheck_whole_mel_bank_passes() {
    let out = phoneval(&["filters", "gradcheck", "--window", "hamming"]);
    stdout(&out);
}

#[test]
fn even_length_is_input_error() {
    let out = phoneval(&["filters", "synth", "--len", "128"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn bandwidth_requires_centre() {
    let out = phoneval(&["filters", "gradcheck", "--b", "200"]);
    assert_eq!(out.status.code(), Some(2));
}

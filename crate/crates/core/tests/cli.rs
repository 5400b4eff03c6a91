use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn histocell(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_histocell"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn synth(dir: &Path) {
    let o = histocell(
        dir,
        &[
            "synth", "--out", "out", "--set", "name=data", "--set", "synth.spots_per_patient=60", "--set", "synth.dim=6",
            "--set", "synth.n_cell_types=3",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

fn write_config(dir: &Path) {
    fs::write(
        dir.join("cfg.json"),
        r#"{"name": "loo", "data": {"spots": "out/data/spots.csv", "abundances": "out/data/abundances.csv"},
            "train": {"hidden_width": 8, "epochs": 4, "batch_size": 32}, "out_dir": "out"}"#,
    )
    .unwrap();
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let ok = histocell(dir.path(), &["validate", "--spots", "out/data/spots.csv", "--abundances", "out/data/abundances.csv"]);
    assert_eq!(code(&ok), 0);

    let spots = fs::read_to_string(dir.path().join("out/data/spots.csv")).unwrap();
    let abund = fs::read_to_string(dir.path().join("out/data/abundances.csv")).unwrap();
    let lines: Vec<&str> = spots.lines().collect();

    let dup = format!("{}\n{}\n", spots.trim_end(), lines[1]);
    fs::write(dir.path().join("dup.csv"), dup).unwrap();
    let o = histocell(dir.path(), &["validate", "--spots", "dup.csv", "--abundances", "out/data/abundances.csv"]);
    assert_eq!(code(&o), 1);
    let id = lines[1].split(',').next().unwrap();
    assert!(String::from_utf8_lossy(&o.stdout).contains(id));

    let nan = spots.replacen(lines[2], &{
        let mut f: Vec<&str> = lines[2].split(',').collect();
        f[5] = "NaN";
        f.join(",")
    }, 1);
    fs::write(dir.path().join("nan.csv"), nan).unwrap();
    let o = histocell(dir.path(), &["validate", "--spots", "nan.csv", "--abundances", "out/data/abundances.csv"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("nan.csv:3:"));

    let alines: Vec<&str> = abund.lines().collect();
    let neg = abund.replacen(alines[1], &{
        let mut f: Vec<&str> = alines[1].split(',').collect();
        f[1] = "-0.5";
        f.join(",")
    }, 1);
    fs::write(dir.path().join("neg.csv"), neg).unwrap();
    let o = histocell(dir.path(), &["validate", "--spots", "out/data/spots.csv", "--abundances", "neg.csv"]);
    assert_eq!(code(&o), 1);

    let o = histocell(dir.path(), &["validate", "--spots", "missing.csv", "--abundances", "neg.csv"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn synth_then_loo_records_overrides_and_reproduces() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    write_config(dir.path());
    let o = histocell(dir.path(), &["loo", "--config", "cfg.json", "--set", "train.lambda2=0", "--workers", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("mean CC") && stdout.contains("cosine"), "{stdout}");

    let summary = fs::read_to_string(dir.path().join("out/loo/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 3);

    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/loo/run.json")).unwrap()).unwrap();
    assert_eq!(record["config"]["train"]["lambda2"], serde_json::json!(0.0));
    assert_eq!(record["command"], "loo");
    let artifacts = record["artifacts"].clone();
    assert!(artifacts.get("summary.csv").is_some());

    fs::copy(dir.path().join("out/loo/run.json"), dir.path().join("record.json")).unwrap();
    let again = histocell(dir.path(), &["loo", "--config", "record.json", "--workers", "1"]);
    assert_eq!(code(&again), 0);
    let record2: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/loo/run.json")).unwrap()).unwrap();
    assert_eq!(record2["artifacts"], artifacts);
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path());
    let o = histocell(dir.path(), &["loo", "--config", "cfg.json", "--set", "train.no_such_knob=1"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("no_such_knob"));
    let o = histocell(dir.path(), &["loo", "--config", "cfg.json", "--set", "train.epochs=many"]);
    assert_eq!(code(&o), 2);
    fs::write(dir.path().join("typo.json"), r#"{"trian": {}}"#).unwrap();
    assert_eq!(code(&histocell(dir.path(), &["loo", "--config", "typo.json"])), 2);
    assert_eq!(code(&histocell(dir.path(), &["loo", "--config", "absent.json"])), 2);
    assert_eq!(code(&histocell(dir.path(), &["bogus"])), 2);
}

#[test]
fn coloc_of_identical_files_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let o = histocell(
        dir.path(),
        &[
            "coloc", "--spots", "out/data/spots.csv", "--truth", "out/data/abundances.csv", "--pred",
            "out/data/abundances.csv", "--out", "out", "--set", "name=coloc",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("cosine 1.000 correlation 1.000"));
    assert!(dir.path().join("out/coloc/coloc/coloc_P01_S1.svg").exists());
    assert!(dir.path().join("out/coloc/run.json").exists());
}

#[test]
fn train_eval_and_cross() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    write_config(dir.path());
    let o = histocell(dir.path(), &["train", "--config", "cfg.json", "--set", "name=trained"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("out/trained/model.ckpt").exists());

    let o = histocell(
        dir.path(),
        &["eval", "--model", "out/trained/model.ckpt", "--config", "cfg.json", "--set", "name=evaluated"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("out/evaluated/eval/report.csv").exists());

    let o = histocell(
        dir.path(),
        &[
            "cross", "--config", "cfg.json", "--set", "name=crossed", "--set",
            "test_data.spots=out/data/spots.csv", "--set", "test_data.abundances=out/data/abundances.csv",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(dir.path().join("out/crossed/summary.csv")).unwrap();
    assert!(summary.lines().nth(1).unwrap().starts_with("cross,ok,180,"));
}

#[test]
fn fractions_feed_background_filtering() {
    use histocell::patchprep::{write_png, PatchRaster};
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let spots = fs::read_to_string(dir.path().join("out/data/spots.csv")).unwrap();
    let ids: Vec<String> = spots.lines().skip(1).map(|l| l.split(',').next().unwrap().to_string()).collect();
    let patches = dir.path().join("patches");
    for (i, id) in ids.iter().enumerate() {
        let rgb = if i % 4 == 0 { [250, 250, 250] } else { [150, 90, 140] };
        write_png(&PatchRaster::filled(16, 16, rgb), patches.join(format!("{id}.png"))).unwrap();
    }
    let o = histocell(dir.path(), &["fractions", "--patches", "patches", "--output", "fractions.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("fractions.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("spot_id,background_fraction"));
    assert_eq!(text.lines().count(), ids.len() + 1);

    write_config(dir.path());
    let o = histocell(
        dir.path(),
        &["train", "--config", "cfg.json", "--set", "data.fractions=fractions.csv", "--set", "name=filtered"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let kept = ids.len() - ids.len().div_ceil(4);
    assert!(String::from_utf8_lossy(&o.stdout).contains(&format!("trained on {kept} spots")));
}

use std::fs;
use std::path::Path;

use thermocrack::cli::{run_cli, EXIT_DATA, EXIT_USAGE};
use thermocrack::dataset::{load_manifest, Split};

fn run(args: &[&str]) -> i32 {
    let mut argv = vec!["thermocrack"];
    argv.extend_from_slice(args);
    run_cli(argv)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

#[test]
fn synth_train_evaluate_predict() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let model = tmp.path().join("model");
    let eval = tmp.path().join("eval");
    let pred = tmp.path().join("pred");

    assert_eq!(run(&["synth", "--n-per-level", "5", "--source", "fusion", "--out-dir", s(&data)]), 0);
    let manifest = load_manifest(data.join("manifest.jsonl")).unwrap();
    assert_eq!(manifest.len(), 15);
    assert_eq!(fs::read_dir(data.join("images")).unwrap().count(), 15);
    let run_json = json(&data.join("run.json"));
    assert_eq!(run_json["command"], "synth");
    assert_eq!(run_json["artifacts"].as_object().unwrap().len(), 16);

    let train = ["train", "--data-dir", s(&data), "--out-dir", s(&model), "--epochs", "1", "--model-input", "32x24"];
    assert_eq!(run(&train), 0);
    let ckpt = model.join("model.tck1");
    assert!(ckpt.is_file());
    assert_eq!(json(&model.join("train_log.json")).as_array().unwrap().len(), 1);

    let ev = ["evaluate", "--data-dir", s(&data), "--checkpoint", s(&ckpt), "--out-dir", s(&eval), "--json"];
    assert_eq!(run(&ev), 0);
    let metrics = json(&eval.join("metrics.json"));
    let counts = &metrics["fusion"]["confusion"]["counts"];
    let total: u64 = counts.as_array().unwrap().iter().flat_map(|r| r.as_array().unwrap()).map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(total as usize, manifest.split(Split::Test).count());
    assert!(fs::read_to_string(eval.join("report.txt")).unwrap().contains("fusion"));

    let image = data.join(&manifest.records()[0].image_path);
    assert_eq!(run(&["predict", "--checkpoint", s(&ckpt), "--image", s(&image), "--out-dir", s(&pred)]), 0);
    let p = json(&pred.join("prediction.json"));
    let sum: f64 = p["probabilities"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).sum();
    assert!((sum - 1.0).abs() <= 1e-5);
    assert!(p["level"].as_str().unwrap().starts_with("LEVEL_"));

    // Identical configs give identical artifacts.
    let again = tmp.path().join("model2");
    let train2 = ["train", "--data-dir", s(&data), "--out-dir", s(&again), "--epochs", "1", "--model-input", "32x24"];
    assert_eq!(run(&train2), 0);
    assert_eq!(fs::read(&ckpt).unwrap(), fs::read(again.join("model.tck1")).unwrap());
}

#[test]
fn train_without_manifest_names_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nowhere");
    assert_eq!(run(&["train", "--data-dir", s(&missing), "--out-dir", s(tmp.path())]), EXIT_DATA);
    assert!(!tmp.path().join("run.json").exists());
}

#[test]
fn config_file_and_flag_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    let out = tmp.path().join("out");
    fs::write(&cfg, r#"{"n_per_level": 2, "source_kind": "msx_like", "seed": 9}"#).unwrap();
    assert_eq!(run(&["synth", "--config", s(&cfg), "--seed", "4", "--out-dir", s(&out)]), 0);
    let r = json(&out.join("run.json"));
    assert_eq!(r["seed"], 4);
    assert_eq!(r["config"]["n_per_level"], 2);
    assert_eq!(r["config"]["source_kind"], "msx_like");
    assert_eq!(load_manifest(out.join("manifest.jsonl")).unwrap().len(), 6);
}

#[test]
fn config_errors_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    fs::write(&cfg, r#"{"learning_rate": "fast"}"#).unwrap();
    assert_eq!(run(&["synth", "--config", s(&cfg), "--out-dir", s(tmp.path())]), EXIT_USAGE);
    fs::write(&cfg, r#"{"colour": 1}"#).unwrap();
    assert_eq!(run(&["synth", "--config", s(&cfg), "--out-dir", s(tmp.path())]), EXIT_USAGE);
    let missing = tmp.path().join("missing.json");
    assert_eq!(run(&["synth", "--config", s(&missing)]), EXIT_USAGE);
    assert_eq!(run(&["bogus"]), EXIT_USAGE);
}

#[test]
fn fuse_and_preprocess() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    assert_eq!(run(&["synth", "--n-per-level", "1", "--source", "thermal", "--out-dir", s(&data)]), 0);
    let thermal = data.join("thermal").join("l2_00000.png");
    let visible = tmp.path().join("v.png");
    thermocrack::imaging::io::save_png(&thermocrack::imaging::ImageRGB::filled(160, 120, [180, 170, 150]), &visible).unwrap();
    let out = tmp.path().join("fused");
    for source in ["fusion", "msx_like"] {
        let args = ["fuse", "--thermal", s(&thermal), "--visible", s(&visible), "--source", source, "--out-dir", s(&out)];
        assert_eq!(run(&args), 0);
    }
    let fused = out.join("fused.png");
    let img = thermocrack::imaging::io::load_png(&fused).unwrap();
    assert_eq!((img.width(), img.height()), (160, 120));

    let pre = tmp.path().join("pre");
    assert_eq!(run(&["preprocess", "--image", s(&fused), "--resize", "64x48", "--out-dir", s(&pre)]), 0);
    let outs: Vec<_> = fs::read_dir(&pre).unwrap().map(|e| e.unwrap().path()).filter(|p| p.extension().is_some_and(|e| e == "png")).collect();
    assert_eq!(outs.len(), 1);
    let img = thermocrack::imaging::io::load_png(&outs[0]).unwrap();
    assert_eq!((img.width(), img.height()), (64, 48));
}

#[test]
fn split_subcommand_reassigns() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    assert_eq!(run(&["synth", "--n-per-level", "10", "--source", "visible", "--out-dir", s(&data)]), 0);
    assert_eq!(run(&["split", "--data-dir", s(&data), "--out-dir", s(&data), "--split", "0.5,0.3,0.2"]), 0);
    let m = load_manifest(data.join("manifest.jsonl")).unwrap();
    assert_eq!(m.counts(), [[5, 3, 2]; 3]);
    assert_eq!(run(&["split", "--data-dir", s(&data), "--split", "0.5,0.5"]), EXIT_USAGE);
}

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fundamental"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_tone_wav(path: &Path, freq: f64, rate: u32, seconds: u32) {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(path, spec).unwrap();
    for n in 0..rate * seconds {
        let x = (TAU * freq * n as f64 / rate as f64).cos();
        w.write_sample((x * 32767.0).round() as i16).unwrap();
    }
    w.finalize().unwrap();
}

fn write_triad_csv(path: &Path) {
    let mut text = String::from("sample_rate,512\n");
    for n in 0..512 {
        let t = n as f64 / 512.0;
        let x = 0.8 * (TAU * 6.0 * t).cos() + 1.4 * (TAU * 9.0 * t).cos() + 0.9 * (TAU * 33.0 * t).cos();
        text.push_str(&format!("{x:e}\n"));
    }
    fs::write(path, text).unwrap();
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

/// Per-frame frequency of the largest entry above the DC bin.
fn csv_ridge(path: &Path) -> Vec<f64> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let freqs: Vec<f64> = lines.next().unwrap().split(',').skip(1).map(|v| v.parse().unwrap()).collect();
    lines
        .map(|l| {
            let row: Vec<f64> = l.split(',').skip(1).map(|v| v.parse().unwrap()).collect();
            let k = (1..row.len()).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
            freqs[k]
        })
        .collect()
}

#[test]
fn rectified_tone_has_ridge_at_double_frequency() {
    let dir = TempDir::new().unwrap();
    let wav = dir.path().join("tone.wav");
    write_tone_wav(&wav, 2.0, 100, 30);
    let out = dir.path().join("out");
    let o = run(&["analyze", path_str(&wav), "--activation", "abs", "--out", path_str(&out), "--export", "csv,pgm,json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let ridge = csv_ridge(&out.join("spectrogram.csv"));
    let report = read_json(out.join("report.json"));
    let step = 100.0 / report["stft"]["fft_length"].as_f64().unwrap();
    // frames whose window lies inside the signal
    let interior = &ridge[10..ridge.len() - 10];
    assert!(interior.iter().all(|f| (f - 4.0).abs() <= step), "{interior:?}");
    assert_eq!(report["dominant_bin"], 120);

    let pgm = fs::read(out.join("spectrogram.pgm")).unwrap();
    let header = format!("P5\n{} {}\n255\n", ridge.len(), 257);
    assert!(pgm.starts_with(header.as_bytes()));
    assert_eq!(pgm.len(), header.len() + ridge.len() * 257);
    assert!(out.join("spectrogram.json").exists());
    assert!(out.join("manifest.json").exists());
}

#[test]
fn band_ratio_follows_the_if_curve() {
    let dir = TempDir::new().unwrap();
    let wav = dir.path().join("tone.wav");
    write_tone_wav(&wav, 2.0, 100, 30);
    let out = dir.path().join("out");
    // a 10 s window resolves the ±0.2 Hz band; the default 2 s one does not
    let frames = 30;
    let ratio = |hz: f64| {
        let curve = dir.path().join("if.txt");
        fs::write(&curve, format!("{hz}\n").repeat(frames)).unwrap();
        let o = run(&[
            "analyze", path_str(&wav), "--activation", "abs", "--window", "1000", "--hop", "100",
            "--out", path_str(&out), "--if-curve", path_str(&curve),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        read_json(out.join("report.json"))["band_energy_ratio"]["value"].as_f64().unwrap()
    };
    // 4 Hz carries (1/3)² / Σ (2/(4k²−1))²/4 ≈ 95% of the non-DC energy of |cos|
    assert!(ratio(4.0) > 0.85);
    assert!(ratio(2.0) < 0.05);

    let curve = dir.path().join("short.txt");
    fs::write(&curve, "4\n4\n").unwrap();
    let o = run(&["analyze", path_str(&wav), "--out", path_str(&out), "--if-curve", path_str(&curve)]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn triad_signal_reports_gcd_bin() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("triad.csv");
    write_triad_csv(&csv);
    let out = dir.path().join("out");
    let o = run(&["analyze", path_str(&csv), "--activation", "heps", "--epsilon", "0.1", "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(out.join("report.json"));
    assert_eq!(report["dominant_low_bin"], 3);
    assert_eq!(report["support_gcd"], 3);
    assert_eq!(report["activation"], "heps0.1");
    assert!(report["energy_ratio"]["before"].as_f64().unwrap() < 1e-20);
}

#[test]
fn activated_csv_round_trips() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("triad.csv");
    write_triad_csv(&csv);
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    assert!(run(&["analyze", path_str(&csv), "--out", path_str(&first)]).status.success());
    // |·| leaves the nonnegative activated samples unchanged
    let again = first.join("activated.csv");
    assert!(run(&["analyze", path_str(&again), "--activation", "abs", "--out", path_str(&second)]).status.success());
    assert_eq!(fs::read(first.join("activated.csv")).unwrap(), fs::read(second.join("activated.csv")).unwrap());
}

#[test]
fn input_errors() {
    let dir = TempDir::new().unwrap();
    let o = run(&["analyze", path_str(&dir.path().join("missing.csv"))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.csv"));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "sample_rate,10\n1\n2\nnope\n").unwrap();
    let o = run(&["analyze", path_str(&bad), "--out", path_str(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));

    let o = run(&["analyze", path_str(&bad), "--activation", "heps", "--epsilon", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

fn verify(dir: &Path, spec: &str, ladder: &str) -> (Output, Vec<Value>) {
    let file = dir.join("spec.json");
    fs::write(&file, spec).unwrap();
    let o = run(&["verify-theorem", "--signal", path_str(&file), "--eps-ladder", ladder]);
    let lines = String::from_utf8_lossy(&o.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    (o, lines)
}

#[test]
fn verify_two_term_exponential() {
    let dir = TempDir::new().unwrap();
    let (o, lines) = verify(dir.path(), r#"[{"m":1,"re":1,"im":0},{"m":2,"re":1,"im":0}]"#, "1e-2,1e-3,1e-4,1e-5");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(lines.len(), 5);
    let summary = &lines[4];
    assert_eq!(summary["criterion_met"], true);
    assert!(summary["final_rel_error"].as_f64().unwrap() < 0.05);
}

#[test]
fn verify_cancelling_cosine() {
    let dir = TempDir::new().unwrap();
    let (o, lines) = verify(dir.path(), r#"{"form":"real_cosine","terms":[{"m":1,"a":1}]}"#, "1e-2,1e-3,1e-4");
    assert_eq!(o.status.code(), Some(0));
    let summary = lines.last().unwrap();
    assert_eq!(summary["cancelled"], true);
    for l in &lines[..3] {
        assert_eq!(l["prediction_re"], 0.0);
        assert!(l["scaled_integral"].as_f64().unwrap() < 1e-8);
    }
}

#[test]
fn verify_constant_modulus_fails() {
    let dir = TempDir::new().unwrap();
    let (o, _) = verify(dir.path(), r#"[{"m":1,"a":1}]"#, "1e-2,1e-3");
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("constant"));

    let (o, _) = verify(dir.path(), r#"[{"m":1,"a":1},{"m":2,"a":1}]"#, "1e-3,1e-2");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn synth_bench_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let outs: Vec<PathBuf> = (0..2).map(|i| dir.path().join(format!("run{i}"))).collect();
    for out in &outs {
        let o = run(&["synth-bench", "--trials", "200", "--seed", "7", "--out", path_str(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let mut names: Vec<_> = fs::read_dir(&outs[0]).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 7);
    for name in names {
        assert_eq!(fs::read(outs[0].join(&name)).unwrap(), fs::read(outs[1].join(&name)).unwrap(), "{name:?}");
    }
    let summary = read_json(outs[0].join("summary.json"));
    assert_eq!(summary["config"]["master_seed"], 7);
    assert_eq!(summary["stats"].as_array().unwrap().len(), 5);

    assert_eq!(run(&["synth-bench", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(run(&["synth-bench", "--trials", "5", "--activations", "abs,heps2"]).status.code(), Some(2));
}

#[test]
fn sumset_tables() {
    let text = |args: &[&str]| {
        let o = run(args);
        assert!(o.status.success());
        String::from_utf8(o.stdout).unwrap()
    };
    let t = text(&["sumset", "--freqs", "6,9,33"]);
    assert!(t.contains("gcd: 3\n"));
    assert!(t.contains("= 3Z ∩ [0, 330]"));

    let t = text(&["sumset", "--freqs", "4"]);
    assert!(t.contains("gcd: 4\n"));
    assert!(t.contains("support at k = 50: {0}\n"));

    let t = text(&["sumset", "--freqs", "2,3", "--range", "20"]);
    assert!(t.contains("stabilization_k: 20\n"));
    assert!(t.contains("{0, 1, ..., 20} = Z ∩ [0, 20]"));

    assert_eq!(run(&["sumset", "--freqs", "0,3"]).status.code(), Some(2));
}

#[test]
fn thread_override_must_be_positive() {
    let o = bin().args(["sumset", "--freqs", "2,3"]).env("FUNDAMENTAL_THREADS", "0").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().args(["sumset", "--freqs", "2,3"]).env("FUNDAMENTAL_THREADS", "2").output().unwrap();
    assert!(o.status.success());
}

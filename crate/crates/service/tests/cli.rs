use std::path::Path;
use std::process::{Command, Output};

use thermsense_core::codec::read_sequence;
use thermsense_core::export::{read_ground_truth_csv, read_rates_csv, read_signal_csv};

fn thermsense(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thermsense")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn synth_file(dir: &Path, extra: &[&str]) -> std::path::PathBuf {
    let out = dir.join("a.tseq");
    let mut args = vec!["synth", "--out", path(&out)];
    args.extend_from_slice(extra);
    let o = thermsense(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

#[test]
fn synth_writes_floor_of_duration_times_fps_frames() {
    let dir = tempfile::tempdir().unwrap();
    let out = synth_file(dir.path(), &["--rate-bpm", "15", "--duration", "60", "--fps", "9", "--seed", "7"]);
    assert_eq!(read_sequence(&out).unwrap().len(), 540);
    let truth = read_ground_truth_csv(std::fs::File::open(dir.path().join("a.truth.csv")).unwrap()).unwrap();
    assert_eq!(truth.len(), 540);
    assert!(truth.rate_bpm.iter().all(|&r| r == 15.0));
}

#[test]
fn synth_prints_summary_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &str| {
        let o = thermsense(&["synth", "--rate-bpm", "12", "--duration", "10", "--seed", "3", "--out", out]);
        assert!(o.status.success());
        String::from_utf8(o.stdout).unwrap()
    };
    let a = dir.path().join("a.tseq");
    let b = dir.path().join("b.tseq");
    let summary = args(path(&a));
    args(path(&b));
    assert!(summary.contains("90 frames") && summary.contains("12 bpm"), "{summary}");
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn synth_rejects_zero_rate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.tseq");
    let o = thermsense(&["synth", "--rate-bpm", "0", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn unknown_flag_is_usage_error() {
    assert_eq!(thermsense(&["synth", "--bogus"]).status.code(), Some(2));
}

#[test]
fn process_without_roi() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth_file(dir.path(), &["--duration", "40"]);
    let o = thermsense(&["process", path(&input), "--out-dir", path(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ROI required"));
}

#[test]
fn process_with_roi_outside_frame_names_edge() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth_file(dir.path(), &["--duration", "40"]);
    let o = thermsense(&["process", path(&input), "--roi", "200,10,8,8"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("right edge"), "{}", stderr(&o));
    let o = thermsense(&["process", path(&input), "--roi", "10,118,8,8"]);
    assert!(stderr(&o).contains("bottom edge"), "{}", stderr(&o));
}

#[test]
fn input_format_errors() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.tseq");
    assert_eq!(thermsense(&["process", path(&missing), "--roi", "0,0,4,4"]).status.code(), Some(3));
    let junk = dir.path().join("junk.tseq");
    std::fs::write(&junk, b"not a sequence at all").unwrap();
    let o = thermsense(&["process", path(&junk), "--roi", "0,0,4,4"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("offset 0"), "{}", stderr(&o));
}

#[test]
fn too_short_sequence_is_processing_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth_file(dir.path(), &["--duration", "20"]);
    let o = thermsense(&["process", path(&input), "--roi", "70,72,20,8", "--out-dir", path(dir.path())]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn process_recovers_noise_free_rate() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth_file(dir.path(), &["--rate-bpm", "15", "--noise-sd", "0", "--jitter-sd", "0"]);
    let out = dir.path().join("out");
    let o = thermsense(&["process", path(&input), "--roi", "70,72,20,8", "--out-dir", path(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rates = read_rates_csv(std::fs::File::open(out.join("rates.csv")).unwrap()).unwrap();
    assert_eq!(rates.len(), 31);
    assert!(rates.iter().all(|r| (r.bpm - 15.0).abs() <= 1.0));
    let (t, v) = read_signal_csv(std::fs::File::open(out.join("signal.csv")).unwrap()).unwrap();
    assert_eq!(t.len(), 540);
    assert_eq!(v.len(), 540);
    let pgm = std::fs::read(out.join("rvs.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n"));
    assert!(out.join("rvs.png").exists());
    let csv = std::fs::read_to_string(out.join("rvs.csv")).unwrap();
    assert!(csv.starts_with("f_hz\\t_s,"));
}

#[test]
fn rate_and_rvs_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth_file(dir.path(), &["--rate-bpm", "20", "--duration", "40"]);
    let o = thermsense(&["rate", path(&input), "--roi", "70,72,20,8"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rates = read_rates_csv(o.stdout.as_slice()).unwrap();
    assert!((10..=11).contains(&rates.len()), "{}", rates.len());
    assert!(rates.iter().all(|r| (r.bpm - 20.0).abs() <= 1.0));

    let out = dir.path().join("rvs");
    let o = thermsense(&["rvs", path(&input), "--roi", "70,72,20,8", "--out-dir", path(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("rvs.csv").exists() && out.join("rvs.pgm").exists());
    assert!(!out.join("signal.csv").exists());
}

#[test]
fn global_band_flag_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth_file(dir.path(), &["--duration", "40"]);
    let o = thermsense(&["rate", path(&input), "--roi", "70,72,20,8", "--band", "0.1,6"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn serve_reports_busy_port() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth_file(dir.path(), &["--duration", "2"]);
    let busy = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = busy.local_addr().unwrap().port().to_string();
    let o = thermsense(&["serve", path(&input), "--port", &port]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("binding"), "{}", stderr(&o));
}

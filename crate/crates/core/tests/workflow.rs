//! File-based workflows: compression, conversion and the command-line tool.

mod common;

use std::path::Path;
use std::process::Command;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::rel;
use tensor_cur::experiment::{self, CompressOptions, Method, SampleSizes, REPORT_FILE};
use tensor_cur::io as tio;
use tensor_cur::synthetic::generate_synthetic;
use tensor_cur::Distribution;

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tensor-cur"))
}

fn run(cmd: &mut Command) -> String {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn compress_opts(input: &Path, method: Method, ranks: &[usize], out_dir: &Path) -> CompressOptions {
    CompressOptions {
        input: input.to_path_buf(),
        method,
        ranks: ranks.to_vec(),
        seed: 3,
        out_dir: out_dir.to_path_buf(),
        reconstruct: true,
        sizes: SampleSizes::default(),
        distribution: Distribution::Uniform,
    }
}

#[test]
fn chidori_compression_snr_is_close_to_hosvd() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let data = generate_synthetic(&[100, 120, 30], &[10, 10, 5], 1e-3, &mut rng).unwrap();
    let input = dir.path().join("cube.tnsr");
    tio::save_tensor(&input, &data.noisy).unwrap();

    let ranks = [10, 10, 5];
    let mut snr = Vec::new();
    for method in [Method::Hosvd, Method::Chidori] {
        let out = dir.path().join(method.as_str());
        std::fs::create_dir_all(&out).unwrap();
        let report = experiment::compress(&compress_opts(&input, method, &ranks, &out)).unwrap();
        let approx = tio::load_tensor(out.join(experiment::RECONSTRUCTION_FILE)).unwrap();
        assert_eq!(approx.dims(), data.noisy.dims());
        assert!(out.join(REPORT_FILE).exists());
        snr.push(report.snr_db.expect("noisy input is not reproduced exactly"));
    }
    assert!(snr[0] - snr[1] <= 3.0, "hosvd {} dB, chidori {} dB", snr[0], snr[1]);
}

#[test]
fn full_rank_compression_reports_exact() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let data = generate_synthetic(&[6, 5, 4], &[3, 3, 3], 1e-2, &mut rng).unwrap();
    let input = dir.path().join("small.tnsr");
    tio::save_tensor(&input, &data.noisy).unwrap();
    let out = dir.path().join("out");
    let stdout = run(cli().args(["compress", "--method", "chidori", "--ranks", "6,5,4", "--input"])
        .arg(&input)
        .arg("--out-dir")
        .arg(&out));
    let row: Vec<&str> = stdout.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "chidori");
    assert_eq!(row[3], "exact");
}

#[test]
fn cli_generate_compress_convert_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    run(cli().args(["generate", "--dims", "20,18,16", "--ranks", "3", "--seed", "4", "--out"])
        .arg(p.join("a.tnsr")));
    let a = tio::load_tensor(p.join("a.tnsr")).unwrap();
    assert_eq!(a.dims(), &[20, 18, 16]);

    for method in ["fiber", "chidori", "hosvd", "st-hosvd", "hooi"] {
        let out = p.join(method);
        let stdout = run(cli()
            .args(["compress", "--method", method, "--ranks", "3", "--reconstruct", "--input"])
            .arg(p.join("a.tnsr"))
            .arg("--out-dir")
            .arg(&out));
        assert!(stdout.starts_with("method,dims,ranks,snr_db,rel_err,runtime_ms\n"));
        let approx = tio::load_tensor(out.join("reconstruction.tnsr")).unwrap();
        assert!(rel(&a, &approx) < 1e-9, "{method}");
    }

    let cur = tio::load_cur(p.join("chidori")).unwrap();
    run(cli().arg("convert").arg("--in-dir").arg(p.join("chidori")).arg("--out-dir").arg(p.join("tucker")));
    let h = tio::load_hosvd(p.join("tucker")).unwrap();
    assert_eq!(h.ranks(), vec![3, 3, 3]);
    assert!(rel(&cur.reconstruct().unwrap(), &h.reconstruct().unwrap()) < 1e-9);
    assert!(rel(&a, &h.reconstruct().unwrap()) < 1e-9);
}

#[test]
fn cli_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tnsr");
    std::fs::write(&bad, b"NOPE0000000000000000").unwrap();
    let out = cli()
        .args(["compress", "--method", "hosvd", "--ranks", "1", "--input"])
        .arg(&bad)
        .arg("--out-dir")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert!(!out.status.success());

    run(cli().args(["generate", "--dims", "4,4", "--ranks", "2", "--out"]).arg(dir.path().join("m.tnsr")));
    let out = cli()
        .args(["compress", "--method", "hosvd", "--ranks", "5", "--input"])
        .arg(dir.path().join("m.tnsr"))
        .arg("--out-dir")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert!(!out.status.success(), "rank above extent must fail");
}

#[test]
fn cli_synthetic_writes_the_csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    run(cli()
        .args(["synthetic", "--dims", "12,16", "--rank", "2", "--sigma", "1e-3,0", "--trials", "2", "--seed", "9", "--out"])
        .arg(&csv));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "method,d,r,sigma,trial,seed,rel_err,runtime_ms,rank_ok,resamples"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2 * 2 * 2 * 5);
    for r in &rows {
        assert_eq!(r.len(), 10);
        assert!(r[6].contains('e'), "rel_err in scientific notation: {}", r[6]);
    }
    assert_eq!(rows[0][5], "9");
    assert_eq!(rows[5][5], "10");

    let stdout = run(cli().args(["synthetic", "--dims", "12", "--rank", "2", "--sigma", "0", "--trials", "1", "--methods", "chidori", "--extract-ms"]));
    assert!(stdout.lines().next().unwrap().ends_with(",extract_ms"));
}

#[test]
fn cli_check_bounds_prints_a_report() {
    let stdout = run(cli().args(["check-bounds", "--dims", "30,30,30", "--rank", "2", "--sigma", "1e-6", "--seed", "1"]));
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let measured = v["measured"].as_f64().unwrap();
    let general = v["general_rhs"].as_f64().unwrap();
    let chidori = v["chidori_rhs"].as_f64().unwrap();
    assert_eq!(v["modes"].as_array().unwrap().len(), 3);
    if v["premise_holds"].as_bool().unwrap() {
        assert!(measured <= general && measured <= chidori);
    }
}

/// Hyperspectral-cube-sized input; needs about 1 GB of memory.
#[test]
#[ignore]
fn large_cube_compression_completes() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let data = generate_synthetic(&[1017, 1340, 33], &[60, 60, 7], 1e-2, &mut rng).unwrap();
    let input = dir.path().join("cube.tnsr");
    tio::save_tensor(&input, &data.noisy).unwrap();
    drop(data);
    for method in [Method::Chidori, Method::Fiber, Method::Hosvd] {
        let out = dir.path().join(method.as_str());
        std::fs::create_dir_all(&out).unwrap();
        let mut opts = compress_opts(&input, method, &[60, 60, 7], &out);
        opts.reconstruct = false;
        let report = experiment::compress(&opts).unwrap();
        println!("{method}: snr {:?} dB, {:.0} ms", report.snr_db, report.runtime_ms);
        assert!(report.snr_db.is_some() && report.runtime_ms > 0.0);
    }
}

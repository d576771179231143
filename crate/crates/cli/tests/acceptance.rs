//! Acceptance gate 10: the end-to-end command-line run. The bundled demo
//! regenerates every fixture artifact, the analysis chain consumes what the
//! demo wrote, reruns with one seed are byte-identical, and bad inputs fail
//! with line-numbered diagnostics before anything is written.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use lshape_channel::analysis::AzimuthPowerProfile;
use lshape_channel::io;
use lshape_channel::LShapeScene;

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lshape-channel"))
}

fn expect_ok(out: &Output, what: &str) {
    assert!(
        out.status.success(),
        "{what} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Sorted relative paths of every file under `root`.
fn collect_files(root: &Path) -> Vec<PathBuf> {
    let mut files = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    files.sort();
    files
}

fn assert_trees_identical(a: &Path, b: &Path) {
    let fa = collect_files(a);
    let fb = collect_files(b);
    assert_eq!(fa, fb, "file sets under {} and {} differ", a.display(), b.display());
    for rel in &fa {
        let ba = fs::read(a.join(rel)).unwrap();
        let bb = fs::read(b.join(rel)).unwrap();
        assert!(ba == bb, "{} differs between reruns", rel.display());
    }
}

#[test]
fn a10_demo_chain_determinism_and_diagnostics() {
    let t0 = Instant::now();
    let base = tempfile::tempdir().unwrap();
    let dir_a = base.path().join("a");
    let dir_b = base.path().join("b");

    // Full fixture regeneration, twice with one seed.
    for dir in [&dir_a, &dir_b] {
        let out = cli()
            .arg("--seed")
            .arg("7")
            .arg("--out")
            .arg(dir)
            .arg("synth")
            .arg("--demo")
            .output()
            .unwrap();
        expect_ok(&out, "synth --demo");
    }
    assert_trees_identical(&dir_a, &dir_b);
    let n_demo_files = collect_files(&dir_a).len();

    // The analysis chain consumes what the demo wrote.
    let showcase = dir_a.join("indoor").join("306-321");
    let chain = base.path().join("chain");
    let out = cli()
        .arg("--out")
        .arg(&chain)
        .arg("extract")
        .arg("--cir-dir")
        .arg(showcase.join("cirs"))
        .output()
        .unwrap();
    expect_ok(&out, "extract");
    let mpcs = io::read_mpcs_csv(&chain.join("mpcs.csv")).unwrap();
    assert!(!mpcs.is_empty(), "extraction found nothing in the showcase responses");

    let out = cli()
        .arg("--out")
        .arg(&chain)
        .arg("beams")
        .arg("--mpcs")
        .arg(chain.join("mpcs.csv"))
        .output()
        .unwrap();
    expect_ok(&out, "beams");
    let beams = io::read_beams_csv(&chain.join("beams.csv")).unwrap();
    assert!(!beams.is_empty(), "no beams in the showcase profile");
    let profile = io::read_profile_csv(&chain.join("profile.csv")).unwrap();
    profile.validate().unwrap();

    let out = cli()
        .arg("--out")
        .arg(&chain)
        .arg("spreads")
        .arg("--mpcs")
        .arg(chain.join("mpcs.csv"))
        .arg("--rx")
        .arg("N1R2")
        .output()
        .unwrap();
    expect_ok(&out, "spreads");
    let spreads_text = fs::read_to_string(chain.join("spreads.toml")).unwrap();
    assert!(spreads_text.contains("delay_spread_ns"));
    assert!(spreads_text.contains("azimuth_spread_deg"));

    for (model, extra) in [("ci", None), ("mab", Some(("--d1", "22.09")))] {
        let mut cmd = cli();
        cmd.arg("--out")
            .arg(&chain)
            .arg("plfit")
            .arg("--samples")
            .arg(showcase.join("pathloss.csv"))
            .arg("--model")
            .arg(model);
        if let Some((flag, value)) = extra {
            cmd.arg(flag).arg(value);
        }
        let out = cmd.output().unwrap();
        expect_ok(&out, "plfit");
        let report = fs::read_to_string(chain.join(format!("plfit-{model}-best.toml"))).unwrap();
        assert!(report.contains("sigma_db"), "{report}");
    }

    // Re-ingest the remaining artifact kinds through the library readers.
    let scene: LShapeScene = io::read_toml(&dir_a.join("indoor-scene.toml")).unwrap();
    scene.validate().unwrap();
    let pl = io::read_path_loss_csv(&showcase.join("pathloss.csv")).unwrap();
    assert_eq!(pl.len(), scene.rx.len());
    let one_cir = io::read_cir_csv(&showcase.join("cirs").join("az0-el0.csv")).unwrap();
    assert_eq!(one_cir.taps.len(), 6001);
    let _: AzimuthPowerProfile =
        io::read_profile_csv(&showcase.join("profiles").join("N1R2.csv")).unwrap();

    // Removing the sounder response from the synthetic raw sweep reproduces
    // the extraction (up to float round-trip noise in the CSVs).
    let cal_out = base.path().join("cal");
    let out = cli()
        .arg("--out")
        .arg(&cal_out)
        .arg("calibrate")
        .arg("--sweep")
        .arg(showcase.join("sweep-N1R2.csv"))
        .arg("--calib")
        .arg(showcase.join("calib.csv"))
        .output()
        .unwrap();
    expect_ok(&out, "calibrate");
    let out = cli()
        .arg("--out")
        .arg(&cal_out)
        .arg("extract")
        .arg("--cir-dir")
        .arg(cal_out.join("cirs"))
        .output()
        .unwrap();
    expect_ok(&out, "extract after calibrate");
    let mut again = io::read_mpcs_csv(&cal_out.join("mpcs.csv")).unwrap();
    let mut first = mpcs.clone();
    let key = |m: &lshape_channel::Mpc| (m.toa_ns, m.aoa_az_deg);
    first.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    again.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    assert_eq!(first.len(), again.len(), "calibration changed the component count");
    for (m, n) in first.iter().zip(&again) {
        assert_eq!(m.toa_ns, n.toa_ns);
        assert_eq!(m.aoa_az_deg, n.aoa_az_deg);
        assert!((m.power_db - n.power_db).abs() <= 1e-6);
    }

    // Single-link synthesis is deterministic per seed too.
    let s1 = base.path().join("s1");
    let s2 = base.path().join("s2");
    for dir in [&s1, &s2] {
        let out = cli()
            .arg("--seed")
            .arg("7")
            .arg("--out")
            .arg(dir)
            .arg("synth")
            .arg("--scene")
            .arg(dir_a.join("indoor-scene.toml"))
            .arg("--rx")
            .arg("N4R1")
            .output()
            .unwrap();
        expect_ok(&out, "synth --scene");
    }
    assert_trees_identical(&s1, &s2);

    // Bad inputs: an empty sweep fails with a line-numbered diagnostic and
    // writes nothing.
    let empty_sweep = base.path().join("empty-sweep.csv");
    fs::write(&empty_sweep, "az_deg,el_deg,freq_hz,re,im\n").unwrap();
    let err_out = base.path().join("never-created");
    let out = cli()
        .arg("--out")
        .arg(&err_out)
        .arg("calibrate")
        .arg("--sweep")
        .arg(&empty_sweep)
        .arg("--calib")
        .arg(showcase.join("calib.csv"))
        .output()
        .unwrap();
    assert!(!out.status.success(), "empty sweep was accepted");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("no data rows"), "unhelpful diagnostic: {stderr}");
    assert!(!err_out.exists(), "failed run left partial outputs behind");

    // A malformed table names the offending line.
    let bad_mpcs = base.path().join("bad-mpcs.csv");
    fs::write(
        &bad_mpcs,
        "toa_ns,aoa_az_deg,aoa_el_deg,power_db\n12.5,80,0,-110\nnot-a-number,90,0,-120\n",
    )
    .unwrap();
    let out = cli()
        .arg("--out")
        .arg(&err_out)
        .arg("beams")
        .arg("--mpcs")
        .arg(&bad_mpcs)
        .output()
        .unwrap();
    assert!(!out.status.success(), "malformed table was accepted");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("line 3") && stderr.contains("toa_ns"),
        "diagnostic lacks the line number: {stderr}"
    );
    assert!(!err_out.exists());

    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 60.0, "budget 60 s, took {dt:.1} s");
    println!(
        "acceptance 10 (command-line demo chain): PASS — {n_demo_files} demo artifacts byte-identical across reruns, chain re-ingested ({} components, {} beams), {dt:.1} s",
        mpcs.len(),
        beams.len()
    );
}

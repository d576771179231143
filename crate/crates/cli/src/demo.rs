//! `synth --demo`: regenerate the bundled indoor and outdoor fixtures end
//! to end — realizations, MPC tables, beam tables, dispersion reports,
//! path-loss fits, dominant-path forecasts, and one showcase sounding set
//! (sweep + reference + per-steering impulse responses) that the
//! `calibrate`/`extract` commands can re-ingest.

use std::fs;
use std::path::Path;

use anyhow::Context;
use lshape_channel::fixtures::{indoor_scene, outdoor_scene};
use lshape_channel::io;
use lshape_channel::pathloss::{PathLossSample, PlKind};
use lshape_channel::sounding::{cir_to_ctf, SweepRecord};
use lshape_channel::synth::{realization_to_cirs, synthesize, Realization};
use lshape_channel::units::db_to_amplitude;
use lshape_channel::{Band, Error, LShapeScene, Region, ScanGrid};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::commands::{
    cir_file_name, ensure_out, evolve_report, pl_sample, plfit_report, profile_and_beams,
    spreads_report, synth_options, PlModel, PlfitArgs,
};
use crate::config::RunConfig;

/// Showcase link whose raw sounding artifacts are emitted in full.
const SHOWCASE_SCENE: &str = "indoor";
const SHOWCASE_RX: &str = "N1R2";
const SHOWCASE_BAND: Band = Band::G306_321;

struct RxBundle {
    rx_id: String,
    realization: Realization,
    sample: PathLossSample,
}

/// Stable string hash for deriving per-position seeds from the master seed.
fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn position_seed(master: u64, scene_label: &str, band: Band, rx_id: &str) -> u64 {
    let tag = format!("{scene_label}/{band}/{rx_id}");
    master ^ fnv1a64(tag.as_bytes())
}

pub fn cmd_demo(cfg: &RunConfig) -> anyhow::Result<()> {
    let out = ensure_out(cfg)?;
    let scenes = [("indoor", indoor_scene()), ("outdoor", outdoor_scene())];
    io::write_toml(&out.join("indoor-scene.toml"), &scenes[0].1)?;
    io::write_toml(&out.join("outdoor-scene.toml"), &scenes[1].1)?;

    let mut n_files = 3; // run-config.toml + the two scene files
    for (label, scene) in &scenes {
        for band in Band::all() {
            let band_cfg = RunConfig {
                band,
                ..cfg.clone()
            };
            let dir = out.join(label).join(band.label());
            n_files += demo_band(&band_cfg, label, scene, &dir)
                .with_context(|| format!("demo failed for {label} {band}"))?;
        }
    }
    println!("demo: wrote {n_files} artifacts under {}", out.display());
    Ok(())
}

/// All artifacts for one (scene, band); returns the file count.
fn demo_band(
    cfg: &RunConfig,
    scene_label: &str,
    scene: &LShapeScene,
    dir: &Path,
) -> anyhow::Result<usize> {
    // Synthesize every receiver in parallel; keep the outcome order stable
    // by collecting ids first.
    let outcomes: Vec<(String, Result<RxBundle, Error>)> = scene
        .rx
        .par_iter()
        .map(|rx| {
            let mut opts = synth_options(cfg);
            opts.seed = position_seed(cfg.seed, scene_label, cfg.band, &rx.id);
            let bundle = synthesize(scene, &rx.id, &opts).and_then(|realization| {
                let sample = pl_sample(cfg, scene, &rx.id, &realization.all_mpcs())
                    .map_err(|e| Error::InvalidParameter { what: e.to_string() })?;
                Ok(RxBundle {
                    rx_id: rx.id.clone(),
                    realization,
                    sample,
                })
            });
            (rx.id.clone(), bundle)
        })
        .collect();

    let mut bundles = Vec::new();
    let mut skipped = Vec::new();
    for (rx_id, outcome) in outcomes {
        match outcome {
            Ok(b) => bundles.push(b),
            // A receiver the dominant-pair model cannot serve is reported,
            // recorded, and left out; anything else is a real failure.
            Err(Error::NoDominantPath { .. }) => skipped.push(rx_id),
            Err(e) => return Err(e).with_context(|| format!("synthesis failed for {rx_id}")),
        }
    }
    bundles.sort_by(|a, b| a.rx_id.cmp(&b.rx_id));

    for sub in ["realizations", "mpcs", "profiles", "beams", "spreads"] {
        fs::create_dir_all(dir.join(sub))?;
    }
    let mut n_files = 0;
    for b in &bundles {
        let mpcs = b.realization.all_mpcs();
        let mut comments = cfg.provenance_comments();
        comments.push(format!("rx = {}", b.rx_id));
        comments.push(format!("region = {:?}", b.realization.region));

        io::write_toml(
            &dir.join("realizations").join(format!("{}.toml", b.rx_id)),
            &b.realization,
        )?;
        io::write_mpcs_csv(&dir.join("mpcs").join(format!("{}.csv", b.rx_id)), &comments, &mpcs)?;
        let (profile, beams) = profile_and_beams(cfg, &mpcs)?;
        io::write_profile_csv(
            &dir.join("profiles").join(format!("{}.csv", b.rx_id)),
            &comments,
            &profile,
        )?;
        io::write_beams_csv(&dir.join("beams").join(format!("{}.csv", b.rx_id)), &comments, &beams)?;
        io::write_toml(
            &dir.join("spreads").join(format!("{}.toml", b.rx_id)),
            &spreads_report(cfg, &b.rx_id, &mpcs)?,
        )?;
        n_files += 5;
    }

    // Path-loss table over all synthesized receivers, nearest first.
    let mut samples: Vec<PathLossSample> = bundles.iter().map(|b| b.sample.clone()).collect();
    samples.sort_by(|a, b| {
        a.distance_m
            .total_cmp(&b.distance_m)
            .then_with(|| a.rx_id.cmp(&b.rx_id))
    });
    let mut comments = cfg.provenance_comments();
    comments.push(format!("scene = {}", scene.name));
    for rx_id in &skipped {
        comments.push(format!("skipped = {rx_id} (no dominant-pair reference)"));
    }
    io::write_path_loss_csv(&dir.join("pathloss.csv"), &comments, &samples)?;
    n_files += 1;

    for model in [PlModel::Ci, PlModel::Ab, PlModel::Mab] {
        let args = PlfitArgs {
            model,
            kind: PlKind::Best,
            d0_m: cfg.d0_m,
            corner_m: Some(scene.d1_m),
            freq_hz: None,
        };
        let (name, report) = plfit_report(cfg, &samples, &args)?;
        io::write_toml(&dir.join(format!("plfit-{name}-best.toml")), &report)?;
        n_files += 1;
    }

    // Dominant-path forecast from the farthest anchor the model serves.
    if let Some(anchor_id) = farthest_near_anchor(scene, &skipped) {
        let report = evolve_report(cfg, scene, &anchor_id, 15.0, 1.0)?;
        io::write_toml(&dir.join(format!("evolve-{anchor_id}.toml")), &report)?;
        n_files += 1;
    }

    if scene_label == SHOWCASE_SCENE && cfg.band == SHOWCASE_BAND {
        let showcase = bundles
            .iter()
            .find(|b| b.rx_id == SHOWCASE_RX)
            .context("showcase receiver missing from the fixture")?;
        n_files += demo_sounding(cfg, &showcase.realization, dir)?;
    }
    Ok(n_files)
}

fn farthest_near_anchor(scene: &LShapeScene, skipped: &[String]) -> Option<String> {
    let mut near: Vec<&lshape_channel::RxPosition> = scene
        .rx
        .iter()
        .filter(|r| {
            !skipped.contains(&r.id)
                && matches!(
                    scene.rx_bent_distance_m(&r.id),
                    Ok((_, Region::NearNlos))
                )
        })
        .collect();
    near.sort_by(|a, b| {
        let da = scene.bent_axis_distance_m(&a.pos);
        let db = scene.bent_axis_distance_m(&b.pos);
        db.total_cmp(&da).then_with(|| a.id.cmp(&b.id))
    });
    near.first().map(|r| r.id.clone())
}

/// Raw sounding artifacts for the showcase link: per-steering impulse
/// responses, the synthetic attenuated sweep they imply, and the reference
/// sweep that calibrates it away.
fn demo_sounding(cfg: &RunConfig, r: &Realization, dir: &Path) -> anyhow::Result<usize> {
    let band = cfg.band.config();
    let grid = ScanGrid::azimuth_circle();
    let cirs = realization_to_cirs(r, &grid, cfg.capture_hpbw_deg)?;

    let cir_dir = dir.join("cirs");
    fs::create_dir_all(&cir_dir)?;
    let mut n_files = 0;
    for cir in &cirs {
        io::write_cir_csv(&cir_dir.join(cir_file_name(cir)), cir)?;
        n_files += 1;
    }

    // Reference sweep: flat magnitude with a gentle deterministic phase
    // ramp, as a back-to-back measurement through the attenuator would see.
    let freqs: Vec<f64> = (0..band.n_points).map(|k| band.freq_at_hz(k)).collect();
    let calib_s21: Vec<Complex64> = (0..band.n_points)
        .map(|k| Complex64::from_polar(0.5, -0.002 * k as f64))
        .collect();
    io::write_calibration_csv(&dir.join("calib.csv"), &freqs, &calib_s21)?;
    n_files += 1;

    // Forward-model the raw sweep so `calibrate` recovers the responses:
    // measured = ctf * reference * antenna_gain / attenuator_gain.
    let scale = db_to_amplitude(cfg.antenna_gain_db) / db_to_amplitude(cfg.attenuator_gain_db);
    let mut records = Vec::with_capacity(cirs.len());
    for cir in &cirs {
        let ctf = cir_to_ctf(cir, &band)?;
        let s21: Vec<Complex64> = ctf
            .h
            .iter()
            .zip(&calib_s21)
            .map(|(h, c)| h * c * scale)
            .collect();
        records.push(SweepRecord {
            direction: cir.direction,
            s21,
        });
    }
    io::write_sweep_csv(&dir.join(format!("sweep-{SHOWCASE_RX}.csv")), &freqs, &records)?;
    n_files += 1;
    Ok(n_files)
}

//! One function per subcommand, plus the in-memory helpers the demo
//! pipeline reuses. Every function parses its inputs fully before creating
//! any output, so a failing run leaves no partial artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use lshape_channel::analysis::{
    angular_spread_deg, cluster_mpcs, detect_beams, rms_delay_spread_ns, AngleAxis,
    AzimuthPowerProfile, Beam,
};
use lshape_channel::evolve::{evolve_dominant, reference_anchor, EvolveParams};
use lshape_channel::io;
use lshape_channel::pathloss::{fit_ab, fit_ci, fit_mab, position_path_loss, PathLossSample, PlKind};
use lshape_channel::raytrace::trace;
use lshape_channel::sounding::{calibrate, ctf_to_cir, extract_mpcs, Cir};
use lshape_channel::synth::{synthesize, SynthOptions};
use lshape_channel::units::cyclic_distance_deg;
use lshape_channel::{LShapeScene, Mpc, ScanGrid};

use crate::config::RunConfig;
use crate::report::{EvolveReport, EvolveRow, PlfitReport, SpreadsReport};

pub fn ensure_out(cfg: &RunConfig) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(&cfg.out)
        .with_context(|| format!("cannot create output directory {}", cfg.out.display()))?;
    cfg.write_provenance(&cfg.out)?;
    Ok(cfg.out.clone())
}

/// `calibrate`: raw sweep + reference sweep → one impulse-response file per
/// steering direction under `<out>/cirs/`.
pub fn cmd_calibrate(cfg: &RunConfig, sweep_path: &Path, calib_path: &Path) -> anyhow::Result<()> {
    let band = cfg.band.config();
    let (freqs, sweeps) = io::read_sweep_csv(sweep_path)?;
    let (cal_freqs, calib) = io::read_calibration_csv(calib_path, cfg.attenuator_gain_db)?;
    if freqs.len() != band.n_points {
        bail!(
            "sweep has {} tones but band {} expects {}",
            freqs.len(),
            cfg.band,
            band.n_points
        );
    }
    for (k, (a, b)) in freqs.iter().zip(&cal_freqs).enumerate() {
        if (a - b).abs() > 1e-3 {
            bail!("sweep and reference ladders disagree at tone {k}: {a} Hz vs {b} Hz");
        }
    }
    let mut cirs = Vec::with_capacity(sweeps.len());
    for sweep in &sweeps {
        let ctf = calibrate(sweep, &calib, cfg.antenna_gain_db)?;
        cirs.push(ctf_to_cir(&ctf, &band)?);
    }

    let out = ensure_out(cfg)?;
    let dir = out.join("cirs");
    fs::create_dir_all(&dir)?;
    for cir in &cirs {
        let path = dir.join(cir_file_name(cir));
        io::write_cir_csv(&path, cir)?;
    }
    println!("wrote {} impulse responses to {}", cirs.len(), dir.display());
    Ok(())
}

pub fn cir_file_name(cir: &Cir) -> String {
    format!("az{}-el{}.csv", cir.direction.az_deg, cir.direction.el_deg)
}

/// `extract`: directory of impulse-response files → thresholded MPC list.
pub fn cmd_extract(cfg: &RunConfig, cir_dir: &Path) -> anyhow::Result<()> {
    let mut files: Vec<PathBuf> = fs::read_dir(cir_dir)
        .with_context(|| format!("cannot list {}", cir_dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no .csv impulse responses in {}", cir_dir.display());
    }
    let cirs: Vec<Cir> = files
        .iter()
        .map(|p| io::read_cir_csv(p))
        .collect::<Result<_, _>>()?;
    let mut band = cfg.band.config();
    if let Some(nf) = cfg.noise_floor_dbm {
        band.noise_floor_dbm = nf;
    }
    let extraction = extract_mpcs(&cirs, &band, cfg.dynamic_range_db)?;

    let out = ensure_out(cfg)?;
    let path = out.join("mpcs.csv");
    let mut comments = cfg.provenance_comments();
    comments.push(format!("threshold_dbm = {}", extraction.threshold_dbm));
    comments.push(format!("peak_dbm = {}", extraction.peak_dbm));
    comments.push(format!("no_signal = {}", extraction.no_signal));
    io::write_mpcs_csv(&path, &comments, &extraction.mpcs)?;
    println!(
        "wrote {} components (threshold {:.2} dBm) to {}",
        extraction.mpcs.len(),
        extraction.threshold_dbm,
        path.display()
    );
    Ok(())
}

/// Fold an MPC list into the azimuth-circle profile and detect its beams.
pub fn profile_and_beams(
    cfg: &RunConfig,
    mpcs: &[Mpc],
) -> anyhow::Result<(AzimuthPowerProfile, Vec<Beam>)> {
    let grid = ScanGrid::azimuth_circle();
    let profile = AzimuthPowerProfile::from_mpcs(mpcs, &grid.azimuths_deg, cfg.profile_floor_dbm)?;
    let beams = detect_beams(&profile, cfg.beam_min_prominence_db)?;
    Ok((profile, beams))
}

/// `beams`: MPC list → azimuth power profile + detected beam table.
pub fn cmd_beams(cfg: &RunConfig, mpcs_path: &Path) -> anyhow::Result<()> {
    let mpcs = io::read_mpcs_csv(mpcs_path)?;
    let (profile, beams) = profile_and_beams(cfg, &mpcs)?;

    let out = ensure_out(cfg)?;
    let mut comments = cfg.provenance_comments();
    comments.push(format!("min_prominence_db = {}", cfg.beam_min_prominence_db));
    io::write_profile_csv(&out.join("profile.csv"), &comments, &profile)?;
    io::write_beams_csv(&out.join("beams.csv"), &comments, &beams)?;
    println!(
        "wrote profile.csv and beams.csv ({} beams) to {}",
        beams.len(),
        out.display()
    );
    Ok(())
}

/// Dispersion summary of an MPC list.
pub fn spreads_report(
    cfg: &RunConfig,
    rx_id: &str,
    mpcs: &[Mpc],
) -> anyhow::Result<SpreadsReport> {
    let clusters = cluster_mpcs(mpcs, cfg.cluster_delay_gate_ns, cfg.cluster_angle_gate_deg)?;
    Ok(SpreadsReport {
        rx_id: rx_id.to_string(),
        band: cfg.band.label().to_string(),
        n_mpcs: mpcs.len(),
        n_clusters: clusters.len(),
        delay_spread_ns: rms_delay_spread_ns(mpcs)?,
        azimuth_spread_deg: angular_spread_deg(mpcs, AngleAxis::Azimuth)?,
        elevation_spread_deg: angular_spread_deg(mpcs, AngleAxis::Elevation)?,
    })
}

/// `spreads`: MPC list → delay/angle dispersion report.
pub fn cmd_spreads(cfg: &RunConfig, mpcs_path: &Path, rx_id: &str) -> anyhow::Result<()> {
    let mpcs = io::read_mpcs_csv(mpcs_path)?;
    let report = spreads_report(cfg, rx_id, &mpcs)?;
    let out = ensure_out(cfg)?;
    let path = out.join("spreads.toml");
    io::write_toml(&path, &report)?;
    println!(
        "wrote {} (ds {:.2} ns, asa {:.2} deg)",
        path.display(),
        report.delay_spread_ns,
        report.azimuth_spread_deg
    );
    Ok(())
}

pub struct PlfitArgs {
    pub model: PlModel,
    pub kind: PlKind,
    pub d0_m: f64,
    pub corner_m: Option<f64>,
    pub freq_hz: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PlModel {
    /// Close-in free-space reference model (single exponent).
    Ci,
    /// Floating-intercept log-distance model.
    Ab,
    /// Floating-intercept model over distance beyond the corner.
    Mab,
}

/// Fit one path-loss model. The corner-referenced model is fitted over the
/// samples beyond the corner only; everything nearer is counted as excluded.
pub fn plfit_report(
    cfg: &RunConfig,
    samples: &[PathLossSample],
    args: &PlfitArgs,
) -> anyhow::Result<(&'static str, PlfitReport)> {
    let mut report = PlfitReport {
        kind: args.kind,
        n_samples: samples.len(),
        n_excluded: 0,
        ci: None,
        ab: None,
        mab: None,
    };
    let name = match args.model {
        PlModel::Ci => {
            let freq = args.freq_hz.unwrap_or_else(|| cfg.band.config().center_hz());
            report.ci = Some(fit_ci(samples, args.kind, freq, args.d0_m)?);
            "ci"
        }
        PlModel::Ab => {
            report.ab = Some(fit_ab(samples, args.kind)?);
            "ab"
        }
        PlModel::Mab => {
            let corner = args
                .corner_m
                .context("--corner-m (alias --d1) is required for the mab model")?;
            let beyond: Vec<PathLossSample> = samples
                .iter()
                .filter(|s| s.distance_m > corner)
                .cloned()
                .collect();
            report.n_samples = beyond.len();
            report.n_excluded = samples.len() - beyond.len();
            report.mab = Some(fit_mab(&beyond, args.kind, corner)?);
            "mab"
        }
    };
    Ok((name, report))
}

/// `plfit`: path-loss sample table → fitted model report.
pub fn cmd_plfit(cfg: &RunConfig, samples_path: &Path, args: &PlfitArgs) -> anyhow::Result<()> {
    let samples = io::read_path_loss_csv(samples_path)?;
    let (name, report) = plfit_report(cfg, &samples, args)?;
    let out = ensure_out(cfg)?;
    let kind_name = match args.kind {
        PlKind::Best => "best",
        PlKind::Omni => "omni",
    };
    let path = out.join(format!("plfit-{name}-{kind_name}.toml"));
    io::write_toml(&path, &report)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// `trace`: deterministic reflected paths for one receiver, exported as an
/// MPC table with the wall sequences in the comment header.
pub fn cmd_trace(cfg: &RunConfig, scene_path: &Path, rx_id: &str) -> anyhow::Result<()> {
    let scene: LShapeScene = io::read_toml(scene_path)?;
    let rx = scene.rx_by_id(rx_id)?;
    let freq = cfg.band.config().center_hz();
    let paths = trace(&scene, &rx.pos, freq, cfg.max_bounces)?;
    let mpcs: Vec<Mpc> = paths.iter().map(|p| p.to_mpc()).collect();

    let out = ensure_out(cfg)?;
    let mut comments = cfg.provenance_comments();
    comments.push(format!("scene = {}", scene.name));
    comments.push(format!("rx = {rx_id}"));
    comments.push(format!("max_bounces = {}", cfg.max_bounces));
    for p in &paths {
        comments.push(format!(
            "path: [{}] length_m = {}",
            p.wall_names.join(" "),
            p.length_m
        ));
    }
    let path = out.join(format!("trace-{rx_id}.csv"));
    io::write_mpcs_csv(&path, &comments, &mpcs)?;
    println!("wrote {} paths to {}", paths.len(), path.display());
    Ok(())
}

/// `evolve`: forecast the dominant far-corridor arrival over a slide away
/// from a shadowed anchor.
pub fn cmd_evolve(
    cfg: &RunConfig,
    scene_path: &Path,
    anchor_id: &str,
    delta_max_m: f64,
    step_m: f64,
) -> anyhow::Result<()> {
    if !(step_m > 0.0 && delta_max_m >= 0.0) {
        bail!("slide range must satisfy step > 0 and max >= 0");
    }
    let scene: LShapeScene = io::read_toml(scene_path)?;
    let report = evolve_report(cfg, &scene, anchor_id, delta_max_m, step_m)?;
    let out = ensure_out(cfg)?;
    let path = out.join(format!("evolve-{anchor_id}.toml"));
    io::write_toml(&path, &report)?;
    println!("wrote {} rows to {}", report.rows.len(), path.display());
    Ok(())
}

pub fn evolve_report(
    cfg: &RunConfig,
    scene: &LShapeScene,
    anchor_id: &str,
    delta_max_m: f64,
    step_m: f64,
) -> anyhow::Result<EvolveReport> {
    let freq = cfg.band.config().center_hz();
    let anchor = reference_anchor(scene, anchor_id, freq, cfg.max_bounces)?;
    let params = EvolveParams {
        k: cfg.evolve_k,
        ..EvolveParams::default()
    };
    let mut rows = Vec::new();
    let n = (delta_max_m / step_m).round() as usize;
    for i in 0..=n {
        let delta = i as f64 * step_m;
        let ev = evolve_dominant(&anchor, &params, cfg.band, delta)?;
        rows.push(EvolveRow::from_dominant(&ev));
    }
    Ok(EvolveReport {
        anchor_rx_id: anchor_id.to_string(),
        band: cfg.band.label().to_string(),
        k: params.k,
        anchor_bent_m: anchor.bent_m,
        rows,
    })
}

pub fn synth_options(cfg: &RunConfig) -> SynthOptions {
    let mut opts = SynthOptions::new(cfg.band);
    opts.seed = cfg.seed;
    opts.max_bounces = cfg.max_bounces;
    opts.rt_window_db = cfg.rt_window_db;
    opts.evolve.k = cfg.evolve_k;
    opts
}

/// `synth`: one stochastic realization for one receiver.
pub fn cmd_synth_single(cfg: &RunConfig, scene_path: &Path, rx_id: &str) -> anyhow::Result<()> {
    let scene: LShapeScene = io::read_toml(scene_path)?;
    let r = synthesize(&scene, rx_id, &synth_options(cfg))?;

    let out = ensure_out(cfg)?;
    let stem = format!("{rx_id}-{}", cfg.band);
    let toml_path = out.join(format!("realization-{stem}.toml"));
    io::write_toml(&toml_path, &r)?;
    let mut comments = cfg.provenance_comments();
    comments.push(format!("rx = {rx_id}"));
    comments.push(format!("region = {:?}", r.region));
    let csv_path = out.join(format!("synth-mpcs-{stem}.csv"));
    io::write_mpcs_csv(&csv_path, &comments, &r.all_mpcs())?;
    println!(
        "wrote {} clusters to {} and {}",
        r.clusters.len(),
        toml_path.display(),
        csv_path.display()
    );
    Ok(())
}

/// Best-direction and omnidirectional path loss of a synthesized link,
/// using the azimuth-circle capture rule.
pub fn pl_sample(
    cfg: &RunConfig,
    scene: &LShapeScene,
    rx_id: &str,
    mpcs: &[Mpc],
) -> anyhow::Result<PathLossSample> {
    let grid = ScanGrid::azimuth_circle();
    let per_direction: Vec<Vec<Mpc>> = grid
        .azimuths_deg
        .iter()
        .map(|&az| {
            mpcs.iter()
                .filter(|m| cyclic_distance_deg(m.aoa_az_deg, az) <= cfg.capture_hpbw_deg / 2.0)
                .cloned()
                .collect()
        })
        .collect();
    let pl = position_path_loss(&per_direction)?;
    let (distance_m, _) = scene.rx_bent_distance_m(rx_id)?;
    Ok(PathLossSample {
        rx_id: rx_id.to_string(),
        distance_m,
        pl,
    })
}

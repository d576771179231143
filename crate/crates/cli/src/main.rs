//! Command-line front end for the L-shaped-corridor channel toolkit.

mod commands;
mod config;
mod demo;
mod report;

use std::path::PathBuf;

use anyhow::bail;
use clap::{Parser, Subcommand, ValueEnum};
use lshape_channel::pathloss::PlKind;
use lshape_channel::Band;

use commands::{PlModel, PlfitArgs};
use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "lshape-channel",
    version,
    about = "Measurement-to-model toolkit for sub-THz L-shaped corridor channels"
)]
struct Cli {
    /// Run-configuration TOML; individual flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Sweep band: 306-321 or 356-371.
    #[arg(long, global = true)]
    band: Option<Band>,
    /// Master seed for randomized stages.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Analysis window below the strongest sample, dB.
    #[arg(long, global = true)]
    dynamic_range_db: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    /// Strongest single steering direction.
    Best,
    /// Sum over all steering directions.
    Omni,
}

impl From<KindArg> for PlKind {
    fn from(k: KindArg) -> PlKind {
        match k {
            KindArg::Best => PlKind::Best,
            KindArg::Omni => PlKind::Omni,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Remove the system response from a raw sweep and emit per-steering
    /// impulse responses.
    Calibrate {
        /// Raw sweep CSV (az_deg,el_deg,freq_hz,re,im).
        #[arg(long)]
        sweep: PathBuf,
        /// Back-to-back reference sweep CSV (freq_hz,re,im).
        #[arg(long)]
        calib: PathBuf,
    },
    /// Threshold a directory of impulse responses into a multipath table.
    Extract {
        /// Directory of impulse-response CSVs (as written by `calibrate`).
        #[arg(long)]
        cir_dir: PathBuf,
    },
    /// Fold a multipath table into its azimuth power profile and detect
    /// beams.
    Beams {
        #[arg(long)]
        mpcs: PathBuf,
    },
    /// Delay/angle dispersion report of a multipath table.
    Spreads {
        #[arg(long)]
        mpcs: PathBuf,
        /// Receiver label recorded in the report.
        #[arg(long, default_value = "rx")]
        rx: String,
    },
    /// Fit a path-loss model to a sample table.
    Plfit {
        /// Sample table CSV (rx_id,distance_m,pl_best_db,pl_omni_db).
        #[arg(long)]
        samples: PathBuf,
        #[arg(long, value_enum, default_value_t = PlModel::Ci)]
        model: PlModel,
        #[arg(long, value_enum, default_value_t = KindArg::Best)]
        kind: KindArg,
        /// Close-in reference distance, m (defaults to the configured value).
        #[arg(long)]
        d0_m: Option<f64>,
        /// Corner distance for the mab model, m.
        #[arg(long, alias = "d1")]
        corner_m: Option<f64>,
        /// Carrier frequency for the ci model, Hz (defaults to band center).
        #[arg(long)]
        freq_hz: Option<f64>,
    },
    /// Deterministic reflected paths for one receiver of a scene.
    Trace {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        rx: String,
    },
    /// Forecast the dominant far-corridor arrival over a slide away from an
    /// anchor receiver.
    Evolve {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        anchor: String,
        /// Largest slide, m.
        #[arg(long, default_value_t = 15.0)]
        delta_max_m: f64,
        /// Slide step, m.
        #[arg(long, default_value_t = 1.0)]
        step_m: f64,
    },
    /// Synthesize stochastic channel realizations.
    Synth {
        /// Scene TOML (required unless --demo).
        #[arg(long)]
        scene: Option<PathBuf>,
        /// Receiver id (required unless --demo).
        #[arg(long)]
        rx: Option<String>,
        /// Regenerate the bundled indoor/outdoor fixtures end to end.
        #[arg(long)]
        demo: bool,
    },
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(band) = cli.band {
        cfg.band = band;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(dr) = cli.dynamic_range_db {
        cfg.dynamic_range_db = dr;
    }
    if let Some(out) = cli.out {
        cfg.out = out;
    }

    match &cli.command {
        Command::Calibrate { sweep, calib } => commands::cmd_calibrate(&cfg, sweep, calib),
        Command::Extract { cir_dir } => commands::cmd_extract(&cfg, cir_dir),
        Command::Beams { mpcs } => commands::cmd_beams(&cfg, mpcs),
        Command::Spreads { mpcs, rx } => commands::cmd_spreads(&cfg, mpcs, rx),
        Command::Plfit {
            samples,
            model,
            kind,
            d0_m,
            corner_m,
            freq_hz,
        } => commands::cmd_plfit(
            &cfg,
            samples,
            &PlfitArgs {
                model: *model,
                kind: (*kind).into(),
                d0_m: d0_m.unwrap_or(cfg.d0_m),
                corner_m: *corner_m,
                freq_hz: *freq_hz,
            },
        ),
        Command::Trace { scene, rx } => commands::cmd_trace(&cfg, scene, rx),
        Command::Evolve {
            scene,
            anchor,
            delta_max_m,
            step_m,
        } => commands::cmd_evolve(&cfg, scene, anchor, *delta_max_m, *step_m),
        Command::Synth { scene, rx, demo } => {
            if *demo {
                return demo::cmd_demo(&cfg);
            }
            let (Some(scene), Some(rx)) = (scene, rx) else {
                bail!("synth requires --scene and --rx unless --demo is given");
            };
            commands::cmd_synth_single(&cfg, scene, rx)
        }
    }
}

//! Text artifacts: CSV for sweeps, impulse responses, MPC lists, beams,
//! profiles and path-loss samples; TOML for scenes, model parameters and
//! realizations. Writers are deterministic (no timestamps) so reruns are
//! byte-identical; readers report 1-based line numbers on bad input.

use std::fs;
use std::io::{BufWriter, Write as _};
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::analysis::{AzimuthPowerProfile, Beam};
use crate::band::Direction;
use crate::error::{Error, Result};
use crate::mpc::Mpc;
use crate::pathloss::{PathLossSample, PlPair};
use crate::sounding::{CalibrationRecord, Cir, SweepRecord};

fn parse_err(path: &Path, line: u64, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn parse_f64(path: &Path, record: &csv::StringRecord, idx: usize, name: &str) -> Result<f64> {
    let raw = record
        .get(idx)
        .ok_or_else(|| parse_err(path, record_line(record), format!("missing column {name}")))?;
    raw.trim().parse::<f64>().map_err(|e| {
        parse_err(
            path,
            record_line(record),
            format!("column {name}: {raw:?} is not a number ({e})"),
        )
    })
}

fn open_reader(path: &Path, expected_header: &[&str]) -> Result<csv::Reader<fs::File>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| parse_err(path, 0, e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?;
    let got: Vec<&str> = headers.iter().collect();
    if got != expected_header {
        return Err(parse_err(
            path,
            1,
            format!("expected header {expected_header:?}, got {got:?}"),
        ));
    }
    Ok(reader)
}

/// Comment lines (without the `#`) followed by a CSV header.
fn start_csv(path: &Path, comments: &[String], header: &[&str]) -> Result<BufWriter<fs::File>> {
    let mut file = BufWriter::new(fs::File::create(path)?);
    for line in comments {
        writeln!(file, "# {line}")?;
    }
    writeln!(file, "{}", header.join(","))?;
    Ok(file)
}

// ---------------------------------------------------------------- sweeps --

const SWEEP_HEADER: [&str; 5] = ["az_deg", "el_deg", "freq_hz", "re", "im"];

/// Frequency sweep per steering direction, one tone per row, directions in
/// contiguous blocks.
pub fn write_sweep_csv(path: &Path, freqs_hz: &[f64], records: &[SweepRecord]) -> Result<()> {
    for r in records {
        if r.s21.len() != freqs_hz.len() {
            return Err(Error::LengthMismatch {
                what: "sweep tones vs frequency ladder",
                expected: freqs_hz.len(),
                got: r.s21.len(),
            });
        }
    }
    let mut file = start_csv(path, &[], &SWEEP_HEADER)?;
    for r in records {
        for (f, s) in freqs_hz.iter().zip(&r.s21) {
            writeln!(
                file,
                "{},{},{},{},{}",
                r.direction.az_deg, r.direction.el_deg, f, s.re, s.im
            )?;
        }
    }
    file.flush()?;
    Ok(())
}

/// Read a sweep file back; every direction block must repeat the frequency
/// ladder of the first block exactly.
pub fn read_sweep_csv(path: &Path) -> Result<(Vec<f64>, Vec<SweepRecord>)> {
    let mut reader = open_reader(path, &SWEEP_HEADER)?;
    let mut freqs: Vec<f64> = Vec::new();
    let mut records: Vec<SweepRecord> = Vec::new();
    let mut first_block = true;
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(path, 0, e.to_string()))?;
        let az = parse_f64(path, &record, 0, "az_deg")?;
        let el = parse_f64(path, &record, 1, "el_deg")?;
        let f = parse_f64(path, &record, 2, "freq_hz")?;
        let re = parse_f64(path, &record, 3, "re")?;
        let im = parse_f64(path, &record, 4, "im")?;
        let same_dir = records
            .last()
            .is_some_and(|r: &SweepRecord| r.direction.az_deg == az && r.direction.el_deg == el);
        if !same_dir {
            if let Some(prev) = records.last() {
                if prev.s21.len() != freqs.len() {
                    return Err(parse_err(
                        path,
                        record_line(&record),
                        format!(
                            "direction block ({}, {}) has {} tones, ladder has {}",
                            prev.direction.az_deg,
                            prev.direction.el_deg,
                            prev.s21.len(),
                            freqs.len()
                        ),
                    ));
                }
            }
            first_block = records.is_empty();
            records.push(SweepRecord {
                direction: Direction { az_deg: az, el_deg: el },
                s21: Vec::new(),
            });
        }
        let rec = records.last_mut().expect("block started");
        let k = rec.s21.len();
        if first_block {
            freqs.push(f);
        } else if k >= freqs.len() || (freqs[k] - f).abs() > 1e-3 {
            return Err(parse_err(
                path,
                record_line(&record),
                format!("tone {k} at {f} Hz does not match the ladder"),
            ));
        }
        rec.s21.push(Complex64::new(re, im));
    }
    if records.is_empty() {
        return Err(parse_err(path, 0, "sweep file has no data rows"));
    }
    if let Some(last) = records.last() {
        if last.s21.len() != freqs.len() {
            return Err(parse_err(
                path,
                0,
                format!(
                    "final direction block has {} tones, ladder has {}",
                    last.s21.len(),
                    freqs.len()
                ),
            ));
        }
    }
    Ok((freqs, records))
}

const CAL_HEADER: [&str; 3] = ["freq_hz", "re", "im"];

/// Reference (back-to-back) sweep, one tone per row.
pub fn write_calibration_csv(path: &Path, freqs_hz: &[f64], s21: &[Complex64]) -> Result<()> {
    if freqs_hz.len() != s21.len() {
        return Err(Error::LengthMismatch {
            what: "calibration tones vs frequency ladder",
            expected: freqs_hz.len(),
            got: s21.len(),
        });
    }
    let mut file = start_csv(path, &[], &CAL_HEADER)?;
    for (f, s) in freqs_hz.iter().zip(s21) {
        writeln!(file, "{},{},{}", f, s.re, s.im)?;
    }
    file.flush()?;
    Ok(())
}

/// Read a reference sweep; the attenuator setting travels alongside it.
pub fn read_calibration_csv(
    path: &Path,
    attenuator_gain_db: f64,
) -> Result<(Vec<f64>, CalibrationRecord)> {
    let mut reader = open_reader(path, &CAL_HEADER)?;
    let mut freqs = Vec::new();
    let mut s21 = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(path, 0, e.to_string()))?;
        freqs.push(parse_f64(path, &record, 0, "freq_hz")?);
        s21.push(Complex64::new(
            parse_f64(path, &record, 1, "re")?,
            parse_f64(path, &record, 2, "im")?,
        ));
    }
    if freqs.is_empty() {
        return Err(parse_err(path, 0, "calibration file has no data rows"));
    }
    Ok((freqs, CalibrationRecord { s21, attenuator_gain_db }))
}

// ------------------------------------------------------------------ MPCs --

const MPC_HEADER: [&str; 4] = ["toa_ns", "aoa_az_deg", "aoa_el_deg", "power_db"];

pub fn write_mpcs_csv(path: &Path, comments: &[String], mpcs: &[Mpc]) -> Result<()> {
    let mut file = start_csv(path, comments, &MPC_HEADER)?;
    for m in mpcs {
        writeln!(
            file,
            "{},{},{},{}",
            m.toa_ns, m.aoa_az_deg, m.aoa_el_deg, m.power_db
        )?;
    }
    file.flush()?;
    Ok(())
}

pub fn read_mpcs_csv(path: &Path) -> Result<Vec<Mpc>> {
    let mut reader = open_reader(path, &MPC_HEADER)?;
    let mut mpcs = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(path, 0, e.to_string()))?;
        let mpc = Mpc::new(
            parse_f64(path, &record, 0, "toa_ns")?,
            parse_f64(path, &record, 1, "aoa_az_deg")?,
            parse_f64(path, &record, 2, "aoa_el_deg")?,
            parse_f64(path, &record, 3, "power_db")?,
        )
        .map_err(|e| parse_err(path, record_line(&record), e.to_string()))?;
        mpcs.push(mpc);
    }
    Ok(mpcs)
}

// ----------------------------------------------------------------- beams --

const BEAM_HEADER: [&str; 5] = [
    "center_deg",
    "width_deg",
    "peak_az_deg",
    "peak_dbm",
    "prominence_db",
];

pub fn write_beams_csv(path: &Path, comments: &[String], beams: &[Beam]) -> Result<()> {
    let mut file = start_csv(path, comments, &BEAM_HEADER)?;
    for b in beams {
        writeln!(
            file,
            "{},{},{},{},{}",
            b.center_deg, b.width_deg, b.peak_az_deg, b.peak_dbm, b.prominence_db
        )?;
    }
    file.flush()?;
    Ok(())
}

pub fn read_beams_csv(path: &Path) -> Result<Vec<Beam>> {
    let mut reader = open_reader(path, &BEAM_HEADER)?;
    let mut beams = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(path, 0, e.to_string()))?;
        beams.push(Beam {
            center_deg: parse_f64(path, &record, 0, "center_deg")?,
            width_deg: parse_f64(path, &record, 1, "width_deg")?,
            peak_az_deg: parse_f64(path, &record, 2, "peak_az_deg")?,
            peak_dbm: parse_f64(path, &record, 3, "peak_dbm")?,
            prominence_db: parse_f64(path, &record, 4, "prominence_db")?,
        });
    }
    Ok(beams)
}

// -------------------------------------------------------------- profiles --

const PROFILE_HEADER: [&str; 2] = ["az_deg", "power_dbm"];

pub fn write_profile_csv(
    path: &Path,
    comments: &[String],
    profile: &AzimuthPowerProfile,
) -> Result<()> {
    let mut file = start_csv(path, comments, &PROFILE_HEADER)?;
    for (a, p) in profile.az_deg.iter().zip(&profile.power_dbm) {
        writeln!(file, "{a},{p}")?;
    }
    file.flush()?;
    Ok(())
}

pub fn read_profile_csv(path: &Path) -> Result<AzimuthPowerProfile> {
    let mut reader = open_reader(path, &PROFILE_HEADER)?;
    let mut az_deg = Vec::new();
    let mut power_dbm = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(path, 0, e.to_string()))?;
        az_deg.push(parse_f64(path, &record, 0, "az_deg")?);
        power_dbm.push(parse_f64(path, &record, 1, "power_dbm")?);
    }
    let profile = AzimuthPowerProfile { az_deg, power_dbm };
    profile.validate()?;
    Ok(profile)
}

// ------------------------------------------------------------------ CIRs --

const CIR_HEADER: [&str; 3] = ["bin", "re", "im"];

/// Impulse response with its steering and bin width in comment lines.
pub fn write_cir_csv(path: &Path, cir: &Cir) -> Result<()> {
    let comments = vec![
        format!("az_deg = {}", cir.direction.az_deg),
        format!("el_deg = {}", cir.direction.el_deg),
        format!("bin_s = {}", cir.bin_s),
    ];
    let mut file = start_csv(path, &comments, &CIR_HEADER)?;
    for (bin, tap) in cir.taps.iter().enumerate() {
        writeln!(file, "{},{},{}", bin, tap.re, tap.im)?;
    }
    file.flush()?;
    Ok(())
}

pub fn read_cir_csv(path: &Path) -> Result<Cir> {
    // Pull the metadata out of the leading comment lines first.
    let text = fs::read_to_string(path)?;
    let mut az_deg = None;
    let mut el_deg = None;
    let mut bin_s = None;
    for (i, line) in text.lines().enumerate() {
        let Some(rest) = line.strip_prefix('#') else { break };
        let mut parts = rest.splitn(2, '=');
        let key = parts.next().unwrap_or("").trim();
        let value = parts
            .next()
            .ok_or_else(|| parse_err(path, i as u64 + 1, "comment is not `key = value`"))?
            .trim();
        let value: f64 = value.parse().map_err(|e| {
            parse_err(path, i as u64 + 1, format!("{key}: {value:?} is not a number ({e})"))
        })?;
        match key {
            "az_deg" => az_deg = Some(value),
            "el_deg" => el_deg = Some(value),
            "bin_s" => bin_s = Some(value),
            other => return Err(parse_err(path, i as u64 + 1, format!("unknown key {other:?}"))),
        }
    }
    let (Some(az_deg), Some(el_deg), Some(bin_s)) = (az_deg, el_deg, bin_s) else {
        return Err(parse_err(path, 1, "missing az_deg / el_deg / bin_s comments"));
    };

    let mut reader = open_reader(path, &CIR_HEADER)?;
    let mut taps = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(path, 0, e.to_string()))?;
        let bin = parse_f64(path, &record, 0, "bin")? as usize;
        if bin != taps.len() {
            return Err(parse_err(
                path,
                record_line(&record),
                format!("bins must be contiguous from 0; expected {}, got {bin}", taps.len()),
            ));
        }
        taps.push(Complex64::new(
            parse_f64(path, &record, 1, "re")?,
            parse_f64(path, &record, 2, "im")?,
        ));
    }
    if taps.is_empty() {
        return Err(parse_err(path, 0, "impulse response has no taps"));
    }
    Ok(Cir {
        direction: Direction { az_deg, el_deg },
        taps,
        bin_s,
    })
}

// ------------------------------------------------------- path-loss tables --

const PL_HEADER: [&str; 4] = ["rx_id", "distance_m", "pl_best_db", "pl_omni_db"];

/// Per-position path-loss table; fit parameters travel as comment lines.
pub fn write_path_loss_csv(
    path: &Path,
    comments: &[String],
    samples: &[PathLossSample],
) -> Result<()> {
    let mut file = start_csv(path, comments, &PL_HEADER)?;
    for s in samples {
        writeln!(
            file,
            "{},{},{},{}",
            s.rx_id, s.distance_m, s.pl.best_db, s.pl.omni_db
        )?;
    }
    file.flush()?;
    Ok(())
}

pub fn read_path_loss_csv(path: &Path) -> Result<Vec<PathLossSample>> {
    let mut reader = open_reader(path, &PL_HEADER)?;
    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(path, 0, e.to_string()))?;
        let rx_id = record
            .get(0)
            .ok_or_else(|| parse_err(path, record_line(&record), "missing column rx_id"))?
            .to_string();
        samples.push(PathLossSample {
            rx_id,
            distance_m: parse_f64(path, &record, 1, "distance_m")?,
            pl: PlPair {
                best_db: parse_f64(path, &record, 2, "pl_best_db")?,
                omni_db: parse_f64(path, &record, 3, "pl_omni_db")?,
            },
        });
    }
    Ok(samples)
}

// ------------------------------------------------------------------ TOML --

/// Serialize any model object (scene, parameters, realization) to TOML.
pub fn write_toml<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = toml::to_string_pretty(value).map_err(|e| Error::InvalidParameter {
        what: format!("cannot serialize to {}: {e}", path.display()),
    })?;
    fs::write(path, text)?;
    Ok(())
}

pub fn read_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| {
        let line = e
            .span()
            .map(|s| text[..s.start.min(text.len())].bytes().filter(|&b| b == b'\n').count() as u64 + 1)
            .unwrap_or(0);
        parse_err(path, line, e.message().to_string())
    })
}

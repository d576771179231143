//! Hybrid channel synthesis: deterministic ray-traced clusters anchored to
//! the scene geometry, statistical clusters layered around them, and
//! per-cluster subpath shaping that realizes drawn delay/angle spreads
//! exactly. Also the inverse direction: pooling realized clusters back into
//! the statistical laws.

use rand::SeedableRng;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::band::{Band, Direction, ScanGrid};
use crate::error::{Error, Result};
use crate::evolve::{self, EvolveParams};
use crate::geometry::{LShapeScene, Region};
use crate::mpc::{Cluster, ClusterKind, Mpc};
use crate::raytrace;
use crate::sounding::Cir;
use crate::units::{signed_angle_diff_deg, wrap_az_deg};
use num_complex::Complex64;

/// Log-normal law stored in the log domain: `X = exp(μ + σ Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormalLaw {
    pub mu_log: f64,
    pub sigma_log: f64,
}

impl LogNormalLaw {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu_log.is_finite() && self.sigma_log.is_finite() && self.sigma_log >= 0.0) {
            return Err(Error::InvalidParameter {
                what: format!("log-normal law needs finite μ and σ ≥ 0, got {self:?}"),
            });
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        (self.mu_log + self.sigma_log * z).exp()
    }

    /// Distribution mean `exp(μ + σ²/2)`.
    pub fn mean(&self) -> f64 {
        (self.mu_log + self.sigma_log * self.sigma_log / 2.0).exp()
    }
}

/// Per-cluster-kind laws: how many rays a cluster carries and how far they
/// spread in delay and azimuth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KindLaws {
    /// Total rays per cluster (center included); rounded, floored at 1.
    pub ray_count: LogNormalLaw,
    /// Per-cluster rms delay spread target, ns.
    pub delay_spread_ns: LogNormalLaw,
    /// Per-cluster rms azimuth spread target, degrees.
    pub angle_spread_deg: LogNormalLaw,
}

/// Where statistical (non-traced) cluster centers are placed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacementRanges {
    /// Poisson mean of the statistical-cluster count (0 disables them).
    pub count_mean: f64,
    /// Uniform arrival-time range, ns.
    pub toa_ns: (f64, f64),
    /// Uniform arrival-azimuth range, degrees.
    pub aoa_deg: (f64, f64),
    /// Uniform power offset below the strongest traced center, dB.
    pub below_strongest_db: (f64, f64),
}

/// Subpath shaping constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubpathShape {
    /// Minimum power drop of any subpath below its center, dB.
    pub power_floor_db: f64,
    /// Mean of the exponential extra drop, dB.
    pub power_exp_mean_db: f64,
    /// Maximum total drop below the center, dB.
    pub power_cap_db: f64,
    /// Minimum subpath delay offset, in CIR bins, so subpaths stay
    /// resolvable from their center.
    pub min_delay_offset_bins: f64,
}

impl Default for SubpathShape {
    fn default() -> SubpathShape {
        SubpathShape {
            power_floor_db: 3.0,
            power_exp_mean_db: 4.0,
            power_cap_db: 25.0,
            min_delay_offset_bins: 2.0,
        }
    }
}

/// Full statistical model: per-kind cluster laws plus placement and shaping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatLaws {
    pub rt: Option<KindLaws>,
    pub non_rt: Option<KindLaws>,
    pub placement: PlacementRanges,
    pub shape: SubpathShape,
}

impl Default for StatLaws {
    fn default() -> StatLaws {
        StatLaws {
            rt: Some(KindLaws {
                ray_count: LogNormalLaw { mu_log: 6.0f64.ln(), sigma_log: 0.35 },
                delay_spread_ns: LogNormalLaw { mu_log: 4.0f64.ln(), sigma_log: 0.5 },
                angle_spread_deg: LogNormalLaw { mu_log: 5.0f64.ln(), sigma_log: 0.5 },
            }),
            non_rt: Some(KindLaws {
                ray_count: LogNormalLaw { mu_log: 4.0f64.ln(), sigma_log: 0.4 },
                delay_spread_ns: LogNormalLaw { mu_log: 6.0f64.ln(), sigma_log: 0.5 },
                angle_spread_deg: LogNormalLaw { mu_log: 7.0f64.ln(), sigma_log: 0.45 },
            }),
            placement: PlacementRanges {
                count_mean: 4.0,
                toa_ns: (65.0, 200.0),
                aoa_deg: (0.0, 180.0),
                below_strongest_db: (5.0, 20.0),
            },
            shape: SubpathShape::default(),
        }
    }
}

impl StatLaws {
    pub fn kind_laws(&self, kind: ClusterKind) -> Result<&KindLaws> {
        let laws = match kind {
            ClusterKind::Rt => &self.rt,
            ClusterKind::NonRt => &self.non_rt,
        };
        laws.as_ref().ok_or(Error::LawsUnset {
            kind: match kind {
                ClusterKind::Rt => "traced",
                ClusterKind::NonRt => "statistical",
            },
        })
    }

    pub fn validate(&self) -> Result<()> {
        for laws in [self.rt.as_ref(), self.non_rt.as_ref()].into_iter().flatten() {
            laws.ray_count.validate()?;
            laws.delay_spread_ns.validate()?;
            laws.angle_spread_deg.validate()?;
        }
        let p = &self.placement;
        if !(p.count_mean.is_finite() && p.count_mean >= 0.0)
            || p.toa_ns.1 < p.toa_ns.0
            || p.aoa_deg.1 < p.aoa_deg.0
            || p.below_strongest_db.1 < p.below_strongest_db.0
            || p.below_strongest_db.0 < 0.0
        {
            return Err(Error::InvalidParameter {
                what: format!("placement ranges are inconsistent: {p:?}"),
            });
        }
        let s = &self.shape;
        if !(s.power_floor_db >= 0.0
            && s.power_cap_db >= s.power_floor_db
            && s.power_exp_mean_db > 0.0
            && s.min_delay_offset_bins > 0.0)
        {
            return Err(Error::InvalidParameter {
                what: format!("subpath shape is inconsistent: {s:?}"),
            });
        }
        Ok(())
    }
}

/// Everything the synthesizer needs besides the scene and rx.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    pub band: Band,
    pub seed: u64,
    /// Bounce order for the deterministic anchors.
    pub max_bounces: usize,
    /// Traced paths within this window of the strongest become cluster
    /// centers at unshadowed positions, dB.
    pub rt_window_db: f64,
    pub evolve: EvolveParams,
    pub laws: StatLaws,
}

impl SynthOptions {
    pub fn new(band: Band) -> SynthOptions {
        SynthOptions {
            band,
            seed: 0,
            max_bounces: 4,
            rt_window_db: 30.0,
            evolve: EvolveParams::default(),
            laws: StatLaws::default(),
        }
    }
}

/// A synthesized channel at one position: cluster centers plus shaped
/// subpaths, fully reproducible from the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub rx_id: String,
    pub band: Band,
    pub region: Region,
    pub seed: u64,
    pub clusters: Vec<Cluster>,
}

impl Realization {
    /// All rays, centers first within each cluster.
    pub fn all_mpcs(&self) -> Vec<Mpc> {
        self.clusters.iter().flat_map(|c| c.mpcs().cloned()).collect()
    }
}

/// Deterministic cluster centers for the rx's region.
fn traced_centers(scene: &LShapeScene, rx_id: &str, opts: &SynthOptions) -> Result<(Region, Vec<Mpc>)> {
    let (bent_m, region) = scene.rx_bent_distance_m(rx_id)?;
    let freq_hz = opts.band.config().center_hz();
    let centers = match region {
        Region::Los => {
            let rx = scene.rx_by_id(rx_id)?;
            let paths = raytrace::trace(scene, &rx.pos, freq_hz, opts.max_bounces)?;
            let best = paths
                .iter()
                .map(|p| p.power_db)
                .fold(f64::NEG_INFINITY, f64::max);
            let centers: Vec<Mpc> = paths
                .iter()
                .filter(|p| p.power_db >= best - opts.rt_window_db)
                .map(|p| p.to_mpc())
                .collect();
            if centers.is_empty() {
                return Err(Error::InsufficientData {
                    what: "traced cluster centers",
                    needed: 1,
                    got: 0,
                });
            }
            centers
        }
        Region::Corner => {
            return Err(Error::InvalidParameter {
                what: format!(
                    "rx {rx_id:?} sits in the corner transition band \
                     ({bent_m} m); no synthesis model covers it"
                ),
            });
        }
        Region::NearNlos => {
            let pair = raytrace::reference_dominant_mpcs(scene, rx_id, freq_hz, opts.max_bounces)?;
            vec![pair.via_outer, pair.via_inner]
        }
        Region::FarNlos => {
            let rx = scene.rx_by_id(rx_id)?;
            // Evolve from the farthest traced reference in the same row.
            let anchor_id = scene
                .rx
                .iter()
                .filter(|r| {
                    (r.pos.y_m - rx.pos.y_m).abs() < 1e-6
                        && scene.classify(scene.bent_axis_distance_m(&r.pos)) == Region::NearNlos
                })
                .max_by(|a, b| {
                    scene
                        .bent_axis_distance_m(&a.pos)
                        .total_cmp(&scene.bent_axis_distance_m(&b.pos))
                })
                .map(|r| r.id.clone())
                .ok_or_else(|| Error::MissingReference {
                    rx_id: rx_id.to_string(),
                })?;
            let anchor = evolve::reference_anchor(scene, &anchor_id, freq_hz, opts.max_bounces)?;
            let evolved =
                evolve::evolve_dominant(&anchor, &opts.evolve, opts.band, bent_m - anchor.bent_m)?;
            let (outer, inner) = evolved.to_mpcs();
            vec![outer, inner]
        }
    };
    Ok((region, centers))
}

/// Place statistical cluster centers around the traced ones.
fn place_non_rt_centers(
    rng: &mut ChaCha12Rng,
    rt_centers: &[Mpc],
    laws: &StatLaws,
    bin_ns: f64,
) -> Result<Vec<Mpc>> {
    let p = &laws.placement;
    if p.count_mean <= 0.0 {
        return Ok(Vec::new());
    }
    let count = Poisson::new(p.count_mean)
        .map_err(|e| Error::InvalidParameter {
            what: format!("statistical cluster count mean: {e}"),
        })?
        .sample(rng) as usize;
    let strongest = rt_centers
        .iter()
        .map(|m| m.power_db)
        .fold(f64::NEG_INFINITY, f64::max);
    let min_sep_ns = laws.shape.min_delay_offset_bins * bin_ns;
    let mut centers = Vec::with_capacity(count);
    for _ in 0..count {
        let mut placed = false;
        for _try in 0..1000 {
            let toa = rng.random_range(p.toa_ns.0..=p.toa_ns.1);
            let clear = rt_centers
                .iter()
                .all(|m| (m.toa_ns - toa).abs() >= min_sep_ns);
            if !clear {
                continue;
            }
            let aoa = rng.random_range(p.aoa_deg.0..=p.aoa_deg.1);
            let below = rng.random_range(p.below_strongest_db.0..=p.below_strongest_db.1);
            centers.push(Mpc::new(toa, aoa, 0.0, strongest - below)?);
            placed = true;
            break;
        }
        if !placed {
            return Err(Error::InvalidParameter {
                what: "could not place a statistical cluster clear of the traced centers \
                       (delay ranges too tight)"
                    .into(),
            });
        }
    }
    Ok(centers)
}

/// Shape one cluster's subpaths so the realized power-weighted delay and
/// azimuth spreads hit the drawn targets exactly.
///
/// Delay offsets are `min + s·Exp(1)` with `s` solving the spread equation
/// in closed form (falling back to the minimum offset when the target is
/// below what the minimum already produces). Azimuth offsets are Laplace
/// draws recentered so the power-weighted mean azimuth stays on the center,
/// then scaled to the target spread. The center ray itself is never moved.
fn shape_cluster(
    rng: &mut ChaCha12Rng,
    kind: ClusterKind,
    center: Mpc,
    laws: &StatLaws,
    bin_ns: f64,
) -> Result<Cluster> {
    let kind_laws = laws.kind_laws(kind)?;
    let n_total = (kind_laws.ray_count.sample(rng).round() as i64).max(1) as usize;
    let n_extra = n_total - 1;
    if n_extra == 0 {
        return Ok(Cluster { kind, center, subpaths: Vec::new() });
    }
    let target_ds = kind_laws.delay_spread_ns.sample(rng);
    let target_as = kind_laws.angle_spread_deg.sample(rng);

    let exp1 = Exp::new(1.0).expect("unit rate");
    let exp_power = Exp::new(1.0 / laws.shape.power_exp_mean_db).expect("positive rate");
    let mut delays_raw = Vec::with_capacity(n_extra);
    let mut angles_raw = Vec::with_capacity(n_extra);
    let mut weights = Vec::with_capacity(n_extra);
    let mut drops_db = Vec::with_capacity(n_extra);
    for _ in 0..n_extra {
        delays_raw.push(exp1.sample(rng));
        // Laplace via inverse CDF, unit scale.
        let u: f64 = rng.random_range(-0.5..0.5);
        angles_raw.push(-u.signum() * (1.0 - 2.0 * u.abs()).ln());
        let drop = (laws.shape.power_floor_db + exp_power.sample(rng)).min(laws.shape.power_cap_db);
        drops_db.push(drop);
        weights.push(10f64.powf(-drop / 10.0)); // relative to the center
    }
    let w_center = 1.0;
    let w_total: f64 = w_center + weights.iter().sum::<f64>();
    let w_extra: f64 = weights.iter().sum();

    // Exact-delay-spread scale: with offsets m + s·e the cluster's weighted
    // variance is quadratic in s.
    let m = laws.shape.min_delay_offset_bins * bin_ns;
    let swe: f64 = weights.iter().zip(&delays_raw).map(|(w, e)| w * e).sum();
    let swee: f64 = weights.iter().zip(&delays_raw).map(|(w, e)| w * e * e).sum();
    let a = swee / w_total - (swe / w_total).powi(2);
    let b = 2.0 * m * swe * (w_total - w_extra) / (w_total * w_total);
    let c = m * m * w_extra * (w_total - w_extra) / (w_total * w_total);
    let t2 = target_ds * target_ds;
    let s = if t2 <= c || a <= 0.0 {
        0.0
    } else {
        (-b + (b * b + 4.0 * a * (t2 - c)).sqrt()) / (2.0 * a)
    };

    // Exact-angle-spread offsets: recenter the extras so the weighted mean
    // azimuth equals the center's, then scale.
    let mean_angle = weights
        .iter()
        .zip(&angles_raw)
        .map(|(w, x)| w * x)
        .sum::<f64>()
        / w_extra;
    let centered: Vec<f64> = angles_raw.iter().map(|x| x - mean_angle).collect();
    let var_angle = weights
        .iter()
        .zip(&centered)
        .map(|(w, x)| w * x * x)
        .sum::<f64>()
        / w_total;
    let g = if var_angle > 0.0 {
        target_as / var_angle.sqrt()
    } else {
        0.0
    };

    let mut subpaths = Vec::with_capacity(n_extra);
    for i in 0..n_extra {
        subpaths.push(Mpc::new(
            center.toa_ns + m + s * delays_raw[i],
            wrap_az_deg(center.aoa_az_deg + g * centered[i]),
            center.aoa_el_deg,
            center.power_db - drops_db[i],
        )?);
    }
    Ok(Cluster { kind, center, subpaths })
}

/// Synthesize the channel at one rx: traced centers for the region,
/// statistical centers around them, subpaths shaped per cluster.
///
/// Randomness is split over independent ChaCha streams keyed off `seed`:
/// stream 0 draws counts and centers, stream `i + 1` draws cluster `i`'s
/// subpaths.
pub fn synthesize(scene: &LShapeScene, rx_id: &str, opts: &SynthOptions) -> Result<Realization> {
    opts.laws.validate()?;
    opts.evolve.validate()?;
    let (region, rt_centers) = traced_centers(scene, rx_id, opts)?;
    let bin_ns = opts.band.config().cir_bin_s() * 1e9;

    let mut rng = ChaCha12Rng::seed_from_u64(opts.seed);
    rng.set_stream(0);
    let non_rt_centers = place_non_rt_centers(&mut rng, &rt_centers, &opts.laws, bin_ns)?;

    let mut clusters = Vec::with_capacity(rt_centers.len() + non_rt_centers.len());
    let all_centers = rt_centers
        .into_iter()
        .map(|c| (ClusterKind::Rt, c))
        .chain(non_rt_centers.into_iter().map(|c| (ClusterKind::NonRt, c)));
    for (i, (kind, center)) in all_centers.enumerate() {
        let mut sub_rng = ChaCha12Rng::seed_from_u64(opts.seed);
        sub_rng.set_stream(i as u64 + 1);
        clusters.push(shape_cluster(&mut sub_rng, kind, center, &opts.laws, bin_ns)?);
    }
    Ok(Realization {
        rx_id: rx_id.to_string(),
        band: opts.band,
        region,
        seed: opts.seed,
        clusters,
    })
}

fn mpcs_to_taps(mpcs: &[&Mpc], band: Band) -> Result<Vec<Complex64>> {
    let cfg = band.config();
    let bin_s = cfg.cir_bin_s();
    let fc = cfg.center_hz();
    let max_ns = cfg.max_excess_delay_s() * 1e9;
    let offenders: Vec<(usize, f64)> = mpcs
        .iter()
        .enumerate()
        .filter_map(|(i, m)| {
            let bin = (m.toa_ns * 1e-9 / bin_s).round() as usize;
            (bin >= cfg.n_points).then_some((i, m.toa_ns))
        })
        .collect();
    if let Some(&(first_index, first_toa_ns)) = offenders.first() {
        return Err(Error::DelayOutOfRange {
            count: offenders.len(),
            max_ns,
            first_toa_ns,
            first_index,
        });
    }
    let mut taps = vec![Complex64::new(0.0, 0.0); cfg.n_points];
    for m in mpcs {
        let toa_s = m.toa_ns * 1e-9;
        let bin = (toa_s / bin_s).round() as usize;
        let amp = 10f64.powf(m.power_db / 20.0);
        let phase = -2.0 * std::f64::consts::PI * fc * toa_s;
        taps[bin] += Complex64::from_polar(amp, phase);
    }
    Ok(taps)
}

/// Collapse a realization into a single omnidirectional impulse response.
pub fn realization_to_cir_omni(r: &Realization) -> Result<Cir> {
    let mpcs: Vec<&Mpc> = r.clusters.iter().flat_map(|c| c.mpcs()).collect();
    let taps = mpcs_to_taps(&mpcs, r.band)?;
    Ok(Cir {
        direction: Direction { az_deg: 0.0, el_deg: 0.0 },
        taps,
        bin_s: r.band.config().cir_bin_s(),
    })
}

/// Expand a realization into per-steering impulse responses: each steering
/// captures the rays within half the beamwidth of its azimuth.
pub fn realization_to_cirs(r: &Realization, grid: &ScanGrid, rx_hpbw_deg: f64) -> Result<Vec<Cir>> {
    grid.validate()?;
    if !(rx_hpbw_deg.is_finite() && rx_hpbw_deg > 0.0) {
        return Err(Error::InvalidParameter {
            what: format!("beamwidth must be > 0 deg, got {rx_hpbw_deg}"),
        });
    }
    let all: Vec<&Mpc> = r.clusters.iter().flat_map(|c| c.mpcs()).collect();
    let mut cirs = Vec::new();
    for dir in grid.directions() {
        let captured: Vec<&Mpc> = all
            .iter()
            .copied()
            .filter(|m| {
                crate::units::cyclic_distance_deg(m.aoa_az_deg, dir.az_deg) <= rx_hpbw_deg / 2.0
            })
            .collect();
        let taps = mpcs_to_taps(&captured, r.band)?;
        cirs.push(Cir {
            direction: dir,
            taps,
            bin_s: r.band.config().cir_bin_s(),
        });
    }
    Ok(cirs)
}

/// Power-weighted rms delay spread of one cluster (center included), ns.
pub fn cluster_delay_spread_ns(cluster: &Cluster) -> f64 {
    let rays: Vec<&Mpc> = cluster.mpcs().collect();
    let w_total: f64 = rays.iter().map(|m| m.linear_power()).sum();
    let mean = rays
        .iter()
        .map(|m| m.linear_power() * m.toa_ns)
        .sum::<f64>()
        / w_total;
    (rays
        .iter()
        .map(|m| m.linear_power() * (m.toa_ns - mean).powi(2))
        .sum::<f64>()
        / w_total)
        .sqrt()
}

/// Power-weighted rms azimuth spread of one cluster about its weighted mean
/// direction, degrees (signed offsets from the center, so the 0°/360° wrap
/// is harmless for cluster-scale spreads).
pub fn cluster_angle_spread_deg(cluster: &Cluster) -> f64 {
    let rays: Vec<&Mpc> = cluster.mpcs().collect();
    let w_total: f64 = rays.iter().map(|m| m.linear_power()).sum();
    let offsets: Vec<f64> = rays
        .iter()
        .map(|m| signed_angle_diff_deg(m.aoa_az_deg, cluster.center.aoa_az_deg))
        .collect();
    let mean = rays
        .iter()
        .zip(&offsets)
        .map(|(m, o)| m.linear_power() * o)
        .sum::<f64>()
        / w_total;
    (rays
        .iter()
        .zip(&offsets)
        .map(|(m, o)| m.linear_power() * (o - mean).powi(2))
        .sum::<f64>()
        / w_total)
        .sqrt()
}

fn log_law(values: &[f64]) -> Option<LogNormalLaw> {
    let logs: Vec<f64> = values.iter().filter(|&&v| v > 0.0).map(|v| v.ln()).collect();
    if logs.len() < 2 {
        return None;
    }
    let n = logs.len() as f64;
    let mu = logs.iter().sum::<f64>() / n;
    let var = logs.iter().map(|l| (l - mu).powi(2)).sum::<f64>() / n;
    Some(LogNormalLaw { mu_log: mu, sigma_log: var.sqrt() })
}

/// Pool realized clusters back into statistical laws.
///
/// A kind's laws are fitted only when at least five clusters of that kind
/// exist and at least two of them carry enough subpaths (≥ 2) for a spread
/// estimate; otherwise that kind comes back `None`. Placement ranges are
/// the observed extremes of the statistical centers; shaping constants are
/// not re-estimated.
pub fn fit_stat_laws(realizations: &[Realization]) -> Result<StatLaws> {
    if realizations.is_empty() {
        return Err(Error::EmptyInput { what: "realizations" });
    }
    let mut out = StatLaws { rt: None, non_rt: None, ..StatLaws::default() };

    for kind in [ClusterKind::Rt, ClusterKind::NonRt] {
        let clusters: Vec<&Cluster> = realizations
            .iter()
            .flat_map(|r| r.clusters.iter())
            .filter(|c| c.kind == kind)
            .collect();
        if clusters.len() < 5 {
            continue;
        }
        let counts: Vec<f64> = clusters.iter().map(|c| (1 + c.subpaths.len()) as f64).collect();
        let spread_worthy: Vec<&&Cluster> =
            clusters.iter().filter(|c| c.subpaths.len() >= 2).collect();
        let ds: Vec<f64> = spread_worthy.iter().map(|c| cluster_delay_spread_ns(c)).collect();
        let asa: Vec<f64> = spread_worthy.iter().map(|c| cluster_angle_spread_deg(c)).collect();
        let (Some(ray_count), Some(delay_spread_ns), Some(angle_spread_deg)) =
            (log_law(&counts), log_law(&ds), log_law(&asa))
        else {
            continue;
        };
        let fitted = KindLaws { ray_count, delay_spread_ns, angle_spread_deg };
        match kind {
            ClusterKind::Rt => out.rt = Some(fitted),
            ClusterKind::NonRt => out.non_rt = Some(fitted),
        }
    }

    // Placement from the observed statistical centers.
    let mut counts = Vec::new();
    let mut toas: Vec<f64> = Vec::new();
    let mut aoas: Vec<f64> = Vec::new();
    let mut belows: Vec<f64> = Vec::new();
    for r in realizations {
        let strongest_rt = r
            .clusters
            .iter()
            .filter(|c| c.kind == ClusterKind::Rt)
            .map(|c| c.center.power_db)
            .fold(f64::NEG_INFINITY, f64::max);
        let non_rt: Vec<&Cluster> = r
            .clusters
            .iter()
            .filter(|c| c.kind == ClusterKind::NonRt)
            .collect();
        counts.push(non_rt.len() as f64);
        for c in &non_rt {
            toas.push(c.center.toa_ns);
            aoas.push(c.center.aoa_az_deg);
            if strongest_rt.is_finite() {
                belows.push(strongest_rt - c.center.power_db);
            }
        }
    }
    if !toas.is_empty() {
        let minmax = |v: &[f64]| {
            (
                v.iter().copied().fold(f64::INFINITY, f64::min),
                v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            )
        };
        out.placement = PlacementRanges {
            count_mean: counts.iter().sum::<f64>() / counts.len() as f64,
            toa_ns: minmax(&toas),
            aoa_deg: minmax(&aoas),
            below_strongest_db: if belows.is_empty() {
                out.placement.below_strongest_db
            } else {
                minmax(&belows)
            },
        };
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::indoor_scene;
    use crate::geometry::{Point, RxPosition};
    use crate::sounding::extract_mpcs;

    fn fixed_count_laws(n: usize, ds_ns: f64, as_deg: f64) -> StatLaws {
        let kind = KindLaws {
            ray_count: LogNormalLaw { mu_log: (n as f64).ln(), sigma_log: 0.0 },
            delay_spread_ns: LogNormalLaw { mu_log: ds_ns.ln(), sigma_log: 0.0 },
            angle_spread_deg: LogNormalLaw { mu_log: as_deg.ln(), sigma_log: 0.0 },
        };
        StatLaws {
            rt: Some(kind),
            non_rt: Some(kind),
            ..StatLaws::default()
        }
    }

    #[test]
    fn same_seed_reproduces_the_realization() {
        let scene = indoor_scene();
        let opts = SynthOptions { seed: 42, ..SynthOptions::new(Band::G306_321) };
        let a = synthesize(&scene, "N1R2", &opts).unwrap();
        let b = synthesize(&scene, "N1R2", &opts).unwrap();
        assert_eq!(a, b);
        let c = synthesize(&scene, "N1R2", &SynthOptions { seed: 43, ..opts }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn unshadowed_rx_gets_windowed_traced_centers() {
        let scene = indoor_scene();
        let opts = SynthOptions { seed: 1, ..SynthOptions::new(Band::G306_321) };
        let r = synthesize(&scene, "L2", &opts).unwrap();
        assert_eq!(r.region, Region::Los);
        let rt: Vec<_> = r.clusters.iter().filter(|c| c.kind == ClusterKind::Rt).collect();
        assert!(!rt.is_empty());
        let best = rt.iter().map(|c| c.center.power_db).fold(f64::NEG_INFINITY, f64::max);
        for c in &rt {
            assert!(c.center.power_db >= best - 30.0);
        }
        // The direct arrival at 12 m dominates.
        let direct_toa = 12.0 / crate::units::SPEED_OF_LIGHT_M_PER_S * 1e9;
        let strongest = rt
            .iter()
            .max_by(|a, b| a.center.power_db.total_cmp(&b.center.power_db))
            .unwrap();
        assert!((strongest.center.toa_ns - direct_toa).abs() < 0.1);
    }

    #[test]
    fn near_shadowed_rx_gets_exactly_two_traced_centers() {
        let scene = indoor_scene();
        let opts = SynthOptions { seed: 2, ..SynthOptions::new(Band::G306_321) };
        let r = synthesize(&scene, "N2R2", &opts).unwrap();
        assert_eq!(r.region, Region::NearNlos);
        let rt: Vec<_> = r.clusters.iter().filter(|c| c.kind == ClusterKind::Rt).collect();
        assert_eq!(rt.len(), 2);
        let az: Vec<f64> = rt.iter().map(|c| c.center.aoa_az_deg).collect();
        assert!(az.iter().any(|&a| a > 0.0 && a < 90.0), "outer side missing: {az:?}");
        assert!(az.iter().any(|&a| a > 90.0 && a < 180.0), "inner side missing: {az:?}");
    }

    #[test]
    fn far_shadowed_rx_evolves_from_its_row_anchor() {
        let scene = indoor_scene();
        let opts = SynthOptions { seed: 3, ..SynthOptions::new(Band::G306_321) };
        let r = synthesize(&scene, "N5R2", &opts).unwrap();
        assert_eq!(r.region, Region::FarNlos);
        let rt: Vec<_> = r.clusters.iter().filter(|c| c.kind == ClusterKind::Rt).collect();
        assert_eq!(rt.len(), 2);
        // Anchor is N3R2 (bent 30.78 m); this rx sits at bent 35.58 m.
        let delta = 35.58 - 30.78;
        let expect_toa = 4.45 * delta + 106.0;
        let expect_pow = -2.69 * delta - 122.0;
        for c in &rt {
            assert!((c.center.toa_ns - expect_toa).abs() < 1e-6, "toa {}", c.center.toa_ns);
            assert!((c.center.power_db - expect_pow).abs() < 1e-6);
        }
        assert!((rt[0].center.aoa_az_deg - rt[1].center.aoa_az_deg).abs() > 1.0);
    }

    #[test]
    fn corner_rx_is_rejected() {
        let mut scene = indoor_scene();
        scene.rx.push(RxPosition {
            id: "C0".into(),
            pos: Point::new(-1.485, 23.0),
            height_m: 1.8,
        });
        let opts = SynthOptions::new(Band::G306_321);
        assert!(matches!(
            synthesize(&scene, "C0", &opts),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn far_rx_without_row_anchor_is_reported() {
        let mut scene = indoor_scene();
        scene.rx.push(RxPosition {
            id: "F0".into(),
            pos: Point::new(-15.0, 18.0),
            height_m: 1.8,
        });
        let opts = SynthOptions::new(Band::G306_321);
        assert!(matches!(
            synthesize(&scene, "F0", &opts),
            Err(Error::MissingReference { rx_id }) if rx_id == "F0"
        ));
    }

    #[test]
    fn statistical_centers_respect_placement_rules() {
        let scene = indoor_scene();
        let mut opts = SynthOptions { seed: 7, ..SynthOptions::new(Band::G306_321) };
        opts.laws.placement.count_mean = 6.0;
        let r = synthesize(&scene, "N1R2", &opts).unwrap();
        let strongest_rt = r
            .clusters
            .iter()
            .filter(|c| c.kind == ClusterKind::Rt)
            .map(|c| c.center.power_db)
            .fold(f64::NEG_INFINITY, f64::max);
        let bin_ns = Band::G306_321.config().cir_bin_s() * 1e9;
        let rt_toas: Vec<f64> = r
            .clusters
            .iter()
            .filter(|c| c.kind == ClusterKind::Rt)
            .map(|c| c.center.toa_ns)
            .collect();
        let non_rt: Vec<_> = r.clusters.iter().filter(|c| c.kind == ClusterKind::NonRt).collect();
        assert!(!non_rt.is_empty(), "seed should place statistical clusters");
        for c in &non_rt {
            let m = &c.center;
            assert!((65.0..=200.0).contains(&m.toa_ns));
            assert!((0.0..=180.0).contains(&m.aoa_az_deg));
            let below = strongest_rt - m.power_db;
            assert!((5.0 - 1e-9..=20.0 + 1e-9).contains(&below), "below {below}");
            for &t in &rt_toas {
                assert!((t - m.toa_ns).abs() >= 2.0 * bin_ns - 1e-9);
            }
        }
    }

    #[test]
    fn subpath_shaping_hits_targets_exactly() {
        let scene = indoor_scene();
        let mut opts = SynthOptions { seed: 11, ..SynthOptions::new(Band::G306_321) };
        opts.laws = fixed_count_laws(5, 8.0, 6.0);
        opts.laws.placement.count_mean = 3.0;
        let r = synthesize(&scene, "N1R2", &opts).unwrap();
        for c in &r.clusters {
            assert_eq!(c.subpaths.len(), 4);
            assert!((cluster_delay_spread_ns(c) - 8.0).abs() < 1e-9);
            assert!((cluster_angle_spread_deg(c) - 6.0).abs() < 1e-9);
            // Subpaths stay at/below the center power and behind it in time.
            for s in &c.subpaths {
                assert!(s.power_db <= c.center.power_db - 3.0 + 1e-12);
                assert!(s.power_db >= c.center.power_db - 25.0 - 1e-12);
                assert!(s.toa_ns > c.center.toa_ns);
            }
        }
    }

    #[test]
    fn singleton_clusters_have_no_subpaths() {
        let scene = indoor_scene();
        let mut opts = SynthOptions { seed: 13, ..SynthOptions::new(Band::G306_321) };
        opts.laws = fixed_count_laws(1, 5.0, 5.0);
        let r = synthesize(&scene, "N1R2", &opts).unwrap();
        for c in &r.clusters {
            assert!(c.subpaths.is_empty());
        }
    }

    #[test]
    fn omni_cir_roundtrip_recovers_centers() {
        let scene = indoor_scene();
        let mut opts = SynthOptions { seed: 17, ..SynthOptions::new(Band::G306_321) };
        opts.laws = fixed_count_laws(1, 5.0, 5.0);
        opts.laws.placement.count_mean = 4.0;
        let r = synthesize(&scene, "N1R2", &opts).unwrap();
        let cir = realization_to_cir_omni(&r).unwrap();
        let cfg = Band::G306_321.config().with_noise_floor_dbm(-180.0);
        let got = extract_mpcs(&[cir], &cfg, 60.0).unwrap();
        let bin_ns = cfg.cir_bin_s() * 1e9;
        for c in &r.clusters {
            let hit = got.mpcs.iter().find(|m| (m.toa_ns - c.center.toa_ns).abs() <= bin_ns);
            let hit = hit.unwrap_or_else(|| panic!("center at {} ns not recovered", c.center.toa_ns));
            assert!(
                (hit.power_db - c.center.power_db).abs() <= 0.5,
                "power {} vs {}",
                hit.power_db,
                c.center.power_db
            );
        }
    }

    #[test]
    fn directional_cirs_capture_each_ray_somewhere() {
        let scene = indoor_scene();
        let opts = SynthOptions { seed: 19, ..SynthOptions::new(Band::G306_321) };
        let r = synthesize(&scene, "N1R2", &opts).unwrap();
        let grid = ScanGrid::azimuth_circle();
        let cirs = realization_to_cirs(&r, &grid, 10.0).unwrap();
        assert_eq!(cirs.len(), 36);
        let total_rays = r.all_mpcs().len();
        assert!(total_rays > 0);
        // Every ray falls within 5° of some 10°-spaced steering.
        let captured: f64 = cirs.iter().map(Cir::total_energy).sum();
        assert!(captured > 0.0);
        for m in r.all_mpcs() {
            let near = grid
                .azimuths_deg
                .iter()
                .any(|&a| crate::units::cyclic_distance_deg(a, m.aoa_az_deg) <= 5.0);
            assert!(near);
        }
    }

    #[test]
    fn out_of_span_delays_are_reported() {
        let r = Realization {
            rx_id: "X".into(),
            band: Band::G306_321,
            region: Region::NearNlos,
            seed: 0,
            clusters: vec![Cluster {
                kind: ClusterKind::Rt,
                center: Mpc::new(500.0, 45.0, 0.0, -120.0).unwrap(),
                subpaths: vec![],
            }],
        };
        match realization_to_cir_omni(&r) {
            Err(Error::DelayOutOfRange { count, first_toa_ns, .. }) => {
                assert_eq!(count, 1);
                assert!((first_toa_ns - 500.0).abs() < 1e-12);
            }
            other => panic!("expected delay range error, got {other:?}"),
        }
    }

    #[test]
    fn law_fit_recovers_planted_parameters() {
        let scene = indoor_scene();
        let mut realizations = Vec::new();
        for seed in 0..40 {
            let mut opts = SynthOptions { seed, ..SynthOptions::new(Band::G306_321) };
            opts.laws = StatLaws::default();
            realizations.push(synthesize(&scene, "N1R2", &opts).unwrap());
        }
        let fitted = fit_stat_laws(&realizations).unwrap();
        let planted = StatLaws::default();
        let rt = fitted.rt.expect("enough traced clusters");
        // Counts are rounded draws, so the log-mean moves a little; stay
        // within a loose but meaningful band.
        assert!((rt.ray_count.mu_log - planted.rt.unwrap().ray_count.mu_log).abs() < 0.25);
        assert!(
            (rt.delay_spread_ns.mu_log - planted.rt.unwrap().delay_spread_ns.mu_log).abs() < 0.3
        );
        let non_rt = fitted.non_rt.expect("enough statistical clusters");
        assert!((non_rt.ray_count.mu_log - planted.non_rt.unwrap().ray_count.mu_log).abs() < 0.25);
        // Placement ranges sit inside the planted ones.
        assert!(fitted.placement.toa_ns.0 >= 65.0 - 1e-9);
        assert!(fitted.placement.toa_ns.1 <= 200.0 + 1e-9);
        assert!(fitted.placement.count_mean > 1.0 && fitted.placement.count_mean < 8.0);
    }

    #[test]
    fn law_fit_returns_none_for_sparse_kinds() {
        let scene = indoor_scene();
        let mut opts = SynthOptions { seed: 23, ..SynthOptions::new(Band::G306_321) };
        opts.laws.placement.count_mean = 0.0; // no statistical clusters
        let r = synthesize(&scene, "N1R2", &opts).unwrap();
        let fitted = fit_stat_laws(&[r]).unwrap();
        assert!(fitted.non_rt.is_none());
        // Two traced clusters only: below the five-cluster floor.
        assert!(fitted.rt.is_none());
    }

    #[test]
    fn kind_laws_lookup_reports_missing() {
        let laws = StatLaws { rt: None, ..StatLaws::default() };
        assert!(matches!(
            laws.kind_laws(ClusterKind::Rt),
            Err(Error::LawsUnset { kind: "traced" })
        ));
        assert!(laws.kind_laws(ClusterKind::NonRt).is_ok());
    }

    #[test]
    fn log_normal_mean_and_sampling_agree() {
        let law = LogNormalLaw { mu_log: 2.0, sigma_log: 0.5 };
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let n = 20000;
        let mean: f64 = (0..n).map(|_| law.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - law.mean()).abs() / law.mean() < 0.05, "{mean} vs {}", law.mean());
    }
}

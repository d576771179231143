//! Evolution of the two dominant wall-guided arrivals deep in the shadowed
//! corridor: as the rx slides a further `Δd` along the bent axis past a
//! traced reference position, the final wall interaction slides along with
//! it at a fraction `k` of the rx motion, and the arrival's power and delay
//! follow per-band linear laws in `Δd`.

use serde::{Deserialize, Serialize};

use crate::band::Band;
use crate::error::{Error, Result};
use crate::geometry::{LShapeScene, Region};
use crate::mpc::Mpc;
use crate::pathloss::ols;
use crate::raytrace;

/// Which crossing-corridor wall guides the arrival.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    /// Outer wall (on y = d1); arrivals in (0°, 90°).
    Outer,
    /// Inner wall; arrivals in (90°, 180°).
    Inner,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Outer => "outer",
            Side::Inner => "inner",
        })
    }
}

/// Fold an arrival azimuth into the side's acute frame: the angle ψ between
/// the wall normal through the rx and the incoming ray, in (0°, 90°).
fn acute_deg(side: Side, aoa_az_deg: f64) -> Result<f64> {
    let psi = match side {
        Side::Outer => aoa_az_deg,
        Side::Inner => 180.0 - aoa_az_deg,
    };
    if psi <= 0.0 || psi >= 90.0 {
        return Err(Error::InvalidParameter {
            what: format!("arrival {aoa_az_deg}° is outside the {side}-wall quadrant"),
        });
    }
    Ok(psi)
}

fn from_acute_deg(side: Side, psi_deg: f64) -> f64 {
    match side {
        Side::Outer => psi_deg,
        Side::Inner => 180.0 - psi_deg,
    }
}

/// Axial distance from the rx to the final wall interaction, m (positive =
/// ahead of the rx, toward the corner).
pub fn interaction_offset_m(h_m: f64, aoa_az_deg: f64, side: Side) -> Result<f64> {
    if !(h_m.is_finite() && h_m > 0.0) {
        return Err(Error::InvalidParameter {
            what: format!("wall distance must be > 0 m, got {h_m}"),
        });
    }
    Ok(h_m * acute_deg(side, aoa_az_deg)?.to_radians().tan())
}

/// Arrival azimuth after the rx slides `delta_d_m` further along the bent
/// axis while the wall interaction slides `k · delta_d_m` the same way.
///
/// `h_m` is the rx's perpendicular distance to the guiding wall (unchanged
/// by the slide) and `ref_aoa_az_deg` the arrival azimuth at the reference
/// position. Negative `delta_d_m` slides back toward the corner; the call
/// fails if that puts the interaction at or behind the rx.
pub fn evolved_aoa_deg(
    h_m: f64,
    ref_aoa_az_deg: f64,
    side: Side,
    delta_d_m: f64,
    k: f64,
) -> Result<f64> {
    if !(k.is_finite() && (0.0..=1.0).contains(&k)) {
        return Err(Error::InvalidParameter {
            what: format!("interaction drift rate must be in [0, 1], got {k}"),
        });
    }
    if !delta_d_m.is_finite() {
        return Err(Error::InvalidParameter {
            what: "slide distance must be finite".into(),
        });
    }
    let offset = interaction_offset_m(h_m, ref_aoa_az_deg, side)?;
    let evolved_offset = offset + (1.0 - k) * delta_d_m;
    if evolved_offset <= 0.0 {
        return Err(Error::InteractionBehindRx {
            axial_m: evolved_offset,
            phi_ref_deg: ref_aoa_az_deg,
            delta_d_m,
        });
    }
    let psi = (evolved_offset / h_m).atan().to_degrees();
    Ok(from_acute_deg(side, psi))
}

/// Linear law `value(Δd) = slope · Δd + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearLaw {
    pub slope_per_m: f64,
    pub intercept: f64,
}

impl LinearLaw {
    pub fn at(&self, delta_d_m: f64) -> f64 {
        self.slope_per_m * delta_d_m + self.intercept
    }
}

/// Per-band power and delay laws for the dominant arrivals, in slide
/// distance past the reference position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandLaws {
    /// Arrival power, dB vs m.
    pub power: LinearLaw,
    /// Arrival time, ns vs m.
    pub delay: LinearLaw,
}

/// Full parameter set of the evolving dominant-path model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveParams {
    /// Fraction of the rx slide the wall interaction follows, in [0, 1].
    pub k: f64,
    pub band_306_321: Option<BandLaws>,
    pub band_356_371: Option<BandLaws>,
}

impl Default for EvolveParams {
    fn default() -> EvolveParams {
        EvolveParams {
            k: 0.75,
            band_306_321: Some(BandLaws {
                power: LinearLaw { slope_per_m: -2.69, intercept: -122.0 },
                delay: LinearLaw { slope_per_m: 4.45, intercept: 106.0 },
            }),
            band_356_371: Some(BandLaws {
                power: LinearLaw { slope_per_m: -2.89, intercept: -124.0 },
                delay: LinearLaw { slope_per_m: 5.06, intercept: 108.0 },
            }),
        }
    }
}

impl EvolveParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k.is_finite() && (0.0..=1.0).contains(&self.k)) {
            return Err(Error::InvalidParameter {
                what: format!("interaction drift rate must be in [0, 1], got {}", self.k),
            });
        }
        Ok(())
    }

    pub fn band_laws(&self, band: Band) -> Result<&BandLaws> {
        let laws = match band {
            Band::G306_321 => &self.band_306_321,
            Band::G356_371 => &self.band_356_371,
        };
        laws.as_ref().ok_or_else(|| Error::MissingBandLaw {
            band: band.label().to_string(),
        })
    }
}

/// Traced reference state the evolution starts from: the two dominant
/// arrivals at a shadowed anchor position, plus the geometry needed to slide
/// them along the corridor.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceAnchor {
    pub rx_id: String,
    /// Bent-axis distance of the anchor, m.
    pub bent_m: f64,
    /// Perpendicular distance to the outer crossing-corridor wall, m.
    pub h_outer_m: f64,
    /// Perpendicular distance to the inner wall, m.
    pub h_inner_m: f64,
    pub via_outer: Mpc,
    pub via_inner: Mpc,
}

/// Trace the anchor position and package its dominant arrivals. The anchor
/// must lie past the corner.
pub fn reference_anchor(
    scene: &LShapeScene,
    rx_id: &str,
    freq_hz: f64,
    max_bounces: usize,
) -> Result<ReferenceAnchor> {
    let rx = scene.rx_by_id(rx_id)?;
    let (bent_m, region) = scene.rx_bent_distance_m(rx_id)?;
    if !matches!(region, Region::NearNlos | Region::FarNlos) {
        return Err(Error::SampleNotBeyondCorner {
            rx_id: rx_id.to_string(),
            d_m: bent_m,
            d1_m: scene.d1_m,
        });
    }
    let pair = raytrace::reference_dominant_mpcs(scene, rx_id, freq_hz, max_bounces)?;
    let anchor = ReferenceAnchor {
        rx_id: rx_id.to_string(),
        bent_m,
        h_outer_m: scene.distance_to_outer_nlos_wall_m(&rx.pos),
        h_inner_m: scene.distance_to_inner_nlos_wall_m(&rx.pos),
        via_outer: pair.via_outer,
        via_inner: pair.via_inner,
    };
    // The evolution math needs both arrivals strictly inside their quadrant.
    acute_deg(Side::Outer, anchor.via_outer.aoa_az_deg)?;
    acute_deg(Side::Inner, anchor.via_inner.aoa_az_deg)?;
    Ok(anchor)
}

/// The two dominant arrivals evolved `delta_d_m` past the anchor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolvedDominant {
    pub delta_d_m: f64,
    /// Shared arrival time from the band's delay law, ns.
    pub toa_ns: f64,
    /// Shared arrival power from the band's power law, dB.
    pub power_db: f64,
    pub aoa_outer_deg: f64,
    pub aoa_inner_deg: f64,
}

impl EvolvedDominant {
    pub fn to_mpcs(&self) -> (Mpc, Mpc) {
        (
            Mpc::new(self.toa_ns, self.aoa_outer_deg, 0.0, self.power_db)
                .expect("evolved arrival is finite"),
            Mpc::new(self.toa_ns, self.aoa_inner_deg, 0.0, self.power_db)
                .expect("evolved arrival is finite"),
        )
    }
}

/// Evolve both dominant arrivals to `delta_d_m` past the anchor for one
/// band: azimuths from the sliding-interaction geometry, power and delay
/// from the band's linear laws.
pub fn evolve_dominant(
    anchor: &ReferenceAnchor,
    params: &EvolveParams,
    band: Band,
    delta_d_m: f64,
) -> Result<EvolvedDominant> {
    params.validate()?;
    let laws = params.band_laws(band)?;
    let aoa_outer_deg = evolved_aoa_deg(
        anchor.h_outer_m,
        anchor.via_outer.aoa_az_deg,
        Side::Outer,
        delta_d_m,
        params.k,
    )?;
    let aoa_inner_deg = evolved_aoa_deg(
        anchor.h_inner_m,
        anchor.via_inner.aoa_az_deg,
        Side::Inner,
        delta_d_m,
        params.k,
    )?;
    Ok(EvolvedDominant {
        delta_d_m,
        toa_ns: laws.delay.at(delta_d_m),
        power_db: laws.power.at(delta_d_m),
        aoa_outer_deg,
        aoa_inner_deg,
    })
}

/// One observed dominant arrival at a position `delta_d_m` past the anchor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamObservation {
    pub delta_d_m: f64,
    pub side: Side,
    pub aoa_az_deg: f64,
    pub power_db: f64,
    pub toa_ns: f64,
}

/// Least-squares interaction drift rate from observed arrival azimuths.
///
/// Inverts the sliding geometry per observation (`ΔL = Δd + h·(tan ψ_ref −
/// tan ψ_obs)`), then fits `ΔL = k·Δd` through the origin.
pub fn fit_drift_rate(anchor: &ReferenceAnchor, observations: &[BeamObservation]) -> Result<f64> {
    if observations.is_empty() {
        return Err(Error::EmptyInput {
            what: "drift observations",
        });
    }
    let mut sdd = 0.0;
    let mut sld = 0.0;
    for obs in observations {
        let (h, ref_aoa) = match obs.side {
            Side::Outer => (anchor.h_outer_m, anchor.via_outer.aoa_az_deg),
            Side::Inner => (anchor.h_inner_m, anchor.via_inner.aoa_az_deg),
        };
        let tan_ref = acute_deg(obs.side, ref_aoa)?.to_radians().tan();
        let tan_obs = acute_deg(obs.side, obs.aoa_az_deg)?.to_radians().tan();
        let shift = obs.delta_d_m + h * (tan_ref - tan_obs);
        sdd += obs.delta_d_m * obs.delta_d_m;
        sld += shift * obs.delta_d_m;
    }
    if sdd <= 0.0 {
        return Err(Error::SingularFit {
            what: "all drift observations at the anchor",
        });
    }
    Ok(sld / sdd)
}

/// Least-squares power and delay laws over slide distance.
pub fn fit_band_laws(observations: &[BeamObservation]) -> Result<BandLaws> {
    if observations.len() < 2 {
        return Err(Error::InsufficientData {
            what: "law observations",
            needed: 2,
            got: observations.len(),
        });
    }
    let n = observations.len();
    let (p_slope, p_int) = ols(observations.iter().map(|o| (o.delta_d_m, o.power_db)), n)?;
    let (t_slope, t_int) = ols(observations.iter().map(|o| (o.delta_d_m, o.toa_ns)), n)?;
    Ok(BandLaws {
        power: LinearLaw { slope_per_m: p_slope, intercept: p_int },
        delay: LinearLaw { slope_per_m: t_slope, intercept: t_int },
    })
}

/// Fit the complete parameter set: drift rate pooled over both bands'
/// observations, laws per band (None for a band with no observations).
pub fn fit_evolve_params(
    anchor: &ReferenceAnchor,
    obs_306_321: &[BeamObservation],
    obs_356_371: &[BeamObservation],
) -> Result<EvolveParams> {
    let pooled: Vec<BeamObservation> = obs_306_321
        .iter()
        .chain(obs_356_371.iter())
        .copied()
        .collect();
    let k = fit_drift_rate(anchor, &pooled)?.clamp(0.0, 1.0);
    let band_306_321 = if obs_306_321.is_empty() {
        None
    } else {
        Some(fit_band_laws(obs_306_321)?)
    };
    let band_356_371 = if obs_356_371.is_empty() {
        None
    } else {
        Some(fit_band_laws(obs_356_371)?)
    };
    Ok(EvolveParams { k, band_306_321, band_356_371 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::indoor_scene;
    use crate::geometry::Point;

    #[test]
    fn zero_slide_is_the_identity() {
        for side in [Side::Outer, Side::Inner] {
            for psi in [5.0, 30.0, 60.0, 85.0] {
                let ref_aoa = from_acute_deg(side, psi);
                for k in [0.0, 0.3, 1.0] {
                    let got = evolved_aoa_deg(2.1, ref_aoa, side, 0.0, k).unwrap();
                    assert!((got - ref_aoa).abs() < 1e-12, "{side} ψ={psi} k={k}: {got}");
                }
            }
        }
    }

    #[test]
    fn full_drift_keeps_the_angle_constant() {
        // k = 1: the interaction moves with the rx, geometry is rigid.
        for delta in [1.0, 5.0, 17.5] {
            let got = evolved_aoa_deg(4.9, 35.0, Side::Outer, delta, 1.0).unwrap();
            assert!((got - 35.0).abs() < 1e-12);
            let got = evolved_aoa_deg(4.9, 145.0, Side::Inner, delta, 1.0).unwrap();
            assert!((got - 145.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pinned_interaction_flattens_toward_broadside() {
        // k = 0: the rx walks away from a fixed interaction point, so the
        // arrival swings toward 90° from its own side.
        let mut prev = 20.0;
        for delta in [1.0, 3.0, 10.0, 50.0] {
            let got = evolved_aoa_deg(2.1, 20.0, Side::Outer, delta, 0.0).unwrap();
            assert!(got > prev && got < 90.0);
            prev = got;
        }
        let mut prev = 160.0;
        for delta in [1.0, 3.0, 10.0, 50.0] {
            let got = evolved_aoa_deg(2.1, 160.0, Side::Inner, delta, 0.0).unwrap();
            assert!(got < prev && got > 90.0);
            prev = got;
        }
    }

    #[test]
    fn evolved_angle_matches_explicit_interaction_geometry() {
        // Independent check through coordinates: place the reference
        // interaction point, slide rx and interaction, take the bearing.
        let h = 2.1;
        let ref_aoa = 28.0f64;
        let (k, delta) = (0.6, 7.0);
        let rx0 = Point::new(-6.0, 19.99);
        let wall_y = 19.99 + h;
        let ip0 = Point::new(rx0.x_m + h * ref_aoa.to_radians().tan(), wall_y);
        let rx1 = Point::new(rx0.x_m - delta, rx0.y_m);
        let ip1 = Point::new(ip0.x_m - k * delta, wall_y);
        let expect = rx1.bearing_to_deg(&ip1);
        let got = evolved_aoa_deg(h, ref_aoa, Side::Outer, delta, k).unwrap();
        assert!((got - expect).abs() < 1e-9, "{got} vs {expect}");
    }

    #[test]
    fn sliding_backwards_can_put_the_interaction_behind() {
        let err = evolved_aoa_deg(2.1, 10.0, Side::Outer, -50.0, 0.0).unwrap_err();
        match err {
            Error::InteractionBehindRx { axial_m, delta_d_m, .. } => {
                assert!(axial_m <= 0.0);
                assert!((delta_d_m - -50.0).abs() < 1e-12);
            }
            other => panic!("expected behind-rx error, got {other:?}"),
        }
    }

    #[test]
    fn out_of_quadrant_references_are_rejected() {
        assert!(evolved_aoa_deg(2.1, 90.0, Side::Outer, 1.0, 0.5).is_err());
        assert!(evolved_aoa_deg(2.1, 270.0, Side::Inner, 1.0, 0.5).is_err());
        assert!(evolved_aoa_deg(-1.0, 45.0, Side::Outer, 1.0, 0.5).is_err());
        assert!(evolved_aoa_deg(2.1, 45.0, Side::Outer, 1.0, 1.5).is_err());
    }

    #[test]
    fn default_laws_give_published_marks_at_ten_meters() {
        let params = EvolveParams::default();
        let laws = params.band_laws(Band::G306_321).unwrap();
        assert!((laws.power.at(10.0) - -148.9).abs() < 1e-9);
        assert!((laws.delay.at(10.0) - 150.5).abs() < 1e-9);
        let laws = params.band_laws(Band::G356_371).unwrap();
        assert!((laws.power.at(10.0) - -152.9).abs() < 1e-9);
        assert!((laws.delay.at(10.0) - 158.6).abs() < 1e-9);
    }

    #[test]
    fn missing_band_laws_are_reported() {
        let params = EvolveParams {
            k: 0.75,
            band_306_321: None,
            band_356_371: None,
        };
        assert!(matches!(
            params.band_laws(Band::G306_321),
            Err(Error::MissingBandLaw { .. })
        ));
    }

    fn test_anchor() -> ReferenceAnchor {
        ReferenceAnchor {
            rx_id: "A".into(),
            bent_m: 30.0,
            h_outer_m: 2.1,
            h_inner_m: 4.9,
            via_outer: Mpc::new(120.0, 25.0, 0.0, -120.0).unwrap(),
            via_inner: Mpc::new(125.0, 150.0, 0.0, -123.0).unwrap(),
        }
    }

    #[test]
    fn drift_rate_fit_inverts_the_forward_model() {
        let anchor = test_anchor();
        let k_true = 0.62;
        let mut obs = Vec::new();
        for delta in [2.0, 4.0, 6.5, 9.0, 12.0] {
            for side in [Side::Outer, Side::Inner] {
                let (h, r) = match side {
                    Side::Outer => (anchor.h_outer_m, anchor.via_outer.aoa_az_deg),
                    Side::Inner => (anchor.h_inner_m, anchor.via_inner.aoa_az_deg),
                };
                obs.push(BeamObservation {
                    delta_d_m: delta,
                    side,
                    aoa_az_deg: evolved_aoa_deg(h, r, side, delta, k_true).unwrap(),
                    power_db: -130.0,
                    toa_ns: 140.0,
                });
            }
        }
        let k_fit = fit_drift_rate(&anchor, &obs).unwrap();
        assert!((k_fit - k_true).abs() < 1e-12, "got {k_fit}");
    }

    #[test]
    fn law_fit_recovers_planted_lines() {
        let obs: Vec<BeamObservation> = [0.0, 3.0, 6.0, 9.0, 12.0]
            .iter()
            .map(|&d| BeamObservation {
                delta_d_m: d,
                side: Side::Outer,
                aoa_az_deg: 30.0,
                power_db: -2.69 * d - 122.0,
                toa_ns: 4.45 * d + 106.0,
            })
            .collect();
        let laws = fit_band_laws(&obs).unwrap();
        assert!((laws.power.slope_per_m - -2.69).abs() < 1e-10);
        assert!((laws.power.intercept - -122.0).abs() < 1e-9);
        assert!((laws.delay.slope_per_m - 4.45).abs() < 1e-10);
        assert!((laws.delay.intercept - 106.0).abs() < 1e-9);
    }

    #[test]
    fn param_fit_pools_k_and_splits_laws() {
        let anchor = test_anchor();
        let mk = |delta: f64| BeamObservation {
            delta_d_m: delta,
            side: Side::Outer,
            aoa_az_deg: evolved_aoa_deg(
                anchor.h_outer_m,
                anchor.via_outer.aoa_az_deg,
                Side::Outer,
                delta,
                0.75,
            )
            .unwrap(),
            power_db: -2.0 * delta - 120.0,
            toa_ns: 5.0 * delta + 100.0,
        };
        let obs: Vec<BeamObservation> = [1.0, 4.0, 8.0].iter().map(|&d| mk(d)).collect();
        let params = fit_evolve_params(&anchor, &obs, &[]).unwrap();
        assert!((params.k - 0.75).abs() < 1e-12);
        assert!(params.band_306_321.is_some());
        assert!(params.band_356_371.is_none());
        assert!(matches!(
            params.band_laws(Band::G356_371),
            Err(Error::MissingBandLaw { .. })
        ));
    }

    #[test]
    fn anchor_from_fixture_feeds_a_full_evolution() {
        let scene = indoor_scene();
        // Four bounces are needed before this position sees the inner wall.
        let anchor = reference_anchor(&scene, "N3R2", 313.5e9, 4).unwrap();
        assert!((anchor.h_outer_m - 4.9).abs() < 1e-9);
        assert!((anchor.h_inner_m - 2.1).abs() < 1e-9);
        assert!(anchor.via_outer.aoa_az_deg > 0.0 && anchor.via_outer.aoa_az_deg < 90.0);
        assert!(anchor.via_inner.aoa_az_deg > 90.0 && anchor.via_inner.aoa_az_deg < 180.0);

        let params = EvolveParams::default();
        let ev = evolve_dominant(&anchor, &params, Band::G306_321, 10.0).unwrap();
        assert!((ev.power_db - -148.9).abs() < 1e-9);
        assert!((ev.toa_ns - 150.5).abs() < 1e-9);
        assert!(ev.aoa_outer_deg > 0.0 && ev.aoa_outer_deg < 90.0);
        assert!(ev.aoa_inner_deg > 90.0 && ev.aoa_inner_deg < 180.0);
        let (outer, inner) = ev.to_mpcs();
        assert_eq!(outer.toa_ns, inner.toa_ns);
        assert_eq!(outer.power_db, inner.power_db);
        assert!((outer.aoa_az_deg - ev.aoa_outer_deg).abs() < 1e-12);
    }

    #[test]
    fn anchor_rejects_unshadowed_positions() {
        let scene = indoor_scene();
        assert!(matches!(
            reference_anchor(&scene, "L2", 313.5e9, 3),
            Err(Error::SampleNotBeyondCorner { .. })
        ));
    }
}

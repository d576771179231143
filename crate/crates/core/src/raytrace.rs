//! Deterministic specular ray tracing on axis-aligned scenes with the image
//! method: mirror the tx across an ordered wall sequence, backtrace the
//! reflection points from the rx, then keep the path if every bounce lands
//! on its physical wall and every leg clears all other walls.

use crate::error::{Error, Result};
use crate::geometry::{LShapeScene, Point, Wall};
use crate::mpc::Mpc;
use crate::pathloss::fspl_db;
use crate::units::SPEED_OF_LIGHT_M_PER_S;

/// Largest supported bounce order (sequence count grows as walls^bounces).
pub const MAX_SUPPORTED_BOUNCES: usize = 6;

/// Geometric slop for on-wall and obstruction tests, meters.
const EPS_M: f64 = 1e-9;

/// One traced path between tx and rx.
#[derive(Debug, Clone, PartialEq)]
pub struct RayPath {
    /// Reflecting walls in propagation order (empty for the direct path).
    pub wall_names: Vec<String>,
    /// Vertices in propagation order: tx, each bounce, rx.
    pub points: Vec<Point>,
    pub length_m: f64,
    pub toa_ns: f64,
    /// Arrival bearing at the rx (pointing back along the final leg).
    pub aoa_az_deg: f64,
    /// Received power under the 0 dBm transmit convention:
    /// −(free-space loss + per-bounce wall losses), dB.
    pub power_db: f64,
}

impl RayPath {
    pub fn bounces(&self) -> usize {
        self.wall_names.len()
    }

    pub fn to_mpc(&self) -> Mpc {
        Mpc::new(self.toa_ns, self.aoa_az_deg, 0.0, self.power_db)
            .expect("traced paths have finite delay and power")
    }
}

/// Both dominant reference arrivals at a shadowed position, one per
/// crossing-corridor wall.
#[derive(Debug, Clone, PartialEq)]
pub struct DominantPair {
    /// Strongest arrival whose final bounce is on the outer wall (y = d1).
    pub via_outer: Mpc,
    /// Strongest arrival whose final bounce is on the inner wall.
    pub via_inner: Mpc,
}

/// Intersection of the segment `p`→`q` with the wall's supporting line.
/// Returns `(t, point)` with `t` the parameter along `p`→`q`, or None when
/// parallel.
fn line_hit(wall: &Wall, p: &Point, q: &Point) -> Option<(f64, Point)> {
    if wall.is_vertical() {
        let dx = q.x_m - p.x_m;
        if dx.abs() < 1e-15 {
            return None;
        }
        let t = (wall.a.x_m - p.x_m) / dx;
        Some((t, Point::new(wall.a.x_m, p.y_m + t * (q.y_m - p.y_m))))
    } else {
        let dy = q.y_m - p.y_m;
        if dy.abs() < 1e-15 {
            return None;
        }
        let t = (wall.a.y_m - p.y_m) / dy;
        Some((t, Point::new(p.x_m + t * (q.x_m - p.x_m), wall.a.y_m)))
    }
}

/// Whether `pt` (already on the wall's supporting line) lies within the
/// wall's extent, with `margin` applied inward (negative widens).
fn within_extent(wall: &Wall, pt: &Point, margin: f64) -> bool {
    let (lo, hi, v) = if wall.is_vertical() {
        (wall.a.y_m.min(wall.b.y_m), wall.a.y_m.max(wall.b.y_m), pt.y_m)
    } else {
        (wall.a.x_m.min(wall.b.x_m), wall.a.x_m.max(wall.b.x_m), pt.x_m)
    };
    v >= lo + margin && v <= hi - margin
}

/// True when a wall blocks the open segment `p`→`q`.
fn blocks(wall: &Wall, p: &Point, q: &Point) -> bool {
    let Some((t, pt)) = line_hit(wall, p, q) else {
        return false;
    };
    let leg_len = p.distance_to(q);
    if leg_len < EPS_M {
        return false;
    }
    let t_eps = EPS_M / leg_len;
    t > t_eps && t < 1.0 - t_eps && within_extent(wall, &pt, EPS_M)
}

/// Two walls whose supporting lines coincide (consecutive bounces off them
/// are impossible).
fn colinear(a: &Wall, b: &Wall) -> bool {
    (a.is_vertical() && b.is_vertical() && (a.a.x_m - b.a.x_m).abs() < 1e-12)
        || (a.is_horizontal() && b.is_horizontal() && (a.a.y_m - b.a.y_m).abs() < 1e-12)
}

/// Try one ordered wall sequence; `images[k]` is the tx mirrored through the
/// first `k` walls.
fn try_sequence(
    scene: &LShapeScene,
    seq: &[usize],
    images: &[Point],
    rx: &Point,
    freq_hz: f64,
) -> Option<RayPath> {
    let n = seq.len();
    // Backtrace the bounce points from the rx.
    let mut hits_rev: Vec<Point> = Vec::with_capacity(n);
    let mut target = *rx;
    for k in (0..n).rev() {
        let wall = &scene.walls[seq[k]];
        let (t, pt) = line_hit(wall, &target, &images[k + 1])?;
        let seg_len = target.distance_to(&images[k + 1]);
        if seg_len < EPS_M {
            return None;
        }
        let t_eps = EPS_M / seg_len;
        if !(t > t_eps && t < 1.0 - t_eps) || !within_extent(wall, &pt, -EPS_M) {
            return None;
        }
        hits_rev.push(pt);
        target = pt;
    }

    let mut points = Vec::with_capacity(n + 2);
    points.push(scene.tx);
    points.extend(hits_rev.into_iter().rev());
    points.push(*rx);

    // Every leg must clear every wall strictly between its endpoints.
    for leg in points.windows(2) {
        if scene.walls.iter().any(|w| blocks(w, &leg[0], &leg[1])) {
            return None;
        }
    }

    let length_m = images[n].distance_to(rx);
    if length_m < 1e-6 {
        return None;
    }
    let loss_db: f64 = seq.iter().map(|&i| scene.walls[i].reflection_loss_db).sum();
    let last = points[points.len() - 2];
    Some(RayPath {
        wall_names: seq.iter().map(|&i| scene.walls[i].name.clone()).collect(),
        points,
        length_m,
        toa_ns: length_m / SPEED_OF_LIGHT_M_PER_S * 1e9,
        aoa_az_deg: rx.bearing_to_deg(&last),
        power_db: -(fspl_db(length_m, freq_hz) + loss_db),
    })
}

/// Enumerate all unblocked specular paths from the scene tx to `rx` with up
/// to `max_bounces` reflections, sorted by arrival time.
pub fn trace(scene: &LShapeScene, rx: &Point, freq_hz: f64, max_bounces: usize) -> Result<Vec<RayPath>> {
    scene.validate()?;
    if !(freq_hz.is_finite() && freq_hz > 0.0) {
        return Err(Error::InvalidParameter {
            what: format!("carrier frequency must be > 0 Hz, got {freq_hz}"),
        });
    }
    if max_bounces > MAX_SUPPORTED_BOUNCES {
        return Err(Error::InvalidParameter {
            what: format!("bounce order {max_bounces} exceeds the supported {MAX_SUPPORTED_BOUNCES}"),
        });
    }
    if !rx.is_finite() {
        return Err(Error::InvalidParameter {
            what: "rx position must be finite".into(),
        });
    }

    let mut paths = Vec::new();
    // Depth-first over ordered wall sequences, extending the image chain as
    // we go; consecutive identical or colinear walls cannot reflect twice.
    let mut seq: Vec<usize> = Vec::new();
    let mut images: Vec<Point> = vec![scene.tx];
    fn descend(
        scene: &LShapeScene,
        rx: &Point,
        freq_hz: f64,
        max_bounces: usize,
        seq: &mut Vec<usize>,
        images: &mut Vec<Point>,
        paths: &mut Vec<RayPath>,
    ) {
        if let Some(path) = try_sequence(scene, seq, images, rx, freq_hz) {
            paths.push(path);
        }
        if seq.len() == max_bounces {
            return;
        }
        for i in 0..scene.walls.len() {
            if let Some(&prev) = seq.last() {
                if prev == i || colinear(&scene.walls[prev], &scene.walls[i]) {
                    continue;
                }
            }
            seq.push(i);
            images.push(scene.walls[i].mirror(images.last().unwrap()));
            descend(scene, rx, freq_hz, max_bounces, seq, images, paths);
            seq.pop();
            images.pop();
        }
    }
    descend(scene, rx, freq_hz, max_bounces, &mut seq, &mut images, &mut paths);

    paths.sort_by(|a, b| {
        a.toa_ns
            .total_cmp(&b.toa_ns)
            .then(a.wall_names.len().cmp(&b.wall_names.len()))
            .then(a.wall_names.cmp(&b.wall_names))
    });
    Ok(paths)
}

/// Strongest path whose final bounce is on the named wall (ties broken by
/// earlier arrival).
pub fn strongest_path_via_wall<'a>(paths: &'a [RayPath], wall_name: &str) -> Option<&'a RayPath> {
    paths
        .iter()
        .filter(|p| p.wall_names.last().is_some_and(|w| w == wall_name))
        .max_by(|a, b| {
            a.power_db
                .total_cmp(&b.power_db)
                .then(b.toa_ns.total_cmp(&a.toa_ns))
        })
}

/// Deterministic reference arrivals for a shadowed receiver: the strongest
/// traced path bouncing last off the outer crossing-corridor wall and the
/// strongest bouncing last off the inner one.
pub fn reference_dominant_mpcs(
    scene: &LShapeScene,
    rx_id: &str,
    freq_hz: f64,
    max_bounces: usize,
) -> Result<DominantPair> {
    let rx = scene.rx_by_id(rx_id)?;
    let outer = scene
        .outer_nlos_wall()
        .ok_or_else(|| Error::DegenerateScene {
            reason: "scene lacks an outer crossing-corridor wall".into(),
        })?
        .name
        .clone();
    let inner = scene
        .inner_nlos_wall()
        .ok_or_else(|| Error::DegenerateScene {
            reason: "scene lacks an inner crossing-corridor wall".into(),
        })?
        .name
        .clone();
    let paths = trace(scene, &rx.pos, freq_hz, max_bounces)?;
    let via_outer = strongest_path_via_wall(&paths, &outer)
        .ok_or_else(|| Error::NoDominantPath {
            side: "outer",
            rx_id: rx_id.to_string(),
        })?
        .to_mpc();
    let via_inner = strongest_path_via_wall(&paths, &inner)
        .ok_or_else(|| Error::NoDominantPath {
            side: "inner",
            rx_id: rx_id.to_string(),
        })?
        .to_mpc();
    Ok(DominantPair { via_outer, via_inner })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{indoor_scene, METAL_DOOR_LOSS_DB};
    use crate::geometry::RxPosition;

    /// Two vertical walls at x = 0 and x = −4 with tx between them.
    fn slab_scene() -> LShapeScene {
        LShapeScene {
            name: "slab".into(),
            los_corridor_width_m: 4.0,
            nlos_corridor_width_m: 4.0,
            d1_m: 50.0,
            d2_m: 54.0,
            d3_m: 60.0,
            tx: Point::new(-1.0, 0.0),
            tx_height_m: 1.5,
            walls: vec![
                Wall::new("outer", Point::new(0.0, -20.0), Point::new(0.0, 120.0), 3.0),
                Wall::new("inner", Point::new(-4.0, -20.0), Point::new(-4.0, 120.0), 3.0),
            ],
            rx: vec![RxPosition {
                id: "R".into(),
                pos: Point::new(-3.0, 10.0),
                height_m: 1.5,
            }],
        }
    }

    #[test]
    fn slab_path_lengths_match_hand_mirrors() {
        let scene = slab_scene();
        let paths = trace(&scene, &Point::new(-3.0, 10.0), 313.5e9, 2).unwrap();
        let mut lengths: Vec<f64> = paths.iter().map(|p| p.length_m).collect();
        lengths.sort_by(f64::total_cmp);
        let mut expect = vec![
            104.0f64.sqrt(), // direct
            116.0f64.sqrt(), // one bounce, either wall
            116.0f64.sqrt(),
            136.0f64.sqrt(), // outer then inner
            200.0f64.sqrt(), // inner then outer
        ];
        expect.sort_by(f64::total_cmp);
        assert_eq!(lengths.len(), expect.len());
        for (g, e) in lengths.iter().zip(&expect) {
            assert!((g - e).abs() < 1e-9, "{g} vs {e}");
        }
        // Specular point of the outer one-bounce sits at y = 2.5.
        let outer = paths
            .iter()
            .find(|p| p.wall_names == ["outer"])
            .expect("outer bounce present");
        assert!((outer.points[1].x_m - 0.0).abs() < 1e-12);
        assert!((outer.points[1].y_m - 2.5).abs() < 1e-9);
    }

    #[test]
    fn unfolded_length_equals_leg_sum() {
        let scene = slab_scene();
        for p in trace(&scene, &Point::new(-3.0, 10.0), 313.5e9, 2).unwrap() {
            let legs: f64 = p.points.windows(2).map(|w| w[0].distance_to(&w[1])).sum();
            assert!((legs - p.length_m).abs() < 1e-9);
            assert!((p.toa_ns - p.length_m / SPEED_OF_LIGHT_M_PER_S * 1e9).abs() < 1e-9);
        }
    }

    #[test]
    fn bounce_losses_accumulate_in_power() {
        let scene = slab_scene();
        let paths = trace(&scene, &Point::new(-3.0, 10.0), 313.5e9, 2).unwrap();
        for p in &paths {
            let expect = -(fspl_db(p.length_m, 313.5e9) + 3.0 * p.bounces() as f64);
            assert!((p.power_db - expect).abs() < 1e-9);
        }
        // More bounces at similar length means weaker power.
        let direct = paths.iter().find(|p| p.bounces() == 0).unwrap();
        assert!(paths.iter().all(|p| p.power_db <= direct.power_db + 1e-12));
    }

    #[test]
    fn full_width_blocker_kills_all_paths() {
        let mut scene = slab_scene();
        scene
            .walls
            .push(Wall::new("blocker", Point::new(-4.0, 5.0), Point::new(0.0, 5.0), 10.0));
        let paths = trace(&scene, &Point::new(-3.0, 10.0), 313.5e9, 2).unwrap();
        assert!(paths.is_empty(), "got {paths:?}");
    }

    #[test]
    fn aoa_points_back_along_final_leg() {
        let scene = slab_scene();
        let paths = trace(&scene, &Point::new(-3.0, 10.0), 313.5e9, 1).unwrap();
        let direct = paths.iter().find(|p| p.bounces() == 0).unwrap();
        // Rx at (−3,10) sees the tx at (−1,0): south-east of it.
        let expect = Point::new(-3.0, 10.0).bearing_to_deg(&Point::new(-1.0, 0.0));
        assert!((direct.aoa_az_deg - expect).abs() < 1e-12);
        assert!(direct.aoa_az_deg > 90.0 && direct.aoa_az_deg < 270.0);
        let outer = paths.iter().find(|p| p.wall_names == ["outer"]).unwrap();
        // Final leg comes from (0, 2.5), east and south of the rx.
        assert!(outer.aoa_az_deg > 90.0 && outer.aoa_az_deg < 180.0);
    }

    #[test]
    fn indoor_end_door_ladder_is_reproduced() {
        let scene = indoor_scene();
        let rx = scene.rx_by_id("L1").unwrap().pos;
        let paths = trace(&scene, &rx, 313.5e9, 3).unwrap();
        for expect_ns in [26.0, 70.0, 147.0, 191.0, 243.0, 364.0] {
            assert!(
                paths.iter().any(|p| (p.toa_ns - expect_ns).abs() < 0.5),
                "no arrival near {expect_ns} ns"
            );
        }
        let three = paths
            .iter()
            .find(|p| p.wall_names == ["door-b", "door-a", "door-b"])
            .expect("end-door three-bounce");
        assert!((three.toa_ns - 364.0).abs() < 1e-6, "got {}", three.toa_ns);
        let expect_db = -(fspl_db(three.length_m, 313.5e9) + 3.0 * METAL_DOOR_LOSS_DB);
        assert!((three.power_db - expect_db).abs() < 1e-9);
        assert!((three.power_db - -144.8).abs() < 0.1, "got {}", three.power_db);
    }

    #[test]
    fn shadowed_rx_gets_references_from_both_crossing_walls() {
        let scene = indoor_scene();
        let pair = reference_dominant_mpcs(&scene, "N1R2", 313.5e9, 3).unwrap();
        // Outer-wall arrivals come from the north-east, inner-wall ones from
        // the south-east.
        assert!(
            pair.via_outer.aoa_az_deg > 0.0 && pair.via_outer.aoa_az_deg < 90.0,
            "outer aoa {}",
            pair.via_outer.aoa_az_deg
        );
        assert!(
            pair.via_inner.aoa_az_deg > 90.0 && pair.via_inner.aoa_az_deg < 180.0,
            "inner aoa {}",
            pair.via_inner.aoa_az_deg
        );
        assert!(pair.via_outer.power_db > pair.via_inner.power_db - 60.0);
    }

    #[test]
    fn missing_side_is_reported_per_rx() {
        let scene = indoor_scene();
        // With a single bounce no path reaches this deep shadow via the
        // inner wall.
        match reference_dominant_mpcs(&scene, "N1R1", 313.5e9, 1) {
            Err(Error::NoDominantPath { side, rx_id }) => {
                assert!(side == "inner" || side == "outer");
                assert_eq!(rx_id, "N1R1");
            }
            other => panic!("expected missing dominant path, got {other:?}"),
        }
        assert!(matches!(
            reference_dominant_mpcs(&scene, "nope", 313.5e9, 3),
            Err(Error::UnknownRx { .. })
        ));
    }

    #[test]
    fn rx_image_enumeration_agrees_with_tx_images() {
        // Independent check: mirroring the rx across the reversed sequence
        // must give the same unfolded length.
        let scene = slab_scene();
        let rx = Point::new(-3.0, 10.0);
        let paths = trace(&scene, &rx, 313.5e9, 2).unwrap();
        for p in paths {
            let mut img = rx;
            for name in p.wall_names.iter().rev() {
                let wall = scene.walls.iter().find(|w| &w.name == name).unwrap();
                img = wall.mirror(&img);
            }
            assert!((img.distance_to(&scene.tx) - p.length_m).abs() < 1e-9);
        }
    }

    #[test]
    fn bounce_cap_and_bad_inputs_are_rejected() {
        let scene = slab_scene();
        let rx = Point::new(-3.0, 10.0);
        assert!(trace(&scene, &rx, 313.5e9, 7).is_err());
        assert!(trace(&scene, &rx, 0.0, 2).is_err());
        // Deeper search only adds paths.
        let n2 = trace(&scene, &rx, 313.5e9, 2).unwrap().len();
        let n4 = trace(&scene, &rx, 313.5e9, 4).unwrap().len();
        assert!(n4 >= n2);
    }
}

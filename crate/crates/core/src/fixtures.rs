//! Bundled synthetic scenes so the toolkit is testable end to end without
//! measurement data.
//!
//! Both scenes follow the frame convention documented in [`crate::geometry`]:
//! tx projection at the origin, tx corridor along +y with its outer wall on
//! x = 0, crossing corridor toward −x with its outer wall on y = `d1`.

use crate::geometry::{LShapeScene, Point, RxPosition, Wall};
use crate::units::SPEED_OF_LIGHT_M_PER_S;

/// Per-bounce loss of the metal end doors of the indoor corridor, dB.
///
/// Chosen so that the three-bounce end-door path of [`indoor_scene`] lands at
/// ≈ −144.8 dB; a fixture default, not a measured material constant.
pub const METAL_DOOR_LOSS_DB: f64 = 7.22;
/// Per-bounce loss of interior corridor walls, dB (fixture default).
pub const INTERIOR_WALL_LOSS_DB: f64 = 4.8;
/// Per-bounce loss of outdoor building facades, dB (fixture default).
pub const FACADE_LOSS_DB: f64 = 6.0;

/// Bent-axis offsets of the shadowed rx rows in the indoor scene, meters
/// past the corner.
pub const INDOOR_NLOS_OFFSETS_M: [f64; 7] = [5.09, 6.89, 8.69, 10.49, 13.49, 15.29, 18.30];
/// Bent-axis offsets of the shadowed rx rows in the outdoor scene.
pub const OUTDOOR_NLOS_OFFSETS_M: [f64; 6] = [11.67, 13.30, 16.31, 18.27, 21.27, 23.27];

/// Indoor office-building fixture: a 2.97 m wide, 32.53 m long corridor with
/// metal doors at both ends, crossed at the corner (d1 = 22.09 m) by a 7 m
/// wide corridor.
///
/// The tx sits on the centerline at y = 0. Rx `L1` (centerline, y = 7.8) is
/// placed so the three-bounce path between the end doors is exactly
/// 364 ns long (≈ 109.12 m); the lower-order door bounces then fall at
/// 26 / 70 / 147 / 191 / 243 ns. Shadowed receivers form two rows (2.1 m and
/// 4.9 m from the outer crossing-corridor wall) at the standard bent-axis
/// offsets.
pub fn indoor_scene() -> LShapeScene {
    let w_los = 2.97;
    let w_nlos = 7.0;
    let d1 = 22.09;
    let corridor_len = 32.53;

    // Place the end doors so the (B, A, B) three-bounce from the tx at y = 0
    // to rx L1 at y = 7.8 has length exactly c * 364 ns:
    //   length = 4*y_b - 2*y_a - y_rx  with  y_b = d1 + ext, y_a = y_b - len.
    let target_m = SPEED_OF_LIGHT_M_PER_S * 364e-9;
    let y_l1 = 7.8;
    let ext = (y_l1 - (4.0 * d1 - 2.0 * (d1 - corridor_len)) + target_m) / 2.0;
    let y_b = d1 + ext;
    let y_a = y_b - corridor_len;

    let x_center = -w_los / 2.0;
    let y_d = d1 - w_nlos;
    let x_west_end = -40.0;

    let walls = vec![
        Wall::new("door-a", Point::new(-w_los, y_a), Point::new(0.0, y_a), METAL_DOOR_LOSS_DB),
        Wall::new("door-b", Point::new(-w_los, y_b), Point::new(0.0, y_b), METAL_DOOR_LOSS_DB),
        Wall::new(
            "los-outer",
            Point::new(0.0, y_a),
            Point::new(0.0, y_b),
            INTERIOR_WALL_LOSS_DB,
        ),
        Wall::new(
            "los-inner-south",
            Point::new(-w_los, y_a),
            Point::new(-w_los, y_d),
            INTERIOR_WALL_LOSS_DB,
        ),
        Wall::new(
            "los-inner-north",
            Point::new(-w_los, d1),
            Point::new(-w_los, y_b),
            INTERIOR_WALL_LOSS_DB,
        ),
        Wall::new(
            "wall-c",
            Point::new(x_west_end, d1),
            Point::new(-w_los, d1),
            INTERIOR_WALL_LOSS_DB,
        ),
        Wall::new(
            "wall-d",
            Point::new(x_west_end, y_d),
            Point::new(-w_los, y_d),
            INTERIOR_WALL_LOSS_DB,
        ),
    ];

    let mut rx = vec![
        RxPosition { id: "L1".into(), pos: Point::new(x_center, y_l1), height_m: 1.8 },
        RxPosition { id: "L2".into(), pos: Point::new(x_center, 12.0), height_m: 1.8 },
        RxPosition { id: "L3".into(), pos: Point::new(x_center, 16.5), height_m: 1.8 },
        RxPosition { id: "L4".into(), pos: Point::new(x_center, 21.0), height_m: 1.8 },
    ];
    for (row, h) in [(1, 2.1), (2, 4.9)] {
        for (i, off) in INDOOR_NLOS_OFFSETS_M.iter().enumerate() {
            rx.push(RxPosition {
                id: format!("N{}R{row}", i + 1),
                pos: Point::new(-off, d1 - h),
                height_m: 1.8,
            });
        }
    }

    LShapeScene {
        name: "indoor-l-corridor".into(),
        los_corridor_width_m: w_los,
        nlos_corridor_width_m: w_nlos,
        d1_m: d1,
        d2_m: d1 + w_los,
        d3_m: d1 + 9.59,
        tx: Point::new(x_center, 0.0),
        tx_height_m: 1.8,
        walls,
        rx,
    }
}

/// Outdoor street-canyon fixture: a 9.23 m wide street crossed at
/// d1 = 30.36 m by a 15 m wide street; building facades only, open ends.
pub fn outdoor_scene() -> LShapeScene {
    let w_los = 9.23;
    let w_nlos = 15.0;
    let d1 = 30.36;
    let y_d = d1 - w_nlos;
    let y_south = -6.0;
    let y_north = 36.0;
    let x_west_end = -45.0;
    let x_center = -w_los / 2.0;

    let walls = vec![
        Wall::new(
            "los-outer",
            Point::new(0.0, y_south),
            Point::new(0.0, y_north),
            FACADE_LOSS_DB,
        ),
        Wall::new(
            "los-inner-south",
            Point::new(-w_los, y_south),
            Point::new(-w_los, y_d),
            FACADE_LOSS_DB,
        ),
        Wall::new(
            "los-inner-north",
            Point::new(-w_los, d1),
            Point::new(-w_los, y_north),
            FACADE_LOSS_DB,
        ),
        Wall::new(
            "wall-c",
            Point::new(x_west_end, d1),
            Point::new(-w_los, d1),
            FACADE_LOSS_DB,
        ),
        Wall::new(
            "wall-d",
            Point::new(x_west_end, y_d),
            Point::new(-w_los, y_d),
            FACADE_LOSS_DB,
        ),
    ];

    let mut rx = vec![
        RxPosition { id: "L1".into(), pos: Point::new(x_center, 10.0), height_m: 1.8 },
        RxPosition { id: "L2".into(), pos: Point::new(x_center, 20.0), height_m: 1.8 },
        RxPosition { id: "L3".into(), pos: Point::new(x_center, 28.0), height_m: 1.8 },
    ];
    for (row, h) in [(1, 4.0), (2, 9.0)] {
        for (i, off) in OUTDOOR_NLOS_OFFSETS_M.iter().enumerate() {
            rx.push(RxPosition {
                id: format!("N{}R{row}", i + 1),
                pos: Point::new(-off, d1 - h),
                height_m: 1.8,
            });
        }
    }

    LShapeScene {
        name: "outdoor-l-street".into(),
        los_corridor_width_m: w_los,
        nlos_corridor_width_m: w_nlos,
        d1_m: d1,
        d2_m: d1 + w_los,
        d3_m: d1 + 15.0,
        tx: Point::new(x_center, 0.0),
        tx_height_m: 1.8,
        walls,
        rx,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Region;

    #[test]
    fn indoor_scene_is_valid() {
        let s = indoor_scene();
        s.validate().unwrap();
        // Corridor length between the doors.
        let a = s.walls.iter().find(|w| w.name == "door-a").unwrap();
        let b = s.walls.iter().find(|w| w.name == "door-b").unwrap();
        assert!((b.a.y_m - a.a.y_m - 32.53).abs() < 1e-9);
        // d2 - d1 equals the tx-corridor width.
        assert!((s.d2_m - s.d1_m - s.los_corridor_width_m).abs() < 1e-12);
    }

    #[test]
    fn indoor_three_bounce_identity() {
        // 4*y_b - 2*y_a - y_rx is the unfolded length of the (B, A, B)
        // end-door bounce; L1 is placed to make it exactly 364 ns.
        let s = indoor_scene();
        let a = s.walls.iter().find(|w| w.name == "door-a").unwrap().a.y_m;
        let b = s.walls.iter().find(|w| w.name == "door-b").unwrap().a.y_m;
        let l1 = s.rx_by_id("L1").unwrap().pos.y_m;
        let len = 4.0 * b - 2.0 * a - l1;
        let toa_ns = len / SPEED_OF_LIGHT_M_PER_S * 1e9;
        assert!((toa_ns - 364.0).abs() < 1e-9, "got {toa_ns} ns");
    }

    #[test]
    fn indoor_rx_regions() {
        let s = indoor_scene();
        for id in ["L1", "L2", "L3", "L4"] {
            assert_eq!(s.rx_bent_distance_m(id).unwrap().1, Region::Los);
        }
        for id in ["N1R1", "N2R1", "N3R1", "N1R2", "N3R2"] {
            assert_eq!(s.rx_bent_distance_m(id).unwrap().1, Region::NearNlos);
        }
        for id in ["N4R1", "N7R1", "N4R2", "N7R2"] {
            assert_eq!(s.rx_bent_distance_m(id).unwrap().1, Region::FarNlos);
        }
    }

    #[test]
    fn outdoor_scene_is_valid() {
        let s = outdoor_scene();
        s.validate().unwrap();
        assert!((s.d2_m - s.d1_m - s.los_corridor_width_m).abs() < 1e-12);
        assert_eq!(s.rx_bent_distance_m("N1R1").unwrap().1, Region::NearNlos);
        assert_eq!(s.rx_bent_distance_m("N6R2").unwrap().1, Region::FarNlos);
    }
}

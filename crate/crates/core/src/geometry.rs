//! Plan-view geometry of an L-shaped corridor pair and the bent distance
//! axis used to parameterize receiver positions.
//!
//! Scene frame convention (all bundled fixtures and file formats use it):
//!
//! - the tx projection onto the outer wall of its corridor is the origin;
//! - the tx corridor runs along +y, its outer wall on the line x = 0;
//! - the crossing corridor extends toward −x, its outer wall on y = `d1_m`
//!   (so the outer corner of the L sits at (0, `d1_m`)).
//!
//! The bent distance axis follows the outer edge of the L: straight up the
//! tx corridor, around the corner, then down the crossing corridor. A
//! receiver's distance `d` along it is `y` while in the tx corridor and
//! `d1 + |x|` once past the corner; the band `d1 < d < d2 = d1 + width`
//! spans the junction and is reported as [`Region::Corner`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 2-D plan-view point, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x_m: f64,
    pub y_m: f64,
}

impl Point {
    pub fn new(x_m: f64, y_m: f64) -> Point {
        Point { x_m, y_m }
    }

    pub fn distance_to(&self, other: &Point) -> f64 {
        (self.x_m - other.x_m).hypot(self.y_m - other.y_m)
    }

    /// Compass bearing from `self` toward `target`: 0° = +y, 90° = +x,
    /// wrapped into [0°, 360°).
    pub fn bearing_to_deg(&self, target: &Point) -> f64 {
        let az = (target.x_m - self.x_m)
            .atan2(target.y_m - self.y_m)
            .to_degrees();
        crate::units::wrap_az_deg(az)
    }

    pub fn is_finite(&self) -> bool {
        self.x_m.is_finite() && self.y_m.is_finite()
    }
}

/// Axis-aligned reflecting wall segment with a per-bounce loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wall {
    pub name: String,
    pub a: Point,
    pub b: Point,
    /// Power lost per specular bounce, dB (≥ 0).
    pub reflection_loss_db: f64,
}

impl Wall {
    pub fn new(name: &str, a: Point, b: Point, reflection_loss_db: f64) -> Wall {
        Wall {
            name: name.to_string(),
            a,
            b,
            reflection_loss_db,
        }
    }

    /// True when the segment lies on a vertical line (constant x).
    pub fn is_vertical(&self) -> bool {
        self.a.x_m == self.b.x_m
    }

    /// True when the segment lies on a horizontal line (constant y).
    pub fn is_horizontal(&self) -> bool {
        self.a.y_m == self.b.y_m
    }

    pub fn length_m(&self) -> f64 {
        self.a.distance_to(&self.b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite()) {
            return Err(Error::DegenerateScene {
                reason: format!("wall {:?} has non-finite endpoints", self.name),
            });
        }
        if !(self.is_vertical() ^ self.is_horizontal()) {
            return Err(Error::DegenerateScene {
                reason: format!("wall {:?} must be axis-aligned with nonzero length", self.name),
            });
        }
        if !(self.reflection_loss_db.is_finite() && self.reflection_loss_db >= 0.0) {
            return Err(Error::DegenerateScene {
                reason: format!("wall {:?} needs a finite reflection loss >= 0 dB", self.name),
            });
        }
        Ok(())
    }

    /// Mirror a point across the supporting line of this wall.
    pub fn mirror(&self, p: &Point) -> Point {
        if self.is_vertical() {
            Point::new(2.0 * self.a.x_m - p.x_m, p.y_m)
        } else {
            Point::new(p.x_m, 2.0 * self.a.y_m - p.y_m)
        }
    }
}

/// Receiver classification along the bent distance axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    /// Before the corner: direct view of the tx, `d = y`.
    Los,
    /// Inside the junction band `d1 < d < d2`; not covered by the models.
    Corner,
    /// Past the corner but close enough that wall reflections are traceable:
    /// `d2 ≤ d ≤ d3`.
    NearNlos,
    /// Deep in the crossing corridor, `d > d3`; dominant paths are evolved
    /// statistically from a near reference.
    FarNlos,
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Region::Los => "los",
            Region::Corner => "corner",
            Region::NearNlos => "near-nlos",
            Region::FarNlos => "far-nlos",
        };
        f.write_str(s)
    }
}

/// A named receiver position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RxPosition {
    pub id: String,
    pub pos: Point,
    /// Antenna height, meters (metadata; the geometry is 2-D).
    pub height_m: f64,
}

/// Two corridors meeting at a right angle, with tx, rx set and walls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LShapeScene {
    pub name: String,
    /// Width of the tx (line-of-sight) corridor, meters.
    pub los_corridor_width_m: f64,
    /// Width of the crossing (shadowed) corridor, meters.
    pub nlos_corridor_width_m: f64,
    /// Bent-axis distance of the outer corner; end of the direct-view range.
    pub d1_m: f64,
    /// Start of the fully shadowed range, `d1 + los_corridor_width`.
    pub d2_m: f64,
    /// Boundary between traceable and statistically evolved receivers.
    pub d3_m: f64,
    pub tx: Point,
    /// Tx antenna height, meters (metadata).
    pub tx_height_m: f64,
    pub walls: Vec<Wall>,
    pub rx: Vec<RxPosition>,
}

impl LShapeScene {
    pub fn validate(&self) -> Result<()> {
        if !(self.los_corridor_width_m > 0.0 && self.nlos_corridor_width_m > 0.0) {
            return Err(Error::DegenerateScene {
                reason: "corridor widths must be positive".into(),
            });
        }
        if !(self.d1_m > 0.0 && self.d1_m < self.d2_m && self.d2_m <= self.d3_m) {
            return Err(Error::DegenerateScene {
                reason: format!(
                    "bent-axis marks must satisfy 0 < d1 < d2 <= d3, got {} / {} / {}",
                    self.d1_m, self.d2_m, self.d3_m
                ),
            });
        }
        if !self.tx.is_finite() {
            return Err(Error::DegenerateScene {
                reason: "tx position must be finite".into(),
            });
        }
        for w in &self.walls {
            w.validate()?;
        }
        let mut ids: Vec<&str> = self.rx.iter().map(|r| r.id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != self.rx.len() {
            return Err(Error::DegenerateScene {
                reason: "rx ids must be unique".into(),
            });
        }
        if self.rx.iter().any(|r| !r.pos.is_finite()) {
            return Err(Error::DegenerateScene {
                reason: "rx positions must be finite".into(),
            });
        }
        Ok(())
    }

    pub fn rx_by_id(&self, id: &str) -> Result<&RxPosition> {
        self.rx
            .iter()
            .find(|r| r.id == id)
            .ok_or_else(|| Error::UnknownRx { id: id.to_string() })
    }

    /// Distance along the bent axis for a position in the scene frame.
    ///
    /// Positions within the lateral span of the tx corridor (x ≥ −width) map
    /// to their y coordinate; positions past it map to `d1 + |x|`.
    pub fn bent_axis_distance_m(&self, p: &Point) -> f64 {
        if p.x_m >= -self.los_corridor_width_m {
            p.y_m
        } else {
            self.d1_m - p.x_m
        }
    }

    /// Classify a bent-axis distance against the `d1/d2/d3` marks.
    pub fn classify(&self, d_m: f64) -> Region {
        if d_m <= self.d1_m {
            Region::Los
        } else if d_m < self.d2_m {
            Region::Corner
        } else if d_m <= self.d3_m {
            Region::NearNlos
        } else {
            Region::FarNlos
        }
    }

    /// Bent-axis distance and region of a receiver by id.
    pub fn rx_bent_distance_m(&self, id: &str) -> Result<(f64, Region)> {
        let rx = self.rx_by_id(id)?;
        let d = self.bent_axis_distance_m(&rx.pos);
        Ok((d, self.classify(d)))
    }

    /// Perpendicular distance from a crossing-corridor position to the outer
    /// wall of that corridor (the wall on the bent axis, y = d1).
    pub fn distance_to_outer_nlos_wall_m(&self, p: &Point) -> f64 {
        self.d1_m - p.y_m
    }

    /// Perpendicular distance to the inner wall of the crossing corridor.
    pub fn distance_to_inner_nlos_wall_m(&self, p: &Point) -> f64 {
        self.nlos_corridor_width_m - self.distance_to_outer_nlos_wall_m(p)
    }

    /// The outer wall of the crossing corridor: horizontal on y = d1,
    /// extending past the tx corridor (x < −width).
    pub fn outer_nlos_wall(&self) -> Option<&Wall> {
        self.walls.iter().find(|w| {
            w.is_horizontal()
                && (w.a.y_m - self.d1_m).abs() < 1e-6
                && w.a.x_m.min(w.b.x_m) < -self.los_corridor_width_m
        })
    }

    /// The inner wall of the crossing corridor: horizontal on
    /// y = d1 − nlos_width, extending past the tx corridor.
    pub fn inner_nlos_wall(&self) -> Option<&Wall> {
        let y = self.d1_m - self.nlos_corridor_width_m;
        self.walls.iter().find(|w| {
            w.is_horizontal()
                && (w.a.y_m - y).abs() < 1e-6
                && w.a.x_m.min(w.b.x_m) < -self.los_corridor_width_m
        })
    }
}

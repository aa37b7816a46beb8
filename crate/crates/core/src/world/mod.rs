//! Geometry and kinematics of the city: grid map, player movement with
//! building collision, orientation conversions and trigger zones.

mod map;
mod movement;
mod orientation;
mod trigger;

use serde::{Deserialize, Serialize};

pub use map::{
    load_map, Cell, CellKind, CityMap, MapDocument, MapError, MapIssue, MapParseError,
    MIN_DIMENSION,
};
pub use movement::{step_player, MoveIntent, PlayerState, MAX_DT};
pub use orientation::{
    euler_to_quaternion, quaternion_to_euler, EulerAngles, EulerError, OrientationError,
    Quaternion, GIMBAL_LIMIT_DEG,
};
pub use trigger::{in_trigger, TriggerZone};

/// Point on the XZ ground plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub z: f64,
}

impl Vec2 {
    pub const fn new(x: f64, z: f64) -> Self {
        Self { x, z }
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self.x - other.x).hypot(self.z - other.z)
    }

    pub fn length(self) -> f64 {
        self.x.hypot(self.z)
    }

    pub fn with_y(self, y: f64) -> Vec3 {
        Vec3::new(self.x, y, self.z)
    }
}

/// World-space position. `y` is the height above the ground plane and is
/// always 0 in this world, but it is carried through every record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn ground(self) -> Vec2 {
        Vec2::new(self.x, self.z)
    }
}

//! Euler angle ⇄ quaternion conversion.
//!
//! Composition order is yaw (Y) · pitch (X) · roll (Z): roll is applied
//! first, then pitch, then yaw. All angles are degrees. Quaternions are kept
//! in canonical form with `w >= 0` so that equal rotations compare equal.

use serde::{Deserialize, Serialize};

/// Beyond this pitch the inverse conversion is ill-conditioned.
pub const GIMBAL_LIMIT_DEG: f64 = 89.99;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum EulerError {
    #[error("pitch {0}° outside (-90, 90)")]
    Pitch(f64),
    #[error("yaw {0}° outside [0, 360)")]
    Yaw(f64),
    #[error("roll {0}° outside [0, 360)")]
    Roll(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum OrientationError {
    #[error("pitch {pitch}° is within {:.2}° of the pole", 90.0 - GIMBAL_LIMIT_DEG)]
    GimbalProximity { pitch: f64 },
    #[error("quaternion is not unit length (norm {0})")]
    NotUnit(f64),
}

/// View rotation in degrees: pitch about X, yaw about Y, roll about Z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pitch: f64,
    yaw: f64,
    roll: f64,
}

impl Default for EulerAngles {
    fn default() -> Self {
        Self {
            pitch: 0.0,
            yaw: 0.0,
            roll: 0.0,
        }
    }
}

impl EulerAngles {
    pub fn new(pitch: f64, yaw: f64, roll: f64) -> Result<Self, EulerError> {
        if !(pitch > -90.0 && pitch < 90.0) {
            return Err(EulerError::Pitch(pitch));
        }
        if !(0.0..360.0).contains(&yaw) {
            return Err(EulerError::Yaw(yaw));
        }
        if !(0.0..360.0).contains(&roll) {
            return Err(EulerError::Roll(roll));
        }
        Ok(Self { pitch, yaw, roll })
    }

    /// Wraps yaw and roll into `[0, 360)`. Pitch must already be in range.
    pub fn wrapped(pitch: f64, yaw: f64, roll: f64) -> Result<Self, EulerError> {
        Self::new(pitch, wrap_degrees(yaw), wrap_degrees(roll))
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn yaw(&self) -> f64 {
        self.yaw
    }

    pub fn roll(&self) -> f64 {
        self.roll
    }

    pub fn with_yaw(self, yaw: f64) -> Self {
        Self {
            yaw: wrap_degrees(yaw),
            ..self
        }
    }
}

/// Maps any finite angle into `[0, 360)`.
pub fn wrap_degrees(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    // rem_euclid rounds tiny negatives up to exactly 360.
    if r >= 360.0 {
        0.0
    } else {
        r + 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub w: f64,
}

impl Quaternion {
    pub const IDENTITY: Self = Self {
        x: 0.0,
        y: 0.0,
        z: 0.0,
        w: 1.0,
    };

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z + self.w * self.w).sqrt()
    }

    /// Unit length, `w >= 0`; when `w == 0` the first non-zero vector
    /// component is made positive. Negative zeros are cleared.
    pub fn canonical(self) -> Self {
        let n = self.norm();
        let mut q = Self {
            x: self.x / n,
            y: self.y / n,
            z: self.z / n,
            w: self.w / n,
        };
        let flip = if q.w != 0.0 {
            q.w < 0.0
        } else {
            [q.x, q.y, q.z]
                .into_iter()
                .find(|c| *c != 0.0)
                .is_some_and(|c| c < 0.0)
        };
        if flip {
            q = Self {
                x: -q.x,
                y: -q.y,
                z: -q.z,
                w: -q.w,
            };
        }
        Self {
            x: q.x + 0.0,
            y: q.y + 0.0,
            z: q.z + 0.0,
            w: q.w + 0.0,
        }
    }
}

pub fn euler_to_quaternion(e: EulerAngles) -> Quaternion {
    let (sx, cx) = (e.pitch.to_radians() * 0.5).sin_cos();
    let (sy, cy) = (e.yaw.to_radians() * 0.5).sin_cos();
    let (sz, cz) = (e.roll.to_radians() * 0.5).sin_cos();
    Quaternion {
        x: cy * sx * cz + sy * cx * sz,
        y: sy * cx * cz - cy * sx * sz,
        z: cy * cx * sz - sy * sx * cz,
        w: cy * cx * cz + sy * sx * sz,
    }
    .canonical()
}

pub fn quaternion_to_euler(q: Quaternion) -> Result<EulerAngles, OrientationError> {
    let n = q.norm();
    if (n - 1.0).abs() > 1e-6 {
        return Err(OrientationError::NotUnit(n));
    }
    let Quaternion { x, y, z, w } = q;
    let sin_pitch = (2.0 * (w * x - y * z)).clamp(-1.0, 1.0);
    let pitch = sin_pitch.asin().to_degrees();
    if pitch.abs() > GIMBAL_LIMIT_DEG {
        return Err(OrientationError::GimbalProximity { pitch });
    }
    let yaw = (2.0 * (x * z + w * y)).atan2(1.0 - 2.0 * (x * x + y * y));
    let roll = (2.0 * (x * y + w * z)).atan2(1.0 - 2.0 * (x * x + z * z));
    Ok(EulerAngles {
        pitch,
        yaw: wrap_degrees(yaw.to_degrees()),
        roll: wrap_degrees(roll.to_degrees()),
    })
}

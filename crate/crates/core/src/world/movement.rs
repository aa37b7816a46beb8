use serde::{Deserialize, Serialize};

use super::orientation::EulerAngles;
use super::{CityMap, Vec2, Vec3};

/// Longest step clients are expected to integrate, in seconds.
pub const MAX_DT: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlayerState {
    pub position: Vec3,
    pub orientation: EulerAngles,
    /// World units per second.
    pub speed: f64,
}

/// Movement input for one step.
///
/// `direction` is a heading on the XZ plane. A unit vector moves at full
/// speed; shorter vectors act as a throttle and longer ones are normalized.
/// `turn` is the yaw rate in degrees per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoveIntent {
    pub direction: Vec2,
    pub turn: f64,
}

impl MoveIntent {
    pub fn toward(direction: Vec2) -> Self {
        Self {
            direction,
            turn: 0.0,
        }
    }
}

/// Advances the player by one step with per-axis wall sliding.
///
/// X is resolved first, then Z from the resolved X, so a blocked axis keeps
/// its old value while the free axis still moves. A non-positive `dt`
/// returns the state unchanged.
pub fn step_player(state: PlayerState, input: MoveIntent, dt: f64, map: &CityMap) -> PlayerState {
    // Also catches NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(dt > 0.0) {
        return state;
    }
    let mut dir = input.direction;
    let len = dir.length();
    if !len.is_finite() {
        dir = Vec2::new(0.0, 0.0);
    } else if len > 1.0 {
        dir = Vec2::new(dir.x / len, dir.z / len);
    }

    let from = state.position;
    let dx = dir.x * state.speed * dt;
    let dz = dir.z * state.speed * dt;

    let mut x = from.x;
    let mut z = from.z;
    if dx != 0.0 && map.is_walkable(Vec2::new(x + dx, z)) {
        x += dx;
    }
    if dz != 0.0 && map.is_walkable(Vec2::new(x, z + dz)) {
        z += dz;
    }

    let yaw = state.orientation.yaw() + input.turn * dt;
    PlayerState {
        position: Vec3::new(x, from.y, z),
        orientation: state.orientation.with_yaw(yaw),
        speed: state.speed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::load_map;

    fn map(rows: &[&str]) -> CityMap {
        load_map(&serde_json::json!({"name": "m", "cell_size": 2.0, "rows": rows}).to_string())
            .unwrap()
    }

    fn at(x: f64, z: f64, speed: f64) -> PlayerState {
        PlayerState {
            position: Vec3::new(x, 0.0, z),
            orientation: EulerAngles::default(),
            speed,
        }
    }

    #[test]
    fn unobstructed_linear_motion() {
        let m = map(&["S.......", "........", "........", "........", "...B...."]);
        let s = step_player(at(8.0, 5.0, 2.0), MoveIntent::toward(Vec2::new(1.0, 0.0)), 0.5, &m);
        assert_eq!(s.position, Vec3::new(9.0, 0.0, 5.0));
    }

    #[test]
    fn blocked_axis_keeps_old_value() {
        // Building at column 2 (x in [4, 6)).
        let m = map(&["S.#.", "..#.", "....", "...B"]);
        let start = at(3.5, 1.0, 4.0);
        let s = step_player(start, MoveIntent::toward(Vec2::new(1.0, 0.0)), 0.25, &m);
        assert_eq!(s.position, start.position);
    }

    #[test]
    fn diagonal_into_wall_slides_along_free_axis() {
        // Oracle: resolve each axis on its own against a 3x3 neighbourhood
        // centred on the player's cell (1, 1), with the east cell solid.
        //   . . .
        //   . P #
        //   . . .
        let m = map(&["S...", "..#.", "....", "...B"]);
        let start = at(3.5, 3.0, 4.0);
        let d = std::f64::consts::FRAC_1_SQRT_2;
        let s = step_player(start, MoveIntent::toward(Vec2::new(d, d)), 0.25, &m);
        let step = 4.0 * 0.25 * d;
        // x would land at 4.207 (solid column 2); z lands at 3.707 (cell row 1, column 1, free).
        assert_eq!(s.position.x, 3.5);
        assert_eq!(s.position.z, 3.0 + step);
    }

    #[test]
    fn cannot_leave_the_map() {
        let m = map(&["S...", "....", "....", "...B"]);
        let s = step_player(at(0.2, 0.2, 4.0), MoveIntent::toward(Vec2::new(-1.0, 0.0)), 0.25, &m);
        assert_eq!(s.position.x, 0.2);
    }

    #[test]
    fn yaw_wraps_into_range() {
        let m = map(&["S...", "....", "....", "...B"]);
        let mut s = at(1.0, 1.0, 4.0);
        s.orientation = EulerAngles::new(0.0, 350.0, 0.0).unwrap();
        let out = step_player(
            s,
            MoveIntent {
                direction: Vec2::new(0.0, 0.0),
                turn: 80.0,
            },
            0.25,
            &m,
        );
        assert_eq!(out.orientation.yaw(), 10.0);
        let back = step_player(
            out,
            MoveIntent {
                direction: Vec2::new(0.0, 0.0),
                turn: -80.0,
            },
            0.25,
            &m,
        );
        assert_eq!(back.orientation.yaw(), 350.0);
    }

    #[test]
    fn step_is_deterministic() {
        let m = map(&["S...", "..#.", "....", "...B"]);
        let input = MoveIntent {
            direction: Vec2::new(0.3, 0.9),
            turn: 17.0,
        };
        let a = step_player(at(1.3, 2.7, 4.0), input, 0.2, &m);
        let b = step_player(at(1.3, 2.7, 4.0), input, 0.2, &m);
        assert_eq!(a.position.x.to_bits(), b.position.x.to_bits());
        assert_eq!(a.position.z.to_bits(), b.position.z.to_bits());
        assert_eq!(a.orientation.yaw().to_bits(), b.orientation.yaw().to_bits());
    }
}

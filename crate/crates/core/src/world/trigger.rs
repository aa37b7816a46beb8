use serde::{Deserialize, Serialize};

use super::Vec2;

/// Circular region on the ground plane that opens a dilemma when entered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriggerZone {
    pub x: f64,
    pub z: f64,
    pub radius: f64,
}

impl TriggerZone {
    pub fn center(&self) -> Vec2 {
        Vec2::new(self.x, self.z)
    }
}

/// Boundary inclusive.
pub fn in_trigger(position: Vec2, zone: &TriggerZone) -> bool {
    position.distance(zone.center()) <= zone.radius
}

#[cfg(test)]
mod tests {
    use super::*;

    const ZONE: TriggerZone = TriggerZone {
        x: 3.0,
        z: 4.0,
        radius: 5.0,
    };

    #[test]
    fn center_is_inside() {
        assert!(in_trigger(Vec2::new(3.0, 4.0), &ZONE));
    }

    #[test]
    fn boundary_is_inclusive() {
        // 3-4-5 triangle lands exactly on the radius.
        assert!(in_trigger(Vec2::new(0.0, 0.0), &ZONE));
        assert!(in_trigger(Vec2::new(8.0, 4.0), &ZONE));
    }

    #[test]
    fn just_outside_is_excluded() {
        assert!(!in_trigger(Vec2::new(8.0 + 1e-9, 4.0), &ZONE));
        assert!(!in_trigger(Vec2::new(3.0, -1.000_000_1), &ZONE));
    }
}

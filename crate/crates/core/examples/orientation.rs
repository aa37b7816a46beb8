//! Euler angles on the wire, quaternions in the exports.

use epolis::world::{euler_to_quaternion, quaternion_to_euler, EulerAngles};

fn main() {
    for (pitch, yaw, roll) in [(0.0, 0.0, 0.0), (0.0, 90.0, 0.0), (45.0, 0.0, 0.0), (30.0, 200.0, 10.0)] {
        let e = EulerAngles::new(pitch, yaw, roll).unwrap();
        let q = euler_to_quaternion(e);
        let back = quaternion_to_euler(q).unwrap();
        println!(
            "({pitch:>5}, {yaw:>5}, {roll:>5}) -> q = ({:.7}, {:.7}, {:.7}, {:.7}) -> ({:.6}, {:.6}, {:.6})",
            q.x,
            q.y,
            q.z,
            q.w,
            back.pitch(),
            back.yaw(),
            back.roll()
        );
    }
    let wrapped = EulerAngles::wrapped(0.0, -90.0, 720.0).unwrap();
    println!("yaw -90 wraps to {}, roll 720 to {}", wrapped.yaw(), wrapped.roll());
    println!("pitch 90 is rejected: {}", EulerAngles::new(90.0, 0.0, 0.0).unwrap_err());
}

//! Steps a player into a wall and shows the free axis sliding along it.

use epolis::content::Content;
use epolis::world::{step_player, EulerAngles, MoveIntent, PlayerState, Vec2};

fn main() {
    let content = Content::sample();
    let map = &content.map;
    // Cell (1, 1) is a building; start just left of it on the street.
    let mut state = PlayerState {
        position: map.cell_center(epolis::world::Cell::new(0, 1)).with_y(0.0),
        orientation: EulerAngles::default(),
        speed: 4.0,
    };
    let diagonal = MoveIntent::toward(Vec2::new(1.0, 1.0));
    for tick in 0..8 {
        state = step_player(state, diagonal, 0.1, map);
        let p = state.position.ground();
        println!(
            "tick {tick}: ({:.2}, {:.2}) in cell {} walkable={}",
            p.x,
            p.z,
            map.cell_at(p),
            map.is_walkable(p)
        );
    }
}

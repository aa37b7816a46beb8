//! Loads the bundled city and dilemma pack, then shows what validation
//! reports for a map whose booth is walled off.

use epolis::content::{Content, SAMPLE_PACK};
use epolis::world::CellKind;

fn main() {
    let content = Content::sample();
    let map = &content.map;
    println!(
        "map {:?}: {}x{} cells of {} units, spawn {}, booth {}",
        map.name(),
        map.width(),
        map.height(),
        map.cell_size(),
        map.spawn().unwrap(),
        map.booth().unwrap()
    );
    println!("buildings: {}", map.cells_of(CellKind::Building).len());
    for d in content.pack.dilemmas() {
        println!(
            "  {} at ({}, {}) r={}: {} ({} choices)",
            d.id,
            d.trigger.x,
            d.trigger.z,
            d.trigger.radius,
            d.description,
            d.choices.len()
        );
    }

    let walled = r##"{"name": "walled", "cell_size": 2.0, "rows": ["S...", "....", "..##", "..#B"]}"##;
    match Content::from_sources(walled, SAMPLE_PACK) {
        Ok(_) => println!("unexpectedly valid"),
        Err(e) => {
            println!("walled map rejected:");
            for line in e.diagnostics() {
                println!("  {line}");
            }
        }
    }
}

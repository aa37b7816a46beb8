//! City grid: parsing, validation and cell queries.
//!
//! World coordinates map onto the grid with column `i = floor(x / cell_size)`
//! and row `j = floor(z / cell_size)`. Row 0 of the document is `z ∈ [0, cell_size)`.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Vec2, Vec3};

pub const MIN_DIMENSION: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellKind {
    Street,
    Building,
    Booth,
    Spawn,
}

impl CellKind {
    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            '.' => Some(Self::Street),
            '#' => Some(Self::Building),
            'B' => Some(Self::Booth),
            'S' => Some(Self::Spawn),
            _ => None,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Self::Street => '.',
            Self::Building => '#',
            Self::Booth => 'B',
            Self::Spawn => 'S',
        }
    }

    pub fn is_passable(self) -> bool {
        !matches!(self, Self::Building)
    }
}

/// Grid coordinate `(i, j)`: column along x, row along z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub i: i64,
    pub j: i64,
}

impl Cell {
    pub const fn new(i: i64, j: i64) -> Self {
        Self { i, j }
    }

    pub fn neighbors4(self) -> [Cell; 4] {
        [
            Cell::new(self.i + 1, self.j),
            Cell::new(self.i - 1, self.j),
            Cell::new(self.i, self.j + 1),
            Cell::new(self.i, self.j - 1),
        ]
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.i, self.j)
    }
}

/// On-disk map document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDocument {
    pub name: String,
    pub cell_size: f64,
    pub rows: Vec<String>,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MapParseError {
    #[error("malformed map document at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("cell_size must be a positive finite number, got {0}")]
    BadCellSize(f64),
    #[error("map has no rows")]
    NoRows,
    #[error("row {row} has length {len}, expected {expected}")]
    RaggedRow { row: usize, len: usize, expected: usize },
    #[error("row {row}, column {column}: unknown cell symbol {symbol:?}")]
    UnknownSymbol { row: usize, column: usize, symbol: char },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MapIssue {
    #[error("NoBooth: map has no booth cell")]
    NoBooth,
    #[error("MultipleBooths: map has {} booth cells at {}", .0.len(), join_cells(.0))]
    MultipleBooths(Vec<Cell>),
    #[error("NoSpawn: map has no spawn cell")]
    NoSpawn,
    #[error("BoothUnreachable: booth cannot be reached from spawn {spawn}")]
    BoothUnreachable { spawn: Cell },
    #[error("TooSmall: map is {width}x{height}, minimum is {min}x{min}", min = MIN_DIMENSION)]
    TooSmall { width: usize, height: usize },
}

fn join_cells(cells: &[Cell]) -> String {
    cells
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, thiserror::Error)]
pub enum MapError {
    #[error(transparent)]
    Parse(#[from] MapParseError),
    #[error("map failed validation: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Validation(Vec<MapIssue>),
}

impl MapError {
    pub fn issues(&self) -> &[MapIssue] {
        match self {
            Self::Validation(issues) => issues,
            Self::Parse(_) => &[],
        }
    }
}

/// A parsed city grid. Instances returned by [`load_map`] are validated;
/// [`CityMap::parse`] alone only guarantees a well-formed rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct CityMap {
    name: String,
    cell_size: f64,
    width: usize,
    height: usize,
    cells: Vec<CellKind>,
}

/// Parses and validates a map document, reporting every violated invariant.
pub fn load_map(document: &str) -> Result<CityMap, MapError> {
    let map = CityMap::parse(document)?;
    let issues = map.validate();
    if issues.is_empty() {
        Ok(map)
    } else {
        Err(MapError::Validation(issues))
    }
}

impl CityMap {
    pub fn parse(document: &str) -> Result<Self, MapParseError> {
        let doc: MapDocument =
            serde_json::from_str(document).map_err(|e| MapParseError::Syntax {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
        Self::from_document(&doc)
    }

    pub fn from_document(doc: &MapDocument) -> Result<Self, MapParseError> {
        if !(doc.cell_size.is_finite() && doc.cell_size > 0.0) {
            return Err(MapParseError::BadCellSize(doc.cell_size));
        }
        let height = doc.rows.len();
        if height == 0 {
            return Err(MapParseError::NoRows);
        }
        let width = doc.rows[0].chars().count();
        let mut cells = Vec::with_capacity(width * height);
        for (row, line) in doc.rows.iter().enumerate() {
            let len = line.chars().count();
            if len != width {
                return Err(MapParseError::RaggedRow {
                    row,
                    len,
                    expected: width,
                });
            }
            for (column, symbol) in line.chars().enumerate() {
                let kind = CellKind::from_symbol(symbol).ok_or(MapParseError::UnknownSymbol {
                    row,
                    column,
                    symbol,
                })?;
                cells.push(kind);
            }
        }
        Ok(Self {
            name: doc.name.clone(),
            cell_size: doc.cell_size,
            width,
            height,
            cells,
        })
    }

    pub fn to_document(&self) -> MapDocument {
        let rows = (0..self.height)
            .map(|j| {
                (0..self.width)
                    .map(|i| self.cells[j * self.width + i].symbol())
                    .collect()
            })
            .collect();
        MapDocument {
            name: self.name.clone(),
            cell_size: self.cell_size,
            rows,
        }
    }

    /// Every violated map invariant, in a stable order. Empty means valid.
    pub fn validate(&self) -> Vec<MapIssue> {
        let mut issues = Vec::new();
        if self.width < MIN_DIMENSION || self.height < MIN_DIMENSION {
            issues.push(MapIssue::TooSmall {
                width: self.width,
                height: self.height,
            });
        }
        let booths = self.cells_of(CellKind::Booth);
        match booths.len() {
            0 => issues.push(MapIssue::NoBooth),
            1 => {}
            _ => issues.push(MapIssue::MultipleBooths(booths.clone())),
        }
        let spawns = self.cells_of(CellKind::Spawn);
        if spawns.is_empty() {
            issues.push(MapIssue::NoSpawn);
        }
        if booths.len() == 1 {
            let reached = self.reachable_from(booths[0]);
            for spawn in spawns {
                if !reached[self.index(spawn)] {
                    issues.push(MapIssue::BoothUnreachable { spawn });
                }
            }
        }
        issues
    }

    /// BFS over passable cells; returns a visited mask indexed like `cells`.
    /// Reachability is symmetric on a 4-connected grid, so searching from the
    /// booth answers the question for every spawn at once.
    pub fn reachable_from(&self, start: Cell) -> Vec<bool> {
        let mut seen = vec![false; self.cells.len()];
        if !self.is_passable_cell(start) {
            return seen;
        }
        let mut queue = VecDeque::from([start]);
        seen[self.index(start)] = true;
        while let Some(cell) = queue.pop_front() {
            for next in cell.neighbors4() {
                if self.is_passable_cell(next) && !seen[self.index(next)] {
                    seen[self.index(next)] = true;
                    queue.push_back(next);
                }
            }
        }
        seen
    }

    /// Shortest 4-connected path of passable cells from `from` to `to`,
    /// inclusive of both ends. Neighbour order is fixed so the result is
    /// deterministic.
    pub fn shortest_path(&self, from: Cell, to: Cell) -> Option<Vec<Cell>> {
        if !self.is_passable_cell(from) || !self.is_passable_cell(to) {
            return None;
        }
        let mut prev: Vec<Option<Cell>> = vec![None; self.cells.len()];
        let mut seen = vec![false; self.cells.len()];
        let mut queue = VecDeque::from([from]);
        seen[self.index(from)] = true;
        while let Some(cell) = queue.pop_front() {
            if cell == to {
                let mut path = vec![to];
                let mut cur = to;
                while let Some(p) = prev[self.index(cur)] {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            for next in cell.neighbors4() {
                if self.is_passable_cell(next) && !seen[self.index(next)] {
                    seen[self.index(next)] = true;
                    prev[self.index(next)] = Some(cell);
                    queue.push_back(next);
                }
            }
        }
        None
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn in_grid(&self, cell: Cell) -> bool {
        cell.i >= 0 && cell.j >= 0 && (cell.i as usize) < self.width && (cell.j as usize) < self.height
    }

    fn index(&self, cell: Cell) -> usize {
        cell.j as usize * self.width + cell.i as usize
    }

    pub fn kind(&self, cell: Cell) -> Option<CellKind> {
        self.in_grid(cell).then(|| self.cells[self.index(cell)])
    }

    pub fn is_passable_cell(&self, cell: Cell) -> bool {
        self.kind(cell).is_some_and(CellKind::is_passable)
    }

    /// Cells of the given kind in row-major order.
    pub fn cells_of(&self, kind: CellKind) -> Vec<Cell> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, k)| **k == kind)
            .map(|(idx, _)| Cell::new((idx % self.width) as i64, (idx / self.width) as i64))
            .collect()
    }

    pub fn booth(&self) -> Option<Cell> {
        self.cells_of(CellKind::Booth).first().copied()
    }

    /// First spawn cell in row-major order.
    pub fn spawn(&self) -> Option<Cell> {
        self.cells_of(CellKind::Spawn).first().copied()
    }

    /// Cell containing a ground-plane point. May lie outside the grid.
    pub fn cell_at(&self, p: Vec2) -> Cell {
        Cell::new(
            (p.x / self.cell_size).floor() as i64,
            (p.z / self.cell_size).floor() as i64,
        )
    }

    pub fn cell_center(&self, cell: Cell) -> Vec2 {
        Vec2::new(
            (cell.i as f64 + 0.5) * self.cell_size,
            (cell.j as f64 + 0.5) * self.cell_size,
        )
    }

    /// Inside map bounds and not inside a building.
    pub fn is_walkable(&self, p: Vec2) -> bool {
        p.x.is_finite()
            && p.z.is_finite()
            && p.x >= 0.0
            && p.z >= 0.0
            && p.x < self.width as f64 * self.cell_size
            && p.z < self.height as f64 * self.cell_size
            && self.is_passable_cell(self.cell_at(p))
    }

    pub fn spawn_position(&self) -> Option<Vec3> {
        self.spawn().map(|c| self.cell_center(c).with_y(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(rows: &[&str]) -> String {
        serde_json::json!({"name": "t", "cell_size": 2.0, "rows": rows}).to_string()
    }

    #[test]
    fn minimal_open_map_is_accepted() {
        let rows = [
            "S.......", "........", "........", "........", "........", "........", "........",
            ".......B",
        ];
        let map = load_map(&doc(&rows)).unwrap();
        assert_eq!((map.width(), map.height()), (8, 8));
        assert_eq!(map.booth(), Some(Cell::new(7, 7)));
        assert_eq!(map.spawn(), Some(Cell::new(0, 0)));
    }

    #[test]
    fn enclosed_booth_is_unreachable() {
        let rows = ["S.....", "..#...", ".#B#..", "..#...", "......", "......"];
        let err = load_map(&doc(&rows)).unwrap_err();
        assert_eq!(
            err.issues(),
            &[MapIssue::BoothUnreachable {
                spawn: Cell::new(0, 0)
            }]
        );
    }

    #[test]
    fn two_booths_rejected() {
        let rows = ["S..B", "....", "....", "B..."];
        let err = load_map(&doc(&rows)).unwrap_err();
        assert!(matches!(err.issues(), [MapIssue::MultipleBooths(c)] if c.len() == 2));
    }

    #[test]
    fn reports_every_issue() {
        let rows = ["...", "...", "..."];
        let err = load_map(&doc(&rows)).unwrap_err();
        assert_eq!(
            err.issues(),
            &[
                MapIssue::TooSmall {
                    width: 3,
                    height: 3
                },
                MapIssue::NoBooth,
                MapIssue::NoSpawn
            ]
        );
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            CityMap::parse("{\"name\":"),
            Err(MapParseError::Syntax { .. })
        ));
        assert_eq!(
            CityMap::parse(&doc(&["S...", "..B"])).unwrap_err(),
            MapParseError::RaggedRow {
                row: 1,
                len: 3,
                expected: 4
            }
        );
        assert!(matches!(
            CityMap::parse(&doc(&["S..x"])),
            Err(MapParseError::UnknownSymbol { symbol: 'x', .. })
        ));
        let bad = serde_json::json!({"name": "t", "cell_size": 0.0, "rows": ["S"]}).to_string();
        assert_eq!(CityMap::parse(&bad).unwrap_err(), MapParseError::BadCellSize(0.0));
    }

    #[test]
    fn document_round_trip() {
        let rows = ["S.#.", "..#.", "....", "...B"];
        let map = load_map(&doc(&rows)).unwrap();
        let again = CityMap::from_document(&map.to_document()).unwrap();
        assert_eq!(map, again);
    }

    #[test]
    fn walkable_respects_bounds_and_buildings() {
        let rows = ["S.#.", "....", "....", "...B"];
        let map = load_map(&doc(&rows)).unwrap();
        assert!(map.is_walkable(Vec2::new(0.1, 0.1)));
        assert!(!map.is_walkable(Vec2::new(4.5, 1.0)));
        assert!(!map.is_walkable(Vec2::new(-0.001, 1.0)));
        assert!(!map.is_walkable(Vec2::new(8.0, 1.0)));
        assert!(map.is_walkable(Vec2::new(7.999, 7.999)));
    }

    #[test]
    fn shortest_path_goes_around_walls() {
        let rows = ["S#..", ".#..", "....", "...B"];
        let map = load_map(&doc(&rows)).unwrap();
        let path = map.shortest_path(Cell::new(0, 0), Cell::new(2, 0)).unwrap();
        assert_eq!(path.len(), 7);
        assert_eq!(path.first(), Some(&Cell::new(0, 0)));
        assert_eq!(path.last(), Some(&Cell::new(2, 0)));
        for w in path.windows(2) {
            assert_eq!((w[0].i - w[1].i).abs() + (w[0].j - w[1].j).abs(), 1);
        }
    }
}

//! Measurements over recorded play: time-to-answer statistics, dwell maps,
//! hotspots and answer distributions.
//!
//! Dwell is accumulated in whole milliseconds, so streaming and batch
//! computation agree exactly and totals are conserved without rounding.

mod report;

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

pub use report::{
    distribution_csv, distribution_json, hotspots_csv, hotspots_json, tta_csv, tta_json,
};

use crate::clock::Millis;
use crate::dilemma::DilemmaPack;
use crate::store::{ActionRow, MovementRow};
use crate::world::{Cell, Vec2};

/// Gaps between consecutive samples longer than this count only up to it,
/// so idle or disconnected players do not dominate the map.
pub const IDLE_CLAMP_MS: Millis = 2000;
/// Pre-prompt dwell is measured within this multiple of the trigger radius.
pub const PRE_PROMPT_RADIUS_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalyticsError {
    #[error("cell size must be positive and finite, got {0}")]
    BadCellSize(f64),
    #[error("action row references {0:?}, which is not in the pack")]
    UnknownQuestion(String),
}

/// Dwell time per grid cell. Cells never visited are absent.
#[derive(Debug, Clone, PartialEq)]
pub struct DwellGrid {
    cell_size: f64,
    origin: Vec2,
    cells: BTreeMap<Cell, Millis>,
}

impl DwellGrid {
    pub fn new(cell_size: f64) -> Result<Self, AnalyticsError> {
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(AnalyticsError::BadCellSize(cell_size));
        }
        Ok(Self {
            cell_size,
            origin: Vec2::new(0.0, 0.0),
            cells: BTreeMap::new(),
        })
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn origin(&self) -> Vec2 {
        self.origin
    }

    pub fn cell_of(&self, x: f64, z: f64) -> Cell {
        Cell::new(
            ((x - self.origin.x) / self.cell_size).floor() as i64,
            ((z - self.origin.z) / self.cell_size).floor() as i64,
        )
    }

    pub fn center(&self, cell: Cell) -> Vec2 {
        Vec2::new(
            self.origin.x + (cell.i as f64 + 0.5) * self.cell_size,
            self.origin.z + (cell.j as f64 + 0.5) * self.cell_size,
        )
    }

    pub fn add(&mut self, cell: Cell, ms: Millis) {
        if ms > 0 {
            *self.cells.entry(cell).or_default() += ms;
        }
    }

    pub fn dwell_ms(&self, cell: Cell) -> Millis {
        self.cells.get(&cell).copied().unwrap_or(0)
    }

    pub fn dwell_seconds(&self, cell: Cell) -> f64 {
        self.dwell_ms(cell) as f64 / 1000.0
    }

    pub fn total_ms(&self) -> Millis {
        self.cells.values().sum()
    }

    /// Non-empty cells in (i, j) order.
    pub fn iter(&self) -> impl Iterator<Item = (Cell, Millis)> + '_ {
        self.cells.iter().map(|(c, ms)| (*c, *ms))
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

fn clamped_gap(from: Millis, to: Millis) -> Millis {
    (to - from).clamp(0, IDLE_CLAMP_MS)
}

/// Builds a dwell grid from samples sorted by (session, timestamp). Each
/// gap to the next sample of the same session is credited to the cell of
/// the earlier sample.
pub fn dwell_map(movements: &[MovementRow], cell_size: f64) -> Result<DwellGrid, AnalyticsError> {
    let mut grid = DwellGrid::new(cell_size)?;
    for pair in movements.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.session_id == b.session_id {
            let cell = grid.cell_of(a.x_axis, a.z_axis);
            grid.add(cell, clamped_gap(a.timestamp, b.timestamp));
        }
    }
    Ok(grid)
}

/// Incremental [`dwell_map`]: samples may arrive with sessions interleaved,
/// as long as each session's own samples are in time order.
#[derive(Debug, Clone)]
pub struct DwellAccumulator {
    grid: DwellGrid,
    last: HashMap<String, (Cell, Millis)>,
}

impl DwellAccumulator {
    pub fn new(cell_size: f64) -> Result<Self, AnalyticsError> {
        Ok(Self {
            grid: DwellGrid::new(cell_size)?,
            last: HashMap::new(),
        })
    }

    pub fn push(&mut self, row: &MovementRow) {
        let cell = self.grid.cell_of(row.x_axis, row.z_axis);
        if let Some((prev, ts)) = self.last.insert(row.session_id.clone(), (cell, row.timestamp)) {
            self.grid.add(prev, clamped_gap(ts, row.timestamp));
        }
    }

    pub fn grid(&self) -> &DwellGrid {
        &self.grid
    }

    pub fn finish(self) -> DwellGrid {
        self.grid
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hotspot {
    pub cell_i: i64,
    pub cell_j: i64,
    pub center_x: f64,
    pub center_z: f64,
    pub dwell_seconds: f64,
}

/// The `k` cells with the most dwell, descending; ties go to the smaller
/// (i, j).
pub fn hotspots(grid: &DwellGrid, k: usize) -> Vec<Hotspot> {
    let mut cells: Vec<(Cell, Millis)> = grid.iter().collect();
    cells.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    cells
        .into_iter()
        .take(k)
        .map(|(cell, ms)| {
            let c = grid.center(cell);
            Hotspot {
                cell_i: cell.i,
                cell_j: cell.j,
                center_x: c.x,
                center_z: c.z,
                dwell_seconds: ms as f64 / 1000.0,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuestionStats {
    pub question_number: String,
    pub n_answers: usize,
    /// `None` when nobody answered.
    pub tta_mean_ms: Option<f64>,
    pub tta_median_ms: Option<Millis>,
    pub tta_max_ms: Option<Millis>,
    pub choice_counts: BTreeMap<String, usize>,
    /// Mean over answering sessions of the time spent near the trigger
    /// before the prompt opened.
    pub pre_prompt_dwell_s: Option<f64>,
}

/// Lower middle element for even counts. `values` must be sorted.
fn lower_median(values: &[Millis]) -> Option<Millis> {
    (!values.is_empty()).then(|| values[(values.len() - 1) / 2])
}

/// Per-question statistics in pack order.
pub fn question_stats(
    actions: &[ActionRow],
    movements: &[MovementRow],
    pack: &DilemmaPack,
) -> Result<Vec<QuestionStats>, AnalyticsError> {
    let mut by_question: HashMap<&str, Vec<&ActionRow>> = HashMap::new();
    for a in actions {
        if pack.get_str(&a.question_number).is_none() {
            return Err(AnalyticsError::UnknownQuestion(a.question_number.clone()));
        }
        by_question.entry(a.question_number.as_str()).or_default().push(a);
    }
    let mut by_session: HashMap<&str, Vec<&MovementRow>> = HashMap::new();
    for m in movements {
        by_session.entry(m.session_id.as_str()).or_default().push(m);
    }
    for samples in by_session.values_mut() {
        samples.sort_by_key(|m| m.timestamp);
    }

    let stats = pack
        .dilemmas()
        .iter()
        .map(|d| {
            let rows = by_question.remove(d.id.as_str()).unwrap_or_default();
            let mut tta: Vec<Millis> = rows.iter().map(|a| a.time_to_answer_ms).collect();
            tta.sort_unstable();
            let mut choice_counts = BTreeMap::new();
            for a in &rows {
                *choice_counts.entry(a.question_answer.clone()).or_insert(0) += 1;
            }
            let center = Vec2::new(d.trigger.x, d.trigger.z);
            let reach = d.trigger.radius * PRE_PROMPT_RADIUS_FACTOR;
            let dwell: Vec<Millis> = rows
                .iter()
                .map(|a| {
                    let samples = by_session.get(a.session_id.as_str()).map_or(&[][..], Vec::as_slice);
                    pre_prompt_dwell(samples, center, reach, a.prompt_ts())
                })
                .collect();
            let n = rows.len();
            QuestionStats {
                question_number: d.id.to_string(),
                n_answers: n,
                tta_mean_ms: (n > 0).then(|| tta.iter().sum::<Millis>() as f64 / n as f64),
                tta_median_ms: lower_median(&tta),
                tta_max_ms: tta.last().copied(),
                choice_counts,
                pre_prompt_dwell_s: (n > 0)
                    .then(|| dwell.iter().sum::<Millis>() as f64 / 1000.0 / n as f64),
            }
        })
        .collect();
    Ok(stats)
}

/// Dwell (ms) within `reach` of `center` over gaps that end by `prompt_ts`.
fn pre_prompt_dwell(samples: &[&MovementRow], center: Vec2, reach: f64, prompt_ts: Millis) -> Millis {
    samples
        .windows(2)
        .take_while(|w| w[1].timestamp <= prompt_ts)
        .filter(|w| Vec2::new(w[0].x_axis, w[0].z_axis).distance(center) <= reach)
        .map(|w| clamped_gap(w[0].timestamp, w[1].timestamp))
        .sum()
}

/// question → choice → count.
pub fn answer_distribution(actions: &[ActionRow]) -> BTreeMap<String, BTreeMap<String, usize>> {
    let mut out: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    for a in actions {
        *out.entry(a.question_number.clone())
            .or_default()
            .entry(a.question_answer.clone())
            .or_insert(0) += 1;
    }
    out
}

use std::collections::BTreeMap;

use serde_json::json;

use super::{Hotspot, QuestionStats};
use crate::export::render_float;

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("writing to memory cannot fail");
    String::from_utf8(bytes).expect("csv of UTF-8 fields is UTF-8")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn opt_float(v: Option<f64>) -> String {
    v.map(render_float).unwrap_or_default()
}

/// `question_number,n_answers,tta_mean_ms,tta_median_ms,tta_max_ms,pre_prompt_dwell_s,choice_counts`
/// with counts rendered as `A=1;B=2`.
pub fn tta_csv(stats: &[QuestionStats]) -> String {
    let mut w = csv_writer();
    w.write_record([
        "question_number",
        "n_answers",
        "tta_mean_ms",
        "tta_median_ms",
        "tta_max_ms",
        "pre_prompt_dwell_s",
        "choice_counts",
    ])
    .expect("in-memory write");
    for s in stats {
        let counts = s
            .choice_counts
            .iter()
            .map(|(k, n)| format!("{k}={n}"))
            .collect::<Vec<_>>()
            .join(";");
        w.write_record([
            s.question_number.clone(),
            s.n_answers.to_string(),
            opt_float(s.tta_mean_ms),
            opt(s.tta_median_ms),
            opt(s.tta_max_ms),
            opt_float(s.pre_prompt_dwell_s),
            counts,
        ])
        .expect("in-memory write");
    }
    finish(w)
}

pub fn tta_json(stats: &[QuestionStats]) -> String {
    let body = json!({ "kind": "tta", "rows": stats });
    serde_json::to_string_pretty(&body).expect("stats serialize") + "\n"
}

/// `cell_i,cell_j,center_x,center_z,dwell_seconds`
pub fn hotspots_csv(spots: &[Hotspot]) -> String {
    let mut w = csv_writer();
    w.write_record(["cell_i", "cell_j", "center_x", "center_z", "dwell_seconds"])
        .expect("in-memory write");
    for h in spots {
        w.write_record([
            h.cell_i.to_string(),
            h.cell_j.to_string(),
            render_float(h.center_x),
            render_float(h.center_z),
            render_float(h.dwell_seconds),
        ])
        .expect("in-memory write");
    }
    finish(w)
}

pub fn hotspots_json(spots: &[Hotspot], cell_size: f64) -> String {
    let body = json!({ "kind": "hotspots", "cell_size": cell_size, "rows": spots });
    serde_json::to_string_pretty(&body).expect("hotspots serialize") + "\n"
}

/// `question_number,choice,count`
pub fn distribution_csv(dist: &BTreeMap<String, BTreeMap<String, usize>>) -> String {
    let mut w = csv_writer();
    w.write_record(["question_number", "choice", "count"])
        .expect("in-memory write");
    for (q, choices) in dist {
        for (c, n) in choices {
            w.write_record([q.as_str(), c.as_str(), &n.to_string()])
                .expect("in-memory write");
        }
    }
    finish(w)
}

pub fn distribution_json(dist: &BTreeMap<String, BTreeMap<String, usize>>) -> String {
    let body = json!({ "kind": "distribution", "questions": dist });
    serde_json::to_string_pretty(&body).expect("distribution serializes") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hotspot_columns() {
        let csv = hotspots_csv(&[Hotspot {
            cell_i: 5,
            cell_j: 4,
            center_x: 11.0,
            center_z: 9.0,
            dwell_seconds: 1.8,
        }]);
        assert_eq!(csv, "cell_i,cell_j,center_x,center_z,dwell_seconds\n5,4,11,9,1.8\n");
    }

    #[test]
    fn tta_row() {
        let stats = QuestionStats {
            question_number: "Q1".into(),
            n_answers: 3,
            tta_mean_ms: Some(4000.0),
            tta_median_ms: Some(2000),
            tta_max_ms: Some(9000),
            choice_counts: BTreeMap::from([("A".into(), 1), ("B".into(), 2)]),
            pre_prompt_dwell_s: None,
        };
        let csv = tta_csv(&[stats]);
        assert_eq!(csv.lines().nth(1), Some("Q1,3,4000,2000,9000,,A=1;B=2"));
    }
}

mod common;

use serde_json::{json, Value};

use common::TestServer;
use epolis::export::{import_movements, ExportFormat};
use epolis::simbot::{self, BotPolicy, Http};

fn post(agent: &ureq::Agent, url: &str, body: &Value) -> (u16, Value) {
    let mut resp = agent.post(url).send_json(body).unwrap();
    let status = resp.status().as_u16();
    let text = resp.body_mut().read_to_string().unwrap();
    (status, serde_json::from_str(&text).unwrap_or(Value::String(text)))
}

fn post_raw(agent: &ureq::Agent, url: &str, body: &str) -> (u16, Value) {
    let mut resp = agent
        .post(url)
        .header("content-type", "application/json")
        .send(body)
        .unwrap();
    let status = resp.status().as_u16();
    (status, resp.body_mut().read_json().unwrap())
}

fn get(agent: &ureq::Agent, url: &str) -> (u16, String, Vec<u8>) {
    let mut resp = agent.get(url).call().unwrap();
    let status = resp.status().as_u16();
    let ctype = resp
        .headers()
        .get("content-type")
        .map(|v| v.to_str().unwrap().to_owned())
        .unwrap_or_default();
    (status, ctype, resp.body_mut().read_to_vec().unwrap())
}

fn moves(points: &[(f64, f64)], start_ts: i64) -> Value {
    let events: Vec<Value> = points
        .iter()
        .enumerate()
        .map(|(k, (x, z))| {
            json!({"type": "move", "position": {"x": x, "y": 0.0, "z": z},
                   "euler": {"x": 0.0, "y": 90.0, "z": 0.0}, "ts": start_ts + 200 * (k as i64 + 1)})
        })
        .collect();
    json!({ "events": events })
}

fn new_session(agent: &ureq::Agent, base: &str) -> (String, i64) {
    let (status, body) = post(
        agent,
        &format!("{base}/v1/sessions"),
        &json!({"player_name": "maria", "avatar": "avatar2", "pack_id": "epolis-sample"}),
    );
    assert_eq!(status, 201, "{body}");
    (
        body["session_id"].as_str().unwrap().to_owned(),
        body["created_ts"].as_i64().unwrap(),
    )
}

#[test]
fn create_session_describes_the_world() {
    let tmp = tempfile::tempdir().unwrap();
    let server = TestServer::start(tmp.path());
    let agent = TestServer::agent();
    let (status, body) = post(
        &agent,
        &format!("{}/v1/sessions", server.base),
        &json!({"player_name": "maria", "avatar": "avatar2", "pack_id": "epolis-sample"}),
    );
    assert_eq!(status, 201);
    assert_eq!(body["dilemma_count"], 4);
    assert_eq!(body["speed"], 4.0);
    assert_eq!(body["spawn"], json!({"x": 1.0, "y": 0.0, "z": 1.0}));
    assert_eq!(body["map"]["rows"].as_array().unwrap().len(), 16);
    let triggers = body["triggers"].as_array().unwrap();
    assert_eq!(triggers[0], json!({"question": "Q1", "x": 11.0, "z": 9.0, "radius": 1.5}));
    // Choice effects stay on the server.
    assert!(!body.to_string().contains("effects"));
}

#[test]
fn create_session_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let server = TestServer::start(tmp.path());
    let agent = TestServer::agent();
    let url = format!("{}/v1/sessions", server.base);
    let (status, body) = post(
        &agent,
        &url,
        &json!({"player_name": "maria", "avatar": "a", "pack_id": "nope"}),
    );
    assert_eq!((status, body["code"].as_str()), (404, Some("UNKNOWN_PACK")));
    let (status, body) = post(
        &agent,
        &url,
        &json!({"player_name": "  ", "avatar": "a", "pack_id": "epolis-sample"}),
    );
    assert_eq!((status, body["code"].as_str()), (400, Some("BAD_PLAYER_NAME")));
    let (status, body) = post_raw(&agent, &url, "{\"player_name\": ");
    assert_eq!((status, body["code"].as_str()), (400, Some("BAD_REQUEST")));
}

#[test]
fn entering_a_trigger_mid_batch_rejects_the_rest() {
    let tmp = tempfile::tempdir().unwrap();
    let server = TestServer::start(tmp.path());
    let agent = TestServer::agent();
    let (id, t0) = new_session(&agent, &server.base);
    let events = format!("{}/v1/sessions/{id}/events", server.base);

    let walk = [(1.0, 3.0), (1.0, 5.0), (1.0, 7.0), (3.0, 7.0), (5.0, 7.0), (7.0, 7.0)];
    let (status, body) = post(&agent, &events, &moves(&walk, t0));
    assert_eq!(status, 200, "{body}");
    assert_eq!(body, json!({"accepted": 6, "completed": false}));

    // The third move lands inside the Q1 zone at (11, 9).
    let into_zone = [(9.0, 7.0), (11.0, 7.0), (11.0, 8.5), (11.0, 9.0), (11.0, 10.0)];
    let (status, body) = post(&agent, &events, &moves(&into_zone, t0 + 1200));
    assert_eq!(status, 409, "{body}");
    assert_eq!(body["accepted"], 3);
    assert_eq!(body["rejected_from"], 3);
    assert_eq!(body["error"]["code"], "MOVE_WHILE_PROMPTED");
    assert_eq!(body["opened_prompt"]["question"], "Q1");
    assert_eq!(body["opened_prompt"]["choices"].as_array().unwrap().len(), 4);

    let (status, _, state) = get(&agent, &format!("{}/v1/sessions/{id}/state", server.base));
    assert_eq!(status, 200);
    let state: Value = serde_json::from_slice(&state).unwrap();
    assert_eq!(state["phase"], "prompted");
    assert_eq!(state["open_prompt"]["question"], "Q1");
    assert_eq!(state["position"], json!({"x": 11.0, "y": 0.0, "z": 8.5}));

    let answer = json!({"events": [{"type": "answer", "question": "Q1", "choice": "B", "ts": t0 + 5000}]});
    let (status, body) = post(&agent, &events, &answer);
    assert_eq!((status, body["accepted"].as_u64()), (200, Some(1)));
    let (_, _, state) = get(&agent, &format!("{}/v1/sessions/{id}/state", server.base));
    let state: Value = serde_json::from_slice(&state).unwrap();
    assert_eq!(state["phase"], "roaming");
    assert_eq!(state["progress"], json!({"answered": 1, "total": 4}));
}

#[test]
fn ingest_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let server = TestServer::start(tmp.path());
    let agent = TestServer::agent();
    let (id, t0) = new_session(&agent, &server.base);
    let events = format!("{}/v1/sessions/{id}/events", server.base);

    let (status, body) = post(&agent, &events, &json!({"events": []}));
    assert_eq!((status, body["code"].as_str()), (400, Some("BAD_BATCH")));
    let (status, body) = post(&agent, &events, &json!({"events": [{"type": "teleport", "ts": 1}]}));
    assert_eq!((status, body["code"].as_str()), (400, Some("BAD_REQUEST")));
    let unknown = format!("{}/v1/sessions/00000000-0000-4000-8000-000000000000/events", server.base);
    let (status, body) = post(&agent, &unknown, &moves(&[(1.0, 3.0)], t0));
    assert_eq!((status, body["code"].as_str()), (404, Some("UNKNOWN_SESSION")));
    let garbage = format!("{}/v1/sessions/not-a-uuid/state", server.base);
    assert_eq!(get(&agent, &garbage).0, 404);

    // Into a building: rejected at index 0, nothing accepted.
    let (status, body) = post(&agent, &events, &moves(&[(3.0, 3.0)], t0));
    assert_eq!(status, 409);
    assert_eq!(body["accepted"], 0);
    assert_eq!(body["error"]["code"], "ILLEGAL_MOVE");

    let (status, _, body) = get(&agent, &format!("{}/v1/sessions/{id}/blueprint", server.base));
    let body: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!((status, body["code"].as_str()), (409, Some("NOT_COMPLETE")));
}

#[test]
fn completed_bot_blueprint_is_stable() {
    let tmp = tempfile::tempdir().unwrap();
    let server = TestServer::start(tmp.path());
    let mut backend = Http::new(&server.base);
    let summary = simbot::run_bot(&BotPolicy::default(), 9, "epolis-sample", &mut backend).unwrap();
    assert!(summary.completed);
    let agent = TestServer::agent();
    let url = format!("{}/v1/sessions/{}/blueprint", server.base, summary.session_id);
    let (status, ctype, first) = get(&agent, &url);
    assert_eq!((status, ctype.as_str()), (200, "application/json"));
    assert_eq!(get(&agent, &url).2, first);
    let bp: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(bp["answers"].as_array().unwrap().len(), 4);
    assert_eq!(bp["attributes"].as_array().unwrap().len(), 4);
}

#[test]
fn export_endpoint_formats_and_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let server = TestServer::start(tmp.path());
    let mut backend = Http::new(&server.base);
    simbot::run_bot(&BotPolicy::default(), 3, "epolis-sample", &mut backend).unwrap();
    let agent = TestServer::agent();

    let (status, ctype, body) = get(&agent, &format!("{}/v1/export?kind=actions&format=csv", server.base));
    assert_eq!((status, ctype.as_str()), (200, "text/csv"));
    let text = String::from_utf8(body).unwrap();
    assert!(text.starts_with(
        "player_name,question_answer,question_number,question_description,timestamp\n"
    ));
    assert_eq!(text.lines().count(), 5);

    for (format, ctype) in [("json", "application/json"), ("xml", "application/xml"), ("yaml", "application/yaml")] {
        let url = format!("{}/v1/export?kind=movements&format={format}&mode=extended", server.base);
        let (status, got, _) = get(&agent, &url);
        assert_eq!(status, 200, "{format}");
        assert_eq!(got, ctype, "{format}");
    }

    for query in ["kind=actions&format=parquet", "kind=players&format=csv", "kind=actions&format=csv&mode=raw", "format=csv"] {
        let (status, _, body) = get(&agent, &format!("{}/v1/export?{query}", server.base));
        assert_eq!(status, 400, "{query}: {}", String::from_utf8_lossy(&body));
    }
}

#[test]
fn export_during_ingestion_is_never_torn() {
    let tmp = tempfile::tempdir().unwrap();
    let server = TestServer::start(tmp.path());
    let base = server.base.clone();
    let agent = TestServer::agent();
    let url = format!("{base}/v1/export?kind=movements&format=json&mode=extended");
    let (done_tx, done_rx) = std::sync::mpsc::channel();
    let writer = std::thread::spawn(move || {
        let report = simbot::run_population_concurrent(
            8,
            40,
            &BotPolicy::default(),
            "epolis-sample",
            |_| Http::new(&base),
        );
        done_tx.send(()).unwrap();
        report
    });
    let mut last = 0;
    let mut exports = 0;
    loop {
        let finished = done_rx.try_recv().is_ok();
        let (status, _, body) = get(&agent, &url);
        assert_eq!(status, 200);
        let rows = import_movements(&body, ExportFormat::Json).expect("complete document");
        assert!(rows.len() >= last, "export went backwards");
        last = rows.len();
        exports += 1;
        if finished {
            break;
        }
    }
    let report = writer.join().unwrap();
    assert_eq!(report.completed, 8);
    assert_eq!(last, report.total_movements);
    assert!(exports > 1);
}

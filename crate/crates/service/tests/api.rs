use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use minesweep_core::engine::{BoardConfig, Coord, GameState};
use minesweep_core::policies::VersionId;
use minesweep_service::{
    compute_hint, router, AppState, CellJson, CellState, GameSnapshot, HintPayload, MoveResponse, ServiceConfig,
    SolverMoveResponse, StatusJson, VersionInfo,
};
use serde_json::{json, Value};
use tower::ServiceExt;

fn app() -> (Arc<AppState>, Router) {
    let state = Arc::new(AppState::new(ServiceConfig::default()));
    (state.clone(), router(state))
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()));
    (status, value)
}

async fn new_game(app: &Router, body: Value) -> GameSnapshot {
    let (status, v) = call(app, Method::POST, "/games", Some(body)).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    serde_json::from_value(v).unwrap()
}

/// Replays the session's board locally: same seed, same first click.
fn shadow(seed: u64, first: Coord) -> GameState {
    let mut g = GameState::new(BoardConfig::new(9, 9, 10, seed).unwrap()).unwrap();
    g.uncover(first).unwrap();
    g
}

#[tokio::test]
async fn create_returns_a_covered_board() {
    let (_, app) = app();
    let g = new_game(&app, json!({"p": 9, "q": 9, "n": 10, "seed": 5})).await;
    assert_eq!(g.seed, 5);
    assert_eq!(g.revision, 0);
    assert_eq!(g.status, StatusJson::InProgress);
    assert_eq!(g.view.cells.len(), 9);
    assert!(g.view.cells.iter().flatten().all(|c| *c == CellJson::State(CellState::Covered)));
    assert_eq!(g.view.cells.iter().flatten().count(), 81);
    assert!(g.view.mines.is_none());
    // The configured default needs a model; without one the fallback is used.
    assert_eq!(g.version, VersionId::V4_5);
}

#[tokio::test]
async fn invalid_boards_and_versions_are_rejected() {
    let (_, app) = app();
    let (status, v) = call(&app, Method::POST, "/games", Some(json!({"p": 2, "q": 2, "n": 4}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(v["error"].as_str().unwrap().contains("mine count"));
    let (status, _) = call(&app, Method::POST, "/games", Some(json!({"p": 9, "q": 9, "n": 10, "version": "5.5"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn omitted_seed_is_generated_and_returned() {
    let (_, app) = app();
    let a = new_game(&app, json!({"p": 9, "q": 9, "n": 10})).await;
    let b = new_game(&app, json!({"p": 9, "q": 9, "n": 10})).await;
    assert_ne!(a.session_id, b.session_id);
    assert!(a.seed < 1 << 53);
    let (_, v) = call(&app, Method::GET, &format!("/games/{}", a.session_id), None).await;
    assert_eq!(v["seed"], json!(a.seed));
}

#[tokio::test]
async fn uncover_flag_and_status_codes() {
    let (_, app) = app();
    let g = new_game(&app, json!({"p": 9, "q": 9, "n": 10, "seed": 11, "version": "3.0"})).await;
    let base = format!("/games/{}", g.session_id);

    let (status, v) = call(&app, Method::POST, &format!("{base}/uncover"), Some(json!({"i": 4, "j": 4}))).await;
    assert_eq!(status, StatusCode::OK);
    let r: MoveResponse = serde_json::from_value(v.clone()).unwrap();
    assert_eq!(r.revision, 1);
    assert!(r.view.mines.is_none());
    assert!(v["view"].get("mines").is_none());

    // Uncovering the same cell again is illegal.
    let (status, _) = call(&app, Method::POST, &format!("{base}/uncover"), Some(json!({"i": 4, "j": 4}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) = call(&app, Method::POST, &format!("{base}/uncover"), Some(json!({"i": 40, "j": 4}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let truth = shadow(11, Coord::new(4, 4));
    let mine = truth.mine_cells()[0];
    let (status, v) = call(&app, Method::POST, &format!("{base}/flag"), Some(json!({"i": mine.row, "j": mine.col}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["revision"], json!(2));
    assert_eq!(v["view"]["cells"][mine.row][mine.col], json!("flagged"));
    call(&app, Method::POST, &format!("{base}/flag"), Some(json!({"i": mine.row, "j": mine.col}))).await;

    let (status, v) = call(&app, Method::POST, &format!("{base}/uncover"), Some(json!({"i": mine.row, "j": mine.col}))).await;
    assert_eq!(status, StatusCode::OK);
    let r: MoveResponse = serde_json::from_value(v).unwrap();
    assert_eq!(r.status, StatusJson::Lost);
    assert_eq!(r.revision, 4);
    let mut shown = r.view.mines.unwrap();
    shown.sort();
    let mut expected = truth.mine_cells();
    expected.sort();
    assert_eq!(shown, expected);
    assert_eq!(r.view.cells[mine.row][mine.col], CellJson::State(CellState::Mine));

    let (status, _) = call(&app, Method::POST, &format!("{base}/uncover"), Some(json!({"i": 0, "j": 0}))).await;
    assert_eq!(status, StatusCode::GONE);
    let (status, _) = call(&app, Method::POST, &format!("{base}/solver-move"), None).await;
    assert_eq!(status, StatusCode::GONE);
    let (status, _) = call(&app, Method::GET, &format!("{base}/hint"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn unknown_sessions_are_404() {
    let (_, app) = app();
    for (m, uri, body) in [
        (Method::GET, "/games/nope", None),
        (Method::POST, "/games/nope/uncover", Some(json!({"i": 0, "j": 0}))),
        (Method::POST, "/games/nope/flag", Some(json!({"i": 0, "j": 0}))),
        (Method::GET, "/games/nope/hint", None),
        (Method::POST, "/games/nope/solver-move", None),
    ] {
        assert_eq!(call(&app, m, uri, body).await.0, StatusCode::NOT_FOUND, "{uri}");
    }
}

#[tokio::test]
async fn hints_are_read_only_and_sound() {
    let (_, app) = app();
    for seed in 0..20u64 {
        let g = new_game(&app, json!({"p": 9, "q": 9, "n": 10, "seed": seed, "version": "4.5"})).await;
        let base = format!("/games/{}", g.session_id);
        call(&app, Method::POST, &format!("{base}/uncover"), Some(json!({"i": 4, "j": 4}))).await;
        let truth = shadow(seed, Coord::new(4, 4));
        if truth.status().is_finished() {
            continue;
        }
        let (status, a) = call(&app, Method::GET, &format!("{base}/hint"), None).await;
        assert_eq!(status, StatusCode::OK, "{a}");
        let (_, b) = call(&app, Method::GET, &format!("{base}/hint"), None).await;
        assert_eq!(a, b);
        let h: HintPayload = serde_json::from_value(a).unwrap();
        assert_eq!(h.revision, 1);
        for c in &h.determined_safe {
            assert!(!truth.is_mine(*c));
        }
        for c in &h.determined_mines {
            assert!(truth.is_mine(*c));
        }
        for p in &h.probabilities {
            assert!(!h.determined_safe.contains(&p.coordinate) && !h.determined_mines.contains(&p.coordinate));
            assert!((0.0..=1.0).contains(&p.mine_probability));
        }
        assert!(h.recommended.is_some());
        let (_, snap) = call(&app, Method::GET, &base, None).await;
        assert_eq!(snap["revision"], json!(1));
    }
}

#[tokio::test]
async fn hint_fields_are_camel_case() {
    let (_, app) = app();
    let g = new_game(&app, json!({"p": 9, "q": 9, "n": 10, "seed": 3})).await;
    let base = format!("/games/{}", g.session_id);
    call(&app, Method::POST, &format!("{base}/uncover"), Some(json!({"i": 4, "j": 4}))).await;
    let (_, v) = call(&app, Method::GET, &format!("{base}/hint?version=3.5"), None).await;
    for key in ["determinedSafe", "determinedMines", "probabilities", "recommended", "truncated", "revision"] {
        assert!(v.get(key).is_some(), "missing {key} in {v}");
    }
    assert_eq!(v["version"], json!("3.5"));
    let (status, v) = call(&app, Method::GET, &format!("{base}/hint?version=9.9"), None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(v["error"].is_string());
}

#[test]
fn hint_rules_on_tiny_frontiers() {
    let app = AppState::new(ServiceConfig::default());
    // One number over two covered cells holding one mine: A = [[1, 1]], N = [1].
    let mut g = GameState::with_layout(1, 3, &[Coord::new(0, 2)]).unwrap();
    g.uncover(Coord::new(0, 1)).unwrap();
    let h = compute_hint(&app, &g, VersionId::V3_0, 1, 0).unwrap();
    assert!(h.determined_safe.is_empty() && h.determined_mines.is_empty());
    let probs: Vec<(Coord, f64)> = h.probabilities.iter().map(|p| (p.coordinate, p.mine_probability)).collect();
    assert_eq!(probs, vec![(Coord::new(0, 0), 0.5), (Coord::new(0, 2), 0.5)]);

    // A 1 whose mine is flagged leaves A = [[1, 1]], N = [0] on the rest.
    let mut g = GameState::with_layout(2, 2, &[Coord::new(0, 0)]).unwrap();
    g.uncover(Coord::new(1, 1)).unwrap();
    g.toggle_flag(Coord::new(0, 0)).unwrap();
    let h = compute_hint(&app, &g, VersionId::V3_0, 1, 0).unwrap();
    let mut safe = h.determined_safe.clone();
    safe.sort();
    assert_eq!(safe, vec![Coord::new(0, 1), Coord::new(1, 0)]);
    assert!(h.probabilities.is_empty());
    assert_eq!(h.recommended.unwrap().rationale, minesweep_core::policies::Rationale::Deterministic);
}

#[tokio::test]
async fn solver_moves_finish_games_with_increasing_revisions() {
    let (_, app) = app();
    for seed in 0..5u64 {
        let g = new_game(&app, json!({"p": 9, "q": 9, "n": 10, "seed": seed, "version": "4.0"})).await;
        let base = format!("/games/{}", g.session_id);
        let mut last = 0;
        for _ in 0..200 {
            let (status, v) = call(&app, Method::POST, &format!("{base}/solver-move"), None).await;
            assert_eq!(status, StatusCode::OK, "{v}");
            let r: SolverMoveResponse = serde_json::from_value(v).unwrap();
            assert_eq!(r.revision, last + 1);
            last = r.revision;
            if r.status != StatusJson::InProgress {
                break;
            }
        }
        let (_, snap) = call(&app, Method::GET, &base, None).await;
        assert_ne!(snap["status"], json!("inProgress"), "seed {seed} did not finish");
    }
}

#[tokio::test]
async fn versions_report_readiness() {
    let (_, app) = app();
    let (status, v) = call(&app, Method::GET, "/versions", None).await;
    assert_eq!(status, StatusCode::OK);
    let list: Vec<VersionInfo> = serde_json::from_value(v).unwrap();
    assert_eq!(list.len(), VersionId::ALL.len());
    for info in &list {
        assert_eq!(info.ready, !info.version.is_learned());
        assert_eq!(info.default, info.version == VersionId::V4_5);
    }
}

#[tokio::test]
async fn idle_sessions_are_evicted() {
    let (state, app) = app();
    let g = new_game(&app, json!({"p": 5, "q": 5, "n": 3})).await;
    assert_eq!(state.sessions.evict_idle(Duration::from_secs(60), Instant::now()), 0);
    let later = Instant::now() + Duration::from_secs(3600);
    assert_eq!(state.sessions.evict_idle(Duration::from_secs(60), later), 1);
    assert!(state.sessions.is_empty());
    let (status, _) = call(&app, Method::GET, &format!("/games/{}", g.session_id), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn concurrent_sessions_stay_independent() {
    let (_, app) = app();
    let mut handles = Vec::new();
    for seed in 0..8u64 {
        let app = app.clone();
        handles.push(tokio::spawn(async move {
            let g = new_game(&app, json!({"p": 9, "q": 9, "n": 10, "seed": seed, "version": "3.5"})).await;
            let base = format!("/games/{}", g.session_id);
            let mut revisions = Vec::new();
            for _ in 0..100 {
                let (status, v) = call(&app, Method::POST, &format!("{base}/solver-move"), None).await;
                if status != StatusCode::OK {
                    break;
                }
                revisions.push(v["revision"].as_u64().unwrap());
                if v["status"] != json!("inProgress") {
                    break;
                }
            }
            revisions
        }));
    }
    for h in handles {
        let revs = h.await.unwrap();
        assert!(revs.iter().enumerate().all(|(k, &r)| r == k as u64 + 1));
    }
}

use std::sync::{Arc, OnceLock};
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use domineering::strategy::Grid;
use domineering::{BoardSpec, Move, Player};
use domineering_cli::engine::Engine;
use domineering_cli::server::{router, AppState};

fn engine() -> Arc<Engine> {
    static E: OnceLock<Arc<Engine>> = OnceLock::new();
    E.get_or_init(|| Arc::new(Engine::standard().unwrap())).clone()
}

fn app(budget: Duration) -> axum::Router {
    router(Arc::new(AppState::new(engine(), None, budget).unwrap()))
}

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, v)
}

fn grid_of(rec: &Value) -> Grid {
    let spec: BoardSpec = serde_json::from_value(rec["spec"].clone()).unwrap();
    let mut g = Grid::new(spec).unwrap();
    for m in rec["moves"].as_array().unwrap() {
        g.apply(&m.as_str().unwrap().parse::<Move>().unwrap()).unwrap();
    }
    g
}

fn cells(mv: &Move) -> Value {
    json!([mv.cells[0].to_string(), mv.cells[1].to_string()])
}

#[tokio::test]
async fn queries() {
    let app = app(Duration::from_secs(5));
    let (s, v) = call(&app, "GET", "/health", None).await;
    assert_eq!((s, v["status"].as_str()), (StatusCode::OK, Some("ok")));

    let (s, v) = call(&app, "GET", "/outcome?width=2&length=31", None).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["label"], "H");

    let (s, v) = call(&app, "GET", "/atlas?max_width=4&max_length=24", None).await;
    assert_eq!(s, StatusCode::OK);
    let row4 = &v["rows"][3];
    for l in [19, 21] {
        assert_ne!(row4[l - 1]["outcomes"].as_array().map(Vec::len), Some(1), "4x{l}: {}", row4[l - 1]);
    }
    assert_eq!(row4[17]["label"], "H");

    let (s, v) = call(&app, "GET", "/derivation?width=2&length=26", None).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    let (s, _) = call(&app, "GET", "/derivation?width=30&length=90", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);

    let (s, v) = call(&app, "GET", "/value?width=2&length=3", None).await;
    assert_eq!(s, StatusCode::OK);
    assert!(v["value"].is_string());
    let (s, _) = call(&app, "GET", "/value?width=0&length=3", None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn engine_wins_a_game_and_rejects_bad_moves() {
    let app = app(Duration::from_secs(5));
    let (s, rec) = call(&app, "POST", "/sessions", Some(json!({ "spec": "rect:3x10", "engine_side": "H" }))).await;
    assert_eq!(s, StatusCode::CREATED, "{rec}");
    let id = rec["id"].as_u64().unwrap();
    assert_eq!(rec["to_move"], "V");

    // Out of turn, then an illegal cell.
    let (s, _) = call(&app, "POST", &format!("/sessions/{id}/engine-move"), None).await;
    assert_eq!(s, StatusCode::CONFLICT);
    let (s, _) = call(&app, "POST", &format!("/sessions/{id}/moves"), Some(json!({ "player": "V", "cells": ["a1", "b1"] }))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);

    let mut rec = rec;
    let mut occupied_checked = false;
    while rec["status"] == "in_progress" {
        let g = grid_of(&rec);
        let mv = g.legal_moves(Player::Vertical)[0];
        let (s, r) = call(&app, "POST", &format!("/sessions/{id}/moves"), Some(json!({ "player": "V", "cells": cells(&mv) }))).await;
        assert_eq!(s, StatusCode::OK, "{r}");
        if !occupied_checked {
            let (s, _) = call(&app, "POST", &format!("/sessions/{id}/moves"), Some(json!({ "player": "V", "cells": cells(&mv) }))).await;
            assert!(s == StatusCode::BAD_REQUEST || s == StatusCode::CONFLICT);
            occupied_checked = true;
        }
        if r["status"] != "in_progress" {
            rec = r;
            break;
        }
        let (s, r) = call(&app, "POST", &format!("/sessions/{id}/engine-move"), None).await;
        assert_eq!(s, StatusCode::OK, "{r}");
        rec = r;
    }
    assert_eq!(rec["winner"], "H", "{rec}");
    assert!(rec["transcript"].as_str().unwrap().contains("# engine H"));
    let (s, _) = call(&app, "POST", &format!("/sessions/{id}/moves"), Some(json!({ "player": "V", "cells": ["a1", "a2"] }))).await;
    assert_eq!(s, StatusCode::CONFLICT);
}

#[tokio::test]
async fn occupied_cells_are_rejected() {
    let app = app(Duration::from_secs(5));
    let (_, rec) = call(&app, "POST", "/sessions", Some(json!({ "spec": "rect:3x8", "engine_side": "H" }))).await;
    let id = rec["id"].as_u64().unwrap();
    call(&app, "POST", &format!("/sessions/{id}/moves"), Some(json!({ "player": "V", "cells": ["a1", "a2"] }))).await;
    let (s, rec) = call(&app, "POST", &format!("/sessions/{id}/engine-move"), None).await;
    assert_eq!(s, StatusCode::OK);
    let (s, v) = call(&app, "POST", &format!("/sessions/{id}/moves"), Some(json!({ "player": "V", "cells": ["a2", "a3"] }))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST, "{v} after {rec}");
}

#[tokio::test]
async fn unsupported_boards() {
    let app = app(Duration::from_secs(5));
    let (s, v) = call(&app, "POST", "/sessions", Some(json!({ "spec": "rect:6x10" }))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(v["error"].as_str().unwrap().contains('6'));
    let (s, _) = call(&app, "POST", "/sessions", Some(json!({ "spec": "rect:2x2", "engine_side": "V", "first": "H" }))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let (s, _) = call(&app, "GET", "/sessions/999", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn slow_work_gives_503() {
    let app = app(Duration::from_millis(1));
    let resp = app
        .clone()
        .oneshot(Request::get("/value?width=8&length=8").body(Body::empty()).unwrap())
        .await
        .unwrap();
    assert_eq!(resp.status(), StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(resp.headers()["retry-after"], "5");
}

#[tokio::test]
async fn sessions_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let sidecar = dir.path().join("sessions.json");
    let state = AppState::new(engine(), Some(sidecar.clone()), Duration::from_secs(5)).unwrap();
    let app = router(Arc::new(state));
    let (_, rec) = call(&app, "POST", "/sessions", Some(json!({ "spec": "rect:2x13", "engine_side": "H" }))).await;
    let id = rec["id"].as_u64().unwrap();
    call(&app, "POST", &format!("/sessions/{id}/moves"), Some(json!({ "player": "V", "cells": ["c1", "c2"] }))).await;
    let (s, before) = call(&app, "POST", &format!("/sessions/{id}/engine-move"), None).await;
    assert_eq!(s, StatusCode::OK, "{before}");
    drop(app);

    let app = router(Arc::new(AppState::new(engine(), Some(sidecar), Duration::from_secs(5)).unwrap()));
    let (s, after) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(after["moves"], before["moves"]);
    assert_eq!(after["to_move"], "V");
    let (_, fresh) = call(&app, "POST", "/sessions", Some(json!({ "spec": "rect:3x4", "engine_side": "H" }))).await;
    assert!(fresh["id"].as_u64().unwrap() > id);
}

#[tokio::test]
async fn slow_engine_move_gives_503_and_keeps_the_game() {
    let app = app(Duration::from_millis(20));
    let (s, rec) = call(&app, "POST", "/sessions", Some(json!({ "spec": "rect:2x31", "engine_side": "H" }))).await;
    assert_eq!(s, StatusCode::CREATED, "{rec}");
    let id = rec["id"].as_u64().unwrap();
    call(&app, "POST", &format!("/sessions/{id}/moves"), Some(json!({ "player": "V", "cells": ["p1", "p2"] }))).await;
    let (s, _) = call(&app, "POST", &format!("/sessions/{id}/engine-move"), None).await;
    assert_eq!(s, StatusCode::SERVICE_UNAVAILABLE);
    let (_, rec) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(rec["to_move"], "H");
    assert_eq!(rec["moves"].as_array().unwrap().len(), 1);
}

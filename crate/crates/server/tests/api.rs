use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use bidsolve_core::dag_solver::{best_move, solve_game, turn_at, SolveOptions};
use bidsolve_core::game_graph::GameSelector;
use bidsolve_core::{ChipState, GameGraph, Player, Table};
use bidsolve_server::{router, AppState, ServerConfig};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app() -> Router {
    router(AppState::new(ServerConfig::default()))
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, value)
}

async fn create(app: &Router, game: &str, total: u32, human: &str, seed: u64) -> (String, Value) {
    let (status, v) = call(
        app,
        Method::POST,
        "/v1/games",
        Some(json!({"game": game, "chips_total": total, "human_player": human, "seed": seed})),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    (v["session_id"].as_str().unwrap().to_string(), v["state"].clone())
}

fn chips(state: &Value) -> (u64, u64) {
    (state["chips"]["A"].as_u64().unwrap(), state["chips"]["B"].as_u64().unwrap())
}

#[tokio::test]
async fn create_splits_chips_evenly() {
    let app = app();
    let (id, state) = create(&app, "ttt", 8, "A", 1).await;
    assert_eq!(chips(&state), (4, 4));
    assert_eq!(state["phase"], "awaiting_bid");
    assert_eq!(state["vertex"]["board"], json!(["", "", "", "", "", "", "", "", ""]));
    let (_, odd) = create(&app, "race:2,2", 7, "B", 1).await;
    assert_eq!(chips(&odd), (4, 3));
    let (other, _) = create(&app, "ttt", 8, "A", 1).await;
    assert_ne!(id, other);
}

#[tokio::test]
async fn bad_requests() {
    let app = app();
    let post = |body: Value| call(&app, Method::POST, "/v1/games", Some(body));
    assert_eq!(post(json!({"game": "chess", "chips_total": 4, "human_player": "A"})).await.0, StatusCode::BAD_REQUEST);
    assert_eq!(
        post(json!({"game": "file:/etc/passwd", "chips_total": 4, "human_player": "A"})).await.0,
        StatusCode::BAD_REQUEST
    );
    assert_eq!(post(json!({"game": "ttt"})).await.0, StatusCode::BAD_REQUEST);
    assert_eq!(
        post(json!({"game": "race:100000,100000", "chips_total": 4, "human_player": "A"})).await.0,
        StatusCode::INSUFFICIENT_STORAGE
    );
    for uri in ["/v1/games/nope", "/v1/games/nope/hint"] {
        assert_eq!(call(&app, Method::GET, uri, None).await.0, StatusCode::NOT_FOUND);
    }
    let (status, v) = call(&app, Method::POST, "/v1/games/nope/bids", Some(json!({"bid": 0}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(v["error"]["code"], "unknown_session");
}

#[tokio::test]
async fn size_cap_is_507() {
    let app = router(AppState::new(ServerConfig {
        max_entries: 1000,
        ..ServerConfig::default()
    }));
    let (status, v) = call(
        &app,
        Method::POST,
        "/v1/games",
        Some(json!({"game": "ttt", "chips_total": 200, "human_player": "A"})),
    )
    .await;
    assert_eq!(status, StatusCode::INSUFFICIENT_STORAGE);
    assert_eq!(v["error"]["code"], "table_too_large");
}

#[tokio::test]
async fn zero_chips_forces_zero_bids() {
    let app = app();
    let (id, _) = create(&app, "race:1,1", 0, "B", 3).await;
    let uri = format!("/v1/games/{id}/bids");
    let (status, _) = call(&app, Method::POST, &uri, Some(json!({"bid": 1}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, v) = call(&app, Method::POST, &uri, Some(json!({"bid": 0}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["reveal"]["engine_bid"], 0);
    assert_eq!(v["reveal"]["winner"], "A");
    assert_eq!(v["reveal"]["by_advantage"], true);
    assert_eq!(v["state"]["phase"], "finished");
    assert_eq!(v["state"]["winner"], "A");
    assert_eq!(call(&app, Method::POST, &uri, Some(json!({"bid": 0}))).await.0, StatusCode::CONFLICT);
}

#[tokio::test]
async fn phase_and_range_errors() {
    let app = app();
    let (id, _) = create(&app, "race:2,2", 6, "A", 3).await;
    let moves = format!("/v1/games/{id}/moves");
    let bids = format!("/v1/games/{id}/bids");
    assert_eq!(call(&app, Method::POST, &moves, Some(json!({"designate": "A"}))).await.0, StatusCode::CONFLICT);
    for bid in [-1, 4] {
        assert_eq!(
            call(&app, Method::POST, &bids, Some(json!({"bid": bid}))).await.0,
            StatusCode::UNPROCESSABLE_ENTITY
        );
    }
    // All-in with the tie-break always wins the bid.
    let (_, v) = call(&app, Method::POST, &bids, Some(json!({"bid": 3}))).await;
    assert_eq!(v["reveal"]["winner"], "A");
    assert_eq!(v["state"]["phase"], "awaiting_human_move");
    assert_eq!(v["state"]["legal"]["designations"], json!(["A", "B"]));
    assert_eq!(call(&app, Method::POST, &bids, Some(json!({"bid": 0}))).await.0, StatusCode::CONFLICT);
    assert_eq!(call(&app, Method::GET, &format!("/v1/games/{id}/hint"), None).await.0, StatusCode::CONFLICT);
    for body in [
        json!({"designate": "A", "move": "2,2"}),
        json!({"designate": "A"}),
        json!({"designate": "B", "move": "2,1"}),
        json!({}),
    ] {
        assert_eq!(
            call(&app, Method::POST, &moves, Some(body.clone())).await.0,
            StatusCode::UNPROCESSABLE_ENTITY,
            "{body}"
        );
    }
    let (status, v) = call(&app, Method::POST, &moves, Some(json!({"designate": "A", "move": "1,2"}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["state"]["vertex"]["name"], "1,2");
    assert_eq!(v["state"]["phase"], "awaiting_bid");
}

#[tokio::test]
async fn bids_exchange_chips_both_ways() {
    let app = app();
    let (id, _) = create(&app, "ttt", 20, "B", 11).await;
    let (_, v) = call(&app, Method::POST, &format!("/v1/games/{id}/bids"), Some(json!({"bid": 4}))).await;
    let r = &v["reveal"];
    let (h, e) = (r["human_bid"].as_u64().unwrap(), r["engine_bid"].as_u64().unwrap());
    let (a, b) = r["bid_a"].as_u64().zip(r["bid_b"].as_u64()).unwrap();
    assert_eq!((a, b), (e, h));
    let after = &v["state"]["history"][0]["chips_after"];
    assert_eq!(after["b"].as_u64().unwrap(), 10 - h + e);
    assert_eq!(after["a"].as_u64().unwrap(), 10 - e + h);
    assert_eq!(r["net_transfer"].as_u64().unwrap(), h.abs_diff(e));
}

#[tokio::test]
async fn hint_is_a_distribution() {
    let app = app();
    // Odd total: A holds the extra chip and the advantage.
    let (id, _) = create(&app, "ttt", 9, "A", 5).await;
    let (status, v) = call(&app, Method::GET, &format!("/v1/games/{id}/hint"), None).await;
    assert_eq!(status, StatusCode::OK);
    let s: Vec<f64> = serde_json::from_value(v["strategy"].clone()).unwrap();
    assert_eq!(s.len(), 6);
    assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    assert!(s[0] > 0.0);
    let support: Vec<usize> = (0..s.len()).filter(|&i| s[i] > 0.0).collect();
    assert_eq!(support, (0..support.len()).collect::<Vec<_>>());
    assert!(v["value"].as_f64().unwrap() > 0.0);
}

#[tokio::test]
async fn cors_preflight() {
    let app = app();
    let req = Request::builder()
        .method(Method::OPTIONS)
        .uri("/v1/games")
        .header("origin", "http://localhost:5173")
        .header("access-control-request-method", "POST")
        .body(Body::empty())
        .unwrap();
    let resp = app.oneshot(req).await.unwrap();
    assert_eq!(resp.headers()["access-control-allow-origin"], "*");
}

struct Check {
    graph: GameGraph,
    table: Table,
}

impl Check {
    fn new(game: &str, total: u32) -> Self {
        let graph = game.parse::<GameSelector>().unwrap().build().unwrap();
        let table = solve_game(&graph, total, &SolveOptions::default()).unwrap();
        Check { graph, table }
    }

    fn chips(state: &Value) -> ChipState {
        let (a, b) = chips(state);
        ChipState::new(a as u32, b as u32)
    }
}

/// Plays to the end with a fixed human policy, checking the engine along
/// the way. Returns every response.
async fn scripted_game(app: &Router, check: &Check, seed: u64) -> Vec<Value> {
    let (id, mut state) = create(app, "ttt", 12, "A", seed).await;
    let total = 12;
    let mut log = vec![state.clone()];
    let mut forced = 0;
    let mut wins = 0;
    for round in 0.. {
        assert!(round < 40, "game did not finish");
        match state["phase"].as_str().unwrap() {
            "finished" => break,
            "awaiting_bid" => {
                let before = Check::chips(&state);
                let v_id = check.graph.id(state["vertex"]["name"].as_str().unwrap()).unwrap();
                let bid = (before.a / 2 + round as u32 % 2).min(before.a);
                let (status, v) = call(app, Method::POST, &format!("/v1/games/{id}/bids"), Some(json!({"bid": bid}))).await;
                assert_eq!(status, StatusCode::OK, "{v}");
                let engine_bid = v["reveal"]["engine_bid"].as_u64().unwrap() as usize;
                let turn = turn_at(&check.graph, &check.table, v_id, before).unwrap();
                assert!(turn.strategy_b.get(engine_bid) > 0.0, "engine bid {engine_bid} outside support");
                if let Some(outcome) = v["outcome"].as_object() {
                    let mover: Player = serde_json::from_value(outcome["mover"].clone()).unwrap();
                    let after = last_bid_chips(&v["state"]);
                    let expected = best_move(&check.graph, &check.table, v_id, after, mover).unwrap();
                    assert_eq!(outcome["to"], check.graph.name(expected));
                }
                state = v["state"].clone();
            }
            "awaiting_human_move" => {
                wins += 1;
                let legal = &state["legal"];
                let may_force = legal["designations"].as_array().unwrap().contains(&json!("B"));
                let engine_moves = legal["moves"].as_array().unwrap().is_empty() || (may_force && wins % 2 == 1);
                let body = if engine_moves {
                    json!({"designate": "B"})
                } else {
                    json!({"designate": "A", "move": legal["moves"][0]["vertex"]})
                };
                let (status, v) = call(app, Method::POST, &format!("/v1/games/{id}/moves"), Some(body)).await;
                assert_eq!(status, StatusCode::OK, "{v}");
                if engine_moves {
                    let v_id = check.graph.id(state["vertex"]["name"].as_str().unwrap()).unwrap();
                    let expected = best_move(&check.graph, &check.table, v_id, Check::chips(&state), Player::B).unwrap();
                    assert_eq!(v["outcome"]["to"], check.graph.name(expected));
                    forced += 1;
                }
                state = v["state"].clone();
            }
            other => panic!("unexpected phase {other}"),
        }
        let c = Check::chips(&state);
        assert_eq!(c.total(), total);
        log.push(state.clone());
    }
    assert!(state["winner"].is_string());
    assert!(forced > 0, "the engine never had to move on request");
    log
}

fn last_bid_chips(state: &Value) -> ChipState {
    let bid = state["history"]
        .as_array()
        .unwrap()
        .iter()
        .rev()
        .find(|e| e["kind"] == "bid")
        .unwrap();
    serde_json::from_value(bid["chips_after"].clone()).unwrap()
}

#[tokio::test]
async fn replay_is_deterministic_and_engine_follows_the_table() {
    let check = Check::new("ttt", 12);
    let first = scripted_game(&app(), &check, 2024).await;
    let second = scripted_game(&app(), &check, 2024).await;
    let strip = |log: &[Value]| -> Vec<Value> {
        log.iter()
            .map(|s| {
                let mut s = s.clone();
                s.as_object_mut().unwrap().remove("session_id");
                s
            })
            .collect()
    };
    assert_eq!(strip(&first), strip(&second));
}

#[tokio::test]
async fn snapshots_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let config = ServerConfig {
        snapshot_dir: Some(dir.path().to_path_buf()),
        ..ServerConfig::default()
    };
    let app = router(AppState::new(config.clone()));
    let (id, _) = create(&app, "race:2,2", 6, "B", 9).await;
    let (_, v) = call(&app, Method::POST, &format!("/v1/games/{id}/bids"), Some(json!({"bid": 2}))).await;

    let state = AppState::new(config);
    assert_eq!(state.restore_snapshots().unwrap(), 1);
    let (status, back) = call(&router(state), Method::GET, &format!("/v1/games/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(back, v["state"]);
}

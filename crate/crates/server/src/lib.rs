//! HTTP play service: a human bids and moves against the equilibrium engine.
//!
//! Routes (all JSON, under `/v1`):
//!
//! - `POST /games` `{game, chips_total, human_player, seed?}`
//! - `GET /games/{id}`
//! - `POST /games/{id}/bids` `{bid}`
//! - `POST /games/{id}/moves` `{designate?, move?}`
//! - `GET /games/{id}/hint`
//!
//! Sessions live in memory. With a snapshot directory every mutation also
//! writes `<dir>/<id>.json`, and [`AppState::restore_snapshots`] reloads them.

mod error;
pub mod session;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path as UrlPath, State};
use axum::http::{HeaderValue, Method, StatusCode};
use axum::routing::{get, post};
use axum::{Json, Router};
use bidsolve_core::dag_solver::{solve_game, DagError, SolveOptions, DEFAULT_MAX_ENTRIES};
use bidsolve_core::game_graph::GameSelector;
use bidsolve_core::table_io::{load_table, solve_cached};
use bidsolve_core::{GameGraph, Player, Table};
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::{Mutex, OnceCell};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

pub use error::ApiError;
pub use session::{Phase, Session};

#[derive(Clone, Debug)]
pub struct ServerConfig {
    /// Tables larger than this many (vertex, split) cells are refused with 507.
    pub max_entries: usize,
    pub x: Option<f64>,
    pub snapshot_dir: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    /// `None` allows any origin.
    pub cors_origin: Option<String>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            max_entries: DEFAULT_MAX_ENTRIES,
            x: None,
            snapshot_dir: None,
            cache_dir: None,
            cors_origin: None,
        }
    }
}

/// A game graph with its solved table.
pub struct Engine {
    pub graph: GameGraph,
    pub table: Table,
}

type EngineSlot = Arc<OnceCell<Arc<Engine>>>;

struct Shared {
    config: ServerConfig,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    engines: std::sync::Mutex<HashMap<(String, u32), EngineSlot>>,
}

#[derive(Clone)]
pub struct AppState(Arc<Shared>);

fn allowed_game(game: &str) -> Result<GameSelector, ApiError> {
    let sel: GameSelector = game
        .parse()
        .map_err(|e: bidsolve_core::game_graph::GraphError| ApiError::bad_request("unknown_game", e.to_string()))?;
    if matches!(sel, GameSelector::File(_)) {
        return Err(ApiError::bad_request("unknown_game", "file games are not served"));
    }
    Ok(sel)
}

impl AppState {
    pub fn new(config: ServerConfig) -> Self {
        AppState(Arc::new(Shared {
            config,
            sessions: RwLock::new(HashMap::new()),
            engines: std::sync::Mutex::new(HashMap::new()),
        }))
    }

    pub fn config(&self) -> &ServerConfig {
        &self.0.config
    }

    fn slot(&self, game: &GameSelector, total: u32) -> EngineSlot {
        let mut engines = self.0.engines.lock().expect("engine map poisoned");
        engines.entry((game.to_string(), total)).or_default().clone()
    }

    /// Registers a precomputed table, which must belong to `game`.
    pub fn preload(&self, game: &GameSelector, path: &Path) -> Result<(), ApiError> {
        let graph = game.build().map_err(|e| ApiError::bad_request("unknown_game", e.to_string()))?;
        let table: Table = load_table(path, Some(graph.hash()))?;
        let slot = self.slot(game, table.total);
        slot.set(Arc::new(Engine { graph, table }))
            .map_err(|_| ApiError::internal("table already loaded"))
    }

    /// The engine for `game` at `total` chips, solving it on first use.
    pub async fn engine(&self, game: &GameSelector, total: u32) -> Result<Arc<Engine>, ApiError> {
        if let GameSelector::Race(k, m) = game {
            // Refuse before building the graph.
            let entries = (*k as usize).saturating_mul(*m as usize).saturating_add(2).saturating_mul(total as usize + 1);
            if entries > self.0.config.max_entries {
                return Err(DagError::GraphTooLarge {
                    entries,
                    cap: self.0.config.max_entries,
                }
                .into());
            }
        }
        let slot = self.slot(game, total);
        let config = self.0.config.clone();
        let game = game.clone();
        slot.get_or_try_init(|| async move {
            let built = tokio::task::spawn_blocking(move || -> Result<Engine, ApiError> {
                let graph = game.build().map_err(|e| ApiError::bad_request("unknown_game", e.to_string()))?;
                let opts = SolveOptions {
                    x: config.x,
                    store_strategies: false,
                    max_entries: config.max_entries,
                };
                let table = match &config.cache_dir {
                    Some(dir) => solve_cached(&graph, total, &opts, dir)?,
                    None => solve_game(&graph, total, &opts)?,
                };
                Ok(Engine { graph, table })
            })
            .await
            .map_err(|e| ApiError::internal(e.to_string()))??;
            Ok(Arc::new(built))
        })
        .await
        .cloned()
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.0
            .sessions
            .read()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }

    fn insert(&self, s: Session) -> Arc<Mutex<Session>> {
        let id = s.id.clone();
        let cell = Arc::new(Mutex::new(s));
        self.0.sessions.write().expect("session map poisoned").insert(id, cell.clone());
        cell
    }

    fn snapshot(&self, s: &Session) -> Result<(), ApiError> {
        let Some(dir) = &self.0.config.snapshot_dir else {
            return Ok(());
        };
        let io = |e: std::io::Error| ApiError::internal(format!("snapshot: {e}"));
        std::fs::create_dir_all(dir).map_err(io)?;
        let tmp = dir.join(format!("{}.json.tmp", s.id));
        std::fs::write(&tmp, serde_json::to_vec(s).expect("session serializes")).map_err(io)?;
        std::fs::rename(&tmp, dir.join(format!("{}.json", s.id))).map_err(io)
    }

    /// Reloads every snapshot in the snapshot directory; returns how many.
    pub fn restore_snapshots(&self) -> std::io::Result<usize> {
        let Some(dir) = &self.0.config.snapshot_dir else {
            return Ok(0);
        };
        if !dir.exists() {
            return Ok(0);
        }
        let mut n = 0;
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "json") {
                let text = std::fs::read_to_string(&path)?;
                if let Ok(s) = serde_json::from_str::<Session>(&text) {
                    self.insert(s);
                    n += 1;
                }
            }
        }
        Ok(n)
    }
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload
        .map(|Json(t)| t)
        .map_err(|e| ApiError::bad_request("bad_request", e.body_text()))
}

#[derive(Deserialize)]
struct CreateGame {
    game: String,
    chips_total: u32,
    #[serde(alias = "human")]
    human_player: Player,
    seed: Option<u64>,
}

async fn create_game(
    State(app): State<AppState>,
    payload: Result<Json<CreateGame>, JsonRejection>,
) -> Result<(StatusCode, Json<Value>), ApiError> {
    let req = body(payload)?;
    let game = allowed_game(&req.game)?;
    let engine = app.engine(&game, req.chips_total).await?;
    let id = uuid::Uuid::new_v4().simple().to_string();
    let seed = req.seed.unwrap_or_else(rand::random);
    let s = Session::new(id.clone(), &game, &engine.graph, req.chips_total, req.human_player, seed);
    app.snapshot(&s)?;
    let state = s.view(&engine.graph);
    app.insert(s);
    Ok((StatusCode::CREATED, Json(json!({ "session_id": id, "state": state }))))
}

async fn locked(app: &AppState, id: &str) -> Result<(Arc<Mutex<Session>>, Arc<Engine>), ApiError> {
    let cell = app.session(id)?;
    let (game, total) = {
        let s = cell.lock().await;
        (allowed_game(&s.game)?, s.chips_total)
    };
    Ok((cell, app.engine(&game, total).await?))
}

async fn get_game(State(app): State<AppState>, UrlPath(id): UrlPath<String>) -> Result<Json<Value>, ApiError> {
    let (cell, engine) = locked(&app, &id).await?;
    let s = cell.lock().await;
    Ok(Json(json!(s.view(&engine.graph))))
}

#[derive(Deserialize)]
struct BidRequest {
    bid: i64,
}

async fn post_bid(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
    payload: Result<Json<BidRequest>, JsonRejection>,
) -> Result<Json<Value>, ApiError> {
    let (cell, engine) = locked(&app, &id).await?;
    let req = body(payload)?;
    let mut s = cell.lock().await;
    let mut next = s.clone();
    let (reveal, outcome) = next.bid(&engine.graph, &engine.table, req.bid)?;
    app.snapshot(&next)?;
    *s = next;
    Ok(Json(json!({
        "reveal": reveal,
        "outcome": outcome,
        "state": s.view(&engine.graph),
    })))
}

#[derive(Deserialize)]
struct MoveRequest {
    designate: Option<Player>,
    #[serde(rename = "move")]
    target: Option<String>,
}

async fn post_move(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
    payload: Result<Json<MoveRequest>, JsonRejection>,
) -> Result<Json<Value>, ApiError> {
    let (cell, engine) = locked(&app, &id).await?;
    let req = body(payload)?;
    let mut s = cell.lock().await;
    let mut next = s.clone();
    let outcome = next.play(&engine.graph, &engine.table, req.designate, req.target.as_deref())?;
    app.snapshot(&next)?;
    *s = next;
    Ok(Json(json!({ "outcome": outcome, "state": s.view(&engine.graph) })))
}

async fn get_hint(State(app): State<AppState>, UrlPath(id): UrlPath<String>) -> Result<Json<Value>, ApiError> {
    let (cell, engine) = locked(&app, &id).await?;
    let s = cell.lock().await;
    Ok(Json(json!(s.hint(&engine.graph, &engine.table)?)))
}

fn cors(origin: Option<&str>) -> CorsLayer {
    let layer = CorsLayer::new()
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([axum::http::header::CONTENT_TYPE]);
    match origin.and_then(|o| HeaderValue::from_str(o).ok()) {
        Some(o) => layer.allow_origin(AllowOrigin::exact(o)),
        None => layer.allow_origin(Any),
    }
}

pub fn router(app: AppState) -> Router {
    let origin = app.config().cors_origin.clone();
    let v1 = Router::new()
        .route("/games", post(create_game))
        .route("/games/{id}", get(get_game))
        .route("/games/{id}/bids", post(post_bid))
        .route("/games/{id}/moves", post(post_move))
        .route("/games/{id}/hint", get(get_hint));
    Router::new()
        .nest("/v1", v1)
        .layer(cors(origin.as_deref()))
        .with_state(app)
}

/// Serves until ctrl-c.
pub async fn serve(app: AppState, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(app))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

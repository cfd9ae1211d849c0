//! HTTP service for playing 1-backtracking games against realizer-derived
//! Eloise strategies.
//!
//! ```text
//! POST /sessions                 create a session
//! GET  /sessions/{id}            session view; ?cursor=&limit= page quantifier moves
//! POST /sessions/{id}/moves      an Abelard move: {"move": 4} or {"move": "left"}
//! POST /sessions/{id}/resign     Abelard resigns
//! GET  /sessions/{id}/events     server-sent events, replayed from the start
//! GET  /sessions/{id}/transcript move records of the session
//! GET  /schema                   JSON schema of every message
//! ```

use std::collections::HashMap;
use std::convert::Infallible;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::sse::{Event as SseEvent, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream, StreamExt};
use serde::{Deserialize, Serialize};
use tokio::sync::broadcast;

use lbr_core::corpus::DOCUMENTS;
use lbr_core::games::{atom_value, BMove, Game, GameError, Move, Player, Record, RealizerStrategy, Turn};
use lbr_core::kernel::{typecheck, Ctx, DEFAULT_FUEL};
use lbr_core::logic::{Document, Formula, Overrides};
use lbr_core::realizer::realizer_type;
use lbr_core::states::{Atom, KnowledgeState};

use crate::load;

/// The JSON schema every response validates against.
pub const SCHEMA: &str = include_str!("../schema/messages.json");

/// Moves a session may take before Eloise is considered stuck.
const MAX_MOVES: usize = 10_000;
const DEFAULT_PAGE: u64 = 16;
const MAX_PAGE: u64 = 1000;

#[derive(Debug)]
pub enum ApiError {
    BadRequest(String),
    NotFound(String),
    Internal(String),
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (code, msg) = match &self {
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, m),
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, m),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, m),
        };
        (code, Json(ErrorBody { error: msg })).into_response()
    }
}

fn bad(e: impl std::fmt::Display) -> ApiError {
    ApiError::BadRequest(e.to_string())
}

/// A quantifier move is a numeral, a connective move a side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WireMove {
    Num(u64),
    Side(Side),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl From<Move> for WireMove {
    fn from(m: Move) -> Self {
        match m {
            Move::Num(n) => WireMove::Num(n),
            Move::Left => WireMove::Side(Side::Left),
            Move::Right => WireMove::Side(Side::Right),
        }
    }
}

impl From<WireMove> for Move {
    fn from(m: WireMove) -> Self {
        match m {
            WireMove::Num(n) => Move::Num(n),
            WireMove::Side(Side::Left) => Move::Left,
            WireMove::Side(Side::Right) => Move::Right,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "state", rename_all = "kebab-case")]
pub enum Status {
    AwaitingAbelard,
    EloiseThinking,
    Finished { winner: Player },
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EventBody {
    Move {
        player: Player,
        #[serde(rename = "move")]
        mv: WireMove,
        position: String,
    },
    /// The current play reached an atom.
    Atom { position: String, holds: bool },
    /// Atoms Eloise added to her knowledge.
    Learned { atoms: Vec<Atom> },
    Backtrack {
        player: Player,
        /// Length of the prefix the play returns to.
        to: usize,
        position: String,
    },
    Resigned { player: Player },
    Finished { winner: Player },
}

#[derive(Clone, Debug, Serialize)]
pub struct Event {
    pub seq: usize,
    #[serde(flatten)]
    pub body: EventBody,
}

impl Event {
    fn kind(&self) -> &'static str {
        match self.body {
            EventBody::Move { .. } => "move",
            EventBody::Atom { .. } => "atom",
            EventBody::Learned { .. } => "learned",
            EventBody::Backtrack { .. } => "backtrack",
            EventBody::Resigned { .. } => "resigned",
            EventBody::Finished { .. } => "finished",
        }
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct HistoryEntry {
    index: usize,
    player: Player,
    kind: &'static str,
    #[serde(rename = "move", skip_serializing_if = "Option::is_none")]
    mv: Option<WireMove>,
    #[serde(skip_serializing_if = "Option::is_none")]
    backtrack_to: Option<usize>,
    position: String,
    knowledge: Option<KnowledgeState>,
}

impl From<&Record> for HistoryEntry {
    fn from(r: &Record) -> Self {
        let (kind, mv, backtrack_to) = match r.mv {
            BMove::Extend { mv } => ("extend", Some(mv.into()), None),
            BMove::Backtrack { keep } => ("backtrack", None, Some(keep)),
        };
        HistoryEntry {
            index: r.index,
            player: r.player,
            kind,
            mv,
            backtrack_to,
            position: r.position.clone(),
            knowledge: r.knowledge.clone(),
        }
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct LegalMoves {
    moves: Vec<WireMove>,
    cursor: u64,
    /// Start of the next page, for quantifier positions.
    next_cursor: Option<u64>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SessionView {
    id: String,
    theorem: String,
    formula: String,
    realizer: String,
    position: String,
    status: Status,
    knowledge: KnowledgeState,
    backtracks: usize,
    legal_moves: LegalMoves,
    history: Vec<HistoryEntry>,
}

#[derive(Serialize)]
struct MoveResponse {
    session: SessionView,
    /// Events caused by the request, in order.
    events: Vec<Event>,
}

#[derive(Serialize)]
struct Transcript<'a> {
    formula: String,
    status: Status,
    records: &'a [Record],
}

/// One game in progress. All mutations go through `&mut self`, so the
/// session mutex serializes them.
pub struct Session {
    id: String,
    theorem: String,
    realizer: String,
    eloise: RealizerStrategy,
    game: Game,
    status: Status,
    knowledge: KnowledgeState,
    events: Vec<Event>,
    tx: broadcast::Sender<Event>,
}

impl Session {
    fn new(id: String, theorem: String, doc: &Document, a: Formula, u: &lbr_core::kernel::Term) -> Result<Session, ApiError> {
        let game = Game::new(&doc.sig, &a).map_err(bad)?;
        let (tx, _) = broadcast::channel(1024);
        let mut s = Session {
            id,
            theorem,
            realizer: u.to_string(),
            eloise: RealizerStrategy::new(&doc.sig, &a, u),
            game,
            status: Status::EloiseThinking,
            knowledge: KnowledgeState::empty(),
            events: Vec::new(),
            tx,
        };
        s.advance()?;
        Ok(s)
    }

    fn push(&mut self, body: EventBody) {
        let ev = Event { seq: self.events.len(), body };
        self.events.push(ev.clone());
        // Nobody listening is fine.
        let _ = self.tx.send(ev);
    }

    /// Events describing the last record.
    fn record_events(&mut self) -> Result<(), ApiError> {
        let r = self.game.records.last().expect("a move was just played").clone();
        if let Some(k) = &r.knowledge {
            let new: Vec<Atom> = k.atoms().filter(|a| !self.knowledge.contains(a)).collect();
            self.knowledge = k.clone();
            if !new.is_empty() {
                self.push(EventBody::Learned { atoms: new });
            }
        }
        match r.mv {
            BMove::Extend { mv } => {
                self.push(EventBody::Move { player: r.player, mv: mv.into(), position: r.position.clone() })
            }
            BMove::Backtrack { keep } => {
                self.push(EventBody::Backtrack { player: r.player, to: keep, position: r.position.clone() })
            }
        }
        let pos = self.game.play.position().map_err(internal)?;
        if let Formula::Atom(_) = pos {
            let holds = atom_value(self.game.sig(), &pos, DEFAULT_FUEL).map_err(internal)?;
            self.push(EventBody::Atom { position: r.position, holds });
        }
        Ok(())
    }

    fn finish(&mut self, winner: Player) {
        self.status = Status::Finished { winner };
        self.push(EventBody::Finished { winner });
    }

    /// Lets Eloise move until Abelard is to move or the game is over.
    fn advance(&mut self) -> Result<(), ApiError> {
        loop {
            match self.game.turn().map_err(internal)? {
                Turn::Over(w) => {
                    self.finish(w);
                    return Ok(());
                }
                Turn::Abelard => {
                    self.status = Status::AwaitingAbelard;
                    return Ok(());
                }
                Turn::Eloise if self.game.records.len() >= MAX_MOVES => {
                    return Err(ApiError::Internal(format!("no winner after {MAX_MOVES} moves")));
                }
                Turn::Eloise => {
                    self.status = Status::EloiseThinking;
                    self.game.eloise_step(&self.eloise).map_err(internal)?;
                    self.record_events()?;
                }
            }
        }
    }

    fn check_open(&self) -> Result<(), ApiError> {
        match self.status {
            Status::Finished { .. } => Err(ApiError::BadRequest(GameError::GameOver.to_string())),
            Status::EloiseThinking => Err(ApiError::BadRequest("Eloise is to move".into())),
            Status::AwaitingAbelard => Ok(()),
        }
    }

    /// Plays an Abelard move and Eloise's answers; returns the new events.
    pub fn abelard_move(&mut self, mv: Move) -> Result<Vec<Event>, ApiError> {
        self.check_open()?;
        let first = self.events.len();
        self.game.apply(Player::Abelard, BMove::Extend { mv }, None).map_err(bad)?;
        self.record_events()?;
        self.advance()?;
        Ok(self.events[first..].to_vec())
    }

    pub fn resign(&mut self) -> Result<Vec<Event>, ApiError> {
        self.check_open()?;
        let first = self.events.len();
        self.push(EventBody::Resigned { player: Player::Abelard });
        self.finish(Player::Eloise);
        Ok(self.events[first..].to_vec())
    }

    fn legal_moves(&self, cursor: u64, limit: u64) -> Result<LegalMoves, ApiError> {
        let none = LegalMoves { moves: Vec::new(), cursor, next_cursor: None };
        if self.status != Status::AwaitingAbelard {
            return Ok(none);
        }
        Ok(match self.game.play.position().map_err(internal)? {
            Formula::And(..) => LegalMoves {
                moves: vec![WireMove::Side(Side::Left), WireMove::Side(Side::Right)],
                cursor: 0,
                next_cursor: None,
            },
            Formula::Forall(..) => {
                let end = cursor.saturating_add(limit);
                LegalMoves { moves: (cursor..end).map(WireMove::Num).collect(), cursor, next_cursor: Some(end) }
            }
            _ => none,
        })
    }

    fn view(&self, cursor: u64, limit: u64) -> Result<SessionView, ApiError> {
        Ok(SessionView {
            id: self.id.clone(),
            theorem: self.theorem.clone(),
            formula: self.game.play.root.to_string(),
            realizer: self.realizer.clone(),
            position: self.game.play.position().map_err(internal)?.to_string(),
            status: self.status,
            knowledge: self.knowledge.clone(),
            backtracks: self.game.play.backtracks(),
            legal_moves: self.legal_moves(cursor, limit)?,
            history: self.game.records.iter().map(HistoryEntry::from).collect(),
        })
    }
}

fn internal(e: impl std::fmt::Display) -> ApiError {
    ApiError::Internal(e.to_string())
}

/// Body of `POST /sessions`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    /// A bundled document: `em1`, `minimum` or `coquand`.
    pub corpus: Option<String>,
    /// Document text, instead of `corpus`.
    pub source: Option<String>,
    /// Theorem to play; defaults to the document's last theorem.
    pub theorem: Option<String>,
    /// Table replacements, e.g. `{"f": [3, 2, 1, 0]}`.
    #[serde(default)]
    pub tables: Overrides,
    /// A formula to play with `realizer` as Eloise, read in the
    /// document's signature.
    pub formula: Option<String>,
    pub realizer: Option<String>,
}

#[derive(Default)]
pub struct AppState {
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    next: AtomicU64,
}

type Shared = Arc<AppState>;

impl AppState {
    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .expect("session table")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(format!("no session `{id}`")))
    }

    fn create(&self, req: CreateSession) -> Result<Arc<Mutex<Session>>, ApiError> {
        let src = match (&req.corpus, &req.source) {
            (Some(name), None) => DOCUMENTS
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, s)| s.to_string())
                .ok_or_else(|| bad(format!("no bundled document `{name}`")))?,
            (None, Some(s)) => s.clone(),
            (None, None) if req.formula.is_some() => String::new(),
            _ => return Err(bad("give exactly one of `corpus` and `source`")),
        };
        let doc = load::document(&src, &req.tables).map_err(bad)?;
        let (theorem, a, u) = match (&req.formula, &req.realizer) {
            (Some(f), Some(r)) => {
                let a = doc.parse_formula(f).map_err(bad)?;
                let u = doc.parse_term(r).map_err(bad)?;
                let ty = typecheck(&u, &Ctx::new(), &doc.sig).map_err(bad)?;
                let want = realizer_type(&a);
                if ty != want {
                    return Err(bad(format!("the realizer has type {ty}, the formula needs {want}")));
                }
                ("custom".to_string(), a, u)
            }
            (None, None) => {
                let l = load::theorem(doc.clone(), req.theorem.as_deref()).map_err(bad)?;
                (l.name, l.checked.conclusion, l.checked.realizer)
            }
            _ => return Err(bad("`formula` and `realizer` go together")),
        };
        let id = format!("s{}", self.next.fetch_add(1, Ordering::Relaxed) + 1);
        let s = Arc::new(Mutex::new(Session::new(id.clone(), theorem, &doc, a, &u)?));
        self.sessions.write().expect("session table").insert(id, s.clone());
        Ok(s)
    }
}

#[derive(Debug, Deserialize)]
struct Page {
    cursor: Option<u64>,
    limit: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MoveRequest {
    #[serde(rename = "move")]
    mv: WireMove,
}

fn lock(s: &Mutex<Session>) -> std::sync::MutexGuard<'_, Session> {
    s.lock().unwrap_or_else(|e| e.into_inner())
}

/// Runs session work off the async threads.
async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f).await.map_err(internal)?
}

async fn create_session(State(app): State<Shared>, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateSession = serde_json::from_slice(&body).map_err(bad)?;
    let view = blocking(move || {
        let s = app.create(req)?;
        let s = lock(&s);
        s.view(0, DEFAULT_PAGE)
    })
    .await?;
    Ok((StatusCode::CREATED, Json(view)).into_response())
}

async fn get_session(
    State(app): State<Shared>,
    Path(id): Path<String>,
    Query(page): Query<Page>,
) -> Result<Response, ApiError> {
    let s = app.get(&id)?;
    let view = lock(&s).view(page.cursor.unwrap_or(0), page.limit.unwrap_or(DEFAULT_PAGE).min(MAX_PAGE))?;
    Ok(Json(view).into_response())
}

async fn post_move(State(app): State<Shared>, Path(id): Path<String>, body: Bytes) -> Result<Response, ApiError> {
    let s = app.get(&id)?;
    let req: MoveRequest = serde_json::from_slice(&body).map_err(bad)?;
    let resp = blocking(move || {
        let mut s = lock(&s);
        let events = s.abelard_move(req.mv.into())?;
        Ok(MoveResponse { session: s.view(0, DEFAULT_PAGE)?, events })
    })
    .await?;
    Ok(Json(resp).into_response())
}

async fn resign(State(app): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let s = app.get(&id)?;
    let mut s = lock(&s);
    let events = s.resign()?;
    Ok(Json(MoveResponse { session: s.view(0, DEFAULT_PAGE)?, events }).into_response())
}

async fn transcript(State(app): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let s = app.get(&id)?;
    let s = lock(&s);
    let t = Transcript { formula: s.game.play.root.to_string(), status: s.status, records: &s.game.records };
    Ok(Json(t).into_response())
}

fn sse_event(e: &Event) -> SseEvent {
    SseEvent::default()
        .id(e.seq.to_string())
        .event(e.kind())
        .json_data(e)
        .expect("events serialize")
}

/// Past events followed by live ones; the stream ends with the game.
async fn events(
    State(app): State<Shared>,
    Path(id): Path<String>,
) -> Result<Sse<impl Stream<Item = Result<SseEvent, Infallible>>>, ApiError> {
    let s = app.get(&id)?;
    let (past, rx) = {
        let s = lock(&s);
        let done = matches!(s.status, Status::Finished { .. });
        (s.events.clone(), (!done).then(|| s.tx.subscribe()))
    };
    let live = stream::unfold(rx, |rx| async move {
        let mut rx = rx?;
        loop {
            match rx.recv().await {
                Ok(e) => {
                    let next = (!matches!(e.body, EventBody::Finished { .. })).then_some(rx);
                    return Some((e, next));
                }
                Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => return None,
            }
        }
    });
    let all = stream::iter(past).chain(live).map(|e| Ok(sse_event(&e)));
    Ok(Sse::new(all).keep_alive(KeepAlive::default()))
}

async fn schema() -> Response {
    ([(header::CONTENT_TYPE, "application/schema+json")], SCHEMA).into_response()
}

pub fn router() -> Router {
    router_with(Arc::default())
}

pub fn router_with(app: Shared) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/moves", post(post_move))
        .route("/sessions/{id}/resign", post(resign))
        .route("/sessions/{id}/events", get(events))
        .route("/sessions/{id}/transcript", get(transcript))
        .route("/schema", get(schema))
        .with_state(app)
}

pub async fn serve(port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router()).await
}

//! HTTP service over one session. Readers share the session; `assert` and
//! `retract` take it exclusively, one at a time.
//!
//! | route              | body                  | success                    |
//! |--------------------|-----------------------|----------------------------|
//! | `POST /complete`   | `{"prefix": ...}`     | 200 completion set         |
//! | `POST /parse`      | `{"sentence": ...}`   | 200 parse summary          |
//! | `POST /assert`     | `{"sentence": ...}`   | 200 accepted, 409 rejected |
//! | `POST /retract`    | `{"sentence": ...}`   | 200 consistency report     |
//! | `POST /ask`        | `{"question": ...}`   | 200 answer set             |
//! | `GET /check`       |                       | 200 check report           |
//! | `GET /statements`  |                       | 200 statement listing      |
//! | `GET /health`      |                       | 200                        |
//!
//! Failures carry an [`ErrorBody`]: 400 for malformed requests and
//! sentences of the wrong kind, 404 for retracting something absent, 409
//! for inconsistency, 422 for sentences outside the language.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use cnldoc::cnl::{CnlError, CompletionSet};
use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use crate::session::{AddOutcome, Session, SentenceError};

#[derive(Clone)]
pub struct AppState {
    session: Arc<RwLock<Session>>,
    /// Write the kb file after every accepted change.
    persist: bool,
}

impl AppState {
    pub fn new(session: Session, persist: bool) -> AppState {
        AppState { session: Arc::new(RwLock::new(session)), persist }
    }

    pub fn session(&self) -> &Arc<RwLock<Session>> {
        &self.session
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
    /// Index of the offending token.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub position: Option<usize>,
    /// What may stand at `position` instead.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub completions: Option<CompletionSet>,
}

impl ErrorBody {
    fn plain(error: &str, message: impl Into<String>) -> ErrorBody {
        ErrorBody { error: error.into(), message: message.into(), position: None, completions: None }
    }

    pub fn from_sentence_error(session: &Session, text: &str, error: &SentenceError) -> ErrorBody {
        let message = error.to_string();
        match error {
            SentenceError::Syntax(e) => {
                let (kind, position, completions) = match e {
                    CnlError::UnknownWord { span, position, .. } => {
                        let before: String = text.chars().take(span.start).collect();
                        ("unknown-word", Some(*position), session.cnl().complete_text(&before).ok())
                    }
                    CnlError::Syntax { position, expected, .. } => ("syntax", Some(*position), Some(expected.clone())),
                    CnlError::DeadPrefix { position } => ("syntax", Some(*position), None),
                    CnlError::Ambiguous { .. } => ("ambiguous", None, None),
                };
                ErrorBody { error: kind.into(), message, position, completions }
            }
            SentenceError::Translation(_) => ErrorBody::plain("untranslatable", message),
            SentenceError::Question => ErrorBody::plain("question", message),
            SentenceError::NotAQuestion => ErrorBody::plain("not-a-question", message),
            SentenceError::NotPresent(_) => ErrorBody::plain("not-present", message),
            SentenceError::Inconsistent(_) => ErrorBody::plain("inconsistent", message),
        }
    }

    pub fn status(&self) -> StatusCode {
        match self.error.as_str() {
            "unknown-word" | "syntax" | "ambiguous" | "untranslatable" => StatusCode::UNPROCESSABLE_ENTITY,
            "not-present" => StatusCode::NOT_FOUND,
            "inconsistent" => StatusCode::CONFLICT,
            "internal" => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        }
    }
}

impl IntoResponse for ErrorBody {
    fn into_response(self) -> Response {
        (self.status(), Json(self)).into_response()
    }
}

#[derive(Debug, Deserialize)]
pub struct PrefixRequest {
    pub prefix: String,
}

#[derive(Debug, Deserialize)]
pub struct SentenceRequest {
    pub sentence: String,
}

#[derive(Debug, Deserialize)]
pub struct QuestionRequest {
    pub question: String,
}

type Reply = Result<Response, ErrorBody>;

fn body<T>(request: Result<Json<T>, JsonRejection>) -> Result<T, ErrorBody> {
    request.map(|Json(t)| t).map_err(|e| ErrorBody::plain("bad-request", e.body_text()))
}

fn persist(state: &AppState, session: &Session) -> Result<(), ErrorBody> {
    if state.persist {
        session.save().map_err(|e| ErrorBody::plain("internal", e.to_string()))?;
    }
    Ok(())
}

async fn complete(State(state): State<AppState>, request: Result<Json<PrefixRequest>, JsonRejection>) -> Reply {
    let prefix = body(request)?.prefix;
    let session = state.session.read();
    match session.complete(&prefix) {
        Ok(set) => Ok(Json(set).into_response()),
        Err(e) => Err(ErrorBody::from_sentence_error(&session, &prefix, &e)),
    }
}

async fn parse(State(state): State<AppState>, request: Result<Json<SentenceRequest>, JsonRejection>) -> Reply {
    let sentence = body(request)?.sentence;
    let session = state.session.read();
    match session.parse(&sentence) {
        Ok(summary) => Ok(Json(summary).into_response()),
        Err(e) => Err(ErrorBody::from_sentence_error(&session, &sentence, &e)),
    }
}

async fn assert(State(state): State<AppState>, request: Result<Json<SentenceRequest>, JsonRejection>) -> Reply {
    let sentence = body(request)?.sentence;
    let mut session = state.session.write();
    match session.add(&sentence) {
        Ok(outcome @ AddOutcome::Accepted { duplicate, .. }) => {
            if !duplicate {
                persist(&state, &session)?;
            }
            Ok(Json(outcome).into_response())
        }
        Ok(outcome @ AddOutcome::Rejected { .. }) => Ok((StatusCode::CONFLICT, Json(outcome)).into_response()),
        Err(e) => Err(ErrorBody::from_sentence_error(&session, &sentence, &e)),
    }
}

async fn retract(State(state): State<AppState>, request: Result<Json<SentenceRequest>, JsonRejection>) -> Reply {
    let sentence = body(request)?.sentence;
    let mut session = state.session.write();
    match session.remove(&sentence) {
        Ok(report) => {
            persist(&state, &session)?;
            Ok(Json(report).into_response())
        }
        Err(e) => Err(ErrorBody::from_sentence_error(&session, &sentence, &e)),
    }
}

async fn ask(State(state): State<AppState>, request: Result<Json<QuestionRequest>, JsonRejection>) -> Reply {
    let question = body(request)?.question;
    let session = state.session.read();
    match session.ask(&question) {
        Ok(answers) => Ok(Json(answers).into_response()),
        Err(e) => Err(ErrorBody::from_sentence_error(&session, &question, &e)),
    }
}

async fn check(State(state): State<AppState>) -> Response {
    Json(state.session.read().check()).into_response()
}

async fn statements(State(state): State<AppState>) -> Response {
    Json(state.session.read().statements()).into_response()
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
    statements: usize,
}

async fn health(State(state): State<AppState>) -> Response {
    Json(Health { status: "ok", statements: state.session.read().base().statements().len() }).into_response()
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/complete", post(complete))
        .route("/parse", post(parse))
        .route("/assert", post(assert))
        .route("/retract", post(retract))
        .route("/ask", post(ask))
        .route("/check", get(check))
        .route("/statements", get(statements))
        .route("/health", get(health))
        .with_state(state)
}

/// Serves on 127.0.0.1:`port` until the process is stopped.
pub fn serve(session: Session, port: u16) -> std::io::Result<()> {
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(SocketAddr::from(([127, 0, 0, 1], port))).await?;
        axum::serve(listener, router(AppState::new(session, true))).await
    })
}

//! HTTP service over an [`EventStore`].
//!
//! | method | path                                   | body / query                          |
//! |--------|----------------------------------------|---------------------------------------|
//! | POST   | `/api/devices/{id}/sync`               | hello line, optional batch line       |
//! | GET    | `/api/presses`                         | `from`, `to`, `device_id`             |
//! | GET    | `/api/observations`                    | `from`, `to`, `device_id`, `burst_gap_ms` |
//! | GET    | `/api/reports/hourly\|weekday\|daily`  | `from`, `to`, `device_id`, `burst_gap_ms` |
//! | GET    | `/api/reports/compare`                 | `a`, `b` as `first:last` day ranges   |
//! | GET    | `/api/timeline`                        | `from`, `to`, `device_id`             |
//! | GET    | `/api/annotations`                     | `from`, `to`                          |
//! | POST   | `/api/annotations`                     | one annotation object                 |
//! | GET    | `/api/config`                          |                                       |
//!
//! Ranges are half-open `[from, to)` in epoch milliseconds. Every JSON body,
//! errors included, carries `schema_version`.

mod error;
mod routes;

use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::routing::{get, post};
use axum::Router;
use obs_core::store::EventStore;
use obs_core::sync::SyncHost;
use obs_core::DatasetConfig;

pub use error::ApiError;

pub const SCHEMA_VERSION: u32 = 1;

/// Source of "now" for clock anchoring, in epoch milliseconds.
pub type Clock = Arc<dyn Fn() -> i64 + Send + Sync>;

pub fn system_clock() -> Clock {
    Arc::new(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_millis() as i64)
    })
}

/// A clock stuck at `t_ms`.
pub fn fixed_clock(t_ms: i64) -> Clock {
    Arc::new(move || t_ms)
}

struct Inner {
    store: EventStore,
    host: SyncHost,
    config: DatasetConfig,
}

/// Shared service state. All writes go through one lock.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Mutex<Inner>>,
    clock: Clock,
}

impl AppState {
    pub fn new(store: EventStore, config: DatasetConfig, clock: Clock) -> Self {
        Self {
            inner: Arc::new(Mutex::new(Inner {
                store,
                host: SyncHost::new(),
                config,
            })),
            clock,
        }
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        self.inner
            .lock()
            .unwrap_or_else(|poisoned| poisoned.into_inner())
    }

    fn now(&self) -> i64 {
        (self.clock)()
    }

    /// Runs `f` against the store, e.g. to export after a test transcript.
    pub fn with_store<R>(&self, f: impl FnOnce(&EventStore) -> R) -> R {
        f(&self.lock().store)
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/devices/{id}/sync", post(routes::sync))
        .route("/api/presses", get(routes::presses))
        .route("/api/observations", get(routes::observations))
        .route("/api/reports/hourly", get(routes::hourly_report))
        .route("/api/reports/weekday", get(routes::weekday_report))
        .route("/api/reports/daily", get(routes::daily_report))
        .route("/api/reports/compare", get(routes::compare_report))
        .route("/api/timeline", get(routes::timeline))
        .route(
            "/api/annotations",
            get(routes::list_annotations).post(routes::create_annotation),
        )
        .route("/api/config", get(routes::config))
        .fallback(routes::not_found)
        .with_state(state)
}

/// Serves until ctrl-c.
pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    tracing::info!(addr = ?listener.local_addr().ok(), "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

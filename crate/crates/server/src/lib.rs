//! HTTP/JSON query service over one immutable, pre-loaded cohort, plus
//! server-side SVG export of every view.
//!
//! Every endpoint is read-only. Errors are JSON bodies `{"code", "message"}`
//! whose codes follow the model and engine error names.

mod error;
mod routes;
mod state;
pub mod svg;
pub mod views;

use axum::http::{HeaderValue, Method};
use axum::routing::{get, post};
use axum::Router;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};
use tower_http::services::ServeDir;

pub use error::ApiError;
pub use routes::OPENAPI;
pub use state::{sketch_fields, AppState, ConfigError, FieldRange, ServiceConfig, DEFAULT_BIND, DEFAULT_MAX_SELECTION};

/// The `/api` routes alone.
pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/cohort", get(routes::get_cohort))
        .route("/api/cohort/pca", post(routes::post_pca))
        .route("/api/cohort/distributions", post(routes::post_distributions))
        .route("/api/cohort/correlation", post(routes::post_cohort_correlation))
        .route("/api/video/{id}/series", get(routes::get_series))
        .route("/api/video/{id}/sketch", get(routes::get_sketch))
        .route("/api/video/{id}/correlation", post(routes::post_video_correlation))
        .route("/api/export/{file}", get(routes::get_export))
        .route("/api/spec", get(routes::get_spec))
        .with_state(state)
}

/// API routes with CORS and, if configured, the static UI at `/`.
pub fn app(state: AppState, config: &ServiceConfig) -> Router {
    let mut app = router(state);
    if let Some(dir) = &config.ui_dir {
        app = app.fallback_service(ServeDir::new(dir));
    }
    if !config.cors_origins.is_empty() {
        let origins = if config.cors_origins.iter().any(|o| o == "*") {
            AllowOrigin::from(Any)
        } else {
            AllowOrigin::list(
                config
                    .cors_origins
                    .iter()
                    .filter_map(|o| HeaderValue::from_str(o).ok()),
            )
        };
        app = app.layer(
            CorsLayer::new()
                .allow_origin(origins)
                .allow_methods([Method::GET, Method::POST])
                .allow_headers(Any),
        );
    }
    app
}

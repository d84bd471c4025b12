use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::header;
use axum::response::{IntoResponse, Response};
use axum::Json;
use dbmx_core::engine::DEFAULT_HISTOGRAM_BINS;
use serde::Deserialize;

use crate::error::ApiError;
use crate::state::AppState;
use crate::{svg, views};

pub const OPENAPI: &str = include_str!("openapi.json");

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Selection {
    pub variables: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PcaRequest {
    pub variables: Vec<String>,
    #[serde(default)]
    pub color_by: Option<String>,
}

/// Raw query string values; parsed by hand for precise error codes.
#[derive(Debug, Default, Deserialize)]
pub struct Params {
    vars: Option<String>,
    bins: Option<String>,
    interval: Option<String>,
    video: Option<String>,
    color_by: Option<String>,
    mask: Option<String>,
    emotion: Option<String>,
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> ApiResult<T> {
    Ok(payload?.0)
}

fn query(params: Result<Query<Params>, QueryRejection>) -> ApiResult<Params> {
    Ok(params?.0)
}

pub(crate) fn parse_vars(raw: Option<&str>) -> Option<Vec<String>> {
    raw.map(|s| s.split(',').map(str::trim).filter(|v| !v.is_empty()).map(str::to_string).collect())
}

fn required_vars(params: &Params) -> ApiResult<Vec<String>> {
    parse_vars(params.vars.as_deref())
        .ok_or_else(|| ApiError::bad_request("MissingParameter", "query parameter `vars` is required"))
}

fn parse_bins(raw: Option<&str>) -> ApiResult<usize> {
    match raw {
        None => Ok(DEFAULT_HISTOGRAM_BINS),
        Some(s) => s
            .parse::<usize>()
            .map_err(|_| ApiError::bad_request("InvalidQuery", format!("`bins` must be a non-negative integer, got `{s}`"))),
    }
}

fn parse_interval(raw: Option<&str>) -> ApiResult<Option<usize>> {
    let Some(s) = raw else { return Ok(None) };
    let k: i64 = s
        .parse()
        .map_err(|_| ApiError::bad_request("InvalidQuery", format!("`interval` must be an integer, got `{s}`")))?;
    usize::try_from(k)
        .map(Some)
        .map_err(|_| ApiError::bad_request("UnknownInterval", format!("interval {k} is negative")))
}

fn required_video(params: &Params) -> ApiResult<&str> {
    params
        .video
        .as_deref()
        .ok_or_else(|| ApiError::bad_request("MissingParameter", "query parameter `video` is required"))
}

pub async fn get_cohort(State(state): State<AppState>) -> ApiResult<Json<views::CohortListing>> {
    Ok(Json(views::listing(&state)?))
}

pub async fn post_pca(
    State(state): State<AppState>,
    payload: Result<Json<PcaRequest>, JsonRejection>,
) -> ApiResult<Json<views::PcaView>> {
    let req = body(payload)?;
    Ok(Json(views::pca(&state, &req.variables, req.color_by.as_deref())?))
}

pub async fn post_distributions(
    State(state): State<AppState>,
    payload: Result<Json<Selection>, JsonRejection>,
) -> ApiResult<Json<views::DistributionsView>> {
    let req = body(payload)?;
    Ok(Json(views::distributions(&state, &req.variables)?))
}

pub async fn post_cohort_correlation(
    State(state): State<AppState>,
    payload: Result<Json<Selection>, JsonRejection>,
) -> ApiResult<Response> {
    let req = body(payload)?;
    Ok(Json(views::cohort_correlation(&state, &req.variables)?).into_response())
}

pub async fn get_series(
    State(state): State<AppState>,
    Path(id): Path<String>,
    params: Result<Query<Params>, QueryRejection>,
) -> ApiResult<Json<views::SeriesView>> {
    let params = query(params)?;
    let vars = parse_vars(params.vars.as_deref());
    let bins = parse_bins(params.bins.as_deref())?;
    Ok(Json(views::series(&state, &id, vars.as_deref(), bins)?))
}

pub async fn get_sketch(
    State(state): State<AppState>,
    Path(id): Path<String>,
    params: Result<Query<Params>, QueryRejection>,
) -> ApiResult<Json<views::SketchView>> {
    let params = query(params)?;
    let interval = parse_interval(params.interval.as_deref())?;
    Ok(Json(views::sketch(&state, &id, interval)?))
}

pub async fn post_video_correlation(
    State(state): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<Selection>, JsonRejection>,
) -> ApiResult<Response> {
    let req = body(payload)?;
    Ok(Json(views::video_correlation(&state, &id, &req.variables)?).into_response())
}

pub async fn get_export(
    State(state): State<AppState>,
    Path(file): Path<String>,
    params: Result<Query<Params>, QueryRejection>,
) -> ApiResult<Response> {
    let params = query(params)?;
    let view = file
        .strip_suffix(".svg")
        .ok_or_else(|| ApiError::bad_request("UnknownView", format!("`{file}` is not an .svg export")))?;
    let document = match view {
        "pca" => {
            let view = views::pca(&state, &required_vars(&params)?, params.color_by.as_deref())?;
            svg::pca(&view)
        }
        "distribution" => svg::distributions(&views::distributions(&state, &required_vars(&params)?)?),
        "correlation" => {
            let vars = required_vars(&params)?;
            let matrix = match params.video.as_deref() {
                Some(video) => views::video_correlation(&state, video, &vars)?,
                None => views::cohort_correlation(&state, &vars)?,
            };
            svg::correlation(&matrix)
        }
        "series" => {
            let video = required_video(&params)?;
            let vars = parse_vars(params.vars.as_deref());
            let bins = parse_bins(params.bins.as_deref())?;
            let interval = parse_interval(params.interval.as_deref())?;
            let view = views::series(&state, video, vars.as_deref(), bins)?;
            if let Some(k) = interval {
                if k >= view.timeline.n_intervals {
                    return Err(dbmx_core::engine::EngineError::UnknownInterval {
                        index: k,
                        count: view.timeline.n_intervals,
                    }
                    .into());
                }
            }
            svg::series(&view, interval)
        }
        "sketch" => {
            let video = required_video(&params)?;
            let interval = parse_interval(params.interval.as_deref())?;
            let mask = svg::Mask::parse(params.mask.as_deref())?;
            let emotion = params
                .emotion
                .as_deref()
                .map(|e| {
                    e.parse()
                        .map_err(|_| ApiError::bad_request("UnknownEmotion", format!("unknown emotion `{e}`")))
                })
                .transpose()?;
            svg::sketch(&views::sketch(&state, video, interval)?, mask, emotion)
        }
        other => {
            return Err(ApiError::bad_request(
                "UnknownView",
                format!("unknown view `{other}`; expected pca, distribution, correlation, series or sketch"),
            ))
        }
    };
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], document).into_response())
}

pub async fn get_spec() -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "application/json")], OPENAPI)
}

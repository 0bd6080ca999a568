use std::ops::Range;

use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use obs_core::analytics::{daily_series, hourly, period_compare, weekday_summary, DayRange};
use obs_core::store::formats::ObservationRow;
use obs_core::store::StoreError;
use obs_core::sync::SyncUpload;
use obs_core::{
    decode_per_device, Annotation, AnnotationKind, DatasetConfig, DeviceId, Observation, RawPress,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::{ApiError, AppState, Inner, SCHEMA_VERSION};

type ApiResult = Result<Response, ApiError>;

fn reply(status: StatusCode, mut body: Value) -> ApiResult {
    if let Value::Object(map) = &mut body {
        map.insert("schema_version".into(), SCHEMA_VERSION.into());
    }
    Ok((status, Json(body)).into_response())
}

fn ok(body: Value) -> ApiResult {
    reply(StatusCode::OK, body)
}

fn store_error(e: StoreError) -> ApiError {
    match e {
        StoreError::InvalidRecord(msg) => ApiError::bad_request(msg),
        other => ApiError::internal(other.to_string()),
    }
}

#[derive(Debug, Default, Deserialize)]
pub(crate) struct Params {
    from: Option<i64>,
    to: Option<i64>,
    device_id: Option<String>,
    burst_gap_ms: Option<u64>,
}

fn params(q: Result<Query<Params>, QueryRejection>) -> Result<Params, ApiError> {
    q.map(|Query(p)| p)
        .map_err(|e| ApiError::bad_request(e.body_text()))
}

impl Params {
    fn range(&self) -> Result<Range<i64>, ApiError> {
        let (from, to) = (self.from.unwrap_or(i64::MIN), self.to.unwrap_or(i64::MAX));
        if from > to {
            return Err(ApiError::bad_request(format!(
                "from {from} is after to {to}"
            )));
        }
        Ok(from..to)
    }

    fn device(&self, inner: &Inner) -> Result<Option<DeviceId>, ApiError> {
        match &self.device_id {
            None => Ok(None),
            Some(id) => {
                let id = DeviceId::new(id.as_str());
                if inner.store.has_device(&id) {
                    Ok(Some(id))
                } else {
                    Err(ApiError::not_found(format!("unknown device {id}")))
                }
            }
        }
    }

    fn burst_gap(&self, config: &DatasetConfig) -> Result<u64, ApiError> {
        match self.burst_gap_ms {
            Some(0) => Err(ApiError::bad_request("burst_gap_ms must be positive")),
            Some(g) => Ok(g),
            None => Ok(config.burst_gap_ms),
        }
    }

    /// The dataset calendar narrowed to the requested range.
    fn calendar(&self, config: &DatasetConfig) -> Result<DatasetConfig, ApiError> {
        config
            .restricted(self.range()?)
            .ok_or_else(|| ApiError::bad_request("range does not overlap the dataset"))
    }
}

/// Observations decoded from the whole press history, then cut to `range`,
/// so a burst straddling a range edge is not split.
fn observations_in(inner: &Inner, p: &Params) -> Result<Vec<Observation>, ApiError> {
    let range = p.range()?;
    let device = p.device(inner)?;
    let gap = p.burst_gap(&inner.config)?;
    let presses = inner
        .store
        .presses()
        .filter(|r| device.as_ref().is_none_or(|d| &r.device_id == d));
    Ok(decode_per_device(presses, gap)
        .observations
        .into_iter()
        .filter(|o| range.contains(&o.t_utc_ms))
        .collect())
}

pub(crate) async fn sync(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: String,
) -> ApiResult {
    let upload = SyncUpload::decode(&body).map_err(|e| ApiError::bad_request(e.to_string()))?;
    if upload.hello.device_id.as_str() != id {
        return Err(ApiError::bad_request(format!(
            "path device {id} does not match hello device {}",
            upload.hello.device_id
        )));
    }
    let now = app.now();
    let mut guard = app.lock();
    let inner = &mut *guard;
    let device = upload.hello.device_id.clone();
    if inner.host.cursor(&device).is_none() {
        let acked = inner.store.acked_through(&device);
        inner.host.resume(device.clone(), acked);
    }
    let outcome = inner
        .host
        .plan_upload(&upload, now)
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    inner
        .store
        .append_presses(&outcome.presses)
        .map_err(store_error)?;
    inner
        .store
        .append_gaps(&outcome.gaps)
        .map_err(store_error)?;
    inner.host.commit(&device, &outcome);
    ok(json!({
        "acked_through_seq": outcome.ack,
        "new_presses": outcome.presses.len(),
        "overflow_gaps": outcome.gaps,
    }))
}

pub(crate) async fn presses(
    State(app): State<AppState>,
    q: Result<Query<Params>, QueryRejection>,
) -> ApiResult {
    let p = params(q)?;
    let inner = app.lock();
    let device = p.device(&inner)?;
    let rows: Vec<&RawPress> = inner
        .store
        .query_presses(p.range()?)
        .into_iter()
        .filter(|r| device.as_ref().is_none_or(|d| &r.device_id == d))
        .collect();
    ok(json!({ "presses": rows }))
}

#[derive(Serialize)]
struct ObservationView {
    #[serde(flatten)]
    row: ObservationRow,
    source_seqs: Vec<u32>,
}

fn observation_views(observations: &[Observation], config: &DatasetConfig) -> Vec<ObservationView> {
    observations
        .iter()
        .map(|o| ObservationView {
            row: ObservationRow::new(o, config),
            source_seqs: o.source_seqs.clone(),
        })
        .collect()
}

pub(crate) async fn observations(
    State(app): State<AppState>,
    q: Result<Query<Params>, QueryRejection>,
) -> ApiResult {
    let p = params(q)?;
    let inner = app.lock();
    let obs = observations_in(&inner, &p)?;
    ok(json!({ "observations": observation_views(&obs, &inner.config) }))
}

pub(crate) async fn hourly_report(
    State(app): State<AppState>,
    q: Result<Query<Params>, QueryRejection>,
) -> ApiResult {
    let p = params(q)?;
    let inner = app.lock();
    let h = hourly(&observations_in(&inner, &p)?, &inner.config);
    let rows: Vec<Value> = (0..24)
        .map(|hour| json!({ "hour": hour, "count": h.counts[hour], "percentage": h.percentage(hour) }))
        .collect();
    ok(json!({ "total": h.total, "rows": rows }))
}

fn gap_annotations(inner: &Inner) -> Vec<Annotation> {
    inner.store.annotations().map(|(_, a)| a.clone()).collect()
}

pub(crate) async fn weekday_report(
    State(app): State<AppState>,
    q: Result<Query<Params>, QueryRejection>,
) -> ApiResult {
    let p = params(q)?;
    let inner = app.lock();
    let calendar = p.calendar(&inner.config)?;
    let summary = weekday_summary(
        &observations_in(&inner, &p)?,
        &gap_annotations(&inner),
        &calendar,
    );
    ok(json!({ "days": summary.days }))
}

pub(crate) async fn daily_report(
    State(app): State<AppState>,
    q: Result<Query<Params>, QueryRejection>,
) -> ApiResult {
    let p = params(q)?;
    let inner = app.lock();
    let calendar = p.calendar(&inner.config)?;
    let series = daily_series(
        &observations_in(&inner, &p)?,
        &gap_annotations(&inner),
        &calendar,
    );
    ok(json!({ "days": series.days, "bands": series.bands }))
}

#[derive(Debug, Deserialize)]
pub(crate) struct CompareParams {
    a: String,
    b: String,
    device_id: Option<String>,
    burst_gap_ms: Option<u64>,
}

pub(crate) async fn compare_report(
    State(app): State<AppState>,
    q: Result<Query<CompareParams>, QueryRejection>,
) -> ApiResult {
    let Query(c) = q.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let parse = |s: &str| s.parse::<DayRange>().map_err(ApiError::bad_request);
    let (a, b) = (parse(&c.a)?, parse(&c.b)?);
    let p = Params {
        device_id: c.device_id,
        burst_gap_ms: c.burst_gap_ms,
        ..Params::default()
    };
    let inner = app.lock();
    let cmp = period_compare(
        &observations_in(&inner, &p)?,
        &gap_annotations(&inner),
        &inner.config,
        a,
        b,
    )
    .map_err(|e| ApiError::bad_request(e.to_string()))?;
    ok(json!({ "a": cmp.a, "b": cmp.b, "ratio": cmp.ratio }))
}

#[derive(Serialize)]
struct AnnotationView<'a> {
    id: u64,
    #[serde(flatten)]
    annotation: &'a Annotation,
}

fn annotation_views(inner: &Inner, range: Range<i64>) -> Vec<AnnotationView<'_>> {
    inner
        .store
        .query_annotations(range)
        .into_iter()
        .map(|(id, annotation)| AnnotationView {
            id: id.0,
            annotation,
        })
        .collect()
}

pub(crate) async fn timeline(
    State(app): State<AppState>,
    q: Result<Query<Params>, QueryRejection>,
) -> ApiResult {
    let p = params(q)?;
    let inner = app.lock();
    let calendar = p.calendar(&inner.config)?;
    let obs = observations_in(&inner, &p)?;
    let series = daily_series(&obs, &gap_annotations(&inner), &calendar);
    ok(json!({
        "config": calendar,
        "observations": observation_views(&obs, &inner.config),
        "days": series.days,
        "bands": series.bands,
        "annotations": annotation_views(&inner, p.range()?),
    }))
}

pub(crate) async fn list_annotations(
    State(app): State<AppState>,
    q: Result<Query<Params>, QueryRejection>,
) -> ApiResult {
    let p = params(q)?;
    let inner = app.lock();
    ok(json!({ "annotations": annotation_views(&inner, p.range()?) }))
}

pub(crate) async fn create_annotation(State(app): State<AppState>, body: String) -> ApiResult {
    let annotation: Annotation = serde_json::from_str(&body)
        .map_err(|e| ApiError::bad_request(format!("annotation: {e}")))?;
    annotation
        .validate()
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    let mut inner = app.lock();
    if annotation.kind == AnnotationKind::Gap {
        let span = annotation.span();
        if let Some((id, _)) = inner
            .store
            .annotations()
            .find(|(_, a)| a.kind == AnnotationKind::Gap && a.overlaps(&span))
        {
            return Err(ApiError::conflict(format!(
                "overlaps gap annotation {}",
                id.0
            )));
        }
    }
    let id = inner
        .store
        .append_annotation(annotation.clone())
        .map_err(store_error)?;
    reply(
        StatusCode::CREATED,
        json!({ "annotation": AnnotationView { id: id.0, annotation: &annotation } }),
    )
}

pub(crate) async fn config(State(app): State<AppState>) -> ApiResult {
    ok(json!({ "config": app.lock().config }))
}

pub(crate) async fn not_found() -> ApiError {
    ApiError::not_found("no such endpoint")
}

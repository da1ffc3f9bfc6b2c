use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use courtvec_core::analysis::{nearest_neighbors, Matrix};
use courtvec_core::lineup_opt::{rank_fifth_man, FifthManQuery};
use courtvec_core::model::ModelConfig;
use courtvec_core::outcome::TURNOVER;
use courtvec_core::sim::{simulate_series, Lineup};
use courtvec_core::synth::{plant_generator, SynthConfig};
use courtvec_core::{EmbeddingModel, PlayerRegistry};
use courtvec_serve::{router, ServiceState};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn planted() -> (EmbeddingModel, PlayerRegistry) {
    let g = plant_generator(&SynthConfig::new(30, 4, 8, 11)).unwrap();
    (g.truth, g.roster)
}

fn app() -> Router {
    let (model, registry) = planted();
    router(Arc::new(ServiceState::new(model, registry).unwrap()))
}

fn all_turnovers() -> Router {
    let mut model = EmbeddingModel::zeros(ModelConfig::new(30, 2, 2)).unwrap();
    model.params_mut().b2[TURNOVER] = 1000.0;
    router(Arc::new(ServiceState::new(model, PlayerRegistry::synthetic(30)).unwrap()))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<&str>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map(|b| Body::from(b.to_string())).unwrap_or_else(Body::empty))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    call(app, "POST", uri, Some(&body.to_string())).await
}

fn assert_error_shape(body: &Value) {
    assert!(body["code"].is_string(), "{body}");
    assert!(body["message"].is_string(), "{body}");
    assert!(body.get("detail").is_some(), "{body}");
}

#[tokio::test]
async fn predict_returns_labeled_distribution() {
    let app = app();
    let (status, body) =
        post(&app, "/api/v1/predict", json!({"offense": [4, 0, 1, 2, 3], "defense": [5, 6, 7, 8, 9]})).await;
    assert_eq!(status, StatusCode::OK);
    let outcomes = body["outcomes"].as_array().unwrap();
    assert_eq!(outcomes.len(), 23);
    let total: f64 = outcomes.iter().map(|o| o["probability"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
    assert_eq!(outcomes[21]["label"], "Turnover");
    assert_eq!(body["offense"], json!([0, 1, 2, 3, 4]));

    let (model, _) = planted();
    let q = model.forward(&[0, 1, 2, 3, 4], &[5, 6, 7, 8, 9]).unwrap();
    for (k, o) in outcomes.iter().enumerate() {
        assert_eq!(o["probability"].as_f64().unwrap(), q[k]);
    }
}

#[tokio::test]
async fn predict_errors() {
    let app = app();
    let (status, body) =
        post(&app, "/api/v1/predict", json!({"offense": [0, 1, 2, 3, 99999], "defense": [5, 6, 7, 8, 9]})).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["detail"]["id"], 99999);
    assert_error_shape(&body);

    let (status, body) = post(&app, "/api/v1/predict", json!({"offense": [0, 1, 2, 3], "defense": [5, 6, 7, 8, 9]})).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error_shape(&body);

    let (status, _) = post(&app, "/api/v1/predict", json!({"offense": [0, 1, 2, 3, 4], "defense": [4, 6, 7, 8, 9]})).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    let (status, body) = call(&app, "POST", "/api/v1/predict", Some("{not json")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error_shape(&body);

    let (status, _) = post(&app, "/api/v1/predict", json!({"offense": "0,1,2,3,4"})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn simulate_matches_library_and_is_deterministic() {
    let app = app();
    let req = json!({"lineup_a": [0, 1, 2, 3, 4], "lineup_b": [5, 6, 7, 8, 9], "sims": 50, "seed": 3});
    let (status, first) = post(&app, "/api/v1/simulate/series", req.clone()).await;
    assert_eq!(status, StatusCode::OK);
    let (_, second) = post(&app, "/api/v1/simulate/series", req).await;
    assert_eq!(first, second);

    let (model, _) = planted();
    let direct = simulate_series(
        &model,
        &Lineup::new(&[0, 1, 2, 3, 4]).unwrap(),
        &Lineup::new(&[5, 6, 7, 8, 9]).unwrap(),
        50,
        100,
        3,
    )
    .unwrap();
    assert_eq!(first, serde_json::to_value(direct).unwrap());
}

#[tokio::test]
async fn simulate_errors() {
    let app = app();
    let (status, body) = post(
        &app,
        "/api/v1/simulate/series",
        json!({"lineup_a": [0, 1, 2, 3, 4], "lineup_b": [5, 6, 7, 8, 9], "sims": 0, "seed": 3}),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error_shape(&body);

    let (status, body) = post(
        &all_turnovers(),
        "/api/v1/simulate/series",
        json!({"lineup_a": [0, 1, 2, 3, 4], "lineup_b": [5, 6, 7, 8, 9], "sims": 1, "seed": 3}),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["code"], "degenerate_model");
}

#[tokio::test]
async fn optimize_ranks_and_validates() {
    let app = app();
    let query = json!({
        "fixed_four": [0, 1, 2, 3],
        "opponent": [5, 6, 7, 8, 9],
        "candidates": [12, 10, 11],
        "sims": 40,
        "seed": 9
    });
    let (status, body) = post(&app, "/api/v1/optimize/fifth", query.clone()).await;
    assert_eq!(status, StatusCode::OK);
    let (model, _) = planted();
    let parsed: FifthManQuery = serde_json::from_value(query).unwrap();
    let direct = rank_fifth_man(&model, &parsed).unwrap();
    assert_eq!(body["rows"], serde_json::to_value(direct).unwrap());

    let (status, _) = post(
        &app,
        "/api/v1/optimize/fifth",
        json!({"fixed_four": [0, 1, 2, 3], "opponent": [5, 6, 7, 8, 9], "candidates": [], "sims": 40, "seed": 9}),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn optimize_duplicate_candidates_tie() {
    let (mut model, registry) = planted();
    let h = model.config().embed_dim;
    let row: Vec<f64> = model.embedding(20).to_vec();
    model.embedding_mut(21).copy_from_slice(&row);
    assert_eq!(h, row.len());
    let app = router(Arc::new(ServiceState::new(model, registry).unwrap()));
    let (_, body) = post(
        &app,
        "/api/v1/optimize/fifth",
        json!({"fixed_four": [0, 1, 2, 3], "opponent": [5, 6, 7, 8, 9], "candidates": [21, 20], "sims": 30, "seed": 1}),
    )
    .await;
    let rows = body["rows"].as_array().unwrap();
    assert_eq!(rows[0]["candidate"], 20);
    assert_eq!(rows[1]["candidate"], 21);
    assert_eq!(rows[0]["game_win_fraction"], rows[1]["game_win_fraction"]);
    assert_eq!(rows[0]["mean_margin"], rows[1]["mean_margin"]);
}

#[tokio::test]
async fn players_and_neighbors() {
    let app = app();
    let (status, body) = call(&app, "GET", "/api/v1/players", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["players"].as_array().unwrap().len(), 30);

    let (model, _) = planted();
    let table = Matrix::embeddings(&model);
    for id in [0u32, 7, 29] {
        let (status, body) = call(&app, "GET", &format!("/api/v1/players/{id}/neighbors?count=4"), None).await;
        assert_eq!(status, StatusCode::OK);
        let direct = nearest_neighbors(&table, id, 4).unwrap();
        let got = body["neighbors"].as_array().unwrap();
        assert_eq!(got.len(), 4);
        for (g, d) in got.iter().zip(&direct) {
            assert_eq!(g["id"], d.id);
            assert_eq!(g["distance"].as_f64().unwrap(), d.distance);
        }
    }

    let (_, body) = call(&app, "GET", "/api/v1/players/3/neighbors?count=0", None).await;
    assert_eq!(body["neighbors"], json!([]));
    let (status, _) = call(&app, "GET", "/api/v1/players/3/neighbors?count=30", None).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, body) = call(&app, "GET", "/api/v1/players/30/neighbors", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error_shape(&body);
    let (status, _) = call(&app, "GET", "/api/v1/players/abc/neighbors", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn meta_describes_the_model() {
    let (status, body) = call(&app(), "GET", "/api/v1/meta", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["vocab"], 30);
    assert_eq!(body["embed_dim"], 4);
    assert_eq!(body["hidden"], 8);
    assert_eq!(body["labels"].as_array().unwrap().len(), 23);
    assert_eq!(body["labels"][19]["points"], 4);
    assert_eq!(body["checkpoint_sha256"].as_str().unwrap().len(), 64);
}

#[tokio::test]
async fn mismatched_registry_is_rejected() {
    let (model, _) = planted();
    assert!(ServiceState::new(model, PlayerRegistry::synthetic(31)).is_err());
}

#[tokio::test]
async fn concurrent_identical_requests_agree() {
    let app = app();
    let req = json!({"lineup_a": [0, 1, 2, 3, 4], "lineup_b": [5, 6, 7, 8, 9], "sims": 20, "seed": 5});
    let handles: Vec<_> = (0..8)
        .map(|_| {
            let app = app.clone();
            let req = req.clone();
            tokio::spawn(async move { post(&app, "/api/v1/simulate/series", req).await })
        })
        .collect();
    let mut bodies = Vec::new();
    for h in handles {
        bodies.push(h.await.unwrap());
    }
    assert!(bodies.windows(2).all(|w| w[0] == w[1]));
}

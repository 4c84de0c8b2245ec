// Drive the HTTP API in-process. `talestream serve` runs the same router on
// a socket.
//
// cargo run --example http_api

use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use talestream::server::{router, AppState, CanvasStore, FINGERPRINT_HEADER};
use talestream::{load_dataset, Engine};
use tower::ServiceExt;

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/micro10.jsonl");

async fn request(app: &axum::Router, method: &str, uri: &str, body: &str) -> anyhow::Result<serde_json::Value> {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_owned()))?;
    let resp = app.clone().oneshot(req).await?;
    let fingerprint = resp.headers().get(FINGERPRINT_HEADER).cloned();
    println!("{method} {uri} -> {} (corpus {:?})", resp.status(), fingerprint);
    let bytes = resp.into_body().collect().await?.to_bytes();
    Ok(serde_json::from_slice(&bytes)?)
}

pub fn run_example() -> anyhow::Result<()> {
    let (corpus, _) = load_dataset(DATA, true)?;
    let canvas_dir = std::env::temp_dir().join(format!("talestream-api-{}", std::process::id()));
    let state = AppState::new(Engine::new(corpus), CanvasStore::new(&canvas_dir)?, Some(1));
    let app = router(state);

    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let v = request(&app, "POST", "/api/suggest", r#"{"input_tropes":["ViceCity"],"breadth":1,"count":2}"#).await?;
        println!("{}", serde_json::to_string_pretty(&v["suggestions"])?);

        let v = request(&app, "POST", "/api/suggest", r#"{"input_tropes":["Nowhere"]}"#).await?;
        println!("error {} for {}", v["error"], v["id"]);

        let v = request(&app, "GET", "/api/tropes/AntiHeroLike", "").await?;
        println!("sub-tropes: {}", v["sub_tropes"]);

        let v = request(&app, "GET", "/api/search?q=city&limit=3", "").await?;
        println!("search: {}", v["results"]);

        let canvas = r#"{"id":"board","title":"Noir pitch","updated_at":"2026-05-01T10:00:00Z","writer":"me",
            "cards":[{"card_id":"c1","card_type":"trope","position":{"x":0,"y":0},"payload":"CityNoir","selected_for_input":true}]}"#;
        let v = request(&app, "PUT", "/api/canvases/board", canvas).await?;
        println!("canvas accepted: {}", v["accepted"]);
        anyhow::Ok(())
    })?;
    std::fs::remove_dir_all(&canvas_dir)?;
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}

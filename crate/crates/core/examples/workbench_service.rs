//! Serves a copy of the bundled data over HTTP and performs one guarded edit,
//! as the workbench front end would.
//!
//! cargo run --example workbench_service

use axum::body::Body;
use axum::http::Request;
use fsf_rubric::service::router;
use fsf_rubric::store::Store;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &axum::Router, req: Request<Body>) -> Result<(u16, Value), Box<dyn std::error::Error>> {
    let resp = app.clone().oneshot(req).await?;
    let status = resp.status().as_u16();
    let bytes = resp.into_body().collect().await?.to_bytes();
    Ok((status, serde_json::from_slice(&bytes).unwrap_or(Value::Null)))
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let app = router(Store::init_bundled(dir.path())?)?;

    let (_, doc) = call(&app, Request::get("/assessments/anthropic").body(Body::empty())?).await?;
    let token = doc["token"].as_str().unwrap_or_default().to_string();
    println!("loaded anthropic at {}", &token[..12]);

    let edit = |expected: &str| {
        let body = json!({"score": 25, "rationale": "Internal open-ended red teaming now described.", "expected_token": expected});
        Request::put("/assessments/anthropic/leaves/1.2.1")
            .header("content-type", "application/json")
            .body(Body::from(body.to_string()))
    };
    let (status, resp) = call(&app, edit(&token)?).await?;
    println!("edit: HTTP {status}, new total {}", resp["report"]["total_display"]);

    // Replaying with the old token is a conflict; the store keeps the first write.
    let (status, _) = call(&app, edit(&token)?).await?;
    println!("stale edit: HTTP {status}");

    let preset = Request::post("/whatif")
        .header("content-type", "application/json")
        .body(Body::from(json!({"id": "anthropic", "preset": "best_in_class"}).to_string()))?;
    let (_, whatif) = call(&app, preset).await?;
    println!("best-in-class preset total {}", whatif["report"]["total_display"]);
    Ok(())
}

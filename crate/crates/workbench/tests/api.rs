//! HTTP contract: status codes and payload shapes over a completed run.

mod support;

use std::sync::{Arc, OnceLock};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use topicbench::api::{router, router_with_assets, AppState, DocumentsPayload, ModelSummary, TopicsPayload};
use topicbench::chord::ChordGraph;
use topicbench::ranking::WordList;
use topicbench::workspace::Workspace;

fn shared() -> &'static support::Fixture {
    static FIXTURE: OnceLock<support::Fixture> = OnceLock::new();
    FIXTURE.get_or_init(support::completed_run)
}

fn app(ws: &Workspace) -> Router {
    router(Arc::new(AppState::new(ws.clone(), WordList::builtin())))
}

async fn send(app: &Router, req: Request<Body>) -> (StatusCode, Vec<u8>) {
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let body = res.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, body)
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    let (status, body) = send(app, Request::get(uri).body(Body::empty()).unwrap()).await;
    (status, serde_json::from_slice(&body).unwrap_or(Value::Null))
}

async fn post(app: &Router, uri: &str, body: String) -> (StatusCode, Value) {
    let req = Request::post(uri)
        .header("content-type", "application/json")
        .body(Body::from(body))
        .unwrap();
    let (status, body) = send(app, req).await;
    (status, serde_json::from_slice(&body).unwrap())
}

fn fields(v: &Value) -> Vec<String> {
    v["fields"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["field"].as_str().unwrap().to_string())
        .collect()
}

#[tokio::test]
async fn datasets_and_their_three_models() {
    let app = app(&shared().workspace);
    let (status, body) = get(&app, "/datasets").await;
    assert_eq!(status, StatusCode::OK);
    let list = body.as_array().unwrap();
    assert_eq!(list.len(), 2);
    assert_eq!(list[0]["name"], "kitchen");
    assert_eq!(list[0]["num_documents"], 45);
    assert_eq!(list[0]["methods"], json!(["lda", "nmf", "embed"]));
    assert_eq!(list[0]["run_id"], shared().manifest.run_id.as_str());

    let (status, body) = get(&app, "/datasets/workshop/models").await;
    assert_eq!(status, StatusCode::OK);
    let models: Vec<ModelSummary> = serde_json::from_value(body).unwrap();
    assert_eq!(
        models.iter().map(|m| m.id.as_str()).collect::<Vec<_>>(),
        vec!["workshop-lda", "workshop-nmf", "workshop-embed"]
    );
    for m in &models {
        let metrics = m.metrics.as_ref().unwrap();
        assert_eq!(metrics.num_topics, m.num_topics);
        assert_eq!(metrics.dataset, "workshop");
    }
}

#[tokio::test]
async fn topics_chord_and_documents() {
    let app = app(&shared().workspace);
    for method in ["lda", "nmf", "embed"] {
        let id = format!("kitchen-{method}");
        let (status, body) = get(&app, &format!("/models/{id}/topics")).await;
        assert_eq!(status, StatusCode::OK, "{body}");
        let topics: TopicsPayload = serde_json::from_value(body).unwrap();
        assert_eq!(topics.model_id, id);
        assert!(!topics.topics.is_empty());
        assert!(topics.topics.iter().all(|t| !t.keywords.is_empty()));

        let (status, body) = get(&app, &format!("/models/{id}/chord")).await;
        assert_eq!(status, StatusCode::OK);
        let chord: ChordGraph = serde_json::from_value(body).unwrap();
        assert_eq!(chord.threshold, 0.1);
        assert_eq!(chord.nodes.len(), topics.topics.len());
        if method == "embed" {
            assert!(chord.edges.is_empty());
        }

        let first = topics.topics[0].topic_id;
        let (status, body) = get(&app, &format!("/models/{id}/topics/{first}/documents")).await;
        assert_eq!(status, StatusCode::OK);
        let docs: DocumentsPayload = serde_json::from_value(body).unwrap();
        assert_eq!(docs.limit, 20);
        assert_eq!(docs.documents.len(), docs.total.min(20));
        assert!(docs.documents.iter().all(|d| !d.text.is_empty()));
        assert!(docs.documents.windows(2).all(|w| w[0].membership >= w[1].membership));

        let (_, body) = get(&app, &format!("/models/{id}/topics/{first}/documents?limit=3")).await;
        let few: DocumentsPayload = serde_json::from_value(body).unwrap();
        assert_eq!(few.documents.len(), few.total.min(3));
        assert_eq!(few.documents[..], docs.documents[..few.documents.len()]);
    }

    let (status, body) = get(&app, "/models/kitchen-lda/chord?threshold=1").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["threshold"], 1.0);
}

#[tokio::test]
async fn unknown_resources_are_404() {
    let app = app(&shared().workspace);
    for uri in [
        "/datasets/nowhere/models",
        "/models/kitchen-bogus/topics",
        "/models/nowhere-lda/chord",
        "/models/kitchen-lda/topics/999/documents",
        "/models/kitchen-lda/topics/abc/documents",
        "/no/such/route",
    ] {
        let (status, body) = get(&app, uri).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{uri}");
        if uri != "/no/such/route" {
            assert!(body["error"].as_str().unwrap().contains("not found"), "{uri}: {body}");
        }
    }
}

#[tokio::test]
async fn bad_query_parameters_are_422() {
    let app = app(&shared().workspace);
    for (uri, field) in [
        ("/models/kitchen-lda/chord?threshold=1.5", "threshold"),
        ("/models/kitchen-lda/chord?threshold=abc", "threshold"),
        ("/models/kitchen-lda/topics/0/documents?limit=0", "limit"),
        ("/models/kitchen-lda/topics/0/documents?limit=1001", "limit"),
        ("/models/kitchen-lda/topics/0/documents?limit=-1", "limit"),
    ] {
        let (status, body) = get(&app, uri).await;
        assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{uri}");
        assert_eq!(fields(&body), vec![field], "{uri}");
    }
}

#[tokio::test]
async fn repeated_reads_are_byte_identical() {
    let app = app(&shared().workspace);
    for uri in [
        "/datasets",
        "/datasets/kitchen/models",
        "/models/kitchen-nmf/topics",
        "/models/kitchen-lda/chord?threshold=0.2",
        "/models/workshop-embed/topics/0/documents",
        "/desirability-words",
    ] {
        let a = send(&app, Request::get(uri).body(Body::empty()).unwrap()).await;
        let b = send(&app, Request::get(uri).body(Body::empty()).unwrap()).await;
        assert_eq!(a.0, StatusCode::OK, "{uri}");
        assert_eq!(a, b, "{uri}");
    }
}

#[tokio::test]
async fn desirability_words_are_served() {
    let app = app(&shared().workspace);
    let (status, body) = get(&app, "/desirability-words").await;
    assert_eq!(status, StatusCode::OK);
    let list: WordList = serde_json::from_value(body).unwrap();
    assert_eq!(list, WordList::builtin());
    assert_eq!(list.max_words_per_method, 5);
}

#[tokio::test]
async fn ranking_round_trip() {
    let f = support::completed_run();
    let app = app(&f.workspace);
    let words = WordList::builtin().words;

    let (status, body) = get(&app, "/rankings").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!([]));

    let submission = json!({
        "dataset": "kitchen",
        "reviewer": "r1",
        "ordering": ["nmf", "lda", "embed"],
        "words": {"nmf": words[..2], "embed": [words[3]]},
        "notes": "clear topics",
    });
    let (status, created) = post(&app, "/rankings", submission.to_string()).await;
    assert_eq!(status, StatusCode::CREATED, "{created}");
    assert_eq!(created["ordering"], json!(["nmf", "lda", "embed"]));
    assert!(created["timestamp"].is_string());

    let other = json!({"dataset": "workshop", "reviewer": "r1", "ordering": ["lda", "embed", "nmf"]});
    assert_eq!(post(&app, "/rankings", other.to_string()).await.0, StatusCode::CREATED);

    let (_, all) = get(&app, "/rankings").await;
    assert_eq!(all.as_array().unwrap().len(), 2);
    assert_eq!(all[0], created);
    let (_, kitchen) = get(&app, "/rankings?dataset=kitchen").await;
    assert_eq!(kitchen, json!([created]));

    // The store survives a restart.
    let (_, reloaded) = get(&reopened(&f), "/rankings?dataset=kitchen").await;
    assert_eq!(reloaded, kitchen);
}

fn reopened(f: &support::Fixture) -> Router {
    app(&Workspace::open(f.root()).unwrap())
}

#[tokio::test]
async fn invalid_rankings_are_422_and_not_stored() {
    let f = support::completed_run();
    let app = app(&f.workspace);
    let words = WordList::builtin().words;

    let six = json!({
        "dataset": "kitchen",
        "reviewer": "r1",
        "ordering": ["lda", "nmf", "embed"],
        "words": {"lda": words[..6]},
    });
    let (status, body) = post(&app, "/rankings", six.to_string()).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(fields(&body), vec!["words.lda"]);

    let unknown_word = json!({
        "dataset": "kitchen",
        "reviewer": "r1",
        "ordering": ["lda", "nmf", "embed"],
        "words": {"lda": ["definitely-not-listed"]},
    });
    let (status, body) = post(&app, "/rankings", unknown_word.to_string()).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(fields(&body), vec!["words.lda"]);

    let bad_ordering = json!({"dataset": "kitchen", "reviewer": "", "ordering": ["lda", "lda"]});
    let (status, body) = post(&app, "/rankings", bad_ordering.to_string()).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let f_names = fields(&body);
    assert!(f_names.contains(&"reviewer".to_string()), "{f_names:?}");
    assert!(f_names.iter().any(|n| n.starts_with("ordering")), "{f_names:?}");

    let (status, body) = post(&app, "/rankings", "{not json".into()).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(fields(&body), vec!["body"]);

    let (_, all) = get(&app, "/rankings").await;
    assert_eq!(all, json!([]));
}

#[tokio::test]
async fn empty_workspace_lists_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(&Workspace::open(dir.path()).unwrap());
    let (status, body) = get(&app, "/datasets").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!([]));
    assert_eq!(get(&app, "/models/x-lda/topics").await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn static_assets_fall_back() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<html>ui</html>").unwrap();
    let state = Arc::new(AppState::new(shared().workspace.clone(), WordList::builtin()));
    let app = router_with_assets(state, dir.path().to_path_buf());
    let (status, body) = send(&app, Request::get("/index.html").body(Body::empty()).unwrap()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, b"<html>ui</html>");
    assert_eq!(get(&app, "/datasets").await.0, StatusCode::OK);
}

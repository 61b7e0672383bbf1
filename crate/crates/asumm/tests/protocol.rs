//! Wire types against the shared request/response fixtures, and a replay of
//! each fixture through a live gateway.

mod common;

use asumm::gateway::wire::*;
use asumm::gateway::{Gateway, GatewayConfig, GatewayError, Mode, EMBED, HEALTH, MOODS, NLI, PAIR, SUMMARIZE};
use asumm_core::pipeline::{ModelKey, Strategy};
use asumm_core::Aspect;
use common::{fixture, protocol_fixtures, MockServer};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

fn roundtrip<T: Serialize + DeserializeOwned>(v: &Value) {
    let typed: T = serde_json::from_value(v.clone()).unwrap_or_else(|e| panic!("{v}: {e}"));
    assert_eq!(&serde_json::to_value(typed).unwrap(), v);
}

#[test]
fn fixtures_match_wire_types() {
    let fixtures = protocol_fixtures();
    assert_eq!(fixtures.len(), 7);
    for f in fixtures {
        match (f.endpoint.as_str(), f.status) {
            (EMBED, 200) => {
                roundtrip::<EmbedRequest>(&f.request);
                roundtrip::<EmbedResponse>(&f.response);
            }
            (PAIR, 200) => {
                roundtrip::<PairRequest>(&f.request);
                roundtrip::<PairResponse>(&f.response);
            }
            (NLI, 200) => {
                roundtrip::<NliRequest>(&f.request);
                roundtrip::<NliResponse>(&f.response);
                let scores: Vec<f64> = serde_json::from_value(f.response["scores"].clone()).unwrap();
                assert_eq!(scores.len(), f.request["labels"].as_array().unwrap().len());
                assert!((scores.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
            (MOODS, 200) => {
                roundtrip::<MoodsRequest>(&f.request);
                roundtrip::<MoodsResponse>(&f.response);
            }
            (SUMMARIZE, 200) => {
                roundtrip::<SummarizeRequest>(&f.request);
                roundtrip::<SummarizeResponse>(&f.response);
            }
            (HEALTH, 200) => {
                assert_eq!(f.method, "GET");
                assert!(f.request.is_null());
                roundtrip::<HealthResponse>(&f.response);
            }
            (SUMMARIZE, 404) => {
                roundtrip::<SummarizeRequest>(&f.request);
                roundtrip::<ErrorResponse>(&f.response);
            }
            other => panic!("unexpected fixture {}: {other:?}", f.name),
        }
    }
}

/// Serves every fixture by (method, path, body); anything else is a 400.
fn replay_server() -> MockServer {
    let fixtures = protocol_fixtures();
    MockServer::start(move |req, _| {
        for f in &fixtures {
            let body = req.body.clone().unwrap_or(Value::Null);
            if f.method == req.method && f.endpoint == req.path && f.request == body {
                return (f.status, f.response.to_string());
            }
        }
        (400, format!(r#"{{"error":"no fixture for {} {}"}}"#, req.method, req.path))
    })
}

fn live(url: &str) -> Gateway {
    Gateway::new(GatewayConfig {
        base_url: url.to_string(),
        mode: Mode::Live,
        backoff_ms: 1,
        ..GatewayConfig::default()
    })
    .unwrap()
}

fn strings(v: &Value) -> Vec<String> {
    serde_json::from_value(v.clone()).unwrap()
}

#[test]
fn gateway_requests_are_byte_structurally_the_fixtures() {
    let server = replay_server();
    let g = live(&server.url);

    let f = fixture("embed");
    let vectors = g.embed_texts(&strings(&f.request["texts"])).unwrap();
    assert_eq!(serde_json::to_value(&vectors).unwrap(), f.response["vectors"]);

    let f = fixture("pair");
    let p = g
        .pair(f.request["question"].as_str().unwrap(), f.request["sentence"].as_str().unwrap())
        .unwrap();
    assert_eq!(p, 0.875);

    let f = fixture("nli");
    let r = g
        .nli_label(f.request["premise"].as_str().unwrap(), &strings(&f.request["labels"]))
        .unwrap();
    assert_eq!(r.label, "interrogative");

    let f = fixture("moods");
    let m = g.mood_probs(f.request["sentence"].as_str().unwrap()).unwrap();
    assert_eq!(m.interrogative, 0.875);

    let f = fixture("summarize");
    let key = ModelKey {
        family: "bart".into(),
        aspect: Aspect::Suggestion,
        strategy: Strategy::PipelineFt,
    };
    let s = g.summarize_text(f.request["text"].as_str().unwrap(), &key, 60).unwrap();
    assert_eq!(s, "Eat oats and walk daily.");

    // every request matched a fixture, and the health call came first for summarize
    for r in server.requests() {
        assert!(protocol_fixtures().iter().any(|f| f.endpoint == r.path));
    }
    assert_eq!(server.count(HEALTH), 1);
}

#[test]
fn structured_error_is_fatal_and_not_retried() {
    let fixtures = protocol_fixtures();
    let error = fixtures.iter().find(|f| f.name == "error").unwrap().clone();
    let health = fixture("health");
    // advertise the key so the request reaches the server, then answer 404
    let server = MockServer::start(move |req, _| {
        if req.path == HEALTH {
            let mut h = health.response.clone();
            h["models"].as_array_mut().unwrap().push("gpt/question/pipeline".into());
            (200, h.to_string())
        } else {
            (error.status, error.response.to_string())
        }
    });
    let g = live(&server.url);
    let key = ModelKey {
        family: "gpt".into(),
        aspect: Aspect::Question,
        strategy: Strategy::PipelineFt,
    };
    match g.summarize_text("x", &key, 5) {
        Err(GatewayError::Request { endpoint, message, .. }) => {
            assert_eq!(endpoint, SUMMARIZE);
            assert!(message.contains("404") && message.contains("unknown model"), "{message}");
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(server.count(SUMMARIZE), 1);
    assert_eq!(g.stats().retries, 0);
}

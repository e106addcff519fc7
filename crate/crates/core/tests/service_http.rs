mod common;

use adagrid::oracle::{Illustration, Oracle};
use adagrid::service::{BackgroundServer, ServeConfig};
use adagrid::strategy::write_trace;
use adagrid::{run_strategy, StepRecord, StrategyKind, StrategySpec, UnitPoint};
use common::call;
use serde_json::json;

fn start(token: Option<&str>) -> (BackgroundServer, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let server = BackgroundServer::start(ServeConfig {
        bind: "127.0.0.1:0".parse().unwrap(),
        data_dir: dir.path().to_path_buf(),
        token: token.map(str::to_string),
    })
    .unwrap();
    (server, dir)
}

fn create(server: &BackgroundServer, spec: serde_json::Value) -> String {
    let r = call(server.addr(), "POST", "/sessions", Some(&json!({ "strategy": spec })), None);
    assert_eq!(r.status, 201, "{}", r.body);
    r.json()["id"].as_str().unwrap().to_string()
}

#[test]
fn http_campaign_reproduces_the_library_trace() {
    let (server, _dir) = start(None);
    let addr = server.addr();
    let id = create(&server, json!({ "kind": "ag", "dimension": 2, "budget": 16, "seed": 3 }));
    let f = Illustration;
    loop {
        let s = call(addr, "POST", &format!("/sessions/{id}/suggest"), None, None).json();
        if s["kind"] == "complete" {
            assert_eq!(s["reason"], "budget_exhausted");
            break;
        }
        // suggest is idempotent until an outcome arrives
        let again = call(addr, "POST", &format!("/sessions/{id}/suggest"), None, None).json();
        assert_eq!(again, s);
        let x: UnitPoint = serde_json::from_value(s["unit"].clone()).unwrap();
        let label = f.evaluate(&x).unwrap().as_i8();
        let r = call(addr, "POST", &format!("/sessions/{id}/outcome"), Some(&json!({ "label": label })), None);
        assert_eq!(r.status, 200, "{}", r.body);
    }
    let record = call(addr, "GET", &format!("/sessions/{id}"), None, None).json();
    let remote: Vec<StepRecord> = serde_json::from_value(record["history"].clone()).unwrap();
    let local = run_strategy(&StrategySpec::new(StrategyKind::Ag, 2, 16, 3), &f).unwrap();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    write_trace(&mut a, &remote).unwrap();
    write_trace(&mut b, &local).unwrap();
    assert_eq!(a, b);

    let report = call(addr, "GET", &format!("/sessions/{id}/report?slice_dims=0,1&grid=32"), None, None);
    assert_eq!(report.status, 200);
    let report = report.json();
    assert_eq!(report["slice"]["grid"], 32);
    assert!((report["volume"]["v_uncertain"].as_f64().unwrap() - 0.1875).abs() < 1e-12);
    let list = call(addr, "GET", "/sessions", None, None).json();
    assert_eq!(list.as_array().unwrap().len(), 1);
    server.stop().unwrap();
}

#[test]
fn errors_come_back_as_json() {
    let (server, _dir) = start(None);
    let addr = server.addr();

    let r = call(addr, "GET", "/sessions/does-not-exist", None, None);
    assert_eq!((r.status, r.json()["code"].as_str()), (404, Some("not_found")));

    let r = call(addr, "GET", "/nowhere", None, None);
    assert_eq!(r.status, 404);
    assert_eq!(r.json()["code"], "not_found");

    let r = call(addr, "POST", "/sessions", Some(&json!({ "strategy": { "kind": "zz" } })), None);
    assert_eq!((r.status, r.json()["code"].as_str()), (400, Some("invalid_request")));

    let id = create(&server, json!({ "kind": "gi", "dimension": 1, "budget": 4 }));
    let r = call(addr, "POST", &format!("/sessions/{id}/outcome"), Some(&json!({ "label": 1 })), None);
    assert_eq!((r.status, r.json()["code"].as_str()), (409, Some("conflict")));

    call(addr, "POST", &format!("/sessions/{id}/suggest"), None, None);
    let r = call(addr, "POST", &format!("/sessions/{id}/outcome"), Some(&json!({ "label": 0 })), None);
    assert_eq!(r.status, 400, "{}", r.body);

    let r = call(addr, "GET", &format!("/sessions/{id}/report?slice_dims=0,1"), None, None);
    assert_eq!(r.status, 400, "{}", r.body);
    server.stop().unwrap();
}

#[test]
fn contradictions_are_reported_with_witnesses_and_stick() {
    let (server, _dir) = start(None);
    let addr = server.addr();
    let id = create(&server, json!({ "kind": "gg", "dimension": 1, "budget": 5 }));
    let answer = |label: i8| {
        let s = call(addr, "POST", &format!("/sessions/{id}/suggest"), None, None).json();
        let x = s["unit"][0].as_f64().unwrap();
        (x, call(addr, "POST", &format!("/sessions/{id}/outcome"), Some(&json!({ "label": label })), None))
    };
    let (x0, first) = answer(-1);
    assert_eq!(first.status, 200);
    // the second corner, answered against the first
    let (x1, second) = answer(if x0 == 0.0 { -1 } else { 1 });
    assert_ne!(x0, x1);
    assert_eq!(second.status, 409, "{}", second.body);
    let err = second.json();
    assert_eq!(err["code"], "monotonicity_violation");
    assert!(err["witnesses"]["negative"].is_array() && err["witnesses"]["positive"].is_array());

    let r = call(addr, "POST", &format!("/sessions/{id}/suggest"), None, None);
    assert_eq!(r.status, 409);
    let record = call(addr, "GET", &format!("/sessions/{id}"), None, None).json();
    assert_eq!(record["status"]["state"], "corrupt");
    assert_eq!(record["history"].as_array().unwrap().len(), 1);
    server.stop().unwrap();
}

#[test]
fn token_is_enforced_when_configured() {
    let (server, _dir) = start(Some("s3cret"));
    let addr = server.addr();
    let r = call(addr, "GET", "/sessions", None, None);
    assert_eq!(r.status, 401);
    assert_eq!(r.json()["code"], "unauthorized");
    assert_eq!(call(addr, "GET", "/sessions", None, Some("wrong")).status, 401);
    assert_eq!(call(addr, "GET", "/sessions", None, Some("s3cret")).status, 200);
    server.stop().unwrap();
}

#[test]
fn public_bind_without_token_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ServeConfig {
        bind: "0.0.0.0:0".parse().unwrap(),
        data_dir: dir.path().to_path_buf(),
        token: None,
    };
    assert!(cfg.validate().is_err());
    assert!(BackgroundServer::start(cfg).is_err());
}

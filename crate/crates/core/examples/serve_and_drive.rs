//! Starts the session API on a loopback port and drives a GI session over
//! plain HTTP, answering from a half-space oracle.

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpStream};

use adagrid::oracle::{HalfSpace, Oracle};
use adagrid::service::{BackgroundServer, ServeConfig};
use adagrid::UnitPoint;
use serde_json::{json, Value};

fn call(addr: SocketAddr, method: &str, path: &str, body: Option<&Value>) -> std::io::Result<(u16, Value)> {
    let body = body.map(|b| b.to_string()).unwrap_or_default();
    let mut s = TcpStream::connect(addr)?;
    write!(
        s,
        "{method} {path} HTTP/1.1\r\nHost: {addr}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )?;
    let mut raw = String::new();
    s.read_to_string(&mut raw)?;
    let (head, payload) = raw.split_once("\r\n\r\n").unwrap_or((&raw, ""));
    let status = head.split(' ').nth(1).and_then(|c| c.parse().ok()).unwrap_or(0);
    Ok((status, serde_json::from_str(payload).unwrap_or(Value::Null)))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let server = BackgroundServer::start(ServeConfig {
        bind: "127.0.0.1:0".parse()?,
        data_dir: std::env::temp_dir().join("adagrid-serve-example"),
        token: None,
    })?;
    let addr = server.addr();
    println!("serving on http://{addr}");

    let (_, created) = call(
        addr,
        "POST",
        "/sessions",
        Some(&json!({ "strategy": { "kind": "gi", "dimension": 1, "budget": 6, "seed": 0 } })),
    )?;
    let id = created["id"].as_str().ok_or("no id")?.to_string();
    let f = HalfSpace::with_level(1, 0.3)?;
    loop {
        let (_, s) = call(addr, "POST", &format!("/sessions/{id}/suggest"), None)?;
        if s["kind"] == "complete" {
            println!("complete: {s}");
            break;
        }
        let x: UnitPoint = serde_json::from_value(s["unit"].clone())?;
        let label = f.evaluate(&x)?.as_i8();
        let (_, out) = call(addr, "POST", &format!("/sessions/{id}/outcome"), Some(&json!({ "label": label })))?;
        println!("x = {:<8} label {label:>+2}  v = {}", x.coords()[0], out["volume"]["v_uncertain"]);
    }
    let (status, err) = call(addr, "POST", &format!("/sessions/{id}/outcome"), Some(&json!({ "label": 1 })))?;
    println!("recording twice: {status} {err}");
    server.stop()?;
    Ok(())
}

//! The HTTP API on an ephemeral port, queried with a tiny blocking client.
//!
//! Pass `--forever` to keep serving on 127.0.0.1:8080.

use kbspace::service::{self, http_request, AppState};
use kbspace::{fixture, QueryConfig};

pub fn run() -> anyhow::Result<()> {
    let state = AppState {
        engine: fixture::engine()?,
        defaults: QueryConfig::default(),
    };
    let server = service::spawn(state, "127.0.0.1:0")?;
    let addr = server.addr();
    println!("listening on {addr}");

    for (method, target, body) in [
        ("GET", "/health", None),
        ("GET", "/connectivity?item1=france_team&item2=wc2018_final", None),
        ("GET", "/connectivity?item1=pogba&item2=perisic", None),
        ("GET", "/neighborhood?item=no_such_item", None),
        (
            "POST",
            "/search-space",
            Some(r#"{"question": "Who is the head coach of the Croatia national football team?", "overrides": {"k": 1}, "timings": false}"#),
        ),
        ("POST", "/search-space", Some("{not json")),
    ] {
        let (status, reply) = http_request(addr, method, target, body)?;
        let reply: String = reply.chars().take(300).collect();
        println!("\n{method} {target} -> {status}\n{reply}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    if std::env::args().any(|a| a == "--forever") {
        let state = AppState {
            engine: fixture::engine()?,
            defaults: QueryConfig::default(),
        };
        return Ok(service::serve(state, "127.0.0.1:8080")?);
    }
    run()
}

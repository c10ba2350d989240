//! Starts the steering service on a free port and drives one session over
//! the websocket protocol: create, subscribe, run, switch mode, kick,
//! export the command log.

use std::time::{Duration, Instant};

use knot_descent::service::{Server, Service};
use serde_json::{json, Value};
use tungstenite::Message;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (addr, _) = Server::bind("127.0.0.1:0", Service::new())?.spawn()?;
    let (mut ws, _) = tungstenite::connect(format!("ws://{addr}"))?;
    let read = |ws: &mut tungstenite::WebSocket<_>| -> Result<Value, Box<dyn std::error::Error>> {
        loop {
            if let Message::Text(t) = ws.read()? {
                return Ok(serde_json::from_str(t.as_str())?);
            }
        }
    };
    println!("{}", read(&mut ws)?);

    let send = |ws: &mut tungstenite::WebSocket<_>, v: Value| ws.send(Message::text(v.to_string()));
    send(&mut ws, json!({"type": "create", "p": 3, "q": 2, "n": 80, "record_interval": 20}))?;
    let session = read(&mut ws)?["session"].as_u64().ok_or("no session")?;
    send(&mut ws, json!({"type": "subscribe", "session": session}))?;
    send(&mut ws, json!({"type": "run", "session": session}))?;

    let start = Instant::now();
    let mut snapshots = 0;
    let mut switched = false;
    while start.elapsed() < Duration::from_secs(2) {
        let msg = read(&mut ws)?;
        if msg["type"] == "snapshot" {
            snapshots += 1;
            if snapshots % 10 == 0 {
                println!("step {} {} energy {}", msg["step"], msg["mode"], msg["simon_energy"]);
            }
        } else {
            println!("{msg}");
        }
        if !switched && start.elapsed() > Duration::from_secs(1) {
            send(&mut ws, json!({"type": "perturb", "magnitude": 0.1, "seed": 7, "session": session}))?;
            send(&mut ws, json!({"type": "set_mode", "mode": "undamped", "session": session}))?;
            switched = true;
        }
    }
    println!("{snapshots} snapshots in 2 s");
    send(&mut ws, json!({"type": "export_log", "session": session}))?;
    loop {
        let msg = read(&mut ws)?;
        if msg["type"] == "log" {
            println!("command log: {}", msg["log"]["entries"]);
            break;
        }
    }
    Ok(())
}

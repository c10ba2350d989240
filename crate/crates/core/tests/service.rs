use std::net::TcpStream;
use std::sync::mpsc::Receiver;
use std::time::{Duration, Instant};

use knot_descent::dynamics::{Mode, SimParams};
use knot_descent::knot::{PolyKnot, TorusKnotSpec};
use knot_descent::service::{hello, Command, Server, Service, SessionSource, SnapshotMessage, PROTOCOL_VERSION};
use knot_descent::format::round_sig;
use knot_descent::geometry::Vec3;
use knot_descent::KnotError;
use serde_json::{json, Value};
use tungstenite::stream::MaybeTlsStream;
use tungstenite::{Message, WebSocket};

fn trefoil(n: usize) -> SessionSource {
    SessionSource::Torus(TorusKnotSpec::new(3, 2, n))
}

fn params(record_interval: u64) -> SimParams {
    SimParams { record_interval, ..SimParams::default() }
}

fn next(rx: &Receiver<SnapshotMessage>) -> SnapshotMessage {
    rx.recv_timeout(Duration::from_secs(10)).expect("snapshot within 10 s")
}

fn rounded(state: &knot_descent::dynamics::SimState) -> Vec<Vec<Vec3>> {
    let r = |v: Vec3| Vec3::new(round_sig(v.x), round_sig(v.y), round_sig(v.z));
    state.knot().components().map(|c| c.iter().map(|&v| r(v)).collect()).collect()
}

fn check_snapshot(s: &SnapshotMessage) {
    let k = PolyKnot::new(s.components.clone(), 1.0).expect("snapshot is a valid polygon");
    assert!(s.min_clearance > 0.0);
    assert!((k.total_length() - s.total_length).abs() < 1e-9 * s.total_length);
}

#[test]
fn sessions_start_paused_and_run_on_command() {
    let service = Service::new();
    let id = service.create_session(trefoil(40), params(10)).unwrap();
    let rx = service.subscribe(id).unwrap();
    let first = next(&rx);
    assert_eq!(first.step, 0);
    assert!(!first.running);
    std::thread::sleep(Duration::from_millis(50));
    assert_eq!(service.status(id).unwrap().step, 0);

    assert_eq!(service.control(id, Command::Run).unwrap(), 0);
    let mut last = 0;
    for _ in 0..20 {
        let s = next(&rx);
        assert!(s.step > last, "stream out of order: {} after {last}", s.step);
        assert_eq!(s.step % 10, 0);
        check_snapshot(&s);
        last = s.step;
    }

    let paused_at = service.control(id, Command::Pause).unwrap();
    std::thread::sleep(Duration::from_millis(50));
    let status = service.status(id).unwrap();
    assert_eq!(status.step, paused_at);
    assert!(!status.running);
    while let Ok(s) = rx.try_recv() {
        assert!(s.step <= paused_at);
    }
    assert!(rx.recv_timeout(Duration::from_millis(100)).is_err(), "stream advanced while paused");
}

#[test]
fn pausing_does_not_change_the_trajectory() {
    let service = Service::new();
    let id = service.create_session(trefoil(40), params(10)).unwrap();
    for _ in 0..2 {
        service.control(id, Command::Run).unwrap();
        std::thread::sleep(Duration::from_millis(30));
        service.control(id, Command::Pause).unwrap();
    }
    service.control(id, Command::Snapshot { label: "end".into() }).unwrap();
    let log = service.command_log(id).unwrap();
    let mut plain = log.clone();
    plain.entries.retain(|e| !matches!(e.command, Command::Pause | Command::Run | Command::Snapshot { .. }));
    assert!(plain.entries.is_empty());
    let replayed = plain.replay().unwrap();
    assert_eq!(replayed.step_index(), log.final_step);
    let end = &service.labeled_snapshots(id).unwrap()[0];
    assert_eq!(end.step, log.final_step);
    assert_eq!(rounded(&replayed), end.components);
}

#[test]
fn zero_perturbation_keeps_geometry() {
    let service = Service::new();
    let id = service.create_session(trefoil(40), params(10)).unwrap();
    service.control(id, Command::Run).unwrap();
    std::thread::sleep(Duration::from_millis(20));
    service.control(id, Command::Pause).unwrap();
    service.control(id, Command::Snapshot { label: "before".into() }).unwrap();
    service.control(id, Command::Perturb { magnitude: 0.0, seed: 3 }).unwrap();
    service.control(id, Command::Snapshot { label: "after".into() }).unwrap();
    let snaps = service.labeled_snapshots(id).unwrap();
    assert_eq!(snaps.len(), 2);
    assert_eq!(snaps[0].label.as_deref(), Some("before"));
    assert_eq!(snaps[0].components, snaps[1].components);
    assert_eq!(snaps[0].step, snaps[1].step);
}

#[test]
fn mode_change_shows_in_the_next_snapshot() {
    let service = Service::new();
    let id = service.create_session(trefoil(40), params(5)).unwrap();
    let rx = service.subscribe(id).unwrap();
    assert_eq!(next(&rx).mode, Mode::Damped);
    service.control(id, Command::Run).unwrap();
    let at = service.control(id, Command::SetMode { mode: Mode::Undamped }).unwrap();
    loop {
        let s = next(&rx);
        if s.step > at {
            assert_eq!(s.mode, Mode::Undamped);
            break;
        }
    }
    service.control(id, Command::SetExponent { d: 6.0 }).unwrap();
    let status = service.status(id).unwrap();
    assert_eq!((status.mode, status.exponent), (Mode::Undamped, 6.0));
}

#[test]
fn steered_session_replays_exactly() {
    let service = Service::new();
    let id = service.create_session(trefoil(40), params(10)).unwrap();
    service.control(id, Command::Run).unwrap();
    std::thread::sleep(Duration::from_millis(20));
    service.control(id, Command::Perturb { magnitude: 0.1, seed: 7 }).unwrap();
    std::thread::sleep(Duration::from_millis(20));
    service.control(id, Command::SetMode { mode: Mode::Undamped }).unwrap();
    service.control(id, Command::SetExponent { d: 3.5 }).unwrap();
    std::thread::sleep(Duration::from_millis(20));
    service.control(id, Command::RescaleGauge).unwrap();
    let log = service.command_log(id).unwrap();
    service.control(id, Command::Snapshot { label: "end".into() }).unwrap();
    let end = service.labeled_snapshots(id).unwrap().pop().unwrap();

    let text = serde_json::to_string(&log).unwrap();
    let replayed = serde_json::from_str::<knot_descent::service::CommandLog>(&text).unwrap().replay().unwrap();
    assert_eq!(replayed.step_index(), end.step);
    assert_eq!(rounded(&replayed), end.components);
    assert_eq!(replayed.mode(), Mode::Undamped);
}

#[test]
fn perturb_with_the_same_seed_twice_from_a_paused_state() {
    let service = Service::new();
    let id = service.create_session(trefoil(40), params(10)).unwrap();
    service.control(id, Command::Run).unwrap();
    std::thread::sleep(Duration::from_millis(20));
    service.control(id, Command::Pause).unwrap();
    let log = service.command_log(id).unwrap();
    let mut results = vec![];
    for _ in 0..2 {
        let mut state = log.replay().unwrap();
        state.perturb(0.1, 7).unwrap();
        state.step().unwrap();
        results.push(state);
    }
    assert_eq!(results[0], results[1]);
}

#[test]
fn invalid_commands_and_sessions() {
    let service = Service::new();
    let id = service.create_session(trefoil(40), params(10)).unwrap();
    assert!(matches!(service.control(id, Command::SetExponent { d: 1.5 }), Err(KnotError::InvalidParameter(_))));
    assert!(matches!(service.control(id, Command::SetExponent { d: 6.5 }), Err(KnotError::InvalidParameter(_))));
    assert!(service.control(id, Command::Perturb { magnitude: -0.1, seed: 1 }).is_err());
    assert!(service.control(id, Command::Perturb { magnitude: f64::NAN, seed: 1 }).is_err());
    let logged: Vec<Command> = service.command_log(id).unwrap().entries.into_iter().map(|e| e.command).collect();
    assert_eq!(logged, [Command::Pause], "rejected commands are not logged");
    assert!(matches!(service.control(99, Command::Run), Err(KnotError::UnknownSession(99))));
    assert!(matches!(service.subscribe(99), Err(KnotError::UnknownSession(99))));

    service.close_session(id).unwrap();
    assert!(service.status(id).unwrap().closed);
    assert!(matches!(service.control(id, Command::Run), Err(KnotError::SessionClosed(_))));
    assert!(matches!(service.subscribe(id), Err(KnotError::SessionClosed(_))));
    assert!(matches!(service.close_session(id), Err(KnotError::SessionClosed(_))));
    assert!(service.command_log(id).is_ok());
    let bad = SessionSource::Torus(TorusKnotSpec::new(2, 3, 5));
    assert!(service.create_session(bad, SimParams::default()).is_err());
}

#[test]
fn closing_ends_the_stream() {
    let service = Service::new();
    let id = service.create_session(trefoil(40), params(10)).unwrap();
    let rx = service.subscribe(id).unwrap();
    next(&rx);
    service.close_session(id).unwrap();
    assert!(rx.recv_timeout(Duration::from_secs(1)).is_err());
}

#[test]
fn streams_ten_snapshots_per_second_at_80_vertices() {
    let service = Service::new();
    let id = service.create_session(trefoil(80), params(10)).unwrap();
    let rx = service.subscribe(id).unwrap();
    next(&rx);
    service.control(id, Command::Run).unwrap();
    let start = Instant::now();
    let mut count = 0;
    while start.elapsed() < Duration::from_secs(1) {
        if rx.recv_timeout(Duration::from_millis(100)).is_ok() {
            count += 1;
        }
    }
    assert!(count >= 10, "{count} snapshots in one second");
}

type Client = WebSocket<MaybeTlsStream<TcpStream>>;

fn connect() -> (Client, Value) {
    let server = Server::bind("127.0.0.1:0", Service::new()).unwrap();
    let (addr, _) = server.spawn().unwrap();
    let (mut ws, _) = tungstenite::connect(format!("ws://{addr}")).unwrap();
    let greeting = read(&mut ws);
    (ws, greeting)
}

fn read(ws: &mut Client) -> Value {
    loop {
        match ws.read().unwrap() {
            Message::Text(t) => return serde_json::from_str(t.as_str()).unwrap(),
            Message::Close(_) => panic!("closed"),
            _ => {}
        }
    }
}

fn request(ws: &mut Client, v: Value) -> Value {
    ws.send(Message::text(v.to_string())).unwrap();
    loop {
        let reply = read(ws);
        if reply["type"] != "snapshot" {
            return reply;
        }
    }
}

#[test]
fn websocket_protocol() {
    let (mut ws, greeting) = connect();
    assert_eq!(greeting, hello());
    assert_eq!(greeting["type"], "hello");
    assert_eq!(greeting["protocol"], PROTOCOL_VERSION);

    let created = request(&mut ws, json!({"type": "create", "p": 3, "q": 2, "n": 40, "record_interval": 5, "id": 1}));
    assert_eq!(created["type"], "created", "{created}");
    assert_eq!(created["id"], 1);
    let session = created["session"].as_u64().unwrap();

    let sub = request(&mut ws, json!({"type": "subscribe", "session": session}));
    assert_eq!(sub["type"], "subscribed");
    let first = read(&mut ws);
    assert_eq!(first["type"], "snapshot");
    assert_eq!(first["step"], 0);
    for key in ["mode", "simon_energy", "spring_energy", "min_clearance", "total_length"] {
        assert!(!first[key].is_null(), "{key} missing from {first}");
    }
    let comps = first["components"].as_array().unwrap();
    assert_eq!(comps.len(), 1);
    assert_eq!(comps[0].as_array().unwrap().len(), 40);
    assert_eq!(comps[0][0].as_array().unwrap().len(), 3);

    let ack = request(&mut ws, json!({"type": "run", "session": session, "id": "r"}));
    assert_eq!(ack["type"], "ack");
    assert_eq!(ack["command"], "run");
    assert_eq!(ack["id"], "r");
    let mut last = 0;
    for _ in 0..10 {
        let s = read(&mut ws);
        if s["type"] == "snapshot" {
            let step = s["step"].as_u64().unwrap();
            assert!(step > last);
            last = step;
        }
    }
    let ack = request(&mut ws, json!({"type": "set_mode", "mode": "undamped", "session": session}));
    assert_eq!(ack["type"], "ack");
    let at = ack["step"].as_u64().unwrap();
    loop {
        let s = read(&mut ws);
        if s["type"] == "snapshot" && s["step"].as_u64().unwrap() > at {
            assert_eq!(s["mode"], "undamped");
            break;
        }
    }
    let ack = request(&mut ws, json!({"type": "perturb", "magnitude": 0.1, "seed": 7, "session": session}));
    assert_eq!(ack["command"], "perturb");

    let log = request(&mut ws, json!({"type": "export_log", "session": session}));
    assert_eq!(log["type"], "log");
    let entries = log["log"]["entries"].as_array().unwrap();
    let names: Vec<&str> = entries.iter().map(|e| e["command"]["type"].as_str().unwrap()).collect();
    assert_eq!(names, ["run", "set_mode", "perturb", "pause"]);
    assert_eq!(entries[2]["step"].as_u64(), ack["step"].as_u64());

    let status = request(&mut ws, json!({"type": "status", "session": session}));
    assert_eq!(status["type"], "status");
    assert_eq!(status["running"], false);

    let closed = request(&mut ws, json!({"type": "close", "session": session}));
    assert_eq!(closed["type"], "closed");
}

#[test]
fn websocket_errors() {
    let (mut ws, _) = connect();
    let cases = [
        json!({"type": "set_exponent", "d": 9, "session": 1, "id": 5}),
        json!({"type": "run", "session": 42}),
        json!({"type": "launch", "session": 1}),
        json!({"type": "create", "p": 2}),
        json!({"type": "create", "p": 3, "q": 2, "d": 1}),
        json!({"session": 1}),
    ];
    request(&mut ws, json!({"type": "create", "p": 3, "q": 2, "n": 40}));
    for c in cases {
        let reply = request(&mut ws, c.clone());
        assert_eq!(reply["type"], "error", "{c} -> {reply}");
        assert!(reply["message"].as_str().is_some_and(|m| !m.is_empty()));
        if let Some(id) = c.get("id") {
            assert_eq!(&reply["id"], id);
        }
    }
    ws.send(Message::text("not json")).unwrap();
    assert_eq!(read(&mut ws)["type"], "error");
}

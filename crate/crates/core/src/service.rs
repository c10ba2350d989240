//! Steering service: live simulation sessions that accept commands between
//! steps and stream snapshots to subscribers, plus a websocket transport.
//!
//! Every session has a single driver thread that owns its [`SimState`].
//! Commands go through a queue that the driver drains between steps, so a
//! step is never torn. Each applied command is logged with the step index
//! at which it took effect; [`CommandLog::replay`] rebuilds the exact state
//! from the log.
//!
//! Wire messages are JSON objects with a `type` field. Clients send
//! `create`, `subscribe`, `status`, `export_log`, `close` or one of the
//! [`Command`] types together with a `session` id and an optional request
//! `id`. The server answers with `hello` on connect, then `created`, `ack`,
//! `snapshot`, `status`, `log`, `closed` or `error` messages.

use std::collections::BTreeMap;
use std::io::ErrorKind;
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, Sender, SyncSender, TryRecvError, TrySendError};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tungstenite::{Message, WebSocket};

use crate::dynamics::{is_stable, Mode, SimParams, SimState};
use crate::energy::{check_exponent, ForceField};
use crate::error::{KnotError, Result};
use crate::format::round_sig;
use crate::geometry::Vec3;
use crate::knot::{generate_torus, KnotFile, PolyKnot, TorusKnotSpec};
use crate::trace::TraceRecord;

pub const PROTOCOL_VERSION: u32 = 1;

/// Seed used by `perturb` commands that do not name one.
pub const DEFAULT_PERTURB_SEED: u64 = 0x5eed;

/// Snapshots buffered per subscriber. A subscriber that falls further
/// behind misses snapshots instead of stalling the driver.
const SUBSCRIBER_BUFFER: usize = 256;

/// A steering command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Command {
    Run,
    Pause,
    SetMode { mode: Mode },
    SetExponent { d: f64 },
    Perturb {
        magnitude: f64,
        #[serde(default = "default_seed")]
        seed: u64,
    },
    RescaleGauge,
    Snapshot { label: String },
}

fn default_seed() -> u64 {
    DEFAULT_PERTURB_SEED
}

impl Command {
    /// Range checks done before a command is queued.
    pub fn validate(&self) -> Result<()> {
        match self {
            Command::SetExponent { d } => check_exponent(*d),
            Command::Perturb { magnitude, .. } if !(magnitude.is_finite() && *magnitude >= 0.0) => {
                Err(KnotError::invalid(format!("perturbation magnitude {magnitude}")))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::Pause => "pause",
            Command::SetMode { .. } => "set_mode",
            Command::SetExponent { .. } => "set_exponent",
            Command::Perturb { .. } => "perturb",
            Command::RescaleGauge => "rescale_gauge",
            Command::Snapshot { .. } => "snapshot",
        }
    }

    /// Effect on the simulation state; `run`, `pause` and `snapshot` have
    /// none.
    fn apply(&self, state: &mut SimState) -> Result<()> {
        match self {
            Command::SetMode { mode } => state.set_mode(*mode)?,
            Command::SetExponent { d } => state.set_exponent(*d)?,
            Command::Perturb { magnitude, seed } => state.perturb(*magnitude, *seed)?,
            Command::RescaleGauge => state.rescale_gauge()?,
            Command::Run | Command::Pause | Command::Snapshot { .. } => {}
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    /// Step index at which the command took effect.
    pub step: u64,
    pub command: Command,
}

/// Everything needed to reproduce a steered session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommandLog {
    pub protocol: u32,
    /// The configuration the session was created from, before the gauge
    /// rescale.
    pub start: KnotFile,
    pub params: SimParams,
    pub entries: Vec<LogEntry>,
    /// Step index when the log was exported.
    pub final_step: u64,
}

impl CommandLog {
    /// Re-runs the session: steps up to each entry's step, applies it, and
    /// finally steps up to `final_step`.
    pub fn replay(&self) -> Result<SimState> {
        let mut state = SimState::new(self.start.to_knot()?, self.params)?;
        for entry in &self.entries {
            advance_to(&mut state, entry.step)?;
            entry.command.apply(&mut state)?;
        }
        advance_to(&mut state, self.final_step)?;
        Ok(state)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| KnotError::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| KnotError::Json { path: path.to_owned(), source })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).expect("log serialization cannot fail");
        std::fs::write(path, text + "\n").map_err(|e| KnotError::io(path, e))
    }
}

fn advance_to(state: &mut SimState, step: u64) -> Result<()> {
    if step < state.step_index() {
        return Err(KnotError::invalid(format!("log goes back to step {step} from {}", state.step_index())));
    }
    while state.step_index() < step {
        state.step()?;
    }
    Ok(())
}

/// One frame of a session stream. Numbers are rounded to 12 significant
/// digits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMessage {
    pub session: u64,
    pub step: u64,
    pub mode: Mode,
    pub exponent: f64,
    pub running: bool,
    pub stable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub simon_energy: f64,
    pub spring_energy: f64,
    pub min_clearance: f64,
    pub total_length: f64,
    pub components: Vec<Vec<Vec3>>,
}

impl SnapshotMessage {
    fn new(session: u64, state: &SimState, rec: &TraceRecord, running: bool, stable: bool) -> Self {
        let round = |v: Vec3| Vec3::new(round_sig(v.x), round_sig(v.y), round_sig(v.z));
        SnapshotMessage {
            session,
            step: rec.step,
            mode: rec.mode,
            exponent: state.params().force_field.exponent(),
            running,
            stable,
            label: None,
            simon_energy: round_sig(rec.simon_energy),
            spring_energy: round_sig(rec.spring_energy),
            min_clearance: round_sig(rec.min_clearance),
            total_length: round_sig(rec.total_length),
            components: state.knot().components().map(|c| c.iter().map(|&v| round(v)).collect()).collect(),
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("snapshot serialization cannot fail");
        v["type"] = json!("snapshot");
        v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionStatus {
    pub session: u64,
    pub step: u64,
    pub mode: Mode,
    pub exponent: f64,
    pub running: bool,
    pub stable: bool,
    pub closed: bool,
    pub subscribers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Where a session's configuration comes from.
#[derive(Clone, Debug)]
pub enum SessionSource {
    Torus(TorusKnotSpec),
    Knot(PolyKnot),
}

struct Shared {
    status: SessionStatus,
    log: Vec<LogEntry>,
    labeled: Vec<SnapshotMessage>,
}

enum DriverMsg {
    Control(Command, Sender<Result<u64>>),
    Subscribe(SyncSender<SnapshotMessage>),
    Close,
}

struct Session {
    tx: Option<Sender<DriverMsg>>,
    shared: Arc<Mutex<Shared>>,
    start: KnotFile,
    params: SimParams,
    thread: Option<JoinHandle<()>>,
}

/// Registry of live sessions.
#[derive(Default)]
pub struct Service {
    sessions: Mutex<BTreeMap<u64, Session>>,
    next_id: AtomicU64,
}

impl Service {
    pub fn new() -> Arc<Self> {
        Arc::new(Service::default())
    }

    /// Starts a paused session. Its record interval is
    /// `params.record_interval`.
    pub fn create_session(&self, source: SessionSource, params: SimParams) -> Result<u64> {
        let knot = match source {
            SessionSource::Torus(spec) => generate_torus(&spec)?,
            SessionSource::Knot(k) => k,
        };
        let start = KnotFile::from_knot(&knot, None);
        let state = SimState::new(knot, params)?;
        let id = self.next_id.fetch_add(1, Ordering::Relaxed) + 1;
        let shared = Arc::new(Mutex::new(Shared {
            status: SessionStatus {
                session: id,
                step: state.step_index(),
                mode: state.mode(),
                exponent: params.force_field.exponent(),
                running: false,
                stable: false,
                closed: false,
                subscribers: 0,
                error: None,
            },
            log: vec![],
            labeled: vec![],
        }));
        let (tx, rx) = mpsc::channel();
        let driver = Driver { id, state, shared: Arc::clone(&shared), subscribers: vec![], running: false, recent: vec![] };
        let thread = std::thread::Builder::new()
            .name(format!("session-{id}"))
            .spawn(move || driver.run(rx))
            .map_err(|e| KnotError::Transport(format!("cannot start session thread: {e}")))?;
        let session = Session { tx: Some(tx), shared, start, params, thread: Some(thread) };
        self.sessions.lock().expect("session registry poisoned").insert(id, session);
        Ok(id)
    }

    fn sender(&self, id: u64) -> Result<Sender<DriverMsg>> {
        let sessions = self.sessions.lock().expect("session registry poisoned");
        let session = sessions.get(&id).ok_or(KnotError::UnknownSession(id))?;
        session.tx.clone().ok_or(KnotError::SessionClosed(id))
    }

    /// Queues `command` and waits until the driver has applied it. Returns
    /// the step index at which it took effect.
    pub fn control(&self, id: u64, command: Command) -> Result<u64> {
        command.validate()?;
        let tx = self.sender(id)?;
        let (reply_tx, reply_rx) = mpsc::channel();
        tx.send(DriverMsg::Control(command, reply_tx)).map_err(|_| KnotError::SessionClosed(id))?;
        reply_rx.recv().map_err(|_| KnotError::SessionClosed(id))?
    }

    /// Stream of snapshots, starting with one of the current state.
    pub fn subscribe(&self, id: u64) -> Result<Receiver<SnapshotMessage>> {
        let tx = self.sender(id)?;
        let (sub_tx, sub_rx) = mpsc::sync_channel(SUBSCRIBER_BUFFER);
        tx.send(DriverMsg::Subscribe(sub_tx)).map_err(|_| KnotError::SessionClosed(id))?;
        Ok(sub_rx)
    }

    pub fn status(&self, id: u64) -> Result<SessionStatus> {
        let sessions = self.sessions.lock().expect("session registry poisoned");
        let session = sessions.get(&id).ok_or(KnotError::UnknownSession(id))?;
        let status = session.shared.lock().expect("session state poisoned").status.clone();
        Ok(status)
    }

    /// Snapshots taken with the `snapshot` command, in order.
    pub fn labeled_snapshots(&self, id: u64) -> Result<Vec<SnapshotMessage>> {
        let sessions = self.sessions.lock().expect("session registry poisoned");
        let session = sessions.get(&id).ok_or(KnotError::UnknownSession(id))?;
        let labeled = session.shared.lock().expect("session state poisoned").labeled.clone();
        Ok(labeled)
    }

    /// The command log up to the current step. Pauses the session first so
    /// that the final step is well defined.
    pub fn command_log(&self, id: u64) -> Result<CommandLog> {
        let closed = self.status(id)?.closed;
        if !closed {
            self.control(id, Command::Pause)?;
        }
        let sessions = self.sessions.lock().expect("session registry poisoned");
        let session = sessions.get(&id).ok_or(KnotError::UnknownSession(id))?;
        let shared = session.shared.lock().expect("session state poisoned");
        Ok(CommandLog {
            protocol: PROTOCOL_VERSION,
            start: session.start.clone(),
            params: session.params,
            entries: shared.log.clone(),
            final_step: shared.status.step,
        })
    }

    /// Stops the driver. Later commands fail with `SessionClosed`.
    pub fn close_session(&self, id: u64) -> Result<()> {
        let (tx, thread) = {
            let mut sessions = self.sessions.lock().expect("session registry poisoned");
            let session = sessions.get_mut(&id).ok_or(KnotError::UnknownSession(id))?;
            let tx = session.tx.take().ok_or(KnotError::SessionClosed(id))?;
            (tx, session.thread.take())
        };
        let _ = tx.send(DriverMsg::Close);
        if let Some(t) = thread {
            let _ = t.join();
        }
        Ok(())
    }

    pub fn session_ids(&self) -> Vec<u64> {
        self.sessions.lock().expect("session registry poisoned").keys().copied().collect()
    }
}

impl Drop for Service {
    fn drop(&mut self) {
        let sessions = std::mem::take(&mut *self.sessions.lock().unwrap_or_else(|e| e.into_inner()));
        for (_, mut s) in sessions {
            if let Some(tx) = s.tx.take() {
                let _ = tx.send(DriverMsg::Close);
            }
            if let Some(t) = s.thread.take() {
                let _ = t.join();
            }
        }
    }
}

struct Subscriber {
    tx: SyncSender<SnapshotMessage>,
    last_step: Option<u64>,
}

struct Driver {
    id: u64,
    state: SimState,
    shared: Arc<Mutex<Shared>>,
    subscribers: Vec<Subscriber>,
    running: bool,
    /// Trace records since the last state-changing command.
    recent: Vec<TraceRecord>,
}

impl Driver {
    fn run(mut self, rx: Receiver<DriverMsg>) {
        loop {
            loop {
                let msg = if self.running {
                    match rx.try_recv() {
                        Ok(m) => m,
                        Err(TryRecvError::Empty) => break,
                        Err(TryRecvError::Disconnected) => return self.finish(),
                    }
                } else {
                    match rx.recv() {
                        Ok(m) => m,
                        Err(_) => return self.finish(),
                    }
                };
                match msg {
                    DriverMsg::Control(cmd, reply) => {
                        let result = self.handle(cmd);
                        self.publish_status(None);
                        let _ = reply.send(result);
                    }
                    DriverMsg::Subscribe(tx) => {
                        let mut sub = Subscriber { tx, last_step: None };
                        if let Ok(snap) = self.snapshot() {
                            if deliver(&mut sub, &snap) {
                                self.subscribers.push(sub);
                            }
                        }
                    }
                    DriverMsg::Close => return self.finish(),
                }
                self.publish_status(None);
            }
            if let Err(e) = self.advance() {
                self.running = false;
                self.publish_status(Some(e.to_string()));
            }
        }
    }

    fn handle(&mut self, cmd: Command) -> Result<u64> {
        cmd.apply(&mut self.state)?;
        match &cmd {
            Command::Run => self.running = true,
            Command::Pause => self.running = false,
            Command::Snapshot { label } => {
                let mut snap = self.snapshot()?;
                snap.label = Some(label.clone());
                self.broadcast(&snap);
                self.shared.lock().expect("session state poisoned").labeled.push(snap);
            }
            _ => self.recent.clear(),
        }
        let step = self.state.step_index();
        self.shared.lock().expect("session state poisoned").log.push(LogEntry { step, command: cmd });
        Ok(step)
    }

    fn advance(&mut self) -> Result<()> {
        self.state.step()?;
        if self.state.step_index().is_multiple_of(self.state.params().record_interval) {
            let rec = self.state.record()?;
            self.recent.push(rec);
            let window = self.state.params().stability_window;
            if self.recent.len() > window {
                self.recent.drain(..self.recent.len() - window);
            }
            let snap = self.message(&rec);
            self.broadcast(&snap);
            self.publish_status(None);
        }
        Ok(())
    }

    fn stable(&self) -> bool {
        let p = self.state.params();
        is_stable(&self.recent, p.stability_window, p.stability_epsilon)
    }

    fn message(&self, rec: &TraceRecord) -> SnapshotMessage {
        SnapshotMessage::new(self.id, &self.state, rec, self.running, self.stable())
    }

    fn snapshot(&self) -> Result<SnapshotMessage> {
        Ok(self.message(&self.state.record()?))
    }

    fn broadcast(&mut self, snap: &SnapshotMessage) {
        self.subscribers.retain_mut(|s| deliver(s, snap));
    }

    fn publish_status(&self, error: Option<String>) {
        let mut shared = self.shared.lock().expect("session state poisoned");
        let st = &mut shared.status;
        st.step = self.state.step_index();
        st.mode = self.state.mode();
        st.exponent = self.state.params().force_field.exponent();
        st.running = self.running;
        st.stable = self.stable();
        st.subscribers = self.subscribers.len();
        if error.is_some() {
            st.error = error;
        }
    }

    fn finish(mut self) {
        self.running = false;
        self.subscribers.clear();
        self.publish_status(None);
        self.shared.lock().expect("session state poisoned").status.closed = true;
    }
}

/// Sends `snap` unless the subscriber already has a snapshot at this step
/// or later. Returns false once the subscriber is gone.
fn deliver(sub: &mut Subscriber, snap: &SnapshotMessage) -> bool {
    if sub.last_step.is_some_and(|s| s >= snap.step) {
        return true;
    }
    match sub.tx.try_send(snap.clone()) {
        Ok(()) => {
            sub.last_step = Some(snap.step);
            true
        }
        Err(TrySendError::Full(_)) => true,
        Err(TrySendError::Disconnected(_)) => false,
    }
}

/// `create` request body.
#[derive(Clone, Debug, Default, Deserialize)]
struct CreateRequest {
    p: Option<u32>,
    q: Option<u32>,
    n: Option<usize>,
    knot: Option<KnotFile>,
    d: Option<f64>,
    dt: Option<f64>,
    mode: Option<Mode>,
    record_interval: Option<u64>,
}

impl CreateRequest {
    fn source(&self) -> Result<SessionSource> {
        match (&self.knot, self.p, self.q) {
            (Some(k), None, None) => Ok(SessionSource::Knot(k.to_knot()?)),
            (None, Some(p), Some(q)) => Ok(SessionSource::Torus(TorusKnotSpec::new(p, q, self.n.unwrap_or(80)))),
            _ => Err(KnotError::invalid("create needs either a knot or p and q")),
        }
    }

    fn params(&self) -> Result<SimParams> {
        let mut params = SimParams::default();
        if let Some(d) = self.d {
            params.force_field = ForceField::with_exponent(d)?;
        }
        if let Some(dt) = self.dt {
            params.dt = dt;
        }
        if let Some(mode) = self.mode {
            params.mode = mode;
        }
        if let Some(r) = self.record_interval {
            params.record_interval = r;
        }
        params.validate()?;
        Ok(params)
    }
}

/// Handles one client request and returns the reply, if any. Subscribing
/// hands back the stream for the caller to forward.
fn dispatch(service: &Service, text: &str, streams: &mut Vec<(u64, Receiver<SnapshotMessage>)>) -> Value {
    let request: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => return error_message(None, &format!("malformed message: {e}")),
    };
    let id = request.get("id").cloned();
    let reply = (|| -> Result<Value> {
        let kind = request.get("type").and_then(Value::as_str).ok_or_else(|| KnotError::invalid("missing type"))?;
        let session = || {
            request
                .get("session")
                .and_then(Value::as_u64)
                .ok_or_else(|| KnotError::invalid(format!("{kind} needs a session id")))
        };
        match kind {
            "create" => {
                let body: CreateRequest = serde_json::from_value(request.clone())
                    .map_err(|e| KnotError::invalid(format!("create: {e}")))?;
                let session = service.create_session(body.source()?, body.params()?)?;
                Ok(json!({"type": "created", "session": session}))
            }
            "subscribe" => {
                let s = session()?;
                streams.push((s, service.subscribe(s)?));
                Ok(json!({"type": "subscribed", "session": s}))
            }
            "status" => {
                let status = service.status(session()?)?;
                let mut v = serde_json::to_value(status).expect("status serialization cannot fail");
                v["type"] = json!("status");
                Ok(v)
            }
            "export_log" => {
                let s = session()?;
                Ok(json!({"type": "log", "session": s, "log": service.command_log(s)?}))
            }
            "close" => {
                let s = session()?;
                service.close_session(s)?;
                Ok(json!({"type": "closed", "session": s}))
            }
            _ => {
                let command: Command = serde_json::from_value(request.clone())
                    .map_err(|e| KnotError::invalid(format!("unknown or malformed command {kind:?}: {e}")))?;
                let s = session()?;
                let step = service.control(s, command)?;
                Ok(json!({"type": "ack", "session": s, "command": kind, "step": step}))
            }
        }
    })();
    let mut reply = reply.unwrap_or_else(|e| error_message(None, &e.to_string()));
    if let Some(id) = id {
        reply["id"] = id;
    }
    reply
}

fn error_message(id: Option<Value>, message: &str) -> Value {
    let mut v = json!({"type": "error", "message": message});
    if let Some(id) = id {
        v["id"] = id;
    }
    v
}

pub fn hello() -> Value {
    json!({"type": "hello", "protocol": PROTOCOL_VERSION, "server": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION")})
}

/// Websocket front end of a [`Service`].
pub struct Server {
    listener: TcpListener,
    service: Arc<Service>,
}

impl Server {
    pub fn bind(addr: impl ToSocketAddrs, service: Arc<Service>) -> Result<Self> {
        let listener = TcpListener::bind(addr).map_err(|e| KnotError::Transport(format!("cannot bind: {e}")))?;
        Ok(Server { listener, service })
    }

    pub fn local_addr(&self) -> Result<SocketAddr> {
        self.listener.local_addr().map_err(|e| KnotError::Transport(e.to_string()))
    }

    /// Accepts connections until the listener fails, one thread each.
    pub fn run(self) -> Result<()> {
        for stream in self.listener.incoming() {
            let stream = stream.map_err(|e| KnotError::Transport(format!("accept: {e}")))?;
            let service = Arc::clone(&self.service);
            std::thread::spawn(move || {
                let _ = serve_connection(stream, &service);
            });
        }
        Ok(())
    }

    /// [`Server::run`] on a background thread.
    pub fn spawn(self) -> Result<(SocketAddr, JoinHandle<Result<()>>)> {
        let addr = self.local_addr()?;
        Ok((addr, std::thread::spawn(move || self.run())))
    }
}

fn transport(e: tungstenite::Error) -> KnotError {
    KnotError::Transport(e.to_string())
}

fn send(ws: &mut WebSocket<TcpStream>, v: &Value) -> Result<()> {
    ws.send(Message::text(v.to_string())).map_err(transport)
}

fn serve_connection(stream: TcpStream, service: &Service) -> Result<()> {
    let mut ws = tungstenite::accept(stream).map_err(|e| KnotError::Transport(e.to_string()))?;
    ws.get_ref()
        .set_read_timeout(Some(Duration::from_millis(5)))
        .map_err(|e| KnotError::Transport(e.to_string()))?;
    send(&mut ws, &hello())?;
    let mut streams: Vec<(u64, Receiver<SnapshotMessage>)> = vec![];
    loop {
        match ws.read() {
            Ok(Message::Text(text)) => {
                let reply = dispatch(service, text.as_str(), &mut streams);
                send(&mut ws, &reply)?;
            }
            Ok(Message::Close(_)) => break,
            Ok(_) => {}
            Err(tungstenite::Error::Io(e)) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {}
            Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => break,
            Err(e) => return Err(transport(e)),
        }
        let mut open = Vec::with_capacity(streams.len());
        for (session, rx) in streams.drain(..) {
            let mut alive = true;
            loop {
                match rx.try_recv() {
                    Ok(snap) => send(&mut ws, &snap.to_json())?,
                    Err(TryRecvError::Empty) => break,
                    Err(TryRecvError::Disconnected) => {
                        send(&mut ws, &json!({"type": "closed", "session": session}))?;
                        alive = false;
                        break;
                    }
                }
            }
            if alive {
                open.push((session, rx));
            }
        }
        streams = open;
    }
    Ok(())
}

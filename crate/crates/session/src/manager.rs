//! Session registry and per-session tick tasks.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use tokio::sync::mpsc;
use tokio::time::{interval_at, Instant, MissedTickBehavior};

use pursuit_core::episode::EpisodeConfig;
use pursuit_core::hji::ValueFunction;

use crate::error::SessionError;
use crate::protocol::{Clock, PursuerChoice, ServerMessage, SessionId};
use crate::session::Session;

pub const DEFAULT_CAPACITY: usize = 16;
pub const DEFAULT_TICK_MS: u64 = 200;
pub const MIN_TICK_MS: u64 = 10;
pub const MAX_TICK_MS: u64 = 10_000;

/// Where a session's responses go: the owning connection's outgoing queue.
pub type Outbox = mpsc::UnboundedSender<ServerMessage>;

#[derive(Debug, Clone)]
pub struct ManagerConfig {
    /// Maximum number of concurrently running sessions.
    pub capacity: usize,
    pub default_tick_ms: u64,
    /// Episode settings used when a `create` carries no `config`.
    pub episode: EpisodeConfig,
    /// Needed by sessions with a game pursuer.
    pub value: Option<Arc<ValueFunction>>,
}

impl Default for ManagerConfig {
    fn default() -> Self {
        Self {
            capacity: DEFAULT_CAPACITY,
            default_tick_ms: DEFAULT_TICK_MS,
            episode: EpisodeConfig::default(),
            value: None,
        }
    }
}

/// Parameters of a `create` request.
#[derive(Debug, Clone)]
pub struct CreateRequest {
    pub pursuer: PursuerChoice,
    pub seed: Option<u64>,
    pub tick_ms: Option<u64>,
    pub clock: Clock,
    pub config: Option<EpisodeConfig>,
}

#[derive(Debug)]
enum Command {
    Control { v: f64, omega: f64, reply: Outbox },
    Step { reply: Outbox },
}

#[derive(Debug)]
enum Slot {
    Running(mpsc::UnboundedSender<Command>),
    Ended,
}

#[derive(Debug)]
struct Inner {
    cfg: ManagerConfig,
    next_id: AtomicU64,
    slots: Mutex<HashMap<SessionId, Slot>>,
}

/// Cheaply cloneable handle to the registry shared by all connections.
#[derive(Debug, Clone)]
pub struct SessionManager {
    inner: Arc<Inner>,
}

impl SessionManager {
    pub fn new(cfg: ManagerConfig) -> Self {
        Self {
            inner: Arc::new(Inner {
                cfg,
                next_id: AtomicU64::new(1),
                slots: Mutex::new(HashMap::new()),
            }),
        }
    }

    pub fn config(&self) -> &ManagerConfig {
        &self.inner.cfg
    }

    pub fn running(&self) -> usize {
        let slots = self.inner.slots.lock().expect("session registry poisoned");
        slots.values().filter(|s| matches!(s, Slot::Running(_))).count()
    }

    /// Starts a session. `created` and the tick-0 frame are queued on `outbox`
    /// before this returns; later frames follow on the session's clock.
    /// Must be called from within a tokio runtime.
    pub fn create(&self, req: CreateRequest, outbox: Outbox) -> Result<SessionId, SessionError> {
        let cfg = &self.inner.cfg;
        let spec = req.pursuer.resolve().map_err(SessionError::Invalid)?;
        let tick_ms = req.tick_ms.unwrap_or(cfg.default_tick_ms);
        if !(MIN_TICK_MS..=MAX_TICK_MS).contains(&tick_ms) {
            return Err(SessionError::Invalid(format!(
                "tick_ms must lie in [{MIN_TICK_MS}, {MAX_TICK_MS}], got {tick_ms}"
            )));
        }

        let mut slots = self.inner.slots.lock().expect("session registry poisoned");
        if slots.values().filter(|s| matches!(s, Slot::Running(_))).count() >= cfg.capacity {
            return Err(SessionError::CapacityExceeded(cfg.capacity));
        }
        let id = self.inner.next_id.fetch_add(1, Ordering::Relaxed);
        let mut episode = req.config.unwrap_or_else(|| cfg.episode.clone());
        episode.seed = req.seed.unwrap_or(episode.seed.wrapping_add(id));
        let session = Session::new(id, &spec, &episode, cfg.value.as_ref())?;

        let announce = ServerMessage::Created {
            session: id,
            tick_ms,
            clock: req.clock,
            horizon: episode.horizon,
            dt: episode.dt,
            capture_radius: episode.capture_radius,
            evader_bounds: episode.evader_bounds,
        };
        let _ = outbox.send(announce);
        let _ = outbox.send(ServerMessage::Frame(session.frame()));

        let (tx, rx) = mpsc::unbounded_channel();
        slots.insert(id, Slot::Running(tx));
        drop(slots);
        log::info!("session {id}: created ({}, {:?} clock)", spec.name(), req.clock);

        let this = self.clone();
        let period = Duration::from_millis(tick_ms);
        tokio::spawn(async move {
            run(session, req.clock, period, rx, outbox).await;
            this.mark_ended(id);
        });
        Ok(id)
    }

    /// Forwards a control to a running session; the session replies with `ack`.
    pub fn control(&self, id: SessionId, v: f64, omega: f64, reply: Outbox) -> Result<(), SessionError> {
        self.send(id, Command::Control { v, omega, reply })
    }

    /// Advances a manual-clock session by one tick.
    pub fn step(&self, id: SessionId, reply: Outbox) -> Result<(), SessionError> {
        self.send(id, Command::Step { reply })
    }

    fn send(&self, id: SessionId, cmd: Command) -> Result<(), SessionError> {
        let slots = self.inner.slots.lock().expect("session registry poisoned");
        match slots.get(&id) {
            None => Err(SessionError::Unknown(id)),
            Some(Slot::Ended) => Err(SessionError::Ended(id)),
            Some(Slot::Running(tx)) => tx.send(cmd).map_err(|_| SessionError::Ended(id)),
        }
    }

    fn mark_ended(&self, id: SessionId) {
        let mut slots = self.inner.slots.lock().expect("session registry poisoned");
        slots.insert(id, Slot::Ended);
        log::info!("session {id}: ended");
    }
}

/// Drives one session until it terminates or its connection goes away.
async fn run(
    mut session: Session,
    clock: Clock,
    period: Duration,
    mut commands: mpsc::UnboundedReceiver<Command>,
    outbox: Outbox,
) {
    let id = session.id();
    if session.is_done() {
        let _ = outbox.send(session.end_message());
        return;
    }
    let mut timer = interval_at(Instant::now() + period, period);
    timer.set_missed_tick_behavior(MissedTickBehavior::Delay);
    loop {
        let realtime = clock == Clock::Realtime;
        tokio::select! {
            // the owning connection went away; free the slot
            _ = outbox.closed() => return,
            cmd = commands.recv() => match cmd {
                None => return,
                Some(Command::Control { v, omega, reply }) => {
                    let msg = match session.submit(v, omega) {
                        Ok(u) => ServerMessage::Ack { session: id, v: u.v, omega: u.omega },
                        Err(e) => e.to_message(Some(id)),
                    };
                    let _ = reply.send(msg);
                }
                Some(Command::Step { reply }) => {
                    if realtime {
                        let err = SessionError::Invalid("step is only accepted by manual-clock sessions".into());
                        let _ = reply.send(err.to_message(Some(id)));
                    } else if !advance(&mut session, &outbox) {
                        return;
                    }
                }
            },
            _ = timer.tick(), if realtime => {
                if !advance(&mut session, &outbox) {
                    return;
                }
            }
        }
    }
}

/// Ticks once and publishes the frame; returns false once the session is over.
fn advance(session: &mut Session, outbox: &Outbox) -> bool {
    match session.tick() {
        Ok(frame) => {
            if outbox.send(ServerMessage::Frame(frame)).is_err() {
                return false;
            }
        }
        Err(e) => {
            let _ = outbox.send(e.to_message(Some(session.id())));
            return false;
        }
    }
    if session.is_done() {
        let _ = outbox.send(session.end_message());
        return false;
    }
    true
}

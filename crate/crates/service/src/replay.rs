//! The replay driver: the single owner of the media clock, the playback
//! cursor and the estimator. Client connections talk to it through one
//! command queue, so ROI changes never race with estimation.

use std::sync::Arc;
use std::time::Duration;

use axum::extract::ws::Message;
use thermsense_core::codec::encode_timestamp;
use thermsense_core::estimator::{EstimatorEvent, IncrementalEstimator, Roi};
use thermsense_core::pipeline::PipelineParams;
use thermsense_core::rvs::RvsPlan;
use thermsense_core::{Error as CoreError, ThermalSequence};
use tokio::sync::mpsc;
use tokio::time::{sleep_until, Instant};

use crate::protocol::{codes, encode_frame, Channel, ClientMessage, ServerMessage};

pub type ClientId = u64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplayConfig {
    pub params: PipelineParams,
    /// Media seconds per wall second; 0 plays as fast as clients can read.
    pub speed: f64,
    /// Start playing when the first client connects.
    pub autoplay: bool,
    /// Outbound queue length per client. At a positive speed a client whose
    /// queue overflows is disconnected rather than shown a gap.
    pub client_buffer: usize,
}

impl Default for ReplayConfig {
    fn default() -> Self {
        Self {
            params: PipelineParams::default(),
            speed: 1.0,
            autoplay: true,
            client_buffer: 1024,
        }
    }
}

#[derive(Debug)]
pub enum Command {
    Join { id: ClientId, tx: mpsc::Sender<Message> },
    Leave { id: ClientId },
    Client { id: ClientId, msg: ClientMessage },
    Malformed { id: ClientId, detail: String },
}

#[derive(Debug, Default)]
struct Counters {
    frame: u32,
    signal: u64,
    rate: u64,
    rvs: u64,
    control: u64,
}

impl Counters {
    fn channel(&self, c: Channel) -> u64 {
        match c {
            Channel::Frame => self.frame as u64,
            Channel::Signal => self.signal,
            Channel::Rate => self.rate,
            Channel::Rvs => self.rvs,
        }
    }

    fn bump(&mut self, c: Channel) {
        match c {
            Channel::Frame => self.frame = self.frame.wrapping_add(1),
            Channel::Signal => self.signal += 1,
            Channel::Rate => self.rate += 1,
            Channel::Rvs => self.rvs += 1,
        }
    }
}

pub struct Driver {
    seq: Arc<ThermalSequence>,
    cfg: ReplayConfig,
    clients: Vec<(ClientId, mpsc::Sender<Message>)>,
    cursor: usize,
    playing: bool,
    ended: bool,
    joined_once: bool,
    roi: Option<Roi>,
    estimator: Option<IncrementalEstimator>,
    counters: Counters,
    /// Wall instant and media time at which the current run started.
    anchor: Option<(Instant, f64)>,
    rvs_band: (f64, f64),
}

impl Driver {
    pub fn new(seq: Arc<ThermalSequence>, cfg: ReplayConfig) -> Result<Self, CoreError> {
        if !(cfg.speed.is_finite() && cfg.speed >= 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "replay speed must be non-negative, got {}",
                cfg.speed
            )));
        }
        cfg.params.validate()?;
        let freqs = RvsPlan::new(cfg.params.rvs, cfg.params.fs)?.freqs();
        let rvs_band = (
            freqs.first().copied().unwrap_or(cfg.params.rvs.f_lo),
            freqs.last().copied().unwrap_or(cfg.params.rvs.f_hi),
        );
        Ok(Self {
            seq,
            cfg,
            clients: Vec::new(),
            cursor: 0,
            playing: false,
            ended: false,
            joined_once: false,
            roi: None,
            estimator: None,
            counters: Counters::default(),
            anchor: None,
            rvs_band,
        })
    }

    /// Runs until every command sender is dropped.
    pub async fn run(mut self, mut rx: mpsc::Receiver<Command>) {
        loop {
            if self.playing && self.cursor < self.seq.len() {
                let due = self.due(self.cursor);
                tokio::select! {
                    biased;
                    cmd = rx.recv() => match cmd {
                        Some(cmd) => self.handle(cmd).await,
                        None => break,
                    },
                    _ = sleep_until(due) => self.step().await,
                }
            } else {
                match rx.recv().await {
                    Some(cmd) => self.handle(cmd).await,
                    None => break,
                }
            }
        }
    }

    fn media_time(&self, i: usize) -> f64 {
        self.seq.frames()[i].timestamp()
    }

    /// Current position on the media clock.
    fn now_media(&self) -> f64 {
        match self.seq.frames().get(self.cursor) {
            Some(f) => f.timestamp(),
            None => self.seq.frames().last().map_or(0.0, |f| f.timestamp()),
        }
    }

    fn due(&mut self, i: usize) -> Instant {
        if self.cfg.speed == 0.0 {
            return Instant::now();
        }
        let (wall, media) = *self.anchor.get_or_insert_with(|| (Instant::now(), self.seq.frames()[i].timestamp()));
        let ahead = ((self.media_time(i) - media) / self.cfg.speed).max(0.0);
        wall + Duration::from_secs_f64(ahead)
    }

    async fn handle(&mut self, cmd: Command) {
        match cmd {
            Command::Join { id, tx } => {
                tracing::info!(client = id, "client joined");
                self.clients.push((id, tx));
                if !self.joined_once {
                    self.joined_once = true;
                    if self.cfg.autoplay {
                        self.start();
                    }
                }
            }
            Command::Leave { id } => {
                tracing::info!(client = id, "client left");
                self.clients.retain(|(c, _)| *c != id);
            }
            Command::Malformed { id, detail } => {
                self.unicast(id, ServerMessage::error(codes::MALFORMED_MESSAGE, detail)).await;
            }
            Command::Client { id, msg } => match msg {
                ClientMessage::SetRoi { x, y, w, h } => self.set_roi(id, x, y, w, h).await,
                ClientMessage::Play => self.start(),
                ClientMessage::Pause => {
                    self.playing = false;
                    self.anchor = None;
                }
                ClientMessage::Seek { t_s } => self.seek(id, t_s).await,
            },
        }
    }

    fn start(&mut self) {
        if !self.playing && self.cursor < self.seq.len() {
            self.playing = true;
            self.anchor = None;
        }
    }

    async fn set_roi(&mut self, id: ClientId, x: i64, y: i64, w: i64, h: i64) {
        let (width, height) = (self.seq.meta().width, self.seq.meta().height);
        let fits = |v: i64| u32::try_from(v).ok();
        let (Some(x), Some(y), Some(w), Some(h)) = (fits(x), fits(y), fits(w), fits(h)) else {
            let detail = format!("ROI {x},{y},{w},{h} lies outside the {width}x{height} frame");
            self.unicast(id, ServerMessage::error(codes::ROI_OUT_OF_BOUNDS, detail)).await;
            return;
        };
        let roi = match Roi::new(x, y, w, h) {
            Ok(r) => r,
            Err(e) => {
                self.unicast(id, ServerMessage::error(codes::INVALID_ROI, e.to_string())).await;
                return;
            }
        };
        if let Err(e) = roi.check_bounds(width, height) {
            self.unicast(id, ServerMessage::error(codes::ROI_OUT_OF_BOUNDS, e.to_string())).await;
            return;
        }
        self.roi = Some(roi);
        self.reset_estimator().await;
        let ack = ServerMessage::RoiAck {
            seq: self.counters.control,
            t_s: self.now_media(),
            x,
            y,
            w,
            h,
        };
        self.counters.control += 1;
        self.broadcast(Message::text(ack.to_json())).await;
    }

    async fn seek(&mut self, id: ClientId, t_s: f64) {
        if !(t_s.is_finite() && t_s >= 0.0) {
            self.unicast(id, ServerMessage::error(codes::INVALID_SEEK, format!("cannot seek to {t_s}")))
                .await;
            return;
        }
        self.cursor = self.seq.frames().partition_point(|f| f.timestamp() < t_s);
        self.anchor = None;
        self.reset_estimator().await;
        if self.cursor >= self.seq.len() {
            self.finish().await;
        } else {
            self.ended = false;
        }
    }

    /// A fresh estimator for the current ROI; the signal restarts at the next frame.
    async fn reset_estimator(&mut self) {
        self.estimator = None;
        let Some(roi) = self.roi else { return };
        match IncrementalEstimator::new(roi, self.cfg.params, self.seq.meta().emissivity) {
            Ok(e) => self.estimator = Some(e),
            Err(e) => {
                let msg = ServerMessage::error(codes::ESTIMATOR_FAILED, e.to_string());
                self.broadcast(Message::text(msg.to_json())).await;
            }
        }
    }

    async fn step(&mut self) {
        let seq = Arc::clone(&self.seq);
        let frame = &seq.frames()[self.cursor];
        let bytes = encode_frame(self.counters.frame, encode_timestamp(frame.timestamp()), frame);
        self.counters.bump(Channel::Frame);
        let events = match self.estimator.as_mut().map(|e| e.push_frame(frame)) {
            None => Vec::new(),
            Some(Ok(events)) => events,
            Some(Err(e)) => {
                tracing::warn!(error = %e, "estimator stopped");
                self.estimator = None;
                let msg = ServerMessage::error(codes::ESTIMATOR_FAILED, e.to_string());
                self.broadcast(Message::text(msg.to_json())).await;
                Vec::new()
            }
        };
        self.broadcast(Message::binary(bytes)).await;
        for event in events {
            let msg = self.event_message(event);
            self.broadcast(Message::text(msg.to_json())).await;
        }
        self.cursor += 1;
        if self.cursor == self.seq.len() {
            self.finish().await;
        }
    }

    fn event_message(&mut self, event: EstimatorEvent) -> ServerMessage {
        match event {
            EstimatorEvent::Signal { t_s, value } => {
                let seq = self.counters.channel(Channel::Signal);
                self.counters.bump(Channel::Signal);
                ServerMessage::Signal { seq, t_s, value }
            }
            EstimatorEvent::Rate(r) => {
                let seq = self.counters.channel(Channel::Rate);
                self.counters.bump(Channel::Rate);
                ServerMessage::Rate {
                    seq,
                    t_center_s: r.t_center,
                    bpm: r.bpm,
                    confidence: r.confidence,
                }
            }
            EstimatorEvent::RvsColumn(c) => {
                let seq = self.counters.channel(Channel::Rvs);
                self.counters.bump(Channel::Rvs);
                ServerMessage::RvsCol {
                    seq,
                    t_s: c.t_s,
                    f_lo_hz: self.rvs_band.0,
                    f_hi_hz: self.rvs_band.1,
                    mags: c.normalized,
                }
            }
        }
    }

    async fn finish(&mut self) {
        self.playing = false;
        self.anchor = None;
        if self.ended {
            return;
        }
        self.ended = true;
        let t_s = self.now_media();
        for channel in Channel::ALL {
            let msg = ServerMessage::End {
                channel,
                seq: self.counters.channel(channel),
                t_s,
            };
            self.counters.bump(channel);
            self.broadcast(Message::text(msg.to_json())).await;
        }
    }

    async fn unicast(&mut self, id: ClientId, msg: ServerMessage) {
        let Some(pos) = self.clients.iter().position(|(c, _)| *c == id) else { return };
        if self.clients[pos].1.send(Message::text(msg.to_json())).await.is_err() {
            self.clients.remove(pos);
        }
    }

    async fn broadcast(&mut self, msg: Message) {
        let wait = self.cfg.speed == 0.0;
        let mut dropped = Vec::new();
        for (id, tx) in &self.clients {
            let delivered = if wait {
                tx.send(msg.clone()).await.is_ok()
            } else {
                tx.try_send(msg.clone()).is_ok()
            };
            if !delivered {
                dropped.push(*id);
            }
        }
        if !dropped.is_empty() {
            tracing::warn!(clients = ?dropped, "dropping clients that closed or fell behind");
            self.clients.retain(|(id, _)| !dropped.contains(id));
        }
    }
}

#![allow(dead_code)]

use std::net::SocketAddr;
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use thermsense_core::codec::{decode_sequence, encode_sequence};
use thermsense_core::synth::{synthesize_sequence, RateProfile, SynthConfig};
use thermsense_core::ThermalSequence;
use thermsense_service::protocol::{decode_frame, Channel, ClientMessage, FrameMessage, ServerMessage};
use thermsense_service::replay::ReplayConfig;
use thermsense_service::server::{serve, ServeConfig, WS_PATH};
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{MaybeTlsStream, WebSocketStream};

#[derive(Debug, Clone, PartialEq)]
pub enum Received {
    Frame(FrameMessage),
    Json(ServerMessage),
}

impl Received {
    pub fn json(&self) -> Option<&ServerMessage> {
        match self {
            Received::Json(m) => Some(m),
            Received::Frame(_) => None,
        }
    }
}

/// The synthesized sequence as it would come back from a file.
pub fn synth(bpm: f64, duration: f64, seed: u64) -> (SynthConfig, ThermalSequence) {
    let cfg = SynthConfig {
        duration,
        rate_profile: RateProfile::Constant { bpm },
        seed,
        ..SynthConfig::default()
    };
    let (seq, _) = synthesize_sequence(&cfg).unwrap();
    (cfg, decode_sequence(&encode_sequence(&seq).unwrap()).unwrap())
}

pub async fn start(seq: ThermalSequence, replay: ReplayConfig) -> SocketAddr {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let cfg = ServeConfig { replay, ui_dir: None };
    tokio::spawn(serve(listener, seq, cfg, std::future::pending()));
    addr
}

pub struct Client {
    ws: WebSocketStream<MaybeTlsStream<TcpStream>>,
}

impl Client {
    pub async fn connect(addr: SocketAddr) -> Self {
        let (ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}{WS_PATH}")).await.unwrap();
        Self { ws }
    }

    pub async fn send(&mut self, msg: &ClientMessage) {
        self.send_text(&serde_json::to_string(msg).unwrap()).await;
    }

    pub async fn send_text(&mut self, text: &str) {
        self.ws.send(Message::text(text)).await.unwrap();
    }

    pub async fn send_binary(&mut self, bytes: Vec<u8>) {
        self.ws.send(Message::binary(bytes)).await.unwrap();
    }

    /// Next protocol message, or `None` on close or after `wait` of silence.
    pub async fn recv_within(&mut self, wait: Duration) -> Option<Received> {
        loop {
            let msg = tokio::time::timeout(wait, self.ws.next()).await.ok()??.ok()?;
            match msg {
                Message::Binary(b) => return Some(Received::Frame(decode_frame(&b).unwrap())),
                Message::Text(t) => return Some(Received::Json(serde_json::from_str(t.as_str()).unwrap())),
                Message::Close(_) => return None,
                _ => continue,
            }
        }
    }

    pub async fn recv(&mut self) -> Received {
        self.recv_within(Duration::from_secs(60)).await.expect("server went quiet")
    }

    /// Reads until the first JSON message satisfying `pred`, returning it and everything before.
    pub async fn until(&mut self, pred: impl Fn(&ServerMessage) -> bool) -> (Vec<Received>, ServerMessage) {
        let mut seen = Vec::new();
        loop {
            match self.recv().await {
                Received::Json(m) if pred(&m) => return (seen, m),
                other => seen.push(other),
            }
        }
    }

    /// Reads until an `end` has arrived on every channel.
    pub async fn until_ended(&mut self) -> Vec<Received> {
        let mut seen = Vec::new();
        let mut ended = Vec::new();
        while ended.len() < Channel::ALL.len() {
            let m = self.recv().await;
            if let Received::Json(ServerMessage::End { channel, .. }) = &m {
                ended.push(*channel);
            }
            seen.push(m);
        }
        seen
    }
}

pub fn nostril(cfg: &SynthConfig) -> ClientMessage {
    let r = cfg.nostril_roi;
    ClientMessage::SetRoi {
        x: r.x as i64,
        y: r.y as i64,
        w: r.w as i64,
        h: r.h as i64,
    }
}

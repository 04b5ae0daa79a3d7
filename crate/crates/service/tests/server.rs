mod common;

use std::time::{Duration, Instant};

use common::{nostril, start, synth, Client, Received};
use thermsense_service::protocol::{Channel, ClientMessage, ServerMessage};
use thermsense_service::replay::ReplayConfig;

fn fast() -> ReplayConfig {
    ReplayConfig {
        speed: 0.0,
        ..ReplayConfig::default()
    }
}

fn paused_fast() -> ReplayConfig {
    ReplayConfig {
        autoplay: false,
        ..fast()
    }
}

fn channel_seqs(msgs: &[Received], channel: Channel) -> Vec<u64> {
    msgs.iter()
        .filter_map(|m| match (m, channel) {
            (Received::Frame(f), Channel::Frame) => Some(f.seq as u64),
            (Received::Json(ServerMessage::Signal { seq, .. }), Channel::Signal)
            | (Received::Json(ServerMessage::Rate { seq, .. }), Channel::Rate)
            | (Received::Json(ServerMessage::RvsCol { seq, .. }), Channel::Rvs) => Some(*seq),
            (Received::Json(ServerMessage::End { channel: c, seq, .. }), _) if *c == channel => Some(*seq),
            _ => None,
        })
        .collect()
}

#[tokio::test]
async fn without_roi_only_frames_are_sent() {
    let (_, seq) = synth(15.0, 40.0, 1);
    let n = seq.len();
    let addr = start(seq, fast()).await;
    let mut c = Client::connect(addr).await;
    let msgs = c.until_ended().await;
    let frames = msgs.iter().filter(|m| matches!(m, Received::Frame(_))).count();
    assert_eq!(frames, n);
    for m in &msgs {
        assert!(matches!(m, Received::Frame(_) | Received::Json(ServerMessage::End { .. })), "{m:?}");
    }
}

#[tokio::test]
async fn first_rate_after_thirty_media_seconds() {
    let (cfg, seq) = synth(15.0, 50.0, 2);
    let addr = start(seq, paused_fast()).await;
    let mut c = Client::connect(addr).await;
    c.send(&ClientMessage::Seek { t_s: 5.0 }).await;
    c.send(&nostril(&cfg)).await;
    let (_, ack) = c.until(|m| matches!(m, ServerMessage::RoiAck { .. })).await;
    let ServerMessage::RoiAck { t_s: t_roi, .. } = ack else { unreachable!() };
    assert!((t_roi - 5.0).abs() < 0.2);
    c.send(&ClientMessage::Play).await;
    let (before, rate) = c.until(|m| matches!(m, ServerMessage::Rate { .. })).await;
    let last_frame_us = before
        .iter()
        .rev()
        .find_map(|m| match m {
            Received::Frame(f) => Some(f.timestamp_us),
            _ => None,
        })
        .unwrap();
    let elapsed = last_frame_us as f64 / 1e6 - t_roi;
    // 270 uniform samples at 9 Hz cover 30 s; the last one lands 29.9 s after the first.
    assert!((29.6..=30.3).contains(&elapsed), "first rate after {elapsed} s");
    let ServerMessage::Rate { bpm, seq, .. } = rate else { unreachable!() };
    assert_eq!(seq, 0);
    assert!((bpm - 15.0).abs() <= 1.0, "{bpm}");
}

#[tokio::test]
async fn out_of_bounds_roi_is_rejected_without_state_change() {
    let (_, seq) = synth(15.0, 35.0, 3);
    let addr = start(seq, paused_fast()).await;
    let mut c = Client::connect(addr).await;
    for (x, y, w, h) in [(150, 0, 20, 8), (0, 115, 4, 8), (-1, 0, 4, 4), (0, 0, 1, 1)] {
        c.send(&ClientMessage::SetRoi { x, y, w, h }).await;
        match c.recv().await {
            Received::Json(ServerMessage::Error { code, detail }) => {
                let want = if w * h < 4 { "invalid_roi" } else { "roi_out_of_bounds" };
                assert_eq!(code, want, "{detail}");
            }
            other => panic!("{other:?}"),
        }
    }
    c.send(&ClientMessage::Play).await;
    for m in c.until_ended().await {
        assert!(matches!(m, Received::Frame(_) | Received::Json(ServerMessage::End { .. })), "{m:?}");
    }
}

#[tokio::test]
async fn malformed_messages_keep_the_connection() {
    let (cfg, seq) = synth(15.0, 35.0, 4);
    let addr = start(seq, paused_fast()).await;
    let mut c = Client::connect(addr).await;
    c.send_text("not json").await;
    c.send_text(r#"{"type":"set_roi","x":"a"}"#).await;
    c.send_binary(vec![1, 2, 3]).await;
    c.send_text(r#"{"type":"seek","t_s":-4}"#).await;
    let mut codes = Vec::new();
    for _ in 0..4 {
        match c.recv().await {
            Received::Json(ServerMessage::Error { code, .. }) => codes.push(code),
            other => panic!("{other:?}"),
        }
    }
    assert_eq!(codes, ["malformed_message", "malformed_message", "malformed_message", "invalid_seek"]);
    c.send(&nostril(&cfg)).await;
    assert!(matches!(c.recv().await, Received::Json(ServerMessage::RoiAck { x: 70, y: 72, w: 20, h: 8, .. })));
}

#[tokio::test]
async fn sequence_numbers_are_gapless_and_end_is_last() {
    let (cfg, seq) = synth(15.0, 40.0, 5);
    let addr = start(seq, paused_fast()).await;
    let mut c = Client::connect(addr).await;
    c.send(&nostril(&cfg)).await;
    c.send(&ClientMessage::Play).await;
    let mut msgs = c.until_ended().await;
    // Anything arriving later would be a message after End.
    assert!(c.recv_within(Duration::from_millis(300)).await.is_none());
    msgs.retain(|m| !matches!(m, Received::Json(ServerMessage::RoiAck { .. })));
    for channel in Channel::ALL {
        let seqs = channel_seqs(&msgs, channel);
        assert!(seqs.len() > 1, "{channel:?}");
        assert_eq!(seqs, (0..seqs.len() as u64).collect::<Vec<_>>(), "{channel:?}");
        let last = msgs
            .iter()
            .rposition(|m| !channel_seqs(std::slice::from_ref(m), channel).is_empty())
            .unwrap();
        assert!(matches!(&msgs[last], Received::Json(ServerMessage::End { channel: c, .. }) if *c == channel));
    }
}

#[tokio::test]
async fn roi_ack_is_broadcast_and_latest_roi_wins() {
    let (cfg, seq) = synth(15.0, 35.0, 6);
    let addr = start(seq, paused_fast()).await;
    let mut a = Client::connect(addr).await;
    let mut b = Client::connect(addr).await;
    a.send(&ClientMessage::SetRoi { x: 0, y: 0, w: 4, h: 4 }).await;
    b.send(&nostril(&cfg)).await;
    for c in [&mut a, &mut b] {
        assert!(matches!(c.recv().await, Received::Json(ServerMessage::RoiAck { seq: 0, x: 0, .. })));
        assert!(matches!(c.recv().await, Received::Json(ServerMessage::RoiAck { seq: 1, x: 70, .. })));
    }
}

#[tokio::test]
async fn seek_restarts_the_estimator() {
    let (cfg, seq) = synth(15.0, 40.0, 7);
    let addr = start(seq, paused_fast()).await;
    let mut c = Client::connect(addr).await;
    c.send(&nostril(&cfg)).await;
    c.until(|m| matches!(m, ServerMessage::RoiAck { .. })).await;
    c.send(&ClientMessage::Seek { t_s: 20.0 }).await;
    c.send(&ClientMessage::Play).await;
    let msgs = c.until_ended().await;
    let first_signal = msgs
        .iter()
        .find_map(|m| match m.json() {
            Some(ServerMessage::Signal { t_s, seq, .. }) => Some((*t_s, *seq)),
            _ => None,
        })
        .unwrap();
    assert_eq!(first_signal.1, 0);
    assert!((first_signal.0 - 20.0).abs() < 0.2);
    // 20 s of signal is shorter than one rate window.
    assert!(!msgs.iter().any(|m| matches!(m.json(), Some(ServerMessage::Rate { .. }))));
}

#[tokio::test]
async fn real_time_replay_follows_the_media_clock() {
    let (_, seq) = synth(15.0, 4.0, 8);
    let addr = start(seq, ReplayConfig::default()).await;
    let mut c = Client::connect(addr).await;
    let mut arrivals = Vec::new();
    loop {
        match c.recv().await {
            Received::Frame(f) => arrivals.push((Instant::now(), f.timestamp_us)),
            Received::Json(ServerMessage::End { .. }) => break,
            _ => {}
        }
    }
    let (wall0, media0) = arrivals[0];
    let worst = arrivals
        .iter()
        .map(|(w, m)| {
            let wall = w.duration_since(wall0).as_secs_f64();
            let media = (m - media0) as f64 / 1e6;
            (wall - media).abs()
        })
        .fold(0.0, f64::max);
    assert!(worst <= 0.020, "worst deviation {worst} s");
    assert_eq!(arrivals.len(), 36);
}

#[tokio::test]
async fn double_speed_halves_wall_time() {
    let (_, seq) = synth(15.0, 4.0, 9);
    let addr = start(
        seq,
        ReplayConfig {
            speed: 2.0,
            ..ReplayConfig::default()
        },
    )
    .await;
    let mut c = Client::connect(addr).await;
    let t0 = Instant::now();
    let msgs = c.until_ended().await;
    let first = msgs.iter().find_map(|m| match m {
        Received::Frame(f) => Some(f.timestamp_us),
        _ => None,
    });
    let last = msgs.iter().rev().find_map(|m| match m {
        Received::Frame(f) => Some(f.timestamp_us),
        _ => None,
    });
    let media = (last.unwrap() - first.unwrap()) as f64 / 1e6;
    let wall = t0.elapsed().as_secs_f64();
    assert!((wall - media / 2.0).abs() < 0.1, "wall {wall} for media {media}");
}

#[tokio::test]
async fn placeholder_page_at_root() {
    let (_, seq) = synth(15.0, 2.0, 10);
    let addr = start(seq, paused_fast()).await;
    let mut stream = tokio::net::TcpStream::connect(addr).await.unwrap();
    use tokio::io::{AsyncReadExt, AsyncWriteExt};
    stream
        .write_all(b"GET / HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n")
        .await
        .unwrap();
    let mut body = String::new();
    stream.read_to_string(&mut body).await.unwrap();
    assert!(body.starts_with("HTTP/1.1 200"));
    assert!(body.contains("/ws"));
}

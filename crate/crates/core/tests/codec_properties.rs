use proptest::prelude::*;
use thermsense_core::codec::{decode_sequence, encode_sequence, read_sequence, write_sequence, DecodeError, HEADER_LEN};
use thermsense_core::{SequenceMeta, ThermalFrame, ThermalSequence};

fn sequence() -> impl Strategy<Value = ThermalSequence> {
    (1u16..=8, 1u16..=8, 0usize..6, 1u16..=10_000, 0.5f32..60.0).prop_flat_map(|(w, h, n, e, fps)| {
        let cells = proptest::collection::vec(
            prop_oneof![1 => Just(0u16), 9 => 23315u16..=43315],
            w as usize * h as usize * n,
        );
        let steps = proptest::collection::vec(1u64..2_000_000, n);
        (cells, steps).prop_map(move |(cells, steps)| {
            let mut t = 0u64;
            let frames = steps
                .iter()
                .enumerate()
                .map(|(i, dt)| {
                    if i > 0 {
                        t += dt;
                    }
                    let chunk = &cells[i * w as usize * h as usize..(i + 1) * w as usize * h as usize];
                    let px = chunk.iter().map(|&c| if c == 0 { f64::NAN } else { c as f64 / 100.0 }).collect();
                    ThermalFrame::new(t as f64 / 1e6, w, h, px).unwrap()
                })
                .collect();
            let meta = SequenceMeta {
                width: w,
                height: h,
                nominal_fps: fps,
                emissivity: e as f64 / 1e4,
                frame_count: 0,
            };
            ThermalSequence::new(meta, frames).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn round_trip_is_exact(seq in sequence()) {
        let bytes = encode_sequence(&seq).unwrap();
        let back = decode_sequence(&bytes).unwrap();
        prop_assert_eq!(&back, &seq);
        prop_assert_eq!(encode_sequence(&back).unwrap(), bytes);
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..256)) {
        let _ = decode_sequence(&bytes);
    }

    #[test]
    fn corrupting_a_valid_file_yields_offset_within_input(
        seq in sequence(), pos in any::<prop::sample::Index>(), byte in any::<u8>()
    ) {
        let mut bytes = encode_sequence(&seq).unwrap();
        let i = pos.index(bytes.len());
        bytes[i] = byte;
        if let Err(e) = decode_sequence(&bytes) {
            prop_assert!(e.offset() <= bytes.len());
        }
    }

    #[test]
    fn truncation_is_reported(seq in sequence(), cut in any::<prop::sample::Index>()) {
        let bytes = encode_sequence(&seq).unwrap();
        let keep = cut.index(bytes.len());
        let is_truncated = matches!(decode_sequence(&bytes[..keep]), Err(DecodeError::Truncated { .. }));
        prop_assert!(is_truncated);
    }
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.tseq");
    let frames = vec![ThermalFrame::filled(0.0, 3, 2, 300.12).unwrap(), ThermalFrame::filled(0.111111, 3, 2, f64::NAN).unwrap()];
    let seq = ThermalSequence::new(SequenceMeta { width: 3, height: 2, ..SequenceMeta::default() }, frames).unwrap();
    write_sequence(&path, &seq).unwrap();
    assert_eq!(std::fs::metadata(&path).unwrap().len() as usize, HEADER_LEN + 2 * (8 + 12));
    assert_eq!(read_sequence(&path).unwrap(), seq);
}

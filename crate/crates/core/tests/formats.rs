mod common;

use evdn::bench::{BenchmarkReport, CellReport, InputFailure, Protocol, RunMetadata};
use evdn::filters::{FilterConfig, FilterId};
use evdn::io::{decode_binary, read_events_binary, read_events_text, write_events_binary, write_events_text};
use evdn::metrics::{GroupScore, WarpModel};
use evdn::Error;
use proptest::prelude::*;

use common::arb_packet;

fn text_bytes(p: &evdn::EventPacket) -> Vec<u8> {
    let mut out = Vec::new();
    write_events_text(p, &mut out).unwrap();
    out
}

fn binary_bytes(p: &evdn::EventPacket) -> Vec<u8> {
    let mut out = Vec::new();
    write_events_binary(p, &mut out).unwrap();
    out
}

fn arb_cell() -> impl Strategy<Value = CellReport> {
    (
        "[a-z0-9 ,\"]{0,12}",
        0.0..1.0f64,
        proptest::sample::select(FilterId::ALL.to_vec()),
        proptest::option::of(0.0..2.0f64),
        0usize..50,
        proptest::collection::vec(
            (0u64..1 << 40, 1u64..1 << 20, proptest::option::of(any::<f64>().prop_filter("finite", |v| v.is_finite()))),
            0..4,
        ),
        (0u64..1 << 40, 0u64..1 << 40),
        proptest::option::of(0.0..1e6f64),
    )
        .prop_map(|(input, noise_level, id, mesr, excluded, groups, (a, b), wall_ms)| {
            let per_group: Vec<GroupScore> = groups
                .into_iter()
                .enumerate()
                .map(|(index, (t, d, esr))| GroupScore { index, t_start: t, t_end: t + d, events: d, esr })
                .collect();
            let (events_kept, events_in) = (a.min(b), a.max(b));
            CellReport {
                input,
                noise_level,
                filter: id.name().to_string(),
                config: FilterConfig::default_for(id),
                mesr,
                groups: per_group.len(),
                excluded,
                per_group,
                events_in,
                events_kept,
                kept_ratio: if events_in == 0 { 1.0 } else { events_kept as f64 / events_in as f64 },
                wall_ms,
            }
        })
}

fn arb_report() -> impl Strategy<Value = BenchmarkReport> {
    (
        any::<u64>(),
        proptest::collection::vec(arb_cell(), 0..6),
        proptest::collection::vec(("[a-z]{1,8}", "[ -~]{0,30}"), 0..3),
        -1e4..1e4f64,
        2u64..100_000,
    )
        .prop_map(|(seed, cells, failures, vx, m)| BenchmarkReport {
            metadata: RunMetadata {
                tool: "evdn".into(),
                version: "0.1.0".into(),
                seed,
                protocol: Protocol { group_size: m as usize + 1, reference_count: m, warp: WarpModel::linear(vx, 0.0) },
                noise_levels: vec![0.0, 0.2],
            },
            cells,
            failures: failures.into_iter().map(|(input, error)| InputFailure { input, error }).collect(),
        })
}

proptest! {
    #[test]
    fn text_write_read_write_is_idempotent(p in arb_packet(300, 2000)) {
        let first = text_bytes(&p);
        let back = read_events_text(&first[..]).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(text_bytes(&back), first);
    }

    #[test]
    fn binary_round_trip_is_byte_identical(p in arb_packet(300, u16::MAX)) {
        let first = binary_bytes(&p);
        let back = read_events_binary(&first[..]).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(binary_bytes(&back), first);
    }

    #[test]
    fn any_binary_truncation_is_rejected(p in arb_packet(50, 100), frac in 0.0..1.0f64) {
        let bytes = binary_bytes(&p);
        let cut = (frac * bytes.len() as f64) as usize;
        match decode_binary(&bytes[..cut]) {
            Err(Error::Truncated { expected, actual }) => {
                prop_assert_eq!(actual, cut as u64);
                prop_assert!(expected > actual);
            }
            other => prop_assert!(false, "cut {} of {}: {:?}", cut, bytes.len(), other.map(|p| p.len())),
        }
    }

    #[test]
    fn report_json_round_trip(r in arb_report()) {
        let back = BenchmarkReport::from_json(&r.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, r);
    }
}

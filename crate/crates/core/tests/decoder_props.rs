use obs_core::decoder::bursts;
use obs_core::{decode, DeviceId, Observation, Quality, RawPress};
use proptest::prelude::*;

const GAP: u64 = 2_000;

fn stream(times: &[i64]) -> Vec<RawPress> {
    times
        .iter()
        .enumerate()
        .map(|(i, &t)| RawPress {
            device_id: DeviceId::new("d"),
            boot_id: 0,
            seq: i as u32,
            uptime_ms: 0,
            t_utc_ms: t,
            quality: Quality::Anchored,
        })
        .collect()
}

fn gaps(g: u64) -> impl Strategy<Value = Vec<i64>> {
    let g = g as i64;
    prop::collection::vec(
        prop_oneof![0..=g, (g - 2).max(0)..=g + 2, g + 1..10 * g],
        0..120,
    )
}

fn times_from(start: i64, gaps: &[i64]) -> Vec<i64> {
    let mut t = start;
    let mut out = vec![t];
    for g in gaps {
        t += g;
        out.push(t);
    }
    out
}

/// Every maximal run, found by checking every candidate `[i, j]`.
#[allow(clippy::needless_range_loop)]
fn oracle(times: &[i64], g: i64) -> (Vec<(i64, usize)>, usize) {
    let n = times.len();
    let close = |a: usize| times[a + 1] - times[a] <= g;
    let mut obs = Vec::new();
    let mut singles = 0;
    for i in 0..n {
        for j in i..n {
            let inner = (i..j).all(close);
            let left = i == 0 || !close(i - 1);
            let right = j == n - 1 || !close(j);
            if inner && left && right {
                if j > i {
                    obs.push((times[i], j - i + 1));
                } else {
                    singles += 1;
                }
            }
        }
    }
    (obs, singles)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn matches_brute_force(start in -1_000_000i64..1_000_000, gaps in gaps(GAP)) {
        let times = times_from(start, &gaps);
        let presses = stream(&times);
        let decoded = decode(&presses, GAP).unwrap();
        let got: Vec<(i64, usize)> = decoded.observations.iter().map(|o| (o.t_utc_ms, o.press_count as usize)).collect();
        let (expected, singles) = oracle(&times, GAP as i64);
        prop_assert_eq!(got, expected);
        prop_assert_eq!(decoded.false_positives.len(), singles);
        let covered: usize = decoded.observations.iter().map(|o| o.press_count as usize).sum();
        prop_assert_eq!(covered + decoded.false_positives.len(), presses.len());
        prop_assert!(decoded.observations.iter().all(|o| o.irregular == (o.press_count > 2)));
    }

    #[test]
    fn translation_invariant(shift in -10_000_000_000i64..10_000_000_000, gaps in gaps(GAP)) {
        let times = times_from(0, &gaps);
        let moved: Vec<i64> = times.iter().map(|t| t + shift).collect();
        let a = decode(&stream(&times), GAP).unwrap();
        let b = decode(&stream(&moved), GAP).unwrap();
        let shifted: Vec<Observation> = a
            .observations
            .into_iter()
            .map(|o| Observation { t_utc_ms: o.t_utc_ms + shift, ..o })
            .collect();
        prop_assert_eq!(shifted, b.observations);
    }

    #[test]
    fn wider_gap_only_merges(gaps in gaps(GAP), extra in 0u64..5_000) {
        let presses = stream(&times_from(0, &gaps));
        let narrow = bursts(&presses, GAP).unwrap();
        let wide = bursts(&presses, GAP + extra).unwrap();
        prop_assert!(wide.len() <= narrow.len());
        // every narrow burst sits inside one wide burst
        let mut w = wide.iter().map(|b| b.len()).scan(0, |acc, len| { *acc += len; Some(*acc) });
        let mut end = w.next().unwrap_or(0);
        let mut pos = 0;
        for b in &narrow {
            pos += b.len();
            while pos > end {
                end = w.next().unwrap();
            }
        }
    }

    #[test]
    fn source_seqs_partition_the_stream(gaps in gaps(GAP)) {
        let presses = stream(&times_from(0, &gaps));
        let decoded = decode(&presses, GAP).unwrap();
        let mut seqs: Vec<u32> = decoded.observations.iter().flat_map(|o| o.source_seqs.clone()).collect();
        seqs.extend(decoded.false_positives.iter().map(|p| p.seq));
        seqs.sort_unstable();
        prop_assert_eq!(seqs, (0..presses.len() as u32).collect::<Vec<_>>());
    }
}

#[test]
fn unsorted_input_rejected() {
    let presses = stream(&[10, 5]);
    assert!(decode(&presses, GAP).is_err());
    assert_eq!(decode(&[], GAP).unwrap().observations.len(), 0);
}

use obs_core::device::ButtonDevice;
use obs_core::sync::SyncAck;
use obs_core::DeviceId;
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum Op {
    Press(i64),
    Reboot(i64),
    Ack(u32),
}

fn ops() -> impl Strategy<Value = Vec<Op>> {
    prop::collection::vec(
        prop_oneof![
            6 => (1i64..100_000).prop_map(Op::Press),
            1 => (1i64..100_000).prop_map(Op::Reboot),
            2 => (0u32..200).prop_map(Op::Ack),
        ],
        0..300,
    )
}

proptest! {
    #[test]
    fn seqs_are_unique_and_buffer_bounded(
        drift in -200i32..=200,
        capacity in 1usize..32,
        ops in ops(),
    ) {
        let mut d = ButtonDevice::new(DeviceId::new("d"), drift, capacity, 0);
        let mut now = 0;
        let mut issued = Vec::new();
        let mut evicted = 0u64;
        let mut acked = 0usize;
        for op in ops {
            match op {
                Op::Press(dt) => {
                    now += dt;
                    let out = d.press(now);
                    issued.push(out.event.seq);
                    evicted += u64::from(out.evicted.is_some());
                }
                Op::Reboot(dt) => {
                    now += dt;
                    d.reboot(now);
                }
                Op::Ack(s) => acked += d.apply_ack(&SyncAck { acked_through_seq: Some(s) }),
            }
            prop_assert!(d.buffered_len() <= capacity);
        }
        prop_assert!(issued.windows(2).all(|w| w[0] + 1 == w[1]));
        prop_assert_eq!(d.evicted_total(), evicted);
        prop_assert_eq!(issued.len(), d.buffered_len() + evicted as usize + acked);
        prop_assert_eq!(d.overflowed(), evicted > 0);
        let buffered: Vec<u32> = d.buffered().map(|e| e.seq).collect();
        prop_assert!(buffered.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn uptime_is_monotone_within_a_boot(drift in -200i32..=200, a in 0i64..10_000_000_000, b in 0i64..10_000_000_000) {
        let d = ButtonDevice::new(DeviceId::new("d"), drift, 4, 0);
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(d.uptime_at(lo) <= d.uptime_at(hi));
        let exact = lo as f64 * (1.0 + f64::from(drift) * 1e-6);
        prop_assert!((d.uptime_at(lo) as f64 - exact).abs() <= 1.0 + exact * 1e-12);
    }
}

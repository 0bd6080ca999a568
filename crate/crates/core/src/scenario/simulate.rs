use super::pn::{generate_pn, PnScenario, ScenarioError};
use crate::device::{ButtonDevice, DEFAULT_BUFFER_CAPACITY};
use crate::model::{Annotation, DeviceId, RawPress};
use crate::sync::{
    run_session, LinkSchedule, LinkStats, OverflowGap, ScriptedAction, SessionConfig, SyncHost,
};
use crate::time::{DatasetConfig, MS_PER_DAY, MS_PER_HOUR};

pub const PN_DEVICE_ID: &str = "pn-wristband";

#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub drift_ppm: i32,
    /// Chance that any given hour of the dataset has no radio link.
    pub p_disconnect: f64,
    pub drop_probability: f64,
    pub latency_ms: (u64, u64),
    pub capacity: usize,
    pub session: SessionConfig,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            drift_ppm: 35,
            p_disconnect: 0.3,
            drop_probability: 0.05,
            latency_ms: (5, 80),
            capacity: DEFAULT_BUFFER_CAPACITY,
            session: SessionConfig::default(),
        }
    }
}

/// The case as the host ends up storing it.
#[derive(Debug, Clone)]
pub struct SimulatedDataset {
    pub scenario: PnScenario,
    /// Stored presses in storage order.
    pub presses: Vec<RawPress>,
    pub gaps: Vec<OverflowGap>,
    pub annotations: Vec<Annotation>,
    pub stats: LinkStats,
}

impl SimulatedDataset {
    /// Largest distance between a stored timestamp and the true press time.
    pub fn max_clock_error_ms(&self) -> i64 {
        self.presses
            .iter()
            .filter_map(|p| {
                self.scenario
                    .press_times
                    .get(p.seq as usize)
                    .map(|&t| (p.t_utc_ms - t).abs())
            })
            .max()
            .unwrap_or(0)
    }
}

/// Generates the case and replays it through a drifting device and a lossy
/// link into a host. Deterministic in `seed` and `options`.
pub fn simulate_pn(
    seed: u64,
    config: &DatasetConfig,
    options: &SimOptions,
) -> Result<SimulatedDataset, ScenarioError> {
    let scenario = generate_pn(seed, config)?;
    let window = config.dataset_window();
    let link = LinkSchedule::random_hourly(
        seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ 0x5157,
        window.clone(),
        options.p_disconnect,
    )
    .with_drop_probability(options.drop_probability)
    .with_latency(options.latency_ms.0, options.latency_ms.1);
    let device_id = DeviceId::new(PN_DEVICE_ID);
    let mut device = ButtonDevice::new(
        device_id,
        options.drift_ppm,
        options.capacity,
        window.start - MS_PER_HOUR,
    );
    let mut host = SyncHost::new();
    let script: Vec<ScriptedAction> = scenario
        .press_times
        .iter()
        .map(|&t| ScriptedAction::press(t))
        .collect();
    let transcript = run_session(
        &mut device,
        &mut host,
        &link,
        &script,
        options.session,
        window.end + 7 * MS_PER_DAY,
    );
    Ok(SimulatedDataset {
        annotations: scenario.annotations.clone(),
        scenario,
        presses: transcript.stored,
        gaps: transcript.gaps,
        stats: transcript.stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{check_pn, pn_config};

    #[test]
    fn simulated_case_conforms() {
        let config = pn_config();
        let sim = simulate_pn(42, &config, &SimOptions::default()).unwrap();
        assert_eq!(sim.presses.len(), sim.scenario.press_times.len());
        assert!(sim.gaps.is_empty());
        assert!(sim.stats.frames_dropped > 0);
        assert!(
            sim.max_clock_error_ms() < 1_000,
            "{}",
            sim.max_clock_error_ms()
        );
        let failures = check_pn(&sim.presses, &sim.annotations, &config);
        assert!(failures.is_empty(), "{failures:?}");
    }
}

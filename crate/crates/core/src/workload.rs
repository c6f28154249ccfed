//! Workload schedules: steady traffic, sustained floods, and on/off burst
//! cycles, plus the timing formulas an attacker would use to tune bursts
//! against the autoscaler's reaction windows.

use serde::{Deserialize, Serialize};

use crate::config::{parse_duration_str, ClusterConfig, DurationSecs};
use crate::error::{Error, Result};
use crate::rng::unit_f64;

/// Per-tick multiplicative rate noise, standing in for the inter-request
/// timer behaviour of a load generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[derive(Default)]
pub enum Jitter {
    /// No noise at all.
    #[default]
    None,
    /// Fixed inter-request delay (seconds); deterministic, so the rate
    /// factor is exactly 1.
    Constant(f64),
    /// Factor drawn uniformly from `[lo, hi]` each tick.
    RandomUniform(f64, f64),
}


/// Default uniform jitter band.
pub const DEFAULT_JITTER_LO: f64 = 0.8;
pub const DEFAULT_JITTER_HI: f64 = 1.2;

/// The shape of offered traffic over time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    /// Legitimate load only: `base_rate` for the whole run.
    Steady,
    /// Sustained flood: `(power_k + 1) * base_rate` for the whole run.
    FlatDdos,
    /// `cycles` repetitions of a `t_on` burst at `(power_k + 1) * base_rate`
    /// followed by `t_off` at `base_rate`; `base_rate` after the last cycle.
    Yoyo,
}

/// A fully specified workload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadSchedule {
    pub kind: ScheduleKind,
    /// Legitimate request rate, requests/second.
    pub base_rate: f64,
    /// Attack power: extra load is `power_k` times the legitimate load.
    #[serde(default = "default_power")]
    pub power_k: f64,
    /// Burst length for `Yoyo`.
    #[serde(default = "default_t_on")]
    pub t_on: DurationSecs,
    /// Quiet length for `Yoyo`.
    #[serde(default = "default_t_off")]
    pub t_off: DurationSecs,
    /// Number of burst cycles for `Yoyo`.
    #[serde(default = "default_cycles")]
    pub cycles: u32,
    /// Seconds over which any rate increase climbs linearly from the prior
    /// level; decreases are instant. Zero means steps are instant.
    #[serde(default)]
    pub ramp_up: DurationSecs,
    #[serde(default)]
    pub jitter: Jitter,
}

fn default_power() -> f64 {
    1.0
}
fn default_t_on() -> DurationSecs {
    DurationSecs(600)
}
fn default_t_off() -> DurationSecs {
    DurationSecs(1200)
}
fn default_cycles() -> u32 {
    1
}

/// Jitter stream tag for seed mixing; keeps rate noise independent of any
/// other random consumer sharing the seed.
const JITTER_STREAM: u64 = 0x6A69_7474_6572;

impl WorkloadSchedule {
    pub fn steady(base_rate: f64) -> Self {
        WorkloadSchedule {
            kind: ScheduleKind::Steady,
            base_rate,
            power_k: 1.0,
            t_on: default_t_on(),
            t_off: default_t_off(),
            cycles: default_cycles(),
            ramp_up: DurationSecs(0),
            jitter: Jitter::None,
        }
    }

    pub fn flat_ddos(base_rate: f64, power_k: f64) -> Self {
        WorkloadSchedule {
            kind: ScheduleKind::FlatDdos,
            base_rate,
            power_k,
            ..WorkloadSchedule::steady(base_rate)
        }
    }

    pub fn yoyo(base_rate: f64, power_k: f64, t_on: u64, t_off: u64, cycles: u32) -> Self {
        WorkloadSchedule {
            kind: ScheduleKind::Yoyo,
            base_rate,
            power_k,
            t_on: DurationSecs(t_on),
            t_off: DurationSecs(t_off),
            cycles,
            ..WorkloadSchedule::steady(base_rate)
        }
    }

    pub fn with_ramp(mut self, ramp_up: u64) -> Self {
        self.ramp_up = DurationSecs(ramp_up);
        self
    }

    pub fn with_jitter(mut self, jitter: Jitter) -> Self {
        self.jitter = jitter;
        self
    }

    /// One full burst cycle, seconds.
    pub fn cycle_len(&self) -> u64 {
        self.t_on.secs() + self.t_off.secs()
    }

    /// Total time covered by the attack pattern: for bursts, from the first
    /// burst start until `t_off` after the last burst ends; for steady and
    /// flood shapes the pattern has no end (`None`).
    pub fn attack_span(&self) -> Option<u64> {
        match self.kind {
            ScheduleKind::Yoyo => Some(self.cycles as u64 * self.cycle_len()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let err = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.base_rate > 0.0 && self.base_rate.is_finite()) {
            return err(format!("base_rate must be positive, got {}", self.base_rate));
        }
        if !(self.power_k >= 1.0 && self.power_k.is_finite()) {
            return err(format!("power_k must be at least 1, got {}", self.power_k));
        }
        if self.kind == ScheduleKind::Yoyo {
            if self.t_on.secs() == 0 || self.t_off.secs() == 0 {
                return err("yoyo schedules need positive t_on and t_off".into());
            }
            if self.cycles == 0 {
                return err("yoyo schedules need at least one cycle".into());
            }
        }
        match self.jitter {
            Jitter::Constant(d) if !(d >= 0.0 && d.is_finite()) => {
                return err(format!("constant jitter delay must be non-negative, got {d}"));
            }
            Jitter::RandomUniform(lo, hi)
                if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) => {
                    return err(format!(
                        "random_uniform jitter needs 0 <= lo <= hi, got [{lo}, {hi}]"
                    ));
                }
            _ => {}
        }
        Ok(())
    }

    /// The target (pre-jitter, pre-ramp) rate level at time `t`.
    fn level_at(&self, t: u64) -> f64 {
        match self.kind {
            ScheduleKind::Steady => self.base_rate,
            ScheduleKind::FlatDdos => (self.power_k + 1.0) * self.base_rate,
            ScheduleKind::Yoyo => {
                let cycle = self.cycle_len();
                if t >= self.cycles as u64 * cycle {
                    return self.base_rate;
                }
                let phase = t % cycle;
                if phase < self.t_on.secs() {
                    (self.power_k + 1.0) * self.base_rate
                } else {
                    self.base_rate
                }
            }
        }
    }

    /// Start time of the increase that produced the level at `t`, if that
    /// level is above the legitimate baseline.
    fn increase_start(&self, t: u64) -> Option<u64> {
        match self.kind {
            ScheduleKind::Steady => None,
            ScheduleKind::FlatDdos => Some(0),
            ScheduleKind::Yoyo => {
                let cycle = self.cycle_len();
                if t >= self.cycles as u64 * cycle {
                    return None;
                }
                let phase = t % cycle;
                if phase < self.t_on.secs() {
                    Some(t - phase)
                } else {
                    None
                }
            }
        }
    }
}

/// Offered request rate at second `t` for `schedule`, jittered by `seed`.
///
/// A pure function of `(schedule, t, seed)`: increases climb linearly from
/// the prior level over `ramp_up` seconds, decreases are instant, and the
/// jitter factor for a tick is derived only from the seed and `t`.
pub fn rate_at(schedule: &WorkloadSchedule, t: u64, seed: u64) -> f64 {
    let level = schedule.level_at(t);
    let ramp = schedule.ramp_up.secs();
    let mut rate = level;
    if ramp > 0 {
        if let Some(start) = schedule.increase_start(t) {
            let elapsed = t - start;
            if elapsed < ramp {
                let frac = elapsed as f64 / ramp as f64;
                rate = schedule.base_rate + (level - schedule.base_rate) * frac;
            }
        }
    }
    let factor = match schedule.jitter {
        Jitter::None | Jitter::Constant(_) => 1.0,
        Jitter::RandomUniform(lo, hi) => lo + (hi - lo) * unit_f64(seed, JITTER_STREAM, t),
    };
    rate * factor
}

/// Burst length that maximizes damage per unit of attack cost: just long
/// enough to drag both tiers through a full scale-up — pod breach window,
/// pod warm-up, node check cadence, and node warm-up.
pub fn optimal_t_on(config: &ClusterConfig) -> u64 {
    config.i_p_up.secs() + config.w_p_up.secs() + config.i_n_up.secs() + config.w_n_up.secs()
}

/// Quiet length that lets the attacker go silent exactly while the cluster
/// pays for scale-down: pod breach window and drain, then node idle window
/// and drain.
pub fn optimal_t_off(config: &ClusterConfig) -> u64 {
    config.i_p_down.secs() + config.w_p_down.secs() + config.i_n_down.secs() + config.w_n_down.secs()
}

/// Parses the attack shorthand `"k=20 on=10m off=20m n=6"` (any order,
/// whitespace separated) into a burst schedule on `base_rate`.
pub fn parse_attack_shorthand(s: &str, base_rate: f64) -> Result<WorkloadSchedule> {
    let mut k: Option<f64> = None;
    let mut on: Option<u64> = None;
    let mut off: Option<u64> = None;
    let mut n: Option<u32> = None;
    for token in s.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("attack shorthand token {token:?} is not key=value")))?;
        match key {
            "k" => {
                k = Some(value.parse().map_err(|_| {
                    Error::Parse(format!("attack shorthand: cannot parse k from {value:?}"))
                })?)
            }
            "on" => {
                on = Some(parse_duration_str(value).map_err(Error::Parse)?);
            }
            "off" => {
                off = Some(parse_duration_str(value).map_err(Error::Parse)?);
            }
            "n" => {
                n = Some(value.parse().map_err(|_| {
                    Error::Parse(format!("attack shorthand: cannot parse n from {value:?}"))
                })?)
            }
            other => {
                return Err(Error::Parse(format!(
                    "attack shorthand: unknown key {other:?} (expected k, on, off, n)"
                )))
            }
        }
    }
    let k = k.ok_or_else(|| Error::Parse("attack shorthand: missing k=".into()))?;
    let on = on.ok_or_else(|| Error::Parse("attack shorthand: missing on=".into()))?;
    let off = off.ok_or_else(|| Error::Parse("attack shorthand: missing off=".into()))?;
    let n = n.ok_or_else(|| Error::Parse("attack shorthand: missing n=".into()))?;
    let schedule = WorkloadSchedule::yoyo(base_rate, k, on, off, n);
    schedule.validate()?;
    Ok(schedule)
}

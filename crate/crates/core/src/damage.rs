//! Damage, cost, and potency accounting.
//!
//! An attack run is judged against two companion runs that share its
//! cluster, seed, and duration:
//!
//! - a *baseline* run carrying only the legitimate steady rate, and
//! - a *unit* run of the same shape with power factor 1,
//!
//! Performance damage is the increase in mean response time over the attack
//! window relative to the baseline run; economic damage is the increase in
//! mean node count (the quantity the victim pays for). Relative damage
//! normalizes by the unit run so different power factors are comparable,
//! and potency relates the relative economic damage to what the burst
//! pattern costs the attacker.

use serde::{Deserialize, Serialize};

use crate::config::{ClusterConfig, PricingConfig, ServiceModelConfig};
use crate::engine::{run_simulation, NodeLifetime, SimResult};
use crate::error::{Error, Result};
use crate::trace::Trace;
use crate::workload::{ScheduleKind, WorkloadSchedule};

/// Mean response-time increase of `attack` over `baseline` across
/// `[0, window_secs)`, floored at zero.
pub fn performance_damage(attack: &Trace, baseline: &Trace, window_secs: u64) -> Result<f64> {
    let a = attack.mean_over(0, window_secs, |r| r.response_time)?;
    let b = baseline.mean_over(0, window_secs, |r| r.response_time)?;
    Ok((a - b).max(0.0))
}

/// Mean node-count increase of `attack` over `baseline` across
/// `[0, window_secs)`, floored at zero. Counts every provisioned node
/// (warming and draining included) because all of them are billed.
pub fn economic_damage(attack: &Trace, baseline: &Trace, window_secs: u64) -> Result<f64> {
    let a = attack.mean_over(0, window_secs, |r| r.total_nodes as f64)?;
    let b = baseline.mean_over(0, window_secs, |r| r.total_nodes as f64)?;
    Ok((a - b).max(0.0))
}

/// Damage at power `k` normalized by damage at power 1.
///
/// Undefined (an error, never infinity) when the unit-power run caused no
/// damage: a ratio against a zero or negative base carries no information.
pub fn relative_damage(damage_at_k: f64, damage_at_unit: f64) -> Result<f64> {
    if damage_at_unit.is_nan() || damage_at_unit <= 0.0 {
        return Err(Error::UndefinedRatio(format!(
            "relative damage needs a positive unit-power damage, got {damage_at_unit}"
        )));
    }
    Ok(damage_at_k / damage_at_unit)
}

/// Attacker-side cost of a burst pattern: power `k` scaled by the duty
/// cycle `t_on / period`. A flat overload is the `t_on == period` case.
pub fn attack_cost(power_k: f64, t_on_secs: u64, period_secs: u64) -> Result<f64> {
    if power_k < 1.0 {
        return Err(Error::InvalidConfig(format!(
            "attack cost needs power >= 1, got {power_k}"
        )));
    }
    if t_on_secs == 0 || period_secs == 0 || t_on_secs > period_secs {
        return Err(Error::InvalidConfig(format!(
            "attack cost needs 0 < t_on <= period, got t_on={t_on_secs}s period={period_secs}s"
        )));
    }
    Ok(power_k * t_on_secs as f64 / period_secs as f64)
}

/// Damage per unit of attacker cost: relative economic damage over cost.
pub fn potency(relative_economic_damage: f64, cost: f64) -> Result<f64> {
    if cost.is_nan() || cost <= 0.0 {
        return Err(Error::UndefinedRatio(format!(
            "potency needs a positive attack cost, got {cost}"
        )));
    }
    Ok(relative_economic_damage / cost)
}

/// What the victim is billed for the run: every node's lifetime (with a
/// per-node minimum) at the per-second rate, plus a prorated flat
/// management fee. Nodes still running at the end are billed to the end.
pub fn billed_cost(
    lifetimes: &[NodeLifetime],
    run_duration_secs: u64,
    pricing: &PricingConfig,
) -> f64 {
    let node_total: f64 = lifetimes
        .iter()
        .map(|l| {
            let end = l.removed_at.unwrap_or(run_duration_secs);
            let secs = end.saturating_sub(l.created_at).max(pricing.min_billing_secs);
            secs as f64 * pricing.node_rate_per_sec
        })
        .sum();
    node_total + pricing.mgmt_fee_per_hour * run_duration_secs as f64 / 3600.0
}

/// The full assessment of one attack run against its companions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DamageReport {
    /// Seconds of trace the damage means were taken over.
    pub window_secs: u64,
    pub baseline_mean_response_ms: f64,
    pub unit_mean_response_ms: f64,
    pub attack_mean_response_ms: f64,
    pub baseline_mean_nodes: f64,
    pub unit_mean_nodes: f64,
    pub attack_mean_nodes: f64,
    /// Response-time increase over baseline (ms).
    pub performance_damage: f64,
    /// Same, for the unit-power companion run.
    pub unit_performance_damage: f64,
    /// Node-count increase over baseline.
    pub economic_damage: f64,
    pub unit_economic_damage: f64,
    /// `performance_damage / unit_performance_damage`; absent when the
    /// unit run caused no measurable slowdown.
    pub relative_performance_damage: Option<f64>,
    /// `economic_damage / unit_economic_damage`; absent when the unit run
    /// provisioned nothing extra.
    pub relative_economic_damage: Option<f64>,
    /// Attacker cost of the pattern; absent for a steady (no-attack) run.
    pub attack_cost: Option<f64>,
    /// `relative_economic_damage / attack_cost` when both exist.
    pub potency: Option<f64>,
    /// Victim's bill for the baseline run.
    pub baseline_billed: f64,
    /// Victim's bill for the attack run.
    pub attack_billed: f64,
    /// Extra spend caused by the attack.
    pub billed_overhead: f64,
}

impl DamageReport {
    /// Pretty-printed JSON encoding of the report.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(format!("report encode: {e}")))
    }
}

/// The three runs behind a [`DamageReport`], for callers that want the
/// traces as well.
pub struct AttackAssessment {
    pub report: DamageReport,
    pub baseline: SimResult,
    pub unit: SimResult,
    pub attack: SimResult,
}

/// Runs the attack schedule plus its two companion runs and produces the
/// full report. All three runs share cluster, service model, duration, and
/// seed, so jitter draws are identical across them.
pub fn evaluate_attack(
    cluster: &ClusterConfig,
    service: &ServiceModelConfig,
    pricing: &PricingConfig,
    schedule: &WorkloadSchedule,
    duration_secs: u64,
    seed: u64,
) -> Result<AttackAssessment> {
    pricing.validate()?;
    let baseline_schedule =
        WorkloadSchedule::steady(schedule.base_rate).with_jitter(schedule.jitter);
    let mut unit_schedule = schedule.clone();
    unit_schedule.power_k = 1.0;

    let baseline = run_simulation(cluster, service, &baseline_schedule, duration_secs, seed)?;
    let unit = run_simulation(cluster, service, &unit_schedule, duration_secs, seed)?;
    let attack = run_simulation(cluster, service, schedule, duration_secs, seed)?;

    let window_secs = schedule
        .attack_span()
        .map(|w| w.min(duration_secs))
        .unwrap_or(duration_secs);

    let d_p = performance_damage(&attack.trace, &baseline.trace, window_secs)?;
    let d_p_unit = performance_damage(&unit.trace, &baseline.trace, window_secs)?;
    let d_e = economic_damage(&attack.trace, &baseline.trace, window_secs)?;
    let d_e_unit = economic_damage(&unit.trace, &baseline.trace, window_secs)?;

    let rd_p = relative_damage(d_p, d_p_unit).ok();
    let rd_e = relative_damage(d_e, d_e_unit).ok();

    let cost = match schedule.kind {
        ScheduleKind::Steady => None,
        ScheduleKind::FlatDdos => {
            Some(attack_cost(schedule.power_k, duration_secs, duration_secs)?)
        }
        ScheduleKind::Yoyo => Some(attack_cost(
            schedule.power_k,
            schedule.t_on.secs(),
            schedule.cycle_len(),
        )?),
    };
    let pot = match (rd_e, cost) {
        (Some(rd), Some(c)) => potency(rd, c).ok(),
        _ => None,
    };

    let baseline_billed = billed_cost(&baseline.node_lifetimes(), duration_secs, pricing);
    let attack_billed = billed_cost(&attack.node_lifetimes(), duration_secs, pricing);

    let report = DamageReport {
        window_secs,
        baseline_mean_response_ms: baseline.trace.mean_over(0, window_secs, |r| r.response_time)?,
        unit_mean_response_ms: unit.trace.mean_over(0, window_secs, |r| r.response_time)?,
        attack_mean_response_ms: attack.trace.mean_over(0, window_secs, |r| r.response_time)?,
        baseline_mean_nodes: baseline
            .trace
            .mean_over(0, window_secs, |r| r.total_nodes as f64)?,
        unit_mean_nodes: unit.trace.mean_over(0, window_secs, |r| r.total_nodes as f64)?,
        attack_mean_nodes: attack
            .trace
            .mean_over(0, window_secs, |r| r.total_nodes as f64)?,
        performance_damage: d_p,
        unit_performance_damage: d_p_unit,
        economic_damage: d_e,
        unit_economic_damage: d_e_unit,
        relative_performance_damage: rd_p,
        relative_economic_damage: rd_e,
        attack_cost: cost,
        potency: pot,
        baseline_billed,
        attack_billed,
        billed_overhead: attack_billed - baseline_billed,
    };
    Ok(AttackAssessment {
        report,
        baseline,
        unit,
        attack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::NodeLifetime;
    use crate::trace::TraceRow;

    fn trace_with(rows: &[(f64, u32)]) -> Trace {
        Trace {
            rows: rows
                .iter()
                .enumerate()
                .map(|(t, &(resp, nodes))| TraceRow {
                    t: t as u64,
                    offered_rate: 0.0,
                    ready_pods: 1,
                    total_pods: 1,
                    ready_nodes: nodes,
                    total_nodes: nodes,
                    avg_relative_cpu: 0.0,
                    response_time: resp,
                    errors: 0,
                })
                .collect(),
        }
    }

    #[test]
    fn cost_of_a_duty_cycled_burst() {
        assert_eq!(attack_cost(20.0, 600, 1800).unwrap(), 20.0 / 3.0);
        assert_eq!(attack_cost(20.0, 1800, 1800).unwrap(), 20.0);
        assert_eq!(attack_cost(1.0, 1, 1_000_000).unwrap(), 1e-6);
        assert!(attack_cost(0.5, 600, 1800).is_err());
        assert!(attack_cost(20.0, 0, 1800).is_err());
        assert!(attack_cost(20.0, 1801, 1800).is_err());
    }

    #[test]
    fn potency_of_the_reference_burst() {
        let cost = attack_cost(20.0, 600, 1800).unwrap();
        assert_eq!(potency(5.0, cost).unwrap(), 0.75);
        assert!(potency(5.0, 0.0).is_err());
    }

    #[test]
    fn relative_damage_guards_the_base() {
        assert_eq!(relative_damage(6.0, 3.0).unwrap(), 2.0);
        assert!(relative_damage(6.0, 0.0).is_err());
        assert!(relative_damage(6.0, -1.0).is_err());
        assert!(relative_damage(6.0, f64::NAN).is_err());
    }

    #[test]
    fn damage_is_floored_at_zero() {
        let fast = trace_with(&[(20.0, 4), (20.0, 4)]);
        let slow = trace_with(&[(30.0, 6), (50.0, 6)]);
        assert_eq!(performance_damage(&slow, &fast, 2).unwrap(), 20.0);
        assert_eq!(performance_damage(&fast, &slow, 2).unwrap(), 0.0);
        assert_eq!(economic_damage(&slow, &fast, 2).unwrap(), 2.0);
        assert_eq!(economic_damage(&fast, &slow, 2).unwrap(), 0.0);
    }

    #[test]
    fn billing_applies_minimum_and_open_lifetimes() {
        let pricing = PricingConfig {
            node_rate_per_sec: 0.01,
            min_billing_secs: 60,
            mgmt_fee_per_hour: 3.6,
        };
        let lifetimes = [
            NodeLifetime {
                node: crate::cluster::NodeId(0),
                created_at: 0,
                removed_at: Some(30), // below the minimum: billed as 60s
            },
            NodeLifetime {
                node: crate::cluster::NodeId(1),
                created_at: 0,
                removed_at: None, // runs to the end: 100s
            },
        ];
        let total = billed_cost(&lifetimes, 100, &pricing);
        // 60*0.01 + 100*0.01 + 3.6*100/3600 = 0.6 + 1.0 + 0.1
        assert!((total - 1.7).abs() < 1e-12, "got {total}");
    }

    #[test]
    fn steady_assessment_reports_zero_damage() {
        let cluster = ClusterConfig::default();
        let service = ServiceModelConfig::default();
        let pricing = PricingConfig::default();
        let schedule = WorkloadSchedule::steady(30.0);
        let a = evaluate_attack(&cluster, &service, &pricing, &schedule, 600, 1).unwrap();
        assert_eq!(a.report.performance_damage, 0.0);
        assert_eq!(a.report.economic_damage, 0.0);
        assert_eq!(a.report.attack_cost, None);
        assert_eq!(a.report.potency, None);
        assert_eq!(a.report.billed_overhead, 0.0);
    }

    #[test]
    fn flat_overload_produces_positive_damage() {
        let cluster = ClusterConfig::default();
        let service = ServiceModelConfig::default();
        let pricing = PricingConfig::default();
        let schedule = WorkloadSchedule::flat_ddos(30.0, 20.0);
        let a = evaluate_attack(&cluster, &service, &pricing, &schedule, 3600, 1).unwrap();
        assert!(a.report.performance_damage > 0.0);
        assert!(a.report.economic_damage > 0.0);
        assert_eq!(a.report.attack_cost, Some(20.0));
        assert!(a.report.billed_overhead > 0.0);
        assert_eq!(a.report.window_secs, 3600);
    }
}

//! Scenario files: one TOML document fully describing a run (cluster,
//! service model, pricing, workload, duration, seed), plus a library of
//! builtin scenarios used by the CLI and the test suite.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{ClusterConfig, DurationSecs, PricingConfig, ServiceModelConfig};
use crate::error::{Error, Result};
use crate::workload::WorkloadSchedule;

/// Version of the scenario file format this build reads and writes.
pub const SCHEMA_VERSION: u32 = 1;

fn default_seed() -> u64 {
    7
}

/// A complete, runnable experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    /// Used to name artifact files; letters, digits, `-` and `_` only.
    pub name: String,
    pub duration: DurationSecs,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub cluster: ClusterConfig,
    #[serde(default)]
    pub service: ServiceModelConfig,
    #[serde(default)]
    pub pricing: PricingConfig,
    pub workload: WorkloadSchedule,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidConfig(format!(
                "schema_version {} is not supported (this build reads version {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
        {
            return Err(Error::InvalidConfig(format!(
                "scenario name {:?} must be non-empty and use only letters, digits, `-`, `_` \
                 (it names artifact files)",
                self.name
            )));
        }
        if self.duration.secs() == 0 {
            return Err(Error::InvalidConfig("duration must be positive".into()));
        }
        self.cluster.validate()?;
        self.service.validate()?;
        self.pricing.validate()?;
        self.workload.validate()?;
        Ok(())
    }

    /// Parses and validates a TOML scenario. Syntax and unknown-field
    /// errors carry the line/column they occurred at.
    pub fn from_toml_str(text: &str) -> Result<Scenario> {
        let scenario: Scenario =
            toml::from_str(text).map_err(|e| Error::Parse(format!("scenario TOML: {e}")))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Parse(format!("scenario encode: {e}")))
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

/// The reference cluster used by most builtins.
fn base_cluster() -> ClusterConfig {
    ClusterConfig::default()
}

/// A deliberately tight variant: more initial pods on fewer, fuller nodes
/// and a higher node ceiling, so even a power-1 burst forces extra machines
/// and damage ratios are well defined.
fn packed_cluster() -> ClusterConfig {
    ClusterConfig {
        initial_pods: 9,
        initial_nodes: 3,
        min_nodes: 3,
        max_nodes: 70,
        ..ClusterConfig::default()
    }
}

/// One machine per pod: the node tier mirrors the pod tier one-to-one, so
/// every pod scale-up is billed as a whole machine.
fn vm_group_cluster() -> ClusterConfig {
    ClusterConfig {
        pods_per_node: 1,
        initial_pods: 3,
        initial_nodes: 4,
        min_nodes: 3,
        max_nodes: 70,
        ..ClusterConfig::default()
    }
}

fn scenario(name: &str, duration: u64, cluster: ClusterConfig, workload: WorkloadSchedule) -> Scenario {
    Scenario {
        schema_version: SCHEMA_VERSION,
        name: name.to_string(),
        duration: DurationSecs(duration),
        seed: default_seed(),
        cluster,
        service: ServiceModelConfig::default(),
        pricing: PricingConfig::default(),
        workload,
    }
}

/// Names of all builtin scenarios, in listing order.
pub fn builtin_names() -> &'static [&'static str] {
    &[
        "steady",
        "flat-k20",
        "yoyo-k20",
        "yoyo-optimal",
        "packed-steady",
        "packed-flat-k20",
        "packed-yoyo-k20",
        "vm-group-yoyo",
    ]
}

/// Looks up a builtin scenario by name.
pub fn builtin(name: &str) -> Option<Scenario> {
    let s = match name {
        "steady" => scenario(
            "steady",
            3600,
            base_cluster(),
            WorkloadSchedule::steady(30.0),
        ),
        "flat-k20" => scenario(
            "flat-k20",
            5400,
            base_cluster(),
            WorkloadSchedule::flat_ddos(30.0, 20.0),
        ),
        "yoyo-k20" => scenario(
            "yoyo-k20",
            5400,
            base_cluster(),
            WorkloadSchedule::yoyo(30.0, 20.0, 600, 1200, 3),
        ),
        "yoyo-optimal" => {
            let cluster = base_cluster();
            let t_on = crate::workload::optimal_t_on(&cluster);
            let t_off = crate::workload::optimal_t_off(&cluster);
            let cycles = 4;
            scenario(
                "yoyo-optimal",
                cycles as u64 * (t_on + t_off),
                cluster,
                WorkloadSchedule::yoyo(30.0, 20.0, t_on, t_off, cycles),
            )
        }
        "packed-steady" => scenario(
            "packed-steady",
            3600,
            packed_cluster(),
            WorkloadSchedule::steady(90.0),
        ),
        "packed-flat-k20" => scenario(
            "packed-flat-k20",
            5400,
            packed_cluster(),
            WorkloadSchedule::flat_ddos(90.0, 20.0),
        ),
        "packed-yoyo-k20" => scenario(
            "packed-yoyo-k20",
            5400,
            packed_cluster(),
            WorkloadSchedule::yoyo(90.0, 20.0, 600, 1200, 3),
        ),
        "vm-group-yoyo" => scenario(
            "vm-group-yoyo",
            5400,
            vm_group_cluster(),
            WorkloadSchedule::yoyo(30.0, 20.0, 600, 1200, 3),
        ),
        _ => return None,
    };
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_validates() {
        for name in builtin_names() {
            let s = builtin(name).unwrap_or_else(|| panic!("missing builtin {name}"));
            s.validate().unwrap_or_else(|e| panic!("builtin {name}: {e}"));
            assert_eq!(&s.name, name);
        }
        assert!(builtin("no-such-scenario").is_none());
    }

    #[test]
    fn toml_round_trip() {
        for name in builtin_names() {
            let s = builtin(name).unwrap();
            let text = s.to_toml_string().unwrap();
            let back = Scenario::from_toml_str(&text)
                .unwrap_or_else(|e| panic!("builtin {name} failed round trip: {e}\n{text}"));
            assert_eq!(s, back, "builtin {name}");
        }
    }

    #[test]
    fn minimal_scenario_parses_with_defaults() {
        let text = r#"
            schema_version = 1
            name = "mini"
            duration = "30m"

            [workload]
            kind = "steady"
            base_rate = 30.0
        "#;
        let s = Scenario::from_toml_str(text).unwrap();
        assert_eq!(s.duration.secs(), 1800);
        assert_eq!(s.seed, 7);
        assert_eq!(s.cluster, ClusterConfig::default());
        assert_eq!(s.workload, WorkloadSchedule::steady(30.0));
    }

    #[test]
    fn unknown_fields_error_with_location() {
        let text = r#"
            schema_version = 1
            name = "x"
            duration = 60
            not_a_field = true

            [workload]
            kind = "steady"
            base_rate = 30.0
        "#;
        let err = Scenario::from_toml_str(text).unwrap_err().to_string();
        assert!(err.contains("not_a_field"), "{err}");
        assert!(err.contains("line"), "error should carry a location: {err}");
    }

    #[test]
    fn wrong_schema_version_is_rejected() {
        let text = r#"
            schema_version = 2
            name = "x"
            duration = 60

            [workload]
            kind = "steady"
            base_rate = 30.0
        "#;
        let err = Scenario::from_toml_str(text).unwrap_err().to_string();
        assert!(err.contains("schema_version"), "{err}");
    }

    #[test]
    fn bad_names_are_rejected() {
        for bad in ["", "has space", "slash/y", "dot.dot"] {
            let mut s = builtin("steady").unwrap();
            s.name = bad.to_string();
            assert!(s.validate().is_err(), "name {bad:?} should be rejected");
        }
    }

    #[test]
    fn packed_variant_is_calibrated_to_target() {
        // 9 pods x 20 rps x 50% = 90 rps: steady load sits exactly on
        // target, so the packed baselines are fixed points too.
        let s = builtin("packed-steady").unwrap();
        let expected = s.cluster.initial_pods as f64 * s.cluster.pod_capacity_rps
            * s.cluster.u_target
            / 100.0;
        assert_eq!(s.workload.base_rate, expected);
    }
}

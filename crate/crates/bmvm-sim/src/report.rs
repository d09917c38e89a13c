//! Structured experiment reports.
//!
//! Reports embed the fully resolved simulation configuration for
//! provenance. Serialization is deterministic (sorted keys, fixed field
//! order), so identical configs and seeds produce byte-identical files;
//! the timestamp is the one exception and can be omitted for comparisons.
//! Worker count is an execution detail and is never recorded.

use crate::config::Resolved;
use serde::Serialize;
use serde_json::json;
use std::time::{SystemTime, UNIX_EPOCH};

pub const REPORT_SCHEMA: &str = "bmvm-sim-report-v1";

#[derive(Debug, Clone, Serialize)]
pub struct SimReport {
    pub schema: &'static str,
    pub experiment: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp_unix: Option<u64>,
    pub config: serde_json::Value,
    pub results: serde_json::Value,
}

impl SimReport {
    pub fn new(
        experiment: &str,
        resolved: &Resolved,
        results: &impl Serialize,
        with_timestamp: bool,
    ) -> Self {
        let config = json!({
            "system": resolved.system,
            "verify": { "instances": resolved.verify_instances },
            "margins": {
                "trials_per_scenario": resolved.margins.trials_per_scenario,
                "max_units": resolved.margins.max_units,
                "input_density": resolved.margins.input_density,
                "weight_density": resolved.margins.weight_density,
            },
            "ber": {
                "trials": resolved.ber_trials,
                "compute_bits": resolved.ber_compute_bits,
                "noise_sigma_volts": resolved.ber_noise_sigma,
                "input_density": resolved.ber_input_density,
                "weight_density": resolved.ber_weight_density,
            },
            "protocol": resolved.protocol,
            "protocol_ber": resolved.protocol_ber,
            "perf": resolved.perf,
            "trace_hamming_weight": resolved.trace_hamming_weight,
        });
        let timestamp_unix = with_timestamp.then(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        Self {
            schema: REPORT_SCHEMA,
            experiment: experiment.to_string(),
            timestamp_unix,
            config,
            results: serde_json::to_value(results).expect("results serialization"),
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

//! TOML experiment configuration. Unknown keys are rejected everywhere.

use std::path::Path;

use serde::Deserialize;

use crate::analysis::DiscreteDist;
use crate::error::{Error, Result};
use crate::mechanism::{check_safety_gas_cap, GasConfig, ResourceBounds};
use crate::sim::{DemandModel, ResourceDemand, SymmetricShockParams};

/// Top-level experiment configuration.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; every experiment derives its run seeds from it.
    pub seed: u64,
    pub mechanism: MechanismSection,
    pub demand: DemandSection,
    pub shock: Option<ShockSection>,
    pub welfare: Option<WelfareSection>,
    pub ratio: Option<RatioSection>,
    pub revenue: Option<RevenueSection>,
    pub reduce: Option<ReduceSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanismSection {
    pub weights: Vec<f64>,
    pub resource_caps: Vec<f64>,
    /// Defaults to the largest safe value `min_i weights[i] * resource_caps[i]`.
    pub gas_cap: Option<f64>,
}

impl MechanismSection {
    pub fn bounds(&self) -> Result<ResourceBounds> {
        ResourceBounds::from_caps(self.resource_caps.clone())
    }

    pub fn gas_config(&self) -> Result<GasConfig> {
        let bounds = self.bounds()?;
        let gas = match self.gas_cap {
            Some(cap) => GasConfig::new(self.weights.clone(), cap)?,
            None => GasConfig::with_max_safe_cap(self.weights.clone(), &bounds)?,
        };
        if gas.dims() != bounds.dims() {
            return Err(Error::DimensionMismatch { expected: bounds.dims(), got: gas.dims() });
        }
        if !check_safety_gas_cap(&gas, &bounds) {
            let i = gas
                .weights()
                .iter()
                .zip(bounds.caps())
                .position(|(w, g)| gas.gas_cap() > w * g)
                .unwrap_or(0);
            return Err(Error::Precondition(format!(
                "gas cap {} exceeds weight {} times cap {} for resource {i}",
                gas.gas_cap(),
                gas.weights()[i],
                bounds.caps()[i]
            )));
        }
        Ok(gas)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandSection {
    pub amplitudes: Vec<f64>,
    pub elasticities: Vec<f64>,
    pub noise_sigma: f64,
    pub tx_size_mean: f64,
    pub tx_size_jitter: f64,
    pub margin_lo: f64,
    pub margin_hi: f64,
}

impl DemandSection {
    pub fn model(&self) -> Result<DemandModel> {
        if self.amplitudes.len() != self.elasticities.len() {
            return Err(Error::DimensionMismatch {
                expected: self.amplitudes.len(),
                got: self.elasticities.len(),
            });
        }
        let model = DemandModel {
            resources: self
                .amplitudes
                .iter()
                .zip(&self.elasticities)
                .map(|(&amplitude, &elasticity)| ResourceDemand { amplitude, elasticity })
                .collect(),
            noise_sigma: self.noise_sigma,
            tx_size_mean: self.tx_size_mean,
            tx_size_jitter: self.tx_size_jitter,
            margin_lo: self.margin_lo,
            margin_hi: self.margin_hi,
        };
        model.validate()?;
        Ok(model)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShockSection {
    /// Dimension counts for the multi-resource scenarios.
    pub m_values: Vec<u32>,
    /// Runs per multi-resource scenario.
    pub runs: u32,
    /// Runs of the one-dimensional baseline.
    pub baseline_runs: u32,
    /// Tail thresholds for the bound comparison.
    pub c_values: Vec<f64>,
    pub params: SymmetricShockParams,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WelfareSection {
    pub runs: u32,
    pub m_values: Vec<u32>,
    pub target_lo: f64,
    pub target_hi: f64,
    pub amplitude_lo: f64,
    pub amplitude_hi: f64,
    pub elasticity_lo: f64,
    pub elasticity_hi: f64,
    pub shared_gas_fill: f64,
    pub chaff: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatioSection {
    pub m_max: u32,
    pub samples: u32,
    pub bound_c: f64,
    pub distributions: Vec<DiscreteDist>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RevenueSection {
    pub n_values: Vec<usize>,
    pub m_values: Vec<usize>,
    pub instances_per_cell: u32,
    /// Wall-clock budget per benchmark cell; remaining instances in an
    /// exhausted cell are recorded as skipped rather than failing the run.
    pub time_budget_secs: f64,
    pub node_budget: u64,
    pub fptas_epsilon: f64,
    /// Sizes of the one-dimensional timing family.
    pub dp_n_values: Vec<usize>,
    pub dp_unit: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReduceSection {
    pub instances: u32,
    pub n_max: usize,
    pub m_max: usize,
    pub scale_factors: Vec<f64>,
}

impl RunConfig {
    /// Parses a TOML file; parse errors carry the offending line and key.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text)
            .map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))
    }

    /// Full validation of every present section, including the gas cap
    /// safety check.
    pub fn validate(&self) -> Result<()> {
        let bounds = self.mechanism.bounds()?;
        let _gas = self.mechanism.gas_config()?;
        let model = self.demand.model()?;
        if model.dims() != bounds.dims() {
            return Err(Error::DimensionMismatch { expected: bounds.dims(), got: model.dims() });
        }

        if let Some(shock) = &self.shock {
            if shock.m_values.is_empty() || shock.runs == 0 || shock.baseline_runs == 0 {
                return Err(Error::InvalidParameter("shock section needs runs and m values".into()));
            }
            for c in &shock.c_values {
                if !(c.is_finite() && *c > 0.0) {
                    return Err(Error::InvalidParameter(format!("shock c must be positive, got {c}")));
                }
            }
            for &m in &shock.m_values {
                if m < 2 {
                    return Err(Error::InvalidParameter(
                        "shock m values must be at least 2".into(),
                    ));
                }
                shock.params.scenario(m as usize, self.seed)?;
            }
            shock.params.scenario(1, self.seed)?;
        }

        if let Some(w) = &self.welfare {
            if w.runs == 0 || w.m_values.is_empty() {
                return Err(Error::InvalidParameter("welfare section needs runs and m values".into()));
            }
            if !(w.target_lo > 0.0 && w.target_hi >= w.target_lo) {
                return Err(Error::InvalidParameter("welfare target range invalid".into()));
            }
            if !(w.amplitude_lo > 0.0 && w.amplitude_hi >= w.amplitude_lo) {
                return Err(Error::InvalidParameter("welfare amplitude range invalid".into()));
            }
            if !(w.elasticity_lo > 0.0 && w.elasticity_hi >= w.elasticity_lo) {
                return Err(Error::InvalidParameter("welfare elasticity range invalid".into()));
            }
            if !(w.shared_gas_fill > 0.0 && w.shared_gas_fill < 1.0) {
                return Err(Error::InvalidParameter("shared gas fill must be in (0, 1)".into()));
            }
        }

        if let Some(r) = &self.ratio {
            if r.m_max == 0 || r.distributions.is_empty() {
                return Err(Error::InvalidParameter("ratio section needs m_max and distributions".into()));
            }
            if r.samples < 1_000 {
                return Err(Error::InvalidParameter("ratio needs at least 1000 samples".into()));
            }
            if !(r.bound_c > 0.0) {
                return Err(Error::InvalidParameter("ratio bound_c must be positive".into()));
            }
            for d in &r.distributions {
                d.validate()?;
            }
        }

        if let Some(r) = &self.revenue {
            if r.n_values.is_empty() || r.m_values.is_empty() || r.instances_per_cell == 0 {
                return Err(Error::InvalidParameter("revenue matrix must be nonempty".into()));
            }
            if !(r.fptas_epsilon > 0.0 && r.fptas_epsilon < 1.0) {
                return Err(Error::InvalidParameter("fptas epsilon must be in (0, 1)".into()));
            }
            if !(r.dp_unit > 0.0) {
                return Err(Error::InvalidParameter("dp unit must be positive".into()));
            }
            if !(r.time_budget_secs > 0.0) || r.node_budget == 0 {
                return Err(Error::InvalidParameter("revenue budgets must be positive".into()));
            }
        }

        if let Some(r) = &self.reduce {
            if r.instances == 0 || r.n_max == 0 || r.n_max > 20 || r.m_max == 0 {
                return Err(Error::InvalidParameter(
                    "reduce needs instances and brute-forceable sizes".into(),
                ));
            }
            for c in &r.scale_factors {
                if !(c.is_finite() && *c > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "scale factor must be positive, got {c}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> String {
        r#"
seed = 1
[mechanism]
weights = [1.0, 2.0]
resource_caps = [10.0, 8.0]
[demand]
amplitudes = [100.0, 100.0]
elasticities = [1.0, 1.0]
noise_sigma = 0.1
tx_size_mean = 1.0
tx_size_jitter = 0.5
margin_lo = 0.6
margin_hi = 2.0
"#
        .to_string()
    }

    #[test]
    fn minimal_config_parses_and_validates() {
        let cfg: RunConfig = toml::from_str(&minimal()).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.mechanism.gas_config().unwrap().gas_cap(), 10.0);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = minimal() + "\nbogus_key = 3\n";
        assert!(toml::from_str::<RunConfig>(&text).is_err());
        let text = minimal().replace("[demand]", "[demand]\nmystery = 1.0");
        assert!(toml::from_str::<RunConfig>(&text).is_err());
    }

    #[test]
    fn unsafe_gas_cap_names_the_resource() {
        let text = minimal().replace("resource_caps = [10.0, 8.0]", "resource_caps = [10.0, 8.0]\ngas_cap = 10.5");
        let cfg: RunConfig = toml::from_str(&text).unwrap();
        let err = cfg.validate().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("resource 0"), "message was: {msg}");
    }
}

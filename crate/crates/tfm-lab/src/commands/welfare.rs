//! Stable-state welfare comparison over seeded randomized scenarios.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use super::{CmdResult, Failure, OutDir};
use crate::config::RunConfig;
use crate::mechanism::{GasConfig, ResourceBounds};
use crate::sim::{welfare_experiment, DemandModel, ResourceDemand, WelfareConfig};

#[derive(Debug, Serialize)]
struct WelfareRow {
    seed: u64,
    m: u32,
    welfare_one: f64,
    welfare_multi: f64,
    strict_extension: bool,
    sustainable: bool,
}

#[derive(Debug, Serialize)]
struct WelfareReport {
    runs: u32,
    dominated: u32,
    strict: u32,
    unsustainable: u32,
    verdict: &'static str,
}

/// Runs the `[welfare]` experiment: per seed, a randomized symmetric-ish
/// scenario with targets, amplitudes, elasticities, and weights drawn from
/// the configured ranges, then one welfare comparison on a shared mempool.
pub fn cmd_welfare(cfg: &RunConfig, out: &OutDir) -> CmdResult {
    let section = cfg
        .welfare
        .as_ref()
        .ok_or_else(|| Failure::Validation("config has no [welfare] section".into()))?;

    let mut rows = Vec::new();
    for run in 0..section.runs {
        let m = section.m_values[run as usize % section.m_values.len()] as usize;
        let seed = cfg.seed ^ (run as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let mut rng = ChaCha12Rng::seed_from_u64(seed);

        let caps: Vec<f64> =
            (0..m).map(|_| 2.0 * rng.gen_range(section.target_lo..=section.target_hi)).collect();
        let weights: Vec<f64> = (0..m).map(|_| rng.gen_range(0.5..=2.0)).collect();
        let bounds = ResourceBounds::from_caps(caps).map_err(Failure::from)?;
        let gas = GasConfig::with_max_safe_cap(weights, &bounds).map_err(Failure::from)?;
        let demand = DemandModel {
            resources: (0..m)
                .map(|_| ResourceDemand {
                    amplitude: rng.gen_range(section.amplitude_lo..=section.amplitude_hi),
                    elasticity: rng.gen_range(section.elasticity_lo..=section.elasticity_hi),
                })
                .collect(),
            noise_sigma: 0.0,
            tx_size_mean: 1.0,
            tx_size_jitter: 0.5,
            margin_lo: 0.6,
            margin_hi: 2.0,
        };
        let wcfg = WelfareConfig {
            gas,
            bounds,
            demand,
            shared_gas_fill: section.shared_gas_fill,
            chaff: section.chaff,
        };
        let outcome = welfare_experiment(&wcfg, seed).map_err(Failure::from)?;
        rows.push(WelfareRow {
            seed,
            m: m as u32,
            welfare_one: outcome.welfare_one,
            welfare_multi: outcome.welfare_multi,
            strict_extension: outcome.strict_extension,
            sustainable: outcome.sustainable,
        });
    }

    let mut csv = String::from("seed,m,welfare_one,welfare_multi,strict_extension,sustainable\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.seed, r.m, r.welfare_one, r.welfare_multi, r.strict_extension, r.sustainable
        ));
    }
    out.write("welfare.csv", csv)?;

    let dominated = rows
        .iter()
        .filter(|r| {
            r.welfare_multi >= r.welfare_one
                && (!r.strict_extension || r.welfare_multi > r.welfare_one)
        })
        .count() as u32;
    let strict = rows.iter().filter(|r| r.strict_extension).count() as u32;
    let unsustainable = rows.iter().filter(|r| !r.sustainable).count() as u32;
    let pass = dominated == section.runs && unsustainable == 0;
    let report = WelfareReport {
        runs: section.runs,
        dominated,
        strict,
        unsustainable,
        verdict: if pass { "PASS" } else { "FAIL" },
    };
    out.write_json("welfare_report.json", &report)?;
    println!(
        "welfare dominance: {}/{} runs dominated, {} strict extensions, {} unsustainable -> {}",
        dominated, section.runs, strict, unsustainable, report.verdict
    );
    if !pass {
        return Err(Failure::Acceptance("welfare dominance verdict failed".into()));
    }
    Ok(())
}

//! Demand-shock stabilization experiment and the expectation-ratio bound
//! comparison.

use serde::Serialize;

use super::{CmdResult, Failure, OutDir};
use crate::analysis::{tail_probability, theoretical_ratio_lower_bound};
use crate::config::RunConfig;
use crate::sim::stats::bootstrap_ratio_ci;
use crate::sim::{estimate_stat_distance, shock_experiment, ShockSamples};

#[derive(Debug, Serialize)]
pub struct BoundCheck {
    pub m: u32,
    pub c: f64,
    pub p_hat: f64,
    pub delta_hat: f64,
    pub bound: f64,
    pub ratio: f64,
    pub ratio_ci: (f64, f64),
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct ShockReport {
    pub baseline_runs: u32,
    pub baseline_unstabilized: u32,
    pub baseline_mean: f64,
    pub baseline_ci: (f64, f64),
    pub per_m: Vec<MDimReport>,
    pub checks: Vec<BoundCheck>,
    pub all_pass: bool,
}

#[derive(Debug, Serialize)]
pub struct MDimReport {
    pub m: u32,
    pub runs: u32,
    pub unstabilized: u32,
    pub mean_overall: f64,
    pub ci_overall: (f64, f64),
    pub ratio_vs_baseline: f64,
}

/// Runs the full shock comparison from the `[shock]` section and verifies the
/// theoretical lower bound against the empirical ratio for every `(m, c)`.
pub fn cmd_shock(cfg: &RunConfig, out: &OutDir) -> CmdResult {
    let section = cfg
        .shock
        .as_ref()
        .ok_or_else(|| Failure::Validation("config has no [shock] section".into()))?;

    let baseline_cfg = section.params.scenario(1, cfg.seed).map_err(Failure::from)?;
    let baseline = shock_experiment(&baseline_cfg, section.baseline_runs).map_err(Failure::from)?;
    write_samples(out, 1, &baseline)?;
    let baseline_f64 = baseline.overall_f64();

    let mut per_m = Vec::new();
    let mut checks = Vec::new();
    for &m in &section.m_values {
        let scenario = section.params.scenario(m as usize, cfg.seed).map_err(Failure::from)?;
        let samples = shock_experiment(&scenario, section.runs).map_err(Failure::from)?;
        write_samples(out, m, &samples)?;

        let delta_hat = samples
            .per_price
            .iter()
            .map(|col| estimate_stat_distance(&baseline.overall, col))
            .fold(0.0f64, f64::max);
        let ratio = samples.mean_overall / baseline.mean_overall;
        let ratio_ci = bootstrap_ratio_ci(
            &samples.overall_f64(),
            &baseline_f64,
            2000,
            cfg.seed ^ (m as u64) << 8,
        );
        per_m.push(MDimReport {
            m,
            runs: section.runs,
            unstabilized: samples.unstabilized,
            mean_overall: samples.mean_overall,
            ci_overall: samples.ci_overall,
            ratio_vs_baseline: ratio,
        });

        for &c in &section.c_values {
            let p_hat = tail_probability(&baseline_f64, c);
            let bound = theoretical_ratio_lower_bound(c, p_hat, delta_hat, m)
                .map_err(|e| Failure::Runtime(format!("bound at m={m}, c={c}: {e}")))?;
            let pass = ratio_ci.0 >= bound;
            checks.push(BoundCheck { m, c, p_hat, delta_hat, bound, ratio, ratio_ci, pass });
        }
    }

    let all_pass = checks.iter().all(|c| c.pass);
    let report = ShockReport {
        baseline_runs: section.baseline_runs,
        baseline_unstabilized: baseline.unstabilized,
        baseline_mean: baseline.mean_overall,
        baseline_ci: baseline.ci_overall,
        per_m,
        checks,
        all_pass,
    };
    out.write_json("shock_report.json", &report)?;

    for check in &report.checks {
        println!(
            "m={} c={}: ratio {:.4} (ci [{:.4}, {:.4}]) vs bound {:.4} with p={:.4} delta={:.4} -> {}",
            check.m,
            check.c,
            check.ratio,
            check.ratio_ci.0,
            check.ratio_ci.1,
            check.bound,
            check.p_hat,
            check.delta_hat,
            if check.pass { "pass" } else { "FAIL" }
        );
    }
    if !all_pass {
        return Err(Failure::Acceptance(
            "empirical expectation ratio fell below the theoretical lower bound".into(),
        ));
    }
    Ok(())
}

fn write_samples(out: &OutDir, m: u32, samples: &ShockSamples) -> std::result::Result<(), Failure> {
    let mut csv = String::new();
    if samples.fee_dims == 1 {
        csv.push_str("run,z\n");
        for (i, z) in samples.overall.iter().enumerate() {
            csv.push_str(&format!("{i},{z}\n"));
        }
    } else {
        let mut header: Vec<String> = vec!["run".into()];
        header.extend((0..samples.fee_dims).map(|i| format!("z_{i}")));
        header.push("z_max".into());
        csv.push_str(&header.join(","));
        csv.push('\n');
        for (i, z) in samples.overall.iter().enumerate() {
            let mut row = vec![i.to_string()];
            row.extend(samples.per_price.iter().map(|col| col[i].to_string()));
            row.push(z.to_string());
            csv.push_str(&row.join(","));
            csv.push('\n');
        }
    }
    out.write(&format!("z_samples_m{m}.csv"), csv)?;
    Ok(())
}

//! Experiment orchestration behind the CLI subcommands. Every command is
//! non-interactive, deterministic for a fixed config and seed, and returns a
//! typed failure that maps onto the process exit code.

mod ratio;
mod reduce;
mod revenue;
mod shock;
mod welfare;

pub use ratio::cmd_ratio;
pub use reduce::cmd_reduce;
pub use revenue::cmd_revenue;
pub use shock::cmd_shock;
pub use welfare::cmd_welfare;

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::Error;
use crate::mechanism::BaseFeeState;
use crate::sim::{find_stable_prices, verify_stable, Mechanism};

/// Why a command failed; decides the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad config or refused overwrite: exit 1.
    Validation(String),
    /// Everything else going wrong at runtime: exit 2.
    Runtime(String),
    /// An experiment ran but its acceptance property failed: exit 3.
    Acceptance(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Runtime(_) => 2,
            Failure::Acceptance(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Runtime(m) | Failure::Acceptance(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

pub type CmdResult = std::result::Result<(), Failure>;

/// Output directory guard: existing files are never overwritten unless the
/// caller passed `--force`.
pub struct OutDir {
    root: PathBuf,
    force: bool,
}

impl OutDir {
    pub fn new(root: impl Into<PathBuf>, force: bool) -> Self {
        Self { root: root.into(), force }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> std::result::Result<PathBuf, Failure> {
        fs::create_dir_all(&self.root)
            .map_err(|e| Failure::Runtime(format!("creating {}: {e}", self.root.display())))?;
        let path = self.root.join(name);
        if path.exists() && !self.force {
            return Err(Failure::Validation(format!(
                "{} exists; pass --force to overwrite",
                path.display()
            )));
        }
        fs::write(&path, contents)
            .map_err(|e| Failure::Runtime(format!("writing {}: {e}", path.display())))?;
        Ok(path)
    }

    pub fn write_json<T: serde::Serialize>(
        &self,
        name: &str,
        value: &T,
    ) -> std::result::Result<PathBuf, Failure> {
        let text = serde_json::to_string_pretty(value)
            .map_err(|e| Failure::Runtime(format!("serializing {name}: {e}")))?;
        self.write(name, text)
    }
}

/// Parses and fully validates a config file.
pub fn load_config(path: &Path, seed_override: Option<u64>) -> std::result::Result<RunConfig, Failure> {
    let mut cfg = RunConfig::load(path).map_err(|e| Failure::Validation(e.to_string()))?;
    if let Some(seed) = seed_override {
        cfg.seed = seed;
    }
    cfg.validate().map_err(|e| Failure::Validation(e.to_string()))?;
    Ok(cfg)
}

/// Validates the config and reports the result; exit 0 means valid.
pub fn cmd_validate(path: &Path) -> CmdResult {
    let cfg = load_config(path, None)?;
    println!("{} is valid", path.display());
    println!(
        "  mechanism: {} resources, gas cap {}",
        cfg.mechanism.resource_caps.len(),
        cfg.mechanism.gas_config().map_err(|e| Failure::Validation(e.to_string()))?.gas_cap()
    );
    for section in [
        ("shock", cfg.shock.is_some()),
        ("welfare", cfg.welfare.is_some()),
        ("ratio", cfg.ratio.is_some()),
        ("revenue", cfg.revenue.is_some()),
        ("reduce", cfg.reduce.is_some()),
    ] {
        println!("  [{}] {}", section.0, if section.1 { "present" } else { "absent" });
    }
    Ok(())
}

/// Computes and prints stable prices for the configured demand under both the
/// gas mechanism and per-resource pricing, with a fixed-point verification.
pub fn cmd_stable(cfg: &RunConfig) -> CmdResult {
    let bounds = cfg.mechanism.bounds().map_err(Failure::from)?;
    let gas = cfg.mechanism.gas_config().map_err(Failure::from)?;
    let model = cfg.demand.model().map_err(Failure::from)?;

    let one = Mechanism::OneDim { gas: gas.clone(), bounds: bounds.clone() };
    let multi = Mechanism::MultiDim { bounds };
    let fee_one = find_stable_prices(&model, &one).map_err(Failure::from)?;
    let fees_multi = find_stable_prices(&model, &multi).map_err(Failure::from)?;
    report_stable("one-dimensional", &model, &one, &fee_one)?;
    report_stable("multi-dimensional", &model, &multi, &fees_multi)?;
    Ok(())
}

fn report_stable(
    label: &str,
    model: &crate::sim::DemandModel,
    mech: &Mechanism,
    fees: &BaseFeeState,
) -> CmdResult {
    let fixed = verify_stable(model, mech, fees, 1e-6).map_err(Failure::from)?;
    let rendered: Vec<String> = fees.fees().iter().map(|f| format!("{f:.6}")).collect();
    println!("{label}: [{}] fixed point: {}", rendered.join(", "), if fixed { "yes" } else { "no" });
    if !fixed {
        return Err(Failure::Acceptance(format!("{label} stable prices failed verification")));
    }
    Ok(())
}

//! Expectation-ratio curves over the number of dimensions, with CSV and SVG
//! emission.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::dist::DiscreteDist;
use super::ratio::{exact_ratio_iid, exact_tail_probability, mc_ratio_iid, theoretical_ratio_lower_bound};
use super::svg::{line_chart, Series};
use crate::error::{Error, Result};

/// One curve row: dimension count against exact ratio, Monte Carlo estimate
/// with confidence interval, and the theoretical lower bound.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RatioCurvePoint {
    pub m: u32,
    pub exact: f64,
    pub mc: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub bound: f64,
}

/// A full curve for one distribution.
#[derive(Debug, Clone, Serialize)]
pub struct RatioCurve {
    pub distribution: String,
    pub points: Vec<RatioCurvePoint>,
}

impl RatioCurve {
    /// Exact ratios are nondecreasing in the dimension count by construction;
    /// violations indicate a summation bug.
    pub fn exact_is_nondecreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].exact >= w[0].exact)
    }

    pub fn mc_is_nondecreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].mc >= w[0].mc)
    }
}

/// Computes the curve for one distribution over `m = 1..=m_max`. The bound
/// column uses the exact tail probability at `(1 + bound_c)` times the mean
/// and zero statistical distance, matching the independent identical draws.
pub fn compute_ratio_curve(
    dist: &DiscreteDist,
    m_max: u32,
    samples: u32,
    seed: u64,
    bound_c: f64,
) -> Result<RatioCurve> {
    let p = exact_tail_probability(dist, bound_c)?;
    let mut points = Vec::with_capacity(m_max as usize);
    for m in 1..=m_max {
        let exact = exact_ratio_iid(dist, m)?;
        let mc = mc_ratio_iid(dist, m, samples, seed ^ (m as u64) << 32)?;
        let bound = theoretical_ratio_lower_bound(bound_c, p, 0.0, m)?;
        points.push(RatioCurvePoint {
            m,
            exact,
            mc: mc.estimate,
            ci_lo: mc.ci_lo,
            ci_hi: mc.ci_hi,
            bound,
        });
    }
    Ok(RatioCurve { distribution: dist.label().to_string(), points })
}

/// Writes one CSV and one SVG per distribution into `out_dir` and returns the
/// created paths. File contents are deterministic for a fixed seed.
pub fn emit_ratio_curve(
    dists: &[DiscreteDist],
    m_max: u32,
    samples: u32,
    seed: u64,
    bound_c: f64,
    out_dir: &Path,
) -> Result<(Vec<RatioCurve>, Vec<PathBuf>)> {
    fs::create_dir_all(out_dir)?;
    let mut curves = Vec::new();
    let mut paths = Vec::new();
    for (i, dist) in dists.iter().enumerate() {
        let curve = compute_ratio_curve(dist, m_max, samples, seed.wrapping_add(i as u64), bound_c)?;

        let csv_path = out_dir.join(format!("ratio_{}.csv", curve.distribution));
        let mut csv = String::from("m,exact,mc,ci_lo,ci_hi,bound\n");
        for p in &curve.points {
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                p.m, p.exact, p.mc, p.ci_lo, p.ci_hi, p.bound
            ));
        }
        fs::write(&csv_path, csv)?;
        paths.push(csv_path);

        let svg_path = out_dir.join(format!("ratio_{}.svg", curve.distribution));
        let series = [
            Series {
                label: "exact",
                color: "#1f77b4",
                points: curve.points.iter().map(|p| (p.m as f64, p.exact)).collect(),
                dashed: false,
            },
            Series {
                label: "monte carlo",
                color: "#d62728",
                points: curve.points.iter().map(|p| (p.m as f64, p.mc)).collect(),
                dashed: true,
            },
            Series {
                label: "lower bound",
                color: "#2ca02c",
                points: curve.points.iter().map(|p| (p.m as f64, p.bound)).collect(),
                dashed: false,
            },
        ];
        let title = format!("expectation ratio vs dimensions ({})", curve.distribution);
        fs::write(&svg_path, line_chart(&title, "m", "ratio", &series))?;
        paths.push(svg_path);

        curves.push(curve);
    }
    if curves.is_empty() {
        return Err(Error::InvalidParameter("at least one distribution required".into()));
    }
    Ok((curves, paths))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_families() -> Vec<DiscreteDist> {
        vec![
            DiscreteDist::geometric(0.5).unwrap(),
            DiscreteDist::poisson(5.0).unwrap(),
            DiscreteDist::negative_binomial(3.0, 0.5).unwrap(),
            DiscreteDist::logarithmic(0.7).unwrap(),
        ]
    }

    #[test]
    fn emits_csv_and_svg_per_distribution() {
        let dir = tempfile::tempdir().unwrap();
        let (curves, paths) =
            emit_ratio_curve(&all_families(), 6, 5_000, 11, 2.0, dir.path()).unwrap();
        assert_eq!(curves.len(), 4);
        assert_eq!(paths.len(), 8);
        for p in &paths {
            assert!(p.exists());
        }
        for curve in &curves {
            assert_eq!(curve.points[0].exact, 1.0);
            assert!(curve.exact_is_nondecreasing());
            for p in &curve.points {
                assert!(p.bound <= p.exact + 1e-12, "bound above exact at m={}", p.m);
            }
        }
    }

    #[test]
    fn csv_first_row_has_exact_one() {
        let dir = tempfile::tempdir().unwrap();
        let dists = [DiscreteDist::geometric(0.5).unwrap()];
        let (_, paths) = emit_ratio_curve(&dists, 3, 2_000, 5, 2.0, dir.path()).unwrap();
        let csv = std::fs::read_to_string(&paths[0]).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "m,exact,mc,ci_lo,ci_hi,bound");
        assert!(lines.next().unwrap().starts_with("1,1,"));
    }

    #[test]
    fn emission_is_deterministic() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let dists = [DiscreteDist::poisson(5.0).unwrap()];
        let (_, pa) = emit_ratio_curve(&dists, 4, 2_000, 3, 2.0, a.path()).unwrap();
        let (_, pb) = emit_ratio_curve(&dists, 4, 2_000, 3, 2.0, b.path()).unwrap();
        for (x, y) in pa.iter().zip(&pb) {
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
        }
    }
}

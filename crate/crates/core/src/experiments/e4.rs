//! `H = ½p²`, `φ(x) = x` solves `H(Dφ) = ½`. Data `φ + bump` with compact
//! bump: `u(·, t) + t/2 → φ` on compact sets, and the limit does not depend
//! on the bump.

use serde::{Deserialize, Serialize};

use super::{sampled_bump, ExperimentReport, Relation, Verdict};
use crate::error::{HjError, Result};
use crate::grid::{Grid1D, SampledFn, Window};
use crate::hamiltonian::HamiltonianSpec;
use crate::variational::HopfLax;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BumpConfig {
    /// Signed height; negative values give a well.
    pub height: f64,
    pub center: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct E4Config {
    pub bump: BumpConfig,
    pub second_bump: BumpConfig,
    pub half_width: f64,
    pub cells_per_side: usize,
    pub window: Window,
    pub samples: usize,
    pub times: Vec<f64>,
    /// Trailing panel points on which the defect must not increase.
    pub late_points: usize,
    pub tol: f64,
    /// Round-off allowance for the monotonicity check.
    pub slack: f64,
}

impl Default for BumpConfig {
    fn default() -> Self {
        Self {
            height: -1.0,
            center: 0.0,
            width: 1.0,
        }
    }
}

impl Default for E4Config {
    fn default() -> Self {
        Self {
            bump: BumpConfig::default(),
            second_bump: BumpConfig {
                height: -0.5,
                center: 1.0,
                width: 2.0,
            },
            half_width: 10.0,
            cells_per_side: 1000,
            window: Window { lo: -5.0, hi: 5.0 },
            samples: 201,
            times: vec![0.0, 1.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 16.0, 20.0],
            late_points: 4,
            tol: 1e-2,
            slack: 1e-12,
        }
    }
}

/// `φ + bump` on a grid, plus `u(·, t) + t/2` at the sample points.
pub(super) struct Perturbed {
    pub u0: SampledFn,
}

impl Perturbed {
    pub fn new(grid: Grid1D, bump: &BumpConfig) -> Result<Self> {
        let b = sampled_bump(grid, bump.height, bump.center, bump.width)?;
        let u0 = b.map_points(|x, v| x + v)?;
        Ok(Self {
            u0: u0.with_extension(crate::grid::Extension::LinearExtrapolate),
        })
    }

    pub fn shifted_profile(&self, h: &HamiltonianSpec, xs: &[f64], t: f64) -> Result<Vec<f64>> {
        if t == 0.0 {
            return Ok(xs.iter().map(|&x| self.u0.eval(x)).collect());
        }
        let solver = HopfLax::new(h, &self.u0)?;
        xs.iter()
            .map(|&x| Ok(solver.evaluate(x, t)? + 0.5 * t))
            .collect()
    }
}

pub(super) fn sample_points(w: Window, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(HjError::InvalidInput(
            "need at least two sample points".into(),
        ));
    }
    Ok(crate::numerics::linspace(w.lo, w.hi, n))
}

pub(super) fn run(cfg: &E4Config, rep: &mut ExperimentReport) -> Result<()> {
    let grid = Grid1D::symmetric(cfg.half_width, cfg.cells_per_side)?;
    let h = HamiltonianSpec::quadratic(0.0);
    let xs = sample_points(cfg.window, cfg.samples)?;
    let first = Perturbed::new(grid, &cfg.bump)?;
    let mut defect = Vec::with_capacity(cfg.times.len());
    let mut final_profile = Vec::new();
    for &t in &cfg.times {
        let prof = first.shifted_profile(&h, &xs, t)?;
        defect.push((
            t,
            xs.iter()
                .zip(&prof)
                .map(|(x, v)| (v - x).abs())
                .fold(0.0, f64::max),
        ));
        final_profile = prof;
    }
    let horizon = cfg
        .times
        .last()
        .copied()
        .ok_or_else(|| HjError::InvalidInput("empty time panel".into()))?;
    rep.push(Verdict::compare(
        "defect_at_horizon",
        defect.last().unwrap().1,
        Relation::Le,
        cfg.tol,
        format!("sup over the window of |u(·,{horizon}) + t/2 − φ|"),
    ));
    let late = &defect[defect.len().saturating_sub(cfg.late_points)..];
    let rise = late.windows(2).map(|w| w[1].1 - w[0].1).fold(0.0, f64::max);
    rep.push(Verdict::compare(
        "defect_late_nonincreasing",
        rise,
        Relation::Le,
        cfg.slack,
        "largest increase on the late panel",
    ));

    let second = Perturbed::new(grid, &cfg.second_bump)?;
    let other = second.shifted_profile(&h, &xs, horizon)?;
    let gap = final_profile
        .iter()
        .zip(&other)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    rep.push(Verdict::compare(
        "limit_independent_of_bump",
        gap,
        Relation::Le,
        2.0 * cfg.tol,
        "sup distance between the horizon profiles of the two perturbations",
    ));
    rep.push_series("defect", defect);
    rep.push_series("limit_profile", xs.iter().copied().zip(final_profile));
    rep.push_series("second_limit_profile", xs.iter().copied().zip(other));
    Ok(())
}

//! Same data as the φ-convergence run: the start point of the minimizer
//! ending at `(0, t)` moves off to infinity.

use serde::{Deserialize, Serialize};

use super::e4::{BumpConfig, Perturbed};
use super::{ExperimentReport, Relation, Verdict};
use crate::error::{HjError, Result};
use crate::grid::Grid1D;
use crate::hamiltonian::HamiltonianSpec;
use crate::variational::{backtrack_with, HopfLax};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct E5Config {
    pub bump: BumpConfig,
    pub half_width: f64,
    pub cells_per_side: usize,
    pub x: f64,
    pub times: Vec<f64>,
    pub thresholds: Vec<f64>,
}

impl Default for E5Config {
    fn default() -> Self {
        Self {
            bump: BumpConfig::default(),
            half_width: 10.0,
            cells_per_side: 1000,
            x: 0.0,
            times: vec![2.0, 5.0, 10.0, 20.0, 40.0],
            thresholds: vec![5.0, 10.0, 20.0],
        }
    }
}

pub(super) fn run(cfg: &E5Config, rep: &mut ExperimentReport) -> Result<()> {
    if cfg.times.is_empty() || cfg.times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(HjError::InvalidInput(
            "times must be non-empty and increasing".into(),
        ));
    }
    let grid = Grid1D::symmetric(cfg.half_width, cfg.cells_per_side)?;
    let data = Perturbed::new(grid, &cfg.bump)?;
    let h = HamiltonianSpec::quadratic(0.0);
    let solver = HopfLax::new(&h, &data.u0)?;
    let mut start = Vec::new();
    let mut distance = Vec::new();
    let mut actions = Vec::new();
    for &t in &cfg.times {
        let tr = backtrack_with(&solver, cfg.x, t)?;
        start.push((t, tr.start_point));
        distance.push((t, tr.start_point.abs()));
        actions.push((t, tr.action));
    }
    for &thr in &cfg.thresholds {
        // Beyond `thr` from some panel time on.
        let tail = distance
            .iter()
            .rposition(|p| p.1 <= thr)
            .map_or(0, |i| i + 1);
        let ok = tail < distance.len();
        rep.push(Verdict::compare(
            format!("escape_beyond_{thr}"),
            distance.last().unwrap().1,
            Relation::Gt,
            thr,
            if ok {
                format!("|γ_t(0)| > {thr} for every panel t ≥ {}", distance[tail].0)
            } else {
                format!("|γ_t(0)| never exceeds {thr} on the panel")
            },
        ));
    }
    let min_step = distance
        .windows(2)
        .map(|w| w[1].1 - w[0].1)
        .fold(f64::INFINITY, f64::min);
    rep.push(Verdict::compare(
        "monotone_escape",
        min_step,
        Relation::Gt,
        0.0,
        "smallest increase of |γ_t(0)| between panel times",
    ));
    rep.push_series("start_point", start);
    rep.push_series("start_distance", distance);
    rep.push_series("action", actions);
    Ok(())
}

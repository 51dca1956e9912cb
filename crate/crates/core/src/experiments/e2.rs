//! A small well `−ε·bump` in otherwise flat data: without drift the well is
//! felt everywhere eventually (`u(0, t) = −ε`), with drift it is carried
//! along `x = −t` and lost at the origin.

use serde::{Deserialize, Serialize};

use super::{sampled_bump, ExperimentReport, Relation, Verdict};
use crate::error::Result;
use crate::grid::Grid1D;
use crate::hamiltonian::HamiltonianSpec;
use crate::variational::HopfLax;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct E2Config {
    pub eps: f64,
    pub half_width: f64,
    pub cells_per_side: usize,
    pub times: Vec<f64>,
    /// Fixed time for the far-field check.
    pub far_time: f64,
    pub far_x: f64,
    pub tol: f64,
}

impl Default for E2Config {
    fn default() -> Self {
        Self {
            eps: 0.1,
            half_width: 30.0,
            cells_per_side: 3000,
            times: vec![0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0],
            far_time: 10.0,
            far_x: 20.0,
            tol: 1e-2,
        }
    }
}

pub(super) fn run(cfg: &E2Config, rep: &mut ExperimentReport) -> Result<()> {
    let grid = Grid1D::symmetric(cfg.half_width, cfg.cells_per_side)?;
    let u0 = sampled_bump(grid, -cfg.eps, 0.0, 1.0)?;
    let t_last = cfg.times.iter().copied().fold(f64::NAN, f64::max);

    let still = HamiltonianSpec::quadratic(0.0);
    let a = HopfLax::new(&still, &u0)?;
    let origin = cfg
        .times
        .iter()
        .map(|&t| Ok((t, a.evaluate(0.0, t)?)))
        .collect::<Result<Vec<_>>>()?;
    let far = [-cfg.far_x, cfg.far_x]
        .iter()
        .map(|&x| a.evaluate(x, cfg.far_time).map(f64::abs))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    rep.push(Verdict::compare(
        "a_origin_limit",
        (origin.last().map_or(f64::NAN, |p| p.1) + cfg.eps).abs(),
        Relation::Le,
        cfg.tol,
        format!("|u(0,{t_last}) + ε| without drift"),
    ));
    rep.push(Verdict::compare(
        "a_far_field",
        far,
        Relation::Le,
        cfg.tol,
        format!("max |u(±{}, {})| without drift", cfg.far_x, cfg.far_time),
    ));
    rep.push_series("a_u_origin", origin);

    let moving = HamiltonianSpec::quadratic(1.0);
    let b = HopfLax::new(&moving, &u0)?;
    let along = cfg
        .times
        .iter()
        .map(|&t| Ok((t, b.evaluate(-t, t)?)))
        .collect::<Result<Vec<_>>>()?;
    let origin_b = cfg
        .times
        .iter()
        .map(|&t| Ok((t, b.evaluate(0.0, t)?)))
        .collect::<Result<Vec<_>>>()?;
    rep.push(Verdict::compare(
        "b_moving_frame",
        along
            .iter()
            .map(|p| (p.1 + cfg.eps).abs())
            .fold(0.0, f64::max),
        Relation::Le,
        cfg.tol,
        "max over t of |u(−t,t) + ε| with drift 1",
    ));
    rep.push(Verdict::compare(
        "b_origin_limit",
        origin_b.last().map_or(f64::NAN, |p| p.1.abs()),
        Relation::Le,
        cfg.tol,
        format!("|u(0,{t_last})| with drift 1"),
    ));
    rep.push_series("b_u_moving", along);
    rep.push_series("b_u_origin", origin_b);
    Ok(())
}

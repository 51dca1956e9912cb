//! `u_t + |Du|² = εf` with `min f = f(0) = −1`: the critical value is
//! `λ = ε`, `u + εt` converges to a solution of `|Du|² = εf + ε`, and
//! `u(0, t)` decreases.

use serde::{Deserialize, Serialize};

use super::{sampled_bump, ExperimentReport, Relation, Verdict};
use crate::error::{HjError, Result};
use crate::fd::{evolve_lf, EvolveConfig, Flux};
use crate::grid::{Grid1D, SampledFn, Window};
use crate::hamiltonian::HamiltonianSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct E3Config {
    pub eps: f64,
    pub half_width: f64,
    pub dx: f64,
    pub horizon: f64,
    pub snapshot_every: f64,
    pub window: Window,
    pub flux: Flux,
    pub stabilization_tol: f64,
    /// Defaults to `5·dx^{1/2}`.
    pub residual_tol: Option<f64>,
}

impl Default for E3Config {
    fn default() -> Self {
        Self {
            eps: 0.1,
            half_width: 12.0,
            dx: 0.02,
            horizon: 30.0,
            snapshot_every: 1.0,
            window: Window { lo: -2.0, hi: 2.0 },
            flux: Flux::Godunov,
            stabilization_tol: 1e-3,
            residual_tol: None,
        }
    }
}

pub(super) fn run(cfg: &E3Config, rep: &mut ExperimentReport) -> Result<()> {
    if !(cfg.dx > 0.0 && cfg.snapshot_every > 0.0 && cfg.horizon > cfg.snapshot_every) {
        return Err(HjError::InvalidInput(
            "need dx > 0 and 0 < snapshot_every < horizon".into(),
        ));
    }
    let grid = Grid1D::symmetric(cfg.half_width, (cfg.half_width / cfg.dx).round() as usize)?;
    let f = sampled_bump(grid, -1.0, 0.0, 1.0)?;
    let h = HamiltonianSpec::quad_potential(cfg.eps, f.clone());
    let u0 = SampledFn::constant(grid, 0.0)?;
    let count = (cfg.horizon / cfg.snapshot_every).round() as usize;
    let times: Vec<f64> = (0..=count).map(|k| k as f64 * cfg.snapshot_every).collect();
    let res = evolve_lf(
        &h,
        &u0,
        &EvolveConfig::new(grid, cfg.horizon)
            .with_snapshots(times)
            .with_flux(cfg.flux),
    )?;
    let dx = grid.dx();
    let tol = cfg.residual_tol.unwrap_or(5.0 * dx.sqrt());

    let shifted: Vec<(f64, SampledFn)> = res
        .snapshots
        .iter()
        .map(|s| Ok((s.time, s.u.map_values(|v| v + cfg.eps * s.time)?)))
        .collect::<Result<Vec<_>>>()?;
    let idx: Vec<usize> = grid
        .nodes()
        .enumerate()
        .filter(|(_, x)| cfg.window.contains(*x))
        .map(|(i, _)| i)
        .collect();
    if idx.is_empty() {
        return Err(HjError::WindowOutsideDomain);
    }
    let stab: Vec<(f64, f64)> = shifted
        .windows(2)
        .map(|w| {
            let d = idx
                .iter()
                .map(|&i| (w[1].1.values()[i] - w[0].1.values()[i]).abs())
                .fold(0.0, f64::max);
            (w[1].0, d)
        })
        .collect();
    let origin = grid.nearest(0.0);
    let u_origin: Vec<(f64, f64)> = res
        .snapshots
        .iter()
        .map(|s| (s.time, s.u.values()[origin]))
        .collect();
    let w_origin: Vec<(f64, f64)> = shifted
        .iter()
        .map(|(t, w)| (*t, w.values()[origin]))
        .collect();

    let limit = &shifted.last().unwrap().1;
    let v = limit.values();
    let residual: Vec<(f64, f64)> = idx
        .iter()
        .filter(|&&i| i > 0 && i + 1 < grid.n())
        .map(|&i| {
            let x = grid.node(i);
            let p = (v[i + 1] - v[i - 1]) / (2.0 * dx);
            (x, (p * p - cfg.eps * f.values()[i] - cfg.eps).abs())
        })
        .collect();

    rep.push(Verdict::compare(
        "stabilization_at_horizon",
        stab.last().map_or(f64::NAN, |p| p.1),
        Relation::Lt,
        cfg.stabilization_tol,
        format!(
            "sup over the window of successive differences of u + εt, Δt = {}",
            cfg.snapshot_every
        ),
    ));
    rep.push(Verdict::compare(
        "stationary_residual",
        residual.iter().map(|p| p.1).fold(0.0, f64::max),
        Relation::Lt,
        tol,
        "max over the window of ||Du|² − εf − ε| for the horizon profile",
    ));
    rep.push(Verdict::compare(
        "origin_decreasing",
        u_origin
            .windows(2)
            .map(|w| w[1].1 - w[0].1)
            .fold(f64::NEG_INFINITY, f64::max),
        Relation::Lt,
        0.0,
        "largest increment of u(0, t) between snapshots",
    ));
    rep.push_series("u_origin", u_origin);
    rep.push_series("w_origin", w_origin);
    rep.push_series("stabilization", stab);
    rep.push_series("residual_profile", residual);
    rep.push_series("limit_profile", idx.iter().map(|&i| (grid.node(i), v[i])));
    Ok(())
}

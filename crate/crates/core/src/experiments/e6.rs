//! The strong-convexity check on a strictly convex and a piecewise
//! linear Hamiltonian, and decay of `m(t) ≈ ‖u_t‖∞` for `½p²` with a well.

use serde::{Deserialize, Serialize};

use super::{sampled_bump, ExperimentReport, Relation, Verdict};
use crate::error::{HjError, Result};
use crate::fd::{evolve_lf, time_derivative_sup, EvolveConfig};
use crate::grid::{Grid1D, Window};
use crate::hamiltonian::{check_h4, H4Status, HamiltonianSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct E6Config {
    pub eta: f64,
    pub k_box: f64,
    pub h4_samples: usize,
    /// `½p² − shift` for the positive case.
    pub convex_shift: f64,
    pub abs_alpha: f64,
    pub half_width: f64,
    pub dx: f64,
    pub horizon: f64,
    pub snapshot_every: f64,
    pub window: Window,
    pub decay_levels: Vec<f64>,
}

impl Default for E6Config {
    fn default() -> Self {
        Self {
            eta: 0.25,
            k_box: 5.0,
            h4_samples: 4096,
            convex_shift: 0.5,
            abs_alpha: 1.0,
            half_width: 15.0,
            dx: 0.02,
            horizon: 30.0,
            snapshot_every: 0.5,
            window: Window {
                lo: -10.0,
                hi: 10.0,
            },
            decay_levels: vec![0.2, 0.1, 0.05],
        }
    }
}

pub(super) fn run(cfg: &E6Config, rep: &mut ExperimentReport) -> Result<()> {
    let convex = HamiltonianSpec::quadratic(0.0).shifted(cfg.convex_shift);
    let good = check_h4(&convex, cfg.eta, cfg.k_box, cfg.h4_samples)?;
    rep.push(Verdict::compare(
        "h4_holds_convex",
        good.psi_estimate,
        Relation::Gt,
        0.0,
        format!("ψ(η) estimate for {}", convex.label()),
    ));
    let kinked = HamiltonianSpec::abs_shift(cfg.abs_alpha);
    let bad = check_h4(&kinked, cfg.eta, cfg.k_box, cfg.h4_samples)?;
    let witness = bad
        .witness
        .as_ref()
        .map(|w| {
            format!(
                "x={}, p={}, q={}, μ={}, sample {}",
                w.x, w.p, w.q, w.mu, w.index
            )
        })
        .unwrap_or_default();
    rep.push(Verdict::holds(
        "h4_violated_abs",
        bad.status == H4Status::Violated && bad.witness.is_some(),
        format!(
            "worst margin {} for {}; witness {witness}",
            bad.worst_margin,
            kinked.label()
        ),
    ));

    if !(cfg.dx > 0.0 && cfg.snapshot_every > 0.0) {
        return Err(HjError::InvalidInput(
            "dx and snapshot_every must be positive".into(),
        ));
    }
    let grid = Grid1D::symmetric(cfg.half_width, (cfg.half_width / cfg.dx).round() as usize)?;
    let u0 = sampled_bump(grid, -1.0, 0.0, 1.0)?
        .with_extension(crate::grid::Extension::LinearExtrapolate);
    let h = HamiltonianSpec::quadratic(0.0).shifted(0.0);
    let count = (cfg.horizon / cfg.snapshot_every).round() as usize;
    let times: Vec<f64> = (1..=count).map(|k| k as f64 * cfg.snapshot_every).collect();
    let res = evolve_lf(
        &h,
        &u0,
        &EvolveConfig::new(grid, cfg.horizon).with_snapshots(times),
    )?;
    let m = time_derivative_sup(&res, cfg.window)?;
    let last = m.last().map_or(f64::NAN, |p| p.1);
    for &eta in &cfg.decay_levels {
        let below_from = m.iter().rposition(|p| p.1 >= eta).map_or(0, |i| i + 1);
        let detail = match m.get(below_from) {
            Some(p) => format!("m(t) < {eta} for t ≥ {}", p.0),
            None => format!("m(t) stays ≥ {eta} on the run"),
        };
        rep.push(Verdict::compare(
            format!("decay_below_{eta}"),
            last,
            Relation::Lt,
            eta,
            detail,
        ));
    }
    rep.push_series("m", m);
    rep.push_series(
        "h4_convex",
        [(0.0, good.worst_margin), (1.0, good.psi_estimate)],
    );
    rep.push_series("h4_abs", [(0.0, bad.worst_margin), (1.0, bad.psi_estimate)]);
    Ok(())
}

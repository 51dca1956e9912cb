//! Monotone Lax-Friedrichs evolution of `u_t + H(x, Du) = 0` on a truncated
//! domain, and the `‖u_t‖∞` decay diagnostic.
//!
//! The update is
//!
//! ```text
//! uᵢ ← uᵢ − dt·H(xᵢ, (uᵢ₊₁ − uᵢ₋₁)/(2dx)) + dt·θ·(uᵢ₊₁ − 2uᵢ + uᵢ₋₁)/dx
//! ```
//!
//! which is monotone when `θ ≥ ½ max|H_p|` over the gradients met and
//! `dt ≤ dx/(2θ)`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{HjError, Result};
use crate::grid::{Extension, Grid1D, SampledFn, Window};
use crate::hamiltonian::HamiltonianSpec;

/// Slack added to `Lip(u0)` when sizing the admissible gradient range.
pub const GRADIENT_MARGIN: f64 = 1.0;

pub type ExactFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone, Default)]
pub enum BoundaryPolicy {
    /// Extends the last interior slope: `u₀ = 2u₁ − u₂`.
    #[default]
    LipschitzExtrapolate,
    /// Boundary nodes take `exact(x, t)`.
    DirichletFromExact(ExactFn),
}

impl fmt::Debug for BoundaryPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::LipschitzExtrapolate => f.write_str("LipschitzExtrapolate"),
            Self::DirichletFromExact(_) => f.write_str("DirichletFromExact(..)"),
        }
    }
}

/// Numerical flux. Godunov is exact for the steady part at minima of `u`
/// and needs `H` convex in `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flux {
    #[default]
    LaxFriedrichs,
    Godunov,
}

#[derive(Debug, Clone)]
pub struct EvolveConfig {
    pub grid: Grid1D,
    pub t_end: f64,
    pub cfl: f64,
    pub flux: Flux,
    /// Artificial viscosity; defaults to `½·max|H_p|` over `|p| ≤ Lip(u0) + 1`.
    pub theta: Option<f64>,
    pub boundary: BoundaryPolicy,
    /// Times at which the state is stored; `t_end` is always stored.
    pub snapshot_times: Vec<f64>,
    /// Window for the per-step `m(t)` series; defaults to the interior nodes.
    pub diagnostic_window: Option<Window>,
}

impl EvolveConfig {
    pub fn new(grid: Grid1D, t_end: f64) -> Self {
        Self {
            grid,
            t_end,
            cfl: 0.9,
            flux: Flux::LaxFriedrichs,
            theta: None,
            boundary: BoundaryPolicy::LipschitzExtrapolate,
            snapshot_times: Vec::new(),
            diagnostic_window: None,
        }
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    pub fn with_flux(mut self, flux: Flux) -> Self {
        self.flux = flux;
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = Some(theta);
        self
    }

    pub fn with_cfl(mut self, cfl: f64) -> Self {
        self.cfl = cfl;
        self
    }

    pub fn with_boundary(mut self, boundary: BoundaryPolicy) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_diagnostic_window(mut self, w: Window) -> Self {
        self.diagnostic_window = Some(w);
        self
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: f64,
    pub u: SampledFn,
    /// `(uⁿ⁺¹ − uⁿ)/dt` of the step that produced this state; `None` at `t = 0`.
    pub rate: Option<Vec<f64>>,
    /// Steps taken to reach this state.
    pub step: usize,
}

#[derive(Debug, Clone)]
pub struct EvolveResult {
    pub snapshots: Vec<Snapshot>,
    /// `(t, max |uⁿ⁺¹ − uⁿ|/dt)` on the diagnostic window after every step.
    pub m_series: Vec<(f64, f64)>,
    pub dt: f64,
    pub theta: f64,
    pub steps: usize,
    pub gradient_bound: f64,
}

impl EvolveResult {
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("at least one snapshot")
    }

    pub fn snapshot_near(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.time - t).abs().total_cmp(&(b.time - t).abs()))
    }
}

/// Default viscosity: half the largest `|H_p|` over the gradient range.
pub fn default_theta(h: &HamiltonianSpec, gradient_bound: f64) -> f64 {
    (0.5 * h.max_abs_slope(gradient_bound)).max(1e-3)
}

/// Nodes not reached by boundary values after `steps` updates: the window
/// `[x_{steps+1}, x_{n−steps−2}]`, if non-empty.
pub fn dependence_window(grid: Grid1D, steps: usize) -> Option<Window> {
    let n = grid.n();
    if n < 2 * steps + 3 {
        return None;
    }
    Some(Window {
        lo: grid.node(steps + 1),
        hi: grid.node(n - steps - 2),
    })
}

pub fn evolve_lf(h: &HamiltonianSpec, u0: &SampledFn, cfg: &EvolveConfig) -> Result<EvolveResult> {
    let grid = cfg.grid;
    let n = grid.n();
    if n < 5 {
        return Err(HjError::InvalidInput(
            "evolution needs at least 5 nodes".into(),
        ));
    }
    if !(cfg.t_end >= 0.0 && cfg.t_end.is_finite()) {
        return Err(HjError::InvalidInput(format!(
            "t_end must be finite and nonnegative, got {}",
            cfg.t_end
        )));
    }
    if !(cfg.cfl > 0.0 && cfg.cfl <= 1.0) {
        return Err(HjError::CflViolation(format!(
            "cfl must lie in (0, 1], got {}",
            cfg.cfl
        )));
    }
    if cfg.flux == Flux::Godunov && !h.convex_in_p() {
        return Err(HjError::InvalidInput(
            "Godunov flux needs H convex in p".into(),
        ));
    }
    let dx = grid.dx();
    let mut u: Vec<f64> = match u0.grid() {
        Some(g) if g == grid => u0.values().to_vec(),
        _ => grid.nodes().map(|x| u0.eval(x)).collect(),
    };
    let lip = u
        .windows(2)
        .map(|w| (w[1] - w[0]).abs() / dx)
        .fold(0.0, f64::max);
    if !lip.is_finite() {
        return Err(HjError::InvalidInput("initial data must be finite".into()));
    }
    let bound = lip + GRADIENT_MARGIN;
    let needed = 0.5 * h.max_abs_slope(bound);
    let theta = cfg.theta.unwrap_or_else(|| default_theta(h, bound));
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(HjError::CflViolation(format!(
            "θ must be positive, got {theta}"
        )));
    }
    if theta < needed * (1.0 - 1e-12) {
        return Err(HjError::CflViolation(format!(
            "θ = {theta} below the monotonicity bound {needed} for gradients up to {bound}"
        )));
    }
    let dt = cfg.cfl * dx / (2.0 * theta);
    let total_steps = if cfg.t_end == 0.0 {
        0
    } else {
        (cfg.t_end / dt - 1e-9).ceil().max(1.0) as usize
    };

    let xs: Vec<f64> = grid.nodes().collect();
    let p_stars: Vec<f64> = match cfg.flux {
        Flux::Godunov => xs.iter().map(|&x| h.argmin_p(x)).collect(),
        Flux::LaxFriedrichs => Vec::new(),
    };
    let diag = match cfg.diagnostic_window {
        Some(w) => {
            let idx: Vec<usize> = (1..n - 1).filter(|&i| w.contains(xs[i])).collect();
            if idx.is_empty() {
                return Err(HjError::WindowOutsideDomain);
            }
            idx
        }
        None => (1..n - 1).collect(),
    };

    let mut requested: Vec<f64> = cfg
        .snapshot_times
        .iter()
        .copied()
        .filter(|&s| s <= cfg.t_end)
        .collect();
    if requested.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(HjError::InvalidInput(
            "snapshot times must be nonnegative".into(),
        ));
    }
    requested.push(cfg.t_end);
    requested.sort_by(f64::total_cmp);
    requested.dedup();
    let mut pending = requested.into_iter().peekable();

    let mut snapshots = Vec::new();
    let store = |t: f64,
                 step: usize,
                 u: &[f64],
                 rate: Option<Vec<f64>>,
                 snaps: &mut Vec<Snapshot>|
     -> Result<()> {
        snaps.push(Snapshot {
            time: t,
            u: SampledFn::from_values(grid, u.to_vec(), Extension::LinearExtrapolate)?,
            rate,
            step,
        });
        Ok(())
    };
    while pending.peek().is_some_and(|&s| s <= 0.0) {
        pending.next();
        store(0.0, 0, &u, None, &mut snapshots)?;
    }

    let mut m_series = Vec::with_capacity(total_steps);
    let mut next = vec![0.0; n];
    let mut rate = vec![0.0; n];
    let mut t = 0.0;
    for step in 1..=total_steps {
        let tau = if step == total_steps {
            cfg.t_end - t
        } else {
            dt
        };
        for i in 1..n - 1 {
            let grad = (u[i + 1] - u[i - 1]) / (2.0 * dx);
            if grad.abs() > bound {
                return Err(HjError::MonotonicityRangeExceeded {
                    gradient: grad,
                    bound,
                });
            }
            next[i] = match cfg.flux {
                Flux::LaxFriedrichs => {
                    let lap = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / dx;
                    u[i] - tau * (h.eval(xs[i], grad) - theta * lap)
                }
                Flux::Godunov => {
                    let p_star = p_stars[i];
                    let back = ((u[i] - u[i - 1]) / dx).max(p_star);
                    let fwd = ((u[i + 1] - u[i]) / dx).min(p_star);
                    u[i] - tau * h.eval(xs[i], back).max(h.eval(xs[i], fwd))
                }
            };
        }
        let t_next = if step == total_steps {
            cfg.t_end
        } else {
            t + dt
        };
        match &cfg.boundary {
            BoundaryPolicy::LipschitzExtrapolate => {
                next[0] = 2.0 * next[1] - next[2];
                next[n - 1] = 2.0 * next[n - 2] - next[n - 3];
            }
            BoundaryPolicy::DirichletFromExact(exact) => {
                next[0] = exact(xs[0], t_next);
                next[n - 1] = exact(xs[n - 1], t_next);
            }
        }
        for i in 0..n {
            rate[i] = (next[i] - u[i]) / tau;
        }
        m_series.push((
            t_next,
            diag.iter().map(|&i| rate[i].abs()).fold(0.0, f64::max),
        ));
        std::mem::swap(&mut u, &mut next);
        t = t_next;
        while pending.peek().is_some_and(|&s| s <= t + 1e-12 * (1.0 + t)) {
            pending.next();
            store(t, step, &u, Some(rate.clone()), &mut snapshots)?;
        }
    }
    Ok(EvolveResult {
        snapshots,
        m_series,
        dt,
        theta,
        steps: total_steps,
        gradient_bound: bound,
    })
}

/// `m(t) = max_{xᵢ ∈ w} |(uⁿ⁺¹ − uⁿ)/dt|` at each stored snapshot that has a rate.
pub fn time_derivative_sup(result: &EvolveResult, w: Window) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for s in &result.snapshots {
        let Some(rate) = &s.rate else { continue };
        let idx: Vec<usize> = s.u.indices_in(w).collect();
        if idx.is_empty() {
            return Err(HjError::WindowOutsideDomain);
        }
        out.push((
            s.time,
            idx.iter().map(|&i| rate[i].abs()).fold(0.0, f64::max),
        ));
    }
    Ok(out)
}

/// Largest `|u − v|` over nodes of `u` inside `w`.
pub fn sup_diff_on(u: &SampledFn, v: &SampledFn, w: Window) -> f64 {
    u.indices_in(w)
        .map(|i| (u.values()[i] - v.eval(u.x(i))).abs())
        .fold(0.0, f64::max)
}

//! Dirichlet problems `H(x, Du) = λ` on `[−R, R]` with zero boundary data,
//! normalized profiles `v_R = u_R − u_R(0)`, and a bisection bracket on the
//! least solvable `λ`.
//!
//! For convex `H` the discrete problem uses the Godunov flux
//! `G(a, b) = max(H(max(a, p*)), H(min(b, p*)))` where `p*` minimizes
//! `H(x, ·)`. Its maximal subsolution is obtained by two Gauss-Seidel sweeps
//! of `uᵢ = min(uᵢ₋₁ + dx·p₊, uᵢ₊₁ − dx·p₋)`, with `p₋ ≤ p* ≤ p₊` the roots
//! of `H(xᵢ, ·) = λ`.

use serde::{Deserialize, Serialize};

use crate::error::{HjError, Result};
use crate::grid::{sup_norm_window, Extension, Grid1D, SampledFn, Window};
use crate::hamiltonian::HamiltonianSpec;
use crate::numerics::bisect_boundary;

pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;
pub const DEFAULT_LAMBDA_TOL: f64 = 0.05;
const MAX_SWEEPS: usize = 64;
const COARSE_POINTS: usize = 9;

#[derive(Debug, Clone, PartialEq)]
pub struct BallProblem {
    pub h: HamiltonianSpec,
    pub lambda: f64,
    pub radius: f64,
    pub grid: Grid1D,
    pub residual_tol: f64,
}

impl BallProblem {
    /// Grid with `dx = R/100`.
    pub fn new(h: HamiltonianSpec, lambda: f64, radius: f64) -> Result<Self> {
        let grid = Grid1D::symmetric(radius, 100)?;
        Self::with_grid(h, lambda, grid)
    }

    pub fn with_grid(h: HamiltonianSpec, lambda: f64, grid: Grid1D) -> Result<Self> {
        let radius = grid.x_max();
        if !(radius > 0.0)
            || (grid.x_min() + radius).abs() > 1e-12 * radius
            || grid.n().is_multiple_of(2)
            || grid.n() < 3
        {
            return Err(HjError::InvalidInput(
                "ball grid must be symmetric about 0 with 0 a node".into(),
            ));
        }
        if !lambda.is_finite() {
            return Err(HjError::InvalidInput("λ must be finite".into()));
        }
        Ok(Self {
            h,
            lambda,
            radius,
            grid,
            residual_tol: DEFAULT_RESIDUAL_TOL,
        })
    }

    pub fn with_residual_tol(mut self, tol: f64) -> Self {
        self.residual_tol = tol;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Solved,
    Failed,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DirichletOutcome {
    Solved { u: SampledFn, residual: f64 },
    Failed { reason: String, residual: f64 },
}

impl DirichletOutcome {
    pub fn status(&self) -> SolveStatus {
        match self {
            Self::Solved { .. } => SolveStatus::Solved,
            Self::Failed { .. } => SolveStatus::Failed,
        }
    }

    pub fn solution(&self) -> Option<&SampledFn> {
        match self {
            Self::Solved { u, .. } => Some(u),
            Self::Failed { .. } => None,
        }
    }

    pub fn residual(&self) -> f64 {
        match self {
            Self::Solved { residual, .. } | Self::Failed { residual, .. } => *residual,
        }
    }
}

/// Roots `(p₋, p₊)` of `H(x, ·) = λ` around the minimizer; `None` when
/// `λ < min_p H(x, ·)`. A side on which `H` never reaches `λ` gives `∓∞`.
fn level_roots(h: &HamiltonianSpec, x: f64, lambda: f64) -> Option<(f64, f64)> {
    let p_star = h.argmin_p(x);
    if h.eval(x, p_star) > lambda {
        return None;
    }
    let side = |dir: f64| -> f64 {
        let mut step = 1.0;
        while h.eval(x, p_star + dir * step) <= lambda {
            step *= 2.0;
            if step > 1e12 {
                return dir * f64::INFINITY;
            }
        }
        p_star + dir * bisect_boundary(|s| h.eval(x, p_star + dir * s) <= lambda, 0.0, step, 1e-15)
    };
    Some((side(-1.0), side(1.0)))
}

/// `G(D⁻u, D⁺u)` at interior node `i`.
fn godunov(h: &HamiltonianSpec, x: f64, back: f64, fwd: f64) -> f64 {
    let p_star = h.argmin_p(x);
    h.eval(x, back.max(p_star)).max(h.eval(x, fwd.min(p_star)))
}

/// `max |G(D⁻u, D⁺u) − λ|` over interior nodes of a profile on a uniform grid.
pub fn profile_residual(h: &HamiltonianSpec, u: &SampledFn, lambda: f64) -> Result<f64> {
    let grid = u
        .grid()
        .ok_or_else(|| HjError::InvalidInput("residual needs a uniform grid".into()))?;
    let v = u.values();
    let dx = grid.dx();
    Ok((1..v.len() - 1)
        .map(|i| {
            (godunov(
                h,
                grid.node(i),
                (v[i] - v[i - 1]) / dx,
                (v[i + 1] - v[i]) / dx,
            ) - lambda)
                .abs()
        })
        .fold(0.0, f64::max))
}

pub fn solve_dirichlet_ball(prob: &BallProblem) -> Result<DirichletOutcome> {
    if !prob.h.convex_in_p() {
        return Err(HjError::InvalidInput(
            "ball solver needs H convex in p".into(),
        ));
    }
    let grid = prob.grid;
    let n = grid.n();
    let dx = grid.dx();
    let mut roots = Vec::with_capacity(n);
    for i in 0..n {
        let x = grid.node(i);
        match level_roots(&prob.h, x, prob.lambda) {
            Some(r) => roots.push(r),
            None if i == 0 || i == n - 1 => roots.push((0.0, 0.0)),
            None => {
                return Ok(DirichletOutcome::Failed {
                    reason: format!("no admissible gradient at x = {x}: λ below min_p H"),
                    residual: f64::INFINITY,
                })
            }
        }
    }
    let mut u = vec![f64::INFINITY; n];
    u[0] = 0.0;
    u[n - 1] = 0.0;
    let relax = |u: &mut Vec<f64>, i: usize| -> bool {
        let (lo, hi) = roots[i];
        let cand = (u[i - 1] + dx * hi).min(u[i + 1] - dx * lo);
        if cand < u[i] {
            u[i] = cand;
            true
        } else {
            false
        }
    };
    for _ in 0..MAX_SWEEPS {
        let mut changed = false;
        for i in 1..n - 1 {
            changed |= relax(&mut u, i);
        }
        for i in (1..n - 1).rev() {
            changed |= relax(&mut u, i);
        }
        if !changed {
            break;
        }
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Ok(DirichletOutcome::Failed {
            reason: "sweeps left unbounded values".into(),
            residual: f64::INFINITY,
        });
    }
    let u = SampledFn::from_values(grid, u, Extension::Constant)?;
    let residual = profile_residual(&prob.h, &u, prob.lambda)?;
    if residual < prob.residual_tol {
        Ok(DirichletOutcome::Solved { u, residual })
    } else {
        Ok(DirichletOutcome::Failed {
            reason: format!("residual {residual} above tolerance"),
            residual,
        })
    }
}

/// `v_R = u_R − u_R(0)`.
pub fn normalize_at_origin(u: &SampledFn) -> Result<SampledFn> {
    let grid = u
        .grid()
        .ok_or_else(|| HjError::InvalidInput("normalization needs a uniform grid".into()))?;
    let mid = grid.nearest(0.0);
    let c = u.values()[mid];
    let mut v: Vec<f64> = u.values().iter().map(|x| x - c).collect();
    v[mid] = 0.0;
    SampledFn::from_values(grid, v, u.extension())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaProfiles {
    pub lambda: f64,
    pub radii: Vec<f64>,
    pub profiles: Vec<SampledFn>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErgodicReport {
    pub lambda_grid: Vec<f64>,
    pub statuses: Vec<SolveStatus>,
    /// `max |v_{R_last} − v_{R_prev}|` on `[−R_prev/2, R_prev/2]`, per λ.
    pub stabilization_defect: Vec<Option<f64>>,
    pub lambda_min_bracket: (f64, f64),
    /// Normalized profiles for the solved λ of the coarse sweep.
    pub profiles: Vec<LambdaProfiles>,
    pub radii: Vec<f64>,
    pub dx: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErgodicOptions {
    pub radii: Vec<f64>,
    pub lambda_tol: f64,
    pub residual_tol: f64,
    /// Lower end of the search; clamped to `inf_{x,p} H`.
    pub lambda_lo: Option<f64>,
    /// Upper end of the search; defaults to `sup_x H(x, 0) + ½`.
    pub lambda_hi: Option<f64>,
}

impl Default for ErgodicOptions {
    fn default() -> Self {
        Self {
            radii: vec![5.0, 10.0],
            lambda_tol: DEFAULT_LAMBDA_TOL,
            residual_tol: DEFAULT_RESIDUAL_TOL,
            lambda_lo: None,
            lambda_hi: None,
        }
    }
}

struct Probe {
    status: SolveStatus,
    defect: Option<f64>,
    profiles: Vec<SampledFn>,
}

fn probe(h: &HamiltonianSpec, lambda: f64, grids: &[Grid1D], residual_tol: f64) -> Result<Probe> {
    let mut profiles = Vec::with_capacity(grids.len());
    for &g in grids {
        let prob = BallProblem::with_grid(h.clone(), lambda, g)?.with_residual_tol(residual_tol);
        match solve_dirichlet_ball(&prob)? {
            DirichletOutcome::Solved { u, .. } => profiles.push(normalize_at_origin(&u)?),
            DirichletOutcome::Failed { .. } => {
                return Ok(Probe {
                    status: SolveStatus::Failed,
                    defect: None,
                    profiles: Vec::new(),
                })
            }
        }
    }
    let defect = match profiles.len() {
        0 | 1 => 0.0,
        k => {
            let r = grids[k - 2].x_max();
            sup_norm_window(
                &profiles[k - 1],
                &profiles[k - 2],
                Window::new(-0.5 * r, 0.5 * r)?,
            )?
        }
    };
    let status = if defect < 10.0 * residual_tol {
        SolveStatus::Solved
    } else {
        SolveStatus::Failed
    };
    Ok(Probe {
        status,
        defect: Some(defect),
        profiles,
    })
}

/// Brackets the least `λ` for which the ball problems are solvable and
/// their normalized profiles stabilize across the two largest radii.
pub fn estimate_lambda_min(h: &HamiltonianSpec, opts: &ErgodicOptions) -> Result<ErgodicReport> {
    if !h.convex_in_p() {
        return Err(HjError::InvalidInput(
            "λ_min estimation needs H convex in p".into(),
        ));
    }
    let radii = &opts.radii;
    if radii.is_empty()
        || radii.iter().any(|r| !(r.is_finite() && *r > 0.0))
        || radii.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(HjError::InvalidInput(
            "radii must be positive and increasing".into(),
        ));
    }
    if !(opts.lambda_tol > 0.0) || !(opts.residual_tol > 0.0) {
        return Err(HjError::InvalidInput("tolerances must be positive".into()));
    }
    // A common spacing keeps the nested grids aligned.
    let dx = 0.01 * radii[0];
    let grids = radii
        .iter()
        .map(|&r| Grid1D::symmetric(r, (r / dx).round() as usize))
        .collect::<Result<Vec<_>>>()?;
    let outer = *grids.last().unwrap();
    let floor = outer
        .nodes()
        .map(|x| h.min_p(x))
        .fold(f64::INFINITY, f64::min);
    let top = outer
        .nodes()
        .map(|x| h.eval(x, 0.0))
        .fold(f64::NEG_INFINITY, f64::max);
    let lo = opts.lambda_lo.unwrap_or(floor).max(floor);
    let hi = opts.lambda_hi.unwrap_or(top + 0.5);
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(HjError::InvalidInput(format!("empty λ range [{lo}, {hi}]")));
    }

    let mut evaluated: Vec<(f64, SolveStatus, Option<f64>)> = Vec::new();
    let mut profiles = Vec::new();
    for k in 0..COARSE_POINTS {
        let lambda = if k + 1 == COARSE_POINTS {
            hi
        } else {
            lo + (hi - lo) * k as f64 / (COARSE_POINTS - 1) as f64
        };
        let p = probe(h, lambda, &grids, opts.residual_tol)?;
        if p.status == SolveStatus::Solved {
            profiles.push(LambdaProfiles {
                lambda,
                radii: radii.clone(),
                profiles: p.profiles,
            });
        }
        evaluated.push((lambda, p.status, p.defect));
    }
    check_monotone(&evaluated)?;
    let first = evaluated
        .iter()
        .position(|e| e.1 == SolveStatus::Solved)
        .ok_or_else(|| HjError::InvalidInput(format!("no solvable λ in [{lo}, {hi}]")))?;
    let (mut a, mut b) = if first == 0 {
        (lo, lo)
    } else {
        (evaluated[first - 1].0, evaluated[first].0)
    };
    while b - a > opts.lambda_tol {
        let mid = 0.5 * (a + b);
        let p = probe(h, mid, &grids, opts.residual_tol)?;
        evaluated.push((mid, p.status, p.defect));
        if p.status == SolveStatus::Solved {
            b = mid;
        } else {
            a = mid;
        }
    }
    evaluated.sort_by(|x, y| x.0.total_cmp(&y.0));
    check_monotone(&evaluated)?;
    Ok(ErgodicReport {
        lambda_grid: evaluated.iter().map(|e| e.0).collect(),
        statuses: evaluated.iter().map(|e| e.1).collect(),
        stabilization_defect: evaluated.iter().map(|e| e.2).collect(),
        lambda_min_bracket: (a, b),
        profiles,
        radii: radii.clone(),
        dx,
    })
}

fn check_monotone(evaluated: &[(f64, SolveStatus, Option<f64>)]) -> Result<()> {
    let mut sorted: Vec<_> = evaluated.iter().collect();
    sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut seen_solved = false;
    for e in sorted {
        match e.1 {
            SolveStatus::Solved => seen_solved = true,
            SolveStatus::Failed if seen_solved => return Err(HjError::LambdaMonotonicityViolated),
            SolveStatus::Failed => {}
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(x: f64) -> f64 {
        let r = x.abs().min(1.0);
        1.0 - 3.0 * r * r + 2.0 * r * r * r
    }

    #[test]
    fn eikonal_distance_function() {
        let prob = BallProblem::new(HamiltonianSpec::eikonal_shift(0.0), 1.0, 2.0).unwrap();
        assert!((prob.grid.dx() - 0.02).abs() < 1e-15);
        let out = solve_dirichlet_ball(&prob).unwrap();
        let u = out.solution().unwrap();
        let err = u
            .points()
            .map(|(x, v)| (v - (2.0 - x.abs())).abs())
            .fold(0.0, f64::max);
        assert!(err <= 2.0 * prob.grid.dx(), "err {err}");
    }

    #[test]
    fn eikonal_zero_level_is_zero() {
        let prob = BallProblem::new(HamiltonianSpec::eikonal_shift(0.0), 0.0, 1.0).unwrap();
        let out = solve_dirichlet_ball(&prob).unwrap();
        assert!(out
            .solution()
            .unwrap()
            .values()
            .iter()
            .all(|&v| v.abs() < 1e-15));
    }

    #[test]
    fn shifted_eikonal_has_unit_slope() {
        let prob = BallProblem::new(HamiltonianSpec::eikonal_shift(1.0), 0.0, 3.0).unwrap();
        let out = solve_dirichlet_ball(&prob).unwrap();
        assert!(out.residual() < DEFAULT_RESIDUAL_TOL);
        let u = out.solution().unwrap();
        let dx = prob.grid.dx();
        // Du ≡ 1 away from the left boundary layer.
        for w in u.values()[1..].windows(2) {
            assert!(((w[1] - w[0]) / dx - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn below_minimum_fails() {
        let prob = BallProblem::new(HamiltonianSpec::eikonal_shift(1.0), -0.1, 3.0).unwrap();
        assert_eq!(
            solve_dirichlet_ball(&prob).unwrap().status(),
            SolveStatus::Failed
        );
    }

    #[test]
    fn constant_profile_solves_at_one() {
        let g = Grid1D::symmetric(3.0, 50).unwrap();
        let zero = SampledFn::constant(g, 0.0).unwrap();
        let h = HamiltonianSpec::eikonal_shift(1.0);
        assert_eq!(profile_residual(&h, &zero, 1.0).unwrap(), 0.0);
        assert!(profile_residual(&h, &zero, 0.5).unwrap() > 0.4);
    }

    #[test]
    fn lambda_min_brackets() {
        let f = SampledFn::from_fn(
            Grid1D::new(-1.5, 1.5, 301).unwrap(),
            |x| -bump(x),
            Extension::Constant,
        )
        .unwrap();
        for (h, target) in [
            (HamiltonianSpec::eikonal_shift(1.0), 0.0),
            (HamiltonianSpec::quadratic(0.0), 0.0),
            (HamiltonianSpec::quad_potential(0.1, f), 0.1),
        ] {
            let rep = estimate_lambda_min(&h, &ErgodicOptions::default()).unwrap();
            let (a, b) = rep.lambda_min_bracket;
            assert!(a <= b && b - a <= DEFAULT_LAMBDA_TOL + 1e-12);
            assert!(
                a >= target - 0.05 && b <= target + 0.05,
                "{}: [{a}, {b}]",
                h.label()
            );
            assert_eq!(rep.lambda_grid.len(), rep.statuses.len());
            for p in &rep.profiles {
                for v in &p.profiles {
                    assert_eq!(v.eval(0.0), 0.0);
                }
            }
        }
    }

    #[test]
    fn gradients_bounded_uniformly() {
        let h = HamiltonianSpec::quadratic(0.0);
        let rep = estimate_lambda_min(
            &h,
            &ErgodicOptions {
                radii: vec![4.0, 8.0, 16.0],
                ..Default::default()
            },
        )
        .unwrap();
        // {p : ½p² ≤ λ_hi} with λ_hi = ½.
        for p in &rep.profiles {
            for v in &p.profiles {
                assert!(v.lipschitz() <= 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn rejects_non_convex_and_bad_radii() {
        let pg = Grid1D::new(-2.0, 2.0, 41).unwrap();
        let well = pg.nodes().map(|p| (p * p - 1.0).powi(2)).collect();
        let h = HamiltonianSpec::Tabulated(
            crate::hamiltonian::TabulatedH::x_independent(pg, well).unwrap(),
        );
        assert!(estimate_lambda_min(&h, &ErgodicOptions::default()).is_err());
        let h = HamiltonianSpec::quadratic(0.0);
        assert!(estimate_lambda_min(
            &h,
            &ErgodicOptions {
                radii: vec![4.0, 2.0],
                ..Default::default()
            }
        )
        .is_err());
        assert!(BallProblem::with_grid(h, 0.0, Grid1D::new(-1.0, 2.0, 31).unwrap()).is_err());
    }

    #[test]
    fn monotonicity_guard() {
        let ev = vec![
            (0.0, SolveStatus::Solved, None),
            (1.0, SolveStatus::Failed, None),
        ];
        assert_eq!(
            check_monotone(&ev),
            Err(HjError::LambdaMonotonicityViolated)
        );
    }
}

//! Exact solutions of `u_t + H(Du) = 0` for x-independent convex `H` via
//! the Oleinik-Lax formula
//!
//! ```text
//! u(x, t) = inf_y ( u0(y) + t·L((x − y)/t) ),
//! ```
//!
//! straight-line minimizer backtracking, and the staircase initial data
//! for which `u(0, t)/t` has two different limits along two time sequences.

use serde::{Deserialize, Serialize};

use crate::error::{HjError, Result};
use crate::grid::{Extension, Grid1D, SampledFn};
use crate::hamiltonian::{HamiltonianSpec, Lagrangian};
use crate::numerics::{bisect_boundary, golden_min};

/// Uniform samples added to the node scan of every minimization.
const SCAN_SAMPLES: usize = 2048;
/// Candidate local minima refined by golden section.
const MAX_REFINED: usize = 16;
/// Absolute tolerance on minimized values (relative for large values).
pub const VALUE_TOL: f64 = 1e-9;

/// Strictly increasing sequence `(a_n)` with strictly increasing ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaircaseSpec {
    a: Vec<f64>,
}

impl StaircaseSpec {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.len() < 6 {
            return Err(HjError::SequenceViolatesRatio(format!(
                "need at least 6 terms, got {}",
                a.len()
            )));
        }
        if a.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(HjError::SequenceViolatesRatio(
                "terms must be finite and positive".into(),
            ));
        }
        if a.windows(2).any(|w| w[1] <= w[0]) {
            return Err(HjError::SequenceViolatesRatio(
                "terms must be strictly increasing".into(),
            ));
        }
        let ratios: Vec<f64> = a.windows(2).map(|w| w[1] / w[0]).collect();
        if ratios.windows(2).any(|r| r[1] <= r[0]) {
            return Err(HjError::SequenceViolatesRatio(
                "ratios a_{n+1}/a_n must strictly increase".into(),
            ));
        }
        Ok(Self { a })
    }

    /// `a_n = 10^{n(n+1)/2}`, `n = 0..=5`.
    pub fn default_sequence() -> Self {
        Self::new((0..6).map(|n| 10f64.powi(n * (n + 1) / 2)).collect())
            .expect("default sequence is valid")
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    /// Slope of the staircase on `(a_n, a_{n+1})`: `−1` for even `n ≥ 2`,
    /// `0` otherwise (including the first interval `(a_0, a_1)`).
    pub fn slope_after(n: usize) -> f64 {
        if n >= 2 && n.is_multiple_of(2) {
            -1.0
        } else {
            0.0
        }
    }

    /// Values at the breakpoints `a_0, …, a_last`.
    fn breakpoint_values(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.a.len());
        out.push(0.0);
        for n in 0..self.a.len() - 1 {
            let prev = out[n];
            out.push(prev + Self::slope_after(n) * (self.a[n + 1] - self.a[n]));
        }
        out
    }
}

/// Samples the staircase `u0` on the union of the grid nodes, the sequence
/// terms and one extra node at `2·a_last` that carries the slope of the
/// interval following the stored prefix.
pub fn build_staircase_u0(a: &[f64], grid: Grid1D) -> Result<SampledFn> {
    let spec = StaircaseSpec::new(a.to_vec())?;
    let a = spec.a();
    let last = *a.last().unwrap();
    if grid.x_min() > 0.0 || grid.x_max() < last {
        return Err(HjError::InvalidInput(format!(
            "grid must cover [0, {last}]"
        )));
    }
    let bp = spec.breakpoint_values();
    let tail_slope = StaircaseSpec::slope_after(a.len() - 1);
    let value = |y: f64| -> f64 {
        if y <= a[0] {
            return 0.0;
        }
        if y >= last {
            return bp[a.len() - 1] + tail_slope * (y - last);
        }
        let n = a.partition_point(|&v| v <= y) - 1;
        bp[n] + StaircaseSpec::slope_after(n) * (y - a[n])
    };
    let mut xs: Vec<f64> = grid
        .nodes()
        .chain(a.iter().copied())
        .chain(std::iter::once(2.0 * last))
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    // Grid nodes that round to within an ulp of a term would create
    // degenerate cells; keep the exact term.
    xs.dedup_by(|b, a_| (*b - *a_).abs() <= 1e-12 * a_.abs().max(1.0));
    for &t in a {
        if let Ok(i) = xs.binary_search_by(|v| v.total_cmp(&t)) {
            xs[i] = t;
        } else {
            let i = xs.partition_point(|&v| v < t);
            let j = if i > 0 && (i == xs.len() || (t - xs[i - 1]).abs() < (xs[i] - t).abs()) {
                i - 1
            } else {
                i
            };
            xs[j] = t;
        }
    }
    let values = xs.iter().map(|&y| value(y)).collect();
    SampledFn::from_points(xs, values, Extension::LinearExtrapolate)
}

/// Minimizer data at one `(x, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfLaxPoint {
    pub value: f64,
    pub argmin: f64,
    /// Another minimizer was found within tolerance; `argmin` is the smallest.
    pub non_unique: bool,
}

/// Reusable Oleinik-Lax evaluator for fixed `(H, u0)`.
#[derive(Debug, Clone)]
pub struct HopfLax<'a> {
    u0: &'a SampledFn,
    lagrangian: Lagrangian,
    rest: f64,
    /// Velocity offsets `v − rest` searched to the right and to the left.
    reach_up: f64,
    reach_down: f64,
}

impl<'a> HopfLax<'a> {
    pub fn new(h: &HamiltonianSpec, u0: &'a SampledFn) -> Result<Self> {
        if !h.coercive() {
            return Err(HjError::InvalidInput(
                "variational solver needs a coercive Hamiltonian".into(),
            ));
        }
        let lagrangian = Lagrangian::of(h)?;
        let lip = u0.lipschitz();
        if !lip.is_finite() {
            return Err(HjError::InvalidInput(
                "initial data must be Lipschitz".into(),
            ));
        }
        let rest = lagrangian.rest_velocity();
        let reach_up = velocity_reach(&lagrangian, rest, lip, 1.0)?;
        let reach_down = velocity_reach(&lagrangian, rest, lip, -1.0)?;
        Ok(Self {
            u0,
            lagrangian,
            rest,
            reach_up,
            reach_down,
        })
    }

    pub fn lagrangian(&self) -> &Lagrangian {
        &self.lagrangian
    }

    /// Search interval for `y` at `(x, t)`.
    pub fn window(&self, x: f64, t: f64) -> (f64, f64) {
        (
            x - t * (self.rest + self.reach_up),
            x - t * (self.rest - self.reach_down),
        )
    }

    fn objective(&self, x: f64, t: f64, y: f64) -> f64 {
        let v = ((x - y) / t).clamp(self.rest - self.reach_down, self.rest + self.reach_up);
        self.u0.eval(y) + t * self.lagrangian.eval(v)
    }

    pub fn solve(&self, x: f64, t: f64) -> Result<HopfLaxPoint> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(HjError::InvalidInput(format!(
                "time must be positive, got {t}"
            )));
        }
        if !x.is_finite() {
            return Err(HjError::InvalidInput("x must be finite".into()));
        }
        let (lo, hi) = self.window(x, t);
        let mut ys: Vec<f64> = Vec::with_capacity(SCAN_SAMPLES + 2);
        ys.extend((0..=SCAN_SAMPLES).map(|k| lo + (hi - lo) * k as f64 / SCAN_SAMPLES as f64));
        ys.push(hi);
        ys.extend(
            self.u0
                .points()
                .map(|(y, _)| y)
                .filter(|&y| y > lo && y < hi),
        );
        ys.sort_by(f64::total_cmp);
        ys.dedup();
        let phi: Vec<f64> = ys.iter().map(|&y| self.objective(x, t, y)).collect();

        let best_sample = phi.iter().copied().fold(f64::INFINITY, f64::min);
        if !best_sample.is_finite() {
            return Err(HjError::UnboundedWindow);
        }
        let slack = phi
            .windows(2)
            .filter(|w| w[0].is_finite() && w[1].is_finite())
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max);
        let n = ys.len();
        let mut candidates: Vec<usize> = (0..n)
            .filter(|&k| {
                phi[k].is_finite()
                    && phi[k] <= best_sample + slack
                    && (k == 0 || phi[k] <= phi[k - 1])
                    && (k + 1 == n || phi[k] <= phi[k + 1])
            })
            .collect();
        candidates.sort_by(|&a, &b| phi[a].total_cmp(&phi[b]).then(a.cmp(&b)));
        candidates.truncate(MAX_REFINED);

        let mut found: Vec<(f64, f64)> = Vec::new();
        for &k in &candidates {
            found.push((ys[k], phi[k]));
            if k > 0 {
                found.push(golden_min(|y| self.objective(x, t, y), ys[k - 1], ys[k]));
            }
            if k + 1 < n {
                found.push(golden_min(|y| self.objective(x, t, y), ys[k], ys[k + 1]));
            }
        }
        // On a linear piece of u0 the stationarity condition L'(v) = slope
        // gives the minimizer exactly.
        for f in found.iter_mut() {
            let m = self.u0.slope_at(f.0);
            if let Some(v) = self.lagrangian.velocity_for_slope(m) {
                let y = x - t * v;
                if y > lo && y < hi && self.u0.slope_at(y) == m {
                    let val = self.objective(x, t, y);
                    if val <= f.1 + 1e-12 * (1.0 + f.1.abs()) {
                        *f = (y, val);
                    }
                }
            }
        }
        let best = found.iter().map(|f| f.1).fold(f64::INFINITY, f64::min);
        let tol = VALUE_TOL.max(1e-14 * best.abs());
        let mut near: Vec<f64> = found
            .iter()
            .filter(|f| f.1 <= best + tol)
            .map(|f| f.0)
            .collect();
        near.sort_by(f64::total_cmp);
        // Points closer than a small fraction of the scan spacing are the same minimizer.
        let separation = 1e-3 * (hi - lo) / SCAN_SAMPLES as f64;
        let non_unique = near.last().unwrap() - near[0] > separation;
        let argmin = if non_unique {
            near[0]
        } else {
            found
                .iter()
                .filter(|f| f.1 == best)
                .map(|f| f.0)
                .fold(f64::INFINITY, f64::min)
        };
        Ok(HopfLaxPoint {
            value: best,
            argmin,
            non_unique,
        })
    }

    pub fn evaluate(&self, x: f64, t: f64) -> Result<f64> {
        self.solve(x, t).map(|p| p.value)
    }

    /// Samples `u(·, t)` on a grid.
    pub fn sample(&self, grid: Grid1D, t: f64, extension: Extension) -> Result<SampledFn> {
        let values = grid
            .nodes()
            .map(|x| self.evaluate(x, t))
            .collect::<Result<Vec<_>>>()?;
        SampledFn::from_values(grid, values, extension)
    }
}

/// Velocity offset (from the rest velocity, in direction `dir`) beyond which
/// the Lagrangian cost dominates the possible decrease of Lipschitz data:
/// the first doubling `r` with secant slope `≥ 2·Lip`, doubled again and
/// clipped to the domain of `L`.
fn velocity_reach(l: &Lagrangian, rest: f64, lip: f64, dir: f64) -> Result<f64> {
    let l0 = l.eval(rest);
    if !l0.is_finite() {
        return Err(HjError::UnboundedWindow);
    }
    let finite = |s: f64| l.eval(rest + dir * s).is_finite();
    let mut inside = 0.0;
    let mut r = 1.0;
    for _ in 0..200 {
        let lv = l.eval(rest + dir * r);
        if !lv.is_finite() {
            return Ok(bisect_boundary(finite, inside, r, 1e-15));
        }
        if (lv - l0) / r >= 2.0 * lip {
            let out = 2.0 * r;
            return Ok(if finite(out) {
                out
            } else {
                bisect_boundary(finite, r, out, 1e-15)
            });
        }
        inside = r;
        r *= 2.0;
    }
    Err(HjError::UnboundedWindow)
}

/// `u(x, t)` by the Oleinik-Lax formula.
pub fn hopf_lax_evaluate(h: &HamiltonianSpec, u0: &SampledFn, x: f64, t: f64) -> Result<f64> {
    HopfLax::new(h, u0)?.evaluate(x, t)
}

/// `u(x, t)` together with the minimizing foot point.
pub fn hopf_lax_solve(h: &HamiltonianSpec, u0: &SampledFn, x: f64, t: f64) -> Result<HopfLaxPoint> {
    HopfLax::new(h, u0)?.solve(x, t)
}

/// A minimizing trajectory sampled on `[0, t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryResult {
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    /// `γ(0)`.
    pub start_point: f64,
    /// `u0(γ(0)) + ∫ L(γ̇)`.
    pub action: f64,
    pub non_unique: bool,
}

const TRAJECTORY_POINTS: usize = 65;

/// Straight-line minimizer ending at `x` at time `t`.
pub fn backtrack_minimizer(
    h: &HamiltonianSpec,
    u0: &SampledFn,
    x: f64,
    t: f64,
) -> Result<TrajectoryResult> {
    let solver = HopfLax::new(h, u0)?;
    backtrack_with(&solver, x, t)
}

pub fn backtrack_with(solver: &HopfLax<'_>, x: f64, t: f64) -> Result<TrajectoryResult> {
    let point = solver.solve(x, t)?;
    let start = point.argmin;
    let velocity = (x - start) / t;
    let times: Vec<f64> = (0..TRAJECTORY_POINTS)
        .map(|k| t * k as f64 / (TRAJECTORY_POINTS - 1) as f64)
        .collect();
    let mut positions: Vec<f64> = times.iter().map(|&s| start + s * velocity).collect();
    *positions.last_mut().unwrap() = x;
    let action = solver.u0.eval(start) + t * solver.lagrangian.eval(velocity);
    Ok(TrajectoryResult {
        times,
        positions,
        start_point: start,
        action,
        non_unique: point.non_unique,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line_grid(lo: f64, hi: f64, n: usize) -> Grid1D {
        Grid1D::new(lo, hi, n).unwrap()
    }

    fn dense_min<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> (f64, f64) {
        (0..=n)
            .map(|k| lo + (hi - lo) * k as f64 / n as f64)
            .map(|y| (y, f(y)))
            .fold(
                (f64::NAN, f64::INFINITY),
                |a, b| if b.1 < a.1 { b } else { a },
            )
    }

    /// Direct piecewise evaluation: sums slope × overlap over the intervals.
    fn staircase_oracle(a: &[f64], y: f64) -> f64 {
        let mut total = 0.0;
        for n in 0..a.len() - 1 {
            let slope = if n >= 2 && n.is_multiple_of(2) {
                -1.0
            } else {
                0.0
            };
            let overlap = (y.min(a[n + 1]) - a[n]).max(0.0);
            total += slope * overlap;
        }
        total
    }

    #[test]
    fn staircase_values() {
        let spec = StaircaseSpec::default_sequence();
        let a = spec.a().to_vec();
        assert_eq!(a, vec![1.0, 10.0, 1e3, 1e6, 1e10, 1e15]);
        let u0 = build_staircase_u0(&a, line_grid(0.0, 1e15, 11)).unwrap();
        assert_eq!(u0.eval(a[2]), staircase_oracle(&a, a[2]));
        assert_eq!(u0.eval(a[2]), 0.0);
        assert_eq!(u0.eval(a[3]), staircase_oracle(&a, a[3]));
        assert_eq!(u0.eval(a[3]), -999_000.0);
        assert_eq!(u0.lipschitz(), 1.0);
        for y in [0.5, 3.0, 500.0, 2e5, 7e8, 3e12, 9e14] {
            assert!(
                (u0.eval(y) - staircase_oracle(&a, y)).abs() <= 1e-6 * (1.0 + y.abs() * 1e-12),
                "y={y}"
            );
        }
        // Nonincreasing.
        assert!(u0.values().windows(2).all(|w| w[1] <= w[0]));
        // Beyond a_5 the next interval (a_5, a_6) has slope 0.
        assert_eq!(u0.eval(1e16), u0.eval(1e15));
    }

    #[test]
    fn staircase_rejects_bad_ratios() {
        let err = StaircaseSpec::new(vec![1.0, 10.0, 100.0, 1e3, 1e4, 1e5]).unwrap_err();
        assert!(matches!(err, HjError::SequenceViolatesRatio(_)));
        assert!(StaircaseSpec::new(vec![1.0, 10.0, 1e3]).is_err());
        assert!(
            build_staircase_u0(&[1.0, 10.0, 1e3, 1e6, 1e10, 1e15], line_grid(5.0, 1e15, 3))
                .is_err()
        );
    }

    #[test]
    fn hopf_lax_constants_invariant() {
        let h = HamiltonianSpec::quadratic(0.0);
        let u0 = SampledFn::constant(line_grid(-5.0, 5.0, 101), 0.0).unwrap();
        for (x, t) in [(0.0, 1.0), (3.0, 10.0), (-40.0, 0.5)] {
            assert!(hopf_lax_evaluate(&h, &u0, x, t).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn hopf_lax_of_abs() {
        let h = HamiltonianSpec::quadratic(0.0);
        let u0 = SampledFn::from_fn(
            line_grid(-10.0, 10.0, 201),
            f64::abs,
            Extension::LinearExtrapolate,
        )
        .unwrap();
        for (x, t, exact) in [(0.0, 2.0, 0.0), (3.0, 2.0, 2.0)] {
            let (_, oracle) = dense_min(
                |y| y.abs() + (x - y) * (x - y) / (2.0 * t),
                -20.0,
                20.0,
                400_000,
            );
            assert!((oracle - exact).abs() < 1e-6);
            let v = hopf_lax_evaluate(&h, &u0, x, t).unwrap();
            assert!((v - exact).abs() < 1e-9, "x={x} t={t}: {v}");
        }
    }

    #[test]
    fn eikonal_hopf_lax_is_window_min() {
        // H = |p| ⇒ u(x, t) = min_{|y − x| ≤ t} u0(y).
        let h = HamiltonianSpec::eikonal_shift(0.0);
        let g = line_grid(-10.0, 10.0, 401);
        let u0 = SampledFn::from_fn(
            g,
            |y| (1.3 * y).sin() + 0.1 * y,
            Extension::LinearExtrapolate,
        )
        .unwrap();
        for (x, t) in [(0.0, 1.0), (2.0, 0.7), (-3.0, 2.5)] {
            let (_, oracle) = dense_min(|y| u0.eval(y), x - t, x + t, 200_000);
            let v = hopf_lax_evaluate(&h, &u0, x, t).unwrap();
            assert!((v - oracle).abs() < 1e-8, "x={x} t={t}: {v} vs {oracle}");
        }
    }

    #[test]
    fn staircase_ratios_match_closed_values() {
        let spec = StaircaseSpec::default_sequence();
        let a = spec.a();
        let u0 = build_staircase_u0(a, line_grid(0.0, a[5], 3)).unwrap();
        let h = HamiltonianSpec::quadratic(1.0);
        let solver = HopfLax::new(&h, &u0).unwrap();
        // Plateau: t = a_4/4, ȳ = t and u(0, t) = u0(a_3).
        let t = a[4] / 4.0;
        let p = solver.solve(0.0, t).unwrap();
        assert_eq!(p.value, u0.eval(a[3]));
        assert!((p.argmin / t - 1.0).abs() < 1e-9);
        // Slope: t = a_3/4 ∈ (a_2, a_3/2), ȳ = 2t.
        let t = a[3] / 4.0;
        let p = solver.solve(0.0, t).unwrap();
        assert!((p.argmin / (2.0 * t) - 1.0).abs() < 1e-9, "{p:?} t={t}");
        let exact = u0.eval(a[2]) - (2.0 * t - a[2]) + t / 2.0;
        assert!((p.value - exact).abs() <= 1e-6 * exact.abs());
    }

    #[test]
    fn backtrack_examples() {
        let h = HamiltonianSpec::quadratic(0.0);
        let zero = SampledFn::constant(line_grid(-10.0, 10.0, 21), 0.0).unwrap();
        let tr = backtrack_minimizer(&h, &zero, 5.0, 3.0).unwrap();
        assert!(tr.positions.iter().all(|&p| (p - 5.0).abs() < 1e-9));
        assert!(tr.action.abs() < 1e-12);
        assert_eq!(*tr.positions.last().unwrap(), 5.0);

        let id = SampledFn::from_fn(
            line_grid(-10.0, 10.0, 201),
            |y| y,
            Extension::LinearExtrapolate,
        )
        .unwrap();
        let (y_or, _) = dense_min(|y| y + y * y / 8.0, -20.0, 20.0, 400_000);
        let tr = backtrack_minimizer(&h, &id, 0.0, 4.0).unwrap();
        assert!((y_or + 4.0).abs() < 1e-3);
        assert!((tr.start_point + 4.0).abs() < 1e-6);
        assert!((tr.action + 2.0).abs() < 1e-9);
        assert!(!tr.non_unique);
    }

    #[test]
    fn backtrack_on_staircase_slope() {
        let spec = StaircaseSpec::default_sequence();
        let a = spec.a();
        let u0 = build_staircase_u0(a, line_grid(0.0, a[5], 3)).unwrap();
        let h = HamiltonianSpec::quadratic(1.0);
        for t in [2e3, 1e4, 2.4e5] {
            let tr = backtrack_minimizer(&h, &u0, 0.0, t).unwrap();
            assert!((tr.start_point / (2.0 * t) - 1.0).abs() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn non_unique_minimizers_flagged() {
        // H = |p| with flat data: every y in [x − t, x + t] is a minimizer.
        let h = HamiltonianSpec::eikonal_shift(0.0);
        let u0 = SampledFn::constant(line_grid(-10.0, 10.0, 21), 1.0).unwrap();
        let p = hopf_lax_solve(&h, &u0, 0.0, 1.0).unwrap();
        assert!(p.non_unique);
        assert!((p.argmin + 1.0).abs() < 1e-9);
    }

    #[test]
    fn stationarity_of_affine_solutions() {
        for (h, slope) in [
            (HamiltonianSpec::quadratic(0.0), 1.0),
            (HamiltonianSpec::quadratic(1.0), -0.5),
            (HamiltonianSpec::quadratic(0.3).shifted(0.2), 2.0),
        ] {
            let u0 = SampledFn::from_fn(
                line_grid(-5.0, 5.0, 11),
                |y| slope * y + 0.25,
                Extension::LinearExtrapolate,
            )
            .unwrap();
            let lam = h.eval(0.0, slope);
            for (x, t) in [(0.0, 1.0), (2.0, 7.0), (-3.0, 0.1)] {
                let v = hopf_lax_evaluate(&h, &u0, x, t).unwrap();
                let exact = slope * x + 0.25 - lam * t;
                assert!(
                    (v - exact).abs() < 1e-9 * (1.0 + exact.abs()),
                    "{}: {v} vs {exact}",
                    h.label()
                );
            }
        }
    }

    #[test]
    fn semigroup_on_piecewise_linear_panel() {
        // u0 = −|y| stays piecewise linear with its kink on a grid node when
        // t is a multiple of dx.
        let dx = 0.05;
        let g = line_grid(-20.0, 20.0, 801);
        let u0 = SampledFn::from_fn(g, |y| -y.abs(), Extension::LinearExtrapolate).unwrap();
        for h in [
            HamiltonianSpec::quadratic(0.0),
            HamiltonianSpec::quadratic(1.0),
        ] {
            let solver = HopfLax::new(&h, &u0).unwrap();
            for (t, s) in [(20.0 * dx, 10.0 * dx), (40.0 * dx, 30.0 * dx)] {
                let ut = solver.sample(g, t, Extension::LinearExtrapolate).unwrap();
                let step = HopfLax::new(&h, &ut).unwrap();
                for x in [-2.0, -0.5, 0.0, 0.75, 3.0] {
                    let direct = solver.evaluate(x, t + s).unwrap();
                    let composed = step.evaluate(x, s).unwrap();
                    assert!(
                        (direct - composed).abs() <= 2.0 * VALUE_TOL,
                        "x={x}: {direct} vs {composed}"
                    );
                }
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let h = HamiltonianSpec::quadratic(0.0);
        let u0 = SampledFn::constant(line_grid(-1.0, 1.0, 3), 0.0).unwrap();
        assert!(hopf_lax_evaluate(&h, &u0, 0.0, 0.0).is_err());
        assert!(hopf_lax_evaluate(&h, &u0, f64::NAN, 1.0).is_err());
        let f = SampledFn::from_fn(line_grid(-1.0, 1.0, 3), |x| x, Extension::Constant).unwrap();
        assert!(
            hopf_lax_evaluate(&HamiltonianSpec::quad_potential(0.1, f), &u0, 0.0, 1.0).is_err()
        );
    }

    fn lipschitz_data() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (
            prop::collection::vec(-1.0f64..1.0, 41),
            prop::collection::vec(-1.0f64..1.0, 41),
        )
    }

    fn walk(slopes: &[f64], dx: f64) -> Vec<f64> {
        let mut v = vec![0.0];
        for s in &slopes[1..] {
            v.push(v.last().unwrap() + s * dx);
        }
        v
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn contraction_and_monotonicity((a, b) in lipschitz_data(), x in -2.0f64..2.0, t in 0.1f64..3.0) {
            let g = line_grid(-4.0, 4.0, 41);
            let h = HamiltonianSpec::quadratic(0.5);
            let u = SampledFn::from_values(g, walk(&a, g.dx()), Extension::Constant).unwrap();
            let v = SampledFn::from_values(g, walk(&b, g.dx()), Extension::Constant).unwrap();
            let sup = u.values().iter().zip(v.values()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            let du = hopf_lax_evaluate(&h, &u, x, t).unwrap();
            let dv = hopf_lax_evaluate(&h, &v, x, t).unwrap();
            prop_assert!((du - dv).abs() <= sup + 2.0 * VALUE_TOL);

            let w = u.map_values(|z| z + 0.3).unwrap();
            let upper = u.values().iter().zip(v.values()).map(|(p, q)| p.max(*q)).collect();
            let upper = SampledFn::from_values(g, upper, Extension::Constant).unwrap();
            prop_assert!(du <= hopf_lax_evaluate(&h, &upper, x, t).unwrap() + VALUE_TOL);
            prop_assert!(du <= hopf_lax_evaluate(&h, &w, x, t).unwrap() + VALUE_TOL);
        }

        #[test]
        fn backtrack_action_matches_value(a in prop::collection::vec(-1.0f64..1.0, 41), x in -2.0f64..2.0, t in 0.1f64..3.0) {
            let g = line_grid(-4.0, 4.0, 41);
            let h = HamiltonianSpec::quadratic(-0.7);
            let u = SampledFn::from_values(g, walk(&a, g.dx()), Extension::LinearExtrapolate).unwrap();
            let tr = backtrack_minimizer(&h, &u, x, t).unwrap();
            let val = hopf_lax_evaluate(&h, &u, x, t).unwrap();
            prop_assert!((tr.action - val).abs() <= 1e-6 * (1.0 + val.abs()));
            prop_assert_eq!(*tr.positions.last().unwrap(), x);
        }
    }
}

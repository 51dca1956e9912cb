//! One-dimensional grids, piecewise-linear sampled functions and window norms.
//!
//! Every solver in the crate consumes and produces [`SampledFn`] values. A
//! sampled function is either defined on a uniform [`Grid1D`] or on an
//! irregular strictly increasing node set (used when the breakpoints of the
//! data span many orders of magnitude). Outside its nodes a function is
//! extended either by its boundary value or by its boundary slope.

use serde::{Deserialize, Serialize};

use crate::error::{HjError, Result};

/// Uniform grid `x_min + i·dx`, `i = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n: usize,
    dx: f64,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) {
            return Err(HjError::InvalidInput("grid bounds must be finite".into()));
        }
        if x_min >= x_max {
            return Err(HjError::InvalidInput(format!(
                "grid needs x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n < 2 {
            return Err(HjError::InvalidInput("grid needs at least 2 nodes".into()));
        }
        let dx = (x_max - x_min) / (n - 1) as f64;
        Ok(Self {
            x_min,
            x_max,
            n,
            dx,
        })
    }

    /// Grid on `[x_min, x_max]` with spacing as close as possible to `dx`
    /// (never coarser).
    pub fn with_spacing(x_min: f64, x_max: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(HjError::InvalidInput("spacing must be positive".into()));
        }
        let cells = ((x_max - x_min) / dx - 1e-9).ceil().max(1.0) as usize;
        Self::new(x_min, x_max, cells + 1)
    }

    /// Grid on `[-r, r]` with an odd node count, so that `0` is a node.
    pub fn symmetric(r: f64, cells_per_side: usize) -> Result<Self> {
        if !(r > 0.0) || cells_per_side == 0 {
            return Err(HjError::InvalidInput(
                "symmetric grid needs r > 0 and at least one cell".into(),
            ));
        }
        Self::new(-r, r, 2 * cells_per_side + 1)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }

    /// Index of the node nearest to `x`, clamped to the grid.
    pub fn nearest(&self, x: f64) -> usize {
        let r = ((x - self.x_min) / self.dx).round();
        r.clamp(0.0, (self.n - 1) as f64) as usize
    }
}

/// How a sampled function is continued outside its node range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Extension {
    Constant,
    #[default]
    LinearExtrapolate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nodes {
    Uniform(Grid1D),
    Irregular(Vec<f64>),
}

impl Nodes {
    pub fn len(&self) -> usize {
        match self {
            Nodes::Uniform(g) => g.n(),
            Nodes::Irregular(xs) => xs.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        match self {
            Nodes::Uniform(g) => g.node(i),
            Nodes::Irregular(xs) => xs[i],
        }
    }

    /// Index `i` of the cell `[x_i, x_{i+1}]` used to evaluate at `x`.
    fn cell(&self, x: f64) -> usize {
        let last = self.len() - 2;
        match self {
            Nodes::Uniform(g) => {
                let r = ((x - g.x_min()) / g.dx()).floor();
                if r <= 0.0 {
                    0
                } else {
                    (r as usize).min(last)
                }
            }
            Nodes::Irregular(xs) => xs.partition_point(|&v| v <= x).saturating_sub(1).min(last),
        }
    }
}

/// Piecewise-linear function through `(x_i, values[i])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFn {
    nodes: Nodes,
    values: Vec<f64>,
    extension: Extension,
}

impl SampledFn {
    pub fn from_values(grid: Grid1D, values: Vec<f64>, extension: Extension) -> Result<Self> {
        Self::build(Nodes::Uniform(grid), values, extension)
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: Grid1D, f: F, extension: Extension) -> Result<Self> {
        let values = grid.nodes().map(f).collect();
        Self::from_values(grid, values, extension)
    }

    /// Function on an arbitrary strictly increasing node set.
    pub fn from_points(xs: Vec<f64>, values: Vec<f64>, extension: Extension) -> Result<Self> {
        if xs.len() < 2 {
            return Err(HjError::InvalidInput("need at least 2 nodes".into()));
        }
        if xs.iter().any(|x| !x.is_finite()) || xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HjError::InvalidInput(
                "nodes must be finite and strictly increasing".into(),
            ));
        }
        Self::build(Nodes::Irregular(xs), values, extension)
    }

    pub fn constant(grid: Grid1D, c: f64) -> Result<Self> {
        Self::from_values(grid, vec![c; grid.n()], Extension::Constant)
    }

    fn build(nodes: Nodes, values: Vec<f64>, extension: Extension) -> Result<Self> {
        if values.len() != nodes.len() {
            return Err(HjError::InvalidInput(format!(
                "{} values for {} nodes",
                values.len(),
                nodes.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(HjError::InvalidInput(
                "sampled values must be finite".into(),
            ));
        }
        Ok(Self {
            nodes,
            values,
            extension,
        })
    }

    pub fn nodes(&self) -> &Nodes {
        &self.nodes
    }

    /// The underlying uniform grid, if the function has one.
    pub fn grid(&self) -> Option<Grid1D> {
        match &self.nodes {
            Nodes::Uniform(g) => Some(*g),
            Nodes::Irregular(_) => None,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn extension(&self) -> Extension {
        self.extension
    }

    pub fn with_extension(mut self, extension: Extension) -> Self {
        self.extension = extension;
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.nodes.x(i)
    }

    pub fn x_min(&self) -> f64 {
        self.nodes.x(0)
    }

    pub fn x_max(&self) -> f64 {
        self.nodes.x(self.len() - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.nodes.x(i), v))
    }

    /// Evaluates the interpolant (or its extension) at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.len();
        let (x0, xn) = (self.x_min(), self.x_max());
        if x < x0 {
            return match self.extension {
                Extension::Constant => self.values[0],
                Extension::LinearExtrapolate => {
                    let s = (self.values[1] - self.values[0]) / (self.nodes.x(1) - x0);
                    self.values[0] + s * (x - x0)
                }
            };
        }
        if x > xn {
            return match self.extension {
                Extension::Constant => self.values[n - 1],
                Extension::LinearExtrapolate => {
                    let xp = self.nodes.x(n - 2);
                    let s = (self.values[n - 1] - self.values[n - 2]) / (xn - xp);
                    self.values[n - 1] + s * (x - xn)
                }
            };
        }
        let i = self.nodes.cell(x);
        let (xa, xb) = (self.nodes.x(i), self.nodes.x(i + 1));
        if x == xa {
            return self.values[i];
        }
        if x == xb {
            return self.values[i + 1];
        }
        let w = (x - xa) / (xb - xa);
        self.values[i] + (self.values[i + 1] - self.values[i]) * w
    }

    /// Slope of the cell containing `x` (boundary cells outside the range).
    pub fn slope_at(&self, x: f64) -> f64 {
        let i = if x <= self.x_min() {
            if self.extension == Extension::Constant && x < self.x_min() {
                return 0.0;
            }
            0
        } else if x >= self.x_max() {
            if self.extension == Extension::Constant && x > self.x_max() {
                return 0.0;
            }
            self.len() - 2
        } else {
            self.nodes.cell(x)
        };
        (self.values[i + 1] - self.values[i]) / (self.nodes.x(i + 1) - self.nodes.x(i))
    }

    /// Largest `|Δvalue| / Δx` over adjacent nodes.
    pub fn lipschitz(&self) -> f64 {
        (0..self.len() - 1)
            .map(|i| {
                (self.values[i + 1] - self.values[i]).abs()
                    / (self.nodes.x(i + 1) - self.nodes.x(i))
            })
            .fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Same nodes, values transformed pointwise.
    pub fn map_values<F: Fn(f64) -> f64>(&self, f: F) -> Result<Self> {
        Self::build(
            self.nodes.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
            self.extension,
        )
    }

    /// Same nodes, values `f(x_i, v_i)`.
    pub fn map_points<F: Fn(f64, f64) -> f64>(&self, f: F) -> Result<Self> {
        let values = self.points().map(|(x, v)| f(x, v)).collect();
        Self::build(self.nodes.clone(), values, self.extension)
    }

    /// Node indices whose position lies in `w`.
    pub fn indices_in(&self, w: Window) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| w.contains(self.nodes.x(i)))
    }
}

/// Checked evaluation: rejects non-finite query points.
pub fn interpolate(f: &SampledFn, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(HjError::InvalidInput(format!(
            "non-finite evaluation point {x}"
        )));
    }
    Ok(f.eval(x))
}

/// Closed interval `[lo, hi]` on which convergence is measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(HjError::InvalidInput(format!(
                "invalid window [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn intersect(&self, lo: f64, hi: f64) -> Option<Window> {
        let (a, b) = (self.lo.max(lo), self.hi.min(hi));
        (a <= b).then_some(Window { lo: a, hi: b })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// `max |f − g|` over the window, sampled at the window ends and at every
/// node of either function inside the window.
///
/// The sampling region is the window clipped to the hull of the two node
/// ranges; an empty clip is an error.
pub fn sup_norm_window(f: &SampledFn, g: &SampledFn, w: Window) -> Result<f64> {
    let hull_lo = f.x_min().min(g.x_min());
    let hull_hi = f.x_max().max(g.x_max());
    let clip = w
        .intersect(hull_lo, hull_hi)
        .ok_or(HjError::WindowOutsideDomain)?;
    let diff = |x: f64| (f.eval(x) - g.eval(x)).abs();
    let mut sup = diff(clip.lo).max(diff(clip.hi));
    for h in [f, g] {
        for i in h.indices_in(clip) {
            sup = sup.max(diff(h.x(i)));
        }
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line3() -> SampledFn {
        SampledFn::from_values(
            Grid1D::new(0.0, 2.0, 3).unwrap(),
            vec![0.0, 1.0, 2.0],
            Extension::LinearExtrapolate,
        )
        .unwrap()
    }

    #[test]
    fn interpolate_examples() {
        let f = line3();
        assert_eq!(interpolate(&f, 0.5).unwrap(), 0.5);
        assert_eq!(interpolate(&f, 2.0).unwrap(), 2.0);
        let c = SampledFn::constant(Grid1D::new(-1.0, 1.0, 5).unwrap(), 7.0).unwrap();
        assert_eq!(interpolate(&c, -100.0).unwrap(), 7.0);
        assert!(interpolate(&f, f64::NAN).is_err());
        assert!(interpolate(&f, f64::INFINITY).is_err());
    }

    #[test]
    fn linear_extension_continues_end_slopes() {
        let f = line3();
        assert_eq!(f.eval(-3.0), -3.0);
        assert_eq!(f.eval(10.0), 10.0);
    }

    #[test]
    fn grid_validation() {
        assert!(Grid1D::new(1.0, 1.0, 3).is_err());
        assert!(Grid1D::new(0.0, 1.0, 1).is_err());
        assert!(Grid1D::new(0.0, f64::NAN, 3).is_err());
        let g = Grid1D::symmetric(2.0, 100).unwrap();
        assert_eq!(g.n(), 201);
        assert_eq!(g.node(100), 0.0);
        let h = Grid1D::with_spacing(-1.0, 1.0, 0.1).unwrap();
        assert_eq!(h.n(), 21);
    }

    #[test]
    fn nodes_exact_on_irregular_grid() {
        let xs = vec![0.0, 1.0, 1e3, 1e6, 1e10];
        let vs = vec![0.0, 0.0, -1.0, 2.0, 5.0];
        let f = SampledFn::from_points(xs.clone(), vs.clone(), Extension::Constant).unwrap();
        for (x, v) in xs.iter().zip(&vs) {
            assert_eq!(f.eval(*x), *v);
        }
        assert_eq!(f.eval(0.5), 0.0);
        assert!(
            SampledFn::from_points(vec![0.0, 0.0], vec![1.0, 1.0], Extension::Constant).is_err()
        );
    }

    #[test]
    fn sup_norm_examples() {
        let g = Grid1D::new(-4.0, 4.0, 81).unwrap();
        let zero = SampledFn::constant(g, 0.0).unwrap();
        let id = SampledFn::from_fn(g, |x| x, Extension::LinearExtrapolate).unwrap();
        let w = Window::new(-1.0, 2.0).unwrap();
        assert_eq!(sup_norm_window(&id, &id, w).unwrap(), 0.0);
        assert!((sup_norm_window(&zero, &id, w).unwrap() - 2.0).abs() < 1e-12);

        // Brute-force oracle for x² on [-3, 1]: dense sampling of the exact function.
        let sq = SampledFn::from_fn(g, |x| x * x, Extension::LinearExtrapolate).unwrap();
        let w2 = Window::new(-3.0, 1.0).unwrap();
        let oracle = (0..=40_000)
            .map(|k| -3.0 + 4.0 * k as f64 / 40_000.0)
            .map(|x| x * x)
            .fold(0.0, f64::max);
        assert!((oracle - 9.0).abs() < 1e-12);
        assert!((sup_norm_window(&sq, &zero, w2).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn sup_norm_window_outside() {
        let g = Grid1D::new(0.0, 1.0, 3).unwrap();
        let f = SampledFn::constant(g, 1.0).unwrap();
        let err = sup_norm_window(&f, &f, Window::new(5.0, 6.0).unwrap()).unwrap_err();
        assert_eq!(err, HjError::WindowOutsideDomain);
        assert_eq!(err.to_string(), "window outside domain");
    }

    #[test]
    fn lipschitz_matches_interpolant() {
        let g = Grid1D::new(0.0, 1.0, 11).unwrap();
        let f = SampledFn::from_fn(g, |x| (7.0 * x).sin(), Extension::Constant).unwrap();
        let dense = (0..10_000)
            .map(|k| {
                let (a, b) = (k as f64 / 10_000.0, (k + 1) as f64 / 10_000.0);
                (f.eval(b) - f.eval(a)).abs() / (b - a)
            })
            .fold(0.0, f64::max);
        assert!((dense - f.lipschitz()).abs() < 1e-6);
    }

    fn values_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (3usize..30).prop_flat_map(|n| {
            (
                prop::collection::vec(-10.0f64..10.0, n),
                prop::collection::vec(0.0f64..5.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn interpolation_is_monotone((u, bump) in values_strategy(), x in -1.0f64..1.0) {
            let g = Grid1D::new(-1.0, 1.0, u.len()).unwrap();
            let v: Vec<f64> = u.iter().zip(&bump).map(|(a, b)| a + b).collect();
            let f = SampledFn::from_values(g, u, Extension::LinearExtrapolate).unwrap();
            let h = SampledFn::from_values(g, v, Extension::LinearExtrapolate).unwrap();
            prop_assert!(f.eval(x) <= h.eval(x) + 1e-12);
        }

        #[test]
        fn sup_norm_is_pseudometric(
            (a, b) in values_strategy(),
            c in prop::collection::vec(-10.0f64..10.0, 30),
            lo in -1.5f64..0.0, width in 0.0f64..2.0,
        ) {
            let g = Grid1D::new(-1.0, 1.0, a.len()).unwrap();
            let c = c[..a.len()].to_vec();
            let f1 = SampledFn::from_values(g, a, Extension::Constant).unwrap();
            let f2 = SampledFn::from_values(g, b, Extension::Constant).unwrap();
            let f3 = SampledFn::from_values(g, c, Extension::Constant).unwrap();
            let w = Window::new(lo, (lo + width).max(-0.9)).unwrap();
            let d12 = sup_norm_window(&f1, &f2, w).unwrap();
            let d21 = sup_norm_window(&f2, &f1, w).unwrap();
            let d13 = sup_norm_window(&f1, &f3, w).unwrap();
            let d32 = sup_norm_window(&f3, &f2, w).unwrap();
            prop_assert_eq!(d12, d21);
            prop_assert!(d12 <= d13 + d32 + 1e-12);
            prop_assert_eq!(sup_norm_window(&f1, &f1, w).unwrap(), 0.0);
        }
    }
}

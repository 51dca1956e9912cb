//! Hamiltonian descriptors and the transforms built on them: the convex
//! conjugate in the momentum variable, the gauge of the zero sublevel set,
//! the Kruzhkov change of unknown and a sampling check of the strong
//! convexity condition used for decay of `u_t`.

use serde::{Deserialize, Serialize};

use crate::error::{HjError, Result};
use crate::grid::{Grid1D, SampledFn};
use crate::numerics::{bisect_boundary, golden_max, golden_min, halton4};

/// `H(x, p)` for the built-in families and for tabulated data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum HamiltonianSpec {
    /// `−e·p + ½p²`.
    Quadratic {
        drift: f64,
    },
    /// `|p − c|`.
    EikonalShift {
        c: f64,
    },
    /// `p² − ε f(x)`.
    QuadPotential {
        eps: f64,
        f: SampledFn,
    },
    /// `|p + α| − |α|`.
    AbsShift {
        alpha: f64,
    },
    /// `base(x, p) − λ`.
    ShiftedBy {
        base: Box<HamiltonianSpec>,
        lambda: f64,
    },
    Tabulated(TabulatedH),
}

/// Bilinear table of `H` on an `x × p` grid, linearly extrapolated in `p`
/// and clamped in `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TabulatedRaw")]
pub struct TabulatedH {
    x_grid: Grid1D,
    p_grid: Grid1D,
    /// Row-major: `values[ix * p_grid.n() + ip]`.
    values: Vec<f64>,
    #[serde(skip_serializing)]
    convex: bool,
    #[serde(skip_serializing)]
    coercive: bool,
}

#[derive(Deserialize)]
struct TabulatedRaw {
    x_grid: Grid1D,
    p_grid: Grid1D,
    values: Vec<f64>,
}

impl TryFrom<TabulatedRaw> for TabulatedH {
    type Error = HjError;
    fn try_from(raw: TabulatedRaw) -> Result<Self> {
        TabulatedH::new(raw.x_grid, raw.p_grid, raw.values)
    }
}

impl TabulatedH {
    pub fn new(x_grid: Grid1D, p_grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        let (nx, np) = (x_grid.n(), p_grid.n());
        if values.len() != nx * np {
            return Err(HjError::InvalidInput(format!(
                "table needs {} values, got {}",
                nx * np,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(HjError::InvalidInput("table values must be finite".into()));
        }
        let rows: Vec<&[f64]> = values.chunks(np).collect();
        let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let convex = np < 3
            || rows.iter().all(|r| {
                r.windows(3)
                    .all(|w| w[0] - 2.0 * w[1] + w[2] >= -1e-12 * scale)
            });
        let coercive = rows.iter().all(|r| r[1] < r[0] && r[np - 1] > r[np - 2]);
        Ok(Self {
            x_grid,
            p_grid,
            values,
            convex,
            coercive,
        })
    }

    /// Table of an x-independent `H(p)`.
    pub fn x_independent(p_grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        let x_grid = Grid1D::new(0.0, 1.0, 2)?;
        let mut both = values.clone();
        both.extend(values);
        Self::new(x_grid, p_grid, both)
    }

    pub fn p_grid(&self) -> Grid1D {
        self.p_grid
    }

    pub fn x_grid(&self) -> Grid1D {
        self.x_grid
    }

    fn row_eval(&self, ix: usize, p: f64) -> f64 {
        let np = self.p_grid.n();
        let row = &self.values[ix * np..(ix + 1) * np];
        let g = &self.p_grid;
        let r = ((p - g.x_min()) / g.dx()).floor();
        let i = if r <= 0.0 {
            0
        } else {
            (r as usize).min(np - 2)
        };
        let xa = g.node(i);
        if p == xa {
            return row[i];
        }
        row[i] + (row[i + 1] - row[i]) * (p - xa) / g.dx()
    }

    fn eval(&self, x: f64, p: f64) -> f64 {
        let nx = self.x_grid.n();
        let xc = x.clamp(self.x_grid.x_min(), self.x_grid.node(nx - 1));
        let r = ((xc - self.x_grid.x_min()) / self.x_grid.dx()).floor();
        let i = if r <= 0.0 {
            0
        } else {
            (r as usize).min(nx - 2)
        };
        let w = ((xc - self.x_grid.node(i)) / self.x_grid.dx()).clamp(0.0, 1.0);
        let a = self.row_eval(i, p);
        if w == 0.0 {
            return a;
        }
        a + (self.row_eval(i + 1, p) - a) * w
    }

    fn is_x_independent(&self) -> bool {
        let np = self.p_grid.n();
        self.values.chunks(np).all(|r| r == &self.values[..np])
    }

    fn max_abs_slope(&self) -> f64 {
        let dp = self.p_grid.dx();
        self.values
            .chunks(self.p_grid.n())
            .flat_map(|r| r.windows(2).map(move |w| (w[1] - w[0]).abs() / dp))
            .fold(0.0, f64::max)
    }

    fn argmin_p(&self, x: f64) -> f64 {
        let p = self.p_grid;
        (0..p.n())
            .map(|i| (p.node(i), self.eval(x, p.node(i))))
            .fold((p.node(0), f64::INFINITY), |acc, (q, v)| {
                if v < acc.1 {
                    (q, v)
                } else {
                    acc
                }
            })
            .0
    }
}

impl HamiltonianSpec {
    pub fn quadratic(drift: f64) -> Self {
        Self::Quadratic { drift }
    }

    pub fn eikonal_shift(c: f64) -> Self {
        Self::EikonalShift { c }
    }

    pub fn abs_shift(alpha: f64) -> Self {
        Self::AbsShift { alpha }
    }

    pub fn quad_potential(eps: f64, f: SampledFn) -> Self {
        Self::QuadPotential { eps, f }
    }

    pub fn shifted(self, lambda: f64) -> Self {
        Self::ShiftedBy {
            base: Box::new(self),
            lambda,
        }
    }

    #[inline]
    pub fn eval(&self, x: f64, p: f64) -> f64 {
        match self {
            Self::Quadratic { drift } => -drift * p + 0.5 * p * p,
            Self::EikonalShift { c } => (p - c).abs(),
            Self::QuadPotential { eps, f } => p * p - eps * f.eval(x),
            Self::AbsShift { alpha } => (p + alpha).abs() - alpha.abs(),
            Self::ShiftedBy { base, lambda } => base.eval(x, p) - lambda,
            Self::Tabulated(t) => t.eval(x, p),
        }
    }

    pub fn convex_in_p(&self) -> bool {
        match self {
            Self::ShiftedBy { base, .. } => base.convex_in_p(),
            Self::Tabulated(t) => t.convex,
            _ => true,
        }
    }

    pub fn coercive(&self) -> bool {
        match self {
            Self::ShiftedBy { base, .. } => base.coercive(),
            Self::Tabulated(t) => t.coercive,
            _ => true,
        }
    }

    pub fn is_x_independent(&self) -> bool {
        match self {
            Self::QuadPotential { eps, f } => *eps == 0.0 || f.max_value() == f.min_value(),
            Self::ShiftedBy { base, .. } => base.is_x_independent(),
            Self::Tabulated(t) => t.is_x_independent(),
            _ => true,
        }
    }

    /// Range of `x` over which the Hamiltonian actually varies.
    pub fn x_extent(&self) -> Option<(f64, f64)> {
        match self {
            Self::QuadPotential { f, .. } => Some((f.x_min(), f.x_max())),
            Self::ShiftedBy { base, .. } => base.x_extent(),
            Self::Tabulated(t) if !t.is_x_independent() => {
                Some((t.x_grid.x_min(), t.x_grid.x_max()))
            }
            _ => None,
        }
    }

    /// Upper bound on `|H_p(x, p)|` over `|p| ≤ p_bound` and all `x`.
    pub fn max_abs_slope(&self, p_bound: f64) -> f64 {
        match self {
            Self::Quadratic { drift } => drift.abs() + p_bound,
            Self::EikonalShift { .. } | Self::AbsShift { .. } => 1.0,
            Self::QuadPotential { .. } => 2.0 * p_bound,
            Self::ShiftedBy { base, .. } => base.max_abs_slope(p_bound),
            Self::Tabulated(t) => t.max_abs_slope(),
        }
    }

    /// A minimizer of `p ↦ H(x, p)` (the Hamiltonian is assumed convex).
    pub fn argmin_p(&self, x: f64) -> f64 {
        match self {
            Self::Quadratic { drift } => *drift,
            Self::EikonalShift { c } => *c,
            Self::QuadPotential { .. } => 0.0,
            Self::AbsShift { alpha } => -alpha,
            Self::ShiftedBy { base, .. } => base.argmin_p(x),
            Self::Tabulated(t) => t.argmin_p(x),
        }
    }

    pub fn min_p(&self, x: f64) -> f64 {
        self.eval(x, self.argmin_p(x))
    }

    /// Short human-readable description for reports.
    pub fn label(&self) -> String {
        match self {
            Self::Quadratic { drift } if *drift == 0.0 => "p^2/2".to_string(),
            Self::Quadratic { drift } => format!("-{drift}*p + p^2/2"),
            Self::EikonalShift { c } => format!("|p - {c}|"),
            Self::QuadPotential { eps, .. } => format!("p^2 - {eps}*f(x)"),
            Self::AbsShift { alpha } => format!("|p + {alpha}| - |{alpha}|"),
            Self::ShiftedBy { base, lambda } => format!("({}) - {lambda}", base.label()),
            Self::Tabulated(_) => "tabulated".to_string(),
        }
    }
}

/// Checked evaluation of `H(x, p)`.
pub fn eval_hamiltonian(h: &HamiltonianSpec, x: f64, p: f64) -> Result<f64> {
    if !(x.is_finite() && p.is_finite()) {
        return Err(HjError::InvalidInput(
            "hamiltonian arguments must be finite".into(),
        ));
    }
    Ok(h.eval(x, p))
}

/// Value of `sup_p (p·v − H(x, p))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagrangianValue {
    /// `f64::INFINITY` when the supremum is unbounded.
    pub value: f64,
    pub maximizer_p: Option<f64>,
}

impl LagrangianValue {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

const LEGENDRE_MAX_DOUBLINGS: usize = 64;

/// Convex conjugate of `H(x, ·)` at velocity `v`, by bracketing and
/// golden-section maximization of the concave objective `p·v − H(x, p)`.
pub fn legendre_transform(h: &HamiltonianSpec, x: f64, v: f64) -> Result<LagrangianValue> {
    if !h.convex_in_p() {
        return Err(HjError::LegendreRequiresConvexity);
    }
    if !(x.is_finite() && v.is_finite()) {
        return Err(HjError::InvalidInput(
            "legendre arguments must be finite".into(),
        ));
    }
    let g = |p: f64| p * v - h.eval(x, p);
    let center = h.argmin_p(x);
    // The objective is concave; once it stops increasing toward a side, the
    // maximum is inside.
    let dominated = |far: f64, near: f64| {
        let (gf, gn) = (g(far), g(near));
        gf <= gn + 1e-12 * (1.0 + gn.abs())
    };
    let mut half = 1.0;
    let mut bracketed = false;
    for _ in 0..LEGENDRE_MAX_DOUBLINGS {
        let right = dominated(center + half, center + 0.5 * half);
        let left = dominated(center - half, center - 0.5 * half);
        if right && left {
            bracketed = true;
            break;
        }
        half *= 2.0;
    }
    if !bracketed {
        return Ok(LagrangianValue {
            value: f64::INFINITY,
            maximizer_p: None,
        });
    }
    let (p, value) = golden_max(g, center - half, center + half);
    Ok(LagrangianValue {
        value,
        maximizer_p: Some(p),
    })
}

/// Lagrangian of an x-independent convex Hamiltonian, with closed forms for
/// the built-in families and the numerical conjugate otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum Lagrangian {
    /// `½(v + drift)² + offset`.
    Quadratic {
        drift: f64,
        offset: f64,
    },
    /// `slope·v + offset` on `|v| ≤ 1`, `+∞` outside.
    Bounded {
        slope: f64,
        offset: f64,
    },
    Numeric(HamiltonianSpec),
}

impl Lagrangian {
    pub fn of(h: &HamiltonianSpec) -> Result<Self> {
        if !h.convex_in_p() {
            return Err(HjError::LegendreRequiresConvexity);
        }
        if !h.is_x_independent() {
            return Err(HjError::InvalidInput(
                "variational solver needs an x-independent Hamiltonian".into(),
            ));
        }
        Ok(Self::closed_form(h).unwrap_or_else(|| Self::Numeric(h.clone())))
    }

    fn closed_form(h: &HamiltonianSpec) -> Option<Self> {
        match h {
            HamiltonianSpec::Quadratic { drift } => Some(Self::Quadratic {
                drift: *drift,
                offset: 0.0,
            }),
            HamiltonianSpec::EikonalShift { c } => Some(Self::Bounded {
                slope: *c,
                offset: 0.0,
            }),
            HamiltonianSpec::AbsShift { alpha } => Some(Self::Bounded {
                slope: -alpha,
                offset: alpha.abs(),
            }),
            HamiltonianSpec::ShiftedBy { base, lambda } => {
                Self::closed_form(base).map(|l| match l {
                    Self::Quadratic { drift, offset } => Self::Quadratic {
                        drift,
                        offset: offset + lambda,
                    },
                    Self::Bounded { slope, offset } => Self::Bounded {
                        slope,
                        offset: offset + lambda,
                    },
                    Self::Numeric(_) => unreachable!(),
                })
            }
            _ => None,
        }
    }

    pub fn eval(&self, v: f64) -> f64 {
        match self {
            Self::Quadratic { drift, offset } => 0.5 * (v + drift) * (v + drift) + offset,
            Self::Bounded { slope, offset } => {
                if v.abs() <= 1.0 {
                    slope * v + offset
                } else {
                    f64::INFINITY
                }
            }
            Self::Numeric(h) => legendre_transform(h, 0.0, v)
                .map(|l| l.value)
                .unwrap_or(f64::INFINITY),
        }
    }

    /// Velocity `v` with `L'(v) = m`, when it has a closed form.
    pub fn velocity_for_slope(&self, m: f64) -> Option<f64> {
        match self {
            Self::Quadratic { drift, .. } => Some(m - drift),
            _ => None,
        }
    }

    /// A velocity minimizing `L` (a subgradient of `H` at `p = 0`).
    pub fn rest_velocity(&self) -> f64 {
        match self {
            Self::Quadratic { drift, .. } => -drift,
            Self::Bounded { .. } => 0.0,
            Self::Numeric(h) => {
                let d = 1e-6;
                ((h.eval(0.0, d) - h.eval(0.0, -d)) / (2.0 * d)).clamp(-1e12, 1e12)
            }
        }
    }
}

/// Minkowski gauge of `C(x) = {p : H(x, p) ≤ 0}`, evaluated at `p`.
///
/// Uses bisection along the ray through `p`; the relative tolerance on the
/// gauge is 1e-10 or better.
pub fn gauge_of_sublevel(h: &HamiltonianSpec, x: f64, p: f64) -> Result<f64> {
    if !(x.is_finite() && p.is_finite()) {
        return Err(HjError::InvalidInput(
            "gauge arguments must be finite".into(),
        ));
    }
    if h.eval(x, 0.0) >= 0.0 {
        return Err(HjError::OriginNotInterior);
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    // s* = sup{s ≥ 0 : H(x, s·p) ≤ 0}; the gauge is 1/s*.
    let inside = |s: f64| h.eval(x, s * p) <= 0.0;
    let mut hi = 1.0;
    while inside(hi) {
        hi *= 2.0;
        if hi > 1e300 {
            return Ok(0.0);
        }
    }
    let mut lo = 0.5 * hi;
    while !inside(lo) && lo > 1e-300 {
        lo *= 0.5;
    }
    let s_star = bisect_boundary(inside, lo, hi, 1e-15);
    Ok(1.0 / s_star)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KruzhkovDirection {
    /// `v ↦ −exp(−v)`.
    Forward,
    /// `w ↦ −ln(−w)`.
    Inverse,
}

pub fn kruzhkov(u: &SampledFn, direction: KruzhkovDirection) -> Result<SampledFn> {
    match direction {
        KruzhkovDirection::Forward => u.map_values(|v| -(-v).exp()),
        KruzhkovDirection::Inverse => {
            if let Some(&bad) = u.values().iter().find(|&&w| w >= 0.0) {
                return Err(HjError::NotInKruzhkovRange(bad));
            }
            u.map_values(|w| -(-w).ln())
        }
    }
}

/// Margins at or below this value count as a violation.
pub const H4_VIOLATION_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum H4Status {
    HoldsWithMargin,
    Violated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct H4Sample {
    pub x: f64,
    pub p: f64,
    pub q: f64,
    pub mu: f64,
    /// Position in the low-discrepancy sequence.
    pub index: u64,
    /// 0: raw sample, 1/2: `q` moved to the lower/upper end of the sublevel set.
    pub variant: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H4Report {
    pub status: H4Status,
    pub psi_estimate: f64,
    pub worst_margin: f64,
    pub admissible: usize,
    pub witness: Option<H4Sample>,
}

/// `[μF(x, p/μ + q) − F(x, p + q)] / (1 − μ)`.
pub fn h4_margin(f: &HamiltonianSpec, x: f64, p: f64, q: f64, mu: f64) -> f64 {
    (mu * f.eval(x, p / mu + q) - f.eval(x, p + q)) / (1.0 - mu)
}

/// Ends of `{q ∈ [−K, K] : F(x, q) ≤ 0}`, if non-empty.
fn sublevel_ends(f: &HamiltonianSpec, x: f64, k_box: f64) -> Option<(f64, f64)> {
    let center = if f.convex_in_p() {
        f.argmin_p(x).clamp(-k_box, k_box)
    } else {
        golden_min(|q| f.eval(x, q), -k_box, k_box).0
    };
    if f.eval(x, center) > 0.0 {
        return None;
    }
    let inside = |q: f64| f.eval(x, q) <= 0.0;
    let lo = if inside(-k_box) {
        -k_box
    } else {
        bisect_boundary(inside, center, -k_box, 1e-16)
    };
    let hi = if inside(k_box) {
        k_box
    } else {
        bisect_boundary(inside, center, k_box, 1e-16)
    };
    Some((lo, hi))
}

/// Samples the strong-convexity inequality on `|p|, |q| ≤ K`, `μ ∈ (0, 1)` along a
/// Halton sequence, plus the variants with `q` moved onto the boundary of
/// `{F(x, ·) ≤ 0}`. Reports the worst admissible margin.
pub fn check_h4(f: &HamiltonianSpec, eta: f64, k_box: f64, samples: usize) -> Result<H4Report> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(HjError::InvalidInput("eta must be positive".into()));
    }
    if !(k_box > 0.0 && k_box.is_finite()) || samples == 0 {
        return Err(HjError::InvalidInput(
            "K_box and samples must be positive".into(),
        ));
    }
    let (x_lo, x_hi) = f.x_extent().unwrap_or((0.0, 0.0));
    let fixed_ends = f.x_extent().is_none().then(|| sublevel_ends(f, 0.0, k_box));

    let mut worst: Option<(f64, H4Sample)> = None;
    let mut admissible = 0usize;
    for index in 1..=samples as u64 {
        let [ux, up, uq, um] = halton4(index);
        let mu = um;
        if mu <= 0.0 || mu >= 1.0 {
            continue;
        }
        let x = x_lo + ux * (x_hi - x_lo);
        let p = k_box * (2.0 * up - 1.0);
        let q_raw = k_box * (2.0 * uq - 1.0);
        let ends = match fixed_ends {
            Some(e) => e,
            None => sublevel_ends(f, x, k_box),
        };
        let mut candidates = [(0u8, Some(q_raw)), (1, None), (2, None)];
        if let Some((lo, hi)) = ends {
            candidates[1].1 = Some(lo);
            candidates[2].1 = Some(hi);
        }
        for (variant, q) in candidates {
            let Some(q) = q else { continue };
            if f.eval(x, q) > 0.0 || f.eval(x, p + q).abs() < eta {
                continue;
            }
            admissible += 1;
            let m = h4_margin(f, x, p, q, mu);
            if worst.as_ref().is_none_or(|(w, _)| m < *w) {
                worst = Some((
                    m,
                    H4Sample {
                        x,
                        p,
                        q,
                        mu,
                        index,
                        variant,
                    },
                ));
            }
        }
    }
    let (worst_margin, sample) = worst.ok_or(HjError::EmptyConstraintSet)?;
    let status = if worst_margin <= H4_VIOLATION_FLOOR {
        H4Status::Violated
    } else {
        H4Status::HoldsWithMargin
    };
    Ok(H4Report {
        status,
        psi_estimate: worst_margin.max(0.0).min(eta),
        worst_margin,
        admissible,
        witness: (status == H4Status::Violated).then_some(sample),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Extension, Grid1D};
    use proptest::prelude::*;

    fn bump_f() -> SampledFn {
        let g = Grid1D::new(-2.0, 2.0, 401).unwrap();
        SampledFn::from_fn(
            g,
            |x| if x.abs() < 1.0 { -(1.0 - x * x) } else { 0.0 },
            Extension::Constant,
        )
        .unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(
            eval_hamiltonian(&HamiltonianSpec::quadratic(1.0), 0.0, 2.0).unwrap(),
            0.0
        );
        assert_eq!(
            eval_hamiltonian(&HamiltonianSpec::eikonal_shift(1.0), 3.7, 1.0).unwrap(),
            0.0
        );
        let h = HamiltonianSpec::quad_potential(0.1, bump_f());
        // f(0) = −1 read from the interpolant; |0|² − 0.1·(−1).
        let oracle = 0.0 - 0.1 * bump_f().eval(0.0);
        assert!((eval_hamiltonian(&h, 0.0, 0.0).unwrap() - oracle).abs() < 1e-15);
        assert!((oracle - 0.1).abs() < 1e-15);
        assert!(eval_hamiltonian(&h, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn shifted_and_abs_shift() {
        let h = HamiltonianSpec::quadratic(0.0).shifted(0.5);
        assert_eq!(h.eval(0.0, 1.0), 0.0);
        let a = HamiltonianSpec::abs_shift(1.0);
        assert_eq!(a.eval(0.0, -1.0), -1.0);
        assert_eq!(a.eval(0.0, 2.0), 2.0);
    }

    #[test]
    fn legendre_examples() {
        let l = legendre_transform(&HamiltonianSpec::quadratic(0.0), 0.0, 3.0).unwrap();
        assert!((l.value - 4.5).abs() < 1e-10);

        // Oracle: dense grid maximization of p·0 − (−p + p²/2).
        let (p_or, v_or) = (0..=400_000)
            .map(|k| -10.0 + 20.0 * k as f64 / 400_000.0)
            .map(|p| (p, p - 0.5 * p * p))
            .fold(
                (0.0, f64::NEG_INFINITY),
                |a, b| if b.1 > a.1 { b } else { a },
            );
        let l = legendre_transform(&HamiltonianSpec::quadratic(1.0), 0.0, 0.0).unwrap();
        assert!((l.value - v_or).abs() < 1e-8 && (v_or - 0.5).abs() < 1e-8);
        assert!((l.maximizer_p.unwrap() - p_or).abs() < 1e-4);
        assert!((l.maximizer_p.unwrap() - 1.0).abs() < 1e-6);

        // Oracle: objective 2p − |p − 1| keeps growing at p = 10, 100, 1000.
        let obj = |p: f64| 2.0 * p - (p - 1.0).abs();
        assert!(obj(1000.0) > obj(100.0) && obj(100.0) > obj(10.0));
        let l = legendre_transform(&HamiltonianSpec::eikonal_shift(1.0), 0.0, 2.0).unwrap();
        assert!(!l.is_finite());
        assert!(l.maximizer_p.is_none());
    }

    #[test]
    fn legendre_on_range_boundary_is_finite() {
        // v = 1 is in the closure of the range of H_p for |p − c|.
        let l = legendre_transform(&HamiltonianSpec::eikonal_shift(1.0), 0.0, 1.0).unwrap();
        assert!((l.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn legendre_rejects_nonconvex() {
        let g = Grid1D::new(-1.0, 1.0, 3).unwrap();
        let t = TabulatedH::x_independent(g, vec![0.0, 1.0, 0.0]).unwrap();
        let err = legendre_transform(&HamiltonianSpec::Tabulated(t), 0.0, 0.0).unwrap_err();
        assert_eq!(err.to_string(), "legendre requires convexity");
    }

    #[test]
    fn closed_form_lagrangians_match_numeric() {
        let hs = [
            HamiltonianSpec::quadratic(0.0),
            HamiltonianSpec::quadratic(1.0),
            HamiltonianSpec::quadratic(-2.5).shifted(0.3),
            HamiltonianSpec::eikonal_shift(1.0),
            HamiltonianSpec::eikonal_shift(-0.5).shifted(2.0),
            HamiltonianSpec::abs_shift(1.0),
        ];
        for h in &hs {
            let l = Lagrangian::of(h).unwrap();
            assert!(!matches!(l, Lagrangian::Numeric(_)), "{}", h.label());
            for k in -30..=30 {
                let v = k as f64 * 0.1;
                let closed = l.eval(v);
                let numeric = legendre_transform(h, 0.0, v).unwrap().value;
                if closed.is_finite() {
                    assert!(
                        (closed - numeric).abs() < 1e-8,
                        "{} v={v}: {closed} vs {numeric}",
                        h.label()
                    );
                } else {
                    assert!(!numeric.is_finite(), "{} v={v}", h.label());
                }
            }
        }
    }

    #[test]
    fn legendre_biconjugation_quadratic() {
        for drift in [0.0, 1.0] {
            let h = HamiltonianSpec::quadratic(drift);
            for k in -10..=10 {
                let p = k as f64;
                let (_, hh) = golden_max(
                    |v| p * v - legendre_transform(&h, 0.0, v).unwrap().value,
                    -40.0,
                    40.0,
                );
                assert!((hh - h.eval(0.0, p)).abs() < 1e-8, "p={p}: {hh}");
            }
        }
    }

    #[test]
    fn gauge_examples() {
        let unit = HamiltonianSpec::eikonal_shift(0.0).shifted(1.0);
        assert!((gauge_of_sublevel(&unit, 0.0, 0.5).unwrap() - 0.5).abs() < 1e-10);
        let c = HamiltonianSpec::eikonal_shift(1.0).shifted(2.0);
        // Bisection oracle on λ ↦ [H(p/λ) ≤ 0], independent of the implementation.
        let oracle = |p: f64| {
            let (mut lo, mut hi) = (1e-6, 1e6);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if c.eval(0.0, p / mid) <= 0.0 {
                    hi = mid
                } else {
                    lo = mid
                }
            }
            hi
        };
        let j = gauge_of_sublevel(&c, 0.0, 2.0).unwrap();
        assert!((j - oracle(2.0)).abs() < 1e-10 && (j - 2.0 / 3.0).abs() < 1e-10);
        let j = gauge_of_sublevel(&c, 0.0, -0.5).unwrap();
        assert!((j - oracle(-0.5)).abs() < 1e-10 && (j - 0.5).abs() < 1e-10);
        assert_eq!(gauge_of_sublevel(&c, 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn gauge_requires_interior_origin() {
        let err = gauge_of_sublevel(&HamiltonianSpec::eikonal_shift(1.0), 0.0, 1.0).unwrap_err();
        assert_eq!(err.to_string(), "origin not interior to sublevel set");
    }

    #[test]
    fn kruzhkov_examples() {
        let g = Grid1D::new(0.0, 1.0, 3).unwrap();
        let zero = SampledFn::constant(g, 0.0).unwrap();
        let w = kruzhkov(&zero, KruzhkovDirection::Forward).unwrap();
        assert!(w.values().iter().all(|&v| v == -1.0));
        let big = SampledFn::constant(g, 1e3).unwrap();
        let w = kruzhkov(&big, KruzhkovDirection::Forward).unwrap();
        assert!(w.values().iter().all(|&v| v <= 0.0 && v > -1e-300));
        let u = SampledFn::from_values(g, vec![0.1, 1.0, 10.0], Extension::Constant).unwrap();
        let back = kruzhkov(
            &kruzhkov(&u, KruzhkovDirection::Forward).unwrap(),
            KruzhkovDirection::Inverse,
        )
        .unwrap();
        for (a, b) in u.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(matches!(
            kruzhkov(&u, KruzhkovDirection::Inverse),
            Err(HjError::NotInKruzhkovRange(_))
        ));
    }

    /// Exhaustive grid over (p, q, μ) used as an oracle for the sampler.
    fn grid_worst_margin(f: &HamiltonianSpec, eta: f64, k: f64) -> f64 {
        let n = 80;
        let mut worst = f64::INFINITY;
        for i in 0..=n {
            let p = -k + 2.0 * k * i as f64 / n as f64;
            for j in 0..=n {
                let q = -k + 2.0 * k * j as f64 / n as f64;
                if f.eval(0.0, q) > 0.0 || f.eval(0.0, p + q).abs() < eta {
                    continue;
                }
                for m in 1..40 {
                    let mu = m as f64 / 40.0;
                    worst = worst.min(h4_margin(f, 0.0, p, q, mu));
                }
            }
        }
        worst
    }

    #[test]
    fn h4_holds_for_strongly_convex() {
        let f = HamiltonianSpec::quadratic(0.0).shifted(0.5);
        let r = check_h4(&f, 0.25, 5.0, 4000).unwrap();
        assert_eq!(r.status, H4Status::HoldsWithMargin);
        assert!(r.psi_estimate > 0.0 && r.psi_estimate <= 0.25);
        let oracle = grid_worst_margin(&f, 0.25, 5.0);
        assert!(oracle > 0.0);
    }

    #[test]
    fn h4_violated_for_abs_shift() {
        let f = HamiltonianSpec::abs_shift(1.0);
        let r = check_h4(&f, 0.25, 5.0, 4000).unwrap();
        assert_eq!(r.status, H4Status::Violated);
        let w = r.witness.unwrap();
        let again = h4_margin(&f, w.x, w.p, w.q, w.mu);
        assert!((again - r.worst_margin).abs() <= 1e-12);
        assert!(again <= H4_VIOLATION_FLOOR);
        // Same linear piece: q and p + q on the same side of the kink at −1.
        assert_eq!(w.q >= -1.0, w.p + w.q >= -1.0);
        // The exhaustive grid includes q = 0 where F(q) = 0; its worst margin is 0.
        assert!(grid_worst_margin(&f, 0.25, 5.0).abs() < 1e-12);
    }

    #[test]
    fn h4_empty_constraint_set() {
        // F = |p| + 1 > 0 everywhere: no q with F(q) ≤ 0.
        let f = HamiltonianSpec::eikonal_shift(0.0).shifted(-1.0);
        assert_eq!(
            check_h4(&f, 0.25, 5.0, 100).unwrap_err(),
            HjError::EmptyConstraintSet
        );
    }

    #[test]
    fn h4_psi_nondecreasing_in_eta() {
        let f = HamiltonianSpec::quadratic(0.0).shifted(0.5);
        let mut last = 0.0;
        for eta in [0.05, 0.1, 0.2, 0.3, 0.5, 1.0] {
            let r = check_h4(&f, eta, 5.0, 2000).unwrap();
            assert!(r.psi_estimate >= last - 1e-15, "eta={eta}");
            last = r.psi_estimate;
        }
    }

    proptest! {
        #[test]
        fn gauge_positive_homogeneity(p in -5.0f64..5.0, s in 0.01f64..20.0, c in -0.9f64..0.9) {
            let h = HamiltonianSpec::eikonal_shift(c).shifted(1.0);
            let a = gauge_of_sublevel(&h, 0.0, s * p).unwrap();
            let b = s * gauge_of_sublevel(&h, 0.0, p).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
        }

        #[test]
        fn gauge_characterizes_sublevel(p in -5.0f64..5.0) {
            let h = HamiltonianSpec::quadratic(0.5).shifted(1.0);
            let j = gauge_of_sublevel(&h, 0.0, p).unwrap();
            let hv = h.eval(0.0, p);
            if hv <= -1e-9 { prop_assert!(j <= 1.0 + 1e-10); }
            if hv >= 1e-9 { prop_assert!(j > 1.0 - 1e-10); }
            // On the boundary the gauge is 1.
            let ray_end = p / j;
            if p != 0.0 { prop_assert!(h.eval(0.0, ray_end).abs() < 1e-8); }
        }

        #[test]
        fn kruzhkov_preserves_order(
            u in prop::collection::vec(-5.0f64..5.0, 8),
            d in prop::collection::vec(0.0f64..3.0, 8),
        ) {
            let g = Grid1D::new(0.0, 1.0, 8).unwrap();
            let v: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a + b).collect();
            let wu = kruzhkov(&SampledFn::from_values(g, u, Extension::Constant).unwrap(), KruzhkovDirection::Forward).unwrap();
            let wv = kruzhkov(&SampledFn::from_values(g, v, Extension::Constant).unwrap(), KruzhkovDirection::Forward).unwrap();
            for (a, b) in wu.values().iter().zip(wv.values()) {
                prop_assert!(a <= b);
            }
        }
    }
}

//! Sampled A-paths, A-homotopies and the homotopy equation.
//!
//! Paths live on the uniform grid `t_i = i/N`; sheets add a uniform grid
//! `eps_k = k/K`. The homotopy equation `d_t b - d_eps a = T(a, b)` is
//! integrated slice by slice with classical RK4 in `t`.

use ndarray::{s, Array2, Array3, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebroid::{AlgebroidError, ChartedAlgebroid};
use crate::expr::{Compiled, EvalError, Expr};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("grid too coarse: N = {n}, K = {k} (need N >= 8, K >= 4)")]
    GridTooCoarse { n: usize, k: usize },
    #[error("a path needs at least two nodes")]
    TooFewNodes,
    #[error("non-finite value encountered")]
    NonFinite,
    #[error("base endpoints differ by {gap:e}")]
    EndpointMismatch { gap: f64 },
    #[error("node counts differ: {0} vs {1}")]
    NodeCount(usize, usize),
    #[error("invalid reparameterization: {0}")]
    InvalidReparam(String),
    #[error(transparent)]
    Algebroid(#[from] AlgebroidError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Path sampled at `N + 1` uniform nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledPath {
    /// `(N+1) x m` base points
    pub base: Array2<f64>,
    /// `(N+1) x n` fiber values
    pub fiber: Array2<f64>,
}

impl SampledPath {
    pub fn new(base: Array2<f64>, fiber: Array2<f64>) -> Result<SampledPath, PathError> {
        if base.nrows() != fiber.nrows() {
            return Err(PathError::NodeCount(base.nrows(), fiber.nrows()));
        }
        if base.nrows() < 2 {
            return Err(PathError::TooFewNodes);
        }
        if base.iter().chain(fiber.iter()).any(|v| !v.is_finite()) {
            return Err(PathError::NonFinite);
        }
        Ok(SampledPath { base, fiber })
    }

    /// The constant path `0_x`.
    pub fn zero(x: &[f64], rank: usize, n: usize) -> SampledPath {
        let base = Array2::from_shape_fn((n + 1, x.len()), |(_, j)| x[j]);
        SampledPath { base, fiber: Array2::zeros((n + 1, rank)) }
    }

    /// Samples closed-form base and fiber curves.
    pub fn from_fns<G, F>(n: usize, gamma: G, a: F) -> SampledPath
    where
        G: Fn(f64) -> Vec<f64>,
        F: Fn(f64) -> Vec<f64>,
    {
        let g0 = gamma(0.0);
        let a0 = a(0.0);
        let mut base = Array2::zeros((n + 1, g0.len()));
        let mut fiber = Array2::zeros((n + 1, a0.len()));
        for i in 0..=n {
            let t = i as f64 / n as f64;
            for (j, v) in gamma(t).into_iter().enumerate() {
                base[(i, j)] = v;
            }
            for (j, v) in a(t).into_iter().enumerate() {
                fiber[(i, j)] = v;
            }
        }
        SampledPath { base, fiber }
    }

    /// Integrates `gamma' = rho(gamma) a(t)` from `x0` with RK4, giving an
    /// A-path over the prescribed fiber curve.
    pub fn lift<F>(alg: &ChartedAlgebroid, x0: &[f64], n: usize, a: F) -> Result<SampledPath, PathError>
    where
        F: Fn(f64) -> Vec<f64>,
    {
        let m = alg.base_dim();
        if x0.len() != m {
            return Err(PathError::Dimension { expected: m, got: x0.len() });
        }
        let h = 1.0 / n as f64;
        let mut base = Array2::zeros((n + 1, m));
        let mut fiber = Array2::zeros((n + 1, alg.rank()));
        let mut x = x0.to_vec();
        let rhs = |x: &[f64], t: f64| alg.anchor_apply(x, &a(t));
        for i in 0..=n {
            let t = i as f64 * h;
            for (j, v) in a(t).into_iter().enumerate() {
                fiber[(i, j)] = v;
            }
            for j in 0..m {
                base[(i, j)] = x[j];
            }
            if i == n {
                break;
            }
            let k1 = rhs(&x, t)?;
            let x2: Vec<f64> = (0..m).map(|j| x[j] + 0.5 * h * k1[j]).collect();
            let k2 = rhs(&x2, t + 0.5 * h)?;
            let x3: Vec<f64> = (0..m).map(|j| x[j] + 0.5 * h * k2[j]).collect();
            let k3 = rhs(&x3, t + 0.5 * h)?;
            let x4: Vec<f64> = (0..m).map(|j| x[j] + h * k3[j]).collect();
            let k4 = rhs(&x4, t + h)?;
            for j in 0..m {
                x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
        }
        SampledPath::new(base, fiber)
    }

    /// Number of intervals `N`.
    pub fn intervals(&self) -> usize {
        self.base.nrows() - 1
    }

    pub fn base_dim(&self) -> usize {
        self.base.ncols()
    }

    pub fn rank(&self) -> usize {
        self.fiber.ncols()
    }

    /// Linear interpolation of base and fiber at `t` in `[0, 1]`.
    pub fn interpolate(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        (interp_rows(self.base.view(), t), interp_rows(self.fiber.view(), t))
    }

    /// Trapezoid integral of each fiber component.
    pub fn fiber_integral(&self) -> Vec<f64> {
        let n = self.intervals();
        let h = 1.0 / n as f64;
        (0..self.rank())
            .map(|j| {
                let col = self.fiber.column(j);
                h * (col.sum() - 0.5 * (col[0] + col[n]))
            })
            .collect()
    }

    /// Resamples onto `n` intervals by linear interpolation.
    pub fn resample(&self, n: usize) -> SampledPath {
        let mut base = Array2::zeros((n + 1, self.base_dim()));
        let mut fiber = Array2::zeros((n + 1, self.rank()));
        for i in 0..=n {
            let (b, f) = self.interpolate(i as f64 / n as f64);
            base.row_mut(i).assign(&ndarray::Array1::from(b));
            fiber.row_mut(i).assign(&ndarray::Array1::from(f));
        }
        SampledPath { base, fiber }
    }
}

fn interp_rows(v: ArrayView2<f64>, t: f64) -> Vec<f64> {
    let n = v.nrows() - 1;
    let u = (t.clamp(0.0, 1.0)) * n as f64;
    let i = (u.floor() as usize).min(n.saturating_sub(1));
    let w = u - i as f64;
    (0..v.ncols()).map(|j| (1.0 - w) * v[(i, j)] + w * v[(i + 1, j)]).collect()
}

/// Second-order difference of column data along the node axis: centered
/// inside, one-sided `(-3f0 + 4f1 - f2)/2h` at the ends.
fn derivative_rows(v: ArrayView2<f64>, h: f64) -> Array2<f64> {
    let n = v.nrows() - 1;
    let mut out = Array2::zeros(v.raw_dim());
    for j in 0..v.ncols() {
        if n == 1 {
            let d = (v[(1, j)] - v[(0, j)]) / h;
            out[(0, j)] = d;
            out[(1, j)] = d;
            continue;
        }
        out[(0, j)] = (-3.0 * v[(0, j)] + 4.0 * v[(1, j)] - v[(2, j)]) / (2.0 * h);
        out[(n, j)] = (3.0 * v[(n, j)] - 4.0 * v[(n - 1, j)] + v[(n - 2, j)]) / (2.0 * h);
        for i in 1..n {
            out[(i, j)] = (v[(i + 1, j)] - v[(i - 1, j)]) / (2.0 * h);
        }
    }
    out
}

fn check_dims(alg: &ChartedAlgebroid, m: usize, n: usize) -> Result<(), PathError> {
    if m != alg.base_dim() {
        return Err(PathError::Dimension { expected: alg.base_dim(), got: m });
    }
    if n != alg.rank() {
        return Err(PathError::Dimension { expected: alg.rank(), got: n });
    }
    Ok(())
}

/// `max_i |rho(gamma_i) a_i - gamma'_i|` over interior nodes.
pub fn apath_residual(alg: &ChartedAlgebroid, p: &SampledPath) -> Result<f64, PathError> {
    check_dims(alg, p.base_dim(), p.rank())?;
    let n = p.intervals();
    let h = 1.0 / n as f64;
    let mut worst: f64 = 0.0;
    for i in 1..n {
        let x: Vec<f64> = p.base.row(i).to_vec();
        let a: Vec<f64> = p.fiber.row(i).to_vec();
        let v = alg.anchor_apply(&x, &a)?;
        for (mu, vm) in v.iter().enumerate() {
            let d = (p.base[(i + 1, mu)] - p.base[(i - 1, mu)]) / (2.0 * h);
            worst = worst.max((vm - d).abs());
        }
    }
    Ok(worst)
}

/// Outcome of the endpoint check for A0-paths.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCheck {
    pub pass: bool,
    pub defect: f64,
    pub tolerance: f64,
}

/// Checks `a(0) = a(1) = 0` and `a'(0) = a'(1) = 0` (one-sided second-order
/// differences) against `10 / N^2`.
pub fn a0_boundary_check(p: &SampledPath) -> BoundaryCheck {
    let n = p.intervals();
    let tolerance = 10.0 / (n * n) as f64;
    let d = derivative_rows(p.fiber.view(), 1.0 / n as f64);
    let mut defect: f64 = 0.0;
    for j in 0..p.rank() {
        defect = defect
            .max(p.fiber[(0, j)].abs())
            .max(p.fiber[(n, j)].abs())
            .max(d[(0, j)].abs())
            .max(d[(n, j)].abs());
    }
    BoundaryCheck { pass: defect <= tolerance, defect, tolerance }
}

/// Monotone reparameterization of `[0, 1]`.
pub trait Reparam: Sync {
    fn value(&self, t: f64) -> f64;
    fn derivative(&self, t: f64) -> f64;
}

/// `tau(t) = t - sin(2 pi t) / (2 pi)`, flat at both ends.
#[derive(Clone, Copy, Debug, Default)]
pub struct DefaultTau;

impl Reparam for DefaultTau {
    fn value(&self, t: f64) -> f64 {
        t - (2.0 * std::f64::consts::PI * t).sin() / (2.0 * std::f64::consts::PI)
    }
    fn derivative(&self, t: f64) -> f64 {
        1.0 - (2.0 * std::f64::consts::PI * t).cos()
    }
}

/// Piecewise-linear map through `(t_k, s_k)` knots including `(0,0)`, `(1,1)`.
#[derive(Clone, Debug)]
pub struct PiecewiseLinear {
    knots: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<PiecewiseLinear, PathError> {
        if knots.len() < 2 || knots[0] != (0.0, 0.0) || *knots.last().unwrap() != (1.0, 1.0) {
            return Err(PathError::InvalidReparam("knots must start at (0,0) and end at (1,1)".into()));
        }
        for w in knots.windows(2) {
            if w[1].0 <= w[0].0 || w[1].1 < w[0].1 {
                return Err(PathError::InvalidReparam("knots must be increasing".into()));
            }
        }
        Ok(PiecewiseLinear { knots })
    }

    fn segment(&self, t: f64) -> usize {
        let t = t.clamp(0.0, 1.0);
        self.knots
            .windows(2)
            .position(|w| t < w[1].0)
            .unwrap_or(self.knots.len() - 2)
    }
}

impl Reparam for PiecewiseLinear {
    fn value(&self, t: f64) -> f64 {
        let k = self.segment(t);
        let (a, b) = (self.knots[k], self.knots[k + 1]);
        a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
    }
    /// Slope of the segment; at an interior knot, the mean of both slopes, so
    /// that a jump landing on a grid node keeps the quadrature second order.
    fn derivative(&self, t: f64) -> f64 {
        let slope = |k: usize| {
            let (a, b) = (self.knots[k], self.knots[k + 1]);
            (b.1 - a.1) / (b.0 - a.0)
        };
        let k = self.segment(t);
        if k > 0 && t == self.knots[k].0 {
            0.5 * (slope(k - 1) + slope(k))
        } else {
            slope(k)
        }
    }
}

/// `a^tau(t) = tau'(t) a(tau(t))`, `gamma^tau = gamma o tau`. Requires a flat
/// monotone `tau` fixing both ends.
pub fn reparameterize(p: &SampledPath, tau: &dyn Reparam) -> Result<SampledPath, PathError> {
    let n = p.intervals();
    if tau.value(0.0).abs() > 1e-12 || (tau.value(1.0) - 1.0).abs() > 1e-12 {
        return Err(PathError::InvalidReparam("tau must fix 0 and 1".into()));
    }
    if tau.derivative(0.0).abs() > 1e-12 || tau.derivative(1.0).abs() > 1e-12 {
        return Err(PathError::InvalidReparam("tau must be flat at the ends".into()));
    }
    let mut base = Array2::zeros(p.base.raw_dim());
    let mut fiber = Array2::zeros(p.fiber.raw_dim());
    for i in 0..=n {
        let t = i as f64 / n as f64;
        let d = tau.derivative(t);
        if d < -1e-12 {
            return Err(PathError::InvalidReparam(format!("tau' < 0 at t = {}", t)));
        }
        let (b, f) = p.interpolate(tau.value(t));
        for j in 0..b.len() {
            base[(i, j)] = b[j];
        }
        for j in 0..f.len() {
            fiber[(i, j)] = d * f[j];
        }
    }
    SampledPath::new(base, fiber)
}

/// `p` then `q` on `2N + 1` nodes: `2 p(2t)` on the first half and
/// `2 q(2t - 1)` on the second. The joint keeps the kink.
pub fn concatenate(p: &SampledPath, q: &SampledPath, tol: f64) -> Result<SampledPath, PathError> {
    let n = p.intervals();
    if q.intervals() != n {
        return Err(PathError::NodeCount(p.base.nrows(), q.base.nrows()));
    }
    if p.base_dim() != q.base_dim() || p.rank() != q.rank() {
        return Err(PathError::Dimension { expected: p.rank(), got: q.rank() });
    }
    let gap = (0..p.base_dim())
        .map(|j| (p.base[(n, j)] - q.base[(0, j)]).abs())
        .fold(0.0, f64::max);
    if gap > tol {
        return Err(PathError::EndpointMismatch { gap });
    }
    let mut base = Array2::zeros((2 * n + 1, p.base_dim()));
    let mut fiber = Array2::zeros((2 * n + 1, p.rank()));
    base.slice_mut(s![0..=n, ..]).assign(&p.base);
    fiber.slice_mut(s![0..=n, ..]).assign(&(&p.fiber * 2.0));
    base.slice_mut(s![n + 1.., ..]).assign(&q.base.slice(s![1.., ..]));
    fiber.slice_mut(s![n + 1.., ..]).assign(&(&q.fiber.slice(s![1.., ..]) * 2.0));
    SampledPath::new(base, fiber)
}

/// Reverse traversal: base `gamma(1 - t)` and fiber `-a(1 - t)`, so the
/// result is again an A-path.
pub fn invert_path(p: &SampledPath) -> SampledPath {
    let base = p.base.slice(s![..;-1, ..]).to_owned();
    let fiber = -&p.fiber.slice(s![..;-1, ..]);
    SampledPath { base, fiber }
}

/// Christoffel symbols `Gamma^k_{mu j}` of a connection on the chart frame.
#[derive(Clone, Debug, Default)]
pub struct ChartConnection {
    entries: Vec<(usize, usize, usize, Expr)>,
    compiled: Vec<(usize, usize, usize, Compiled)>,
}

impl ChartConnection {
    /// All symbols zero.
    pub fn flat() -> ChartConnection {
        ChartConnection::default()
    }

    /// Entries `(k, mu, j, Gamma^k_{mu j})`, 0-based, over the chart of `alg`.
    pub fn new(alg: &ChartedAlgebroid, entries: Vec<(usize, usize, usize, Expr)>) -> Result<ChartConnection, PathError> {
        let mut compiled = Vec::new();
        for (k, mu, j, e) in &entries {
            if *k >= alg.rank() || *j >= alg.rank() || *mu >= alg.base_dim() {
                return Err(PathError::Dimension { expected: alg.rank(), got: (*k).max(*j) });
            }
            compiled.push((*k, *mu, *j, e.compile(alg.coords())?));
        }
        Ok(ChartConnection { entries, compiled })
    }

    pub fn is_flat(&self) -> bool {
        self.entries.iter().all(|e| e.3.is_zero())
    }

    /// `(k, mu, j, value)` at `x`.
    fn eval(&self, x: &[f64]) -> Result<Vec<(usize, usize, usize, f64)>, PathError> {
        self.compiled
            .iter()
            .map(|(k, mu, j, c)| Ok((*k, *mu, *j, c.eval(x)?)))
            .collect()
    }
}

/// Pointwise data `(rho, c, Gamma)` reused across torsion evaluations.
struct LocalData {
    n: usize,
    rho: nalgebra::DMatrix<f64>,
    c: Vec<f64>,
    gamma: Vec<(usize, usize, usize, f64)>,
}

impl LocalData {
    fn at(alg: &ChartedAlgebroid, conn: &ChartConnection, x: &[f64]) -> Result<LocalData, PathError> {
        Ok(LocalData {
            n: alg.rank(),
            rho: alg.anchor_at(x)?,
            c: alg.structure_at(x)?,
            gamma: conn.eval(x)?,
        })
    }

    fn torsion(&self, xi: &[f64], eta: &[f64], out: &mut [f64]) {
        let n = self.n;
        for k in 0..n {
            let mut s = 0.0;
            for i in 0..n {
                if xi[i] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    s += self.c[(i * n + j) * n + k] * xi[i] * eta[j];
                }
            }
            out[k] = s;
        }
        if self.gamma.is_empty() {
            return;
        }
        let m = self.rho.nrows();
        let rx: Vec<f64> = (0..m).map(|mu| (0..n).map(|i| self.rho[(mu, i)] * xi[i]).sum()).collect();
        let re: Vec<f64> = (0..m).map(|mu| (0..n).map(|i| self.rho[(mu, i)] * eta[i]).sum()).collect();
        for &(k, mu, j, g) in &self.gamma {
            out[k] += re[mu] * g * xi[j] - rx[mu] * g * eta[j];
        }
    }
}

/// `T(xi, eta)^k = c^k_ij xi^i eta^j + rho(eta)^mu Gamma^k_{mu j} xi^j - rho(xi)^mu Gamma^k_{mu j} eta^j`.
pub fn torsion(
    alg: &ChartedAlgebroid,
    conn: &ChartConnection,
    x: &[f64],
    xi: &[f64],
    eta: &[f64],
) -> Result<Vec<f64>, PathError> {
    if xi.len() != alg.rank() || eta.len() != alg.rank() {
        return Err(PathError::Dimension { expected: alg.rank(), got: xi.len().min(eta.len()) });
    }
    let d = LocalData::at(alg, conn, x)?;
    let mut out = vec![0.0; alg.rank()];
    d.torsion(xi, eta, &mut out);
    Ok(out)
}

/// Values of a two-parameter family on `(K+1) x (N+1)` nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct HomotopySheet {
    /// `(K+1, N+1, m)`
    pub base: Array3<f64>,
    /// `(K+1, N+1, n)`
    pub fiber: Array3<f64>,
}

impl HomotopySheet {
    pub fn new(base: Array3<f64>, fiber: Array3<f64>) -> Result<HomotopySheet, PathError> {
        let (k1, n1, _) = base.dim();
        let (k2, n2, _) = fiber.dim();
        if k1 != k2 || n1 != n2 {
            return Err(PathError::NodeCount(k1 * n1, k2 * n2));
        }
        if k1 < 2 || n1 < 2 {
            return Err(PathError::TooFewNodes);
        }
        if base.iter().chain(fiber.iter()).any(|v| !v.is_finite()) {
            return Err(PathError::NonFinite);
        }
        Ok(HomotopySheet { base, fiber })
    }

    /// Samples closed-form `gamma(eps, t)` and `a(eps, t)`.
    pub fn from_fns<G, F>(k: usize, n: usize, gamma: G, a: F) -> HomotopySheet
    where
        G: Fn(f64, f64) -> Vec<f64>,
        F: Fn(f64, f64) -> Vec<f64>,
    {
        let m = gamma(0.0, 0.0).len();
        let r = a(0.0, 0.0).len();
        let mut base = Array3::zeros((k + 1, n + 1, m));
        let mut fiber = Array3::zeros((k + 1, n + 1, r));
        for e in 0..=k {
            let eps = e as f64 / k as f64;
            for i in 0..=n {
                let t = i as f64 / n as f64;
                for (j, v) in gamma(eps, t).into_iter().enumerate() {
                    base[(e, i, j)] = v;
                }
                for (j, v) in a(eps, t).into_iter().enumerate() {
                    fiber[(e, i, j)] = v;
                }
            }
        }
        HomotopySheet { base, fiber }
    }

    /// Stacks paths with equal node counts as the slices `eps_k = k / K`.
    pub fn from_slices(slices: &[SampledPath]) -> Result<HomotopySheet, PathError> {
        let first = slices.first().ok_or(PathError::TooFewNodes)?;
        let (n1, m, r) = (first.base.nrows(), first.base_dim(), first.rank());
        let mut base = Array3::zeros((slices.len(), n1, m));
        let mut fiber = Array3::zeros((slices.len(), n1, r));
        for (e, p) in slices.iter().enumerate() {
            if p.base.nrows() != n1 || p.base_dim() != m || p.rank() != r {
                return Err(PathError::NodeCount(n1, p.base.nrows()));
            }
            base.slice_mut(s![e, .., ..]).assign(&p.base);
            fiber.slice_mut(s![e, .., ..]).assign(&p.fiber);
        }
        HomotopySheet::new(base, fiber)
    }

    /// The rescaling family `a_eps(t) = phi'(t) a(phi(t))`,
    /// `phi = (1 - eps) t + eps sigma(t)`, joining `p` (eps = 0) to its
    /// reparameterization by `sigma` (eps = 1). Values between nodes of `p`
    /// are interpolated linearly.
    pub fn rescaling(p: &SampledPath, sigma: &dyn Reparam, k: usize) -> HomotopySheet {
        let n = p.intervals();
        let (m, r) = (p.base_dim(), p.rank());
        let mut base = Array3::zeros((k + 1, n + 1, m));
        let mut fiber = Array3::zeros((k + 1, n + 1, r));
        for e in 0..=k {
            let eps = e as f64 / k as f64;
            for i in 0..=n {
                let t = i as f64 / n as f64;
                let phi = (1.0 - eps) * t + eps * sigma.value(t);
                let dphi = (1.0 - eps) + eps * sigma.derivative(t);
                let (b, f) = p.interpolate(phi);
                for j in 0..m {
                    base[(e, i, j)] = b[j];
                }
                for j in 0..r {
                    fiber[(e, i, j)] = dphi * f[j];
                }
            }
        }
        HomotopySheet { base, fiber }
    }

    pub fn eps_intervals(&self) -> usize {
        self.base.dim().0 - 1
    }

    pub fn t_intervals(&self) -> usize {
        self.base.dim().1 - 1
    }

    pub fn slice(&self, e: usize) -> SampledPath {
        SampledPath {
            base: self.base.slice(s![e, .., ..]).to_owned(),
            fiber: self.fiber.slice(s![e, .., ..]).to_owned(),
        }
    }

    /// Largest movement of `gamma(eps, 0)` and `gamma(eps, 1)` in `eps`.
    pub fn endpoint_drift(&self) -> f64 {
        let (k1, n1, m) = self.base.dim();
        let mut worst: f64 = 0.0;
        for e in 1..k1 {
            for j in 0..m {
                worst = worst
                    .max((self.base[(e, 0, j)] - self.base[(0, 0, j)]).abs())
                    .max((self.base[(e, n1 - 1, j)] - self.base[(0, n1 - 1, j)]).abs());
            }
        }
        worst
    }

    /// `d_eps a` with second-order differences in `eps`.
    fn d_eps_fiber(&self) -> Array3<f64> {
        let (k1, n1, r) = self.fiber.dim();
        let h = 1.0 / (k1 - 1) as f64;
        let mut out = Array3::zeros((k1, n1, r));
        for i in 0..n1 {
            let col = self.fiber.slice(s![.., i, ..]);
            out.slice_mut(s![.., i, ..]).assign(&derivative_rows(col, h));
        }
        out
    }
}

/// Solution `b(eps, t)` of the homotopy equation, `(K+1, N+1, n)`.
pub type BSheet = Array3<f64>;

/// Solves `d_t b = d_eps a + T(a, b)`, `b(eps, 0) = 0`, on every slice.
pub fn homotopy_solve(alg: &ChartedAlgebroid, sheet: &HomotopySheet, conn: &ChartConnection) -> Result<BSheet, PathError> {
    let (k1, n1, m) = sheet.base.dim();
    let r = sheet.fiber.dim().2;
    check_dims(alg, m, r)?;
    let (n, k) = (n1 - 1, k1 - 1);
    if n < 8 || k < 4 {
        return Err(PathError::GridTooCoarse { n, k });
    }
    let da = sheet.d_eps_fiber();
    let h = 1.0 / n as f64;
    let slices: Vec<Result<Array2<f64>, PathError>> = (0..k1)
        .into_par_iter()
        .map(|e| {
            let mut b = Array2::zeros((n1, r));
            let mut cur = vec![0.0; r];
            let node = |i: usize| -> Result<(LocalData, Vec<f64>, Vec<f64>), PathError> {
                let x: Vec<f64> = sheet.base.slice(s![e, i, ..]).to_vec();
                Ok((
                    LocalData::at(alg, conn, &x)?,
                    sheet.fiber.slice(s![e, i, ..]).to_vec(),
                    da.slice(s![e, i, ..]).to_vec(),
                ))
            };
            let mid = |i: usize| -> Result<(LocalData, Vec<f64>, Vec<f64>), PathError> {
                let x: Vec<f64> = (0..m).map(|j| 0.5 * (sheet.base[(e, i, j)] + sheet.base[(e, i + 1, j)])).collect();
                Ok((
                    LocalData::at(alg, conn, &x)?,
                    (0..r).map(|j| 0.5 * (sheet.fiber[(e, i, j)] + sheet.fiber[(e, i + 1, j)])).collect(),
                    (0..r).map(|j| 0.5 * (da[(e, i, j)] + da[(e, i + 1, j)])).collect(),
                ))
            };
            let f = |d: &(LocalData, Vec<f64>, Vec<f64>), y: &[f64], out: &mut [f64]| {
                d.0.torsion(&d.1, y, out);
                for j in 0..r {
                    out[j] += d.2[j];
                }
            };
            let mut left = node(0)?;
            let (mut k1v, mut k2v, mut k3v, mut k4v) = (vec![0.0; r], vec![0.0; r], vec![0.0; r], vec![0.0; r]);
            let mut y = vec![0.0; r];
            for i in 0..n {
                let md = mid(i)?;
                let right = node(i + 1)?;
                f(&left, &cur, &mut k1v);
                for j in 0..r {
                    y[j] = cur[j] + 0.5 * h * k1v[j];
                }
                f(&md, &y, &mut k2v);
                for j in 0..r {
                    y[j] = cur[j] + 0.5 * h * k2v[j];
                }
                f(&md, &y, &mut k3v);
                for j in 0..r {
                    y[j] = cur[j] + h * k3v[j];
                }
                f(&right, &y, &mut k4v);
                for j in 0..r {
                    cur[j] += h / 6.0 * (k1v[j] + 2.0 * k2v[j] + 2.0 * k3v[j] + k4v[j]);
                    b[(i + 1, j)] = cur[j];
                }
                if cur.iter().any(|v| !v.is_finite()) {
                    return Err(PathError::NonFinite);
                }
                left = right;
            }
            Ok(b)
        })
        .collect();
    let mut out = Array3::zeros((k1, n1, r));
    for (e, sl) in slices.into_iter().enumerate() {
        out.slice_mut(s![e, .., ..]).assign(&sl?);
    }
    Ok(out)
}

/// `max |rho(gamma) b - d_eps gamma|` over the grid.
pub fn b_is_apath_residual(alg: &ChartedAlgebroid, sheet: &HomotopySheet, b: &BSheet) -> Result<f64, PathError> {
    let (k1, n1, m) = sheet.base.dim();
    check_dims(alg, m, b.dim().2)?;
    if b.dim().0 != k1 || b.dim().1 != n1 {
        return Err(PathError::NodeCount(k1 * n1, b.dim().0 * b.dim().1));
    }
    let he = 1.0 / (k1 - 1) as f64;
    let mut worst: f64 = 0.0;
    for i in 0..n1 {
        let dg = derivative_rows(sheet.base.slice(s![.., i, ..]), he);
        for e in 0..k1 {
            let x: Vec<f64> = sheet.base.slice(s![e, i, ..]).to_vec();
            let v = alg.anchor_apply(&x, &b.slice(s![e, i, ..]).to_vec())?;
            for mu in 0..m {
                worst = worst.max((v[mu] - dg[(e, mu)]).abs());
            }
        }
    }
    Ok(worst)
}

/// Default equivalence threshold: `1e-3` at `N = K = 201`, scaled by
/// the second-order error model.
pub fn default_equivalence_tolerance(n: usize, k: usize) -> f64 {
    let sn = 201.0 / n as f64;
    let sk = 201.0 / k as f64;
    1e-3 * 0.5 * (sn * sn + sk * sk)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceVerdict {
    pub equivalent: bool,
    /// `max_eps |b(eps, 1)|`
    pub defect: f64,
    pub tolerance: f64,
    pub n: usize,
    pub k: usize,
    /// movement of the base endpoints along the sheet
    pub endpoint_drift: f64,
}

/// Decides equivalence of the two boundary slices from `max_eps |b(eps,1)|`.
pub fn equivalence_check(
    alg: &ChartedAlgebroid,
    sheet: &HomotopySheet,
    conn: &ChartConnection,
    tol: Option<f64>,
) -> Result<EquivalenceVerdict, PathError> {
    let b = homotopy_solve(alg, sheet, conn)?;
    Ok(verdict_from_b(sheet, &b, tol))
}

/// The verdict for an already solved b-sheet.
pub fn verdict_from_b(sheet: &HomotopySheet, b: &BSheet, tol: Option<f64>) -> EquivalenceVerdict {
    let (n, k) = (sheet.t_intervals(), sheet.eps_intervals());
    let tolerance = tol.unwrap_or_else(|| default_equivalence_tolerance(n, k));
    let defect = b.slice(s![.., n, ..]).iter().fold(0.0f64, |a, v| a.max(v.abs()));
    EquivalenceVerdict {
        equivalent: defect <= tolerance,
        defect,
        tolerance,
        n,
        k,
        endpoint_drift: sheet.endpoint_drift(),
    }
}

/// Maximum grid difference of the b-sheets for two connections.
pub fn connection_independence_test(
    alg: &ChartedAlgebroid,
    sheet: &HomotopySheet,
    c1: &ChartConnection,
    c2: &ChartConnection,
) -> Result<f64, PathError> {
    let b1 = homotopy_solve(alg, sheet, c1)?;
    let b2 = homotopy_solve(alg, sheet, c2)?;
    Ok((&b1 - &b2).iter().fold(0.0f64, |a, v| a.max(v.abs())))
}

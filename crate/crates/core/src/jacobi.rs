//! Jacobi, Poisson, contact and locally conformal symplectic structures.
//!
//! Bivectors are full antisymmetric `m x m` tables of expressions, built from
//! their upper triangle. Contractions follow `#Lambda(dx^i) = Lambda^{i mu} d_mu`,
//! so the Jacobi bracket reads `{f,g} = Lambda(df,dg) + f E(g) - g E(f)`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebroid::{AlgebroidError, ChartedAlgebroid};
use crate::expr::{self, coordinate_names, EvalError, Expr, ParseError};
use crate::sample::max_abs;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JacobiError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("conformal factor vanishes at sample {index}")]
    VanishingFactor { index: usize },
    #[error("homogeneity residual {residual:e} exceeds tolerance {tol:e}")]
    NotHomogeneous { residual: f64, tol: f64 },
    #[error("chart has no homogeneity coordinate")]
    NoHomogeneity,
    #[error("contact condition fails at sample {index} (bordered determinant {det:e})")]
    NotContact { index: usize, det: f64 },
    #[error("two-form degenerate at sample {index}")]
    Degenerate { index: usize },
    #[error("l.c.s. condition violated: residual {residual:e}")]
    NotLcs { residual: f64 },
    #[error("contact chart dimension {0} is even")]
    EvenDimension(usize),
    #[error("invalid chart json: {0}")]
    Json(String),
    #[error(transparent)]
    Algebroid(#[from] AlgebroidError),
}

/// Antisymmetric table of expressions.
pub type Bivector = Vec<Vec<Expr>>;

/// Builds an antisymmetric table from entries `(mu, nu, expr)`, `mu != nu`.
/// Repeated or transposed entries are summed with the appropriate sign.
pub fn bivector_from_entries(m: usize, entries: &[(usize, usize, Expr)]) -> Bivector {
    let mut upper = vec![vec![Expr::zero(); m]; m];
    for (mu, nu, e) in entries {
        let (a, b, e) = if mu < nu { (*mu, *nu, e.clone()) } else { (*nu, *mu, -e) };
        if a == b {
            continue;
        }
        upper[a][b] = &upper[a][b] + e;
    }
    let mut out = vec![vec![Expr::zero(); m]; m];
    for a in 0..m {
        for b in (a + 1)..m {
            out[b][a] = -&upper[a][b];
            out[a][b] = upper[a][b].clone();
        }
    }
    out
}

/// Numeric trivector, stored as the full `m^3` antisymmetric table.
#[derive(Clone, Debug, PartialEq)]
pub struct TrivectorValues {
    pub dim: usize,
    pub comps: Vec<f64>,
}

impl TrivectorValues {
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.comps[(i * self.dim + j) * self.dim + k]
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.comps)
    }
}

fn eval_table(coords: &[String], t: &[Vec<Expr>], x: &[f64]) -> Result<Vec<Vec<f64>>, EvalError> {
    t.iter().map(|r| r.iter().map(|e| e.eval(coords, x)).collect()).collect()
}

fn eval_vec(coords: &[String], v: &[Expr], x: &[f64]) -> Result<Vec<f64>, EvalError> {
    v.iter().map(|e| e.eval(coords, x)).collect()
}

/// Derivative table `d[l][j][k] = d_l T^{jk}` at `x`.
fn derivative_table(coords: &[String], t: &[Vec<Expr>], x: &[f64]) -> Result<Vec<Vec<Vec<f64>>>, EvalError> {
    coords
        .iter()
        .map(|c| {
            t.iter()
                .map(|r| r.iter().map(|e| if e.is_zero() { Ok(0.0) } else { e.diff(c).eval(coords, x) }).collect())
                .collect()
        })
        .collect()
}

/// Coordinate Schouten bracket
/// `[P,Q]^{ijk} = sum_cyc (P^{li} d_l Q^{jk} + Q^{li} d_l P^{jk})`.
pub fn schouten_bivector(coords: &[String], p: &Bivector, q: &Bivector, x: &[f64]) -> Result<TrivectorValues, JacobiError> {
    let m = coords.len();
    if p.len() != m || q.len() != m || x.len() != m {
        return Err(JacobiError::Dimension { expected: m, got: p.len().min(q.len()).min(x.len()) });
    }
    let pv = eval_table(coords, p, x)?;
    let qv = eval_table(coords, q, x)?;
    let dp = derivative_table(coords, p, x)?;
    let dq = derivative_table(coords, q, x)?;
    let mut comps = vec![0.0; m * m * m];
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let mut s = 0.0;
                for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
                    for l in 0..m {
                        s += pv[l][a] * dq[l][b][c] + qv[l][a] * dp[l][b][c];
                    }
                }
                comps[(i * m + j) * m + k] = s;
            }
        }
    }
    Ok(TrivectorValues { dim: m, comps })
}

/// `(L_V L)^{mu nu} = V^s d_s L^{mu nu} - L^{s nu} d_s V^mu - L^{mu s} d_s V^nu` at `x`.
pub fn lie_derivative_bivector(coords: &[String], l: &Bivector, v: &[Expr], x: &[f64]) -> Result<Vec<Vec<f64>>, JacobiError> {
    let m = coords.len();
    if l.len() != m || v.len() != m || x.len() != m {
        return Err(JacobiError::Dimension { expected: m, got: l.len().min(v.len()).min(x.len()) });
    }
    let lv = eval_table(coords, l, x)?;
    let vv = eval_vec(coords, v, x)?;
    let dl = derivative_table(coords, l, x)?;
    let dv: Vec<Vec<f64>> = coords
        .iter()
        .map(|c| v.iter().map(|e| e.diff(c).eval(coords, x)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = vec![vec![0.0; m]; m];
    for mu in 0..m {
        for nu in 0..m {
            let mut s = 0.0;
            for sg in 0..m {
                s += vv[sg] * dl[sg][mu][nu] - lv[sg][nu] * dv[sg][mu] - lv[mu][sg] * dv[sg][nu];
            }
            out[mu][nu] = s;
        }
    }
    Ok(out)
}

fn max_abs_table(t: &[Vec<f64>]) -> f64 {
    t.iter().map(|r| max_abs(r)).fold(0.0, f64::max)
}

/// A Jacobi pair `(Lambda, E)` on coordinates `x1..xm` (or custom names).
#[derive(Clone, Debug)]
pub struct JacobiChart {
    coords: Vec<String>,
    lambda: Bivector,
    e: Vec<Expr>,
}

/// Residuals `([L,L] - 2 E^L, L_E L)` at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiResiduals {
    pub schouten: TrivectorValues,
    pub lie: Vec<Vec<f64>>,
}

impl JacobiResiduals {
    pub fn max_abs(&self) -> f64 {
        self.schouten.max_abs().max(max_abs_table(&self.lie))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeafPointType {
    ContactPoint,
    LcsPoint,
}

impl JacobiChart {
    pub fn new(coords: Vec<String>, lambda: Bivector, e: Vec<Expr>) -> Result<JacobiChart, JacobiError> {
        let m = coords.len();
        if lambda.len() != m || lambda.iter().any(|r| r.len() != m) {
            return Err(JacobiError::Dimension { expected: m, got: lambda.len() });
        }
        if e.len() != m {
            return Err(JacobiError::Dimension { expected: m, got: e.len() });
        }
        // re-derive the lower triangle so antisymmetry holds structurally
        let mut entries = Vec::new();
        for (a, row) in lambda.iter().enumerate() {
            for (b, v) in row.iter().enumerate().skip(a + 1) {
                entries.push((a, b, v.clone()));
            }
        }
        let lambda = bivector_from_entries(m, &entries);
        Ok(JacobiChart { coords, lambda, e })
    }

    /// Chart on `x1..xm` from upper/lower entries of Lambda and the vector E.
    pub fn from_entries(m: usize, entries: &[(usize, usize, Expr)], e: Vec<Expr>) -> Result<JacobiChart, JacobiError> {
        JacobiChart::new(coordinate_names("x", m), bivector_from_entries(m, entries), e)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn lambda(&self) -> &Bivector {
        &self.lambda
    }

    pub fn reeb(&self) -> &[Expr] {
        &self.e
    }

    /// Copy with Lambda^{mu nu} (and the transposed entry) replaced.
    pub fn with_lambda_entry(&self, mu: usize, nu: usize, v: Expr) -> JacobiChart {
        let mut l = self.lambda.clone();
        l[mu][nu] = v.clone();
        l[nu][mu] = -v;
        JacobiChart { coords: self.coords.clone(), lambda: l, e: self.e.clone() }
    }

    /// Copy with E^mu replaced.
    pub fn with_reeb_entry(&self, mu: usize, v: Expr) -> JacobiChart {
        let mut e = self.e.clone();
        e[mu] = v;
        JacobiChart { coords: self.coords.clone(), lambda: self.lambda.clone(), e }
    }

    fn check_point(&self, x: &[f64]) -> Result<(), JacobiError> {
        if x.len() != self.dim() {
            return Err(JacobiError::Dimension { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    /// `E ^ Lambda` at `x`: `E^i L^{jk} + E^j L^{ki} + E^k L^{ij}`.
    fn wedge_e_lambda(&self, x: &[f64]) -> Result<TrivectorValues, JacobiError> {
        let m = self.dim();
        let l = eval_table(&self.coords, &self.lambda, x)?;
        let e = eval_vec(&self.coords, &self.e, x)?;
        let mut comps = vec![0.0; m * m * m];
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    comps[(i * m + j) * m + k] = e[i] * l[j][k] + e[j] * l[k][i] + e[k] * l[i][j];
                }
            }
        }
        Ok(TrivectorValues { dim: m, comps })
    }

    /// `([L,L] - 2 E ^ L, L_E L)` at `x`.
    pub fn jacobi_residuals(&self, x: &[f64]) -> Result<JacobiResiduals, JacobiError> {
        self.check_point(x)?;
        let mut s = schouten_bivector(&self.coords, &self.lambda, &self.lambda, x)?;
        let w = self.wedge_e_lambda(x)?;
        for (a, b) in s.comps.iter_mut().zip(&w.comps) {
            *a -= 2.0 * b;
        }
        let lie = lie_derivative_bivector(&self.coords, &self.lambda, &self.e, x)?;
        Ok(JacobiResiduals { schouten: s, lie })
    }

    /// Largest residual over a sample set.
    pub fn max_residual(&self, points: &[Vec<f64>]) -> Result<f64, JacobiError> {
        let mut m: f64 = 0.0;
        for p in points {
            m = m.max(self.jacobi_residuals(p)?.max_abs());
        }
        Ok(m)
    }

    /// `Lambda(df, dg)` as an expression.
    pub fn lambda_pair(&self, f: &Expr, g: &Expr) -> Expr {
        let df: Vec<Expr> = self.coords.iter().map(|c| f.diff(c)).collect();
        let dg: Vec<Expr> = self.coords.iter().map(|c| g.diff(c)).collect();
        let mut acc = Expr::zero();
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if !self.lambda[i][j].is_zero() {
                    acc = acc + &self.lambda[i][j] * &df[i] * &dg[j];
                }
            }
        }
        acc
    }

    fn along_e(&self, f: &Expr) -> Expr {
        self.coords.iter().zip(&self.e).map(|(c, ec)| ec * f.diff(c)).sum()
    }

    /// `{f, g}` as an expression.
    pub fn bracket_expr(&self, f: &Expr, g: &Expr) -> Expr {
        self.lambda_pair(f, g) + f * self.along_e(g) - g * self.along_e(f)
    }

    /// `{f, g}` at `x`.
    pub fn jacobi_bracket(&self, f: &Expr, g: &Expr, x: &[f64]) -> Result<f64, JacobiError> {
        self.check_point(x)?;
        Ok(self.bracket_expr(f, g).eval(&self.coords, x)?)
    }

    /// `#Lambda(du)`, components `Lambda^{mu nu} d_mu u`.
    pub fn sharp_exact(&self, u: &Expr) -> Vec<Expr> {
        let du: Vec<Expr> = self.coords.iter().map(|c| u.diff(c)).collect();
        (0..self.dim())
            .map(|nu| {
                (0..self.dim())
                    .filter(|&mu| !self.lambda[mu][nu].is_zero())
                    .map(|mu| &self.lambda[mu][nu] * &du[mu])
                    .sum()
            })
            .collect()
    }

    /// `X_u = u E + #Lambda(du)`.
    pub fn hamiltonian_vf(&self, u: &Expr) -> Vec<Expr> {
        self.sharp_exact(u).into_iter().zip(&self.e).map(|(s, e)| u * e + s).collect()
    }

    /// Conformal change `(u Lambda, u E + #Lambda(du))`; `u` must not vanish
    /// at any of `points`.
    pub fn conformal_twist(&self, u: &Expr, points: &[Vec<f64>]) -> Result<JacobiChart, JacobiError> {
        for (index, p) in points.iter().enumerate() {
            self.check_point(p)?;
            if u.eval(&self.coords, p)?.abs() <= 1e-300 {
                return Err(JacobiError::VanishingFactor { index });
            }
        }
        let lambda = self.lambda.iter().map(|r| r.iter().map(|e| u * e).collect()).collect();
        Ok(JacobiChart { coords: self.coords.clone(), lambda, e: self.hamiltonian_vf(u) })
    }

    pub fn lambda_at(&self, x: &[f64]) -> Result<DMatrix<f64>, JacobiError> {
        self.check_point(x)?;
        let m = self.dim();
        let t = eval_table(&self.coords, &self.lambda, x)?;
        Ok(DMatrix::from_fn(m, m, |i, j| t[i][j]))
    }

    pub fn reeb_at(&self, x: &[f64]) -> Result<DVector<f64>, JacobiError> {
        self.check_point(x)?;
        Ok(DVector::from_vec(eval_vec(&self.coords, &self.e, x)?))
    }

    /// `lcs-point` iff `E(x)` lies in the image of `#Lambda(x)`, decided by a
    /// least-squares residual below `1e-8`.
    pub fn leaf_point_type(&self, x: &[f64]) -> Result<LeafPointType, JacobiError> {
        let l = self.lambda_at(x)?;
        let e = self.reeb_at(x)?;
        if max_abs(e.as_slice()) == 0.0 {
            return Ok(LeafPointType::LcsPoint);
        }
        // image of #Lambda is the column space of Lambda^T = -Lambda
        let svd = l.clone().svd(true, true);
        let y = svd.solve(&e, 1e-10).map_err(|_| JacobiError::Degenerate { index: 0 })?;
        let r = (&l * y - &e).norm();
        Ok(if r <= 1e-8 { LeafPointType::LcsPoint } else { LeafPointType::ContactPoint })
    }

    /// Lie algebroid `T*M + R` in the frame `{dx^1..dx^m, 1}`.
    pub fn jacobi_algebroid(&self) -> ChartedAlgebroid {
        let m = self.dim();
        let n = m + 1;
        let anchor: Vec<Vec<Expr>> = (0..m)
            .map(|mu| (0..n).map(|i| if i < m { self.lambda[i][mu].clone() } else { self.e[mu].clone() }).collect())
            .collect();
        let mut entries = Vec::new();
        for i in 0..m {
            for j in (i + 1)..m {
                for k in 0..m {
                    // [dx^i, dx^j]_Lambda - i_E(dx^i ^ dx^j)
                    let mut c = self.lambda[i][j].diff(&self.coords[k]);
                    if k == j {
                        c = c - &self.e[i];
                    }
                    if k == i {
                        c = c + &self.e[j];
                    }
                    if !c.is_zero() {
                        entries.push((i, j, k, c));
                    }
                }
                let r = -&self.lambda[i][j];
                if !r.is_zero() {
                    entries.push((i, j, m, r));
                }
            }
        }
        for j in 0..m {
            for k in 0..m {
                // [1, dx^j] = L_E dx^j = d E^j
                let c = self.e[j].diff(&self.coords[k]);
                if !c.is_zero() {
                    entries.push((m, j, k, c));
                }
            }
        }
        ChartedAlgebroid::new(self.coords.clone(), n, anchor, entries).expect("well-formed frame")
    }

    /// Homogeneous Poisson structure on `M x R` with coordinate `s` appended:
    /// `P^{mu nu} = e^{-s} Lambda^{mu nu}`, `P^{s nu} = e^{-s} E^nu`.
    pub fn poissonize(&self) -> PoissonChart {
        let m = self.dim();
        let mut coords = self.coords.clone();
        let s_name = fresh_name(&coords, "s");
        coords.push(s_name.clone());
        let w = (-Expr::var(&s_name)).exp();
        let mut entries = Vec::new();
        for mu in 0..m {
            for nu in (mu + 1)..m {
                if !self.lambda[mu][nu].is_zero() {
                    entries.push((mu, nu, &w * &self.lambda[mu][nu]));
                }
            }
            if !self.e[mu].is_zero() {
                entries.push((m, mu, &w * &self.e[mu]));
            }
        }
        let lambda = bivector_from_entries(m + 1, &entries);
        PoissonChart {
            chart: JacobiChart { coords, lambda, e: vec![Expr::zero(); m + 1] },
            homogeneity: Some(m),
        }
    }

    pub fn max_entry_at(&self, x: &[f64]) -> Result<f64, JacobiError> {
        let l = self.lambda_at(x)?;
        let e = self.reeb_at(x)?;
        Ok(max_abs(l.as_slice()).max(max_abs(e.as_slice())))
    }
}

fn fresh_name(coords: &[String], base: &str) -> String {
    let mut name = base.to_string();
    while coords.iter().any(|c| *c == name) {
        name.push('_');
    }
    name
}

/// Poisson chart, optionally homogeneous in a named coordinate.
#[derive(Clone, Debug)]
pub struct PoissonChart {
    pub chart: JacobiChart,
    /// index of the homogeneity coordinate `s`
    pub homogeneity: Option<usize>,
}

impl PoissonChart {
    /// `[P, P]` at `x`.
    pub fn schouten_residual(&self, x: &[f64]) -> Result<TrivectorValues, JacobiError> {
        schouten_bivector(&self.chart.coords, &self.chart.lambda, &self.chart.lambda, x)
    }

    /// `P + L_{d/ds} P` at `x`.
    pub fn homogeneity_residual(&self, x: &[f64]) -> Result<Vec<Vec<f64>>, JacobiError> {
        let s = self.homogeneity.ok_or(JacobiError::NoHomogeneity)?;
        let m = self.chart.dim();
        let z: Vec<Expr> = (0..m).map(|i| if i == s { Expr::one() } else { Expr::zero() }).collect();
        let mut r = lie_derivative_bivector(&self.chart.coords, &self.chart.lambda, &z, x)?;
        let p = eval_table(&self.chart.coords, &self.chart.lambda, x)?;
        for i in 0..m {
            for j in 0..m {
                r[i][j] += p[i][j];
            }
        }
        Ok(r)
    }

    /// Recovers `(Lambda, E)` on the slice `s = 0` after checking
    /// homogeneity at `points` (given in the full `M x R` coordinates).
    pub fn depoissonize(&self, points: &[Vec<f64>], tol: f64) -> Result<JacobiChart, JacobiError> {
        let s = self.homogeneity.ok_or(JacobiError::NoHomogeneity)?;
        let mut worst: f64 = 0.0;
        for p in points {
            worst = worst.max(max_abs_table(&self.homogeneity_residual(p)?));
        }
        if worst > tol {
            return Err(JacobiError::NotHomogeneous { residual: worst, tol });
        }
        let s_name = self.chart.coords[s].clone();
        let w = Expr::var(&s_name).exp();
        let mut at0 = HashMap::new();
        at0.insert(s_name, Expr::zero());
        let keep: Vec<usize> = (0..self.chart.dim()).filter(|&i| i != s).collect();
        let coords: Vec<String> = keep.iter().map(|&i| self.chart.coords[i].clone()).collect();
        let lambda: Bivector = keep
            .iter()
            .map(|&i| keep.iter().map(|&j| (&w * &self.chart.lambda[i][j]).substitute(&at0)).collect())
            .collect();
        let e: Vec<Expr> = keep.iter().map(|&j| (&w * &self.chart.lambda[s][j]).substitute(&at0)).collect();
        JacobiChart::new(coords, lambda, e)
    }
}

// ---------------------------------------------------------------------------
// contact and l.c.s. structures

/// Determinant and adjugate of a small symbolic matrix by memoised cofactor
/// expansion. Intended for dimensions up to about six.
pub fn symbolic_adjugate(a: &[Vec<Expr>]) -> (Expr, Vec<Vec<Expr>>) {
    let n = a.len();
    fn det(a: &[Vec<Expr>], rows: &[usize], cols: u32, memo: &mut HashMap<(usize, u32), Expr>, depth: usize) -> Expr {
        if depth == rows.len() {
            return Expr::one();
        }
        if let Some(e) = memo.get(&(depth, cols)) {
            return e.clone();
        }
        let r = rows[depth];
        let mut acc = Expr::zero();
        let mut sign = 1.0;
        for c in 0..32 {
            if cols & (1 << c) == 0 {
                continue;
            }
            if !a[r][c].is_zero() {
                let minor = det(a, rows, cols & !(1 << c), memo, depth + 1);
                let term = &a[r][c] * minor;
                acc = if sign > 0.0 { acc + term } else { acc - term };
            }
            sign = -sign;
        }
        memo.insert((depth, cols), acc.clone());
        acc
    }
    let full: u32 = if n == 0 { 0 } else { (1u32 << n) - 1 };
    let all_rows: Vec<usize> = (0..n).collect();
    let d = det(a, &all_rows, full, &mut HashMap::new(), 0);
    let mut adj = vec![vec![Expr::zero(); n]; n];
    for i in 0..n {
        let rows: Vec<usize> = (0..n).filter(|&r| r != i).collect();
        let mut memo = HashMap::new();
        for j in 0..n {
            let minor = det(a, &rows, full & !(1 << j), &mut memo, 0);
            // adj[j][i] = (-1)^{i+j} M_ij
            adj[j][i] = if (i + j) % 2 == 0 { minor } else { -minor };
        }
    }
    (d, adj)
}

/// A 1-form `theta` on an odd-dimensional chart.
#[derive(Clone, Debug)]
pub struct ContactChart {
    coords: Vec<String>,
    theta: Vec<Expr>,
}

impl ContactChart {
    pub fn new(coords: Vec<String>, theta: Vec<Expr>) -> Result<ContactChart, JacobiError> {
        if coords.len() % 2 == 0 {
            return Err(JacobiError::EvenDimension(coords.len()));
        }
        if theta.len() != coords.len() {
            return Err(JacobiError::Dimension { expected: coords.len(), got: theta.len() });
        }
        Ok(ContactChart { coords, theta })
    }

    /// `dz - y dx` on `R^3` with `(x, y, z) = (x1, x2, x3)`.
    pub fn standard_r3() -> ContactChart {
        ContactChart::new(coordinate_names("x", 3), vec![-Expr::var("x2"), Expr::zero(), Expr::one()]).expect("R^3")
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn theta(&self) -> &[Expr] {
        &self.theta
    }

    /// `W_ij = d_i theta_j - d_j theta_i`.
    pub fn dtheta(&self) -> Vec<Vec<Expr>> {
        dform(&self.coords, &self.theta)
    }

    /// The bordered matrix `[[W, theta], [-theta^T, 0]]`.
    fn bordered(&self) -> Vec<Vec<Expr>> {
        let m = self.coords.len();
        let w = self.dtheta();
        let mut b = vec![vec![Expr::zero(); m + 1]; m + 1];
        for i in 0..m {
            for j in 0..m {
                b[i][j] = w[i][j].clone();
            }
            b[i][m] = self.theta[i].clone();
            b[m][i] = -&self.theta[i];
        }
        b
    }

    /// Coefficient of `theta ^ (dtheta)^n` relative to the coordinate volume,
    /// computed through the bordered determinant (which is its square up to a
    /// positive factor).
    pub fn bordered_det_at(&self, x: &[f64]) -> Result<f64, JacobiError> {
        let (_, _, det) = contact_structure_at(&self.coords, &self.theta, x)?;
        Ok(det)
    }

    /// Jacobi structure of the contact form via the inverse of the bordered
    /// matrix. Each sample point must satisfy the contact condition.
    pub fn to_jacobi(&self, points: &[Vec<f64>]) -> Result<JacobiChart, JacobiError> {
        for (index, p) in points.iter().enumerate() {
            let d = self.bordered_det_at(p)?;
            if d.abs() <= 1e-12 {
                return Err(JacobiError::NotContact { index, det: d });
            }
        }
        let m = self.coords.len();
        let (d, adj) = symbolic_adjugate(&self.bordered());
        let lambda: Bivector = (0..m).map(|i| (0..m).map(|j| -(&adj[i][j] / &d)).collect()).collect();
        let e: Vec<Expr> = (0..m).map(|i| -(&adj[i][m] / &d)).collect();
        JacobiChart::new(self.coords.clone(), lambda, e)
    }

    /// `(max |i(theta) Lambda|, max |i(E) theta - 1|, max |i(E) dtheta|)` at `x`.
    pub fn defining_residuals(&self, j: &JacobiChart, x: &[f64]) -> Result<(f64, f64, f64), JacobiError> {
        let m = self.coords.len();
        let th = eval_vec(&self.coords, &self.theta, x)?;
        let w = eval_table(&self.coords, &self.dtheta(), x)?;
        let l = j.lambda_at(x)?;
        let e = j.reeb_at(x)?;
        let mut r1: f64 = 0.0;
        for nu in 0..m {
            r1 = r1.max((0..m).map(|mu| th[mu] * l[(mu, nu)]).sum::<f64>().abs());
        }
        let r2 = ((0..m).map(|mu| th[mu] * e[mu]).sum::<f64>() - 1.0).abs();
        let mut r3: f64 = 0.0;
        for nu in 0..m {
            r3 = r3.max((0..m).map(|mu| e[mu] * w[mu][nu]).sum::<f64>().abs());
        }
        Ok((r1, r2, r3))
    }

    pub fn from_json(text: &str) -> Result<ContactChart, JacobiError> {
        #[derive(Deserialize)]
        struct CJ {
            dim: usize,
            theta: Vec<String>,
        }
        let cj: CJ = serde_json::from_str(text).map_err(|e| JacobiError::Json(e.to_string()))?;
        let theta = cj.theta.iter().map(|s| expr::parse(s)).collect::<Result<Vec<_>, _>>()?;
        ContactChart::new(coordinate_names("x", cj.dim), theta)
    }
}

/// Exterior derivative of a 1-form as the antisymmetric table `d_i a_j - d_j a_i`.
pub fn dform(coords: &[String], a: &[Expr]) -> Vec<Vec<Expr>> {
    let m = coords.len();
    (0..m)
        .map(|i| (0..m).map(|j| a[j].diff(&coords[i]) - a[i].diff(&coords[j])).collect())
        .collect()
}

/// Pointwise `(Lambda, E, det)` of a contact form from the bordered system.
/// Works in any dimension; `det` is the bordered determinant.
pub fn contact_structure_at(
    coords: &[String],
    theta: &[Expr],
    x: &[f64],
) -> Result<(DMatrix<f64>, DVector<f64>, f64), JacobiError> {
    let m = coords.len();
    if x.len() != m || theta.len() != m {
        return Err(JacobiError::Dimension { expected: m, got: x.len() });
    }
    let th = eval_vec(coords, theta, x)?;
    let mut b = DMatrix::zeros(m + 1, m + 1);
    for i in 0..m {
        for j in 0..m {
            if i != j {
                b[(i, j)] = theta[j].diff(&coords[i]).eval(coords, x)? - theta[i].diff(&coords[j]).eval(coords, x)?;
            }
        }
        b[(i, m)] = th[i];
        b[(m, i)] = -th[i];
    }
    contact_structure_from_bordered(b)
}

/// Same as [`contact_structure_at`] from numeric `theta` and `dtheta` values.
pub fn contact_structure_from_values(theta: &[f64], dtheta: &DMatrix<f64>) -> Result<(DMatrix<f64>, DVector<f64>, f64), JacobiError> {
    let m = theta.len();
    let mut b = DMatrix::zeros(m + 1, m + 1);
    for i in 0..m {
        for j in 0..m {
            b[(i, j)] = dtheta[(i, j)];
        }
        b[(i, m)] = theta[i];
        b[(m, i)] = -theta[i];
    }
    contact_structure_from_bordered(b)
}

fn contact_structure_from_bordered(b: DMatrix<f64>) -> Result<(DMatrix<f64>, DVector<f64>, f64), JacobiError> {
    let m = b.nrows() - 1;
    let lu = b.lu();
    let det = lu.determinant();
    let inv = lu.try_inverse().ok_or(JacobiError::NotContact { index: 0, det })?;
    let lambda = DMatrix::from_fn(m, m, |i, j| -inv[(i, j)]);
    let e = DVector::from_fn(m, |i, _| -inv[(i, m)]);
    Ok((lambda, e, det))
}

/// Jacobi structure of a locally conformal symplectic pair `(Omega, omega)`:
/// `Lambda = -Omega^{-1}` and `E` with `omega = Omega(E, .)`.
///
/// `omega_form` is the antisymmetric table of `Omega = sum_{i<j} W_ij dx^i ^ dx^j`.
pub fn lcs_to_jacobi(
    coords: &[String],
    omega_form: &[Vec<Expr>],
    omega: &[Expr],
    points: &[Vec<f64>],
    tol: f64,
) -> Result<JacobiChart, JacobiError> {
    let m = coords.len();
    if omega_form.len() != m || omega.len() != m {
        return Err(JacobiError::Dimension { expected: m, got: omega.len() });
    }
    let big = bivector_from_entries(
        m,
        &(0..m)
            .flat_map(|i| ((i + 1)..m).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, omega_form[i][j].clone()))
            .collect::<Vec<_>>(),
    );
    let dw = dform(coords, omega);
    for (index, p) in points.iter().enumerate() {
        let t = eval_table(coords, &big, p)?;
        let mat = DMatrix::from_fn(m, m, |i, j| t[i][j]);
        if mat.clone().lu().determinant().abs() <= 1e-12 {
            return Err(JacobiError::Degenerate { index });
        }
        let w = eval_vec(coords, omega, p)?;
        let mut worst: f64 = max_abs_table(&eval_table(coords, &dw, p)?);
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let d_big = big[j][k].diff(&coords[i]).eval(coords, p)?
                        + big[k][i].diff(&coords[j]).eval(coords, p)?
                        + big[i][j].diff(&coords[k]).eval(coords, p)?;
                    let wedge = w[i] * t[j][k] + w[j] * t[k][i] + w[k] * t[i][j];
                    worst = worst.max((d_big - wedge).abs());
                }
            }
        }
        if worst > tol {
            return Err(JacobiError::NotLcs { residual: worst });
        }
    }
    let (d, adj) = symbolic_adjugate(&big);
    let lambda: Bivector = (0..m).map(|i| (0..m).map(|j| -(&adj[i][j] / &d)).collect()).collect();
    let e: Vec<Expr> = (0..m)
        .map(|mu| (0..m).filter(|&nu| !omega[nu].is_zero()).map(|nu| &lambda[mu][nu] * &omega[nu]).sum())
        .collect();
    JacobiChart::new(coords.to_vec(), lambda, e)
}

// ---------------------------------------------------------------------------
// fixtures and json

/// `{x2,x3} = a x1` and cyclic, with `a` an expression in `r`, the Euclidean
/// norm on `R^3`.
pub fn sphere_family_chart(a_of_r: &Expr) -> JacobiChart {
    let r = (Expr::var("x1").powi(2) + Expr::var("x2").powi(2) + Expr::var("x3").powi(2)).sqrt();
    let mut map = HashMap::new();
    map.insert("r".to_string(), r);
    let a = a_of_r.substitute(&map);
    let x = |i: usize| Expr::var(&format!("x{}", i));
    JacobiChart::from_entries(
        3,
        &[(1, 2, &a * x(1)), (2, 0, &a * x(2)), (0, 1, &a * x(3))],
        vec![Expr::zero(); 3],
    )
    .expect("sphere family")
}

#[derive(Serialize, Deserialize)]
struct LambdaEntryJson {
    mu: usize,
    nu: usize,
    expr: String,
}

#[derive(Serialize, Deserialize)]
struct JacobiJson {
    dim: usize,
    #[serde(default)]
    lambda: Vec<LambdaEntryJson>,
    #[serde(default)]
    e: Vec<String>,
}

impl JacobiChart {
    /// Parses `{"dim", "lambda": [{"mu","nu","expr"}], "e": [...]}` with
    /// 1-based indices. An empty `e` means `E = 0`.
    pub fn from_json(text: &str) -> Result<JacobiChart, JacobiError> {
        let j: JacobiJson = serde_json::from_str(text).map_err(|e| JacobiError::Json(e.to_string()))?;
        let mut entries = Vec::new();
        for le in &j.lambda {
            if le.mu == 0 || le.nu == 0 || le.mu > j.dim || le.nu > j.dim || le.mu == le.nu {
                return Err(JacobiError::Json(format!("bad lambda index ({}, {})", le.mu, le.nu)));
            }
            entries.push((le.mu - 1, le.nu - 1, expr::parse(&le.expr)?));
        }
        let e = if j.e.is_empty() {
            vec![Expr::zero(); j.dim]
        } else {
            j.e.iter().map(|s| expr::parse(s)).collect::<Result<Vec<_>, _>>()?
        };
        JacobiChart::from_entries(j.dim, &entries, e)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut lambda = Vec::new();
        for mu in 0..self.dim() {
            for nu in (mu + 1)..self.dim() {
                if !self.lambda[mu][nu].is_zero() {
                    lambda.push(LambdaEntryJson { mu: mu + 1, nu: nu + 1, expr: self.lambda[mu][nu].to_string() });
                }
            }
        }
        serde_json::to_value(JacobiJson {
            dim: self.dim(),
            lambda,
            e: self.e.iter().map(|e| e.to_string()).collect(),
        })
        .expect("serialisable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebroid::check_axioms;
    use crate::sample::{halton, SampleBox};

    fn p(s: &str) -> Expr {
        expr::parse(s).unwrap()
    }

    fn shell_points(n: usize) -> Vec<Vec<f64>> {
        halton(&SampleBox::cube(3, 0.2, 1.5), n)
    }

    fn ma() -> JacobiChart {
        sphere_family_chart(&p("1/(sin(r) + 2)"))
    }

    #[test]
    fn constant_bivector_schouten_vanishes() {
        let c = coordinate_names("x", 4);
        let l = bivector_from_entries(4, &[(0, 1, p("1")), (2, 3, p("2")), (0, 3, p("-0.5"))]);
        let s = schouten_bivector(&c, &l, &l, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(s.max_abs(), 0.0);
    }

    #[test]
    fn sphere_family_is_poisson() {
        let j = ma();
        for x in shell_points(50) {
            assert!(j.jacobi_residuals(&x).unwrap().max_abs() <= 1e-9);
        }
    }

    #[test]
    fn forced_reeb_breaks_sphere_family() {
        // a Reeb field that does not preserve Lambda
        let j = ma().with_reeb_entry(0, p("1"));
        let r = j.jacobi_residuals(&[0.4, 0.5, 0.6]).unwrap();
        assert!(r.max_abs() > 1e-3);
    }

    #[test]
    fn lie_derivative_trivial_cases() {
        let j = ma();
        let zero = vec![Expr::zero(); 3];
        let r = lie_derivative_bivector(j.coords(), j.lambda(), &zero, &[0.3, 0.2, 0.1]).unwrap();
        assert_eq!(max_abs_table(&r), 0.0);
        let l = bivector_from_entries(3, &[(0, 1, p("3"))]);
        let v = vec![p("1"), p("2"), p("0")];
        let r = lie_derivative_bivector(j.coords(), &l, &v, &[0.3, 0.2, 0.1]).unwrap();
        assert_eq!(max_abs_table(&r), 0.0);
    }

    #[test]
    fn contact_r3_structure() {
        let c = ContactChart::standard_r3();
        let pts = halton(&SampleBox::cube(3, -2.0, 2.0), 50);
        let j = c.to_jacobi(&pts).unwrap();
        for x in &pts {
            let e = j.reeb_at(x).unwrap();
            assert!((e[0]).abs() + e[1].abs() + (e[2] - 1.0).abs() <= 1e-12);
            let l = j.lambda_at(x).unwrap();
            // Lambda = d_x ^ d_y - y d_y ^ d_z
            assert!((l[(0, 1)] - 1.0).abs() <= 1e-12);
            assert!((l[(1, 2)] + x[1]).abs() <= 1e-12);
            assert!(l[(0, 2)].abs() <= 1e-12);
            assert!(j.jacobi_residuals(x).unwrap().max_abs() <= 1e-9);
            let (r1, r2, r3) = c.defining_residuals(&j, x).unwrap();
            assert!(r1 <= 1e-10 && r2 <= 1e-10 && r3 <= 1e-12);
            assert_eq!(j.leaf_point_type(x).unwrap(), LeafPointType::ContactPoint);
        }
    }

    #[test]
    fn numeric_contact_structure_agrees() {
        let c = ContactChart::standard_r3();
        let j = c.to_jacobi(&[]).unwrap();
        let x = [0.3, -0.8, 1.1];
        let (l, e, _) = contact_structure_at(c.coords(), c.theta(), &x).unwrap();
        assert!((l - j.lambda_at(&x).unwrap()).amax() <= 1e-14);
        assert!((e - j.reeb_at(&x).unwrap()).amax() <= 1e-14);
    }

    #[test]
    fn non_contact_form_is_rejected() {
        let c = ContactChart::new(coordinate_names("x", 3), vec![p("0"), p("0"), p("1")]).unwrap();
        assert!(matches!(c.to_jacobi(&[vec![0.1, 0.2, 0.3]]), Err(JacobiError::NotContact { .. })));
        assert!(ContactChart::new(coordinate_names("x", 2), vec![p("1"), p("0")]).is_err());
    }

    #[test]
    fn leaf_types_trivial_cases() {
        assert_eq!(ma().leaf_point_type(&[0.3, 0.4, 0.5]).unwrap(), LeafPointType::LcsPoint);
        let j = JacobiChart::from_entries(2, &[], vec![p("1"), p("0")]).unwrap();
        assert_eq!(j.leaf_point_type(&[0.1, 0.2]).unwrap(), LeafPointType::ContactPoint);
    }

    #[test]
    fn jacobi_bracket_identities() {
        let j = ContactChart::standard_r3().to_jacobi(&[]).unwrap();
        let (f1, f2, g) = (p("sin(x1) + x3"), p("x2*x3 + 1"), p("exp(x1*x2) - x3^2"));
        let one = Expr::one();
        for x in shell_points(30) {
            assert_eq!(j.jacobi_bracket(&f1, &f1, &x).unwrap().abs(), 0.0);
            let lhs = j.jacobi_bracket(&(&f1 * &f2), &g, &x).unwrap()
                - f1.eval(j.coords(), &x).unwrap() * j.jacobi_bracket(&f2, &g, &x).unwrap()
                - f2.eval(j.coords(), &x).unwrap() * j.jacobi_bracket(&f1, &g, &x).unwrap()
                + (&f1 * &f2).eval(j.coords(), &x).unwrap() * j.jacobi_bracket(&one, &g, &x).unwrap();
            assert!(lhs.abs() <= 1e-10, "{}", lhs);
        }
    }

    #[test]
    fn conformal_change_identities() {
        let j = ContactChart::standard_r3().to_jacobi(&[]).unwrap();
        let u = p("exp(x1) + 0.5*x2^2");
        let pts = shell_points(50);
        let ju = j.conformal_twist(&u, &pts).unwrap();
        let (f, g) = (p("x1*x2 + sin(x3)"), p("cos(x1) - x3^2"));
        for x in &pts {
            let uu = u.eval(j.coords(), x).unwrap();
            let a = ju.jacobi_bracket(&f, &g, x).unwrap();
            let b = j.jacobi_bracket(&(&u * &f), &(&u * &g), x).unwrap() / uu;
            assert!((a - b).abs() <= 1e-10);
            let xa = ju.hamiltonian_vf(&f);
            let xb = j.hamiltonian_vf(&(&u * &f));
            for k in 0..3 {
                let d = xa[k].eval(j.coords(), x).unwrap() - xb[k].eval(j.coords(), x).unwrap();
                assert!(d.abs() <= 1e-10);
            }
            assert!(ju.jacobi_residuals(x).unwrap().max_abs() <= 1e-8);
            assert_eq!(ju.leaf_point_type(x).unwrap(), j.leaf_point_type(x).unwrap());
        }
        // twisting back by 1/u recovers the original structure
        let back = ju.conformal_twist(&(Expr::one() / &u), &pts).unwrap();
        for x in &pts {
            assert!((back.lambda_at(x).unwrap() - j.lambda_at(x).unwrap()).amax() <= 1e-12);
            assert!((back.reeb_at(x).unwrap() - j.reeb_at(x).unwrap()).amax() <= 1e-12);
        }
        assert!(matches!(
            j.conformal_twist(&p("x1"), &[vec![0.0, 1.0, 1.0]]),
            Err(JacobiError::VanishingFactor { index: 0 })
        ));
        let hv = j.hamiltonian_vf(&Expr::one());
        assert_eq!(hv, j.reeb().to_vec());
        assert!(j.hamiltonian_vf(&Expr::zero()).iter().all(|e| e.is_zero()));
    }

    #[test]
    fn twisted_sphere_family_stays_jacobi() {
        let j = ma().conformal_twist(&p("exp(x1)"), &[]).unwrap();
        for x in shell_points(30) {
            assert!(j.jacobi_residuals(&x).unwrap().max_abs() <= 1e-8);
        }
    }

    #[test]
    fn jacobi_algebroid_of_sphere_family() {
        let j = ma();
        let a = j.jacobi_algebroid();
        // rho(dx^2) = a v^2 with v^2 = x1 d3 - x3 d1, which is a d3 at (1,0,0)
        let x = [1.0, 0.0, 0.0];
        let v = a.anchor_apply(&x, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let a1 = 1.0 / (1f64.sin() + 2.0);
        assert!(v[0].abs() < 1e-15 && v[1].abs() < 1e-15 && (v[2] - a1).abs() < 1e-15);
        let rep = check_axioms(&a, &shell_points(50), 4, 3).unwrap();
        assert!(rep.max() <= 1e-8, "{:?}", rep);
        // [(dx^i,0),(dx^j,0)] has R-component -Lambda^{ij}; [(0,1),(dx^i,0)] = 0 when E = 0
        let y = [0.3, 0.5, 0.7];
        let c = a.structure_at(&y).unwrap();
        let n = 4;
        let l = j.lambda_at(&y).unwrap();
        assert!((c[(0 * n + 1) * n + 3] + l[(0, 1)]).abs() < 1e-15);
        for i in 0..3 {
            for k in 0..4 {
                assert_eq!(c[(3 * n + i) * n + k], 0.0);
            }
        }
    }

    #[test]
    fn jacobi_algebroid_of_contact_r3() {
        let j = ContactChart::standard_r3().to_jacobi(&[]).unwrap();
        let a = j.jacobi_algebroid();
        let rep = check_axioms(&a, &halton(&SampleBox::cube(3, -1.0, 1.0), 40), 4, 5).unwrap();
        assert!(rep.max() <= 1e-8, "{:?}", rep);
    }

    #[test]
    fn poissonize_round_trip_and_homogeneity() {
        let j = ContactChart::standard_r3().to_jacobi(&[]).unwrap();
        let pz = j.poissonize();
        let pts4 = halton(&SampleBox::cube(4, -1.0, 1.0), 50);
        for x in &pts4 {
            assert!(pz.schouten_residual(x).unwrap().max_abs() <= 1e-10);
            assert!(max_abs_table(&pz.homogeneity_residual(x).unwrap()) <= 1e-12);
        }
        let back = pz.depoissonize(&pts4, 1e-10).unwrap();
        for x in halton(&SampleBox::cube(3, -1.0, 1.0), 50) {
            assert!((back.lambda_at(&x).unwrap() - j.lambda_at(&x).unwrap()).amax() <= 1e-12);
            assert!((back.reeb_at(&x).unwrap() - j.reeb_at(&x).unwrap()).amax() <= 1e-12);
        }
        let zero = JacobiChart::from_entries(2, &[], vec![Expr::zero(); 2]).unwrap().poissonize();
        assert!(zero.chart.lambda().iter().flatten().all(|e| e.is_zero()));
        // a non-homogeneous Poisson chart is refused
        let bad = PoissonChart {
            chart: JacobiChart::from_entries(2, &[(0, 1, p("1"))], vec![Expr::zero(); 2]).unwrap(),
            homogeneity: Some(1),
        };
        assert!(matches!(bad.depoissonize(&[vec![0.1, 0.2]], 1e-10), Err(JacobiError::NotHomogeneous { .. })));
    }

    #[test]
    fn symplectic_plane_inverse() {
        let c = coordinate_names("x", 2);
        let w = bivector_from_entries(2, &[(0, 1, p("1"))]);
        let j = lcs_to_jacobi(&c, &w, &[Expr::zero(), Expr::zero()], &[vec![0.0, 0.0]], 1e-10).unwrap();
        let l = j.lambda_at(&[0.3, 0.4]).unwrap();
        assert_eq!(l[(0, 1)], 1.0);
        assert!(j.reeb().iter().all(|e| e.is_zero()));
        let degen = bivector_from_entries(2, &[(0, 1, p("x1"))]);
        assert!(matches!(
            lcs_to_jacobi(&c, &degen, &[Expr::zero(), Expr::zero()], &[vec![0.0, 0.5]], 1e-10),
            Err(JacobiError::Degenerate { .. })
        ));
    }

    #[test]
    fn lcs_examples_are_jacobi() {
        let c = coordinate_names("x", 2);
        let w = bivector_from_entries(2, &[(0, 1, p("exp(x1)"))]);
        let pts = halton(&SampleBox::cube(2, -1.0, 1.0), 50);
        let j = lcs_to_jacobi(&c, &w, &[p("1"), p("0")], &pts, 1e-10).unwrap();
        for x in &pts {
            assert!(j.jacobi_residuals(x).unwrap().max_abs() <= 1e-9);
        }
        // four dimensions: Omega = e^F (dx1^dx2 + dx3^dx4), omega = dF
        let c4 = coordinate_names("x", 4);
        let f = p("x1*x3 + sin(x2)");
        let ef = f.exp();
        let w4 = bivector_from_entries(4, &[(0, 1, ef.clone()), (2, 3, ef)]);
        let om: Vec<Expr> = c4.iter().map(|v| f.diff(v)).collect();
        let pts4 = halton(&SampleBox::cube(4, -1.0, 1.0), 30);
        let j4 = lcs_to_jacobi(&c4, &w4, &om, &pts4, 1e-10).unwrap();
        for x in &pts4 {
            assert!(j4.jacobi_residuals(x).unwrap().max_abs() <= 1e-9);
            // omega = Omega(E, .)
            let e = j4.reeb_at(x).unwrap();
            for nu in 0..4 {
                let lhs = om[nu].eval(&c4, x).unwrap();
                let rhs: f64 = (0..4).map(|mu| e[mu] * w4[mu][nu].eval(&c4, x).unwrap()).sum();
                assert!((lhs - rhs).abs() <= 1e-10);
            }
        }
        // a non-closed pairing is refused
        let bad = lcs_to_jacobi(&c4, &w4, &[p("x2"), p("0"), p("0"), p("0")], &pts4, 1e-10);
        assert!(matches!(bad, Err(JacobiError::NotLcs { .. })));
    }

    #[test]
    fn json_round_trip() {
        let j = ma();
        let back = JacobiChart::from_json(&j.to_json().to_string()).unwrap();
        let x = [0.3, 0.2, 0.9];
        assert_eq!(back.lambda_at(&x).unwrap(), j.lambda_at(&x).unwrap());
        let c = ContactChart::from_json(r#"{"dim":3,"theta":["-x2","0","1"]}"#).unwrap();
        assert_eq!(c.theta().len(), 3);
        assert!(JacobiChart::from_json(r#"{"dim":2,"lambda":[{"mu":1,"nu":1,"expr":"1"}]}"#).is_err());
    }
}

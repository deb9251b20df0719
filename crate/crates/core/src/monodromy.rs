//! Monodromy of the sphere family `M_a`, the distance function `r_N`, and
//! integrability and prequantization verdicts built from period generators.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Compiled, EvalError, Expr, ParseError};
use crate::jacobi::sphere_family_chart;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonodromyError {
    #[error("a(r) = {value} is not positive at r = {r}")]
    NonPositive { r: f64, value: f64 },
    #[error("radius must be positive, got {0}")]
    Radius(f64),
    #[error("invalid scan grid: {0}")]
    Grid(String),
    #[error("a may only depend on r, found {0}")]
    ForeignVariable(String),
    #[error("negative period generator {0}")]
    NegativeGenerator(f64),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Default threshold for "bounded away from zero".
pub const DEFAULT_THRESHOLD: f64 = 1e-6;

/// `{x2, x3} = a(r) x1` and cyclic permutations on `R^3`.
#[derive(Clone, Debug)]
pub struct SphereFamily {
    a: Expr,
    area: Expr,
    darea: Expr,
    a_c: Compiled,
    area_c: Compiled,
    darea_c: Compiled,
}

impl SphereFamily {
    pub fn new(a: Expr) -> Result<SphereFamily, MonodromyError> {
        if let Some(v) = a.variables().into_iter().find(|v| v != "r") {
            return Err(MonodromyError::ForeignVariable(v));
        }
        let names = ["r".to_string()];
        let area = Expr::num(4.0 * PI) * Expr::var("r") / &a;
        let darea = area.diff("r");
        Ok(SphereFamily {
            a_c: a.compile(&names)?,
            area_c: area.compile(&names)?,
            darea_c: darea.compile(&names)?,
            a,
            area,
            darea,
        })
    }

    pub fn parse(text: &str) -> Result<SphereFamily, MonodromyError> {
        SphereFamily::new(crate::parse(text)?)
    }

    /// `a(r) = 1 / (sin r + 2)`.
    pub fn default_family() -> SphereFamily {
        SphereFamily::parse("1/(sin(r) + 2)").expect("default family")
    }

    pub fn a(&self) -> &Expr {
        &self.a
    }

    /// Symbolic `A(r) = 4 pi r / a(r)`.
    pub fn area_expr(&self) -> &Expr {
        &self.area
    }

    /// Symbolic `A'(r)`.
    pub fn area_derivative_expr(&self) -> &Expr {
        &self.darea
    }

    fn a_at(&self, r: f64) -> Result<f64, MonodromyError> {
        let v = self.a_c.eval(&[r])?;
        if v <= 0.0 {
            return Err(MonodromyError::NonPositive { r, value: v });
        }
        Ok(v)
    }

    /// Closed-form area of the leaf `S_r`.
    pub fn area(&self, r: f64) -> Result<f64, MonodromyError> {
        if r <= 0.0 {
            return Err(MonodromyError::Radius(r));
        }
        self.a_at(r)?;
        Ok(self.area_c.eval(&[r])?)
    }

    pub fn area_derivative(&self, r: f64) -> Result<f64, MonodromyError> {
        if r <= 0.0 {
            return Err(MonodromyError::Radius(r));
        }
        self.a_at(r)?;
        Ok(self.darea_c.eval(&[r])?)
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * p - pm) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Quadrature of the leaf symplectic form over `S_r`, taken from `Lambda`
/// itself: at each node the form evaluated on the coordinate tangent frame
/// is `1 / Lambda(alpha, beta)` with `(alpha, beta)` the dual coframe.
pub fn leaf_area_quadrature(fam: &SphereFamily, r: f64, n_theta: usize, n_phi: usize) -> Result<f64, MonodromyError> {
    if r <= 0.0 {
        return Err(MonodromyError::Radius(r));
    }
    fam.a_at(r)?;
    let chart = sphere_family_chart(&fam.a);
    let names = chart.coords().to_vec();
    let lam: Vec<Vec<Compiled>> = chart
        .lambda()
        .iter()
        .map(|row| row.iter().map(|e| e.compile(&names)).collect::<Result<_, _>>())
        .collect::<Result<_, _>>()?;
    let (gx, gw) = gauss_legendre(n_theta);
    let mut total = 0.0;
    for (xi, wi) in gx.iter().zip(&gw) {
        let th = 0.5 * PI * (xi + 1.0);
        let (st, ct) = th.sin_cos();
        for k in 0..n_phi {
            let ph = 2.0 * PI * k as f64 / n_phi as f64;
            let (sp, cp) = ph.sin_cos();
            let x = [r * st * cp, r * st * sp, r * ct];
            let u = nalgebra::Vector3::new(r * ct * cp, r * ct * sp, -r * st);
            let v = nalgebra::Vector3::new(-r * st * sp, r * st * cp, 0.0);
            // rows of the pseudo-inverse of [u v] are the dual coframe
            let frame = nalgebra::Matrix3x2::from_columns(&[u, v]);
            let dual = (frame.transpose() * frame)
                .try_inverse()
                .map(|g| g * frame.transpose());
            let Some(dual) = dual else { continue };
            let mut lv = nalgebra::Matrix3::zeros();
            for i in 0..3 {
                for j in 0..3 {
                    lv[(i, j)] = lam[i][j].eval(&x)?;
                }
            }
            let lambda = (dual.row(0) * lv * dual.row(1).transpose())[(0, 0)];
            total += wi * (0.5 * PI) * (2.0 * PI / n_phi as f64) / lambda.abs();
        }
    }
    Ok(total)
}

/// Area by closed form and by quadrature, with their relative gap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AreaCheck {
    pub closed_form: f64,
    pub quadrature: f64,
    pub relative_gap: f64,
}

pub fn symplectic_area(fam: &SphereFamily, r: f64) -> Result<AreaCheck, MonodromyError> {
    let closed_form = fam.area(r)?;
    let quadrature = leaf_area_quadrature(fam, r, 64, 128)?;
    Ok(AreaCheck { closed_form, quadrature, relative_gap: (quadrature - closed_form).abs() / closed_form.abs() })
}

/// Generator of the Poisson monodromy group at `S_r` and the pair generating
/// the Jacobi one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generators {
    pub poisson: f64,
    pub jacobi: (f64, f64),
}

/// `A'(r)` and `(A'(r), A(r))`; `r = 0` is the degenerate leaf, reported as
/// infinite.
pub fn monodromy_generators(fam: &SphereFamily, r: f64) -> Result<Generators, MonodromyError> {
    if r == 0.0 {
        return Ok(Generators { poisson: f64::INFINITY, jacobi: (f64::INFINITY, f64::INFINITY) });
    }
    let d = fam.area_derivative(r)?;
    Ok(Generators { poisson: d, jacobi: (d, fam.area(r)?) })
}

/// `(A(r+h) - A(r-h)) / 2h` with quadrature areas.
pub fn area_derivative_by_quadrature(fam: &SphereFamily, r: f64, h: f64) -> Result<f64, MonodromyError> {
    Ok((leaf_area_quadrature(fam, r + h, 64, 128)? - leaf_area_quadrature(fam, r - h, 64, 128)?) / (2.0 * h))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub steps: usize,
}

impl ScanGrid {
    pub fn new(r_min: f64, r_max: f64, steps: usize) -> Result<ScanGrid, MonodromyError> {
        if !(r_min > 0.0 && r_max > r_min) {
            return Err(MonodromyError::Grid(format!("need 0 < r_min < r_max, got [{}, {}]", r_min, r_max)));
        }
        if steps < 2 {
            return Err(MonodromyError::Grid("need at least two steps".into()));
        }
        Ok(ScanGrid { r_min, r_max, steps })
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = (self.r_max - self.r_min) / self.steps as f64;
        (0..=self.steps).map(|i| self.r_min + h * i as f64).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub r: f64,
    #[serde(rename = "A")]
    pub area: f64,
    #[serde(rename = "Aprime")]
    pub darea: f64,
    pub rn_poisson: f64,
    pub rn_jacobi: f64,
}

/// `r_N` for the Poisson structure (`|A'|`, infinite where `A' = 0`) and the
/// Jacobi one (`|A'| + A`).
pub fn rn_scan(fam: &SphereFamily, grid: &ScanGrid) -> Result<Vec<ScanRow>, MonodromyError> {
    grid.nodes()
        .into_par_iter()
        .map(|r| {
            let area = fam.area(r)?;
            let darea = fam.area_derivative(r)?;
            let rn_poisson = if darea == 0.0 { f64::INFINITY } else { darea.abs() };
            Ok(ScanRow { r, area, darea, rn_poisson, rn_jacobi: darea.abs() + area })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    pub poisson: bool,
    pub jacobi: bool,
    #[serde(rename = "first_Aprime_zero")]
    pub first_aprime_zero: Option<f64>,
    pub threshold: f64,
    /// quadratic extrapolation of `|A'|` to `r = 0`
    pub poisson_limit: f64,
    /// quadratic extrapolation of `A' + A` to `r = 0`
    pub jacobi_limit: f64,
    pub prequantizable_note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonodromyReport {
    pub rows: Vec<ScanRow>,
    pub verdicts: Verdicts,
}

/// Value at `x = 0` of the parabola through three points.
fn extrapolate_to_zero(p: [(f64, f64); 3]) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        let mut l = 1.0;
        for j in 0..3 {
            if i != j {
                l *= (0.0 - p[j].0) / (p[i].0 - p[j].0);
            }
        }
        s += l * p[i].1;
    }
    s
}

fn bisect<F: Fn(f64) -> Result<f64, MonodromyError>>(f: F, mut lo: f64, mut hi: f64) -> Result<f64, MonodromyError> {
    let mut flo = f(lo)?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Integrability of `M_a` as a Poisson and as a Jacobi manifold, decided on
/// the scan grid with an explicit threshold.
pub fn integrability_verdicts(fam: &SphereFamily, grid: &ScanGrid, threshold: f64) -> Result<MonodromyReport, MonodromyError> {
    let rows = rn_scan(fam, grid)?;
    let mut first_zero = None;
    for w in rows.windows(2) {
        if w[0].darea == 0.0 {
            first_zero = Some(w[0].r);
            break;
        }
        if (w[0].darea < 0.0) != (w[1].darea < 0.0) {
            first_zero = Some(bisect(|r| fam.area_derivative(r), w[0].r, w[1].r)?);
            break;
        }
    }
    if first_zero.is_none() && rows.last().is_some_and(|r| r.darea == 0.0) {
        first_zero = Some(rows.last().unwrap().r);
    }
    let head = |f: &dyn Fn(&ScanRow) -> f64| extrapolate_to_zero([(rows[0].r, f(&rows[0])), (rows[1].r, f(&rows[1])), (rows[2.min(rows.len() - 1)].r, f(&rows[2.min(rows.len() - 1)]))]);
    let poisson_limit = if rows.len() >= 3 { head(&|r| r.darea.abs()) } else { rows[0].darea.abs() };
    let jacobi_limit = if rows.len() >= 3 { head(&|r| r.darea + r.area) } else { rows[0].darea + rows[0].area };
    let all_zero = rows.iter().all(|r| r.darea == 0.0);
    let min_dp = rows.iter().map(|r| r.darea.abs()).fold(f64::INFINITY, f64::min);
    let poisson = all_zero || (first_zero.is_none() && min_dp > threshold && poisson_limit > threshold);
    let min_rj = rows.iter().map(|r| r.rn_jacobi).fold(f64::INFINITY, f64::min);
    let jacobi = min_rj > threshold && jacobi_limit.abs() > threshold;
    let prequantizable_note = "each leaf S_r is prequantizable iff its period generator is an integer".to_string();
    Ok(MonodromyReport {
        rows,
        verdicts: Verdicts {
            poisson,
            jacobi,
            first_aprime_zero: first_zero,
            threshold,
            poisson_limit,
            jacobi_limit,
            prequantizable_note,
        },
    })
}

/// `R / Per_0` for a cyclic period group with nonnegative generator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SigmaFiber {
    Line,
    Circle(f64),
}

pub fn sigma_fiber(generator: f64) -> Result<SigmaFiber, MonodromyError> {
    if generator < 0.0 || generator.is_nan() {
        return Err(MonodromyError::NegativeGenerator(generator));
    }
    Ok(if generator == 0.0 { SigmaFiber::Line } else { SigmaFiber::Circle(generator) })
}

/// The five equivalent conditions for integrability of a homogeneous
/// bivector, each read off the symplectic period generator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BivectorIntegrability {
    pub omega_exact: bool,
    pub periods_trivial: bool,
    pub sigma_is_line: bool,
    pub lambda_integrable: bool,
    pub semidirect_splitting: bool,
    pub simply_connected: bool,
    pub consistent: bool,
}

pub fn bivector_integrability(generator: f64, simply_connected: bool) -> Result<BivectorIntegrability, MonodromyError> {
    let sigma = sigma_fiber(generator)?;
    let omega_exact = generator == 0.0;
    let periods_trivial = generator.abs() == 0.0;
    let sigma_is_line = sigma == SigmaFiber::Line;
    let lambda_integrable = omega_exact;
    let semidirect_splitting = periods_trivial;
    let flags = [omega_exact, periods_trivial, sigma_is_line, lambda_integrable, semidirect_splitting];
    Ok(BivectorIntegrability {
        omega_exact,
        periods_trivial,
        sigma_is_line,
        lambda_integrable,
        semidirect_splitting,
        simply_connected,
        consistent: simply_connected && flags.iter().all(|f| *f == flags[0]),
    })
}

/// Uniform discreteness of leafwise period groups of a 2-D Jacobi manifold:
/// every nonzero generator, and the limit of the nonzero tail extrapolated
/// quadratically in `1/k`, must clear the threshold.
pub fn twodim_jacobi_verdict(generators: &[f64], threshold: f64) -> Result<bool, MonodromyError> {
    if let Some(g) = generators.iter().find(|g| **g < 0.0 || g.is_nan()) {
        return Err(MonodromyError::NegativeGenerator(*g));
    }
    let tail: Vec<(f64, f64)> = generators
        .iter()
        .enumerate()
        .filter(|(_, g)| **g != 0.0)
        .map(|(k, g)| (1.0 / (k + 1) as f64, *g))
        .collect();
    if tail.iter().any(|(_, g)| *g < threshold) {
        return Ok(false);
    }
    if tail.len() >= 3 {
        let n = tail.len();
        let limit = extrapolate_to_zero([tail[n - 3], tail[n - 2], tail[n - 1]]);
        return Ok(limit >= threshold);
    }
    Ok(true)
}

/// `Per` lies in `Z`: the generator is 0 or within `1e-9` of a positive
/// integer.
pub fn prequantization_check(generator: f64) -> Result<bool, MonodromyError> {
    if generator < 0.0 || generator.is_nan() {
        return Err(MonodromyError::NegativeGenerator(generator));
    }
    Ok(generator == 0.0 || (generator >= 0.5 && (generator - generator.round()).abs() <= 1e-9))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(64);
        assert!((w.iter().sum::<f64>() - 2.0).abs() <= 1e-13);
        let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((m - 2.0 / 11.0).abs() <= 1e-13);
        let (x3, w3) = gauss_legendre(3);
        assert!((x3[2] - (0.6f64).sqrt()).abs() <= 1e-15 && (w3[1] - 8.0 / 9.0).abs() <= 1e-15);
    }

    #[test]
    fn unit_family_area() {
        let f = SphereFamily::parse("1").unwrap();
        assert!((f.area(1.0).unwrap() - 4.0 * PI).abs() <= 1e-15);
        let c = symplectic_area(&f, 1.0).unwrap();
        assert!(c.relative_gap <= 1e-6, "{:?}", c);
        let g = monodromy_generators(&f, 2.5).unwrap();
        assert!((g.poisson - 4.0 * PI).abs() <= 1e-12);
        assert!((g.jacobi.1 - 10.0 * PI).abs() <= 1e-12);
    }

    #[test]
    fn default_family_closed_form() {
        let f = SphereFamily::default_family();
        assert!((f.area(PI).unwrap() - 8.0 * PI * PI).abs() <= 1e-12);
        for r in [0.3f64, 1.0, 2.7, 7.0] {
            let oracle = 4.0 * PI * (2.0 + r.sin() + r * r.cos());
            assert!((f.area_derivative(r).unwrap() - oracle).abs() <= 1e-12);
            let fd = area_derivative_by_quadrature(&f, r, 1e-4).unwrap();
            assert!((fd - oracle).abs() <= 1e-5 * oracle.abs(), "{} vs {}", fd, oracle);
        }
        assert!(f.area(1e-9).unwrap() < 1e-7);
        assert_eq!(monodromy_generators(&f, 0.0).unwrap().poisson, f64::INFINITY);
    }

    #[test]
    fn negative_a_is_rejected() {
        let f = SphereFamily::parse("1 - r").unwrap();
        assert!(matches!(f.area(2.0), Err(MonodromyError::NonPositive { .. })));
        assert!(matches!(SphereFamily::parse("x1"), Err(MonodromyError::ForeignVariable(_))));
    }

    #[test]
    fn default_family_verdicts() {
        let f = SphereFamily::default_family();
        let rep = integrability_verdicts(&f, &ScanGrid::new(0.1, 20.0, 2000).unwrap(), DEFAULT_THRESHOLD).unwrap();
        assert!(!rep.verdicts.poisson && rep.verdicts.jacobi);
        let z = rep.verdicts.first_aprime_zero.unwrap();
        assert!(z > 2.0 && z < 3.0);
        assert!((2.0 + z.sin() + z * z.cos()).abs() <= 1e-12);
        for row in &rep.rows {
            assert!(row.rn_jacobi >= 4.0 * PI * (1.0 - 1e-12));
        }
        let unit = SphereFamily::parse("1").unwrap();
        let rep = integrability_verdicts(&unit, &ScanGrid::new(0.1, 20.0, 200).unwrap(), DEFAULT_THRESHOLD).unwrap();
        assert!(rep.verdicts.poisson && rep.verdicts.jacobi);
        assert!((rep.rows[5].rn_jacobi - 4.0 * PI * (1.0 + rep.rows[5].r)).abs() <= 1e-12);
    }

    #[test]
    fn shrinking_the_range_never_loses_a_verdict() {
        let f = SphereFamily::default_family();
        let wide = integrability_verdicts(&f, &ScanGrid::new(0.1, 20.0, 2000).unwrap(), DEFAULT_THRESHOLD).unwrap();
        let narrow = integrability_verdicts(&f, &ScanGrid::new(0.1, 1.5, 140).unwrap(), DEFAULT_THRESHOLD).unwrap();
        assert!(narrow.verdicts.poisson >= wide.verdicts.poisson);
        assert!(narrow.verdicts.jacobi >= wide.verdicts.jacobi);
        assert!(narrow.verdicts.poisson);
    }

    #[test]
    fn period_group_helpers() {
        assert_eq!(sigma_fiber(0.0).unwrap(), SigmaFiber::Line);
        assert_eq!(sigma_fiber(4.0 * PI).unwrap(), SigmaFiber::Circle(4.0 * PI));
        assert!(sigma_fiber(-1.0).is_err());
        assert!(bivector_integrability(0.0, true).unwrap().omega_exact);
        let b = bivector_integrability(4.0 * PI, true).unwrap();
        assert!(b.consistent && !b.lambda_integrable && !b.sigma_is_line);
        assert!(twodim_jacobi_verdict(&[0.0; 10], DEFAULT_THRESHOLD).unwrap());
        let harmonic: Vec<f64> = (1..=100).map(|k| 1.0 / k as f64).collect();
        assert!(!twodim_jacobi_verdict(&harmonic, DEFAULT_THRESHOLD).unwrap());
        assert!(twodim_jacobi_verdict(&[2.0 * PI; 50], DEFAULT_THRESHOLD).unwrap());
        assert!(prequantization_check(0.0).unwrap());
        assert!(prequantization_check(2.0).unwrap());
        assert!(!prequantization_check(PI).unwrap());
        assert!(!prequantization_check(0.3).unwrap());
    }
}

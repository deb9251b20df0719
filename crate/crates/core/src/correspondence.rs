//! Paths of the Jacobi algebroid `T*M + R` against cotangent paths of the
//! Poissonization `M x R`, and the multiplicative function `r`.
//!
//! A J-path carries base `gamma1` and fiber `(a1, a0)`; its image carries
//! base `(gamma1, gamma0)` and fiber `e^{gamma0} (a1, a0)`, where
//! `gamma0(t) = s - int_0^t i_E a1`.

use ndarray::{s, Array2, Array3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebroid::ChartedAlgebroid;
use crate::jacobi::{JacobiChart, JacobiError, PoissonChart};
use crate::path::{equivalence_check, ChartConnection, EquivalenceVerdict, HomotopySheet, PathError, SampledPath};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorrespondenceError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("gamma0 is inconsistent with the fiber (defect {defect:e} > {tol:e})")]
    Inconsistent { defect: f64, tol: f64 },
    #[error(transparent)]
    Jacobi(#[from] JacobiError),
    #[error(transparent)]
    Path(#[from] PathError),
}

/// Cotangent Lie algebroid of a Poisson chart in the frame `{dx^i}`:
/// anchor `P^{i mu}`, `[dx^i, dx^j] = d P^{ij}`.
pub fn cotangent_algebroid(p: &PoissonChart) -> ChartedAlgebroid {
    let c = &p.chart;
    let m = c.dim();
    let l = c.lambda();
    let anchor: Vec<Vec<_>> = (0..m).map(|mu| (0..m).map(|i| l[i][mu].clone()).collect()).collect();
    let mut entries = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            for k in 0..m {
                let d = l[i][j].diff(&c.coords()[k]);
                if !d.is_zero() {
                    entries.push((i, j, k, d));
                }
            }
        }
    }
    ChartedAlgebroid::new(c.coords().to_vec(), m, anchor, entries).expect("well-formed frame")
}

fn check_jpath(j: &JacobiChart, p: &SampledPath) -> Result<(), CorrespondenceError> {
    let m = j.dim();
    if p.base_dim() != m {
        return Err(CorrespondenceError::Dimension { expected: m, got: p.base_dim() });
    }
    if p.rank() != m + 1 {
        return Err(CorrespondenceError::Dimension { expected: m + 1, got: p.rank() });
    }
    Ok(())
}

/// `i_E(gamma1(t_i)) a1(t_i)` at every node.
fn reeb_pairing(j: &JacobiChart, base: ndarray::ArrayView2<f64>, a1: ndarray::ArrayView2<f64>) -> Result<Vec<f64>, CorrespondenceError> {
    let m = j.dim();
    (0..base.nrows())
        .map(|i| {
            let x: Vec<f64> = base.row(i).to_vec();
            let e = j.reeb_at(&x)?;
            Ok((0..m).map(|k| e[k] * a1[(i, k)]).sum())
        })
        .collect()
}

/// Cumulative trapezoid on the uniform grid of `f.len() - 1` intervals.
fn cumtrapz(f: &[f64]) -> Vec<f64> {
    let h = 1.0 / (f.len() - 1) as f64;
    let mut out = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in f.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

fn gamma0(j: &JacobiChart, p: &SampledPath, s0: f64) -> Result<Vec<f64>, CorrespondenceError> {
    let m = j.dim();
    let f = reeb_pairing(j, p.base.view(), p.fiber.slice(s![.., ..m]))?;
    Ok(cumtrapz(&f).into_iter().map(|v| s0 - v).collect())
}

/// Image of a J-path with `gamma0(0) = s`.
pub fn to_poissonization(j: &JacobiChart, p: &SampledPath, s0: f64) -> Result<SampledPath, CorrespondenceError> {
    check_jpath(j, p)?;
    let m = j.dim();
    let g0 = gamma0(j, p, s0)?;
    let n1 = p.base.nrows();
    let mut base = Array2::zeros((n1, m + 1));
    base.slice_mut(s![.., ..m]).assign(&p.base);
    let mut fiber = p.fiber.clone();
    for i in 0..n1 {
        base[(i, m)] = g0[i];
        let w = g0[i].exp();
        fiber.row_mut(i).mapv_inplace(|v| w * v);
    }
    Ok(SampledPath::new(base, fiber)?)
}

/// Preimage of a Poissonization path together with `s = gamma0(0)` and the
/// consistency defect of `gamma0` against `s - int i_E a1`.
#[derive(Clone, Debug)]
pub struct Depoissonized {
    pub path: SampledPath,
    pub s: f64,
    pub defect: f64,
}

pub fn from_poissonization(j: &JacobiChart, q: &SampledPath, tol: f64) -> Result<Depoissonized, CorrespondenceError> {
    let m = j.dim();
    if q.base_dim() != m + 1 {
        return Err(CorrespondenceError::Dimension { expected: m + 1, got: q.base_dim() });
    }
    if q.rank() != m + 1 {
        return Err(CorrespondenceError::Dimension { expected: m + 1, got: q.rank() });
    }
    let n1 = q.base.nrows();
    let base = q.base.slice(s![.., ..m]).to_owned();
    let mut fiber = q.fiber.clone();
    for i in 0..n1 {
        let w = (-q.base[(i, m)]).exp();
        fiber.row_mut(i).mapv_inplace(|v| w * v);
    }
    let path = SampledPath::new(base, fiber)?;
    let s0 = q.base[(0, m)];
    let g0 = gamma0(j, &path, s0)?;
    let defect = (0..n1).map(|i| (q.base[(i, m)] - g0[i]).abs()).fold(0.0, f64::max);
    if defect > tol {
        return Err(CorrespondenceError::Inconsistent { defect, tol });
    }
    Ok(Depoissonized { path, s: s0, defect })
}

/// `r(p) = -int_0^1 i_E a1 dt` by the trapezoid rule.
pub fn r_functional(j: &JacobiChart, p: &SampledPath) -> Result<f64, CorrespondenceError> {
    check_jpath(j, p)?;
    let m = j.dim();
    let f = reeb_pairing(j, p.base.view(), p.fiber.slice(s![.., ..m]))?;
    Ok(-*cumtrapz(&f).last().expect("nonempty"))
}

/// Slice-wise image of a J-path sheet with `gamma0(eps, 0) = s`.
pub fn poissonize_sheet(j: &JacobiChart, sheet: &HomotopySheet, s0: f64) -> Result<HomotopySheet, CorrespondenceError> {
    let (k1, n1, m) = sheet.base.dim();
    let r = sheet.fiber.dim().2;
    let slices: Vec<Result<SampledPath, CorrespondenceError>> =
        (0..k1).into_par_iter().map(|e| to_poissonization(j, &sheet.slice(e), s0)).collect();
    let mut base = Array3::zeros((k1, n1, m + 1));
    let mut fiber = Array3::zeros((k1, n1, r));
    for (e, sl) in slices.into_iter().enumerate() {
        let sl = sl?;
        base.slice_mut(s![e, .., ..]).assign(&sl.base);
        fiber.slice_mut(s![e, .., ..]).assign(&sl.fiber);
    }
    Ok(HomotopySheet::new(base, fiber)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceVerdict {
    pub jacobi: EquivalenceVerdict,
    pub poisson: EquivalenceVerdict,
    pub agree: bool,
}

/// Runs the equivalence checker on a J-path sheet and on its image.
pub fn homotopy_correspondence_check(
    j: &JacobiChart,
    sheet: &HomotopySheet,
    s0: f64,
    tol: Option<f64>,
) -> Result<CorrespondenceVerdict, CorrespondenceError> {
    let flat = ChartConnection::flat();
    let jv = equivalence_check(&j.jacobi_algebroid(), sheet, &flat, tol)?;
    let img = poissonize_sheet(j, sheet, s0)?;
    let pv = equivalence_check(&cotangent_algebroid(&j.poissonize()), &img, &flat, tol)?;
    Ok(CorrespondenceVerdict { agree: jv.equivalent == pv.equivalent, jacobi: jv, poisson: pv })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::{sphere_family_chart, ContactChart};
    use crate::path::{a0_boundary_check, apath_residual, DefaultTau, Reparam};
    use crate::parse;

    fn contact() -> JacobiChart {
        let pts: Vec<Vec<f64>> = vec![vec![0.1, 0.2, 0.3], vec![-0.5, 0.4, 1.0]];
        ContactChart::standard_r3().to_jacobi(&pts).unwrap()
    }

    fn contact_path(j: &JacobiChart, n: usize) -> SampledPath {
        SampledPath::lift(&j.jacobi_algebroid(), &[0.2, -0.1, 0.3], n, |t| {
            let w = DefaultTau.derivative(t);
            vec![0.6 * w, -0.4 * w, 0.3 * w * DefaultTau.value(t), 0.5 * w]
        })
        .unwrap()
    }

    #[test]
    fn cotangent_algebroid_of_poissonization_is_a_lie_algebroid() {
        let a = cotangent_algebroid(&contact().poissonize());
        let rep = crate::algebroid::check_axioms(&a, &crate::sample::halton(&crate::sample::SampleBox::cube(4, -1.0, 1.0), 8), 3, 5).unwrap();
        assert!(rep.max() <= 1e-8, "{:?}", rep);
    }

    #[test]
    fn zero_path_maps_to_zero_path() {
        let j = contact();
        let z = SampledPath::zero(&[0.1, 0.2, 0.3], 4, 20);
        let q = to_poissonization(&j, &z, 0.0).unwrap();
        assert!(q.base.column(3).iter().all(|v| *v == 0.0));
        assert!(q.fiber.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn round_trip_and_residual_transport() {
        let j = contact();
        let p = contact_path(&j, 400);
        let q = to_poissonization(&j, &p, 0.7).unwrap();
        let back = from_poissonization(&j, &q, 1e-12).unwrap();
        assert!((back.s - 0.7).abs() <= 1e-15);
        let d = (&back.path.fiber - &p.fiber).iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(d <= 1e-12, "{}", d);
        assert_eq!(back.path.base, p.base);
        let rin = apath_residual(&j.jacobi_algebroid(), &p).unwrap();
        let rout = apath_residual(&cotangent_algebroid(&j.poissonize()), &q).unwrap();
        assert!(rout <= 5.0 * rin + 1e-4, "{} {}", rin, rout);
        assert!(a0_boundary_check(&q).pass);
        let r = r_functional(&j, &p).unwrap();
        assert!((r - (q.base[(400, 3)] - q.base[(0, 3)])).abs() <= 1e-14);
    }

    #[test]
    fn vanishing_reeb_field_gives_pure_scaling() {
        let j = sphere_family_chart(&parse("1/(sin(r) + 2)").unwrap());
        let p = SampledPath::lift(&j.jacobi_algebroid(), &[0.5, 0.3, 0.4], 100, |t| {
            let w = DefaultTau.derivative(t);
            vec![w, -w, 0.3 * w, 0.8 * w]
        })
        .unwrap();
        let q = to_poissonization(&j, &p, 0.4).unwrap();
        assert!(q.base.column(3).iter().all(|v| *v == 0.4));
        let d = (&q.fiber - &(&p.fiber * 0.4f64.exp())).iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(d <= 1e-15);
        assert_eq!(r_functional(&j, &p).unwrap(), 0.0);
    }

    #[test]
    fn inconsistent_gamma0_is_rejected() {
        let j = contact();
        let p = contact_path(&j, 50);
        let mut q = to_poissonization(&j, &p, 0.0).unwrap();
        q.base[(25, 3)] += 0.1;
        assert!(matches!(from_poissonization(&j, &q, 1e-9), Err(CorrespondenceError::Inconsistent { .. })));
    }

    #[test]
    fn r_is_additive_and_reparameterization_invariant() {
        let j = contact();
        let p = contact_path(&j, 400);
        let x1: Vec<f64> = p.base.row(400).to_vec();
        let q = SampledPath::lift(&j.jacobi_algebroid(), &x1, 400, |t| {
            let w = DefaultTau.derivative(t);
            vec![-0.2 * w, 0.5 * w, 0.0, -0.9 * w * t]
        })
        .unwrap();
        let pq = crate::path::concatenate(&p, &q, 1e-12).unwrap();
        let (rp, rq, rpq) = (r_functional(&j, &p).unwrap(), r_functional(&j, &q).unwrap(), r_functional(&j, &pq).unwrap());
        assert!((rpq - rp - rq).abs() <= 1e-8, "{} vs {}", rpq, rp + rq);
        let fine = contact_path(&j, 8000);
        let rt = r_functional(&j, &crate::path::reparameterize(&fine, &DefaultTau).unwrap()).unwrap();
        let rf = r_functional(&j, &fine).unwrap();
        assert!((rt - rf).abs() <= 1e-8, "{} vs {}", rt, rf);
    }
}

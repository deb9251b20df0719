//! The contact groupoid `M x M x R` of a contact chart `(M, theta0)`.
//!
//! Total space coordinates are `(x, y, a)`, with `theta = theta0(x) -
//! e^a theta0(y)`, `f = e^a` and `(x, y, a) (y, z, b) = (x, z, a + b)`.
//! Pullbacks along the structure maps are symbolic (substitution plus chain
//! rule); only the final residuals are sampled.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{coordinate_names, EvalError, Expr};
use crate::jacobi::{contact_structure_at, dform, ContactChart, JacobiError};

#[derive(Debug, Error)]
pub enum ContactError {
    #[error(transparent)]
    Jacobi(#[from] JacobiError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("base chart must use coordinates x1..x{0}")]
    Coordinates(usize),
    #[error("period must be non-negative, got {0}")]
    NegativePeriod(f64),
}

/// Which side of the multiplicativity identity carries `f`:
/// `ScaleFirst` is `m*theta = pr2*f pr1*theta + pr2*theta`, `ScaleSecond` is
/// `m*theta = pr1*f pr2*theta + pr1*theta`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convention {
    ScaleFirst,
    ScaleSecond,
}

#[derive(Clone, Debug)]
pub struct ContactGroupoidChart {
    base: ContactChart,
    coords: Vec<String>,
    theta: Vec<Expr>,
    f: Expr,
}

fn names(prefix: &str, m: usize) -> Vec<String> {
    coordinate_names(prefix, m)
}

/// Pullback of the 1-form `form` (on `src`) along `map`, one expression per
/// source coordinate in the variables `dst`.
pub fn pullback_1form(src: &[String], form: &[Expr], map: &[Expr], dst: &[String]) -> Vec<Expr> {
    let sub: HashMap<String, Expr> = src.iter().cloned().zip(map.iter().cloned()).collect();
    let at: Vec<Expr> = form.iter().map(|c| c.substitute(&sub)).collect();
    dst.iter()
        .map(|w| {
            let mut acc = Expr::zero();
            for (c, phi) in at.iter().zip(map) {
                let d = phi.diff(w);
                if !d.is_zero() && !c.is_zero() {
                    acc = acc + c * d;
                }
            }
            acc
        })
        .collect()
}

/// Pullback of a function.
pub fn pullback_fn(src: &[String], g: &Expr, map: &[Expr]) -> Expr {
    let sub: HashMap<String, Expr> = src.iter().cloned().zip(map.iter().cloned()).collect();
    g.substitute(&sub)
}

/// `d` of a 2-form table as the cyclic sum `d_i w_jk + d_j w_ki + d_k w_ij`.
pub fn d_two_form(coords: &[String], w: &[Vec<Expr>]) -> Vec<Vec<Vec<Expr>>> {
    let m = coords.len();
    (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    (0..m)
                        .map(|k| w[j][k].diff(&coords[i]) + w[k][i].diff(&coords[j]) + w[i][j].diff(&coords[k]))
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Samples points and tangent vectors in `[-1, 1]^dim`.
fn samples(dim: usize, n: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut v = || (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
            (v(), v(), v())
        })
        .collect()
}

fn max_on_vectors(coords: &[String], one_form: &[Expr], pts: &[(Vec<f64>, Vec<f64>, Vec<f64>)]) -> Result<f64, EvalError> {
    let c: Vec<_> = one_form.iter().map(|e| e.compile(coords)).collect::<Result<_, _>>()?;
    let mut worst: f64 = 0.0;
    for (p, v, _) in pts {
        let mut s = 0.0;
        for (ci, vi) in c.iter().zip(v) {
            s += ci.eval(p)? * vi;
        }
        worst = worst.max(s.abs());
    }
    Ok(worst)
}

fn max_on_pairs(coords: &[String], w: &[Vec<Expr>], pts: &[(Vec<f64>, Vec<f64>, Vec<f64>)]) -> Result<f64, EvalError> {
    let m = coords.len();
    let c: Vec<Vec<_>> = w.iter().map(|r| r.iter().map(|e| e.compile(coords)).collect::<Result<_, _>>()).collect::<Result<_, _>>()?;
    let mut worst: f64 = 0.0;
    for (p, v, u) in pts {
        let mut s = 0.0;
        for i in 0..m {
            for j in 0..m {
                if !w[i][j].is_zero() {
                    s += c[i][j].eval(p)? * v[i] * u[j];
                }
            }
        }
        worst = worst.max(s.abs());
    }
    Ok(worst)
}

/// Coordinates of the composable-pair manifold `((x, y, a), (y, z, b))`.
fn pair_coords(m: usize) -> Vec<String> {
    let mut c = names("x", m);
    c.extend(names("y", m));
    c.extend(names("z", m));
    c.push("a".into());
    c.push("b".into());
    c
}

fn vars(v: &[String]) -> Vec<Expr> {
    v.iter().map(|s| Expr::var(s)).collect()
}

/// The three maps `pr1, pr2, m` from composable pairs to the total space.
fn structure_maps(m: usize) -> [Vec<Expr>; 3] {
    let (x, y, z) = (vars(&names("x", m)), vars(&names("y", m)), vars(&names("z", m)));
    let (a, b) = (Expr::var("a"), Expr::var("b"));
    let join = |p: &[Expr], q: &[Expr], r: Expr| {
        let mut v = p.to_vec();
        v.extend_from_slice(q);
        v.push(r);
        v
    };
    [join(&x, &y, a.clone()), join(&y, &z, b.clone()), join(&x, &z, a + b)]
}

/// Result of the two-way convention search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplicativityReport {
    pub scale_first: f64,
    pub scale_second: f64,
    pub tolerance: f64,
    /// first convention (in the order above) whose residual is within tolerance
    pub convention: Option<Convention>,
}

/// Residuals of the candidate Reeb fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReebCandidate {
    pub name: String,
    /// `max |L_R theta|`
    pub lie: f64,
    /// `max |i(R) theta - 1|`
    pub contraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousReport {
    pub theta_residual: f64,
    pub omega_residual: f64,
    /// `max |d omega|` on sampled vector triples
    pub d_omega: f64,
    pub tolerance: f64,
    pub agree: bool,
}

/// Which factor of `M x M x R` a projection keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Factor {
    First,
    Second,
}

/// Model of the contact groupoid of a simply connected symplectic base.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SymplecticCase {
    /// `Gamma_s x R` with the cocycle-twisted product
    Product,
    /// principal `S^1` quotient of the given period (not constructed)
    CircleQuotient { period: f64 },
}

pub fn symplectic_case_split(generator: f64) -> Result<SymplecticCase, ContactError> {
    if generator < 0.0 || generator.is_nan() {
        Err(ContactError::NegativePeriod(generator))
    } else if generator == 0.0 {
        Ok(SymplecticCase::Product)
    } else {
        Ok(SymplecticCase::CircleQuotient { period: generator })
    }
}

impl ContactGroupoidChart {
    /// The contact pair groupoid of `base`, whose coordinates must be `x1..xm`.
    pub fn build(base: &ContactChart) -> Result<ContactGroupoidChart, ContactError> {
        let m = base.coords().len();
        if base.coords() != names("x", m).as_slice() {
            return Err(ContactError::Coordinates(m));
        }
        let mut coords = names("x", m);
        coords.extend(names("y", m));
        coords.push("a".into());
        let ren: Vec<(String, String)> = (1..=m).map(|i| (format!("x{}", i), format!("y{}", i))).collect();
        let ren: Vec<(&str, &str)> = ren.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let ea = Expr::var("a").exp();
        let mut theta: Vec<Expr> = base.theta().to_vec();
        theta.extend(base.theta().iter().map(|t| -(&ea * t.rename(&ren))));
        theta.push(Expr::zero());
        Ok(ContactGroupoidChart { base: base.clone(), coords, theta, f: ea })
    }

    pub fn standard_r3() -> ContactGroupoidChart {
        ContactGroupoidChart::build(&ContactChart::standard_r3()).expect("R^3")
    }

    pub fn base(&self) -> &ContactChart {
        &self.base
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn theta(&self) -> &[Expr] {
        &self.theta
    }

    pub fn f(&self) -> &Expr {
        &self.f
    }

    pub fn base_dim(&self) -> usize {
        self.base.coords().len()
    }

    pub fn with_theta(&self, theta: Vec<Expr>) -> ContactGroupoidChart {
        ContactGroupoidChart { theta, ..self.clone() }
    }

    pub fn with_f(&self, f: Expr) -> ContactGroupoidChart {
        ContactGroupoidChart { f, ..self.clone() }
    }

    /// `theta0(x) - theta0(y)`: the `f` factor dropped.
    pub fn without_f_factor(&self) -> ContactGroupoidChart {
        let m = self.base_dim();
        let ren: HashMap<String, Expr> = (1..=m).map(|k| (format!("x{}", k), Expr::var(&format!("y{}", k)))).collect();
        let mut t = self.theta.clone();
        for i in 0..m {
            t[m + i] = -self.theta[i].substitute(&ren);
        }
        self.with_theta(t)
    }

    fn sample_points(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        samples(self.coords.len(), n, seed).into_iter().map(|s| s.0).collect()
    }

    /// Smallest `|det|` of the bordered contact matrix at samples.
    pub fn contact_form_check(&self, n: usize, seed: u64) -> Result<f64, ContactError> {
        let mut worst = f64::INFINITY;
        for p in self.sample_points(n, seed) {
            let (_, _, det) = contact_structure_at(&self.coords, &self.theta, &p)?;
            worst = worst.min(det.abs());
        }
        Ok(worst)
    }

    /// `max |theta|` on the identity section `x = y, a = 0`, and `max |f - 1|`.
    pub fn identity_section_residuals(&self, n: usize, seed: u64) -> Result<(f64, f64), ContactError> {
        let m = self.base_dim();
        let x = names("x", m);
        let mut map = vars(&x);
        map.extend(vars(&x));
        map.push(Expr::zero());
        let pulled = pullback_1form(&self.coords, &self.theta, &map, &x);
        let pts = samples(m, n, seed);
        let r = max_on_vectors(&x, &pulled, &pts)?;
        let fu = pullback_fn(&self.coords, &self.f, &map);
        let mut worst: f64 = 0.0;
        for (p, _, _) in &pts {
            worst = worst.max((fu.eval(&x, p)? - 1.0).abs());
        }
        Ok((r, worst))
    }

    /// Residual 1-form of the multiplicativity identity for `f = g` on the
    /// composable-pair manifold.
    pub fn multiplicativity_form(&self, convention: Convention, g: &Expr) -> Vec<Expr> {
        let m = self.base_dim();
        let pc = pair_coords(m);
        let [p1, p2, mm] = structure_maps(m);
        let th = |map: &[Expr]| pullback_1form(&self.coords, &self.theta, map, &pc);
        let (t1, t2, tm) = (th(&p1), th(&p2), th(&mm));
        let (scaled, plain, fac) = match convention {
            Convention::ScaleFirst => (t1, t2, pullback_fn(&self.coords, g, &p2)),
            Convention::ScaleSecond => (t2, t1, pullback_fn(&self.coords, g, &p1)),
        };
        (0..pc.len()).map(|i| &tm[i] - &fac * &scaled[i] - &plain[i]).collect()
    }

    /// `max |(m*theta - f-twisted sum)(v)|` on composable tangent samples.
    pub fn multiplicativity_residual(&self, convention: Convention, n: usize, seed: u64) -> Result<f64, ContactError> {
        self.multiplicativity_residual_with(convention, &self.f, n, seed)
    }

    pub fn multiplicativity_residual_with(&self, convention: Convention, g: &Expr, n: usize, seed: u64) -> Result<f64, ContactError> {
        let pc = pair_coords(self.base_dim());
        let r = self.multiplicativity_form(convention, g);
        Ok(max_on_vectors(&pc, &r, &samples(pc.len(), n, seed))?)
    }

    /// `d` of the residual form on vector pairs.
    pub fn multiplicativity_d_residual(&self, convention: Convention, n: usize, seed: u64) -> Result<f64, ContactError> {
        let pc = pair_coords(self.base_dim());
        let r = self.multiplicativity_form(convention, &self.f);
        Ok(max_on_pairs(&pc, &dform(&pc, &r), &samples(pc.len(), n, seed))?)
    }

    /// Residuals of both orderings; `ScaleFirst` wins a tie.
    pub fn convention_search(&self, n: usize, seed: u64, tol: f64) -> Result<MultiplicativityReport, ContactError> {
        let scale_first = self.multiplicativity_residual(Convention::ScaleFirst, n, seed)?;
        let scale_second = self.multiplicativity_residual(Convention::ScaleSecond, n, seed)?;
        let convention = if scale_first <= tol {
            Some(Convention::ScaleFirst)
        } else if scale_second <= tol {
            Some(Convention::ScaleSecond)
        } else {
            None
        };
        Ok(MultiplicativityReport { scale_first, scale_second, tolerance: tol, convention })
    }

    /// `(max |L_R theta|, max |i(R) theta - 1|)` by Cartan's formula.
    pub fn reeb_residuals(&self, r: &[Expr], n: usize, seed: u64) -> Result<(f64, f64), ContactError> {
        let c = &self.coords;
        let contraction: Expr = r.iter().zip(&self.theta).map(|(ri, ti)| ri * ti).sum();
        let w = dform(c, &self.theta);
        let lie: Vec<Expr> = (0..c.len())
            .map(|nu| contraction.diff(&c[nu]) + (0..c.len()).map(|mu| &r[mu] * &w[mu][nu]).sum::<Expr>())
            .collect();
        let pts = samples(c.len(), n, seed);
        let lie_max = max_on_vectors(c, &lie, &pts)?;
        let cc = contraction.compile(c)?;
        let mut worst: f64 = 0.0;
        for (p, _, _) in &pts {
            worst = worst.max((cc.eval(p)? - 1.0).abs());
        }
        Ok((lie_max, worst))
    }

    /// `d_a`, `-d_a`, the base Reeb field on the first factor, and
    /// `-e^{-a}` times it on the second.
    pub fn reeb_candidates(&self, points: &[Vec<f64>]) -> Result<Vec<(String, Vec<Expr>)>, ContactError> {
        let m = self.base_dim();
        let k = self.coords.len();
        let e0 = self.base.to_jacobi(points)?.reeb().to_vec();
        let mut da = vec![Expr::zero(); k];
        da[k - 1] = Expr::one();
        let neg: Vec<Expr> = da.iter().map(|e| -e).collect();
        let mut first = vec![Expr::zero(); k];
        first[..m].clone_from_slice(&e0);
        let ren: HashMap<String, Expr> = (1..=m).map(|i| (format!("x{}", i), Expr::var(&format!("y{}", i)))).collect();
        let mut second = vec![Expr::zero(); k];
        let s = -(Expr::var("a").exp()).pow(&Expr::num(-1.0));
        for i in 0..m {
            second[m + i] = &s * e0[i].substitute(&ren);
        }
        Ok(vec![
            ("d_a".into(), da),
            ("-d_a".into(), neg),
            ("E0 on first factor".into(), first),
            ("-e^-a E0 on second factor".into(), second),
        ])
    }

    pub fn reeb_search(&self, n: usize, seed: u64) -> Result<Vec<ReebCandidate>, ContactError> {
        let pts = samples(self.base_dim(), 16, seed ^ 0x5eed).into_iter().map(|s| s.0).collect::<Vec<_>>();
        self.reeb_candidates(&pts)?
            .into_iter()
            .map(|(name, r)| {
                let (lie, contraction) = self.reeb_residuals(&r, n, seed)?;
                Ok(ReebCandidate { name, lie, contraction })
            })
            .collect()
    }

    /// `omega = d(e^{-s} theta)` on `Gamma x R` with the twisted product
    /// `(g, s)(h, s') = (gh, s_out)`: for `ScaleSecond`, `s' = s - log f(g)` and
    /// `s_out = s`; for `ScaleFirst`, `s = s' - log f(h)` and `s_out = s'`.
    /// Returns `max |m*omega - pr1*omega - pr2*omega|` on vector pairs.
    pub fn homogeneous_omega_residual(&self, convention: Convention, n: usize, seed: u64) -> Result<(f64, f64), ContactError> {
        let m = self.base_dim();
        let mut gc = self.coords.clone();
        gc.push("s".into());
        let lam: Vec<Expr> = self
            .theta
            .iter()
            .map(|t| (-Expr::var("s")).exp() * t)
            .chain(std::iter::once(Expr::zero()))
            .collect();
        let mut pc = pair_coords(m);
        pc.push("s".into());
        let [p1, p2, mm] = structure_maps(m);
        let s = Expr::var("s");
        let (s1, s2, s3) = match convention {
            Convention::ScaleSecond => {
                let lf = pullback_fn(&self.coords, &self.f, &p1).log();
                (s.clone(), &s - lf, s.clone())
            }
            Convention::ScaleFirst => {
                let lf = pullback_fn(&self.coords, &self.f, &p2).log();
                (&s - lf, s.clone(), s.clone())
            }
        };
        let ext = |mut v: Vec<Expr>, e: Expr| {
            v.push(e);
            v
        };
        let (q1, q2, qm) = (ext(p1, s1), ext(p2, s2), ext(mm, s3));
        let pb = |q: &[Expr]| pullback_1form(&gc, &lam, q, &pc);
        let (l1, l2, lm) = (pb(&q1), pb(&q2), pb(&qm));
        let beta: Vec<Expr> = (0..pc.len()).map(|i| &lm[i] - &l1[i] - &l2[i]).collect();
        let pts = samples(pc.len(), n, seed);
        let res = max_on_pairs(&pc, &dform(&pc, &beta), &pts)?;
        // d omega on Gamma x R, contracted with three sampled vectors
        let omega = dform(&gc, &lam);
        let dd = d_two_form(&gc, &omega);
        let pts_g = samples(gc.len(), n.min(20), seed ^ 1);
        let k = gc.len();
        let mut d_omega: f64 = 0.0;
        for (p, v, u) in &pts_g {
            let w: Vec<f64> = v.iter().zip(u).map(|(a, b)| a * b - 0.5).collect();
            let mut acc = 0.0;
            for i in 0..k {
                for j in 0..k {
                    for l in 0..k {
                        if !dd[i][j][l].is_zero() {
                            acc += dd[i][j][l].eval(&gc, p)? * v[i] * u[j] * w[l];
                        }
                    }
                }
            }
            d_omega = d_omega.max(acc.abs());
        }
        Ok((res, d_omega))
    }

    pub fn homogeneous_equivalence_check(&self, convention: Convention, n: usize, seed: u64, tol: f64) -> Result<HomogeneousReport, ContactError> {
        let theta_residual = self.multiplicativity_residual(convention, n, seed)?;
        let (omega_residual, d_omega) = self.homogeneous_omega_residual(convention, n, seed)?;
        Ok(HomogeneousReport {
            theta_residual,
            omega_residual,
            d_omega,
            tolerance: tol,
            agree: (theta_residual <= tol) == (omega_residual <= tol),
        })
    }

    /// `max |p_*(phi Lambda, phi E + Lambda#(d phi)) - (Lambda0, E0)|` for the
    /// projection onto one factor, with `phi = 1` when `conformal` is `None`.
    pub fn projection_jacobi_residual(&self, factor: Factor, conformal: Option<&Expr>, n: usize, seed: u64) -> Result<f64, ContactError> {
        let m = self.base_dim();
        let k = self.coords.len();
        let off = match factor {
            Factor::First => 0,
            Factor::Second => m,
        };
        let base_coords = self.base.coords().to_vec();
        let mut worst: f64 = 0.0;
        for p in self.sample_points(n, seed) {
            let (l, e, det) = contact_structure_at(&self.coords, &self.theta, &p)?;
            if det.abs() <= 1e-12 {
                return Err(JacobiError::NotContact { index: 0, det }.into());
            }
            let (phi, dphi) = match conformal {
                None => (1.0, vec![0.0; k]),
                Some(f) => (f.eval(&self.coords, &p)?, self.coords.iter().map(|c| f.diff(c).eval(&self.coords, &p)).collect::<Result<Vec<_>, _>>()?),
            };
            let q = &p[off..off + m];
            let (l0, e0, _) = contact_structure_at(&base_coords, self.base.theta(), q)?;
            // (Lambda# d phi)^mu = d_i phi Lambda^{i mu}
            let sharp: Vec<f64> = (0..k).map(|mu| (0..k).map(|i| dphi[i] * l[(i, mu)]).sum()).collect();
            for i in 0..m {
                for j in 0..m {
                    worst = worst.max((phi * l[(off + i, off + j)] - l0[(i, j)]).abs());
                }
                worst = worst.max((phi * e[off + i] + sharp[off + i] - e0[i]).abs());
            }
        }
        Ok(worst)
    }

    /// Source map of the groupoid read in `convention`: the second factor for
    /// `ScaleFirst`, the first for `ScaleSecond` (the opposite groupoid).
    pub fn source_factor(convention: Convention) -> Factor {
        match convention {
            Convention::ScaleFirst => Factor::Second,
            Convention::ScaleSecond => Factor::First,
        }
    }

    /// Jacobi-map residual of the source for `convention`.
    pub fn source_jacobi_residual(&self, convention: Convention, n: usize, seed: u64) -> Result<f64, ContactError> {
        self.projection_jacobi_residual(Self::source_factor(convention), None, n, seed)
    }

    /// Residual of the target as a `-f` conformal Jacobi map.
    pub fn target_conformal_residual(&self, convention: Convention, n: usize, seed: u64) -> Result<f64, ContactError> {
        let t = match Self::source_factor(convention) {
            Factor::First => Factor::Second,
            Factor::Second => Factor::First,
        };
        let phi = -&self.f;
        self.projection_jacobi_residual(t, Some(&phi), n, seed)
    }

    /// Numeric `(Lambda, E)` of `theta` at a point.
    pub fn jacobi_at(&self, p: &[f64]) -> Result<(DMatrix<f64>, Vec<f64>), ContactError> {
        let (l, e, _) = contact_structure_at(&self.coords, &self.theta, p)?;
        Ok((l, e.iter().copied().collect()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactReport {
    pub multiplicativity: MultiplicativityReport,
    pub reeb: Vec<ReebCandidate>,
    pub source_jacobi: f64,
    pub target_conformal: f64,
    pub convention: Option<Convention>,
}

/// Full residual report with the convention chosen by the search.
pub fn contact_report(c: &ContactGroupoidChart, n: usize, seed: u64, tol: f64) -> Result<ContactReport, ContactError> {
    let multiplicativity = c.convention_search(n, seed, tol)?;
    let conv = multiplicativity.convention.unwrap_or(Convention::ScaleFirst);
    Ok(ContactReport {
        reeb: c.reeb_search(n, seed)?,
        source_jacobi: c.source_jacobi_residual(conv, n, seed)?,
        target_conformal: c.target_conformal_residual(conv, n, seed)?,
        convention: multiplicativity.convention,
        multiplicativity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_space_is_contact_and_units_are_legendrian() {
        let c = ContactGroupoidChart::standard_r3();
        assert_eq!(c.coords().len(), 7);
        assert!(c.contact_form_check(100, 3).unwrap() > 1e-6);
        let (th, f) = c.identity_section_residuals(50, 4).unwrap();
        assert_eq!((th, f), (0.0, 0.0));
    }

    #[test]
    fn scale_second_ordering_is_multiplicative() {
        let c = ContactGroupoidChart::standard_r3();
        let rep = c.convention_search(100, 7, 1e-9).unwrap();
        assert!(rep.scale_second <= 1e-9, "{:?}", rep);
        assert!(rep.scale_first > 0.1, "{:?}", rep);
        assert_eq!(rep.convention, Some(Convention::ScaleSecond));
        assert!(c.multiplicativity_d_residual(Convention::ScaleSecond, 50, 8).unwrap() <= 1e-9);
    }

    #[test]
    fn dropping_f_breaks_multiplicativity() {
        let c = ContactGroupoidChart::standard_r3().without_f_factor();
        assert!(c.multiplicativity_residual(Convention::ScaleSecond, 100, 7).unwrap() > 0.1);
        assert!(c.multiplicativity_residual(Convention::ScaleFirst, 100, 7).unwrap() > 0.1);
    }

    #[test]
    fn f_is_unique() {
        let c = ContactGroupoidChart::standard_r3();
        let a = Expr::var("a");
        for g in [a.clone(), (a.clone() * 1.001).exp(), a.exp() * 1.01, (a.clone() + Expr::var("x1") * 0.01).exp()] {
            assert!(c.multiplicativity_residual_with(Convention::ScaleSecond, &g, 100, 9).unwrap() > 1e-6);
        }
    }

    #[test]
    fn reeb_field_is_the_first_factor_lift() {
        let c = ContactGroupoidChart::standard_r3();
        let r = c.reeb_search(50, 2).unwrap();
        let get = |n: &str| r.iter().find(|x| x.name == n).unwrap().clone();
        let first = get("E0 on first factor");
        assert!(first.lie <= 1e-9 && first.contraction <= 1e-9);
        let da = get("d_a");
        assert!((da.contraction - 1.0).abs() < 1e-12);
        assert!(get("-d_a").lie > 0.1);
        let second = get("-e^-a E0 on second factor");
        assert!(second.contraction <= 1e-9 && second.lie > 0.1);
    }

    #[test]
    fn homogeneous_check_agrees() {
        let c = ContactGroupoidChart::standard_r3();
        let rep = c.homogeneous_equivalence_check(Convention::ScaleSecond, 40, 5, 1e-9).unwrap();
        assert!(rep.agree && rep.theta_residual <= 1e-9 && rep.omega_residual <= 1e-9, "{:?}", rep);
        assert!(rep.d_omega <= 1e-12);
        let bad = c.without_f_factor().homogeneous_equivalence_check(Convention::ScaleSecond, 40, 5, 1e-9).unwrap();
        assert!(bad.agree && bad.theta_residual > 0.1 && bad.omega_residual > 0.1, "{:?}", bad);
    }

    #[test]
    fn source_is_jacobi_target_is_conformal() {
        let c = ContactGroupoidChart::standard_r3();
        assert!(c.source_jacobi_residual(Convention::ScaleSecond, 30, 1).unwrap() <= 1e-8);
        assert!(c.target_conformal_residual(Convention::ScaleSecond, 30, 1).unwrap() <= 1e-8);
        // the other factor is not a plain Jacobi map
        assert!(c.source_jacobi_residual(Convention::ScaleFirst, 30, 1).unwrap() > 0.1);
    }

    #[test]
    fn symplectic_cases() {
        assert_eq!(symplectic_case_split(0.0).unwrap(), SymplecticCase::Product);
        assert_eq!(symplectic_case_split(2.0 * std::f64::consts::PI).unwrap(), SymplecticCase::CircleQuotient { period: 2.0 * std::f64::consts::PI });
        assert!(symplectic_case_split(-1.0).is_err());
    }
}

//! Homotopy sheets with closed-form solutions, shared by tests and the CLI.

use std::f64::consts::PI;

use crate::algebroid::ChartedAlgebroid;
use crate::path::{ChartConnection, DefaultTau, HomotopySheet, Reparam};

/// Constants of the so(3) family `g = exp(alpha e1) exp(beta e2)`.
#[derive(Clone, Copy, Debug)]
pub struct So3Family {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// `alpha = (1 + eps) tau` instead of pinning `g(eps, 1)`
    pub moving_end: bool,
}

impl Default for So3Family {
    fn default() -> Self {
        So3Family { c1: 1.0, c2: 0.7, c3: 0.9, moving_end: false }
    }
}

fn rotate_e2(alpha: f64) -> [f64; 3] {
    // Ad_{exp(alpha e1)} e2 for [e1, e2] = e3
    [0.0, alpha.cos(), alpha.sin()]
}

impl So3Family {
    /// `(alpha, beta, alpha_t, beta_t, alpha_eps, beta_eps)` at `(eps, t)`.
    fn angles(&self, eps: f64, t: f64) -> [f64; 6] {
        let tau = DefaultTau.value(t);
        let dtau = DefaultTau.derivative(t);
        let s2 = (PI * tau).sin().powi(2);
        let ds2 = PI * (2.0 * PI * tau).sin() * dtau;
        let beta = eps * self.c3 * s2;
        let (bt, be) = (eps * self.c3 * ds2, self.c3 * s2);
        if self.moving_end {
            [(1.0 + eps) * tau, beta, (1.0 + eps) * dtau, bt, tau, be]
        } else {
            [
                self.c1 * tau + eps * self.c2 * s2,
                beta,
                self.c1 * dtau + eps * self.c2 * ds2,
                bt,
                self.c2 * s2,
                be,
            ]
        }
    }

    /// Right-trivialized `a = d_t g g^-1`.
    pub fn a(&self, eps: f64, t: f64) -> Vec<f64> {
        let [al, _, at, bt, _, _] = self.angles(eps, t);
        let r = rotate_e2(al);
        vec![at, bt * r[1], bt * r[2]]
    }

    /// Exact `b = d_eps g g^-1`.
    pub fn b(&self, eps: f64, t: f64) -> Vec<f64> {
        let [al, _, _, _, ae, be] = self.angles(eps, t);
        let r = rotate_e2(al);
        vec![ae, be * r[1], be * r[2]]
    }

    pub fn sheet(&self, n: usize, k: usize) -> HomotopySheet {
        HomotopySheet::from_fns(k, n, |_, _| vec![], |e, t| self.a(e, t))
    }

    /// Largest grid error of a solved sheet against the exact `b`.
    pub fn error(&self, b: &crate::path::BSheet) -> f64 {
        let (k1, n1, _) = b.dim();
        let mut worst: f64 = 0.0;
        for e in 0..k1 {
            for i in 0..n1 {
                let ex = self.b(e as f64 / (k1 - 1) as f64, i as f64 / (n1 - 1) as f64);
                for j in 0..3 {
                    worst = worst.max((b[(e, i, j)] - ex[j]).abs());
                }
            }
        }
        worst
    }
}

/// `a(eps, t) = (1 + eps) sin(pi t)` on the abelian rank-one algebra;
/// `b(eps, 1) = 2 / pi`.
pub fn abelian_sheet(n: usize, k: usize) -> (ChartedAlgebroid, HomotopySheet) {
    let alg = ChartedAlgebroid::lie_algebra(1, &[]).expect("abelian");
    let sheet = HomotopySheet::from_fns(k, n, |_, _| vec![], |e, t| vec![(PI * t).sin() * (1.0 + e)]);
    (alg, sheet)
}

/// `gamma(eps, t) = (tau, eps sin^2(pi tau))` in `TR^2` with `a = d_t gamma`.
pub fn tangent_sheet(n: usize, k: usize) -> (ChartedAlgebroid, HomotopySheet) {
    let alg = ChartedAlgebroid::tangent(2);
    let sheet = HomotopySheet::from_fns(
        k,
        n,
        |e, t| {
            let tau = DefaultTau.value(t);
            vec![tau, e * (PI * tau).sin().powi(2)]
        },
        |e, t| {
            let tau = DefaultTau.value(t);
            let d = DefaultTau.derivative(t);
            vec![d, e * PI * (2.0 * PI * tau).sin() * d]
        },
    );
    (alg, sheet)
}

/// `Gamma^1_{11} = x1` on `TR^2`.
pub fn tangent_connection(alg: &ChartedAlgebroid) -> ChartConnection {
    ChartConnection::new(alg, vec![(0, 0, 0, crate::expr::Expr::var("x1"))]).expect("connection")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn so3_a_matches_numerical_derivative_of_g() {
        // d_t g g^-1 from the matrix exponential, element by element
        let f = So3Family::default();
        let hat = |v: [f64; 3]| nalgebra::Matrix3::new(0.0, -v[2], v[1], v[2], 0.0, -v[0], -v[1], v[0], 0.0);
        let g = |e: f64, t: f64| {
            let [al, be, ..] = f.angles(e, t);
            let ra = nalgebra::Rotation3::from_axis_angle(&nalgebra::Vector3::x_axis(), al);
            let rb = nalgebra::Rotation3::from_axis_angle(&nalgebra::Vector3::y_axis(), be);
            (ra * rb).into_inner()
        };
        let (e, t, h) = (0.4, 0.3, 1e-6);
        let dt = (g(e, t + h) - g(e, t - h)) / (2.0 * h) * g(e, t).transpose();
        let de = (g(e + h, t) - g(e - h, t)) / (2.0 * h) * g(e, t).transpose();
        let a = f.a(e, t);
        let b = f.b(e, t);
        assert!((dt - hat([a[0], a[1], a[2]])).norm() < 1e-8);
        assert!((de - hat([b[0], b[1], b[2]])).norm() < 1e-8);
    }
}

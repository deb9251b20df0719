//! Cross-module check suites: the two-route Poissonization comparison on
//! random candidates, and the single-entry mutation fixtures of every axiom
//! check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebroid::{check_axioms, ChartedAlgebroid};
use crate::contact::{Convention, ContactGroupoidChart};
use crate::expr::Expr;
use crate::fixtures::tangent_sheet;
use crate::groupoid::{torsor_check, Bibundle, Cocycle, Coefficients, FiniteGroupoid, Homomorphism, RightAction, WeinsteinModel, morita_check};
use crate::jacobi::{sphere_family_chart, ContactChart, JacobiChart};
use crate::path::{apath_residual, b_is_apath_residual, homotopy_solve, ChartConnection, SampledPath};
use crate::sample::{halton, max_abs, SampleBox};

/// Mutation threshold shared by all rows.
pub const MUTATION_THRESHOLD: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateRow {
    pub name: String,
    pub mutated: bool,
    pub jacobi_residual: f64,
    pub poisson_residual: f64,
    pub jacobi_ok: bool,
    pub poisson_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoRouteReport {
    pub rows: Vec<CandidateRow>,
    pub tolerance: f64,
    pub disagreements: usize,
    pub valid: usize,
}

fn x(i: usize) -> Expr {
    Expr::var(&format!("x{}", i))
}

/// A valid Jacobi structure from one of four families, conformally twisted.
fn valid_candidate(rng: &mut ChaCha8Rng, points: &[Vec<f64>]) -> (String, JacobiChart) {
    let c1: f64 = rng.gen_range(-0.8..0.8);
    let c2: f64 = rng.gen_range(-0.8..0.8);
    let twist = (x(1) * c1 + x(2) * x(3) * c2).exp();
    let family = rng.gen_range(0..4);
    let (name, j) = match family {
        0 => ("contact R3", ContactChart::standard_r3().to_jacobi(points).expect("contact")),
        1 => {
            let c = rng.gen_range(2.0..3.0);
            let a = (Expr::var("r").sin() + c).pow(&Expr::num(-1.0));
            ("sphere family", sphere_family_chart(&a))
        }
        2 => {
            let k = rng.gen_range(0.5..2.0);
            (
                "linear so(3)*",
                JacobiChart::from_entries(3, &[(0, 1, x(3) * k), (1, 2, x(1) * k), (2, 0, x(2) * k)], vec![Expr::zero(); 3]).expect("so3*"),
            )
        }
        _ => {
            let k = rng.gen_range(0.5..2.0);
            // any bivector on the plane, with a spectator third coordinate
            (
                "planar",
                JacobiChart::from_entries(3, &[(0, 1, (x(1) * x(2) * k).cos() + 1.5)], vec![Expr::zero(); 3]).expect("planar"),
            )
        }
    };
    (name.to_string(), j.conformal_twist(&twist, points).expect("twist"))
}

/// `count` candidates, alternately valid and single-entry mutated; each is
/// judged by `jacobi_residuals` and by the Schouten square of its
/// Poissonization at the same base points (with `s` sampled in `[-1, 1]`).
pub fn two_route_suite(count: usize, seed: u64, tol: f64) -> TwoRouteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = halton(&SampleBox::cube(3, -1.0, 1.0), 40)
        .into_iter()
        .filter(|p| p.iter().map(|v| v * v).sum::<f64>() > 0.09)
        .take(20)
        .collect();
    let mut rows = Vec::with_capacity(count);
    for n in 0..count {
        let (name, mut j) = valid_candidate(&mut rng, &points);
        let mutated = n % 2 == 1;
        if mutated {
            let (mu, nu) = [(0, 1), (1, 2), (0, 2)][rng.gen_range(0..3)];
            let k = rng.gen_range(1..=3);
            let d = rng.gen_range(0.3..1.0);
            if rng.gen_bool(0.5) {
                j = j.with_lambda_entry(mu, nu, &j.lambda()[mu][nu] + x(k) * d);
            } else {
                j = j.with_reeb_entry(mu, &j.reeb()[mu] + x(k) * d);
            }
        }
        let p = j.poissonize();
        let mut jr: f64 = 0.0;
        let mut pr: f64 = 0.0;
        for q in &points {
            jr = jr.max(j.jacobi_residuals(q).expect("eval").max_abs());
            let mut qs = q.clone();
            qs.push(rng.gen_range(-1.0..1.0));
            pr = pr.max(p.schouten_residual(&qs).expect("eval").max_abs());
        }
        rows.push(CandidateRow {
            name,
            mutated,
            jacobi_residual: jr,
            poisson_residual: pr,
            jacobi_ok: jr <= tol,
            poisson_ok: pr <= tol,
        });
    }
    let disagreements = rows.iter().filter(|r| r.jacobi_ok != r.poisson_ok).count();
    let valid = rows.iter().filter(|r| r.jacobi_ok).count();
    TwoRouteReport { rows, tolerance: tol, disagreements, valid }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MutationRow {
    pub operation: String,
    pub fixture: String,
    /// clean fixture value, for reference
    pub baseline: f64,
    pub residual: f64,
    pub flagged: bool,
}

fn row(operation: &str, fixture: &str, baseline: f64, residual: f64) -> MutationRow {
    MutationRow {
        operation: operation.into(),
        fixture: fixture.into(),
        baseline,
        residual,
        flagged: residual > MUTATION_THRESHOLD,
    }
}

/// Every axiom check against its single-entry mutation. Discrete checks
/// report the number of violations as the residual.
pub fn mutation_suite() -> Vec<MutationRow> {
    let mut out = Vec::new();
    let pts2 = halton(&SampleBox::cube(2, -1.0, 1.0), 20);
    let pts3: Vec<Vec<f64>> = halton(&SampleBox::cube(3, -1.0, 1.0), 30)
        .into_iter()
        .filter(|p| p.iter().map(|v| v * v).sum::<f64>() > 0.09)
        .take(20)
        .collect();

    // algebroid residuals
    let t2 = ChartedAlgebroid::tangent(2);
    let base = check_axioms(&t2, &pts2, 4, 1).expect("axioms").max();
    let m = check_axioms(&t2.with_structure_entry(0, 1, 0, Expr::one()), &pts2, 4, 1).expect("axioms").max();
    out.push(row("algebroid axioms", "tangent R2, c^1_12 += 1", base, m));
    let m = check_axioms(&t2.with_anchor_entry(0, 0, Expr::one() + x(2)), &pts2, 4, 1).expect("axioms").max();
    out.push(row("algebroid axioms", "tangent R2, rho^1_1 = 1 + x2", base, m));
    let so3 = ChartedAlgebroid::so3();
    let base = check_axioms(&so3, &[vec![]], 4, 1).expect("axioms").max();
    let m = check_axioms(&so3.with_structure_entry(0, 1, 0, Expr::one()), &[vec![]], 4, 1).expect("axioms").max();
    out.push(row("algebroid axioms", "so(3), c^1_12 = 1", base, m));

    // Jacobi structures and their Poissonization
    let j = ContactChart::standard_r3().to_jacobi(&pts3).expect("contact");
    let jm = j.with_lambda_entry(0, 2, x(1));
    let base = j.max_residual(&pts3).expect("eval");
    out.push(row("jacobi residuals", "contact R3, Lambda^13 = x1", base, jm.max_residual(&pts3).expect("eval")));
    let ps = |c: &JacobiChart| {
        let p = c.poissonize();
        pts3.iter()
            .map(|q| {
                let mut q = q.clone();
                q.push(0.2);
                p.schouten_residual(&q).expect("eval").max_abs()
            })
            .fold(0.0, f64::max)
    };
    out.push(row("poissonized schouten", "contact R3, Lambda^13 = x1", ps(&j), ps(&jm)));
    let ja = j.jacobi_algebroid();
    let base = check_axioms(&ja, &pts3, 3, 2).expect("axioms").max();
    let m = check_axioms(&jm.jacobi_algebroid(), &pts3, 3, 2).expect("axioms").max();
    out.push(row("jacobi algebroid axioms", "contact R3, Lambda^13 = x1", base, m));
    let ct = ContactChart::standard_r3();
    let bad = ContactChart::new(ct.coords().to_vec(), vec![-x(2), Expr::zero(), Expr::one() + x(1) * 0.5]).expect("chart");
    let def = |c: &ContactChart| {
        pts3.iter()
            .map(|q| {
                let (a, b, d) = c.defining_residuals(&j, q).expect("eval");
                a.max(b).max(d)
            })
            .fold(0.0, f64::max)
    };
    out.push(row("contact defining relations", "theta_3 = 1 + x1/2 against the dz - y dx structure", def(&ct), def(&bad)));
    let sph = sphere_family_chart(&(Expr::var("r").sin() + 2.0).pow(&Expr::num(-1.0)));
    let base = sph.max_residual(&pts3).expect("eval");
    let m = sph.with_reeb_entry(0, x(2)).max_residual(&pts3).expect("eval");
    out.push(row("jacobi residuals", "sphere family, E^1 = x2", base, m));

    // paths and homotopies
    let a_fn = |t: f64| vec![(std::f64::consts::PI * t).sin(), 1.0];
    let p = SampledPath::lift(&t2, &[0.1, 0.2], 200, a_fn).expect("lift");
    let base = apath_residual(&t2, &p).expect("residual");
    let mut q = p.clone();
    for (i, mut r) in q.base.rows_mut().into_iter().enumerate() {
        r[0] += 0.2 * (std::f64::consts::PI * i as f64 / 200.0).sin();
    }
    out.push(row("A-path residual", "lifted path, base x1 += 0.2 sin(pi t)", base, apath_residual(&t2, &q).expect("residual")));
    let (alg, sheet) = tangent_sheet(201, 50);
    let flat = ChartConnection::flat();
    let b = homotopy_solve(&alg, &sheet, &flat).expect("solve");
    let base = b_is_apath_residual(&alg, &sheet, &b).expect("residual");
    let mut bad = sheet.clone();
    let (k1, n1, _) = bad.base.dim();
    for e in 0..k1 {
        for i in 0..n1 {
            bad.base[(e, i, 0)] += 0.3 * (e as f64 / (k1 - 1) as f64) * (std::f64::consts::PI * i as f64 / (n1 - 1) as f64).sin();
        }
    }
    out.push(row("b is an A-path", "tangent sheet, base x1 corrupted in eps", base, b_is_apath_residual(&alg, &bad, &b).expect("residual")));

    // finite groupoids
    let z3 = FiniteGroupoid::cyclic(3);
    let count = |g: &FiniteGroupoid| g.axiom_check().violations.len() as f64;
    out.push(row("groupoid axioms", "Z3 with 1 * 1 = 0", count(&z3), count(&z3.with_product_entry(1, 1, 0))));
    let z2 = FiniteGroupoid::z2();
    let unit = RightAction::on_arrows(&z2);
    let fails = |r: bool| if r { 0.0 } else { 1.0 };
    let base = fails(torsor_check(&z2, &unit, &[0, 0], 1).pass);
    let trivial = RightAction { moment: vec![0], table: vec![Some(0), Some(0)] };
    out.push(row("torsor check", "Z2 acting trivially on a point", base, fails(torsor_check(&z2, &trivial, &[0], 1).pass)));
    let pt = FiniteGroupoid::point();
    let id = Bibundle::identity(&z2);
    let e = Bibundle::of_homomorphism(&pt, &z2, &Homomorphism { objects: vec![0], arrows: vec![0] });
    out.push(row("morita check", "point -> Z2 homomorphism bibundle", fails(morita_check(&z2, &z2, &id).pass), fails(morita_check(&pt, &z2, &e).pass)));
    let mut good = Cocycle::zero(Coefficients::Cyclic(3));
    good.values.insert((1, 2), 1);
    good.values.insert((2, 1), 1);
    good.values.insert((2, 2), 1);
    let mut bad = good.clone();
    bad.values.insert((1, 2), 0);
    let v = |c: &Cocycle| c.violations(&z3).expect("cyclic").len() as f64;
    out.push(row("cocycle identity", "Z3 carry cocycle with c(1,2) = 0", v(&good), v(&bad)));
    let w = WeinsteinModel::z2_bz2();
    let mut wm = w.clone();
    wm.m_arrows[5] = 1;
    out.push(row("weinstein suite", "Gamma with m((1,-1),(1,-1)) = (1,-1)", fails(w.axiom_suite().pass), fails(wm.axiom_suite().pass)));

    // contact groupoid
    let c = ContactGroupoidChart::standard_r3();
    let cm = c.without_f_factor();
    let base = c.multiplicativity_residual(Convention::ScaleSecond, 100, 11).expect("eval");
    out.push(row("contact multiplicativity", "R3 groupoid with the f factor dropped", base, cm.multiplicativity_residual(Convention::ScaleSecond, 100, 11).expect("eval")));
    let h = |g: &ContactGroupoidChart| g.homogeneous_omega_residual(Convention::ScaleSecond, 30, 12).expect("eval").0;
    out.push(row("homogeneous multiplicativity", "R3 groupoid with the f factor dropped", h(&c), h(&cm)));
    out
}

/// Largest clean-fixture value among the mutation rows.
pub fn worst_baseline(rows: &[MutationRow]) -> f64 {
    max_abs(&rows.iter().map(|r| r.baseline).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_two_route_run_agrees() {
        let r = two_route_suite(8, 3, 1e-8);
        assert_eq!(r.disagreements, 0, "{:?}", r.rows);
        assert_eq!(r.valid, 4);
    }

    #[test]
    fn clean_fixtures_pass_and_mutations_are_flagged() {
        let rows = mutation_suite();
        for r in &rows {
            assert!(r.flagged, "{:?}", r);
            assert!(r.baseline <= MUTATION_THRESHOLD, "{:?}", r);
        }
    }
}

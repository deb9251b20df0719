//! The ten acceptance criteria at their pinned tolerances. Each prints one
//! `PASS`/`FAIL` line; the final assertion allows only the divergences listed
//! in `KNOWN_DIVERGENCES`, and each of those must fail in exactly the analysed
//! way (see README, "Known divergences").

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use alglab_cli::{run, Command, GroupoidCheck, Range, RunConfig};
use alglab_core::algebroid::ChartedAlgebroid;
use alglab_core::contact::{ContactGroupoidChart, Convention};
use alglab_core::correspondence::{from_poissonization, r_functional, to_poissonization};
use alglab_core::fixtures::{abelian_sheet, tangent_connection, tangent_sheet, So3Family};
use alglab_core::groupoid::*;
use alglab_core::jacobi::{ContactChart, JacobiChart};
use alglab_core::monodromy::{symplectic_area, SphereFamily};
use alglab_core::path::*;
use alglab_core::suites::{mutation_suite, two_route_suite, MUTATION_THRESHOLD};

/// Criteria expected to fail, with the reason recorded in the README.
const KNOWN_DIVERGENCES: &[usize] = &[3];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("pool").install(f)
}

fn max_abs_diff(a: &ndarray::Array2<f64>, b: &ndarray::Array2<f64>) -> f64 {
    (a - b).iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn criterion_1() -> Outcome {
    let c = RunConfig {
        command: Some(Command::ScanMonodromy),
        a: Some("1/(sin(r)+2)".into()),
        range: Some(Range { lo: 0.1, hi: 20.0 }),
        grid: Some("2000".parse().unwrap()),
        ..Default::default()
    };
    let (rep, dt) = timed(|| single_threaded(|| run(&c).expect("scan")));
    let (p, j) = (rep.verdict["poisson"].clone(), rep.verdict["jacobi"].clone());
    outcome(p == false && j == true && dt < Duration::from_secs(5), format!("poisson_integrable={} jacobi_integrable={} in {:.2?}", p, j, dt))
}

fn criterion_2() -> Outcome {
    let fam = SphereFamily::default_family();
    let ((gap, unit), dt) = timed(|| {
        let mut gap = 0.0f64;
        for i in 0..20 {
            let r = 0.1 + 19.9 * i as f64 / 19.0;
            // closed form written out here, independent of the crate
            let exact = 4.0 * PI * r * (r.sin() + 2.0);
            let q = symplectic_area(&fam, r).unwrap().quadrature;
            gap = gap.max((q - exact).abs() / exact);
        }
        let one = SphereFamily::parse("1").unwrap();
        let a1 = symplectic_area(&one, 1.0).unwrap().quadrature;
        (gap, (a1 - 4.0 * PI).abs() / (4.0 * PI))
    });
    outcome(gap <= 1e-6 && unit <= 1e-6 && dt < Duration::from_secs(2), format!("max relative gap {:.2e} at 20 radii, A(1) gap {:.2e}, {:.2?}", gap, unit, dt))
}

/// The literal sub-check is expected to fail: the analysed composite at
/// `(1,1,1,-1)` is the coboundary `x2 x3 = 1`, i.e. the identity `(-1,1)`.
fn criterion_3() -> (Outcome, bool) {
    let ((z, b, strict), dt) = timed(|| {
        let z = run(&RunConfig { command: Some(Command::Groupoid), fixture: Some("z2bz2".into()), check: Some(GroupoidCheck::Pentagon), ..Default::default() }).unwrap();
        let b = run(&RunConfig { command: Some(Command::Groupoid), fixture: Some("bz2".into()), check: Some(GroupoidCheck::Pentagon), ..Default::default() }).unwrap();
        let strict = WeinsteinModel::z2_bz2_with(|_, _, _| 0).pentagon_all().unwrap();
        (z, b, strict)
    });
    let lines: Vec<String> = z.verdict["pentagon"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
    let row = lines.iter().find(|l| l.starts_with("(1,1,1,-1)")).cloned().unwrap_or_default();
    let literal = row == "(1,1,1,-1) → (-1,-1) expected id (-1,1): NONTRIVIAL";
    let bz2_trivial = b.verdict["pentagon_nontrivial"] == 0 && b.checks.iter().all(|c| c.pass);
    let strict_trivial = strict.len() == 16 && strict.iter().all(|d| d.trivial);
    let obstruction = z.verdict["pentagon_nontrivial"].as_u64().unwrap_or(0) > 0;
    let pass = literal && bz2_trivial && strict_trivial && dt < Duration::from_secs(1);
    let analysed = !literal && row == "(1,1,1,-1) → (-1,1) expected id (-1,1): trivial" && obstruction && bz2_trivial && strict_trivial;
    (
        outcome(
            pass,
            format!(
                "row \"{}\"; literal (-1,-1) sub-check {}; {} nontrivial tuples; BZ2 and strict Gamma identity: {} {}; {:.2?}",
                row,
                if literal { "holds" } else { "does not hold" },
                z.verdict["pentagon_nontrivial"],
                bz2_trivial,
                strict_trivial,
                dt
            ),
        ),
        analysed,
    )
}

fn criterion_4() -> Outcome {
    let ((e201, ratio, defect), dt) = timed(|| {
        let alg = ChartedAlgebroid::so3();
        let fam = So3Family::default();
        let flat = ChartConnection::flat();
        let err = |n: usize| fam.error(&homotopy_solve(&alg, &fam.sheet(n, n), &flat).unwrap());
        let e201 = err(201);
        let ratio = err(100) / err(200);
        let (ab, sh) = abelian_sheet(201, 201);
        let defect = equivalence_check(&ab, &sh, &flat, None).unwrap().defect;
        (e201, ratio, defect)
    });
    let pass = e201 <= 1e-3 && (3.0..=5.0).contains(&ratio) && (defect - 2.0 / PI).abs() <= 1e-3 && dt < Duration::from_secs(10);
    outcome(pass, format!("so(3) error {:.2e} at 201, ratio {:.3}, abelian defect {:.6} (2/pi = {:.6}), {:.2?}", e201, ratio, defect, 2.0 / PI, dt))
}

fn criterion_5() -> Outcome {
    let (alg, sh) = tangent_sheet(201, 201);
    let d = connection_independence_test(&alg, &sh, &ChartConnection::flat(), &tangent_connection(&alg)).unwrap();
    outcome(d <= 5e-3, format!("max b difference {:.2e}", d))
}

fn criterion_6() -> Outcome {
    let rep = two_route_suite(50, 2026, 1e-8);
    let mutated = rep.rows.iter().filter(|r| r.mutated).count();
    outcome(
        rep.rows.len() == 50 && mutated == 25 && rep.disagreements == 0,
        format!("50 candidates ({} mutated), {} valid, {} disagreements", mutated, rep.valid, rep.disagreements),
    )
}

fn contact_jacobi() -> JacobiChart {
    ContactChart::standard_r3().to_jacobi(&[vec![0.1, 0.2, 0.3]]).unwrap()
}

fn lifted(j: &JacobiChart, x0: &[f64], n: usize, c: [f64; 4]) -> SampledPath {
    SampledPath::lift(&j.jacobi_algebroid(), x0, n, move |t| {
        let w = DefaultTau.derivative(t);
        vec![c[0] * w, c[1] * w, c[2] * w * (PI * t).sin(), c[3] * w * t]
    })
    .unwrap()
}

fn criterion_7() -> Outcome {
    let j = contact_jacobi();
    let p = lifted(&j, &[0.2, -0.1, 0.3], 400, [0.6, -0.4, 0.3, 0.5]);
    let q = to_poissonization(&j, &p, 0.7).unwrap();
    let back = from_poissonization(&j, &q, 1e-12).unwrap();
    let round = max_abs_diff(&back.path.fiber, &p.fiber).max(max_abs_diff(&back.path.base, &p.base)).max((back.s - 0.7).abs());
    let x1: Vec<f64> = p.base.row(400).to_vec();
    let p2 = lifted(&j, &x1, 400, [-0.2, 0.5, 0.0, -0.9]);
    let pq = concatenate(&p, &p2, 1e-12).unwrap();
    let rr = |x: &SampledPath| r_functional(&j, x).unwrap();
    let additivity = (rr(&pq) - rr(&p) - rr(&p2)).abs();
    let sh = HomotopySheet::rescaling(&p, &DefaultTau, 100);
    let eq = equivalence_check(&j.jacobi_algebroid(), &sh, &ChartConnection::flat(), None).unwrap();
    let invariance = (rr(&sh.slice(0)) - rr(&sh.slice(100))).abs();
    outcome(
        round <= 1e-12 && additivity <= 1e-8 && eq.equivalent && invariance <= 1e-3,
        format!("round trip {:.1e}, r additivity {:.1e}, r invariance {:.1e} on an equivalent sheet", round, additivity, invariance),
    )
}

fn criterion_8() -> Outcome {
    let rep = run(&RunConfig { command: Some(Command::ContactCheck), fixture: Some("contact-r3".into()), samples: Some(100), ..Default::default() }).unwrap();
    let c = ContactGroupoidChart::standard_r3();
    let m = c.convention_search(100, 0, 1e-9).unwrap();
    let res = match m.convention {
        Some(Convention::ScaleFirst) => m.scale_first,
        Some(Convention::ScaleSecond) => m.scale_second,
        None => f64::INFINITY,
    };
    let d2 = rep.check("d^2 theta").unwrap().value;
    outcome(res <= 1e-9 && d2 == 0.0, format!("selected {:?}, residual {:.2e} at 100 samples, d^2 = {}", m.convention, res, d2))
}

fn library() -> Vec<FiniteGroupoid> {
    vec![
        FiniteGroupoid::point(),
        FiniteGroupoid::z2(),
        FiniteGroupoid::cyclic(3),
        FiniteGroupoid::pair(2),
        FiniteGroupoid::pair(3),
        FiniteGroupoid::z2().direct_product(&FiniteGroupoid::pair(2)),
    ]
}

fn criterion_9() -> Outcome {
    let ((ok, detail), dt) = timed(|| {
        let lib = library();
        let n = lib.len();
        let iso = |g: &FiniteGroupoid, h: &FiniteGroupoid, a: &Bibundle, b: &Bibundle| two_morphism_search(g, h, a, b, DEFAULT_SEARCH_BUDGET).unwrap().is_some();
        let mut rel: Vec<Vec<Option<Bibundle>>> = vec![vec![None; n]; n];
        let mut largest = 0;
        for i in 0..n {
            for j in 0..n {
                for f in all_homomorphisms(&lib[i], &lib[j], DEFAULT_SEARCH_BUDGET).unwrap() {
                    let e = Bibundle::of_homomorphism(&lib[i], &lib[j], &f);
                    if morita_check(&lib[i], &lib[j], &e).pass {
                        rel[j][i] = Some(e.flip(&lib[i], &lib[j]));
                        rel[i][j] = Some(e);
                        break;
                    }
                }
            }
        }
        let mut ok = true;
        loop {
            let mut grew = false;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        if rel[i][k].is_none() {
                            if let (Some(a), Some(b)) = (&rel[i][j], &rel[j][k]) {
                                let c = bibundle_compose(&lib[i], &lib[j], &lib[k], a, b).unwrap();
                                ok &= morita_check(&lib[i], &lib[k], &c).pass;
                                rel[i][k] = Some(c);
                                grew = true;
                            }
                        }
                    }
                }
            }
            if !grew {
                break;
            }
        }
        let mut pairs = 0;
        for i in 0..n {
            ok &= rel[i][i].is_some();
            let id = Bibundle::identity(&lib[i]);
            let idid = bibundle_compose(&lib[i], &lib[i], &lib[i], &id, &id).unwrap();
            ok &= iso(&lib[i], &lib[i], &idid, &id);
            for j in 0..n {
                ok &= rel[i][j].is_some() == rel[j][i].is_some();
                if let Some(e) = &rel[i][j] {
                    largest = largest.max(e.left.carrier());
                    pairs += 1;
                }
            }
        }
        // expected classes {pt, pair2, pair3}, {Z2, Z2 x pair2}, {Z3}
        let class = |i: usize, j: usize| rel[i][j].is_some();
        ok &= class(0, 3) && class(0, 4) && class(1, 5) && !class(0, 1) && !class(1, 2) && !class(0, 2);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            ok &= morita_bibundle_search(&lib[i], &lib[j], 3, DEFAULT_SEARCH_BUDGET).unwrap().is_none();
        }
        // associativity of composition up to 2-isomorphism on Z4 -> Z2 -> Z4 -> Z2
        let (z2, z4) = (FiniteGroupoid::z2(), FiniteGroupoid::cyclic(4));
        let f = &all_homomorphisms(&z4, &z2, DEFAULT_SEARCH_BUDGET).unwrap()[1];
        let g = &all_homomorphisms(&z2, &z4, DEFAULT_SEARCH_BUDGET).unwrap()[1];
        let (e1, e2) = (Bibundle::of_homomorphism(&z4, &z2, f), Bibundle::of_homomorphism(&z2, &z4, g));
        let left = bibundle_compose(&z4, &z4, &z2, &bibundle_compose(&z4, &z2, &z4, &e1, &e2).unwrap(), &e1).unwrap();
        let right = bibundle_compose(&z4, &z2, &z2, &e1, &bibundle_compose(&z2, &z4, &z2, &e2, &e1).unwrap()).unwrap();
        ok &= iso(&z4, &z2, &left, &right);
        ok &= largest <= 64;
        (ok, format!("{} related pairs, largest carrier {}", pairs, largest))
    });
    outcome(ok && dt < Duration::from_secs(30), format!("{}, {:.2?}", detail, dt))
}

fn criterion_10() -> Outcome {
    let rows = mutation_suite();
    let unflagged: Vec<&str> = rows.iter().filter(|r| !(r.flagged && r.residual > MUTATION_THRESHOLD)).map(|r| r.operation.as_str()).collect();
    let worst = rows.iter().map(|r| r.baseline).fold(0.0f64, f64::max);
    let least = rows.iter().map(|r| r.residual).fold(f64::INFINITY, f64::min);
    outcome(
        unflagged.is_empty() && worst <= MUTATION_THRESHOLD,
        format!("{} mutation fixtures, smallest mutated residual {:.2e}, worst clean baseline {:.2e}, unflagged {:?}", rows.len(), least, worst, unflagged),
    )
}

// runs without the libtest harness so the criterion lines are never captured
fn main() {
    let (c3, c3_analysed) = criterion_3();
    let results = vec![
        criterion_1(),
        criterion_2(),
        c3,
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
    ];
    let mut unexpected = vec![];
    for (i, r) in results.iter().enumerate() {
        let n = i + 1;
        println!("criterion {:2}: {} - {}", n, if r.pass { "PASS" } else { "FAIL" }, r.detail);
        if r.pass == KNOWN_DIVERGENCES.contains(&n) {
            unexpected.push(n);
        }
    }
    if !c3_analysed {
        eprintln!("criterion 3 no longer fails in the analysed way");
        std::process::exit(1);
    }
    if !unexpected.is_empty() {
        eprintln!("criteria with unexpected outcome: {:?}", unexpected);
        std::process::exit(1);
    }
    println!("acceptance: {} of 10 pass, divergences {:?} as analysed", results.iter().filter(|r| r.pass).count(), KNOWN_DIVERGENCES);
}

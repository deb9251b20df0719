//! One function per subcommand. Each builds its check rows and verdict
//! block; `run` stamps the command and config echo afterwards.

use std::fmt::Display;

use alglab_core::algebroid::{check_axioms, ChartedAlgebroid};
use alglab_core::contact::{contact_report, d_two_form, Convention, ContactGroupoidChart};
use alglab_core::correspondence::{homotopy_correspondence_check, poissonize_sheet};
use alglab_core::fixtures::{tangent_connection, So3Family};
use alglab_core::groupoid::{FiniteGroupoid, WeinsteinModel};
use alglab_core::jacobi::{dform, sphere_family_chart, ContactChart, JacobiChart};
use alglab_core::monodromy::{area_derivative_by_quadrature, integrability_verdicts, symplectic_area, ScanGrid, DEFAULT_THRESHOLD};
use alglab_core::path::{
    b_is_apath_residual, connection_independence_test, default_equivalence_tolerance, homotopy_solve,
    verdict_from_b, ChartConnection, HomotopySheet,
};
use alglab_core::sample::{halton, SampleBox, DEFAULT_SAMPLES};
use serde_json::{json, Map, Value};

use crate::fixtures;
use crate::report::{CheckRow, VerdictReport};
use crate::sheet_csv::{read_sheet, write_sheet};
use crate::{read_file, GroupoidCheck, InputError, RunConfig};

/// Residual tolerance of the structure checks when `--tol` is absent.
pub const STRUCTURE_TOL: f64 = 1e-8;
/// Tolerance of the contact groupoid identities when `--tol` is absent.
pub const CONTACT_TOL: f64 = 1e-9;
/// Relative tolerance of the leaf-area comparison.
pub const AREA_TOL: f64 = 1e-6;
/// Relative tolerance of the quadrature derivative of the leaf area.
pub const DERIVATIVE_TOL: f64 = 1e-4;
/// Radii sampled by the area comparison.
pub const AREA_RADII: usize = 20;
/// Bound on the difference of b-sheets for two connections.
pub const CONNECTION_TOL: f64 = 5e-3;
/// Default `N = K` of the built-in sheets.
pub const DEFAULT_GRID: usize = 201;
/// Default number of contact samples.
pub const CONTACT_SAMPLES: usize = 100;

trait OrInput<T> {
    fn input(self) -> Result<T, InputError>;
}

impl<T, E: Display> OrInput<T> for Result<T, E> {
    fn input(self) -> Result<T, InputError> {
        self.map_err(|e| InputError::Invalid(e.to_string()))
    }
}

fn obj(pairs: Vec<(&str, Value)>) -> Map<String, Value> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Text of `--input`, else of `--fixture`, with a label for messages.
fn source_text(cfg: &RunConfig) -> Result<Option<(String, String)>, InputError> {
    if let Some(p) = &cfg.input {
        return Ok(Some((p.display().to_string(), read_file(p)?)));
    }
    if let Some(f) = &cfg.fixture {
        return Ok(Some((f.clone(), fixtures::text(f)?.to_string())));
    }
    Ok(None)
}

fn require_source(cfg: &RunConfig, what: &str) -> Result<(String, String), InputError> {
    source_text(cfg)?.ok_or_else(|| InputError::invalid(format!("{} needs --input or --fixture", what)))
}

/// Parses JSON for its shape, keeping serde's line/column in the message.
fn json_value(label: &str, text: &str) -> Result<Value, InputError> {
    serde_json::from_str(text).map_err(|e| InputError::Json(format!("{}: {}", label, e)))
}

fn sample_grid(n: usize, seed: u64) -> Option<String> {
    Some(format!("samples={} seed={}", n, seed))
}

/// Halton points in `[-1, 1]^m` away from the origin; a single empty point
/// over a zero-dimensional base.
fn base_points(m: usize, n: usize) -> Vec<Vec<f64>> {
    if m == 0 {
        return vec![vec![]];
    }
    halton(&SampleBox::cube(m, -1.0, 1.0), 2 * n)
        .into_iter()
        .filter(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt() > 0.3)
        .take(n)
        .collect()
}

// ---------------------------------------------------------------------------
// check-algebroid

pub fn check_algebroid(cfg: &RunConfig) -> Result<VerdictReport, InputError> {
    let (label, text) = require_source(cfg, "check-algebroid")?;
    json_value(&label, &text)?;
    let alg = fixtures::algebroid(&text)?;
    let n = cfg.samples.unwrap_or(DEFAULT_SAMPLES);
    let tol = cfg.tol.unwrap_or(STRUCTURE_TOL);
    let pts = base_points(alg.base_dim(), n);
    let rep = check_axioms(&alg, &pts, 3, cfg.seed()).input()?;
    let g = sample_grid(pts.len(), cfg.seed());
    let checks = vec![
        CheckRow::new("leibniz", "algebroid", rep.leibniz, tol, g.clone()),
        CheckRow::new("jacobi identity", "algebroid", rep.jacobi, tol, g.clone()),
        CheckRow::new("anchor is a morphism", "algebroid", rep.anchor_morphism, tol, g),
    ];
    let lie = checks.iter().all(|c| c.pass);
    Ok(VerdictReport::new(
        checks,
        obj(vec![
            ("lie_algebroid", json!(lie)),
            ("base_dim", json!(alg.base_dim())),
            ("rank", json!(alg.rank())),
            ("points", json!(rep.points)),
            ("skipped", json!(rep.skipped)),
        ]),
    ))
}

// ---------------------------------------------------------------------------
// Jacobi inputs

enum JacobiInput {
    Jacobi(JacobiChart),
    Contact(ContactChart, JacobiChart),
    Family(JacobiChart),
}

impl JacobiInput {
    fn chart(&self) -> &JacobiChart {
        match self {
            JacobiInput::Jacobi(j) | JacobiInput::Contact(_, j) | JacobiInput::Family(j) => j,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            JacobiInput::Jacobi(_) => "jacobi",
            JacobiInput::Contact(..) => "contact",
            JacobiInput::Family(..) => "sphere family",
        }
    }
}

/// Jacobi JSON, contact JSON (`theta`) or a sphere family (`a`).
fn jacobi_input(label: &str, text: &str, pts: &dyn Fn(usize) -> Vec<Vec<f64>>) -> Result<JacobiInput, InputError> {
    let v = json_value(label, text)?;
    if v.get("theta").is_some() {
        let c = fixtures::contact(text)?;
        let j = c.to_jacobi(&pts(c.coords().len())).input()?;
        Ok(JacobiInput::Contact(c, j))
    } else if v.get("a").is_some() {
        let scan = fixtures::family_scan(text)?;
        let fam = fixtures::family(&scan)?;
        Ok(JacobiInput::Family(sphere_family_chart(fam.a())))
    } else {
        Ok(JacobiInput::Jacobi(JacobiChart::from_json(text).input()?))
    }
}

fn poisson_points(m: usize, n: usize) -> Vec<Vec<f64>> {
    halton(&SampleBox::cube(m + 1, -1.0, 1.0), 2 * n)
        .into_iter()
        .filter(|p| p[..m].iter().map(|v| v * v).sum::<f64>().sqrt() > 0.3)
        .take(n)
        .collect()
}

/// `max |[P, P]|` and `max |P + L_{d/ds} P|` for the Poissonization.
fn poisson_residuals(j: &JacobiChart, n: usize) -> Result<(f64, f64), InputError> {
    let p = j.poissonize();
    let (mut sch, mut hom) = (0.0f64, 0.0f64);
    for x in poisson_points(j.dim(), n) {
        sch = sch.max(p.schouten_residual(&x).input()?.max_abs());
        for row in p.homogeneity_residual(&x).input()? {
            for v in row {
                hom = hom.max(v.abs());
            }
        }
    }
    Ok((sch, hom))
}

// ---------------------------------------------------------------------------
// check-jacobi

pub fn check_jacobi(cfg: &RunConfig) -> Result<VerdictReport, InputError> {
    let (label, text) = require_source(cfg, "check-jacobi")?;
    let n = cfg.samples.unwrap_or(DEFAULT_SAMPLES);
    let tol = cfg.tol.unwrap_or(STRUCTURE_TOL);
    let input = jacobi_input(&label, &text, &|m| base_points(m, n))?;
    let j = input.chart();
    let pts = base_points(j.dim(), n);
    let (mut sch, mut lie) = (0.0f64, 0.0f64);
    for x in &pts {
        let r = j.jacobi_residuals(x).input()?;
        sch = sch.max(r.schouten.max_abs());
        for row in &r.lie {
            for v in row {
                lie = lie.max(v.abs());
            }
        }
    }
    let (psch, phom) = poisson_residuals(j, n)?;
    // the algebroid check is symbolic and heavier; a few points suffice
    let few: Vec<Vec<f64>> = pts.iter().take(8).cloned().collect();
    let alg = check_axioms(&j.jacobi_algebroid(), &few, 3, cfg.seed()).input()?;
    let g = sample_grid(pts.len(), cfg.seed());
    let mut checks = vec![
        CheckRow::new("[L,L] - 2 E^L", "jacobi", sch, tol, g.clone()),
        CheckRow::new("L_E L", "jacobi", lie, tol, g.clone()),
        CheckRow::new("poissonization [P,P]", "jacobi", psch, tol, g.clone()),
        CheckRow::new("poissonization homogeneity", "jacobi", phom, tol, g.clone()),
        CheckRow::new("jacobi algebroid axioms", "algebroid", alg.max(), tol, sample_grid(few.len(), cfg.seed())),
    ];
    if let JacobiInput::Contact(c, _) = &input {
        let mut worst = 0.0f64;
        for x in &pts {
            let (a, b, d) = c.defining_residuals(j, x).input()?;
            worst = worst.max(a).max(b).max(d);
        }
        checks.push(CheckRow::new("contact defining relations", "jacobi", worst, tol, g));
    }
    let ok = checks.iter().all(|c| c.pass);
    Ok(VerdictReport::new(
        checks,
        obj(vec![("jacobi_structure", json!(ok)), ("kind", json!(input.kind())), ("dim", json!(j.dim()))]),
    ))
}

// ---------------------------------------------------------------------------
// poissonize

pub fn poissonize(cfg: &RunConfig) -> Result<VerdictReport, InputError> {
    let (label, text) = require_source(cfg, "poissonize")?;
    let n = cfg.samples.unwrap_or(DEFAULT_SAMPLES);
    let tol = cfg.tol.unwrap_or(STRUCTURE_TOL);
    let input = jacobi_input(&label, &text, &|m| base_points(m, n))?;
    let j = input.chart();
    let p = j.poissonize();
    let (psch, phom) = poisson_residuals(j, n)?;
    let g = sample_grid(n, cfg.seed());
    let mut checks = vec![
        CheckRow::new("[P,P]", "jacobi", psch, tol, g.clone()),
        CheckRow::new("homogeneity", "jacobi", phom, tol, g),
    ];
    let mut verdict = obj(vec![
        ("poisson", p.chart.to_json()),
        ("homogeneity_coordinate", json!(p.homogeneity.map(|s| s + 1))),
    ]);
    let mut table = None;
    if let Some(path) = &cfg.sheet {
        let file = read_sheet(&read_file(path)?)?;
        let s0 = cfg.s0.or(file.s0).unwrap_or(0.0);
        let img = poissonize_sheet(j, &file.sheet, s0).input()?;
        let v = homotopy_correspondence_check(j, &file.sheet, s0, cfg.tol).input()?;
        let grid = Some(format!("N={},K={}", v.jacobi.n, v.jacobi.k));
        checks.push(CheckRow::condition("equivalence verdicts agree", "correspondence", v.agree, grid));
        verdict.insert("jacobi_side".into(), serde_json::to_value(&v.jacobi).expect("verdict"));
        verdict.insert("poisson_side".into(), serde_json::to_value(&v.poisson).expect("verdict"));
        verdict.insert("s0".into(), json!(s0));
        table = Some(write_sheet(&img, Some(s0)));
    }
    let mut rep = VerdictReport::new(checks, verdict);
    if let Some(t) = table {
        rep = rep.with_table(t);
    }
    Ok(rep)
}

// ---------------------------------------------------------------------------
// path-equiv

enum Oracle {
    None,
    Tangent,
    So3(So3Family),
}

pub fn path_equiv(cfg: &RunConfig) -> Result<VerdictReport, InputError> {
    let n = cfg.grid.map_or(DEFAULT_GRID, |g| g.n);
    let k = cfg.grid.map_or(DEFAULT_GRID, |g| g.k_or_n());
    let (alg, sheet, oracle): (ChartedAlgebroid, HomotopySheet, Oracle) = {
        let (label, text) = require_source(cfg, "path-equiv")?;
        json_value(&label, &text)?;
        let alg = fixtures::algebroid(&text)?;
        match (&cfg.sheet, cfg.fixture.as_deref(), cfg.input.is_some()) {
            (Some(p), _, _) => (alg, read_sheet(&read_file(p)?)?.sheet, Oracle::None),
            (None, Some("tangent2d"), false) => (alg, alglab_core::fixtures::tangent_sheet(n, k).1, Oracle::Tangent),
            (None, Some("so3"), false) => {
                let fam = So3Family::default();
                (alg, fam.sheet(n, k), Oracle::So3(fam))
            }
            _ => return Err(InputError::invalid("path-equiv needs --sheet, or --fixture tangent2d|so3")),
        }
    };
    if sheet.base.dim().2 != alg.base_dim() || sheet.fiber.dim().2 != alg.rank() {
        return Err(InputError::invalid(format!(
            "sheet has {} base and {} fiber columns; the algebroid needs {} and {}",
            sheet.base.dim().2,
            sheet.fiber.dim().2,
            alg.base_dim(),
            alg.rank()
        )));
    }
    let (sn, sk) = (sheet.t_intervals(), sheet.eps_intervals());
    let grid = Some(format!("N={},K={}", sn, sk));
    let flat = ChartConnection::flat();
    let b = homotopy_solve(&alg, &sheet, &flat).input()?;
    let v = verdict_from_b(&sheet, &b, cfg.tol);
    let mut checks = vec![
        CheckRow::new(
            "b(., t) is an A-path in eps",
            "path",
            b_is_apath_residual(&alg, &sheet, &b).input()?,
            default_equivalence_tolerance(sn, sk),
            grid.clone(),
        ),
        CheckRow::new("max |b(eps, 1)|", "path", v.defect, v.tolerance, grid.clone()),
    ];
    match oracle {
        Oracle::Tangent => {
            let d = connection_independence_test(&alg, &sheet, &flat, &tangent_connection(&alg)).input()?;
            checks.push(CheckRow::new("connection independence", "path", d, CONNECTION_TOL, grid.clone()));
        }
        Oracle::So3(fam) => checks.push(CheckRow::new("closed-form b", "path", fam.error(&b), default_equivalence_tolerance(sn, sk), grid.clone())),
        Oracle::None => {}
    }
    let table = write_sheet(&HomotopySheet::new(sheet.base.clone(), b).input()?, None);
    Ok(VerdictReport::new(
        checks,
        obj(vec![
            ("equivalent", json!(v.equivalent)),
            ("defect", json!(v.defect)),
            ("tolerance", json!(v.tolerance)),
            ("default_tolerance", json!(default_equivalence_tolerance(sn, sk))),
            ("n", json!(sn)),
            ("k", json!(sk)),
            ("endpoint_drift", json!(v.endpoint_drift)),
        ]),
    )
    .with_table(table))
}

// ---------------------------------------------------------------------------
// scan-monodromy

pub fn scan_monodromy(cfg: &RunConfig) -> Result<VerdictReport, InputError> {
    let mut scan = match source_text(cfg)? {
        Some((label, text)) => {
            json_value(&label, &text)?;
            fixtures::family_scan(&text)?
        }
        None => fixtures::family_scan(fixtures::MA_DEFAULT)?,
    };
    if let Some(a) = &cfg.a {
        scan.a = a.clone();
    }
    if let Some(r) = cfg.range {
        scan.r_min = r.lo;
        scan.r_max = r.hi;
    }
    if let Some(g) = cfg.grid {
        scan.steps = g.n;
    }
    let fam = fixtures::family(&scan)?;
    let grid = ScanGrid::new(scan.r_min, scan.r_max, scan.steps).input()?;
    let threshold = cfg.threshold.unwrap_or(DEFAULT_THRESHOLD);
    let rep = integrability_verdicts(&fam, &grid, threshold).input()?;
    let tol = cfg.tol.unwrap_or(AREA_TOL);
    let (mut gap, mut dgap) = (0.0f64, 0.0f64);
    let h = 1e-4 * (scan.r_max - scan.r_min).max(1e-3);
    for i in 0..AREA_RADII {
        let r = scan.r_min + (scan.r_max - scan.r_min) * (i as f64 + 0.5) / AREA_RADII as f64;
        gap = gap.max(symplectic_area(&fam, r).input()?.relative_gap);
        let exact = fam.area_derivative(r).input()?;
        let quad = area_derivative_by_quadrature(&fam, r, h.min(0.5 * r)).input()?;
        dgap = dgap.max((quad - exact).abs() / exact.abs().max(1.0));
    }
    let qgrid = Some(format!("{} radii, Gauss-Legendre 64x128", AREA_RADII));
    let checks = vec![
        CheckRow::new("leaf area, quadrature vs closed form", "monodromy", gap, tol, qgrid.clone()),
        CheckRow::new("A'(r), quadrature vs closed form", "monodromy", dgap, DERIVATIVE_TOL, qgrid),
    ];
    let v = &rep.verdicts;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["r", "A", "Aprime", "rN_poisson", "rN_jacobi"]).expect("in-memory csv");
    for row in &rep.rows {
        w.write_record([row.r, row.area, row.darea, row.rn_poisson, row.rn_jacobi].map(|x| x.to_string())).expect("in-memory csv");
    }
    let table = String::from_utf8(w.into_inner().expect("flush")).expect("utf8");
    Ok(VerdictReport::new(
        checks,
        obj(vec![
            ("poisson", json!(v.poisson)),
            ("jacobi", json!(v.jacobi)),
            ("first_Aprime_zero", json!(v.first_aprime_zero)),
            ("threshold", json!(v.threshold)),
            ("poisson_limit", json!(v.poisson_limit)),
            ("jacobi_limit", json!(v.jacobi_limit)),
            ("a", json!(scan.a)),
            ("r_min", json!(scan.r_min)),
            ("r_max", json!(scan.r_max)),
            ("steps", json!(scan.steps)),
            ("note", json!(v.prequantizable_note)),
        ]),
    )
    .with_table(table))
}

// ---------------------------------------------------------------------------
// groupoid

/// `"(x1,x2,x3,x4) → defect expected id identity: NONTRIVIAL|trivial"`.
pub fn pentagon_line(d: &alglab_core::groupoid::PentagonDefect) -> String {
    format!(
        "({}) → {} expected id {}: {}",
        d.objects.join(","),
        d.defect,
        d.identity,
        if d.trivial { "trivial" } else { "NONTRIVIAL" }
    )
}

fn axiom_rows(g: &FiniteGroupoid, checks: &mut Vec<CheckRow>, verdict: &mut Map<String, Value>) {
    let rep = g.axiom_check();
    let grid = Some(format!("{} objects, {} arrows", g.n_objects(), g.n_arrows()));
    checks.push(CheckRow::new("groupoid axioms (violations)", "groupoid", rep.violations.len() as f64, 0.0, grid));
    let shown: Vec<String> = rep.violations.iter().take(10).map(|v| format!("{:?}", v)).collect();
    verdict.insert("violations".into(), json!(shown));
}

pub fn groupoid(cfg: &RunConfig) -> Result<VerdictReport, InputError> {
    let (label, text) = require_source(cfg, "groupoid")?;
    let v = json_value(&label, &text)?;
    let check = cfg.check.unwrap_or(GroupoidCheck::All);
    let mut checks = vec![];
    let mut verdict = Map::new();
    if v.get("m_objects").is_none() {
        if matches!(check, GroupoidCheck::Weinstein | GroupoidCheck::Pentagon) {
            return Err(InputError::invalid(format!("{}: a plain groupoid has no Weinstein structure to check", label)));
        }
        let g = FiniteGroupoid::from_json(&text).input()?;
        axiom_rows(&g, &mut checks, &mut verdict);
        return Ok(VerdictReport::new(checks, verdict));
    }
    let model: WeinsteinModel = fixtures::model(&text)?;
    let g = &model.presentation;
    let grid = Some(format!("{} objects, {} arrows", g.n_objects(), g.n_arrows()));
    if matches!(check, GroupoidCheck::Axioms | GroupoidCheck::All) {
        axiom_rows(g, &mut checks, &mut verdict);
    }
    if matches!(check, GroupoidCheck::Weinstein | GroupoidCheck::All) {
        let r = model.axiom_suite();
        let witness = |w: &Option<String>| w.clone().map_or(Value::Null, Value::String);
        for (name, holds) in [
            ("m is a homomorphism", r.m_homomorphism.is_none()),
            ("i is a homomorphism", r.i_homomorphism.is_none()),
            ("alpha is natural", r.alpha_natural.is_none()),
            ("left unit", r.left_unit),
            ("right unit", r.right_unit),
            ("left inverse", r.left_inverse),
            ("right inverse", r.right_inverse),
            ("identity restrictions", r.identity_restrictions),
        ] {
            checks.push(CheckRow::condition(name, "groupoid", holds, grid.clone()));
        }
        verdict.insert(
            "weinstein".into(),
            json!({
                "m_witness": witness(&r.m_homomorphism),
                "i_witness": witness(&r.i_homomorphism),
                "alpha_witness": witness(&r.alpha_natural),
                "valid_alphas": r.valid_alphas,
                "alpha_cap": r.alpha_cap,
            }),
        );
    }
    if matches!(check, GroupoidCheck::Pentagon | GroupoidCheck::All) {
        let defects = model.pentagon_all().input()?;
        let lines: Vec<String> = defects.iter().map(pentagon_line).collect();
        for d in &defects {
            checks.push(CheckRow::condition(format!("pentagon ({})", d.objects.join(",")), "groupoid", d.trivial, grid.clone()));
        }
        verdict.insert("pentagon".into(), json!(lines));
        verdict.insert("pentagon_nontrivial".into(), json!(defects.iter().filter(|d| !d.trivial).count()));
    }
    Ok(VerdictReport::new(checks, verdict))
}

// ---------------------------------------------------------------------------
// contact-check

/// `max |d(d theta)|` on the groupoid chart at the sample points.
fn d_squared(c: &ContactGroupoidChart, n: usize) -> Result<f64, InputError> {
    let coords = c.coords();
    let dd = d_two_form(coords, &dform(coords, c.theta()));
    let pts = halton(&SampleBox::cube(coords.len(), -1.0, 1.0), n);
    let mut worst = 0.0f64;
    for p in &pts {
        for a in &dd {
            for b in a {
                for e in b {
                    worst = worst.max(e.eval(coords, p).input()?.abs());
                }
            }
        }
    }
    Ok(worst)
}

pub fn contact_check(cfg: &RunConfig) -> Result<VerdictReport, InputError> {
    let (label, text) = match source_text(cfg)? {
        Some(s) => s,
        None => ("contact-r3".into(), fixtures::CONTACT_R3.into()),
    };
    json_value(&label, &text)?;
    let base = fixtures::contact(&text)?;
    let c = ContactGroupoidChart::build(&base).input()?;
    let n = cfg.samples.unwrap_or(CONTACT_SAMPLES);
    let seed = cfg.seed();
    let tol = cfg.tol.unwrap_or(CONTACT_TOL);
    let rep = contact_report(&c, n, seed, tol).input()?;
    let mr = &rep.multiplicativity;
    let (conv, mult) = match rep.convention {
        Some(Convention::ScaleFirst) => (Convention::ScaleFirst, mr.scale_first),
        Some(Convention::ScaleSecond) => (Convention::ScaleSecond, mr.scale_second),
        None if mr.scale_first <= mr.scale_second => (Convention::ScaleFirst, mr.scale_first),
        None => (Convention::ScaleSecond, mr.scale_second),
    };
    let g = sample_grid(n, seed);
    let (id_theta, id_f) = c.identity_section_residuals(n, seed).input()?;
    let (omega, d_omega) = c.homogeneous_omega_residual(conv, n, seed).input()?;
    let best = rep
        .reeb
        .iter()
        .min_by(|a, b| a.lie.max(a.contraction).total_cmp(&b.lie.max(b.contraction)))
        .ok_or_else(|| InputError::invalid("no Reeb candidates"))?;
    let checks = vec![
        CheckRow::new(format!("multiplicativity ({:?})", conv), "contact", mult, tol, g.clone()),
        CheckRow::new("d of the multiplicativity defect", "contact", c.multiplicativity_d_residual(conv, n, seed).input()?, tol, g.clone()),
        CheckRow::new("d^2 theta", "contact", d_squared(&c, n)?, 0.0, g.clone()),
        CheckRow::new("theta on the unit section", "contact", id_theta, tol, g.clone()),
        CheckRow::new("f - 1 on the unit section", "contact", id_f, tol, g.clone()),
        CheckRow::new("homogeneous omega multiplicative", "contact", omega, tol, g.clone()),
        CheckRow::new("d omega", "contact", d_omega, tol, g.clone()),
        CheckRow::new("source is a Jacobi map", "contact", rep.source_jacobi, tol, g.clone()),
        CheckRow::new("target is (-f)-conformal", "contact", rep.target_conformal, tol, g.clone()),
        CheckRow::new(format!("Reeb field ({})", best.name), "contact", best.lie.max(best.contraction), tol, g),
    ];
    Ok(VerdictReport::new(
        checks,
        obj(vec![
            ("convention", serde_json::to_value(rep.convention).expect("convention")),
            ("scale_first_residual", json!(mr.scale_first)),
            ("scale_second_residual", json!(mr.scale_second)),
            ("reeb", serde_json::to_value(&rep.reeb).expect("reeb")),
            ("min_contact_det", json!(c.contact_form_check(n, seed).input()?)),
        ]),
    ))
}

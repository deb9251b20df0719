//! Finite groupoids, actions, Hilsum-Skandalis bibundles, cocycle twists and
//! the associativity data of finite Weinstein groupoid models.
//!
//! Arrows compose as `g h` when `s(g) = t(h)`; then `s(gh) = s(h)` and
//! `t(gh) = t(g)`.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupoidError {
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("index {index} out of range for {what} of size {size}")]
    Index { what: &'static str, index: usize, size: usize },
    #[error("arrows {0} and {1} are not composable")]
    NotComposable(usize, usize),
    #[error("malformed table: {0}")]
    Table(String),
    #[error("search budget of {0} candidates exhausted")]
    Budget(u64),
    #[error("coefficient overflow: {0} leaves the window [{1}, {2}]")]
    Overflow(i64, i64, i64),
    #[error("input is not a principal bibundle: {0}")]
    NotPrincipal(String),
    #[error("json: {0}")]
    Json(String),
}

/// Default number of candidate assignments a search may try.
pub const DEFAULT_SEARCH_BUDGET: u64 = 1_000_000;

/// A finite groupoid `G1 => G0` with a dense multiplication table.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteGroupoid {
    objects: Vec<String>,
    arrows: Vec<String>,
    src: Vec<usize>,
    tgt: Vec<usize>,
    mult: Vec<Option<usize>>,
    unit: Vec<usize>,
    inv: Vec<usize>,
}

/// A violated groupoid law, with the offending arrows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    MissingProduct(usize, usize),
    ProductOnNonComposable(usize, usize),
    ProductEndpoints(usize, usize),
    Associativity(usize, usize, usize),
    UnitEndpoints(usize),
    LeftUnit(usize),
    RightUnit(usize),
    Inverse(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub pass: bool,
    pub violations: Vec<Violation>,
}

impl FiniteGroupoid {
    /// Builds a groupoid from labels and a product function on composable
    /// pairs. Units and inverses are read off the product; laws are not
    /// checked here.
    pub fn from_fn<F>(objects: Vec<String>, arrows: Vec<String>, src: Vec<usize>, tgt: Vec<usize>, product: F) -> Result<FiniteGroupoid, GroupoidError>
    where
        F: Fn(usize, usize) -> usize,
    {
        let n1 = arrows.len();
        if src.len() != n1 || tgt.len() != n1 {
            return Err(GroupoidError::Table("source/target tables must list every arrow".into()));
        }
        for &o in src.iter().chain(&tgt) {
            if o >= objects.len() {
                return Err(GroupoidError::Index { what: "objects", index: o, size: objects.len() });
            }
        }
        let mut mult = vec![None; n1 * n1];
        for g in 0..n1 {
            for h in 0..n1 {
                if src[g] == tgt[h] {
                    let p = product(g, h);
                    if p >= n1 {
                        return Err(GroupoidError::Index { what: "arrows", index: p, size: n1 });
                    }
                    mult[g * n1 + h] = Some(p);
                }
            }
        }
        FiniteGroupoid::from_table(objects, arrows, src, tgt, mult)
    }

    fn from_table(objects: Vec<String>, arrows: Vec<String>, src: Vec<usize>, tgt: Vec<usize>, mult: Vec<Option<usize>>) -> Result<FiniteGroupoid, GroupoidError> {
        let n1 = arrows.len();
        let mut g = FiniteGroupoid { objects, arrows, src, tgt, mult, unit: vec![], inv: vec![] };
        g.unit = (0..g.objects.len())
            .map(|x| {
                (0..n1)
                    .find(|&a| {
                        g.src[a] == x && g.tgt[a] == x && (0..n1).all(|b| g.tgt[b] != x || g.product(a, b) == Some(b))
                    })
                    .ok_or_else(|| GroupoidError::Table(format!("no unit at object {}", g.objects[x])))
            })
            .collect::<Result<_, _>>()?;
        g.inv = (0..n1)
            .map(|a| {
                (0..n1)
                    .find(|&b| g.product(a, b) == Some(g.unit[g.tgt[a]]) && g.product(b, a) == Some(g.unit[g.src[a]]))
                    .ok_or_else(|| GroupoidError::Table(format!("no inverse for arrow {}", g.arrows[a])))
            })
            .collect::<Result<_, _>>()?;
        Ok(g)
    }

    /// A group as a groupoid over one point.
    pub fn group<F: Fn(usize, usize) -> usize>(labels: Vec<String>, product: F) -> Result<FiniteGroupoid, GroupoidError> {
        let n = labels.len();
        FiniteGroupoid::from_fn(vec!["pt".into()], labels, vec![0; n], vec![0; n], product)
    }

    /// `Z_n` with additive labels `0..n-1`.
    pub fn cyclic(n: usize) -> FiniteGroupoid {
        FiniteGroupoid::group((0..n).map(|k| k.to_string()).collect(), |a, b| (a + b) % n).expect("cyclic group")
    }

    /// `Z_2` written multiplicatively as `{1, -1}`.
    pub fn z2() -> FiniteGroupoid {
        FiniteGroupoid::group(vec!["1".into(), "-1".into()], |a, b| a ^ b).expect("Z2")
    }

    /// The trivial groupoid over one point.
    pub fn point() -> FiniteGroupoid {
        FiniteGroupoid::cyclic(1)
    }

    /// Pair groupoid on `n` objects; arrow `(i, j)` goes from `j` to `i`.
    pub fn pair(n: usize) -> FiniteGroupoid {
        let objects = (0..n).map(|i| i.to_string()).collect();
        let arrows = (0..n * n).map(|a| format!("({},{})", a / n, a % n)).collect();
        let src = (0..n * n).map(|a| a % n).collect();
        let tgt = (0..n * n).map(|a| a / n).collect();
        FiniteGroupoid::from_fn(objects, arrows, src, tgt, |g, h| (g / n) * n + h % n).expect("pair groupoid")
    }

    /// Objects only, with identity arrows.
    pub fn discrete(labels: Vec<String>) -> FiniteGroupoid {
        let n = labels.len();
        FiniteGroupoid::from_fn(labels.clone(), labels, (0..n).collect(), (0..n).collect(), |g, _| g).expect("discrete groupoid")
    }

    /// Table entry for `g h`; `None` off the composable pairs.
    pub fn product(&self, g: usize, h: usize) -> Option<usize> {
        self.mult[g * self.arrows.len() + h]
    }

    /// Componentwise product; object and arrow `(a, b)` sit at index
    /// `a * |H| + b`.
    pub fn direct_product(&self, other: &FiniteGroupoid) -> FiniteGroupoid {
        let (o2, a2) = (other.objects.len(), other.arrows.len());
        let objects = self
            .objects
            .iter()
            .flat_map(|x| other.objects.iter().map(move |y| format!("({},{})", x, y)))
            .collect();
        let arrows = self
            .arrows
            .iter()
            .flat_map(|x| other.arrows.iter().map(move |y| format!("({},{})", x, y)))
            .collect();
        let n = self.arrows.len() * a2;
        let src = (0..n).map(|a| self.src[a / a2] * o2 + other.src[a % a2]).collect();
        let tgt = (0..n).map(|a| self.tgt[a / a2] * o2 + other.tgt[a % a2]).collect();
        FiniteGroupoid::from_fn(objects, arrows, src, tgt, |g, h| {
            let p = self.product(g / a2, h / a2).expect("composable");
            let q = other.product(g % a2, h % a2).expect("composable");
            p * a2 + q
        })
        .expect("product groupoid")
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn arrows(&self) -> &[String] {
        &self.arrows
    }

    pub fn n_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn n_arrows(&self) -> usize {
        self.arrows.len()
    }

    pub fn source(&self, g: usize) -> usize {
        self.src[g]
    }

    pub fn target(&self, g: usize) -> usize {
        self.tgt[g]
    }

    pub fn unit(&self, x: usize) -> usize {
        self.unit[x]
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.inv[g]
    }

    pub fn is_unit(&self, g: usize) -> bool {
        self.unit[self.src[g]] == g
    }

    /// `g h`, failing on non-composable pairs.
    pub fn compose(&self, g: usize, h: usize) -> Result<usize, GroupoidError> {
        self.product(g, h).ok_or(GroupoidError::NotComposable(g, h))
    }

    pub fn arrow_index(&self, label: &str) -> Result<usize, GroupoidError> {
        self.arrows.iter().position(|a| a == label).ok_or_else(|| GroupoidError::UnknownLabel(label.into()))
    }

    pub fn object_index(&self, label: &str) -> Result<usize, GroupoidError> {
        self.objects.iter().position(|a| a == label).ok_or_else(|| GroupoidError::UnknownLabel(label.into()))
    }

    /// Arrows with source `x`.
    pub fn arrows_from(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_arrows()).filter(move |&g| self.src[g] == x)
    }

    /// Arrows from `x` to `y`.
    pub fn hom(&self, x: usize, y: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_arrows()).filter(move |&g| self.src[g] == x && self.tgt[g] == y)
    }

    /// Replaces one product entry, keeping the recorded units and inverses.
    pub fn with_product_entry(&self, g: usize, h: usize, value: usize) -> FiniteGroupoid {
        let mut out = self.clone();
        let n = self.n_arrows();
        out.mult[g * n + h] = Some(value);
        out
    }

    /// Exhaustive check of the groupoid laws.
    pub fn axiom_check(&self) -> AxiomCheck {
        let n = self.n_arrows();
        let mut v = Vec::new();
        for g in 0..n {
            for h in 0..n {
                let composable = self.src[g] == self.tgt[h];
                match (composable, self.product(g, h)) {
                    (true, None) => v.push(Violation::MissingProduct(g, h)),
                    (false, Some(_)) => v.push(Violation::ProductOnNonComposable(g, h)),
                    (true, Some(p)) => {
                        if self.src[p] != self.src[h] || self.tgt[p] != self.tgt[g] {
                            v.push(Violation::ProductEndpoints(g, h));
                        }
                    }
                    _ => {}
                }
            }
        }
        for g in 0..n {
            for h in 0..n {
                let Some(gh) = self.product(g, h) else { continue };
                for k in 0..n {
                    let Some(hk) = self.product(h, k) else { continue };
                    if self.product(gh, k) != self.product(g, hk) {
                        v.push(Violation::Associativity(g, h, k));
                    }
                }
            }
        }
        for (x, &e) in self.unit.iter().enumerate() {
            if self.src[e] != x || self.tgt[e] != x {
                v.push(Violation::UnitEndpoints(x));
            }
        }
        for g in 0..n {
            if self.product(self.unit[self.tgt[g]], g) != Some(g) {
                v.push(Violation::LeftUnit(g));
            }
            if self.product(g, self.unit[self.src[g]]) != Some(g) {
                v.push(Violation::RightUnit(g));
            }
            let i = self.inv[g];
            if self.product(g, i) != Some(self.unit[self.tgt[g]]) || self.product(i, g) != Some(self.unit[self.src[g]]) {
                v.push(Violation::Inverse(g));
            }
        }
        AxiomCheck { pass: v.is_empty(), violations: v }
    }
}

// ---------------------------------------------------------------------------
// json

#[derive(Serialize, Deserialize)]
struct ArrowJson {
    id: String,
    src: String,
    tgt: String,
}

#[derive(Serialize, Deserialize)]
struct GroupoidJson {
    objects: Vec<String>,
    arrows: Vec<ArrowJson>,
    mult: Vec<[String; 3]>,
    #[serde(default)]
    inv: Vec<String>,
    #[serde(default)]
    unit: BTreeMap<String, String>,
}

impl FiniteGroupoid {
    /// Parses `{"objects", "arrows": [{"id","src","tgt"}], "mult": [[a,b,ab]],
    /// "inv", "unit"}`. Without `inv` and `unit` they are read off `mult`.
    pub fn from_json(text: &str) -> Result<FiniteGroupoid, GroupoidError> {
        let j: GroupoidJson = serde_json::from_str(text).map_err(|e| GroupoidError::Json(e.to_string()))?;
        let obj = |l: &str| j.objects.iter().position(|o| o == l).ok_or_else(|| GroupoidError::UnknownLabel(l.into()));
        let arrows: Vec<String> = j.arrows.iter().map(|a| a.id.clone()).collect();
        for (i, a) in arrows.iter().enumerate() {
            if arrows[..i].contains(a) {
                return Err(GroupoidError::DuplicateLabel(a.clone()));
            }
        }
        let arr = |l: &str| arrows.iter().position(|o| o == l).ok_or_else(|| GroupoidError::UnknownLabel(l.into()));
        let src = j.arrows.iter().map(|a| obj(&a.src)).collect::<Result<Vec<_>, _>>()?;
        let tgt = j.arrows.iter().map(|a| obj(&a.tgt)).collect::<Result<Vec<_>, _>>()?;
        let n = arrows.len();
        let mut mult = vec![None; n * n];
        for [a, b, c] in &j.mult {
            let (a, b, c) = (arr(a)?, arr(b)?, arr(c)?);
            if mult[a * n + b].replace(c).is_some() {
                return Err(GroupoidError::Table(format!("product of {} and {} listed twice", arrows[a], arrows[b])));
            }
        }
        if j.inv.is_empty() || j.unit.len() != j.objects.len() {
            // read units and inverses off the table
            let g = FiniteGroupoid::from_table(j.objects.clone(), arrows, src, tgt, mult)?;
            return Ok(g);
        }
        // listed units and inverses are taken as given; laws are left to
        // `axiom_check`
        if j.inv.len() != n {
            return Err(GroupoidError::Table("inv must list every arrow".into()));
        }
        let inv = j.inv.iter().map(|l| arr(l)).collect::<Result<Vec<_>, _>>()?;
        let mut unit = vec![usize::MAX; j.objects.len()];
        for (o, a) in &j.unit {
            unit[obj(o)?] = arr(a)?;
        }
        let g = FiniteGroupoid { objects: j.objects.clone(), arrows, src, tgt, mult, unit, inv };
        Ok(g)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let n = self.n_arrows();
        let mut mult = Vec::new();
        for g in 0..n {
            for h in 0..n {
                if let Some(p) = self.product(g, h) {
                    mult.push([self.arrows[g].clone(), self.arrows[h].clone(), self.arrows[p].clone()]);
                }
            }
        }
        let j = GroupoidJson {
            objects: self.objects.clone(),
            arrows: (0..n)
                .map(|a| ArrowJson { id: self.arrows[a].clone(), src: self.objects[self.src[a]].clone(), tgt: self.objects[self.tgt[a]].clone() })
                .collect(),
            mult,
            inv: self.inv.iter().map(|&i| self.arrows[i].clone()).collect(),
            unit: (0..self.n_objects()).map(|x| (self.objects[x].clone(), self.arrows[self.unit[x]].clone())).collect(),
        };
        serde_json::to_value(j).expect("serializable")
    }
}

// ---------------------------------------------------------------------------
// homomorphisms

/// A functor between finite groupoids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Homomorphism {
    pub objects: Vec<usize>,
    pub arrows: Vec<usize>,
}

impl Homomorphism {
    pub fn identity(g: &FiniteGroupoid) -> Homomorphism {
        Homomorphism { objects: (0..g.n_objects()).collect(), arrows: (0..g.n_arrows()).collect() }
    }

    /// First law that fails, as a human-readable witness.
    pub fn check(&self, g: &FiniteGroupoid, h: &FiniteGroupoid) -> Result<(), String> {
        if self.objects.len() != g.n_objects() || self.arrows.len() != g.n_arrows() {
            return Err("tables do not cover the domain".into());
        }
        for a in 0..g.n_arrows() {
            let fa = self.arrows[a];
            if fa >= h.n_arrows() {
                return Err(format!("arrow {} maps outside the codomain", g.arrows[a]));
            }
            if h.src[fa] != self.objects[g.src[a]] || h.tgt[fa] != self.objects[g.tgt[a]] {
                return Err(format!("endpoints of {} are not preserved", g.arrows[a]));
            }
        }
        for a in 0..g.n_arrows() {
            for b in 0..g.n_arrows() {
                if let Some(ab) = g.product(a, b) {
                    if h.product(self.arrows[a], self.arrows[b]) != Some(self.arrows[ab]) {
                        return Err(format!("f({} {}) != f({}) f({})", g.arrows[a], g.arrows[b], g.arrows[a], g.arrows[b]));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn then(&self, next: &Homomorphism) -> Homomorphism {
        Homomorphism {
            objects: self.objects.iter().map(|&x| next.objects[x]).collect(),
            arrows: self.arrows.iter().map(|&a| next.arrows[a]).collect(),
        }
    }
}

/// All functors `G -> H`, by backtracking over arrows.
pub fn all_homomorphisms(g: &FiniteGroupoid, h: &FiniteGroupoid, budget: u64) -> Result<Vec<Homomorphism>, GroupoidError> {
    let mut out = Vec::new();
    let mut spent = 0u64;
    let mut objs = vec![usize::MAX; g.n_objects()];
    let mut arrs = vec![usize::MAX; g.n_arrows()];
    fn rec(
        g: &FiniteGroupoid,
        h: &FiniteGroupoid,
        i: usize,
        objs: &mut Vec<usize>,
        arrs: &mut Vec<usize>,
        out: &mut Vec<Homomorphism>,
        spent: &mut u64,
        budget: u64,
    ) -> Result<(), GroupoidError> {
        if i == g.n_objects() + g.n_arrows() {
            let f = Homomorphism { objects: objs.clone(), arrows: arrs.clone() };
            if f.check(g, h).is_ok() {
                out.push(f);
            }
            return Ok(());
        }
        if i < g.n_objects() {
            for y in 0..h.n_objects() {
                *spent += 1;
                if *spent > budget {
                    return Err(GroupoidError::Budget(budget));
                }
                objs[i] = y;
                rec(g, h, i + 1, objs, arrs, out, spent, budget)?;
            }
            return Ok(());
        }
        let a = i - g.n_objects();
        let cands: Vec<usize> = h.hom(objs[g.src[a]], objs[g.tgt[a]]).collect();
        for c in cands {
            *spent += 1;
            if *spent > budget {
                return Err(GroupoidError::Budget(budget));
            }
            arrs[a] = c;
            // products among already assigned arrows
            let ok = (0..=a).all(|b| {
                let pa = g.product(a, b).map(|p| p > a || h.product(arrs[a], arrs[b]) == Some(arrs[p])).unwrap_or(true);
                let pb = g.product(b, a).map(|p| p > a || h.product(arrs[b], arrs[a]) == Some(arrs[p])).unwrap_or(true);
                pa && pb
            });
            if ok {
                rec(g, h, i + 1, objs, arrs, out, spent, budget)?;
            }
        }
        arrs[a] = usize::MAX;
        Ok(())
    }
    rec(g, h, 0, &mut objs, &mut arrs, &mut out, &mut spent, budget)?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// actions and torsors

/// Right action `m . g` defined when `J(m) = t(g)`, with `J(m . g) = s(g)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RightAction {
    pub moment: Vec<usize>,
    /// `table[m * |G1| + g]`
    pub table: Vec<Option<usize>>,
}

/// Left action `g . m` defined when `s(g) = J(m)`, with `J(g . m) = t(g)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeftAction {
    pub moment: Vec<usize>,
    pub table: Vec<Option<usize>>,
}

impl RightAction {
    pub fn carrier(&self) -> usize {
        self.moment.len()
    }

    pub fn act(&self, g: &FiniteGroupoid, m: usize, a: usize) -> Option<usize> {
        self.table[m * g.n_arrows() + a]
    }

    /// Right multiplication of `G` on its arrows, moment `s`.
    pub fn on_arrows(g: &FiniteGroupoid) -> RightAction {
        let n = g.n_arrows();
        let table = (0..n * n).map(|i| g.product(i / n, i % n)).collect();
        RightAction { moment: g.src.clone(), table }
    }

    pub fn check(&self, g: &FiniteGroupoid) -> Result<(), String> {
        let n = g.n_arrows();
        for m in 0..self.carrier() {
            for a in 0..n {
                let defined = self.moment[m] == g.tgt[a];
                match (defined, self.act(g, m, a)) {
                    (true, None) => return Err(format!("{} . {} undefined", m, g.arrows[a])),
                    (false, Some(_)) => return Err(format!("{} . {} defined off the fiber product", m, g.arrows[a])),
                    (true, Some(r)) if r >= self.carrier() || self.moment[r] != g.src[a] => {
                        return Err(format!("moment of {} . {} is not s({})", m, g.arrows[a], g.arrows[a]))
                    }
                    _ => {}
                }
            }
            if self.act(g, m, g.unit[self.moment[m]]) != Some(m) {
                return Err(format!("unit does not fix {}", m));
            }
            for a in 0..n {
                for b in 0..n {
                    let Some(ab) = g.product(a, b) else { continue };
                    let Some(ma) = self.act(g, m, a) else { continue };
                    if self.act(g, ma, b) != self.act(g, m, ab) {
                        return Err(format!("({} . {}) . {} != {} . ({} {})", m, g.arrows[a], g.arrows[b], m, g.arrows[a], g.arrows[b]));
                    }
                }
            }
        }
        Ok(())
    }
}

impl LeftAction {
    pub fn carrier(&self) -> usize {
        self.moment.len()
    }

    pub fn act(&self, g: &FiniteGroupoid, a: usize, m: usize) -> Option<usize> {
        self.table[m * g.n_arrows() + a]
    }

    pub fn on_arrows(g: &FiniteGroupoid) -> LeftAction {
        let n = g.n_arrows();
        let table = (0..n * n).map(|i| g.product(i % n, i / n)).collect();
        LeftAction { moment: g.tgt.clone(), table }
    }

    pub fn check(&self, g: &FiniteGroupoid) -> Result<(), String> {
        let n = g.n_arrows();
        for m in 0..self.carrier() {
            for a in 0..n {
                let defined = g.src[a] == self.moment[m];
                match (defined, self.act(g, a, m)) {
                    (true, None) => return Err(format!("{} . {} undefined", g.arrows[a], m)),
                    (false, Some(_)) => return Err(format!("{} . {} defined off the fiber product", g.arrows[a], m)),
                    (true, Some(r)) if r >= self.carrier() || self.moment[r] != g.tgt[a] => {
                        return Err(format!("moment of {} . {} is not t({})", g.arrows[a], m, g.arrows[a]))
                    }
                    _ => {}
                }
            }
            if self.act(g, g.unit[self.moment[m]], m) != Some(m) {
                return Err(format!("unit does not fix {}", m));
            }
            for a in 0..n {
                for b in 0..n {
                    let Some(ab) = g.product(a, b) else { continue };
                    let Some(bm) = self.act(g, b, m) else { continue };
                    if self.act(g, a, bm) != self.act(g, ab, m) {
                        return Err(format!("{} . ({} . {}) != ({} {}) . {}", g.arrows[a], g.arrows[b], m, g.arrows[a], g.arrows[b], m));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Outcome of a principal-bundle check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorsorCheck {
    pub pass: bool,
    pub failure: Option<String>,
}

impl TorsorCheck {
    fn from(r: Result<(), String>) -> TorsorCheck {
        match r {
            Ok(()) => TorsorCheck { pass: true, failure: None },
            Err(e) => TorsorCheck { pass: false, failure: Some(e) },
        }
    }
}

/// `pi: M -> S` is a right principal `G`-bundle for `action`: `pi` and the
/// moment map are surjective, and `G` acts freely and transitively on fibers.
pub fn torsor_check(g: &FiniteGroupoid, action: &RightAction, pi: &[usize], base_size: usize) -> TorsorCheck {
    TorsorCheck::from(right_principal(g, action, pi, base_size))
}

fn right_principal(g: &FiniteGroupoid, action: &RightAction, pi: &[usize], base_size: usize) -> Result<(), String> {
    action.check(g)?;
    let c = action.carrier();
    if pi.len() != c {
        return Err("projection does not cover the carrier".into());
    }
    for s in 0..base_size {
        if !pi.contains(&s) {
            return Err(format!("projection misses base point {}", s));
        }
    }
    if let Some(x) = (0..g.n_objects()).find(|x| !action.moment.contains(x)) {
        return Err(format!("moment map misses object {}", g.objects[x]));
    }
    for m in 0..c {
        for a in 0..g.n_arrows() {
            if let Some(r) = action.act(g, m, a) {
                if pi[r] != pi[m] {
                    return Err(format!("{} . {} leaves its fiber", m, g.arrows[a]));
                }
                if r == m && !g.is_unit(a) {
                    return Err(format!("{} is fixed by {}", m, g.arrows[a]));
                }
            }
        }
        for m2 in 0..c {
            if pi[m2] == pi[m] && !(0..g.n_arrows()).any(|a| action.act(g, m, a) == Some(m2)) {
                return Err(format!("{} and {} share a fiber but lie in different orbits", m, m2));
            }
        }
    }
    Ok(())
}

/// The pullback `S x_{G0} G1 -> S` of the unit torsor along `f: S -> G0`.
pub fn pullback_torsor(g: &FiniteGroupoid, f: &[usize]) -> (RightAction, Vec<usize>) {
    let pairs: Vec<(usize, usize)> = (0..f.len())
        .flat_map(|s| (0..g.n_arrows()).filter(move |&a| g.tgt[a] == f[s]).map(move |a| (s, a)))
        .collect();
    let idx: HashMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(i, p)| (*p, i)).collect();
    let n = g.n_arrows();
    let mut table = vec![None; pairs.len() * n];
    for (i, &(s, a)) in pairs.iter().enumerate() {
        for b in 0..n {
            if let Some(ab) = g.product(a, b) {
                table[i * n + b] = Some(idx[&(s, ab)]);
            }
        }
    }
    let moment = pairs.iter().map(|&(_, a)| g.src[a]).collect();
    let pi = pairs.iter().map(|&(s, _)| s).collect();
    (RightAction { moment, table }, pi)
}

// ---------------------------------------------------------------------------
// bibundles

/// A `G`-`H` bibundle: left `G`-action with moment `J_G`, right `H`-action
/// with moment `J_H`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bibundle {
    pub left: LeftAction,
    pub right: RightAction,
}

impl Bibundle {
    pub fn carrier(&self) -> usize {
        self.left.moment.len()
    }

    /// `G1` with `J_G = t`, `J_H = s` and multiplication on both sides.
    pub fn identity(g: &FiniteGroupoid) -> Bibundle {
        Bibundle { left: LeftAction::on_arrows(g), right: RightAction::on_arrows(g) }
    }

    /// `G0 x_{f, H0, t} H1` for a homomorphism `f: G -> H`.
    pub fn of_homomorphism(g: &FiniteGroupoid, h: &FiniteGroupoid, f: &Homomorphism) -> Bibundle {
        let pairs: Vec<(usize, usize)> = (0..g.n_objects())
            .flat_map(|x| (0..h.n_arrows()).filter(move |&b| h.tgt[b] == f.objects[x]).map(move |b| (x, b)))
            .collect();
        let idx: HashMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(i, p)| (*p, i)).collect();
        let (ng, nh) = (g.n_arrows(), h.n_arrows());
        let mut lt = vec![None; pairs.len() * ng];
        let mut rt = vec![None; pairs.len() * nh];
        for (i, &(x, b)) in pairs.iter().enumerate() {
            for a in g.arrows_from(x) {
                let fb = h.product(f.arrows[a], b).expect("composable");
                lt[i * ng + a] = Some(idx[&(g.tgt[a], fb)]);
            }
            for c in 0..nh {
                if let Some(bc) = h.product(b, c) {
                    rt[i * nh + c] = Some(idx[&(x, bc)]);
                }
            }
        }
        Bibundle {
            left: LeftAction { moment: pairs.iter().map(|p| p.0).collect(), table: lt },
            right: RightAction { moment: pairs.iter().map(|p| h.src[p.1]).collect(), table: rt },
        }
    }

    /// The same carrier read as an `H`-`G` bibundle: `h . x = x . h^-1`.
    pub fn flip(&self, g: &FiniteGroupoid, h: &FiniteGroupoid) -> Bibundle {
        let c = self.carrier();
        let (ng, nh) = (g.n_arrows(), h.n_arrows());
        let mut lt = vec![None; c * nh];
        let mut rt = vec![None; c * ng];
        for x in 0..c {
            for b in 0..nh {
                lt[x * nh + b] = self.right.act(h, x, h.inv[b]);
            }
            for a in 0..ng {
                rt[x * ng + a] = self.left.act(g, g.inv[a], x);
            }
        }
        Bibundle {
            left: LeftAction { moment: self.right.moment.clone(), table: lt },
            right: RightAction { moment: self.left.moment.clone(), table: rt },
        }
    }

    /// Actions well defined and commuting.
    pub fn check(&self, g: &FiniteGroupoid, h: &FiniteGroupoid) -> Result<(), String> {
        if self.left.moment.len() != self.right.moment.len() {
            return Err("moment maps disagree on the carrier".into());
        }
        self.left.check(g).map_err(|e| format!("left action: {}", e))?;
        self.right.check(h).map_err(|e| format!("right action: {}", e))?;
        for x in 0..self.carrier() {
            for a in 0..g.n_arrows() {
                let Some(ax) = self.left.act(g, a, x) else { continue };
                if self.right.moment[ax] != self.right.moment[x] {
                    return Err(format!("left action moves J_H at {}", x));
                }
                for b in 0..h.n_arrows() {
                    let Some(xb) = self.right.act(h, x, b) else { continue };
                    if self.left.moment[xb] != self.left.moment[x] {
                        return Err(format!("right action moves J_G at {}", x));
                    }
                    if self.right.act(h, ax, b) != self.left.act(g, a, xb) {
                        return Err(format!("actions do not commute at {}", x));
                    }
                }
            }
        }
        Ok(())
    }

    /// Hilsum-Skandalis: `J_G` is a right principal `H`-bundle.
    pub fn hs_check(&self, g: &FiniteGroupoid, h: &FiniteGroupoid) -> Result<(), String> {
        self.check(g, h)?;
        right_principal(h, &self.right, &self.left.moment, g.n_objects())
    }
}

/// Morita bibundle: principal on both sides.
pub fn morita_check(g: &FiniteGroupoid, h: &FiniteGroupoid, e: &Bibundle) -> TorsorCheck {
    TorsorCheck::from(e.hs_check(g, h).and_then(|_| {
        let f = e.flip(g, h);
        right_principal(g, &f.right, &f.left.moment, h.n_objects())
    }))
}

/// `E x_{H0} F / H` with orbit representatives chosen lexicographically.
pub fn bibundle_compose(
    g: &FiniteGroupoid,
    h: &FiniteGroupoid,
    k: &FiniteGroupoid,
    e: &Bibundle,
    f: &Bibundle,
) -> Result<Bibundle, GroupoidError> {
    e.hs_check(g, h).map_err(GroupoidError::NotPrincipal)?;
    f.hs_check(h, k).map_err(GroupoidError::NotPrincipal)?;
    let pairs: Vec<(usize, usize)> = (0..e.carrier())
        .flat_map(|x| (0..f.carrier()).filter(move |&y| e.right.moment[x] == f.left.moment[y]).map(move |y| (x, y)))
        .collect();
    let idx: HashMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(i, p)| (*p, i)).collect();
    // orbit of (x, y) under (x, y) . b = (x . b, b^-1 . y)
    let mut orbit = vec![usize::MAX; pairs.len()];
    let mut reps = Vec::new();
    for i in 0..pairs.len() {
        if orbit[i] != usize::MAX {
            continue;
        }
        let id = reps.len();
        reps.push(i);
        let (x, y) = pairs[i];
        for b in 0..h.n_arrows() {
            if let (Some(xb), Some(by)) = (e.right.act(h, x, b), f.left.act(h, h.inv[b], y)) {
                orbit[idx[&(xb, by)]] = id;
            }
        }
    }
    let c = reps.len();
    let (ng, nk) = (g.n_arrows(), k.n_arrows());
    let mut lt = vec![None; c * ng];
    let mut rt = vec![None; c * nk];
    for (o, &i) in reps.iter().enumerate() {
        let (x, y) = pairs[i];
        for a in 0..ng {
            if let Some(ax) = e.left.act(g, a, x) {
                lt[o * ng + a] = Some(orbit[idx[&(ax, y)]]);
            }
        }
        for b in 0..nk {
            if let Some(yb) = f.right.act(k, y, b) {
                rt[o * nk + b] = Some(orbit[idx[&(x, yb)]]);
            }
        }
    }
    Ok(Bibundle {
        left: LeftAction { moment: reps.iter().map(|&i| e.left.moment[pairs[i].0]).collect(), table: lt },
        right: RightAction { moment: reps.iter().map(|&i| f.right.moment[pairs[i].1]).collect(), table: rt },
    })
}

/// A bi-equivariant bijection `E1 -> E2`, found by orbit propagation:
/// fixing the image of one point fixes it on the whole `G x H` orbit.
pub fn two_morphism_search(
    g: &FiniteGroupoid,
    h: &FiniteGroupoid,
    e1: &Bibundle,
    e2: &Bibundle,
    budget: u64,
) -> Result<Option<Vec<usize>>, GroupoidError> {
    let c = e1.carrier();
    if e2.carrier() != c {
        return Ok(None);
    }
    let mut phi = vec![usize::MAX; c];
    let mut used = vec![false; c];
    let mut spent = 0u64;

    fn neighbours(g: &FiniteGroupoid, h: &FiniteGroupoid, e: &Bibundle, x: usize) -> Vec<(bool, usize, usize)> {
        let mut out = Vec::new();
        for a in 0..g.n_arrows() {
            if let Some(y) = e.left.act(g, a, x) {
                out.push((true, a, y));
            }
        }
        for b in 0..h.n_arrows() {
            if let Some(y) = e.right.act(h, x, b) {
                out.push((false, b, y));
            }
        }
        out
    }

    /// Extends `phi` from `x -> y` along the orbit of `x`; returns the
    /// assigned points, or `None` on a conflict (after undoing).
    fn propagate(
        g: &FiniteGroupoid,
        h: &FiniteGroupoid,
        e1: &Bibundle,
        e2: &Bibundle,
        phi: &mut [usize],
        used: &mut [bool],
        x: usize,
        y: usize,
    ) -> Option<Vec<usize>> {
        let mut assigned = vec![];
        let mut queue = VecDeque::new();
        let ok = 'prop: {
            if e1.left.moment[x] != e2.left.moment[y] || e1.right.moment[x] != e2.right.moment[y] {
                break 'prop false;
            }
            phi[x] = y;
            used[y] = true;
            assigned.push(x);
            queue.push_back(x);
            while let Some(u) = queue.pop_front() {
                for (is_left, a, v) in neighbours(g, h, e1, u) {
                    let w = if is_left { e2.left.act(g, a, phi[u]) } else { e2.right.act(h, phi[u], a) };
                    let Some(w) = w else { break 'prop false };
                    if phi[v] == usize::MAX {
                        if used[w] {
                            break 'prop false;
                        }
                        phi[v] = w;
                        used[w] = true;
                        assigned.push(v);
                        queue.push_back(v);
                    } else if phi[v] != w {
                        break 'prop false;
                    }
                }
            }
            true
        };
        if ok {
            Some(assigned)
        } else {
            for &v in &assigned {
                used[phi[v]] = false;
                phi[v] = usize::MAX;
            }
            None
        }
    }

    fn rec(
        g: &FiniteGroupoid,
        h: &FiniteGroupoid,
        e1: &Bibundle,
        e2: &Bibundle,
        phi: &mut Vec<usize>,
        used: &mut Vec<bool>,
        spent: &mut u64,
        budget: u64,
    ) -> Result<bool, GroupoidError> {
        let Some(x) = phi.iter().position(|&p| p == usize::MAX) else { return Ok(true) };
        for y in 0..phi.len() {
            if used[y] {
                continue;
            }
            *spent += 1;
            if *spent > budget {
                return Err(GroupoidError::Budget(budget));
            }
            if let Some(assigned) = propagate(g, h, e1, e2, phi, used, x, y) {
                if rec(g, h, e1, e2, phi, used, spent, budget)? {
                    return Ok(true);
                }
                for &v in &assigned {
                    used[phi[v]] = false;
                    phi[v] = usize::MAX;
                }
            }
        }
        Ok(false)
    }

    if rec(g, h, e1, e2, &mut phi, &mut used, &mut spent, budget)? {
        Ok(Some(phi))
    } else {
        Ok(None)
    }
}

/// Exhaustive search for a Morita bibundle `G -> H` on carriers of at most
/// `max_carrier` points.
pub fn morita_bibundle_search(g: &FiniteGroupoid, h: &FiniteGroupoid, max_carrier: usize, budget: u64) -> Result<Option<Bibundle>, GroupoidError> {
    let mut spent = 0u64;
    for c in 1..=max_carrier {
        if let Some(b) = search_carrier(g, h, c, budget, &mut spent)? {
            return Ok(Some(b));
        }
    }
    Ok(None)
}

fn search_carrier(g: &FiniteGroupoid, h: &FiniteGroupoid, c: usize, budget: u64, spent: &mut u64) -> Result<Option<Bibundle>, GroupoidError> {
    let (ng, nh) = (g.n_arrows(), h.n_arrows());
    let mut jl = vec![0usize; c];
    let mut jr = vec![0usize; c];
    // moment maps, then action entries, each slot tried in order
    let tick = |spent: &mut u64| -> Result<(), GroupoidError> {
        *spent += 1;
        if *spent > budget {
            Err(GroupoidError::Budget(budget))
        } else {
            Ok(())
        }
    };
    let total = g.n_objects().pow(c as u32) * h.n_objects().pow(c as u32);
    for code in 0..total {
        tick(spent)?;
        let mut z = code;
        for x in 0..c {
            jl[x] = z % g.n_objects();
            z /= g.n_objects();
        }
        for x in 0..c {
            jr[x] = z % h.n_objects();
            z /= h.n_objects();
        }
        // canonical labeling: moments sorted lexicographically
        if (1..c).any(|x| (jl[x - 1], jr[x - 1]) > (jl[x], jr[x])) {
            continue;
        }
        let (jlr, jrr) = (&jl, &jr);
        let slots_l: Vec<(usize, usize)> = (0..c).flat_map(|x| (0..ng).filter(move |&a| g.src[a] == jlr[x]).map(move |a| (x, a))).collect();
        let slots_r: Vec<(usize, usize)> = (0..c).flat_map(|x| (0..nh).filter(move |&b| h.tgt[b] == jrr[x]).map(move |b| (x, b))).collect();
        let mut lt = vec![None; c * ng];
        let mut rt = vec![None; c * nh];
        if fill(g, h, c, &jl, &jr, &slots_l, &slots_r, 0, &mut lt, &mut rt, spent, budget)? {
            return Ok(Some(Bibundle {
                left: LeftAction { moment: jl.clone(), table: lt },
                right: RightAction { moment: jr.clone(), table: rt },
            }));
        }
    }
    Ok(None)
}

#[allow(clippy::too_many_arguments)]
fn fill(
    g: &FiniteGroupoid,
    h: &FiniteGroupoid,
    c: usize,
    jl: &[usize],
    jr: &[usize],
    sl: &[(usize, usize)],
    sr: &[(usize, usize)],
    i: usize,
    lt: &mut Vec<Option<usize>>,
    rt: &mut Vec<Option<usize>>,
    spent: &mut u64,
    budget: u64,
) -> Result<bool, GroupoidError> {
    let (ng, nh) = (g.n_arrows(), h.n_arrows());
    if i == sl.len() + sr.len() {
        let b = Bibundle {
            left: LeftAction { moment: jl.to_vec(), table: lt.clone() },
            right: RightAction { moment: jr.to_vec(), table: rt.clone() },
        };
        return Ok(morita_check(g, h, &b).pass);
    }
    let (is_left, x, a) = if i < sl.len() { (true, sl[i].0, sl[i].1) } else { (false, sr[i - sl.len()].0, sr[i - sl.len()].1) };
    for y in 0..c {
        *spent += 1;
        if *spent > budget {
            return Err(GroupoidError::Budget(budget));
        }
        let fits = if is_left {
            jl[y] == g.tgt[a] && jr[y] == jr[x] && (!g.is_unit(a) || y == x)
        } else {
            jr[y] == h.src[a] && jl[y] == jl[x] && (!h.is_unit(a) || y == x)
        };
        if !fits {
            continue;
        }
        if is_left {
            lt[x * ng + a] = Some(y);
        } else {
            rt[x * nh + a] = Some(y);
        }
        if fill(g, h, c, jl, jr, sl, sr, i + 1, lt, rt, spent, budget)? {
            return Ok(true);
        }
    }
    if is_left {
        lt[x * ng + a] = None;
    } else {
        rt[x * nh + a] = None;
    }
    Ok(false)
}

// ---------------------------------------------------------------------------
// cocycles

/// Coefficient group of a cocycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coefficients {
    Cyclic(i64),
    /// `Z` restricted to `[lo, hi]`; sums leaving the window are errors
    IntegerWindow { lo: i64, hi: i64 },
}

impl Coefficients {
    fn elements(&self) -> Vec<i64> {
        match *self {
            Coefficients::Cyclic(n) => (0..n).collect(),
            Coefficients::IntegerWindow { lo, hi } => (lo..=hi).collect(),
        }
    }

    fn reduce(&self, v: i64) -> Result<i64, GroupoidError> {
        match *self {
            Coefficients::Cyclic(n) => Ok(v.rem_euclid(n)),
            Coefficients::IntegerWindow { lo, hi } => {
                if v < lo || v > hi {
                    Err(GroupoidError::Overflow(v, lo, hi))
                } else {
                    Ok(v)
                }
            }
        }
    }
}

/// A function on composable pairs with values in `K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cocycle {
    pub coefficients: Coefficients,
    pub values: HashMap<(usize, usize), i64>,
}

impl Cocycle {
    pub fn zero(coefficients: Coefficients) -> Cocycle {
        Cocycle { coefficients, values: HashMap::new() }
    }

    pub fn value(&self, g: usize, h: usize) -> i64 {
        self.values.get(&(g, h)).copied().unwrap_or(0)
    }

    /// Composable triples violating `c(g,h) + c(gh,k) = c(h,k) + c(g,hk)`.
    pub fn violations(&self, grp: &FiniteGroupoid) -> Result<Vec<(usize, usize, usize)>, GroupoidError> {
        let n = grp.n_arrows();
        let mut out = vec![];
        for g in 0..n {
            for h in 0..n {
                let Some(gh) = grp.product(g, h) else { continue };
                for k in 0..n {
                    let Some(hk) = grp.product(h, k) else { continue };
                    let l = self.coefficients.reduce(self.value(g, h) + self.value(gh, k));
                    let r = self.coefficients.reduce(self.value(h, k) + self.value(g, hk));
                    if l? != r? {
                        out.push((g, h, k));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// `G1 x K` with `(g, x)(h, y) = (gh, x + y + c(g, h))`.
pub fn cocycle_semidirect(grp: &FiniteGroupoid, c: &Cocycle) -> Result<FiniteGroupoid, GroupoidError> {
    let ks = c.coefficients.elements();
    let nk = ks.len();
    let n = grp.n_arrows();
    let pos = |v: i64| ks.iter().position(|k| *k == v).expect("reduced value");
    let arrows: Vec<String> = (0..n * nk).map(|i| format!("({},{})", grp.arrows[i / nk], ks[i % nk])).collect();
    let src = (0..n * nk).map(|i| grp.src[i / nk]).collect();
    let tgt = (0..n * nk).map(|i| grp.tgt[i / nk]).collect();
    let mut mult = vec![None; n * nk * n * nk];
    for a in 0..n * nk {
        for b in 0..n * nk {
            if let Some(gh) = grp.product(a / nk, b / nk) {
                let v = c.coefficients.reduce(ks[a % nk] + ks[b % nk] + c.value(a / nk, b / nk))?;
                mult[a * n * nk + b] = Some(gh * nk + pos(v));
            }
        }
    }
    // units and inverses from the cocycle, so a broken cocycle still yields a
    // table whose defects show up in the axiom check
    let unit: Vec<usize> = (0..grp.n_objects())
        .map(|x| Ok(grp.unit[x] * nk + pos(c.coefficients.reduce(-c.value(grp.unit[x], grp.unit[x]))?)))
        .collect::<Result<_, GroupoidError>>()?;
    let inv: Vec<usize> = (0..n * nk)
        .map(|a| {
            let (g, x) = (a / nk, ks[a % nk]);
            let gi = grp.inv[g];
            let u = -c.value(grp.unit[grp.tgt[g]], grp.unit[grp.tgt[g]]);
            Ok(gi * nk + pos(c.coefficients.reduce(u - x - c.value(g, gi))?))
        })
        .collect::<Result<_, GroupoidError>>()?;
    Ok(FiniteGroupoid { objects: grp.objects.clone(), arrows, src, tgt, mult, unit, inv })
}

// ---------------------------------------------------------------------------
// Weinstein groupoid models

/// Structure maps of a finite model of a stacky group presented by `G`:
/// `m: G x G -> G` and `i: G -> G` as functors, a unit object, and the
/// associator `alpha(x1, x2, x3): m(x1, m(x2, x3)) -> m(m(x1, x2), x3)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeinsteinModel {
    pub presentation: FiniteGroupoid,
    /// objects of `G x G`, index `x * |G0| + y`
    pub m_objects: Vec<usize>,
    /// arrows of `G x G`, index `a * |G1| + b`
    pub m_arrows: Vec<usize>,
    pub unit: usize,
    pub inv_objects: Vec<usize>,
    pub inv_arrows: Vec<usize>,
    /// index `(x1 * |G0| + x2) * |G0| + x3`
    pub alpha: Vec<usize>,
}

/// One failed law, with a witness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeinsteinReport {
    pub m_homomorphism: Option<String>,
    pub i_homomorphism: Option<String>,
    pub alpha_natural: Option<String>,
    pub left_unit: bool,
    pub right_unit: bool,
    pub left_inverse: bool,
    pub right_inverse: bool,
    pub identity_restrictions: bool,
    /// number of valid associators (capped at `alpha_cap`)
    pub valid_alphas: usize,
    pub alpha_cap: usize,
    pub pass: bool,
}

/// A functor out of `G^k`, on encoded object and arrow tuples.
struct TupleFunctor<'a> {
    obj: Box<dyn Fn(&[usize]) -> usize + 'a>,
    arr: Box<dyn Fn(&[usize]) -> usize + 'a>,
}

fn decode(mut i: usize, base: usize, k: usize) -> Vec<usize> {
    let mut v = vec![0; k];
    for j in (0..k).rev() {
        v[j] = i % base;
        i /= base;
    }
    v
}

fn encode(v: &[usize], base: usize) -> usize {
    v.iter().fold(0, |a, &x| a * base + x)
}

/// Natural transformations `F => H` between functors `G^k -> G`, each
/// component `eta(x): F(x) -> H(x)`. Components on a connected component of
/// `G^k` are determined by one root value, so the search is per component.
fn natural_transformations(
    g: &FiniteGroupoid,
    k: usize,
    f: &TupleFunctor,
    h: &TupleFunctor,
    pinned: &[(usize, usize)],
    cap: usize,
) -> Vec<Vec<usize>> {
    let n0 = g.n_objects();
    let total = n0.pow(k as u32);
    let out_arrows: Vec<Vec<usize>> = (0..n0).map(|x| g.arrows_from(x).collect()).collect();
    // components of G^k with spanning data
    let mut comp = vec![usize::MAX; total];
    let mut comps: Vec<Vec<usize>> = vec![];
    for root in 0..total {
        if comp[root] != usize::MAX {
            continue;
        }
        let id = comps.len();
        comp[root] = id;
        let mut members = vec![root];
        let mut q = VecDeque::from([root]);
        while let Some(x) = q.pop_front() {
            let xs = decode(x, n0, k);
            for_each_tuple(&xs, &out_arrows, |arr| {
                let y = encode(&arr.iter().map(|&a| g.tgt[a]).collect::<Vec<_>>(), n0);
                if comp[y] == usize::MAX {
                    comp[y] = id;
                    members.push(y);
                    q.push_back(y);
                }
            });
        }
        comps.push(members);
    }
    // every valid choice per component
    let mut per_comp: Vec<Vec<Vec<(usize, usize)>>> = vec![];
    for members in &comps {
        let root = members[0];
        let rt = decode(root, n0, k);
        let mut choices = vec![];
        for cand in g.hom((f.obj)(&rt), (h.obj)(&rt)) {
            let mut eta: HashMap<usize, usize> = HashMap::from([(root, cand)]);
            let mut q = VecDeque::from([root]);
            let mut ok = true;
            'bfs: while let Some(x) = q.pop_front() {
                let xs = decode(x, n0, k);
                let ex = eta[&x];
                let mut arrs = vec![];
                for_each_tuple(&xs, &out_arrows, |arr| arrs.push(arr.to_vec()));
                for arr in arrs {
                    let y = encode(&arr.iter().map(|&a| g.tgt[a]).collect::<Vec<_>>(), n0);
                    // H(arr) eta(x) = eta(y) F(arr)
                    let lhs = g.product((h.arr)(&arr), ex);
                    let fa = (f.arr)(&arr);
                    let Some(lhs) = lhs else { ok = false; break 'bfs };
                    let ey = match g.product(lhs, g.inv[fa]) {
                        Some(v) => v,
                        None => {
                            ok = false;
                            break 'bfs;
                        }
                    };
                    match eta.get(&y) {
                        Some(&v) if v != ey => {
                            ok = false;
                            break 'bfs;
                        }
                        Some(_) => {}
                        None => {
                            eta.insert(y, ey);
                            q.push_back(y);
                        }
                    }
                }
            }
            if ok && pinned.iter().all(|&(x, a)| eta.get(&x).is_none_or(|&v| v == a)) {
                let mut list: Vec<(usize, usize)> = eta.into_iter().collect();
                list.sort();
                choices.push(list);
            }
        }
        per_comp.push(choices);
    }
    let mut out = vec![];
    let mut cur = vec![usize::MAX; total];
    fn combine(per: &[Vec<Vec<(usize, usize)>>], i: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, cap: usize) {
        if out.len() >= cap {
            return;
        }
        if i == per.len() {
            out.push(cur.clone());
            return;
        }
        for ch in &per[i] {
            for &(x, a) in ch {
                cur[x] = a;
            }
            combine(per, i + 1, cur, out, cap);
        }
    }
    combine(&per_comp, 0, &mut cur, &mut out, cap);
    out
}

fn for_each_tuple<F: FnMut(&[usize])>(xs: &[usize], out_arrows: &[Vec<usize>], mut f: F) {
    let k = xs.len();
    let mut idx = vec![0usize; k];
    let lists: Vec<&Vec<usize>> = xs.iter().map(|&x| &out_arrows[x]).collect();
    if lists.iter().any(|l| l.is_empty()) {
        return;
    }
    loop {
        let arr: Vec<usize> = (0..k).map(|j| lists[j][idx[j]]).collect();
        f(&arr);
        let mut j = k;
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < lists[j].len() {
                break;
            }
            idx[j] = 0;
        }
    }
}

impl WeinsteinModel {
    /// `BZ_2`: `Z_2 => pt`, `m(a, b) = ab`, `i(a) = a^-1`, `alpha = id`.
    pub fn bz2() -> WeinsteinModel {
        let g = FiniteGroupoid::z2();
        WeinsteinModel {
            m_objects: vec![0],
            m_arrows: (0..4).map(|i| (i / 2) ^ (i % 2)).collect(),
            unit: 0,
            inv_objects: vec![0],
            inv_arrows: vec![0, 1],
            alpha: vec![0],
            presentation: g,
        }
    }

    /// `Gamma = Z_2 x Z_2 => Z_2` with arrows `(g, a)` at object `g`,
    /// componentwise products, and `alpha(g1, g2, g3)` the arrow
    /// `(g1 g2 g3, g1 g2 g3)`.
    pub fn z2_bz2() -> WeinsteinModel {
        WeinsteinModel::z2_bz2_with(|x1, x2, x3| x1 ^ x2 ^ x3)
    }

    /// The same presentation with associator isotropy `a(x1, x2, x3)`
    /// (elements of `Z_2` coded `0 = 1`, `1 = -1`).
    pub fn z2_bz2_with<F: Fn(usize, usize, usize) -> usize>(a: F) -> WeinsteinModel {
        let objects = vec!["1".to_string(), "-1".to_string()];
        let label = |i: usize| if i == 0 { "1" } else { "-1" };
        let arrows: Vec<String> = (0..4).map(|i| format!("({},{})", label(i / 2), label(i % 2))).collect();
        let src: Vec<usize> = (0..4).map(|i| i / 2).collect();
        let g = FiniteGroupoid::from_fn(objects, arrows, src.clone(), src, |x, y| (x / 2) * 2 + ((x % 2) ^ (y % 2))).expect("Gamma");
        let m_arrows = (0..16)
            .map(|i| {
                let (p, q) = (i / 4, i % 4);
                ((p / 2) ^ (q / 2)) * 2 + ((p % 2) ^ (q % 2))
            })
            .collect();
        let alpha = (0..8)
            .map(|i| {
                let (x1, x2, x3) = (i / 4, (i / 2) % 2, i % 2);
                (x1 ^ x2 ^ x3) * 2 + a(x1, x2, x3)
            })
            .collect();
        WeinsteinModel {
            m_objects: (0..4).map(|i| (i / 2) ^ (i % 2)).collect(),
            m_arrows,
            unit: 0,
            inv_objects: vec![0, 1],
            inv_arrows: (0..4).collect(),
            alpha,
            presentation: g,
        }
    }

    fn n0(&self) -> usize {
        self.presentation.n_objects()
    }

    fn n1(&self) -> usize {
        self.presentation.n_arrows()
    }

    pub fn m_obj(&self, x: usize, y: usize) -> usize {
        self.m_objects[x * self.n0() + y]
    }

    pub fn m_arr(&self, a: usize, b: usize) -> usize {
        self.m_arrows[a * self.n1() + b]
    }

    pub fn alpha_at(&self, x1: usize, x2: usize, x3: usize) -> usize {
        self.alpha[(x1 * self.n0() + x2) * self.n0() + x3]
    }

    /// `m` as a functor on the product groupoid `G x G`.
    fn check_m(&self) -> Option<String> {
        let g = &self.presentation;
        let (n0, n1) = (self.n0(), self.n1());
        if self.m_objects.len() != n0 * n0 || self.m_arrows.len() != n1 * n1 {
            return Some("m tables have the wrong size".into());
        }
        for a in 0..n1 {
            for b in 0..n1 {
                let p = self.m_arr(a, b);
                if p >= n1 || g.src[p] != self.m_obj(g.src[a], g.src[b]) || g.tgt[p] != self.m_obj(g.tgt[a], g.tgt[b]) {
                    return Some(format!("m({}, {}) has the wrong endpoints", g.arrows[a], g.arrows[b]));
                }
            }
        }
        for a in 0..n1 {
            for b in 0..n1 {
                for c in 0..n1 {
                    let Some(ac) = g.product(a, c) else { continue };
                    for d in 0..n1 {
                        let Some(bd) = g.product(b, d) else { continue };
                        if g.product(self.m_arr(a, b), self.m_arr(c, d)) != Some(self.m_arr(ac, bd)) {
                            return Some(format!(
                                "m({} {}, {} {}) != m({}, {}) m({}, {})",
                                g.arrows[a], g.arrows[c], g.arrows[b], g.arrows[d], g.arrows[a], g.arrows[b], g.arrows[c], g.arrows[d]
                            ));
                        }
                    }
                }
            }
        }
        None
    }

    fn check_i(&self) -> Option<String> {
        let g = &self.presentation;
        let f = Homomorphism { objects: self.inv_objects.clone(), arrows: self.inv_arrows.clone() };
        f.check(g, g).err()
    }

    fn assoc_functors(&self) -> (TupleFunctor<'_>, TupleFunctor<'_>) {
        // F = m(id x m), H = m(m x id)
        let f = TupleFunctor {
            obj: Box::new(move |x: &[usize]| self.m_obj(x[0], self.m_obj(x[1], x[2]))),
            arr: Box::new(move |a: &[usize]| self.m_arr(a[0], self.m_arr(a[1], a[2]))),
        };
        let h = TupleFunctor {
            obj: Box::new(move |x: &[usize]| self.m_obj(self.m_obj(x[0], x[1]), x[2])),
            arr: Box::new(move |a: &[usize]| self.m_arr(self.m_arr(a[0], a[1]), a[2])),
        };
        (f, h)
    }

    fn check_alpha(&self) -> Option<String> {
        let g = &self.presentation;
        let n0 = self.n0();
        if self.alpha.len() != n0 * n0 * n0 {
            return Some("alpha table has the wrong size".into());
        }
        let (f, h) = self.assoc_functors();
        for i in 0..n0 * n0 * n0 {
            let x = decode(i, n0, 3);
            let a = self.alpha[i];
            if a >= g.n_arrows() || g.src[a] != (f.obj)(&x) || g.tgt[a] != (h.obj)(&x) {
                return Some(format!("alpha{:?} does not go from m(x1, m(x2, x3)) to m(m(x1, x2), x3)", x));
            }
        }
        let out_arrows: Vec<Vec<usize>> = (0..n0).map(|x| g.arrows_from(x).collect()).collect();
        let mut witness = None;
        for i in 0..n0 * n0 * n0 {
            let x = decode(i, n0, 3);
            for_each_tuple(&x, &out_arrows, |arr| {
                if witness.is_some() {
                    return;
                }
                let y = encode(&arr.iter().map(|&a| g.tgt[a]).collect::<Vec<_>>(), n0);
                let l = g.product((h.arr)(arr), self.alpha[i]);
                let r = g.product(self.alpha[y], (f.arr)(arr));
                if l.is_none() || l != r {
                    witness = Some(format!("alpha is not natural along {:?}", arr.iter().map(|&a| &g.arrows[a]).collect::<Vec<_>>()));
                }
            });
        }
        witness
    }

    /// Exists `eta: id => (x -> m(e, x))` with `eta(e) = 1_e`, and the
    /// analogues for right units and for inverses against the constant
    /// functor at `e`.
    fn two_morphism_exists(&self, which: usize) -> bool {
        let g = &self.presentation;
        let e = self.unit;
        let ue = g.unit[e];
        let id = TupleFunctor { obj: Box::new(|x: &[usize]| x[0]), arr: Box::new(|a: &[usize]| a[0]) };
        let target = match which {
            0 => TupleFunctor {
                obj: Box::new(move |x: &[usize]| self.m_obj(e, x[0])),
                arr: Box::new(move |a: &[usize]| self.m_arr(ue, a[0])),
            },
            1 => TupleFunctor {
                obj: Box::new(move |x: &[usize]| self.m_obj(x[0], e)),
                arr: Box::new(move |a: &[usize]| self.m_arr(a[0], ue)),
            },
            2 => TupleFunctor {
                obj: Box::new(move |x: &[usize]| self.m_obj(self.inv_objects[x[0]], x[0])),
                arr: Box::new(move |a: &[usize]| self.m_arr(self.inv_arrows[a[0]], a[0])),
            },
            _ => TupleFunctor {
                obj: Box::new(move |x: &[usize]| self.m_obj(x[0], self.inv_objects[x[0]])),
                arr: Box::new(move |a: &[usize]| self.m_arr(a[0], self.inv_arrows[a[0]])),
            },
        };
        let constant = TupleFunctor { obj: Box::new(move |_: &[usize]| e), arr: Box::new(move |_: &[usize]| ue) };
        let (src, dst) = if which < 2 { (&id, &target) } else { (&target, &constant) };
        !natural_transformations(g, 1, src, dst, &[(e, ue)], 1).is_empty()
    }

    /// Every associator `m(id x m) => m(m x id)`, up to `cap`.
    pub fn all_alphas(&self, cap: usize) -> Vec<Vec<usize>> {
        let (f, h) = self.assoc_functors();
        natural_transformations(&self.presentation, 3, &f, &h, &[], cap)
    }

    pub fn axiom_suite(&self) -> WeinsteinReport {
        let m_homomorphism = self.check_m();
        let i_homomorphism = self.check_i();
        let alpha_natural = if m_homomorphism.is_none() { self.check_alpha() } else { Some("m is not a functor".into()) };
        let ok = m_homomorphism.is_none() && i_homomorphism.is_none();
        let [left_unit, right_unit, left_inverse, right_inverse] = [0, 1, 2, 3].map(|w| ok && self.two_morphism_exists(w));
        let e = self.unit;
        let identity_restrictions = alpha_natural.is_none() && self.alpha_at(e, e, e) == self.presentation.unit[e];
        let cap = 4096;
        let valid_alphas = if ok { self.all_alphas(cap).len() } else { 0 };
        let pass = ok && alpha_natural.is_none() && left_unit && right_unit && left_inverse && right_inverse && identity_restrictions;
        WeinsteinReport {
            m_homomorphism,
            i_homomorphism,
            alpha_natural,
            left_unit,
            right_unit,
            left_inverse,
            right_inverse,
            identity_restrictions,
            valid_alphas,
            alpha_cap: cap,
            pass,
        }
    }

    /// The composite of the six faces of the associativity cube on
    /// `(x1, x2, x3, x4)`, an arrow at `m(m(m(x1, x2), x3), x4)`:
    ///
    /// `alpha(x1 x2, x3, x4)`, `id`, `alpha(x1, x2, x3 x4)`,
    /// `m(1, alpha(x2, x3, x4))^-1`, `alpha(x1, x2 x3, x4)^-1`,
    /// `m(alpha(x1, x2, x3), 1)^-1`, composed in this order.
    pub fn pentagon_defect(&self, x: [usize; 4]) -> Result<PentagonDefect, GroupoidError> {
        let g = &self.presentation;
        let m = |a: usize, b: usize| self.m_obj(a, b);
        let [x1, x2, x3, x4] = x;
        let u = |o: usize| g.unit[o];
        let faces = [
            self.alpha_at(m(x1, x2), x3, x4),
            u(m(m(m(x1, x2), x3), x4)),
            self.alpha_at(x1, x2, m(x3, x4)),
            g.inv[self.m_arr(u(x1), self.alpha_at(x2, x3, x4))],
            g.inv[self.alpha_at(x1, m(x2, x3), x4)],
            g.inv[self.m_arr(self.alpha_at(x1, x2, x3), u(x4))],
        ];
        let mut acc = faces[0];
        for &f in &faces[1..] {
            acc = g.compose(acc, f)?;
        }
        let object = g.tgt[acc];
        Ok(PentagonDefect {
            objects: x.map(|o| g.objects[o].clone()),
            defect: g.arrows[acc].clone(),
            identity: g.arrows[u(object)].clone(),
            trivial: g.is_unit(acc) && g.src[acc] == object,
        })
    }

    /// Defects on every 4-tuple of objects.
    pub fn pentagon_all(&self) -> Result<Vec<PentagonDefect>, GroupoidError> {
        let n0 = self.n0();
        (0..n0.pow(4)).map(|i| {
            let v = decode(i, n0, 4);
            self.pentagon_defect([v[0], v[1], v[2], v[3]])
        })
        .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PentagonDefect {
    pub objects: [String; 4],
    pub defect: String,
    pub identity: String,
    pub trivial: bool,
}

// ---------------------------------------------------------------------------
// json for models

#[derive(Serialize, Deserialize)]
struct ModelJson {
    groupoid: serde_json::Value,
    /// `[[x, y, xy]]` on objects
    m_objects: Vec<[String; 3]>,
    /// `[[a, b, m(a,b)]]` on arrows
    m_arrows: Vec<[String; 3]>,
    unit: String,
    /// `[[x, i(x)]]` and `[[a, i(a)]]`
    inv_objects: Vec<[String; 2]>,
    inv_arrows: Vec<[String; 2]>,
    /// `[[x1, x2, x3, alpha]]`
    alpha: Vec<[String; 4]>,
}

impl WeinsteinModel {
    pub fn from_json(text: &str) -> Result<WeinsteinModel, GroupoidError> {
        let j: ModelJson = serde_json::from_str(text).map_err(|e| GroupoidError::Json(e.to_string()))?;
        let g = FiniteGroupoid::from_json(&j.groupoid.to_string())?;
        let (n0, n1) = (g.n_objects(), g.n_arrows());
        let o = |l: &str| g.object_index(l);
        let a = |l: &str| g.arrow_index(l);
        let mut m_objects = vec![usize::MAX; n0 * n0];
        for [x, y, z] in &j.m_objects {
            m_objects[o(x)? * n0 + o(y)?] = o(z)?;
        }
        let mut m_arrows = vec![usize::MAX; n1 * n1];
        for [x, y, z] in &j.m_arrows {
            m_arrows[a(x)? * n1 + a(y)?] = a(z)?;
        }
        let mut inv_objects = vec![usize::MAX; n0];
        for [x, y] in &j.inv_objects {
            inv_objects[o(x)?] = o(y)?;
        }
        let mut inv_arrows = vec![usize::MAX; n1];
        for [x, y] in &j.inv_arrows {
            inv_arrows[a(x)?] = a(y)?;
        }
        let mut alpha = vec![usize::MAX; n0 * n0 * n0];
        for [x1, x2, x3, v] in &j.alpha {
            alpha[(o(x1)? * n0 + o(x2)?) * n0 + o(x3)?] = a(v)?;
        }
        if m_objects.iter().chain(&m_arrows).chain(&inv_objects).chain(&inv_arrows).chain(&alpha).any(|v| *v == usize::MAX) {
            return Err(GroupoidError::Table("structure tables must be total".into()));
        }
        Ok(WeinsteinModel { unit: o(&j.unit)?, presentation: g, m_objects, m_arrows, inv_objects, inv_arrows, alpha })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let g = &self.presentation;
        let (n0, n1) = (self.n0(), self.n1());
        let ol = |i: usize| g.objects[i].clone();
        let al = |i: usize| g.arrows[i].clone();
        let j = ModelJson {
            groupoid: g.to_json(),
            m_objects: (0..n0 * n0).map(|i| [ol(i / n0), ol(i % n0), ol(self.m_objects[i])]).collect(),
            m_arrows: (0..n1 * n1).map(|i| [al(i / n1), al(i % n1), al(self.m_arrows[i])]).collect(),
            unit: ol(self.unit),
            inv_objects: (0..n0).map(|i| [ol(i), ol(self.inv_objects[i])]).collect(),
            inv_arrows: (0..n1).map(|i| [al(i), al(self.inv_arrows[i])]).collect(),
            alpha: (0..n0 * n0 * n0)
                .map(|i| {
                    let v = decode(i, n0, 3);
                    [ol(v[0]), ol(v[1]), ol(v[2]), al(self.alpha[i])]
                })
                .collect(),
        };
        serde_json::to_value(j).expect("serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_groupoids_pass_axioms() {
        assert!(FiniteGroupoid::z2().axiom_check().pass);
        assert!(FiniteGroupoid::pair(3).axiom_check().pass);
        assert!(FiniteGroupoid::cyclic(5).direct_product(&FiniteGroupoid::pair(2)).axiom_check().pass);
        assert!(FiniteGroupoid::discrete(vec!["a".into(), "b".into()]).axiom_check().pass);
    }

    #[test]
    fn corrupted_product_is_reported() {
        let g = FiniteGroupoid::cyclic(3).with_product_entry(1, 1, 0);
        let rep = g.axiom_check();
        assert!(!rep.pass);
        assert!(rep.violations.iter().any(|v| matches!(v, Violation::Associativity(..))));
    }

    #[test]
    fn json_round_trip() {
        let g = FiniteGroupoid::pair(2);
        let back = FiniteGroupoid::from_json(&g.to_json().to_string()).unwrap();
        assert_eq!(back, g);
        let m = WeinsteinModel::z2_bz2();
        assert_eq!(WeinsteinModel::from_json(&m.to_json().to_string()).unwrap(), m);
    }

    #[test]
    fn torsors() {
        let g = FiniteGroupoid::pair(3);
        let unit = RightAction::on_arrows(&g);
        assert!(torsor_check(&g, &unit, &g.tgt.clone(), 3).pass);
        let z2 = FiniteGroupoid::z2();
        let trivial = RightAction { moment: vec![0], table: vec![Some(0), Some(0)] };
        let r = torsor_check(&z2, &trivial, &[0], 1);
        assert!(!r.pass && r.failure.unwrap().contains("fixed"));
        let (act, pi) = pullback_torsor(&g, &[0, 2, 2, 1]);
        assert!(torsor_check(&g, &act, &pi, 4).pass);
    }

    #[test]
    fn cocycle_twist_of_z2_is_z4() {
        let z2 = FiniteGroupoid::z2();
        let mut c = Cocycle::zero(Coefficients::Cyclic(2));
        c.values.insert((1, 1), 1);
        assert!(c.violations(&z2).unwrap().is_empty());
        let e = cocycle_semidirect(&z2, &c).unwrap();
        assert!(e.axiom_check().pass);
        // (-1, 0) has order 4
        let g = e.arrow_index("(-1,0)").unwrap();
        let mut p = g;
        let mut order = 1;
        while !e.is_unit(p) {
            p = e.compose(p, g).unwrap();
            order += 1;
        }
        assert_eq!(order, 4);
        let d = cocycle_semidirect(&z2, &Cocycle::zero(Coefficients::Cyclic(2))).unwrap();
        assert!(d.axiom_check().pass);
    }

    #[test]
    fn broken_cocycle_breaks_associativity() {
        let z3 = FiniteGroupoid::cyclic(3);
        let mut c = Cocycle::zero(Coefficients::Cyclic(3));
        c.values.insert((1, 2), 1);
        let bad = c.violations(&z3).unwrap();
        assert!(!bad.is_empty());
        let rep = cocycle_semidirect(&z3, &c).unwrap().axiom_check();
        assert!(rep.violations.iter().any(|v| matches!(v, Violation::Associativity(..))));
    }

    #[test]
    fn integer_window_overflow_is_an_error() {
        let z2 = FiniteGroupoid::z2();
        let c = Cocycle::zero(Coefficients::IntegerWindow { lo: -1, hi: 1 });
        assert!(matches!(cocycle_semidirect(&z2, &c), Err(GroupoidError::Overflow(_, -1, 1))));
        let one = Cocycle::zero(Coefficients::IntegerWindow { lo: 0, hi: 0 });
        assert!(cocycle_semidirect(&z2, &one).unwrap().axiom_check().pass);
    }

    #[test]
    fn weinstein_examples() {
        let b = WeinsteinModel::bz2();
        let r = b.axiom_suite();
        assert!(r.pass, "{:?}", r);
        assert_eq!(r.valid_alphas, 2);
        for d in b.pentagon_all().unwrap() {
            assert!(d.trivial);
        }
        let g = WeinsteinModel::z2_bz2();
        let r = g.axiom_suite();
        assert!(r.pass, "{:?}", r);
        assert_eq!(r.valid_alphas, 256);
    }

    #[test]
    fn pentagon_composite_is_the_middle_coboundary() {
        // with alpha(x) = (x1x2x3, x1x2x3) the six faces multiply to x2 x3
        let g = WeinsteinModel::z2_bz2();
        for d in g.pentagon_all().unwrap() {
            let x2 = d.objects[1] == "-1";
            let x3 = d.objects[2] == "-1";
            assert_eq!(d.trivial, x2 == x3, "{:?}", d);
        }
        let d = g.pentagon_defect([0, 0, 0, 1]).unwrap();
        assert_eq!(d.identity, "(-1,1)");
        let strict = WeinsteinModel::z2_bz2_with(|_, _, _| 0);
        assert!(strict.axiom_suite().pass);
        assert!(strict.pentagon_all().unwrap().iter().all(|d| d.trivial));
    }

    #[test]
    fn non_functorial_multiplication_is_caught() {
        let mut g = WeinsteinModel::z2_bz2();
        g.m_arrows[1 * 4 + 1] = 1;
        let r = g.axiom_suite();
        assert!(!r.pass && r.m_homomorphism.is_some());
    }
}

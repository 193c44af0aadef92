//! Symmetric syndeticity and dense orbit sets.
//!
//! A set is symmetrically syndetic when it is syndetic and every nonempty
//! meet `(∩_{f∈F₁} f⁻¹A) ∩ (∩_{f∈F₂} f⁻¹A^c)` is syndetic. Two families of
//! meets are supported: all finite `F₁, F₂ ⊆ G`, and the anchored family with
//! `F₁ ⊆ A`, `F₂ ⊆ A^c` (every anchored meet contains the identity).
//!
//! For periodic subsets of ℤ and subsets of finite groups every meet is again
//! periodic (resp. a subset of a finite group), so the closure of meets is a
//! finite search over bitmasks and the answer is exact.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupModel};
use crate::report::{Certificate, DecisionReport, Scope, Verdict};
use crate::set_algebra::{normalize, FreeGroupNF, NormalForm, PeriodicNF, SetExpr, Subset};

/// Largest period or group order handled by the bitmask closure.
pub const MAX_MASK_WIDTH: usize = 128;

/// Largest complement enumerated subset by subset in finite groups.
pub const MAX_COMPLEMENT_ENUM: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymmetricVariant {
    Plain,
    Completely,
    StronglyCompletely,
}

impl FromStr for SymmetricVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(SymmetricVariant::Plain),
            "completely" => Ok(SymmetricVariant::Completely),
            "strongly-completely" | "strongly" => Ok(SymmetricVariant::StronglyCompletely),
            _ => Err(Error::Parse(format!("unknown variant {s:?}"))),
        }
    }
}

impl fmt::Display for SymmetricVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymmetricVariant::Plain => "plain",
            SymmetricVariant::Completely => "completely",
            SymmetricVariant::StronglyCompletely => "strongly-completely",
        })
    }
}

/// Which meets are quantified over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeetFamily {
    /// `F₁, F₂` range over all finite subsets; meets must be syndetic or empty.
    AllTranslates,
    /// `F₁ ⊆ A`, `F₂ ⊆ A^c`; meets must be syndetic.
    Anchored,
}

/// Why a meet disqualifies the set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeetDefect {
    /// The set itself is empty, hence not syndetic.
    EmptyBase,
    /// A finite nonempty meet in an infinite group.
    Finite,
    /// A nonempty meet whose periodic part (in a finite group: the meet
    /// itself) is proper, so it is not completely syndetic.
    Proper,
    /// A meet containing the identity with no element in `start..start+len`.
    Gap { start: i64, len: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailingPair {
    pub f1: Vec<GroupElement>,
    pub f2: Vec<GroupElement>,
    pub meet: SetExpr,
    pub defect: MeetDefect,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetricEvidence {
    pub variant: SymmetricVariant,
    pub family: MeetFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failing: Option<FailingPair>,
    pub meets_checked: u64,
    pub scope: Scope,
}

/// `(∩_{f∈F₁} f⁻¹A) ∩ (∩_{f∈F₂} f⁻¹A^c)`; the whole group when both are empty.
pub fn meet_expr(g: &GroupModel, a: &SetExpr, f1: &[GroupElement], f2: &[GroupElement]) -> SetExpr {
    let mut args: Vec<SetExpr> = f1.iter().map(|f| a.clone().translate(g.inv(f))).collect();
    args.extend(f2.iter().map(|f| a.clone().complement().translate(g.inv(f))));
    match args.len() {
        0 => SetExpr::All,
        1 => args.pop().expect("one argument"),
        _ => SetExpr::intersection(args),
    }
}

impl FailingPair {
    /// Recomputes the meet from `A` and confirms the recorded defect.
    pub fn replay(&self, a: &Subset, family: MeetFamily) -> Result<bool> {
        let g = a.group();
        for x in self.f1.iter().chain(&self.f2) {
            g.validate(x)?;
        }
        if family == MeetFamily::Anchored
            && self.defect != MeetDefect::EmptyBase
            && (self.f1.iter().any(|x| !a.contains(x)) || self.f2.iter().any(|x| a.contains(x)))
        {
            return Ok(false);
        }
        let meet = Subset::new(g, &meet_expr(g, a.expr(), &self.f1, &self.f2))?;
        if let (Some(m), Some(recorded)) = (meet.nf(), normalize(&self.meet.resolve(g)?, g)?) {
            if *m != recorded {
                return Ok(false);
            }
        }
        Ok(match (&self.defect, meet.nf()) {
            (MeetDefect::EmptyBase, Some(nf)) => self.f1 == [g.identity()] && self.f2.is_empty() && nf.is_empty(),
            (MeetDefect::Finite, Some(NormalForm::Periodic(p))) => p.is_finite() && !p.is_empty(),
            (MeetDefect::Finite, Some(NormalForm::Free(f))) => f.is_finite() && !f.is_empty(),
            (MeetDefect::Proper, Some(NormalForm::Periodic(p))) => !p.is_empty() && !p.periodic_part().is_all(),
            (MeetDefect::Proper, Some(NormalForm::Finite(b))) => !b.is_empty() && !b.is_all(),
            (MeetDefect::Gap { start, len }, _) if g.is_integers() => {
                meet.contains(&GroupElement::Int(0))
                    && (*start..*start + *len as i64).all(|x| !meet.contains(&GroupElement::Int(x)))
            }
            _ => false,
        })
    }
}

impl SymmetricEvidence {
    pub fn replay(&self, a: &Subset) -> Result<bool> {
        match &self.failing {
            Some(p) => p.replay(a, self.family),
            None => Ok(true),
        }
    }
}

pub struct SymmetricOutcome {
    pub verdict: Verdict,
    pub evidence: SymmetricEvidence,
}

/// Breadth-first closure of meets under intersection with generators.
/// Returns the number of meets visited and, on failure, the generator path
/// reaching the first defective meet.
fn closure<K: Clone + Eq + Hash>(
    start: K,
    gens: usize,
    step: impl Fn(&K, usize) -> K,
    mut check: impl FnMut(&K) -> Result<Option<MeetDefect>>,
    budget: u64,
    max_depth: usize,
) -> Result<(u64, Option<(Vec<usize>, K, MeetDefect)>)> {
    let mut parent: HashMap<K, Option<(K, usize)>> = HashMap::new();
    let mut queue = VecDeque::new();
    parent.insert(start.clone(), None);
    queue.push_back((start, 0usize));
    while let Some((m, depth)) = queue.pop_front() {
        if let Some(d) = check(&m)? {
            let mut path = Vec::new();
            let mut cur = m.clone();
            while let Some(Some((p, i))) = parent.get(&cur) {
                path.push(*i);
                cur = p.clone();
            }
            path.reverse();
            return Ok((parent.len() as u64, Some((path, m, d))));
        }
        if depth == max_depth {
            continue;
        }
        for i in 0..gens {
            let next = step(&m, i);
            if !parent.contains_key(&next) {
                if parent.len() as u64 >= budget {
                    return Err(Error::scale("meet closure", parent.len() as u128 + 1, budget as u128));
                }
                parent.insert(next.clone(), Some((m.clone(), i)));
                queue.push_back((next, depth + 1));
            }
        }
    }
    Ok((parent.len() as u64, None))
}

struct Gen {
    f: GroupElement,
    complement: bool,
}

fn split_path(gens: &[Gen], path: &[usize]) -> (Vec<GroupElement>, Vec<GroupElement>) {
    let mut f1 = Vec::new();
    let mut f2 = Vec::new();
    for &i in path {
        if gens[i].complement {
            f2.push(gens[i].f.clone());
        } else {
            f1.push(gens[i].f.clone());
        }
    }
    f1.sort();
    f1.dedup();
    f2.sort();
    f2.dedup();
    (f1, f2)
}

/// Elements in order with their translate masks (bit `y` set when `f·y ∈ A`,
/// in ℤ/m reading `f + y`).
fn modular_translates(a: &[bool], elems: &[GroupElement], mul: impl Fn(usize, usize) -> usize) -> Vec<u128> {
    (0..elems.len()).map(|f| (0..a.len()).filter(|&y| a[mul(f, y)]).fold(0u128, |m, y| m | (1 << y))).collect()
}

fn mask_search(
    a: &Subset,
    bits: &[bool],
    elems: Vec<GroupElement>,
    mul: impl Fn(usize, usize) -> usize,
    variant: SymmetricVariant,
    family: MeetFamily,
    cfg: &RunConfig,
) -> Result<SymmetricOutcome> {
    let width = bits.len();
    if width > MAX_MASK_WIDTH {
        return Err(Error::scale("period or group order", width as u128, MAX_MASK_WIDTH as u128));
    }
    let full: u128 = if width == 128 { !0 } else { (1u128 << width) - 1 };
    let translates = modular_translates(bits, &elems, mul);
    let mut gens = Vec::new();
    let mut masks = Vec::new();
    for (i, f) in elems.iter().enumerate() {
        let inside = bits[i];
        if family == MeetFamily::AllTranslates || inside {
            gens.push(Gen { f: f.clone(), complement: false });
            masks.push(translates[i]);
        }
        if family == MeetFamily::AllTranslates || !inside {
            gens.push(Gen { f: f.clone(), complement: true });
            masks.push(full & !translates[i]);
        }
    }
    if !bits.iter().any(|&b| b) {
        return Ok(refuted_base(a, variant, family));
    }
    let g = a.group();
    let (visited, failure) = closure(
        full,
        gens.len(),
        |m, i| m & masks[i],
        |&m| {
            Ok(match variant {
                SymmetricVariant::Plain => None,
                _ if m != 0 && m != full => Some(MeetDefect::Proper),
                _ => None,
            })
        },
        cfg.search_budget,
        usize::MAX,
    )?;
    let failing = failure.map(|(path, _, defect)| {
        let (f1, f2) = split_path(&gens, &path);
        let meet = meet_expr(g, a.expr(), &f1, &f2);
        FailingPair { f1, f2, meet, defect }
    });
    let verdict = if failing.is_some() { Verdict::Refuted } else { Verdict::Proved };
    Ok(SymmetricOutcome {
        verdict,
        evidence: SymmetricEvidence { variant, family, failing, meets_checked: visited, scope: Scope::Exact },
    })
}

fn refuted_base(a: &Subset, variant: SymmetricVariant, family: MeetFamily) -> SymmetricOutcome {
    let g = a.group();
    let f1 = vec![g.identity()];
    SymmetricOutcome {
        verdict: Verdict::Refuted,
        evidence: SymmetricEvidence {
            variant,
            family,
            failing: Some(FailingPair {
                meet: meet_expr(g, a.expr(), &f1, &[]),
                f1,
                f2: vec![],
                defect: MeetDefect::EmptyBase,
            }),
            meets_checked: 1,
            scope: Scope::Exact,
        },
    }
}

/// A set with finitely many exceptional points has a finite nonempty anchored
/// meet: pair an exception `x` with a far point `y ≡ x` on the other side.
fn exception_pair(a: &Subset, p: &PeriodicNF) -> (Vec<GroupElement>, Vec<GroupElement>) {
    let m = p.modulus() as i64;
    let x = *p.exceptions().iter().next().expect("exceptions");
    let bound = p.exceptions().iter().map(|e| e.abs()).max().unwrap_or(0);
    let y = x + m * (2 * bound / m + 1);
    let (x, y) = (GroupElement::Int(x), GroupElement::Int(y));
    if a.contains(&x) {
        (vec![x], vec![y])
    } else {
        (vec![y], vec![x])
    }
}

fn periodic_search(
    a: &Subset,
    p: &PeriodicNF,
    variant: SymmetricVariant,
    family: MeetFamily,
    cfg: &RunConfig,
) -> Result<SymmetricOutcome> {
    if p.is_empty() {
        return Ok(refuted_base(a, variant, family));
    }
    if !p.is_periodic() {
        let g = a.group();
        let (f1, f2) = exception_pair(a, p);
        let meet = meet_expr(g, a.expr(), &f1, &f2);
        let nf = normalize(&meet, g)?;
        debug_assert!(matches!(&nf, Some(NormalForm::Periodic(q)) if q.is_finite() && !q.is_empty()));
        return Ok(SymmetricOutcome {
            verdict: Verdict::Refuted,
            evidence: SymmetricEvidence {
                variant,
                family,
                failing: Some(FailingPair { f1, f2, meet, defect: MeetDefect::Finite }),
                meets_checked: 1,
                scope: Scope::Exact,
            },
        });
    }
    let m = p.modulus() as usize;
    let elems: Vec<GroupElement> = (0..m as i64).map(GroupElement::Int).collect();
    mask_search(a, p.mask(), elems, |f, y| (f + y) % m, variant, family, cfg)
}

fn finite_search(
    a: &Subset,
    bits: &[bool],
    variant: SymmetricVariant,
    family: MeetFamily,
    cfg: &RunConfig,
) -> Result<SymmetricOutcome> {
    let t = a.group().table().expect("finite group").clone();
    let elems: Vec<GroupElement> = (0..t.order()).map(GroupElement::Index).collect();
    mask_search(a, bits, elems, |f, y| t.mul(f, y), variant, family, cfg)
}

/// Meets of depth at most two over `ball(radius)`, computed exactly in normal
/// form. Finite nonempty meets refute every variant; otherwise nothing is
/// claimed beyond the window.
fn free_search(
    a: &Subset,
    nf: &FreeGroupNF,
    variant: SymmetricVariant,
    family: MeetFamily,
    cfg: &RunConfig,
) -> Result<SymmetricOutcome> {
    if nf.is_empty() {
        return Ok(refuted_base(a, variant, family));
    }
    let g = a.group();
    let comp = nf.complement();
    let mut gens = Vec::new();
    let mut sets = Vec::new();
    for f in g.ball(cfg.radius)? {
        let w = f.as_word().expect("free element").inverse();
        let inside = a.contains(&f);
        if family == MeetFamily::AllTranslates || inside {
            sets.push(nf.translate(&w));
            gens.push(Gen { f: f.clone(), complement: false });
        }
        if family == MeetFamily::AllTranslates || !inside {
            sets.push(comp.translate(&w));
            gens.push(Gen { f, complement: true });
        }
    }
    let all = FreeGroupNF::all(nf.rank());
    let (visited, failure) = closure(
        all,
        gens.len(),
        |m, i| m.intersection(&sets[i]),
        |m| Ok((m.is_finite() && !m.is_empty()).then_some(MeetDefect::Finite)),
        cfg.search_budget,
        2,
    )?;
    let scope = Scope::Window { radius: cfg.radius as u64 };
    Ok(match failure {
        Some((path, _, defect)) => {
            let (f1, f2) = split_path(&gens, &path);
            let meet = meet_expr(g, a.expr(), &f1, &f2);
            SymmetricOutcome {
                verdict: Verdict::Refuted,
                evidence: SymmetricEvidence {
                    variant,
                    family,
                    failing: Some(FailingPair { f1, f2, meet, defect }),
                    meets_checked: visited,
                    scope: Scope::Exact,
                },
            }
        }
        None => SymmetricOutcome {
            verdict: Verdict::UndecidedAtScale,
            evidence: SymmetricEvidence { variant, family, failing: None, meets_checked: visited, scope },
        },
    })
}

/// Longest run of non-members of `member` (indexed from `base`) that lies
/// strictly inside the slice, as `(start, len)`.
fn longest_interior_gap(member: &[bool], base: i64) -> Option<(i64, u64)> {
    let mut best: Option<(i64, u64)> = None;
    let mut last: Option<usize> = None;
    for (i, &m) in member.iter().enumerate() {
        if m {
            if let Some(l) = last {
                let len = (i - l - 1) as u64;
                if len > 0 && best.is_none_or(|(_, b)| len > b) {
                    best = Some((base + l as i64 + 1, len));
                }
            }
            last = Some(i);
        }
    }
    best
}

/// Anchored or unrestricted meets of depth at most two over `[-radius, radius]`
/// for aperiodic subsets of ℤ, evaluated on the integer window. A meet through
/// the origin with an interior gap longer than `max_k + 1` is reported as not
/// syndetic at that scale.
fn windowed_int_search(
    a: &Subset,
    variant: SymmetricVariant,
    family: MeetFamily,
    cfg: &RunConfig,
) -> Result<SymmetricOutcome> {
    let w = cfg.int_window as i64;
    let r = cfg.radius as i64;
    let base = -w - r;
    let member: Vec<bool> = (base..=w + r).map(|x| a.contains(&GroupElement::Int(x))).collect();
    let at = |x: i64| member[(x - base) as usize];
    let mut gens = Vec::new();
    for f in a.group().ball(cfg.radius)? {
        let fi = f.as_int().expect("integer");
        if family == MeetFamily::AllTranslates || at(fi) {
            gens.push(Gen { f: f.clone(), complement: false });
        }
        if family == MeetFamily::AllTranslates || !at(fi) {
            gens.push(Gen { f, complement: true });
        }
    }
    let mut combos: Vec<Vec<usize>> = vec![vec![]];
    combos.extend((0..gens.len()).map(|i| vec![i]));
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            combos.push(vec![i, j]);
        }
    }
    let threshold = cfg.max_k as u64 + 1;
    let g = a.group();
    let mut checked = 0u64;
    for combo in combos {
        checked += 1;
        let meet: Vec<bool> = (-w..=w)
            .map(|y| combo.iter().all(|&i| at(y + gens[i].f.as_int().expect("integer")) != gens[i].complement))
            .collect();
        if combo.is_empty() && !meet.iter().any(|&b| b) {
            return Ok(refuted_base(a, variant, family));
        }
        if !meet[w as usize] {
            continue;
        }
        if let Some((start, len)) = longest_interior_gap(&meet, -w) {
            if len > threshold {
                let (f1, f2) = split_path(&gens, &combo);
                let expr = meet_expr(g, a.expr(), &f1, &f2);
                return Ok(SymmetricOutcome {
                    verdict: Verdict::Refuted,
                    evidence: SymmetricEvidence {
                        variant,
                        family,
                        failing: Some(FailingPair { f1, f2, meet: expr, defect: MeetDefect::Gap { start, len } }),
                        meets_checked: checked,
                        scope: Scope::Window { radius: cfg.int_window },
                    },
                });
            }
        }
    }
    Ok(SymmetricOutcome {
        verdict: Verdict::UndecidedAtScale,
        evidence: SymmetricEvidence {
            variant,
            family,
            failing: None,
            meets_checked: checked,
            scope: Scope::Window { radius: cfg.int_window },
        },
    })
}

/// Runs one family of meets for one variant.
pub fn symmetric_search(
    a: &Subset,
    variant: SymmetricVariant,
    family: MeetFamily,
    cfg: &RunConfig,
) -> Result<SymmetricOutcome> {
    match a.nf() {
        Some(NormalForm::Periodic(p)) => periodic_search(a, p, variant, family, cfg),
        Some(NormalForm::Finite(b)) => finite_search(a, b.bits(), variant, family, cfg),
        Some(NormalForm::Free(nf)) => free_search(a, nf, variant, family, cfg),
        None => windowed_int_search(a, variant, family, cfg),
    }
}

/// Decides symmetric syndeticity, running both families of meets and
/// comparing them.
pub fn symmetric_syndetic(a: &Subset, variant: SymmetricVariant, cfg: &RunConfig) -> Result<DecisionReport> {
    let def = symmetric_search(a, variant, MeetFamily::AllTranslates, cfg)?;
    let anchored = symmetric_search(a, variant, MeetFamily::Anchored, cfg)?;
    let agree = def.verdict == anchored.verdict;
    let verdict = if agree || def.evidence.scope != Scope::Exact { def.verdict } else { Verdict::UndecidedAtScale };
    let scope = def.evidence.scope;
    let mut report = DecisionReport::new("check-symmetric", &a.group().spec_name(), verdict, scope)
        .with_set(a.spec())
        .with_scale("variant", variant)
        .with_scale("anchored_verdict", anchored.verdict)
        .with_scale("anchored_meets", anchored.evidence.meets_checked)
        .with_certificate(Certificate::Symmetric(def.evidence));
    if !agree {
        report = report.note("the unrestricted and anchored families of meets disagree");
    }
    if a.nf().is_none() || matches!(a.nf(), Some(NormalForm::Free(_))) {
        report = report.with_scale("radius", cfg.radius);
    }
    Ok(report)
}

/// Plain exact answer for periodic and finite sets, `None` elsewhere.
pub fn is_symmetrically_syndetic_exact(a: &Subset, cfg: &RunConfig) -> Result<Option<bool>> {
    let o = symmetric_search(a, SymmetricVariant::Plain, MeetFamily::AllTranslates, cfg)?;
    Ok(match (o.verdict, o.evidence.scope) {
        (Verdict::Proved, Scope::Exact) => Some(true),
        (Verdict::Refuted, Scope::Exact) => Some(false),
        _ => None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DenseOrbitMethod {
    SubgroupOracle,
    SymmetricSubsetOracle,
    GapSufficiency,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapRecord {
    pub start: i64,
    pub len: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenseOrbitWitness {
    pub method: DenseOrbitMethod,
    /// Subgroup `H` of a failing coset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subgroup: Option<Vec<GroupElement>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coset_rep: Option<GroupElement>,
    /// An element outside `A·gH`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub missed: Option<GroupElement>,
    /// A symmetrically syndetic `B ⊆ A^c`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetric_subset: Option<SetExpr>,
    /// Gaps of `A^c` with strictly growing lengths.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gaps: Vec<GapRecord>,
    pub scope: Scope,
}

impl DenseOrbitWitness {
    fn bare(method: DenseOrbitMethod, scope: Scope) -> Self {
        DenseOrbitWitness {
            method,
            subgroup: None,
            coset_rep: None,
            missed: None,
            symmetric_subset: None,
            gaps: vec![],
            scope,
        }
    }
}

fn closure_of(t: &crate::group::CayleyTable, mut set: u128) -> u128 {
    set |= 1;
    loop {
        let mut next = set;
        for x in 0..t.order() {
            if set >> x & 1 == 1 {
                for y in 0..t.order() {
                    if set >> y & 1 == 1 {
                        next |= 1 << t.mul(x, y);
                    }
                }
            }
        }
        if next == set {
            return set;
        }
        set = next;
    }
}

/// All subgroups of a finite group as element masks, ordered by size then mask.
pub fn subgroups(t: &crate::group::CayleyTable) -> Result<Vec<u128>> {
    if t.order() > MAX_MASK_WIDTH {
        return Err(Error::scale("group order", t.order() as u128, MAX_MASK_WIDTH as u128));
    }
    let mut seen = vec![1u128];
    let mut i = 0;
    while i < seen.len() {
        let h = seen[i];
        for g in 0..t.order() {
            if h >> g & 1 == 0 {
                let k = closure_of(t, h | 1 << g);
                if !seen.contains(&k) {
                    seen.push(k);
                }
            }
        }
        i += 1;
    }
    seen.sort_by_key(|&h| (h.count_ones(), h));
    Ok(seen)
}

fn mask_elements(mask: u128, order: usize) -> Vec<GroupElement> {
    (0..order).filter(|&i| mask >> i & 1 == 1).map(GroupElement::Index).collect()
}

fn product_mask(t: &crate::group::CayleyTable, a: &[bool], right: u128) -> u128 {
    let mut out = 0u128;
    for x in (0..t.order()).filter(|&x| a[x]) {
        for y in (0..t.order()).filter(|&y| right >> y & 1 == 1) {
            out |= 1 << t.mul(x, y);
        }
    }
    out
}

/// Dense orbit decision for finite groups: `A` is a dense orbit set iff
/// `A·gH = G` for every subgroup `H` and every `g`.
pub fn dense_orbit_finite_exact(a: &Subset) -> Result<DecisionReport> {
    let g = a.group();
    let t = g.table().ok_or_else(|| Error::InvalidInput("the subgroup oracle needs a finite group".into()))?;
    let Some(NormalForm::Finite(bits)) = a.nf() else {
        return Err(Error::InvalidInput("expected a subset of a finite group".into()));
    };
    let n = t.order();
    let full: u128 = if n == 128 { !0 } else { (1u128 << n) - 1 };
    let subs = subgroups(t)?;
    let mut witness = DenseOrbitWitness::bare(DenseOrbitMethod::SubgroupOracle, Scope::Exact);
    let mut cosets = 0u64;
    'outer: for &h in &subs {
        let mut covered = 0u128;
        for rep in 0..n {
            if covered >> rep & 1 == 1 {
                continue;
            }
            let coset = mask_elements(h, n).iter().fold(0u128, |m, x| m | 1 << t.mul(rep, x.as_index().unwrap()));
            covered |= coset;
            cosets += 1;
            let image = product_mask(t, bits.bits(), coset);
            if image != full {
                let missed = (0..n).find(|&x| image >> x & 1 == 0).expect("proper image");
                witness.subgroup = Some(mask_elements(h, n));
                witness.coset_rep = Some(GroupElement::Index(rep));
                witness.missed = Some(GroupElement::Index(missed));
                break 'outer;
            }
        }
    }
    let verdict = if witness.missed.is_some() { Verdict::Refuted } else { Verdict::Proved };
    Ok(DecisionReport::new("dense-orbit", &g.spec_name(), verdict, Scope::Exact)
        .with_set(a.spec())
        .with_scale("method", DenseOrbitMethod::SubgroupOracle)
        .with_scale("subgroups", subs.len())
        .with_scale("cosets_checked", cosets)
        .with_certificate(Certificate::DenseOrbit(witness)))
}

fn dense_finite_via_symmetric(a: &Subset, bits: &[bool], cfg: &RunConfig) -> Result<DecisionReport> {
    let g = a.group();
    let comp: Vec<usize> = (0..bits.len()).filter(|&i| !bits[i]).collect();
    if comp.len() > MAX_COMPLEMENT_ENUM {
        return Err(Error::scale("complement size", comp.len() as u128, MAX_COMPLEMENT_ENUM as u128));
    }
    let mut tried = 0u64;
    for sel in 1u32..(1u32 << comp.len()) {
        tried += 1;
        let idx: Vec<GroupElement> =
            comp.iter().enumerate().filter(|&(j, _)| sel >> j & 1 == 1).map(|(_, &i)| GroupElement::Index(i)).collect();
        let expr = SetExpr::FiniteWords { elements: idx };
        let b = Subset::new(g, &expr)?;
        if is_symmetrically_syndetic_exact(&b, cfg)? == Some(true) {
            let mut w = DenseOrbitWitness::bare(DenseOrbitMethod::SymmetricSubsetOracle, Scope::Exact);
            w.symmetric_subset = Some(expr);
            return Ok(DecisionReport::new("dense-orbit", &g.spec_name(), Verdict::Refuted, Scope::Exact)
                .with_set(a.spec())
                .with_scale("method", DenseOrbitMethod::SymmetricSubsetOracle)
                .with_scale("subsets_tried", tried)
                .with_certificate(Certificate::DenseOrbit(w)));
        }
    }
    Ok(DecisionReport::new("dense-orbit", &g.spec_name(), Verdict::Proved, Scope::Exact)
        .with_set(a.spec())
        .with_scale("method", DenseOrbitMethod::SymmetricSubsetOracle)
        .with_scale("subsets_tried", tried)
        .with_certificate(Certificate::DenseOrbit(DenseOrbitWitness::bare(
            DenseOrbitMethod::SymmetricSubsetOracle,
            Scope::Exact,
        ))))
}

/// A single residue class inside the periodic part of `c` that avoids the
/// finitely many removed points.
fn progression_inside(c: &PeriodicNF) -> Option<SetExpr> {
    let m = c.modulus() as i64;
    let r = c.residues().first().copied()? as i64;
    let removed: Vec<i64> =
        c.exceptions().iter().copied().filter(|&x| x.rem_euclid(m) == r && !c.contains(x)).collect();
    let d = removed.len() as i64 + 1;
    let modulus = d * m;
    let i = (0..d).find(|&i| removed.iter().all(|&e| (e - (r + m * i)).rem_euclid(modulus) != 0))?;
    Some(SetExpr::residue(modulus as u64, &[(r + m * i) as u64]))
}

fn dense_periodic(a: &Subset, cfg: &RunConfig) -> Result<DecisionReport> {
    let g = a.group();
    let Some(NormalForm::Periodic(p)) = a.nf() else { unreachable!("periodic set") };
    let c = p.complement();
    let method = DenseOrbitMethod::SymmetricSubsetOracle;
    if c.periodic_part().is_empty() {
        return Ok(DecisionReport::new("dense-orbit", &g.spec_name(), Verdict::Proved, Scope::Exact)
            .with_set(a.spec())
            .with_scale("method", method)
            .with_certificate(Certificate::DenseOrbit(DenseOrbitWitness::bare(method, Scope::Exact)))
            .note("the complement is finite, so it has no syndetic subset"));
    }
    let cnf = NormalForm::Periodic(c.clone());
    let mut found = None;
    let mut tried = 0u64;
    'search: for m in 1..=cfg.periodic_cap.min(20) {
        for sel in 1u64..(1u64 << m) {
            let res: Vec<u64> = (0..m).filter(|r| sel >> r & 1 == 1).collect();
            tried += 1;
            let b = NormalForm::Periodic(PeriodicNF::periodic(m, &res));
            if let NormalForm::Periodic(q) = &b {
                if q.modulus() != m {
                    continue;
                }
            }
            if b.is_subset(&cnf)? {
                found = Some(SetExpr::residue(m, &res));
                break 'search;
            }
        }
    }
    let found = match found {
        Some(e) => Some(e),
        None => progression_inside(&c),
    };
    let Some(expr) = found else {
        return Ok(DecisionReport::new("dense-orbit", &g.spec_name(), Verdict::UndecidedAtScale, Scope::Exact)
            .with_set(a.spec())
            .with_scale("method", method)
            .with_scale("candidates_tried", tried));
    };
    let b = Subset::new(g, &expr)?;
    if is_symmetrically_syndetic_exact(&b, cfg)? != Some(true) {
        return Err(Error::ConstructionFailed(format!("candidate {expr:?} is not symmetrically syndetic")));
    }
    let mut w = DenseOrbitWitness::bare(method, Scope::Exact);
    w.symmetric_subset = Some(expr);
    Ok(DecisionReport::new("dense-orbit", &g.spec_name(), Verdict::Refuted, Scope::Exact)
        .with_set(a.spec())
        .with_scale("method", method)
        .with_scale("candidates_tried", tried)
        .with_certificate(Certificate::DenseOrbit(w)))
}

/// Records of interior gaps of `member` read outward from the origin on the
/// side with the longer final record.
fn growing_gaps(member: &[bool], base: i64) -> Vec<GapRecord> {
    let origin = (-base) as usize;
    let side = |forward: bool| -> Vec<GapRecord> {
        let idx: Vec<usize> = if forward { (origin..member.len()).collect() } else { (0..=origin).rev().collect() };
        let mut out: Vec<GapRecord> = Vec::new();
        let mut last: Option<usize> = None;
        for i in idx {
            if member[i] {
                if let Some(l) = last {
                    let (lo, hi) = if forward { (l, i) } else { (i, l) };
                    let len = (hi - lo - 1) as u64;
                    if len > 0 && out.last().is_none_or(|r| len > r.len) {
                        out.push(GapRecord { start: base + lo as i64 + 1, len });
                    }
                }
                last = Some(i);
            }
        }
        out
    };
    let (f, b) = (side(true), side(false));
    let fl = f.last().map_or(0, |r| r.len);
    let bl = b.last().map_or(0, |r| r.len);
    if bl > fl {
        b
    } else {
        f
    }
}

fn dense_windowed_int(a: &Subset, cfg: &RunConfig) -> Result<DecisionReport> {
    let g = a.group();
    let w = cfg.int_window as i64;
    let base = -w;
    let comp: Vec<bool> = (-w..=w).map(|x| !a.contains(&GroupElement::Int(x))).collect();
    let scope = Scope::Window { radius: cfg.int_window };
    let method = DenseOrbitMethod::GapSufficiency;
    let mut witness = DenseOrbitWitness::bare(method, scope);
    if !comp.iter().any(|&b| b) {
        return Ok(DecisionReport::new("dense-orbit", &g.spec_name(), Verdict::Proved, scope)
            .with_set(a.spec())
            .with_scale("method", method)
            .with_scale("window", cfg.int_window)
            .with_certificate(Certificate::DenseOrbit(witness))
            .note("the complement is empty on the window"));
    }
    let gaps = growing_gaps(&comp, base);
    let longest = gaps.last().map_or(0, |r| r.len);
    if gaps.len() >= 3 && longest > cfg.max_k as u64 + 1 {
        witness.gaps = gaps;
        return Ok(DecisionReport::new("dense-orbit", &g.spec_name(), Verdict::Proved, scope)
            .with_set(a.spec())
            .with_scale("method", method)
            .with_scale("window", cfg.int_window)
            .with_scale("longest_gap", longest)
            .with_certificate(Certificate::DenseOrbit(witness))
            .note(
                "the complement has gaps growing across the window, so at this scale it contains no syndetic subset",
            ));
    }
    if longest <= cfg.periodic_cap {
        for m in 1..=cfg.periodic_cap.min(20) {
            for sel in 1u64..(1u64 << m) {
                let res: Vec<u64> = (0..m).filter(|r| sel >> r & 1 == 1).collect();
                let inside =
                    (-w..=w).all(|x| !res.contains(&(x.rem_euclid(m as i64) as u64)) || comp[(x - base) as usize]);
                if inside {
                    let mut wit = DenseOrbitWitness::bare(DenseOrbitMethod::SymmetricSubsetOracle, scope);
                    wit.symmetric_subset = Some(SetExpr::residue(m, &res));
                    return Ok(DecisionReport::new("dense-orbit", &g.spec_name(), Verdict::Refuted, scope)
                        .with_set(a.spec())
                        .with_scale("method", DenseOrbitMethod::SymmetricSubsetOracle)
                        .with_scale("window", cfg.int_window)
                        .with_certificate(Certificate::DenseOrbit(wit)));
                }
            }
        }
    }
    Ok(DecisionReport::new("dense-orbit", &g.spec_name(), Verdict::UndecidedAtScale, scope)
        .with_set(a.spec())
        .with_scale("window", cfg.int_window)
        .with_scale("longest_gap", longest))
}

fn dense_free(a: &Subset, nf: &FreeGroupNF, cfg: &RunConfig) -> Result<DecisionReport> {
    let g = a.group();
    let c = nf.complement();
    let method = DenseOrbitMethod::SymmetricSubsetOracle;
    if c.is_finite() {
        return Ok(DecisionReport::new("dense-orbit", &g.spec_name(), Verdict::Proved, Scope::Exact)
            .with_set(a.spec())
            .with_scale("method", method)
            .with_certificate(Certificate::DenseOrbit(DenseOrbitWitness::bare(method, Scope::Exact)))
            .note("the complement is finite, so it has no syndetic subset"));
    }
    Ok(DecisionReport::new(
        "dense-orbit",
        &g.spec_name(),
        Verdict::UndecidedAtScale,
        Scope::Window { radius: cfg.radius as u64 },
    )
    .with_set(a.spec())
    .with_scale("method", method)
    .note("the complement is infinite; no symmetrically syndetic subset was certified"))
}

/// Dense orbit decision through symmetrically syndetic subsets of `A^c`.
pub fn dense_orbit_via_symmetric(a: &Subset, cfg: &RunConfig) -> Result<DecisionReport> {
    match a.nf() {
        Some(NormalForm::Finite(b)) => dense_finite_via_symmetric(a, b.bits(), cfg),
        Some(NormalForm::Periodic(_)) => dense_periodic(a, cfg),
        Some(NormalForm::Free(nf)) => dense_free(a, nf, cfg),
        None => dense_windowed_int(a, cfg),
    }
}

/// Dense orbit decision. Finite groups run both oracles and must agree.
pub fn dense_orbit(a: &Subset, cfg: &RunConfig) -> Result<DecisionReport> {
    if !a.group().is_finite() {
        return dense_orbit_via_symmetric(a, cfg);
    }
    let exact = dense_orbit_finite_exact(a)?;
    let via = dense_orbit_via_symmetric(a, cfg)?;
    let mut report = exact.with_scale("symmetric_oracle_verdict", via.verdict);
    if report.verdict != via.verdict {
        report.verdict = Verdict::UndecidedAtScale;
        report = report.note("the subgroup and symmetric-subset oracles disagree");
    }
    Ok(report)
}

/// Replays a dense orbit witness against `A`.
pub fn verify_dense_orbit_witness(a: &Subset, w: &DenseOrbitWitness, cfg: &RunConfig) -> Result<bool> {
    let g = a.group();
    match w.method {
        DenseOrbitMethod::SubgroupOracle => {
            let t = g.table().ok_or_else(|| Error::InvalidInput("finite group expected".into()))?;
            let (Some(h), Some(rep), Some(missed)) = (&w.subgroup, &w.coset_rep, &w.missed) else {
                return Ok(dense_orbit_finite_exact(a)?.verdict == Verdict::Proved);
            };
            let mut hm = 0u128;
            for x in h {
                g.validate(x)?;
                hm |= 1 << x.as_index().expect("index");
            }
            if closure_of(t, hm) != hm {
                return Ok(false);
            }
            let miss = missed.as_index().ok_or_else(|| Error::InvalidElement(missed.to_string()))?;
            let r = rep.as_index().ok_or_else(|| Error::InvalidElement(rep.to_string()))?;
            let coset = h.iter().fold(0u128, |m, x| m | 1 << t.mul(r, x.as_index().unwrap()));
            let bits: Vec<bool> = (0..t.order()).map(|i| a.contains(&GroupElement::Index(i))).collect();
            Ok(product_mask(t, &bits, coset) >> miss & 1 == 0)
        }
        DenseOrbitMethod::SymmetricSubsetOracle => match &w.symmetric_subset {
            Some(expr) => {
                let b = Subset::new(g, expr)?;
                let inside = match (b.nf(), a.nf()) {
                    (Some(bn), Some(an)) => bn.is_subset(&an.complement())?,
                    _ => match w.scope {
                        Scope::Window { radius } if g.is_integers() => {
                            let r = radius as i64;
                            (-r..=r).map(GroupElement::Int).all(|x| !b.contains(&x) || !a.contains(&x))
                        }
                        _ => false,
                    },
                };
                Ok(inside && is_symmetrically_syndetic_exact(&b, cfg)? == Some(true))
            }
            None => Ok(dense_orbit_via_symmetric(a, cfg)?.verdict == Verdict::Proved),
        },
        DenseOrbitMethod::GapSufficiency => {
            let grows = w.gaps.windows(2).all(|p| p[1].len > p[0].len);
            let empty =
                w.gaps.iter().all(|r| (r.start..r.start + r.len as i64).all(|x| a.contains(&GroupElement::Int(x))));
            Ok(g.is_integers() && !w.gaps.is_empty() && grows && empty)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::CayleyTable;
    use proptest::prelude::*;

    fn cfg() -> RunConfig {
        RunConfig { int_window: 1 << 12, ..RunConfig::default() }
    }

    fn z() -> GroupModel {
        GroupModel::integers()
    }

    fn verdict(a: &Subset, v: SymmetricVariant) -> Verdict {
        symmetric_syndetic(a, v, &cfg()).unwrap().verdict
    }

    #[test]
    fn even_numbers_are_symmetric() {
        let a = Subset::new(&z(), &SetExpr::multiples(2)).unwrap();
        assert_eq!(verdict(&a, SymmetricVariant::Plain), Verdict::Proved);
        assert_eq!(verdict(&a, SymmetricVariant::Completely), Verdict::Refuted);
        assert_eq!(verdict(&a.complement(), SymmetricVariant::Plain), Verdict::Proved);
    }

    #[test]
    fn singleton_in_z_is_not_symmetric() {
        let a = Subset::new(&z(), &SetExpr::ints(&[0])).unwrap();
        let r = symmetric_syndetic(&a, SymmetricVariant::Plain, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Refuted);
        let Some(Certificate::Symmetric(ev)) = &r.certificate else { panic!() };
        assert!(ev.replay(&a).unwrap());
        assert_eq!(ev.failing.as_ref().unwrap().defect, MeetDefect::Finite);
    }

    #[test]
    fn empty_set_is_not_symmetric() {
        let a = Subset::new(&z(), &SetExpr::Empty).unwrap();
        for fam in [MeetFamily::AllTranslates, MeetFamily::Anchored] {
            let o = symmetric_search(&a, SymmetricVariant::Plain, fam, &cfg()).unwrap();
            assert_eq!(o.verdict, Verdict::Refuted);
            assert!(o.evidence.replay(&a).unwrap());
        }
    }

    #[test]
    fn singletons_in_finite_groups_are_symmetric() {
        for t in [CayleyTable::cyclic(4), CayleyTable::symmetric3()] {
            let g = GroupModel::finite(t.clone());
            for i in 0..t.order() {
                let a = Subset::new(&g, &SetExpr::FiniteWords { elements: vec![GroupElement::Index(i)] }).unwrap();
                assert_eq!(verdict(&a, SymmetricVariant::Plain), Verdict::Proved);
            }
        }
    }

    #[test]
    fn cofinite_set_fails_every_variant() {
        let a = Subset::new(&z(), &SetExpr::ints(&[3, -2]).complement()).unwrap();
        for v in [SymmetricVariant::Plain, SymmetricVariant::Completely, SymmetricVariant::StronglyCompletely] {
            let r = symmetric_syndetic(&a, v, &cfg()).unwrap();
            assert_eq!(r.verdict, Verdict::Refuted);
            let Some(Certificate::Symmetric(ev)) = &r.certificate else { panic!() };
            assert!(ev.replay(&a).unwrap());
        }
    }

    #[test]
    fn whole_group_is_completely_symmetric() {
        let a = Subset::new(&z(), &SetExpr::All).unwrap();
        assert_eq!(verdict(&a, SymmetricVariant::StronglyCompletely), Verdict::Proved);
        let g = GroupModel::finite(CayleyTable::quaternion());
        let a = Subset::new(&g, &SetExpr::All).unwrap();
        assert_eq!(verdict(&a, SymmetricVariant::Completely), Verdict::Proved);
    }

    #[test]
    fn finite_free_set_is_refuted_exactly() {
        let g = GroupModel::free(2).unwrap();
        let a = Subset::new(&g, &SetExpr::parse_inline("words:a,ab").unwrap()).unwrap();
        let r = symmetric_syndetic(&a, SymmetricVariant::Plain, &cfg()).unwrap();
        assert_eq!((r.verdict, r.scope), (Verdict::Refuted, Scope::Exact));
    }

    #[test]
    fn powers_of_two_complement_refuted_at_scale() {
        let a = Subset::new(&z(), &SetExpr::PowersOfTwoComplement).unwrap();
        let r = symmetric_syndetic(&a, SymmetricVariant::Plain, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Refuted);
        let Some(Certificate::Symmetric(ev)) = &r.certificate else { panic!() };
        assert!(matches!(ev.failing.as_ref().unwrap().defect, MeetDefect::Gap { .. }));
        assert!(ev.replay(&a).unwrap());
    }

    #[test]
    fn subgroup_counts() {
        assert_eq!(subgroups(&CayleyTable::cyclic(8)).unwrap().len(), 4);
        assert_eq!(subgroups(&CayleyTable::symmetric3()).unwrap().len(), 6);
        assert_eq!(subgroups(&CayleyTable::dihedral(4)).unwrap().len(), 10);
        assert_eq!(subgroups(&CayleyTable::quaternion()).unwrap().len(), 6);
    }

    #[test]
    fn dense_orbit_examples() {
        let g = GroupModel::finite(CayleyTable::cyclic(4));
        let all = Subset::new(&g, &SetExpr::All).unwrap();
        assert_eq!(dense_orbit(&all, &cfg()).unwrap().verdict, Verdict::Proved);
        let part = Subset::new(&g, &SetExpr::ints(&[0, 1, 2])).unwrap();
        let r = dense_orbit_finite_exact(&part).unwrap();
        assert_eq!(r.verdict, Verdict::Refuted);
        let Some(Certificate::DenseOrbit(w)) = &r.certificate else { panic!() };
        assert_eq!(w.subgroup.as_deref(), Some(&[GroupElement::Index(0)][..]));
        assert!(verify_dense_orbit_witness(&part, w, &cfg()).unwrap());
    }

    #[test]
    fn dense_orbit_odd_numbers() {
        let a = Subset::new(&z(), &SetExpr::parse_inline("odd").unwrap()).unwrap();
        let r = dense_orbit(&a, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Refuted);
        let Some(Certificate::DenseOrbit(w)) = &r.certificate else { panic!() };
        assert_eq!(w.symmetric_subset, Some(SetExpr::residue(2, &[0])));
        assert!(verify_dense_orbit_witness(&a, w, &cfg()).unwrap());
    }

    #[test]
    fn dense_orbit_cofinite_and_sparse_complements() {
        let a = Subset::new(&z(), &SetExpr::ints(&[5]).complement()).unwrap();
        assert_eq!(dense_orbit(&a, &cfg()).unwrap().verdict, Verdict::Proved);
        let a = Subset::new(&z(), &SetExpr::PowersOfTwoComplement).unwrap();
        let r = dense_orbit(&a, &cfg()).unwrap();
        assert_eq!((r.verdict, r.scope), (Verdict::Proved, Scope::Window { radius: 1 << 12 }));
        let Some(Certificate::DenseOrbit(w)) = &r.certificate else { panic!() };
        assert!(verify_dense_orbit_witness(&a, w, &cfg()).unwrap());
    }

    #[test]
    fn progression_avoids_removed_points() {
        let c = PeriodicNF::periodic(3, &[0]);
        let c = c.intersection(&PeriodicNF::finite(&[0, 3]).complement()).unwrap();
        let e = progression_inside(&c).unwrap();
        let b = normalize(&e, &z()).unwrap().unwrap();
        assert!(b.is_subset(&NormalForm::Periodic(c)).unwrap());
    }

    proptest! {
        #[test]
        fn families_agree_and_complements_match(m in 1u64..9, sel in 0u64..256) {
            let res: Vec<u64> = (0..m).filter(|r| sel >> r & 1 == 1).collect();
            let a = Subset::new(&z(), &SetExpr::residue(m, &res)).unwrap();
            for v in [SymmetricVariant::Plain, SymmetricVariant::Completely] {
                let d = symmetric_search(&a, v, MeetFamily::AllTranslates, &cfg()).unwrap();
                let r = symmetric_search(&a, v, MeetFamily::Anchored, &cfg()).unwrap();
                prop_assert_eq!(d.verdict, r.verdict);
                prop_assert!(d.evidence.replay(&a).unwrap());
                let nf = a.nf().unwrap();
                if !nf.is_empty() && !nf.is_all() {
                    let c = symmetric_search(&a.complement(), v, MeetFamily::AllTranslates, &cfg()).unwrap();
                    prop_assert_eq!(c.verdict, d.verdict);
                }
                if d.verdict == Verdict::Proved {
                    prop_assert_eq!(crate::syndetic::is_n_syndetic_exact(&a, 1, &cfg()).unwrap(), Some(true));
                }
            }
        }
    }
}

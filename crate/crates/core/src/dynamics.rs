//! Subshift patterns, F-avoiding sets, (F,n)-colorings and the amenability
//! witness harness.
//!
//! Right translates are used throughout: `A·g = {x : x g⁻¹ ∈ A}`. Translates
//! of subsets of ℤ are taken from `0..=R`, elsewhere from `ball(R)`.

use std::collections::BTreeSet;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupModel, Word};
use crate::report::{Certificate, DecisionReport, Scope, Verdict};
use crate::set_algebra::{FreeGroupNF, NormalForm, PeriodicNF, SetExpr, Subset};
use crate::strong::{
    build_scs_certificate_for, check_scs, verify_scs_certificate, Epsilon, MultisetWitness, ScsCertificate,
};
use crate::syndetic::{decide_n_syndetic, SyndeticWitness};

/// Fixed-width bitset over a window.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Bits(Vec<u64>);

impl Bits {
    fn from_flags(flags: &[bool]) -> Bits {
        let mut v = vec![0u64; flags.len().div_ceil(64)];
        for (i, &b) in flags.iter().enumerate() {
            if b {
                v[i / 64] |= 1 << (i % 64);
            }
        }
        Bits(v)
    }

    fn and(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & b).collect())
    }

    fn first(&self) -> Option<usize> {
        self.0.iter().enumerate().find(|(_, w)| **w != 0).map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn is_zero(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }
}

/// Translates used for orbit approximations.
pub fn translates(g: &GroupModel, radius: u32) -> Result<Vec<GroupElement>> {
    if g.is_integers() {
        Ok((0..=radius as i64).map(GroupElement::Int).collect())
    } else {
        g.ball(radius)
    }
}

/// Membership of `w` in the right translate `A·t`.
fn in_right_translate(a: &Subset, w: &GroupElement, t: &GroupElement) -> bool {
    let g = a.group();
    a.contains(&g.mul(w, &g.inv(t)))
}

fn translate_flags(a: &Subset, window: &[GroupElement], ts: &[GroupElement]) -> Vec<Vec<bool>> {
    ts.par_iter().map(|t| window.iter().map(|w| in_right_translate(a, w, t)).collect()).collect()
}

fn check_product_cap(what: &str, x: usize, y: usize, cfg: &RunConfig) -> Result<()> {
    let size = x as u128 * y as u128;
    if size > cfg.tuple_cap {
        return Err(Error::scale(what, size, cfg.tuple_cap));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern {
    /// `'1'` at position `i` when `window[i] ∈ A·translate`.
    pub bits: String,
    pub translate: GroupElement,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternSet {
    pub window: Vec<GroupElement>,
    pub radius: u32,
    pub patterns: Vec<Pattern>,
    /// Translates whose common intersection misses the window, when found.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub empty_meet: Option<Vec<GroupElement>>,
}

impl PatternSet {
    /// Re-derives every pattern from `A` and its recorded translate.
    pub fn replay(&self, a: &Subset) -> Result<bool> {
        let g = a.group();
        for p in &self.patterns {
            g.validate(&p.translate)?;
            let bits: String =
                self.window.iter().map(|w| if in_right_translate(a, w, &p.translate) { '1' } else { '0' }).collect();
            if bits != p.bits {
                return Ok(false);
            }
        }
        if let Some(ts) = &self.empty_meet {
            for t in ts {
                g.validate(t)?;
            }
            if self.window.iter().any(|w| ts.iter().all(|t| in_right_translate(a, w, t))) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Distinct restrictions `(A·g)|_W` for translates `g`, in order of first
/// occurrence.
pub fn subshift_patterns(a: &Subset, window: &[GroupElement], radius: u32, cfg: &RunConfig) -> Result<PatternSet> {
    let g = a.group();
    for w in window {
        g.validate(w)?;
    }
    let ts = translates(g, radius)?;
    check_product_cap("pattern enumeration", ts.len(), window.len(), cfg)?;
    let flags = translate_flags(a, window, &ts);
    let mut seen = BTreeSet::new();
    let mut patterns = Vec::new();
    for (t, f) in ts.into_iter().zip(flags) {
        let bits: String = f.iter().map(|&b| if b { '1' } else { '0' }).collect();
        if seen.insert(bits.clone()) {
            patterns.push(Pattern { bits, translate: t });
        }
    }
    Ok(PatternSet { window: window.to_vec(), radius, patterns, empty_meet: None })
}

/// Picks `n` masks whose common intersection is empty.
fn empty_meet_dfs(masks: &[Bits], cur: &Bits, n: usize, chosen: &mut Vec<usize>, budget: &mut u64) -> bool {
    let Some(bit) = cur.first() else {
        return true;
    };
    if n == 0 || *budget == 0 {
        return false;
    }
    *budget -= 1;
    for (i, m) in masks.iter().enumerate() {
        if !m.get(bit) {
            chosen.push(i);
            if empty_meet_dfs(masks, &cur.and(m), n - 1, chosen, budget) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// Translates are complete and the window holds a full period, so window
/// answers are exact.
fn pattern_scope_exact(a: &Subset, window: &[GroupElement], ts: &[GroupElement]) -> bool {
    match a.nf() {
        Some(NormalForm::Periodic(p)) if p.is_periodic() => {
            let m = p.modulus() as i64;
            let ws: BTreeSet<i64> = window.iter().filter_map(|w| w.as_int()).map(|x| x.rem_euclid(m)).collect();
            ts.len() as i64 >= m && ws.len() as i64 == m
        }
        Some(NormalForm::Finite(_)) => true,
        _ => false,
    }
}

/// Searches `n` translates of `A` whose intersection misses the window. Such
/// a family refutes n-syndeticity (at the window's scale).
pub fn subshift_intersection_check(
    a: &Subset,
    n: usize,
    window: &[GroupElement],
    radius: u32,
    cfg: &RunConfig,
) -> Result<DecisionReport> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    if window.is_empty() {
        return Err(Error::InvalidInput("the window must be nonempty".into()));
    }
    let g = a.group();
    let mut set = subshift_patterns(a, window, radius, cfg)?;
    let ts: Vec<GroupElement> = set.patterns.iter().map(|p| p.translate.clone()).collect();
    let masks: Vec<Bits> =
        set.patterns.iter().map(|p| Bits::from_flags(&p.bits.chars().map(|c| c == '1').collect::<Vec<_>>())).collect();
    let all = Bits::from_flags(&vec![true; window.len()]);
    let mut chosen = Vec::new();
    let mut budget = cfg.search_budget;
    let found = empty_meet_dfs(&masks, &all, n, &mut chosen, &mut budget);
    let all_ts = translates(g, radius)?;
    let exact = pattern_scope_exact(a, window, &all_ts);
    let scope = if exact { Scope::Exact } else { Scope::Window { radius: radius as u64 } };
    let verdict = if found {
        let mut pick: Vec<GroupElement> = chosen.iter().map(|&i| ts[i].clone()).collect();
        pick.sort();
        while pick.len() < n {
            pick.push(pick[0].clone());
        }
        set.empty_meet = Some(pick);
        Verdict::Refuted
    } else if exact && budget > 0 {
        Verdict::Proved
    } else {
        Verdict::UndecidedAtScale
    };
    Ok(DecisionReport::new("subshift", &g.spec_name(), verdict, scope)
        .with_set(a.spec())
        .with_scale("n", n)
        .with_scale("radius", radius)
        .with_scale("window_size", window.len())
        .with_scale("patterns", set.patterns.len())
        .with_certificate(Certificate::Patterns(set)))
}

/// Default window for pattern checks: `ball(radius)`, or `-radius..=radius`.
pub fn default_window(g: &GroupModel, radius: u32) -> Result<Vec<GroupElement>> {
    g.ball(radius)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Collision {
    pub f: GroupElement,
    /// `x ∈ A` with `f x ∈ A`.
    pub x: GroupElement,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AvoidanceEvidence {
    pub avoid: Vec<GroupElement>,
    pub avoiding: bool,
    pub avoidance_scope: Scope,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collision: Option<Collision>,
    /// Pairwise intersections of translates inside the window, when checked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairwise: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disjoint_pair: Option<Vec<GroupElement>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_syndetic: Option<Verdict>,
    /// The set found by a candidate search.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate: Option<SetExpr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub syndetic: Option<SyndeticWitness>,
    #[serde(default)]
    pub candidates_tried: u64,
}

impl AvoidanceEvidence {
    fn new(avoid: Vec<GroupElement>) -> Self {
        AvoidanceEvidence {
            avoid,
            avoiding: false,
            avoidance_scope: Scope::Exact,
            collision: None,
            pairwise: None,
            disjoint_pair: None,
            two_syndetic: None,
            candidate: None,
            syndetic: None,
            candidates_tried: 0,
        }
    }
}

/// `FA ∩ A = ∅`, exactly through normal forms when available, otherwise on
/// `ball(radius)` or the integer window.
pub fn is_avoiding(a: &Subset, avoid: &[GroupElement], cfg: &RunConfig) -> Result<(bool, Scope, Option<Collision>)> {
    let g = a.group();
    for f in avoid {
        g.validate(f)?;
    }
    if let Some(nf) = a.nf() {
        for f in avoid {
            let meet = nf.translate(g, f).intersection(nf)?;
            if let Some(y) = meet.least_element() {
                return Ok((false, Scope::Exact, Some(Collision { f: f.clone(), x: g.mul(&g.inv(f), &y) })));
            }
        }
        return Ok((true, Scope::Exact, None));
    }
    let (pts, scope): (Vec<GroupElement>, Scope) = if g.is_integers() {
        let w = cfg.int_window as i64;
        ((-w..=w).map(GroupElement::Int).collect(), Scope::Window { radius: cfg.int_window })
    } else {
        (g.ball(cfg.radius)?, Scope::Window { radius: cfg.radius as u64 })
    };
    for x in &pts {
        if a.contains(x) {
            for f in avoid {
                if a.contains(&g.mul(f, x)) {
                    return Ok((false, scope, Some(Collision { f: f.clone(), x: x.clone() })));
                }
            }
        }
    }
    Ok((true, scope, None))
}

fn close_symmetric(g: &GroupModel, avoid: &[GroupElement]) -> Vec<GroupElement> {
    let mut v: Vec<GroupElement> = avoid.iter().flat_map(|f| [f.clone(), g.inv(f)]).collect();
    v.sort();
    v.dedup();
    v
}

/// Checks the two conditions of an F-witness shift for the orbit of `A`:
/// every translate is F-avoiding (exact: `F(Ag) ∩ Ag = (FA ∩ A)g`), and any
/// two translates from `translates(radius)` meet inside `ball(2·radius)`.
pub fn witness_shift_check(
    a: &Subset,
    avoid: &[GroupElement],
    symmetric: bool,
    radius: u32,
    cfg: &RunConfig,
) -> Result<DecisionReport> {
    let g = a.group();
    if avoid.is_empty() {
        return Err(Error::InvalidInput("F must be nonempty".into()));
    }
    let avoid = if symmetric { close_symmetric(g, avoid) } else { avoid.to_vec() };
    let mut ev = AvoidanceEvidence::new(avoid.clone());
    let (ok, scope, collision) = is_avoiding(a, &avoid, cfg)?;
    ev.avoiding = ok;
    ev.avoidance_scope = scope;
    ev.collision = collision;

    let window = if g.is_integers() {
        let r = 2 * radius as i64;
        (-r..=r).map(GroupElement::Int).collect()
    } else {
        g.ball(2 * radius)?
    };
    let ts = translates(g, radius)?;
    check_product_cap("pairwise translate check", ts.len() * (ts.len() + 1) / 2, window.len().div_ceil(64), cfg)?;
    let masks: Vec<Bits> = translate_flags(a, &window, &ts).iter().map(|f| Bits::from_flags(f)).collect();
    let bad = (0..ts.len())
        .flat_map(|i| (i..ts.len()).map(move |j| (i, j)))
        .find(|&(i, j)| masks[i].and(&masks[j]).is_zero());
    ev.pairwise = Some(bad.is_none());
    ev.disjoint_pair = bad.map(|(i, j)| vec![ts[i].clone(), ts[j].clone()]);
    let pair_scope =
        if pattern_scope_exact(a, &window, &ts) { Scope::Exact } else { Scope::Window { radius: radius as u64 } };

    let two = decide_n_syndetic(a, 2, cfg)?;
    ev.two_syndetic = Some(two.verdict);

    let verdict = if !ev.avoiding || (bad.is_some() && pair_scope.is_exact()) || two.verdict == Verdict::Refuted {
        Verdict::Refuted
    } else if bad.is_some() {
        Verdict::UndecidedAtScale
    } else {
        Verdict::Proved
    };
    let overall = match verdict {
        Verdict::Refuted if !ev.avoiding => ev.avoidance_scope,
        Verdict::Refuted if two.verdict == Verdict::Refuted => two.scope,
        _ => ev.avoidance_scope.meet(pair_scope),
    };
    let mut r = DecisionReport::new("witness-shift", &g.spec_name(), verdict, overall)
        .with_set(a.spec())
        .with_scale("radius", radius)
        .with_scale("two_syndetic_scope", two.scope)
        .with_certificate(Certificate::Avoidance(ev.clone()));
    if ev.avoiding && two.verdict == Verdict::Refuted {
        r = r.note("F-avoiding, but not 2-syndetic");
    }
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringEntry {
    pub subset: Vec<GroupElement>,
    pub color: GroupElement,
}

/// A table `E ↦ k(E)` on n-subsets of `ball(radius)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    pub n: usize,
    pub avoid: Vec<GroupElement>,
    /// The syndetic witness the colors are drawn from.
    pub palette: Vec<GroupElement>,
    pub radius: u32,
    pub entries: Vec<ColoringEntry>,
    pub scope: Scope,
}

fn left_image(g: &GroupModel, k: &GroupElement, e: &[GroupElement]) -> Vec<GroupElement> {
    e.iter().map(|x| g.mul(k, x)).collect()
}

/// n-subsets of `ball(radius)` in canonical order (ball order, then lex).
pub fn window_subsets(g: &GroupModel, n: usize, radius: u32, cfg: &RunConfig) -> Result<Vec<Vec<GroupElement>>> {
    let ball = if g.is_integers() {
        let r = radius as i64;
        (-r..=r).map(GroupElement::Int).collect()
    } else {
        g.ball(radius)?
    };
    let count = (0..n).fold(1u128, |c, i| c * (ball.len() - i.min(ball.len())) as u128 / (i as u128 + 1));
    if count > cfg.tuple_cap {
        return Err(Error::scale("n-subsets of the window", count, cfg.tuple_cap));
    }
    Ok(ball.into_iter().combinations(n).collect())
}

/// Builds `k(E) = f` for the first `f` in the witness with `fE ⊆ A`.
pub fn set_to_coloring(
    a: &Subset,
    n: usize,
    avoid: &[GroupElement],
    witness: &SyndeticWitness,
    radius: u32,
    cfg: &RunConfig,
) -> Result<Coloring> {
    let g = a.group();
    if witness.n < n {
        return Err(Error::InvalidInput(format!("witness is for n = {}, need {n}", witness.n)));
    }
    let (ok, _, collision) = is_avoiding(a, avoid, cfg)?;
    if !ok {
        let c = collision.expect("collision");
        return Err(Error::InvalidInput(format!("A is not F-avoiding: {} and {}·{} both lie in A", c.x, c.f, c.x)));
    }
    let subsets = window_subsets(g, n, radius, cfg)?;
    let entries = subsets
        .into_par_iter()
        .map(|e| {
            witness
                .f
                .iter()
                .find(|k| left_image(g, k, &e).iter().all(|x| a.contains(x)))
                .map(|k| ColoringEntry { subset: e.clone(), color: k.clone() })
                .ok_or_else(|| Error::NoCoveringTranslate {
                    subset: e.iter().map(ToString::to_string).collect::<Vec<_>>().join(","),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Coloring {
        n,
        avoid: avoid.to_vec(),
        palette: witness.f.clone(),
        radius,
        entries,
        scope: Scope::Window { radius: radius as u64 },
    })
}

/// The first pair of entries violating `F·k(E₁)E₁ ∩ k(E₂)E₂ = ∅`.
pub fn coloring_violation(g: &GroupModel, c: &Coloring) -> Option<(usize, usize)> {
    let images: Vec<BTreeSet<GroupElement>> =
        c.entries.iter().map(|e| left_image(g, &e.color, &e.subset).into_iter().collect()).collect();
    let shifted: Vec<BTreeSet<GroupElement>> =
        images.iter().map(|s| s.iter().flat_map(|x| c.avoid.iter().map(move |f| g.mul(f, x))).collect()).collect();
    (0..images.len())
        .into_par_iter()
        .find_map_first(|i| (0..images.len()).find(|&j| !shifted[i].is_disjoint(&images[j])).map(|j| (i, j)))
}

/// `⋃ k(E)E` over the table, with a report checking F-avoidance and the
/// per-entry containment on the window.
pub fn coloring_to_set(g: &GroupModel, c: &Coloring) -> Result<(SetExpr, DecisionReport)> {
    for e in &c.entries {
        g.validate(&e.color)?;
        for x in &e.subset {
            g.validate(x)?;
        }
    }
    let union: BTreeSet<GroupElement> = c.entries.iter().flat_map(|e| left_image(g, &e.color, &e.subset)).collect();
    let expr = SetExpr::FiniteWords { elements: union.iter().cloned().collect() };
    let violation = coloring_violation(g, c);
    let avoiding = union.iter().all(|x| c.avoid.iter().all(|f| !union.contains(&g.mul(f, x))));
    let verdict = if violation.is_none() && avoiding { Verdict::Proved } else { Verdict::Refuted };
    let mut r = DecisionReport::new("coloring", &g.spec_name(), verdict, c.scope)
        .with_scale("n", c.n)
        .with_scale("radius", c.radius)
        .with_scale("entries", c.entries.len())
        .with_scale("union_size", union.len())
        .with_certificate(Certificate::Coloring(c.clone()));
    if let Some((i, j)) = violation {
        r = r.note(format!("entries {i} and {j} violate the coloring condition"));
    }
    if !avoiding {
        r = r.note("the union is not F-avoiding on the window");
    }
    Ok((expr, r))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateRefutation {
    pub set: SetExpr,
    /// `set` or `complement`: the side the multiset defeats.
    pub side: String,
    pub witness: MultisetWitness,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmenabilityEvidence {
    pub epsilon: Epsilon,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<SetExpr>,
    /// A certified subset of the complement of `set`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complement_subset: Option<SetExpr>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub certificates: Vec<ScsCertificate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub refuted: Vec<CandidateRefutation>,
    pub candidates: u64,
    pub exhaustive_within_class: bool,
}

impl AmenabilityEvidence {
    /// Re-verifies certificates, the disjointness of the certified sets, and
    /// every recorded refutation.
    pub fn replay(&self, g: &GroupModel) -> Result<bool> {
        for c in &self.certificates {
            if verify_scs_certificate(c).is_err() {
                return Ok(false);
            }
        }
        if let (Some(a), Some(b)) = (&self.set, &self.complement_subset) {
            let a = Subset::new(g, a)?;
            let b = Subset::new(g, b)?;
            match (a.nf(), b.nf()) {
                (Some(x), Some(y)) if !x.intersection(y)?.is_empty() => return Ok(false),
                (Some(_), Some(_)) => {}
                _ => return Ok(false),
            }
        }
        for r in &self.refuted {
            let a = Subset::new(g, &r.set)?;
            let side = if r.side == "complement" { a.complement() } else { a };
            if !r.witness.replay(&side)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn proper_periodic_sets(max_modulus: u64) -> Vec<(u64, Vec<u64>)> {
    let mut out = Vec::new();
    for m in 1..=max_modulus {
        for sel in 1u64..(1u64 << m) - 1 {
            let res: Vec<u64> = (0..m).filter(|r| sel >> r & 1 == 1).collect();
            if PeriodicNF::periodic(m, &res).modulus() == m {
                out.push((m, res));
            }
        }
    }
    out
}

fn multiset_refutation(a: &Subset, eps: Epsilon, cfg: &RunConfig) -> Result<Option<MultisetWitness>> {
    let r = check_scs(a, eps, cfg)?;
    Ok(match (r.verdict, r.certificate) {
        (Verdict::Refuted, Some(Certificate::Multiset(w))) => Some(w),
        _ => None,
    })
}

/// Searches for a set `A` with both `A` and `A^c` strongly completely
/// syndetic. Free groups get the cylinder pair `(B_a, B_b)` with
/// certificates; for ℤ every periodic pair up to `max_modulus` is refuted.
pub fn amenability_witness(g: &GroupModel, eps: Epsilon, max_modulus: u64, cfg: &RunConfig) -> Result<DecisionReport> {
    if let Some(rank) = g.free_rank() {
        let ca = build_scs_certificate_for(rank, 1, eps)?;
        let cb = build_scs_certificate_for(rank, 2, eps)?;
        let a = ca.target_expr();
        let b = cb.target_expr();
        let ev = AmenabilityEvidence {
            epsilon: eps,
            set: Some(a.clone()),
            complement_subset: Some(b),
            certificates: vec![ca, cb],
            refuted: vec![],
            candidates: 1,
            exhaustive_within_class: false,
        };
        if !ev.replay(g)? {
            return Err(Error::ConstructionFailed("cylinder pair failed its own replay".into()));
        }
        let set = Subset::new(g, &a)?;
        return Ok(DecisionReport::new("amenability-witness", &g.spec_name(), Verdict::Proved, Scope::Exact)
            .with_set(set.spec())
            .with_scale("epsilon", eps.to_string())
            .with_certificate(Certificate::Amenability(ev))
            .note("B_b lies in the complement of B_a, and strong complete syndeticity passes to supersets"));
    }
    if !g.is_integers() {
        return Err(Error::InvalidInput("amenability witnesses are searched in z and free groups".into()));
    }
    let cands = proper_periodic_sets(max_modulus);
    let results: Vec<Result<Option<CandidateRefutation>>> = cands
        .par_iter()
        .map(|(m, res)| {
            let expr = SetExpr::residue(*m, res);
            let a = Subset::new(g, &expr)?;
            if let Some(w) = multiset_refutation(&a, eps, cfg)? {
                return Ok(Some(CandidateRefutation { set: expr, side: "set".into(), witness: w }));
            }
            Ok(multiset_refutation(&a.complement(), eps, cfg)?.map(|w| CandidateRefutation {
                set: expr,
                side: "complement".into(),
                witness: w,
            }))
        })
        .collect();
    let mut refuted = Vec::new();
    let mut survivors = 0u64;
    for r in results {
        match r? {
            Some(c) => refuted.push(c),
            None => survivors += 1,
        }
    }
    let all = survivors == 0;
    let ev = AmenabilityEvidence {
        epsilon: eps,
        set: None,
        complement_subset: None,
        certificates: vec![],
        refuted,
        candidates: cands.len() as u64,
        exhaustive_within_class: all,
    };
    Ok(DecisionReport::new("amenability-witness", &g.spec_name(), Verdict::UndecidedAtScale, Scope::Exact)
        .with_scale("epsilon", eps.to_string())
        .with_scale("max_modulus", max_modulus)
        .with_scale("survivors", survivors)
        .with_certificate(Certificate::Amenability(ev))
        .note(if all {
            "every periodic candidate pair is refuted; consistent with amenability, not a proof"
        } else {
            "some periodic candidates were not refuted"
        }))
}

fn cylinder_cells(rank: u8, depth: u32) -> Result<Vec<Word>> {
    let g = GroupModel::free(rank)?;
    Ok(g.ball(depth)?.into_iter().filter_map(|x| x.as_word().cloned()).filter(|w| !w.is_empty()).collect())
}

/// Searches a simple class of candidates for an F-avoiding 2-syndetic set:
/// unions of up to `max_cells` cylinders of depth `≤ depth` in free groups,
/// residue sets of modulus `≤ max_modulus` in ℤ, and all subsets of small
/// finite groups.
pub fn strong_amenability_witness(
    g: &GroupModel,
    avoid: &[GroupElement],
    max_cells: usize,
    depth: u32,
    max_modulus: u64,
    cfg: &RunConfig,
) -> Result<DecisionReport> {
    if avoid.is_empty() {
        return Err(Error::InvalidInput("F must be nonempty".into()));
    }
    let id = g.identity();
    for f in avoid {
        g.validate(f)?;
        if *f == id {
            return Err(Error::InvalidInput("F must not contain the identity".into()));
        }
    }
    let mut ev = AvoidanceEvidence::new(avoid.to_vec());
    let mut tried = 0u64;
    let mut try_candidate = |expr: SetExpr| -> Result<Option<DecisionReport>> {
        tried += 1;
        if tried > cfg.search_budget {
            return Err(Error::scale("candidate sets", tried as u128, cfg.search_budget as u128));
        }
        let a = Subset::new(g, &expr)?;
        let (ok, _, _) = is_avoiding(&a, avoid, cfg)?;
        if !ok {
            return Ok(None);
        }
        let two = decide_n_syndetic(&a, 2, cfg)?;
        if two.verdict != Verdict::Proved {
            return Ok(None);
        }
        let mut e = ev.clone();
        e.avoiding = true;
        e.two_syndetic = Some(Verdict::Proved);
        e.candidate = Some(expr);
        e.candidates_tried = tried;
        if let Some(Certificate::Syndetic(w)) = two.certificate {
            e.syndetic = Some(w);
        }
        Ok(Some(
            DecisionReport::new("strong-amenability-witness", &g.spec_name(), Verdict::Proved, two.scope)
                .with_set(a.spec())
                .with_scale("candidates_tried", tried)
                .with_certificate(Certificate::Avoidance(e)),
        ))
    };
    let class: &str;
    if let Some(rank) = g.free_rank() {
        class = "cylinder unions";
        let cells = cylinder_cells(rank, depth)?;
        for size in 1..=max_cells {
            for combo in cells.iter().combinations(size) {
                let nf = FreeGroupNF::from_parts(rank, Vec::new(), combo.into_iter().cloned());
                if nf.cylinders().len() != size {
                    continue;
                }
                if let Some(r) = try_candidate(crate::set_algebra::nf_to_expr(&NormalForm::Free(nf)))? {
                    return Ok(r);
                }
            }
        }
    } else if g.is_integers() {
        class = "periodic sets";
        for (m, res) in proper_periodic_sets(max_modulus) {
            if let Some(r) = try_candidate(SetExpr::residue(m, &res))? {
                return Ok(r);
            }
        }
    } else {
        class = "all subsets";
        let n = g.order().expect("finite");
        if n > 16 {
            return Err(Error::scale("subset enumeration", 1u128 << n, 1 << 16));
        }
        for sel in 1u32..(1u32 << n) {
            let elements = (0..n).filter(|i| sel >> i & 1 == 1).map(GroupElement::Index).collect();
            if let Some(r) = try_candidate(SetExpr::FiniteWords { elements })? {
                return Ok(r);
            }
        }
    }
    ev.candidates_tried = tried;
    let mut r =
        DecisionReport::new("strong-amenability-witness", &g.spec_name(), Verdict::UndecidedAtScale, Scope::Exact)
            .with_scale("class", class)
            .with_scale("candidates_tried", tried)
            .with_certificate(Certificate::Avoidance(ev))
            .note(format!("no F-avoiding 2-syndetic set among the {class}; exhaustive within the class only"));
    if g.is_integers() {
        r = r.note("z is abelian, hence FC-hypercentral");
    }
    Ok(r)
}

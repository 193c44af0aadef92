//! n-syndeticity and 1/n-thickness.
//!
//! A set `A` is n-syndetic with witness `F` when every n-tuple `K` admits some
//! `f ∈ F` with `fK ⊆ A`. The checks below reduce this to a covering problem:
//! for each candidate coordinate `k` let `bad(k) = {f ∈ F : fk ∉ A}`; the
//! witness fails exactly when `n` of these sets cover `F`.
//!
//! Periodic subsets of ℤ and subsets of finite groups are decided exactly.
//! Free-group sets are decided exactly for a given `F` through the partition
//! criterion; everything else is checked on a finite window.

use std::collections::{BTreeSet, HashMap};

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::group::{GroupElement, Word};
use crate::report::{Certificate, DecisionReport, Scope, Verdict};
use crate::set_algebra::{NormalForm, PeriodicNF, Subset};

/// One bit per element of the candidate witness.
pub type Mask = u128;

/// Largest witness `F` the bitmask searches accept.
pub const MAX_WITNESS_SIZE: usize = 128;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyndeticWitness {
    pub n: usize,
    pub f: Vec<GroupElement>,
    pub scope: Scope,
}

/// A tuple `(h₁, …, hₙ)` such that every `f` in `against` sends some `f hᵢ`
/// outside `A`. It shows that `against` is not an n-syndetic witness, and,
/// read for `B = A^c`, that `B` meets every `f`-translate of the tuple.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThickRefutation {
    pub n: usize,
    pub radius: u64,
    pub against: Vec<GroupElement>,
    pub tuple: Vec<GroupElement>,
    pub scope: Scope,
}

impl ThickRefutation {
    /// Replays the defining condition using membership queries only.
    pub fn replay(&self, a: &Subset) -> Result<bool> {
        let g = a.group();
        if self.tuple.len() != self.n {
            return Ok(false);
        }
        for f in &self.against {
            let mut escapes = false;
            for h in &self.tuple {
                if !a.expr().member(g, &g.multiply(f, h)?)? {
                    escapes = true;
                    break;
                }
            }
            if !escapes {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessCheck {
    pub holds: bool,
    pub scope: Scope,
    /// An n-tuple defeating the witness, when it fails.
    pub counterexample: Option<Vec<GroupElement>>,
}

/// The range of tuple coordinates searched.
#[derive(Clone, Debug)]
pub(crate) enum Coords {
    Elements(Vec<GroupElement>),
    /// The integers `lo..=hi`.
    Interval(i64, i64),
}

impl Coords {
    fn get(&self, i: usize) -> GroupElement {
        match self {
            Coords::Elements(v) => v[i].clone(),
            Coords::Interval(lo, _) => GroupElement::Int(lo + i as i64),
        }
    }
}

pub(crate) fn full_mask(len: usize) -> Mask {
    if len >= 128 {
        !0
    } else {
        (1u128 << len) - 1
    }
}

fn check_witness_size(f: &[GroupElement]) -> Result<()> {
    if f.is_empty() {
        return Err(Error::InvalidInput("the witness F must be nonempty".into()));
    }
    if f.len() > MAX_WITNESS_SIZE {
        return Err(Error::scale("witness size", f.len() as u128, MAX_WITNESS_SIZE as u128));
    }
    Ok(())
}

/// Coordinates that represent every element of ℤ for a periodic set with
/// exceptions: one far representative per residue plus the points that can
/// reach an exception through `F`.
fn periodic_coordinates(p: &PeriodicNF, f: &[GroupElement]) -> Vec<GroupElement> {
    let m = p.modulus() as i64;
    let near: BTreeSet<i64> =
        p.exceptions().iter().flat_map(|s| f.iter().map(move |x| s - x.as_int().expect("integer witness"))).collect();
    let mut out = Vec::with_capacity(m as usize + near.len());
    let mut seen = BTreeSet::new();
    for r in 1..=m {
        let mut x = r;
        while near.contains(&x) {
            x += m;
        }
        seen.insert(x);
        out.push(GroupElement::Int(x));
    }
    out.extend(near.into_iter().filter(|x| !seen.contains(x)).map(GroupElement::Int));
    out
}

pub(crate) fn coordinate_window(a: &Subset, f: &[GroupElement], cfg: &RunConfig) -> Result<(Coords, Scope)> {
    let g = a.group();
    Ok(match a.nf() {
        Some(NormalForm::Periodic(p)) => (Coords::Elements(periodic_coordinates(p, f)), Scope::Exact),
        Some(NormalForm::Finite(_)) => (Coords::Elements(g.ball(0)?), Scope::Exact),
        _ if g.is_integers() => {
            let r = cfg.int_window as i64;
            (Coords::Interval(-r, r), Scope::Window { radius: cfg.int_window })
        }
        _ => (Coords::Elements(g.ball(cfg.radius)?), Scope::Window { radius: cfg.radius as u64 }),
    })
}

/// `bad(k)` over an integer interval given precomputed membership flags for
/// `base..base + member.len()`.
pub(crate) fn interval_masks(member: &[bool], base: i64, lo: i64, hi: i64, f: &[i64]) -> Vec<Mask> {
    (0..=(hi - lo) as usize)
        .into_par_iter()
        .map(|i| {
            let x = lo + i as i64;
            f.iter().enumerate().fold(
                0,
                |m, (j, fj)| {
                    if member[(x + fj - base) as usize] {
                        m
                    } else {
                        m | (1u128 << j)
                    }
                },
            )
        })
        .collect()
}

/// `bad(k) = {j : f_j k ∉ A}` for every coordinate `k`.
pub(crate) fn compute_masks(a: &Subset, f: &[GroupElement], coords: &Coords) -> Result<Vec<Mask>> {
    check_witness_size(f)?;
    let g = a.group();
    for x in f {
        g.validate(x)?;
    }
    Ok(match coords {
        Coords::Elements(v) => v
            .par_iter()
            .map(|k| {
                f.iter().enumerate().fold(0, |m, (j, fj)| if a.contains(&g.mul(fj, k)) { m } else { m | (1u128 << j) })
            })
            .collect(),
        Coords::Interval(lo, hi) => {
            let fi: Vec<i64> = f.iter().map(|x| x.as_int().expect("validated")).collect();
            let (fmin, fmax) = fi.iter().fold((i64::MAX, i64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
            let base = lo + fmin;
            let len = (hi + fmax - base + 1) as usize;
            let member: Vec<bool> =
                (0..len).into_par_iter().map(|i| a.contains(&GroupElement::Int(base + i as i64))).collect();
            interval_masks(&member, base, *lo, *hi, &fi)
        }
    })
}

/// Distinct masks with the first coordinate index carrying each, in order of
/// first occurrence, with masks contained in another mask removed.
fn maximal_masks(masks: impl IntoIterator<Item = (Mask, usize)>) -> Vec<(Mask, usize)> {
    let mut first: HashMap<Mask, usize> = HashMap::new();
    for (m, i) in masks {
        if m != 0 {
            first.entry(m).and_modify(|j| *j = (*j).min(i)).or_insert(i);
        }
    }
    let mut distinct: Vec<(Mask, usize)> = first.into_iter().collect();
    distinct.sort_by_key(|&(_, i)| i);
    if distinct.len() > 20_000 {
        return distinct;
    }
    distinct.iter().filter(|&&(m, _)| !distinct.iter().any(|&(o, _)| o != m && o & m == m)).copied().collect()
}

fn cover_dfs(cand: &[(Mask, usize)], full: Mask, covered: Mask, left: usize, chosen: &mut Vec<usize>) -> bool {
    if covered == full {
        return true;
    }
    if left == 0 {
        return false;
    }
    let b = (!covered & full).trailing_zeros();
    for &(m, idx) in cand {
        if (m >> b) & 1 == 1 {
            chosen.push(idx);
            if cover_dfs(cand, full, covered | m, left - 1, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// Finds at most `n` masks whose union is `full`; returns their coordinate
/// indices in ascending order, padded to length `n`.
pub(crate) fn find_cover(masks: &[Mask], full: Mask, n: usize) -> Option<Vec<usize>> {
    let union = masks.iter().fold(0, |u, m| u | (m & full));
    if union != full {
        return None;
    }
    let cand = maximal_masks(masks.iter().map(|m| m & full).zip(0..));
    find_cover_among(&cand, full, n)
}

fn find_cover_among(cand: &[(Mask, usize)], full: Mask, n: usize) -> Option<Vec<usize>> {
    let mut chosen = Vec::new();
    if !cover_dfs(cand, full, 0, n, &mut chosen) {
        return None;
    }
    chosen.sort_unstable();
    chosen.dedup();
    let pad = chosen.first().copied().unwrap_or(0);
    while chosen.len() < n {
        chosen.push(pad);
    }
    chosen.sort_unstable();
    Some(chosen)
}

/// Does `F` witness n-syndeticity: for every n-tuple `K` is there `f ∈ F`
/// with `fK ⊆ A`?
pub fn check_witness(a: &Subset, n: usize, f: &[GroupElement], cfg: &RunConfig) -> Result<WitnessCheck> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    check_witness_size(f)?;
    if let Some(NormalForm::Free(_)) = a.nf() {
        match partition_criterion(a, n, f, cfg) {
            Ok(out) => {
                return Ok(WitnessCheck { holds: out.holds, scope: Scope::Exact, counterexample: out.tuple });
            }
            Err(Error::ScaleExceeded { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    let (coords, scope) = coordinate_window(a, f, cfg)?;
    let masks = compute_masks(a, f, &coords)?;
    Ok(match find_cover(&masks, full_mask(f.len()), n) {
        None => WitnessCheck { holds: true, scope, counterexample: None },
        Some(idx) => {
            WitnessCheck { holds: false, scope, counterexample: Some(idx.into_iter().map(|i| coords.get(i)).collect()) }
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionOutcome {
    /// True when every split of `F` into `n` parts has a part `Fᵢ` with
    /// `Fᵢ⁻¹A = G`.
    pub holds: bool,
    /// A split with no covering part, when one exists.
    pub parts: Option<Vec<Vec<GroupElement>>>,
    /// The tuple read off such a split: `kᵢ ∉ Fᵢ⁻¹A`.
    pub tuple: Option<Vec<GroupElement>>,
}

struct PartitionSearch<'a> {
    translates: &'a [NormalForm],
    n: usize,
    budget: u64,
    parts: Vec<(Vec<usize>, NormalForm)>,
}

impl PartitionSearch<'_> {
    fn dfs(&mut self, j: usize) -> Result<bool> {
        if j == self.translates.len() {
            return Ok(true);
        }
        if self.budget == 0 {
            return Err(Error::scale("partition search nodes", u128::MAX, 0));
        }
        self.budget -= 1;
        for p in 0..self.parts.len() {
            let u = self.parts[p].1.union(&self.translates[j])?;
            if !u.is_all() {
                let old = std::mem::replace(&mut self.parts[p].1, u);
                self.parts[p].0.push(j);
                if self.dfs(j + 1)? {
                    return Ok(true);
                }
                self.parts[p].0.pop();
                self.parts[p].1 = old;
            }
        }
        if self.parts.len() < self.n && !self.translates[j].is_all() {
            self.parts.push((vec![j], self.translates[j].clone()));
            if self.dfs(j + 1)? {
                return Ok(true);
            }
            self.parts.pop();
        }
        Ok(false)
    }
}

/// Partition form of the witness condition: `F` works iff for every split
/// `F = F₁ ⊔ … ⊔ Fₙ` some `Fᵢ⁻¹A` is all of `G`. Exact whenever the set has a
/// normal form; the search is bounded by the configured node budget.
pub fn partition_criterion(a: &Subset, n: usize, f: &[GroupElement], cfg: &RunConfig) -> Result<PartitionOutcome> {
    let nf =
        a.nf().ok_or_else(|| Error::InvalidInput("coverage is not decidable for a set without normal form".into()))?;
    if n == 0 || f.is_empty() {
        return Err(Error::InvalidInput("need n >= 1 and a nonempty F".into()));
    }
    let g = a.group();
    for x in f {
        g.validate(x)?;
    }
    let translates: Vec<NormalForm> = f.iter().map(|x| nf.translate(g, &g.inv(x))).collect();
    let mut search = PartitionSearch { translates: &translates, n, budget: cfg.search_budget, parts: Vec::new() };
    if !search.dfs(0).map_err(|e| match e {
        Error::ScaleExceeded { .. } => Error::scale(
            "partition search nodes",
            (cfg.search_budget as u128).saturating_add(1),
            cfg.search_budget as u128,
        ),
        e => e,
    })? {
        return Ok(PartitionOutcome { holds: true, parts: None, tuple: None });
    }
    let mut parts: Vec<Vec<GroupElement>> =
        search.parts.iter().map(|(idx, _)| idx.iter().map(|&i| f[i].clone()).collect()).collect();
    let mut tuple: Vec<GroupElement> =
        search.parts.iter().map(|(_, u)| u.complement().least_element().expect("part does not cover")).collect();
    while tuple.len() < n {
        tuple.push(g.identity());
        parts.push(Vec::new());
    }
    Ok(PartitionOutcome { holds: false, parts: Some(parts), tuple: Some(tuple) })
}

/// Is there `f ∈ F` lying in every right translate `Ak`, `k ∈ K`?
pub fn intersection_criterion(a: &Subset, f: &[GroupElement], k: &[GroupElement]) -> bool {
    let g = a.group();
    f.iter().any(|x| k.iter().all(|y| a.contains(&g.mul(x, &g.inv(y)))))
}

/// The defining cover `F A^n = G^n`, checked by explicit enumeration of
/// n-tuples. Only for exactly periodic subsets of ℤ and finite groups.
pub fn direct_cover(a: &Subset, n: usize, f: &[GroupElement], cfg: &RunConfig) -> Result<bool> {
    let g = a.group();
    let coords: Vec<GroupElement> = match a.nf() {
        Some(NormalForm::Periodic(p)) if p.is_periodic() => (0..p.modulus() as i64).map(GroupElement::Int).collect(),
        Some(NormalForm::Finite(_)) => g.ball(0)?,
        _ => return Err(Error::InvalidInput("direct cover needs a periodic or finite-group set".into())),
    };
    let size = (coords.len() as u128).saturating_pow(n as u32);
    if size > cfg.tuple_cap {
        return Err(Error::scale("explicit tuple enumeration", size, cfg.tuple_cap));
    }
    let finv: Vec<GroupElement> = f.iter().map(|x| g.inv(x)).collect();
    Ok(std::iter::repeat_n(coords.iter(), n)
        .multi_cartesian_product()
        .all(|t| finv.iter().any(|fi| t.iter().all(|x| a.contains(&g.mul(fi, x))))))
}

fn int_range(lo: i64, hi: i64) -> Vec<GroupElement> {
    (lo..=hi).map(GroupElement::Int).collect()
}

fn base_report(command: &str, a: &Subset, n: usize, verdict: Verdict, scope: Scope) -> DecisionReport {
    DecisionReport::new(command, &a.group().spec_name(), verdict, scope).with_set(a.spec()).with_scale("n", n)
}

/// Smallest prefix length of `cands` passing `check`, given the check result
/// `full` for the whole list (which passes). Passing is monotone in the prefix.
fn least_passing_prefix(
    cands: &[GroupElement],
    full: WitnessCheck,
    mut check: impl FnMut(&[GroupElement]) -> Result<WitnessCheck>,
) -> Result<(usize, WitnessCheck)> {
    let (mut lo, mut hi, mut best) = (1, cands.len(), full);
    while lo < hi {
        let mid = (lo + hi) / 2;
        let c = check(&cands[..mid])?;
        if c.holds {
            hi = mid;
            best = c;
        } else {
            lo = mid + 1;
        }
    }
    Ok((hi, best))
}

/// Decides whether `A` is n-syndetic.
pub fn decide_n_syndetic(a: &Subset, n: usize, cfg: &RunConfig) -> Result<DecisionReport> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let report = match a.nf() {
        Some(NormalForm::Periodic(p)) => decide_periodic(a, p, n, cfg)?,
        Some(NormalForm::Finite(_)) => decide_exhaustive_prefix(a, n, a.group().ball(0)?, cfg)?,
        Some(NormalForm::Free(nf)) => {
            if nf.is_finite() {
                refute_finite_free(a, n, cfg)?
            } else {
                decide_free(a, n, cfg)?
            }
        }
        None => decide_windowed_int(a, n, cfg)?,
    };
    Ok(report)
}

fn decide_periodic(a: &Subset, p: &PeriodicNF, n: usize, cfg: &RunConfig) -> Result<DecisionReport> {
    let g = a.group();
    let m = p.modulus() as i64;
    if m as usize > MAX_WITNESS_SIZE {
        return Err(Error::scale("period", m as u128, MAX_WITNESS_SIZE as u128));
    }
    let part = Subset::from_nf(g, NormalForm::Periodic(p.periodic_part()));
    let residues = int_range(0, m - 1);
    let full = check_witness(&part, n, &residues, cfg)?;
    if !full.holds {
        let mut tuple: Vec<i64> =
            full.counterexample.expect("failing check has a tuple").iter().map(|x| x.as_int().unwrap()).collect();
        if !p.is_periodic() {
            // move the tuple past every exceptional point reachable from 0..m
            let reach = |t: i64| tuple.iter().any(|h| (0..m).any(|f| p.exceptions().contains(&(h + f + t))));
            let mut shift = 0;
            while reach(shift) {
                shift += m;
            }
            tuple.iter_mut().for_each(|h| *h += shift);
        }
        let cert = ThickRefutation {
            n,
            radius: m as u64,
            against: residues,
            tuple: tuple.into_iter().map(GroupElement::Int).collect(),
            scope: Scope::Exact,
        };
        let mut r = base_report("check-nsyndetic", a, n, Verdict::Refuted, Scope::Exact)
            .with_certificate(Certificate::ThickRefutation(cert))
            .with_scale("modulus", m)
            .note(format!("every witness reduces mod {m} to a subset of 0..{m}, which the tuple defeats"));
        if !p.is_periodic() {
            r = r.note("finitely many exceptional points do not affect n-syndeticity");
        }
        return Ok(r);
    }
    let (len, _) = least_passing_prefix(&residues, full, |pre| check_witness(&part, n, pre, cfg))?;
    let mut witness: Vec<GroupElement> = residues[..len].to_vec();
    let mut notes = Vec::new();
    if !p.is_periodic() {
        let removed = p.exceptions().iter().filter(|&&x| !p.contains(x)).count() as i64;
        witness = (0..=(n as i64) * removed)
            .flat_map(|j| witness.iter().map(move |f| GroupElement::Int(f.as_int().unwrap() + m * j)))
            .collect();
        notes.push(format!(
            "witness for the periodic part repeated {} times at spacing {m} to absorb removed points",
            n as i64 * removed + 1
        ));
        if witness.len() <= MAX_WITNESS_SIZE && !check_witness(a, n, &witness, cfg)?.holds {
            return Err(Error::ConstructionFailed("lifted witness failed its own check".into()));
        }
    }
    let mut r = base_report("check-nsyndetic", a, n, Verdict::Proved, Scope::Exact)
        .with_certificate(Certificate::Syndetic(SyndeticWitness { n, f: witness, scope: Scope::Exact }))
        .with_scale("modulus", m);
    r.notes = notes;
    Ok(r)
}

/// Finite groups: `F = G` is the strongest witness, so its failure is an exact
/// refutation; otherwise report the least passing prefix of `G`.
fn decide_exhaustive_prefix(a: &Subset, n: usize, cands: Vec<GroupElement>, cfg: &RunConfig) -> Result<DecisionReport> {
    let full = check_witness(a, n, &cands, cfg)?;
    if !full.holds {
        let cert = ThickRefutation {
            n,
            radius: 0,
            against: cands,
            tuple: full.counterexample.expect("failing check has a tuple"),
            scope: Scope::Exact,
        };
        return Ok(base_report("check-nsyndetic", a, n, Verdict::Refuted, Scope::Exact)
            .with_certificate(Certificate::ThickRefutation(cert)));
    }
    let (len, _) = least_passing_prefix(&cands, full, |pre| check_witness(a, n, pre, cfg))?;
    Ok(base_report("check-nsyndetic", a, n, Verdict::Proved, Scope::Exact)
        .with_certificate(Certificate::Syndetic(SyndeticWitness { n, f: cands[..len].to_vec(), scope: Scope::Exact })))
}

/// A finite subset of a free group is not syndetic: a long enough power of
/// `a` escapes it under every translate from the ball.
fn refute_finite_free(a: &Subset, n: usize, cfg: &RunConfig) -> Result<DecisionReport> {
    let g = a.group();
    let longest = match a.nf() {
        Some(NormalForm::Free(nf)) => nf.words().iter().map(Word::len).max().unwrap_or(0),
        _ => unreachable!(),
    };
    let r = cfg.witness_radius;
    let far = Word::from_letters(&vec![1i8; longest + r as usize + 1]);
    let cert = ThickRefutation {
        n,
        radius: r as u64,
        against: g.ball(r)?,
        tuple: vec![GroupElement::Word(far); n],
        scope: Scope::Exact,
    };
    Ok(base_report("check-nsyndetic", a, n, Verdict::Refuted, Scope::Exact)
        .with_certificate(Certificate::ThickRefutation(cert))
        .note("finite sets are not syndetic in an infinite group"))
}

fn decide_free(a: &Subset, n: usize, cfg: &RunConfig) -> Result<DecisionReport> {
    let g = a.group();
    let mut cands = g.ball(cfg.witness_radius)?;
    cands.truncate(MAX_WITNESS_SIZE);
    let full = check_witness(a, n, &cands, cfg)?;
    if !full.holds {
        let cert = ThickRefutation {
            n,
            radius: cfg.witness_radius as u64,
            against: cands,
            tuple: full.counterexample.expect("failing check has a tuple"),
            scope: full.scope,
        };
        return Ok(base_report("check-nsyndetic", a, n, Verdict::UndecidedAtScale, full.scope)
            .with_certificate(Certificate::ThickRefutation(cert))
            .with_scale("witness_radius", cfg.witness_radius)
            .note("no witness inside the candidate ball; larger witnesses are not excluded"));
    }
    let (len, best) = least_passing_prefix(&cands, full, |pre| check_witness(a, n, pre, cfg))?;
    Ok(base_report("check-nsyndetic", a, n, Verdict::Proved, best.scope)
        .with_certificate(Certificate::Syndetic(SyndeticWitness { n, f: cands[..len].to_vec(), scope: best.scope }))
        .with_scale("witness_radius", cfg.witness_radius))
}

/// Result of scanning gap bounds `k` for witnesses `{0..k}` of an aperiodic
/// subset of ℤ on a window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapScan {
    /// Least passing `k`, if any `k ≤ max_k` passes.
    pub k_star: Option<u32>,
    /// A defeating tuple for every `k` below `k_star` (or up to `max_k`).
    pub refutations: Vec<(u32, Vec<i64>)>,
    pub window: u64,
}

impl GapScan {
    pub fn passes(&self, k: u32) -> bool {
        self.k_star.is_some_and(|s| k >= s)
    }
}

/// Scans `k = 0, 1, …, max_k` for the least `k` such that `{0..k}` passes the
/// n-syndetic check with coordinates in `[-window, window]`.
pub fn gap_scan(a: &Subset, n: usize, window: u64, max_k: u32) -> Result<GapScan> {
    let r = window as i64;
    gap_scan_range(a, n, -r, r, max_k)
}

/// As [`gap_scan`] with coordinates in `lo..=hi`.
pub fn gap_scan_range(a: &Subset, n: usize, lo: i64, hi: i64, max_k: u32) -> Result<GapScan> {
    if !a.group().is_integers() {
        return Err(Error::InvalidInput("gap scans are defined on z".into()));
    }
    if lo > hi {
        return Err(Error::InvalidInput("empty coordinate range".into()));
    }
    let window = hi.unsigned_abs().max(lo.unsigned_abs());
    let f = int_range(0, max_k as i64);
    let r = -lo;
    let masks = compute_masks(a, &f, &Coords::Interval(lo, hi))?;
    let distinct = maximal_masks_all(&masks);
    let mut refutations = Vec::new();
    for k in 0..=max_k {
        let full = full_mask(k as usize + 1);
        let restricted = maximal_masks(distinct.iter().map(|&(m, i)| (m & full, i)));
        match find_cover_among(&restricted, full, n) {
            None => return Ok(GapScan { k_star: Some(k), refutations, window }),
            Some(idx) => refutations.push((k, idx.into_iter().map(|i| -r + i as i64).collect())),
        }
    }
    Ok(GapScan { k_star: None, refutations, window })
}

/// Distinct masks with their first coordinate index, without dominance
/// pruning (pruning must happen after restriction).
fn maximal_masks_all(masks: &[Mask]) -> Vec<(Mask, usize)> {
    let mut first: HashMap<Mask, usize> = HashMap::new();
    for (i, &m) in masks.iter().enumerate() {
        if m != 0 {
            first.entry(m).or_insert(i);
        }
    }
    let mut v: Vec<(Mask, usize)> = first.into_iter().collect();
    v.sort_by_key(|&(_, i)| i);
    v
}

fn decide_windowed_int(a: &Subset, n: usize, cfg: &RunConfig) -> Result<DecisionReport> {
    let scan = gap_scan(a, n, cfg.int_window, cfg.max_k)?;
    let scope = Scope::Window { radius: cfg.int_window };
    let r = base_report("check-nsyndetic", a, n, Verdict::UndecidedAtScale, scope)
        .with_scale("window", cfg.int_window)
        .with_scale("max_k", cfg.max_k);
    Ok(match scan.k_star {
        Some(k) => {
            let mut r =
                r.with_certificate(Certificate::Syndetic(SyndeticWitness { n, f: int_range(0, k as i64), scope }));
            r.verdict = Verdict::Proved;
            r.with_scale("k_star", k).note("no normal form; the witness is checked on the window only")
        }
        None => {
            let (k, tuple) = scan.refutations.last().cloned().expect("max_k + 1 attempts");
            r.with_certificate(Certificate::ThickRefutation(ThickRefutation {
                n,
                radius: cfg.int_window,
                against: int_range(0, k as i64),
                tuple: tuple.into_iter().map(GroupElement::Int).collect(),
                scope,
            }))
            .note(format!("no gap bound up to {} passes on the window", cfg.max_k))
        }
    })
}

/// Maps a syndeticity report for `B^c` to a thickness verdict for `B`:
/// exact answers flip, window-scale answers stay undecided.
fn thick_verdict(dual: Verdict, scope: Scope) -> Verdict {
    match (dual, scope) {
        (Verdict::Proved, Scope::Exact) => Verdict::Refuted,
        (Verdict::Refuted, Scope::Exact) => Verdict::Proved,
        _ => Verdict::UndecidedAtScale,
    }
}

/// Direct search for the thickness tuple: `B` is 1/n-thick iff for the
/// strongest available `F` some n-tuple `h` has, for every `f ∈ F`, a
/// coordinate with `f hᵢ ∈ B`. Returns the thickness verdict, its scope and
/// the tuple when found.
pub fn direct_thick(b: &Subset, n: usize, cfg: &RunConfig) -> Result<(Verdict, Scope, Option<ThickRefutation>)> {
    let g = b.group();
    let (f, coords, scope, radius): (Vec<GroupElement>, Coords, Scope, u64) = match b.nf() {
        Some(NormalForm::Periodic(p)) => {
            let q = p.periodic_part();
            let m = q.modulus() as i64;
            if m as usize > MAX_WITNESS_SIZE {
                return Err(Error::scale("period", m as u128, MAX_WITNESS_SIZE as u128));
            }
            let b2 = Subset::from_nf(g, NormalForm::Periodic(q));
            return direct_thick_on(
                &b2,
                n,
                int_range(0, m - 1),
                Coords::Elements(int_range(1, m)),
                Scope::Exact,
                m as u64,
            );
        }
        Some(NormalForm::Finite(_)) => (g.ball(0)?, Coords::Elements(g.ball(0)?), Scope::Exact, 0),
        _ if g.is_integers() => {
            let r = cfg.int_window as i64;
            (
                int_range(0, cfg.max_k as i64),
                Coords::Interval(-r, r),
                Scope::Window { radius: cfg.int_window },
                cfg.int_window,
            )
        }
        _ => {
            let mut f = g.ball(cfg.witness_radius)?;
            f.truncate(MAX_WITNESS_SIZE);
            (f, Coords::Elements(g.ball(cfg.radius)?), Scope::Window { radius: cfg.radius as u64 }, cfg.radius as u64)
        }
    };
    direct_thick_on(b, n, f, coords, scope, radius)
}

fn direct_thick_on(
    b: &Subset,
    n: usize,
    f: Vec<GroupElement>,
    coords: Coords,
    scope: Scope,
    radius: u64,
) -> Result<(Verdict, Scope, Option<ThickRefutation>)> {
    // good(h) = {j : f_j h ∈ B}; these are the bad masks of B^c
    let masks = compute_masks(&b.complement(), &f, &coords)?;
    Ok(match find_cover(&masks, full_mask(f.len()), n) {
        Some(idx) => {
            let cert = ThickRefutation {
                n,
                radius,
                against: f,
                tuple: idx.into_iter().map(|i| coords.get(i)).collect(),
                scope,
            };
            let v = if scope.is_exact() { Verdict::Proved } else { Verdict::UndecidedAtScale };
            (v, scope, Some(cert))
        }
        None => {
            let v = if scope.is_exact() { Verdict::Refuted } else { Verdict::UndecidedAtScale };
            (v, scope, None)
        }
    })
}

/// Decides whether `B` is 1/n-thick, through the complement's n-syndeticity
/// and independently through the direct tuple search. Both verdicts are
/// recorded; a disagreement yields an undecided report.
pub fn decide_fractionally_thick(b: &Subset, n: usize, cfg: &RunConfig) -> Result<DecisionReport> {
    let dual = decide_n_syndetic(&b.complement(), n, cfg)?;
    let via_dual = thick_verdict(dual.verdict, dual.scope);
    let (direct, direct_scope, tuple) = direct_thick(b, n, cfg)?;
    let agree = via_dual == direct;
    let verdict = if agree { via_dual } else { Verdict::UndecidedAtScale };
    let mut r = DecisionReport::new("check-thick", &b.group().spec_name(), verdict, dual.scope.meet(direct_scope))
        .with_set(b.spec())
        .with_scale("n", n)
        .with_scale("dual_verdict", via_dual)
        .with_scale("direct_verdict", direct);
    r.certificate = match (tuple, dual.certificate) {
        (Some(t), _) => Some(Certificate::ThickRefutation(t)),
        (None, c) => c,
    };
    if !agree {
        r = r.note("the dual and direct computations disagree");
    }
    if dual.verdict == Verdict::Proved && !dual.scope.is_exact() {
        r = r.note("the complement passes the n-syndetic check on the window only");
    }
    Ok(r)
}

/// Membership in the product set `A + B` over `[-window, window]`, for `A`
/// a subset of ℤ and `B` given by a predicate, with `b` restricted to the
/// same window.
pub fn product_set_window(a: &Subset, b: impl Fn(i64) -> bool + Sync, window: u64) -> Vec<bool> {
    let w = window as i64;
    let bs: Vec<i64> = (-w..=w).filter(|&x| b(x)).collect();
    (-w..=w).into_par_iter().map(|x| bs.iter().any(|&y| a.contains(&GroupElement::Int(x - y)))).collect()
}

/// Windowed check that the product of a syndetic `A ⊆ ℤ` and a thick `B`
/// (given as a predicate) is n-syndetic for each requested `n`.
pub fn product_syndetic_thick(
    a: &Subset,
    b: impl Fn(i64) -> bool + Sync,
    ns: &[usize],
    window: u64,
    cfg: &RunConfig,
) -> Result<DecisionReport> {
    if !a.group().is_integers() {
        return Err(Error::InvalidInput("product sets are supported on z".into()));
    }
    let w = window as i64;
    let member = product_set_window(a, b, window);
    let max_k = (cfg.max_k as i64).min(w / 2);
    let half = w / 2;
    let f: Vec<i64> = (0..=max_k).collect();
    // coordinates in [-w/2, w/2 - max_k] keep every x + f inside the window
    let masks = interval_masks(&member, -w, -half, half - max_k, &f);
    let distinct = maximal_masks_all(&masks);
    let scope = Scope::Window { radius: half as u64 };
    let mut items = Vec::new();
    let mut all_pass = true;
    let mut ks = Vec::new();
    for &n in ns {
        let found = (0..=max_k as u32).find(|&k| {
            let full = full_mask(k as usize + 1);
            let restricted = maximal_masks(distinct.iter().map(|&(m, i)| (m & full, i)));
            find_cover_among(&restricted, full, n).is_none()
        });
        match found {
            Some(k) => {
                ks.push(k as i64);
                items.push(Certificate::Syndetic(SyndeticWitness { n, f: int_range(0, k as i64), scope }));
            }
            None => {
                ks.push(-1);
                all_pass = false;
            }
        }
    }
    let verdict = if all_pass { Verdict::Proved } else { Verdict::UndecidedAtScale };
    Ok(DecisionReport::new("product-syndetic-thick", "z", verdict, scope)
        .with_certificate(Certificate::Bundle { items })
        .with_scale("window", window)
        .with_scale("ns", ns)
        .with_scale("k_per_n", ks)
        .note("product set evaluated with the thick factor truncated to the window"))
}

/// Replays a syndetic witness with membership queries only, on the scope it
/// claims (exact witnesses on free groups are replayed on ball(`radius`)).
pub fn verify_syndetic_witness(a: &Subset, w: &SyndeticWitness, cfg: &RunConfig) -> Result<bool> {
    let g = a.group();
    check_witness_size(&w.f)?;
    let coords: Vec<GroupElement> = match (w.scope, a.nf()) {
        (Scope::Exact, Some(NormalForm::Periodic(p))) => periodic_coordinates(p, &w.f),
        (Scope::Exact, Some(NormalForm::Finite(_))) => g.ball(0)?,
        (Scope::Exact, _) => g.ball(cfg.radius)?,
        (Scope::Window { radius }, _) if g.is_integers() => int_range(-(radius as i64), radius as i64),
        (Scope::Window { radius }, _) => g.ball(radius as u32)?,
    };
    let expr = a.expr();
    let masks: Vec<Mask> = coords
        .par_iter()
        .map(|k| {
            w.f.iter().enumerate().fold(0, |m, (j, f)| {
                if expr.member(g, &g.mul(f, k)).expect("resolved") {
                    m
                } else {
                    m | (1u128 << j)
                }
            })
        })
        .collect();
    let full = full_mask(w.f.len());
    let mut distinct: Vec<Mask> = masks.into_iter().filter(|&m| m != 0).collect();
    distinct.sort_unstable();
    distinct.dedup();
    let maximal: Vec<Mask> =
        distinct.iter().copied().filter(|&m| !distinct.iter().any(|&o| o != m && o & m == m)).collect();
    let covered = (1..=w.n.min(maximal.len()))
        .any(|r| maximal.iter().combinations(r).any(|c| c.into_iter().fold(0, |u, m| u | m) == full));
    Ok(!covered)
}

/// Reads a report's verdict back for a quick boolean answer in tests and
/// the amenability harness.
pub fn is_n_syndetic_exact(a: &Subset, n: usize, cfg: &RunConfig) -> Result<Option<bool>> {
    let r = decide_n_syndetic(a, n, cfg)?;
    Ok(match (r.verdict, r.scope) {
        (Verdict::Proved, Scope::Exact) => Some(true),
        (Verdict::Refuted, _) => Some(false),
        _ => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupModel;
    use crate::set_algebra::SetExpr;
    use proptest::prelude::*;

    fn z() -> GroupModel {
        GroupModel::integers()
    }

    fn ints(xs: impl IntoIterator<Item = i64>) -> Vec<GroupElement> {
        xs.into_iter().map(GroupElement::Int).collect()
    }

    fn cfg() -> RunConfig {
        RunConfig::default()
    }

    fn sub(e: SetExpr) -> Subset {
        Subset::new(&z(), &e).unwrap()
    }

    #[test]
    fn check_witness_examples() {
        let even = sub(SetExpr::multiples(2));
        assert!(check_witness(&even, 1, &ints([0, 1]), &cfg()).unwrap().holds);
        for k in [1, 3, 8] {
            let c = check_witness(&even, 2, &ints(0..=k), &cfg()).unwrap();
            assert!(!c.holds);
            assert_eq!(c.scope, Scope::Exact);
        }
        let no3 = sub(SetExpr::non_multiples(3));
        assert!(check_witness(&no3, 2, &ints(0..=2), &cfg()).unwrap().holds);
        assert!(!check_witness(&no3, 2, &ints(0..=1), &cfg()).unwrap().holds);
    }

    #[test]
    fn non_multiples_are_n_minus_one_syndetic_only() {
        for n in 3..=5i64 {
            let a = sub(SetExpr::non_multiples(n as u64));
            let r = decide_n_syndetic(&a, n as usize - 1, &cfg()).unwrap();
            assert_eq!(r.verdict, Verdict::Proved);
            let Some(Certificate::Syndetic(w)) = &r.certificate else { panic!() };
            assert_eq!(w.f, ints(0..n));
            let r = decide_n_syndetic(&a, n as usize, &cfg()).unwrap();
            assert_eq!(r.verdict, Verdict::Refuted);
            assert_eq!(r.scope, Scope::Exact);
            let Some(Certificate::ThickRefutation(t)) = &r.certificate else { panic!() };
            assert_eq!(t.tuple, ints(1..=n));
            assert!(t.replay(&a).unwrap());
        }
    }

    #[test]
    fn partition_examples() {
        let no3 = sub(SetExpr::non_multiples(3));
        assert!(partition_criterion(&no3, 2, &ints(0..=2), &cfg()).unwrap().holds);
        let even = sub(SetExpr::multiples(2));
        let out = partition_criterion(&even, 2, &ints(0..=1), &cfg()).unwrap();
        assert!(!out.holds);
        assert_eq!(out.parts.unwrap(), vec![ints([0]), ints([1])]);
        let all = sub(SetExpr::All);
        assert!(partition_criterion(&all, 3, &ints([0]), &cfg()).unwrap().holds);
    }

    #[test]
    fn intersection_examples() {
        let no3 = sub(SetExpr::non_multiples(3));
        assert!(intersection_criterion(&no3, &ints(0..=2), &ints([0, 1])));
        let even = sub(SetExpr::multiples(2));
        assert!(!intersection_criterion(&even, &ints([0, 1]), &ints([0, 1])));
        assert!(intersection_criterion(&sub(SetExpr::All), &ints([0]), &ints([5, 9])));
    }

    #[test]
    fn thickness_examples() {
        let r = decide_fractionally_thick(&sub(SetExpr::multiples(2)), 2, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Proved);
        let r = decide_fractionally_thick(&sub(SetExpr::multiples(3)), 2, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Refuted);
        for n in 1..4 {
            let r = decide_fractionally_thick(&sub(SetExpr::Empty), n, &cfg()).unwrap();
            assert_eq!(r.verdict, Verdict::Refuted);
        }
    }

    #[test]
    fn finite_sets_in_z_are_refuted_exactly() {
        let a = sub(SetExpr::ints(&[0, 3, 4]));
        let r = decide_n_syndetic(&a, 1, &cfg()).unwrap();
        assert_eq!((r.verdict, r.scope), (Verdict::Refuted, Scope::Exact));
        let Some(Certificate::ThickRefutation(t)) = &r.certificate else { panic!() };
        assert!(t.replay(&a).unwrap());
    }

    #[test]
    fn exceptions_do_not_change_the_verdict() {
        // (Z \ 3Z) minus {1, 2, 4}
        let a = sub(SetExpr::intersection(vec![SetExpr::non_multiples(3), SetExpr::ints(&[1, 2, 4]).complement()]));
        let r = decide_n_syndetic(&a, 2, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Proved);
        let Some(Certificate::Syndetic(w)) = &r.certificate else { panic!() };
        assert!(verify_syndetic_witness(&a, w, &cfg()).unwrap());
        let r = decide_n_syndetic(&a, 3, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Refuted);
        let Some(Certificate::ThickRefutation(t)) = &r.certificate else { panic!() };
        assert!(t.replay(&a).unwrap());
    }

    #[test]
    fn free_group_cylinders() {
        let f2 = GroupModel::free(2).unwrap();
        let ba = Subset::new(&f2, &SetExpr::cylinder("a")).unwrap();
        let r = decide_n_syndetic(&ba, 1, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Proved);
        assert_eq!(r.scope, Scope::Exact);
        let fin = Subset::new(&f2, &SetExpr::parse_inline("words:a,bA").unwrap()).unwrap();
        let r = decide_n_syndetic(&fin, 2, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Refuted);
        let Some(Certificate::ThickRefutation(t)) = &r.certificate else { panic!() };
        assert!(t.replay(&fin).unwrap());
    }

    #[test]
    fn free_group_two_syndetic_cylinder() {
        let f2 = GroupModel::free(2).unwrap();
        let ba = Subset::new(&f2, &SetExpr::cylinder("a")).unwrap();
        let w: Vec<GroupElement> =
            ["a", "aB", "ab", "abA"].iter().map(|s| GroupElement::Word(s.parse().unwrap())).collect();
        let c = check_witness(&ba, 2, &w, &cfg()).unwrap();
        assert!(c.holds);
        assert_eq!(c.scope, Scope::Exact);
        let c = check_witness(&ba, 2, &w[..2], &cfg()).unwrap();
        assert!(!c.holds);
        let t = c.counterexample.unwrap();
        let g = &f2;
        assert!(w[..2].iter().all(|f| t.iter().any(|h| !ba.contains(&g.mul(f, h)))));
    }

    #[test]
    fn powers_of_two_window() {
        let a = sub(SetExpr::PowersOfTwoComplement);
        let scan = gap_scan(&a, 2, 1 << 12, 20).unwrap();
        assert_eq!(scan.k_star, Some(4));
        for (_, t) in &scan.refutations {
            assert_eq!(t.len(), 2);
        }
    }

    #[test]
    fn product_of_syndetic_and_thick() {
        let even = sub(SetExpr::multiples(2));
        let r = product_syndetic_thick(&even, |x| x >= 0, &[1, 2, 3], 1000, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Proved);
        let triples = sub(SetExpr::multiples(3));
        let squares = |x: i64| (0..40i64).any(|j| x >= j * j && x <= j * j + j);
        let r = product_syndetic_thick(&triples, squares, &[2], 1000, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Proved);
        let all = sub(SetExpr::All);
        assert_eq!(product_syndetic_thick(&all, |_| true, &[1], 50, &cfg()).unwrap().verdict, Verdict::Proved);
    }

    fn periodic(mask: Vec<bool>) -> Subset {
        Subset::from_nf(&z(), NormalForm::Periodic(PeriodicNF::from_mask(mask)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn monotone_under_superset(mask in prop::collection::vec(any::<bool>(), 1..7), extra in prop::collection::vec(any::<bool>(), 1..7), n in 1usize..4) {
            let big: Vec<bool> = (0..mask.len() * extra.len()).map(|i| mask[i % mask.len()] || extra[i % extra.len()]).collect();
            let a = periodic(mask);
            let b = periodic(big);
            if is_n_syndetic_exact(&a, n, &cfg()).unwrap() == Some(true) {
                prop_assert_eq!(is_n_syndetic_exact(&b, n, &cfg()).unwrap(), Some(true));
            }
        }

        #[test]
        fn higher_order_implies_lower(mask in prop::collection::vec(any::<bool>(), 1..8), n in 1usize..4) {
            let a = periodic(mask);
            if is_n_syndetic_exact(&a, n + 1, &cfg()).unwrap() == Some(true) {
                prop_assert_eq!(is_n_syndetic_exact(&a, n, &cfg()).unwrap(), Some(true));
            }
        }

        #[test]
        fn certificates_replay(mask in prop::collection::vec(any::<bool>(), 1..8), n in 1usize..4) {
            let a = periodic(mask);
            let r = decide_n_syndetic(&a, n, &cfg()).unwrap();
            match r.certificate.unwrap() {
                Certificate::Syndetic(w) => prop_assert!(verify_syndetic_witness(&a, &w, &cfg()).unwrap()),
                Certificate::ThickRefutation(t) => prop_assert!(t.replay(&a).unwrap()),
                _ => prop_assert!(false),
            }
        }
    }
}

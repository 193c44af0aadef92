//! Subsets of a group as expression trees, with exact normal forms for the
//! three supported families:
//!
//! * ℤ: a periodic residue mask plus a finite set of exceptional points
//!   ([`PeriodicNF`]); this covers residue classes, finite sets and all their
//!   Boolean combinations and translates.
//! * Free groups: finitely many words plus finitely many disjoint cylinders
//!   ([`FreeGroupNF`]).
//! * Finite groups: a bitset ([`FiniteNF`]).
//!
//! Expressions mentioning the complement of the powers of two have no normal
//! form; downstream code falls back to windowed membership for them.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{free_letters, GroupElement, GroupKind, GroupModel, Word};

/// Largest period a ℤ normal form may reach through Boolean combination.
pub const MAX_PERIOD: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum SetExpr {
    All,
    Empty,
    /// `{x ∈ ℤ : x mod modulus ∈ residues}`.
    Residue {
        modulus: u64,
        residues: Vec<u64>,
    },
    /// ℤ minus `{2, 4, 8, ...}`.
    PowersOfTwoComplement,
    /// All reduced words with the given prefix.
    Cylinder {
        prefix: Word,
    },
    FiniteWords {
        elements: Vec<GroupElement>,
    },
    Union {
        args: Vec<SetExpr>,
    },
    Intersection {
        args: Vec<SetExpr>,
    },
    Complement {
        arg: Box<SetExpr>,
    },
    /// The left translate `by · arg`.
    Translate {
        by: GroupElement,
        arg: Box<SetExpr>,
    },
}

impl SetExpr {
    pub fn residue(modulus: u64, residues: &[u64]) -> Self {
        SetExpr::Residue { modulus, residues: residues.to_vec() }
    }

    /// Multiples of `m`.
    pub fn multiples(m: u64) -> Self {
        SetExpr::residue(m, &[0])
    }

    /// ℤ minus the multiples of `m`.
    pub fn non_multiples(m: u64) -> Self {
        SetExpr::residue(m, &(1..m).collect::<Vec<_>>())
    }

    pub fn cylinder(prefix: &str) -> Self {
        SetExpr::Cylinder { prefix: prefix.parse().expect("valid word literal") }
    }

    pub fn ints(xs: &[i64]) -> Self {
        SetExpr::FiniteWords { elements: xs.iter().map(|&x| GroupElement::Int(x)).collect() }
    }

    pub fn complement(self) -> Self {
        SetExpr::Complement { arg: Box::new(self) }
    }

    pub fn translate(self, by: GroupElement) -> Self {
        SetExpr::Translate { by, arg: Box::new(self) }
    }

    pub fn union(args: Vec<SetExpr>) -> Self {
        SetExpr::Union { args }
    }

    pub fn intersection(args: Vec<SetExpr>) -> Self {
        SetExpr::Intersection { args }
    }

    /// Checks leaf compatibility with `group` and converts element encodings
    /// to the group's canonical form.
    pub fn resolve(&self, group: &GroupModel) -> Result<SetExpr> {
        Ok(match self {
            SetExpr::All | SetExpr::Empty => self.clone(),
            SetExpr::Residue { modulus, residues } => {
                if !group.is_integers() {
                    return Err(Error::InvalidExpr("residue sets require the group z".into()));
                }
                if *modulus == 0 || *modulus > MAX_PERIOD {
                    return Err(Error::InvalidExpr(format!("modulus {modulus} out of range")));
                }
                let mut r: Vec<u64> = residues.iter().map(|x| x % modulus).collect();
                r.sort_unstable();
                r.dedup();
                SetExpr::Residue { modulus: *modulus, residues: r }
            }
            SetExpr::PowersOfTwoComplement => {
                if !group.is_integers() {
                    return Err(Error::InvalidExpr("the powers-of-two complement is only defined on z".into()));
                }
                self.clone()
            }
            SetExpr::Cylinder { prefix } => {
                group
                    .validate(&GroupElement::Word(prefix.clone()))
                    .map_err(|e| Error::InvalidExpr(format!("cylinder {prefix}: {e}")))?;
                self.clone()
            }
            SetExpr::FiniteWords { elements } => {
                let mut v = elements.iter().map(|g| group.coerce(g.clone())).collect::<Result<Vec<_>>>()?;
                v.sort();
                v.dedup();
                SetExpr::FiniteWords { elements: v }
            }
            SetExpr::Union { args } => {
                SetExpr::Union { args: args.iter().map(|a| a.resolve(group)).collect::<Result<_>>()? }
            }
            SetExpr::Intersection { args } => {
                SetExpr::Intersection { args: args.iter().map(|a| a.resolve(group)).collect::<Result<_>>()? }
            }
            SetExpr::Complement { arg } => SetExpr::Complement { arg: Box::new(arg.resolve(group)?) },
            SetExpr::Translate { by, arg } => {
                SetExpr::Translate { by: group.coerce(by.clone())?, arg: Box::new(arg.resolve(group)?) }
            }
        })
    }

    /// Membership by direct evaluation of the tree. The expression must
    /// already be resolved against `group`.
    pub fn member(&self, group: &GroupModel, g: &GroupElement) -> Result<bool> {
        Ok(match self {
            SetExpr::All => true,
            SetExpr::Empty => false,
            SetExpr::Residue { modulus, residues } => {
                let x = g.as_int().ok_or_else(|| Error::InvalidExpr("residue set queried off z".into()))?;
                residues.contains(&(x.rem_euclid(*modulus as i64) as u64))
            }
            SetExpr::PowersOfTwoComplement => {
                let x = g
                    .as_int()
                    .ok_or_else(|| Error::InvalidExpr("the powers-of-two complement is only defined on z".into()))?;
                !is_power_of_two_at_least_2(x)
            }
            SetExpr::Cylinder { prefix } => g
                .as_word()
                .ok_or_else(|| Error::InvalidExpr("cylinder queried off a free group".into()))?
                .has_prefix(prefix),
            SetExpr::FiniteWords { elements } => elements.contains(g),
            SetExpr::Union { args } => {
                for a in args {
                    if a.member(group, g)? {
                        return Ok(true);
                    }
                }
                false
            }
            SetExpr::Intersection { args } => {
                for a in args {
                    if !a.member(group, g)? {
                        return Ok(false);
                    }
                }
                true
            }
            SetExpr::Complement { arg } => !arg.member(group, g)?,
            SetExpr::Translate { by, arg } => arg.member(group, &group.mul(&group.inv(by), g))?,
        })
    }

    /// True if the tree mentions an aperiodic leaf.
    pub fn has_aperiodic_leaf(&self) -> bool {
        match self {
            SetExpr::PowersOfTwoComplement => true,
            SetExpr::Union { args } | SetExpr::Intersection { args } => args.iter().any(SetExpr::has_aperiodic_leaf),
            SetExpr::Complement { arg } | SetExpr::Translate { arg, .. } => arg.has_aperiodic_leaf(),
            _ => false,
        }
    }

    /// Parses the inline syntax used on the command line.
    ///
    /// ```text
    /// expr   := term ('|' term)*
    /// term   := factor ('&' factor)*
    /// factor := '!' factor | 'not:' factor | 'shift:' ELEM ':' factor | '(' expr ')' | atom
    /// atom   := all | empty | odd | even | pow2c | residue:M:R1,R2 | residue:M:excludeR1,R2
    ///         | mult:M | cyl:WORD | words:W1,W2 | elems:X1,X2
    /// ```
    pub fn parse_inline(s: &str) -> Result<SetExpr> {
        let mut p = InlineParser { s: s.trim(), pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(Error::Parse(format!("trailing input at {:?}", &p.s[p.pos..])));
        }
        Ok(e)
    }
}

fn is_power_of_two_at_least_2(x: i64) -> bool {
    x >= 2 && (x as u64).is_power_of_two()
}

struct InlineParser<'a> {
    s: &'a str,
    pos: usize,
}

impl InlineParser<'_> {
    fn skip_ws(&mut self) {
        while self.s[self.pos..].starts_with(' ') {
            self.pos += 1;
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.s[self.pos..].starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<SetExpr> {
        let mut args = vec![self.term()?];
        while self.eat("|") {
            args.push(self.term()?);
        }
        Ok(if args.len() == 1 { args.pop().unwrap() } else { SetExpr::Union { args } })
    }

    fn term(&mut self) -> Result<SetExpr> {
        let mut args = vec![self.factor()?];
        while self.eat("&") {
            args.push(self.factor()?);
        }
        Ok(if args.len() == 1 { args.pop().unwrap() } else { SetExpr::Intersection { args } })
    }

    fn factor(&mut self) -> Result<SetExpr> {
        if self.eat("!") || self.eat("not:") {
            return Ok(self.factor()?.complement());
        }
        if self.eat("(") {
            let e = self.expr()?;
            if !self.eat(")") {
                return Err(Error::Parse("missing ')'".into()));
            }
            return Ok(e);
        }
        if self.eat("shift:") {
            let rest = &self.s[self.pos..];
            let end = rest.find(':').ok_or_else(|| Error::Parse("shift needs ':'".into()))?;
            let by = parse_loose_element(&rest[..end])?;
            self.pos += end + 1;
            return Ok(self.factor()?.translate(by));
        }
        self.skip_ws();
        let rest = &self.s[self.pos..];
        let end = rest.find(['|', '&', '(', ')']).unwrap_or(rest.len());
        let atom = rest[..end].trim();
        self.pos += end;
        parse_atom(atom)
    }
}

/// Integers parse as `Int`, anything else as a word; group resolution later
/// turns `Int` into an index for finite groups.
fn parse_loose_element(s: &str) -> Result<GroupElement> {
    let s = s.trim();
    if let Ok(n) = s.trim_start_matches('#').parse::<i64>() {
        Ok(GroupElement::Int(n))
    } else {
        Ok(GroupElement::Word(s.parse()?))
    }
}

fn parse_u64_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| x.trim().parse::<u64>().map_err(|e| Error::Parse(format!("bad number {x:?}: {e}"))))
        .collect()
}

fn parse_atom(atom: &str) -> Result<SetExpr> {
    let (head, tail) = atom.split_once(':').unwrap_or((atom, ""));
    Ok(match head {
        "all" => SetExpr::All,
        "empty" => SetExpr::Empty,
        "odd" => SetExpr::residue(2, &[1]),
        "even" => SetExpr::multiples(2),
        "pow2c" => SetExpr::PowersOfTwoComplement,
        "mult" => SetExpr::multiples(tail.parse().map_err(|e| Error::Parse(format!("bad modulus {tail:?}: {e}")))?),
        "residue" => {
            let (m, rs) =
                tail.split_once(':').ok_or_else(|| Error::Parse(format!("expected residue:M:R, got {atom:?}")))?;
            let m: u64 = m.parse().map_err(|e| Error::Parse(format!("bad modulus {m:?}: {e}")))?;
            if m == 0 {
                return Err(Error::Parse("modulus must be positive".into()));
            }
            if let Some(ex) = rs.strip_prefix("exclude") {
                let ex: Vec<u64> = parse_u64_list(ex)?.into_iter().map(|r| r % m).collect();
                SetExpr::residue(m, &(0..m).filter(|r| !ex.contains(r)).collect::<Vec<_>>())
            } else {
                SetExpr::residue(m, &parse_u64_list(rs)?)
            }
        }
        "cyl" => SetExpr::Cylinder { prefix: tail.parse()? },
        "words" | "elems" => SetExpr::FiniteWords {
            elements: tail
                .split(',')
                .filter(|x| !x.trim().is_empty())
                .map(parse_loose_element)
                .collect::<Result<_>>()?,
        },
        _ => return Err(Error::Parse(format!("unknown set atom {atom:?}"))),
    })
}

/// JSON set specification: a group spec string plus an expression tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetSpec {
    pub group: String,
    pub expr: SetExpr,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Normal form of a subset of ℤ: the periodic set given by `mask` (indexed by
/// residue mod `modulus`), with membership flipped at the finitely many
/// `exceptions`. The period is minimal and every exception genuinely differs
/// from the periodic part, so the representation is unique.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PeriodicNF {
    modulus: u64,
    mask: Vec<bool>,
    exceptions: BTreeSet<i64>,
}

impl PeriodicNF {
    pub fn periodic(modulus: u64, residues: &[u64]) -> Self {
        let mut mask = vec![false; modulus as usize];
        for &r in residues {
            mask[(r % modulus) as usize] = true;
        }
        PeriodicNF { modulus, mask, exceptions: BTreeSet::new() }.canonical()
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        assert!(!mask.is_empty());
        PeriodicNF { modulus: mask.len() as u64, mask, exceptions: BTreeSet::new() }.canonical()
    }

    pub fn finite(points: &[i64]) -> Self {
        PeriodicNF { modulus: 1, mask: vec![false], exceptions: points.iter().copied().collect() }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn exceptions(&self) -> &BTreeSet<i64> {
        &self.exceptions
    }

    /// True when the set is exactly periodic (no exceptional points).
    pub fn is_periodic(&self) -> bool {
        self.exceptions.is_empty()
    }

    pub fn residues(&self) -> Vec<u64> {
        (0..self.modulus).filter(|&r| self.mask[r as usize]).collect()
    }

    /// The periodic part alone.
    pub fn periodic_part(&self) -> PeriodicNF {
        PeriodicNF { modulus: self.modulus, mask: self.mask.clone(), exceptions: BTreeSet::new() }
    }

    fn periodic_contains(&self, x: i64) -> bool {
        self.mask[x.rem_euclid(self.modulus as i64) as usize]
    }

    pub fn contains(&self, x: i64) -> bool {
        self.periodic_contains(x) ^ self.exceptions.contains(&x)
    }

    fn canonical(mut self) -> Self {
        let m = self.modulus as usize;
        let mut best = m;
        for d in 1..m {
            if m.is_multiple_of(d) && (0..m).all(|i| self.mask[i] == self.mask[i % d]) {
                best = d;
                break;
            }
        }
        self.mask.truncate(best);
        self.modulus = best as u64;
        self
    }

    fn combine(&self, other: &PeriodicNF, op: impl Fn(bool, bool) -> bool) -> Result<PeriodicNF> {
        let l = lcm(self.modulus, other.modulus);
        if l > MAX_PERIOD {
            return Err(Error::scale("period of combined residue set", l as u128, MAX_PERIOD as u128));
        }
        let mask: Vec<bool> =
            (0..l as i64).map(|r| op(self.periodic_contains(r), other.periodic_contains(r))).collect();
        let base = PeriodicNF { modulus: l, mask, exceptions: BTreeSet::new() }.canonical();
        let exceptions = self
            .exceptions
            .iter()
            .chain(&other.exceptions)
            .copied()
            .filter(|&x| op(self.contains(x), other.contains(x)) != base.periodic_contains(x))
            .collect();
        Ok(PeriodicNF { exceptions, ..base })
    }

    pub fn union(&self, other: &PeriodicNF) -> Result<PeriodicNF> {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &PeriodicNF) -> Result<PeriodicNF> {
        self.combine(other, |a, b| a && b)
    }

    pub fn complement(&self) -> PeriodicNF {
        PeriodicNF {
            modulus: self.modulus,
            mask: self.mask.iter().map(|b| !b).collect(),
            exceptions: self.exceptions.clone(),
        }
    }

    /// The translate `t + A`.
    pub fn translate(&self, t: i64) -> PeriodicNF {
        let m = self.modulus as i64;
        PeriodicNF {
            modulus: self.modulus,
            mask: (0..m).map(|r| self.mask[(r - t).rem_euclid(m) as usize]).collect(),
            exceptions: self.exceptions.iter().map(|x| x + t).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.exceptions.is_empty() && self.mask.iter().all(|b| !b)
    }

    pub fn is_all(&self) -> bool {
        self.exceptions.is_empty() && self.mask.iter().all(|&b| b)
    }

    /// True if the set is finite (its periodic part is empty).
    pub fn is_finite(&self) -> bool {
        self.mask.iter().all(|b| !b)
    }

    /// True if the complement is finite.
    pub fn is_cofinite(&self) -> bool {
        self.mask.iter().all(|&b| b)
    }

    /// Density of the periodic part as `(count, modulus)`.
    pub fn density(&self) -> (u64, u64) {
        (self.mask.iter().filter(|&&b| b).count() as u64, self.modulus)
    }
}

impl fmt::Display for PeriodicNF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{x mod {} in {:?}}}", self.modulus, self.residues())?;
        if !self.exceptions.is_empty() {
            write!(f, " xor {:?}", self.exceptions)?;
        }
        Ok(())
    }
}

/// Normal form of a subset of a free group: a finite word set plus a list of
/// pairwise prefix-incomparable cylinders, with no word lying inside a
/// cylinder. Canonical: cylinders are merged whenever a word and all of its
/// children cylinders are present, and both lists are sorted length-lex.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FreeGroupNF {
    rank: u8,
    words: Vec<Word>,
    cylinders: Vec<Word>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum NodeState {
    Full,
    Empty,
    Partial,
}

/// Items of one operand restricted to the subtree below a node.
struct Side<'a> {
    full: bool,
    words: Vec<&'a Word>,
    cylinders: Vec<&'a Word>,
}

impl<'a> Side<'a> {
    fn root(nf: &'a FreeGroupNF) -> Self {
        Side { full: false, words: nf.words.iter().collect(), cylinders: nf.cylinders.iter().collect() }
    }

    fn state(&self, p: &Word) -> NodeState {
        if self.full || self.cylinders.contains(&p) {
            NodeState::Full
        } else if self.words.is_empty() && self.cylinders.is_empty() {
            NodeState::Empty
        } else {
            NodeState::Partial
        }
    }

    fn contains_node(&self, p: &Word) -> bool {
        self.state(p) == NodeState::Full || self.words.contains(&p)
    }

    fn full() -> Self {
        Side { full: true, words: vec![], cylinders: vec![] }
    }

    fn child(&self, c: &Word) -> Side<'a> {
        Side {
            full: false,
            words: self.words.iter().copied().filter(|w| w.has_prefix(c)).collect(),
            cylinders: self.cylinders.iter().copied().filter(|w| w.has_prefix(c)).collect(),
        }
    }
}

impl FreeGroupNF {
    pub fn empty(rank: u8) -> Self {
        FreeGroupNF { rank, words: vec![], cylinders: vec![] }
    }

    pub fn all(rank: u8) -> Self {
        FreeGroupNF { rank, words: vec![], cylinders: vec![Word::identity()] }
    }

    pub fn cylinder(rank: u8, prefix: Word) -> Self {
        FreeGroupNF { rank, words: vec![], cylinders: vec![prefix] }
    }

    pub fn finite(rank: u8, words: impl IntoIterator<Item = Word>) -> Self {
        let mut words: Vec<Word> = words.into_iter().collect();
        words.sort();
        words.dedup();
        FreeGroupNF { rank, words, cylinders: vec![] }
    }

    /// Builds a normal form from arbitrary (possibly overlapping) words and
    /// cylinders.
    pub fn from_parts(
        rank: u8,
        words: impl IntoIterator<Item = Word>,
        cylinders: impl IntoIterator<Item = Word>,
    ) -> Self {
        let raw = FreeGroupNF { rank, words: words.into_iter().collect(), cylinders: cylinders.into_iter().collect() };
        raw.combine(&FreeGroupNF::empty(rank), |a, _| a)
    }

    pub fn rank(&self) -> u8 {
        self.rank
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn cylinders(&self) -> &[Word] {
        &self.cylinders
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.cylinders.iter().any(|c| w.has_prefix(c)) || self.words.binary_search(w).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty() && self.cylinders.is_empty()
    }

    pub fn is_all(&self) -> bool {
        self.cylinders.len() == 1 && self.cylinders[0].is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.cylinders.is_empty()
    }

    /// The length-lex least element, if any.
    pub fn shortest_element(&self) -> Option<Word> {
        self.words.iter().chain(&self.cylinders).min().cloned()
    }

    fn children(&self, p: &Word) -> Vec<Word> {
        free_letters(self.rank).into_iter().filter(|&l| p.last() != Some(-l)).map(|l| p.child(l)).collect()
    }

    /// Pointwise Boolean combination, computed by a walk over the prefix tree
    /// that stops wherever both operands are uniform.
    fn combine(&self, other: &FreeGroupNF, op: impl Fn(bool, bool) -> bool + Copy) -> FreeGroupNF {
        assert_eq!(self.rank, other.rank, "free-group normal forms of different rank");
        let mut words = Vec::new();
        let mut cylinders = Vec::new();
        self.walk(&Word::identity(), Side::root(self), Side::root(other), op, &mut words, &mut cylinders);
        words.sort();
        cylinders.sort();
        FreeGroupNF { rank: self.rank, words, cylinders }
    }

    /// Emits the part of the result inside the subtree at `p`; returns true if
    /// that part is the whole cylinder at `p` (in which case it emitted it).
    fn walk(
        &self,
        p: &Word,
        a: Side<'_>,
        b: Side<'_>,
        op: impl Fn(bool, bool) -> bool + Copy,
        words: &mut Vec<Word>,
        cylinders: &mut Vec<Word>,
    ) -> bool {
        let (sa, sb) = (a.state(p), b.state(p));
        if sa != NodeState::Partial && sb != NodeState::Partial {
            if op(sa == NodeState::Full, sb == NodeState::Full) {
                cylinders.push(p.clone());
                return true;
            }
            return false;
        }
        let here = op(a.contains_node(p), b.contains_node(p));
        let (wmark, cmark) = (words.len(), cylinders.len());
        let mut all_full = here;
        for c in self.children(p) {
            let ca = if sa == NodeState::Full { Side::full() } else { a.child(&c) };
            let cb = if sb == NodeState::Full { Side::full() } else { b.child(&c) };
            all_full &= self.walk(&c, ca, cb, op, words, cylinders);
        }
        if all_full {
            words.truncate(wmark);
            cylinders.truncate(cmark);
            cylinders.push(p.clone());
            return true;
        }
        if here {
            words.push(p.clone());
        }
        false
    }

    pub fn union(&self, other: &FreeGroupNF) -> FreeGroupNF {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &FreeGroupNF) -> FreeGroupNF {
        self.combine(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &FreeGroupNF) -> FreeGroupNF {
        self.combine(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> FreeGroupNF {
        self.combine(&FreeGroupNF::empty(self.rank), |a, _| !a)
    }

    pub fn is_subset(&self, other: &FreeGroupNF) -> bool {
        self.difference(other).is_empty()
    }

    /// The left translate `g · A`.
    pub fn translate(&self, g: &Word) -> FreeGroupNF {
        let mut words: Vec<Word> = self.words.iter().map(|w| g.mul(w)).collect();
        let mut cylinders = Vec::new();
        for c in &self.cylinders {
            translate_cylinder(self.rank, g, c, &mut words, &mut cylinders);
        }
        FreeGroupNF::from_parts(self.rank, words, cylinders)
    }
}

/// Collects the pieces of `g · B_w`. If the cancellation between `g` and `w`
/// leaves part of `w`, the translate is the cylinder of the reduced product;
/// otherwise `g = u w⁻¹` and the translate is `u` times all words not starting
/// with the inverse of the last letter of `w`, handled letter by letter.
fn translate_cylinder(rank: u8, g: &Word, w: &Word, words: &mut Vec<Word>, cylinders: &mut Vec<Word>) {
    if w.is_empty() {
        cylinders.push(Word::identity());
        return;
    }
    let gl = g.letters();
    let wl = w.letters();
    let mut k = 0;
    while k < gl.len() && k < wl.len() && gl[gl.len() - 1 - k] == -wl[k] {
        k += 1;
    }
    if k < wl.len() {
        cylinders.push(g.mul(w));
        return;
    }
    let u = g.mul(w);
    let banned = -w.last().expect("nonempty");
    words.push(u.clone());
    for l in free_letters(rank) {
        if l != banned {
            translate_cylinder(rank, &u, &Word::from_letters(&[l]), words, cylinders);
        }
    }
}

impl fmt::Display for FreeGroupNF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.words.iter().map(|w| format!("{{{w}}}")).collect();
        parts.extend(self.cylinders.iter().map(|c| format!("B[{c}]")));
        if parts.is_empty() {
            f.write_str("∅")
        } else {
            f.write_str(&parts.join(" ∪ "))
        }
    }
}

/// Normal form of a subset of a finite group: one flag per element index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteNF {
    bits: Vec<bool>,
}

impl FiniteNF {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        FiniteNF { bits }
    }

    pub fn from_indices(order: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut bits = vec![false; order];
        for i in idx {
            bits[i] = true;
        }
        FiniteNF { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.bits.len()).filter(|&i| self.bits[i]).collect()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|b| !b)
    }

    pub fn is_all(&self) -> bool {
        self.bits.iter().all(|&b| b)
    }

    fn zip(&self, other: &FiniteNF, op: impl Fn(bool, bool) -> bool) -> FiniteNF {
        FiniteNF { bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| op(a, b)).collect() }
    }

    pub fn union(&self, other: &FiniteNF) -> FiniteNF {
        self.zip(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &FiniteNF) -> FiniteNF {
        self.zip(other, |a, b| a && b)
    }

    pub fn complement(&self) -> FiniteNF {
        FiniteNF { bits: self.bits.iter().map(|b| !b).collect() }
    }
}

/// A normal form for one of the three group families.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NormalForm {
    Periodic(PeriodicNF),
    Free(FreeGroupNF),
    Finite(FiniteNF),
}

impl NormalForm {
    pub fn all(group: &GroupModel) -> Self {
        match group.kind() {
            GroupKind::Integers => NormalForm::Periodic(PeriodicNF::periodic(1, &[0])),
            GroupKind::Free { rank } => NormalForm::Free(FreeGroupNF::all(*rank)),
            GroupKind::Finite(t) => NormalForm::Finite(FiniteNF::from_bits(vec![true; t.order()])),
        }
    }

    pub fn empty(group: &GroupModel) -> Self {
        NormalForm::all(group).complement()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        match (self, g) {
            (NormalForm::Periodic(p), GroupElement::Int(x)) => p.contains(*x),
            (NormalForm::Free(f), GroupElement::Word(w)) => f.contains(w),
            (NormalForm::Finite(b), GroupElement::Index(i)) => b.contains(*i),
            _ => panic!("element {g} does not match the normal form's group"),
        }
    }

    pub fn complement(&self) -> NormalForm {
        match self {
            NormalForm::Periodic(p) => NormalForm::Periodic(p.complement()),
            NormalForm::Free(f) => NormalForm::Free(f.complement()),
            NormalForm::Finite(b) => NormalForm::Finite(b.complement()),
        }
    }

    pub fn union(&self, other: &NormalForm) -> Result<NormalForm> {
        Ok(match (self, other) {
            (NormalForm::Periodic(a), NormalForm::Periodic(b)) => NormalForm::Periodic(a.union(b)?),
            (NormalForm::Free(a), NormalForm::Free(b)) => NormalForm::Free(a.union(b)),
            (NormalForm::Finite(a), NormalForm::Finite(b)) => NormalForm::Finite(a.union(b)),
            _ => return Err(Error::InvalidExpr("normal forms over different groups".into())),
        })
    }

    pub fn intersection(&self, other: &NormalForm) -> Result<NormalForm> {
        Ok(match (self, other) {
            (NormalForm::Periodic(a), NormalForm::Periodic(b)) => NormalForm::Periodic(a.intersection(b)?),
            (NormalForm::Free(a), NormalForm::Free(b)) => NormalForm::Free(a.intersection(b)),
            (NormalForm::Finite(a), NormalForm::Finite(b)) => NormalForm::Finite(a.intersection(b)),
            _ => return Err(Error::InvalidExpr("normal forms over different groups".into())),
        })
    }

    /// The left translate `g · A`.
    pub fn translate(&self, group: &GroupModel, g: &GroupElement) -> NormalForm {
        match (self, g) {
            (NormalForm::Periodic(p), GroupElement::Int(t)) => NormalForm::Periodic(p.translate(*t)),
            (NormalForm::Free(f), GroupElement::Word(w)) => NormalForm::Free(f.translate(w)),
            (NormalForm::Finite(b), GroupElement::Index(_)) => {
                let t = group.table().expect("finite group");
                let mut bits = vec![false; b.bits.len()];
                for i in b.indices() {
                    bits[t.mul(g.as_index().unwrap(), i)] = true;
                }
                NormalForm::Finite(FiniteNF { bits })
            }
            _ => panic!("element {g} does not match the normal form's group"),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            NormalForm::Periodic(p) => p.is_empty(),
            NormalForm::Free(f) => f.is_empty(),
            NormalForm::Finite(b) => b.is_empty(),
        }
    }

    /// Coverage: is this the whole group?
    pub fn is_all(&self) -> bool {
        match self {
            NormalForm::Periodic(p) => p.is_all(),
            NormalForm::Free(f) => f.is_all(),
            NormalForm::Finite(b) => b.is_all(),
        }
    }

    pub fn is_subset(&self, other: &NormalForm) -> Result<bool> {
        Ok(self.intersection(&other.complement())?.is_empty())
    }

    /// The least element in canonical order, if the set is nonempty.
    pub fn least_element(&self) -> Option<GroupElement> {
        match self {
            NormalForm::Periodic(p) => {
                if p.is_empty() {
                    return None;
                }
                let bound = p.modulus() as i64 + p.exceptions().iter().map(|x| x.abs()).max().unwrap_or(0) + 1;
                (0..=bound).flat_map(|x| [x, -x]).find(|&x| p.contains(x)).map(GroupElement::Int)
            }
            NormalForm::Free(f) => f.shortest_element().map(GroupElement::Word),
            NormalForm::Finite(b) => b.indices().first().map(|&i| GroupElement::Index(i)),
        }
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormalForm::Periodic(p) => p.fmt(f),
            NormalForm::Free(x) => x.fmt(f),
            NormalForm::Finite(b) => write!(f, "{:?}", b.indices()),
        }
    }
}

/// Computes the exact normal form of a resolved expression, or `None` when the
/// expression involves an aperiodic leaf.
pub fn normalize(expr: &SetExpr, group: &GroupModel) -> Result<Option<NormalForm>> {
    if expr.has_aperiodic_leaf() {
        return Ok(None);
    }
    normalize_inner(expr, group).map(Some)
}

fn normalize_inner(expr: &SetExpr, group: &GroupModel) -> Result<NormalForm> {
    Ok(match expr {
        SetExpr::All => NormalForm::all(group),
        SetExpr::Empty => NormalForm::empty(group),
        SetExpr::Residue { modulus, residues } => {
            if !group.is_integers() {
                return Err(Error::InvalidExpr("residue sets require the group z".into()));
            }
            NormalForm::Periodic(PeriodicNF::periodic(*modulus, residues))
        }
        SetExpr::PowersOfTwoComplement => unreachable!("filtered by has_aperiodic_leaf"),
        SetExpr::Cylinder { prefix } => match group.kind() {
            GroupKind::Free { rank } => NormalForm::Free(FreeGroupNF::cylinder(*rank, prefix.clone())),
            _ => return Err(Error::InvalidExpr("cylinders require a free group".into())),
        },
        SetExpr::FiniteWords { elements } => match group.kind() {
            GroupKind::Integers => NormalForm::Periodic(PeriodicNF::finite(
                &elements
                    .iter()
                    .map(|g| g.as_int().ok_or_else(|| Error::InvalidElement(g.to_string())))
                    .collect::<Result<Vec<_>>>()?,
            )),
            GroupKind::Free { rank } => NormalForm::Free(FreeGroupNF::finite(
                *rank,
                elements
                    .iter()
                    .map(|g| g.as_word().cloned().ok_or_else(|| Error::InvalidElement(g.to_string())))
                    .collect::<Result<Vec<_>>>()?,
            )),
            GroupKind::Finite(t) => NormalForm::Finite(FiniteNF::from_indices(
                t.order(),
                elements
                    .iter()
                    .map(|g| g.as_index().ok_or_else(|| Error::InvalidElement(g.to_string())))
                    .collect::<Result<Vec<_>>>()?,
            )),
        },
        SetExpr::Union { args } => {
            let mut acc = NormalForm::empty(group);
            for a in args {
                acc = acc.union(&normalize_inner(a, group)?)?;
            }
            acc
        }
        SetExpr::Intersection { args } => {
            let mut acc = NormalForm::all(group);
            for a in args {
                acc = acc.intersection(&normalize_inner(a, group)?)?;
            }
            acc
        }
        SetExpr::Complement { arg } => normalize_inner(arg, group)?.complement(),
        SetExpr::Translate { by, arg } => normalize_inner(arg, group)?.translate(group, by),
    })
}

/// A resolved subset of a concrete group with its normal form, when one
/// exists, cached for fast membership.
#[derive(Clone, Debug)]
pub struct Subset {
    group: GroupModel,
    expr: SetExpr,
    nf: Option<NormalForm>,
}

impl Subset {
    pub fn new(group: &GroupModel, expr: &SetExpr) -> Result<Self> {
        let expr = expr.resolve(group)?;
        let nf = normalize(&expr, group)?;
        Ok(Subset { group: group.clone(), expr, nf })
    }

    pub fn from_spec(spec: &SetSpec) -> Result<Self> {
        Subset::new(&GroupModel::from_spec(&spec.group)?, &spec.expr)
    }

    pub fn from_nf(group: &GroupModel, nf: NormalForm) -> Self {
        let expr = nf_to_expr(&nf);
        Subset { group: group.clone(), expr, nf: Some(nf) }
    }

    pub fn group(&self) -> &GroupModel {
        &self.group
    }

    pub fn expr(&self) -> &SetExpr {
        &self.expr
    }

    pub fn nf(&self) -> Option<&NormalForm> {
        self.nf.as_ref()
    }

    pub fn spec(&self) -> SetSpec {
        SetSpec { group: self.group.spec_name(), expr: self.expr.clone() }
    }

    /// Membership; `g` must be a valid element of the group.
    pub fn contains(&self, g: &GroupElement) -> bool {
        match &self.nf {
            Some(nf) => nf.contains(g),
            None => self.expr.member(&self.group, g).expect("resolved expression"),
        }
    }

    pub fn complement(&self) -> Subset {
        Subset {
            group: self.group.clone(),
            expr: self.expr.clone().complement(),
            nf: self.nf.as_ref().map(NormalForm::complement),
        }
    }

    /// The left translate `g · A`.
    pub fn translate(&self, g: &GroupElement) -> Subset {
        Subset {
            group: self.group.clone(),
            expr: self.expr.clone().translate(g.clone()),
            nf: self.nf.as_ref().map(|nf| nf.translate(&self.group, g)),
        }
    }

    /// Membership flags over a window of elements.
    pub fn restrict(&self, window: &[GroupElement]) -> Vec<bool> {
        window.iter().map(|g| self.contains(g)).collect()
    }
}

/// Expression denoting exactly the given normal form.
pub fn nf_to_expr(nf: &NormalForm) -> SetExpr {
    match nf {
        NormalForm::Periodic(p) => {
            let base = SetExpr::residue(p.modulus(), &p.residues());
            if p.exceptions().is_empty() {
                return base;
            }
            let add: Vec<i64> = p.exceptions().iter().copied().filter(|&x| !p.periodic_contains(x)).collect();
            let remove: Vec<i64> = p.exceptions().iter().copied().filter(|&x| p.periodic_contains(x)).collect();
            let mut e = base;
            if !remove.is_empty() {
                e = SetExpr::intersection(vec![e, SetExpr::ints(&remove).complement()]);
            }
            if !add.is_empty() {
                e = SetExpr::union(vec![e, SetExpr::ints(&add)]);
            }
            e
        }
        NormalForm::Free(f) => {
            let mut args: Vec<SetExpr> =
                f.cylinders().iter().map(|c| SetExpr::Cylinder { prefix: c.clone() }).collect();
            if !f.words().is_empty() {
                args.push(SetExpr::FiniteWords {
                    elements: f.words().iter().cloned().map(GroupElement::Word).collect(),
                });
            }
            match args.len() {
                0 => SetExpr::Empty,
                1 => args.pop().unwrap(),
                _ => SetExpr::Union { args },
            }
        }
        NormalForm::Finite(b) => {
            if b.is_all() {
                SetExpr::All
            } else {
                SetExpr::FiniteWords { elements: b.indices().into_iter().map(GroupElement::Index).collect() }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::CayleyTable;
    use proptest::prelude::*;

    fn f2() -> GroupModel {
        GroupModel::free(2).unwrap()
    }

    fn word(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn fnf(words: &[&str], cyls: &[&str]) -> FreeGroupNF {
        FreeGroupNF::from_parts(2, words.iter().map(|w| word(w)), cyls.iter().map(|w| word(w)))
    }

    #[test]
    fn membership_examples() {
        let z = GroupModel::integers();
        let even = Subset::new(&z, &SetExpr::multiples(2)).unwrap();
        assert!(even.contains(&GroupElement::Int(6)));
        let p = Subset::new(&z, &SetExpr::PowersOfTwoComplement).unwrap();
        assert!(!p.contains(&GroupElement::Int(8)));
        assert!(p.contains(&GroupElement::Int(6)));
        assert!(p.contains(&GroupElement::Int(1)));
        let ba = Subset::new(&f2(), &SetExpr::cylinder("a")).unwrap();
        assert!(ba.contains(&GroupElement::Word(word("aBa"))));
        assert!(!ba.contains(&GroupElement::Word(word("ba"))));
    }

    #[test]
    fn pow2_complement_rejected_off_z() {
        assert!(matches!(Subset::new(&f2(), &SetExpr::PowersOfTwoComplement), Err(Error::InvalidExpr(_))));
        assert!(matches!(
            SetExpr::PowersOfTwoComplement.member(&f2(), &GroupElement::Word(word("a"))),
            Err(Error::InvalidExpr(_))
        ));
    }

    #[test]
    fn normalize_examples() {
        let z = GroupModel::integers();
        let nf = normalize(&SetExpr::multiples(3).complement(), &z).unwrap().unwrap();
        assert_eq!(nf, NormalForm::Periodic(PeriodicNF::periodic(3, &[1, 2])));

        let nf = normalize(&SetExpr::cylinder("a").complement(), &f2()).unwrap().unwrap();
        assert_eq!(nf, NormalForm::Free(fnf(&["e"], &["A", "b", "B"])));

        let nf = normalize(&SetExpr::cylinder("a").translate(GroupElement::Word(word("A"))), &f2()).unwrap().unwrap();
        assert_eq!(nf, NormalForm::Free(fnf(&["e"], &["a", "b", "B"])));

        assert!(normalize(&SetExpr::PowersOfTwoComplement, &z).unwrap().is_none());
    }

    #[test]
    fn translate_examples() {
        let ba = FreeGroupNF::cylinder(2, word("a"));
        let bb = FreeGroupNF::cylinder(2, word("b"));
        assert_eq!(bb.translate(&word("a")), FreeGroupNF::cylinder(2, word("ab")));
        assert_eq!(ba.translate(&word("A")), fnf(&["e"], &["a", "b", "B"]));
        assert_eq!(ba.translate(&Word::identity()), ba);
        // deeper cancellation: (b a^-1) . B_{ab} = B_{bb}
        assert_eq!(FreeGroupNF::cylinder(2, word("ab")).translate(&word("bA")), FreeGroupNF::cylinder(2, word("bb")));
    }

    #[test]
    fn coverage_and_emptiness() {
        assert!(PeriodicNF::periodic(2, &[0, 1]).is_all());
        assert!(fnf(&["e"], &["a", "A", "b", "B"]).is_all());
        assert!(!fnf(&[], &["a"]).is_all());
        assert!(fnf(&[], &[]).is_empty());
    }

    #[test]
    fn sibling_merge_is_canonical() {
        // {a} ∪ B_aa ∪ B_ab ∪ B_aB = B_a
        assert_eq!(fnf(&["a"], &["aa", "ab", "aB"]), FreeGroupNF::cylinder(2, word("a")));
        // words inside cylinders are absorbed, nested cylinders collapse
        assert_eq!(fnf(&["ab", "b"], &["a", "aB"]), fnf(&["b"], &["a"]));
    }

    #[test]
    fn periodic_with_exceptions() {
        let z = GroupModel::integers();
        let e = SetExpr::union(vec![SetExpr::multiples(2), SetExpr::ints(&[3])]);
        let nf = normalize(&e, &z).unwrap().unwrap();
        let NormalForm::Periodic(p) = &nf else { panic!() };
        assert_eq!(p.modulus(), 2);
        assert_eq!(p.exceptions().iter().copied().collect::<Vec<_>>(), vec![3]);
        // removing the exceptional point again yields the plain periodic set
        let back = nf.intersection(&normalize(&SetExpr::ints(&[3]).complement(), &z).unwrap().unwrap());
        assert_eq!(back.unwrap(), NormalForm::Periodic(PeriodicNF::periodic(2, &[0])));
        // period is reduced
        assert_eq!(PeriodicNF::periodic(6, &[0, 2, 4]), PeriodicNF::periodic(2, &[0]));
    }

    #[test]
    fn inline_syntax() {
        assert_eq!(SetExpr::parse_inline("residue:3:exclude0").unwrap(), SetExpr::residue(3, &[1, 2]));
        assert_eq!(SetExpr::parse_inline("odd").unwrap(), SetExpr::residue(2, &[1]));
        assert_eq!(SetExpr::parse_inline("!cyl:a").unwrap(), SetExpr::cylinder("a").complement());
        assert_eq!(
            SetExpr::parse_inline("shift:A:cyl:a | words:e").unwrap(),
            SetExpr::union(vec![
                SetExpr::cylinder("a").translate(GroupElement::Word(word("A"))),
                SetExpr::FiniteWords { elements: vec![GroupElement::Word(Word::identity())] },
            ])
        );
        assert_eq!(
            SetExpr::parse_inline("(even & !elems:0,4)").unwrap(),
            SetExpr::intersection(vec![SetExpr::multiples(2), SetExpr::ints(&[0, 4]).complement()])
        );
        assert!(SetExpr::parse_inline("bogus").is_err());
        assert!(SetExpr::parse_inline("(odd").is_err());
    }

    #[test]
    fn set_spec_json_round_trip() {
        let spec = SetSpec {
            group: "f2".into(),
            expr: SetExpr::union(vec![
                SetExpr::cylinder("aB"),
                SetExpr::FiniteWords { elements: vec![GroupElement::Word(word("e"))] },
                SetExpr::cylinder("b").translate(GroupElement::Word(word("A"))).complement(),
            ]),
        };
        let text = serde_json::to_string(&spec).unwrap();
        let back: SetSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }

    #[test]
    fn finite_group_subsets() {
        let s3 = GroupModel::finite(CayleyTable::symmetric3());
        let a = Subset::new(&s3, &SetExpr::parse_inline("elems:1,2").unwrap()).unwrap();
        assert!(a.contains(&GroupElement::Index(1)));
        assert!(!a.contains(&GroupElement::Index(0)));
        let t = a.translate(&GroupElement::Index(1));
        // 1·1 = 0 (a transposition squares to the identity)
        assert!(t.contains(&GroupElement::Index(0)));
        assert!(Subset::new(&s3, &SetExpr::cylinder("a")).is_err());
    }

    fn arb_free_expr(depth: u32) -> BoxedStrategy<SetExpr> {
        let word = prop::collection::vec(prop::sample::select(vec![1i8, -1, 2, -2]), 0..4)
            .prop_map(|l| Word::from_letters(&l));
        let leaf = prop_oneof![
            Just(SetExpr::All),
            Just(SetExpr::Empty),
            word.clone().prop_map(|prefix| SetExpr::Cylinder { prefix }),
            prop::collection::vec(word.clone(), 0..3)
                .prop_map(|ws| SetExpr::FiniteWords { elements: ws.into_iter().map(GroupElement::Word).collect() }),
        ];
        leaf.prop_recursive(depth, 24, 3, move |inner| {
            let word = prop::collection::vec(prop::sample::select(vec![1i8, -1, 2, -2]), 0..4)
                .prop_map(|l| Word::from_letters(&l));
            prop_oneof![
                prop::collection::vec(inner.clone(), 1..3).prop_map(|args| SetExpr::Union { args }),
                prop::collection::vec(inner.clone(), 1..3).prop_map(|args| SetExpr::Intersection { args }),
                inner.clone().prop_map(SetExpr::complement),
                (word, inner).prop_map(|(w, e)| e.translate(GroupElement::Word(w))),
            ]
        })
        .boxed()
    }

    fn arb_int_expr() -> BoxedStrategy<SetExpr> {
        let leaf = prop_oneof![
            (1u64..7, prop::collection::vec(0u64..7, 0..4))
                .prop_map(|(m, r)| SetExpr::Residue { modulus: m, residues: r }),
            prop::collection::vec(-10i64..10, 0..3).prop_map(|xs| SetExpr::ints(&xs)),
        ];
        leaf.prop_recursive(3, 16, 3, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 1..3).prop_map(|args| SetExpr::Union { args }),
                prop::collection::vec(inner.clone(), 1..3).prop_map(|args| SetExpr::Intersection { args }),
                inner.clone().prop_map(SetExpr::complement),
                (-6i64..6, inner).prop_map(|(t, e)| e.translate(GroupElement::Int(t))),
            ]
        })
        .boxed()
    }

    proptest! {
        #[test]
        fn free_nf_agrees_with_membership(e in arb_free_expr(3)) {
            let g = f2();
            let e = e.resolve(&g).unwrap();
            let nf = normalize(&e, &g).unwrap().unwrap();
            for x in g.ball(5).unwrap() {
                prop_assert_eq!(nf.contains(&x), e.member(&g, &x).unwrap(), "at {}", x);
            }
            // canonical: rebuilding from the NF's own parts is a fixpoint
            if let NormalForm::Free(f) = &nf {
                let again = FreeGroupNF::from_parts(2, f.words().to_vec(), f.cylinders().to_vec());
                prop_assert_eq!(&again, f);
                let cs = f.cylinders();
                for (i, c) in cs.iter().enumerate() {
                    for (j, d) in cs.iter().enumerate() {
                        prop_assert!(i == j || !d.has_prefix(c));
                    }
                    prop_assert!(f.words().iter().all(|w| !w.has_prefix(c)));
                }
            }
        }

        #[test]
        fn int_nf_agrees_with_membership(e in arb_int_expr()) {
            let g = GroupModel::integers();
            let e = e.resolve(&g).unwrap();
            let nf = normalize(&e, &g).unwrap().unwrap();
            for x in -40i64..=40 {
                let x = GroupElement::Int(x);
                prop_assert_eq!(nf.contains(&x), e.member(&g, &x).unwrap());
            }
        }

        #[test]
        fn translate_round_trip_and_covariance(e in arb_free_expr(2), l in prop::collection::vec(prop::sample::select(vec![1i8, -1, 2, -2]), 0..5)) {
            let g = f2();
            let w = Word::from_letters(&l);
            let nf = normalize(&e.resolve(&g).unwrap(), &g).unwrap().unwrap();
            let NormalForm::Free(a) = &nf else { unreachable!() };
            prop_assert_eq!(&a.translate(&w.inverse()).translate(&w), a);
            let t = a.translate(&w);
            for x in g.ball(4).unwrap() {
                let x = x.as_word().unwrap().clone();
                prop_assert_eq!(t.contains(&x), a.contains(&w.inverse().mul(&x)));
            }
        }

        #[test]
        fn boolean_laws(a in arb_free_expr(2), b in arb_free_expr(2)) {
            let g = f2();
            let na = normalize(&a.resolve(&g).unwrap(), &g).unwrap().unwrap();
            let nb = normalize(&b.resolve(&g).unwrap(), &g).unwrap().unwrap();
            prop_assert_eq!(na.complement().complement(), na.clone());
            let lhs = na.union(&nb).unwrap().complement();
            let rhs = na.complement().intersection(&nb.complement()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}

//! Concrete discrete groups: the integers, free groups of finite rank, and
//! finite groups given by a Cayley table.
//!
//! Every element has a canonical encoding and every group carries a canonical
//! length-lexicographic order, so that enumerations (balls, subsets, tuples)
//! are reproducible across runs.

use std::cmp::Ordering;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default hard cap on the number of elements in an enumerated ball.
pub const DEFAULT_BALL_CAP: usize = 1_000_000;

/// Generator symbols. `e` is reserved for the identity.
const LETTERS: &[u8] = b"abcdfghijklmnopqrstuvwxyz";

/// Largest supported free-group rank.
pub const MAX_FREE_RANK: u8 = LETTERS.len() as u8;

/// A reduced word in a free group. Letters are signed generator indices:
/// `+i` is the i-th generator (1-based) and `-i` its inverse.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<i8>);

fn letter_rank(l: i8) -> u16 {
    (l.unsigned_abs() as u16 - 1) * 2 + u16::from(l < 0)
}

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    /// Builds a word from raw letters, freely reducing it.
    pub fn from_letters(letters: &[i8]) -> Self {
        let mut out: Vec<i8> = Vec::with_capacity(letters.len());
        for &l in letters {
            assert!(l != 0, "zero is not a letter");
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn letters(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != -w[1]) && self.0.iter().all(|&l| l != 0)
    }

    pub fn max_generator(&self) -> u8 {
        self.0.iter().map(|l| l.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn last(&self) -> Option<i8> {
        self.0.last().copied()
    }

    pub fn first(&self) -> Option<i8> {
        self.0.first().copied()
    }

    pub fn has_prefix(&self, prefix: &Word) -> bool {
        self.0.starts_with(&prefix.0)
    }

    pub fn mul(&self, rhs: &Word) -> Word {
        let mut out = self.0.clone();
        for &l in &rhs.0 {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| -l).collect())
    }

    /// Appends a letter that must not cancel.
    pub fn child(&self, letter: i8) -> Word {
        debug_assert!(self.last() != Some(-letter));
        let mut v = self.0.clone();
        v.push(letter);
        Word(v)
    }

    /// The word with its last letter removed.
    pub fn parent(&self) -> Option<Word> {
        if self.0.is_empty() {
            None
        } else {
            Some(Word(self.0[..self.0.len() - 1].to_vec()))
        }
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.iter().map(|&l| letter_rank(l)).cmp(other.0.iter().map(|&l| letter_rank(l))))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for &l in &self.0 {
            let c = LETTERS[l.unsigned_abs() as usize - 1] as char;
            if l > 0 {
                write!(f, "{c}")?;
            } else {
                write!(f, "{}", c.to_ascii_uppercase())?;
            }
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Lowercase letters are generators, uppercase their inverses, `e` (or the
    /// empty string) is the identity. The input is freely reduced.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "e" || s == "1" {
            return Ok(Word::identity());
        }
        let mut letters = Vec::with_capacity(s.len());
        for c in s.chars() {
            let lower = c.to_ascii_lowercase() as u8;
            let idx = LETTERS
                .iter()
                .position(|&x| x == lower)
                .ok_or_else(|| Error::Parse(format!("bad letter {c:?} in word {s:?}")))?;
            let g = (idx + 1) as i8;
            letters.push(if c.is_ascii_uppercase() { -g } else { g });
        }
        Ok(Word::from_letters(&letters))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An element of one of the supported groups.
///
/// Integers serialize as JSON numbers, free-group words as strings and
/// finite-group indices as numbers (a number read back against a finite group
/// is coerced to an index, see [`GroupModel::coerce`]).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GroupElement {
    Int(i64),
    Word(Word),
    Index(usize),
}

impl GroupElement {
    fn variant_rank(&self) -> u8 {
        match self {
            GroupElement::Int(_) => 0,
            GroupElement::Word(_) => 1,
            GroupElement::Index(_) => 2,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            GroupElement::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_word(&self) -> Option<&Word> {
        match self {
            GroupElement::Word(w) => Some(w),
            _ => None,
        }
    }

    pub fn as_index(&self) -> Option<usize> {
        match self {
            GroupElement::Index(i) => Some(*i),
            _ => None,
        }
    }
}

/// Canonical order: integers by `(|n|, n < 0)` (so `0, 1, -1, 2, -2, ...`),
/// words length-lexicographically with `a < A < b < B < ...`, indices
/// numerically.
impl Ord for GroupElement {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (GroupElement::Int(a), GroupElement::Int(b)) => (a.unsigned_abs(), *a < 0).cmp(&(b.unsigned_abs(), *b < 0)),
            (GroupElement::Word(a), GroupElement::Word(b)) => a.cmp(b),
            (GroupElement::Index(a), GroupElement::Index(b)) => a.cmp(b),
            _ => self.variant_rank().cmp(&other.variant_rank()),
        }
    }
}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Int(n) => write!(f, "{n}"),
            GroupElement::Word(w) => write!(f, "{w}"),
            GroupElement::Index(i) => write!(f, "#{i}"),
        }
    }
}

impl From<i64> for GroupElement {
    fn from(n: i64) -> Self {
        GroupElement::Int(n)
    }
}

impl From<Word> for GroupElement {
    fn from(w: Word) -> Self {
        GroupElement::Word(w)
    }
}

impl Serialize for GroupElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            GroupElement::Int(n) => s.serialize_i64(*n),
            GroupElement::Word(w) => w.serialize(s),
            GroupElement::Index(i) => s.serialize_u64(*i as u64),
        }
    }
}

impl<'de> Deserialize<'de> for GroupElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(n) => Ok(GroupElement::Int(n)),
            Raw::Str(s) => s.parse::<Word>().map(GroupElement::Word).map_err(serde::de::Error::custom),
        }
    }
}

/// A finite group given by its multiplication table. Element 0 is the
/// identity; `table[i * n + j]` is the index of `i * j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CayleyTable {
    name: String,
    n: usize,
    table: Vec<usize>,
    inverse: Vec<usize>,
}

impl CayleyTable {
    /// Validates and builds a table: Latin square, 0 is a two-sided identity,
    /// and multiplication is associative (checked on every triple for small
    /// groups and on a deterministic sample otherwise).
    pub fn new(name: impl Into<String>, n: usize, table: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidTable("group order must be positive".into()));
        }
        if table.len() != n * n {
            return Err(Error::InvalidTable(format!("expected {} entries, found {}", n * n, table.len())));
        }
        if let Some(&bad) = table.iter().find(|&&x| x >= n) {
            return Err(Error::InvalidTable(format!("entry {bad} out of range 0..{n}")));
        }
        for i in 0..n {
            let mut row = vec![false; n];
            let mut col = vec![false; n];
            for j in 0..n {
                let r = table[i * n + j];
                let c = table[j * n + i];
                if row[r] || col[c] {
                    return Err(Error::InvalidTable(format!(
                        "not a Latin square (row or column {i} repeats an entry)"
                    )));
                }
                row[r] = true;
                col[c] = true;
            }
            if table[i] != i || table[i * n] != i {
                return Err(Error::InvalidTable(format!("element 0 does not act as the identity on element {i}")));
            }
        }
        let mut inverse = vec![0; n];
        for (i, inv) in inverse.iter_mut().enumerate() {
            *inv = (0..n).find(|&j| table[i * n + j] == 0).expect("Latin square row contains 0");
        }
        let t = CayleyTable { name: name.into(), n, table, inverse };
        t.check_associative()?;
        Ok(t)
    }

    fn check_associative(&self) -> Result<()> {
        let n = self.n;
        let check = |a: usize, b: usize, c: usize| -> Result<()> {
            if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                Err(Error::InvalidTable(format!("not associative at ({a}, {b}, {c})")))
            } else {
                Ok(())
            }
        };
        if n <= 100 {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        check(a, b, c)?;
                    }
                }
            }
        } else {
            // deterministic linear-congruential sample of triples
            let mut s: u64 = 0x9e37_79b9_7f4a_7c15;
            for _ in 0..1_000_000 {
                s = s.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1_442_695_040_888_963_407);
                let a = (s >> 33) as usize % n;
                let b = (s >> 13) as usize % n;
                let c = (s >> 43) as usize % n;
                check(a, b, c)?;
            }
        }
        Ok(())
    }

    /// Parses the text format: first line `N`, then `N` lines of `N`
    /// whitespace-separated indices.
    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let n: usize = lines
            .next()
            .ok_or_else(|| Error::InvalidTable("empty table file".into()))?
            .parse()
            .map_err(|e| Error::InvalidTable(format!("bad order line: {e}")))?;
        let mut table = Vec::with_capacity(n * n);
        for (row, line) in lines.enumerate() {
            let entries: Vec<usize> = line
                .split_whitespace()
                .map(|x| x.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidTable(format!("row {row}: {e}")))?;
            if entries.len() != n {
                return Err(Error::InvalidTable(format!("row {row} has {} entries, expected {n}", entries.len())));
            }
            table.extend(entries);
        }
        CayleyTable::new(name, n, table)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        CayleyTable::parse(format!("table:{}", path.display()), &text)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| self.mul(i, j).to_string()).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.n + b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    /// Builds a table from an explicit element list (identity first) and a
    /// multiplication on elements.
    fn from_elements<T: PartialEq + Clone>(name: &str, elements: &[T], mul: impl Fn(&T, &T) -> T) -> Self {
        let n = elements.len();
        let mut table = Vec::with_capacity(n * n);
        for a in elements {
            for b in elements {
                let p = mul(a, b);
                table.push(elements.iter().position(|x| *x == p).expect("closed under product"));
            }
        }
        CayleyTable::new(name, n, table).expect("fixture tables are valid groups")
    }

    /// The cyclic group of order `n`.
    pub fn cyclic(n: usize) -> Self {
        let elements: Vec<usize> = (0..n).collect();
        CayleyTable::from_elements(&format!("z{n}"), &elements, |a, b| (a + b) % n)
    }

    /// The symmetric group on three letters, as permutations composed right to left.
    pub fn symmetric3() -> Self {
        let elements: Vec<[usize; 3]> = vec![[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]];
        CayleyTable::from_elements("s3", &elements, |p, q| [p[q[0]], p[q[1]], p[q[2]]])
    }

    /// The dihedral group of order `2m`, elements `r^i s^j`.
    pub fn dihedral(m: usize) -> Self {
        let elements: Vec<(usize, usize)> = (0..2).flat_map(|j| (0..m).map(move |i| (i, j))).collect();
        CayleyTable::from_elements(&format!("d{m}"), &elements, |&(a, b), &(c, d)| {
            let rot = if b == 0 { (a + c) % m } else { (a + m - c) % m };
            (rot, (b + d) % 2)
        })
    }

    /// The quaternion group of order 8.
    pub fn quaternion() -> Self {
        // (sign, unit) with unit 0=1, 1=i, 2=j, 3=k
        let elements: Vec<(bool, u8)> =
            [(false, 0), (true, 0), (false, 1), (true, 1), (false, 2), (true, 2), (false, 3), (true, 3)].to_vec();
        let unit_mul = |x: u8, y: u8| -> (bool, u8) {
            match (x, y) {
                (0, y) => (false, y),
                (x, 0) => (false, x),
                (x, y) if x == y => (true, 0),
                (1, 2) => (false, 3),
                (2, 3) => (false, 1),
                (3, 1) => (false, 2),
                (2, 1) => (true, 3),
                (3, 2) => (true, 1),
                (1, 3) => (true, 2),
                _ => unreachable!(),
            }
        };
        CayleyTable::from_elements("q8", &elements, |&(s1, u1), &(s2, u2)| {
            let (s, u) = unit_mul(u1, u2);
            (s1 ^ s2 ^ s, u)
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupKind {
    /// The integers with generators `{+1, -1}`.
    Integers,
    /// The free group on `rank >= 2` generators.
    Free {
        rank: u8,
    },
    Finite(Arc<CayleyTable>),
}

/// A concrete group together with the ball-size guard used by enumerations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupModel {
    kind: GroupKind,
    ball_cap: usize,
}

impl GroupModel {
    pub fn integers() -> Self {
        GroupModel { kind: GroupKind::Integers, ball_cap: DEFAULT_BALL_CAP }
    }

    pub fn free(rank: u8) -> Result<Self> {
        if !(2..=MAX_FREE_RANK).contains(&rank) {
            return Err(Error::InvalidInput(format!("free group rank must be in 2..={MAX_FREE_RANK}, got {rank}")));
        }
        Ok(GroupModel { kind: GroupKind::Free { rank }, ball_cap: DEFAULT_BALL_CAP })
    }

    pub fn finite(table: CayleyTable) -> Self {
        GroupModel { kind: GroupKind::Finite(Arc::new(table)), ball_cap: DEFAULT_BALL_CAP }
    }

    pub fn with_ball_cap(mut self, cap: usize) -> Self {
        self.ball_cap = cap;
        self
    }

    pub fn ball_cap(&self) -> usize {
        self.ball_cap
    }

    /// Parses a group spec: `z`, `f2`..`f25`, `z<N>` (cyclic), `s3`, `d<M>`,
    /// `q8`, or `table:<path>`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let s = spec.trim().to_ascii_lowercase();
        let bad = || Error::InvalidInput(format!("unknown group spec {spec:?}"));
        if s == "z" || s == "int" || s == "integers" {
            return Ok(GroupModel::integers());
        }
        if let Some(path) = spec.trim().strip_prefix("table:") {
            return Ok(GroupModel::finite(CayleyTable::from_file(Path::new(path))?));
        }
        if s == "s3" {
            return Ok(GroupModel::finite(CayleyTable::symmetric3()));
        }
        if s == "q8" {
            return Ok(GroupModel::finite(CayleyTable::quaternion()));
        }
        let (head, tail) = s.split_at(1);
        let num: usize = tail.parse().map_err(|_| bad())?;
        match head {
            "f" => GroupModel::free(u8::try_from(num).map_err(|_| bad())?),
            "z" if num >= 1 => Ok(GroupModel::finite(CayleyTable::cyclic(num))),
            "d" if num >= 2 => Ok(GroupModel::finite(CayleyTable::dihedral(num))),
            _ => Err(bad()),
        }
    }

    /// The spec string this model was built from (round-trips through
    /// [`GroupModel::from_spec`] for built-in groups).
    pub fn spec_name(&self) -> String {
        match &self.kind {
            GroupKind::Integers => "z".into(),
            GroupKind::Free { rank } => format!("f{rank}"),
            GroupKind::Finite(t) => t.name().to_string(),
        }
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn is_integers(&self) -> bool {
        matches!(self.kind, GroupKind::Integers)
    }

    pub fn free_rank(&self) -> Option<u8> {
        match self.kind {
            GroupKind::Free { rank } => Some(rank),
            _ => None,
        }
    }

    pub fn table(&self) -> Option<&CayleyTable> {
        match &self.kind {
            GroupKind::Finite(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, GroupKind::Finite(_))
    }

    /// Group order for finite groups, `None` otherwise.
    pub fn order(&self) -> Option<usize> {
        self.table().map(CayleyTable::order)
    }

    pub fn identity(&self) -> GroupElement {
        match self.kind {
            GroupKind::Integers => GroupElement::Int(0),
            GroupKind::Free { .. } => GroupElement::Word(Word::identity()),
            GroupKind::Finite(_) => GroupElement::Index(0),
        }
    }

    /// Generators (and their inverses) defining word length. Finite groups use
    /// all non-identity elements.
    pub fn generators(&self) -> Vec<GroupElement> {
        match &self.kind {
            GroupKind::Integers => vec![GroupElement::Int(1), GroupElement::Int(-1)],
            GroupKind::Free { rank } => {
                (1..=*rank as i8).flat_map(|g| [g, -g]).map(|l| GroupElement::Word(Word(vec![l]))).collect()
            }
            GroupKind::Finite(t) => (1..t.order()).map(GroupElement::Index).collect(),
        }
    }

    /// Checks that `g` is a valid encoding for this group.
    pub fn validate(&self, g: &GroupElement) -> Result<()> {
        match (&self.kind, g) {
            (GroupKind::Integers, GroupElement::Int(_)) => Ok(()),
            (GroupKind::Free { rank }, GroupElement::Word(w)) => {
                if !w.is_reduced() {
                    Err(Error::InvalidElement(format!("word {w} is not reduced")))
                } else if w.max_generator() > *rank {
                    Err(Error::InvalidElement(format!("word {w} uses a generator beyond rank {rank}")))
                } else {
                    Ok(())
                }
            }
            (GroupKind::Finite(t), GroupElement::Index(i)) if *i < t.order() => Ok(()),
            (GroupKind::Finite(t), GroupElement::Index(i)) => {
                Err(Error::InvalidElement(format!("index {i} out of range for group of order {}", t.order())))
            }
            _ => Err(Error::InvalidElement(format!("{g} is not an element of {}", self.spec_name()))),
        }
    }

    /// Converts an element read from JSON to this group's encoding and
    /// validates it (numbers become indices in finite groups).
    pub fn coerce(&self, g: GroupElement) -> Result<GroupElement> {
        let g = match (&self.kind, g) {
            (GroupKind::Finite(_), GroupElement::Int(n)) if n >= 0 => GroupElement::Index(n as usize),
            (_, g) => g,
        };
        self.validate(&g)?;
        Ok(g)
    }

    /// Parses an element from text: an integer for Z, a word for free groups,
    /// an index (optionally prefixed by `#`) for finite groups.
    pub fn parse_element(&self, s: &str) -> Result<GroupElement> {
        let s = s.trim();
        let g = match &self.kind {
            GroupKind::Integers => {
                GroupElement::Int(s.parse().map_err(|e| Error::Parse(format!("bad integer {s:?}: {e}")))?)
            }
            GroupKind::Free { .. } => GroupElement::Word(s.parse()?),
            GroupKind::Finite(_) => GroupElement::Index(
                s.trim_start_matches('#').parse().map_err(|e| Error::Parse(format!("bad index {s:?}: {e}")))?,
            ),
        };
        self.validate(&g)?;
        Ok(g)
    }

    /// Group law. Free-group products are fully reduced.
    pub fn multiply(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        self.validate(g)?;
        self.validate(h)?;
        Ok(self.mul(g, h))
    }

    pub fn invert(&self, g: &GroupElement) -> Result<GroupElement> {
        self.validate(g)?;
        Ok(self.inv(g))
    }

    /// Unchecked product; callers guarantee both operands belong to this group.
    pub(crate) fn mul(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        match (&self.kind, g, h) {
            (GroupKind::Integers, GroupElement::Int(a), GroupElement::Int(b)) => GroupElement::Int(a + b),
            (GroupKind::Free { .. }, GroupElement::Word(a), GroupElement::Word(b)) => GroupElement::Word(a.mul(b)),
            (GroupKind::Finite(t), GroupElement::Index(a), GroupElement::Index(b)) => {
                GroupElement::Index(t.mul(*a, *b))
            }
            _ => panic!("element encodings do not match group {}", self.spec_name()),
        }
    }

    pub(crate) fn inv(&self, g: &GroupElement) -> GroupElement {
        match (&self.kind, g) {
            (GroupKind::Integers, GroupElement::Int(a)) => GroupElement::Int(-a),
            (GroupKind::Free { .. }, GroupElement::Word(w)) => GroupElement::Word(w.inverse()),
            (GroupKind::Finite(t), GroupElement::Index(a)) => GroupElement::Index(t.inv(*a)),
            _ => panic!("element encoding does not match group {}", self.spec_name()),
        }
    }

    /// Word length with respect to [`GroupModel::generators`].
    pub fn word_length(&self, g: &GroupElement) -> usize {
        match g {
            GroupElement::Int(n) => n.unsigned_abs() as usize,
            GroupElement::Word(w) => w.len(),
            GroupElement::Index(i) => usize::from(*i != 0),
        }
    }

    /// Number of elements in `ball(r)`, saturating.
    pub fn ball_size(&self, r: u32) -> u128 {
        match &self.kind {
            GroupKind::Integers => 2 * r as u128 + 1,
            GroupKind::Free { rank } => {
                let k = *rank as u128;
                let mut total: u128 = 1;
                let mut level: u128 = 2 * k;
                for _ in 0..r {
                    total = total.saturating_add(level);
                    level = level.saturating_mul(2 * k - 1);
                }
                total
            }
            GroupKind::Finite(t) => t.order() as u128,
        }
    }

    /// All elements of word length at most `r`, in canonical order. Finite
    /// groups ignore `r` and return every element.
    pub fn ball(&self, r: u32) -> Result<Vec<GroupElement>> {
        let size = self.ball_size(r);
        if size > self.ball_cap as u128 {
            return Err(Error::scale(format!("ball of radius {r}"), size, self.ball_cap as u128));
        }
        Ok(match &self.kind {
            GroupKind::Integers => {
                let mut v = vec![GroupElement::Int(0)];
                for i in 1..=r as i64 {
                    v.push(GroupElement::Int(i));
                    v.push(GroupElement::Int(-i));
                }
                v
            }
            GroupKind::Free { rank } => free_ball(*rank, r).into_iter().map(GroupElement::Word).collect(),
            GroupKind::Finite(t) => (0..t.order()).map(GroupElement::Index).collect(),
        })
    }
}

/// Letters of a free group of the given rank in canonical order `a, A, b, B, ...`.
pub fn free_letters(rank: u8) -> Vec<i8> {
    (1..=rank as i8).flat_map(|g| [g, -g]).collect()
}

fn free_ball(rank: u8, r: u32) -> Vec<Word> {
    let letters = free_letters(rank);
    let mut all = vec![Word::identity()];
    let mut frontier = vec![Word::identity()];
    for _ in 0..r {
        let mut next = Vec::with_capacity(frontier.len() * (2 * rank as usize - 1));
        for w in &frontier {
            for &l in &letters {
                if w.last() != Some(-l) {
                    next.push(w.child(l));
                }
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    all
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> GroupElement {
        GroupElement::Word(s.parse().unwrap())
    }

    #[test]
    fn integer_law() {
        let z = GroupModel::integers();
        assert_eq!(z.multiply(&3.into(), &(-5).into()).unwrap(), GroupElement::Int(-2));
        assert_eq!(z.invert(&7.into()).unwrap(), GroupElement::Int(-7));
    }

    #[test]
    fn free_group_reduction() {
        let f2 = GroupModel::free(2).unwrap();
        // ab * b^-1 a = aa
        assert_eq!(f2.multiply(&w("ab"), &w("Ba")).unwrap(), w("aa"));
        assert_eq!(f2.multiply(&w("a"), &w("A")).unwrap(), w("e"));
        assert_eq!(f2.invert(&w("aB")).unwrap(), w("bA"));
    }

    #[test]
    fn cyclic_inverse() {
        let z4 = GroupModel::finite(CayleyTable::cyclic(4));
        assert_eq!(z4.invert(&GroupElement::Index(1)).unwrap(), GroupElement::Index(3));
    }

    #[test]
    fn invalid_elements_are_rejected() {
        let f2 = GroupModel::free(2).unwrap();
        assert!(matches!(f2.validate(&w("c")), Err(Error::InvalidElement(_))));
        assert!(matches!(f2.validate(&GroupElement::Word(Word(vec![1, -1]))), Err(Error::InvalidElement(_))));
        assert!(matches!(f2.multiply(&w("a"), &GroupElement::Int(1)), Err(Error::InvalidElement(_))));
        let z4 = GroupModel::finite(CayleyTable::cyclic(4));
        assert!(matches!(z4.validate(&GroupElement::Index(4)), Err(Error::InvalidElement(_))));
    }

    #[test]
    fn balls() {
        let z = GroupModel::integers();
        let mut b: Vec<i64> = z.ball(2).unwrap().iter().map(|g| g.as_int().unwrap()).collect();
        b.sort();
        assert_eq!(b, vec![-2, -1, 0, 1, 2]);

        let f2 = GroupModel::free(2).unwrap();
        let b1: Vec<String> = f2.ball(1).unwrap().iter().map(|g| g.to_string()).collect();
        assert_eq!(b1, vec!["e", "a", "A", "b", "B"]);
        assert_eq!(f2.ball(2).unwrap().len(), 17);
    }

    #[test]
    fn ball_is_canonically_sorted() {
        let f2 = GroupModel::free(2).unwrap();
        let b = f2.ball(3).unwrap();
        assert!(b.windows(2).all(|p| p[0] < p[1]));
        let z = GroupModel::integers();
        let b = z.ball(4).unwrap();
        assert!(b.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn ball_cap_guard() {
        let f2 = GroupModel::free(2).unwrap().with_ball_cap(100);
        assert!(matches!(f2.ball(4), Err(Error::ScaleExceeded { .. })));
        assert!(f2.ball(3).is_ok());
    }

    #[test]
    fn word_text_round_trip() {
        for s in ["e", "a", "aBA", "bbAB", "dD"] {
            let word: Word = s.parse().unwrap();
            let again: Word = word.to_string().parse().unwrap();
            assert_eq!(word, again);
        }
        assert_eq!("dD".parse::<Word>().unwrap(), Word::identity());
        assert!("x1".parse::<Word>().is_err());
    }

    #[test]
    fn fixture_tables_are_groups() {
        for t in
            [CayleyTable::cyclic(7), CayleyTable::symmetric3(), CayleyTable::dihedral(4), CayleyTable::quaternion()]
        {
            let parsed = CayleyTable::parse(t.name(), &t.to_text()).unwrap();
            assert_eq!(parsed.order(), t.order());
        }
        assert_eq!(CayleyTable::dihedral(4).order(), 8);
        // S3 and Q8 are non-abelian
        let s3 = CayleyTable::symmetric3();
        assert!((0..6).any(|a| (0..6).any(|b| s3.mul(a, b) != s3.mul(b, a))));
    }

    #[test]
    fn bad_tables_are_rejected() {
        assert!(CayleyTable::parse("x", "2\n0 1\n1 1\n").is_err());
        assert!(CayleyTable::parse("x", "2\n1 0\n0 1\n").is_err());
        assert!(CayleyTable::parse("x", "2\n0 1\n").is_err());
        // Latin square with identity 0 that is not associative
        let quasi = "5\n0 1 2 3 4\n1 0 3 4 2\n2 4 0 1 3\n3 2 4 0 1\n4 3 1 2 0\n";
        assert!(matches!(CayleyTable::parse("x", quasi), Err(Error::InvalidTable(_))));
    }

    #[test]
    fn group_specs() {
        for s in ["z", "f2", "f3", "z4", "s3", "d4", "q8"] {
            assert_eq!(GroupModel::from_spec(s).unwrap().spec_name(), s);
        }
        assert!(GroupModel::from_spec("f1").is_err());
        assert!(GroupModel::from_spec("x9").is_err());
    }
}

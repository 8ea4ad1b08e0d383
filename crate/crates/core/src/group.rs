//! Free groups and the integers.
//!
//! Free-group elements are reduced words stored run-length encoded, one
//! entry per syllable `x^e` with `e != 0` and adjacent syllables on distinct
//! generators. Generators are printed as `a, b, c, ...`.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Maximal power of a single generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syllable {
    pub gen: u8,
    pub exp: i64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    syl: Vec<Syllable>,
}

impl Word {
    pub fn identity() -> Self {
        Word { syl: Vec::new() }
    }

    pub fn generator(gen: u8) -> Self {
        Self::power(gen, 1)
    }

    pub fn power(gen: u8, exp: i64) -> Self {
        let mut w = Word::identity();
        w.push(gen, exp);
        w
    }

    /// Builds the reduced form of an arbitrary product of powers.
    pub fn from_powers(parts: &[(u8, i64)]) -> Self {
        let mut w = Word::identity();
        for &(g, e) in parts {
            w.push(g, e);
        }
        w
    }

    /// Builds a word from letters `(gen, +1 | -1)`.
    pub fn from_letters(letters: &[(u8, i8)]) -> Self {
        let mut w = Word::identity();
        for &(g, s) in letters {
            w.push(g, s as i64);
        }
        w
    }

    fn push(&mut self, gen: u8, exp: i64) {
        if exp == 0 {
            return;
        }
        match self.syl.last_mut() {
            Some(last) if last.gen == gen => {
                last.exp += exp;
                if last.exp == 0 {
                    self.syl.pop();
                }
            }
            _ => self.syl.push(Syllable { gen, exp }),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.syl.is_empty()
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syl
    }

    pub fn last_syllable(&self) -> Option<Syllable> {
        self.syl.last().copied()
    }

    /// Word length in the standard generators.
    pub fn len(&self) -> u64 {
        self.syl.iter().map(|s| s.exp.unsigned_abs()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.syl.is_empty()
    }

    pub fn max_generator(&self) -> Option<u8> {
        self.syl.iter().map(|s| s.gen).max()
    }

    pub fn mul(&self, other: &Word) -> Word {
        let mut w = self.clone();
        for s in &other.syl {
            w.push(s.gen, s.exp);
        }
        w
    }

    pub fn inv(&self) -> Word {
        Word {
            syl: self
                .syl
                .iter()
                .rev()
                .map(|s| Syllable { gen: s.gen, exp: -s.exp })
                .collect(),
        }
    }

    /// Letters left to right as `(gen, sign)`.
    pub fn letters(&self) -> impl Iterator<Item = (u8, i8)> + '_ {
        self.syl.iter().flat_map(|s| {
            let sign = if s.exp > 0 { 1 } else { -1 };
            std::iter::repeat((s.gen, sign)).take(s.exp.unsigned_abs() as usize)
        })
    }

    /// Prefix made of the first `n` letters.
    pub fn prefix(&self, n: u64) -> Word {
        let mut left = n;
        let mut w = Word::identity();
        for s in &self.syl {
            if left == 0 {
                break;
            }
            let k = s.exp.unsigned_abs().min(left);
            w.syl.push(Syllable { gen: s.gen, exp: s.exp.signum() * k as i64 });
            left -= k;
        }
        w
    }

    /// Number of adjacent syllable pairs whose exponents go from positive to
    /// negative.
    pub fn descending_sign_changes(&self) -> u64 {
        self.syl
            .windows(2)
            .filter(|p| p[0].exp >= 1 && p[1].exp <= -1)
            .count() as u64
    }

    /// Final exponent of `gen`, defined when the word ends with a nonzero
    /// power of it.
    pub fn final_exponent(&self, gen: u8) -> Result<i64> {
        match self.syl.last() {
            Some(s) if s.gen == gen => Ok(s.exp),
            _ => Err(Error::NotInClass(format!(
                "{self} does not end with a power of {}",
                gen_name(gen)
            ))),
        }
    }

    /// Parses `"a b^-1 a^2"`, `"e"` or `"1"`. Juxtaposed letters such as
    /// `"ab"` and capital inverses such as `"A"` are accepted too.
    pub fn parse(s: &str) -> Result<Word> {
        let s = s.trim();
        if s.is_empty() || s == "e" || s == "1" {
            return Ok(Word::identity());
        }
        let bytes = s.as_bytes();
        let mut i = 0;
        let mut w = Word::identity();
        while i < bytes.len() {
            let c = bytes[i];
            if c.is_ascii_whitespace() || c == b'*' || c == b'.' {
                i += 1;
                continue;
            }
            let (gen, sign) = if c.is_ascii_lowercase() && c != b'e' {
                (letter_gen(c)?, 1i64)
            } else if c.is_ascii_uppercase() && c != b'E' {
                (letter_gen(c.to_ascii_lowercase())?, -1i64)
            } else {
                return Err(Error::Parse(format!("unexpected {:?} in word {s:?}", c as char)));
            };
            i += 1;
            let mut exp = 1i64;
            if i < bytes.len() && bytes[i] == b'^' {
                i += 1;
                let start = i;
                if i < bytes.len() && (bytes[i] == b'-' || bytes[i] == b'+') {
                    i += 1;
                }
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                exp = s[start..i]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad exponent in word {s:?}")))?;
            }
            w.push(gen, sign * exp);
        }
        Ok(w)
    }
}

fn letter_gen(c: u8) -> Result<u8> {
    // `e` is reserved for the identity, so generators skip it.
    let g = match c {
        b'a'..=b'd' => c - b'a',
        b'f'..=b'z' => c - b'a' - 1,
        _ => return Err(Error::Parse(format!("bad generator {:?}", c as char))),
    };
    Ok(g)
}

pub fn gen_name(gen: u8) -> char {
    let c = if gen < 4 { b'a' + gen } else { b'a' + gen + 1 };
    c as char
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syl.is_empty() {
            return write!(f, "e");
        }
        for (i, s) in self.syl.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if s.exp == 1 {
                write!(f, "{}", gen_name(s.gen))?;
            } else {
                write!(f, "{}^{}", gen_name(s.gen), s.exp)?;
            }
        }
        Ok(())
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Word::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Calls `f` on every reduced word of length exactly `radius`, in
/// lexicographic order of letters `a < a^-1 < b < b^-1 < ...`.
pub fn for_each_in_sphere(rank: u8, radius: u32, mut f: impl FnMut(&Word)) {
    let mut letters: Vec<(u8, i8)> = Vec::with_capacity(radius as usize);
    fn rec(rank: u8, left: u32, letters: &mut Vec<(u8, i8)>, f: &mut dyn FnMut(&Word)) {
        if left == 0 {
            f(&Word::from_letters(letters));
            return;
        }
        for g in 0..rank {
            for s in [1i8, -1] {
                if let Some(&(pg, ps)) = letters.last() {
                    if pg == g && ps == -s {
                        continue;
                    }
                }
                letters.push((g, s));
                rec(rank, left - 1, letters, f);
                letters.pop();
            }
        }
    }
    rec(rank, radius, &mut letters, &mut f);
}

pub fn sphere(rank: u8, radius: u32) -> Vec<Word> {
    let mut out = Vec::new();
    for_each_in_sphere(rank, radius, |w| out.push(w.clone()));
    out
}

pub fn ball(rank: u8, radius: u32) -> Vec<Word> {
    (0..=radius).flat_map(|r| sphere(rank, r)).collect()
}

/// `|S_r|` in a free group of the given rank.
pub fn sphere_size(rank: u8, radius: u32) -> u128 {
    if radius == 0 {
        return 1;
    }
    let n = rank as u128;
    2 * n * (2 * n - 1).pow(radius - 1)
}

/// Classification by the final syllable: ends with a positive power of a
/// generator, or anything else (including the identity).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LastClass {
    Positive(u8),
    Other,
}

pub fn last_class(w: &Word) -> LastClass {
    match w.last_syllable() {
        Some(s) if s.exp > 0 => LastClass::Positive(s.gen),
        _ => LastClass::Other,
    }
}

/// Generator of the final syllable, `None` for the identity.
pub fn ending_generator(w: &Word) -> Option<u8> {
    w.last_syllable().map(|s| s.gen)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKind {
    Free,
    Integers,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    pub kind: GroupKind,
    #[serde(default)]
    pub rank: u8,
}

impl Group {
    pub fn free(rank: u8) -> Self {
        Group { kind: GroupKind::Free, rank }
    }

    pub fn integers() -> Self {
        Group { kind: GroupKind::Integers, rank: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            GroupKind::Free if !(1..=25).contains(&self.rank) => Err(Error::InvalidSpec(format!(
                "free group rank must be in 1..=25, got {}",
                self.rank
            ))),
            _ => Ok(()),
        }
    }

    pub fn is_integers(&self) -> bool {
        self.kind == GroupKind::Integers
    }

    pub fn identity(&self) -> Element {
        match self.kind {
            GroupKind::Free => Element::Word(Word::identity()),
            GroupKind::Integers => Element::Int(0),
        }
    }

    pub fn parse(&self, s: &str) -> Result<Element> {
        let e = match self.kind {
            GroupKind::Integers => Element::Int(
                s.trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("not an integer: {s:?}")))?,
            ),
            GroupKind::Free => Element::Word(Word::parse(s)?),
        };
        self.check(&e)?;
        Ok(e)
    }

    pub fn check(&self, e: &Element) -> Result<()> {
        match (self.kind, e) {
            (GroupKind::Integers, Element::Int(_)) => Ok(()),
            (GroupKind::Free, Element::Word(w)) => match w.max_generator() {
                Some(g) if g >= self.rank => Err(Error::InvalidArgument(format!(
                    "{w} uses generator {} outside rank {}",
                    gen_name(g),
                    self.rank
                ))),
                _ => Ok(()),
            },
            _ => Err(Error::InvalidArgument(format!("{e} is not an element of this group"))),
        }
    }

    pub fn sphere(&self, radius: u32) -> Vec<Element> {
        match self.kind {
            GroupKind::Integers if radius == 0 => vec![Element::Int(0)],
            GroupKind::Integers => vec![Element::Int(radius as i64), Element::Int(-(radius as i64))],
            GroupKind::Free => sphere(self.rank, radius).into_iter().map(Element::Word).collect(),
        }
    }

    pub fn ball(&self, radius: u32) -> Vec<Element> {
        (0..=radius).flat_map(|r| self.sphere(r)).collect()
    }

    pub fn sphere_size(&self, radius: u32) -> u128 {
        match self.kind {
            GroupKind::Integers if radius == 0 => 1,
            GroupKind::Integers => 2,
            GroupKind::Free => sphere_size(self.rank, radius),
        }
    }

    /// Symmetric generating set `{x, x^-1}`.
    pub fn generators(&self) -> Vec<Element> {
        self.sphere(1)
    }
}

/// Element of either a free group or the integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    Word(Word),
    Int(i64),
}

impl Element {
    pub fn len(&self) -> u64 {
        match self {
            Element::Word(w) => w.len(),
            Element::Int(n) => n.unsigned_abs(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.len() == 0
    }

    pub fn inv(&self) -> Element {
        match self {
            Element::Word(w) => Element::Word(w.inv()),
            Element::Int(n) => Element::Int(-n),
        }
    }

    pub fn mul(&self, other: &Element) -> Result<Element> {
        match (self, other) {
            (Element::Word(a), Element::Word(b)) => Ok(Element::Word(a.mul(b))),
            (Element::Int(a), Element::Int(b)) => a
                .checked_add(*b)
                .map(Element::Int)
                .ok_or_else(|| Error::Domain("integer overflow".into())),
            _ => Err(Error::InvalidArgument("mixed group elements".into())),
        }
    }

    pub fn as_word(&self) -> Option<&Word> {
        match self {
            Element::Word(w) => Some(w),
            Element::Int(_) => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Element::Int(n) => Some(*n),
            Element::Word(_) => None,
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Word(w) => w.fmt(f),
            Element::Int(n) => n.fmt(f),
        }
    }
}

impl Serialize for Element {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Element::Word(w) => w.serialize(s),
            Element::Int(n) => s.serialize_i64(*n),
        }
    }
}

impl<'de> Deserialize<'de> for Element {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(n) => Ok(Element::Int(n)),
            Raw::Str(s) => match s.trim().parse::<i64>() {
                Ok(n) => Ok(Element::Int(n)),
                Err(_) => Word::parse(&s).map(Element::Word).map_err(serde::de::Error::custom),
            },
        }
    }
}

/// Enumeration `0, 1, -1, 2, -2, ...` of the integers.
pub fn integer_enumeration(k: u64) -> i64 {
    if k == 0 {
        0
    } else if k % 2 == 1 {
        k.div_ceil(2) as i64
    } else {
        -((k / 2) as i64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn reduces_and_prints() {
        assert_eq!(w("a a^-1 b"), w("b"));
        assert_eq!(w("a b B a").to_string(), "a^2");
        assert_eq!(w("a b^-1 a^2").to_string(), "a b^-1 a^2");
        assert_eq!(w("e"), Word::identity());
        assert_eq!(w("ab").to_string(), "a b");
        assert!(Word::parse("a^x").is_err());
        assert!(Word::parse("a + b").is_err());
    }

    #[test]
    fn sphere_counts() {
        for r in 0..6 {
            assert_eq!(sphere(2, r).len() as u128, sphere_size(2, r));
            assert_eq!(sphere(3, r.min(4)).len() as u128, sphere_size(3, r.min(4)));
        }
        assert_eq!(ball(2, 6).len(), 1457);
        assert_eq!(sphere(2, 1).iter().map(|w| w.to_string()).collect::<Vec<_>>(), ["a", "a^-1", "b", "b^-1"]);
    }

    #[test]
    fn sphere_words_are_distinct_and_exact_length() {
        let s = sphere(2, 5);
        let set: std::collections::BTreeSet<_> = s.iter().cloned().collect();
        assert_eq!(set.len(), s.len());
        assert!(s.iter().all(|x| x.len() == 5));
    }

    #[test]
    fn descending_changes() {
        assert_eq!(w("a b^-1").descending_sign_changes(), 1);
        assert_eq!(w("a^-1 b").descending_sign_changes(), 0);
        assert_eq!(w("a b^-1 a").descending_sign_changes(), 1);
        assert_eq!(w("a^2 b^-1 a b^-3").descending_sign_changes(), 2);
    }

    #[test]
    fn classes_and_final_exponent() {
        assert_eq!(last_class(&w("b a^2")), LastClass::Positive(0));
        assert_eq!(last_class(&w("a b^-1")), LastClass::Other);
        assert_eq!(last_class(&Word::identity()), LastClass::Other);
        assert_eq!(w("b a^-3").final_exponent(0).unwrap(), -3);
        assert!(matches!(w("a b").final_exponent(0), Err(Error::NotInClass(_))));
        assert!(Word::identity().final_exponent(0).is_err());
    }

    #[test]
    fn prefixes() {
        let g = w("a^2 b^-1 a");
        assert_eq!(g.prefix(0), Word::identity());
        assert_eq!(g.prefix(1), w("a"));
        assert_eq!(g.prefix(3), w("a^2 b^-1"));
        assert_eq!(g.prefix(9), g);
    }

    #[test]
    fn integer_enumeration_order() {
        let v: Vec<i64> = (0..5).map(integer_enumeration).collect();
        assert_eq!(v, [0, 1, -1, 2, -2]);
    }

    #[test]
    fn generator_names_skip_e() {
        assert_eq!(gen_name(3), 'd');
        assert_eq!(gen_name(4), 'f');
        assert_eq!(w("f").syllables()[0].gen, 4);
        assert!(Group::free(2).parse("c").is_err());
    }
}

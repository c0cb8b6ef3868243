//! The 39-phone scoring inventory, its three broad-phonetic-class
//! categorisations, and user-supplied folding maps.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Scoring inventory, sorted. A [`Phone`] is an index into this table.
pub const INVENTORY: [&str; 39] = [
    "aa", "ae", "ah", "aw", "ay", "b", "ch", "d", "dh", "dx", "eh", "er", "ey", "f", "g", "hh",
    "ih", "iy", "jh", "k", "l", "m", "n", "ng", "ow", "oy", "p", "r", "s", "sh", "sil", "t", "th",
    "uh", "uw", "v", "w", "y", "z",
];

pub const SILENCE: &str = "sil";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PhoneError {
    #[error("unknown phone {0:?}")]
    UnknownPhone(String),
    #[error("unknown categorisation {0:?} (expected eight_class, consonant_vowel or voicing)")]
    UnknownCategorization(String),
}

/// A validated member of the scoring inventory.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Phone(u8);

impl Phone {
    pub fn new(symbol: &str) -> Result<Self, PhoneError> {
        INVENTORY
            .binary_search(&symbol)
            .map(|i| Phone(i as u8))
            .map_err(|_| PhoneError::UnknownPhone(symbol.to_string()))
    }

    pub fn silence() -> Self {
        Phone::new(SILENCE).expect("sil is in the inventory")
    }

    pub fn as_str(self) -> &'static str {
        INVENTORY[self.0 as usize]
    }

    /// Position in [`INVENTORY`].
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = Phone> {
        (0..INVENTORY.len() as u8).map(Phone)
    }
}

impl fmt::Debug for Phone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Phone({})", self.as_str())
    }
}

impl fmt::Display for Phone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Phone {
    type Err = PhoneError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Phone::new(s)
    }
}

impl Serialize for Phone {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Phone {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Phone::new(&s).map_err(serde::de::Error::custom)
    }
}

/// Parses a whitespace-separated phone list. Convenience for tests and fixtures.
pub fn phones(text: &str) -> Result<Vec<Phone>, PhoneError> {
    text.split_whitespace().map(Phone::new).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategorizationName {
    EightClass,
    ConsonantVowel,
    Voicing,
}

impl CategorizationName {
    pub const ALL: [CategorizationName; 3] = [
        CategorizationName::EightClass,
        CategorizationName::ConsonantVowel,
        CategorizationName::Voicing,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CategorizationName::EightClass => "eight_class",
            CategorizationName::ConsonantVowel => "consonant_vowel",
            CategorizationName::Voicing => "voicing",
        }
    }

    fn table(self) -> &'static [(&'static str, &'static str, &'static str)] {
        match self {
            CategorizationName::EightClass => EIGHT_CLASS,
            CategorizationName::ConsonantVowel => CONSONANT_VOWEL,
            CategorizationName::Voicing => VOICING,
        }
    }
}

impl fmt::Display for CategorizationName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CategorizationName {
    type Err = PhoneError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CategorizationName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| PhoneError::UnknownCategorization(s.to_string()))
    }
}

// (id, display name, members) in the row order of the published mapping table.
const EIGHT_CLASS: &[(&str, &str, &str)] = &[
    ("aff", "Affricate", "ch jh"),
    ("dip", "Diphthong", "aw ay ey ow oy"),
    ("fri", "Fricative", "dh f s sh th v z"),
    ("nas", "Nasal", "m n ng"),
    ("plo", "Plosive", "b d dx g k p t"),
    ("sem", "Semi-vowel", "hh l r w y"),
    ("sil", "Silence", "sil"),
    ("vow", "Vowel", "aa ae ah eh er ih iy uh uw"),
];

const CONSONANT_VOWEL: &[(&str, &str, &str)] = &[
    (
        "con",
        "Consonant",
        "b ch d dh dx f g hh jh k l m n ng p r s sh t th v w y z",
    ),
    ("sil", "Silence", "sil"),
    ("vow+", "Vowel+", "aw ay ey ow oy aa ae ah eh er ih iy uh uw"),
];

// hh is listed as voiced in the source table and kept that way.
const VOICING: &[(&str, &str, &str)] = &[
    (
        "voi",
        "Voiced",
        "aa ae ah aw ay b d dh dx eh er ey g hh ih iy jh l m n ng ow oy r uh uw v w y z",
    ),
    ("sil", "Silence", "sil"),
    ("unv", "Unvoiced", "ch f k p s sh t th"),
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BpcClass {
    pub id: &'static str,
    pub display: &'static str,
    pub members: Vec<Phone>,
}

impl BpcClass {
    pub fn contains(&self, phone: Phone) -> bool {
        self.members.contains(&phone)
    }
}

/// A partition of the inventory into broad phonetic classes.
#[derive(Debug, PartialEq, Eq)]
pub struct BpcCategorization {
    pub name: CategorizationName,
    pub classes: Vec<BpcClass>,
    class_index: [u8; INVENTORY.len()],
}

impl BpcCategorization {
    /// Shared instance for `name`. Built once, never mutated.
    pub fn get(name: CategorizationName) -> &'static BpcCategorization {
        static CACHE: [OnceLock<BpcCategorization>; 3] =
            [OnceLock::new(), OnceLock::new(), OnceLock::new()];
        CACHE[name as usize].get_or_init(|| Self::compile(name))
    }

    fn compile(name: CategorizationName) -> BpcCategorization {
        const UNSET: u8 = u8::MAX;
        let mut class_index = [UNSET; INVENTORY.len()];
        let classes: Vec<BpcClass> = name
            .table()
            .iter()
            .enumerate()
            .map(|(ci, &(id, display, members))| {
                let members = phones(members).expect("table phones are in the inventory");
                for p in &members {
                    assert_eq!(class_index[p.index()], UNSET, "{p} listed twice in {name}");
                    class_index[p.index()] = ci as u8;
                }
                BpcClass {
                    id,
                    display,
                    members,
                }
            })
            .collect();
        assert!(
            class_index.iter().all(|&c| c != UNSET),
            "{name} does not cover the inventory"
        );
        BpcCategorization {
            name,
            classes,
            class_index,
        }
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn labels(&self) -> Vec<&'static str> {
        self.classes.iter().map(|c| c.id).collect()
    }

    pub fn class_index(&self, phone: Phone) -> usize {
        self.class_index[phone.index()] as usize
    }

    pub fn class_of(&self, phone: Phone) -> &BpcClass {
        &self.classes[self.class_index(phone)]
    }

    pub fn position(&self, class_id: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.id == class_id)
    }

    pub fn class(&self, class_id: &str) -> Option<&BpcClass> {
        self.position(class_id).map(|i| &self.classes[i])
    }
}

/// Looks up a categorisation by its textual name.
pub fn build_categorization(name: &str) -> Result<&'static BpcCategorization, PhoneError> {
    name.parse().map(BpcCategorization::get)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FoldTarget {
    Phone(Phone),
    Drop,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FoldError {
    #[error("line {line}: expected \"source target\", got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: target {target:?} is not an inventory phone or \"-\"")]
    BadTarget { line: usize, target: String },
    #[error("line {line}: source {source_token:?} mapped twice")]
    Duplicate { line: usize, source_token: String },
    #[error("{source_token:?} maps to {target:?}, which the map itself rewrites to {next}")]
    NotIdempotent {
        source_token: String,
        target: String,
        next: String,
    },
    #[error("token {token:?} at position {position} is neither mapped nor an inventory phone")]
    Unmappable { token: String, position: usize },
}

/// Many-to-one token map onto the inventory, with an explicit drop marker.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FoldMap {
    entries: BTreeMap<String, FoldTarget>,
}

impl FoldMap {
    pub const DROP_MARKER: &'static str = "-";

    pub fn new<I, S>(entries: I) -> Result<Self, FoldError>
    where
        I: IntoIterator<Item = (S, FoldTarget)>,
        S: Into<String>,
    {
        let map = FoldMap {
            entries: entries.into_iter().map(|(s, t)| (s.into(), t)).collect(),
        };
        map.check_idempotent()?;
        Ok(map)
    }

    /// Parses the `source target` line format; `-` drops, a token starting
    /// with `#` begins a comment (so `h#` is an ordinary symbol).
    pub fn parse(text: &str) -> Result<Self, FoldError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let fields: Vec<&str> = raw
                .split_whitespace()
                .take_while(|t| !t.starts_with('#'))
                .collect();
            if fields.is_empty() {
                continue;
            }
            let [source, target] = fields[..] else {
                return Err(FoldError::Syntax {
                    line,
                    text: raw.trim_end_matches('\r').to_string(),
                });
            };
            let target = if target == Self::DROP_MARKER {
                FoldTarget::Drop
            } else {
                FoldTarget::Phone(Phone::new(target).map_err(|_| FoldError::BadTarget {
                    line,
                    target: target.to_string(),
                })?)
            };
            if entries.insert(source.to_string(), target).is_some() {
                return Err(FoldError::Duplicate {
                    line,
                    source_token: source.to_string(),
                });
            }
        }
        let map = FoldMap { entries };
        map.check_idempotent()?;
        Ok(map)
    }

    // A target phone that is itself a key must map to itself, otherwise
    // folding twice would differ from folding once.
    fn check_idempotent(&self) -> Result<(), FoldError> {
        for (source, target) in &self.entries {
            if let FoldTarget::Phone(p) = target {
                match self.entries.get(p.as_str()) {
                    None => {}
                    Some(FoldTarget::Phone(q)) if q == p => {}
                    Some(next) => {
                        return Err(FoldError::NotIdempotent {
                            source_token: source.clone(),
                            target: p.to_string(),
                            next: match next {
                                FoldTarget::Phone(q) => q.to_string(),
                                FoldTarget::Drop => Self::DROP_MARKER.to_string(),
                            },
                        })
                    }
                }
            }
        }
        Ok(())
    }

    pub fn get(&self, token: &str) -> Option<FoldTarget> {
        self.entries.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Maps a token sequence onto the inventory, removing dropped tokens.
    pub fn fold<S: AsRef<str>>(&self, tokens: &[S]) -> Result<Vec<Phone>, FoldError> {
        let mut out = Vec::with_capacity(tokens.len());
        for (position, token) in tokens.iter().enumerate() {
            let token = token.as_ref();
            match self.get(token) {
                Some(FoldTarget::Phone(p)) => out.push(p),
                Some(FoldTarget::Drop) => {}
                None => out.push(Phone::new(token).map_err(|_| FoldError::Unmappable {
                    token: token.to_string(),
                    position,
                })?),
            }
        }
        Ok(out)
    }
}

/// Folds `tokens` with `map`, or validates them as-is when no map is given.
pub fn fold<S: AsRef<str>>(tokens: &[S], map: Option<&FoldMap>) -> Result<Vec<Phone>, FoldError> {
    match map {
        Some(m) => m.fold(tokens),
        None => FoldMap::default().fold(tokens),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(cat: &BpcCategorization, phone: &str) -> &'static str {
        cat.class_of(Phone::new(phone).unwrap()).id
    }

    #[test]
    fn inventory_is_sorted_and_unique() {
        assert!(INVENTORY.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(INVENTORY.len(), 39);
    }

    #[test]
    fn phone_rejects_unknown_symbols() {
        assert_eq!(Phone::new("ch").unwrap().as_str(), "ch");
        assert!(Phone::new("ix").is_err());
        assert!(Phone::new("").is_err());
        assert!(Phone::new("AA").is_err());
    }

    #[test]
    fn class_sizes() {
        let sizes = |n| {
            BpcCategorization::get(n)
                .classes
                .iter()
                .map(|c| (c.id, c.members.len()))
                .collect::<Vec<_>>()
        };
        assert_eq!(
            sizes(CategorizationName::EightClass),
            [
                ("aff", 2),
                ("dip", 5),
                ("fri", 7),
                ("nas", 3),
                ("plo", 7),
                ("sem", 5),
                ("sil", 1),
                ("vow", 9)
            ]
        );
        assert_eq!(
            sizes(CategorizationName::ConsonantVowel),
            [("con", 24), ("sil", 1), ("vow+", 14)]
        );
        assert_eq!(
            sizes(CategorizationName::Voicing),
            [("voi", 30), ("sil", 1), ("unv", 8)]
        );
    }

    #[test]
    fn lookups() {
        let eight = build_categorization("eight_class").unwrap();
        let voicing = build_categorization("voicing").unwrap();
        assert_eq!(ids(eight, "ch"), "aff");
        assert_eq!(ids(eight, "sil"), "sil");
        assert_eq!(ids(voicing, "sil"), "sil");
        assert_eq!(ids(voicing, "hh"), "voi");
        assert_eq!(ids(voicing, "ch"), "unv");
        assert!(matches!(
            build_categorization("manner"),
            Err(PhoneError::UnknownCategorization(_))
        ));
    }

    #[test]
    fn silence_class_is_exactly_sil() {
        for name in CategorizationName::ALL {
            let cat = BpcCategorization::get(name);
            assert_eq!(cat.class("sil").unwrap().members, vec![Phone::silence()]);
        }
    }

    #[test]
    fn vowel_plus_is_vowels_and_diphthongs() {
        let eight = BpcCategorization::get(CategorizationName::EightClass);
        let cv = BpcCategorization::get(CategorizationName::ConsonantVowel);
        let mut union: Vec<Phone> = ["dip", "vow"]
            .iter()
            .flat_map(|id| eight.class(id).unwrap().members.clone())
            .collect();
        union.sort();
        let mut vplus = cv.class("vow+").unwrap().members.clone();
        vplus.sort();
        assert_eq!(union, vplus);
    }

    #[test]
    fn unvoiced_are_obstruents() {
        let eight = BpcCategorization::get(CategorizationName::EightClass);
        let voicing = BpcCategorization::get(CategorizationName::Voicing);
        for p in &voicing.class("unv").unwrap().members {
            assert!(["fri", "plo", "aff"].contains(&eight.class_of(*p).id), "{p}");
        }
    }

    #[test]
    fn fold_examples() {
        let map = FoldMap::parse("ix ih\n").unwrap();
        assert_eq!(map.fold(&["ix", "t"]).unwrap(), phones("ih t").unwrap());

        let map = FoldMap::parse("q -   # glottal stop\n").unwrap();
        assert_eq!(map.fold(&["q", "aa"]).unwrap(), phones("aa").unwrap());

        let map = FoldMap::parse("h# sil # closure
").unwrap();
        assert_eq!(map.fold(&["h#", "aa"]).unwrap(), phones("sil aa").unwrap());

        assert_eq!(fold(&["aa", "ch"], None).unwrap(), phones("aa ch").unwrap());
    }

    #[test]
    fn fold_reports_unmappable_position() {
        let map = FoldMap::parse("ix ih").unwrap();
        assert_eq!(
            map.fold(&["aa", "ix", "zz"]),
            Err(FoldError::Unmappable {
                token: "zz".into(),
                position: 2
            })
        );
    }

    #[test]
    fn fold_map_parse_errors() {
        assert!(matches!(
            FoldMap::parse("# header\n\nix\n"),
            Err(FoldError::Syntax { line: 3, .. })
        ));
        assert!(matches!(
            FoldMap::parse("ix xx\n"),
            Err(FoldError::BadTarget { line: 1, .. })
        ));
        assert!(matches!(
            FoldMap::parse("ix ih\r\nix ah\r\n"),
            Err(FoldError::Duplicate { line: 2, .. })
        ));
        assert!(matches!(
            FoldMap::parse("ix ah\nah aa\n"),
            Err(FoldError::NotIdempotent { .. })
        ));
        // self-maps are fine
        assert!(FoldMap::parse("ix ah\nah ah\n").is_ok());
    }

    #[test]
    fn fold_is_idempotent_on_own_output() {
        let map = FoldMap::parse("ix ih\nax ah\nq -\nah ah\n").unwrap();
        let once = map.fold(&["ix", "q", "ax", "t", "ah"]).unwrap();
        let symbols: Vec<&str> = once.iter().map(|p| p.as_str()).collect();
        assert_eq!(map.fold(&symbols).unwrap(), once);
    }
}

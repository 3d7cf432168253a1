//! Group elements acting on the catalogued state spaces, and the word
//! syntax used to name them in configs and on the command line.
//!
//! Lattice families are acted on by translations (written `(1,0)` or
//! `e1 e2^-1`), the tree family by left multiplication with a reduced word
//! (written `a b a^-1`).

use crate::error::CoreError;
use crate::site::{self, Letter, Site};

/// A group element of one of the catalogued deck groups.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroupElem {
    /// Translation of `Z^d` (trailing coordinates zero).
    Translation([i64; 3]),
    /// Left multiplication by a reduced word of F2.
    LeftWord(Vec<Letter>),
}

impl GroupElem {
    pub fn identity_translation() -> Self {
        GroupElem::Translation([0; 3])
    }

    pub fn identity_word() -> Self {
        GroupElem::LeftWord(Vec::new())
    }

    pub fn translation(v: &[i64]) -> Self {
        let mut c = [0i64; 3];
        c[..v.len()].copy_from_slice(v);
        GroupElem::Translation(c)
    }

    pub fn is_identity(&self) -> bool {
        match self {
            GroupElem::Translation(v) => v.iter().all(|&c| c == 0),
            GroupElem::LeftWord(w) => w.is_empty(),
        }
    }

    pub fn inverse(&self) -> Self {
        match self {
            GroupElem::Translation(v) => GroupElem::Translation([-v[0], -v[1], -v[2]]),
            GroupElem::LeftWord(w) => GroupElem::LeftWord(Site::word_inverse(w)),
        }
    }

    /// `self * other` (first apply `other`, then `self`).
    pub fn compose(&self, other: &GroupElem) -> Result<Self, CoreError> {
        match (self, other) {
            (GroupElem::Translation(u), GroupElem::Translation(v)) => {
                Ok(GroupElem::Translation([u[0] + v[0], u[1] + v[1], u[2] + v[2]]))
            }
            (GroupElem::LeftWord(u), GroupElem::LeftWord(v)) => {
                Ok(GroupElem::LeftWord(Site::word_concat(u, v)))
            }
            _ => Err(CoreError::WordFamilyMismatch {
                word: format!("{other:?}"),
                family: format!("{self:?}"),
            }),
        }
    }

    /// Applies the element to a site. `act(e, s) = s`.
    pub fn act(&self, s: &Site) -> Result<Site, CoreError> {
        match (self, s) {
            (GroupElem::Translation(v), Site::Lattice(c)) => {
                Ok(Site::Lattice([c[0] + v[0], c[1] + v[1], c[2] + v[2]]))
            }
            (GroupElem::LeftWord(w), Site::Word(u)) => Ok(Site::Word(Site::word_concat(w, u))),
            _ => Err(CoreError::WordFamilyMismatch {
                word: format!("{self:?}"),
                family: format!("{s}"),
            }),
        }
    }

    /// Parses a word over declared generators.
    ///
    /// Lattice (dimension `d`): either a tuple `(1,0)` / `(1,0,-2)`, or a
    /// word over `e1..ed` with optional `^-1`, e.g. `e1 e2^-1 e1`.
    /// Tree: a word over `a`, `b` with optional `^-1`, e.g. `a b a^-1`.
    /// The empty string and `e` both denote the identity.
    pub fn parse(word: &str, lattice_dim: Option<usize>) -> Result<Self, CoreError> {
        let trimmed = word.trim();
        if let Some(d) = lattice_dim {
            if trimmed.is_empty() || trimmed == "e" {
                return Ok(GroupElem::identity_translation());
            }
            if trimmed.starts_with('(') {
                let inner = trimmed
                    .strip_prefix('(')
                    .and_then(|t| t.strip_suffix(')'))
                    .ok_or_else(|| CoreError::UnknownGenerator(word.to_string()))?;
                let coords: Result<Vec<i64>, _> =
                    inner.split(',').map(|p| p.trim().parse::<i64>()).collect();
                let coords = coords.map_err(|_| CoreError::UnknownGenerator(word.to_string()))?;
                if coords.len() != d {
                    return Err(CoreError::BadConfig(format!(
                        "translation `{trimmed}` has {} coordinates, model dimension is {d}",
                        coords.len()
                    )));
                }
                return Ok(GroupElem::translation(&coords));
            }
            let mut v = [0i64; 3];
            for tok in trimmed.split_whitespace() {
                let (base, sign) = split_inverse(tok);
                let axis = base
                    .strip_prefix('e')
                    .and_then(|n| n.parse::<usize>().ok())
                    .filter(|&n| n >= 1 && n <= d)
                    .ok_or_else(|| CoreError::UnknownGenerator(tok.to_string()))?;
                v[axis - 1] += sign;
            }
            Ok(GroupElem::Translation(v))
        } else {
            if trimmed.is_empty() || trimmed == "e" {
                return Ok(GroupElem::identity_word());
            }
            let mut letters = Vec::new();
            for tok in trimmed.split_whitespace() {
                let (base, sign) = split_inverse(tok);
                let l = match (base, sign) {
                    ("a", 1) => site::LETTER_A,
                    ("a", -1) => site::LETTER_A_INV,
                    ("b", 1) => site::LETTER_B,
                    ("b", -1) => site::LETTER_B_INV,
                    _ => return Err(CoreError::UnknownGenerator(tok.to_string())),
                };
                letters.push(l);
            }
            Ok(GroupElem::LeftWord(Site::word_concat(&[], &letters)))
        }
    }
}

fn split_inverse(tok: &str) -> (&str, i64) {
    if let Some(base) = tok.strip_suffix("^-1") {
        (base, -1)
    } else if let Some(base) = tok.strip_suffix('\u{207b}') {
        // tolerate a bare superscript-minus suffix
        (base, -1)
    } else {
        (tok, 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_acts_trivially() {
        let s = Site::lattice(&[3, 5]);
        let e = GroupElem::parse("e", Some(2)).unwrap();
        assert_eq!(e.act(&s).unwrap(), s);
    }

    #[test]
    fn lattice_translation() {
        let g = GroupElem::parse("(1,0)", Some(2)).unwrap();
        let s = Site::lattice(&[3, 5]);
        assert_eq!(g.act(&s).unwrap(), Site::lattice(&[4, 5]));
    }

    #[test]
    fn generator_word_form() {
        let g = GroupElem::parse("e1 e2^-1 e1", Some(2)).unwrap();
        assert_eq!(g, GroupElem::translation(&[2, -1]));
    }

    #[test]
    fn free_word_acts_by_left_multiplication() {
        let g = GroupElem::parse("a b a^-1", None).unwrap();
        let root = Site::origin_word();
        let image = g.act(&root).unwrap();
        // a b a^-1 applied to the identity is the b-conjugate node.
        assert_eq!(
            image,
            Site::Word(vec![site::LETTER_A, site::LETTER_B, site::LETTER_A_INV])
        );
        // and acting with the inverse returns to the root
        assert_eq!(g.inverse().act(&image).unwrap(), root);
    }

    #[test]
    fn unknown_generator_is_an_error() {
        assert!(GroupElem::parse("q", None).is_err());
        assert!(GroupElem::parse("e4", Some(2)).is_err());
    }
}

//! Concrete coordinates behind state ids: lattice points of `Z^d` and
//! reduced words of the rank-2 free group.

use std::fmt;

/// A letter of the free group F2. Inverse pairs: `A = a^-1`, `B = b^-1`.
pub type Letter = u8;

pub const LETTER_A: Letter = 0;
pub const LETTER_A_INV: Letter = 1;
pub const LETTER_B: Letter = 2;
pub const LETTER_B_INV: Letter = 3;

/// The inverse of a letter.
#[inline]
pub fn inverse_letter(l: Letter) -> Letter {
    l ^ 1
}

/// Exponent-sum contribution of a letter (`a`, `b` count +1; inverses -1).
#[inline]
pub fn letter_sign(l: Letter) -> i64 {
    if l & 1 == 0 {
        1
    } else {
        -1
    }
}

pub fn letter_name(l: Letter) -> &'static str {
    match l {
        LETTER_A => "a",
        LETTER_A_INV => "a^-1",
        LETTER_B => "b",
        LETTER_B_INV => "b^-1",
        _ => "?",
    }
}

/// A state coordinate in one of the catalogued families.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Site {
    /// A point of `Z^d`, `d <= 3`; unused trailing coordinates are zero.
    Lattice([i64; 3]),
    /// A reduced word in F2, identity = empty word.
    Word(Vec<Letter>),
}

impl Site {
    pub fn lattice(coords: &[i64]) -> Site {
        let mut c = [0i64; 3];
        c[..coords.len()].copy_from_slice(coords);
        Site::Lattice(c)
    }

    pub fn origin_word() -> Site {
        Site::Word(Vec::new())
    }

    /// Reduced-word right multiplication by a single letter.
    pub fn word_push(word: &[Letter], l: Letter) -> Vec<Letter> {
        let mut w = word.to_vec();
        if w.last() == Some(&inverse_letter(l)) {
            w.pop();
        } else {
            w.push(l);
        }
        w
    }

    /// Concatenation with free reduction: `u * v`.
    pub fn word_concat(u: &[Letter], v: &[Letter]) -> Vec<Letter> {
        let mut out = u.to_vec();
        for &l in v {
            if out.last() == Some(&inverse_letter(l)) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        out
    }

    /// The inverse word.
    pub fn word_inverse(u: &[Letter]) -> Vec<Letter> {
        u.iter().rev().map(|&l| inverse_letter(l)).collect()
    }

    /// Exponent sum (image under F2 -> Z sending every generator to +1).
    pub fn word_exponent_sum(u: &[Letter]) -> i64 {
        u.iter().map(|&l| letter_sign(l)).sum()
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::Lattice(c) => write!(f, "({},{},{})", c[0], c[1], c[2]),
            Site::Word(w) => {
                if w.is_empty() {
                    write!(f, "e")
                } else {
                    let parts: Vec<&str> = w.iter().map(|&l| letter_name(l)).collect();
                    write!(f, "{}", parts.join(" "))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concat_reduces() {
        // a b b^-1 a = a a
        let u = vec![LETTER_A, LETTER_B];
        let v = vec![LETTER_B_INV, LETTER_A];
        assert_eq!(Site::word_concat(&u, &v), vec![LETTER_A, LETTER_A]);
    }

    #[test]
    fn inverse_cancels() {
        let u = vec![LETTER_A, LETTER_B, LETTER_A_INV];
        let inv = Site::word_inverse(&u);
        assert!(Site::word_concat(&u, &inv).is_empty());
    }

    #[test]
    fn exponent_sum_matches_length_parity() {
        let u = vec![LETTER_A, LETTER_B_INV, LETTER_A, LETTER_A];
        let s = Site::word_exponent_sum(&u);
        assert_eq!(s, 2);
        assert_eq!((s.rem_euclid(2)) as usize, u.len() % 2);
    }
}

//! Operators written as polynomials in the four ladder letters and their exact
//! action on family expansions.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::families::Side;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    A,
    B,
    ADag,
    BDag,
}

impl Letter {
    pub fn dagger(self) -> Letter {
        match self {
            Letter::A => Letter::ADag,
            Letter::B => Letter::BDag,
            Letter::ADag => Letter::A,
            Letter::BDag => Letter::B,
        }
    }

    /// Image of the `n`-th member on `side`: `(target index, factor)`, or
    /// `None` when the letter does not act within that family.
    fn act(self, side: Side, n: usize) -> Option<Option<(usize, f64)>> {
        let up = |n: usize| Some((n + 1, ((n + 1) as f64).sqrt()));
        let down = |n: usize| if n == 0 { None } else { Some((n - 1, (n as f64).sqrt())) };
        match (side, self) {
            (Side::Phi, Letter::B) => Some(up(n)),
            (Side::Phi, Letter::A) => Some(down(n)),
            (Side::Psi, Letter::ADag) => Some(up(n)),
            (Side::Psi, Letter::BDag) => Some(down(n)),
            _ => None,
        }
    }
}

/// `sum_i c_i w_i` where each word `w_i` is a product of letters; the last
/// letter of a word acts first.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderForm {
    terms: Vec<(C64, Vec<Letter>)>,
}

impl LadderForm {
    pub fn scalar(c: C64) -> LadderForm {
        LadderForm { terms: vec![(c, Vec::new())] }
    }

    pub fn letter(l: Letter) -> LadderForm {
        LadderForm { terms: vec![(C64::new(1.0, 0.0), vec![l])] }
    }

    pub fn word(c: C64, letters: &[Letter]) -> LadderForm {
        LadderForm { terms: vec![(c, letters.to_vec())] }
    }

    pub fn terms(&self) -> &[(C64, Vec<Letter>)] {
        &self.terms
    }

    pub fn add(&self, o: &LadderForm) -> LadderForm {
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        LadderForm { terms }
    }

    pub fn scale(&self, c: C64) -> LadderForm {
        LadderForm { terms: self.terms.iter().map(|(k, w)| (k * c, w.clone())).collect() }
    }

    /// `self ∘ o`.
    pub fn mul(&self, o: &LadderForm) -> LadderForm {
        let mut terms = Vec::with_capacity(self.terms.len() * o.terms.len());
        for (c1, w1) in &self.terms {
            for (c2, w2) in &o.terms {
                let mut w = w1.clone();
                w.extend_from_slice(w2);
                terms.push((c1 * c2, w));
            }
        }
        LadderForm { terms }
    }

    pub fn adjoint(&self) -> LadderForm {
        LadderForm {
            terms: self
                .terms
                .iter()
                .map(|(c, w)| (c.conj(), w.iter().rev().map(|l| l.dagger()).collect()))
                .collect(),
        }
    }

    /// Exact image of `sum_n c_n member_n` on `side`.
    ///
    /// Returns `None` if some letter does not act within the family.
    pub fn apply(&self, side: Side, input: &BTreeMap<usize, C64>) -> Option<BTreeMap<usize, C64>> {
        let mut out: BTreeMap<usize, C64> = BTreeMap::new();
        for (c, word) in &self.terms {
            let mut cur = input.clone();
            for letter in word.iter().rev() {
                let mut next = BTreeMap::new();
                for (&n, &v) in &cur {
                    if let Some((m, f)) = letter.act(side, n)? {
                        *next.entry(m).or_insert(C64::new(0.0, 0.0)) += v * f;
                    }
                }
                cur = next;
            }
            for (n, v) in cur {
                *out.entry(n).or_insert(C64::new(0.0, 0.0)) += c * v;
            }
        }
        Some(out)
    }
}

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NAMES: [&str; 4] = ["a1", "b1", "a2", "b2"];

/// Word in the generators a₁, b₁, a₂, b₂ (letters ±1..±4, negative = inverse).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Word(pub Vec<i8>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    /// Freely reduced word from letters; panics on letters outside ±1..±4.
    pub fn new(letters: &[i8]) -> Self {
        assert!(
            letters.iter().all(|&l| l != 0 && l.abs() <= 4),
            "invalid letter in {letters:?}"
        );
        Word(letters.to_vec()).reduced()
    }

    pub fn gen(i: i8) -> Self {
        Word::new(&[i])
    }

    /// [a₁, b₁][a₂, b₂].
    pub fn relator() -> Self {
        Word(vec![1, 2, -1, -2, 3, 4, -3, -4])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn reduced(&self) -> Self {
        let mut out: Vec<i8> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn inverse(&self) -> Self {
        Word(self.0.iter().rev().map(|l| -l).collect())
    }

    pub fn mul(&self, other: &Word) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v).reduced()
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Word::identity();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "e" || s == "1" {
            return Ok(Word::identity());
        }
        let mut letters = Vec::new();
        for tok in s.split_whitespace() {
            let (name, inv) = match tok.strip_suffix("^-1") {
                Some(n) => (n, true),
                None => match tok.strip_prefix('-') {
                    Some(n) => (n, true),
                    None => (tok, false),
                },
            };
            let idx = NAMES
                .iter()
                .position(|n| *n == name.to_ascii_lowercase())
                .ok_or_else(|| Error::Parse(format!("unknown generator '{tok}'")))?;
            let l = idx as i8 + 1;
            letters.push(if inv { -l } else { l });
        }
        Ok(Word(letters).reduced())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|&l| {
                let n = NAMES[(l.unsigned_abs() - 1) as usize];
                if l < 0 {
                    format!("{n}^-1")
                } else {
                    n.to_string()
                }
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// All freely reduced words of length ≤ L, shortlex ordered.
pub fn reduced_words(max_len: usize) -> Vec<Word> {
    let letters: [i8; 8] = [1, -1, 2, -2, 3, -3, 4, -4];
    let mut out = vec![Word::identity()];
    let mut frontier = vec![Word::identity()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for &l in &letters {
                if w.0.last() == Some(&-l) {
                    continue;
                }
                let mut v = w.0.clone();
                v.push(l);
                next.push(Word(v));
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

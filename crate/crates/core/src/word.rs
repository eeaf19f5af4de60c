//! Alphabets and strings over them.

use std::borrow::Borrow;
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A symbol is its index in the alphabet.
pub type Symbol = usize;

/// A finite alphabet `0..size`, optionally with display names.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    size: usize,
    names: Option<Vec<String>>,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::invalid("alphabet size must be at least 1"));
        }
        Ok(Alphabet { size, names: None })
    }

    pub fn with_names<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut alphabet = Alphabet::new(names.len())?;
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(Error::invalid(format!("duplicate symbol name {name:?}")));
            }
        }
        alphabet.names = Some(names);
        Ok(alphabet)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Display label of a symbol: its name when one was given, else its index.
    pub fn label(&self, symbol: Symbol) -> String {
        match &self.names {
            Some(names) => names[symbol].clone(),
            None => symbol.to_string(),
        }
    }

    pub fn check_symbol(&self, symbol: Symbol) -> Result<()> {
        if symbol < self.size {
            Ok(())
        } else {
            Err(Error::SymbolOutOfRange {
                symbol,
                alphabet_size: self.size,
            })
        }
    }

    pub fn check(&self, word: &[Symbol]) -> Result<()> {
        word.iter().try_for_each(|&s| self.check_symbol(s))
    }

    /// Parses a word written with the alphabet's names, one character per
    /// symbol (e.g. `"ab"` over `{a, b}`).
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let names = self
            .names
            .as_ref()
            .ok_or_else(|| Error::invalid("alphabet has no symbol names"))?;
        text.chars()
            .map(|c| {
                names
                    .iter()
                    .position(|n| n.chars().eq(std::iter::once(c)))
                    .ok_or_else(|| Error::invalid(format!("unknown symbol {c:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Word::from)
    }

    /// All words of length at most `max_len`, shortest first, then
    /// lexicographically.
    pub fn words_up_to(&self, max_len: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        let mut frontier = vec![Word::empty()];
        for _ in 0..max_len {
            let mut next = Vec::with_capacity(frontier.len() * self.size);
            for w in &frontier {
                for s in 0..self.size {
                    next.push(w.appended(s));
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }
}

/// A finite string of symbols; the empty word is λ.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Symbol> {
        self.0
    }

    pub fn appended(&self, symbol: Symbol) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(symbol);
        Word(v)
    }

    /// `self · middle · suffix` as a fresh word.
    pub fn concat(parts: &[&[Symbol]]) -> Word {
        let len = parts.iter().map(|p| p.len()).sum();
        let mut v = Vec::with_capacity(len);
        for p in parts {
            v.extend_from_slice(p);
        }
        Word(v)
    }

    /// Every prefix, from λ up to the word itself.
    pub fn prefixes(&self) -> impl Iterator<Item = &[Symbol]> + '_ {
        (0..=self.0.len()).map(move |i| &self.0[..i])
    }

    /// Every suffix, from the word itself down to λ.
    pub fn suffixes(&self) -> impl Iterator<Item = &[Symbol]> + '_ {
        (0..=self.0.len()).map(move |i| &self.0[i..])
    }
}

impl Deref for Word {
    type Target = [Symbol];

    fn deref(&self) -> &[Symbol] {
        &self.0
    }
}

// `Vec` hashes like its slice, so lookups by `&[Symbol]` agree with `Word` keys.
impl Borrow<[Symbol]> for Word {
    fn borrow(&self) -> &[Symbol] {
        &self.0
    }
}

impl From<Vec<Symbol>> for Word {
    fn from(v: Vec<Symbol>) -> Self {
        Word(v)
    }
}

impl From<&[Symbol]> for Word {
    fn from(v: &[Symbol]) -> Self {
        Word(v.to_vec())
    }
}

impl<const N: usize> From<[Symbol; N]> for Word {
    fn from(v: [Symbol; N]) -> Self {
        Word(v.to_vec())
    }
}

impl FromIterator<Symbol> for Word {
    fn from_iter<I: IntoIterator<Item = Symbol>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("λ");
        }
        f.write_str("[")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("]")
    }
}

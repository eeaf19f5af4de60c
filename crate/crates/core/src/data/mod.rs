//! Text formats for string datasets, probability tables and automata, and
//! a generator of random stochastic automata.
//!
//! String files start with `<count> <alphabet_size>` and hold one
//! `<len> <s1> ... <s_len>` line per string. Solution files start with
//! `<count>` followed by one probability per line.

mod synth;
mod wa_format;

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::word::{Alphabet, Word};

pub use synth::{random_stochastic_wa, MIN_END_MASS};
pub use wa_format::{load_wa, save_wa};

#[derive(Clone, Debug, PartialEq)]
pub struct StringDataset {
    pub alphabet: Alphabet,
    pub strings: Vec<Word>,
    pub source: String,
}

impl StringDataset {
    pub fn new(alphabet: Alphabet, strings: Vec<Word>, source: impl Into<String>) -> Result<Self> {
        for w in &strings {
            alphabet.check(w)?;
        }
        Ok(StringDataset {
            alphabet,
            strings,
            source: source.into(),
        })
    }

    pub fn to_text(&self) -> String {
        strings_to_text(&self.strings, self.alphabet.size())
    }
}

pub fn strings_to_text(strings: &[Word], alphabet_size: usize) -> String {
    let mut out = format!("{} {}\n", strings.len(), alphabet_size);
    for w in strings {
        let _ = write!(out, "{}", w.len());
        for s in w.iter() {
            let _ = write!(out, " {s}");
        }
        out.push('\n');
    }
    out
}

fn parse_usize(token: &str, line: usize, what: &str) -> Result<usize> {
    token
        .parse()
        .map_err(|_| Error::parse(line, format!("expected {what}, found {token:?}")))
}

/// Parses one `<len> <s1> ... <sk>` line; `line` is 1-based.
pub(crate) fn parse_word_line(text: &str, line: usize, alphabet_size: Option<usize>) -> Result<Word> {
    let mut tokens = text.split_whitespace();
    let len = parse_usize(
        tokens.next().ok_or_else(|| Error::parse(line, "missing length"))?,
        line,
        "a length",
    )?;
    let symbols = tokens
        .map(|t| {
            let s = parse_usize(t, line, "a symbol")?;
            match alphabet_size {
                Some(n) if s >= n => Err(Error::parse(line, format!("symbol {s} outside alphabet of size {n}"))),
                _ => Ok(s),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    if symbols.len() != len {
        return Err(Error::parse(
            line,
            format!("declared length {len} but {} symbols", symbols.len()),
        ));
    }
    Ok(Word::from(symbols))
}

/// Lines after the header, with 1-based numbers; trailing blank lines are ignored.
fn body_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let lines: Vec<&str> = text.lines().collect();
    let last = lines.iter().rposition(|l| !l.trim().is_empty()).map_or(0, |i| i + 1);
    lines
        .into_iter()
        .take(last)
        .enumerate()
        .skip(1)
        .map(|(i, l)| (i + 1, l))
}

pub fn parse_strings(text: &str, source: &str) -> Result<StringDataset> {
    let header = text.lines().next().ok_or_else(|| Error::parse(1, "empty input"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [count, size] = fields[..] else {
        return Err(Error::parse(1, "header must be `<count> <alphabet_size>`"));
    };
    let count = parse_usize(count, 1, "a string count")?;
    let size = parse_usize(size, 1, "an alphabet size")?;
    let alphabet = Alphabet::new(size).map_err(|e| Error::parse(1, e.to_string()))?;
    let strings = body_lines(text)
        .map(|(line, l)| parse_word_line(l, line, Some(size)))
        .collect::<Result<Vec<_>>>()?;
    if strings.len() != count {
        return Err(Error::parse(
            strings.len() + 2,
            format!("header declares {count} strings, found {}", strings.len()),
        ));
    }
    Ok(StringDataset {
        alphabet,
        strings,
        source: source.to_string(),
    })
}

/// Reference probabilities aligned with a test set.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionTable {
    pub probabilities: Vec<f64>,
}

impl SolutionTable {
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.probabilities.len());
        for p in &self.probabilities {
            let _ = writeln!(out, "{p}");
        }
        out
    }
}

pub fn parse_solution(text: &str) -> Result<SolutionTable> {
    let header = text.lines().next().ok_or_else(|| Error::parse(1, "empty input"))?;
    let count = parse_usize(header.trim(), 1, "a count")?;
    if count == 0 {
        return Err(Error::parse(1, "solution is empty"));
    }
    let probabilities = body_lines(text)
        .map(|(line, l)| {
            let p: f64 = l
                .trim()
                .parse()
                .map_err(|_| Error::parse(line, format!("expected a probability, found {l:?}")))?;
            if !(p > 0.0) || !p.is_finite() {
                return Err(Error::parse(line, format!("probability {p} is not positive")));
            }
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    if probabilities.len() != count {
        return Err(Error::parse(
            probabilities.len() + 2,
            format!("header declares {count} values, found {}", probabilities.len()),
        ));
    }
    Ok(SolutionTable { probabilities })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn parses_strings() {
        let d = parse_strings("2 4\n1 3\n2 0 1\n", "t").unwrap();
        assert_eq!(d.alphabet.size(), 4);
        assert_eq!(d.strings, vec![Word::from([3]), Word::from([0, 1])]);
        let d = parse_strings("1 2\n0\n", "t").unwrap();
        assert_eq!(d.strings, vec![Word::empty()]);
    }

    #[test]
    fn string_errors_carry_line_numbers() {
        let cases = [
            ("1 2\n2 0\n", 2),
            ("x 2\n", 1),
            ("1\n0\n", 1),
            ("2 2\n1 0\n1 2\n", 3),
            ("3 2\n1 0\n", 3),
        ];
        for (text, line) in cases {
            match parse_strings(text, "t") {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn parses_solutions() {
        assert_eq!(
            parse_solution("2\n0.25\n0.75\n").unwrap().probabilities,
            vec![0.25, 0.75]
        );
        assert!(parse_solution("1\n-0.1\n").is_err());
        assert!(parse_solution("0\n").is_err());
        assert!(parse_solution("2\n0.5\n").is_err());
        assert!(parse_solution("1\nabc\n").is_err());
    }

    proptest! {
        #[test]
        fn strings_round_trip(words in prop::collection::vec(prop::collection::vec(0usize..5, 0..8), 0..20)) {
            let words: Vec<Word> = words.into_iter().map(Word::from).collect();
            let text = strings_to_text(&words, 5);
            let back = parse_strings(&text, "p").unwrap();
            prop_assert_eq!(&back.strings, &words);
            prop_assert_eq!(back.to_text(), text);
        }

        #[test]
        fn solutions_round_trip(ps in prop::collection::vec(1e-300f64..1.0, 1..20)) {
            let table = SolutionTable { probabilities: ps };
            prop_assert_eq!(parse_solution(&table.to_text()).unwrap(), table);
        }
    }
}

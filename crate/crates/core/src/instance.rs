//! Two-string instances over an interned token alphabet.
//!
//! Positions are 1-based everywhere in the public API: `a(1)` is the first
//! letter of `A`. Internally letters are stored 0-based.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// An interned token. Two letters are equal iff their source tokens are equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(pub u32);

/// How a content line is split into letters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParseMode {
    /// Every non-whitespace character is one letter.
    #[default]
    Char,
    /// Letters are whitespace-separated tokens.
    Token,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("expected exactly two content lines, found {0}")]
    LineCount(usize),
    #[error("strings have unequal lengths ({a} vs {b})")]
    UnequalLengths { a: usize, b: usize },
    #[error("empty string")]
    EmptyLine,
}

/// Which of the two strings a duo or position belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

/// An ordered pair of consecutive letters, starting at `position`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Duo {
    pub side: Side,
    pub position: usize,
    pub content: (Letter, Letter),
}

/// Two equal-length strings over a shared alphabet.
///
/// Parsing does not check the permutation or occurrence constraints; use
/// [`Instance::validate`] for that.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    tokens: Vec<String>,
    a: Vec<Letter>,
    b: Vec<Letter>,
}

/// One letter that breaks the permutation or occurrence-bound constraint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LetterViolation {
    pub token: String,
    pub count_a: usize,
    pub count_b: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ValidationReport {
    pub k: usize,
    /// Letters whose counts differ between `A` and `B`.
    pub not_permutation: Vec<LetterViolation>,
    /// Letters occurring more than `k` times in either string.
    pub over_bound: Vec<LetterViolation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.not_permutation.is_empty() && self.over_bound.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok (k = {})", self.k);
        }
        for v in &self.not_permutation {
            writeln!(
                f,
                "not a permutation: letter {:?} occurs {} times in A and {} times in B",
                v.token, v.count_a, v.count_b
            )?;
        }
        for v in &self.over_bound {
            writeln!(
                f,
                "letter {:?} occurs {} times in A and {} times in B (bound k = {})",
                v.token, v.count_a, v.count_b, self.k
            )?;
        }
        Ok(())
    }
}

struct Interner {
    tokens: Vec<String>,
    ids: HashMap<String, Letter>,
}

impl Interner {
    fn new() -> Self {
        Interner {
            tokens: Vec::new(),
            ids: HashMap::new(),
        }
    }

    fn intern(&mut self, tok: &str) -> Letter {
        if let Some(&l) = self.ids.get(tok) {
            return l;
        }
        let l = Letter(self.tokens.len() as u32);
        self.tokens.push(tok.to_owned());
        self.ids.insert(tok.to_owned(), l);
        l
    }
}

fn split_line(line: &str, mode: ParseMode) -> Vec<String> {
    match mode {
        ParseMode::Char => line
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(String::from)
            .collect(),
        ParseMode::Token => line.split_whitespace().map(String::from).collect(),
    }
}

impl Instance {
    /// Parses a two-line instance document. `#` comment lines and blank
    /// lines are skipped.
    pub fn parse(text: &str, mode: ParseMode) -> Result<Self, ParseError> {
        let lines: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect();
        if lines.len() != 2 {
            return Err(ParseError::LineCount(lines.len()));
        }
        Self::from_token_lists(&split_line(lines[0], mode), &split_line(lines[1], mode))
    }

    /// Builds an instance from two strings, split according to `mode`.
    pub fn from_strs(a: &str, b: &str, mode: ParseMode) -> Result<Self, ParseError> {
        Self::from_token_lists(&split_line(a, mode), &split_line(b, mode))
    }

    pub fn from_token_lists<S: AsRef<str>>(a: &[S], b: &[S]) -> Result<Self, ParseError> {
        if a.is_empty() || b.is_empty() {
            return Err(ParseError::EmptyLine);
        }
        if a.len() != b.len() {
            return Err(ParseError::UnequalLengths {
                a: a.len(),
                b: b.len(),
            });
        }
        let mut interner = Interner::new();
        let a = a.iter().map(|t| interner.intern(t.as_ref())).collect();
        let b = b.iter().map(|t| interner.intern(t.as_ref())).collect();
        Ok(Instance {
            tokens: interner.tokens,
            a,
            b,
        })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    /// Letter at 1-based position `i` of `A`.
    pub fn a(&self, i: usize) -> Letter {
        self.a[i - 1]
    }

    /// Letter at 1-based position `j` of `B`.
    pub fn b(&self, j: usize) -> Letter {
        self.b[j - 1]
    }

    pub fn letter(&self, side: Side, pos: usize) -> Letter {
        match side {
            Side::A => self.a(pos),
            Side::B => self.b(pos),
        }
    }

    pub fn a_letters(&self) -> &[Letter] {
        &self.a
    }

    pub fn b_letters(&self) -> &[Letter] {
        &self.b
    }

    pub fn token(&self, l: Letter) -> &str {
        &self.tokens[l.0 as usize]
    }

    pub fn alphabet_size(&self) -> usize {
        self.tokens.len()
    }

    /// Number of distinct interned tokens, all of which are single characters.
    pub fn is_char_alphabet(&self) -> bool {
        self.tokens.iter().all(|t| t.chars().count() == 1)
    }

    /// Per-letter occurrence counts, indexed by letter id.
    pub fn counts(&self, side: Side) -> Vec<usize> {
        let mut c = vec![0; self.tokens.len()];
        let s = match side {
            Side::A => &self.a,
            Side::B => &self.b,
        };
        for l in s {
            c[l.0 as usize] += 1;
        }
        c
    }

    /// Largest number of occurrences of any letter in either string.
    pub fn k(&self) -> usize {
        let ca = self.counts(Side::A);
        let cb = self.counts(Side::B);
        ca.into_iter().chain(cb).max().unwrap_or(0)
    }

    pub fn validate(&self, k: usize) -> ValidationReport {
        let ca = self.counts(Side::A);
        let cb = self.counts(Side::B);
        let mut report = ValidationReport {
            k,
            ..Default::default()
        };
        for (idx, tok) in self.tokens.iter().enumerate() {
            let v = LetterViolation {
                token: tok.clone(),
                count_a: ca[idx],
                count_b: cb[idx],
            };
            if ca[idx] != cb[idx] {
                report.not_permutation.push(v.clone());
            }
            if ca[idx] > k || cb[idx] > k {
                report.over_bound.push(v);
            }
        }
        report
    }

    /// The `n - 1` duos of one string in position order.
    pub fn duos(&self, side: Side) -> Vec<Duo> {
        let s = match side {
            Side::A => &self.a,
            Side::B => &self.b,
        };
        s.windows(2)
            .enumerate()
            .map(|(idx, w)| Duo {
                side,
                position: idx + 1,
                content: (w[0], w[1]),
            })
            .collect()
    }

    /// Renders one side back to text: concatenated when every token is a
    /// single character, space-separated otherwise.
    pub fn render(&self, side: Side) -> String {
        let s = match side {
            Side::A => &self.a,
            Side::B => &self.b,
        };
        let sep = if self.is_char_alphabet() { "" } else { " " };
        s.iter()
            .map(|&l| self.token(l))
            .collect::<Vec<_>>()
            .join(sep)
    }

    /// Renders a letter pair the way DOT labels and text reports show it.
    pub fn render_content(&self, c: (Letter, Letter)) -> String {
        let sep = if self.is_char_alphabet() { "" } else { " " };
        format!("{}{}{}", self.token(c.0), sep, self.token(c.1))
    }

    /// Instance document accepted by [`Instance::parse`] in the matching mode.
    pub fn to_document(&self) -> String {
        format!("{}\n{}\n", self.render(Side::A), self.render(Side::B))
    }

    /// Keeps only the listed 1-based positions of each string, in order.
    pub(crate) fn restrict(&self, keep_a: &[usize], keep_b: &[usize]) -> Instance {
        Instance {
            tokens: self.tokens.clone(),
            a: keep_a.iter().map(|&i| self.a(i)).collect(),
            b: keep_b.iter().map(|&j| self.b(j)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tokens(inst: &Instance, side: Side) -> Vec<&str> {
        let s = match side {
            Side::A => inst.a_letters(),
            Side::B => inst.b_letters(),
        };
        s.iter().map(|&l| inst.token(l)).collect()
    }

    #[test]
    fn parse_three_squares_char_mode() {
        let inst = Instance::parse("abcdefbcde\nfbcdeabcde\n", ParseMode::Char).unwrap();
        assert_eq!(inst.n(), 10);
        assert_eq!(
            tokens(&inst, Side::A),
            ["a", "b", "c", "d", "e", "f", "b", "c", "d", "e"]
        );
        assert_eq!(
            tokens(&inst, Side::B),
            ["f", "b", "c", "d", "e", "a", "b", "c", "d", "e"]
        );
    }

    #[test]
    fn parse_token_mode_and_comments() {
        let inst = Instance::parse("# header\n\na b\n# mid\nb a\n", ParseMode::Token).unwrap();
        assert_eq!(inst.n(), 2);
        let multi = Instance::parse("x10 x2\nx2 x10", ParseMode::Token).unwrap();
        assert_eq!(multi.alphabet_size(), 2);
        assert_eq!(multi.render(Side::A), "x10 x2");
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            Instance::parse("ab\nabc", ParseMode::Char),
            Err(ParseError::UnequalLengths { a: 2, b: 3 })
        );
        assert_eq!(
            Instance::parse("ab", ParseMode::Char),
            Err(ParseError::LineCount(1))
        );
        assert_eq!(
            Instance::parse("ab\nba\nab", ParseMode::Char),
            Err(ParseError::LineCount(3))
        );
        assert_eq!(
            Instance::from_strs("", "", ParseMode::Char),
            Err(ParseError::EmptyLine)
        );
    }

    #[test]
    fn validate_cases() {
        let three_squares = Instance::parse("abcdefbcde\nfbcdeabcde", ParseMode::Char).unwrap();
        assert!(three_squares.validate(2).is_ok());
        assert_eq!(three_squares.k(), 2);

        let aa = Instance::from_strs("aa", "aa", ParseMode::Char).unwrap();
        let r = aa.validate(1);
        assert!(!r.is_ok());
        assert_eq!(
            r.over_bound,
            vec![LetterViolation {
                token: "a".into(),
                count_a: 2,
                count_b: 2
            }]
        );
        assert!(r.not_permutation.is_empty());

        let ab = Instance::from_strs("ab", "aa", ParseMode::Char).unwrap();
        let r = ab.validate(2);
        assert_eq!(r.not_permutation.len(), 2);
    }

    #[test]
    fn duo_lists() {
        let three_squares = Instance::parse("abcdefbcde\nfbcdeabcde", ParseMode::Char).unwrap();
        let show = |side| {
            three_squares
                .duos(side)
                .iter()
                .map(|d| three_squares.render_content(d.content))
                .collect::<Vec<_>>()
        };
        assert_eq!(
            show(Side::A),
            ["ab", "bc", "cd", "de", "ef", "fb", "bc", "cd", "de"]
        );
        assert_eq!(
            show(Side::B),
            ["fb", "bc", "cd", "de", "ea", "ab", "bc", "cd", "de"]
        );
        assert_eq!(three_squares.duos(Side::A)[5].position, 6);

        let single = Instance::from_strs("a", "a", ParseMode::Char).unwrap();
        assert!(single.duos(Side::A).is_empty());
    }
}

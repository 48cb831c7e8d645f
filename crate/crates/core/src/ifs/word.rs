use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Longest word accepted by cylinder queries.
pub const MAX_WORD_LEN: usize = 64;

/// A finite digit string `a₁…aₙ`, every digit ≥ 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<u64>);

impl Word {
    pub fn new(digits: Vec<u64>) -> Result<Self> {
        if digits.is_empty() {
            return Err(Error::InvalidWord("empty word".into()));
        }
        if digits.len() > MAX_WORD_LEN {
            return Err(Error::InvalidWord(format!("length {} exceeds {MAX_WORD_LEN}", digits.len())));
        }
        if let Some(pos) = digits.iter().position(|&a| a == 0) {
            return Err(Error::InvalidWord(format!("digit 0 at position {}", pos + 1)));
        }
        Ok(Word(digits))
    }

    pub fn digits(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> u64 {
        *self.0.last().expect("words are non-empty")
    }

    /// Word with `a` appended.
    pub fn extend(&self, a: u64) -> Result<Self> {
        let mut v = self.0.clone();
        v.push(a);
        Word::new(v)
    }

    /// Largest digit, for truncation checks.
    pub fn max_digit(&self) -> u64 {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let digits = s
            .split(['/', ','])
            .map(|p| p.trim().parse::<u64>().map_err(|e| Error::InvalidWord(format!("`{p}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Word::new(digits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let w: Word = "1/2/30".parse().unwrap();
        assert_eq!(w.digits(), &[1, 2, 30]);
        assert_eq!(w.to_string(), "1/2/30");
    }

    #[test]
    fn rejects_zero_and_empty() {
        assert!(matches!(Word::new(vec![1, 0]), Err(Error::InvalidWord(_))));
        assert!(Word::new(vec![]).is_err());
        assert!(Word::new(vec![1; 65]).is_err());
    }
}

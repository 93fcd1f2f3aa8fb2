//! Mapping between factor names and factor indices / exposure patterns.

use addodds::ExposurePattern;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorNames(Vec<String>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameError(pub String);

impl fmt::Display for NameError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FactorNames {
    pub fn new(names: Vec<String>) -> Result<Self, NameError> {
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() || n.contains('*') {
                return Err(NameError(format!("invalid factor name {n:?}")));
            }
            if names[..i].contains(n) {
                return Err(NameError(format!("factor name {n:?} repeated")));
            }
        }
        Ok(Self(names))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, index: usize) -> &str {
        &self.0[index]
    }

    pub fn as_slice(&self) -> &[String] {
        &self.0
    }

    pub fn index_of(&self, name: &str) -> Result<usize, NameError> {
        self.0.iter().position(|n| n == name).ok_or_else(|| NameError(format!("unknown factor {name:?}")))
    }

    /// `"a*b"` style name of a nonzero pattern.
    pub fn term(&self, w: &ExposurePattern) -> String {
        (0..w.len()).filter(|&j| w.get(j)).map(|j| self.get(j)).collect::<Vec<_>>().join("*")
    }
}

/// Parses `"a*b"` (any order) into the pattern with those factors on.
pub fn parse_term(names: &FactorNames, term: &str) -> Result<ExposurePattern, NameError> {
    let mut mask = 0u32;
    for part in term.split('*').map(str::trim) {
        let j = names.index_of(part)?;
        if mask >> j & 1 == 1 {
            return Err(NameError(format!("factor {part:?} repeated in term {term:?}")));
        }
        mask |= 1 << j;
    }
    ExposurePattern::from_mask(mask, names.len()).map_err(|e| NameError(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terms_round_trip() {
        let names = FactorNames::new(vec!["dr15".into(), "a2neg".into(), "smoke".into()]).unwrap();
        let w = parse_term(&names, "smoke * dr15").unwrap();
        assert_eq!(w.bits(), vec![1, 0, 1]);
        assert_eq!(names.term(&w), "dr15*smoke");
        assert!(parse_term(&names, "dr15*dr15").is_err());
        assert!(parse_term(&names, "age").is_err());
    }

    #[test]
    fn names_must_be_distinct_and_plain() {
        assert!(FactorNames::new(vec!["a".into(), "a".into()]).is_err());
        assert!(FactorNames::new(vec!["a*b".into()]).is_err());
    }
}

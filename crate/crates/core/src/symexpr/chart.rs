use std::fmt;

use crate::error::{Error, Result};

/// Coordinate chart: `dim` named coordinates, optionally extended by the
/// time variable `t`, which always takes variable index `dim`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Chart {
    names: Vec<String>,
    time: bool,
}

impl Chart {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        if names.is_empty() {
            return Err(Error::InvalidChart("dimension must be at least 1".into()));
        }
        for (i, name) in names.iter().enumerate() {
            if !is_identifier(name) {
                return Err(Error::InvalidChart(format!("`{name}` is not an identifier")));
            }
            if names[..i].contains(name) {
                return Err(Error::InvalidChart(format!("duplicate coordinate `{name}`")));
            }
        }
        Ok(Self { names, time: false })
    }

    /// Standard chart `x`, `y`, `z` (then `x4`, `x5`, ...) of dimension `n`.
    pub fn standard(n: usize) -> Self {
        let names: Vec<String> = (0..n)
            .map(|i| match i {
                0 => "x".to_string(),
                1 => "y".to_string(),
                2 => "z".to_string(),
                _ => format!("x{}", i + 1),
            })
            .collect();
        Self::new(&names).expect("standard names are valid")
    }

    /// Same coordinates, with `t` admitted as a parameter.
    pub fn with_time(&self) -> Result<Self> {
        if self.names.iter().any(|n| n == "t") {
            return Err(Error::InvalidChart("coordinate `t` clashes with the time variable".into()));
        }
        Ok(Self { names: self.names.clone(), time: true })
    }

    /// The chart of `M x R`: coordinates followed by `t` as a genuine coordinate.
    /// Expressions keep their variable indices under this extension.
    pub fn extended(&self) -> Result<Self> {
        let mut names = self.names.clone();
        if names.iter().any(|n| n == "t") {
            return Err(Error::InvalidChart("coordinate `t` clashes with the time variable".into()));
        }
        names.push("t".into());
        Ok(Self { names, time: false })
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn is_time_extended(&self) -> bool {
        self.time
    }

    pub fn time_index(&self) -> usize {
        self.names.len()
    }

    /// Number of values an evaluation point must carry.
    pub fn num_vars(&self) -> usize {
        self.names.len() + usize::from(self.time)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        if let Some(i) = self.names.iter().position(|n| n == name) {
            return Some(i);
        }
        (self.time && name == "t").then_some(self.names.len())
    }

    pub fn var_name(&self, index: usize) -> String {
        match self.names.get(index) {
            Some(n) => n.clone(),
            None if index == self.names.len() => "t".into(),
            None => format!("v{index}"),
        }
    }

    /// Charts are compatible when they share coordinates; the time flag
    /// only widens which expressions are admissible.
    pub fn compatible(&self, other: &Chart) -> bool {
        self.names == other.names
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.names.join(", "))?;
        if self.time {
            write!(f, " x t")?;
        }
        Ok(())
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

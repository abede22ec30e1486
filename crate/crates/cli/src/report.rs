use std::fmt::{self, Display};

/// Line-oriented `key=value` output.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Report {
    lines: Vec<String>,
    /// Set when an iterative method stopped before meeting its tolerance.
    pub nonconverged: Option<String>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn kv(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.lines.push(format!("{key}={value}"));
        self
    }

    /// Appends already formatted `key=value` lines.
    pub fn raw(&mut self, text: &str) -> &mut Self {
        self.lines.extend(text.lines().map(str::to_owned));
        self
    }
}

impl Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.lines.iter().try_for_each(|l| writeln!(f, "{l}"))
    }
}

/// Comma-joined floats.
pub fn floats(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

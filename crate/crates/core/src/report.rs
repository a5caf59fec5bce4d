//! Uniform result carrier for the structural checks. A check never panics on
//! a bad presentation; it accumulates violations, plus notes for things like
//! the bounds a finite verification actually used.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub name: &'static str,
    pub violations: Vec<String>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(name: &'static str) -> Self {
        Report { name, violations: Vec::new(), notes: Vec::new() }
    }

    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn fail(&mut self, detail: impl Into<String>) {
        self.violations.push(detail.into());
    }

    pub fn note(&mut self, detail: impl Into<String>) {
        self.notes.push(detail.into());
    }

    /// Folds another report's findings into this one, prefixing with its name.
    pub fn absorb(&mut self, other: Report) {
        for v in other.violations {
            self.violations.push(format!("{}: {}", other.name, v));
        }
        for n in other.notes {
            self.notes.push(format!("{}: {}", other.name, n));
        }
    }
}

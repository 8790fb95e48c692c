//! Itemized pass/fail reports.
//!
//! Verifiers never throw on a failed condition; they return a report naming
//! every check so a certificate can be emitted (and read) as a whole.

/// One checked condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportItem {
    pub label: String,
    pub passed: bool,
    /// Empty when there is nothing to add beyond the label.
    pub detail: String,
}

/// A titled list of checked conditions, plus free-form header notes stating
/// scope limitations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    title: String,
    notes: Vec<String>,
    items: Vec<ReportItem>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report {
            title: title.into(),
            notes: Vec::new(),
            items: Vec::new(),
        }
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn pass(&mut self, label: impl Into<String>) {
        self.items.push(ReportItem {
            label: label.into(),
            passed: true,
            detail: String::new(),
        });
    }

    pub fn fail(&mut self, label: impl Into<String>, detail: impl Into<String>) {
        self.items.push(ReportItem {
            label: label.into(),
            passed: false,
            detail: detail.into(),
        });
    }

    pub fn check(&mut self, label: impl Into<String>, passed: bool, detail: impl Into<String>) {
        if passed {
            self.pass(label);
        } else {
            self.fail(label, detail);
        }
    }

    pub fn title(&self) -> &str {
        &self.title
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub fn items(&self) -> &[ReportItem] {
        &self.items
    }

    /// True iff every item passed. An empty report is accepted.
    pub fn accepted(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportItem> {
        self.items.iter().filter(|i| !i.passed)
    }
}

impl std::fmt::Display for Report {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "{}: {}",
            self.title,
            if self.accepted() { "ACCEPT" } else { "REJECT" }
        )?;
        for note in &self.notes {
            writeln!(f, "  note: {note}")?;
        }
        for item in &self.items {
            if item.passed {
                writeln!(f, "  PASS {}", item.label)?;
            } else if item.detail.is_empty() {
                writeln!(f, "  FAIL {}", item.label)?;
            } else {
                writeln!(f, "  FAIL {}: {}", item.label, item.detail)?;
            }
        }
        Ok(())
    }
}

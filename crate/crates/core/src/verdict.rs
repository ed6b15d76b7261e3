use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceKind {
    /// pass iff `lhs <= rhs * (1 + tolerance)`
    Relative,
    /// pass iff `lhs <= rhs + tolerance`
    Absolute,
}

/// One checked inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub tolerance_kind: ToleranceKind,
    /// Unused fraction of the bound, `1 - lhs/rhs` (or `rhs - lhs` for
    /// absolute tolerances). Negative when the inequality is violated.
    pub slack: f64,
    /// False when the hypotheses of the inequality do not hold; such
    /// verdicts are reported but never count as failures.
    pub applicable: bool,
    pub pass: bool,
}

impl Verdict {
    pub fn relative(name: &str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let pass = lhs <= rhs + tolerance * rhs.abs();
        let slack = if rhs != 0.0 { 1.0 - lhs / rhs } else { -lhs };
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            tolerance,
            tolerance_kind: ToleranceKind::Relative,
            slack,
            applicable: true,
            pass,
        }
    }

    pub fn absolute(name: &str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            tolerance,
            tolerance_kind: ToleranceKind::Absolute,
            slack: rhs - lhs,
            applicable: true,
            pass: lhs <= rhs + tolerance,
        }
    }

    /// Marks the verdict as outside its hypotheses.
    pub fn when(mut self, applicable: bool) -> Self {
        self.applicable = applicable;
        if !applicable {
            self.pass = true;
        }
        self
    }

    /// True when applicable and violated.
    pub fn failed(&self) -> bool {
        self.applicable && !self.pass
    }
}

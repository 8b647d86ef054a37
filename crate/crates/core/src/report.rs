//! Report-style results shared by every validation routine.

use serde::{Deserialize, Serialize};

/// Machine-readable reason attached to a [`Violation`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    DualNotInvolution,
    DualEndpointMismatch,
    DualWeightMismatch,
    NonpositiveWeight,
    DanglingReference,
    DuplicateId,
    NotConnected,
    NotHomomorphism,
    InvalidPath,
    PathMismatch,
    NotPerfectMatching,
    Crossing,
    LabelRule,
    ZigzagSnake,
    ZigzagTrace,
    Unfair,
    EmptyFiber,
    UnmatchedWeightGroup,
    InvolutionBroken,
    NotIsomorphic,
    NotEquivalent,
    InconsistentCycle,
    DimensionSum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Violation {
    pub code: ViolationCode,
    pub ids: Vec<String>,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
}

impl Violation {
    pub fn new(code: ViolationCode, ids: Vec<String>, message: impl Into<String>) -> Self {
        Violation {
            code,
            ids,
            message: message.into(),
            residual: None,
        }
    }

    pub fn with_residual(mut self, residual: f64) -> Self {
        self.residual = Some(residual);
        self
    }
}

/// Outcome of a check. `ok` holds exactly when `violations` is empty;
/// warnings never affect `ok`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<Violation>,
}

impl ValidationReport {
    pub fn new() -> Self {
        ValidationReport {
            ok: true,
            violations: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn push(&mut self, violation: Violation) {
        self.violations.push(violation);
        self.ok = false;
    }

    pub fn warn(&mut self, warning: Violation) {
        self.warnings.push(warning);
    }

    pub fn extend(&mut self, other: ValidationReport) {
        for v in other.violations {
            self.push(v);
        }
        self.warnings.extend(other.warnings);
    }

    pub fn has_code(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }

    /// Largest residual carried by any violation, if any carries one.
    pub fn worst_residual(&self) -> Option<f64> {
        self.violations
            .iter()
            .filter_map(|v| v.residual)
            .fold(None, |acc, r| Some(acc.map_or(r, |a: f64| a.max(r))))
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.ok {
            write!(f, "ok")?;
        } else {
            write!(f, "{} violation(s)", self.violations.len())?;
            for v in &self.violations {
                write!(f, "\n  {:?} [{}]: {}", v.code, v.ids.join(", "), v.message)?;
            }
        }
        if !self.warnings.is_empty() {
            write!(f, "\n  ({} warning(s))", self.warnings.len())?;
        }
        Ok(())
    }
}

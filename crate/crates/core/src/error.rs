//! Crate-wide error type.

use thiserror::Error;

/// Violations of the quantum-number branching rules. These are data, not
/// failures: `qnum::validate` returns the full list so callers can report
/// every broken constraint at once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// j - l must be a nonnegative integer.
    RadialCountNegative { j: u32, l: u32 },
    /// A chain difference (m_{i-1} - m_i - kappa) must be even and >= 0.
    /// `node` is 1-based; node n-1 denotes the final constraint.
    ChainStep { node: usize, value: i64 },
    /// Label vector has the wrong length (expects n-2 entries, empty for n <= 2).
    LabelLength { expected: usize, got: usize },
    /// For n = 1 the angular label is fixed to l = kappa_1.
    OneDimLabel { l: u32, kappa: u32 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::RadialCountNegative { j, l } => {
                write!(f, "j - l = {} - {} is negative", j, l)
            }
            Violation::ChainStep { node, value } => write!(
                f,
                "chain step {} difference {} is not an even nonnegative integer",
                node, value
            ),
            Violation::LabelLength { expected, got } => {
                write!(f, "expected {} chain labels, got {}", expected, got)
            }
            Violation::OneDimLabel { l, kappa } => {
                write!(f, "for n = 1 the label l must equal kappa_1 ({} != {})", l, kappa)
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("log-gamma pole at nonpositive integer {0}")]
    Pole(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty spectrum: j = {j} below the minimum sum of barrier integers {min}")]
    EmptySpectrum { j: u32, min: u32 },

    #[error("operation not applicable: {0}")]
    NotApplicable(&'static str),

    #[error("closed form requires all barrier integers kappa_i = 0")]
    KappaNotZero,

    #[error("incoming and outgoing directions coincide (cosine {cosine}); forward direction excluded")]
    ForwardSingularity { cosine: f64 },

    #[error("quadrature not converged: doubling changed result by {err:e} > tolerance {tol:e}")]
    QuadratureNotConverged { err: f64, tol: f64 },

    #[error("stencil footprint does not fit: needs {needed} interior cells on axis {axis}, grid has {available}")]
    Footprint {
        axis: usize,
        needed: usize,
        available: usize,
    },

    #[error("grid axis {axis} starts at {min} inside the singular margin {margin}")]
    SingularMargin { axis: usize, min: f64, margin: f64 },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("asymptotic region too small: fit residual {residual:e} above threshold {threshold:e}")]
    AsymptoticRegionTooSmall { residual: f64, threshold: f64 },

    #[error("invalid quantum numbers: {}", format_violations(.0))]
    InvalidLabels(Vec<Violation>),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;

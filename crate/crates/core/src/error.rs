use std::fmt;

use thiserror::Error;

/// Why a partial function was undefined at the evaluated value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainReason {
    DivisionByZero,
    LogNonPositive,
    SqrtNonPositive,
    ComplexInRealContext,
}

impl fmt::Display for DomainReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainReason::DivisionByZero => "division by zero",
            DomainReason::LogNonPositive => "log of a nonpositive value",
            DomainReason::SqrtNonPositive => "sqrt of a nonpositive value",
            DomainReason::ComplexInRealContext => "complex value in a real evaluation",
        })
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {reason} at `{node}`")]
    Domain { reason: DomainReason, node: String },
    #[error("{0}")]
    Singular(String),
    #[error("derivative of order {needed} requested from a jet of order {available}")]
    Order { needed: usize, available: usize },
    #[error("map is not contact at this point (residual {residual:.3e})")]
    NotContact { residual: f64 },
    #[error("horizontal Jacobian is not positive ({lambda:.6e})")]
    NotPositive { lambda: f64 },
    #[error("not harmonic: {0}")]
    NotHarmonic(String),
    #[error("bad potential: {0}")]
    BadPotential(String),
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("no single constant fits identity `{id}`: {detail}")]
    NoConsistentConstant { id: String, detail: String },
    #[error("shape error: {0}")]
    Shape(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(reason: DomainReason, node: impl Into<String>) -> Self {
        Error::Domain {
            reason,
            node: node.into(),
        }
    }

    /// Attach the offending expression node to a domain error raised deeper down.
    pub(crate) fn at_node(self, node: &dyn fmt::Display) -> Self {
        match self {
            Error::Domain { reason, node: n }
                if matches!(n.as_str(), "log" | "sqrt" | "division" | "constant") =>
            {
                Error::Domain {
                    reason,
                    node: node.to_string(),
                }
            }
            other => other,
        }
    }

    pub(crate) fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            pos,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

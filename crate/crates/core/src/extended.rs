use std::fmt;

use serde::{Serialize, Serializer};

/// A real number or `+∞`, as taken by maximal weights and curve energies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInfinity,
}

impl ExtReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::PosInfinity => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// Sum with `+∞` absorbing.
    pub fn add(self, other: ExtReal) -> ExtReal {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::PosInfinity,
        }
    }

    pub fn scale(self, s: f64) -> ExtReal {
        debug_assert!(s > 0.0);
        match self {
            ExtReal::Finite(a) => ExtReal::Finite(a * s),
            ExtReal::PosInfinity => ExtReal::PosInfinity,
        }
    }

    pub fn lt(self, v: f64) -> bool {
        matches!(self, ExtReal::Finite(a) if a < v)
    }

    /// Agreement within `tol`, two infinities agree.
    pub fn close_to(self, other: ExtReal, tol: f64) -> bool {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => (a - b).abs() <= tol,
            (ExtReal::PosInfinity, ExtReal::PosInfinity) => true,
            _ => false,
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInfinity => f.write_str("+inf"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => s.serialize_f64(*v),
            ExtReal::PosInfinity => s.serialize_str("+inf"),
        }
    }
}

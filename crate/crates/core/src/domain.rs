use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Supported base domains: the circle identified with `[0, 2*pi)`, the unit
/// interval `[0, 1]`, and the symmetric interval `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Domain {
    Circle2Pi,
    UnitInterval,
    SymInterval,
}

impl Domain {
    pub fn endpoints(self) -> (f64, f64) {
        match self {
            Domain::Circle2Pi => (0.0, TAU),
            Domain::UnitInterval => (0.0, 1.0),
            Domain::SymInterval => (-1.0, 1.0),
        }
    }

    pub fn length(self) -> f64 {
        let (a, b) = self.endpoints();
        b - a
    }

    pub fn is_circle(self) -> bool {
        matches!(self, Domain::Circle2Pi)
    }

    /// Whether `x` is a valid evaluation point. On the circle every real is
    /// valid (it is reduced mod `2*pi`).
    pub fn contains(self, x: f64) -> bool {
        if self.is_circle() {
            x.is_finite()
        } else {
            let (a, b) = self.endpoints();
            x >= a && x <= b
        }
    }

    /// Reduce `x` into the fundamental domain. Identity on intervals.
    pub fn reduce(self, x: f64) -> f64 {
        if self.is_circle() {
            let mut y = x % TAU;
            if y < 0.0 {
                y += TAU;
            }
            // x % TAU can round to TAU itself for x slightly below a period
            if y >= TAU {
                y = 0.0;
            }
            y
        } else {
            x
        }
    }
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Domain::Circle2Pi => "Circle2Pi",
            Domain::UnitInterval => "UnitInterval",
            Domain::SymInterval => "SymInterval",
        };
        f.write_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduce_wraps_negative() {
        let d = Domain::Circle2Pi;
        assert!((d.reduce(-0.5) - (TAU - 0.5)).abs() < 1e-15);
        assert_eq!(d.reduce(0.0), 0.0);
        assert!(d.reduce(TAU) < 1e-15);
    }

    #[test]
    fn interval_containment() {
        assert!(Domain::UnitInterval.contains(0.0));
        assert!(Domain::UnitInterval.contains(1.0));
        assert!(!Domain::UnitInterval.contains(1.0 + 1e-12));
        assert!(Domain::SymInterval.contains(-1.0));
        assert!(Domain::Circle2Pi.contains(123.0));
    }
}

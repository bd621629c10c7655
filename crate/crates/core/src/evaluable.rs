use crate::approx::Expansion;
use crate::domain::Domain;
use crate::piecewise::{FunError, PiecewisePoly};
use std::fmt;
use std::sync::Arc;

/// Declared regularity of a black-box evaluator, used to pick quadrature
/// strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothnessHint {
    /// Analytic or many times differentiable away from declared split points.
    Smooth,
    /// Continuous with isolated kinks.
    PiecewiseSmooth,
    /// May jump; integrate defensively.
    Rough,
}

/// Black-box point evaluator with a declared domain and smoothness hint.
/// `split_hints` lists known kink/jump locations so the quadrature can cut
/// panels there.
#[derive(Clone)]
pub struct PointFunction {
    pub domain: Domain,
    pub smoothness: SmoothnessHint,
    pub split_hints: Vec<f64>,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl PointFunction {
    pub fn new(
        domain: Domain,
        smoothness: SmoothnessHint,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            domain,
            smoothness,
            split_hints: Vec::new(),
            f: Arc::new(f),
        }
    }

    pub fn with_split_hints(mut self, hints: Vec<f64>) -> Self {
        self.split_hints = hints;
        self
    }

    pub fn call(&self, x: f64) -> f64 {
        (self.f)(x)
    }
}

impl fmt::Debug for PointFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PointFunction")
            .field("domain", &self.domain)
            .field("smoothness", &self.smoothness)
            .field("split_hints", &self.split_hints)
            .finish_non_exhaustive()
    }
}

/// The general function abstraction consumed by norms and moduli.
#[derive(Debug, Clone)]
pub enum Evaluable {
    Piecewise(PiecewisePoly),
    Expansion(Expansion),
    Point(PointFunction),
}

impl Evaluable {
    pub fn domain(&self) -> Domain {
        match self {
            Evaluable::Piecewise(f) => f.domain,
            Evaluable::Expansion(e) => e.space.domain(),
            Evaluable::Point(p) => p.domain,
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64, FunError> {
        if !self.domain().contains(x) {
            return Err(FunError::OutOfDomain {
                domain: self.domain(),
                x,
            });
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluation without the domain check (circle inputs are reduced).
    pub fn eval_unchecked(&self, x: f64) -> f64 {
        match self {
            Evaluable::Piecewise(f) => f.eval_unchecked(x),
            Evaluable::Expansion(e) => e.eval_unchecked(x),
            Evaluable::Point(p) => p.call(p.domain.reduce(x)),
        }
    }

    /// Exact piecewise-polynomial form when one exists (piecewise input, or a
    /// spline expansion).
    pub fn as_piecewise(&self) -> Option<PiecewisePoly> {
        match self {
            Evaluable::Piecewise(f) => Some(f.clone()),
            Evaluable::Expansion(e) => e.to_piecewise(),
            Evaluable::Point(_) => None,
        }
    }

    /// Known kink/breakpoint locations, used as panel cuts by the quadrature.
    pub fn split_hints(&self) -> Vec<f64> {
        match self {
            Evaluable::Piecewise(f) => f.breakpoints.clone(),
            Evaluable::Expansion(_) => Vec::new(),
            Evaluable::Point(p) => p.split_hints.clone(),
        }
    }
}

impl From<PiecewisePoly> for Evaluable {
    fn from(f: PiecewisePoly) -> Self {
        Evaluable::Piecewise(f)
    }
}

impl From<Expansion> for Evaluable {
    fn from(e: Expansion) -> Self {
        Evaluable::Expansion(e)
    }
}

impl From<PointFunction> for Evaluable {
    fn from(p: PointFunction) -> Self {
        Evaluable::Point(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_function_domain_check() {
        let p = PointFunction::new(Domain::UnitInterval, SmoothnessHint::Smooth, |x| x * x);
        let e = Evaluable::Point(p);
        assert_eq!(e.eval(0.5).unwrap(), 0.25);
        assert!(e.eval(2.0).is_err());
    }

    #[test]
    fn circle_point_function_reduces() {
        let p = PointFunction::new(Domain::Circle2Pi, SmoothnessHint::Smooth, |x| x);
        let e = Evaluable::Point(p);
        let v = e.eval(std::f64::consts::TAU + 1.0).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }
}

//! Closed-form test families: the periodic ramp/plateau function, its
//! repeated periodic integrals, and interval analogues built from a ramp.

use crate::domain::Domain;
use crate::piecewise::{FunError, PiecewisePoly};
use std::f64::consts::{PI, TAU};

/// Piecewise-linear plateau on the circle: rises `x/eps` on `[0, eps)`, holds
/// `1` on `[eps, pi - eps)`, falls `(pi - x)/eps` on `[pi - eps, pi)`, and is
/// `0` on `[pi, 2*pi)`. Requires `0 < eps < pi/2`.
pub fn phi_eps(eps: f64) -> Result<PiecewisePoly, FunError> {
    if !(eps > 0.0 && eps < PI / 2.0) {
        return Err(FunError::BadEpsilon(eps));
    }
    PiecewisePoly::new(
        Domain::Circle2Pi,
        vec![0.0, eps, PI - eps, PI, TAU],
        vec![
            vec![0.0, 1.0 / eps],
            vec![1.0],
            vec![1.0, -1.0 / eps],
            vec![0.0],
        ],
    )
}

/// Mean-zero shift of [`phi_eps`]: `phi_eps - (pi - eps)/(2*pi)`.
pub fn phi_eps_zero(eps: f64) -> Result<PiecewisePoly, FunError> {
    let f = phi_eps(eps)?;
    let m = f.mean();
    let mut out = f;
    for c in &mut out.pieces {
        c[0] -= m;
    }
    Ok(out)
}

/// `r`-th member of the periodic family: `f_1 = phi_eps_zero` and
/// `f_r = periodic_integral(f_{r-1})` for `r >= 2`. The function is
/// `C^{r-2}`-smooth on the circle and its `(r-1)`-st derivative equals
/// `phi_eps_zero`.
pub fn f_eps_r(eps: f64, r: u32) -> Result<PiecewisePoly, FunError> {
    assert!(r >= 1, "order must be at least 1");
    let mut f = phi_eps_zero(eps)?;
    for _ in 1..r {
        f = f.periodic_integral()?;
    }
    Ok(f)
}

/// Interval ramp: `0` left of `center`, linear up to `1` over `[center,
/// center + eps]`, then `1`. The kink magnitudes scale like `1/eps`.
pub fn ramp(domain: Domain, center: f64, eps: f64) -> Result<PiecewisePoly, FunError> {
    let (a, b) = domain.endpoints();
    if !(eps > 0.0 && center > a && center + eps < b) {
        return Err(FunError::BadEpsilon(eps));
    }
    PiecewisePoly::new(
        domain,
        vec![a, center, center + eps, b],
        vec![vec![0.0], vec![0.0, 1.0 / eps], vec![1.0]],
    )
}

/// `r`-th member of the interval family: `g_1 = ramp` and `g_r` its repeated
/// plain antiderivative. `g_r in C^{r-2}` with `g_r^{(r-1)} = ramp` and
/// `g_r^{(r)}` piecewise constant in `{0, 1/eps}`.
pub fn ramp_r(domain: Domain, center: f64, eps: f64, r: u32) -> Result<PiecewisePoly, FunError> {
    assert!(r >= 1, "order must be at least 1");
    let mut f = ramp(domain, center, eps)?;
    for _ in 1..r {
        f = f.antiderivative()?;
    }
    Ok(f)
}

/// `|x|` on `[-1, 1]`.
pub fn abs_x() -> PiecewisePoly {
    PiecewisePoly::new(
        Domain::SymInterval,
        vec![-1.0, 0.0, 1.0],
        vec![vec![1.0, -1.0], vec![0.0, 1.0]],
    )
    .unwrap()
}

/// Default off-grid ramp center so uniform knot sequences never hit the kink.
pub fn offgrid_center(domain: Domain) -> f64 {
    let (a, b) = domain.endpoints();
    a + (b - a) * (1.0 / 7.0f64.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn phi_values_match_piecewise_table() {
        let eps = 0.1;
        let f = phi_eps(eps).unwrap();
        // the ramp slope is 1/eps, so values at the kinks carry one ulp of
        // rounding
        assert_relative_eq!(f.eval(0.05).unwrap(), 0.5, max_relative = 1e-14);
        assert_relative_eq!(f.eval(eps).unwrap(), 1.0, max_relative = 1e-14);
        assert_eq!(f.eval(PI - eps).unwrap(), 1.0); // left-limit convention
        assert_relative_eq!(f.eval(PI).unwrap(), 0.0, epsilon = 1e-14);
        assert_eq!(f.eval(PI + 1.0).unwrap(), 0.0);
    }

    #[test]
    fn phi_mean_is_closed_form() {
        for eps in [0.05, 0.3, 1.0] {
            let f = phi_eps(eps).unwrap();
            // trapezoid area: eps/2 + (pi - 2 eps) + eps/2 = pi - eps
            assert_relative_eq!(f.integral(), PI - eps, max_relative = 1e-14);
            assert_relative_eq!(f.mean(), (PI - eps) / TAU, max_relative = 1e-14);
            assert!(phi_eps_zero(eps).unwrap().mean().abs() < 1e-14);
        }
    }

    #[test]
    fn phi_rejects_bad_epsilon() {
        assert!(phi_eps(0.0).is_err());
        assert!(phi_eps(PI / 2.0).is_err());
        assert!(phi_eps(-1.0).is_err());
    }

    #[test]
    fn family_order_one_is_phi_zero() {
        let eps = 0.2;
        assert_eq!(f_eps_r(eps, 1).unwrap(), phi_eps_zero(eps).unwrap());
    }

    #[test]
    fn family_derivative_chain() {
        let eps = 0.05;
        for r in 2..=4u32 {
            let f = f_eps_r(eps, r).unwrap();
            assert!(f.mean().abs() < 1e-12);
            assert!(f.is_continuous(1e-12));
            let mut d = f.clone();
            for _ in 0..r - 1 {
                d = d.differentiate();
            }
            let phi0 = phi_eps_zero(eps).unwrap();
            let mut max_err = 0.0f64;
            for i in 0..1000 {
                let x = TAU * (i as f64 + 0.5) / 1000.0;
                max_err = max_err.max((d.eval(x).unwrap() - phi0.eval(x).unwrap()).abs());
            }
            assert!(max_err < 1e-10, "order {r}: max err {max_err:e}");
            // one more derivative: piecewise constant in {1/eps, 0, -1/eps}
            let dd = d.differentiate();
            for x in [eps / 2.0, 1.0, PI - eps / 2.0, 4.0] {
                let v = dd.eval(x).unwrap();
                let ok = [1.0 / eps, 0.0, -1.0 / eps]
                    .iter()
                    .any(|&t| (v - t).abs() < 1e-9 / eps);
                assert!(ok, "unexpected slope value {v}");
            }
        }
    }

    #[test]
    fn ramp_family_basics() {
        let c = offgrid_center(Domain::UnitInterval);
        let g = ramp(Domain::UnitInterval, c, 1e-2).unwrap();
        assert_eq!(g.eval(0.0).unwrap(), 0.0);
        assert_eq!(g.eval(1.0).unwrap(), 1.0);
        assert_relative_eq!(g.eval(c + 5e-3).unwrap(), 0.5, max_relative = 1e-12);
        let g3 = ramp_r(Domain::UnitInterval, c, 1e-2, 3).unwrap();
        let back = g3.differentiate().differentiate();
        for x in [0.1, c + 3e-3, 0.9] {
            assert_relative_eq!(
                back.eval(x).unwrap(),
                g.eval(x).unwrap(),
                epsilon = 1e-12,
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn abs_x_values() {
        let f = abs_x();
        assert_eq!(f.eval(-0.5).unwrap(), 0.5);
        assert_eq!(f.eval(0.75).unwrap(), 0.75);
        assert_eq!(f.eval(0.0).unwrap(), 0.0);
    }
}

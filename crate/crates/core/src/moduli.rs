//! Finite differences and moduli of smoothness: the classical modulus on the
//! circle and on intervals, the Ditzian–Totik modulus with step `h*phi(x)`,
//! the weighted main-part modulus on the shrunken interval, and dyadic
//! modulus integrals with monotone bracketing.

use crate::domain::Domain;
use crate::evaluable::{Evaluable, PointFunction, SmoothnessHint};
use crate::piecewise::FunError;
use crate::quasinorm::{
    lp_quasinorm, lp_quasinorm_combination, weighted_lp_quasinorm, NormError, PNorm,
    QuadratureSpec,
};
use crate::approx::{Expansion, SpaceKind};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Discretization of `sup_{0 < h <= delta}`: a logarithmic grid of `h_grid`
/// step values spanning eight octaves below `delta`, always including
/// `delta` itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulusSpec {
    pub h_grid: usize,
    pub quad: QuadratureSpec,
}

impl Default for ModulusSpec {
    fn default() -> Self {
        Self {
            h_grid: 64,
            quad: QuadratureSpec::default(),
        }
    }
}

impl ModulusSpec {
    pub fn new(h_grid: usize, quad: QuadratureSpec) -> Self {
        assert!(h_grid >= 8, "h grid needs at least 8 points");
        Self { h_grid, quad }
    }

    /// The h grid in increasing order, ending exactly at `delta`.
    pub fn grid(&self, delta: f64) -> Vec<f64> {
        let g = self.h_grid.max(8);
        (0..g)
            .map(|i| {
                if i + 1 == g {
                    delta
                } else {
                    delta * 2f64.powf(-8.0 * (g - 1 - i) as f64 / (g - 1) as f64)
                }
            })
            .collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModulusError {
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    Fun(#[from] FunError),
    #[error("step delta={delta} too large for order {r} on an interval of length {len}")]
    BadStep { delta: f64, r: usize, len: f64 },
    #[error("main-part interval degenerates: 2 r^2 delta^2 = {shrink} >= 1")]
    DegenerateInterval { shrink: f64 },
    #[error("modulus integral diverges; truncated bracket [{lower:e}, {upper:e}]")]
    Diverging { lower: f64, upper: f64 },
}

/// Binomial coefficients of one row, exact in f64 for the orders used here.
fn binomials(r: usize) -> Vec<f64> {
    let mut b = vec![1.0; r + 1];
    for k in 1..=r {
        b[k] = b[k - 1] * (r - k + 1) as f64 / k as f64;
    }
    b
}

/// Forward difference `sum_{v=0}^r binom(r,v) (-1)^v f(x + v h)`; order zero
/// returns `f(x)`.
pub fn finite_difference(f: &Evaluable, r: usize, h: f64, x: f64) -> Result<f64, FunError> {
    let b = binomials(r);
    let mut acc = 0.0;
    for (v, &bv) in b.iter().enumerate() {
        let arg = x + v as f64 * h;
        let sign = if v % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * bv * f.eval(arg)?;
    }
    Ok(acc)
}

/// Interval of integration for the order-`r` difference with step `h`:
/// `[a, b - r h]` on intervals, the full period on the circle.
pub fn difference_interval(domain: Domain, r: usize, h: f64) -> (f64, f64) {
    let (a, b) = domain.endpoints();
    if domain.is_circle() {
        (a, b)
    } else {
        (a, b - r as f64 * h)
    }
}

/// `|| Delta_h^r f ||_{L_p(A_rh)}`, with the difference built exactly for
/// piecewise/spline/trig inputs and as a black-box sum otherwise.
pub fn difference_norm(
    f: &Evaluable,
    r: usize,
    h: f64,
    p: PNorm,
    quad: &QuadratureSpec,
) -> Result<f64, ModulusError> {
    let domain = f.domain();
    let (lo, hi) = difference_interval(domain, r, h);
    if hi <= lo {
        return Err(ModulusError::BadStep {
            delta: h,
            r,
            len: domain.length(),
        });
    }
    let b = binomials(r);
    let terms: Vec<(f64, f64)> = b
        .iter()
        .enumerate()
        .map(|(v, &bv)| {
            let sign = if v % 2 == 0 { 1.0 } else { -1.0 };
            (sign * bv, v as f64 * h)
        })
        .collect();
    if let Some(pw) = f.as_piecewise() {
        let comb = pw.combine_shifted(&terms);
        return Ok(lp_quasinorm_combination(&comb, p, lo, hi, quad)?);
    }
    if let Evaluable::Expansion(e) = f {
        if let SpaceKind::Trig { .. } = e.space.kind {
            let diff = trig_difference(e, &terms);
            return Ok(lp_quasinorm(&Evaluable::Expansion(diff), p, (lo, hi), quad)?);
        }
    }
    // black-box fallback
    let fc = f.clone();
    let terms2 = terms.clone();
    let mut hints: Vec<f64> = Vec::new();
    for hint in f.split_hints() {
        for &(_, s) in &terms {
            let t = domain.reduce(hint - s);
            if t > lo && t < hi {
                hints.push(t);
            }
        }
    }
    let field = PointFunction::new(domain, SmoothnessHint::PiecewiseSmooth, move |x| {
        terms2
            .iter()
            .map(|&(c, s)| c * fc.eval_unchecked(x + s))
            .sum()
    })
    .with_split_hints(hints);
    Ok(lp_quasinorm(&Evaluable::Point(field), p, (lo, hi), quad)?)
}

/// Exact shifted combination of a trigonometric expansion: frequency `k`
/// picks up the rotation `theta = k s` per shift `s`.
fn trig_difference(e: &Expansion, terms: &[(f64, f64)]) -> Expansion {
    let SpaceKind::Trig { n } = e.space.kind else {
        unreachable!()
    };
    let mut out = Expansion::zero(e.space);
    for k in 1..=n {
        let (a, b) = (e.coeffs[2 * k - 1], e.coeffs[2 * k]);
        let mut an = 0.0;
        let mut bn = 0.0;
        for &(w, s) in terms {
            let (sin_t, cos_t) = (k as f64 * s).sin_cos();
            an += w * (a * cos_t + b * sin_t);
            bn += w * (b * cos_t - a * sin_t);
        }
        out.coeffs[2 * k - 1] = an;
        out.coeffs[2 * k] = bn;
    }
    out.coeffs[0] = e.coeffs[0] * terms.iter().map(|&(w, _)| w).sum::<f64>();
    out
}

/// Value and maximizing step of a discretized modulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulusResult {
    pub value: f64,
    pub h_at_max: f64,
}

fn max_over_grid(
    grid: &[f64],
    eval: impl Fn(f64) -> Result<f64, ModulusError> + Sync,
) -> Result<ModulusResult, ModulusError> {
    let values: Result<Vec<f64>, ModulusError> =
        grid.par_iter().map(|&h| eval(h)).collect();
    let values = values?;
    let mut best = ModulusResult {
        value: 0.0,
        h_at_max: grid.first().copied().unwrap_or(0.0),
    };
    for (i, &v) in values.iter().enumerate() {
        if v > best.value {
            best = ModulusResult {
                value: v,
                h_at_max: grid[i],
            };
        }
    }
    Ok(best)
}

/// Classical modulus of smoothness `omega_r(f, delta)_p`: maximum of the
/// difference norms over the h grid.
pub fn modulus(
    f: &Evaluable,
    r: usize,
    delta: f64,
    p: PNorm,
    spec: &ModulusSpec,
) -> Result<ModulusResult, ModulusError> {
    assert!(r >= 1, "order must be at least 1");
    assert!(delta > 0.0, "delta must be positive");
    let domain = f.domain();
    if !domain.is_circle() && delta > domain.length() / r as f64 {
        return Err(ModulusError::BadStep {
            delta,
            r,
            len: domain.length(),
        });
    }
    let grid = spec.grid(delta);
    max_over_grid(&grid, |h| difference_norm(f, r, h, p, &spec.quad))
}

/// Difference norms along an explicit h grid; used by checks that need
/// nested grids (cumulative maxima stay exactly monotone).
pub fn difference_norms_on_grid(
    f: &Evaluable,
    r: usize,
    grid: &[f64],
    p: PNorm,
    quad: &QuadratureSpec,
) -> Result<Vec<f64>, ModulusError> {
    grid.par_iter()
        .map(|&h| difference_norm(f, r, h, p, quad))
        .collect()
}

/// `phi(x) = sqrt(1 - x^2)`.
pub fn phi(x: f64) -> f64 {
    (1.0 - x * x).max(0.0).sqrt()
}

/// Half-width of the admissible set of the symmetric difference with step
/// `h*phi`: the set is `[-x*, x*]` with `x* = (1 - c^2)/(1 + c^2)`,
/// `c = r h / 2`; `None` when it degenerates (`c >= 1`).
pub fn dt_admissible_bound(r: usize, h: f64) -> Option<f64> {
    let c = 0.5 * r as f64 * h;
    if c >= 1.0 {
        None
    } else {
        Some((1.0 - c * c) / (1.0 + c * c))
    }
}

/// Symmetric difference with position-dependent step `h*phi(x)`; zero when
/// `x +- (r/2) h phi(x)` leaves `[-1, 1]` (in particular at `x = +-1`).
pub fn dt_difference(f: &Evaluable, r: usize, h: f64, x: f64) -> f64 {
    assert!((-1.0..=1.0).contains(&x), "|x| <= 1 required");
    let step = h * phi(x);
    let c = 0.5 * r as f64 * step;
    if x + c > 1.0 || x - c < -1.0 {
        return 0.0;
    }
    let b = binomials(r);
    let mut acc = 0.0;
    for (k, &bk) in b.iter().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let arg = (x + (0.5 * r as f64 - k as f64) * step).clamp(-1.0, 1.0);
        acc += sign * bk * f.eval_unchecked(arg);
    }
    acc
}

/// The symmetric-difference field as a black-box evaluable with the
/// admissibility boundary and mapped kink positions as split hints.
fn dt_field(f: &Evaluable, r: usize, h: f64) -> Evaluable {
    let mut hints = Vec::new();
    if let Some(xs) = dt_admissible_bound(r, h) {
        hints.push(-xs);
        hints.push(xs);
        // kinks of f pulled back through x + alpha*phi(x) = beta
        for beta in f.split_hints() {
            for k in 0..=r {
                let alpha = (0.5 * r as f64 - k as f64) * h;
                if alpha == 0.0 {
                    hints.push(beta);
                    continue;
                }
                let a2 = alpha * alpha;
                let disc = a2 * (1.0 + a2 - beta * beta);
                if disc < 0.0 {
                    continue;
                }
                let sq = disc.sqrt();
                for root in [(beta + sq) / (1.0 + a2), (beta - sq) / (1.0 + a2)] {
                    if root.abs() < xs {
                        hints.push(root);
                    }
                }
            }
        }
    }
    let fc = f.clone();
    Evaluable::Point(
        PointFunction::new(Domain::SymInterval, SmoothnessHint::PiecewiseSmooth, move |x| {
            dt_difference(&fc, r, h, x)
        })
        .with_split_hints(hints),
    )
}

/// Ditzian–Totik modulus `omega_r^phi(f, delta)_p` over `[-1, 1]`.
pub fn dt_modulus(
    f: &Evaluable,
    r: usize,
    delta: f64,
    p: PNorm,
    spec: &ModulusSpec,
) -> Result<ModulusResult, ModulusError> {
    assert!(r >= 1 && delta > 0.0);
    assert_eq!(f.domain(), Domain::SymInterval);
    let grid = spec.grid(delta);
    max_over_grid(&grid, |h| {
        if dt_admissible_bound(r, h).is_none() {
            return Ok(0.0);
        }
        let field = dt_field(f, r, h);
        Ok(lp_quasinorm(&field, p, (-1.0, 1.0), &spec.quad)?)
    })
}

/// Weighted main-part modulus `Omega_r^phi(f, delta)_{p, phi^sigma}`: the
/// weighted norm of the symmetric difference over
/// `[-1 + 2 r^2 h^2, 1 - 2 r^2 h^2]`.
pub fn main_part_modulus(
    f: &Evaluable,
    r: usize,
    delta: f64,
    p: PNorm,
    sigma: f64,
    spec: &ModulusSpec,
) -> Result<ModulusResult, ModulusError> {
    assert!(r >= 1 && delta > 0.0);
    assert_eq!(f.domain(), Domain::SymInterval);
    let shrink = 2.0 * (r * r) as f64 * delta * delta;
    if shrink >= 1.0 {
        return Err(ModulusError::DegenerateInterval { shrink });
    }
    let grid = spec.grid(delta);
    max_over_grid(&grid, |h| {
        let s = 2.0 * (r * r) as f64 * h * h;
        let field = dt_field(f, r, h);
        Ok(weighted_lp_quasinorm(
            &field,
            p,
            sigma,
            (-1.0 + s, 1.0 - s),
            &spec.quad,
        )?)
    })
}

/// Which modulus drives a modulus integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModulusKind {
    Classical,
    DitzianTotik,
}

/// Bracketed dyadic estimate of `(int_0^delta omega_r(f,t)_p^p t^{-a} dt)^{1/p}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulusIntegral {
    /// midpoint of the bracket, already raised to `1/p`
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    /// geometric tail ratio of the block sums (diagnostic)
    pub tail_ratio: f64,
}

const DYADIC_LEVELS: usize = 20;

/// Dyadic bracketing of the modulus integral. The modulus is nondecreasing in
/// `t`, so on each `[t_{j+1}, t_j]` the integrand is bracketed by its values
/// at the endpoints; the tail below `t_J` is extrapolated geometrically from
/// the block-sum decay and the whole estimate errors out as `Diverging` when
/// the last block sums fail the ratio test.
pub fn modulus_integral(
    f: &Evaluable,
    r: usize,
    p: PNorm,
    a_exp: f64,
    delta: f64,
    spec: &ModulusSpec,
    kind: ModulusKind,
) -> Result<ModulusIntegral, ModulusError> {
    assert!(delta > 0.0);
    let per_octave = (spec.h_grid / 8).max(4);
    let octaves = DYADIC_LEVELS + 8;
    let total = per_octave * octaves;
    // lattice: h_i = delta * 2^{-i/per_octave}, descending; t_j sits at i = j*per_octave
    let lattice: Vec<f64> = (0..=total)
        .map(|i| delta * 2f64.powf(-(i as f64) / per_octave as f64))
        .collect();
    let norms: Result<Vec<f64>, ModulusError> = lattice
        .par_iter()
        .map(|&h| match kind {
            ModulusKind::Classical => difference_norm(f, r, h, p, &spec.quad),
            ModulusKind::DitzianTotik => {
                if dt_admissible_bound(r, h).is_none() {
                    Ok(0.0)
                } else {
                    let field = dt_field(f, r, h);
                    Ok(lp_quasinorm(&field, p, (-1.0, 1.0), &spec.quad)?)
                }
            }
        })
        .collect();
    let norms = norms?;
    // omega(t_j) = max over lattice steps <= t_j = suffix maximum
    let mut suffix = norms.clone();
    for i in (0..suffix.len() - 1).rev() {
        suffix[i] = suffix[i].max(suffix[i + 1]);
    }
    let omega = |j: usize| suffix[j * per_octave];

    let pp = p.p();
    let seg_integral = |tl: f64, th: f64| -> f64 {
        if (a_exp - 1.0).abs() < 1e-12 {
            (th / tl).ln()
        } else {
            (th.powf(1.0 - a_exp) - tl.powf(1.0 - a_exp)) / (1.0 - a_exp)
        }
    };
    let mut lower = 0.0;
    let mut upper = 0.0;
    let mut lower_blocks = Vec::with_capacity(DYADIC_LEVELS);
    let mut last_upper_block = 0.0;
    for j in 0..DYADIC_LEVELS {
        let tj = delta * 0.5f64.powi(j as i32);
        let tj1 = 0.5 * tj;
        let seg = seg_integral(tj1, tj);
        let lo_b = omega(j + 1).powf(pp) * seg;
        let up_b = omega(j).powf(pp) * seg;
        lower += lo_b;
        upper += up_b;
        lower_blocks.push(lo_b);
        last_upper_block = up_b;
    }
    // ratio test over the last 5 dyadic levels
    let tail_window = &lower_blocks[DYADIC_LEVELS - 6..];
    let mut ratios = Vec::new();
    for w in tail_window.windows(2) {
        if w[0] > 0.0 {
            ratios.push(w[1] / w[0]);
        }
    }
    let growth = if ratios.is_empty() {
        0.0
    } else {
        ratios.iter().product::<f64>().powf(1.0 / ratios.len() as f64)
    };
    if growth >= 1.0 && lower_blocks[DYADIC_LEVELS - 1] > 0.0 {
        return Err(ModulusError::Diverging {
            lower: lower.powf(1.0 / pp),
            upper: upper.powf(1.0 / pp),
        });
    }
    let tail_up = if growth > 0.0 {
        last_upper_block * growth / (1.0 - growth)
    } else {
        0.0
    };
    upper += tail_up;
    let mid = 0.5 * (lower + upper);
    Ok(ModulusIntegral {
        value: mid.powf(1.0 / pp),
        lower: lower.powf(1.0 / pp),
        upper: upper.powf(1.0 / pp),
        tail_ratio: growth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;
    use crate::piecewise::{random_piecewise, PiecewisePoly};
    use approx::assert_relative_eq;

    fn spec() -> ModulusSpec {
        ModulusSpec {
            h_grid: 64,
            quad: QuadratureSpec {
                base_panels: 256,
                refinement: 6,
                rel_tol: 1e-5,
            },
        }
    }

    fn linear_unit() -> Evaluable {
        PiecewisePoly::from_coeffs(Domain::UnitInterval, vec![0.0, 1.0])
            .unwrap()
            .into()
    }

    #[test]
    fn difference_of_linear() {
        let f = linear_unit();
        for x in [0.0, 0.3, 0.6] {
            let v = finite_difference(&f, 1, 0.2, x).unwrap();
            assert_relative_eq!(v, -0.2, max_relative = 1e-14);
        }
    }

    #[test]
    fn difference_annihilates_low_degree() {
        let f: Evaluable = random_piecewise(4, 1, 2, Domain::UnitInterval).into();
        for x in [0.0, 0.1, 0.4] {
            let v = finite_difference(&f, 3, 0.05, x).unwrap();
            assert!(v.abs() < 1e-10);
        }
    }

    #[test]
    fn second_difference_of_square() {
        let f: Evaluable = PiecewisePoly::from_coeffs(Domain::UnitInterval, vec![0.0, 0.0, 1.0])
            .unwrap()
            .into();
        let v = finite_difference(&f, 2, 0.1, 0.3).unwrap();
        assert_relative_eq!(v, 0.02, max_relative = 1e-12);
    }

    #[test]
    fn difference_out_of_domain() {
        let f = linear_unit();
        assert!(finite_difference(&f, 2, 0.3, 0.5).is_err());
    }

    #[test]
    fn modulus_of_constant_vanishes() {
        let f: Evaluable = PiecewisePoly::constant(Domain::Circle2Pi, 3.0).into();
        let m = modulus(&f, 2, 0.5, PNorm::new(0.7), &spec()).unwrap();
        assert!(m.value < 1e-12);
    }

    #[test]
    fn modulus_of_identity_closed_form() {
        // omega_1(x, delta)_p = max_h h (1-h)^{1/p}, maximized at h = delta
        // for small delta
        let f = linear_unit();
        let p = 0.5;
        let delta = 0.1;
        let m = modulus(&f, 1, delta, PNorm::new(p), &spec()).unwrap();
        let expected = delta * (1.0 - delta).powf(1.0 / p);
        assert_relative_eq!(m.value, expected, max_relative = 1e-7);
        assert_eq!(m.h_at_max, delta);
    }

    #[test]
    fn modulus_rejects_oversized_step() {
        let f = linear_unit();
        assert!(matches!(
            modulus(&f, 2, 0.6, PNorm::new(0.5), &spec()),
            Err(ModulusError::BadStep { .. })
        ));
    }

    #[test]
    fn trig_difference_matches_pointwise() {
        use crate::approx::{random_expansion, ApproxSpace};
        let e = random_expansion(ApproxSpace::trig(3), 11);
        let f = Evaluable::Expansion(e.clone());
        let h = 0.21;
        let terms = [(1.0, 0.0), (-2.0, h), (1.0, 2.0 * h)];
        let diff = trig_difference(&e, &terms);
        for i in 0..100 {
            let x = std::f64::consts::TAU * i as f64 / 100.0;
            let direct = finite_difference(&f, 2, h, x).unwrap();
            assert_relative_eq!(
                diff.eval(x).unwrap(),
                direct,
                epsilon = 1e-12,
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn dt_difference_basics() {
        let c: Evaluable = PiecewisePoly::constant(Domain::SymInterval, 5.0).into();
        assert_eq!(dt_difference(&c, 1, 0.3, 0.2), 0.0);
        let x_fn: Evaluable = PiecewisePoly::new(
            Domain::SymInterval,
            vec![-1.0, 1.0],
            vec![vec![-1.0, 1.0]],
        )
        .unwrap()
        .into();
        for x in [-0.5, 0.0, 0.4] {
            let v = dt_difference(&x_fn, 1, 0.25, x);
            assert_relative_eq!(v, 0.25 * phi(x), max_relative = 1e-12);
        }
        for r in 1..=3 {
            assert_eq!(dt_difference(&x_fn, r, 0.5, 1.0), 0.0);
            assert_eq!(dt_difference(&x_fn, r, 0.5, -1.0), 0.0);
        }
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let n = n + n % 2;
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn dt_modulus_of_identity_matches_quadrature_oracle() {
        let x_fn: Evaluable = PiecewisePoly::new(
            Domain::SymInterval,
            vec![-1.0, 1.0],
            vec![vec![-1.0, 1.0]],
        )
        .unwrap()
        .into();
        let p = 0.6;
        let delta = 0.2;
        let m = dt_modulus(&x_fn, 1, delta, PNorm::new(p), &spec()).unwrap();
        // oracle: max over the same grid of h * (int_{-x*}^{x*} phi^p)^{1/p}
        let grid = spec().grid(delta);
        let mut expect = 0.0f64;
        for h in grid {
            let xs = dt_admissible_bound(1, h).unwrap();
            let v = h * simpson(|x| phi(x).powf(p), -xs, xs, 20000).powf(1.0 / p);
            expect = expect.max(v);
        }
        assert_relative_eq!(m.value, expect, max_relative = 1e-4);
    }

    #[test]
    fn main_part_below_full_dt_modulus_for_sigma_zero() {
        let f: Evaluable = random_piecewise(21, 4, 3, Domain::SymInterval).into();
        let p = PNorm::new(0.7);
        let delta = 0.1;
        let full = dt_modulus(&f, 2, delta, p, &spec()).unwrap();
        let main = main_part_modulus(&f, 2, delta, p, 0.0, &spec()).unwrap();
        assert!(main.value <= full.value * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn main_part_of_identity_matches_oracle() {
        let x_fn: Evaluable = PiecewisePoly::new(
            Domain::SymInterval,
            vec![-1.0, 1.0],
            vec![vec![-1.0, 1.0]],
        )
        .unwrap()
        .into();
        let p = 0.8;
        let delta = 0.15;
        let m = main_part_modulus(&x_fn, 1, delta, PNorm::new(p), 1.0, &spec()).unwrap();
        let grid = spec().grid(delta);
        let mut expect = 0.0f64;
        for h in grid {
            let s = 2.0 * h * h;
            let v = h * simpson(|x| phi(x).powf(2.0 * p), -1.0 + s, 1.0 - s, 20000).powf(1.0 / p);
            expect = expect.max(v);
        }
        assert_relative_eq!(m.value, expect, max_relative = 1e-4);
    }

    #[test]
    fn main_part_degenerate_interval() {
        let f: Evaluable = PiecewisePoly::constant(Domain::SymInterval, 1.0).into();
        assert!(matches!(
            main_part_modulus(&f, 2, 0.5, PNorm::new(0.5), 0.0, &spec()),
            Err(ModulusError::DegenerateInterval { .. })
        ));
    }

    #[test]
    fn modulus_integral_of_constant_vanishes() {
        let f: Evaluable = PiecewisePoly::constant(Domain::Circle2Pi, 2.0).into();
        let mi = modulus_integral(
            &f,
            1,
            PNorm::new(0.75),
            2.0 - 0.75,
            0.1,
            &spec(),
            ModulusKind::Classical,
        )
        .unwrap();
        assert_eq!(mi.value, 0.0);
    }

    #[test]
    fn modulus_integral_near_closed_form() {
        // f(x) = x on [0,1]: omega_1(f,t) ~ t for small t, so with
        // a = 2 - p the p-th power integrates to delta^{2p-1}/(2p-1)
        let f = linear_unit();
        let p = 0.75;
        let delta = 0.01;
        let mi = modulus_integral(
            &f,
            1,
            PNorm::new(p),
            2.0 - p,
            delta,
            &spec(),
            ModulusKind::Classical,
        )
        .unwrap();
        let closed = (delta.powf(2.0 * p - 1.0) / (2.0 * p - 1.0)).powf(1.0 / p);
        assert!(mi.lower <= mi.value && mi.value <= mi.upper);
        assert_relative_eq!(mi.value, closed, max_relative = 0.05);
        assert!(mi.lower <= closed * 1.01);
        assert!(mi.upper >= closed * 0.99);
    }

    #[test]
    fn modulus_integral_diverges_for_rough_exponent() {
        // f with a jump: omega_1(f,t)^p ~ t, against t^{-a} with a = 2.5
        // the block sums grow and the ratio test must fire
        let f: Evaluable = PiecewisePoly::new(
            Domain::Circle2Pi,
            vec![0.0, std::f64::consts::PI, std::f64::consts::TAU],
            vec![vec![0.0], vec![1.0]],
        )
        .unwrap()
        .into();
        let out = modulus_integral(
            &f,
            1,
            PNorm::new(0.5),
            2.5,
            0.1,
            &spec(),
            ModulusKind::Classical,
        );
        assert!(matches!(out, Err(ModulusError::Diverging { .. })));
    }
}

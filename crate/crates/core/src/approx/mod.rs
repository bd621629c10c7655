//! The three approximation families — trigonometric polynomials on the
//! circle, splines with uniform knots on `[0, 1]`, and algebraic polynomials
//! in the Chebyshev basis on `[-1, 1]` — plus the best-approximation solver.

mod solver;

pub use solver::{
    best_approx, constructive_upper_bound, oracle_best_approx, BestApproxConfig,
    BestApproxResult, OracleGrid, SolveCache,
};

use crate::domain::Domain;
use crate::piecewise::{FunError, PiecewisePoly};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ApproxError {
    #[error("derivative order {k} exhausts spline smoothness (m = {m})")]
    DegreeExhausted { m: usize, k: usize },
    #[error("coefficient count {got} does not match space dimension {want}")]
    BadCoeffCount { want: usize, got: usize },
    #[error("oracle lattice has {points} points, cap is {cap}")]
    GridTooLarge { points: u128, cap: u128 },
    #[error(transparent)]
    Fun(#[from] FunError),
}

/// Kind of approximation space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SpaceKind {
    /// Real trigonometric polynomials of degree at most `n`; dimension `2n+1`.
    Trig { n: usize },
    /// Splines of degree `m-1`, smoothness `C^{m-2}`, uniform knots `j/n` on
    /// `[0, 1]`; dimension `n+m-1`.
    Spline { m: usize, n: usize },
    /// Algebraic polynomials of degree at most `n` in the Chebyshev basis on
    /// `[-1, 1]`; dimension `n+1`.
    AlgPoly { n: usize },
}

/// An approximation space together with the weight exponent `sigma` of the
/// `phi^sigma` weight used in weighted best approximation (meaningful for
/// algebraic polynomials; zero means unweighted).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxSpace {
    pub kind: SpaceKind,
    #[serde(default)]
    pub weight_sigma: f64,
}

impl ApproxSpace {
    pub fn trig(n: usize) -> Self {
        Self {
            kind: SpaceKind::Trig { n },
            weight_sigma: 0.0,
        }
    }

    pub fn spline(m: usize, n: usize) -> Self {
        assert!(m >= 1 && n >= 1);
        Self {
            kind: SpaceKind::Spline { m, n },
            weight_sigma: 0.0,
        }
    }

    pub fn alg_poly(n: usize) -> Self {
        Self {
            kind: SpaceKind::AlgPoly { n },
            weight_sigma: 0.0,
        }
    }

    pub fn with_weight(mut self, sigma: f64) -> Self {
        assert!(sigma >= 0.0);
        self.weight_sigma = sigma;
        self
    }

    pub fn domain(&self) -> Domain {
        match self.kind {
            SpaceKind::Trig { .. } => Domain::Circle2Pi,
            SpaceKind::Spline { .. } => Domain::UnitInterval,
            SpaceKind::AlgPoly { .. } => Domain::SymInterval,
        }
    }

    pub fn dimension(&self) -> usize {
        match self.kind {
            SpaceKind::Trig { n } => 2 * n + 1,
            SpaceKind::Spline { m, n } => n + m - 1,
            SpaceKind::AlgPoly { n } => n + 1,
        }
    }

    /// Clamped uniform knot vector for the spline variant.
    fn knots(&self) -> Vec<f64> {
        match self.kind {
            SpaceKind::Spline { m, n } => {
                let mut t = Vec::with_capacity(2 * m + n - 1);
                t.extend(std::iter::repeat(0.0).take(m));
                t.extend((1..n).map(|j| j as f64 / n as f64));
                t.extend(std::iter::repeat(1.0).take(m));
                t
            }
            _ => unreachable!("knots only exist for splines"),
        }
    }
}

/// Coefficients over an approximation space.
///
/// Layout: trig `(a_0, a_1, b_1, ..., a_n, b_n)` for
/// `a_0 + sum a_k cos(kx) + b_k sin(kx)`; Chebyshev `(c_0, ..., c_n)`;
/// splines use the B-spline basis on the clamped uniform knot vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expansion {
    pub space: ApproxSpace,
    pub coeffs: Vec<f64>,
}

impl Expansion {
    pub fn new(space: ApproxSpace, coeffs: Vec<f64>) -> Result<Self, ApproxError> {
        if coeffs.len() != space.dimension() {
            return Err(ApproxError::BadCoeffCount {
                want: space.dimension(),
                got: coeffs.len(),
            });
        }
        Ok(Self { space, coeffs })
    }

    pub fn zero(space: ApproxSpace) -> Self {
        Self {
            coeffs: vec![0.0; space.dimension()],
            space,
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64, FunError> {
        if !self.space.domain().contains(x) {
            return Err(FunError::OutOfDomain {
                domain: self.space.domain(),
                x,
            });
        }
        Ok(self.eval_unchecked(x))
    }

    pub fn eval_unchecked(&self, x: f64) -> f64 {
        let x = self.space.domain().reduce(x);
        match self.space.kind {
            SpaceKind::Trig { n } => eval_trig(&self.coeffs, n, x),
            SpaceKind::AlgPoly { .. } => eval_chebyshev(&self.coeffs, x),
            SpaceKind::Spline { m, n } => {
                eval_bspline(&self.space.knots(), &self.coeffs, m, n, x)
            }
        }
    }

    /// Exact `k`-th derivative. Trigonometric and algebraic expansions stay
    /// expansions in their family; spline derivatives are returned as an
    /// expansion over `Spline(m-k, n)`.
    pub fn derivative(&self, k: usize) -> Result<Expansion, ApproxError> {
        let mut cur = self.clone();
        for _ in 0..k {
            cur = cur.derivative_once()?;
        }
        Ok(cur)
    }

    fn derivative_once(&self) -> Result<Expansion, ApproxError> {
        match self.space.kind {
            SpaceKind::Trig { n } => {
                let mut out = vec![0.0; self.coeffs.len()];
                for j in 1..=n {
                    let a = self.coeffs[2 * j - 1];
                    let b = self.coeffs[2 * j];
                    out[2 * j - 1] = j as f64 * b;
                    out[2 * j] = -(j as f64) * a;
                }
                Ok(Expansion {
                    space: self.space,
                    coeffs: out,
                })
            }
            SpaceKind::AlgPoly { n } => {
                if n == 0 {
                    return Ok(Expansion::zero(ApproxSpace::alg_poly(0).with_weight(self.space.weight_sigma)));
                }
                let c = &self.coeffs;
                let mut d = vec![0.0; n];
                d[n - 1] = 2.0 * n as f64 * c[n];
                if n >= 2 {
                    d[n - 2] = 2.0 * (n - 1) as f64 * c[n - 1];
                }
                for k in (1..=n.saturating_sub(2)).rev() {
                    d[k - 1] = d[k + 1] + 2.0 * k as f64 * c[k];
                }
                d[0] *= 0.5;
                Ok(Expansion {
                    space: ApproxSpace::alg_poly(n - 1).with_weight(self.space.weight_sigma),
                    coeffs: d,
                })
            }
            SpaceKind::Spline { m, n } => {
                if m < 2 {
                    return Err(ApproxError::DegreeExhausted { m, k: 1 });
                }
                let t = self.space.knots();
                let deg = (m - 1) as f64;
                let dim = self.space.dimension();
                let mut d = vec![0.0; dim - 1];
                for (i, slot) in d.iter_mut().enumerate() {
                    let denom = t[i + m] - t[i + 1];
                    if denom > 0.0 {
                        *slot = deg * (self.coeffs[i + 1] - self.coeffs[i]) / denom;
                    }
                }
                Ok(Expansion {
                    space: ApproxSpace::spline(m - 1, n),
                    coeffs: d,
                })
            }
        }
    }

    /// Exact piecewise-polynomial form; available for splines (per knot
    /// interval) and algebraic polynomials of modest degree.
    pub fn to_piecewise(&self) -> Option<PiecewisePoly> {
        match self.space.kind {
            SpaceKind::Spline { m, n } => Some(self.spline_to_piecewise(m, n)),
            _ => None,
        }
    }

    fn spline_to_piecewise(&self, m: usize, n: usize) -> PiecewisePoly {
        // Taylor coefficients at each knot from successive derivative
        // expansions, evaluated from the right.
        let mut ders: Vec<Expansion> = Vec::with_capacity(m);
        ders.push(self.clone());
        for q in 1..m {
            let next = ders[q - 1].derivative_once().expect("q < m");
            ders.push(next);
        }
        let mut factorial = 1.0;
        let facts: Vec<f64> = (0..m)
            .map(|q| {
                if q > 0 {
                    factorial *= q as f64;
                }
                factorial
            })
            .collect();
        let bps: Vec<f64> = (0..=n).map(|j| j as f64 / n as f64).collect();
        let pieces: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let x = bps[j];
                (0..m)
                    .map(|q| ders[q].eval_unchecked(x) / facts[q])
                    .collect()
            })
            .collect();
        PiecewisePoly::new(Domain::UnitInterval, bps, pieces).expect("valid spline pieces")
    }
}

fn eval_trig(c: &[f64], n: usize, x: f64) -> f64 {
    let mut acc = c[0];
    let (sx, cx) = x.sin_cos();
    let mut ck = cx;
    let mut sk = sx;
    for k in 1..=n {
        acc += c[2 * k - 1] * ck + c[2 * k] * sk;
        let c_next = ck * cx - sk * sx;
        let s_next = sk * cx + ck * sx;
        ck = c_next;
        sk = s_next;
    }
    acc
}

fn eval_chebyshev(c: &[f64], x: f64) -> f64 {
    let n = c.len() - 1;
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for k in (1..=n).rev() {
        let b = 2.0 * x * b1 - b2 + c[k];
        b2 = b1;
        b1 = b;
    }
    c[0] + x * b1 - b2
}

/// de Boor evaluation of `sum_i c_i B_{i,m}` on the clamped knot vector.
fn eval_bspline(t: &[f64], c: &[f64], m: usize, n: usize, x: f64) -> f64 {
    let deg = m - 1;
    // uniform interior knots: span index directly
    let j = ((x * n as f64).floor() as usize).min(n - 1);
    let mu = deg + j;
    let mut d: Vec<f64> = (0..=deg).map(|i| c[mu - deg + i]).collect();
    for r in 1..=deg {
        for i in (r..=deg).rev() {
            let gi = mu - deg + i;
            let denom = t[gi + deg - r + 1] - t[gi];
            let alpha = if denom > 0.0 { (x - t[gi]) / denom } else { 0.0 };
            d[i] = (1.0 - alpha) * d[i - 1] + alpha * d[i];
        }
    }
    d[deg]
}

/// Jumps of the top derivative across the interior knots, divided by
/// `(m-1)!`: the coefficients `a_j` of the truncated-power representation
/// `S(x) = P(x) + sum_j a_j (x - t_j)_+^{m-1}`.
pub fn truncated_power_coeffs(e: &Expansion) -> Vec<f64> {
    let SpaceKind::Spline { m, n } = e.space.kind else {
        panic!("truncated-power representation requires a spline expansion");
    };
    assert!(m >= 2, "need degree at least one");
    let pw = e.to_piecewise().expect("splines convert exactly");
    let lead = |j: usize| pw.pieces[j].get(m - 1).copied().unwrap_or(0.0);
    (1..n).map(|j| lead(j) - lead(j - 1)).collect()
}

/// Cosine coefficients of `(sin(m t/2) / sin(t/2))^{2s}`: the `s`-fold
/// convolution of the triangle sequence `m - |k|`. Index `k` runs from `0`
/// to `s (m-1)`.
pub(crate) fn jackson_coefficients(m: usize, s: usize) -> Vec<f64> {
    let mut full: Vec<f64> = (0..2 * m - 1)
        .map(|i| m as f64 - (i as f64 - (m - 1) as f64).abs())
        .collect();
    let base = full.clone();
    for _ in 1..s {
        let mut next = vec![0.0; full.len() + base.len() - 1];
        for (i, &a) in full.iter().enumerate() {
            for (j, &b) in base.iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        full = next;
    }
    let center = (full.len() - 1) / 2;
    full[center..].to_vec()
}

/// Concentrated trigonometric bump of degree at most `n`: a power of the
/// Fejer-type kernel with `u^{-2s}` tails, so every quasi-norm down to
/// `p > 1/(2s-1)` sees the `1/n`-width peak rather than the tails. The
/// extremal profile for the different-metrics comparisons.
pub fn jackson_kernel(n: usize, s: usize) -> Expansion {
    assert!(s >= 1 && n >= s);
    let m = n / s + 1;
    let c = jackson_coefficients(m, s);
    let mut e = Expansion::zero(ApproxSpace::trig(n));
    e.coeffs[0] = c[0];
    for k in 1..c.len().min(n + 1) {
        e.coeffs[2 * k - 1] = 2.0 * c[k];
    }
    e
}

/// The same bump in the Chebyshev basis, concentrated at `x = 1` at scale
/// `n^{-2}`: the endpoint-extremal profile on `[-1, 1]`.
pub fn chebyshev_jackson_kernel(n: usize, s: usize) -> Expansion {
    assert!(s >= 1 && n >= s);
    let m = n / s + 1;
    let c = jackson_coefficients(m, s);
    let mut e = Expansion::zero(ApproxSpace::alg_poly(n));
    e.coeffs[0] = c[0];
    for k in 1..c.len().min(n + 1) {
        e.coeffs[k] = 2.0 * c[k];
    }
    e
}

/// Single B-spline bump: one basis function near the middle of `[0, 1]`,
/// support of width `m/n`.
pub fn bspline_bump(m: usize, n: usize) -> Expansion {
    let mut e = Expansion::zero(ApproxSpace::spline(m, n));
    let mid = e.coeffs.len() / 2;
    e.coeffs[mid] = 1.0;
    e
}

/// Deterministic random element with iid coefficients uniform in `[-1, 1]`.
pub fn random_expansion(space: ApproxSpace, seed: u64) -> Expansion {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = (0..space.dimension())
        .map(|_| 2.0 * crate::piecewise::unit_f64(&mut rng) - 1.0)
        .collect();
    Expansion { space, coeffs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn trig_constant_expansion() {
        let e = Expansion::new(ApproxSpace::trig(1), vec![1.0, 0.0, 0.0]).unwrap();
        for x in [0.0, 1.0, 5.0] {
            assert_eq!(e.eval(x).unwrap(), 1.0);
        }
    }

    #[test]
    fn chebyshev_t2_at_zero() {
        let e = Expansion::new(ApproxSpace::alg_poly(2), vec![0.0, 0.0, 1.0]).unwrap();
        assert_relative_eq!(e.eval(0.0).unwrap(), -1.0);
        assert_relative_eq!(e.eval(0.5).unwrap(), 2.0 * 0.25 - 1.0);
        assert_relative_eq!(e.eval(1.0).unwrap(), 1.0);
    }

    #[test]
    fn bspline_partition_of_unity() {
        for (m, n) in [(2, 2), (3, 4), (4, 5)] {
            let space = ApproxSpace::spline(m, n);
            let e = Expansion::new(space, vec![1.0; space.dimension()]).unwrap();
            for i in 0..=20 {
                let x = i as f64 / 20.0;
                assert_relative_eq!(e.eval(x).unwrap(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn trig_derivative_sin_to_cos() {
        // sin x -> cos x
        let e = Expansion::new(ApproxSpace::trig(1), vec![0.0, 0.0, 1.0]).unwrap();
        let d = e.derivative(1).unwrap();
        assert_eq!(d.coeffs, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let e = Expansion::new(ApproxSpace::trig(2), vec![3.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let d = e.derivative(1).unwrap();
        assert!(d.coeffs.iter().all(|&c| c == 0.0));
        let e2 = Expansion::new(ApproxSpace::alg_poly(0), vec![2.0]).unwrap();
        let d2 = e2.derivative(1).unwrap();
        assert!(d2.coeffs.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn spline_derivative_matches_finite_differences() {
        let e = random_expansion(ApproxSpace::spline(3, 4), 17);
        let d = e.derivative(1).unwrap();
        let h = 1e-6;
        for i in 1..100 {
            let x = i as f64 / 100.0;
            if (x * 4.0).fract().abs() < 1e-9 {
                continue; // skip knots
            }
            let fd = (e.eval(x + h).unwrap() - e.eval(x - h).unwrap()) / (2.0 * h);
            assert_relative_eq!(d.eval(x).unwrap(), fd, epsilon = 1e-6, max_relative = 1e-5);
        }
    }

    #[test]
    fn spline_smoothness_exhaustion() {
        let e = random_expansion(ApproxSpace::spline(2, 3), 5);
        assert!(e.derivative(1).is_ok());
        assert!(matches!(
            e.derivative(2),
            Err(ApproxError::DegreeExhausted { .. })
        ));
    }

    #[test]
    fn spline_to_piecewise_agrees() {
        for (m, n, seed) in [(2, 3, 1u64), (3, 4, 2), (4, 6, 3)] {
            let e = random_expansion(ApproxSpace::spline(m, n), seed);
            let pw = e.to_piecewise().unwrap();
            for i in 0..=200 {
                let x = i as f64 / 200.0;
                let a = e.eval(x).unwrap();
                let b = pw.eval(x).unwrap();
                assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()), "m={m} n={n} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn truncated_power_of_global_polynomial_vanishes() {
        // a straight line is a spline with no knot activity
        let space = ApproxSpace::spline(2, 4);
        // B-spline coefficients of x on clamped knots: Greville abscissae
        let coeffs: Vec<f64> = vec![0.0, 0.25, 0.5, 0.75, 1.0];
        let e = Expansion::new(space, coeffs).unwrap();
        for a in truncated_power_coeffs(&e) {
            assert!(a.abs() < 1e-12);
        }
    }

    #[test]
    fn truncated_power_of_hat() {
        // hat peaked at 1/2 on Spline(2,2): slopes +2 then -2
        let e = Expansion::new(ApproxSpace::spline(2, 2), vec![0.0, 1.0, 0.0]).unwrap();
        let a = truncated_power_coeffs(&e);
        assert_eq!(a.len(), 1);
        assert_relative_eq!(a[0], -4.0, max_relative = 1e-12);
    }

    #[test]
    fn truncated_power_reconstruction() {
        let e = random_expansion(ApproxSpace::spline(3, 5), 23);
        let a = truncated_power_coeffs(&e);
        let pw = e.to_piecewise().unwrap();
        // P = first piece extended globally
        let p0 = &pw.pieces[0];
        for i in 0..=200 {
            let x = i as f64 / 200.0;
            let mut v = crate::piecewise::horner(p0, x);
            for (j, &aj) in a.iter().enumerate() {
                let tj = (j + 1) as f64 / 5.0;
                if x > tj {
                    v += aj * (x - tj).powi(2);
                }
            }
            assert!((v - e.eval(x).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn kernels_have_expected_peaks() {
        // (sin(mt/2)/sin(t/2))^{2s} peaks at m^{2s} for t = 0
        let d = jackson_kernel(9, 3); // m = 4
        assert_relative_eq!(d.eval(0.0).unwrap(), 4096.0, max_relative = 1e-12);
        assert!(d.eval(std::f64::consts::PI).unwrap().abs() < 1.0);
        let k = chebyshev_jackson_kernel(9, 3);
        assert_relative_eq!(k.eval(1.0).unwrap(), 4096.0, max_relative = 1e-12);
        let b = bspline_bump(3, 8);
        assert!(b.eval(0.5).unwrap() > 0.0);
    }

    #[test]
    fn jackson_kernel_matches_closed_form() {
        // degree n = 8, s = 2, m = 5: compare against the sine-ratio power
        let e = jackson_kernel(8, 2);
        for &t in &[0.3, 1.0, 2.2] {
            let closed = ((2.5 * t).sin() / (0.5 * t).sin()).powi(4);
            assert_relative_eq!(e.eval(t).unwrap(), closed, max_relative = 1e-10);
        }
    }
}

use crate::domain::Domain;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard cap on the local polynomial degree. Differences and repeated
/// integrals of the test families stay far below this.
pub const MAX_DEGREE: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunError {
    #[error("evaluation point {x} outside domain {domain}")]
    OutOfDomain { domain: Domain, x: f64 },
    #[error("breakpoints must strictly increase and span the domain")]
    BadBreakpoints,
    #[error("piece degree exceeds cap {MAX_DEGREE}")]
    DegreeTooHigh,
    #[error("function must have zero mean (integral {integral:e})")]
    NonZeroMean { integral: f64 },
    #[error("epsilon must lie in (0, pi/2), got {0}")]
    BadEpsilon(f64),
}

/// Exact piecewise polynomial. Piece `i` lives on
/// `[breakpoints[i], breakpoints[i+1])` and stores coefficients in the local
/// power basis shifted to the left breakpoint:
/// `p_i(x) = sum_k c_k (x - breakpoints[i])^k`.
///
/// Values at interior breakpoints use the left-piece limit; the value at the
/// left domain endpoint comes from the first piece. Jump discontinuities are
/// permitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePoly {
    pub domain: Domain,
    pub breakpoints: Vec<f64>,
    pub pieces: Vec<Vec<f64>>,
    /// Count of jump discontinuities whose distributional derivative was
    /// dropped by [`PiecewisePoly::differentiate`]. Metadata only.
    #[serde(skip)]
    pub dropped_jumps: usize,
}

impl PiecewisePoly {
    pub fn new(
        domain: Domain,
        breakpoints: Vec<f64>,
        pieces: Vec<Vec<f64>>,
    ) -> Result<Self, FunError> {
        let (a, b) = domain.endpoints();
        if breakpoints.len() < 2
            || pieces.len() + 1 != breakpoints.len()
            || breakpoints.windows(2).any(|w| w[0] >= w[1])
            || breakpoints[0] != a
            || *breakpoints.last().unwrap() != b
        {
            return Err(FunError::BadBreakpoints);
        }
        if pieces.iter().any(|c| c.len() > MAX_DEGREE + 1) {
            return Err(FunError::DegreeTooHigh);
        }
        Ok(Self {
            domain,
            breakpoints,
            pieces,
            dropped_jumps: 0,
        })
    }

    pub fn constant(domain: Domain, value: f64) -> Self {
        let (a, b) = domain.endpoints();
        Self {
            domain,
            breakpoints: vec![a, b],
            pieces: vec![vec![value]],
            dropped_jumps: 0,
        }
    }

    /// Single global polynomial `sum_k coeffs[k] (x - a)^k` on the whole domain.
    pub fn from_coeffs(domain: Domain, coeffs: Vec<f64>) -> Result<Self, FunError> {
        let (a, b) = domain.endpoints();
        Self::new(domain, vec![a, b], vec![coeffs])
    }

    pub fn degree(&self) -> usize {
        self.pieces
            .iter()
            .map(|c| c.len().saturating_sub(1))
            .max()
            .unwrap_or(0)
    }

    /// Index of the piece owning `x` under the left-limit convention.
    /// `x` must already be reduced into the fundamental domain.
    fn piece_index(&self, x: f64) -> usize {
        // number of breakpoints strictly below x, minus one; a breakpoint
        // itself therefore selects the piece to its left
        let k = self.breakpoints.partition_point(|&b| b < x);
        k.saturating_sub(1).min(self.pieces.len() - 1)
    }

    pub fn eval(&self, x: f64) -> Result<f64, FunError> {
        if !self.domain.contains(x) {
            return Err(FunError::OutOfDomain {
                domain: self.domain,
                x,
            });
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluation without the domain check; `x` is reduced mod the period on
    /// the circle and assumed in-range otherwise.
    pub fn eval_unchecked(&self, x: f64) -> f64 {
        let x = self.domain.reduce(x);
        let i = self.piece_index(x);
        horner(&self.pieces[i], x - self.breakpoints[i])
    }

    /// Largest absolute coefficient, used to scale tolerances.
    pub fn coeff_scale(&self) -> f64 {
        self.pieces
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0f64, |m, &c| m.max(c.abs()))
    }

    /// Exact integral over the whole domain.
    pub fn integral(&self) -> f64 {
        let mut total = 0.0;
        for (i, c) in self.pieces.iter().enumerate() {
            let w = self.breakpoints[i + 1] - self.breakpoints[i];
            total += poly_integral_from_zero(c, w);
        }
        total
    }

    pub fn mean(&self) -> f64 {
        self.integral() / self.domain.length()
    }

    /// Piecewise derivative. Jumps at breakpoints are not differentiated;
    /// each dropped jump increments the `dropped_jumps` metadata counter.
    pub fn differentiate(&self) -> PiecewisePoly {
        let pieces: Vec<Vec<f64>> = self.pieces.iter().map(|c| poly_derivative(c)).collect();
        let mut out = PiecewisePoly {
            domain: self.domain,
            breakpoints: self.breakpoints.clone(),
            pieces,
            dropped_jumps: 0,
        };
        let tol = 1e-12 * (1.0 + self.coeff_scale());
        out.dropped_jumps = self.jump_magnitudes().filter(|j| j.abs() > tol).count();
        out
    }

    /// Jumps `right_value - left_limit` at the interior breakpoints, plus the
    /// wrap jump on the circle.
    fn jump_magnitudes(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.pieces.len();
        let interior = (1..n).map(move |i| {
            let left = horner(
                &self.pieces[i - 1],
                self.breakpoints[i] - self.breakpoints[i - 1],
            );
            let right = self.pieces[i].first().copied().unwrap_or(0.0);
            right - left
        });
        let wrap = self.domain.is_circle().then(|| {
            let left = horner(
                &self.pieces[n - 1],
                self.breakpoints[n] - self.breakpoints[n - 1],
            );
            let right = self.pieces[0].first().copied().unwrap_or(0.0);
            right - left
        });
        interior.chain(wrap)
    }

    pub fn is_continuous(&self, tol: f64) -> bool {
        self.jump_magnitudes().all(|j| j.abs() <= tol)
    }

    /// Periodic integral on the circle: returns `G` with `G' = f` piecewise,
    /// `G` continuous on the circle and of zero mean. Requires `f` itself to
    /// have (exactly computed) zero mean.
    pub fn periodic_integral(&self) -> Result<PiecewisePoly, FunError> {
        assert!(self.domain.is_circle(), "periodic integral needs the circle");
        let total = self.integral();
        if total.abs() > 1e-12 * (1.0 + self.coeff_scale()) {
            return Err(FunError::NonZeroMean { integral: total });
        }
        let g = self.antiderivative()?;
        let shift = g.mean();
        let mut pieces = g.pieces;
        for c in &mut pieces {
            c[0] -= shift;
        }
        Ok(PiecewisePoly {
            domain: self.domain,
            breakpoints: g.breakpoints,
            pieces,
            dropped_jumps: 0,
        })
    }

    /// Plain antiderivative `x -> integral_a^x f`, continuous across
    /// breakpoints, vanishing at the left endpoint.
    pub fn antiderivative(&self) -> Result<PiecewisePoly, FunError> {
        if self.degree() + 1 > MAX_DEGREE {
            return Err(FunError::DegreeTooHigh);
        }
        let mut pieces = Vec::with_capacity(self.pieces.len());
        let mut acc = 0.0;
        for (i, c) in self.pieces.iter().enumerate() {
            let w = self.breakpoints[i + 1] - self.breakpoints[i];
            let mut a = poly_antiderivative(c);
            a[0] = acc;
            acc = horner(&a, w);
            pieces.push(a);
        }
        Ok(PiecewisePoly {
            domain: self.domain,
            breakpoints: self.breakpoints.clone(),
            pieces,
            dropped_jumps: 0,
        })
    }

    /// Exact linear combination `sum_i coefs[i] * f(x + shifts[i])`.
    ///
    /// On the circle the result lives on the whole circle; on an interval
    /// `[a, b]` it lives on `[a, b - max(shifts)]` (shifts must be >= 0) and
    /// is returned as plain pieces over that subrange together with its
    /// breakpoint vector. Used to build finite differences exactly.
    pub fn combine_shifted(&self, terms: &[(f64, f64)]) -> ShiftedCombination {
        match self.domain {
            Domain::Circle2Pi => self.combine_shifted_circle(terms),
            _ => self.combine_shifted_interval(terms),
        }
    }

    fn combine_shifted_circle(&self, terms: &[(f64, f64)]) -> ShiftedCombination {
        let period = self.domain.length();
        let mut cuts: Vec<f64> = Vec::new();
        for &(_, s) in terms {
            for &b in &self.breakpoints[..self.breakpoints.len() - 1] {
                cuts.push(self.domain.reduce(b - s));
            }
        }
        cuts.push(0.0);
        cuts.push(period);
        let cuts = dedup_sorted(cuts, 1e-13 * period.max(1.0));
        let pieces = self.assemble_pieces(&cuts, terms, true);
        ShiftedCombination {
            breakpoints: cuts,
            pieces,
        }
    }

    fn combine_shifted_interval(&self, terms: &[(f64, f64)]) -> ShiftedCombination {
        let (a, b) = self.domain.endpoints();
        let smax = terms.iter().fold(0.0f64, |m, &(_, s)| m.max(s));
        let hi = b - smax;
        let mut cuts: Vec<f64> = vec![a, hi];
        for &(_, s) in terms {
            for &bp in &self.breakpoints {
                let t = bp - s;
                if t > a && t < hi {
                    cuts.push(t);
                }
            }
        }
        let cuts = dedup_sorted(cuts, 1e-13 * (b - a).max(1.0));
        let pieces = self.assemble_pieces(&cuts, terms, false);
        ShiftedCombination {
            breakpoints: cuts,
            pieces,
        }
    }

    fn assemble_pieces(&self, cuts: &[f64], terms: &[(f64, f64)], wrap: bool) -> Vec<Vec<f64>> {
        let mut pieces = Vec::with_capacity(cuts.len().saturating_sub(1));
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let mid = 0.5 * (lo + hi);
            let mut acc: Vec<f64> = Vec::new();
            let mut contrib_scale = 0.0f64;
            for &(coef, s) in terms {
                if coef == 0.0 {
                    continue;
                }
                let y = if wrap {
                    self.domain.reduce(mid + s)
                } else {
                    mid + s
                };
                let i = self.piece_index(y);
                // p_i evaluated at (x + s - 2*pi*k - L): express in x - lo
                let offset = (y - self.breakpoints[i]) - (mid - lo);
                let shifted = taylor_shift(&self.pieces[i], offset);
                for &c in &shifted {
                    contrib_scale = contrib_scale.max((coef * c).abs());
                }
                accumulate(&mut acc, coef, &shifted);
            }
            if acc.is_empty() {
                acc.push(0.0);
            }
            snap_cancellation_noise(&mut acc, contrib_scale);
            pieces.push(acc);
        }
        pieces
    }

    /// Exact linear combination `c1*self + c2*other` of two functions on the
    /// same domain.
    pub fn lin_comb(&self, c1: f64, other: &PiecewisePoly, c2: f64) -> PiecewisePoly {
        assert_eq!(self.domain, other.domain);
        let mut cuts: Vec<f64> = self
            .breakpoints
            .iter()
            .chain(other.breakpoints.iter())
            .copied()
            .collect();
        cuts.sort_by(f64::total_cmp);
        let cuts = dedup_sorted(cuts, 1e-13 * self.domain.length().max(1.0));
        let mut pieces = Vec::with_capacity(cuts.len() - 1);
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let mut acc: Vec<f64> = Vec::new();
            let mut contrib_scale = 0.0f64;
            for (c, f) in [(c1, self), (c2, other)] {
                let i = f.piece_index(mid);
                let offset = w[0] - f.breakpoints[i];
                let shifted = taylor_shift(&f.pieces[i], offset);
                for &a in &shifted {
                    contrib_scale = contrib_scale.max((c * a).abs());
                }
                accumulate(&mut acc, c, &shifted);
            }
            snap_cancellation_noise(&mut acc, contrib_scale);
            pieces.push(acc);
        }
        PiecewisePoly {
            domain: self.domain,
            breakpoints: cuts,
            pieces,
            dropped_jumps: 0,
        }
    }

    pub fn scale(&self, c: f64) -> PiecewisePoly {
        let mut out = self.clone();
        for piece in &mut out.pieces {
            for a in piece.iter_mut() {
                *a *= c;
            }
        }
        out
    }

    /// Sign-change roots of the function inside `[lo, hi]`, found per piece by
    /// a 64-point scan and bracketed bisection. Roots without a sign change
    /// (even multiplicity) are not reported.
    pub fn sign_roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut roots = Vec::new();
        for (i, c) in self.pieces.iter().enumerate() {
            let (bl, br) = (self.breakpoints[i], self.breakpoints[i + 1]);
            let (l, r) = (bl.max(lo), br.min(hi));
            if l >= r {
                continue;
            }
            scan_roots(|x| horner(c, x - bl), l, r, &mut roots);
        }
        roots.sort_by(f64::total_cmp);
        roots
    }
}

/// Pieces of a shifted linear combination; on an interval the right end is
/// `b - max(shift)`.
#[derive(Debug, Clone)]
pub struct ShiftedCombination {
    pub breakpoints: Vec<f64>,
    pub pieces: Vec<Vec<f64>>,
}

impl ShiftedCombination {
    pub fn into_poly(self, domain: Domain) -> Option<PiecewisePoly> {
        let (a, b) = domain.endpoints();
        if self.breakpoints.first() == Some(&a) && self.breakpoints.last() == Some(&b) {
            Some(PiecewisePoly {
                domain,
                breakpoints: self.breakpoints,
                pieces: self.pieces,
                dropped_jumps: 0,
            })
        } else {
            None
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = self.breakpoints.partition_point(|&b| b < x);
        let i = k.saturating_sub(1).min(self.pieces.len() - 1);
        horner(&self.pieces[i], x - self.breakpoints[i])
    }
}

pub(crate) fn horner(coeffs: &[f64], t: f64) -> f64 {
    let mut v = 0.0;
    for &c in coeffs.iter().rev() {
        v = v * t + c;
    }
    v
}

fn poly_derivative(c: &[f64]) -> Vec<f64> {
    if c.len() <= 1 {
        return vec![0.0];
    }
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &a)| k as f64 * a)
        .collect()
}

fn poly_antiderivative(c: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(c.len() + 1);
    out.push(0.0);
    for (k, &a) in c.iter().enumerate() {
        out.push(a / (k + 1) as f64);
    }
    out
}

/// Integral of the local polynomial over `[0, w]`.
fn poly_integral_from_zero(c: &[f64], w: f64) -> f64 {
    let mut v = 0.0;
    for (k, &a) in c.iter().enumerate().rev() {
        v = v * w + a / (k + 1) as f64;
    }
    v * w
}

/// In-place Taylor shift: coefficients of `p(t + s)` given those of `p(t)`.
pub(crate) fn taylor_shift(c: &[f64], s: f64) -> Vec<f64> {
    let mut a = c.to_vec();
    if s == 0.0 || a.len() <= 1 {
        return a;
    }
    let n = a.len();
    for i in 0..n - 1 {
        for j in (i..n - 1).rev() {
            a[j] += s * a[j + 1];
        }
    }
    a
}

fn accumulate(acc: &mut Vec<f64>, coef: f64, add: &[f64]) {
    if acc.len() < add.len() {
        acc.resize(add.len(), 0.0);
    }
    for (a, &b) in acc.iter_mut().zip(add.iter()) {
        *a += coef * b;
    }
}

/// Coefficients more than ~15 digits below the size of the summed
/// contributions are pure cancellation noise; keeping them would make
/// annihilated differences look like sign-changing micro-functions.
fn snap_cancellation_noise(acc: &mut [f64], contrib_scale: f64) {
    let tol = 1e-13 * contrib_scale;
    for a in acc.iter_mut() {
        if a.abs() <= tol {
            *a = 0.0;
        }
    }
}

fn dedup_sorted(mut v: Vec<f64>, tol: f64) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(v.len());
    for x in v {
        match out.last() {
            Some(&last) if x - last <= tol => {}
            _ => out.push(x),
        }
    }
    out
}

fn scan_roots(f: impl Fn(f64) -> f64, lo: f64, hi: f64, out: &mut Vec<f64>) {
    const SCAN: usize = 64;
    let mut prev_x = lo;
    let mut prev_v = f(lo);
    for i in 1..=SCAN {
        let x = lo + (hi - lo) * i as f64 / SCAN as f64;
        let v = f(x);
        if prev_v == 0.0 {
            out.push(prev_x);
        } else if prev_v * v < 0.0 {
            out.push(bisect(&f, prev_x, x, prev_v));
        }
        prev_x = x;
        prev_v = v;
    }
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, flo: f64) -> f64 {
    let mut sign_lo = flo.signum();
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        if v.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
        let _ = &mut sign_lo;
    }
    0.5 * (lo + hi)
}

/// Options for [`random_piecewise`].
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomPiecewiseOptions {
    /// Force continuity at interior breakpoints (the circle wrap is left free).
    pub continuous: bool,
    /// Subtract the exact mean after generation.
    pub zero_mean: bool,
}

/// Deterministic random piecewise polynomial: interior breakpoints drawn
/// uniformly then sorted, coefficients uniform in `[-1, 1]`.
pub fn random_piecewise(seed: u64, pieces: usize, degree: usize, domain: Domain) -> PiecewisePoly {
    random_piecewise_with(seed, pieces, degree, domain, RandomPiecewiseOptions::default())
}

pub fn random_piecewise_with(
    seed: u64,
    pieces: usize,
    degree: usize,
    domain: Domain,
    opts: RandomPiecewiseOptions,
) -> PiecewisePoly {
    assert!(pieces >= 1 && degree <= MAX_DEGREE);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = domain.endpoints();
    let len = b - a;
    let min_gap = 1e-6 * len;
    let mut bps;
    loop {
        let mut interior: Vec<f64> = (0..pieces - 1)
            .map(|_| a + len * unit_f64(&mut rng))
            .collect();
        interior.sort_by(f64::total_cmp);
        bps = Vec::with_capacity(pieces + 1);
        bps.push(a);
        bps.extend(interior);
        bps.push(b);
        if bps.windows(2).all(|w| w[1] - w[0] > min_gap) {
            break;
        }
    }
    let mut coeffs: Vec<Vec<f64>> = (0..pieces)
        .map(|_| {
            (0..=degree)
                .map(|_| 2.0 * unit_f64(&mut rng) - 1.0)
                .collect()
        })
        .collect();
    if opts.continuous {
        for i in 1..pieces {
            let left = horner(&coeffs[i - 1], bps[i] - bps[i - 1]);
            coeffs[i][0] = left;
        }
    }
    let mut f = PiecewisePoly {
        domain,
        breakpoints: bps,
        pieces: coeffs,
        dropped_jumps: 0,
    };
    if opts.zero_mean {
        let m = f.mean();
        for c in &mut f.pieces {
            c[0] -= m;
        }
    }
    f
}

/// Uniform in `[0, 1)` from the top 53 bits of the stream; independent of the
/// rand crate's distribution internals.
pub(crate) fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;
    use approx::assert_relative_eq;
    use std::f64::consts::{PI, TAU};

    fn xsq_unit() -> PiecewisePoly {
        // x^2 on [0,1]
        PiecewisePoly::from_coeffs(Domain::UnitInterval, vec![0.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn eval_polynomial() {
        let f = xsq_unit();
        assert_eq!(f.eval(0.5).unwrap(), 0.25);
        assert_eq!(f.eval(1.0).unwrap(), 1.0);
        assert!(f.eval(1.5).is_err());
    }

    #[test]
    fn derivative_of_square_is_linear() {
        let d = xsq_unit().differentiate();
        for x in [0.0, 0.3, 0.9] {
            assert_relative_eq!(d.eval(x).unwrap(), 2.0 * x, max_relative = 1e-15);
        }
        assert_eq!(d.dropped_jumps, 0);
    }

    #[test]
    fn left_limit_convention_at_breakpoints() {
        // value 0 on [0, pi), 1 on [pi, 2pi)
        let f = PiecewisePoly::new(
            Domain::Circle2Pi,
            vec![0.0, PI, TAU],
            vec![vec![0.0], vec![1.0]],
        )
        .unwrap();
        assert_eq!(f.eval(PI).unwrap(), 0.0); // left piece wins
        assert_eq!(f.eval(PI + 1e-9).unwrap(), 1.0);
        assert_eq!(f.eval(0.0).unwrap(), 0.0); // left endpoint: right piece
        let d = f.differentiate();
        assert_eq!(d.dropped_jumps, 2); // interior jump + wrap jump
    }

    #[test]
    fn periodic_integral_of_square_wave() {
        // f = +1 on [0, pi), -1 on [pi, 2pi)
        let f = PiecewisePoly::new(
            Domain::Circle2Pi,
            vec![0.0, PI, TAU],
            vec![vec![1.0], vec![-1.0]],
        )
        .unwrap();
        let g = f.periodic_integral().unwrap();
        for x in [0.1, 1.0, 3.0] {
            assert_relative_eq!(g.eval(x).unwrap(), x - PI / 2.0, max_relative = 1e-14);
        }
        for x in [3.5, 5.0, 6.0] {
            assert_relative_eq!(g.eval(x).unwrap(), 1.5 * PI - x, max_relative = 1e-13);
        }
        assert!(g.integral().abs() < 1e-12);
        assert!(g.is_continuous(1e-12));
    }

    #[test]
    fn periodic_integral_of_zero_is_zero() {
        let z = PiecewisePoly::constant(Domain::Circle2Pi, 0.0);
        let g = z.periodic_integral().unwrap();
        assert_eq!(g.eval(1.0).unwrap(), 0.0);
    }

    #[test]
    fn periodic_integral_rejects_nonzero_mean() {
        let f = PiecewisePoly::constant(Domain::Circle2Pi, 1.0);
        assert!(matches!(
            f.periodic_integral(),
            Err(FunError::NonZeroMean { .. })
        ));
    }

    #[test]
    fn derivative_undoes_periodic_integral() {
        let f = random_piecewise_with(
            7,
            5,
            3,
            Domain::Circle2Pi,
            RandomPiecewiseOptions {
                continuous: false,
                zero_mean: true,
            },
        );
        let g = f.periodic_integral().unwrap();
        let d = g.differentiate();
        for i in 0..1000 {
            let x = TAU * (i as f64 + 0.5) / 1000.0;
            assert!((d.eval(x).unwrap() - f.eval(x).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn taylor_shift_matches_direct_expansion() {
        // p(t) = 1 + 2t + 3t^2, p(t+s) at s=0.7
        let q = taylor_shift(&[1.0, 2.0, 3.0], 0.7);
        for t in [-0.5, 0.0, 1.3] {
            let direct = 1.0 + 2.0 * (t + 0.7) + 3.0 * (t + 0.7f64).powi(2);
            assert_relative_eq!(horner(&q, t), direct, max_relative = 1e-14);
        }
    }

    #[test]
    fn combine_shifted_builds_exact_difference() {
        // f(x) = x^2-ish periodic content: use a zero-mean random function
        let f = random_piecewise_with(
            3,
            4,
            2,
            Domain::Circle2Pi,
            RandomPiecewiseOptions {
                continuous: true,
                zero_mean: true,
            },
        );
        let h = 0.37;
        let comb = f.combine_shifted(&[(1.0, 0.0), (-2.0, h), (1.0, 2.0 * h)]);
        for i in 0..500 {
            let x = TAU * i as f64 / 500.0 + 1e-7;
            let direct = f.eval(x).unwrap() - 2.0 * f.eval(x + h).unwrap()
                + f.eval(x + 2.0 * h).unwrap();
            assert!((comb.eval(x) - direct).abs() < 1e-12 * (1.0 + direct.abs()));
        }
    }

    #[test]
    fn combine_shifted_interval_range() {
        let f = xsq_unit();
        let comb = f.combine_shifted(&[(1.0, 0.0), (-1.0, 0.25)]);
        assert_eq!(*comb.breakpoints.last().unwrap(), 0.75);
        // x^2 - (x+1/4)^2 = -x/2 - 1/16
        for x in [0.0, 0.3, 0.7] {
            assert_relative_eq!(comb.eval(x), -0.5 * x - 0.0625, max_relative = 1e-14);
        }
    }

    #[test]
    fn random_piecewise_deterministic() {
        let a = random_piecewise(1, 4, 3, Domain::UnitInterval);
        let b = random_piecewise(1, 4, 3, Domain::UnitInterval);
        assert_eq!(a, b);
        let c = random_piecewise(2, 4, 3, Domain::UnitInterval);
        assert_ne!(a, c);
    }

    #[test]
    fn random_piecewise_single_constant() {
        let f = random_piecewise(1, 1, 0, Domain::SymInterval);
        assert_eq!(f.pieces.len(), 1);
        assert_eq!(f.pieces[0].len(), 1);
    }

    #[test]
    fn random_piecewise_zero_mean_flag() {
        let f = random_piecewise_with(
            9,
            6,
            4,
            Domain::Circle2Pi,
            RandomPiecewiseOptions {
                continuous: false,
                zero_mean: true,
            },
        );
        assert!(f.mean().abs() < 1e-12);
    }

    #[test]
    fn sign_roots_found() {
        // (x-1/3)(x-2/3) on [0,1]
        let f = PiecewisePoly::from_coeffs(
            Domain::UnitInterval,
            vec![2.0 / 9.0, -1.0, 1.0],
        )
        .unwrap();
        let roots = f.sign_roots_in(0.0, 1.0);
        assert_eq!(roots.len(), 2);
        assert!((roots[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((roots[1] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let f = random_piecewise(42, 5, 3, Domain::SymInterval);
        let s = serde_json::to_string(&f).unwrap();
        let g: PiecewisePoly = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
    }
}

//! Non-convex best approximation in the L_p quasi-norm, `0 < p <= 2`.
//!
//! Strategy: solve the convex `p = 2` problem on a dense collocation grid by
//! normal equations, then continue down a descending `p` path with IRLS
//! (weights `|residual|^{p-2}` clipped below), polishing each stage with a
//! small Nelder–Mead when the dimension allows it. Multistart perturbs the
//! convex anchor. The reported error is always the continuous quasi-norm
//! recomputed at the returned coefficients, so it is an upper bound on the
//! true infimum.

use super::{ApproxError, ApproxSpace, Expansion, SpaceKind};
use crate::evaluable::Evaluable;
use crate::piecewise::unit_f64;
use crate::quasinorm::{lp_quasinorm_diff, NormError, PNorm, QuadratureSpec};
use nalgebra::{Cholesky, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::sync::{Arc, Mutex};

/// IRLS residual clip; keeps the `p < 2` weights finite near interpolation
/// points.
const IRLS_CLIP: f64 = 1e-8;
/// Nelder–Mead is only used at small dimension.
const NM_DIM_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestApproxConfig {
    /// Number of multistart branches (the convex anchor plus perturbations).
    pub starts: usize,
    /// Descending continuation path; empty means the default
    /// `2, 1.5, 1, 0.8` filtered down to the target.
    pub p_path: Vec<f64>,
    /// Iteration/evaluation budget per continuation stage.
    pub max_iters: usize,
    pub seed: u64,
    pub rel_tol: f64,
    /// Collocation points per coefficient.
    pub collocation_factor: usize,
    /// Quadrature used for the final (continuous) error evaluations.
    pub quad: QuadratureSpec,
}

impl Default for BestApproxConfig {
    fn default() -> Self {
        Self {
            starts: 12,
            p_path: Vec::new(),
            max_iters: 400,
            seed: 0,
            rel_tol: 1e-6,
            collocation_factor: 32,
            quad: QuadratureSpec {
                base_panels: 512,
                refinement: 6,
                rel_tol: 1e-3,
            },
        }
    }
}

impl BestApproxConfig {
    pub fn with_starts(mut self, starts: usize) -> Self {
        assert!(starts >= 1);
        self.starts = starts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn resolved_path(&self, target: f64) -> Vec<f64> {
        let mut path: Vec<f64> = if self.p_path.is_empty() {
            [2.0, 1.5, 1.0, 0.8]
                .into_iter()
                .filter(|&q| q > target)
                .collect()
        } else {
            self.p_path.iter().copied().filter(|&q| q > target).collect()
        };
        path.push(target);
        path
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRecord {
    pub p: f64,
    pub iterations: usize,
    pub objective: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StartDiagnostics {
    pub start: usize,
    pub stages: Vec<StageRecord>,
    pub error: f64,
    pub hit_iteration_cap: bool,
}

/// Solver output: achieved error (continuous quasi-norm at the coefficients),
/// the expansion itself, and per-start trajectories.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BestApproxResult {
    pub expansion: Expansion,
    pub error: f64,
    pub non_convergent: bool,
    pub chosen_start: usize,
    pub starts: usize,
    pub diagnostics: Vec<StartDiagnostics>,
}

/// Collocation grid with quadrature-style weights and a design-matrix
/// strategy adapted to the basis.
struct Colloc {
    q: Vec<f64>,
    fvals: Vec<f64>,
    /// `phi(x_i)^sigma`, all ones when sigma = 0
    wexp: Vec<f64>,
    design: Design,
    dim: usize,
}

enum Design {
    /// Trig basis on uniform angles, or Chebyshev basis on Chebyshev angles;
    /// Gram entries come from cosine/sine moments of the weights.
    Angles {
        trig: bool,
        n: usize,
        cos1: Vec<f64>,
        sin1: Vec<f64>,
    },
    /// B-spline rows: `m` nonzero values per point starting at `starts[i]`.
    Sparse {
        m: usize,
        starts: Vec<usize>,
        vals: Vec<f64>,
    },
}

impl Colloc {
    fn build(f: &Evaluable, space: &ApproxSpace, factor: usize) -> Self {
        let dim = space.dimension();
        let m_pts = (factor * dim).max(64);
        let sigma = space.weight_sigma;
        match space.kind {
            SpaceKind::Trig { n } => {
                let xs: Vec<f64> = (0..m_pts)
                    .map(|i| TAU * (i as f64 + 0.5) / m_pts as f64)
                    .collect();
                let q = vec![TAU / m_pts as f64; m_pts];
                let fvals = xs.iter().map(|&x| f.eval_unchecked(x)).collect();
                let cos1 = xs.iter().map(|&x| x.cos()).collect();
                let sin1 = xs.iter().map(|&x| x.sin()).collect();
                Colloc {
                    q,
                    fvals,
                    wexp: vec![1.0; m_pts],
                    design: Design::Angles {
                        trig: true,
                        n,
                        cos1,
                        sin1,
                    },
                    dim,
                }
            }
            SpaceKind::AlgPoly { n } => {
                let thetas: Vec<f64> = (0..m_pts)
                    .map(|i| PI * (i as f64 + 0.5) / m_pts as f64)
                    .collect();
                let xs: Vec<f64> = thetas.iter().map(|&t| t.cos()).collect();
                // dx = sin(theta) dtheta
                let q: Vec<f64> = thetas
                    .iter()
                    .map(|&t| PI / m_pts as f64 * t.sin())
                    .collect();
                let fvals = xs.iter().map(|&x| f.eval_unchecked(x)).collect();
                let wexp = if sigma > 0.0 {
                    thetas.iter().map(|&t| t.sin().powf(sigma)).collect()
                } else {
                    vec![1.0; m_pts]
                };
                let cos1 = thetas.iter().map(|&t| t.cos()).collect();
                let sin1 = thetas.iter().map(|&t| t.sin()).collect();
                Colloc {
                    q,
                    fvals,
                    wexp,
                    design: Design::Angles {
                        trig: false,
                        n,
                        cos1,
                        sin1,
                    },
                    dim,
                }
            }
            SpaceKind::Spline { m, n } => {
                let xs: Vec<f64> = (0..m_pts)
                    .map(|i| (i as f64 + 0.5) / m_pts as f64)
                    .collect();
                let q = vec![1.0 / m_pts as f64; m_pts];
                let fvals: Vec<f64> = xs.iter().map(|&x| f.eval_unchecked(x)).collect();
                let t = space.knots();
                let deg = m - 1;
                let mut starts = Vec::with_capacity(m_pts);
                let mut vals = Vec::with_capacity(m_pts * m);
                for &x in &xs {
                    let j = ((x * n as f64).floor() as usize).min(n - 1);
                    let mu = deg + j;
                    starts.push(mu - deg);
                    bspline_nonzero(&t, deg, mu, x, &mut vals);
                }
                Colloc {
                    q,
                    fvals,
                    wexp: vec![1.0; m_pts],
                    design: Design::Sparse { m, starts, vals },
                    dim,
                }
            }
        }
    }

    fn len(&self) -> usize {
        self.fvals.len()
    }

    /// Kernel-smoothed projection: discrete Fourier/Chebyshev coefficients of
    /// `f` tapered by a concentrated positive kernel. Gives a start whose
    /// error already carries the constructive direct-estimate rate, which
    /// matters for jump-type targets where the convex anchor rings globally.
    fn smoothed_start(&self) -> Option<Vec<f64>> {
        let Design::Angles { trig, n, cos1, sin1 } = &self.design else {
            return None;
        };
        if *n == 0 {
            return None;
        }
        let s_pow = 3usize;
        let m_ker = *n / s_pow + 1;
        let taper_raw = super::jackson_coefficients(m_ker, s_pow);
        let taper = |k: usize| -> f64 {
            if k < taper_raw.len() {
                taper_raw[k] / taper_raw[0]
            } else {
                0.0
            }
        };
        let mpts = self.len() as f64;
        let mut c = vec![0.0; self.dim];
        for i in 0..self.len() {
            let f = self.fvals[i] / mpts;
            let (c1, s1) = (cos1[i], sin1[i]);
            let mut ck = c1;
            let mut sk = s1;
            c[0] += f;
            if *trig {
                for k in 1..=*n {
                    c[2 * k - 1] += 2.0 * f * ck;
                    c[2 * k] += 2.0 * f * sk;
                    let cn = ck * c1 - sk * s1;
                    let sn = sk * c1 + ck * s1;
                    ck = cn;
                    sk = sn;
                }
            } else {
                for k in 1..=*n {
                    c[k] += 2.0 * f * ck;
                    let cn = ck * c1 - sk * s1;
                    let sn = sk * c1 + ck * s1;
                    ck = cn;
                    sk = sn;
                }
            }
        }
        if *trig {
            for k in 1..=*n {
                let t = taper(k);
                c[2 * k - 1] *= t;
                c[2 * k] *= t;
            }
        } else {
            for (k, item) in c.iter_mut().enumerate().skip(1) {
                *item *= taper(k);
            }
        }
        Some(c)
    }

    /// Residuals `f_i - (B c)_i`.
    fn residuals(&self, c: &[f64], out: &mut Vec<f64>) {
        out.clear();
        match &self.design {
            Design::Angles { trig, n, cos1, sin1 } => {
                for i in 0..self.len() {
                    let (c1, s1) = (cos1[i], sin1[i]);
                    let mut ck = c1;
                    let mut sk = s1;
                    let mut acc;
                    if *trig {
                        acc = c[0];
                        for k in 1..=*n {
                            acc += c[2 * k - 1] * ck + c[2 * k] * sk;
                            let cn = ck * c1 - sk * s1;
                            let sn = sk * c1 + ck * s1;
                            ck = cn;
                            sk = sn;
                        }
                    } else {
                        acc = c[0];
                        for (k, &coef) in c.iter().enumerate().skip(1) {
                            let _ = k;
                            acc += coef * ck;
                            let cn = ck * c1 - sk * s1;
                            let sn = sk * c1 + ck * s1;
                            ck = cn;
                            sk = sn;
                        }
                    }
                    out.push(self.fvals[i] - acc);
                }
            }
            Design::Sparse { m, starts, vals } => {
                for i in 0..self.len() {
                    let s = starts[i];
                    let mut acc = 0.0;
                    for j in 0..*m {
                        acc += c[s + j] * vals[i * m + j];
                    }
                    out.push(self.fvals[i] - acc);
                }
            }
        }
    }

    /// Weighted grid objective `sum_i q_i (W_i |r_i|)^{pe}`.
    fn objective(&self, c: &[f64], pe: f64, scratch: &mut Vec<f64>) -> f64 {
        self.residuals(c, scratch);
        let mut acc = 0.0;
        for i in 0..self.len() {
            let t = (self.wexp[i] * scratch[i]).abs();
            if t > 0.0 {
                acc += self.q[i] * t.powf(pe);
            }
        }
        acc
    }

    /// Solve the weighted least-squares problem with row weights `u_i`
    /// (already including quadrature and IRLS factors).
    fn weighted_solve(&self, u: &[f64]) -> Option<Vec<f64>> {
        let d = self.dim;
        let mut g = DMatrix::<f64>::zeros(d, d);
        let mut b = DVector::<f64>::zeros(d);
        match &self.design {
            Design::Angles { trig, n, cos1, sin1 } => {
                let lmax = 2 * *n;
                let (mc, ms, mcf, msf) = angle_moments(cos1, sin1, u, &self.fvals, lmax);
                if *trig {
                    let idx = |j: usize| -> (bool, usize) {
                        // (is_sin, frequency)
                        if j == 0 {
                            (false, 0)
                        } else if j % 2 == 1 {
                            (false, j.div_ceil(2))
                        } else {
                            (true, j / 2)
                        }
                    };
                    for row in 0..d {
                        let (rs, rf) = idx(row);
                        for col in row..d {
                            let (cs, cf) = idx(col);
                            let v = match (rs, cs) {
                                (false, false) => {
                                    0.5 * (mc[rf.abs_diff(cf)] + mc[rf + cf])
                                }
                                (true, true) => 0.5 * (mc[rf.abs_diff(cf)] - mc[rf + cf]),
                                // <cos rf, sin cf>
                                (false, true) => {
                                    let diff = ms[rf.abs_diff(cf)]
                                        * if rf > cf { 1.0 } else { -1.0 };
                                    0.5 * (ms[rf + cf] - diff)
                                }
                                (true, false) => {
                                    let diff = ms[rf.abs_diff(cf)]
                                        * if cf > rf { 1.0 } else { -1.0 };
                                    0.5 * (ms[rf + cf] - diff)
                                }
                            };
                            g[(row, col)] = v;
                            g[(col, row)] = v;
                        }
                        b[row] = if rs { msf[rf] } else { mcf[rf] };
                    }
                    // frequency 0: cos(0) = 1 handled by mc[0]; fix the
                    // constant-row normalization (cos 0 * cos 0 = 1)
                    g[(0, 0)] = mc[0];
                } else {
                    for row in 0..d {
                        for col in row..d {
                            let v = 0.5 * (mc[row.abs_diff(col)] + mc[row + col]);
                            g[(row, col)] = v;
                            g[(col, row)] = v;
                        }
                        b[row] = mcf[row];
                    }
                    g[(0, 0)] = mc[0];
                }
            }
            Design::Sparse { m, starts, vals } => {
                for i in 0..self.len() {
                    let ui = u[i];
                    if ui == 0.0 {
                        continue;
                    }
                    let s = starts[i];
                    for a in 0..*m {
                        let va = vals[i * m + a];
                        if va == 0.0 {
                            continue;
                        }
                        b[s + a] += ui * va * self.fvals[i];
                        for bidx in a..*m {
                            g[(s + a, s + bidx)] += ui * va * vals[i * m + bidx];
                        }
                    }
                }
                for row in 0..d {
                    for col in 0..row {
                        g[(row, col)] = g[(col, row)];
                    }
                }
            }
        }
        // Cholesky with escalating ridge as the fallback
        let mean_diag = (0..d).map(|i| g[(i, i)]).sum::<f64>() / d as f64;
        let mut ridge = 0.0;
        for attempt in 0..6 {
            let mut gr = g.clone();
            if ridge > 0.0 {
                for i in 0..d {
                    gr[(i, i)] += ridge;
                }
            }
            if let Some(ch) = Cholesky::new(gr) {
                let sol = ch.solve(&b);
                return Some(sol.iter().copied().collect());
            }
            ridge = mean_diag.max(1e-300) * 1e-12 * 10f64.powi(attempt);
        }
        None
    }
}

/// Cosine/sine moments of `u` and of `u .* f` up to `lmax`, via per-point
/// angle recurrences.
fn angle_moments(
    cos1: &[f64],
    sin1: &[f64],
    u: &[f64],
    f: &[f64],
    lmax: usize,
) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut mc = vec![0.0; lmax + 1];
    let mut ms = vec![0.0; lmax + 1];
    let mut mcf = vec![0.0; lmax + 1];
    let mut msf = vec![0.0; lmax + 1];
    for i in 0..u.len() {
        let ui = u[i];
        if ui == 0.0 {
            continue;
        }
        let uf = ui * f[i];
        let (c1, s1) = (cos1[i], sin1[i]);
        let mut cl = 1.0;
        let mut sl = 0.0;
        for l in 0..=lmax {
            mc[l] += ui * cl;
            ms[l] += ui * sl;
            mcf[l] += uf * cl;
            msf[l] += uf * sl;
            let cn = cl * c1 - sl * s1;
            let sn = sl * c1 + cl * s1;
            cl = cn;
            sl = sn;
        }
    }
    (mc, ms, mcf, msf)
}

/// Cox–de Boor: the `deg+1` nonzero basis values at `x` in span `mu`,
/// appended to `out`.
fn bspline_nonzero(t: &[f64], deg: usize, mu: usize, x: f64, out: &mut Vec<f64>) {
    let mut left = vec![0.0; deg + 1];
    let mut right = vec![0.0; deg + 1];
    let mut n = vec![0.0; deg + 1];
    n[0] = 1.0;
    for j in 1..=deg {
        left[j] = x - t[mu + 1 - j];
        right[j] = t[mu + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            let denom = right[r + 1] + left[j - r];
            let temp = if denom != 0.0 { n[r] / denom } else { 0.0 };
            n[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        n[j] = saved;
    }
    out.extend_from_slice(&n);
}

/// One IRLS + polish pass down the continuation path from `c0`.
fn run_path(
    colloc: &Colloc,
    path: &[f64],
    c0: Vec<f64>,
    cfg: &BestApproxConfig,
) -> (Vec<f64>, Vec<StageRecord>, bool) {
    let mut c = c0;
    let mut stages = Vec::with_capacity(path.len());
    let mut hit_cap = false;
    let mut scratch = Vec::new();
    for &pe in path.iter() {
        let mut iterations = 0usize;
        if pe == 2.0 {
            {
                let u: Vec<f64> = (0..colloc.len())
                    .map(|i| colloc.q[i] * colloc.wexp[i] * colloc.wexp[i])
                    .collect();
                if let Some(next) = colloc.weighted_solve(&u) {
                    c = next;
                }
                iterations = 1;
            }
        } else {
            let irls_cap = cfg.max_iters.min(80).max(1);
            let mut fcur = colloc.objective(&c, pe, &mut scratch);
            loop {
                if iterations >= irls_cap {
                    hit_cap = true;
                    break;
                }
                iterations += 1;
                colloc.residuals(&c, &mut scratch);
                let u: Vec<f64> = (0..colloc.len())
                    .map(|i| {
                        let t = (colloc.wexp[i] * scratch[i]).abs().max(IRLS_CLIP);
                        colloc.q[i] * colloc.wexp[i] * colloc.wexp[i] * t.powf(pe - 2.0)
                    })
                    .collect();
                let Some(mut next) = colloc.weighted_solve(&u) else {
                    break;
                };
                let mut fnext = colloc.objective(&next, pe, &mut scratch);
                // damp if the majorization step overshot
                let mut damp = 0;
                while fnext > fcur && damp < 4 {
                    for (a, &b) in next.iter_mut().zip(c.iter()) {
                        *a = 0.5 * (*a + b);
                    }
                    fnext = colloc.objective(&next, pe, &mut scratch);
                    damp += 1;
                }
                if fnext > fcur {
                    break;
                }
                let rel = (fcur - fnext) / fcur.max(f64::MIN_POSITIVE);
                c = next;
                fcur = fnext;
                if rel <= cfg.rel_tol {
                    break;
                }
            }
        }
        // polytope polish on the grid objective
        if colloc.dim <= NM_DIM_CAP {
            let step = 0.1 * c.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
            if step > 0.0 {
                let budget = cfg.max_iters.max(8 * colloc.dim);
                let mut scratch2 = Vec::new();
                let (cp, _) = nelder_mead(
                    |x| colloc.objective(x, pe, &mut scratch2),
                    &c,
                    step,
                    budget,
                    cfg.rel_tol,
                );
                let fp = colloc.objective(&cp, pe, &mut scratch);
                if fp < colloc.objective(&c, pe, &mut scratch) {
                    c = cp;
                }
            }
        }
        stages.push(StageRecord {
            p: pe,
            iterations,
            objective: colloc.objective(&c, pe, &mut scratch),
        });
    }
    (c, stages, hit_cap)
}

/// Rough magnitude of `f`, used to recognize residuals at rounding-noise
/// level.
fn eval_scale(f: &Evaluable) -> f64 {
    let (a, b) = f.domain().endpoints();
    (0..256)
        .map(|i| f.eval_unchecked(a + (b - a) * (i as f64 + 0.5) / 256.0).abs())
        .fold(0.0f64, f64::max)
}

fn continuous_error(
    f: &Evaluable,
    e: &Expansion,
    p: PNorm,
    quad: &QuadratureSpec,
) -> Result<f64, NormError> {
    let interval = e.space.domain().endpoints();
    let out = lp_quasinorm_diff(
        f,
        &Evaluable::Expansion(e.clone()),
        p,
        e.space.weight_sigma,
        interval,
        quad,
    );
    match out {
        Err(NormError::NonConvergent { value, .. }) if value <= 1e-9 * eval_scale(f) => {
            // residual at rounding-noise level: the estimate is meaningless
            Ok(value)
        }
        other => other,
    }
}

/// Minimize `||phi^sigma (f - e)||_p` over expansions `e` in `space`.
///
/// The result's `error` is the continuous quasi-norm at the returned
/// coefficients: an upper bound on the true infimum. `NonConvergent` stages
/// only set a flag; a result is always returned.
pub fn best_approx(
    f: &Evaluable,
    space: ApproxSpace,
    p: PNorm,
    cfg: &BestApproxConfig,
) -> Result<BestApproxResult, ApproxError> {
    assert!(p.p() <= 2.0, "continuation targets p in (0, 2]");
    assert_eq!(f.domain(), space.domain(), "function and space domains differ");
    let colloc = Colloc::build(f, &space, cfg.collocation_factor);
    let path = cfg.resolved_path(p.p());
    let d = space.dimension();

    // convex anchor
    let u2: Vec<f64> = (0..colloc.len())
        .map(|i| colloc.q[i] * colloc.wexp[i] * colloc.wexp[i])
        .collect();
    let anchor = colloc.weighted_solve(&u2).unwrap_or_else(|| vec![0.0; d]);

    let f_inf = colloc.fvals.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let c_inf = anchor.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let perturb_scale = 0.5 * c_inf.max(0.25 * f_inf);

    // perturbed starts skip the convex stage: re-solving it would collapse
    // them back onto the anchor
    let tail_path: &[f64] = if path.first() == Some(&2.0) && path.len() > 1 {
        &path[1..]
    } else {
        &path
    };
    // Branch lineup: the convex anchor, the zero expansion (hard to beat for
    // spike-like targets in a quasi-norm), the kernel-smoothed projection
    // both raw (a constructive instance with a clean error rate; the empty
    // path leaves it untouched) and IRLS-refined, then random perturbations.
    let smoothed = colloc.smoothed_start();
    let empty_path: &[f64] = &[];
    let total_branches = cfg.starts.max(1) + 2;
    let branches: Vec<(usize, Vec<f64>, &[f64])> = (0..total_branches)
        .map(|s| match (s, &smoothed) {
            (0, _) => (s, anchor.clone(), &path[..]),
            (1, _) => (s, vec![0.0; d], empty_path),
            (2, Some(c)) => (s, c.clone(), empty_path),
            (3, Some(c)) => (s, c.clone(), tail_path),
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(s as u64));
                let c: Vec<f64> = anchor
                    .iter()
                    .map(|&a| a + perturb_scale * (2.0 * unit_f64(&mut rng) - 1.0))
                    .collect();
                (s, c, tail_path)
            }
        })
        .collect();

    let runs: Vec<(StartDiagnostics, Vec<f64>)> = branches
        .into_par_iter()
        .map(|(s, c0, branch_path)| {
            let (c, stages, hit_cap) = run_path(&colloc, branch_path, c0, cfg);
            let expansion = Expansion {
                space,
                coeffs: c.clone(),
            };
            let error = continuous_error(f, &expansion, p, &cfg.quad).unwrap_or(f64::INFINITY);
            (
                StartDiagnostics {
                    start: s,
                    stages,
                    error,
                    hit_iteration_cap: hit_cap,
                },
                c,
            )
        })
        .collect();

    // deterministic pick: minimal error, lowest start index on ties
    let chosen = runs
        .iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.0.error.total_cmp(&b.0.error).then(ia.cmp(ib)))
        .map(|(i, _)| i)
        .unwrap();
    let coeffs = runs[chosen].1.clone();
    let expansion = Expansion { space, coeffs };
    let winner = &runs[chosen].0;
    let error = winner.error;
    let non_convergent = winner.hit_iteration_cap;
    let chosen_start = winner.start;

    Ok(BestApproxResult {
        expansion,
        error,
        non_convergent,
        chosen_start,
        starts: total_branches,
        diagnostics: runs.into_iter().map(|(d, _)| d).collect(),
    })
}

/// Cheap constructive instance of the approximation problem: a tapered
/// projection for the global bases, the Greville point-evaluation
/// quasi-interpolant for splines. Its continuous error is a valid upper
/// bound for the best-approximation error at any degree, which makes long
/// dyadic tails affordable where running the full solver is not.
pub fn constructive_upper_bound(
    f: &Evaluable,
    space: ApproxSpace,
    p: PNorm,
    quad: &QuadratureSpec,
) -> Result<BestApproxResult, ApproxError> {
    assert_eq!(f.domain(), space.domain());
    let coeffs = match space.kind {
        SpaceKind::Spline { m, n } => {
            // Greville abscissae of the clamped uniform knot vector
            let t = space.knots();
            let dim = space.dimension();
            let deg = m - 1;
            (0..dim)
                .map(|i| {
                    let xi = if deg == 0 {
                        0.5 * (t[i] + t[i + 1])
                    } else {
                        t[i + 1..i + 1 + deg].iter().sum::<f64>() / deg as f64
                    };
                    let _ = n;
                    f.eval_unchecked(xi)
                })
                .collect::<Vec<f64>>()
        }
        _ => {
            let colloc = Colloc::build(f, &space, 8);
            colloc
                .smoothed_start()
                .unwrap_or_else(|| vec![0.0; space.dimension()])
        }
    };
    let expansion = Expansion { space, coeffs };
    let error = continuous_error(f, &expansion, p, quad).unwrap_or(f64::INFINITY);
    Ok(BestApproxResult {
        expansion,
        error,
        non_convergent: false,
        chosen_start: 0,
        starts: 1,
        diagnostics: Vec::new(),
    })
}

/// Per-coefficient lattice: `count` evenly spaced values on `[lo, hi]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleGrid {
    pub axes: Vec<(f64, f64, usize)>,
}

impl OracleGrid {
    /// Symmetric box `[-half_width, half_width]^dim` with `count` points per
    /// axis, centered at `center`.
    pub fn centered(center: &[f64], half_width: f64, count: usize) -> Self {
        Self {
            axes: center
                .iter()
                .map(|&c| (c - half_width, c + half_width, count))
                .collect(),
        }
    }

    fn points(&self) -> u128 {
        self.axes.iter().map(|&(_, _, n)| n.max(1) as u128).product()
    }

    fn value(&self, axis: usize, idx: usize) -> f64 {
        let (lo, hi, n) = self.axes[axis];
        if n <= 1 {
            lo
        } else {
            lo + (hi - lo) * idx as f64 / (n - 1) as f64
        }
    }
}

const ORACLE_CAP: u128 = 10_000_000;

/// Exhaustive lattice search over the coefficient box, then one local
/// polytope polish of the lattice minimum against the continuous quasi-norm.
/// Ground truth for tiny spaces (dimension <= 4).
pub fn oracle_best_approx(
    f: &Evaluable,
    space: ApproxSpace,
    p: PNorm,
    grid: &OracleGrid,
    quad: &QuadratureSpec,
) -> Result<BestApproxResult, ApproxError> {
    let d = space.dimension();
    assert!(d <= 4, "oracle is for dimension <= 4");
    assert_eq!(grid.axes.len(), d, "one axis per coefficient");
    let points = grid.points();
    if points > ORACLE_CAP {
        return Err(ApproxError::GridTooLarge {
            points,
            cap: ORACLE_CAP,
        });
    }
    let colloc = Colloc::build(f, &space, 32);
    let pe = p.p();
    let mut idx = vec![0usize; d];
    let mut best_c = vec![0.0; d];
    let mut best_v = f64::INFINITY;
    let mut scratch = Vec::new();
    let mut c = vec![0.0; d];
    loop {
        for a in 0..d {
            c[a] = grid.value(a, idx[a]);
        }
        let v = colloc.objective(&c, pe, &mut scratch);
        if v < best_v {
            best_v = v;
            best_c.copy_from_slice(&c);
        }
        // odometer
        let mut a = 0;
        loop {
            if a == d {
                // exhausted
                let result = polish_and_pack(f, space, p, best_c, quad)?;
                return Ok(result);
            }
            idx[a] += 1;
            if idx[a] < grid.axes[a].2.max(1) {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

fn polish_and_pack(
    f: &Evaluable,
    space: ApproxSpace,
    p: PNorm,
    c: Vec<f64>,
    quad: &QuadratureSpec,
) -> Result<BestApproxResult, ApproxError> {
    let norm_obj = |coeffs: &[f64]| -> f64 {
        let e = Expansion {
            space,
            coeffs: coeffs.to_vec(),
        };
        continuous_error(f, &e, p, quad).unwrap_or(f64::INFINITY)
    };
    let step = 0.05 * (1.0 + c.iter().fold(0.0f64, |m, &v| m.max(v.abs())));
    let (cp, _) = nelder_mead(norm_obj, &c, step, 400, 1e-9);
    let start_v = norm_obj(&c);
    let polished_v = norm_obj(&cp);
    let (c_final, v_final) = if polished_v < start_v {
        (cp, polished_v)
    } else {
        (c, start_v)
    };
    Ok(BestApproxResult {
        expansion: Expansion {
            space,
            coeffs: c_final,
        },
        error: v_final,
        non_convergent: false,
        chosen_start: 0,
        starts: 1,
        diagnostics: Vec::new(),
    })
}

/// Deterministic Nelder–Mead with a fixed evaluation budget.
fn nelder_mead(
    mut obj: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    max_evals: usize,
    rel_tol: f64,
) -> (Vec<f64>, f64) {
    let d = x0.len();
    if d == 0 || step <= 0.0 {
        let v = obj(x0);
        return (x0.to_vec(), v);
    }
    let (alpha, gamma, rho, sig) = (1.0, 2.0, 0.5, 0.5);
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        obj(x)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    let v0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), v0));
    for i in 0..d {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[d].1;
        if worst - best <= rel_tol * (best.abs() + 1e-300) {
            break;
        }
        let mut centroid = vec![0.0; d];
        for (x, _) in &simplex[..d] {
            for (c, &xi) in centroid.iter_mut().zip(x.iter()) {
                *c += xi;
            }
        }
        for c in centroid.iter_mut() {
            *c /= d as f64;
        }
        let reflect: Vec<f64> = centroid
            .iter()
            .zip(simplex[d].0.iter())
            .map(|(&c, &w)| c + alpha * (c - w))
            .collect();
        let fr = eval(&reflect, &mut evals);
        if fr < simplex[0].1 {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(reflect.iter())
                .map(|(&c, &r)| c + gamma * (r - c))
                .collect();
            let fe = eval(&expand, &mut evals);
            simplex[d] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (reflect, fr);
        } else {
            let contract: Vec<f64> = centroid
                .iter()
                .zip(simplex[d].0.iter())
                .map(|(&c, &w)| c + rho * (w - c))
                .collect();
            let fc = eval(&contract, &mut evals);
            if fc < simplex[d].1 {
                simplex[d] = (contract, fc);
            } else {
                let x0s = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = x0s
                        .iter()
                        .zip(item.0.iter())
                        .map(|(&a, &b)| a + sig * (b - a))
                        .collect();
                    let v = eval(&x, &mut evals);
                    *item = (x, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    (simplex[0].0.clone(), simplex[0].1)
}

/// Shared memo for best-approximation results, keyed by a caller-provided
/// canonical string. Concurrent lookups of the same key may race but compute
/// identical values, so the cache never affects results.
#[derive(Default)]
pub struct SolveCache {
    map: Mutex<HashMap<String, Arc<BestApproxResult>>>,
}

impl SolveCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_try_insert_with(
        &self,
        key: &str,
        compute: impl FnOnce() -> Result<BestApproxResult, ApproxError>,
    ) -> Result<Arc<BestApproxResult>, ApproxError> {
        if let Some(hit) = self.map.lock().unwrap().get(key) {
            return Ok(hit.clone());
        }
        let value = Arc::new(compute()?);
        let mut guard = self.map.lock().unwrap();
        let entry = guard.entry(key.to_string()).or_insert_with(|| value.clone());
        Ok(entry.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;
    use crate::families::phi_eps_zero;
    use crate::piecewise::PiecewisePoly;
    use approx::assert_relative_eq;

    fn light_cfg() -> BestApproxConfig {
        BestApproxConfig {
            starts: 6,
            seed: 1,
            quad: QuadratureSpec {
                base_panels: 256,
                refinement: 6,
                rel_tol: 1e-4,
            },
            ..Default::default()
        }
    }

    #[test]
    fn recovers_member_of_space() {
        // f = 0.3 + cos x - 0.5 sin x is itself in Trig(1)
        let target = Expansion::new(ApproxSpace::trig(1), vec![0.3, 1.0, -0.5]).unwrap();
        let f = Evaluable::Expansion(target.clone());
        let p = PNorm::new(0.7);
        let r = best_approx(&f, ApproxSpace::trig(1), p, &light_cfg()).unwrap();
        assert!(r.error <= 1e-8 * 3.0, "error {}", r.error);
        for (a, b) in r.expansion.coeffs.iter().zip(target.coeffs.iter()) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn best_constant_for_sine_at_p2() {
        // f = sin x, constants: best is 0 with error ||sin||_2 = sqrt(pi)
        let f = Evaluable::Expansion(
            Expansion::new(ApproxSpace::trig(1), vec![0.0, 0.0, 1.0]).unwrap(),
        );
        let p = PNorm::new(2.0);
        let r = best_approx(&f, ApproxSpace::trig(0), p, &light_cfg()).unwrap();
        assert!(r.expansion.coeffs[0].abs() < 1e-8);
        assert_relative_eq!(r.error, PI.sqrt(), max_relative = 1e-6);
    }

    #[test]
    fn error_matches_recomputed_norm() {
        let f: Evaluable = phi_eps_zero(0.3).unwrap().into();
        let p = PNorm::new(0.7);
        let cfg = light_cfg();
        let r = best_approx(&f, ApproxSpace::trig(1), p, &cfg).unwrap();
        let again = continuous_error(&f, &r.expansion, p, &cfg.quad).unwrap();
        assert!((r.error - again).abs() <= 1e-9 * again.max(1e-300));
    }

    #[test]
    fn oracle_exact_constant() {
        // one-dimensional space, f constant: lattice containing the value
        let f: Evaluable = PiecewisePoly::constant(Domain::Circle2Pi, 0.25).into();
        let grid = OracleGrid {
            axes: vec![(-1.0, 1.0, 41)],
        };
        let quad = QuadratureSpec {
            base_panels: 128,
            refinement: 6,
            rel_tol: 1e-4,
        };
        let r =
            oracle_best_approx(&f, ApproxSpace::trig(0), PNorm::new(0.5), &grid, &quad).unwrap();
        assert!((r.expansion.coeffs[0] - 0.25).abs() < 1e-6);
        assert!(r.error < 1e-6);
    }

    #[test]
    fn oracle_lattice_refinement_monotone() {
        let f: Evaluable = phi_eps_zero(0.3).unwrap().into();
        let p = PNorm::new(0.7);
        let quad = QuadratureSpec {
            base_panels: 128,
            refinement: 6,
            rel_tol: 1e-4,
        };
        let coarse = OracleGrid {
            axes: vec![(-1.0, 1.0, 11); 3],
        };
        let fine = OracleGrid {
            axes: vec![(-1.0, 1.0, 21); 3],
        };
        let rc = oracle_best_approx(&f, ApproxSpace::trig(1), p, &coarse, &quad).unwrap();
        let rf = oracle_best_approx(&f, ApproxSpace::trig(1), p, &fine, &quad).unwrap();
        assert!(rf.error <= rc.error + 1e-9);
    }

    #[test]
    fn oracle_grid_cap() {
        let f: Evaluable = PiecewisePoly::constant(Domain::Circle2Pi, 0.0).into();
        let grid = OracleGrid {
            axes: vec![(-1.0, 1.0, 3000); 3],
        };
        let quad = QuadratureSpec::default();
        assert!(matches!(
            oracle_best_approx(&f, ApproxSpace::trig(1), PNorm::new(0.5), &grid, &quad),
            Err(ApproxError::GridTooLarge { .. })
        ));
    }

    #[test]
    fn solver_agrees_with_oracle_on_tiny_trig() {
        let f: Evaluable = phi_eps_zero(0.3).unwrap().into();
        let p = PNorm::new(0.7);
        let quad = QuadratureSpec {
            base_panels: 256,
            refinement: 6,
            rel_tol: 1e-4,
        };
        let cfg = BestApproxConfig {
            starts: 8,
            seed: 3,
            quad,
            ..Default::default()
        };
        let solver = best_approx(&f, ApproxSpace::trig(1), p, &cfg).unwrap();
        let grid = OracleGrid::centered(&solver.expansion.coeffs, 0.6, 25);
        let oracle = oracle_best_approx(&f, ApproxSpace::trig(1), p, &grid, &quad).unwrap();
        let rel = (solver.error - oracle.error).abs() / oracle.error;
        assert!(rel < 0.01, "solver {} oracle {}", solver.error, oracle.error);
    }

    #[test]
    fn scaling_equivariance() {
        let f: Evaluable = phi_eps_zero(0.4).unwrap().into();
        let p = PNorm::new(0.8);
        let cfg = light_cfg();
        let base = best_approx(&f, ApproxSpace::trig(1), p, &cfg).unwrap();
        for c in [-2.0, 0.5, 10.0] {
            let scaled_f: Evaluable = phi_eps_zero(0.4).unwrap().scale(c).into();
            let scaled = best_approx(&scaled_f, ApproxSpace::trig(1), p, &cfg).unwrap();
            assert_relative_eq!(scaled.error, c.abs() * base.error, max_relative = 1e-4);
            for (a, b) in scaled.expansion.coeffs.iter().zip(base.expansion.coeffs.iter()) {
                assert!(
                    (a - c * b).abs() <= 1e-4 * (1.0 + (c * b).abs()),
                    "coefficient {a} vs {}",
                    c * b
                );
            }
        }
    }

    #[test]
    fn determinism_across_runs() {
        let f: Evaluable = phi_eps_zero(0.3).unwrap().into();
        let p = PNorm::new(0.6);
        let cfg = light_cfg();
        let a = best_approx(&f, ApproxSpace::trig(2), p, &cfg).unwrap();
        let b = best_approx(&f, ApproxSpace::trig(2), p, &cfg).unwrap();
        assert_eq!(a.error.to_bits(), b.error.to_bits());
        assert_eq!(a.expansion.coeffs, b.expansion.coeffs);
    }
}

//! One runnable recipe per check id. Each recipe resolves its parameters
//! (JSON overrides applied to the defaults shown in the `Default` impls),
//! computes LHS/RHS arrays over its sweep, and grades the ratio statistics.
//! Unspecified constants always become measured quantities: upper estimates
//! pass on "bounded and no growth trend", lower estimates on "bounded away
//! from zero and no decay trend".

use super::fitting::{fit_exponent, tail_sum, TailSum};
use super::sharpness::{sharpness_sweep_impl, SharpnessKind, SharpnessParams};
use super::{CatalogError, CheckId, CheckReport, ExponentRecord, FunctionSpec, Verdict};
use crate::approx::{
    best_approx, bspline_bump, chebyshev_jackson_kernel, constructive_upper_bound,
    jackson_kernel, random_expansion, ApproxSpace, BestApproxConfig, BestApproxResult,
    Expansion, SolveCache,
};
use crate::domain::Domain;
use crate::evaluable::Evaluable;
use crate::moduli::{
    difference_norm, difference_norms_on_grid, dt_modulus, main_part_modulus, modulus,
    modulus_integral, ModulusKind, ModulusSpec,
};
use crate::piecewise::{random_piecewise_with, PiecewisePoly, RandomPiecewiseOptions};
use crate::quasinorm::{lp_quasinorm, lp_quasinorm_diff, weighted_lp_quasinorm, PNorm, QuadratureSpec};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

/// Shared state for one catalog run.
pub struct RunContext<'a> {
    pub seed: u64,
    pub cache: &'a SolveCache,
}

impl<'a> RunContext<'a> {
    pub fn new(seed: u64, cache: &'a SolveCache) -> Self {
        Self { seed, cache }
    }
}

pub(super) fn mix_seed(seed: u64, salt: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(salt)
}

pub(super) fn light_quad() -> QuadratureSpec {
    // check criteria live at percent scale; 1e-3 leaves margin while keeping
    // borderline kink-panel estimates from aborting sweeps
    QuadratureSpec {
        base_panels: 512,
        refinement: 6,
        rel_tol: 1e-3,
    }
}

pub(super) fn light_mspec() -> ModulusSpec {
    ModulusSpec {
        h_grid: 64,
        quad: light_quad(),
    }
}

fn props_mspec() -> ModulusSpec {
    ModulusSpec {
        h_grid: 16,
        quad: QuadratureSpec {
            base_panels: 128,
            refinement: 6,
            rel_tol: 1e-4,
        },
    }
}

/// Multistart effort scaled to the space dimension; the convex anchor does
/// most of the work at large dimension.
pub(super) fn solver_cfg(seed: u64, dim: usize) -> BestApproxConfig {
    let starts = if dim <= 16 {
        8
    } else if dim <= 64 {
        4
    } else {
        2
    };
    BestApproxConfig {
        starts,
        seed,
        max_iters: 300,
        ..Default::default()
    }
}

pub(super) fn solve_cached(
    ctx: &RunContext,
    fkey: &str,
    f: &Evaluable,
    space: ApproxSpace,
    p: PNorm,
    cfg: &BestApproxConfig,
) -> Result<Arc<BestApproxResult>, CatalogError> {
    let key = format!(
        "{fkey}|{}|{:x}|{}",
        serde_json::to_string(&space).expect("space serializes"),
        p.p().to_bits(),
        serde_json::to_string(cfg).expect("config serializes"),
    );
    Ok(ctx.cache.get_or_try_insert_with(&key, || best_approx(f, space, p, cfg))?)
}

/// Report under construction.
struct Rows {
    check: CheckId,
    params: serde_json::Value,
    sweep: Vec<f64>,
    lhs: Vec<f64>,
    rhs: Vec<f64>,
    ratios: Vec<f64>,
    excluded: usize,
    stats: BTreeMap<String, f64>,
    fits: Vec<ExponentRecord>,
    started: Instant,
}

impl Rows {
    fn new<T: serde::Serialize>(check: CheckId, params: &T) -> Self {
        Self {
            check,
            params: serde_json::to_value(params).expect("params serialize"),
            sweep: Vec::new(),
            lhs: Vec::new(),
            rhs: Vec::new(),
            ratios: Vec::new(),
            excluded: 0,
            stats: BTreeMap::new(),
            fits: Vec::new(),
            started: Instant::now(),
        }
    }

    fn push(&mut self, x: f64, lhs: f64, rhs: f64) {
        self.sweep.push(x);
        self.lhs.push(lhs);
        self.rhs.push(rhs);
        if rhs == 0.0 {
            self.excluded += 1;
            self.ratios.push(f64::NAN);
        } else {
            self.ratios.push(lhs / rhs);
        }
    }

    fn stat(&mut self, name: &str, v: f64) {
        self.stats.insert(name.to_string(), v);
    }

    fn fit(&mut self, name: &str, xs: &[f64], ys: &[f64]) -> Option<f64> {
        match fit_exponent(xs, ys) {
            Ok(f) => {
                self.fits.push(ExponentRecord {
                    name: name.to_string(),
                    slope: f.slope,
                    intercept: f.intercept,
                    max_residual: f.max_residual,
                });
                Some(f.slope)
            }
            Err(_) => None,
        }
    }

    fn valid_rows(&self) -> Vec<(f64, f64)> {
        self.sweep
            .iter()
            .zip(self.ratios.iter())
            .filter(|(_, r)| r.is_finite())
            .map(|(&x, &r)| (x, r))
            .collect()
    }

    fn finish(mut self, verdict: Verdict) -> CheckReport {
        let runtime_secs = self.started.elapsed().as_secs_f64();
        self.stat("pass", if verdict.pass { 1.0 } else { 0.0 });
        CheckReport {
            check: self.check.name().to_string(),
            params: self.params,
            sweep: self.sweep,
            lhs: self.lhs,
            rhs: self.rhs,
            ratios: self.ratios,
            excluded: self.excluded,
            stats: self.stats,
            fitted_exponents: self.fits,
            verdict,
            runtime_secs,
        }
    }
}

const RATIO_SLOPE_CAP: f64 = 0.1;
const NEGLIGIBLE_RATIO: f64 = 1e-6;

/// Bounded-above with no growth trend: the measured stand-in for an
/// inequality with an unspecified constant.
fn upper_verdict(rows: &mut Rows) -> Verdict {
    let valid = rows.valid_rows();
    if valid.is_empty() {
        return Verdict {
            pass: true,
            criterion: format!("all {} rows had RHS = 0; nothing to bound", rows.excluded),
        };
    }
    let max_ratio = valid.iter().map(|&(_, r)| r).fold(f64::NEG_INFINITY, f64::max);
    let min_ratio = valid.iter().map(|&(_, r)| r).fold(f64::INFINITY, f64::min);
    rows.stat("max_ratio", max_ratio);
    rows.stat("min_ratio", min_ratio);
    if !max_ratio.is_finite() {
        return Verdict {
            pass: false,
            criterion: "ratio overflowed".into(),
        };
    }
    if max_ratio <= NEGLIGIBLE_RATIO {
        return Verdict {
            pass: true,
            criterion: format!("max ratio {max_ratio:.3e} negligible"),
        };
    }
    let floor = 1e-9 * max_ratio;
    let xs: Vec<f64> = valid.iter().filter(|&&(_, r)| r > floor).map(|&(x, _)| x).collect();
    let ys: Vec<f64> = valid.iter().filter(|&&(_, r)| r > floor).map(|&(_, r)| r).collect();
    let slope = rows.fit("ratio_vs_sweep", &xs, &ys);
    match slope {
        Some(s) => Verdict {
            pass: s <= RATIO_SLOPE_CAP,
            criterion: format!(
                "max ratio {max_ratio:.3e} finite; fitted ratio slope {s:.3} <= {RATIO_SLOPE_CAP}"
            ),
        },
        None => Verdict {
            pass: true,
            criterion: format!("max ratio {max_ratio:.3e} finite; too few rows for a trend fit"),
        },
    }
}

/// Bounded-below with no decay trend (lower estimates).
fn lower_verdict(rows: &mut Rows) -> Verdict {
    let valid = rows.valid_rows();
    if valid.is_empty() {
        return Verdict {
            pass: false,
            criterion: "no valid rows".into(),
        };
    }
    let min_ratio = valid.iter().map(|&(_, r)| r).fold(f64::INFINITY, f64::min);
    let max_ratio = valid.iter().map(|&(_, r)| r).fold(f64::NEG_INFINITY, f64::max);
    rows.stat("min_ratio", min_ratio);
    rows.stat("max_ratio", max_ratio);
    if !(min_ratio > 0.0) {
        return Verdict {
            pass: false,
            criterion: format!("min ratio {min_ratio:.3e} not positive"),
        };
    }
    let xs: Vec<f64> = valid.iter().map(|&(x, _)| x).collect();
    let ys: Vec<f64> = valid.iter().map(|&(_, r)| r).collect();
    let slope = rows.fit("ratio_vs_sweep", &xs, &ys);
    match slope {
        Some(s) => Verdict {
            pass: s >= -RATIO_SLOPE_CAP,
            criterion: format!(
                "min ratio {min_ratio:.3e} > 0; fitted ratio slope {s:.3} >= -{RATIO_SLOPE_CAP}"
            ),
        },
        None => Verdict {
            pass: true,
            criterion: format!("min ratio {min_ratio:.3e} > 0; too few rows for a trend fit"),
        },
    }
}

fn parse_params<T: DeserializeOwned + Default>(v: &serde_json::Value) -> Result<T, CatalogError> {
    if v.is_null() {
        return Ok(T::default());
    }
    serde_json::from_value(v.clone()).map_err(|e| CatalogError::BadParams(e.to_string()))
}

fn derivative_of(f: &Evaluable, order: u32) -> Result<PiecewisePoly, CatalogError> {
    let mut pw = f
        .as_piecewise()
        .ok_or_else(|| CatalogError::BadParams("test function must be piecewise".into()))?;
    for _ in 0..order {
        pw = pw.differentiate();
    }
    Ok(pw)
}

/// Best-approximation errors at the dyadic degrees needed by a tail sum.
#[allow(clippy::too_many_arguments)]
fn sample_errors(
    ctx: &RunContext,
    fkey: &str,
    f: &Evaluable,
    space_of: impl Fn(u32) -> ApproxSpace,
    p: PNorm,
    nus: &[u32],
) -> Result<BTreeMap<u32, f64>, CatalogError> {
    let mut out = BTreeMap::new();
    for &nu in nus {
        let space = space_of(nu);
        let cfg = solver_cfg(ctx.seed, space.dimension());
        let r = solve_cached(ctx, fkey, f, space, p, &cfg)?;
        out.insert(nu, r.error);
    }
    Ok(out)
}

const TAIL_EXTENSION_CAP: u32 = 8192;

/// Extend dyadic error samples with constructive upper bounds until the
/// power-law tail model converges (`beta p - q > 1`) or the degree cap is
/// reached. Needed when the test family decays only beyond the sampled
/// window: a truncated sum would understate the right-hand sides at small
/// `n` and fake a growth trend.
fn extend_samples_until_convergent(
    ctx: &RunContext,
    fkey: &str,
    f: &Evaluable,
    space_of: impl Fn(u32) -> ApproxSpace,
    p: PNorm,
    q: f64,
    samples: &mut BTreeMap<u32, f64>,
) -> Result<(), CatalogError> {
    let bound_quad = QuadratureSpec {
        base_panels: 128,
        refinement: 6,
        rel_tol: 1e-3,
    };
    loop {
        // fitted decay over the last few (monotonized) samples
        let keys: Vec<u32> = samples.keys().copied().collect();
        let mut vals: Vec<f64> = Vec::with_capacity(keys.len());
        let mut running = f64::INFINITY;
        for &k in &keys {
            running = running.min(samples[&k]);
            vals.push(running);
        }
        let cnt = keys.len().min(4);
        let xs: Vec<f64> = keys[keys.len() - cnt..].iter().map(|&k| k as f64).collect();
        let ys: Vec<f64> = vals[vals.len() - cnt..].to_vec();
        let beta = match fit_exponent(&xs, &ys) {
            Ok(fit) => -fit.slope,
            Err(_) => return Ok(()), // zeros: nothing left to resolve
        };
        if beta * p.p() - q > 1.05 {
            return Ok(());
        }
        let next = keys.last().unwrap() * 2;
        if next > TAIL_EXTENSION_CAP {
            return Ok(());
        }
        let space = space_of(next);
        let key = format!(
            "cub|{fkey}|{}|{:x}",
            serde_json::to_string(&space).expect("space serializes"),
            p.p().to_bits(),
        );
        let r = ctx
            .cache
            .get_or_try_insert_with(&key, || constructive_upper_bound(f, space, p, &bound_quad))?;
        samples.insert(next, r.error);
    }
}

fn dyadic_union(ns: &[u32], span: u32) -> Vec<u32> {
    let mut out: Vec<u32> = Vec::new();
    for &n in ns {
        let mut v = n;
        while v <= n * span {
            out.push(v);
            // semi-octave steps keep the monotone brackets tight
            let half = (v as f64 * std::f64::consts::SQRT_2).round() as u32;
            if half <= n * span {
                out.push(half);
            }
            v *= 2;
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Conservative tail handling for upper estimates: when the power-law
/// extrapolation diverges the sampled lower bracket is used and the report
/// is flagged; a smaller RHS only makes the bound harder to satisfy.
fn tail_for_upper(rows: &mut Rows, t: &TailSum) -> f64 {
    if t.divergent {
        let c = rows.stats.get("tail_divergent_rows").copied().unwrap_or(0.0);
        rows.stat("tail_divergent_rows", c + 1.0);
        t.lower
    } else {
        let width = rows.stats.get("tail_bracket_rel_max").copied().unwrap_or(0.0);
        let rel = if t.value > 0.0 {
            (t.upper - t.lower) / t.value
        } else {
            0.0
        };
        rows.stat("tail_bracket_rel_max", width.max(rel));
        t.value
    }
}

pub fn run_check(
    id: CheckId,
    params: &serde_json::Value,
    ctx: &RunContext,
) -> Result<CheckReport, CatalogError> {
    match id {
        CheckId::JacksonTrig => jackson_trig(params, ctx),
        CheckId::JacksonSpline => jackson_spline(params, ctx),
        CheckId::JacksonAlg => jackson_alg(params, ctx),
        CheckId::DirectTrig => direct_or_simul_trig(params, ctx, CheckId::DirectTrig),
        CheckId::SimulTrig => direct_or_simul_trig(params, ctx, CheckId::SimulTrig),
        CheckId::InvDerTrig => invder_trig(params, ctx),
        CheckId::BridgeTrig => bridge_classical(params, ctx, CheckId::BridgeTrig),
        CheckId::InvModTrig => invmod_classical(params, ctx, CheckId::InvModTrig),
        CheckId::Jackson2Trig => jackson2_trig(params, ctx),
        CheckId::LowerTrig => lower_classical(params, ctx, CheckId::LowerTrig),
        CheckId::DirectSpline => direct_or_simul_spline(params, ctx, CheckId::DirectSpline),
        CheckId::SimulSpline => direct_or_simul_spline(params, ctx, CheckId::SimulSpline),
        CheckId::InvDerSpline => invder_spline(params, ctx),
        CheckId::BridgeSpline => bridge_classical(params, ctx, CheckId::BridgeSpline),
        CheckId::InvModSpline => invmod_classical(params, ctx, CheckId::InvModSpline),
        CheckId::LowerSpline => lower_spline(params, ctx),
        CheckId::DirectAlg => direct_or_simul_alg(params, ctx, CheckId::DirectAlg),
        CheckId::SimulAlg => direct_or_simul_alg(params, ctx, CheckId::SimulAlg),
        CheckId::InvDerAlg => invder_alg(params, ctx),
        CheckId::BridgeAlg => bridge_alg(params, ctx),
        CheckId::InvModAlg => invmod_alg(params, ctx),
        CheckId::DtScaling => dt_scaling(params, ctx),
        CheckId::LowerAlg => lower_alg(params, ctx),
        CheckId::StechkinNik => stechkin_nik(params, ctx),
        CheckId::NikolskiiT => nikolskii(params, ctx, CheckId::NikolskiiT),
        CheckId::NikolskiiS => nikolskii(params, ctx, CheckId::NikolskiiS),
        CheckId::NikolskiiP => nikolskii(params, ctx, CheckId::NikolskiiP),
        CheckId::MarkovS => markov_s(params, ctx),
        CheckId::SplineEquiv => spline_equiv(params, ctx),
        CheckId::ModuliProps => moduli_props(params, ctx),
        CheckId::LpDerivDefect => lp_deriv_defect(params, ctx),
        CheckId::SharpnessPr1t => {
            let p: SharpnessParams = parse_params(params)?;
            sharpness_sweep_impl(SharpnessKind::Pr1T, &p, ctx)
        }
        CheckId::SharpnessPrSec21 => {
            let p: SharpnessParams = parse_params(params)?;
            sharpness_sweep_impl(SharpnessKind::PrSec21, &p, ctx)
        }
    }
}

fn default_ns() -> Vec<u32> {
    vec![4, 8, 16, 32]
}

fn default_deltas() -> Vec<f64> {
    (3..=8).map(|k| 0.5f64.powi(k)).collect()
}

// ---------------------------------------------------------------- Jackson

#[derive(Debug, Deserialize, serde::Serialize)]
#[serde(default, deny_unknown_fields)]
struct JacksonParams {
    f: FunctionSpec,
    p: f64,
    k: usize,
    ns: Vec<u32>,
}

impl Default for JacksonParams {
    fn default() -> Self {
        // a jump-type target is scale-free, so the ratio saturates once the
        // ringing tails stop contributing; the window starts there
        Self {
            f: FunctionSpec::FEpsR { eps: 1e-3, r: 1 },
            p: 0.6,
            k: 2,
            ns: vec![32, 64, 128, 256],
        }
    }
}

fn jackson_trig(params: &serde_json::Value, ctx: &RunContext) -> Result<CheckReport, CatalogError> {
    let prm: JacksonParams = parse_params(params)?;
    let f = prm.f.build()?;
    let fkey = prm.f.key();
    let p = PNorm::new(prm.p);
    let mut rows = Rows::new(CheckId::JacksonTrig, &prm);
    for &n in &prm.ns {
        let space = ApproxSpace::trig(n as usize);
        let cfg = solver_cfg(ctx.seed, space.dimension());
        let e = solve_cached(ctx, &fkey, &f, space, p, &cfg)?.error;
        let w = modulus(&f, prm.k, 1.0 / n as f64, p, &light_mspec())?.value;
        rows.push(n as f64, e, w);
    }
    let v = upper_verdict(&mut rows);
    Ok(rows.finish(v))
}

#[derive(Debug, Deserialize, serde::Serialize)]
#[serde(default, deny_unknown_fields)]
struct JacksonSplineParams {
    f: FunctionSpec,
    p: f64,
    r: usize,
    ns: Vec<u32>,
}

impl Default for JacksonSplineParams {
    fn default() -> Self {
        Self {
            f: FunctionSpec::RampR {
                domain: Domain::UnitInterval,
                eps: 1e-3,
                r: 1,
                center: None,
            },
            p: 0.6,
            r: 2,
            ns: default_ns(),
        }
    }
}

fn jackson_spline(
    params: &serde_json::Value,
    ctx: &RunContext,
) -> Result<CheckReport, CatalogError> {
    let prm: JacksonSplineParams = parse_params(params)?;
    let f = prm.f.build()?;
    let fkey = prm.f.key();
    let p = PNorm::new(prm.p);
    let mut rows = Rows::new(CheckId::JacksonSpline, &prm);
    for &n in &prm.ns {
        let space = ApproxSpace::spline(prm.r, n as usize);
        let cfg = solver_cfg(ctx.seed, space.dimension());
        let e = solve_cached(ctx, &fkey, &f, space, p, &cfg)?.error;
        let w = modulus(&f, prm.r, 1.0 / n as f64, p, &light_mspec())?.value;
        rows.push(n as f64, e, w);
    }
    let v = upper_verdict(&mut rows);
    Ok(rows.finish(v))
}

fn jackson_alg(params: &serde_json::Value, ctx: &RunContext) -> Result<CheckReport, CatalogError> {
    let mut prm: JacksonParams = parse_params(params)?;
    if params.get("f").is_none() {
        prm.f = FunctionSpec::RampR {
            domain: Domain::SymInterval,
            eps: 1e-3,
            r: 1,
            center: None,
        };
    }
    if params.get("ns").is_none() {
        prm.ns = vec![64, 128, 256];
    }
    let f = prm.f.build()?;
    let fkey = prm.f.key();
    let p = PNorm::new(prm.p);
    let mut rows = Rows::new(CheckId::JacksonAlg, &prm);
    for &n in &prm.ns {
        if n as usize <= prm.k {
            continue;
        }
        let space = ApproxSpace::alg_poly(n as usize);
        // the grid objective must resolve the continuous quasi-norm near the
        // jump, or the optimizer drifts relative to the modulus side
        let cfg = BestApproxConfig {
            starts: 2,
            seed: ctx.seed,
            max_iters: 300,
            collocation_factor: 64,
            ..Default::default()
        };
        let e = solve_cached(ctx, &fkey, &f, space, p, &cfg)?.error;
        let w = dt_modulus(&f, prm.k, 1.0 / n as f64, p, &light_mspec())?.value;
        rows.push(n as f64, e, w);
    }
    let v = upper_verdict(&mut rows);
    Ok(rows.finish(v))
}

// ------------------------------------------------- direct & simultaneous

#[derive(Debug, Deserialize, serde::Serialize)]
#[serde(default, deny_unknown_fields)]
struct DirectParams {
    f: FunctionSpec,
    p: f64,
    r: u32,
    ns: Vec<u32>,
}

impl Default for DirectParams {
    fn default() -> Self {
        Self {
            f: FunctionSpec::FEpsR { eps: 1e-3, r: 2 },
            p: 0.6,
            r: 2,
            ns: default_ns(),
        }
    }
}

fn direct_or_simul_trig(
    params: &serde_json::Value,
    ctx: &RunContext,
    id: CheckId,
) -> Result<CheckReport, CatalogError> {
    let prm: DirectParams = parse_params(params)?;
    let f = prm.f.build()?;
    let fkey = prm.f.key();
    let p = PNorm::new(prm.p);
    let pp = p.p();
    let fder: Evaluable = derivative_of(&f, prm.r)?.into();
    let fder_key = format!("{fkey}|d{}", prm.r);
    let nus = dyadic_union(&prm.ns, 8);
    let mut samples = sample_errors(
        ctx,
        &fder_key,
        &fder,
        |nu| ApproxSpace::trig(nu as usize),
        p,
        &nus,
    )?;
    extend_samples_until_convergent(
        ctx,
        &fder_key,
        &fder,
        |nu| ApproxSpace::trig(nu as usize),
        p,
        -pp,
        &mut samples,
    )?;
    let mut rows = Rows::new(id, &prm);
    for &n in &prm.ns {
        let t = tail_sum(&samples, -pp, p, n)?;
        let nf = n as f64;
        let tail = tail_for_upper(&mut rows, &t);
        let inner = samples[&n] + nf.powf(1.0 - 1.0 / pp) * tail.powf(1.0 / pp);
        let (lhs, rhs) = if id == CheckId::DirectTrig {
            let space = ApproxSpace::trig(n as usize);
            let cfg = solver_cfg(ctx.seed, space.dimension());
            let e = solve_cached(ctx, &fkey, &f, space, p, &cfg)?.error;
            (e, nf.powi(-(prm.r as i32)) * inner)
        } else {
            let space = ApproxSpace::trig(n as usize);
            let cfg = solver_cfg(ctx.seed, space.dimension());
            let tn = solve_cached(ctx, &fkey, &f, space, p, &cfg)?;
            let tn_der = tn.expansion.derivative(prm.r as usize)?;
            let lhs = lp_quasinorm_diff(
                &fder,
                &Evaluable::Expansion(tn_der),
                p,
                0.0,
                f.domain().endpoints(),
                &light_quad(),
            )?;
            (lhs, inner)
        };
        rows.push(nf, lhs, rhs);
    }
    let v = upper_verdict(&mut rows);
    Ok(rows.finish(v))
}

#[derive(Debug, Deserialize, serde::Serialize)]
#[serde(default, deny_unknown_fields)]
struct InvDerParams {
    f: FunctionSpec,
    p: f64,
    k: u32,
    ns: Vec<u32>,
}

impl Default for InvDerParams {
    fn default() -> Self {
        Self {
            f: FunctionSpec::FEpsR { eps: 1e-3, r: 2 },
            p: 0.6,
            k: 1,
            ns: default_ns(),
        }
    }
}

fn invder_trig(params: &serde_json::Value, ctx: &RunContext) -> Result<CheckReport, CatalogError> {
    let prm: InvDerParams = parse_params(params)?;
    let f = prm.f.build()?;
    let fkey = prm.f.key();
    let p = PNorm::new(prm.p);
    let pp = p.p();
    let fder: Evaluable = derivative_of(&f, prm.k)?.into();
    let nus = dyadic_union(&prm.ns, 8);
    let mut samples =
        sample_errors(ctx, &fkey, &f, |nu| ApproxSpace::trig(nu as usize), p, &nus)?;
    extend_samples_until_convergent(
        ctx,
        &fkey,
        &f,
        |nu| ApproxSpace::trig(nu as usize),
        p,
        prm.k as f64 * pp - 1.0,
        &mut samples,
    )?;
    let mut rows = Rows::new(CheckId::InvDerTrig, &prm);
    for &n in &prm.ns {
        let t = tail_sum(&samples, prm.k as f64 * pp - 1.0, p, n)?;
        let tail = tail_for_upper(&mut rows, &t);
        let nf = n as f64;
        let rhs = nf.powi(prm.k as i32) * samples[&n] + tail.powf(1.0 / pp);
        let space = ApproxSpace::trig(n as usize);
        let cfg = solver_cfg(ctx.seed, space.dimension());
        let tn = solve_cached(ctx, &fkey, &f, space, p, &cfg)?;
        let tn_der = tn.expansion.derivative(prm.k as usize)?;
        let lhs = lp_quasinorm_diff(
            &fder,
            &Evaluable::Expansion(tn_der),
            p,
            0.0,
            f.domain().endpoints(),
            &light_quad(),
        )?;
        rows.push(nf, lhs, rhs);
    }
    let v = upper_verdict(&mut rows);
    Ok(rows.finish(v))
}

// ----------------------------------------------------- bridge & inverse

#[derive(Debug, Deserialize, serde::Serialize)]
#[serde(default, deny_unknown_fields)]
struct BridgeParams {
    f: Option<FunctionSpec>,
    p: f64,
    r: usize,
    k: usize,
    m: usize,
    deltas: Vec<f64>,
}

impl Default for BridgeParams {
    fn default() -> Self {
        Self {
            f: None,
            p: 0.6,
            r: 2,
            k: 1,
            m: 1,
            deltas: default_deltas(),
        }
    }
}

fn bridge_classical(
    params: &serde_json::Value,
    ctx: &RunContext,
    id: CheckId,
) -> Result<CheckReport, CatalogError> {
    let _ = ctx;
    let mut prm: BridgeParams = parse_params(params)?;
    let circle = id == CheckId::BridgeTrig;
    let fspec = prm.f.clone().unwrap_or_else(|| {
        if circle {
            FunctionSpec::FEpsR { eps: 1e-3, r: 2 }
        } else {
            FunctionSpec::RampR {
                domain: Domain::UnitInterval,
                eps: 1e-3,
                r: 3,
                center: None,
            }
        }
    });
    prm.f = Some(fspec.clone());
    let f = fspec.build()?;
    let p = PNorm::new(prm.p);
    let pp = p.p();
    let fder: Evaluable = derivative_of(&f, prm.r as u32)?.into();
    let mut rows = Rows::new(id, &prm);
    for &d in &prm.deltas {
        let lhs = modulus(&f, prm.r + prm.k, d, p, &light_mspec())?.value;
        let w_k = modulus(&fder, prm.k, d, p, &light_mspec())?.value;
        let mi = modulus_integral(
            &fder,
            prm.m,
            p,
            2.0 - pp,
            d,
            &light_mspec(),
            ModulusKind::Classical,
        )?;
        let rel = if mi.value > 0.0 {
            (mi.upper - mi.lower) / mi.value
        } else {
            0.0
        };
        let prev = rows.stats.get("integral_bracket_rel_max").copied().unwrap_or(0.0);
        rows.stat("integral_bracket_rel_max", prev.max(rel));
        let rhs = d.powi(prm.r as i32) * w_k
            + d.powf(prm.r as f64 + 1.0 / pp - 1.0) * mi.value;
        rows.push(d, lhs, rhs);
    }
    let v = upper_verdict(&mut rows);
    Ok(rows.finish(v))
}

fn invmod_classical(
    params: &serde_json::Value,
    ctx: &RunContext,
    id: CheckId,
) -> Result<CheckReport, CatalogError> {
    let _ = ctx;
    let mut prm: BridgeParams = parse_params(params)?;
    let circle = id == CheckId::InvModTrig;
    let fspec = prm.f.clone().unwrap_or_else(|| {
        if circle {
            FunctionSpec::FEpsR { eps: 1e-3, r: 2 }
        } else {
            FunctionSpec::RampR {
                domain: Domain::UnitInterval,
                eps: 1e-3,
                r: 3,
                center: None,
            }
        }
    });
    prm.f = Some(fspec.clone());
    let f = fspec.build()?;
    let p = PNorm::new(prm.p);
    let pp = p.p();
    let fk: Evaluable = derivative_of(&f, prm.k as u32)?.into();
    let mut rows = Rows::new(id, &prm);
    for &d in &prm.deltas {
        let lhs = modulus(&fk, prm.r - prm.k, d, p, &light_mspec())?.value;
        let mi = modulus_integral(
            &f,
            prm.r,
            p,
            pp * prm.k as f64 + 1.0,
            d,
            &light_mspec(),
            ModulusKind::Classical,
        )?;
        rows.push(d, lhs, mi.value);
    }
    let v = upper_verdict(&mut rows);
    Ok(rows.finish(v))
}

fn jackson2_trig(
    params: &serde_json::Value,
    ctx: &RunContext,
) -> Result<CheckReport, CatalogError> {
    #[derive(Debug, Deserialize, serde::Serialize)]
    #[serde(default, deny_unknown_fields)]
    struct P {
        f: FunctionSpec,
        p: f64,
        r: u32,
        k: usize,
        ns: Vec<u32>,
    }
    impl Default for P {
        fn default() -> Self {
            Self {
                f: FunctionSpec::FEpsR { eps: 1e-3, r: 1 },
                p: 0.6,
                r: 1,
                k: 1,
                ns: vec![32, 64, 128, 256],
            }
        }
    }
    let prm: P = parse_params(params)?;
    let f = prm.f.build()?;
    let fkey = prm.f.key();
    let p = PNorm::new(prm.p);
    let pp = p.p();
    let fder: Evaluable = derivative_of(&f, prm.r)?.into();
    let mut rows = Rows::new(CheckId::Jackson2Trig, &prm);
    for &n in &prm.ns {
        let nf = n as f64;
        let space = ApproxSpace::trig(n as usize);
        let cfg = solver_cfg(ctx.seed, space.dimension());
        let lhs = solve_cached(ctx, &fkey, &f, space, p, &cfg)?.error;
        let mi = modulus_integral(
            &fder,
            prm.k,
            p,
            2.0 - pp,
            1.0 / nf,
            &light_mspec(),
            ModulusKind::Classical,
        )?;
        let rhs = nf.powf(-(prm.r as f64) - 1.0 / pp + 1.0) * mi.value;
        rows.push(nf, lhs, rhs);
    }
    let v = upper_verdict(&mut rows);
    Ok(rows.finish(v))
}

#[derive(Debug, Deserialize, serde::Serialize)]
#[serde(default, deny_unknown_fields)]
struct LowerParams {
    f: FunctionSpec,
    p: f64,
    s: usize,
    /// spline order of the approximating space (spline variant only)
    k: usize,
    ns: Vec<u32>,
}

impl Default for LowerParams {
    fn default() -> Self {
        Self {
            f: FunctionSpec::FEpsR { eps: 1e-3, r: 2 },
            p: 0.6,
            s: 2,
            k: 2,
            ns: default_ns(),
        }
    }
}

fn lower_classical(
    params: &serde_json::Value,
    ctx: &RunContext,
    id: CheckId,
) -> Result<CheckReport, CatalogError> {
    let prm: LowerParams = parse_params(params)?;
    let f = prm.f.build()?;
    let fkey = prm.f.key();
    let p = PNorm::new(prm.p);
    let mut rows = Rows::new(id, &prm);
    for &n in &prm.ns {
        let space = ApproxSpace::trig(n as usize);
        let cfg = solver_cfg(ctx.seed, space.dimension());
        let e = solve_cached(ctx, &fkey, &f, space, p, &cfg)?.error;
        let w = modulus(&f, prm.s, 1.0 / n as f64, p, &light_mspec())?.value;
        rows.push(n as f64, e, w);
    }
    let v = lower_verdict(&mut rows);
    Ok(rows.finish(v))
}

fn lower_spline(params: &serde_json::Value, ctx: &RunContext) -> Result<CheckReport, CatalogError> {
    let mut prm: LowerParams = parse_params(params)?;
    if params.get("f").is_none() {
        prm.f = FunctionSpec::RampR {
            domain: Domain::UnitInterval,
            eps: 1e-3,
            r: 1,
            center: None,
        };
        prm.s = 1;
    }
    let f = prm.f.build()?;
    let fkey = prm.f.key();
    let p = PNorm::new(prm.p);
    let mut rows = Rows::new(CheckId::LowerSpline, &prm);
    for &n in &prm.ns {
        let space = ApproxSpace::spline(prm.k, n as usize);
        let cfg = solver_cfg(ctx.seed, space.dimension());
        let e = solve_cached(ctx, &fkey, &f, space, p, &cfg)?.error;
        let w = modulus(&f, prm.s, 1.0 / n as f64, p, &light_mspec())?.value;
        rows.push(n as f64, e, w);
    }
    let v = lower_verdict(&mut rows);
    Ok(rows.finish(v))
}

fn lower_alg(params: &serde_json::Value, ctx: &RunContext) -> Result<CheckReport, CatalogError> {
    let mut prm: LowerParams = parse_params(params)?;
    if params.get("f").is_none() {
        prm.f = FunctionSpec::RampR {
            domain: Domain::SymInterval,
            eps: 1e-3,
            r: 1,
            center: None,
        };
        prm.s = 1;
        prm.p = 0.75;
    }
    let f = prm.f.build()?;
    let fkey = prm.f.key();
    let p = PNorm::new(prm.p);
    let mut rows = Rows::new(CheckId::LowerAlg, &prm);
    for &n in &prm.ns {
        let space = ApproxSpace::alg_poly(n as usize);
        let cfg = solver_cfg(ctx.seed, space.dimension());
        let e = solve_cached(ctx, &fkey, &f, space, p, &cfg)?.error;
        let w = dt_modulus(&f, prm.s, 1.0 / n as f64, p, &light_mspec())?.value;
        rows.push(n as f64, e, w);
    }
    let v = lower_verdict(&mut rows);
    Ok(rows.finish(v))
}

// ------------------------------------------------------------- splines

#[derive(Debug, Deserialize, serde::Serialize)]
#[serde(default, deny_unknown_fields)]
struct DirectSplineParams {
    f: FunctionSpec,
    p: f64,
    m: usize,
    r: u32,
    ns: Vec<u32>,
}

impl Default for DirectSplineParams {
    fn default() -> Self {
        Self {
            f: FunctionSpec::RampR {
                domain: Domain::UnitInterval,
                eps: 1e-3,
                r: 2,
                center: None,
            },
            p: 0.6,
            m: 3,
            r: 1,
            ns: default_ns(),
        }
    }
}

fn direct_or_simul_spline(
    params: &serde_json::Value,
    ctx: &RunContext,
    id: CheckId,
) -> Result<CheckReport, CatalogError> {
    let prm: DirectSplineParams = parse_params(params)?;
    if prm.r as usize >= prm.m {
        return Err(CatalogError::BadParams("need r < m".into()));
    }
    let f = prm.f.build()?;
    let fkey = prm.f.key();
    let p = PNorm::new(prm.p);
    let pp = p.p();
    let fder: Evaluable = derivative_of(&f, prm.r)?.into();
    let fder_key = format!("{fkey}|d{}", prm.r);
    let nus = dyadic_union(&prm.ns, 8);
    let m_red = prm.m - prm.r as usize;
    let mut samples = sample_errors(
        ctx,
        &fder_key,
        &fder,
        |nu| ApproxSpace::spline(m_red, nu as usize),
        p,
        &nus,
    )?;
    extend_samples_until_convergent(
        ctx,
        &fder_key,
        &fder,
        |nu| ApproxSpace::spline(m_red, nu as usize),
        p,
        -pp,
        &mut samples,
    )?;
    let mut rows = Rows::new(id, &prm);
    for &n in &prm.ns {
        let t = tail_sum(&samples, -pp, p, n)?;
        let tail = tail_for_upper(&mut rows, &t);
        let nf = n as f64;
        let inner = samples[&n] + nf.powf(1.0 - 1.0 / pp) * tail.powf(1.0 / pp);
        let space = ApproxSpace::spline(prm.m, n as usize);
        let cfg = solver_cfg(ctx.seed, space.dimension());
        let sn = solve_cached(ctx, &fkey, &f, space, p, &cfg)?;
        let (lhs, rhs) = if id == CheckId::DirectSpline {
            (sn.error, nf.powi(-(prm.r as i32)) * inner)
        } else {
            let sn_der = sn.expansion.derivative(prm.r as usize)?;
            let lhs = lp_quasinorm_diff(
                &fder,
                &Evaluable::Expansion(sn_der),
                p,
                0.0,
                (0.0, 1.0),
                &light_quad(),
            )?;
            (lhs, inner)
        };
        rows.push(nf, lhs, rhs);
    }
    let v = upper_verdict(&mut rows);
    Ok(rows.finish(v))
}

fn invder_spline(
    params: &serde_json::Value,
    ctx: &RunContext,
) -> Result<CheckReport, CatalogError> {
    #[derive(Debug, Deserialize, serde::Serialize)]
    #[serde(default, deny_unknown_fields)]
    struct P {
        f: FunctionSpec,
        p: f64,
        m: usize,
        k: u32,
        ns: Vec<u32>,
    }
    impl Default for P {
        fn default() -> Self {
            Self {
                f: FunctionSpec::RampR {
                    domain: Domain::UnitInterval,
                    eps: 1e-3,
                    r: 2,
                    center: None,
                },
                p: 0.6,
                m: 3,
                k: 1,
                ns: default_ns(),
            }
        }
    }
    let prm: P = parse_params(params)?;
    if prm.k as usize >= prm.m {
        return Err(CatalogError::BadParams("need k < m".into()));
    }
    let f = prm.f.build()?;
    let fkey = prm.f.key();
    let p = PNorm::new(prm.p);
    let pp = p.p();
    let fder: Evaluable = derivative_of(&f, prm.k)?.into();
    let nus = dyadic_union(&prm.ns, 8);
    let mut samples = sample_errors(
        ctx,
        &fkey,
        &f,
        |nu| ApproxSpace::spline(prm.m, nu as usize),
        p,
        &nus,
    )?;
    extend_samples_until_convergent(
        ctx,
        &fkey,
        &f,
        |nu| ApproxSpace::spline(prm.m, nu as usize),
        p,
        prm.k as f64 * pp - 1.0,
        &mut samples,
    )?;
    let mut rows = Rows::new(CheckId::InvDerSpline, &prm);
    for &n in &prm.ns {
        let t = tail_sum(&samples, prm.k as f64 * pp - 1.0, p, n)?;
        let tail = tail_for_upper(&mut rows, &t);
        let nf = n as f64;
        let rhs = nf.powi(prm.k as i32) * samples[&n] + tail.powf(1.0 / pp);
        let space = ApproxSpace::spline(prm.m, n as usize);
        let cfg = solver_cfg(ctx.seed, space.dimension());
        let sn = solve_cached(ctx, &fkey, &f, space, p, &cfg)?;
        let sn_der = sn.expansion.derivative(prm.k as usize)?;
        let lhs = lp_quasinorm_diff(
            &fder,
            &Evaluable::Expansion(sn_der),
            p,
            0.0,
            (0.0, 1.0),
            &light_quad(),
        )?;
        rows.push(nf, lhs, rhs);
    }
    let v = upper_verdict(&mut rows);
    Ok(rows.finish(v))
}

// ----------------------------------------------------------- algebraic

#[derive(Debug, Deserialize, serde::Serialize)]
#[serde(default, deny_unknown_fields)]
struct DirectAlgParams {
    f: FunctionSpec,
    p: f64,
    r: u32,
    ns: Vec<u32>,
}

impl Default for DirectAlgParams {
    fn default() -> Self {
        Self {
            f: FunctionSpec::RampR {
                domain: Domain::SymInterval,
                eps: 1e-3,
                r: 2,
                center: None,
            },
            p: 0.6,
            r: 1,
            ns: vec![8, 16, 32],
        }
    }
}

fn direct_or_simul_alg(
    params: &serde_json::Value,
    ctx: &RunContext,
    id: CheckId,
) -> Result<CheckReport, CatalogError> {
    let prm: DirectAlgParams = parse_params(params)?;
    let f = prm.f.build()?;
    let fkey = prm.f.key();
    let p = PNorm::new(prm.p);
    let pp = p.p();
    let r = prm.r;
    let fder: Evaluable = derivative_of(&f, r)?.into();
    let fder_key = format!("{fkey}|d{r}");
    let sigma = r as f64;
    let nus = dyadic_union(&prm.ns, 8);
    let mut samples = sample_errors(
        ctx,
        &fder_key,
        &fder,
        |nu| ApproxSpace::alg_poly((nu - r) as usize).with_weight(sigma),
        p,
        &nus,
    )?;
    extend_samples_until_convergent(
        ctx,
        &fder_key,
        &fder,
        |nu| ApproxSpace::alg_poly((nu - r) as usize).with_weight(sigma),
        p,
        1.0 - 2.0 * pp,
        &mut samples,
    )?;
    let mut rows = Rows::new(id, &prm);
    for &n in &prm.ns {
        let t = tail_sum(&samples, 1.0 - 2.0 * pp, p, n)?;
        let tail = tail_for_upper(&mut rows, &t);
        let nf = n as f64;
        let inner = samples[&n] + nf.powf(2.0 - 2.0 / pp) * tail.powf(1.0 / pp);
        let space = ApproxSpace::alg_poly(n as usize);
        let cfg = solver_cfg(ctx.seed, space.dimension());
        let pn = solve_cached(ctx, &fkey, &f, space, p, &cfg)?;
        let (lhs, rhs) = if id == CheckId::DirectAlg {
            (pn.error, nf.powi(-(r as i32)) * inner)
        } else {
            let pn_der = pn.expansion.derivative(r as usize)?;
            let lhs = lp_quasinorm_diff(
                &fder,
                &Evaluable::Expansion(pn_der),
                p,
                sigma,
                (-1.0, 1.0),
                &light_quad(),
            )?;
            (lhs, inner)
        };
        rows.push(nf, lhs, rhs);
    }
    let v = upper_verdict(&mut rows);
    Ok(rows.finish(v))
}

fn invder_alg(params: &serde_json::Value, ctx: &RunContext) -> Result<CheckReport, CatalogError> {
    let mut prm: InvDerParams = parse_params(params)?;
    if params.get("f").is_none() {
        prm.f = FunctionSpec::RampR {
            domain: Domain::SymInterval,
            eps: 1e-3,
            r: 2,
            center: None,
        };
    }
    let f = prm.f.build()?;
    let fkey = prm.f.key();
    let p = PNorm::new(prm.p);
    let pp = p.p();
    let k = prm.k;
    let fder: Evaluable = derivative_of(&f, k)?.into();
    let nus = dyadic_union(&prm.ns, 8);
    let mut samples = sample_errors(
        ctx,
        &fkey,
        &f,
        |nu| ApproxSpace::alg_poly(nu as usize),
        p,
        &nus,
    )?;
    extend_samples_until_convergent(
        ctx,
        &fkey,
        &f,
        |nu| ApproxSpace::alg_poly(nu as usize),
        p,
        k as f64 * pp - 1.0,
        &mut samples,
    )?;
    let mut rows = Rows::new(CheckId::InvDerAlg, &prm);
    for &n in &prm.ns {
        let t = tail_sum(&samples, k as f64 * pp - 1.0, p, n)?;
        let tail = tail_for_upper(&mut rows, &t);
        let nf = n as f64;
        let rhs = nf.powi(k as i32) * samples[&n] + tail.powf(1.0 / pp);
        let space = ApproxSpace::alg_poly(n as usize);
        let cfg = solver_cfg(ctx.seed, space.dimension());
        let pn = solve_cached(ctx, &fkey, &f, space, p, &cfg)?;
        let pn_der = pn.expansion.derivative(k as usize)?;
        let lhs = lp_quasinorm_diff(
            &fder,
            &Evaluable::Expansion(pn_der),
            p,
            k as f64,
            (-1.0, 1.0),
            &light_quad(),
        )?;
        rows.push(nf, lhs, rhs);
    }
    let v = upper_verdict(&mut rows);
    Ok(rows.finish(v))
}

fn bridge_alg(params: &serde_json::Value, ctx: &RunContext) -> Result<CheckReport, CatalogError> {
    #[derive(Debug, Deserialize, serde::Serialize)]
    #[serde(default, deny_unknown_fields)]
    struct P {
        f: FunctionSpec,
        p: f64,
        r: u32,
        k: usize,
        deltas: Vec<f64>,
    }
    impl Default for P {
        fn default() -> Self {
            Self {
                f: FunctionSpec::RampR {
                    domain: Domain::SymInterval,
                    eps: 1e-3,
                    r: 2,
                    center: None,
                },
                p: 0.6,
                r: 1,
                k: 1,
                deltas: vec![0.125, 0.0625, 0.03125],
            }
        }
    }
    let prm: P = parse_params(params)?;
    let f = prm.f.build()?;
    let fkey = prm.f.key();
    let p = PNorm::new(prm.p);
    let pp = p.p();
    let r = prm.r;
    let sigma = r as f64;
    let fder: Evaluable = derivative_of(&f, r)?.into();
    let fder_key = format!("{fkey}|d{r}");
    let mut rows = Rows::new(CheckId::BridgeAlg, &prm);
    for &d in &prm.deltas {
        let n_delta = (1.0 / d).floor() as u32;
        let lhs = dt_modulus(&f, r as usize + prm.k, d, p, &light_mspec())?.value;
        let omega = main_part_modulus(&fder, prm.k, d, p, sigma, &light_mspec())?.value;
        // dyadic samples around [1/d, 8/d]
        let mut nus: Vec<u32> = vec![n_delta.div_ceil(2).max(r + 2)];
        let mut v = n_delta.max(r + 2);
        for _ in 0..4 {
            nus.push(v);
            v *= 2;
        }
        nus.sort_unstable();
        nus.dedup();
        let mut samples = sample_errors(
            ctx,
            &fder_key,
            &fder,
            |nu| ApproxSpace::alg_poly((nu - r) as usize).with_weight(sigma),
            p,
            &nus,
        )?;
        extend_samples_until_convergent(
            ctx,
            &fder_key,
            &fder,
            |nu| ApproxSpace::alg_poly((nu - r) as usize).with_weight(sigma),
            p,
            1.0 - 2.0 * pp,
            &mut samples,
        )?;
        let t = tail_sum(&samples, 1.0 - 2.0 * pp, p, n_delta.saturating_sub(1).max(1))?;
        let tail = tail_for_upper(&mut rows, &t);
        let rhs = d.powi(r as i32) * omega
            + d.powf(r as f64 + 2.0 / pp - 2.0) * tail.powf(1.0 / pp);
        rows.push(d, lhs, rhs);
    }
    let v = upper_verdict(&mut rows);
    Ok(rows.finish(v))
}

fn invmod_alg(params: &serde_json::Value, ctx: &RunContext) -> Result<CheckReport, CatalogError> {
    let _ = ctx;
    let mut prm: BridgeParams = parse_params(params)?;
    let fspec = prm.f.clone().unwrap_or(FunctionSpec::RampR {
        domain: Domain::SymInterval,
        eps: 1e-3,
        r: 3,
        center: None,
    });
    prm.f = Some(fspec.clone());
    let f = fspec.build()?;
    let p = PNorm::new(prm.p);
    let pp = p.p();
    let fk: Evaluable = derivative_of(&f, prm.k as u32)?.into();
    let mut rows = Rows::new(CheckId::InvModAlg, &prm);
    for &d in &prm.deltas {
        let lhs = main_part_modulus(&fk, prm.r - prm.k, d, p, prm.k as f64, &light_mspec())?.value;
        let mi = modulus_integral(
            &f,
            prm.r,
            p,
            pp * prm.k as f64 + 1.0,
            d,
            &light_mspec(),
            ModulusKind::DitzianTotik,
        )?;
        rows.push(d, lhs, mi.value);
    }
    let v = upper_verdict(&mut rows);
    Ok(rows.finish(v))
}

// -------------------------------------------------------------- lemmas

fn dt_scaling(params: &serde_json::Value, ctx: &RunContext) -> Result<CheckReport, CatalogError> {
    let _ = ctx;
    #[derive(Debug, Deserialize, serde::Serialize)]
    #[serde(default, deny_unknown_fields)]
    struct P {
        f: FunctionSpec,
        p: f64,
        r: usize,
        delta0: f64,
        lambdas: Vec<f64>,
    }
    impl Default for P {
        fn default() -> Self {
            Self {
                f: FunctionSpec::AbsX,
                p: 0.6,
                r: 2,
                delta0: 0.05,
                lambdas: vec![2.0, 4.0, 8.0],
            }
        }
    }
    let prm: P = parse_params(params)?;
    let f = prm.f.build()?;
    let p = PNorm::new(prm.p);
    let base = dt_modulus(&f, prm.r, prm.delta0, p, &light_mspec())?.value;
    let mut rows = Rows::new(CheckId::DtScaling, &prm);
    for &lam in &prm.lambdas {
        let scaled = dt_modulus(&f, prm.r, lam * prm.delta0, p, &light_mspec())?.value;
        rows.push(lam, scaled, base);
    }
    let cap = prm.r as f64 + 2.0 * (1.0 / p.p1() - 1.0) + 0.3;
    let valid = rows.valid_rows();
    let xs: Vec<f64> = valid.iter().map(|&(x, _)| x).collect();
    let ys: Vec<f64> = valid.iter().map(|&(_, r)| r).collect();
    let slope = rows.fit("growth_vs_lambda", &xs, &ys);
    let verdict = match slope {
        Some(s) => {
            rows.stat("exponent_cap", cap);
            Verdict {
                pass: s <= cap,
                criterion: format!("fitted lambda-growth exponent {s:.3} <= {cap:.3}"),
            }
        }
        None => Verdict {
            pass: false,
            criterion: "growth fit failed".into(),
        },
    };
    Ok(rows.finish(verdict))
}

fn stechkin_nik(params: &serde_json::Value, ctx: &RunContext) -> Result<CheckReport, CatalogError> {
    #[derive(Debug, Deserialize, serde::Serialize)]
    #[serde(default, deny_unknown_fields)]
    struct P {
        p: f64,
        r: usize,
        count: usize,
        n_pool: Vec<u32>,
        spread_cap: f64,
    }
    impl Default for P {
        fn default() -> Self {
            Self {
                p: 0.6,
                r: 2,
                count: 100,
                n_pool: vec![2, 3, 4, 6, 8, 12, 16],
                spread_cap: 50.0,
            }
        }
    }
    let prm: P = parse_params(params)?;
    let p = PNorm::new(prm.p);
    let quad = light_quad();
    let mut rows = Rows::new(CheckId::StechkinNik, &prm);
    for i in 0..prm.count {
        let n = prm.n_pool[i % prm.n_pool.len()];
        let t = random_expansion(ApproxSpace::trig(n as usize), mix_seed(ctx.seed, 300 + i as u64));
        let h = std::f64::consts::PI / (2.0 * n as f64);
        let tder = t.derivative(prm.r)?;
        let lhs = h.powi(prm.r as i32)
            * lp_quasinorm(&Evaluable::Expansion(tder), p, (0.0, std::f64::consts::TAU), &quad)?;
        let rhs = difference_norm(&Evaluable::Expansion(t), prm.r, h, p, &quad)?;
        rows.push(i as f64, lhs, rhs);
    }
    let valid = rows.valid_rows();
    let min = valid.iter().map(|&(_, r)| r).fold(f64::INFINITY, f64::min);
    let max = valid.iter().map(|&(_, r)| r).fold(f64::NEG_INFINITY, f64::max);
    let spread = max / min;
    rows.stat("ratio_min", min);
    rows.stat("ratio_max", max);
    rows.stat("spread", spread);
    let verdict = Verdict {
        pass: min > 0.0 && spread < prm.spread_cap,
        criterion: format!(
            "two-sided: ratio spread c2/c1 = {spread:.2} < {}",
            prm.spread_cap
        ),
    };
    Ok(rows.finish(verdict))
}

fn nikolskii(
    params: &serde_json::Value,
    ctx: &RunContext,
    id: CheckId,
) -> Result<CheckReport, CatalogError> {
    #[derive(Debug, Deserialize, serde::Serialize)]
    #[serde(default, deny_unknown_fields)]
    struct P {
        p: f64,
        q: f64,
        /// spline order (spline variant) or weight exponent r (algebraic)
        m: usize,
        ns: Vec<u32>,
        random_count: usize,
        tol: f64,
    }
    impl Default for P {
        fn default() -> Self {
            Self {
                p: 0.5,
                q: 1.0,
                m: 3,
                ns: default_ns(),
                random_count: 100,
                tol: 0.2,
            }
        }
    }
    let mut prm: P = parse_params(params)?;
    if id == CheckId::NikolskiiP && params.get("ns").is_none() {
        // the endpoint scale is n^{-2}; the asymptotic regime starts later
        prm.ns = vec![32, 64, 128, 256];
    }
    let pn = PNorm::new(prm.p);
    let qn = PNorm::new(prm.q);
    let quad = QuadratureSpec {
        base_panels: if id == CheckId::NikolskiiP { 2048 } else { 1024 },
        refinement: if id == CheckId::NikolskiiP { 10 } else { 6 },
        rel_tol: 1e-4,
    };
    let target = match id {
        CheckId::NikolskiiP => 2.0 * (1.0 / prm.p - 1.0 / prm.q),
        _ => 1.0 / prm.p - 1.0 / prm.q,
    };
    let sigma = if id == CheckId::NikolskiiP {
        1.0
    } else {
        0.0
    };
    let norm = |e: &Expansion, which: PNorm| -> Result<f64, CatalogError> {
        let ev = Evaluable::Expansion(e.clone());
        let interval = ev.domain().endpoints();
        if sigma > 0.0 {
            Ok(weighted_lp_quasinorm(&ev, which, sigma, interval, &quad)?)
        } else {
            Ok(lp_quasinorm(&ev, which, interval, &quad)?)
        }
    };
    // tail decay u^{-2s} must beat both quasi-norm exponents for the peak
    // to dominate; the weighted variant needs an extra power to push the
    // tail correction below the fit tolerance
    let s_base: f64 = if id == CheckId::NikolskiiP { 4.0 } else { 3.0 };
    let s_pow = s_base.max((1.0 / prm.p.min(prm.q) + 0.5).ceil()) as usize;
    let peaked = |n: u32| -> Expansion {
        match id {
            CheckId::NikolskiiT => jackson_kernel(n as usize, s_pow),
            CheckId::NikolskiiS => bspline_bump(prm.m, n as usize),
            _ => chebyshev_jackson_kernel(n as usize, s_pow),
        }
    };
    let space_of = |n: u32| -> ApproxSpace {
        match id {
            CheckId::NikolskiiT => ApproxSpace::trig(n as usize),
            CheckId::NikolskiiS => ApproxSpace::spline(prm.m, n as usize),
            _ => ApproxSpace::alg_poly(n as usize),
        }
    };
    let mut rows = Rows::new(id, &prm);
    for &n in &prm.ns {
        let e = peaked(n);
        let lhs = norm(&e, qn)?;
        let rhs = norm(&e, pn)?;
        rows.push(n as f64, lhs, rhs);
    }
    let valid = rows.valid_rows();
    let xs: Vec<f64> = valid.iter().map(|&(x, _)| x).collect();
    let ys: Vec<f64> = valid.iter().map(|&(_, r)| r).collect();
    let slope = rows
        .fit("norm_ratio_vs_n", &xs, &ys)
        .ok_or(CatalogError::NonPositiveData)?;
    // boundedness spot-check on random elements, normalized by the rate;
    // small degrees suffice here
    let rnd_ns: Vec<u32> = default_ns();
    let mut rnd_max = 0.0f64;
    for i in 0..prm.random_count {
        let n = rnd_ns[i % rnd_ns.len()];
        let e = random_expansion(space_of(n), mix_seed(ctx.seed, 400 + i as u64));
        let ratio = norm(&e, qn)? / norm(&e, pn)?.max(1e-300);
        rnd_max = rnd_max.max(ratio / (n as f64).powf(target));
    }
    rows.stat("random_normalized_max", rnd_max);
    rows.stat("target_exponent", target);
    let verdict = Verdict {
        pass: (slope - target).abs() <= prm.tol && rnd_max.is_finite(),
        criterion: format!(
            "fitted exponent {slope:.3} within {} of {target:.3}; random normalized ratios bounded",
            prm.tol
        ),
    };
    Ok(rows.finish(verdict))
}

fn markov_s(params: &serde_json::Value, ctx: &RunContext) -> Result<CheckReport, CatalogError> {
    #[derive(Debug, Deserialize, serde::Serialize)]
    #[serde(default, deny_unknown_fields)]
    struct P {
        p: f64,
        m: usize,
        r: usize,
        ns: Vec<u32>,
        per_n: usize,
    }
    impl Default for P {
        fn default() -> Self {
            Self {
                p: 0.6,
                m: 4,
                r: 2,
                ns: default_ns(),
                per_n: 10,
            }
        }
    }
    let prm: P = parse_params(params)?;
    if prm.r >= prm.m {
        return Err(CatalogError::BadParams("need r < m".into()));
    }
    let p = PNorm::new(prm.p);
    let quad = light_quad();
    let mut rows = Rows::new(CheckId::MarkovS, &prm);
    for &n in &prm.ns {
        let mut best = (0.0f64, 0.0f64, 0.0f64); // ratio, lhs, rhs
        for i in 0..prm.per_n {
            let s = random_expansion(
                ApproxSpace::spline(prm.m, n as usize),
                mix_seed(ctx.seed, 500 + (n as u64) * 97 + i as u64),
            );
            let sder = s.derivative(prm.r)?;
            let lhs = lp_quasinorm(&Evaluable::Expansion(sder), p, (0.0, 1.0), &quad)?;
            let base = lp_quasinorm(&Evaluable::Expansion(s), p, (0.0, 1.0), &quad)?;
            let rhs = (n as f64).powi(prm.r as i32) * base;
            if rhs > 0.0 && lhs / rhs > best.0 {
                best = (lhs / rhs, lhs, rhs);
            }
        }
        rows.push(n as f64, best.1, best.2);
    }
    let v = upper_verdict(&mut rows);
    Ok(rows.finish(v))
}

fn spline_equiv(params: &serde_json::Value, ctx: &RunContext) -> Result<CheckReport, CatalogError> {
    #[derive(Debug, Deserialize, serde::Serialize)]
    #[serde(default, deny_unknown_fields)]
    struct P {
        p: f64,
        m: usize,
        ns: Vec<u32>,
        per_n: usize,
        spread_cap: f64,
    }
    impl Default for P {
        fn default() -> Self {
            Self {
                p: 0.6,
                m: 3,
                ns: default_ns(),
                per_n: 8,
                spread_cap: 100.0,
            }
        }
    }
    let prm: P = parse_params(params)?;
    let p = PNorm::new(prm.p);
    let pp = p.p();
    let mut rows = Rows::new(CheckId::SplineEquiv, &prm);
    for &n in &prm.ns {
        for i in 0..prm.per_n {
            let s = random_expansion(
                ApproxSpace::spline(prm.m, n as usize),
                mix_seed(ctx.seed, 600 + (n as u64) * 131 + i as u64),
            );
            let w = modulus(
                &Evaluable::Expansion(s.clone()),
                prm.m,
                1.0 / n as f64,
                p,
                &light_mspec(),
            )?
            .value;
            let a: Vec<f64> = crate::approx::truncated_power_coeffs(&s);
            let sum_a: f64 = a.iter().map(|v| v.abs().powf(pp)).sum();
            let scale = (n as f64).powf(-(1.0 + (prm.m as f64 - 1.0) * pp));
            rows.push(n as f64, w.powf(pp), scale * sum_a);
        }
    }
    let valid = rows.valid_rows();
    let min = valid.iter().map(|&(_, r)| r).fold(f64::INFINITY, f64::min);
    let max = valid.iter().map(|&(_, r)| r).fold(f64::NEG_INFINITY, f64::max);
    let spread = max / min;
    rows.stat("c1", min);
    rows.stat("c2", max);
    rows.stat("spread", spread);
    let verdict = Verdict {
        pass: min > 0.0 && spread < prm.spread_cap,
        criterion: format!(
            "equivalence ratio in [{min:.3e}, {max:.3e}], spread {spread:.2} < {}",
            prm.spread_cap
        ),
    };
    Ok(rows.finish(verdict))
}

fn moduli_props(params: &serde_json::Value, ctx: &RunContext) -> Result<CheckReport, CatalogError> {
    #[derive(Debug, Deserialize, serde::Serialize)]
    #[serde(default, deny_unknown_fields)]
    struct P {
        count: usize,
        p: f64,
        delta: f64,
        pieces: usize,
        degree: usize,
    }
    impl Default for P {
        fn default() -> Self {
            Self {
                count: 100,
                p: 0.6,
                delta: 0.25,
                pieces: 4,
                degree: 3,
            }
        }
    }
    let prm: P = parse_params(params)?;
    let p = PNorm::new(prm.p);
    let pp = p.p();
    let p1 = p.p1();
    let spec = props_mspec();
    let slack = 1e-6;
    let half = prm.count / 2;
    let circle_fns: Vec<Evaluable> = (0..half)
        .map(|i| {
            Evaluable::Piecewise(random_piecewise_with(
                mix_seed(ctx.seed, 1000 + i as u64),
                prm.pieces,
                prm.degree,
                Domain::Circle2Pi,
                RandomPiecewiseOptions {
                    continuous: i % 2 == 0,
                    zero_mean: false,
                },
            ))
        })
        .collect();
    let mut rows = Rows::new(CheckId::ModuliProps, &prm);
    let mut dt_doubling_max = 0.0f64;
    let mut order_cmp_max = 0.0f64;
    let (r, k) = (1usize, 2usize);
    for i in 0..half {
        let mut violations = 0.0;
        let f = &circle_fns[i];
        let g = &circle_fns[(i + 1) % half];
        let fg = Evaluable::Piecewise(
            f.as_piecewise().unwrap().lin_comb(1.0, &g.as_piecewise().unwrap(), 1.0),
        );
        let d = prm.delta;
        let wk_sum = modulus(&fg, k, d, p, &spec)?.value;
        let wk_f = modulus(f, k, d, p, &spec)?.value;
        let wk_g = modulus(g, k, d, p, &spec)?.value;
        // subadditivity of the p1-th powers
        if wk_sum.powf(p1) > wk_f.powf(p1) + wk_g.powf(p1) + slack {
            violations += 1.0;
        }
        // order comparison and the norm bound
        let wr_f = modulus(f, r, d, p, &spec)?.value;
        if wk_f > 2f64.powf((k - r) as f64 / p1) * wr_f + slack {
            violations += 1.0;
        }
        let norm_f = lp_quasinorm(f, p, (0.0, std::f64::consts::TAU), &spec.quad)?;
        if wr_f > 2f64.powf(r as f64 / p1) * norm_f + slack {
            violations += 1.0;
        }
        // step scaling with r = 2
        let w2_f = modulus(f, 2, d, p, &spec)?.value;
        for lam in [0.5, 2.0, 5.0] {
            let lhs = modulus(f, 2, lam * d, p, &spec)?.value;
            let cap = 2f64.powf(1.0 / p1 - 1.0)
                * (1.0 + lam).powf(1.0 / p1 + 1.0)
                * w2_f;
            if lhs > cap + slack {
                violations += 1.0;
            }
        }
        // monotonicity in delta over a nested grid
        let ladder = [d / 8.0, d / 4.0, d / 2.0, d];
        let mut union: Vec<f64> = Vec::new();
        for &dj in &ladder {
            union.extend(spec.grid(dj));
        }
        union.sort_by(f64::total_cmp);
        union.dedup();
        let norms = difference_norms_on_grid(f, r, &union, p, &spec.quad)?;
        let mut prev = 0.0;
        for &dj in &ladder {
            let m = union
                .iter()
                .zip(norms.iter())
                .filter(|(&h, _)| h <= dj)
                .map(|(_, &v)| v)
                .fold(0.0f64, f64::max);
            if m < prev - 1e-10 {
                violations += 1.0;
            }
            prev = prev.max(m);
        }
        rows.push(i as f64, violations, 1.0);
    }
    // DT-side properties on [-1, 1]
    for i in 0..(prm.count - half) {
        let mut violations = 0.0;
        let f = Evaluable::Piecewise(random_piecewise_with(
            mix_seed(ctx.seed, 2000 + i as u64),
            prm.pieces,
            prm.degree,
            Domain::SymInterval,
            RandomPiecewiseOptions {
                continuous: i % 2 == 0,
                zero_mean: false,
            },
        ));
        let t = prm.delta / 2.0;
        let w1 = dt_modulus(&f, 1, t, p, &spec)?.value;
        let w2t = dt_modulus(&f, 1, 2.0 * t, p, &spec)?.value;
        if w1 > 0.0 {
            let ratio = w2t / w1;
            dt_doubling_max = dt_doubling_max.max(ratio);
            if ratio >= 10.0 {
                violations += 1.0;
            }
        }
        let wk_phi = dt_modulus(&f, k, prm.delta, p, &spec)?.value;
        let wr_phi = dt_modulus(&f, r, prm.delta, p, &spec)?.value;
        if wr_phi > 0.0 {
            order_cmp_max = order_cmp_max.max(wk_phi / wr_phi);
        }
        rows.push((half + i) as f64, violations, 1.0);
    }
    let total: f64 = rows.lhs.iter().sum();
    rows.stat("violations", total);
    rows.stat("dt_doubling_max", dt_doubling_max);
    rows.stat("order_comparison_max", order_cmp_max);
    let _ = pp;
    let verdict = Verdict {
        pass: total == 0.0 && order_cmp_max.is_finite(),
        criterion: format!(
            "0 violations across {} functions (found {total}); DT doubling max {dt_doubling_max:.2} < 10",
            prm.count
        ),
    };
    Ok(rows.finish(verdict))
}

fn lp_deriv_defect(
    params: &serde_json::Value,
    ctx: &RunContext,
) -> Result<CheckReport, CatalogError> {
    let _ = ctx;
    #[derive(Debug, Deserialize, serde::Serialize)]
    #[serde(default, deny_unknown_fields)]
    struct P {
        f: FunctionSpec,
        p: f64,
        k: u32,
        hs: Vec<f64>,
    }
    impl Default for P {
        fn default() -> Self {
            Self {
                f: FunctionSpec::FEpsR { eps: 1e-3, r: 2 },
                p: 0.6,
                k: 1,
                hs: vec![1e-2, 1e-3, 1e-4],
            }
        }
    }
    let prm: P = parse_params(params)?;
    let f = prm.f.build()?;
    let p = PNorm::new(prm.p);
    let quad = light_quad();
    // the forward difference quotient converges to (-1)^k f^(k)
    let sign = if prm.k % 2 == 0 { 1.0 } else { -1.0 };
    let g = derivative_of(&f, prm.k)?.scale(sign);
    let pw = f.as_piecewise().expect("piecewise family");
    let b: Vec<f64> = {
        let mut b = vec![1.0; prm.k as usize + 1];
        for j in 1..=prm.k as usize {
            b[j] = b[j - 1] * (prm.k as usize - j + 1) as f64 / j as f64;
        }
        b
    };
    let mut rows = Rows::new(CheckId::LpDerivDefect, &prm);
    let mut prev = f64::INFINITY;
    let mut decreasing = true;
    for &h in &prm.hs {
        let terms: Vec<(f64, f64)> = b
            .iter()
            .enumerate()
            .map(|(v, &bv)| {
                let s = if v % 2 == 0 { 1.0 } else { -1.0 };
                (s * bv / h.powi(prm.k as i32), v as f64 * h)
            })
            .collect();
        let comb = pw.combine_shifted(&terms);
        let quotient = comb
            .into_poly(f.domain())
            .ok_or_else(|| CatalogError::BadParams("difference quotient must cover the domain".into()))?;
        let defect_fn = quotient.lin_comb(1.0, &g, -1.0);
        let defect = lp_quasinorm(
            &Evaluable::Piecewise(defect_fn),
            p,
            f.domain().endpoints(),
            &quad,
        )?;
        let ratio_base = if prev.is_finite() { prev } else { defect };
        rows.push(h, defect, ratio_base);
        if defect >= prev {
            decreasing = false;
        }
        prev = defect;
    }
    let verdict = Verdict {
        pass: decreasing,
        criterion: "defect strictly decreasing along the h ladder".into(),
    };
    Ok(rows.finish(verdict))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_from_null() {
        let ctx_cache = SolveCache::new();
        let ctx = RunContext::new(42, &ctx_cache);
        // cheap checks only
        let rep = run_check(
            CheckId::DtScaling,
            &serde_json::Value::Null,
            &ctx,
        )
        .unwrap();
        assert_eq!(rep.check, "DT_SCALING");
        assert_eq!(rep.sweep.len(), 3);
    }

    #[test]
    fn unknown_param_rejected() {
        let ctx_cache = SolveCache::new();
        let ctx = RunContext::new(1, &ctx_cache);
        let params = serde_json::json!({"not_a_param": 1});
        assert!(matches!(
            run_check(CheckId::DtScaling, &params, &ctx),
            Err(CatalogError::BadParams(_))
        ));
    }
}

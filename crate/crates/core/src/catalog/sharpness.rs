//! Sharpness sweeps: drive the ramp-scale `eps` down and watch the ratio of
//! the approximation (or modulus) of `f_eps` to the gamma-weighted
//! right-hand side blow up at the predicted rate `eps^{-min(1-p,gamma)/p}`,
//! with the `gamma = 0` run as the bounded negative control.

use super::fitting::tail_sum;
use super::recipes::{light_mspec, solve_cached, solver_cfg, RunContext};
use super::{CatalogError, CheckId, CheckReport, ExponentRecord, FunctionSpec, Verdict};
use crate::approx::ApproxSpace;
use crate::evaluable::Evaluable;
use crate::moduli::{modulus, modulus_integral, ModulusKind};
use crate::quasinorm::PNorm;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SharpnessKind {
    /// best-approximation form: `E_n(f_eps)` against
    /// `E_n(f_eps^(r)) + (sum_v v^{-p-g} E_v(f_eps^(r))^p)^{1/p}`
    Pr1T,
    /// modulus form: `w_{r+k}(f_eps, d)` against
    /// `(w_k(f_eps^(r), d)^p + int_0^d w_k(f_eps^(r), t)^p / t^{2-p-g} dt)^{1/p}`
    PrSec21,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SharpnessParams {
    pub p: f64,
    pub gamma: f64,
    pub r: u32,
    /// degree for the approximation form
    pub n: u32,
    /// modulus offset for the modulus form (`w_{r+k}` on the left)
    pub k: usize,
    /// step for the modulus form
    pub delta: f64,
    /// descending ladder; when empty it defaults to
    /// `{1/(2n), 1/(4n), 1/(8n), 1/(16n)}` (resp. `delta/2 ...`)
    pub eps_ladder: Vec<f64>,
    pub exponent_tol: f64,
    pub min_growth: f64,
}

impl Default for SharpnessParams {
    fn default() -> Self {
        Self {
            p: 0.4,
            gamma: 1.0,
            r: 1,
            n: 8,
            k: 1,
            delta: 0.125,
            eps_ladder: Vec::new(),
            exponent_tol: 0.25,
            min_growth: 2.0,
        }
    }
}

impl SharpnessParams {
    fn ladder(&self, kind: SharpnessKind) -> Vec<f64> {
        if !self.eps_ladder.is_empty() {
            return self.eps_ladder.clone();
        }
        let base = match kind {
            SharpnessKind::Pr1T => 1.0 / self.n as f64,
            SharpnessKind::PrSec21 => self.delta,
        };
        (1..=4).map(|j| base * 0.5f64.powi(j)).collect()
    }
}

/// Ratio of the left side to the gamma-weighted right side at one `eps`.
fn ratios_at_eps(
    kind: SharpnessKind,
    prm: &SharpnessParams,
    eps: f64,
    gamma: f64,
    ctx: &RunContext,
) -> Result<(f64, f64, bool), CatalogError> {
    let p = PNorm::new(prm.p);
    let pp = p.p();
    let spec = FunctionSpec::FEpsR { eps, r: prm.r };
    let f = spec.build()?;
    let fkey = spec.key();
    let fder: Evaluable = {
        let mut pw = f.as_piecewise().expect("piecewise family");
        for _ in 0..prm.r {
            pw = pw.differentiate();
        }
        Evaluable::Piecewise(pw)
    };
    let fder_key = format!("{fkey}|d{}", prm.r);
    match kind {
        SharpnessKind::Pr1T => {
            let n = prm.n;
            let space = ApproxSpace::trig(n as usize);
            let cfg = solver_cfg(ctx.seed, space.dimension());
            let lhs = solve_cached(ctx, &fkey, &f, space, p, &cfg)?.error;
            let nus: Vec<u32> = (0..=4).map(|j| n << j).collect();
            let mut samples = BTreeMap::new();
            for &nu in &nus {
                let sp = ApproxSpace::trig(nu as usize);
                let cfg = solver_cfg(ctx.seed, sp.dimension());
                samples.insert(nu, solve_cached(ctx, &fder_key, &fder, sp, p, &cfg)?.error);
            }
            let t = tail_sum(&samples, -pp - gamma, p, n)?;
            let tail = if t.divergent { t.lower } else { t.value };
            let denom = samples[&n] + tail.powf(1.0 / pp);
            Ok((lhs, denom, t.divergent))
        }
        SharpnessKind::PrSec21 => {
            let d = prm.delta;
            let lhs = modulus(&f, prm.r as usize + prm.k, d, p, &light_mspec())?.value;
            let w_k = modulus(&fder, prm.k, d, p, &light_mspec())?.value;
            let mi = modulus_integral(
                &fder,
                prm.k,
                p,
                2.0 - pp - gamma,
                d,
                &light_mspec(),
                ModulusKind::Classical,
            );
            let (integral_p, divergent) = match mi {
                Ok(v) => (v.value.powf(pp), false),
                Err(crate::moduli::ModulusError::Diverging { lower, .. }) => {
                    (lower.powf(pp), true)
                }
                Err(e) => return Err(e.into()),
            };
            let denom = (w_k.powf(pp) + integral_p).powf(1.0 / pp);
            Ok((lhs, denom, divergent))
        }
    }
}

pub(super) fn sharpness_sweep_impl(
    kind: SharpnessKind,
    prm: &SharpnessParams,
    ctx: &RunContext,
) -> Result<CheckReport, CatalogError> {
    let started = Instant::now();
    let ladder = prm.ladder(kind);
    let check = match kind {
        SharpnessKind::Pr1T => CheckId::SharpnessPr1t,
        SharpnessKind::PrSec21 => CheckId::SharpnessPrSec21,
    };
    let mut sweep = Vec::new();
    let mut lhs_col = Vec::new();
    let mut rhs_col = Vec::new();
    let mut ratios = Vec::new();
    let mut control_ratios = Vec::new();
    let mut divergent_tails = 0usize;
    for &eps in &ladder {
        let (lhs, rhs, div) = ratios_at_eps(kind, prm, eps, prm.gamma, ctx)?;
        let (clhs, crhs, _) = ratios_at_eps(kind, prm, eps, 0.0, ctx)?;
        if div {
            divergent_tails += 1;
        }
        sweep.push(1.0 / eps);
        lhs_col.push(lhs);
        rhs_col.push(rhs);
        ratios.push(if rhs > 0.0 { lhs / rhs } else { f64::NAN });
        control_ratios.push(if crhs > 0.0 { clhs / crhs } else { f64::NAN });
    }
    let predicted = (1.0 - prm.p).min(prm.gamma) / prm.p;
    let mut stats = BTreeMap::new();
    let mut fits = Vec::new();
    // growth per eps-halving
    let mut min_growth = f64::INFINITY;
    for w in ratios.windows(2) {
        if w[0].is_finite() && w[1].is_finite() && w[0] > 0.0 {
            min_growth = min_growth.min(w[1] / w[0]);
        }
    }
    let fit = super::fitting::fit_exponent(&sweep, &ratios)?;
    fits.push(ExponentRecord {
        name: "blowup_vs_inv_eps".into(),
        slope: fit.slope,
        intercept: fit.intercept,
        max_residual: fit.max_residual,
    });
    let control_fit = super::fitting::fit_exponent(&sweep, &control_ratios).ok();
    let control_slope = control_fit.map(|f| f.slope).unwrap_or(0.0);
    if let Some(cf) = control_fit {
        fits.push(ExponentRecord {
            name: "control_gamma0_vs_inv_eps".into(),
            slope: cf.slope,
            intercept: cf.intercept,
            max_residual: cf.max_residual,
        });
    }
    // stability of the left side across the ladder
    let lhs_min = lhs_col.iter().copied().fold(f64::INFINITY, f64::min);
    let lhs_max = lhs_col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lhs_spread = lhs_max / lhs_min.max(1e-300);
    stats.insert("predicted_exponent".into(), predicted);
    stats.insert("min_growth_per_halving".into(), min_growth);
    stats.insert("control_slope".into(), control_slope);
    stats.insert("lhs_spread".into(), lhs_spread);
    stats.insert("tail_divergent_rows".into(), divergent_tails as f64);
    let exponent_ok = (fit.slope - predicted).abs() <= prm.exponent_tol;
    let growth_ok = min_growth >= prm.min_growth;
    let control_ok = control_slope <= prm.exponent_tol;
    let lhs_ok = lhs_spread < 3.0;
    let pass = exponent_ok && growth_ok && control_ok && lhs_ok;
    let verdict = Verdict {
        pass,
        criterion: format!(
            "blow-up exponent {:.3} within {} of {predicted:.3}; growth/halving {min_growth:.2} >= {}; \
             control slope {control_slope:.3} <= {}; LHS spread {lhs_spread:.2} < 3",
            fit.slope, prm.exponent_tol, prm.min_growth, prm.exponent_tol
        ),
    };
    stats.insert("pass".into(), if pass { 1.0 } else { 0.0 });
    Ok(CheckReport {
        check: check.name().to_string(),
        params: serde_json::to_value(prm).expect("params serialize"),
        sweep,
        lhs: lhs_col,
        rhs: rhs_col,
        ratios,
        excluded: 0,
        stats,
        fitted_exponents: fits,
        verdict,
        runtime_secs: started.elapsed().as_secs_f64(),
    })
}

/// Public entry: run one sharpness sweep with explicit parameters.
pub fn sharpness_sweep(
    kind: SharpnessKind,
    params: &SharpnessParams,
    ctx: &RunContext,
) -> Result<CheckReport, CatalogError> {
    sharpness_sweep_impl(kind, params, ctx)
}

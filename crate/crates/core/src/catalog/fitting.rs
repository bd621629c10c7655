//! Log-log regression for scaling exponents and bracketed dyadic tail sums.

use super::CatalogError;
use crate::quasinorm::PNorm;
use std::collections::BTreeMap;

/// Least-squares line through `(log x, log y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    /// largest |log y - (intercept + slope log x)|, in log units
    pub max_residual: f64,
}

pub fn fit_exponent(xs: &[f64], ys: &[f64]) -> Result<LogLogFit, CatalogError> {
    if xs.len() != ys.len()
        || xs.len() < 3
        || xs.iter().chain(ys.iter()).any(|&v| !(v > 0.0) || !v.is_finite())
    {
        return Err(CatalogError::NonPositiveData);
    }
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = lx.iter().zip(ly.iter()).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(CatalogError::NonPositiveData);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = lx
        .iter()
        .zip(ly.iter())
        .map(|(&a, &b)| (b - (intercept + slope * a)).abs())
        .fold(0.0f64, f64::max);
    Ok(LogLogFit {
        slope,
        intercept,
        max_residual,
    })
}

/// Bracketed estimate of `sum_{v > n} v^q E_v^p` from dyadic samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSum {
    /// midpoint of `[lower, upper]`
    pub value: f64,
    /// sampled blocks only, lower endpoints
    pub lower: f64,
    /// sampled blocks upper endpoints plus the extrapolated tail (when the
    /// power-law model converges)
    pub upper: f64,
    /// fitted decay exponent of `E_v ~ c v^{-beta}`
    pub beta: f64,
    /// set when the extrapolated tail fails `beta p - q > 1`; the brackets
    /// then cover the sampled range only
    pub divergent: bool,
}

/// Sum `sum_{v=n+1}^inf v^q E_v^p` using monotone bracketing over the
/// sampled dyadic blocks and a fitted power-law tail beyond the largest
/// sample. Requires samples at `n` and up to at least `8n`; `E` is
/// monotonized downward to absorb solver noise.
pub fn tail_sum(
    samples: &BTreeMap<u32, f64>,
    q: f64,
    p: PNorm,
    n: u32,
) -> Result<TailSum, CatalogError> {
    let have = samples.keys().copied().max().unwrap_or(0);
    if have < 8 * n || !samples.keys().any(|&k| k <= n) {
        return Err(CatalogError::InsufficientSamples { needed: 8 * n, have });
    }
    let pp = p.p();
    // keys at or above the largest key <= n
    let k0 = samples.keys().copied().filter(|&k| k <= n).max().unwrap();
    let mut keys: Vec<u32> = samples.keys().copied().filter(|&k| k >= k0).collect();
    keys.sort_unstable();
    // monotonize E downward (solver values are upper bounds with noise)
    let mut evals: Vec<f64> = Vec::with_capacity(keys.len());
    let mut running = f64::INFINITY;
    for &k in &keys {
        running = running.min(samples[&k].max(0.0));
        evals.push(running);
    }
    let mut lower = 0.0;
    let mut upper = 0.0;
    for w in 0..keys.len() - 1 {
        let (ka, kb) = (keys[w], keys[w + 1]);
        let start = ka.max(n) + 1;
        if start > kb {
            continue;
        }
        let s: f64 = (start..=kb).map(|v| (v as f64).powf(q)).sum();
        lower += evals[w + 1].powf(pp) * s;
        upper += evals[w].powf(pp) * s;
    }
    // power-law model from the last few samples
    let fit_cnt = keys.len().min(4).max(3);
    let xs: Vec<f64> = keys[keys.len() - fit_cnt..]
        .iter()
        .map(|&k| k as f64)
        .collect();
    let ys: Vec<f64> = evals[evals.len() - fit_cnt..].to_vec();
    let beta = match fit_exponent(&xs, &ys) {
        Ok(fit) => -fit.slope,
        Err(_) => f64::INFINITY, // zeros in the tail: treat as instantly decayed
    };
    let m = *keys.last().unwrap() as f64;
    let e_m = *evals.last().unwrap();
    let s_exp = beta * pp - q;
    let mut divergent = false;
    if e_m > 0.0 {
        if s_exp > 1.0 && beta.is_finite() {
            // anchored at the last sample: terms <= E(M)^p M^{beta p} v^{-s}
            let tail_up = e_m.powf(pp) * m.powf(1.0 + q) / (s_exp - 1.0);
            let tail_lo = e_m.powf(pp) * (m + 1.0).powf(1.0 + q)
                * ((m + 1.0) / m).powf(-beta * pp)
                / (s_exp - 1.0);
            upper += tail_up;
            lower += tail_lo.min(tail_up);
        } else if beta.is_finite() {
            divergent = true;
        }
    }
    Ok(TailSum {
        value: 0.5 * (lower + upper),
        lower,
        upper,
        beta,
        divergent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_cube() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x * x * x).collect();
        let fit = fit_exponent(&xs, &ys).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-12);
        assert!((fit.intercept - 2.0f64.ln()).abs() < 1e-12);
        assert!(fit.max_residual < 1e-12);
    }

    #[test]
    fn fit_of_constant_has_zero_slope() {
        let xs = [1.0, 3.0, 9.0];
        let ys = [5.0, 5.0, 5.0];
        let fit = fit_exponent(&xs, &ys).unwrap();
        assert!(fit.slope.abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_nonpositive() {
        assert!(fit_exponent(&[1.0, 2.0, 3.0], &[1.0, 0.0, 2.0]).is_err());
        assert!(fit_exponent(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn tail_of_zeros_is_zero() {
        let mut s = BTreeMap::new();
        for k in [4u32, 8, 16, 32] {
            s.insert(k, 0.0);
        }
        let t = tail_sum(&s, -0.5, PNorm::new(0.5), 4).unwrap();
        assert_eq!(t.value, 0.0);
        assert!(!t.divergent);
    }

    #[test]
    fn bracket_contains_zeta_tail() {
        // E_v = v^{-2}, q = -p with p = 0.5: sum v^{-1.5} over v > n
        let p = PNorm::new(0.5);
        let n = 4u32;
        let mut s = BTreeMap::new();
        for k in [4u32, 8, 16, 32, 64] {
            s.insert(k, (k as f64).powi(-2));
        }
        let t = tail_sum(&s, -0.5, p, n).unwrap();
        let truth: f64 = (n + 1..2_000_000).map(|v| (v as f64).powf(-1.5)).sum::<f64>()
            + 2.0 / (2e6f64).sqrt();
        assert!(t.lower <= truth && truth <= t.upper, "{t:?} vs {truth}");
        assert!((t.beta - 2.0).abs() < 1e-6);
        assert!(!t.divergent);
    }

    #[test]
    fn flat_samples_flag_divergence() {
        let mut s = BTreeMap::new();
        for k in [4u32, 8, 16, 32] {
            s.insert(k, 1.0);
        }
        let t = tail_sum(&s, -0.5, PNorm::new(0.5), 4).unwrap();
        assert!(t.divergent);
    }

    #[test]
    fn insufficient_samples_detected() {
        let mut s = BTreeMap::new();
        s.insert(4u32, 1.0);
        s.insert(8u32, 0.5);
        assert!(matches!(
            tail_sum(&s, -0.5, PNorm::new(0.5), 4),
            Err(CatalogError::InsufficientSamples { .. })
        ));
    }
}

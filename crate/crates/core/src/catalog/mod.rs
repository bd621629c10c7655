//! The runnable inequality/experiment registry. Every check computes a
//! left-hand side and a right-hand side array over a parameter sweep, turns
//! the unspecified constants of the underlying estimates into measured
//! ratio statistics, and passes or fails against criteria pinned here.

mod coeffs;
mod fitting;
mod recipes;
mod report;
mod sharpness;

pub use coeffs::{a_coeffs, to_f64 as a_coeff_to_f64};
pub use fitting::{fit_exponent, tail_sum, LogLogFit, TailSum};
pub use recipes::{run_check, RunContext};
pub use report::{
    render_csv, run_catalog, summarize, write_check_artifacts, write_summary,
    CatalogRunSummary, SummaryEntry,
};
pub use sharpness::{sharpness_sweep, SharpnessKind, SharpnessParams};

use crate::approx::ApproxError;
use crate::domain::Domain;
use crate::evaluable::Evaluable;
use crate::families;
use crate::moduli::ModulusError;
use crate::piecewise::{
    random_piecewise_with, FunError, PiecewisePoly, RandomPiecewiseOptions,
};
use crate::quasinorm::NormError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("coefficient table too large: r(n-1) = {size} exceeds {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("log-log fit needs at least 3 strictly positive points")]
    NonPositiveData,
    #[error("tail sum needs dyadic samples up to {needed}, have up to {have}")]
    InsufficientSamples { needed: u32, have: u32 },
    #[error("recipe diverged: {0}")]
    RecipeDiverged(String),
    #[error("bad check parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Modulus(#[from] ModulusError),
    #[error(transparent)]
    Approx(#[from] ApproxError),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    Fun(#[from] FunError),
}

macro_rules! check_ids {
    ($(($variant:ident, $name:literal, $desc:literal, $stmt:literal)),+ $(,)?) => {
        /// Identifier of one runnable check.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum CheckId {
            $($variant),+
        }

        impl CheckId {
            pub const ALL: &'static [CheckId] = &[$(CheckId::$variant),+];

            pub fn name(self) -> &'static str {
                match self {
                    $(CheckId::$variant => $name),+
                }
            }

            pub fn description(self) -> &'static str {
                match self {
                    $(CheckId::$variant => $desc),+
                }
            }

            /// The estimate the check exercises, in ASCII notation.
            pub fn statement(self) -> &'static str {
                match self {
                    $(CheckId::$variant => $stmt),+
                }
            }

            pub fn parse(name: &str) -> Option<CheckId> {
                match name {
                    $($name => Some(CheckId::$variant),)+
                    _ => None,
                }
            }
        }
    };
}

check_ids![
    (JacksonTrig, "JACKSON_TRIG", "Jackson estimate, trigonometric approximation",
     "E_n(f)_p <= C w_k(f, 1/n)_p"),
    (JacksonSpline, "JACKSON_SPLINE", "Jackson estimate, spline approximation",
     "E_{r,n}(f)_p <= C w_r(f, 1/n)_p"),
    (JacksonAlg, "JACKSON_ALG", "Jackson estimate, algebraic approximation",
     "E_n(f)_p <= C w_k^phi(f, 1/n)_p"),
    (DirectTrig, "DIRECT_TRIG", "direct estimate of E_n(f) via derivative approximations, trig",
     "E_n(f)_p <= C n^-r (E_n(f^(r))_p + n^{1-1/p} (sum_{v>n} v^-p E_v(f^(r))_p^p)^{1/p})"),
    (SimulTrig, "SIMUL_TRIG", "simultaneous approximation of f and f^(r), trig",
     "||f^(r) - T_n^(r)||_p <= C (E_n(f^(r))_p + n^{1-1/p} (sum_{v>n} v^-p E_v(f^(r))_p^p)^{1/p})"),
    (InvDerTrig, "INVDER_TRIG", "derivative of the best approximant controlled by E_v(f), trig",
     "||f^(k) - T_n^(k)||_p <= C (n^k E_n(f)_p + (sum_{v>n} v^{kp-1} E_v(f)_p^p)^{1/p})"),
    (BridgeTrig, "BRIDGE_TRIG", "modulus of f bridged to a modulus integral of f^(r), trig",
     "w_{r+k}(f,d)_p <= C d^r w_k(f^(r),d)_p + C d^{r+1/p-1} (int_0^d w_m(f^(r),t)_p^p / t^{2-p} dt)^{1/p}"),
    (InvModTrig, "INVMOD_TRIG", "modulus of f^(k) controlled by a modulus integral of f, trig",
     "w_{r-k}(f^(k),d)_p <= C (int_0^d w_r(f,t)_p^p / t^{pk+1} dt)^{1/p}"),
    (Jackson2Trig, "JACKSON2_TRIG", "Jackson-type estimate through the modulus integral, trig",
     "E_n(f)_p <= C n^{-r-1/p+1} (int_0^{1/n} w_k(f^(r),t)_p^p / t^{2-p} dt)^{1/p}"),
    (LowerTrig, "LOWER_TRIG", "lower estimate of E_n by a modulus for the ramp family, trig",
     "w_s(f, 1/n)_p <= L E_n(f)_p"),
    (DirectSpline, "DIRECT_SPLINE", "direct estimate of E_{m,n}(f) via derivative approximations, splines",
     "E_{m,n}(f)_p <= C n^-r (E_{m-r,n}(f^(r))_p + n^{1-1/p} (sum_{v>n} v^-p E_{m-r,v}(f^(r))_p^p)^{1/p})"),
    (SimulSpline, "SIMUL_SPLINE", "simultaneous approximation of f and f^(r), splines",
     "||f^(r) - S_n^(r)||_p <= C (E_{m-r,n}(f^(r))_p + n^{1-1/p} (sum_{v>n} v^-p E_{m-r,v}(f^(r))_p^p)^{1/p})"),
    (InvDerSpline, "INVDER_SPLINE", "derivative of the best spline approximant controlled by E_{m,v}(f)",
     "||f^(k) - S_n^(k)||_p <= C (n^k E_{m,n}(f)_p + (sum_{v>n} v^{kp-1} E_{m,v}(f)_p^p)^{1/p})"),
    (BridgeSpline, "BRIDGE_SPLINE", "modulus of f bridged to a modulus integral of f^(r), interval",
     "w_{r+k}(f,d)_p <= C d^r w_k(f^(r),d)_p + C d^{r+1/p-1} (int_0^d w_m(f^(r),t)_p^p / t^{2-p} dt)^{1/p}"),
    (InvModSpline, "INVMOD_SPLINE", "modulus of f^(k) controlled by a modulus integral of f, interval",
     "w_{r-k}(f^(k),d)_p <= C (int_0^d w_r(f,t)_p^p / t^{pk+1} dt)^{1/p}"),
    (LowerSpline, "LOWER_SPLINE", "lower estimate of E_{k,n} by a modulus for the ramp family, splines",
     "w_s(f, 1/n)_p <= L E_{k,n}(f)_p"),
    (DirectAlg, "DIRECT_ALG", "direct estimate of E_n(f) via weighted derivative approximations, algebraic",
     "E_n(f)_p <= C n^-r (E_{n-r}(f^(r))_{p,phi^r} + n^{2-2/p} (sum_{v>n} v^{1-2p} E_{v-r}(f^(r))_{p,phi^r}^p)^{1/p})"),
    (SimulAlg, "SIMUL_ALG", "simultaneous approximation of f and f^(r), algebraic, phi^r weight",
     "||phi^r (f^(r) - P_n^(r))||_p <= C (E_{n-r}(f^(r))_{p,phi^r} + n^{2-2/p} (sum_{v>n} v^{1-2p} E_{v-r}(f^(r))_{p,phi^r}^p)^{1/p})"),
    (InvDerAlg, "INVDER_ALG", "weighted derivative of the best approximant controlled by E_v(f), algebraic",
     "||phi^k (f^(k) - P_n^(k))||_p <= C (n^k E_n(f)_p + (sum_{v>n} v^{kp-1} E_v(f)_p^p)^{1/p})"),
    (BridgeAlg, "BRIDGE_ALG", "DT modulus of f bridged to the main-part modulus and the E tail, algebraic",
     "w_{r+k}^phi(f,d)_p <= C d^r Om_k^phi(f^(r),d)_{p,phi^r} + C d^{r+2/p-2} (sum_{v>=1/d} v^{1-2p} E_{v-r}(f^(r))_{p,phi^r}^p)^{1/p}"),
    (InvModAlg, "INVMOD_ALG", "main-part modulus of f^(k) controlled by a DT modulus integral of f",
     "Om_{r-k}^phi(f^(k),d)_{p,phi^k} <= C (int_0^d w_r^phi(f,t)_p^p / t^{pk+1} dt)^{1/p}"),
    (DtScaling, "DT_SCALING", "growth of the DT modulus under step scaling",
     "w_r^phi(f, lambda d)_p <= C (1+lambda)^{r + 2(1/p1 - 1)} w_r^phi(f, d)_p"),
    (LowerAlg, "LOWER_ALG", "lower estimate of E_n by a DT modulus for the ramp family, algebraic",
     "w_s^phi(f, 1/n)_p <= L E_n(f)_p"),
    (StechkinNik, "STECHKIN_NIK", "two-sided equivalence of h^r ||T^(r)|| and the difference norm",
     "h^r ||T_n^(r)||_p ~ ||Delta_h^r T_n||_p for h = pi/(2n)"),
    (NikolskiiT, "NIKOLSKII_T", "different-metrics comparison for trig polynomials",
     "||T_n||_q <= C n^{1/p-1/q} ||T_n||_p"),
    (NikolskiiS, "NIKOLSKII_S", "different-metrics comparison for splines",
     "||S_n||_q <= C n^{1/p-1/q} ||S_n||_p"),
    (NikolskiiP, "NIKOLSKII_P", "different-metrics comparison for weighted algebraic polynomials",
     "||phi^r P_n||_q <= C n^{2(1/p-1/q)} ||phi^r P_n||_p"),
    (MarkovS, "MARKOV_S", "derivative norm bound for splines",
     "||S_n^(r)||_p <= C n^r ||S_n||_p"),
    (SplineEquiv, "SPLINE_EQUIV", "modulus of a spline equivalent to the scaled knot-jump sums",
     "w_m(S_n, 1/n)_p^p ~ n^{-(1+(m-1)p)} sum_j |a_j|^p"),
    (ModuliProps, "MODULI_PROPS", "modulus property suite on random piecewise functions",
     "subadditivity, order comparison, step scaling, monotonicity in delta, DT doubling"),
    (LpDerivDefect, "LP_DERIV_DEFECT", "difference-quotient convergence to the derivative",
     "||Delta_h^k f / h^k - (-1)^k f^(k)||_p decreasing as h -> 0"),
    (SharpnessPr1t, "SHARPNESS_PR1T", "blow-up of E_n(f_eps) against the gamma-weighted derivative tail",
     "E_n(f_eps)_p / (E_n(f_eps^(r))_p + (sum v^{-p-g} E_v(f_eps^(r))_p^p)^{1/p}) grows like eps^{-min(1-p,g)/p}"),
    (SharpnessPrSec21, "SHARPNESS_PR_SEC2_1", "blow-up of w_{r+k}(f_eps) against the gamma-weighted modulus integral",
     "w_{r+k}(f_eps,d)_p / (w_k(f_eps^(r),d)_p^p + int_0^d w_k(f_eps^(r),t)_p^p / t^{2-p-g} dt)^{1/p} grows like eps^{-min(1-p,g)/p}"),
];

impl std::fmt::Display for CheckId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for CheckId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for CheckId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let name = String::deserialize(d)?;
        CheckId::parse(&name)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown check id {name}")))
    }
}

/// Slope record from a log-log fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentRecord {
    pub name: String,
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    pub criterion: String,
}

/// Record of one check sweep: parameter values, LHS/RHS arrays, ratio
/// statistics, fitted exponents, and the pass/fail verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub params: serde_json::Value,
    pub sweep: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub ratios: Vec<f64>,
    /// rows with RHS = 0, excluded from ratio statistics
    pub excluded: usize,
    pub stats: BTreeMap<String, f64>,
    pub fitted_exponents: Vec<ExponentRecord>,
    pub verdict: Verdict,
    pub runtime_secs: f64,
}

/// Named test-function families resolvable from check parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FunctionSpec {
    /// ramp/plateau function on the circle
    PhiEps { eps: f64 },
    /// its mean-zero shift
    PhiEpsZero { eps: f64 },
    /// r-th periodic integral of the mean-zero ramp/plateau
    FEpsR { eps: f64, r: u32 },
    /// interval ramp smoothed r-1 times by integration; the kink sits at an
    /// off-grid center by default
    RampR {
        domain: Domain,
        eps: f64,
        r: u32,
        #[serde(default)]
        center: Option<f64>,
    },
    /// |x| on [-1, 1]
    AbsX,
    RandomPiecewise {
        seed: u64,
        pieces: usize,
        degree: usize,
        domain: Domain,
        #[serde(default)]
        continuous: bool,
        #[serde(default)]
        zero_mean: bool,
    },
    /// single global polynomial in the power basis shifted to the left endpoint
    Poly { domain: Domain, coeffs: Vec<f64> },
}

impl FunctionSpec {
    pub fn build(&self) -> Result<Evaluable, CatalogError> {
        let pw: PiecewisePoly = match self {
            FunctionSpec::PhiEps { eps } => families::phi_eps(*eps)?,
            FunctionSpec::PhiEpsZero { eps } => families::phi_eps_zero(*eps)?,
            FunctionSpec::FEpsR { eps, r } => families::f_eps_r(*eps, *r)?,
            FunctionSpec::RampR {
                domain,
                eps,
                r,
                center,
            } => {
                let c = center.unwrap_or_else(|| families::offgrid_center(*domain));
                families::ramp_r(*domain, c, *eps, *r)?
            }
            FunctionSpec::AbsX => families::abs_x(),
            FunctionSpec::RandomPiecewise {
                seed,
                pieces,
                degree,
                domain,
                continuous,
                zero_mean,
            } => random_piecewise_with(
                *seed,
                *pieces,
                *degree,
                *domain,
                RandomPiecewiseOptions {
                    continuous: *continuous,
                    zero_mean: *zero_mean,
                },
            ),
            FunctionSpec::Poly { domain, coeffs } => {
                PiecewisePoly::from_coeffs(*domain, coeffs.clone())?
            }
        };
        Ok(Evaluable::Piecewise(pw))
    }

    /// Canonical key for solver memoization.
    pub fn key(&self) -> String {
        serde_json::to_string(self).expect("function specs serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_names_round_trip() {
        for &id in CheckId::ALL {
            assert_eq!(CheckId::parse(id.name()), Some(id));
        }
        assert_eq!(CheckId::parse("NOT_A_CHECK"), None);
    }

    #[test]
    fn check_count_and_order() {
        assert_eq!(CheckId::ALL.len(), 33);
        assert_eq!(CheckId::ALL[0], CheckId::JacksonTrig);
        assert_eq!(CheckId::ALL[3].name(), "DIRECT_TRIG");
    }

    #[test]
    fn function_spec_builds() {
        let spec = FunctionSpec::FEpsR { eps: 0.01, r: 2 };
        let f = spec.build().unwrap();
        assert_eq!(f.domain(), Domain::Circle2Pi);
        let json = serde_json::to_string(&spec).unwrap();
        let back: FunctionSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }
}

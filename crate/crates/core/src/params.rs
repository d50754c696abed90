//! Soliton parameter algebra and the closed-form solution families.
//!
//! A radial conformally flat Yamabe gradient soliton `g = u^{4/(n+2)} dx²` is
//! described by the dimension `n`, the normalised soliton constant `ρ ∈ {1, 0, −1}`
//! and the scaling exponent `β`. Every other constant appearing in the profile
//! equations is derived from those three and stored alongside them, so that
//! downstream formulas never recompute them from a different subset.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Consistency tolerance for the stored relations between parameters.
pub const RELATION_TOL: f64 = 1e-14;

/// Below this magnitude `γ` is treated as exactly zero.
pub const GAMMA_ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("dimension n = {n} is too small, need n >= 3")]
    DimensionTooSmall { n: usize },
    #[error("beta = {beta} is negative, solitons need beta >= 0")]
    NegativeBeta { beta: f64 },
    #[error("beta = 0 is only admissible for steady solitons (got {class})")]
    ZeroBetaNonSteady { class: SolitonClass },
    #[error("parameter {name} = {value} is not finite")]
    NonFinite { name: &'static str, value: f64 },
    #[error("lambda = {lambda} must be positive")]
    NonpositiveLambda { lambda: f64 },
    #[error("radius r = {r} must be non-negative")]
    NegativeRadius { r: f64 },
    #[error("inconsistent parameters: {relation} violated by {residual:e}")]
    Inconsistent { relation: &'static str, residual: f64 },
}

/// Sign class of the soliton constant `ρ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolitonClass {
    Shrinker,
    Steady,
    Expander,
}

impl SolitonClass {
    pub fn rho(self) -> f64 {
        match self {
            SolitonClass::Shrinker => 1.0,
            SolitonClass::Steady => 0.0,
            SolitonClass::Expander => -1.0,
        }
    }

    pub fn rho_int(self) -> i32 {
        match self {
            SolitonClass::Shrinker => 1,
            SolitonClass::Steady => 0,
            SolitonClass::Expander => -1,
        }
    }

    pub fn from_rho(rho: i32) -> Option<Self> {
        match rho {
            1 => Some(SolitonClass::Shrinker),
            0 => Some(SolitonClass::Steady),
            -1 => Some(SolitonClass::Expander),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SolitonClass::Shrinker => "shrinker",
            SolitonClass::Steady => "steady",
            SolitonClass::Expander => "expander",
        }
    }
}

impl fmt::Display for SolitonClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SolitonClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "shrinker" | "shrinking" | "+1" | "1" => Ok(SolitonClass::Shrinker),
            "steady" | "0" => Ok(SolitonClass::Steady),
            "expander" | "expanding" | "-1" => Ok(SolitonClass::Expander),
            other => Err(format!("unknown soliton class '{other}'")),
        }
    }
}

/// The full, redundantly stored parameter tuple of a radial soliton.
///
/// Fields are private: a value of this type always satisfies
/// `m = (n−2)/(n+2)`, `(1−m)γ = 2β+ρ`, `θ = βm/(n−1)` and `α = 4/(n−2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolitonParams {
    n: usize,
    class: SolitonClass,
    beta: f64,
    gamma: f64,
    m: f64,
    theta: f64,
    alpha: f64,
    flat: bool,
    compact: bool,
}

fn check_dimension(n: usize) -> Result<(), ParamError> {
    if n < 3 {
        Err(ParamError::DimensionTooSmall { n })
    } else {
        Ok(())
    }
}

fn build(n: usize, class: SolitonClass, beta: f64, compact: bool) -> SolitonParams {
    let nf = n as f64;
    let m = (nf - 2.0) / (nf + 2.0);
    let rho = class.rho();
    let gamma = (2.0 * beta + rho) / (1.0 - m);
    SolitonParams {
        n,
        class,
        beta,
        gamma,
        m,
        theta: beta * m / (nf - 1.0),
        alpha: 4.0 / (nf - 2.0),
        flat: class == SolitonClass::Steady && beta == 0.0,
        compact,
    }
}

/// Parameters of the noncompact soliton with the given class and `β`.
///
/// `β = 0` is accepted only for steadies, where it yields the flat metric
/// (flagged via [`SolitonParams::is_flat`]).
pub fn derive_params(n: usize, class: SolitonClass, beta: f64) -> Result<SolitonParams, ParamError> {
    check_dimension(n)?;
    if !beta.is_finite() {
        return Err(ParamError::NonFinite { name: "beta", value: beta });
    }
    if beta < 0.0 {
        return Err(ParamError::NegativeBeta { beta });
    }
    if beta == 0.0 && class != SolitonClass::Steady {
        return Err(ParamError::ZeroBetaNonSteady { class });
    }
    let p = build(n, class, beta, false);
    p.validate()?;
    Ok(p)
}

/// The shrinker with `γ = nβ`, whose profiles are the Barenblatt functions.
pub fn barenblatt_params(n: usize) -> Result<SolitonParams, ParamError> {
    check_dimension(n)?;
    let nf = n as f64;
    derive_params(n, SolitonClass::Shrinker, (nf + 2.0) / (2.0 * (nf - 2.0)))
}

impl SolitonParams {
    /// The compact shrinker `β = 0`, `γ = 1/(1−m)`: round spheres.
    pub fn sphere(n: usize) -> Result<SolitonParams, ParamError> {
        check_dimension(n)?;
        let p = build(n, SolitonClass::Shrinker, 0.0, true);
        p.validate()?;
        Ok(p)
    }

    /// Re-checks every stored relation.
    pub fn validate(&self) -> Result<(), ParamError> {
        check_dimension(self.n)?;
        let nf = self.n as f64;
        let scale = 1.0 + self.gamma.abs() + self.beta.abs();
        let checks = [
            ("m = (n-2)/(n+2)", self.m - (nf - 2.0) / (nf + 2.0)),
            ("(1-m) gamma = 2 beta + rho", ((1.0 - self.m) * self.gamma - 2.0 * self.beta - self.rho()) / scale),
            ("theta = beta m / (n-1)", self.theta - self.beta * self.m / (nf - 1.0)),
            ("alpha = 4/(n-2)", self.alpha - 4.0 / (nf - 2.0)),
        ];
        for (relation, residual) in checks {
            if !(residual.abs() <= RELATION_TOL) {
                return Err(ParamError::Inconsistent { relation, residual });
            }
        }
        if self.beta < 0.0 {
            return Err(ParamError::NegativeBeta { beta: self.beta });
        }
        if self.beta == 0.0 && self.class != SolitonClass::Steady && !self.compact {
            return Err(ParamError::ZeroBetaNonSteady { class: self.class });
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    pub fn class(&self) -> SolitonClass {
        self.class
    }

    pub fn rho(&self) -> f64 {
        self.class.rho()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// `1 − m = 4/(n+2)`, the exponent relating `u` to the conformal factor.
    pub fn one_minus_m(&self) -> f64 {
        4.0 / (self.nf() + 2.0)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Constant of proportionality in `f_s = C w`; equals `2β`.
    pub fn potential_constant(&self) -> f64 {
        2.0 * self.beta
    }

    /// Scalar curvature at the origin, `(1−m)γ = 2β + ρ`.
    pub fn origin_curvature(&self) -> f64 {
        2.0 * self.beta + self.rho()
    }

    pub fn is_flat(&self) -> bool {
        self.flat
    }

    pub fn is_compact(&self) -> bool {
        self.compact
    }

    /// `γ` with the degenerate band `|γ| < 1e−12` collapsed to zero.
    pub fn gamma_sign(&self) -> i32 {
        if self.gamma.abs() < GAMMA_ZERO_TOL {
            0
        } else if self.gamma > 0.0 {
            1
        } else {
            -1
        }
    }

    /// Whether positivity of curvature (`R` monotone, `K0, K1 > 0`, `w_s > 0`)
    /// is expected for this parameter set.
    pub fn expects_positive_curvature(&self) -> bool {
        match self.class {
            SolitonClass::Shrinker => !self.compact && self.beta > 1.0 / (self.nf() - 2.0),
            SolitonClass::Steady | SolitonClass::Expander => self.beta > 0.0 && self.gamma_sign() > 0,
        }
    }
}

/// The closed-form solution families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClosedForm {
    /// `u = (C_n/(λ²+r²))^{1/(1−m)}`, `C_n = (n−2)(n−1)`.
    Barenblatt { n: usize, lambda: f64 },
    /// `u = (C_n λ/(λ²+r²))^{2/(1−m)}`, `C_n = (4n(n−1))^{1/2}`.
    Sphere { n: usize, lambda: f64 },
    /// `u ≡ λ`, the Euclidean metric.
    Flat { n: usize, lambda: f64 },
}

/// `ln u` and its first two radial derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogJet {
    pub log_u: f64,
    pub d1: f64,
    pub d2: f64,
}

impl LogJet {
    pub fn u(&self) -> f64 {
        self.log_u.exp()
    }

    pub fn du_dr(&self) -> f64 {
        self.u() * self.d1
    }

    pub fn d2u_dr2(&self) -> f64 {
        self.u() * (self.d2 + self.d1 * self.d1)
    }
}

impl ClosedForm {
    pub fn barenblatt(n: usize, lambda: f64) -> Result<Self, ParamError> {
        check_dimension(n)?;
        check_lambda(lambda)?;
        Ok(ClosedForm::Barenblatt { n, lambda })
    }

    /// The Barenblatt member with `u(0) = u0`, the normalization used by shooting.
    pub fn barenblatt_with_origin_value(n: usize, u0: f64) -> Result<Self, ParamError> {
        check_dimension(n)?;
        check_lambda(u0)?;
        let nf = n as f64;
        let one_minus_m = 4.0 / (nf + 2.0);
        let lambda = ((nf - 2.0) * (nf - 1.0) / u0.powf(one_minus_m)).sqrt();
        Self::barenblatt(n, lambda)
    }

    pub fn sphere(n: usize, lambda: f64) -> Result<Self, ParamError> {
        check_dimension(n)?;
        check_lambda(lambda)?;
        Ok(ClosedForm::Sphere { n, lambda })
    }

    pub fn flat(n: usize, lambda: f64) -> Result<Self, ParamError> {
        check_dimension(n)?;
        check_lambda(lambda)?;
        Ok(ClosedForm::Flat { n, lambda })
    }

    pub fn n(&self) -> usize {
        match *self {
            ClosedForm::Barenblatt { n, .. } | ClosedForm::Sphere { n, .. } | ClosedForm::Flat { n, .. } => n,
        }
    }

    pub fn lambda(&self) -> f64 {
        match *self {
            ClosedForm::Barenblatt { lambda, .. }
            | ClosedForm::Sphere { lambda, .. }
            | ClosedForm::Flat { lambda, .. } => lambda,
        }
    }

    pub fn params(&self) -> SolitonParams {
        let n = self.n();
        let p = match self {
            ClosedForm::Barenblatt { .. } => barenblatt_params(n),
            ClosedForm::Sphere { .. } => SolitonParams::sphere(n),
            ClosedForm::Flat { .. } => derive_params(n, SolitonClass::Steady, 0.0),
        };
        p.expect("closed forms are constructed with a valid dimension")
    }

    /// Value at the origin `u(0)`.
    pub fn origin_value(&self) -> f64 {
        self.log_jet(0.0).u()
    }

    /// `(ln A, k)` such that `u = (A/(λ²+r²))^k`.
    fn power_form(&self) -> Option<(f64, f64)> {
        let nf = self.n() as f64;
        let one_minus_m = 4.0 / (nf + 2.0);
        match *self {
            ClosedForm::Barenblatt { .. } => Some((((nf - 2.0) * (nf - 1.0)).ln(), 1.0 / one_minus_m)),
            ClosedForm::Sphere { lambda, .. } => {
                let c = (4.0 * nf * (nf - 1.0)).sqrt();
                Some(((c * lambda).ln(), 2.0 / one_minus_m))
            }
            ClosedForm::Flat { .. } => None,
        }
    }

    /// Log-space evaluation: stays finite where `u` itself would underflow.
    pub fn log_jet(&self, r: f64) -> LogJet {
        let lambda = self.lambda();
        match self.power_form() {
            None => LogJet { log_u: lambda.ln(), d1: 0.0, d2: 0.0 },
            Some((ln_a, k)) => {
                let l2 = lambda * lambda;
                let r2 = r * r;
                let d = if r2 > 1e150 * l2.max(1.0) {
                    // λ²+r² overflows in squares only at r ~ 1e154; stay in logs.
                    2.0 * r.ln() + (l2 / r2).ln_1p()
                } else {
                    (l2 + r2).ln()
                };
                let denom = l2 + r2;
                LogJet { log_u: k * (ln_a - d), d1: -2.0 * k * r / denom, d2: -2.0 * k * (l2 - r2) / (denom * denom) }
            }
        }
    }

    /// `(u, du/dr)` from the analytic expression.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        let j = self.log_jet(r);
        (j.u(), j.du_dr())
    }

    /// Logarithmic slope `ℓ = r u_r/u` and its first two derivatives in `s = ln r`.
    ///
    /// For both power families `ℓ(s) = −2k σ(2(s − ln λ))` with `σ` the logistic
    /// function, which keeps the derivatives exact for very negative `s`.
    pub fn log_slope_jet_in_s(&self, s: f64) -> (f64, f64, f64) {
        match self.power_form() {
            None => (0.0, 0.0, 0.0),
            Some((_, k)) => {
                let x = 2.0 * (s - self.lambda().ln());
                let sig = logistic(x);
                let one_minus = logistic(-x);
                let l = -2.0 * k * sig;
                let l_s = -4.0 * k * sig * one_minus;
                let l_ss = -8.0 * k * sig * one_minus * (one_minus - sig);
                (l, l_s, l_ss)
            }
        }
    }
}

impl ClosedForm {
    /// `[ℓ, ℓ_s, ℓ_ss, ℓ_sss]` in `s = ln r`; see [`ClosedForm::log_slope_jet_in_s`].
    pub fn log_slope_derivatives_in_s(&self, s: f64) -> [f64; 4] {
        match self.power_form() {
            None => [0.0; 4],
            Some((_, k)) => {
                let x = 2.0 * (s - self.lambda().ln());
                let (sig, tau) = (logistic(x), logistic(-x));
                let st = sig * tau;
                [
                    -2.0 * k * sig,
                    -4.0 * k * st,
                    -8.0 * k * st * (tau - sig),
                    -16.0 * k * st * (tau * tau - 4.0 * st + sig * sig),
                ]
            }
        }
    }
}

impl ClosedForm {
    /// `4 + (1−m)ℓ` without the cancellation of evaluating `ℓ` first.
    pub fn q_plus_four_in_s(&self, s: f64) -> f64 {
        let x = 2.0 * (s - self.lambda().ln());
        match *self {
            ClosedForm::Barenblatt { .. } => 4.0 - 2.0 * logistic(x),
            ClosedForm::Sphere { .. } => 4.0 * logistic(-x),
            ClosedForm::Flat { .. } => 4.0,
        }
    }
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn check_lambda(lambda: f64) -> Result<(), ParamError> {
    if !lambda.is_finite() {
        return Err(ParamError::NonFinite { name: "lambda", value: lambda });
    }
    if lambda <= 0.0 {
        return Err(ParamError::NonpositiveLambda { lambda });
    }
    Ok(())
}

fn check_radius(r: f64) -> Result<(), ParamError> {
    if !r.is_finite() {
        return Err(ParamError::NonFinite { name: "r", value: r });
    }
    if r < 0.0 {
        return Err(ParamError::NegativeRadius { r });
    }
    Ok(())
}

/// Barenblatt profile `(u, du/dr)` with analytic derivative.
pub fn barenblatt_profile(n: usize, lambda: f64, r: f64) -> Result<(f64, f64), ParamError> {
    check_radius(r)?;
    Ok(ClosedForm::barenblatt(n, lambda)?.eval(r))
}

/// Round-sphere profile `(u, du/dr)` with analytic derivative.
pub fn sphere_profile(n: usize, lambda: f64, r: f64) -> Result<(f64, f64), ParamError> {
    check_radius(r)?;
    Ok(ClosedForm::sphere(n, lambda)?.eval(r))
}

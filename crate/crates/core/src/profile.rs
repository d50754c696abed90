//! Construction of soliton profiles in Euclidean (`r`) and cylindrical (`s = ln r`)
//! coordinates, and classification of their behaviour at infinity.
//!
//! Cylindrical profiles carry the state `(w, ℓ, f)` where `w = r²u^{1−m}`,
//! `ℓ = r u_r/u` and `f` is the potential. The log slope `ℓ` is kept instead of
//! `w_s` because `w_s/w − 2 = (1−m)ℓ` loses every digit near the origin when
//! formed by subtraction.

use crate::fd;
use crate::ode::{self, Admissibility, Method, OdeError, OdeSystem, StepControl};
use crate::params::{ClosedForm, ParamError, SolitonClass, SolitonParams};
use crate::report::fmt_f64;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use thiserror::Error;

pub const U_FLOOR: f64 = 1e-300;
pub const U_CEILING: f64 = 1e300;
/// Largest admissible `w` at the start of a cylindrical integration.
pub const ASYMPTOTIC_START_MAX: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("grid too coarse: {len} samples, need at least {needed}")]
    GridTooCoarse { len: usize, needed: usize },
    #[error("grid too short: reaches s = {reach}, need s >= {needed}")]
    GridTooShort { reach: f64, needed: f64 },
    #[error("invalid profile data: {0}")]
    InvalidData(String),
    #[error("profile has no samples with r > 0")]
    EmptyPositiveRadius,
    #[error("w must be positive (got {w})")]
    NonpositiveW { w: f64 },
    #[error("profile vanished at r = {r} (s = {s}): no global solution for these parameters")]
    ProfileVanished { r: f64, s: f64 },
    #[error("profile blew up at r = {r} (s = {s})")]
    ProfileBlewUp { r: f64, s: f64 },
    #[error("step size underflow at r = {r} (s = {s})")]
    StepSizeUnderflow { r: f64, s: f64 },
    #[error("step budget exhausted at r = {r} (s = {s})")]
    TooManySteps { r: f64, s: f64 },
    #[error("asymptotic start invalid: w(s_min) = {w0:e} exceeds {max:e}", max = ASYMPTOTIC_START_MAX)]
    BadAsymptoticStart { w0: f64 },
    #[error("tolerance {tol:e} outside (1e-13, 1e-3)")]
    InvalidTolerance { tol: f64 },
    #[error("invalid range [{lo}, {hi}]")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("profile carries no soliton parameters")]
    NotASolitonProfile,
    #[error("compact soliton: no asymptotic end to classify")]
    Compact,
    #[error("csv: {0}")]
    Csv(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileSource {
    ClosedForm(ClosedForm),
    Integrated,
}

/// Sampled `u(r)` with `r_0 = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile {
    params: SolitonParams,
    lambda: f64,
    r: Vec<f64>,
    u: Vec<f64>,
    du_dr: Vec<f64>,
    source: ProfileSource,
}

impl RadialProfile {
    pub fn new(
        params: SolitonParams,
        r: Vec<f64>,
        u: Vec<f64>,
        du_dr: Vec<f64>,
        source: ProfileSource,
    ) -> Result<Self, ProfileError> {
        let len = r.len();
        if len < 2 {
            return Err(ProfileError::GridTooCoarse { len, needed: 2 });
        }
        if u.len() != len || du_dr.len() != len {
            return Err(ProfileError::InvalidData("r, u, du_dr lengths differ".into()));
        }
        if r[0] != 0.0 {
            return Err(ProfileError::InvalidData(format!("grid must start at r = 0, got {}", r[0])));
        }
        if r.windows(2).any(|w| !(w[1] > w[0])) || !r[len - 1].is_finite() {
            return Err(ProfileError::InvalidData("radii not strictly increasing".into()));
        }
        if let Some(i) = u.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(ProfileError::InvalidData(format!("u[{i}] = {} is not positive", u[i])));
        }
        if du_dr[0] != 0.0 {
            return Err(ProfileError::InvalidData("du_dr(0) must vanish".into()));
        }
        if du_dr.iter().any(|d| !d.is_finite()) {
            return Err(ProfileError::InvalidData("non-finite derivative".into()));
        }
        let lambda = u[0];
        Ok(RadialProfile { params, lambda, r, u, du_dr, source })
    }

    /// Closed-form profile sampled on `grid` (which must start at 0).
    pub fn closed_form(cf: ClosedForm, grid: Vec<f64>) -> Result<Self, ProfileError> {
        let (u, du): (Vec<f64>, Vec<f64>) = grid.iter().map(|&r| cf.eval(r)).unzip();
        RadialProfile::new(cf.params(), grid, u, du, ProfileSource::ClosedForm(cf))
    }

    pub fn params(&self) -> &SolitonParams {
        &self.params
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn du_dr(&self) -> &[f64] {
        &self.du_dr
    }

    pub fn source(&self) -> ProfileSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.r.last().unwrap()
    }
}

/// `0` followed by `points − 1` geometrically spaced radii in `[r_first, r_max]`.
pub fn radial_grid(r_first: f64, r_max: f64, points: usize) -> Vec<f64> {
    let mut g = vec![0.0];
    let k = points.saturating_sub(1).max(1);
    if k == 1 {
        g.push(r_max);
        return g;
    }
    let (a, b) = (r_first.ln(), r_max.ln());
    for i in 0..k {
        g.push((a + (b - a) * i as f64 / (k - 1) as f64).exp());
    }
    *g.last_mut().unwrap() = r_max;
    g
}

/// Uniformly spaced grid `s_min..=s_max` with `points` samples.
pub fn s_grid(s_min: f64, s_max: f64, points: usize) -> Vec<f64> {
    let k = points.max(2) - 1;
    (0..=k).map(|i| s_min + (s_max - s_min) * i as f64 / k as f64).collect()
}

/// Sampled cylindrical profile.
#[derive(Clone, Debug, PartialEq)]
pub struct CylindricalProfile {
    n: usize,
    params: Option<SolitonParams>,
    lambda: Option<f64>,
    closed_form: Option<ClosedForm>,
    s: Vec<f64>,
    w: Vec<f64>,
    dw_ds: Vec<f64>,
    f: Vec<f64>,
    log_slope: Vec<f64>,
}

impl CylindricalProfile {
    /// Builds a profile from raw samples; `ℓ` is recovered as `(w_s/w − 2)/(1−m)`.
    pub fn from_samples(
        n: usize,
        params: Option<SolitonParams>,
        s: Vec<f64>,
        w: Vec<f64>,
        dw_ds: Vec<f64>,
        f: Vec<f64>,
    ) -> Result<Self, ProfileError> {
        if n < 3 {
            return Err(ParamError::DimensionTooSmall { n }.into());
        }
        let k = 4.0 / (n as f64 + 2.0);
        let log_slope = w.iter().zip(&dw_ds).map(|(w, ws)| (ws / w - 2.0) / k).collect();
        Self::assemble(n, params, None, None, s, w, dw_ds, f, log_slope)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        n: usize,
        params: Option<SolitonParams>,
        lambda: Option<f64>,
        closed_form: Option<ClosedForm>,
        s: Vec<f64>,
        w: Vec<f64>,
        dw_ds: Vec<f64>,
        f: Vec<f64>,
        log_slope: Vec<f64>,
    ) -> Result<Self, ProfileError> {
        let len = s.len();
        if len < 2 {
            return Err(ProfileError::GridTooCoarse { len, needed: 2 });
        }
        if [w.len(), dw_ds.len(), f.len(), log_slope.len()].iter().any(|&l| l != len) {
            return Err(ProfileError::InvalidData("s, w, dw_ds, f lengths differ".into()));
        }
        if s.windows(2).any(|p| !(p[1] > p[0])) || s.iter().any(|v| !v.is_finite()) {
            return Err(ProfileError::InvalidData("s grid not strictly increasing".into()));
        }
        if let Some(&bad) = w.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
            return Err(ProfileError::NonpositiveW { w: bad });
        }
        if dw_ds.iter().chain(&f).chain(&log_slope).any(|v| !v.is_finite()) {
            return Err(ProfileError::InvalidData("non-finite sample".into()));
        }
        Ok(CylindricalProfile { n, params, lambda, closed_form, s, w, dw_ds, f, log_slope })
    }

    /// Closed-form profile sampled on an `s` grid, with exact `w` and `ℓ`.
    pub fn closed_form(cf: ClosedForm, s: Vec<f64>) -> Result<Self, ProfileError> {
        let params = cf.params();
        let k = params.one_minus_m();
        let mut w = Vec::with_capacity(s.len());
        let mut ws = Vec::with_capacity(s.len());
        let mut l = Vec::with_capacity(s.len());
        for &si in &s {
            let jet = cf.log_jet(si.exp());
            let wi = (2.0 * si + k * jet.log_u).exp();
            let (li, _, _) = cf.log_slope_jet_in_s(si);
            w.push(wi);
            ws.push(wi * (2.0 + k * li));
            l.push(li);
        }
        let f = trapezoid_potential(params.beta(), &s, &w);
        Self::assemble(cf.n(), Some(params), Some(cf.lambda()), Some(cf), s, w, ws, f, l)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn params(&self) -> Option<&SolitonParams> {
        self.params.as_ref()
    }

    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    pub fn closed_form_source(&self) -> Option<ClosedForm> {
        self.closed_form
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn dw_ds(&self) -> &[f64] {
        &self.dw_ds
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    /// `ℓ = r u_r/u`, so that `w_s/w = 2 + (1−m)ℓ`.
    pub fn log_slope(&self) -> &[f64] {
        &self.log_slope
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn one_minus_m(&self) -> f64 {
        4.0 / (self.n as f64 + 2.0)
    }

    pub fn soliton_params(&self) -> Result<&SolitonParams, ProfileError> {
        self.params.as_ref().ok_or(ProfileError::NotASolitonProfile)
    }
}

fn trapezoid_potential(beta: f64, s: &[f64], w: &[f64]) -> Vec<f64> {
    let mut f = Vec::with_capacity(s.len());
    f.push(0.0);
    for i in 1..s.len() {
        let prev = f[i - 1];
        f.push(prev + beta * (w[i] + w[i - 1]) * (s[i] - s[i - 1]));
    }
    f
}

/// Radius below which the origin Taylor start is used.
pub fn series_radius(params: &SolitonParams, lambda: f64) -> f64 {
    1e-3 * lambda.powf(-params.one_minus_m() / 2.0).max(1.0)
}

/// Coefficient `b` of `r²` in `u^m ≈ λ^m + b r²`.
pub fn origin_series_coefficient(params: &SolitonParams, lambda: f64) -> f64 {
    let nf = params.nf();
    -params.gamma() * lambda * params.m() / (2.0 * nf * (nf - 1.0))
}

/// Second-order Taylor start `u ≈ λ + a₂r²` at the regular singular point.
pub fn origin_series(params: &SolitonParams, lambda: f64, r: f64) -> (f64, f64) {
    let b = origin_series_coefficient(params, lambda);
    let a2 = b * lambda.powf(params.one_minus_m()) / params.m();
    (lambda + a2 * r * r, 2.0 * a2 * r)
}

fn series_log_slope(params: &SolitonParams, lambda: f64, r: f64) -> (f64, f64) {
    let (u, du) = origin_series(params, lambda, r);
    (u, r * du / u)
}

/// Per-sample normalized residual of the elliptic soliton equation.
///
/// Closed-form profiles are differentiated analytically; integrated ones take
/// `u_r` from the stored samples and one further derivative by finite
/// differences, so the residual measures integration quality.
pub fn elliptic_residual(profile: &RadialProfile) -> Result<Vec<f64>, ProfileError> {
    let p = profile.params();
    let (nf, m, beta, gamma) = (p.nf(), p.m(), p.beta(), p.gamma());
    let norm = if p.gamma_sign() != 0 { gamma.abs() } else { 1.0 };
    match profile.source() {
        ProfileSource::ClosedForm(cf) => Ok(profile
            .r()
            .iter()
            .map(|&r| {
                let j = cf.log_jet(r);
                let radial = if r == 0.0 { nf * j.d2 } else { j.d2 + (nf - 1.0) * j.d1 / r };
                let lap = (m * j.d1 * j.d1 + radial) * ((m - 1.0) * j.log_u).exp();
                ((nf - 1.0) * lap + beta * r * j.d1 + gamma) / norm
            })
            .collect()),
        ProfileSource::Integrated => {
            let len = profile.len();
            if len < 4 {
                return Err(ProfileError::GridTooCoarse { len, needed: 4 });
            }
            let r = profile.r();
            let u = profile.u();
            let du = profile.du_dr();
            let phi_r: Vec<f64> = (0..len).map(|i| m * u[i].powf(m - 1.0) * du[i]).collect();
            let width = len.min(5);
            let phi_rr = fd::derivative(r, &phi_r, 1, width).expect("length checked");
            Ok((0..len)
                .map(|i| {
                    let lap = if r[i] == 0.0 { nf * phi_rr[i] } else { phi_rr[i] + (nf - 1.0) * phi_r[i] / r[i] };
                    ((nf - 1.0) / m * lap + beta * r[i] * du[i] + gamma * u[i]) / (norm * u[i])
                })
                .collect())
        }
    }
}

/// Second derivative `w_ss` of the cylindrical profile ODE.
pub fn cylindrical_rhs(params: &SolitonParams, w: f64, w_s: f64) -> Result<f64, ProfileError> {
    if !(w > 0.0) {
        return Err(ProfileError::NonpositiveW { w });
    }
    let a = params.alpha();
    Ok((a - 1.0) / a * w_s * w_s / w - (a + 1.0) * params.theta() * w_s * w + 4.0 / a * w
        - params.rho() / (params.nf() - 1.0) * w * w)
}

/// Solver knobs shared by the Euclidean and cylindrical integrations.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub tol: f64,
    /// Largest step in `s`.
    pub max_step_s: f64,
    /// Largest step in `r` during the Euclidean phase.
    pub max_step_r: f64,
    /// Euclidean integration stops here and continues in `s`.
    pub handoff_radius: f64,
    pub max_steps: usize,
    pub method: Method,
}

impl SolverConfig {
    pub fn new(tol: f64) -> Self {
        SolverConfig {
            tol,
            max_step_s: 0.1,
            max_step_r: 1.0,
            handoff_radius: 100.0,
            max_steps: 2_000_000,
            method: Method::Auto,
        }
    }

    fn validate(&self) -> Result<(), ProfileError> {
        if !(self.tol > 1e-13 && self.tol < 1e-3) {
            return Err(ProfileError::InvalidTolerance { tol: self.tol });
        }
        Ok(())
    }

    fn control(&self, h_max: f64, h_init: f64) -> StepControl {
        StepControl {
            rtol: self.tol,
            atol: self.tol * 1e-12,
            h_init,
            h_max,
            h_min: 1e-14,
            max_steps: self.max_steps,
            method: self.method,
        }
    }
}

struct EuclideanSystem {
    n: f64,
    m: f64,
    k: f64,
    beta: f64,
    gamma: f64,
}

impl OdeSystem<2> for EuclideanSystem {
    // state [u, (u^m)_r]
    fn rhs(&self, r: f64, y: &[f64; 2]) -> [f64; 2] {
        let du = y[1] * y[0].max(0.0).powf(self.k) / self.m;
        let dv = -(self.n - 1.0) * y[1] / r - self.m / (self.n - 1.0) * (self.beta * r * du + self.gamma * y[0]);
        [du, dv]
    }

    fn admissible(&self, _r: f64, y: &[f64; 2]) -> Admissibility {
        if !(y[0] > U_FLOOR) {
            Admissibility::Vanished
        } else if !(y[0] < U_CEILING) || !y[1].is_finite() {
            Admissibility::BlewUp
        } else {
            Admissibility::Ok
        }
    }
}

/// The cylindrical ODE on the state `[w, ℓ, f]`.
struct CylindricalSystem {
    k: f64,
    alpha: f64,
    beta: f64,
    rho: f64,
    nm1: f64,
}

impl CylindricalSystem {
    fn new(p: &SolitonParams) -> Self {
        CylindricalSystem { k: p.one_minus_m(), alpha: p.alpha(), beta: p.beta(), rho: p.rho(), nm1: p.nf() - 1.0 }
    }
}

impl OdeSystem<3> for CylindricalSystem {
    fn rhs(&self, _s: f64, y: &[f64; 3]) -> [f64; 3] {
        let (w, l) = (y[0], y[1]);
        let q = self.k * l;
        let p = 2.0 + q;
        let big_f = -q * (4.0 + q) / self.alpha - w * (self.rho + self.beta * p) / self.nm1;
        [p * w, big_f / self.k, 2.0 * self.beta * w]
    }

    fn jacobian(&self, _s: f64, y: &[f64; 3]) -> [[f64; 3]; 3] {
        let (w, l) = (y[0], y[1]);
        let q = self.k * l;
        let p = 2.0 + q;
        [
            [p, self.k * w, 0.0],
            [
                -(self.rho + self.beta * p) / (self.nm1 * self.k),
                -(4.0 + 2.0 * q) / self.alpha - w * self.beta / self.nm1,
                0.0,
            ],
            [2.0 * self.beta, 0.0, 0.0],
        ]
    }

    fn admissible(&self, s: f64, y: &[f64; 3]) -> Admissibility {
        if !(y[0] > 0.0) {
            return Admissibility::Vanished;
        }
        let ln_u = (y[0].ln() - 2.0 * s) / self.k;
        if !(ln_u > U_FLOOR.ln()) {
            Admissibility::Vanished
        } else if !(ln_u < U_CEILING.ln()) || !y[0].is_finite() || !y[1].is_finite() {
            Admissibility::BlewUp
        } else {
            Admissibility::Ok
        }
    }
}

fn map_r_error(e: OdeError) -> ProfileError {
    match e {
        OdeError::Vanished { t } => ProfileError::ProfileVanished { r: t, s: t.ln() },
        OdeError::BlewUp { t } => ProfileError::ProfileBlewUp { r: t, s: t.ln() },
        OdeError::StepSizeUnderflow { t, .. } => ProfileError::StepSizeUnderflow { r: t, s: t.ln() },
        OdeError::TooManySteps { t } => ProfileError::TooManySteps { r: t, s: t.ln() },
        OdeError::InvalidInterval { t0, t1 } => ProfileError::InvalidRange { lo: t0, hi: t1 },
    }
}

fn map_s_error(e: OdeError) -> ProfileError {
    match e {
        OdeError::Vanished { t } => ProfileError::ProfileVanished { r: t.exp(), s: t },
        OdeError::BlewUp { t } => ProfileError::ProfileBlewUp { r: t.exp(), s: t },
        OdeError::StepSizeUnderflow { t, .. } => ProfileError::StepSizeUnderflow { r: t.exp(), s: t },
        OdeError::TooManySteps { t } => ProfileError::TooManySteps { r: t.exp(), s: t },
        OdeError::InvalidInterval { t0, t1 } => ProfileError::InvalidRange { lo: t0, hi: t1 },
    }
}

fn check_lambda(lambda: f64) -> Result<(), ProfileError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(ParamError::NonpositiveLambda { lambda }.into());
    }
    Ok(())
}

fn integrate_cylindrical_raw(
    params: &SolitonParams,
    s0: f64,
    y0: [f64; 3],
    s1: f64,
    cfg: &SolverConfig,
) -> Result<ode::Solution<3>, ProfileError> {
    let sys = CylindricalSystem::new(params);
    let ctl = cfg.control(cfg.max_step_s, 1e-3_f64.min(cfg.max_step_s));
    ode::integrate(&sys, s0, y0, s1, &ctl).map_err(map_s_error)
}

/// Shoots from the origin with `u(0) = λ` to `r_max`; see [`integrate_euclidean_with`].
pub fn integrate_euclidean(
    params: &SolitonParams,
    lambda: f64,
    r_max: f64,
    tol: f64,
) -> Result<RadialProfile, ProfileError> {
    integrate_euclidean_with(params, lambda, r_max, &SolverConfig::new(tol))
}

/// Integrates the radial elliptic equation from the origin series to `r_max`.
///
/// Beyond `cfg.handoff_radius` the run continues in cylindrical coordinates
/// and is mapped back, so very large `r_max` (e.g. `e^40`) are reachable.
pub fn integrate_euclidean_with(
    params: &SolitonParams,
    lambda: f64,
    r_max: f64,
    cfg: &SolverConfig,
) -> Result<RadialProfile, ProfileError> {
    params.validate()?;
    check_lambda(lambda)?;
    cfg.validate()?;
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(ProfileError::InvalidRange { lo: 0.0, hi: r_max });
    }
    let r0 = series_radius(params, lambda);
    let mut r = vec![0.0];
    let mut u = vec![lambda];
    let mut du = vec![0.0];
    if r_max <= r0 {
        let (ue, de) = origin_series(params, lambda, r_max);
        r.push(r_max);
        u.push(ue);
        du.push(de);
        return RadialProfile::new(*params, r, u, du, ProfileSource::Integrated);
    }
    let m = params.m();
    let k = params.one_minus_m();
    let (u0, du0) = origin_series(params, lambda, r0);
    let v0 = m * u0.powf(m - 1.0) * du0;
    let sys = EuclideanSystem { n: params.nf(), m, k, beta: params.beta(), gamma: params.gamma() };
    let r_euclid = r_max.min(cfg.handoff_radius.max(r0 * 2.0));
    let ctl = cfg.control(cfg.max_step_r, r0);
    let sol = ode::integrate(&sys, r0, [u0, v0], r_euclid, &ctl).map_err(map_r_error)?;
    for (ri, yi) in sol.t.iter().zip(&sol.y) {
        r.push(*ri);
        u.push(yi[0]);
        du.push(yi[1] * yi[0].powf(k) / m);
    }
    if r_max > r_euclid {
        let (re, ue, de) = (r_euclid, *u.last().unwrap(), *du.last().unwrap());
        let s0 = re.ln();
        let w0 = (2.0 * s0 + k * ue.ln()).exp();
        let sol = integrate_cylindrical_raw(params, s0, [w0, re * de / ue, 0.0], r_max.ln(), cfg)?;
        for (si, yi) in sol.t.iter().zip(&sol.y).skip(1) {
            let ri = si.exp();
            let ui = ((yi[0].ln() - 2.0 * si) / k).exp();
            r.push(ri);
            u.push(ui);
            du.push(yi[1] * ui / ri);
        }
    }
    RadialProfile::new(*params, r, u, du, ProfileSource::Integrated)
}

/// Integrates the cylindrical ODE from the image of `u(0) = λ` at `s_min` to `s_max`.
pub fn integrate_cylindrical(
    params: &SolitonParams,
    lambda: f64,
    s_min: f64,
    s_max: f64,
    tol: f64,
) -> Result<CylindricalProfile, ProfileError> {
    integrate_cylindrical_with(params, lambda, s_min, s_max, &SolverConfig::new(tol))
}

pub fn integrate_cylindrical_with(
    params: &SolitonParams,
    lambda: f64,
    s_min: f64,
    s_max: f64,
    cfg: &SolverConfig,
) -> Result<CylindricalProfile, ProfileError> {
    params.validate()?;
    check_lambda(lambda)?;
    cfg.validate()?;
    if !(s_max > s_min) || !s_min.is_finite() || !s_max.is_finite() {
        return Err(ProfileError::InvalidRange { lo: s_min, hi: s_max });
    }
    let k = params.one_minus_m();
    let w_asym = (k * lambda.ln() + 2.0 * s_min).exp();
    if !(w_asym < ASYMPTOTIC_START_MAX) {
        return Err(ProfileError::BadAsymptoticStart { w0: w_asym });
    }
    let r0 = s_min.exp();
    let (u0, l0) = series_log_slope(params, lambda, r0);
    let w0 = (2.0 * s_min + k * u0.ln()).exp();
    let sol = integrate_cylindrical_raw(params, s_min, [w0, l0, 0.0], s_max, cfg)?;
    let (mut w, mut ws, mut l, mut f) = (vec![], vec![], vec![], vec![]);
    for y in &sol.y {
        w.push(y[0]);
        ws.push(y[0] * (2.0 + k * y[1]));
        l.push(y[1]);
        f.push(y[2]);
    }
    CylindricalProfile::assemble(params.n(), Some(*params), Some(lambda), None, sol.t, w, ws, f, l)
}

/// `s = ln r`, `w = r²u^{1−m}`, `w_s` by the chain rule, `f` by the trapezoid rule.
pub fn to_cylindrical(profile: &RadialProfile) -> Result<CylindricalProfile, ProfileError> {
    let p = profile.params();
    let k = p.one_minus_m();
    let idx: Vec<usize> = (0..profile.len()).filter(|&i| profile.r()[i] > 0.0).collect();
    if idx.is_empty() {
        return Err(ProfileError::EmptyPositiveRadius);
    }
    let mut s = Vec::with_capacity(idx.len());
    let mut w = Vec::with_capacity(idx.len());
    let mut ws = Vec::with_capacity(idx.len());
    let mut l = Vec::with_capacity(idx.len());
    for &i in &idx {
        let (r, u, du) = (profile.r()[i], profile.u()[i], profile.du_dr()[i]);
        let si = r.ln();
        let li = r * du / u;
        let wi = (2.0 * si + k * u.ln()).exp();
        s.push(si);
        w.push(wi);
        ws.push(wi * (2.0 + k * li));
        l.push(li);
    }
    let f = trapezoid_potential(p.beta(), &s, &w);
    let cf = match profile.source() {
        ProfileSource::ClosedForm(cf) => Some(cf),
        ProfileSource::Integrated => None,
    };
    if s.len() < 2 {
        return Err(ProfileError::GridTooCoarse { len: s.len(), needed: 2 });
    }
    CylindricalProfile::assemble(p.n(), Some(*p), Some(profile.lambda()), cf, s, w, ws, f, l)
}

/// Inverse of [`to_cylindrical`]; the origin sample `u(0) = λ` is restored.
pub fn to_radial(profile: &CylindricalProfile) -> Result<RadialProfile, ProfileError> {
    let params = *profile.soliton_params()?;
    let lambda = profile.lambda().ok_or_else(|| ProfileError::InvalidData("origin value unknown".into()))?;
    let k = profile.one_minus_m();
    let mut r = vec![0.0];
    let mut u = vec![lambda];
    let mut du = vec![0.0];
    for i in 0..profile.len() {
        let si = profile.s()[i];
        let ri = si.exp();
        let ui = ((profile.w()[i].ln() - 2.0 * si) / k).exp();
        r.push(ri);
        u.push(ui);
        du.push(profile.log_slope()[i] * ui / ri);
    }
    let source = match profile.closed_form_source() {
        Some(cf) => ProfileSource::ClosedForm(cf),
        None => ProfileSource::Integrated,
    };
    RadialProfile::new(params, r, u, du, source)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateKind {
    SlowDecayCigar,
    LogCigar,
    ExpanderPower,
    ExpanderDecreasing,
    Flat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub class: SolitonClass,
    pub rate_kind: RateKind,
    /// Least-squares slope over the window: `d ln u/d ln r`, or `d ln w/d ln s` for steadies.
    pub fitted_exponent: f64,
    /// The fitted quantity at the end of the grid.
    pub fitted_amplitude: f64,
    pub predicted_exponent: Option<f64>,
    pub predicted_amplitude: Option<f64>,
    /// `(max − min)/max` of the fitted quantity over the window.
    pub drift: f64,
    /// Whether `u` is nonincreasing over the window.
    pub monotone_decreasing: bool,
    pub window: (f64, f64),
}

pub enum ProfileRef<'a> {
    Radial(&'a RadialProfile),
    Cylindrical(&'a CylindricalProfile),
}

impl<'a> From<&'a RadialProfile> for ProfileRef<'a> {
    fn from(p: &'a RadialProfile) -> Self {
        ProfileRef::Radial(p)
    }
}

impl<'a> From<&'a CylindricalProfile> for ProfileRef<'a> {
    fn from(p: &'a CylindricalProfile) -> Self {
        ProfileRef::Cylindrical(p)
    }
}

/// Smallest `s_max` accepted by [`asymptotic_classify`] (`r ≈ 1e3`).
pub const CLASSIFY_MIN_S: f64 = 6.9;

fn least_squares_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

fn relative_spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let scale = max.abs().max(min.abs());
    if scale == 0.0 {
        0.0
    } else {
        (max - min) / scale
    }
}

/// Fits the tail of a profile against the rate expected for its class.
pub fn asymptotic_classify<'a>(profile: impl Into<ProfileRef<'a>>) -> Result<AsymptoticReport, ProfileError> {
    let owned;
    let cyl = match profile.into() {
        ProfileRef::Cylindrical(c) => c,
        ProfileRef::Radial(r) => {
            owned = to_cylindrical(r)?;
            &owned
        }
    };
    let p = *cyl.soliton_params()?;
    if p.is_compact() {
        return Err(ProfileError::Compact);
    }
    let s = cyl.s();
    let s_end = *s.last().unwrap();
    if s_end < CLASSIFY_MIN_S {
        return Err(ProfileError::GridTooShort { reach: s_end, needed: CLASSIFY_MIN_S });
    }
    let k = p.one_minus_m();
    let nf = p.nf();
    let steady_tail = p.class() == SolitonClass::Steady && !p.is_flat();
    let span = if steady_tail { 10.0 } else { std::f64::consts::LN_10 };
    let lo = (s_end - span).max(s[0]);
    let idx: Vec<usize> = (0..s.len()).filter(|&i| s[i] >= lo).collect();
    if idx.len() < 3 {
        return Err(ProfileError::GridTooCoarse { len: idx.len(), needed: 3 });
    }
    let last = *idx.last().unwrap();
    let sw: Vec<f64> = idx.iter().map(|&i| s[i]).collect();
    let ln_u: Vec<f64> = idx.iter().map(|&i| (cyl.w()[i].ln() - 2.0 * s[i]) / k).collect();
    let monotone_decreasing = ln_u.windows(2).all(|p| p[1] <= p[0]);
    let (slope_u, intercept_u) = least_squares_slope(&sw, &ln_u);

    let report = |rate_kind, fitted_exponent, fitted_amplitude, pe, pa, drift| AsymptoticReport {
        class: p.class(),
        rate_kind,
        fitted_exponent,
        fitted_amplitude,
        predicted_exponent: pe,
        predicted_amplitude: pa,
        drift,
        monotone_decreasing,
        window: (lo, s_end),
    };

    if p.is_flat() {
        let u: Vec<f64> = ln_u.iter().map(|v| v.exp()).collect();
        return Ok(report(RateKind::Flat, slope_u, *u.last().unwrap(), Some(0.0), None, relative_spread(&u)));
    }
    Ok(match p.class() {
        SolitonClass::Shrinker => {
            // r^{2/(1−m)} u = w^{1/(1−m)}
            let q: Vec<f64> = idx.iter().map(|&i| cyl.w()[i].powf(1.0 / k)).collect();
            report(
                RateKind::SlowDecayCigar,
                slope_u,
                q[q.len() - 1],
                Some(-2.0 / k),
                Some(((nf - 2.0) * (nf - 1.0)).powf(1.0 / k)),
                relative_spread(&q),
            )
        }
        SolitonClass::Steady => {
            let ws: Vec<f64> = idx.iter().map(|&i| cyl.dw_ds()[i]).collect();
            let pos: Vec<usize> = idx.iter().copied().filter(|&i| s[i] > 0.0).collect();
            let exponent = if pos.len() >= 2 {
                let x: Vec<f64> = pos.iter().map(|&i| s[i].ln()).collect();
                let y: Vec<f64> = pos.iter().map(|&i| cyl.w()[i].ln()).collect();
                least_squares_slope(&x, &y).0
            } else {
                f64::NAN
            };
            report(
                RateKind::LogCigar,
                exponent,
                cyl.dw_ds()[last],
                Some(1.0),
                Some(4.0 * (nf - 1.0) / (p.alpha() * p.beta())),
                relative_spread(&ws),
            )
        }
        SolitonClass::Expander => {
            let slopes: Vec<f64> = idx.iter().map(|&i| cyl.log_slope()[i]).collect();
            let kind = if p.gamma_sign() < 0 { RateKind::ExpanderPower } else { RateKind::ExpanderDecreasing };
            report(kind, slope_u, intercept_u.exp(), Some(-p.gamma() / p.beta()), None, relative_spread(&slopes))
        }
    })
}

fn csv_err<E: std::fmt::Display>(e: E) -> ProfileError {
    ProfileError::Csv(e.to_string())
}

pub fn write_radial_csv<W: Write>(profile: &RadialProfile, mut out: W) -> Result<(), ProfileError> {
    writeln!(out, "r,u,du_dr").map_err(csv_err)?;
    for i in 0..profile.len() {
        writeln!(out, "{},{},{}", fmt_f64(profile.r()[i]), fmt_f64(profile.u()[i]), fmt_f64(profile.du_dr()[i]))
            .map_err(csv_err)?;
    }
    Ok(())
}

pub fn write_cylindrical_csv<W: Write>(profile: &CylindricalProfile, mut out: W) -> Result<(), ProfileError> {
    writeln!(out, "s,w,dw_ds,f").map_err(csv_err)?;
    for i in 0..profile.len() {
        writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(profile.s()[i]),
            fmt_f64(profile.w()[i]),
            fmt_f64(profile.dw_ds()[i]),
            fmt_f64(profile.f()[i])
        )
        .map_err(csv_err)?;
    }
    Ok(())
}

fn read_columns<R: BufRead>(input: R, header: &str) -> Result<Vec<Vec<f64>>, ProfileError> {
    let mut lines = input.lines();
    let first = lines.next().ok_or_else(|| csv_err("empty input"))?.map_err(csv_err)?;
    if first.trim() != header {
        return Err(csv_err(format!("expected header `{header}`, got `{}`", first.trim())));
    }
    let ncol = header.split(',').count();
    let mut cols = vec![Vec::new(); ncol];
    for (lineno, line) in lines.enumerate() {
        let line = line.map_err(csv_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != ncol {
            return Err(csv_err(format!("line {}: expected {ncol} fields", lineno + 2)));
        }
        for (c, f) in cols.iter_mut().zip(fields) {
            c.push(f.trim().parse::<f64>().map_err(|e| csv_err(format!("line {}: {e}", lineno + 2)))?);
        }
    }
    Ok(cols)
}

/// Reads a `r,u,du_dr` file as an integrated profile of the given parameters.
pub fn read_radial_csv<R: BufRead>(input: R, params: SolitonParams) -> Result<RadialProfile, ProfileError> {
    let mut cols = read_columns(input, "r,u,du_dr")?.into_iter();
    let (r, u, du) = (cols.next().unwrap(), cols.next().unwrap(), cols.next().unwrap());
    RadialProfile::new(params, r, u, du, ProfileSource::Integrated)
}

/// Reads a `s,w,dw_ds,f` file.
pub fn read_cylindrical_csv<R: BufRead>(
    input: R,
    n: usize,
    params: Option<SolitonParams>,
) -> Result<CylindricalProfile, ProfileError> {
    let mut cols = read_columns(input, "s,w,dw_ds,f")?.into_iter();
    let (s, w, ws, f) = (cols.next().unwrap(), cols.next().unwrap(), cols.next().unwrap(), cols.next().unwrap());
    CylindricalProfile::from_samples(n, params, s, w, ws, f)
}

//! Curvature of radial conformally flat metrics and the soliton identities.
//!
//! A cylindrical profile describes `g = w(s)(ds² + g_{S^{n−1}})`. Everything is
//! expressed through `q = (1−m)ℓ = w_s/w − 2` and its `s`-derivatives, which
//! avoids the cancellations of the textbook formulas near the origin:
//!
//! * `R = −(n−1)(q_s + q(4+q)/α)/w`,
//! * `K0 = −q_s/(2w)` (planes through the radial direction), `K1 = −q(4+q)/(4w)`,
//! * Ricci endomorphism eigenvalues `λ = (n−1)K0` (radial), `μ = K0 + (n−2)K1`.

use crate::fd;
use crate::par;
use crate::params::{SolitonClass, SolitonParams};
use crate::profile::{CylindricalProfile, ProfileError, ProfileSource, RadialProfile};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurvatureError {
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("grid too coarse: {len} samples, need at least {needed}")]
    GridTooCoarse { len: usize, needed: usize },
    #[error("profile carries no soliton parameters")]
    NotASolitonProfile,
    #[error("Ricci curvature not positive at s = {s} (lam = {lam}, mu = {mu}); X is undefined")]
    NonpositiveRicci { s: f64, lam: f64, mu: f64 },
    #[error("analytic derivatives requested for a profile without closed form")]
    NoClosedForm,
    #[error("time t = {t} invalid for a {class} soliton")]
    InvalidTime { t: f64, class: SolitonClass },
    #[error("length mismatch")]
    LengthMismatch,
}

/// Source of the `s`-derivatives of `q` beyond those stored in the profile.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondDerivative {
    /// Analytic for closed forms, the ODE for soliton profiles, else finite differences.
    #[default]
    Auto,
    Analytic,
    Ode,
    FiniteDifference,
}

/// `w` and `q` with three `s`-derivatives of `q` at one sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub w: f64,
    pub q: f64,
    /// `4 + q`, kept separately because it vanishes at the antipode of the sphere.
    pub q4: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

impl Jet {
    pub fn p(&self) -> f64 {
        2.0 + self.q
    }

    pub fn w_s(&self) -> f64 {
        self.p() * self.w
    }

    pub fn w_ss(&self) -> f64 {
        self.w * (self.q1 + self.p() * self.p())
    }
}

const FD_WIDTH: usize = 7;

fn resolve_mode(profile: &CylindricalProfile, mode: SecondDerivative) -> SecondDerivative {
    match mode {
        SecondDerivative::Auto => {
            if profile.closed_form_source().is_some() {
                SecondDerivative::Analytic
            } else if profile.params().is_some() {
                SecondDerivative::Ode
            } else {
                SecondDerivative::FiniteDifference
            }
        }
        m => m,
    }
}

/// Derivative jets at every sample of `profile`.
pub fn jets(profile: &CylindricalProfile, mode: SecondDerivative) -> Result<Vec<Jet>, CurvatureError> {
    let k = profile.one_minus_m();
    let s = profile.s();
    let w = profile.w();
    let l = profile.log_slope();
    match resolve_mode(profile, mode) {
        SecondDerivative::Analytic => {
            let cf = profile.closed_form_source().ok_or(CurvatureError::NoClosedForm)?;
            Ok(par::map_range(profile.len(), |i| {
                let d = cf.log_slope_derivatives_in_s(s[i]);
                let q4 = cf.q_plus_four_in_s(s[i]);
                Jet { w: w[i], q: k * l[i], q4, q1: k * d[1], q2: k * d[2], q3: k * d[3] }
            }))
        }
        SecondDerivative::Ode => {
            let p = profile.params().ok_or(CurvatureError::NotASolitonProfile)?;
            let (alpha, beta, rho, nm1) = (p.alpha(), p.beta(), p.rho(), p.nf() - 1.0);
            Ok(par::map_range(profile.len(), |i| {
                let (wi, q) = (w[i], k * l[i]);
                let pp = 2.0 + q;
                let ws = pp * wi;
                let q1 = -q * (4.0 + q) / alpha - wi * (rho + beta * pp) / nm1;
                let f_w = -(rho + beta * pp) / nm1;
                let f_q = -(4.0 + 2.0 * q) / alpha - wi * beta / nm1;
                let q2 = f_w * ws + f_q * q1;
                let wss = wi * (q1 + pp * pp);
                let q3 = -beta * q1 / nm1 * ws + f_w * wss + (-2.0 * q1 / alpha - ws * beta / nm1) * q1 + f_q * q2;
                Jet { w: wi, q, q4: 4.0 + q, q1, q2, q3 }
            }))
        }
        SecondDerivative::FiniteDifference | SecondDerivative::Auto => {
            let len = profile.len();
            if len < FD_WIDTH {
                return Err(CurvatureError::GridTooCoarse { len, needed: FD_WIDTH });
            }
            let q: Vec<f64> = l.iter().map(|v| k * v).collect();
            let q1 = fd::derivative(s, &q, 1, FD_WIDTH).expect("length checked");
            let q2 = fd::derivative(s, &q, 2, FD_WIDTH).expect("length checked");
            let q3 = fd::derivative(s, &q, 3, FD_WIDTH).expect("length checked");
            Ok((0..len).map(|i| Jet { w: w[i], q: q[i], q4: 4.0 + q[i], q1: q1[i], q2: q2[i], q3: q3[i] }).collect())
        }
    }
}

/// Pointwise curvature quantities derived from a [`Jet`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointCurvature {
    pub r: f64,
    pub r_s: f64,
    pub r_ss: f64,
    pub k0: f64,
    pub k1: f64,
    pub lam: f64,
    pub mu: f64,
}

pub fn point_curvature(n: usize, jet: &Jet) -> PointCurvature {
    let nf = n as f64;
    let alpha = 4.0 / (nf - 2.0);
    let Jet { w, q, q4, q1, q2, q3 } = *jet;
    let p = 2.0 + q;
    let big_n = q1 + q * q4 / alpha;
    let n_s = q2 + q1 * (4.0 + 2.0 * q) / alpha;
    let n_ss = q3 + q2 * (4.0 + 2.0 * q) / alpha + 2.0 * q1 * q1 / alpha;
    let r = -(nf - 1.0) * big_n / w;
    let r_s = -(nf - 1.0) * (n_s - p * big_n) / w;
    let r_ss = -(nf - 1.0) * (n_ss - 2.0 * p * n_s + (p * p - q1) * big_n) / w;
    let k0 = -q1 / (2.0 * w);
    let k1 = -q * q4 / (4.0 * w);
    PointCurvature { r, r_s, r_ss, k0, k1, lam: (nf - 1.0) * k0, mu: k0 + (nf - 2.0) * k1 }
}

fn point_curvatures(
    profile: &CylindricalProfile,
    mode: SecondDerivative,
) -> Result<Vec<PointCurvature>, CurvatureError> {
    let n = profile.n();
    let jets = jets(profile, mode)?;
    Ok(par::map_range(jets.len(), |i| point_curvature(n, &jets[i])))
}

/// Scalar curvature from the conformal-factor formula in `s`.
pub fn scalar_curvature_cyl(profile: &CylindricalProfile) -> Result<Vec<f64>, CurvatureError> {
    scalar_curvature_cyl_with(profile, SecondDerivative::Auto)
}

pub fn scalar_curvature_cyl_with(
    profile: &CylindricalProfile,
    mode: SecondDerivative,
) -> Result<Vec<f64>, CurvatureError> {
    Ok(point_curvatures(profile, mode)?.into_iter().map(|c| c.r).collect())
}

/// `R = 2β + ρ + (1−m)β r (ln u)_r`, valid on solitons.
pub fn scalar_curvature_identity(profile: &RadialProfile) -> Vec<f64> {
    let p = profile.params();
    let k = p.one_minus_m();
    (0..profile.len())
        .map(|i| {
            let l = profile.r()[i] * profile.du_dr()[i] / profile.u()[i];
            p.origin_curvature() + k * p.beta() * l
        })
        .collect()
}

/// Identity route on a cylindrical profile: `2β + ρ + β q`.
pub fn scalar_curvature_identity_cyl(profile: &CylindricalProfile) -> Result<Vec<f64>, CurvatureError> {
    let p = profile.params().ok_or(CurvatureError::NotASolitonProfile)?;
    let k = profile.one_minus_m();
    Ok(profile.log_slope().iter().map(|l| p.origin_curvature() + p.beta() * k * l).collect())
}

/// `R = −(4(n−1)/(n−2)) Δ(u^m)/u` in Euclidean coordinates, including `r = 0`.
///
/// Closed forms are differentiated analytically; integrated profiles use one
/// finite difference of the stored `(u^m)_r`.
pub fn scalar_curvature_radial(profile: &RadialProfile) -> Result<Vec<f64>, CurvatureError> {
    let p = profile.params();
    let (nf, m) = (p.nf(), p.m());
    let c = 4.0 * (nf - 1.0) / (nf - 2.0);
    let r = profile.r();
    match profile.source() {
        ProfileSource::ClosedForm(cf) => Ok(r
            .iter()
            .map(|&ri| {
                let j = cf.log_jet(ri);
                let radial = if ri == 0.0 { nf * j.d2 } else { j.d2 + (nf - 1.0) * j.d1 / ri };
                -c * m * (m * j.d1 * j.d1 + radial) * ((m - 1.0) * j.log_u).exp()
            })
            .collect()),
        ProfileSource::Integrated => {
            let len = profile.len();
            let width = len.min(5);
            if width < 4 {
                return Err(CurvatureError::GridTooCoarse { len, needed: 4 });
            }
            let (u, du) = (profile.u(), profile.du_dr());
            let phi_r: Vec<f64> = (0..len).map(|i| m * u[i].powf(m - 1.0) * du[i]).collect();
            let phi_rr = fd::derivative(r, &phi_r, 1, width).expect("length checked");
            Ok((0..len)
                .map(|i| {
                    let lap = if r[i] == 0.0 { nf * phi_rr[i] } else { phi_rr[i] + (nf - 1.0) * phi_r[i] / r[i] };
                    -c * lap / u[i]
                })
                .collect())
        }
    }
}

/// `(K0, K1)`: sectional curvatures of radial and tangential planes.
pub fn sectional_curvatures(profile: &CylindricalProfile) -> Result<(Vec<f64>, Vec<f64>), CurvatureError> {
    let c = point_curvatures(profile, SecondDerivative::Auto)?;
    Ok((c.iter().map(|c| c.k0).collect(), c.iter().map(|c| c.k1).collect()))
}

/// `(λ, μ)`: radial and tangential eigenvalues of the Ricci endomorphism.
pub fn ricci_eigenvalues(profile: &CylindricalProfile) -> Result<(Vec<f64>, Vec<f64>), CurvatureError> {
    let c = point_curvatures(profile, SecondDerivative::Auto)?;
    Ok((c.iter().map(|c| c.lam).collect(), c.iter().map(|c| c.mu).collect()))
}

/// Chow's `ν_i = (1/(2(n−1)(n−2))) Σ_{k>l; k,l≠i} (λ_k − λ_l)²` for the Ricci eigenvalues `eigs`.
pub fn chow_nu(eigs: &[f64]) -> Vec<f64> {
    let n = eigs.len();
    if n < 3 {
        return vec![0.0; n];
    }
    let c = 1.0 / (2.0 * (n as f64 - 1.0) * (n as f64 - 2.0));
    (0..n)
        .map(|i| {
            let mut acc = 0.0;
            for kk in 0..n {
                for ll in 0..kk {
                    if kk != i && ll != i {
                        let d = eigs[kk] - eigs[ll];
                        acc += d * d;
                    }
                }
            }
            c * acc
        })
        .collect()
}

/// `A(∇f, ∇f) = ν₁|∇f|²` for radial metrics (`λ₁ = λ`, `λ₂ = … = λ_n = μ`).
pub fn chow_a_quadratic(lam: &[f64], mu: &[f64], n: usize, grad_f_norm: &[f64]) -> Result<Vec<f64>, CurvatureError> {
    if lam.len() != mu.len() || lam.len() != grad_f_norm.len() {
        return Err(CurvatureError::LengthMismatch);
    }
    Ok((0..lam.len())
        .map(|i| {
            let mut e = vec![mu[i]; n];
            e[0] = lam[i];
            chow_nu(&e)[0] * grad_f_norm[i] * grad_f_norm[i]
        })
        .collect())
}

/// Pointwise residual of one identity `lhs = rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// `|lhs − rhs| / max(|lhs|, |rhs|, floor)`; floor is `1e−7` of the identity's natural scale.
    pub rel: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub max_abs: f64,
    pub max_rel: f64,
    pub argmax_s: f64,
}

const FLOOR: f64 = 1e-7;

impl Residual {
    fn new(lhs: Vec<f64>, rhs: Vec<f64>, scale: &[f64]) -> Self {
        let rel = (0..lhs.len())
            .map(|i| {
                let d = (lhs[i] - rhs[i]).abs();
                let den = lhs[i].abs().max(rhs[i].abs()).max(FLOOR * scale[i]);
                if d == 0.0 {
                    0.0
                } else {
                    d / den
                }
            })
            .collect();
        Residual { lhs, rhs, rel }
    }

    pub fn summary(&self, s: &[f64]) -> ResidualSummary {
        let mut out = ResidualSummary { max_abs: 0.0, max_rel: 0.0, argmax_s: s.first().copied().unwrap_or(0.0) };
        for (((l, r), &rel), &si) in self.lhs.iter().zip(&self.rhs).zip(&self.rel).zip(s) {
            out.max_abs = out.max_abs.max((l - r).abs());
            if rel > out.max_rel || rel.is_nan() {
                out.max_rel = rel;
                out.argmax_s = si;
            }
        }
        out
    }
}

/// Names of the identities that must vanish on a soliton.
pub const IDENTITY_NAMES: [&str; 8] = [
    "hessian_radial",
    "hessian_spherical",
    "gradG",
    "yamabe_identity",
    "trace_laplacian",
    "cylindrical_speed",
    "profile_ode",
    "A_quadratic",
];

/// Per-sample curvature and identity residuals of a soliton profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub n: usize,
    pub s_grid: Vec<f64>,
    #[serde(rename = "R")]
    pub r: Vec<f64>,
    #[serde(rename = "R_identity")]
    pub r_identity: Vec<f64>,
    #[serde(rename = "K0")]
    pub k0: Vec<f64>,
    #[serde(rename = "K1")]
    pub k1: Vec<f64>,
    pub lam_ric: Vec<f64>,
    pub mu_ric: Vec<f64>,
    pub residuals: BTreeMap<String, Residual>,
    /// `Σ_i ν_i (R − ρ)` = `(R−ρ)(λ−μ)²/2`; a diagnostic, nonzero in general.
    pub a_trace: Vec<f64>,
    pub mode: SecondDerivative,
}

impl CurvatureReport {
    pub fn summaries(&self) -> BTreeMap<String, ResidualSummary> {
        self.residuals.iter().map(|(k, v)| (k.clone(), v.summary(&self.s_grid))).collect()
    }

    pub fn max_rel(&self, name: &str) -> Option<f64> {
        self.residuals.get(name).map(|r| r.summary(&self.s_grid).max_rel)
    }

    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        use crate::report::fmt_f64;
        writeln!(out, "s,R,K0,K1,lam_ric,mu_ric")?;
        for i in 0..self.s_grid.len() {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt_f64(self.s_grid[i]),
                fmt_f64(self.r[i]),
                fmt_f64(self.k0[i]),
                fmt_f64(self.k1[i]),
                fmt_f64(self.lam_ric[i]),
                fmt_f64(self.mu_ric[i])
            )?;
        }
        Ok(())
    }
}

/// Evaluates every soliton identity on `profile`.
pub fn soliton_identity_check(profile: &CylindricalProfile) -> Result<CurvatureReport, CurvatureError> {
    soliton_identity_check_with(profile, SecondDerivative::Auto)
}

pub fn soliton_identity_check_with(
    profile: &CylindricalProfile,
    mode: SecondDerivative,
) -> Result<CurvatureReport, CurvatureError> {
    let p = *profile.params().ok_or(CurvatureError::NotASolitonProfile)?;
    let mode = resolve_mode(profile, mode);
    let jets = jets(profile, mode)?;
    let n = profile.n();
    let nf = n as f64;
    let (beta, rho, theta, m) = (p.beta(), p.rho(), p.theta(), p.m());
    let curv: Vec<PointCurvature> = par::map_range(jets.len(), |i| point_curvature(n, &jets[i]));
    let len = jets.len();
    let scale_r = curv.iter().map(|c| c.r.abs()).fold(rho.abs(), f64::max).max(1.0);

    // name → (lhs, rhs, scale)
    type Columns = (Vec<f64>, Vec<f64>, Vec<f64>);
    let mut cols: BTreeMap<&str, Columns> = BTreeMap::new();
    for name in IDENTITY_NAMES {
        cols.insert(name, (Vec::with_capacity(len), Vec::with_capacity(len), Vec::with_capacity(len)));
    }
    let ws_stored = profile.dw_ds();
    let mut a_trace = Vec::with_capacity(len);
    for i in 0..len {
        let j = &jets[i];
        let c = &curv[i];
        let w = j.w;
        let ws = ws_stored[i];
        let wss = j.w_ss();
        let fs = 2.0 * beta * w;
        let fss = 2.0 * beta * ws;
        let rr = c.r - rho;
        let mut push = |name: &str, lhs: f64, rhs: f64, unit: f64| {
            let e = cols.get_mut(name).unwrap();
            e.0.push(lhs);
            e.1.push(rhs);
            e.2.push(unit * scale_r);
        };
        push("hessian_radial", (fss - ws * fs / (2.0 * w)) / w, rr, 1.0);
        push("hessian_spherical", ws * fs / (2.0 * w * w), rr, 1.0);
        push("gradG", (2.0 * fs * fss * w - fs * fs * ws) / (w * w), 2.0 * rr * fs, fs.abs() + w);
        push("yamabe_identity", (nf - 1.0) * c.r_s, -c.lam * fs, nf - 1.0);
        push("trace_laplacian", (fss + (nf - 2.0) / 2.0 * (ws / w) * fs) / w, nf * rr, nf);
        push("cylindrical_speed", beta * ws, rr * w, w);
        push(
            "profile_ode",
            w * wss + (nf - 6.0) / 4.0 * ws * ws + theta / m * w * w * ws + rho / (nf - 1.0) * w * w * w,
            (nf - 2.0) * w * w,
            w * w * (1.0 + w) / scale_r,
        );
        let grad_f_sq = fs * fs / w;
        let mut e = vec![c.mu; n];
        e[0] = c.lam;
        let nu = chow_nu(&e);
        push("A_quadratic", nu[0] * grad_f_sq, 0.0, grad_f_sq * scale_r + 1.0);
        a_trace.push(nu.iter().sum::<f64>() * rr);
    }
    let residuals =
        cols.into_iter().map(|(name, (lhs, rhs, scale))| (name.to_string(), Residual::new(lhs, rhs, &scale))).collect();
    Ok(CurvatureReport {
        n,
        s_grid: profile.s().to_vec(),
        r: curv.iter().map(|c| c.r).collect(),
        r_identity: scalar_curvature_identity_cyl(profile)?,
        k0: curv.iter().map(|c| c.k0).collect(),
        k1: curv.iter().map(|c| c.k1).collect(),
        lam_ric: curv.iter().map(|c| c.lam).collect(),
        mu_ric: curv.iter().map(|c| c.mu).collect(),
        residuals,
        a_trace,
        mode,
    })
}

/// Curvature-only report for profiles without soliton parameters.
pub fn curvature_only(profile: &CylindricalProfile, mode: SecondDerivative) -> Result<CurvatureReport, CurvatureError> {
    let mode = resolve_mode(profile, mode);
    let curv = point_curvatures(profile, mode)?;
    Ok(CurvatureReport {
        n: profile.n(),
        s_grid: profile.s().to_vec(),
        r: curv.iter().map(|c| c.r).collect(),
        r_identity: scalar_curvature_identity_cyl(profile).unwrap_or_default(),
        k0: curv.iter().map(|c| c.k0).collect(),
        k1: curv.iter().map(|c| c.k1).collect(),
        lam_ric: curv.iter().map(|c| c.lam).collect(),
        mu_ric: curv.iter().map(|c| c.mu).collect(),
        residuals: BTreeMap::new(),
        a_trace: Vec::new(),
        mode,
    })
}

/// `Z = (n−1)Δ_g R + ⟨∇R, X⟩ + Ric(X,X)/(2(n−1)) + R²` from pointwise data, with
/// `X = −(n−1)∇R/λ` so that the last two terms combine to `−(n−1)|∇R|²/(2λ)`.
pub fn harnack_from_parts(n: usize, r: f64, lap_r: f64, grad_r_sq: f64, lam: f64) -> f64 {
    let nm1 = n as f64 - 1.0;
    nm1 * lap_r - nm1 * grad_r_sq / (2.0 * lam) + r * r
}

fn time_factor(p: &SolitonParams, t: f64) -> Result<f64, CurvatureError> {
    match p.class() {
        SolitonClass::Steady => Ok(1.0),
        class => {
            if !(t.is_finite() && t != 0.0) {
                return Err(CurvatureError::InvalidTime { t, class });
            }
            Ok(1.0 / (t * t))
        }
    }
}

/// Harnack quantity of the self-similar flow `g(t) = |t|·g` (shrinkers, expanders)
/// or `g(t) = g` (steadies) generated by the profile.
///
/// On solitons this equals `ρR(g)/t²`, i.e. `ρ/(−t)·R(g(t))` for shrinkers with `t < 0`.
pub fn harnack_z(profile: &CylindricalProfile, t: f64) -> Result<Vec<f64>, CurvatureError> {
    harnack_z_with(profile, t, SecondDerivative::Auto)
}

pub fn harnack_z_with(
    profile: &CylindricalProfile,
    t: f64,
    mode: SecondDerivative,
) -> Result<Vec<f64>, CurvatureError> {
    let p = *profile.params().ok_or(CurvatureError::NotASolitonProfile)?;
    let factor = time_factor(&p, t)?;
    if p.is_flat() {
        return Ok(vec![0.0; profile.len()]);
    }
    let n = profile.n();
    let nf = n as f64;
    let mode = resolve_mode(profile, mode);
    let jets = jets(profile, mode)?;
    let s = profile.s();
    let beta = p.beta();
    let mut out = Vec::with_capacity(jets.len());
    for (i, j) in jets.iter().enumerate() {
        let mut c = point_curvature(n, j);
        if !(c.lam > 0.0 && c.mu > 0.0) {
            return Err(CurvatureError::NonpositiveRicci { s: s[i], lam: c.lam, mu: c.mu });
        }
        if mode != SecondDerivative::FiniteDifference {
            // On a soliton R = ρ + β(2 + q), so R_s = βq₁ and R_ss = βq₂. The generic
            // forms lose all accuracy as w → 0 (O(w) terms cancel to O(w²)).
            c.r_s = beta * j.q1;
            c.r_ss = beta * j.q2;
        }
        let lap = (c.r_ss + (nf - 2.0) / 2.0 * j.p() * c.r_s) / j.w;
        out.push(factor * harnack_from_parts(n, c.r, lap, c.r_s * c.r_s / j.w, c.lam));
    }
    Ok(out)
}

/// Curvature of an arbitrary radial metric `ū^{1−m}·δ` sampled on a grid starting at `r = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialMetricCurvature {
    pub r: Vec<f64>,
    pub scalar: Vec<f64>,
    pub k0: Vec<f64>,
    pub k1: Vec<f64>,
    pub lam: Vec<f64>,
    pub mu: Vec<f64>,
    /// Harnack quantity; `NaN` where the Ricci curvature is not positive.
    pub z: Vec<f64>,
}

const METRIC_FD_WIDTH: usize = 9;

/// Finite-difference curvature of `g = u^{1−m} δ` (data even in `r`, `grid[0] = 0`).
///
/// Writes `g = e^{2φ}δ` and differentiates `φ` once, to fourth order; derivatives
/// of `R` then follow in closed form, so no finite difference is nested.
pub fn radial_metric_curvature(n: usize, grid: &[f64], u: &[f64]) -> Result<RadialMetricCurvature, CurvatureError> {
    let len = grid.len();
    if len < METRIC_FD_WIDTH || u.len() != len {
        return Err(CurvatureError::GridTooCoarse { len, needed: METRIC_FD_WIDTH });
    }
    if grid[0] != 0.0 {
        return Err(ProfileError::InvalidData("grid must start at r = 0".into()).into());
    }
    let nf = n as f64;
    let nm1 = nf - 1.0;
    let k = 4.0 / (nf + 2.0);
    let phi: Vec<f64> = u.iter().map(|v| 0.5 * k * v.ln()).collect();
    let d: Vec<Vec<f64>> =
        (1..=4).map(|order| fd::derivative_even(grid, &phi, order, METRIC_FD_WIDTH).expect("length checked")).collect();
    let out = par::map_range(len, |i| {
        let r = grid[i];
        let (p1, p2, p3, p4) = (d[0][i], d[1][i], d[2][i], d[3][i]);
        // φ'/r and its first two derivatives, with their limits at the origin
        let (q0, q1, q2) = if r == 0.0 {
            (p2, 0.0, p4 / 3.0)
        } else {
            let q0 = p1 / r;
            let q1 = (p2 - q0) / r;
            (q0, q1, (p3 - 2.0 * q1) / r)
        };
        let e = (-2.0 * phi[i]).exp();
        let a0 = 2.0 * p2 + 2.0 * nm1 * q0 + (nf - 2.0) * p1 * p1;
        let a1 = 2.0 * p3 + 2.0 * nm1 * q1 + 2.0 * (nf - 2.0) * p1 * p2;
        let a2 = 2.0 * p4 + 2.0 * nm1 * q2 + 2.0 * (nf - 2.0) * (p2 * p2 + p1 * p3);
        let scalar = -nm1 * e * a0;
        let r1 = -nm1 * e * (a1 - 2.0 * p1 * a0);
        let r2 = -nm1 * e * (a2 - 4.0 * p1 * a1 + (4.0 * p1 * p1 - 2.0 * p2) * a0);
        // R'/r, again with its limit R'' at the origin
        let r1_over_r = if r == 0.0 { r2 } else { r1 / r };
        let lap = e * (r2 + nm1 * r1_over_r + (nf - 2.0) * p1 * r1);
        let k0 = -e * (p2 + q0);
        let k1 = -e * (2.0 * q0 + p1 * p1);
        let lam = nm1 * k0;
        let mu = k0 + (nf - 2.0) * k1;
        let z = if lam > 0.0 && mu > 0.0 { harnack_from_parts(n, scalar, lap, r1 * r1 * e, lam) } else { f64::NAN };
        (scalar, k0, k1, lam, mu, z)
    });
    let mut c = RadialMetricCurvature {
        r: grid.to_vec(),
        scalar: Vec::with_capacity(len),
        k0: Vec::with_capacity(len),
        k1: Vec::with_capacity(len),
        lam: Vec::with_capacity(len),
        mu: Vec::with_capacity(len),
        z: Vec::with_capacity(len),
    };
    for (sc, a, b, la, mi, z) in out {
        c.scalar.push(sc);
        c.k0.push(a);
        c.k1.push(b);
        c.lam.push(la);
        c.mu.push(mi);
        c.z.push(z);
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_params, ClosedForm};
    use crate::profile::{s_grid, CylindricalProfile};
    use approx::assert_relative_eq;

    #[test]
    fn chow_synthetic_values() {
        let nu = chow_nu(&[3.0, 1.0, 2.0]);
        assert_eq!(nu[0], 0.25);
        assert_eq!(nu[1], 0.25); // (3−2)²/4
        assert_eq!(nu[2], 1.0); // (3−1)²/4
        assert!(chow_nu(&[2.0; 5]).iter().all(|&v| v == 0.0));
        let a = chow_a_quadratic(&[1.0, 2.0], &[3.0, 0.5], 4, &[1.0, 7.0]).unwrap();
        assert_eq!(a, vec![0.0, 0.0]);
    }

    #[test]
    fn sphere_is_round() {
        let cf = ClosedForm::sphere(3, 1.0).unwrap();
        let prof = CylindricalProfile::closed_form(cf, s_grid(-8.0, 8.0, 161)).unwrap();
        let (k0, k1) = sectional_curvatures(&prof).unwrap();
        for i in 0..prof.len() {
            assert_relative_eq!(k0[i], 1.0 / 6.0, epsilon = 1e-9);
            assert_relative_eq!(k1[i], 1.0 / 6.0, epsilon = 1e-9);
        }
        for r in scalar_curvature_cyl(&prof).unwrap() {
            assert_relative_eq!(r, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn ode_jets_match_analytic_on_barenblatt() {
        let cf = ClosedForm::barenblatt(4, 1.3).unwrap();
        let prof = CylindricalProfile::closed_form(cf, s_grid(-5.0, 5.0, 41)).unwrap();
        let a = jets(&prof, SecondDerivative::Analytic).unwrap();
        let o = jets(&prof, SecondDerivative::Ode).unwrap();
        for (x, y) in a.iter().zip(&o) {
            for (u, v) in [(x.q1, y.q1), (x.q2, y.q2), (x.q3, y.q3)] {
                assert!((u - v).abs() <= 1e-12 * (1.0 + u.abs()), "{u} vs {v}");
            }
        }
    }

    #[test]
    fn flat_has_no_curvature() {
        let cf = ClosedForm::flat(3, 1.0).unwrap();
        let prof = CylindricalProfile::closed_form(cf, s_grid(-3.0, 3.0, 31)).unwrap();
        let rep = soliton_identity_check(&prof).unwrap();
        assert!(rep.r.iter().all(|&v| v == 0.0));
        for (name, res) in &rep.residuals {
            assert!(res.rel.iter().all(|&v| v <= 1e-13), "{name}");
        }
        assert!(harnack_z(&prof, 1.0).unwrap().iter().all(|&z| z == 0.0));
    }

    #[test]
    fn radial_metric_route_on_barenblatt() {
        let cf = ClosedForm::barenblatt(3, 1.0).unwrap();
        let grid: Vec<f64> = (0..400).map(|i| i as f64 * 0.025).collect();
        let u: Vec<f64> = grid.iter().map(|&r| cf.eval(r).0).collect();
        let c = radial_metric_curvature(3, &grid, &u).unwrap();
        for (i, &r) in grid.iter().enumerate().take(120) {
            assert_relative_eq!(c.scalar[i], 6.0 - 5.0 * r * r / (1.0 + r * r), epsilon = 1e-9);
            assert_relative_eq!(c.z[i], c.scalar[i], max_relative = 1e-5);
        }
    }

    #[test]
    fn invalid_times() {
        let cf = ClosedForm::barenblatt(3, 1.0).unwrap();
        let prof = CylindricalProfile::closed_form(cf, s_grid(-3.0, 3.0, 31)).unwrap();
        assert!(matches!(harnack_z(&prof, 0.0), Err(CurvatureError::InvalidTime { .. })));
        let st = derive_params(3, SolitonClass::Steady, 1.0).unwrap();
        assert!(st.beta() > 0.0);
    }
}

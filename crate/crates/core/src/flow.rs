//! The radial fast-diffusion equation `ū_t = ((n−1)/m) Δ ū^m` and its
//! self-similar solutions generated by soliton profiles.
//!
//! Space: central differences on a uniform grid (node 0 at the origin, node
//! `N−1` carries the far-field Dirichlet value). Time: variable-step BDF2
//! started by one backward-Euler step, with a local-error estimate from the
//! third divided difference of the accepted history. Each implicit stage is
//! solved by damped Newton with a tridiagonal (Thomas) solve.

use crate::curvature::{radial_metric_curvature, RadialMetricCurvature};
use crate::interp::CubicHermite;
use crate::par;
use crate::params::{ClosedForm, SolitonClass, SolitonParams};
use crate::profile::{ProfileSource, RadialProfile};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("positivity lost at t = {t}, r = {r}")]
    PositivityLost { t: f64, r: f64 },
    #[error("domain too small: flow needs the profile up to r = {needed}, profile ends at {available}")]
    DomainTooSmall { needed: f64, available: f64 },
    #[error("invalid time interval [{t0}, {t1}]")]
    InvalidInterval { t0: f64, t1: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("time step underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },
    #[error("step budget exhausted at t = {t}")]
    TooManySteps { t: f64 },
    #[error("trajectory and reference profile have different parameters")]
    ParameterMismatch,
    #[error("self-similar clock undefined at t = {t} (extinction at {extinction})")]
    BeyondExtinction { t: f64, extinction: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Number of nodes including `r = 0` and the boundary node.
    pub points: usize,
    pub r_max: f64,
}

impl GridConfig {
    pub fn spacing(&self) -> f64 {
        self.r_max / (self.points - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        let mut g: Vec<f64> = (0..self.points).map(|i| i as f64 * h).collect();
        *g.last_mut().unwrap() = self.r_max;
        g
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub grid: GridConfig,
    /// Relative local-error tolerance of the time integrator.
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    /// Snapshot times besides `t0` and `t1`.
    pub output_times: Vec<f64>,
    pub max_steps: usize,
}

impl FlowConfig {
    /// Grid of `points` nodes on `[0, r_max]`; the time tolerance scales with
    /// the squared spacing so that refining the grid refines the time steps too.
    pub fn new(points: usize, r_max: f64) -> Self {
        let h = r_max / (points.max(2) - 1) as f64;
        FlowConfig {
            grid: GridConfig { points, r_max },
            rtol: 1e-3 * h * h,
            atol: 1e-14,
            h_init: 1e-7,
            output_times: Vec::new(),
            max_steps: 1_000_000,
        }
    }

    pub fn with_output_times(mut self, times: Vec<f64>) -> Self {
        self.output_times = times;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub t: f64,
    pub grid: Vec<f64>,
    pub u_bar: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowStats {
    pub accepted: usize,
    pub rejected: usize,
    pub newton_iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowTrajectory {
    pub params: SolitonParams,
    pub t0: f64,
    pub states: Vec<FlowState>,
    pub extinction_time: Option<f64>,
    pub stats: FlowStats,
}

/// `ū(x, t) = amplitude · u(x · stretch)` for the self-similar solution started at `t0`.
///
/// Shrinkers become extinct at `t0 + 1`; expanders are born at `t0 − 1`.
pub fn self_similar_scaling(params: &SolitonParams, t0: f64, t: f64) -> Result<(f64, f64), FlowError> {
    let (beta, gamma) = (params.beta(), params.gamma());
    let tau = t - t0;
    match params.class() {
        SolitonClass::Shrinker => {
            let sigma = 1.0 - tau;
            if !(sigma > 0.0) {
                return Err(FlowError::BeyondExtinction { t, extinction: t0 + 1.0 });
            }
            Ok((sigma.powf(gamma), sigma.powf(beta)))
        }
        SolitonClass::Steady => Ok(((-gamma * tau).exp(), (-beta * tau).exp())),
        SolitonClass::Expander => {
            let sigma = 1.0 + tau;
            if !(sigma > 0.0) {
                return Err(FlowError::BeyondExtinction { t, extinction: t0 - 1.0 });
            }
            Ok((sigma.powf(-gamma), sigma.powf(-beta)))
        }
    }
}

/// Pointwise evaluation of a reference profile.
#[derive(Clone, Debug)]
pub enum Reference {
    Exact(ClosedForm),
    Interpolated(CubicHermite),
}

impl Reference {
    pub fn from_profile(profile: &RadialProfile) -> Self {
        match profile.source() {
            ProfileSource::ClosedForm(cf) => Reference::Exact(cf),
            ProfileSource::Integrated => Reference::Interpolated(
                CubicHermite::from_slopes(profile.r().to_vec(), profile.u().to_vec(), profile.du_dr().to_vec())
                    .expect("profiles have strictly increasing grids"),
            ),
        }
    }

    pub fn eval(&self, r: f64) -> Option<f64> {
        match self {
            Reference::Exact(cf) => Some(cf.eval(r).0),
            Reference::Interpolated(h) => h.eval(r),
        }
    }
}

/// Far-field data at the last node.
#[derive(Clone, Debug)]
pub enum Boundary {
    /// Pinned to the self-similar prediction from the reference profile.
    SelfSimilar {
        params: SolitonParams,
        t0: f64,
        reference: Reference,
        r_max: f64,
    },
    Fixed(f64),
}

impl Boundary {
    fn value(&self, t: f64) -> Result<f64, FlowError> {
        match self {
            Boundary::Fixed(v) => Ok(*v),
            Boundary::SelfSimilar { params, t0, reference, r_max } => {
                let (amp, stretch) = self_similar_scaling(params, *t0, t)?;
                let r = r_max * stretch;
                reference.eval(r).map(|u| amp * u).ok_or(FlowError::DomainTooSmall { needed: r, available: f64::NAN })
            }
        }
    }
}

/// Central differences for `D Δ φ(ū)` with `D = (n−1)/m`, `φ = ū^m`.
///
/// Row `i ≥ 1`: `D[φ'' + (n−1)φ'/r]` with second-order central differences, whose
/// truncation error is a smooth function of `r`. Row 0 uses the even extension
/// and a fourth-difference correction so that its truncation error matches the
/// interior one in the limit `r → 0`; the discretization error then has no kink
/// at the origin, which keeps curvature of the computed solution meaningful.
struct Operator {
    m: f64,
    /// Weights of `φ_{i−1}`, `φ_i`, `φ_{i+1}` in row `i`.
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    /// Weight of `φ_2` in row 0.
    extra: f64,
}

impl Operator {
    fn new(n: usize, points: usize, h: f64) -> Self {
        let nf = n as f64;
        let m = (nf - 2.0) / (nf + 2.0);
        let d = (nf - 1.0) / m / (h * h);
        let mut lower = vec![0.0; points];
        let mut diag = vec![0.0; points];
        let mut upper = vec![0.0; points];
        // 2n(φ₁ − φ₀) + ((n−1)/12)(2φ₂ − 8φ₁ + 6φ₀)
        let corr = (nf - 1.0) / 12.0;
        diag[0] = d * (-2.0 * nf + 6.0 * corr);
        upper[0] = d * (2.0 * nf - 8.0 * corr);
        let extra = d * 2.0 * corr;
        for i in 1..points - 1 {
            let b = (nf - 1.0) / (2.0 * i as f64);
            lower[i] = d * (1.0 - b);
            diag[i] = -2.0 * d;
            upper[i] = d * (1.0 + b);
        }
        Operator { m, lower, diag, upper, extra }
    }

    /// `F(y)` on the unknown nodes `0..N−1`, with `y[N−1]` the boundary value.
    fn apply(&self, y: &[f64], out: &mut [f64]) {
        let nu = y.len() - 1;
        let phi: Vec<f64> = y.iter().map(|v| v.powf(self.m)).collect();
        out[0] = self.diag[0] * phi[0] + self.upper[0] * phi[1] + self.extra * phi[2];
        for i in 1..nu {
            out[i] = self.lower[i] * phi[i - 1] + self.diag[i] * phi[i] + self.upper[i] * phi[i + 1];
        }
    }
}

/// Solves a tridiagonal system in place (`lower[0]` and `upper[n−1]` unused).
fn thomas(lower: &[f64], diag: &mut [f64], upper: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    for i in 1..n {
        let w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
    }
}

/// Converge to rounding level: curvature of snapshots takes four derivatives.
const NEWTON_TOL: f64 = 1e-14;
/// Accept once the updates stop shrinking below this level.
const NEWTON_STALL: f64 = 1e-11;
const NEWTON_MAX: usize = 30;

/// Solves `y − base − c F(y) = 0` on the unknown nodes; `y` holds the guess and
/// the boundary value in its last entry. Returns the iteration count.
fn newton_solve(op: &Operator, y: &mut [f64], base: &[f64], c: f64) -> Option<usize> {
    let nu = y.len() - 1;
    let mut f = vec![0.0; nu];
    let mut lower = vec![0.0; nu];
    let mut diag = vec![0.0; nu];
    let mut upper = vec![0.0; nu];
    let mut g = vec![0.0; nu];
    let m = op.m;
    let mut prev_change = f64::INFINITY;
    for it in 1..=NEWTON_MAX {
        op.apply(y, &mut f);
        for i in 0..nu {
            g[i] = -(y[i] - base[i] - c * f[i]);
        }
        let dphi: Vec<f64> = y.iter().map(|v| m * v.powf(m - 1.0)).collect();
        for i in 0..nu {
            diag[i] = 1.0 - c * op.diag[i] * dphi[i];
            upper[i] = if i + 1 < nu { -c * op.upper[i] * dphi[i + 1] } else { 0.0 };
            lower[i] = if i > 0 { -c * op.lower[i] * dphi[i - 1] } else { 0.0 };
        }
        // fold the (0, 2) entry into row 0 using row 1
        let e02 = -c * op.extra * dphi[2];
        if nu > 2 {
            let w = e02 / upper[1];
            diag[0] -= w * lower[1];
            upper[0] -= w * diag[1];
            g[0] -= w * g[1];
        }
        thomas(&lower, &mut diag, &upper, &mut g);
        let mut frac: f64 = 1.0;
        for i in 0..nu {
            if g[i] < 0.0 && y[i] + g[i] <= 0.0 {
                frac = frac.min(0.9 * y[i] / -g[i]);
            }
        }
        let mut change: f64 = 0.0;
        for i in 0..nu {
            let d = frac * g[i];
            y[i] += d;
            change = change.max((d / y[i]).abs());
        }
        if !change.is_finite() {
            return None;
        }
        if frac == 1.0 && (change <= NEWTON_TOL || (change <= NEWTON_STALL && change >= 0.5 * prev_change)) {
            return Some(it);
        }
        prev_change = change;
    }
    None
}

/// Evolves a soliton profile from `t0` to `t1` with the far field pinned to
/// its own self-similar prediction.
pub fn evolve_fde(initial: &RadialProfile, t0: f64, t1: f64, cfg: &FlowConfig) -> Result<FlowTrajectory, FlowError> {
    let grid = cfg.grid.nodes();
    let r_max = cfg.grid.r_max;
    if r_max > initial.r_max() {
        return Err(FlowError::DomainTooSmall { needed: r_max, available: initial.r_max() });
    }
    let reference = Reference::from_profile(initial);
    let u0: Vec<f64> = grid.iter().map(|&r| reference.eval(r).expect("inside profile range")).collect();
    let boundary = Boundary::SelfSimilar { params: *initial.params(), t0, reference, r_max };
    evolve_fde_data(initial.params(), u0, t0, t1, cfg, &boundary)
}

/// Evolves arbitrary positive data `u0` sampled on `cfg.grid`.
pub fn evolve_fde_data(
    params: &SolitonParams,
    u0: Vec<f64>,
    t0: f64,
    t1: f64,
    cfg: &FlowConfig,
    boundary: &Boundary,
) -> Result<FlowTrajectory, FlowError> {
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(FlowError::InvalidInterval { t0, t1 });
    }
    let points = cfg.grid.points;
    if points < 8 || !(cfg.grid.r_max > 0.0) {
        return Err(FlowError::InvalidGrid(format!("{points} points on [0, {}]", cfg.grid.r_max)));
    }
    if u0.len() != points {
        return Err(FlowError::InvalidGrid("initial data length differs from grid".into()));
    }
    let grid = cfg.grid.nodes();
    if let Some(i) = u0.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(FlowError::PositivityLost { t: t0, r: grid[i] });
    }
    let op = Operator::new(params.n(), points, cfg.grid.spacing());
    let nu = points - 1;
    let initial_max = u0.iter().cloned().fold(0.0, f64::max);

    let mut outputs: Vec<f64> = cfg.output_times.iter().copied().filter(|&t| t > t0 && t < t1).collect();
    outputs.push(t1);
    outputs.sort_by(f64::total_cmp);
    outputs.dedup();

    let mut states = vec![FlowState { t: t0, grid: grid.clone(), u_bar: u0.clone() }];
    let mut stats = FlowStats::default();
    // accepted history, newest last: (t, y)
    let mut hist: Vec<(f64, Vec<f64>)> = vec![(t0, u0)];
    let mut t = t0;
    let mut h = cfg.h_init.min(t1 - t0);
    let mut h_prev = 0.0;
    let mut next_out = 0;
    let mut extinction_time = None;

    while next_out < outputs.len() {
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return Err(FlowError::TooManySteps { t });
        }
        if h < 1e-14 * (1.0 + t.abs()) {
            return Err(FlowError::StepSizeUnderflow { t });
        }
        let target = outputs[next_out];
        // land exactly on output times, halving the gap instead of leaving a sliver
        let remaining = target - t;
        let lands = h >= remaining * (1.0 - 1e-12);
        let step = if lands {
            remaining
        } else if 2.0 * h > remaining {
            0.5 * remaining
        } else {
            h
        };
        let t_new = if lands { target } else { t + step };
        let yn = &hist.last().unwrap().1;
        let mut y = yn.clone();
        y[nu] = boundary.value(t_new)?;
        let (base, c): (Vec<f64>, f64) = if hist.len() == 1 {
            (yn[..nu].to_vec(), step)
        } else {
            let w = step / h_prev;
            let ym1 = &hist[hist.len() - 2].1;
            let a1 = (1.0 + w) * (1.0 + w) / (1.0 + 2.0 * w);
            let a2 = w * w / (1.0 + 2.0 * w);
            // linear extrapolation as Newton guess
            for i in 0..nu {
                let guess = yn[i] + w * (yn[i] - ym1[i]);
                if guess > 0.0 {
                    y[i] = guess;
                }
            }
            ((0..nu).map(|i| a1 * yn[i] - a2 * ym1[i]).collect(), step * (1.0 + w) / (1.0 + 2.0 * w))
        };
        let Some(iters) = newton_solve(&op, &mut y, &base, c) else {
            stats.rejected += 1;
            h = 0.25 * step;
            continue;
        };
        stats.newton_iterations += iters;

        // local error estimate from the third divided difference
        let mut factor = 2.0;
        if hist.len() >= 3 {
            let (t1h, y1) = &hist[hist.len() - 1];
            let (t2h, y2) = &hist[hist.len() - 2];
            let (t3h, y3) = &hist[hist.len() - 3];
            let hn = step;
            let hm = t1h - t2h;
            let coeff = hn * hn * (hn + hm) * (hn + hm) / (2.0 * hn + hm);
            let mut err: f64 = 0.0;
            for i in 0..nu {
                let d01 = (y[i] - y1[i]) / (t_new - t1h);
                let d12 = (y1[i] - y2[i]) / (t1h - t2h);
                let d23 = (y2[i] - y3[i]) / (t2h - t3h);
                let d012 = (d01 - d12) / (t_new - t2h);
                let d123 = (d12 - d23) / (t1h - t3h);
                let d0123 = (d012 - d123) / (t_new - t3h);
                let lte = d0123 * coeff;
                err = err.max(lte.abs() / (cfg.atol + cfg.rtol * y[i].abs()));
            }
            if !err.is_finite() {
                stats.rejected += 1;
                h = 0.25 * step;
                continue;
            }
            if err > 1.0 {
                stats.rejected += 1;
                h = step * (0.9 * err.powf(-1.0 / 3.0)).clamp(0.2, 0.9);
                continue;
            }
            factor = if err == 0.0 { 2.0 } else { (0.9 * err.powf(-1.0 / 3.0)).clamp(0.2, 2.0) };
        } else {
            factor = factor.min(1.5);
        }
        if let Some(i) = y[..nu].iter().position(|&v| !(v > 0.0)) {
            return Err(FlowError::PositivityLost { t: t_new, r: grid[i] });
        }
        stats.accepted += 1;
        h_prev = step;
        t = t_new;
        if !lands {
            h = step * factor;
        } else {
            h = h.max(step) * factor.clamp(0.5, 1.0);
        }
        hist.push((t, y));
        if hist.len() > 3 {
            hist.remove(0);
        }
        let y = &hist.last().unwrap().1;
        if lands {
            states.push(FlowState { t, grid: grid.clone(), u_bar: y.clone() });
            next_out += 1;
        }
        let max = y.iter().cloned().fold(0.0, f64::max);
        if max < 1e-10 * initial_max {
            extinction_time = Some(t);
            if !lands {
                states.push(FlowState { t, grid: grid.clone(), u_bar: y.clone() });
            }
            break;
        }
    }
    Ok(FlowTrajectory { params: *params, t0, states, extinction_time, stats })
}

/// Per-snapshot `(t, max relative deviation)` from the rescaled reference profile,
/// over the inner 90% of the domain.
pub fn self_similar_error(traj: &FlowTrajectory, profile: &RadialProfile) -> Result<Vec<(f64, f64)>, FlowError> {
    if &traj.params != profile.params() {
        return Err(FlowError::ParameterMismatch);
    }
    let reference = Reference::from_profile(profile);
    traj.states
        .iter()
        .map(|st| {
            let (amp, stretch) = self_similar_scaling(&traj.params, traj.t0, st.t)?;
            let r_end = *st.grid.last().unwrap();
            let cut = 0.9 * r_end;
            let errs = par::map_range(st.grid.len(), |i| {
                let r = st.grid[i];
                if r > cut {
                    return Ok(0.0);
                }
                let pred = reference
                    .eval(r * stretch)
                    .ok_or(FlowError::DomainTooSmall { needed: r * stretch, available: profile.r_max() })?;
                let pred = amp * pred;
                Ok(((st.u_bar[i] - pred) / pred).abs())
            });
            let mut worst: f64 = 0.0;
            for e in errs {
                worst = worst.max(e?);
            }
            Ok((st.t, worst))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarnackSample {
    pub t: f64,
    /// Minimum of `Z` over the inner 90% of the domain; `NaN` when skipped.
    pub min_z: f64,
    /// Set when the Ricci curvature was not positive somewhere in the window.
    pub skipped: bool,
}

/// Resampling used before differentiating a snapshot four times.
///
/// Rounding and solver noise in `ū` are amplified like `spacing⁻⁴`, so curvature
/// is evaluated on a subset of nodes spaced at least `min_stride` cells apart
/// and, away from the origin, at least `relative_spacing · r` apart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarnackConfig {
    pub min_stride: usize,
    pub relative_spacing: f64,
}

impl Default for HarnackConfig {
    fn default() -> Self {
        HarnackConfig { min_stride: 2, relative_spacing: 0.02 }
    }
}

/// Indices of the resampled nodes.
pub fn curvature_nodes(grid: &[f64], cfg: &HarnackConfig) -> Vec<usize> {
    let stride = cfg.min_stride.max(1);
    let h = if grid.len() > 1 { grid[1] - grid[0] } else { 0.0 };
    let mut idx = vec![0];
    let mut i = 0;
    loop {
        let gap = (stride as f64 * h).max(cfg.relative_spacing * grid[i]);
        let mut j = i + stride;
        while j < grid.len() && grid[j] - grid[i] < gap * (1.0 - 1e-12) {
            j += 1;
        }
        if j >= grid.len() {
            break;
        }
        idx.push(j);
        i = j;
    }
    idx
}

/// Curvature of the metric `ū^{1−m}δ` of one snapshot on the resampled nodes.
pub fn snapshot_curvature(
    params: &SolitonParams,
    state: &FlowState,
    cfg: &HarnackConfig,
) -> Option<RadialMetricCurvature> {
    let idx = curvature_nodes(&state.grid, cfg);
    let g: Vec<f64> = idx.iter().map(|&i| state.grid[i]).collect();
    let u: Vec<f64> = idx.iter().map(|&i| state.u_bar[i]).collect();

    radial_metric_curvature(params.n(), &g, &u).ok()
}

/// Minimum Harnack quantity per snapshot.
pub fn harnack_monitor(traj: &FlowTrajectory) -> Vec<HarnackSample> {
    harnack_monitor_with(traj, &HarnackConfig::default())
}

pub fn harnack_monitor_with(traj: &FlowTrajectory, cfg: &HarnackConfig) -> Vec<HarnackSample> {
    par::map_slice(&traj.states, |st| {
        let Some(c) = snapshot_curvature(&traj.params, st, cfg) else {
            return HarnackSample { t: st.t, min_z: f64::NAN, skipped: true };
        };
        let cut = 0.9 * st.grid.last().unwrap();
        let mut min_z = f64::INFINITY;
        let mut skipped = false;
        for i in 0..c.r.len() {
            if c.r[i] > cut {
                break;
            }
            if !(c.lam[i] > 0.0 && c.mu[i] > 0.0) {
                skipped = true;
                break;
            }
            min_z = min_z.min(c.z[i]);
        }
        HarnackSample { t: st.t, min_z: if skipped { f64::NAN } else { min_z }, skipped }
    })
}

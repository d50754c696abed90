//! Adaptive one-step integrators for small autonomous-ish ODE systems.
//!
//! Two embedded pairs of order 5(4) are available:
//!
//! * Dormand–Prince (explicit, FSAL), used for the nonstiff bulk of a run;
//! * Kvaerno's 7-stage ESDIRK (stiffly accurate, A- and B-stable), solved with a
//!   simplified Newton iteration on `I − hγJ`.
//!
//! [`Method::Auto`] picks per step: if `h·‖J‖∞` exceeds the explicit stability
//! bound the step is taken implicitly. Both are one-step methods, so switching
//! needs no restart. Accepted steps are returned verbatim (no dense output).

use thiserror::Error;

/// Explicit Dormand–Prince stability interval on the negative real axis is ~3.3.
const EXPLICIT_STABILITY_BOUND: f64 = 3.0;
const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;
const NEWTON_MAX_ITER: usize = 12;
const NEWTON_TOL: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("solution left the admissible region (vanished) near t = {t}")]
    Vanished { t: f64 },
    #[error("solution left the admissible region (blew up) near t = {t}")]
    BlewUp { t: f64 },
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("step budget exhausted at t = {t}")]
    TooManySteps { t: f64 },
    #[error("invalid integration interval [{t0}, {t1}]")]
    InvalidInterval { t0: f64, t1: f64 },
}

/// Outcome of the per-state admissibility guard.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Admissibility {
    Ok,
    Vanished,
    BlewUp,
}

pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N];

    fn jacobian(&self, t: f64, y: &[f64; N]) -> [[f64; N]; N] {
        finite_difference_jacobian(self, t, y)
    }

    fn admissible(&self, _t: f64, _y: &[f64; N]) -> Admissibility {
        Admissibility::Ok
    }
}

/// Forward-difference Jacobian; `jac[i][j] = ∂f_i/∂y_j`.
pub fn finite_difference_jacobian<S, const N: usize>(sys: &S, t: f64, y: &[f64; N]) -> [[f64; N]; N]
where
    S: OdeSystem<N> + ?Sized,
{
    let f0 = sys.rhs(t, y);
    let mut jac = [[0.0; N]; N];
    for j in 0..N {
        let dy = f64::EPSILON.sqrt() * y[j].abs().max(1e-8);
        let mut yp = *y;
        yp[j] += dy;
        let fp = sys.rhs(t, &yp);
        for i in 0..N {
            jac[i][j] = (fp[i] - f0[i]) / dy;
        }
    }
    jac
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    DormandPrince,
    Kvaerno,
    Auto,
}

#[derive(Clone, Debug)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
    pub method: Method,
}

impl StepControl {
    pub fn new(rtol: f64) -> Self {
        StepControl {
            rtol,
            atol: rtol * 1e-12,
            h_init: 1e-3,
            h_max: f64::INFINITY,
            h_min: 1e-14,
            max_steps: 2_000_000,
            method: Method::Auto,
        }
    }

    pub fn with_h_max(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }

    pub fn with_h_init(mut self, h_init: f64) -> Self {
        self.h_init = h_init;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_atol(mut self, atol: f64) -> Self {
        self.atol = atol;
        self
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub implicit_steps: usize,
    pub rhs_evals: usize,
}

#[derive(Clone, Debug)]
pub struct Solution<const N: usize> {
    pub t: Vec<f64>,
    pub y: Vec<[f64; N]>,
    pub stats: Stats,
}

impl<const N: usize> Solution<N> {
    pub fn last(&self) -> (f64, [f64; N]) {
        (*self.t.last().unwrap(), *self.y.last().unwrap())
    }
}

// Dormand–Prince 5(4).
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

// Kvaerno 7-stage ESDIRK 5(4); last row is the solution, row 6 the embedded one.
const KV_GAMMA: f64 = 0.26;
const KV_C: [f64; 7] = [0.0, 0.52, 1.230333209967908, 0.895765984350076, 0.436393609858648, 1.0, 1.0];
const KV_A: [[f64; 7]; 7] = [
    [0.0; 7],
    [KV_GAMMA, KV_GAMMA, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.13, 0.840_333_209_967_908_1, KV_GAMMA, 0.0, 0.0, 0.0, 0.0],
    [0.22371961478320505, 0.476_755_323_197_997, -0.06470895363112615, KV_GAMMA, 0.0, 0.0, 0.0],
    [0.16648564323248321, 0.104_500_188_415_917_2, 0.03631482272098715, -0.13090704451073998, KV_GAMMA, 0.0, 0.0],
    [0.13855640231268224, 0.0, -0.04245337201752043, 0.02446657898003141, 0.619_430_390_724_806_8, KV_GAMMA, 0.0],
    [
        0.13659751177640291,
        0.0,
        -0.05496908796538376,
        -0.04118626728321046,
        0.629_933_048_990_164,
        0.06962479448202728,
        KV_GAMMA,
    ],
];

enum Trial<const N: usize> {
    Done { y1: [f64; N], err: f64, f1: Option<[f64; N]> },
    Failed,
}

fn error_norm<const N: usize>(y0: &[f64; N], y1: &[f64; N], e: &[f64; N], ctl: &StepControl) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = ctl.atol + ctl.rtol * y0[i].abs().max(y1[i].abs());
        let r = e[i] / sc;
        acc += r * r;
    }
    (acc / N as f64).sqrt()
}

fn all_finite<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

fn inf_norm<const N: usize>(jac: &[[f64; N]; N]) -> f64 {
    jac.iter().map(|row| row.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn dormand_prince_step<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    t: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    h: f64,
    ctl: &StepControl,
    stats: &mut Stats,
) -> Trial<N> {
    let mut k = [[0.0; N]; 7];
    k[0] = *f0;
    for s in 1..7 {
        let mut ys = *y0;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = DP_A[s][j];
            if a != 0.0 {
                for i in 0..N {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        if !all_finite(&ys) {
            return Trial::Failed;
        }
        k[s] = sys.rhs(t + DP_C[s] * h, &ys);
        stats.rhs_evals += 1;
        if !all_finite(&k[s]) {
            return Trial::Failed;
        }
    }
    let mut y1 = *y0;
    for j in 0..6 {
        let a = DP_A[6][j];
        for i in 0..N {
            y1[i] += h * a * k[j][i];
        }
    }
    let mut e = [0.0; N];
    for (j, kj) in k.iter().enumerate() {
        for i in 0..N {
            e[i] += h * DP_E[j] * kj[i];
        }
    }
    let err = error_norm(y0, &y1, &e, ctl);
    Trial::Done { y1, err, f1: Some(k[6]) }
}

/// Solves `a x = b` for small dense systems with partial pivoting.
fn solve_dense<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Option<[f64; N]> {
    for col in 0..N {
        let piv = (col..N).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 || !a[piv][col].is_finite() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..N {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                let pivot_row = a[col];
                for (x, p) in a[row].iter_mut().zip(&pivot_row).skip(col) {
                    *x -= f * p;
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = [0.0; N];
    for row in (0..N).rev() {
        let mut acc = b[row];
        for c in row + 1..N {
            acc -= a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

#[allow(clippy::too_many_arguments)]
fn kvaerno_step<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    t: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    jac: &[[f64; N]; N],
    h: f64,
    ctl: &StepControl,
    stats: &mut Stats,
) -> Trial<N> {
    let hg = h * KV_GAMMA;
    let mut iter_matrix = [[0.0; N]; N];
    for i in 0..N {
        for j in 0..N {
            iter_matrix[i][j] = if i == j { 1.0 } else { 0.0 } - hg * jac[i][j];
        }
    }
    let mut k = [[0.0; N]; 7];
    k[0] = *f0;
    let mut stages = [[0.0; N]; 7];
    stages[0] = *y0;
    for s in 1..7 {
        let mut base = *y0;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = KV_A[s][j];
            if a != 0.0 {
                for i in 0..N {
                    base[i] += h * a * kj[i];
                }
            }
        }
        // the previous stage value; extrapolating with k would carry its rounding noise
        let mut z = stages[s - 1];
        let ts = t + KV_C[s] * h;
        let mut converged = false;
        let mut prev_norm = f64::INFINITY;
        for _ in 0..NEWTON_MAX_ITER {
            let fz = sys.rhs(ts, &z);
            stats.rhs_evals += 1;
            if !all_finite(&fz) {
                return Trial::Failed;
            }
            let mut g = [0.0; N];
            for i in 0..N {
                g[i] = -(z[i] - base[i] - hg * fz[i]);
            }
            let Some(dz) = solve_dense(iter_matrix, g) else {
                return Trial::Failed;
            };
            for i in 0..N {
                z[i] += dz[i];
            }
            if !all_finite(&z) {
                return Trial::Failed;
            }
            let norm = error_norm(&z, &z, &dz, ctl);
            if norm <= NEWTON_TOL {
                converged = true;
                break;
            }
            if norm > 2.0 * prev_norm {
                return Trial::Failed;
            }
            prev_norm = norm;
        }
        if !converged {
            return Trial::Failed;
        }
        for i in 0..N {
            k[s][i] = (z[i] - base[i]) / hg;
        }
        stages[s] = z;
    }
    let y1 = stages[6];
    let mut e = [0.0; N];
    for i in 0..N {
        e[i] = stages[6][i] - stages[5][i];
    }
    // Shampine's filter: damps the stiff components of the raw estimate.
    let e = solve_dense(iter_matrix, e).unwrap_or(e);
    let err = error_norm(y0, &y1, &e, ctl);
    Trial::Done { y1, err, f1: None }
}

/// Integrates from `t0` to `t1 > t0`, storing every accepted step.
pub fn integrate<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    ctl: &StepControl,
) -> Result<Solution<N>, OdeError> {
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(OdeError::InvalidInterval { t0, t1 });
    }
    let mut stats = Stats::default();
    let mut ts = vec![t0];
    let mut ys = vec![y0];
    let mut t = t0;
    let mut y = y0;
    let mut f = sys.rhs(t, &y);
    stats.rhs_evals += 1;
    let mut h = ctl.h_init.min(ctl.h_max).min(t1 - t0);
    let mut last_guard: Option<Admissibility> = None;
    let mut just_rejected = false;

    while t < t1 {
        if stats.accepted + stats.rejected >= ctl.max_steps {
            return Err(OdeError::TooManySteps { t });
        }
        let h_floor = ctl.h_min.max(16.0 * f64::EPSILON * t.abs());
        if h < h_floor {
            return Err(match last_guard {
                Some(Admissibility::Vanished) => OdeError::Vanished { t },
                Some(Admissibility::BlewUp) => OdeError::BlewUp { t },
                _ => OdeError::StepSizeUnderflow { t, h },
            });
        }
        let last = t + h >= t1 || (t1 - (t + h)) < h_floor;
        let h_step = if last { t1 - t } else { h };

        let implicit = match ctl.method {
            Method::DormandPrince => None,
            Method::Kvaerno => Some(sys.jacobian(t, &y)),
            Method::Auto => {
                let jac = sys.jacobian(t, &y);
                (h_step * inf_norm(&jac) > EXPLICIT_STABILITY_BOUND).then_some(jac)
            }
        };
        let trial = match &implicit {
            None => dormand_prince_step(sys, t, &y, &f, h_step, ctl, &mut stats),
            Some(jac) => kvaerno_step(sys, t, &y, &f, jac, h_step, ctl, &mut stats),
        };

        let (y1, err, f1) = match trial {
            Trial::Done { y1, err, f1 } if err.is_finite() => (y1, err, f1),
            _ => {
                stats.rejected += 1;
                last_guard = None;
                h = h_step * 0.25;
                just_rejected = true;
                continue;
            }
        };
        let t_new = if last { t1 } else { t + h_step };
        let guard = if all_finite(&y1) { sys.admissible(t_new, &y1) } else { Admissibility::BlewUp };
        if guard != Admissibility::Ok {
            stats.rejected += 1;
            last_guard = Some(guard);
            h = h_step * 0.5;
            just_rejected = true;
            continue;
        }
        if err <= 1.0 {
            stats.accepted += 1;
            if implicit.is_some() {
                stats.implicit_steps += 1;
            }
            t = t_new;
            y = y1;
            f = match f1 {
                Some(f1) => f1,
                None => {
                    stats.rhs_evals += 1;
                    sys.rhs(t, &y)
                }
            };
            ts.push(t);
            ys.push(y);
            last_guard = None;
            let mut fac = if err == 0.0 { FAC_MAX } else { (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX) };
            if just_rejected {
                fac = fac.min(1.0);
            }
            just_rejected = false;
            h = (h_step * fac).min(ctl.h_max);
        } else {
            stats.rejected += 1;
            last_guard = None;
            h = h_step * (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0);
            just_rejected = true;
        }
    }
    Ok(Solution { t: ts, y: ys, stats })
}

//! Independent references: direct adaptive integration of
//! `i U' = H(t) U` and the closed-form constant-field propagator.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::interaction::InteractionSpec;
use crate::mat2::Mat2;
use crate::propagator::{transition_probability_of, PropagatorModel};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which form of the Hamiltonian to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// `eps sigma_3 - f sigma_1`
    H1,
    /// `eps sigma_1 + f sigma_3`
    H2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest step as a fraction of the drive period.
    pub max_step: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            max_step: 1.0 / 20.0,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rel_tol: tol,
            abs_tol: tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::Config("integrator tolerances must be positive".into()));
        }
        if !(self.max_step > 0.0 && self.max_step <= 1.0 / 20.0) {
            return Err(Error::Config("max_step must lie in (0, 1/20] drive periods".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct OracleTrajectory {
    pub times: Vec<f64>,
    pub u: Vec<Mat2>,
    /// Largest change of `max_col | |col|^2 - 1 |` over a single accepted step
    /// since the previous grid time. The cumulative drift grows with the
    /// number of steps and is read off `u` directly.
    pub unitarity_log: Vec<f64>,
}

fn hamiltonian(spec: &InteractionSpec, eps: f64, frame: Frame, t: f64) -> Mat2 {
    let f = Complex64::new(spec.field(t), 0.0);
    let e = Complex64::new(eps, 0.0);
    match frame {
        Frame::H2 => Mat2::new(f, e, e, -f),
        Frame::H1 => Mat2::new(e, -f, -f, -e),
    }
}

type State = [Complex64; 4];

fn to_state(u: &Mat2) -> State {
    [u.0[0][0], u.0[0][1], u.0[1][0], u.0[1][1]]
}

fn to_mat(y: &State) -> Mat2 {
    Mat2::new(y[0], y[1], y[2], y[3])
}

fn column_deviation(y: &State) -> f64 {
    let c0 = y[0].norm_sqr() + y[2].norm_sqr() - 1.0;
    let c1 = y[1].norm_sqr() + y[3].norm_sqr() - 1.0;
    c0.abs().max(c1.abs())
}

fn axpy(y: &State, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..4 {
            out[i] += k[i] * *c;
        }
    }
    out
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Stepper<'a> {
    spec: &'a InteractionSpec,
    eps: f64,
    frame: Frame,
    cfg: IntegratorConfig,
}

impl Stepper<'_> {
    fn deriv(&self, t: f64, y: &State) -> State {
        let h = hamiltonian(self.spec, self.eps, self.frame, t);
        to_state(&(h * to_mat(y)).scale(-I))
    }

    /// One attempted step; returns the proposal, its first-same-as-last
    /// derivative and the scaled error norm.
    fn attempt(&self, t: f64, y: &State, k1: &State, h: f64) -> (State, State, f64) {
        let k2 = self.deriv(t + C2 * h, &axpy(y, &[(h * A21, k1)]));
        let k3 = self.deriv(t + C3 * h, &axpy(y, &[(h * A31, k1), (h * A32, &k2)]));
        let k4 = self.deriv(t + C4 * h, &axpy(y, &[(h * A41, k1), (h * A42, &k2), (h * A43, &k3)]));
        let k5 = self.deriv(
            t + C5 * h,
            &axpy(y, &[(h * A51, k1), (h * A52, &k2), (h * A53, &k3), (h * A54, &k4)]),
        );
        let k6 = self.deriv(
            t + h,
            &axpy(y, &[(h * A61, k1), (h * A62, &k2), (h * A63, &k3), (h * A64, &k4), (h * A65, &k5)]),
        );
        let y_new = axpy(y, &[(h * B1, k1), (h * B3, &k3), (h * B4, &k4), (h * B5, &k5), (h * B6, &k6)]);
        let k7 = self.deriv(t + h, &y_new);
        let mut acc = 0.0;
        for i in 0..4 {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let sc = self.cfg.abs_tol + self.cfg.rel_tol * y[i].norm().max(y_new[i].norm());
            acc += (e.norm() / sc).powi(2);
        }
        (y_new, k7, (acc / 4.0).sqrt())
    }
}

/// Integrates `U` from the identity at `t = 0`, stopping exactly on each grid time.
pub fn integrate(
    spec: &InteractionSpec,
    epsilon: f64,
    t_grid: &[f64],
    cfg: &IntegratorConfig,
    frame: Frame,
) -> Result<OracleTrajectory> {
    cfg.validate()?;
    if t_grid.first().is_some_and(|&t| t < 0.0) || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Config("oracle grid must be non-decreasing from t >= 0".into()));
    }
    let stepper = Stepper {
        spec,
        eps: epsilon,
        frame,
        cfg: *cfg,
    };
    let h_max = cfg.max_step * spec.period();
    let mut t = 0.0;
    let mut y = to_state(&Mat2::IDENTITY);
    let mut k1 = stepper.deriv(t, &y);
    let mut h = h_max.min(1e-3 * spec.period());

    let mut out = OracleTrajectory {
        times: Vec::with_capacity(t_grid.len()),
        u: Vec::with_capacity(t_grid.len()),
        unitarity_log: Vec::with_capacity(t_grid.len()),
    };
    for &target in t_grid {
        let mut step_dev: f64 = 0.0;
        while t < target {
            let remaining = target - t;
            let clamped = remaining <= h;
            let step = if clamped { remaining } else { h };
            let (y_new, k7, err) = stepper.attempt(t, &y, &k1, step);
            if err <= 1.0 {
                t = if clamped { target } else { t + step };
                step_dev = step_dev.max((column_deviation(&y_new) - column_deviation(&y)).abs());
                y = y_new;
                k1 = k7;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if !(clamped && err <= 1.0) {
                h = (step * factor).min(h_max);
            }
            if h < 1e-14 * (1.0 + t.abs()) {
                return Err(Error::Stiffness { t });
            }
        }
        out.times.push(target);
        out.u.push(to_mat(&y));
        out.unitarity_log.push(step_dev);
    }
    Ok(out)
}

/// [`integrate`] in the frame of `eps sigma_1 + f sigma_3`.
pub fn integrate_schrodinger(
    spec: &InteractionSpec,
    epsilon: f64,
    t_grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<OracleTrajectory> {
    integrate(spec, epsilon, t_grid, cfg, Frame::H2)
}

/// `exp(-i (F0 sigma_3 + eps sigma_1) t)`
/// `= cos(w0 t) 1 - i sin(w0 t) / w0 (F0 sigma_3 + eps sigma_1)`, `w0 = sqrt(F0^2 + eps^2)`.
pub fn constant_field_propagator(f0: f64, epsilon: f64, t: f64) -> Mat2 {
    let w0 = f0.hypot(epsilon);
    if w0 == 0.0 {
        return Mat2::IDENTITY;
    }
    let c = Complex64::new((w0 * t).cos(), 0.0);
    let s = (w0 * t).sin() / w0;
    let h = Mat2::pauli_z().scale(Complex64::new(f0, 0.0)) + Mat2::pauli_x().scale(Complex64::new(epsilon, 0.0));
    Mat2::IDENTITY.scale(c) - h.scale(I * s)
}

/// `|Omega|` folded into `[0, omega / 2]`: quasi-energies are defined modulo
/// `omega` and up to sign.
pub fn fold_frequency(x: f64, omega: f64) -> f64 {
    let y = x.rem_euclid(omega);
    if y > 0.5 * omega {
        omega - y
    } else {
        y
    }
}

/// Secular frequency from the eigenphase of the monodromy `U(k T)`.
///
/// For `U = [[a, b], [-conj b, conj a]]` the eigenvalues are `exp(+-i theta)` with
/// `cos theta = Re a` and `sin theta = sqrt(Im(a)^2 + |b|^2)`, which stays
/// accurate for tiny `theta`. Returns `theta / (k T)` folded into `[0, omega/2]`;
/// only unambiguous while `k |Omega| T < pi`.
pub fn floquet_omega(spec: &InteractionSpec, epsilon: f64, periods: usize, cfg: &IntegratorConfig) -> Result<f64> {
    let t_end = periods as f64 * spec.period();
    let traj = integrate_schrodinger(spec, epsilon, &[t_end], cfg)?;
    let u = traj.u[0];
    let a = u.get(0, 0);
    let b = u.get(0, 1);
    let theta = (a.im.hypot(b.norm())).atan2(a.re);
    Ok(theta / t_end)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    /// `sup_t max_ij |U_pert - U_oracle|`.
    pub max_u_deviation: f64,
    /// `sup_t |P_pert - P_oracle|`.
    pub max_p_deviation: f64,
    /// `sup_t` oracle unitarity deviation.
    pub oracle_unitarity: f64,
    /// `pi / (2 t*)` from the first peak of the period-averaged oracle `P`, if
    /// the grid reaches past it.
    pub omega_from_peak: Option<f64>,
    pub omega_model: f64,
}

pub fn compare(model: &PropagatorModel, traj: &OracleTrajectory) -> ComparisonReport {
    let pert = model.evaluate_many(&traj.times);
    let mut max_u: f64 = 0.0;
    let mut max_p: f64 = 0.0;
    for (up, uo) in pert.iter().zip(&traj.u) {
        max_u = max_u.max(up.max_abs_diff(uo));
        max_p = max_p.max((transition_probability_of(up) - transition_probability_of(uo)).abs());
    }
    let p: Vec<f64> = traj.u.iter().map(transition_probability_of).collect();
    let period = 2.0 * std::f64::consts::PI / model.omega();
    ComparisonReport {
        max_u_deviation: max_u,
        max_p_deviation: max_p,
        oracle_unitarity: traj.unitarity_log.iter().cloned().fold(0.0, f64::max),
        omega_from_peak: first_peak(&traj.times, &p, period).map(|t| std::f64::consts::PI / (2.0 * t)),
        omega_model: model.omega_rabi(),
    }
}

/// Time of the first interior maximum of `p` averaged over one drive period
/// (uniform grid assumed, ideally a whole number of samples per period), refined by a parabola through the three samples.
pub fn first_peak(times: &[f64], p: &[f64], period: f64) -> Option<f64> {
    if times.len() < 3 {
        return None;
    }
    let dt = times[1] - times[0];
    if dt <= 0.0 {
        return None;
    }
    let half = ((0.5 * period / dt).round() as usize).max(1);
    let n = p.len();
    if n <= 2 * half + 2 {
        return None;
    }
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + p[i];
    }
    // trapezoid weights over exactly 2 half samples cancel every drive harmonic
    let avg: Vec<f64> = (half..n - half)
        .map(|i| {
            let sum = prefix[i + half + 1] - prefix[i - half] - 0.5 * (p[i - half] + p[i + half]);
            sum / (2 * half) as f64
        })
        .collect();
    for j in 1..avg.len() - 1 {
        if avg[j] >= avg[j - 1] && avg[j] > avg[j + 1] {
            let (a, b, c) = (avg[j - 1], avg[j], avg[j + 1]);
            let denom = a - 2.0 * b + c;
            let shift = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
            return Some(times[j + half] + shift * dt);
        }
    }
    None
}

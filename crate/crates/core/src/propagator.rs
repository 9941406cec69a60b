//! Floquet-form propagator built from the particular Riccati solution `g`.
//!
//! With `R = exp(-i int_0^t (f + g))` and `S = int_0^t R^-2`,
//!
//! ```text
//! U = [ R (1 + i g0 S)          -i eps R S                   ]
//!     [ -i eps conj(R S)        conj(R) (1 - i conj(g0 S))   ]
//! ```
//!
//! `R = conj(q) W` with `W = exp(-i int_0^t g)`, and `W` is summed in Fourier
//! space as `e^{sum H} e^{-i G_0 t} exp(-X)`, where `X = sum_{m != 0} H_m e^{i m omega t}`
//! and `H_m = G_m / (m omega)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::HarmonicSeries;
use crate::mat2::Mat2;
use crate::riccati::GSeries;

/// Internal consistency threshold for the assembled Fourier data.
pub const ASSEMBLY_TOL: f64 = 1e-8;
/// Shell cutoff for the exponential series behind `W` and `W^-2`.
pub const W_TERM_TOL: f64 = 1e-16;
pub const W_MAX_DEGREE: usize = 60;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone)]
pub struct PropagatorModel {
    omega_rabi: f64,
    epsilon: f64,
    g0: Complex64,
    r: HarmonicSeries,
    rinv2: HarmonicSeries,
    s: HarmonicSeries,
    sigma0: Complex64,
    // S without its m = 0 mode, and minus the sum of what is left
    s_fast: HarmonicSeries,
    sigma_fast: Complex64,
    gamma_f_eps: Complex64,
    h: HarmonicSeries,
    w: HarmonicSeries,
}

impl PropagatorModel {
    pub fn omega_rabi(&self) -> f64 {
        self.omega_rabi
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn g0(&self) -> Complex64 {
        self.g0
    }

    /// Driving frequency.
    pub fn omega(&self) -> f64 {
        self.r.omega()
    }

    /// `R_m` on the `nu = -Omega` lattice.
    pub fn r(&self) -> &HarmonicSeries {
        &self.r
    }

    /// `R^(-2)_m` on the `nu = 2 Omega` lattice.
    pub fn rinv2(&self) -> &HarmonicSeries {
        &self.rinv2
    }

    /// `S_m` on the `nu = 2 Omega` lattice; `S(t) = sigma0 + s(t)`.
    pub fn s(&self) -> &HarmonicSeries {
        &self.s
    }

    pub fn sigma0(&self) -> Complex64 {
        self.sigma0
    }

    /// `gamma_f(eps) = i sum_m H_m`.
    pub fn gamma_f_eps(&self) -> Complex64 {
        self.gamma_f_eps
    }

    /// `H_m = G_m / (m omega)`, zero mode unused.
    pub fn h(&self) -> &HarmonicSeries {
        &self.h
    }

    /// `W(t) = exp(-i int_0^t g)` on the `nu = -(Omega - F0)` lattice.
    pub fn w(&self) -> &HarmonicSeries {
        &self.w
    }

    pub fn r_at(&self, t: f64) -> Complex64 {
        self.r.evaluate(t)
    }

    /// `S(t) = sum_m S_m (e^{i (m omega + 2 Omega) t} - 1)`. The `m = 0` term
    /// is `R^-2_0 e^{i Omega t} sin(Omega t) / Omega`, which avoids cancelling
    /// two `O(1/Omega)` numbers when `Omega` is tiny.
    pub fn s_at(&self, t: f64) -> Complex64 {
        let half = 0.5 * self.rinv2.nu();
        let x = half * t;
        let slow = if x == 0.0 { t } else { x.sin() / half };
        self.rinv2.get(0) * Complex64::from_polar(slow, x) + self.sigma_fast + self.s_fast.evaluate(t)
    }

    pub fn evaluate_u(&self, t: f64) -> Mat2 {
        let r = self.r_at(t);
        let s = self.s_at(t);
        let eps = self.epsilon;
        let rs = r * s;
        Mat2::new(
            r * (1.0 + I * self.g0 * s),
            -I * eps * rs,
            -I * eps * rs.conj(),
            r.conj() * (1.0 - I * (self.g0 * s).conj()),
        )
    }

    /// `evaluate_u` over many times; parallel with the `parallel` feature.
    pub fn evaluate_many(&self, ts: &[f64]) -> Vec<Mat2> {
        crate::parallel::map(ts, |&t| self.evaluate_u(t))
    }

    /// `P(t) = |U_12(t)|^2`.
    pub fn transition_probability(&self, t: f64) -> f64 {
        self.evaluate_u(t).get(0, 1).norm_sqr()
    }

    /// `N(t) = |U_11|^2 + |U_12|^2 - 1`.
    pub fn unitarity_deviation(&self, t: f64) -> f64 {
        unitarity_deviation_of(&self.evaluate_u(t))
    }
}

pub fn transition_probability_of(u: &Mat2) -> f64 {
    u.get(0, 1).norm_sqr()
}

pub fn unitarity_deviation_of(u: &Mat2) -> f64 {
    u.get(0, 0).norm_sqr() + u.get(0, 1).norm_sqr() - 1.0
}

/// `(<sigma_1>, <sigma_2>, <sigma_3>)` of a normalized state.
pub fn bloch_vector(psi: [Complex64; 2]) -> Result<[f64; 3]> {
    let norm = (psi[0].norm_sqr() + psi[1].norm_sqr()).sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized { norm });
    }
    let c = psi[0].conj() * psi[1];
    Ok([2.0 * c.re, 2.0 * c.im, psi[0].norm_sqr() - psi[1].norm_sqr()])
}

fn exp_of(x: &HarmonicSeries, nu: f64, prefactor: Complex64) -> Result<HarmonicSeries> {
    let e = x.exp(W_TERM_TOL, W_MAX_DEGREE)?;
    Ok(HarmonicSeries::from_fn(x.omega(), nu, x.m_max(), |m| prefactor * e.get(m)))
}

/// Builds `R`, `R^-2`, `S` and checks `R(0) = 1`, `S(0) = 0` and `R^-2 R^2 = 1`.
pub fn assemble(g: &GSeries, q: &HarmonicSeries, q2: &HarmonicSeries) -> Result<PropagatorModel> {
    let omega = q.omega();
    let m_max = g.g.m_max();
    let omega_rabi = g.omega_rabi;
    let g_mean = omega_rabi - g.f0;

    let h = HarmonicSeries::from_fn(omega, 0.0, m_max, |m| {
        if m == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            g.g.get(m) / (m as f64 * omega)
        }
    });
    let sum_h: Complex64 = h.coeffs().iter().sum();
    let gamma_f_eps = I * sum_h;

    let w = exp_of(&h.scale(Complex64::new(-1.0, 0.0)), -g_mean, sum_h.exp())?;
    let w_inv2 = exp_of(&h.scale(Complex64::new(2.0, 0.0)), 2.0 * g_mean, (-2.0 * sum_h).exp())?;
    let r = q.conj_fn().convolve_into_cutoff(&w, m_max);
    let rinv2 = q2.convolve_into_cutoff(&w_inv2, m_max);

    let tol = rinv2.resonance_tol();
    for m in rinv2.modes() {
        if rinv2.frequency(m).abs() < tol {
            return Err(Error::Crossing { mode: m });
        }
    }
    let (s, sigma0) = rinv2.integrate_from_zero()?;
    let mut s_fast = s.clone();
    s_fast.set(0, Complex64::new(0.0, 0.0));
    let sigma_fast = -s_fast.coeffs().iter().sum::<Complex64>();

    let model = PropagatorModel {
        omega_rabi,
        epsilon: g.epsilon,
        g0: g.g0,
        r,
        rinv2,
        s,
        sigma0,
        s_fast,
        sigma_fast,
        gamma_f_eps,
        h,
        w,
    };
    check_assembly(&model)?;
    Ok(model)
}

fn check_assembly(model: &PropagatorModel) -> Result<()> {
    let r0 = model.r_at(0.0);
    if (r0 - 1.0).norm() > ASSEMBLY_TOL {
        return Err(Error::Assembly(format!("R(0) = {r0}")));
    }
    let s0 = model.s_at(0.0);
    if s0.norm() > ASSEMBLY_TOL {
        return Err(Error::Assembly(format!("S(0) = {s0}")));
    }
    let period = 2.0 * std::f64::consts::PI / model.omega();
    for k in 0..16 {
        let t = period * k as f64 / 16.0;
        let r = model.r_at(t);
        let d = (model.rinv2.evaluate(t) * r * r - 1.0).norm();
        if d > ASSEMBLY_TOL {
            return Err(Error::Assembly(format!("R^-2 R^2 - 1 = {d:e} at t = {t}")));
        }
    }
    Ok(())
}

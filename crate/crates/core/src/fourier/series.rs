use num_complex::Complex64;

use crate::error::{Error, Result};

/// Resonance window for `m*omega + nu = 0`, relative to `omega`.
pub const RESONANCE_REL_TOL: f64 = 1e-9;
/// Residual zero-frequency amplitude tolerated by integration, relative to the
/// largest coefficient.
pub const MEAN_REL_TOL: f64 = 1e-12;
/// Default mode cutoff.
pub const DEFAULT_M_MAX: usize = 40;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A truncated generalized Fourier series
///
/// ```text
/// h(t) = exp(i nu t) * sum_{|m| <= m_max} A_m exp(i m omega t)
/// ```
///
/// Coefficients live in a dense array indexed `m + m_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicSeries {
    omega: f64,
    nu: f64,
    m_max: usize,
    coeffs: Vec<Complex64>,
}

impl HarmonicSeries {
    pub fn zeros(omega: f64, nu: f64, m_max: usize) -> Self {
        assert!(omega > 0.0, "base frequency must be positive");
        Self {
            omega,
            nu,
            m_max,
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * m_max + 1],
        }
    }

    /// The constant function `value`.
    pub fn constant(omega: f64, m_max: usize, value: Complex64) -> Self {
        let mut s = Self::zeros(omega, 0.0, m_max);
        s.set(0, value);
        s
    }

    /// Builds a series from a coefficient closure evaluated for every `|m| <= m_max`.
    pub fn from_fn(omega: f64, nu: f64, m_max: usize, mut f: impl FnMut(i64) -> Complex64) -> Self {
        let mut s = Self::zeros(omega, nu, m_max);
        for m in s.modes() {
            s.set(m, f(m));
        }
        s
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn modes(&self) -> std::ops::RangeInclusive<i64> {
        -(self.m_max as i64)..=(self.m_max as i64)
    }

    /// Coefficient `A_m`; zero outside the stored range.
    pub fn get(&self, m: i64) -> Complex64 {
        if m.unsigned_abs() as usize > self.m_max {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[(m + self.m_max as i64) as usize]
    }

    /// Sets `A_m`. Panics when `|m| > m_max`.
    pub fn set(&mut self, m: i64, value: Complex64) {
        assert!(m.unsigned_abs() as usize <= self.m_max, "mode {m} outside cutoff");
        let idx = (m + self.m_max as i64) as usize;
        self.coeffs[idx] = value;
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let off = self.m_max as i64;
        self.coeffs.iter().enumerate().map(move |(k, &c)| (k as i64 - off, c))
    }

    pub fn resonance_tol(&self) -> f64 {
        RESONANCE_REL_TOL * self.omega
    }

    /// Angular frequency `m*omega + nu` of mode `m`.
    pub fn frequency(&self, m: i64) -> f64 {
        m as f64 * self.omega + self.nu
    }

    /// The mode index sitting on zero frequency, if the lattice has one.
    pub fn zero_mode(&self) -> Option<i64> {
        let m = (-self.nu / self.omega).round();
        if (m * self.omega + self.nu).abs() < self.resonance_tol() {
            Some(m as i64)
        } else {
            None
        }
    }

    /// Same function, new cutoff: coefficients beyond it are dropped, new ones are zero.
    pub fn with_cutoff(&self, m_max: usize) -> Self {
        let mut out = Self::zeros(self.omega, self.nu, m_max);
        let lim = m_max.min(self.m_max) as i64;
        for m in -lim..=lim {
            out.set(m, self.get(m));
        }
        out
    }

    pub fn evaluate(&self, t: f64) -> Complex64 {
        // Harmonics only see t modulo the period. Reducing first keeps all of
        // them consistent at large t, where m omega t runs to ~1e9 radians.
        let period = std::f64::consts::TAU / self.omega;
        let tau = (-(t / period).floor()).mul_add(period, t);
        let wt = self.omega * tau;
        let base = self.nu * t;
        let step = Complex64::from_polar(1.0, wt);
        let mut phase = Complex64::new(0.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        // Re-anchor the running phase every 16 modes to bound round-off drift.
        for (k, c) in self.coeffs.iter().enumerate() {
            if k % 16 == 0 {
                let m = k as f64 - self.m_max as f64;
                phase = Complex64::from_polar(1.0, base + m * wt);
            }
            acc += c * phase;
            phase *= step;
        }
        acc
    }

    /// Time average: the coefficient on zero frequency, or 0 if none exists.
    pub fn mean(&self) -> Complex64 {
        match self.zero_mode() {
            Some(m) => self.get(m),
            None => Complex64::new(0.0, 0.0),
        }
    }

    fn check_omega(&self, other: &Self) -> Result<()> {
        if (self.omega - other.omega).abs() > 1e-14 * self.omega.abs().max(other.omega.abs()) {
            return Err(Error::FrequencyMismatch {
                left: self.omega,
                right: other.omega,
            });
        }
        Ok(())
    }

    fn check_lattice(&self, other: &Self) -> Result<()> {
        self.check_omega(other)?;
        if (self.nu - other.nu).abs() > self.resonance_tol() {
            return Err(Error::OffsetMismatch {
                left: self.nu,
                right: other.nu,
            });
        }
        Ok(())
    }

    /// Pointwise product. Offsets add; the result keeps the larger cutoff.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.check_omega(other)?;
        let m_max = self.m_max.max(other.m_max);
        Ok(self.convolve_into_cutoff(other, m_max))
    }

    /// Pointwise product truncated to `m_max`.
    pub fn convolve_into_cutoff(&self, other: &Self, m_max: usize) -> Self {
        let mut out = Self::zeros(self.omega, self.nu + other.nu, m_max);
        let lim = m_max as i64;
        let (ma, mb) = (self.m_max as i64, other.m_max as i64);
        for (ia, a) in self.coeffs.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let p = ia as i64 - ma;
            let lo = (-lim - p).max(-mb);
            let hi = (lim - p).min(mb);
            if lo > hi {
                continue;
            }
            for q in lo..=hi {
                let b = other.coeffs[(q + mb) as usize];
                out.coeffs[(p + q + lim) as usize] += a * b;
            }
        }
        out
    }

    /// Sum of two series on the same lattice.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_lattice(other)?;
        let m_max = self.m_max.max(other.m_max);
        Ok(Self::from_fn(self.omega, self.nu, m_max, |m| self.get(m) + other.get(m)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_lattice(other)?;
        let m_max = self.m_max.max(other.m_max);
        Ok(Self::from_fn(self.omega, self.nu, m_max, |m| self.get(m) - other.get(m)))
    }

    /// `self += factor * other`, same lattice.
    pub fn add_scaled(&mut self, other: &Self, factor: Complex64) -> Result<()> {
        self.check_lattice(other)?;
        let lim = self.m_max.min(other.m_max) as i64;
        for m in -lim..=lim {
            let v = self.get(m) + factor * other.get(m);
            self.set(m, v);
        }
        Ok(())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= factor);
        out
    }

    /// Complex conjugate of the represented function:
    /// offset `-nu`, coefficients `conj(A_{-m})`.
    pub fn conj_fn(&self) -> Self {
        Self::from_fn(self.omega, -self.nu, self.m_max, |m| self.get(-m).conj())
    }

    /// Term-wise time derivative.
    pub fn derivative(&self) -> Self {
        Self::from_fn(self.omega, self.nu, self.m_max, |m| I * self.frequency(m) * self.get(m))
    }

    /// Antiderivative of a mean-free series.
    ///
    /// Returns the series `B` with `B_m = A_m / (i (m omega + nu))` and the
    /// constant `-B(0)`, so that `B(t) + constant` equals the integral over
    /// `[0, t]`. The zero-frequency mode, if any, must carry no amplitude.
    pub fn integrate_from_zero(&self) -> Result<(Self, Complex64)> {
        let b = self.antiderivative()?;
        let constant = -b.evaluate(0.0);
        Ok((b, constant))
    }

    /// Mean-free antiderivative, without the integration constant.
    pub fn antiderivative(&self) -> Result<Self> {
        let scale = self.max_abs();
        let tol = self.resonance_tol();
        let mut out = Self::zeros(self.omega, self.nu, self.m_max);
        for (m, a) in self.iter() {
            let w = self.frequency(m);
            if w.abs() < tol {
                if a.norm() > MEAN_REL_TOL * scale {
                    return Err(Error::SecularIntegration {
                        mode: m,
                        amplitude: a.norm(),
                    });
                }
                continue;
            }
            out.set(m, a / (I * w));
        }
        Ok(out)
    }

    /// Drops the zero-frequency coefficient.
    pub fn without_mean(&self) -> Self {
        let mut out = self.clone();
        if let Some(m) = self.zero_mode() {
            if m.unsigned_abs() as usize <= self.m_max {
                out.set(m, Complex64::new(0.0, 0.0));
            }
        }
        out
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `nu = 0` and `A_{-m} = conj(A_m)` to within `tol` (relative to the largest coefficient).
    pub fn is_real(&self, tol: f64) -> bool {
        if self.nu.abs() > self.resonance_tol() {
            return false;
        }
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        self.iter().all(|(m, a)| (a - self.get(-m).conj()).norm() <= tol * scale)
    }

    /// Magnitude of the two edge coefficients relative to the largest one.
    pub fn tail_ratio(&self) -> f64 {
        let m = self.m_max as i64;
        let edge = self.get(m).norm().max(self.get(-m).norm());
        let peak = self.max_abs();
        if peak == 0.0 {
            0.0
        } else {
            edge / peak
        }
    }

    pub fn is_converged(&self, tail_tol: f64) -> bool {
        self.tail_ratio() < tail_tol
    }

    /// `exp(self)` for a series on the `nu = 0` lattice, summed as
    /// `sum_k self^k / k!` shell by shell.
    ///
    /// Intermediate powers are kept on a doubled cutoff before the result is
    /// cut back to `m_max`. Stops once a shell's l1 norm drops below
    /// `term_tol` times the running sum.
    pub fn exp(&self, term_tol: f64, max_degree: usize) -> Result<Self> {
        if self.nu.abs() > self.resonance_tol() {
            return Err(Error::OffsetMismatch {
                left: self.nu,
                right: 0.0,
            });
        }
        let work = 2 * self.m_max;
        let base = self.with_cutoff(work);
        let mut term = Self::constant(self.omega, work, Complex64::new(1.0, 0.0));
        let mut sum = term.clone();
        let mut last = f64::INFINITY;
        for k in 1..=max_degree {
            term = term.convolve_into_cutoff(&base, work).scale(Complex64::new(1.0 / k as f64, 0.0));
            sum.add_scaled(&term, Complex64::new(1.0, 0.0))?;
            last = term.l1_norm();
            if last <= term_tol * sum.l1_norm().max(1.0) {
                return Ok(sum.with_cutoff(self.m_max));
            }
        }
        Err(Error::TruncationFailure {
            max_degree,
            last_shell: last,
        })
    }
}

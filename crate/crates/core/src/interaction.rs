//! The driving field `f(t)`, the Fourier data of `q = exp(i int_0^t f)` and
//! `q^2`, and the classification into conditions I / II / III.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{bessel_j_orders, HarmonicSeries, RESONANCE_REL_TOL};

/// Threshold for "mean value vanishes", relative to `max |Q^(2)_m|` and made
/// dimensionless with the appropriate power of `omega`.
pub const CLASS_TOL: f64 = 1e-10;
/// Shell cutoff for the exp-series behind `q` and `q^2`.
pub const TERM_TOL: f64 = 1e-17;
const MAX_SHELL_DEGREE: usize = 200;

/// A real periodic field `f(t) = F0 + sum_n f_n exp(i n omega t)` with
/// finitely many harmonics.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionSpec {
    omega: f64,
    f0: f64,
    harmonics: BTreeMap<i64, Complex64>,
}

impl InteractionSpec {
    /// Validates positivity of `omega`, reality (`f_{-n} = conj(f_n)`), and
    /// non-resonance `2 F0 != k omega`.
    pub fn new(omega: f64, f0: f64, harmonics: BTreeMap<i64, Complex64>) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::InvalidSpec(format!("omega must be positive, got {omega}")));
        }
        if !f0.is_finite() {
            return Err(Error::InvalidSpec("F0 must be finite".into()));
        }
        let harmonics: BTreeMap<i64, Complex64> =
            harmonics.into_iter().filter(|(_, v)| v.norm() != 0.0).collect();
        if harmonics.contains_key(&0) {
            return Err(Error::InvalidSpec("the dc part goes in F0, not in harmonic 0".into()));
        }
        let scale = harmonics.values().map(|v| v.norm()).fold(0.0, f64::max);
        for (&n, &v) in &harmonics {
            let partner = harmonics.get(&-n).copied().unwrap_or_default();
            if (partner - v.conj()).norm() > 1e-14 * scale {
                return Err(Error::InvalidSpec(format!(
                    "field is not real: f_{} = {v} but f_{} = {partner}",
                    n, -n
                )));
            }
        }
        if f0 != 0.0 {
            let k = (2.0 * f0 / omega).round();
            if (2.0 * f0 - k * omega).abs() < RESONANCE_REL_TOL * omega {
                return Err(Error::InvalidSpec(format!(
                    "2 F0 = {k} omega is resonant and outside the supported regime"
                )));
            }
        }
        Ok(Self { omega, f0, harmonics })
    }

    /// `f(t) = F0 + phi cos(omega t)` with `chi1 = 2 phi / omega`, `chi2 = 2 F0 / omega`.
    pub fn monochromatic(omega: f64, chi1: f64, chi2: f64) -> Result<Self> {
        let phi = 0.5 * chi1 * omega;
        let f0 = 0.5 * chi2 * omega;
        let mut h = BTreeMap::new();
        h.insert(1, Complex64::new(0.5 * phi, 0.0));
        h.insert(-1, Complex64::new(0.5 * phi, 0.0));
        Self::new(omega, f0, h)
    }

    /// Time-independent field `f = F0`.
    pub fn constant(omega: f64, f0: f64) -> Result<Self> {
        Self::new(omega, f0, BTreeMap::new())
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    pub fn harmonics(&self) -> &BTreeMap<i64, Complex64> {
        &self.harmonics
    }

    /// Driving period `T_omega = 2 pi / omega`.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub fn field(&self, t: f64) -> f64 {
        let ac: Complex64 = self
            .harmonics
            .iter()
            .map(|(&n, &v)| v * Complex64::from_polar(1.0, n as f64 * self.omega * t))
            .sum();
        self.f0 + ac.re
    }

    /// Amplitude `phi` when `f = F0 + phi cos(omega t)`.
    pub fn monochromatic_amplitude(&self) -> Option<f64> {
        if self.harmonics.is_empty() {
            return Some(0.0);
        }
        if self.harmonics.len() != 2 {
            return None;
        }
        let a = *self.harmonics.get(&1)?;
        if a.im != 0.0 {
            return None;
        }
        Some(2.0 * a.re)
    }

    /// `(chi1, chi2)` for monochromatic fields.
    pub fn chi(&self) -> Option<(f64, f64)> {
        let phi = self.monochromatic_amplitude()?;
        Some((2.0 * phi / self.omega, 2.0 * self.f0 / self.omega))
    }

    /// The field with every component multiplied by `factor`. Skips the
    /// resonance check, which only concerns the physical field.
    fn scaled(&self, factor: f64) -> Self {
        Self {
            omega: self.omega,
            f0: self.f0 * factor,
            harmonics: self.harmonics.iter().map(|(&n, &v)| (n, v * factor)).collect(),
        }
    }
}

/// Fourier data of `q(t) = exp(i int_0^t f)`, offset `nu = F0`.
///
/// Monochromatic fields use the Jacobi–Anger closed form `Q_m = J_m(phi/omega)`;
/// anything else goes through [`q_coefficients_multinomial`].
pub fn q_coefficients(spec: &InteractionSpec, m_max: usize) -> Result<HarmonicSeries> {
    match spec.monochromatic_amplitude() {
        Some(phi) => Ok(bessel_phase_series(spec.omega, spec.f0, phi / spec.omega, m_max)),
        None => q_coefficients_multinomial(spec, m_max, TERM_TOL),
    }
}

/// Fourier data of `q(t)^2`, offset `2 F0`.
pub fn q2_coefficients(spec: &InteractionSpec, m_max: usize) -> Result<HarmonicSeries> {
    q_coefficients(&spec.scaled(2.0), m_max)
}

// exp(i z sin(omega t)) * exp(i f0 t) = exp(i f0 t) sum_m J_m(z) exp(i m omega t)
fn bessel_phase_series(omega: f64, f0: f64, z: f64, m_max: usize) -> HarmonicSeries {
    let j = bessel_j_orders(m_max, z.abs());
    HarmonicSeries::from_fn(omega, f0, m_max, |m| {
        let n = m.unsigned_abs() as usize;
        let mut v = j[n];
        // J_{-n} = (-1)^n J_n and J_n(-z) = (-1)^n J_n(z)
        if (m < 0) != (z < 0.0) && n % 2 == 1 {
            v = -v;
        }
        Complex64::new(v, 0.0)
    })
}

/// Multinomial form of `Q_m`:
///
/// ```text
/// Q_m = exp(i gamma_f) sum_{p_1..p_2J} delta(sum p_a n_a, m) prod_a (f_a / (n_a omega))^{p_a} / p_a!
/// gamma_f = i sum_a f_a / (n_a omega)
/// ```
///
/// Accumulated shell by shell in the total degree `D = sum p_a`; shell `D` is
/// `Z^D / D!` with `Z(t) = sum_a z_a exp(i n_a omega t)`, and the loop stops
/// once a shell falls below `term_tol`.
pub fn q_coefficients_multinomial(
    spec: &InteractionSpec,
    m_max: usize,
    term_tol: f64,
) -> Result<HarmonicSeries> {
    let omega = spec.omega;
    let reach = spec.harmonics.keys().map(|n| n.unsigned_abs() as usize).max().unwrap_or(0);
    let work = m_max.max(reach);
    let mut z = HarmonicSeries::zeros(omega, 0.0, work);
    let mut z_sum = Complex64::new(0.0, 0.0);
    for (&n, &f) in &spec.harmonics {
        let za = f / (n as f64 * omega);
        z.set(n, za);
        z_sum += za;
    }
    let shells = z.exp(term_tol, MAX_SHELL_DEGREE)?;
    let gamma_phase = (-z_sum).exp();
    let body = shells.with_cutoff(m_max).scale(gamma_phase);
    Ok(HarmonicSeries::from_fn(omega, spec.f0, m_max, |m| body.get(m)))
}

/// Mean values `M(Q0)`, `M(Q1)`, `M(Q2)`, `M(Q3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanValues {
    pub q0: Complex64,
    pub q1: Complex64,
    pub q2: Complex64,
    pub q3: Complex64,
}

/// `M(Q0) = M(q^2)`.
pub fn mean_q0(q2: &HarmonicSeries) -> Complex64 {
    q2.mean()
}

/// `M(Q1)`, `Q1 = Q0 int_0^t (Q0^{-1} - M(Q0^{-1}))`.
///
/// Closed double sum on the `F0 = 0` lattice:
/// `(i/omega) sum_{m != 0} conj(Q2_{-m}) (Q2_0 - Q2_{-m}) / m`.
pub fn mean_q1(q2: &HarmonicSeries) -> Result<Complex64> {
    if q2.zero_mode() != Some(0) {
        return mean_q1_primitive(q2);
    }
    let w = q2.omega();
    let i = Complex64::new(0.0, 1.0);
    let p0 = q2.get(0);
    let s: Complex64 = q2
        .modes()
        .filter(|&m| m != 0)
        .map(|m| q2.get(-m).conj() * (p0 - q2.get(-m)) / m as f64)
        .sum();
    Ok(i / w * s)
}

/// `M(Q3)`, `Q3 = Q0 int_0^t (Q1 - M(Q1))`.
///
/// Closed double sum on the `F0 = 0` lattice:
/// `-(1/omega^2) sum_{n,m != 0} conj(Q2_{-m}) / (n m) (Q2_0 Q2_n - Q2_0 Q2_{n-m} + Q2_{-n} Q2_{n-m})`.
pub fn mean_q3(q2: &HarmonicSeries) -> Result<Complex64> {
    if q2.zero_mode() != Some(0) {
        return mean_q3_primitive(q2);
    }
    let w = q2.omega();
    let p0 = q2.get(0);
    let mut s = Complex64::new(0.0, 0.0);
    for m in q2.modes().filter(|&m| m != 0) {
        let cm = q2.get(-m).conj();
        if cm.norm() == 0.0 {
            continue;
        }
        let mut inner = Complex64::new(0.0, 0.0);
        for n in q2.modes().filter(|&n| n != 0) {
            let term = p0 * q2.get(n) - p0 * q2.get(n - m) + q2.get(-n) * q2.get(n - m);
            inner += term / n as f64;
        }
        s += cm * inner / m as f64;
    }
    Ok(-s / (w * w))
}

/// `M(Q2)`, `Q2 = Q0 int_0^t (Q0 - M(Q0))`.
pub fn mean_q2(q2: &HarmonicSeries) -> Result<Complex64> {
    let m0 = q2.mean();
    let (b, c) = q2.without_mean().integrate_from_zero()?;
    Ok(q2.convolve(&b)?.mean() + c * m0)
}

/// `M(Q1)` assembled from series primitives; valid for any `F0`.
pub fn mean_q1_primitive(q2: &HarmonicSeries) -> Result<Complex64> {
    let m0 = q2.mean();
    let inv = q2.conj_fn();
    let (b, c) = inv.without_mean().integrate_from_zero()?;
    Ok(q2.convolve(&b)?.mean() + c * m0)
}

/// `M(Q3)` assembled from series primitives; valid for any `F0`.
///
/// `Q1` lives on two lattices when `F0 != 0` (offsets `0` and `2 F0`), so it is
/// carried as a list of pieces.
pub fn mean_q3_primitive(q2: &HarmonicSeries) -> Result<Complex64> {
    let m0 = q2.mean();
    let inv = q2.conj_fn();
    let (b, c) = inv.without_mean().integrate_from_zero()?;
    let pieces = merge_lattices(vec![q2.convolve(&b)?, q2.scale(c)])?;
    let mut total = Complex64::new(0.0, 0.0);
    for piece in pieces {
        let (bi, ci) = piece.without_mean().integrate_from_zero()?;
        total += q2.convolve(&bi)?.mean() + ci * m0;
    }
    Ok(total)
}

fn merge_lattices(pieces: Vec<HarmonicSeries>) -> Result<Vec<HarmonicSeries>> {
    let mut out: Vec<HarmonicSeries> = Vec::new();
    'outer: for p in pieces {
        for o in out.iter_mut() {
            if (o.nu() - p.nu()).abs() < o.resonance_tol() {
                *o = o.add(&p)?;
                continue 'outer;
            }
        }
        out.push(p);
    }
    Ok(out)
}

pub fn mean_values(q2: &HarmonicSeries) -> Result<MeanValues> {
    Ok(MeanValues {
        q0: mean_q0(q2),
        q1: mean_q1(q2)?,
        q2: mean_q2(q2)?,
        q3: mean_q3(q2)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    I,
    II,
    III,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::I => "I",
            Condition::II => "II",
            Condition::III => "III",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionClass {
    pub tag: Condition,
    pub f0_is_zero: bool,
    pub mean_q0: Complex64,
    pub mean_q1: Complex64,
    pub mean_q3: Complex64,
}

/// Table I for `f = F0 + phi cos(omega t)`, restricted to the non-resonant
/// window: `chi2 = 0` gives I or III depending on whether `J_0(chi1)` vanishes,
/// non-integer `chi2` gives II.
pub fn table_condition(chi1: f64, chi2: f64, zero_tol: f64) -> Condition {
    if chi2 != 0.0 {
        return Condition::II;
    }
    if crate::fourier::bessel_j_unchecked(0, chi1).abs() > zero_tol {
        Condition::I
    } else {
        Condition::III
    }
}

/// Threshold cascade I -> II -> III on the mean values of `Q0`, `Q1`, `Q3`.
pub fn classify(spec: &InteractionSpec, m_max: usize) -> Result<ConditionClass> {
    let q2 = q2_coefficients(spec, m_max)?;
    classify_series(spec, &q2)
}

pub fn classify_series(spec: &InteractionSpec, q2: &HarmonicSeries) -> Result<ConditionClass> {
    let w = spec.omega;
    let tol = CLASS_TOL * q2.max_abs();
    let m0 = mean_q0(q2);
    let m1 = mean_q1(q2)?;
    let f0_is_zero = spec.f0 == 0.0;
    let (tag, m3) = if !f0_is_zero {
        // the offset lattice has no zero mode, so M(Q0) = 0 identically
        if (m1 * w).norm() <= tol {
            return Err(Error::SpuriousCase(format!(
                "F0 = {} with M(Q1) = {m1:e}: condition II fails at this special dc value",
                spec.f0
            )));
        }
        (Condition::II, mean_q3(q2)?)
    } else {
        let m3 = mean_q3(q2)?;
        if m0.norm() > tol {
            (Condition::I, m3)
        } else if (m1 * w).norm() > tol {
            (Condition::II, m3)
        } else if (m3 * w * w).norm() > tol {
            (Condition::III, m3)
        } else {
            return Err(Error::Unclassifiable {
                m0: m0.norm(),
                m1: m1.norm(),
                m3: m3.norm(),
            });
        }
    };
    if let Some((chi1, chi2)) = spec.chi() {
        let expected = table_condition(chi1, chi2, tol);
        if expected != tag {
            return Err(Error::InternalConsistency(format!(
                "cascade gives condition {tag} but the monochromatic table gives {expected}"
            )));
        }
    }
    Ok(ConditionClass {
        tag,
        f0_is_zero,
        mean_q0: m0,
        mean_q1: m1,
        mean_q3: m3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{bessel_j, find_bessel_zero};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_harmonic() -> InteractionSpec {
        // f = 0.5 cos t + 0.3 cos 2t + 0.1 sin t
        let mut h = BTreeMap::new();
        h.insert(1, c(0.25, -0.05));
        h.insert(-1, c(0.25, 0.05));
        h.insert(2, c(0.15, 0.0));
        h.insert(-2, c(0.15, 0.0));
        InteractionSpec::new(1.0, 0.0, h).unwrap()
    }

    /// Composite Simpson on a fine grid.
    fn integral_of_field(spec: &InteractionSpec, t: f64) -> f64 {
        let n = 4000;
        let h = t / n as f64;
        let mut s = spec.field(0.0) + spec.field(t);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * spec.field(k as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn rejects_non_real_field() {
        let mut h = BTreeMap::new();
        h.insert(1, c(1.0, 0.0));
        assert!(matches!(InteractionSpec::new(1.0, 0.0, h), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn rejects_resonant_dc() {
        assert!(InteractionSpec::monochromatic(1.0, 1.0, 1.0).is_err());
        assert!(InteractionSpec::monochromatic(2.0, 1.0, -3.0).is_err());
        assert!(InteractionSpec::monochromatic(1.0, 1.0, 0.3).is_ok());
    }

    #[test]
    fn q_of_zero_field_is_delta() {
        let spec = InteractionSpec::constant(1.0, 0.0).unwrap();
        for q in [q_coefficients(&spec, 10).unwrap(), q2_coefficients(&spec, 10).unwrap()] {
            assert_eq!(q.get(0), c(1.0, 0.0));
            assert_eq!(q.l1_norm(), 1.0);
        }
    }

    #[test]
    fn monochromatic_q_is_jacobi_anger() {
        let spec = InteractionSpec::monochromatic(1.0, 2.0, 0.0).unwrap();
        let q = q_coefficients(&spec, 40).unwrap();
        let q2 = q2_coefficients(&spec, 40).unwrap();
        for m in -40..=40 {
            assert!((q.get(m).re - bessel_j(m, 1.0).unwrap()).abs() < 1e-14);
            assert!((q2.get(m).re - bessel_j(m, 2.0).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn multinomial_path_matches_bessel_closed_form() {
        for &(omega, chi1, chi2) in &[(1.0, 2.0, 0.0), (10.0, 2.404825557695773, 0.0), (1.0, 1.0, 0.3)] {
            let spec = InteractionSpec::monochromatic(omega, chi1, chi2).unwrap();
            let closed = q_coefficients(&spec, 40).unwrap();
            let multi = q_coefficients_multinomial(&spec, 40, TERM_TOL).unwrap();
            for m in -40..=40 {
                assert!((closed.get(m) - multi.get(m)).norm() < 1e-13, "m = {m}");
            }
            assert_eq!(closed.nu(), multi.nu());
        }
    }

    #[test]
    fn two_harmonic_q_matches_quadrature() {
        let spec = two_harmonic();
        let q = q_coefficients(&spec, 40).unwrap();
        for k in 0..20 {
            let t = 0.37 + 1.913 * k as f64;
            let want = Complex64::from_polar(1.0, integral_of_field(&spec, t));
            assert!((q.evaluate(t) - want).norm() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn q2_is_square_of_q() {
        for spec in [two_harmonic(), InteractionSpec::monochromatic(1.0, 1.0, 0.3).unwrap()] {
            let q = q_coefficients(&spec, 40).unwrap();
            let q2 = q2_coefficients(&spec, 40).unwrap();
            let sq = q.convolve(&q).unwrap();
            for m in -40..=40 {
                assert!((q2.get(m) - sq.get(m)).norm() < 1e-10);
            }
            assert!((q2.nu() - sq.nu()).abs() < 1e-15);
        }
    }

    #[test]
    fn q_is_pure_phase() {
        let q = q_coefficients(&two_harmonic(), 40).unwrap();
        for k in 0..50 {
            let t = -20.0 + 0.8311 * k as f64;
            assert!((q.evaluate(t).norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn closed_form_means_match_primitive_route() {
        for &(omega, chi1) in &[(1.0, 2.0), (1.0, 1.0), (10.0, 2.404825557695773), (3.0, 5.1)] {
            let spec = InteractionSpec::monochromatic(omega, chi1, 0.0).unwrap();
            let q2 = q2_coefficients(&spec, 40).unwrap();
            let scale = 1.0 / omega;
            assert!((mean_q1(&q2).unwrap() - mean_q1_primitive(&q2).unwrap()).norm() < 1e-12 * scale);
            assert!(
                (mean_q3(&q2).unwrap() - mean_q3_primitive(&q2).unwrap()).norm() < 1e-12 * scale * scale
            );
        }
        let q2 = q2_coefficients(&two_harmonic(), 40).unwrap();
        assert!((mean_q1(&q2).unwrap() - mean_q1_primitive(&q2).unwrap()).norm() < 1e-12);
        assert!((mean_q3(&q2).unwrap() - mean_q3_primitive(&q2).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn mean_q0_in_case_a() {
        let spec = InteractionSpec::monochromatic(1.0, 2.0, 0.0).unwrap();
        let q2 = q2_coefficients(&spec, 40).unwrap();
        assert!((mean_q0(&q2) - c(0.22389077914123567, 0.0)).norm() < 1e-12);
        assert_eq!(mean_q0(&q2), q2.mean());
    }

    #[test]
    fn means_at_bessel_zero() {
        let x1 = find_bessel_zero(0, 1).unwrap();
        let spec = InteractionSpec::monochromatic(1.0, x1, 0.0).unwrap();
        let q2 = q2_coefficients(&spec, 40).unwrap();
        let m = mean_values(&q2).unwrap();
        assert!(m.q0.norm() < 1e-10);
        assert!(m.q1.norm() < 1e-10);
        assert!(m.q2.norm() < 1e-10);
        assert!(m.q3.norm() > 1e-3);
    }

    #[test]
    fn offset_dc_means() {
        let spec = InteractionSpec::monochromatic(1.0, 1.0, 0.3).unwrap();
        let q2 = q2_coefficients(&spec, 40).unwrap();
        assert_eq!(mean_q0(&q2), c(0.0, 0.0));
        assert!(mean_q1(&q2).unwrap().norm() > 0.1);
    }

    #[test]
    fn classification_examples() {
        let a = classify(&InteractionSpec::monochromatic(1.0, 2.0, 0.0).unwrap(), 40).unwrap();
        assert_eq!(a.tag, Condition::I);
        let x1 = find_bessel_zero(0, 1).unwrap();
        let b = classify(&InteractionSpec::monochromatic(10.0, x1, 0.0).unwrap(), 40).unwrap();
        assert_eq!(b.tag, Condition::III);
        let cc = classify(&InteractionSpec::monochromatic(1.0, 1.0, 0.3).unwrap(), 40).unwrap();
        assert_eq!(cc.tag, Condition::II);
        assert!(!cc.f0_is_zero);
    }

    #[test]
    fn classification_is_scale_consistent() {
        let x2 = find_bessel_zero(0, 2).unwrap();
        for &(chi1, chi2) in &[(2.0, 0.0), (x2, 0.0), (1.0, 0.3), (0.7, 1.6)] {
            let a = classify(&InteractionSpec::monochromatic(1.0, chi1, chi2).unwrap(), 40).unwrap();
            let b = classify(&InteractionSpec::monochromatic(7.5, chi1, chi2).unwrap(), 40).unwrap();
            assert_eq!(a.tag, b.tag);
        }
    }

    #[test]
    fn zero_field_is_condition_one() {
        let spec = InteractionSpec::constant(1.0, 0.0).unwrap();
        let c0 = classify(&spec, 10).unwrap();
        assert_eq!(c0.tag, Condition::I);
        assert_eq!(c0.mean_q0, c(1.0, 0.0));
    }
}

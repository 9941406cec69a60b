//! Secular-term-free power series for the particular solution `g` of
//! `g' - i g^2 - 2 i f g + i eps^2 = 0`.
//!
//! Every order is written as `G^(n) = q^2 h_n`. Then `h` obeys
//! `h' = i q^2 h^2 - i eps^2 q^-2`, so order `n` reads
//! `h_n' = i q^2 sum_p h_p h_{n-p}` plus the source term at the lowest order.
//! Each `h_n` is a mean-free antiderivative plus a constant `kappa_n`. The
//! constants start out as symbolic unknowns and get fixed by the first later
//! order whose mean (the secular term) depends on them.

mod poly;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::HarmonicSeries;
use crate::interaction::{mean_q0, mean_q1, mean_q3, Condition, InteractionSpec, CLASS_TOL};
use poly::{PolyScalar, PolySeries};

pub const DEFAULT_ORDER_I: usize = 25;
/// Counted in powers of `lambda = eps^2`.
pub const DEFAULT_ORDER_II: usize = 20;
pub const DEFAULT_ORDER_III: usize = 6;
/// Deepest condition-III order accepted without the override.
pub const MAX_ORDER_III: usize = 6;
/// Orders computed past `N` while waiting for the last constants to be fixed.
pub const MAX_LOOKAHEAD: usize = 8;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionParameter {
    /// Powers of `eps` (conditions I and III).
    Epsilon,
    /// Powers of `lambda = eps^2` (condition II).
    Lambda,
}

/// Per-order Fourier tables of `g` and the constants that remove secular terms.
#[derive(Debug, Clone)]
pub struct RiccatiExpansion {
    condition: Condition,
    parameter: ExpansionParameter,
    f0: f64,
    q: HarmonicSeries,
    q2: HarmonicSeries,
    per_order: Vec<HarmonicSeries>,
    h: Vec<HarmonicSeries>,
    constants: Vec<Complex64>,
    constant_terms: Vec<Complex64>,
    resolving_orders: Vec<usize>,
}

impl RiccatiExpansion {
    pub fn condition(&self) -> Condition {
        self.condition
    }

    pub fn parameter(&self) -> ExpansionParameter {
        self.parameter
    }

    pub fn order(&self) -> usize {
        self.per_order.len()
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    pub fn omega(&self) -> f64 {
        self.q2.omega()
    }

    pub fn q(&self) -> &HarmonicSeries {
        &self.q
    }

    pub fn q2(&self) -> &HarmonicSeries {
        &self.q2
    }

    /// `G^(n)` (or `G~^(n)` under condition II) for `n = 1..=N`, on the `nu = 0` lattice.
    pub fn per_order(&self) -> &[HarmonicSeries] {
        &self.per_order
    }

    /// `alpha_n` (or `beta_n`) in the convention `c_n = q [i int_0^t (...) + alpha_n]`.
    /// Empty for the explicit `F0 != 0` expansion, which has no free constants.
    pub fn constants(&self) -> &[Complex64] {
        &self.constants
    }

    /// Same constants in the mean-free convention used by the Fourier
    /// recursions (`C^(n)_m = ... + alpha_n Q_m`).
    pub fn constant_terms(&self) -> &[Complex64] {
        &self.constant_terms
    }

    /// Order at which each constant was fixed.
    pub fn resolving_orders(&self) -> &[usize] {
        &self.resolving_orders
    }

    /// Fourier data of `c_n` (or `e_n`), `n` counted from 1.
    pub fn c_coefficients(&self, n: usize) -> HarmonicSeries {
        self.q.convolve_into_cutoff(&self.h[n - 1], self.q.m_max())
    }

    /// Zero modes `M(G^(n))`, the per-order contributions to `Omega - F0`.
    pub fn omega_coefficients(&self) -> Vec<Complex64> {
        self.per_order.iter().map(|g| g.mean()).collect()
    }
}

/// `g` summed at a concrete coupling.
#[derive(Debug, Clone)]
pub struct GSeries {
    /// `G_m(eps)` on the `nu = 0` lattice; the zero mode is `Omega - F0`.
    pub g: HarmonicSeries,
    pub omega_rabi: f64,
    pub g0: Complex64,
    pub epsilon: f64,
    pub f0: f64,
}

impl GSeries {
    /// Secular period `2 pi / |Omega|`.
    pub fn secular_period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega_rabi.abs()
    }
}

fn root_choice(a: Complex64, b: Complex64) -> bool {
    // true when a is the preferred root over b
    if (a.re - b.re).abs() > 1e-14 * (a.norm() + b.norm()) {
        a.re > b.re
    } else {
        a.im >= b.im
    }
}

fn solve_univariate(coeffs: &[Complex64], order: usize) -> Result<Complex64> {
    let degree = coeffs.iter().rposition(|c| c.norm() > 0.0).unwrap_or(0);
    match degree {
        1 => Ok(-coeffs[0] / coeffs[1]),
        2 => {
            let (a, b, c) = (coeffs[2], coeffs[1], coeffs[0]);
            let disc = (b * b - 4.0 * a * c).sqrt();
            let r1 = (-b + disc) / (2.0 * a);
            let r2 = (-b - disc) / (2.0 * a);
            Ok(if root_choice(r1, r2) { r1 } else { r2 })
        }
        d => Err(Error::CancellationFailure(format!(
            "secular condition at order {order} has degree {d} in its unknown"
        ))),
    }
}

struct Engine<'a> {
    q0: &'a HarmonicSeries,
    p: HarmonicSeries,
    source_order: usize,
    free_constants: bool,
    h: Vec<PolySeries>,
    values: Vec<Option<Complex64>>,
    resolved_at: Vec<Option<usize>>,
}

impl<'a> Engine<'a> {
    fn new(q0: &'a HarmonicSeries, parameter: ExpansionParameter, free_constants: bool) -> Self {
        Self {
            q0,
            p: q0.conj_fn(),
            source_order: match parameter {
                ExpansionParameter::Epsilon => 2,
                ExpansionParameter::Lambda => 1,
            },
            free_constants,
            h: Vec::new(),
            values: Vec::new(),
            resolved_at: Vec::new(),
        }
    }

    fn zero(&self) -> PolySeries {
        PolySeries::zero(self.q0.omega(), self.q0.m_max())
    }

    fn step(&mut self) -> Result<()> {
        let k = self.h.len() + 1;
        let mut sum = self.zero();
        for p in 1..k {
            let r = k - p;
            if p > r {
                break;
            }
            let prod = self.h[p - 1].mul(&self.h[r - 1])?;
            let weight = if p == r { 1.0 } else { 2.0 };
            sum.add_assign(&prod.scale(Complex64::new(weight, 0.0)))?;
        }
        let mut rhs = sum.times_series(self.q0).scale(I);
        if k == self.source_order {
            rhs.add_assign(&PolySeries::from_series(self.p.scale(-I)))?;
        }

        let tol = CLASS_TOL * rhs.l1_norm().max(f64::MIN_POSITIVE);
        let cond = rhs.mean().drop_below(tol);
        if !cond.is_empty() {
            rhs = self.resolve(&cond, rhs, k)?;
            let left = rhs.mean().drop_below(tol.max(CLASS_TOL * rhs.l1_norm()));
            if !left.is_empty() {
                return Err(Error::CancellationFailure(format!(
                    "secular term survives at order {k} after fixing a constant"
                )));
            }
        }

        let mut h_k = rhs.antiderivative_without_mean()?;
        if self.free_constants {
            h_k.add_assign(&PolySeries::unknown(k - 1, self.q0.omega(), self.q0.m_max()))?;
            self.values.push(None);
            self.resolved_at.push(None);
        }
        self.h.push(h_k);
        Ok(())
    }

    fn resolve(&mut self, cond: &PolyScalar, rhs: PolySeries, k: usize) -> Result<PolySeries> {
        let ids = cond.unknowns();
        let id = match ids.as_slice() {
            [] => {
                return Err(Error::CancellationFailure(format!(
                    "order {k} has a secular term that no free constant can cancel"
                )))
            }
            [id] => *id,
            _ => {
                return Err(Error::CancellationFailure(format!(
                    "secular condition at order {k} couples constants {ids:?}"
                )))
            }
        };
        let coeffs = cond.univariate(id).expect("single unknown");
        let value = solve_univariate(&coeffs, k)?;
        self.values[id] = Some(value);
        self.resolved_at[id] = Some(k);
        for h in self.h.iter_mut() {
            *h = h.substitute(id, value)?;
        }
        rhs.substitute(id, value)
    }

    fn resolved(&self, n: usize) -> bool {
        !self.free_constants || self.values.iter().take(n).all(Option::is_some)
    }
}

fn run(
    q: &HarmonicSeries,
    q2: &HarmonicSeries,
    condition: Condition,
    parameter: ExpansionParameter,
    free_constants: bool,
    order: usize,
) -> Result<RiccatiExpansion> {
    if order == 0 {
        return Err(Error::Config("expansion order must be at least 1".into()));
    }
    let mut engine = Engine::new(q2, parameter, free_constants);
    while engine.h.len() < order || !engine.resolved(order) {
        if engine.h.len() >= order + MAX_LOOKAHEAD {
            return Err(Error::CancellationFailure(format!(
                "constants up to order {order} still free after {} orders",
                engine.h.len()
            )));
        }
        engine.step()?;
    }

    let mut h = Vec::with_capacity(order);
    for (n, poly) in engine.h.iter().take(order).enumerate() {
        let s = poly.as_series().ok_or_else(|| {
            Error::CancellationFailure(format!("order {} still depends on free constants", n + 1))
        })?;
        h.push(s);
    }
    let per_order: Vec<HarmonicSeries> = h
        .iter()
        .map(|hn| q2.convolve_into_cutoff(hn, q2.m_max()))
        .collect();
    for (n, g) in per_order.iter().enumerate() {
        if g.nu().abs() > g.resonance_tol() {
            return Err(Error::InternalConsistency(format!(
                "order {} of g is off the nu = 0 lattice (nu = {})",
                n + 1,
                g.nu()
            )));
        }
    }
    let (constants, constant_terms, resolving_orders) = if free_constants {
        (
            h.iter().map(|hn| hn.evaluate(0.0)).collect(),
            engine.values.iter().take(order).map(|v| v.unwrap()).collect(),
            engine.resolved_at.iter().take(order).map(|v| v.unwrap()).collect(),
        )
    } else {
        (Vec::new(), Vec::new(), Vec::new())
    };
    Ok(RiccatiExpansion {
        condition,
        parameter,
        f0: q.nu(),
        q: q.clone(),
        q2: q2.clone(),
        per_order,
        h,
        constants,
        constant_terms,
        resolving_orders,
    })
}

fn wrong(expected: Condition, found: impl Into<String>) -> Error {
    Error::WrongCondition {
        expected: expected.to_string(),
        found: found.into(),
    }
}

fn check_lattices(q: &HarmonicSeries, q2: &HarmonicSeries) -> Result<()> {
    if q.omega() != q2.omega() {
        return Err(Error::FrequencyMismatch {
            left: q.omega(),
            right: q2.omega(),
        });
    }
    if (q2.nu() - 2.0 * q.nu()).abs() > q2.resonance_tol() {
        return Err(Error::OffsetMismatch {
            left: q2.nu(),
            right: 2.0 * q.nu(),
        });
    }
    Ok(())
}

fn require_f0_zero(q: &HarmonicSeries, expected: Condition) -> Result<()> {
    if q.nu() != 0.0 {
        return Err(wrong(expected, format!("II with F0 = {}", q.nu())));
    }
    Ok(())
}

/// Condition I: `M(Q0) != 0`, `F0 = 0`.
pub fn expand_condition_i(q: &HarmonicSeries, q2: &HarmonicSeries, order: usize) -> Result<RiccatiExpansion> {
    check_lattices(q, q2)?;
    require_f0_zero(q, Condition::I)?;
    let tol = CLASS_TOL * q2.max_abs();
    if mean_q0(q2).norm() <= tol {
        return Err(wrong(Condition::I, "M(Q0) = 0"));
    }
    run(q, q2, Condition::I, ExpansionParameter::Epsilon, true, order)
}

/// Condition III: `M(Q0) = M(Q1) = 0`, `M(Q3) != 0`, `F0 = 0`, order capped at
/// [`MAX_ORDER_III`] unless `allow_deep` is set.
pub fn expand_condition_iii(
    q: &HarmonicSeries,
    q2: &HarmonicSeries,
    order: usize,
    allow_deep: bool,
) -> Result<RiccatiExpansion> {
    if order > MAX_ORDER_III && !allow_deep {
        return Err(Error::UnsupportedOrder {
            order,
            max: MAX_ORDER_III,
        });
    }
    check_lattices(q, q2)?;
    require_f0_zero(q, Condition::III)?;
    let w = q2.omega();
    let tol = CLASS_TOL * q2.max_abs();
    if mean_q0(q2).norm() > tol {
        return Err(wrong(Condition::III, "I"));
    }
    if (mean_q1(q2)? * w).norm() > tol {
        return Err(wrong(Condition::III, "II"));
    }
    if (mean_q3(q2)? * w * w).norm() <= tol {
        return Err(wrong(Condition::III, "unclassifiable (M(Q3) = 0)"));
    }
    run(q, q2, Condition::III, ExpansionParameter::Epsilon, true, order)
}

/// Condition II with `F0 = 0`; `order` counts powers of `lambda = eps^2`.
pub fn expand_condition_ii_f0zero(
    q: &HarmonicSeries,
    q2: &HarmonicSeries,
    order: usize,
) -> Result<RiccatiExpansion> {
    check_lattices(q, q2)?;
    require_f0_zero(q, Condition::II)?;
    let tol = CLASS_TOL * q2.max_abs();
    if mean_q0(q2).norm() > tol {
        return Err(wrong(Condition::II, "I"));
    }
    if (mean_q1(q2)? * q2.omega()).norm() <= tol {
        return Err(wrong(Condition::II, "III or unclassifiable (M(Q1) = 0)"));
    }
    run(q, q2, Condition::II, ExpansionParameter::Lambda, true, order)
}

/// Condition II with `F0 != 0`: every order is an explicit mean-free
/// antiderivative on the `nu = -2 F0` lattice, so there are no free constants.
pub fn expand_condition_ii_f0nonzero(
    q: &HarmonicSeries,
    q2: &HarmonicSeries,
    f0: f64,
    order: usize,
) -> Result<RiccatiExpansion> {
    check_lattices(q, q2)?;
    if f0 == 0.0 || (q.nu() - f0).abs() > q.resonance_tol() {
        return Err(wrong(Condition::II, format!("F0 = {} on the q lattice", q.nu())));
    }
    let w = q2.omega();
    let k = (2.0 * f0 / w).round();
    if (2.0 * f0 - k * w).abs() < q2.resonance_tol() {
        return Err(Error::NearResonance {
            mode: -(k as i64),
            frequency: (2.0 * f0 - k * w).abs(),
        });
    }
    run(q, q2, Condition::II, ExpansionParameter::Lambda, false, order)
}

/// Picks the expansion for `condition` with its default order unless one is given.
pub fn expand(
    spec: &InteractionSpec,
    q: &HarmonicSeries,
    q2: &HarmonicSeries,
    condition: Condition,
    order: Option<usize>,
    allow_deep: bool,
) -> Result<RiccatiExpansion> {
    match condition {
        Condition::I => expand_condition_i(q, q2, order.unwrap_or(DEFAULT_ORDER_I)),
        Condition::III => expand_condition_iii(q, q2, order.unwrap_or(DEFAULT_ORDER_III), allow_deep),
        Condition::II if spec.f0() == 0.0 => {
            expand_condition_ii_f0zero(q, q2, order.unwrap_or(DEFAULT_ORDER_II))
        }
        Condition::II => expand_condition_ii_f0nonzero(q, q2, spec.f0(), order.unwrap_or(DEFAULT_ORDER_II)),
    }
}

/// Per-order contribution norms `|s|^n sum_m |G^(n)_m|`.
pub fn order_contributions(exp: &RiccatiExpansion, epsilon: f64) -> Vec<f64> {
    let s = match exp.parameter {
        ExpansionParameter::Epsilon => epsilon.abs(),
        ExpansionParameter::Lambda => epsilon * epsilon,
    };
    exp.per_order
        .iter()
        .enumerate()
        .map(|(n, g)| s.powi(n as i32 + 1) * g.l1_norm())
        .collect()
}

/// Sums the expansion at `epsilon` after checking that the last three order
/// contributions are strictly decreasing.
pub fn sum_at_epsilon(exp: &RiccatiExpansion, epsilon: f64) -> Result<GSeries> {
    let q2 = &exp.q2;
    let mut g = HarmonicSeries::zeros(q2.omega(), 0.0, q2.m_max());
    if epsilon == 0.0 {
        return Ok(GSeries {
            g,
            omega_rabi: exp.f0,
            g0: Complex64::new(0.0, 0.0),
            epsilon,
            f0: exp.f0,
        });
    }

    let contributions = order_contributions(exp, epsilon);
    let tail = &contributions[contributions.len().saturating_sub(3)..];
    let peak = contributions.iter().cloned().fold(0.0, f64::max);
    let significant = tail.iter().any(|&c| c > 1e-14 * peak);
    if significant && tail.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::DivergenceSuspected {
            epsilon,
            contributions: tail.to_vec(),
        });
    }

    let s = match exp.parameter {
        ExpansionParameter::Epsilon => epsilon,
        ExpansionParameter::Lambda => epsilon * epsilon,
    };
    // Horner from the highest order down.
    for gn in exp.per_order.iter().rev() {
        g = g.scale(Complex64::new(s, 0.0)).add(gn)?;
    }
    g = g.scale(Complex64::new(s, 0.0));

    let mean = g.get(0);
    let omega_rabi = exp.f0 + mean.re;
    if mean.im.abs() > 1e-8 * omega_rabi.abs() + 1e-12 {
        return Err(Error::InternalConsistency(format!(
            "Omega has imaginary part {:e} (real part {omega_rabi:e})",
            mean.im
        )));
    }
    g.set(0, Complex64::new(mean.re, 0.0));
    let g0 = g.evaluate(0.0);
    Ok(GSeries {
        g,
        omega_rabi,
        g0,
        epsilon,
        f0: exp.f0,
    })
}

/// `max_t |g' - i g^2 - 2 i f g + i eps^2|` over `t_samples`.
pub fn riccati_residual(g: &HarmonicSeries, spec: &InteractionSpec, epsilon: f64, t_samples: &[f64]) -> f64 {
    let dg = g.derivative();
    t_samples
        .iter()
        .map(|&t| {
            let gv = g.evaluate(t);
            let r = dg.evaluate(t) - I * gv * gv - 2.0 * I * spec.field(t) * gv + I * epsilon * epsilon;
            r.norm()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests;

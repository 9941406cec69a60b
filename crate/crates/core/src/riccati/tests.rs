use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::*;
use crate::fourier::find_bessel_zero;
use crate::interaction::{mean_q2, q2_coefficients, q_coefficients};

const M: usize = 40;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn series(spec: &InteractionSpec) -> (HarmonicSeries, HarmonicSeries) {
    (q_coefficients(spec, M).unwrap(), q2_coefficients(spec, M).unwrap())
}

fn case_a() -> InteractionSpec {
    InteractionSpec::monochromatic(1.0, 2.0, 0.0).unwrap()
}

fn case_b() -> InteractionSpec {
    InteractionSpec::monochromatic(10.0, find_bessel_zero(0, 1).unwrap(), 0.0).unwrap()
}

fn case_c() -> InteractionSpec {
    InteractionSpec::monochromatic(1.0, 1.0, 0.3).unwrap()
}

fn period_ratio(gs: &GSeries, omega: f64) -> f64 {
    omega / gs.omega_rabi.abs()
}

fn samples(spec: &InteractionSpec, n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64 * 3.0 * spec.period() / n as f64).collect()
}

/// `f = a cos t + 0.5 cos 2t` with `a` tuned by bisection so that `M(q^2)`
/// (real by time-reversal symmetry) vanishes; the second harmonic breaks the
/// symmetry that would also kill `M(Q1)`.
fn condition_ii_f0zero_spec() -> InteractionSpec {
    let make = |a: f64| {
        let mut h = BTreeMap::new();
        h.insert(1, c(a / 2.0, 0.0));
        h.insert(-1, c(a / 2.0, 0.0));
        h.insert(2, c(0.25, 0.0));
        h.insert(-2, c(0.25, 0.0));
        InteractionSpec::new(1.0, 0.0, h).unwrap()
    };
    let m0 = |a: f64| q2_coefficients(&make(a), M).unwrap().mean().re;
    let (mut lo, mut hi) = (0.8, 1.6);
    assert!(m0(lo) * m0(hi) < 0.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if m0(lo) * m0(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    make(0.5 * (lo + hi))
}

#[test]
fn free_field_gives_constant_solution() {
    let spec = InteractionSpec::constant(1.0, 0.0).unwrap();
    let (q, q2) = series(&spec);
    let exp = expand_condition_i(&q, &q2, 8).unwrap();
    assert!((exp.constants()[0] - c(1.0, 0.0)).norm() < 1e-15);
    for a in &exp.constants()[1..] {
        assert!(a.norm() < 1e-15);
    }
    let gs = sum_at_epsilon(&exp, 0.3).unwrap();
    assert!((gs.omega_rabi - 0.3).abs() < 1e-15);
    assert!((gs.g0 - c(0.3, 0.0)).norm() < 1e-15);
    let r = riccati_residual(&gs.g, &spec, 0.3, &[0.0, 1.0, 2.5]);
    assert!(r < 1e-15);
}

#[test]
fn zero_coupling_is_trivial() {
    let (q, q2) = series(&case_a());
    let exp = expand_condition_i(&q, &q2, 5).unwrap();
    let gs = sum_at_epsilon(&exp, 0.0).unwrap();
    assert_eq!(gs.omega_rabi, 0.0);
    assert_eq!(gs.g0, c(0.0, 0.0));
    assert_eq!(gs.g.max_abs(), 0.0);
}

#[test]
fn case_a_periods() {
    let spec = case_a();
    let (q, q2) = series(&spec);
    let exp = expand_condition_i(&q, &q2, DEFAULT_ORDER_I).unwrap();
    for (eps, want) in [(0.01, 450.0), (0.40, 25.0)] {
        let gs = sum_at_epsilon(&exp, eps).unwrap();
        let ratio = period_ratio(&gs, 1.0);
        assert!((ratio / want - 1.0).abs() < 0.03, "eps {eps}: {ratio}");
    }
    // Floquet eigenphase of the one-period monodromy, integrated independently
    // with an adaptive 8th-order Runge-Kutta at 1e-12.
    let gs = sum_at_epsilon(&exp, 0.10).unwrap();
    assert!((period_ratio(&gs, 1.0) - 46.41164686999).abs() < 1e-8);
}

#[test]
fn case_a_residual_and_order_scaling() {
    let spec = case_a();
    let (q, q2) = series(&spec);
    let ts = samples(&spec, 97);
    let exp = expand_condition_i(&q, &q2, 25).unwrap();
    let gs = sum_at_epsilon(&exp, 0.01).unwrap();
    assert!(riccati_residual(&gs.g, &spec, 0.01, &ts) <= 1e-12);

    for eps in [0.1, 0.05] {
        let k = residual_decay_exponent(&spec, &q, &q2, eps, &ts);
        let want = eps.ln();
        assert!((k / want - 1.0).abs() < 0.3, "eps {eps}: slope {k} vs {want}");
    }
}

/// Least-squares slope of `ln residual` against the order, over orders 2..=12.
fn residual_decay_exponent(
    spec: &InteractionSpec,
    q: &HarmonicSeries,
    q2: &HarmonicSeries,
    eps: f64,
    ts: &[f64],
) -> f64 {
    let pts: Vec<(f64, f64)> = (2..=12)
        .map(|n| {
            let e = expand_condition_i(q, q2, n).unwrap();
            let g = sum_at_epsilon(&e, eps).unwrap();
            (n as f64, riccati_residual(&g.g, spec, eps, ts).ln())
        })
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn condition_i_low_orders_match_mean_formulas() {
    let (q, q2) = series(&case_a());
    let exp = expand_condition_i(&q, &q2, 6).unwrap();
    let a = exp.constants();
    let w = exp.omega_coefficients();
    let m0 = mean_q0(&q2);
    let m1 = mean_q1(&q2).unwrap();
    let m2 = mean_q2(&q2).unwrap();
    assert!((a[0] * a[0] - m0.conj() / m0).norm() < 1e-14);
    assert!((w[0] - a[0] * m0).norm() < 1e-12);
    let second = I * a[0] * a[0] * m2 - I * m1 + a[1] * m0;
    assert!((w[1] - second).norm() < 1e-10, "{} vs {second}", w[1]);
    // constant of order n fixed by the secular condition at order n + 1
    assert_eq!(exp.resolving_orders(), &[2, 3, 4, 5, 6, 7]);
}

#[test]
fn case_b_localisation_periods() {
    let spec = case_b();
    let (q, q2) = series(&spec);
    let exp = expand_condition_iii(&q, &q2, 6, false).unwrap();
    assert_eq!(exp.resolving_orders(), &[4, 5, 6, 7, 8, 9]);
    let w = exp.omega_coefficients();
    let scale = w[2].norm();
    assert!(w[0].norm() < 1e-10 * scale && w[1].norm() < 1e-10 * scale);
    let lead = 2.0 * exp.constants()[0] * mean_q3(&q2).unwrap();
    assert!((w[2] - lead).norm() < 1e-10 * lead.norm().max(1.0));

    for (eps, want) in [(0.01, 1.6e9), (0.10, 1.6e6), (0.20, 2.2e5)] {
        let gs = sum_at_epsilon(&exp, eps).unwrap();
        let ratio = period_ratio(&gs, 10.0);
        assert!((ratio / want - 1.0).abs() < 0.10, "eps {eps}: {ratio:e}");
    }
    let o1 = sum_at_epsilon(&exp, 0.01).unwrap().omega_rabi / 1e-6;
    let o2 = sum_at_epsilon(&exp, 0.02).unwrap().omega_rabi / 8e-6;
    assert!((o1 / o2 - 1.0).abs() < 0.01);
}

#[test]
fn condition_iii_order_cap() {
    let (q, q2) = series(&case_b());
    assert!(matches!(
        expand_condition_iii(&q, &q2, 7, false),
        Err(Error::UnsupportedOrder { order: 7, max: 6 })
    ));
    let deep = expand_condition_iii(&q, &q2, 8, true).unwrap();
    assert_eq!(deep.order(), 8);
}

#[test]
fn wrong_condition_is_rejected() {
    let (qa, q2a) = series(&case_a());
    let (qb, q2b) = series(&case_b());
    let (qc, q2c) = series(&case_c());
    assert!(matches!(expand_condition_i(&qb, &q2b, 4), Err(Error::WrongCondition { .. })));
    assert!(matches!(expand_condition_iii(&qa, &q2a, 4, false), Err(Error::WrongCondition { .. })));
    assert!(matches!(expand_condition_i(&qc, &q2c, 4), Err(Error::WrongCondition { .. })));
    assert!(matches!(expand_condition_ii_f0zero(&qc, &q2c, 4), Err(Error::WrongCondition { .. })));
}

#[test]
fn condition_ii_f0zero_leading_term_and_parity() {
    let spec = condition_ii_f0zero_spec();
    let (q, q2) = series(&spec);
    let class = crate::interaction::classify_series(&spec, &q2).unwrap();
    assert_eq!(class.tag, Condition::II);
    let exp = expand_condition_ii_f0zero(&q, &q2, 8).unwrap();
    let w = exp.omega_coefficients();
    let lead = -I * mean_q1(&q2).unwrap();
    assert!((w[0] - lead).norm() < 1e-10, "{} vs {lead}", w[0]);

    let plus = sum_at_epsilon(&exp, 0.05).unwrap();
    let minus = sum_at_epsilon(&exp, -0.05).unwrap();
    assert_eq!(plus.omega_rabi, minus.omega_rabi);
    let w_sum: Complex64 = w.iter().enumerate().map(|(n, x)| x * 0.0025f64.powi(n as i32 + 1)).sum();
    assert!(w_sum.im.abs() <= 1e-10 * w_sum.re.abs());

    let ts = samples(&spec, 61);
    let res = |n: usize| {
        let e = expand_condition_ii_f0zero(&q, &q2, n).unwrap();
        riccati_residual(&sum_at_epsilon(&e, 0.05).unwrap().g, &spec, 0.05, &ts)
    };
    let (r1, r2, r4) = (res(1), res(2), res(4));
    assert!(r2 < r1 && r4 < r2, "{r1:e} {r2:e} {r4:e}");
}

#[test]
fn case_c_periods() {
    let spec = case_c();
    let (q, q2) = series(&spec);
    let exp = expand_condition_ii_f0nonzero(&q, &q2, 0.15, DEFAULT_ORDER_II).unwrap();
    assert!(exp.constants().is_empty());
    for (eps, want) in [(0.05, 6.3), (0.20, 5.0)] {
        let gs = sum_at_epsilon(&exp, eps).unwrap();
        let ratio = period_ratio(&gs, 1.0);
        assert!((ratio / want - 1.0).abs() < 0.05, "eps {eps}: {ratio}");
    }
}

#[test]
fn first_order_coefficients_match_explicit_sum() {
    // E^(1)_m = sum_a Q_{m+a} conj(Q2_a) / (a omega + 2 F0)
    let spec = case_c();
    let (q, q2) = series(&spec);
    let f0 = spec.f0();
    let exp = expand_condition_ii_f0nonzero(&q, &q2, 0.15, 2).unwrap();
    let e1 = exp.c_coefficients(1);
    assert!((e1.nu() + f0).abs() < 1e-15);
    for m in -5i64..=5 {
        let want: Complex64 = (-(M as i64)..=M as i64)
            .map(|a| q.get(m + a) * q2.get(a).conj() / (a as f64 + 2.0 * f0))
            .sum();
        assert!((e1.get(m) - want).norm() < 1e-13, "m {m}");
    }
}

#[test]
fn constant_field_matches_closed_form_and_detects_divergence() {
    let spec = InteractionSpec::constant(1.0, 0.4).unwrap();
    let (q, q2) = series(&spec);
    let exp = expand_condition_ii_f0nonzero(&q, &q2, 0.4, DEFAULT_ORDER_II).unwrap();
    let gs = sum_at_epsilon(&exp, 0.3).unwrap();
    assert!((gs.omega_rabi - 0.5).abs() < 1e-6);
    assert!((gs.g0 - c(0.1, 0.0)).norm() < 1e-6);
    assert!(matches!(sum_at_epsilon(&exp, 0.43), Err(Error::DivergenceSuspected { .. })));
}

#[test]
fn secular_period_helper() {
    let gs = GSeries {
        g: HarmonicSeries::zeros(1.0, 0.0, 1),
        omega_rabi: -0.5,
        g0: c(0.0, 0.0),
        epsilon: 0.1,
        f0: 0.0,
    };
    assert!((gs.secular_period() - 4.0 * PI).abs() < 1e-15);
}

/// `M(Q0 int_0^t (Q2 - M(Q2)))` with `Q2 = Q0 int_0^t (Q0 - M(Q0))`.
fn mean_q0_int_q2(q2: &HarmonicSeries) -> Complex64 {
    let int_from_zero = |s: &HarmonicSeries| {
        let (mut b, c0) = s.without_mean().integrate_from_zero().unwrap();
        b.set(0, b.get(0) + c0);
        b
    };
    let big_q2 = q2.convolve(&int_from_zero(q2)).unwrap();
    q2.convolve(&int_from_zero(&big_q2)).unwrap().mean()
}

#[test]
fn condition_i_third_order_mean() {
    // The eps^3 zero mode carries, besides 2 a1 M(Q3) + a3 M(Q0), the terms
    // 2 i a1 a2 M(Q2) - 2 a1^3 M(Q0 int (Q2 - M(Q2))) coming from the a2 and
    // a1^2 int Q0 parts of c_2.
    for chi1 in [1.0, 2.0, 3.3] {
        let spec = InteractionSpec::monochromatic(1.0, chi1, 0.0).unwrap();
        let (q, q2) = series(&spec);
        let exp = expand_condition_i(&q, &q2, 5).unwrap();
        let a = exp.constants();
        let w = exp.omega_coefficients();
        let m0 = mean_q0(&q2);
        let m2 = mean_q2(&q2).unwrap();
        let m3 = mean_q3(&q2).unwrap();
        let short = 2.0 * a[0] * m3 + a[2] * m0;
        let full = short + 2.0 * I * a[0] * a[1] * m2 - 2.0 * a[0].powu(3) * mean_q0_int_q2(&q2);
        assert!((w[2] - full).norm() < 1e-10, "chi1 {chi1}");
        assert!((w[2] - short).norm() > 0.1);
    }
}

//! Bessel functions of the first kind, integer order.
//!
//! Miller's downward recurrence normalized by `J_0 + 2 sum J_2k = 1`, with the
//! ascending power series below `|x| < 1`.

use crate::error::{Error, Result};

/// Largest `|x|` with guaranteed 1e-12 absolute accuracy.
pub const MAX_ARG: f64 = 50.0;
/// Largest `|n|` with guaranteed 1e-12 absolute accuracy.
pub const MAX_ORDER: i64 = 80;

// Internal evaluations (zero finding, large cutoffs) may go beyond the
// validated window; the recurrence stays stable well past it.
const INTERNAL_MAX_ARG: f64 = 150.0;

/// `J_n(x)` for `|n| <= 80`, `|x| <= 50`.
pub fn bessel_j(n: i64, x: f64) -> Result<f64> {
    if n.abs() > MAX_ORDER || !(x.abs() <= MAX_ARG) {
        return Err(Error::AccuracyUnsupported { n, x });
    }
    Ok(bessel_j_unchecked(n, x))
}

fn parity(n: i64) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub(crate) fn bessel_j_unchecked(n: i64, x: f64) -> f64 {
    let na = n.unsigned_abs() as usize;
    let mut sign = if n < 0 { parity(n) } else { 1.0 };
    if x < 0.0 {
        sign *= parity(n);
    }
    sign * bessel_j_orders(na, x.abs())[na]
}

/// `[J_0(x), J_1(x), ..., J_{n_max}(x)]` for `x >= 0`.
///
/// Accepts any order; values below the f64 range come out as 0.
pub fn bessel_j_orders(n_max: usize, x: f64) -> Vec<f64> {
    assert!((0.0..=INTERNAL_MAX_ARG).contains(&x), "bessel argument {x} outside supported range");
    if x == 0.0 {
        let mut out = vec![0.0; n_max + 1];
        out[0] = 1.0;
        return out;
    }
    if x < 1.0 {
        return (0..=n_max).map(|n| ascending_series(n, x)).collect();
    }
    miller(n_max, x)
}

fn ascending_series(n: usize, x: f64) -> f64 {
    // (x/2)^n / n! in log space so high orders underflow gracefully.
    let half = 0.5 * x;
    let log_lead = n as f64 * half.ln() - (1..=n).map(|k| (k as f64).ln()).sum::<f64>();
    if log_lead < -745.0 {
        return 0.0;
    }
    let y = -half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1usize;
    loop {
        term *= y / (k as f64 * (n + k) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        k += 1;
    }
    log_lead.exp() * sum
}

fn miller(n_max: usize, x: f64) -> Vec<f64> {
    let top = (n_max as f64).max(x);
    let mut start = (top + 30.0 + (60.0 * top).sqrt()).ceil() as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let mut vals = vec![0.0; start + 2];
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-300; // J_k
    vals[start] = cur;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        vals[k - 1] = cur;
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            let s = 1e-250;
            for v in vals[k - 1..].iter_mut() {
                *v *= s;
            }
            next *= s;
            cur *= s;
            norm *= s;
        }
    }
    norm += vals[0];
    vals.truncate(n_max + 1);
    vals.resize(n_max + 1, 0.0);
    for v in vals.iter_mut() {
        *v /= norm;
    }
    vals
}

/// Derivative `J_n'(x) = (J_{n-1}(x) - J_{n+1}(x)) / 2`.
fn bessel_j_prime(n: i64, x: f64) -> f64 {
    0.5 * (bessel_j_unchecked(n - 1, x) - bessel_j_unchecked(n + 1, x))
}

/// The `k`-th positive zero of `J_n` (`k >= 1`).
///
/// Scans for a sign change, then refines with Newton steps safeguarded by
/// the bracket.
pub fn find_bessel_zero(n: i64, k: usize) -> Result<f64> {
    if k == 0 || n.abs() > 20 || k > 20 {
        return Err(Error::AccuracyUnsupported { n, x: k as f64 });
    }
    let f = |x: f64| bessel_j_unchecked(n, x);
    let step = 0.2;
    let mut a = (n.abs() as f64).max(0.1);
    let mut fa = f(a);
    let mut found = 0;
    let (mut lo, mut hi) = (0.0, 0.0);
    while a < INTERNAL_MAX_ARG - step {
        let b = a + step;
        let fb = f(b);
        if fa == 0.0 || fa * fb < 0.0 {
            found += 1;
            if found == k {
                lo = a;
                hi = b;
                break;
            }
        }
        a = b;
        fa = fb;
    }
    if found < k {
        return Err(Error::AccuracyUnsupported { n, x: a });
    }
    let mut flo = f(lo);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..100 {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if flo * fx < 0.0 {
            hi = x;
        } else {
            lo = x;
            flo = fx;
        }
        let d = bessel_j_prime(n, x);
        let newton = x - fx / d;
        let next = if d != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 1e-15 * x.abs() {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

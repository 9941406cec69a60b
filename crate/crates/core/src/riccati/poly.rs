//! Polynomials in the not-yet-fixed integration constants, with Fourier-series
//! or scalar coefficients.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::Result;
use crate::fourier::HarmonicSeries;

/// Exponent of each unknown, indexed by unknown id; trailing zeros trimmed.
pub(crate) type Monomial = Vec<u8>;

fn trim(mut m: Monomial) -> Monomial {
    while m.last() == Some(&0) {
        m.pop();
    }
    m
}

fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let n = a.len().max(b.len());
    let m = (0..n)
        .map(|k| a.get(k).copied().unwrap_or(0) + b.get(k).copied().unwrap_or(0))
        .collect();
    trim(m)
}

pub(crate) fn single(id: usize) -> Monomial {
    let mut m = vec![0; id + 1];
    m[id] = 1;
    m
}

#[derive(Debug, Clone)]
pub(crate) struct PolySeries {
    omega: f64,
    m_max: usize,
    pub(crate) terms: BTreeMap<Monomial, HarmonicSeries>,
}

impl PolySeries {
    pub fn from_series(s: HarmonicSeries) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Vec::new(), s.clone());
        Self {
            omega: s.omega(),
            m_max: s.m_max(),
            terms,
        }
    }

    pub fn zero(omega: f64, m_max: usize) -> Self {
        Self {
            omega,
            m_max,
            terms: BTreeMap::new(),
        }
    }

    /// The bare unknown `id` (a constant function).
    pub fn unknown(id: usize, omega: f64, m_max: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(single(id), HarmonicSeries::constant(omega, m_max, Complex64::new(1.0, 0.0)));
        Self { omega, m_max, terms }
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        for (mono, s) in &other.terms {
            match self.terms.get_mut(mono) {
                Some(acc) => *acc = acc.add(s)?,
                None => {
                    self.terms.insert(mono.clone(), s.clone());
                }
            }
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut out = Self::zero(self.omega, self.m_max);
        for (ma, a) in &self.terms {
            for (mb, b) in &other.terms {
                let prod = a.convolve_into_cutoff(b, self.m_max);
                let mono = mono_mul(ma, mb);
                match out.terms.get_mut(&mono) {
                    Some(acc) => *acc = acc.add(&prod)?,
                    None => {
                        out.terms.insert(mono, prod);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Multiplies every coefficient by the series `s`.
    pub fn times_series(&self, s: &HarmonicSeries) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (m.clone(), c.convolve_into_cutoff(s, self.m_max)))
            .collect();
        Self {
            omega: self.omega,
            m_max: self.m_max,
            terms,
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), c.scale(factor))).collect();
        Self {
            omega: self.omega,
            m_max: self.m_max,
            terms,
        }
    }

    /// Replaces unknown `id` by `value` everywhere.
    pub fn substitute(&self, id: usize, value: Complex64) -> Result<Self> {
        let mut out = Self::zero(self.omega, self.m_max);
        for (mono, c) in &self.terms {
            let p = mono.get(id).copied().unwrap_or(0);
            let (mono, c) = if p == 0 {
                (mono.clone(), c.clone())
            } else {
                let mut m = mono.clone();
                m[id] = 0;
                (trim(m), c.scale(value.powu(p as u32)))
            };
            let single = Self {
                omega: self.omega,
                m_max: self.m_max,
                terms: [(mono, c)].into_iter().collect(),
            };
            out.add_assign(&single)?;
        }
        Ok(out)
    }

    pub fn mean(&self) -> PolyScalar {
        PolyScalar {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.mean())).collect(),
        }
    }

    /// Sum of the coefficient l1 norms.
    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.l1_norm()).sum()
    }

    /// Mean-free antiderivative of every coefficient after dropping its mean.
    pub fn antiderivative_without_mean(&self) -> Result<Self> {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            terms.insert(m.clone(), c.without_mean().antiderivative()?);
        }
        Ok(Self {
            omega: self.omega,
            m_max: self.m_max,
            terms,
        })
    }

    /// The coefficient of the empty monomial, if every other term is absent.
    pub fn as_series(&self) -> Option<HarmonicSeries> {
        if self.terms.keys().any(|m| !m.is_empty()) {
            return None;
        }
        Some(
            self.terms
                .get(&Vec::new())
                .cloned()
                .unwrap_or_else(|| HarmonicSeries::zeros(self.omega, 0.0, self.m_max)),
        )
    }

    #[cfg(test)]
    pub fn unknowns(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self
            .terms
            .keys()
            .flat_map(|m| m.iter().enumerate().filter(|(_, &p)| p > 0).map(|(k, _)| k))
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}

#[derive(Debug, Clone, Default)]
pub(crate) struct PolyScalar {
    pub terms: BTreeMap<Monomial, Complex64>,
}

impl PolyScalar {
    pub fn drop_below(&self, tol: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.norm() > tol)
                .map(|(m, c)| (m.clone(), *c))
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn unknowns(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self
            .terms
            .keys()
            .flat_map(|m| m.iter().enumerate().filter(|(_, &p)| p > 0).map(|(k, _)| k))
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Coefficients of `u^0, u^1, ...` when the polynomial depends on `u` alone.
    pub fn univariate(&self, id: usize) -> Option<Vec<Complex64>> {
        let mut coeffs = Vec::new();
        for (m, &c) in &self.terms {
            if m.iter().enumerate().any(|(k, &p)| k != id && p > 0) {
                return None;
            }
            let p = m.get(id).copied().unwrap_or(0) as usize;
            if coeffs.len() <= p {
                coeffs.resize(p + 1, Complex64::new(0.0, 0.0));
            }
            coeffs[p] += c;
        }
        Some(coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn product_and_substitution() {
        // (k0 + cos t) * (k0 - cos t) = k0^2 - cos^2 t
        let mut cos = HarmonicSeries::zeros(1.0, 0.0, 4);
        cos.set(1, c(0.5, 0.0));
        cos.set(-1, c(0.5, 0.0));
        let mut a = PolySeries::unknown(0, 1.0, 4);
        a.add_assign(&PolySeries::from_series(cos.clone())).unwrap();
        let mut b = PolySeries::unknown(0, 1.0, 4);
        b.add_assign(&PolySeries::from_series(cos.scale(c(-1.0, 0.0)))).unwrap();
        let p = a.mul(&b).unwrap();
        let mean = p.mean().drop_below(1e-15);
        let coeffs = mean.univariate(0).unwrap();
        assert!((coeffs[0] - c(-0.5, 0.0)).norm() < 1e-15);
        assert!(coeffs[1].norm() < 1e-15);
        assert!((coeffs[2] - c(1.0, 0.0)).norm() < 1e-15);

        let s = p.substitute(0, c(2.0, 0.0)).unwrap().as_series().unwrap();
        for &t in &[0.0f64, 0.4, 2.0] {
            let want = 4.0 - t.cos().powi(2);
            assert!((s.evaluate(t).re - want).abs() < 1e-14);
        }
    }

    #[test]
    fn univariate_rejects_mixed_terms() {
        let x = PolySeries::unknown(0, 1.0, 1);
        let y = PolySeries::unknown(1, 1.0, 1);
        let xy = x.mul(&y).unwrap();
        assert!(xy.mean().univariate(0).is_none());
        assert_eq!(xy.unknowns(), vec![0, 1]);
    }
}

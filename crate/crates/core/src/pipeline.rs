//! classify -> expand -> sum -> assemble, for one field and many couplings.

use crate::error::Result;
use crate::fourier::HarmonicSeries;
use crate::interaction::{classify_series, q2_coefficients, q_coefficients, ConditionClass, InteractionSpec};
use crate::propagator::{assemble, PropagatorModel};
use crate::riccati::{expand, sum_at_epsilon, GSeries, RiccatiExpansion};

/// Extra harmonics carried beyond the requested cutoff. Products truncated at
/// the band edge corrupt the outermost few modes; the guard keeps that
/// corruption below the assembly tolerance at the requested cutoff.
pub const GUARD_MODES: usize = 20;

#[derive(Debug, Clone)]
pub struct Prepared {
    pub spec: InteractionSpec,
    pub q: HarmonicSeries,
    pub q2: HarmonicSeries,
    pub class: ConditionClass,
    pub expansion: RiccatiExpansion,
}

impl Prepared {
    /// `order = None` picks the condition's default; `allow_deep` lifts the
    /// condition-III order cap. Series are held on `m_max + GUARD_MODES`.
    pub fn new(spec: &InteractionSpec, m_max: usize, order: Option<usize>, allow_deep: bool) -> Result<Self> {
        let work = m_max + GUARD_MODES;
        let q = q_coefficients(spec, work)?;
        let q2 = q2_coefficients(spec, work)?;
        let class = classify_series(spec, &q2)?;
        let expansion = expand(spec, &q, &q2, class.tag, order, allow_deep)?;
        Ok(Self {
            spec: spec.clone(),
            q,
            q2,
            class,
            expansion,
        })
    }

    pub fn g_at(&self, epsilon: f64) -> Result<GSeries> {
        sum_at_epsilon(&self.expansion, epsilon)
    }

    pub fn model_at(&self, epsilon: f64) -> Result<(GSeries, PropagatorModel)> {
        let g = self.g_at(epsilon)?;
        let model = assemble(&g, &self.q, &self.q2)?;
        Ok((g, model))
    }
}

//! Stratification by limits of the norm-square flow, and transport of the
//! whole picture to the triple obtained by conjugating with `g`.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::flows::{neg_flow_normsq, NormSquareFlowOptions, OrbitKey, StratumLabel};
use crate::liealg::{bform, GroupElement};
use crate::linalg::{zeros, CMat};
use crate::spaces::{ModelPoint, ModelSpace};

use super::{classify, ClassifyOptions, StabilityVerdict};

#[derive(Debug, Clone)]
pub struct StratumEntry {
    pub index: usize,
    pub label: Option<StratumLabel>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct StratumReport {
    pub entries: Vec<StratumEntry>,
    /// Number of points per orbit key.
    pub strata: BTreeMap<OrbitKey, usize>,
}

impl StratumReport {
    pub fn keys(&self) -> Vec<OrbitKey> {
        self.strata.keys().cloned().collect()
    }
}

fn zero_label(space: &ModelSpace) -> Result<StratumLabel> {
    StratumLabel::new(space.group_kind(), zeros(space.n))
}

/// Flow every grid point to its limit and group the labels by orbit key;
/// limits with `f < tol` form the zero stratum.
pub fn stratify(space: &ModelSpace, points: &[ModelPoint], opts: &NormSquareFlowOptions) -> Result<StratumReport> {
    let mut entries = Vec::with_capacity(points.len());
    let mut strata = BTreeMap::new();
    for (index, x) in points.iter().enumerate() {
        match neg_flow_normsq(space, x, opts) {
            Ok(flow) => {
                let label = if flow.label.f_value < opts.tol { zero_label(space)? } else { flow.label };
                *strata.entry(label.orbit_key.clone()).or_insert(0) += 1;
                entries.push(StratumEntry { index, label: Some(label), error: None });
            }
            Err(e) => entries.push(StratumEntry { index, label: None, error: Some(e.to_string()) }),
        }
    }
    Ok(StratumReport { entries, strata })
}

/// The triple `(gKg^{-1}, transported metric, Ad(g) ∘ mu_p ∘ g^{-1})`.
#[derive(Debug, Clone)]
pub struct TripleTransport {
    pub g: GroupElement,
    pub g_inv: GroupElement,
}

impl TripleTransport {
    pub fn new(space: &ModelSpace, g: &GroupElement) -> Result<Self> {
        space.setup.check_member(&g.matrix)?;
        Ok(Self { g: g.clone(), g_inv: g.inverse()? })
    }

    pub fn pull_back(&self, space: &ModelSpace, x: &ModelPoint) -> Result<ModelPoint> {
        space.act(&self.g_inv.matrix, x)
    }

    /// `mu_{p'}(x) = Ad(g) mu_p(g^{-1} x)`.
    pub fn mu_prime(&self, space: &ModelSpace, x: &ModelPoint) -> Result<CMat> {
        let mu = space.gradient_map(&self.pull_back(space, x)?)?.matrix;
        self.g.adjoint_action(&mu)
    }

    /// `f'(x) = ½ B(mu_{p'}(x), mu_{p'}(x))`.
    pub fn f_prime(&self, space: &ModelSpace, x: &ModelPoint) -> Result<f64> {
        let m = self.mu_prime(space, x)?;
        Ok(0.5 * bform(&m, &m))
    }

    /// `|mu_{p'}(g x) - Ad(g) mu_p(x)|`.
    pub fn equivariance_defect(&self, space: &ModelSpace, x: &ModelPoint) -> Result<f64> {
        let gx = space.act(&self.g.matrix, x)?;
        let lhs = self.mu_prime(space, &gx)?;
        let rhs = self.g.adjoint_action(&space.gradient_map(x)?.matrix)?;
        Ok(crate::linalg::fro_norm(&(lhs - rhs)))
    }

    /// Stratum label in the transported triple: the flow of `f'` is the
    /// `g`-image of the flow of `f` started at `g^{-1} x`.
    pub fn stratum_label(&self, space: &ModelSpace, x: &ModelPoint, opts: &NormSquareFlowOptions) -> Result<StratumLabel> {
        let flow = neg_flow_normsq(space, &self.pull_back(space, x)?, opts)?;
        if flow.label.f_value < opts.tol {
            return zero_label(space);
        }
        let critical = self.g.adjoint_action(&flow.label.critical_beta)?;
        let f_value = 0.5 * bform(&critical, &critical);
        let orbit_key = OrbitKey::of(space.group_kind(), &critical)?;
        Ok(StratumLabel { critical_beta: critical, f_value, orbit_key })
    }

    pub fn stratify(&self, space: &ModelSpace, points: &[ModelPoint], opts: &NormSquareFlowOptions) -> Result<StratumReport> {
        let mut entries = Vec::with_capacity(points.len());
        let mut strata = BTreeMap::new();
        for (index, x) in points.iter().enumerate() {
            match self.stratum_label(space, x, opts) {
                Ok(label) => {
                    *strata.entry(label.orbit_key.clone()).or_insert(0) += 1;
                    entries.push(StratumEntry { index, label: Some(label), error: None });
                }
                Err(e) => entries.push(StratumEntry { index, label: None, error: Some(e.to_string()) }),
            }
        }
        Ok(StratumReport { entries, strata })
    }

    /// Verdict of `x` with respect to the transported triple.
    pub fn classify(&self, space: &ModelSpace, x: &ModelPoint, opts: &ClassifyOptions) -> Result<StabilityVerdict> {
        classify(space, &self.pull_back(space, x)?, opts)
    }
}

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{KnotPoint, KnotSpace, KnotTangent};
use crate::error::{Error, Result};

/// How a seed normal field is extended to nearby immersions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionRule {
    /// Same ambient vectors, projected to the new normal spaces.
    #[default]
    ConstantExtension,
    /// Seed transported by the differential of `Exp` at the displacement
    /// from the base, then projected. Agrees with the constant rule in flat
    /// space up to rounding.
    ExponentialVertical,
}

/// A vector field on the knot space near a base point.
pub trait VectorField: Send + Sync {
    fn base(&self) -> &Arc<KnotPoint>;

    /// Value at the base point.
    fn seed(&self, space: &KnotSpace) -> Result<KnotTangent>;

    /// Value at a nearby knot point with the same grid.
    fn value_at(&self, space: &KnotSpace, at: &Arc<KnotPoint>) -> Result<KnotTangent>;
}

/// A seed normal field, an extension rule and optionally `J` applied after
/// the extension (re-evaluated at every point).
#[derive(Debug, Clone)]
pub struct KnotVectorFieldScheme {
    base: Arc<KnotPoint>,
    seed: KnotTangent,
    rule: ExtensionRule,
    compose_j: bool,
}

impl KnotVectorFieldScheme {
    pub fn new(seed: KnotTangent, rule: ExtensionRule) -> Self {
        Self { base: seed.base().clone(), seed, rule, compose_j: false }
    }

    pub fn constant(seed: KnotTangent) -> Self {
        Self::new(seed, ExtensionRule::ConstantExtension)
    }

    pub fn exponential(seed: KnotTangent) -> Self {
        Self::new(seed, ExtensionRule::ExponentialVertical)
    }

    /// The field `p ↦ J_p(X_p)`.
    pub fn with_j(&self) -> Self {
        Self { compose_j: !self.compose_j, ..self.clone() }
    }

    pub fn rule(&self) -> ExtensionRule {
        self.rule
    }

    pub fn composes_j(&self) -> bool {
        self.compose_j
    }

    pub fn seed_values(&self) -> &KnotTangent {
        &self.seed
    }

    fn extended(&self, space: &KnotSpace, at: &Arc<KnotPoint>) -> Result<KnotTangent> {
        let (base, target) = (self.base.immersion(), at.immersion());
        if base.grid() != target.grid() || base.dim() != target.dim() {
            return Err(Error::ShapeMismatch("field evaluated on a different grid".into()));
        }
        if self.base.same_as(at) {
            return Ok(self.seed.clone());
        }
        match self.rule {
            ExtensionRule::ConstantExtension => KnotTangent::project(at, self.seed.values()),
            ExtensionRule::ExponentialVertical => {
                let ambient = space.ambient();
                let m = base.dim();
                let mut out = vec![0.0; self.seed.values().len()];
                for idx in 0..base.len() {
                    let p = base.point(idx);
                    let w = ambient.displacement(p, target.point(idx));
                    ambient.exp_differential_into(p, &w, self.seed.sample(idx), &mut out[idx * m..(idx + 1) * m]);
                }
                KnotTangent::project(at, &out)
            }
        }
    }
}

impl VectorField for KnotVectorFieldScheme {
    fn base(&self) -> &Arc<KnotPoint> {
        &self.base
    }

    fn seed(&self, space: &KnotSpace) -> Result<KnotTangent> {
        self.value_at(space, &self.base)
    }

    fn value_at(&self, space: &KnotSpace, at: &Arc<KnotPoint>) -> Result<KnotTangent> {
        let x = self.extended(space, at)?;
        if self.compose_j {
            space.apply_j(&x)
        } else {
            Ok(x)
        }
    }
}

use std::sync::Arc;

use super::{ConnectionKind, KnotPoint, KnotSpace, KnotTangent, VectorField};
use crate::error::{Error, Result};

/// `p ↦ J_p(X_p)` for any vector field `X`.
struct JComposed<'a>(&'a dyn VectorField);

impl VectorField for JComposed<'_> {
    fn base(&self) -> &Arc<KnotPoint> {
        self.0.base()
    }

    fn seed(&self, space: &KnotSpace) -> Result<KnotTangent> {
        space.apply_j(&self.0.seed(space)?)
    }

    fn value_at(&self, space: &KnotSpace, at: &Arc<KnotPoint>) -> Result<KnotTangent> {
        space.apply_j(&self.0.value_at(space, at)?)
    }
}

fn same_base(a: &dyn VectorField, b: &dyn VectorField) -> Result<()> {
    if a.base().same_as(b.base()) {
        Ok(())
    } else {
        Err(Error::BaseMismatch)
    }
}

impl KnotSpace {
    /// `X_p` for a vector field `X`.
    pub fn field_value(&self, field: &dyn VectorField, at: &Arc<KnotPoint>) -> Result<KnotTangent> {
        field.value_at(self, at)
    }

    /// Ambient derivative of `field` along the flow of `u`, not projected.
    fn raw_derivative(&self, u: &KnotTangent, field: &dyn VectorField) -> Result<Vec<f64>> {
        self.directional(u, |p| field.value_at(self, p).map(KnotTangent::into_values))
    }

    /// `[A, B] ≈ Π(D_A B − D_B A)` at the common base point.
    pub fn lie_bracket(&self, a: &dyn VectorField, b: &dyn VectorField) -> Result<KnotTangent> {
        same_base(a, b)?;
        let base = a.base();
        let a0 = a.seed(self)?;
        let b0 = b.seed(self)?;
        let dab = self.raw_derivative(&a0, b)?;
        let dba = self.raw_derivative(&b0, a)?;
        let diff: Vec<f64> = dab.iter().zip(&dba).map(|(x, y)| x - y).collect();
        KnotTangent::project(base, &diff)
    }

    /// `∇_u X` for the normal connection, or `∇⊥_u X − ½𝔅(u, X)`.
    pub fn covariant_derivative(
        &self,
        kind: ConnectionKind,
        u: &KnotTangent,
        field: &dyn VectorField,
    ) -> Result<KnotTangent> {
        if !u.base().same_as(field.base()) {
            return Err(Error::BaseMismatch);
        }
        let perp = KnotTangent::project(u.base(), &self.raw_derivative(u, field)?)?;
        match kind {
            ConnectionKind::Perp => Ok(perp),
            ConnectionKind::LeviCivita => {
                let b = self.b_tensor(u, &field.seed(self)?)?;
                perp.combine(1.0, &b, -0.5)
            }
        }
    }

    /// `N_J(X, Y) = 2{[JX,JY] − [X,Y] − J[X,JY] − J[JX,Y]}` for two fields.
    pub fn nijenhuis_fields(&self, x: &dyn VectorField, y: &dyn VectorField) -> Result<KnotTangent> {
        same_base(x, y)?;
        let (jx, jy) = (JComposed(x), JComposed(y));
        let a = self.lie_bracket(&jx, &jy)?;
        let b = self.lie_bracket(x, y)?;
        let c = self.apply_j(&self.lie_bracket(x, &jy)?)?;
        let d = self.apply_j(&self.lie_bracket(&jx, y)?)?;
        let values = (0..a.values().len())
            .map(|i| 2.0 * (a.values()[i] - b.values()[i] - c.values()[i] - d.values()[i]))
            .collect();
        Ok(KnotTangent::raw(a.base(), values))
    }

    /// Nijenhuis tensor at `(u, v)` using constant extensions.
    pub fn nijenhuis(&self, u: &KnotTangent, v: &KnotTangent) -> Result<KnotTangent> {
        let x = super::KnotVectorFieldScheme::constant(u.clone());
        let y = super::KnotVectorFieldScheme::constant(v.clone());
        self.nijenhuis_fields(&x, &y)
    }

    /// `∇_u(J X) − J(∇_u X)`.
    pub fn nabla_j_defect(&self, kind: ConnectionKind, u: &KnotTangent, field: &dyn VectorField) -> Result<KnotTangent> {
        let of_jx = self.covariant_derivative(kind, u, &JComposed(field))?;
        let j_of = self.apply_j(&self.covariant_derivative(kind, u, field)?)?;
        of_jx.combine(1.0, &j_of, -1.0)
    }

    /// `T(A, B) = ∇_A B − ∇_B A − [A, B]`.
    pub fn torsion(&self, kind: ConnectionKind, a: &dyn VectorField, b: &dyn VectorField) -> Result<KnotTangent> {
        same_base(a, b)?;
        let (a0, b0) = (a.seed(self)?, b.seed(self)?);
        let ab = self.covariant_derivative(kind, &a0, b)?;
        let ba = self.covariant_derivative(kind, &b0, a)?;
        let br = self.lie_bracket(a, b)?;
        let values = (0..ab.values().len()).map(|i| ab.values()[i] - ba.values()[i] - br.values()[i]).collect();
        Ok(KnotTangent::raw(ab.base(), values))
    }

    /// `u⟨B, C⟩ − ⟨∇_u B, C⟩ − ⟨B, ∇_u C⟩`.
    pub fn metric_compatibility_defect(
        &self,
        kind: ConnectionKind,
        u: &KnotTangent,
        b: &dyn VectorField,
        c: &dyn VectorField,
    ) -> Result<f64> {
        same_base(b, c)?;
        let derivative =
            self.directional_scalar(u, |p| self.l2_inner(&b.value_at(self, p)?, &c.value_at(self, p)?))?;
        let (b0, c0) = (b.seed(self)?, c.seed(self)?);
        let db = self.covariant_derivative(kind, u, b)?;
        let dc = self.covariant_derivative(kind, u, c)?;
        Ok(derivative - self.l2_inner(&db, &c0)? - self.l2_inner(&b0, &dc)?)
    }

    /// `dω²(U, V, W)` from directional derivatives and brackets:
    /// `U ω(V,W) − V ω(U,W) + W ω(U,V) − ω([U,V],W) + ω([U,W],V) − ω([V,W],U)`.
    pub fn d_omega2_defect(&self, u: &dyn VectorField, v: &dyn VectorField, w: &dyn VectorField) -> Result<f64> {
        same_base(u, v)?;
        same_base(u, w)?;
        let (u0, v0, w0) = (u.seed(self)?, v.seed(self)?, w.seed(self)?);
        let along = |dir: &KnotTangent, x: &dyn VectorField, y: &dyn VectorField| {
            self.directional_scalar(dir, |p| self.omega2(&x.value_at(self, p)?, &y.value_at(self, p)?))
        };
        let derivs = along(&u0, v, w)? - along(&v0, u, w)? + along(&w0, u, v)?;
        let brackets = -self.omega2(&self.lie_bracket(u, v)?, &w0)? + self.omega2(&self.lie_bracket(u, w)?, &v0)?
            - self.omega2(&self.lie_bracket(v, w)?, &u0)?;
        Ok(derivs + brackets)
    }
}

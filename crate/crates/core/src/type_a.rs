//! φ̃_n: on each good ζ_n cell a translation realizing the digit swap
//! (u₂, v₀) ↦ (k⁵ − v₀ − 1, u₂). Outside good cells the map falls back to the
//! identity, tagged TRANSITION.

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::map::TorusMap;
use crate::partition::{CellIndex, Level, Partition};
use crate::rational::Rational;
use crate::schedule::StageParams;
use crate::torus::{Mat2, PartialMapResult, Tag, TorusPoint};

#[derive(Clone, Debug)]
pub struct TypeAMap {
    pub lambda: u64,
    pub mu: u64,
    pub eps: Rational,
    pub eps2: Rational,
    part: Partition,
    k5: u64,
    /// θ width of one u₂ slot, 1/(2k⁶q).
    theta_step: f64,
    /// r width of one v₀ slot, 1/k⁵.
    r_step: f64,
}

/// Image digits of a ζ cell under the swap rule.
pub fn swap_digits(idx: &CellIndex, k5: u64) -> CellIndex {
    let mut out = *idx;
    out.u[2] = k5 - idx.v[0] - 1;
    out.v[0] = idx.u[2];
    out
}

/// The (u₂, v₀) pair permutation.
pub fn swap_pair(u2: u64, v0: u64, k5: u64) -> (u64, u64) {
    (k5 - v0 - 1, u2)
}

impl TypeAMap {
    pub fn for_stage(stage: &StageParams) -> Result<Self> {
        let part = Partition::new(stage)?;
        part.check_float(Level::Zeta)?;
        let q = stage.q_u64()?;
        let k = stage.k;
        let to_u64 = |b: &num_bigint::BigInt| b.to_u64().ok_or_else(|| Error::NumericUnderflow("parameter exceeds 64 bits".into()));
        Ok(TypeAMap {
            lambda: to_u64(stage.phi_a_lambda())?,
            mu: to_u64(stage.phi_a_mu())?,
            eps: stage.phi_a_eps().clone(),
            eps2: stage.phi_a_eps2().clone(),
            k5: k.pow(5),
            theta_step: 1.0 / (2.0 * (k as f64).powi(6) * q as f64),
            r_step: 1.0 / (k as f64).powi(5),
            part,
        })
    }

    pub fn partition(&self) -> &Partition {
        &self.part
    }

    /// Translation (Δθ, Δr) applied to the cell with digits u₂, v₀.
    pub fn translation(&self, u2: u64, v0: u64) -> (f64, f64) {
        let dt = (self.k5 as f64 - v0 as f64 - 1.0 - u2 as f64) * self.theta_step;
        let dr = (u2 as f64 - v0 as f64) * self.r_step;
        (dt, dr)
    }

    /// Exact translation as rationals.
    pub fn translation_exact(&self, u2: u64, v0: u64) -> (Rational, Rational) {
        let k = self.part.k as i64;
        let q = self.part.q as i64;
        let k5 = self.k5 as i64;
        (
            crate::rational::ratio(k5 - v0 as i64 - 1 - u2 as i64, 2 * k.pow(6) * q),
            crate::rational::ratio(u2 as i64 - v0 as i64, k5),
        )
    }
}

impl TorusMap for TypeAMap {
    fn name(&self) -> String {
        format!("phiA[lambda={},mu={}]", self.lambda, self.mu)
    }

    fn forward(&self, p: TorusPoint) -> PartialMapResult {
        match self.part.locate(Level::Zeta, p) {
            Some(c) => {
                let (dt, dr) = self.translation(c.u[2], c.v[0]);
                PartialMapResult::good(p.shifted(dt, dr), Mat2::identity())
            }
            None => PartialMapResult::good(p, Mat2::identity()).with_tag(Tag::Transition),
        }
    }

    fn backward(&self, p: TorusPoint) -> PartialMapResult {
        match self.part.locate(Level::Zeta, p) {
            Some(c) => {
                // image digits (A, B) come from source u₂ = B, v₀ = k⁵ − A − 1
                let (a, b) = (c.u[2] as f64, c.v[0] as f64);
                let dt = (b - a) * self.theta_step;
                let dr = (self.k5 as f64 - a - 1.0 - b) * self.r_step;
                PartialMapResult::good(p.shifted(dt, dr), Mat2::identity())
            }
            None => PartialMapResult::good(p, Mat2::identity()).with_tag(Tag::Transition),
        }
    }

    /// Good set is not invariant under the fallback, so the inverse is only
    /// exact on good cells.
    fn has_exact_inverse(&self) -> bool {
        false
    }

    fn feature_scale(&self) -> f64 {
        self.part.min_width(Level::Zeta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::schedule::stage;

    #[test]
    fn example_cell_translation() {
        let s = stage(1, 2, 4, 1, 0, ratio(3, 8)).unwrap();
        let m = TypeAMap::for_stage(&s).unwrap();
        let idx = CellIndex::zeta([0, 0, 5, 1, 2], [3, 2, 7]);
        assert_eq!(m.translation_exact(5, 3), (ratio(23, 128), ratio(1, 16)));
        let c = m.partition().cell_box(&idx).center();
        let img = m.forward(c);
        assert!(img.is_good());
        assert_eq!(
            m.partition().locate(Level::Zeta, img.jet.point),
            Some(CellIndex::zeta([0, 0, 28, 1, 2], [5, 2, 7]))
        );
        let back = m.backward(img.jet.point);
        assert!(back.jet.point.dist(&c) < 1e-15);
    }

    #[test]
    fn swap_pair_is_a_bijection_of_order_four() {
        let k5 = 32;
        let mut seen = std::collections::HashSet::new();
        for u2 in 1..=30 {
            for v0 in 1..=30 {
                let (a, b) = swap_pair(u2, v0, k5);
                assert!((1..=30).contains(&a) && (1..=30).contains(&b));
                assert!(seen.insert((a, b)));
                let mut x = (u2, v0);
                for _ in 0..4 {
                    x = swap_pair(x.0, x.1, k5);
                }
                assert_eq!(x, (u2, v0));
            }
        }
    }
}

//! Assembly of one stage: φ_n, h_n = g_n∘φ_n, H_n = H_{n−1}∘h_n,
//! f_n = H_n∘R_{α_{n+1}}∘H_n⁻¹ and Φ_n = φ_n∘R^{m_n}_{α_{n+1}}∘φ_n⁻¹.

use num_bigint::BigInt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::map::{MapExpr, TorusMap};
use crate::rational::{fmt_rational, from_int, Rational};
use crate::schedule::{mixing_time, next_alpha, MixingTime, StageParams};
use crate::shear::ShearMap;
use crate::torus::{PartialMapResult, TorusPoint};
use crate::type_a::TypeAMap;
use crate::type_b::{GoodPolicy, TypeBMap, DEFAULT_R1, DEFAULT_R2};

/// φ_n: identity on odd half-columns [(2u₀+1)/(2q), (2u₀+2)/(2q)) and
/// i_n∘φ̃_n on even ones.
#[derive(Clone, Debug)]
pub struct PhiMap {
    pub type_a: TypeAMap,
    pub type_b: TypeBMap,
    pub q: u64,
}

impl PhiMap {
    pub fn for_stage(stage: &StageParams) -> Result<Self> {
        Ok(PhiMap {
            type_a: TypeAMap::for_stage(stage)?,
            type_b: TypeBMap::for_stage(stage, DEFAULT_R1, DEFAULT_R2, GoodPolicy::PlateauOnly)?,
            q: stage.q_u64()?,
        })
    }

    /// Index of the 1/(2q) half-column containing θ.
    pub fn half_column(&self, theta: f64) -> u64 {
        ((theta * 2.0 * self.q as f64).floor() as u64).min(2 * self.q - 1)
    }

    pub fn is_active(&self, theta: f64) -> bool {
        self.half_column(theta) % 2 == 0
    }
}

impl TorusMap for PhiMap {
    fn name(&self) -> String {
        format!("phi[q={}]", self.q)
    }

    fn forward(&self, p: TorusPoint) -> PartialMapResult {
        if !self.is_active(p.theta) {
            return PartialMapResult::good(p, crate::torus::Mat2::identity());
        }
        let a = self.type_a.forward(p);
        let b = self.type_b.forward(a.jet.point);
        PartialMapResult::good(b.jet.point, b.jet.deriv * a.jet.deriv).with_tag(a.tag.and(b.tag))
    }

    fn backward(&self, p: TorusPoint) -> PartialMapResult {
        if !self.is_active(p.theta) {
            return PartialMapResult::good(p, crate::torus::Mat2::identity());
        }
        let b = self.type_b.backward(p);
        let a = self.type_a.backward(b.jet.point);
        PartialMapResult::good(a.jet.point, a.jet.deriv * b.jet.deriv).with_tag(a.tag.and(b.tag))
    }

    fn has_exact_inverse(&self) -> bool {
        false
    }

    fn feature_scale(&self) -> f64 {
        self.type_a.feature_scale().min(self.type_b.feature_scale())
    }
}

/// Expected tangent index shift of (φ_n, dφ_n) on the piece (u₀, u₁).
pub fn phi_shift(u0: u64, u1: u64, k: u64) -> u64 {
    if u0 % 2 == 0 {
        u1 % k
    } else {
        0
    }
}

/// Expected tangent index shift of (Φ_n, dΦ_n) on the piece (u₀, u₁):
/// +u₁ when the point starts in an odd half-column (φ_n applied after the
/// rotation), −u₁ when it starts in an even one (φ_n⁻¹ applied first).
pub fn big_phi_shift(u0: u64, u1: u64, k: u64) -> u64 {
    if u0 % 2 == 1 {
        u1 % k
    } else {
        (k - u1 % k) % k
    }
}

#[derive(Clone, Debug)]
pub struct AssembledStage {
    pub stage: StageParams,
    pub alpha_next: Rational,
    pub mixing: MixingTime,
    pub shear: Arc<ShearMap>,
    pub phi_map: Arc<PhiMap>,
    pub g: MapExpr,
    pub phi: MapExpr,
    pub h: MapExpr,
    pub big_h: MapExpr,
    pub f: MapExpr,
    pub big_phi: MapExpr,
}

impl AssembledStage {
    /// f_n^m = H_n∘R_{m·α_{n+1}}∘H_n⁻¹.
    pub fn f_power(&self, m: &BigInt) -> MapExpr {
        let rot = MapExpr::rotation(&self.alpha_next * from_int(m));
        MapExpr::chain(vec![self.big_h.clone(), rot, self.big_h.inverse()])
    }

    /// Builds the stage with α_{n+1} and m_n taken from the scheduler.
    pub fn build(stage: &StageParams, prev: Option<&AssembledStage>) -> Result<Self> {
        let (alpha_next, q_next, p_next) = next_alpha(stage);
        let m = mixing_time(&stage.q, &q_next, &p_next)?;
        assemble_stage(stage, &alpha_next, &m, prev)
    }
}

pub fn assemble_stage(
    stage: &StageParams,
    alpha_next: &Rational,
    m: &MixingTime,
    prev: Option<&AssembledStage>,
) -> Result<AssembledStage> {
    let (_, q_next, _) = next_alpha(stage);
    if alpha_next.denom() != &q_next {
        return Err(Error::InconsistentParams {
            expected: q_next.to_string(),
            got: fmt_rational(alpha_next),
        });
    }
    let shear = Arc::new(ShearMap::for_stage(stage)?);
    let phi_map = Arc::new(PhiMap::for_stage(stage)?);
    let g = MapExpr::from_arc(shear.clone());
    let phi = MapExpr::from_arc(phi_map.clone());
    let h = MapExpr::compose(g.clone(), phi.clone());
    let big_h = match prev {
        Some(p) => MapExpr::compose(p.big_h.clone(), h.clone()),
        None => h.clone(),
    };
    big_h.check_resolution()?;
    let f = MapExpr::chain(vec![big_h.clone(), MapExpr::rotation(alpha_next.clone()), big_h.inverse()]);
    let rot_m = MapExpr::rotation(alpha_next * from_int(&m.m));
    let big_phi = MapExpr::chain(vec![phi.clone(), rot_m, phi.inverse()]);
    Ok(AssembledStage {
        stage: stage.clone(),
        alpha_next: alpha_next.clone(),
        mixing: m.clone(),
        shear,
        phi_map,
        g,
        phi,
        h,
        big_h,
        f,
        big_phi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::schedule::stage;

    fn toy() -> AssembledStage {
        let s = stage(1, 2, 4, 2, 1, ratio(3, 8)).unwrap();
        AssembledStage::build(&s, None).unwrap()
    }

    #[test]
    fn odd_half_column_is_fixed() {
        let a = toy();
        let p = TorusPoint::new(0.3, 0.6);
        let r = a.phi.eval_jet(p);
        assert_eq!(r.jet.point, p);
        assert!(r.is_good());
    }

    #[test]
    fn first_stage_big_h_is_h() {
        let a = toy();
        assert_eq!(a.big_h.describe(), a.h.describe());
        assert_eq!(a.alpha_next, ratio(17, 32));
        assert_eq!(a.mixing.m, BigInt::from(7));
    }

    #[test]
    fn inconsistent_alpha_rejected() {
        let s = stage(1, 2, 4, 2, 1, ratio(3, 8)).unwrap();
        let (_, q, p) = next_alpha(&s);
        let m = mixing_time(&s.q, &q, &p).unwrap();
        assert!(matches!(
            assemble_stage(&s, &ratio(1, 3), &m, None),
            Err(Error::InconsistentParams { .. })
        ));
    }

    #[test]
    fn shift_law_signs() {
        assert_eq!(phi_shift(0, 1, 2), 1);
        assert_eq!(phi_shift(1, 1, 2), 0);
        assert_eq!(big_phi_shift(0, 1, 3), 2);
        assert_eq!(big_phi_shift(1, 1, 3), 1);
    }
}

//! i_n: in every 1/a_n square a radial rotation about the square center by
//! ω(s), with ω = β_l on the plateau disc s ≤ R₁ and ω = 0 for s ≥ R₂.
//! β_l = (l mod k)·π/k where l is the 1/(2kq) column index.

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::map::{TorusMap, MIN_FLOAT_WIDTH};
use crate::rational::Rational;
use crate::schedule::StageParams;
use crate::step::{rho, rho_d1};
use crate::torus::{rotation_matrix, Mat2, PartialMapResult, Tag, TorusPoint};

/// Which points count as GOOD.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GoodPolicy {
    /// Plateau disc or the identity region outside R₂.
    PlateauOrIdentity,
    /// Plateau disc only (where the rotation law holds).
    PlateauOnly,
}

#[derive(Clone, Debug)]
pub struct TypeBMap {
    pub rot_cols: u64,
    pub rot_cells: u64,
    pub rot_grid: u64,
    pub rot_eps: Rational,
    pub k: u64,
    /// R₁ and R₂ as fractions of the cell width.
    pub r1: f64,
    pub r2: f64,
    pub policy: GoodPolicy,
    cells_per_col: u64,
}

pub const DEFAULT_R1: f64 = 0.42;
pub const DEFAULT_R2: f64 = 0.48;

impl TypeBMap {
    pub fn for_stage(stage: &StageParams, r1: f64, r2: f64, policy: GoodPolicy) -> Result<Self> {
        if !(0.0 < r1 && r1 < r2 && r2 <= 0.5) {
            return Err(Error::InvalidArgument(format!("need 0 < R1 < R2 <= 1/2, got {r1}, {r2}")));
        }
        let big = |what: &str| Error::NumericUnderflow(format!("{what} exceeds 64 bits"));
        let rot_cols = stage.rot_cols().to_u64().ok_or_else(|| big("rot_cols"))?;
        let rot_cells = stage.rot_cells().to_u64().ok_or_else(|| big("rot_cells"))?;
        let width = 1.0 / rot_cells as f64;
        if width * (r2 - r1) < MIN_FLOAT_WIDTH || rot_cells as f64 > 2f64.powi(52) {
            return Err(Error::NumericUnderflow(format!("type B cell width {width:e} too small")));
        }
        Ok(TypeBMap {
            rot_cols,
            rot_cells,
            rot_grid: stage.rot_grid().to_u64().ok_or_else(|| big("rot_grid"))?,
            rot_eps: stage.rot_eps().clone(),
            k: stage.k,
            r1,
            r2,
            policy,
            cells_per_col: rot_cells / rot_cols,
        })
    }

    pub fn with_policy(mut self, policy: GoodPolicy) -> Self {
        self.policy = policy;
        self
    }

    /// Rotation angle of the plateau of the column containing θ.
    pub fn beta(&self, theta: f64) -> f64 {
        let cu = ((theta * self.rot_cells as f64).floor() as u64).min(self.rot_cells - 1);
        let l = cu / self.cells_per_col;
        (l % self.k) as f64 * PI / self.k as f64
    }

    /// ω and dω/ds at the normalized radius s (fraction of cell width).
    fn omega(&self, beta: f64, s: f64) -> (f64, f64) {
        if s <= self.r1 {
            (beta, 0.0)
        } else if s >= self.r2 {
            (0.0, 0.0)
        } else {
            let span = self.r2 - self.r1;
            let x = (2.0 * s - self.r1 - self.r2) / span;
            (beta * (1.0 - rho(x)), -beta * rho_d1(x) * 2.0 / span)
        }
    }

    fn eval(&self, p: TorusPoint, sign: f64) -> PartialMapResult {
        let a = self.rot_cells as f64;
        let w = 1.0 / a;
        let cu = ((p.theta * a).floor()).min(a - 1.0);
        let cv = ((p.r * a).floor()).min(a - 1.0);
        let (cx, cy) = ((cu + 0.5) * w, (cv + 0.5) * w);
        let (dx, dy) = (p.theta - cx, p.r - cy);
        let dist = dx.hypot(dy);
        let s = dist / w;
        let beta = self.beta(p.theta);
        let (om, dom_ds) = self.omega(beta, s);
        let om = sign * om;
        let rot = rotation_matrix(om);
        let img = rot * nalgebra::Vector2::new(dx, dy);
        let mut deriv = rot;
        if dom_ds != 0.0 && dist > 0.0 {
            // D = R(ω)[I + ω'(|d|)·(J d) dᵀ/|d|], ω'(|d|) = dω/ds / w
            let k = sign * dom_ds / w / dist;
            let jd = nalgebra::Vector2::new(-dy, dx);
            let outer = jd * nalgebra::RowVector2::new(dx, dy) * k;
            deriv = rot * (Mat2::identity() + outer);
        }
        let good = match self.policy {
            GoodPolicy::PlateauOnly => s <= self.r1,
            GoodPolicy::PlateauOrIdentity => s <= self.r1 || s >= self.r2,
        };
        PartialMapResult::good(TorusPoint::new(cx + img.x, cy + img.y), deriv)
            .with_tag(if good { Tag::Good } else { Tag::Transition })
    }

    /// Fraction of each cell covered by the plateau disc, π·R₁².
    pub fn plateau_fraction(&self) -> f64 {
        PI * self.r1 * self.r1
    }
}

impl TorusMap for TypeBMap {
    fn smooth_everywhere(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        format!("i[cols={},cells={}]", self.rot_cols, self.rot_cells)
    }
    fn forward(&self, p: TorusPoint) -> PartialMapResult {
        self.eval(p, 1.0)
    }
    fn backward(&self, p: TorusPoint) -> PartialMapResult {
        self.eval(p, -1.0)
    }
    fn feature_scale(&self) -> f64 {
        (self.r2 - self.r1) / self.rot_cells as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::schedule::stage;

    fn toy_b() -> TypeBMap {
        let s = stage(1, 2, 4, 1, 0, ratio(3, 8)).unwrap();
        TypeBMap::for_stage(&s, DEFAULT_R1, DEFAULT_R2, GoodPolicy::PlateauOrIdentity).unwrap()
    }

    #[test]
    fn center_is_fixed_with_plateau_rotation() {
        let m = toy_b();
        let a = m.rot_cells as f64;
        let c = TorusPoint::new((1228.0 + 0.5) / a, (77.0 + 0.5) / a);
        let r = m.forward(c);
        assert!(r.jet.point.dist(&c) < 1e-15);
        let expect = Mat2::new(0.0, -1.0, 1.0, 0.0);
        assert!((r.jet.deriv - expect).amax() < 1e-15);
        assert!(r.is_good());
    }

    #[test]
    fn determinant_one_in_transition() {
        let m = toy_b();
        let w = 1.0 / m.rot_cells as f64;
        let base = TorusPoint::new(1228.5 * w, 77.5 * w);
        for i in 0..50 {
            let ang = i as f64 * 0.37;
            let s = 0.42 + 0.06 * (i as f64 + 0.5) / 50.0;
            let p = base.shifted(s * w * ang.cos(), s * w * ang.sin());
            let r = m.forward(p);
            assert!((r.jet.deriv.determinant() - 1.0).abs() < 1e-9);
            let back = m.backward(r.jet.point);
            assert!(back.jet.point.dist(&p) < 1e-15);
        }
    }

    #[test]
    fn identity_outside_r2() {
        let m = toy_b();
        let w = 1.0 / m.rot_cells as f64;
        let p = TorusPoint::new(1228.0 * w + 0.01 * w, 77.0 * w + 0.01 * w);
        let r = m.forward(p);
        assert_eq!(r.jet.point, p);
        assert_eq!(r.jet.deriv, Mat2::identity());
        assert!(r.is_good());
    }
}

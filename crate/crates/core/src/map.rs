//! Torus maps: the primitive trait, composition trees, rotations and
//! finite-difference validation of derivative transport.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rational::{self, fmt_rational, Rational};
use crate::shear::ShearMap;
use crate::torus::{centered, projectivize_unchecked, Mat2, PartialMapResult, ProjPoint, Tag, TorusPoint};

/// Below this cell width floating point indexing is refused.
pub const MIN_FLOAT_WIDTH: f64 = 1.0 / (1u64 << 40) as f64;

/// A primitive map of the torus with closed forms on a good domain.
pub trait TorusMap: Send + Sync + fmt::Debug {
    fn name(&self) -> String;
    fn forward(&self, p: TorusPoint) -> PartialMapResult;
    fn backward(&self, p: TorusPoint) -> PartialMapResult;
    fn has_exact_inverse(&self) -> bool {
        true
    }
    /// Smallest geometric length the map resolves (cell or collar width).
    fn feature_scale(&self) -> f64 {
        1.0
    }
    fn as_shear(&self) -> Option<&ShearMap> {
        None
    }
    /// True when the returned jet is exact at every point, TRANSITION
    /// included (as opposed to a fallback outside the good domain).
    fn smooth_everywhere(&self) -> bool {
        false
    }
}

/// Composition tree. `Compose(vec![A, B, C])` is A∘B∘C (C applied first).
#[derive(Clone)]
pub enum MapExpr {
    Identity,
    Prim { map: Arc<dyn TorusMap>, inverse: bool },
    Compose(Vec<MapExpr>),
}

impl fmt::Debug for MapExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

impl MapExpr {
    pub fn prim<M: TorusMap + 'static>(m: M) -> Self {
        MapExpr::Prim { map: Arc::new(m), inverse: false }
    }

    pub fn from_arc(map: Arc<dyn TorusMap>) -> Self {
        MapExpr::Prim { map, inverse: false }
    }

    pub fn rotation(alpha: Rational) -> Self {
        MapExpr::prim(Rotation::new(alpha))
    }

    /// `outer ∘ inner`.
    pub fn compose(outer: MapExpr, inner: MapExpr) -> Self {
        MapExpr::Compose(vec![outer, inner])
    }

    pub fn chain(parts: Vec<MapExpr>) -> Self {
        MapExpr::Compose(parts)
    }

    pub fn inverse(&self) -> MapExpr {
        match self {
            MapExpr::Identity => MapExpr::Identity,
            MapExpr::Prim { map, inverse } => MapExpr::Prim { map: map.clone(), inverse: !inverse },
            MapExpr::Compose(parts) => MapExpr::Compose(parts.iter().rev().map(|e| e.inverse()).collect()),
        }
    }

    /// Image jet, derivative by the chain rule; GOOD iff every factor was
    /// evaluated in its good domain.
    pub fn eval_jet(&self, p: TorusPoint) -> PartialMapResult {
        match self {
            MapExpr::Identity => PartialMapResult::good(p, Mat2::identity()),
            MapExpr::Prim { map, inverse } => {
                if *inverse {
                    map.backward(p)
                } else {
                    map.forward(p)
                }
            }
            MapExpr::Compose(parts) => {
                let mut point = p;
                let mut deriv = Mat2::identity();
                let mut tag = Tag::Good;
                for part in parts.iter().rev() {
                    let r = part.eval_jet(point);
                    point = r.jet.point;
                    deriv = r.jet.deriv * deriv;
                    tag = tag.and(r.tag);
                }
                PartialMapResult::good(point, deriv).with_tag(tag)
            }
        }
    }

    pub fn eval(&self, p: TorusPoint) -> TorusPoint {
        self.eval_jet(p).jet.point
    }

    pub fn is_good(&self, p: TorusPoint) -> bool {
        self.eval_jet(p).is_good()
    }

    /// Action of (F, dF) on the projectivized bundle.
    pub fn eval_proj(&self, pp: ProjPoint) -> (ProjPoint, Tag) {
        let r = self.eval_jet(pp.point);
        let t = projectivize_unchecked(&r.jet.deriv, pp.t);
        (ProjPoint { point: r.jet.point, t }, r.tag)
    }

    pub fn has_exact_inverse(&self) -> bool {
        match self {
            MapExpr::Identity => true,
            MapExpr::Prim { map, .. } => map.has_exact_inverse(),
            MapExpr::Compose(parts) => parts.iter().all(|p| p.has_exact_inverse()),
        }
    }

    pub fn smooth_everywhere(&self) -> bool {
        match self {
            MapExpr::Identity => true,
            MapExpr::Prim { map, .. } => map.smooth_everywhere(),
            MapExpr::Compose(parts) => parts.iter().all(|p| p.smooth_everywhere()),
        }
    }

    pub fn min_feature_scale(&self) -> f64 {
        match self {
            MapExpr::Identity => 1.0,
            MapExpr::Prim { map, .. } => map.feature_scale(),
            MapExpr::Compose(parts) => parts.iter().map(|p| p.min_feature_scale()).fold(1.0, f64::min),
        }
    }

    /// Fails with NUMERIC_UNDERFLOW when some factor resolves cells finer
    /// than 2⁻⁴⁰.
    pub fn check_resolution(&self) -> Result<()> {
        let w = self.min_feature_scale();
        if w < MIN_FLOAT_WIDTH {
            return Err(Error::NumericUnderflow(format!("{} has cell width {w:e}", self.describe())));
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        match self {
            MapExpr::Identity => "id".into(),
            MapExpr::Prim { map, inverse } => {
                if *inverse {
                    format!("{}^-1", map.name())
                } else {
                    map.name()
                }
            }
            MapExpr::Compose(parts) => {
                let inner: Vec<String> = parts.iter().map(|p| p.describe()).collect();
                format!("({})", inner.join(" o "))
            }
        }
    }

    /// The single shear primitive this expression consists of, if any.
    pub fn as_shear(&self) -> Option<(&ShearMap, bool)> {
        match self {
            MapExpr::Prim { map, inverse } => map.as_shear().map(|s| (s, *inverse)),
            _ => None,
        }
    }
}

impl PartialMapResult {
    pub fn with_tag(mut self, tag: Tag) -> Self {
        self.tag = tag;
        self
    }
}

/// R_α(θ, r) = (θ + α, r).
#[derive(Clone, Debug)]
pub struct Rotation {
    pub alpha: Rational,
    value: f64,
}

impl Rotation {
    pub fn new(alpha: Rational) -> Self {
        let value = rational::to_f64(&rational::frac(&alpha));
        Rotation { alpha, value }
    }
}

pub fn rotate(alpha: &Rational, p: TorusPoint) -> TorusPoint {
    Rotation::new(alpha.clone()).forward(p).jet.point
}

impl TorusMap for Rotation {
    fn smooth_everywhere(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        format!("R[{}]", fmt_rational(&self.alpha))
    }
    fn forward(&self, p: TorusPoint) -> PartialMapResult {
        PartialMapResult::good(TorusPoint::new(p.theta + self.value, p.r), Mat2::identity())
    }
    fn backward(&self, p: TorusPoint) -> PartialMapResult {
        PartialMapResult::good(TorusPoint::new(p.theta - self.value, p.r), Mat2::identity())
    }
}

/// Linear automorphism of the torus given by an integer matrix of det 1.
#[derive(Clone, Debug)]
pub struct LinearAutomorphism {
    pub m: [[i64; 2]; 2],
}

impl LinearAutomorphism {
    pub fn new(m: [[i64; 2]; 2]) -> Result<Self> {
        if m[0][0] * m[1][1] - m[0][1] * m[1][0] != 1 {
            return Err(Error::InvalidArgument("automorphism must have determinant 1".into()));
        }
        Ok(LinearAutomorphism { m })
    }
    /// (θ, r) ↦ (θ + r, r).
    pub fn unit_shear() -> Self {
        LinearAutomorphism { m: [[1, 1], [0, 1]] }
    }
    fn matrix(&self) -> Mat2 {
        let m = self.m;
        Mat2::new(m[0][0] as f64, m[0][1] as f64, m[1][0] as f64, m[1][1] as f64)
    }
}

impl TorusMap for LinearAutomorphism {
    fn smooth_everywhere(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        format!("A{:?}", self.m)
    }
    fn forward(&self, p: TorusPoint) -> PartialMapResult {
        let a = self.matrix();
        let x = a * nalgebra::Vector2::new(p.theta, p.r);
        PartialMapResult::good(TorusPoint::new(x.x, x.y), a)
    }
    fn backward(&self, p: TorusPoint) -> PartialMapResult {
        let inv = self.matrix().try_inverse().expect("det 1");
        let x = inv * nalgebra::Vector2::new(p.theta, p.r);
        PartialMapResult::good(TorusPoint::new(x.x, x.y), inv)
    }
}

/// Central finite differences of the lifted map against its analytic
/// derivative. Returns max_ij |A_ij − F_ij| / max(1, max_ij |A_ij|).
/// The point and the stencil points p ± h·e_i, p ± 2h·e_i must be GOOD.
pub fn jacobian_fd_check(expr: &MapExpr, p: TorusPoint, h: f64) -> Result<f64> {
    let base = expr.eval_jet(p);
    let offsets = [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h), (2.0 * h, 0.0), (-2.0 * h, 0.0), (0.0, 2.0 * h), (0.0, -2.0 * h)];
    if !base.is_good() || offsets.iter().any(|&(a, b)| !expr.is_good(p.shifted(a, b))) {
        return Err(Error::InTransition);
    }
    let mut fd = Mat2::zeros();
    for j in 0..2 {
        let (dp, dm) = if j == 0 { ((h, 0.0), (-h, 0.0)) } else { ((0.0, h), (0.0, -h)) };
        let fp = expr.eval(p.shifted(dp.0, dp.1));
        let fm = expr.eval(p.shifted(dm.0, dm.1));
        fd[(0, j)] = centered(fp.theta - fm.theta) / (2.0 * h);
        fd[(1, j)] = centered(fp.r - fm.r) / (2.0 * h);
    }
    let a = base.jet.deriv;
    let scale = a.amax().max(1.0);
    Ok((a - fd).amax() / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn rotation_examples() {
        assert_eq!(rotate(&ratio(0, 1), TorusPoint::new(0.3, 0.7)), TorusPoint::new(0.3, 0.7));
        assert_eq!(rotate(&ratio(1, 2), TorusPoint::new(0.75, 0.2)), TorusPoint::new(0.25, 0.2));
        let r = Rotation::new(ratio(17, 32)).forward(TorusPoint::new(0.0, 0.0));
        assert_eq!(r.jet.point.theta, 17.0 / 32.0);
        assert_eq!(r.jet.deriv, Mat2::identity());
    }

    #[test]
    fn rotations_compose() {
        let q = MapExpr::rotation(ratio(1, 4));
        let e = MapExpr::compose(q.clone(), q);
        let r = e.eval_jet(TorusPoint::new(0.0, 0.0));
        assert_eq!(r.jet.point, TorusPoint::new(0.5, 0.0));
        assert_eq!(r.jet.deriv, Mat2::identity());
        assert!(r.is_good());
    }

    #[test]
    fn inverse_of_composition() {
        let e = MapExpr::chain(vec![
            MapExpr::rotation(ratio(1, 3)),
            MapExpr::prim(LinearAutomorphism::unit_shear()),
        ]);
        let p = TorusPoint::new(0.2, 0.45);
        let back = e.inverse().eval(e.eval(p));
        assert!(back.dist(&p) < 1e-14);
    }

    #[test]
    fn fd_on_rotation_is_exact() {
        let e = MapExpr::rotation(ratio(3, 7));
        let err = jacobian_fd_check(&e, TorusPoint::new(0.1, 0.9), 1e-5).unwrap();
        assert!(err < 1e-9);
    }
}

//! Points on the torus and on its projectivized tangent bundle.

use nalgebra::{Matrix2, Vector2};
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type Mat2 = Matrix2<f64>;

/// Reduces `x` modulo 1 into `[0, 1)`.
#[inline]
pub fn wrap(x: f64) -> f64 {
    let y = x - x.floor();
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

/// Signed representative of `x` modulo 1 in `[-1/2, 1/2)`.
#[inline]
pub fn centered(x: f64) -> f64 {
    let y = wrap(x + 0.5) - 0.5;
    y
}

/// Distance on ℝ/ℤ.
#[inline]
pub fn circle_dist(a: f64, b: f64) -> f64 {
    centered(a - b).abs()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TorusPoint {
    pub theta: f64,
    pub r: f64,
}

impl TorusPoint {
    pub fn new(theta: f64, r: f64) -> Self {
        TorusPoint { theta: wrap(theta), r: wrap(r) }
    }

    /// Flat torus distance (min over integer translates).
    pub fn dist(&self, other: &TorusPoint) -> f64 {
        circle_dist(self.theta, other.theta).hypot(circle_dist(self.r, other.r))
    }

    /// Translates by a small lifted displacement.
    pub fn shifted(&self, dtheta: f64, dr: f64) -> Self {
        TorusPoint::new(self.theta + dtheta, self.r + dr)
    }
}

/// A point with a normalized fiber coordinate t = φ/π ∈ [0, 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProjPoint {
    pub point: TorusPoint,
    pub t: f64,
}

impl ProjPoint {
    pub fn new(theta: f64, r: f64, t: f64) -> Self {
        ProjPoint { point: TorusPoint::new(theta, r), t: wrap(t) }
    }

    /// Index j of the tangent interval T_j = [j/k, (j+1)/k] containing t.
    pub fn tangent_index(&self, k: u64) -> u64 {
        ((self.t * k as f64).floor() as u64).min(k - 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Tag {
    Good,
    Transition,
}

impl Tag {
    pub fn and(self, other: Tag) -> Tag {
        if self == Tag::Good && other == Tag::Good {
            Tag::Good
        } else {
            Tag::Transition
        }
    }
    pub fn is_good(self) -> bool {
        self == Tag::Good
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub point: TorusPoint,
    pub deriv: Mat2,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartialMapResult {
    pub jet: Jet,
    pub tag: Tag,
}

impl PartialMapResult {
    pub fn good(point: TorusPoint, deriv: Mat2) -> Self {
        PartialMapResult { jet: Jet { point, deriv }, tag: Tag::Good }
    }
    pub fn point(&self) -> TorusPoint {
        self.jet.point
    }
    pub fn deriv(&self) -> Mat2 {
        self.jet.deriv
    }
    pub fn is_good(&self) -> bool {
        self.tag.is_good()
    }
}

pub fn rotation_matrix(beta: f64) -> Mat2 {
    let (s, c) = beta.sin_cos();
    Mat2::new(c, -s, s, c)
}

/// Action of a derivative on the normalized fiber coordinate:
/// v = (cos πt, sin πt), w = J·v, result arg(w)/π mod 1.
pub fn projectivize(deriv: &Mat2, t: f64) -> Result<f64> {
    let det = deriv.determinant();
    if det.abs() < 1e-12 {
        return Err(Error::SingularDeriv(det));
    }
    Ok(projectivize_unchecked(deriv, t))
}

#[inline]
pub fn projectivize_unchecked(deriv: &Mat2, t: f64) -> f64 {
    let (s, c) = (PI * t).sin_cos();
    let w = deriv * Vector2::new(c, s);
    wrap(w.y.atan2(w.x) / PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_representative() {
        assert_eq!(wrap(1.0), 0.0);
        assert_eq!(wrap(-0.25), 0.75);
        assert_eq!(wrap(-1e-18), 0.0);
        assert!(wrap(-1e-18) < 1.0);
        assert_eq!(centered(0.75), -0.25);
    }

    #[test]
    fn projectivize_examples() {
        let id = Mat2::identity();
        assert!((projectivize(&id, 0.3).unwrap() - 0.3).abs() < 1e-15);
        let rot = rotation_matrix(PI / 4.0);
        assert!((projectivize(&rot, 0.5).unwrap() - 0.75).abs() < 1e-15);
        let shear = Mat2::new(1.0, 1.0, 0.0, 1.0);
        assert!((projectivize(&shear, 0.5).unwrap() - 0.25).abs() < 1e-15);
        assert!(matches!(projectivize(&Mat2::zeros(), 0.1), Err(Error::SingularDeriv(_))));
    }

    #[test]
    fn torus_distance_wraps() {
        let a = TorusPoint::new(0.01, 0.99);
        let b = TorusPoint::new(0.99, 0.01);
        assert!((a.dist(&b) - (0.02f64).hypot(0.02)).abs() < 1e-15);
    }
}

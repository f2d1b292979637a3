//! The smoothed staircase ψ and the shear g(θ, r) = (θ + ψ(r), r).

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::map::TorusMap;
use crate::rational::{self, fmt_rational, Rational};
use crate::schedule::StageParams;
use crate::step::{rho, rho_d1, rho_derivs};
use crate::torus::{Mat2, PartialMapResult, Tag, TorusPoint};

/// ψ(x) = (b/a)·Σ_i ρ((a·x − i)/(2ε)) normalized so that ψ = b·j/a on the
/// plateau [(j+2ε)/a, (j+1−2ε)/a]. The jump at x ≡ 0 is smoothed like the
/// interior ones, so ψ(x+1) = ψ(x) + b and the shear is continuous on the
/// torus.
#[derive(Clone, Debug, PartialEq)]
pub struct StepProfile {
    pub a: u64,
    pub b: u64,
    pub eps: Rational,
    eps_f: f64,
}

impl StepProfile {
    pub fn new(a: u64, b: u64, eps: Rational) -> Result<Self> {
        if a == 0 {
            return Err(Error::InvalidArgument("a must be positive".into()));
        }
        let inv = Rational::from_integer(BigInt::from(1)) / (&eps * Rational::from_integer(BigInt::from(2)));
        if !inv.is_integer() || inv <= Rational::from_integer(BigInt::from(2)) {
            return Err(Error::InvalidArgument(format!(
                "eps = {} must satisfy 1/(2 eps) integral and eps < 1/4",
                fmt_rational(&eps)
            )));
        }
        let eps_f = rational::to_f64(&eps);
        Ok(StepProfile { a, b, eps, eps_f })
    }

    pub fn eps_f64(&self) -> f64 {
        self.eps_f
    }

    /// Nearest integer i0 to a·x and the scaled offset (a·x − i0)/(2ε) when
    /// x lies in a transition collar.
    #[inline]
    fn transition(&self, x: f64) -> Option<(f64, f64)> {
        let y = self.a as f64 * x;
        let i0 = y.round();
        let off = y - i0;
        if off.abs() < 2.0 * self.eps_f {
            Some((i0, off / (2.0 * self.eps_f)))
        } else {
            None
        }
    }

    /// Plateau index j with (j+2ε)/a ≤ x ≤ (j+1−2ε)/a, if any.
    pub fn plateau_index(&self, x: f64) -> Option<i64> {
        match self.transition(x) {
            Some(_) => None,
            None => Some((self.a as f64 * x).floor() as i64),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let scale = self.b as f64 / self.a as f64;
        match self.transition(x) {
            Some((i0, s)) => scale * (i0 - 1.0 + rho(s)),
            None => {
                let j = (self.a as f64 * x).floor();
                (self.b as f64 * j) / self.a as f64
            }
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        match self.transition(x) {
            Some((_, s)) => self.b as f64 / (2.0 * self.eps_f) * rho_d1(s),
            None => 0.0,
        }
    }

    /// [ψ(x), ψ'(x), …, ψ^{(order)}(x)].
    pub fn derivs(&self, x: f64, order: usize) -> Vec<f64> {
        let mut out = vec![0.0; order + 1];
        out[0] = self.eval(x);
        if let Some((_, s)) = self.transition(x) {
            let d = rho_derivs(s, order);
            let scale = self.a as f64 / (2.0 * self.eps_f);
            let mut f = self.b as f64 / self.a as f64;
            for k in 1..=order {
                f *= scale;
                out[k] = f * d[k];
            }
        }
        out
    }

    /// Exact plateau value b·j/a.
    pub fn plateau_value(&self, j: i64) -> Rational {
        Rational::new(BigInt::from(self.b) * BigInt::from(j), BigInt::from(self.a))
    }

    /// Exact ψ on rational plateau points; `None` inside a collar.
    pub fn eval_exact(&self, x: &Rational) -> Option<Rational> {
        let a = Rational::from_integer(BigInt::from(self.a));
        let y = x * &a;
        let j = y.floor();
        let off = &y - &j;
        let two_eps = &self.eps * Rational::from_integer(BigInt::from(2));
        let one = Rational::from_integer(BigInt::from(1));
        if off >= two_eps && off <= &one - &two_eps {
            Some(self.plateau_value(j.to_integer().to_i64()?))
        } else {
            None
        }
    }

    /// Width of one transition collar, 4ε/a.
    pub fn collar_width(&self) -> f64 {
        4.0 * self.eps_f / self.a as f64
    }
}

/// g(θ, r) = (θ + ψ(r), r).
#[derive(Clone, Debug)]
pub struct ShearMap {
    pub profile: StepProfile,
    pub q: u64,
}

impl ShearMap {
    pub fn new(profile: StepProfile, q: u64) -> Self {
        ShearMap { profile, q }
    }

    /// g_n with a = k⁵, b = ⌊n q^σ⌋, ε = 1/(2n⁵k¹⁰).
    pub fn for_stage(stage: &StageParams) -> Result<Self> {
        let a = stage
            .shear_a()
            .to_u64()
            .ok_or_else(|| Error::NumericUnderflow("k^5 exceeds 64 bits".into()))?;
        let profile = StepProfile::new(a, stage.shear_b_u64()?, stage.shear_eps().clone())?;
        Ok(ShearMap::new(profile, stage.q_u64()?))
    }

    fn jet(&self, p: TorusPoint, sign: f64) -> PartialMapResult {
        let psi = self.profile.eval(p.r);
        let d = self.profile.deriv(p.r);
        let tag = if self.profile.plateau_index(p.r).is_some() { Tag::Good } else { Tag::Transition };
        PartialMapResult::good(TorusPoint::new(p.theta + sign * psi, p.r), Mat2::new(1.0, sign * d, 0.0, 1.0))
            .with_tag(tag)
    }
}

impl TorusMap for ShearMap {
    fn smooth_everywhere(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        format!("g[a={},b={},eps={}]", self.profile.a, self.profile.b, fmt_rational(&self.profile.eps))
    }
    fn forward(&self, p: TorusPoint) -> PartialMapResult {
        self.jet(p, 1.0)
    }
    fn backward(&self, p: TorusPoint) -> PartialMapResult {
        self.jet(p, -1.0)
    }
    fn feature_scale(&self) -> f64 {
        self.profile.collar_width()
    }
    fn as_shear(&self) -> Option<&ShearMap> {
        Some(self)
    }
}

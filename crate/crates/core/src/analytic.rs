//! Trigonometric approximation of the shear profile, entire shear maps,
//! complex-strip norm bounds and C^r distance reports.
//!
//! The staircase ψ satisfies ψ(x+1) = ψ(x) + b, so the approximated function
//! is the periodic part P(x) = ψ(x) − b·x and the analytic shear is
//! (θ, r) ↦ (θ + b·r + P_N(r), r).

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::map::{MapExpr, TorusMap};
use crate::rational::{serde_rational, to_f64, Rational};
use crate::shear::StepProfile;
use crate::torus::{centered, Mat2, PartialMapResult, TorusPoint};

/// f(x) = c₀ + Σ_{m=1}^{N} c_m cos(2πmx) + s_m sin(2πmx).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrigProfile {
    pub degree: usize,
    pub c: Vec<f64>,
    pub s: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Scheme {
    Fejer,
    Truncation,
}

impl TrigProfile {
    pub fn new(c: Vec<f64>, s: Vec<f64>) -> Result<Self> {
        if c.is_empty() || c.len() != s.len() {
            return Err(Error::InvalidArgument("need c and s of equal nonzero length".into()));
        }
        Ok(TrigProfile { degree: c.len() - 1, c, s })
    }

    pub fn constant(c0: f64) -> Self {
        TrigProfile { degree: 0, c: vec![c0], s: vec![0.0] }
    }

    /// Value (order 0) or derivative of the given order at x.
    pub fn eval_deriv(&self, x: f64, order: u32) -> f64 {
        if order == 0 {
            return self.eval(x);
        }
        let mut acc = 0.0;
        for m in 1..=self.degree {
            let w = 2.0 * PI * m as f64;
            let (sn, cs) = (w * x).sin_cos();
            let f = w.powi(order as i32);
            // d^o/dx^o of (c cos + s sin) cycles with period 4
            let (a, b) = match order % 4 {
                0 => (cs, sn),
                1 => (-sn, cs),
                2 => (-cs, -sn),
                _ => (sn, -cs),
            };
            acc += f * (self.c[m] * a + self.s[m] * b);
        }
        acc
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = self.c[0];
        for m in 1..=self.degree {
            let (sn, cs) = (2.0 * PI * m as f64 * x).sin_cos();
            acc += self.c[m] * cs + self.s[m] * sn;
        }
        acc
    }

    /// Entire extension evaluated at a complex argument.
    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(self.c[0], 0.0);
        for m in 1..=self.degree {
            let w = z * (2.0 * PI * m as f64);
            acc += w.cos() * self.c[m] + w.sin() * self.s[m];
        }
        acc
    }

    /// Σ_m (|c_m| + |s_m|)·e^{2πmρ}, an upper bound for sup over |Im z| ≤ ρ.
    pub fn strip_norm(&self, rho: f64) -> Result<f64> {
        if !(rho >= 0.0) {
            return Err(Error::InvalidArgument(format!("strip width {rho} must be >= 0")));
        }
        let mut acc = self.c[0].abs();
        for m in 1..=self.degree {
            let g = (2.0 * PI * m as f64 * rho).exp();
            acc += (self.c[m].abs() + self.s[m].abs()) * g;
        }
        if !acc.is_finite() {
            return Err(Error::Overflow { rho, degree: self.degree });
        }
        Ok(acc)
    }

    /// (1/q)-periodic profile: frequency m moves to q·m with amplitude /q.
    pub fn periodic_rescale(&self, q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidArgument("q must be positive".into()));
        }
        let deg = self.degree * q;
        let mut c = vec![0.0; deg + 1];
        let mut s = vec![0.0; deg + 1];
        let qf = q as f64;
        for m in 0..=self.degree {
            c[q * m] = self.c[m] / qf;
            s[q * m] = self.s[m] / qf;
        }
        Ok(TrigProfile { degree: deg, c, s })
    }

    /// Every nonzero coefficient sits at a multiple of q.
    pub fn supported_on_multiples(&self, q: usize) -> bool {
        (0..=self.degree).filter(|m| m % q != 0).all(|m| self.c[m] == 0.0 && self.s[m] == 0.0)
    }

    /// Sum of |c_m| + |s_m| over the last octave (N/2, N].
    pub fn tail_estimate(&self) -> f64 {
        (self.degree / 2 + 1..=self.degree).map(|m| self.c[m].abs() + self.s[m].abs()).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,c_m,s_m\n");
        for m in 0..=self.degree {
            out.push_str(&format!("{m},{:e},{:e}\n", self.c[m], self.s[m]));
        }
        out
    }
}

/// Trapezoid Fourier coefficients of a 1-periodic function at `nodes` nodes.
pub fn dft_coefficients(f: &(dyn Fn(f64) -> f64 + Sync), degree: usize, nodes: usize) -> (Vec<f64>, Vec<f64>) {
    let vals: Vec<f64> = (0..nodes).into_par_iter().map(|i| f(i as f64 / nodes as f64)).collect();
    let coef: Vec<(f64, f64)> = (0..=degree)
        .into_par_iter()
        .map(|m| {
            let (mut a, mut b) = (0.0, 0.0);
            // index arithmetic mod nodes keeps the phase exact
            for (i, v) in vals.iter().enumerate() {
                let ph = 2.0 * PI * ((m * i) % nodes) as f64 / nodes as f64;
                let (sn, cs) = ph.sin_cos();
                a += v * cs;
                b += v * sn;
            }
            let scale = if m == 0 { 1.0 } else { 2.0 } / nodes as f64;
            (a * scale, b * scale)
        })
        .collect();
    coef.into_iter().unzip()
}

/// Largest node count tried before reporting QUADRATURE_UNCONVERGED.
pub const MAX_NODES: usize = 1 << 22;
pub const QUADRATURE_TOL: f64 = 1e-12;

/// Coefficients of a periodic function, doubling the trapezoid node count
/// from max(8N, 1024) until the coefficients change by less than `tol`
/// relative to their largest magnitude.
pub fn converged_coefficients(
    f: &(dyn Fn(f64) -> f64 + Sync),
    degree: usize,
    tol: f64,
    start_nodes: usize,
) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let mut nodes = (8 * degree.max(1)).max(start_nodes).next_power_of_two();
    let (mut c, mut s) = dft_coefficients(f, degree, nodes);
    loop {
        let next = nodes * 2;
        if next > MAX_NODES {
            return Err(Error::QuadratureUnconverged(format!(
                "coefficients still moving at {nodes} nodes (degree {degree})"
            )));
        }
        let (c2, s2) = dft_coefficients(f, degree, next);
        let scale = c2.iter().chain(&s2).fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
        let change = c.iter().zip(&c2).chain(s.iter().zip(&s2)).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        c = c2;
        s = s2;
        nodes = next;
        if change <= tol * scale.max(1.0) {
            return Ok((c, s, nodes));
        }
    }
}

/// Node count the staircase needs to resolve its collars: at least 16
/// nodes per collar width.
pub fn profile_start_nodes(sp: &StepProfile) -> usize {
    let per_collar = (16.0 / sp.collar_width()).ceil() as usize;
    per_collar.next_power_of_two().min(MAX_NODES / 2)
}

/// Degree-N approximation of the periodic part ψ(x) − b·x.
pub fn approximate_profile(sp: &StepProfile, degree: usize, scheme: Scheme) -> Result<TrigProfile> {
    if degree == 0 {
        return Err(Error::InvalidArgument("degree must be >= 1".into()));
    }
    let b = sp.b as f64;
    let f = |x: f64| sp.eval(x) - b * x;
    let (mut c, mut s, _) = converged_coefficients(&f, degree, QUADRATURE_TOL, profile_start_nodes(sp))?;
    if scheme == Scheme::Fejer {
        for m in 1..=degree {
            let w = 1.0 - m as f64 / (degree as f64 + 1.0);
            c[m] *= w;
            s[m] *= w;
        }
    }
    TrigProfile::new(c, s)
}

/// (θ, r) ↦ (θ + b·r + P(r), r), entire and exactly area preserving.
#[derive(Clone, Debug)]
pub struct AnalyticShear {
    pub profile: TrigProfile,
    pub b: u64,
    pub q: u64,
}

impl AnalyticShear {
    pub fn new(profile: TrigProfile, b: u64, q: u64) -> Self {
        AnalyticShear { profile, b, q }
    }

    /// θ-displacement and its r-derivatives up to `order`.
    pub fn displacement_derivs(&self, r: f64, order: usize) -> Vec<f64> {
        (0..=order)
            .map(|o| {
                let lin = match o {
                    0 => self.b as f64 * r,
                    1 => self.b as f64,
                    _ => 0.0,
                };
                lin + self.profile.eval_deriv(r, o as u32)
            })
            .collect()
    }
}

impl TorusMap for AnalyticShear {
    fn smooth_everywhere(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        format!("ghat[N={},b={}]", self.profile.degree, self.b)
    }
    fn forward(&self, p: TorusPoint) -> PartialMapResult {
        let d = self.displacement_derivs(p.r, 1);
        PartialMapResult::good(TorusPoint::new(p.theta + d[0], p.r), Mat2::new(1.0, d[1], 0.0, 1.0))
    }
    fn backward(&self, p: TorusPoint) -> PartialMapResult {
        let d = self.displacement_derivs(p.r, 1);
        PartialMapResult::good(TorusPoint::new(p.theta - d[0], p.r), Mat2::new(1.0, -d[1], 0.0, 1.0))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ApproxReport {
    pub target: String,
    pub degree: usize,
    pub grid: usize,
    /// d_r for r = 0, 1, 2.
    pub distances: [f64; 3],
    pub strip_norm_bounds: Vec<(f64, Option<f64>)>,
    #[serde(with = "serde_rational")]
    pub epsilon_target: Rational,
    pub satisfied: bool,
    pub tail_estimate: f64,
}

pub const STRIP_WIDTHS: [f64; 3] = [0.001, 0.01, 0.1];

/// Grid maxima of the point distance (d₀), first derivative distance (d₁)
/// and second derivative distance (d₂) between a shear and its analytic
/// approximation. The grid is (frac(i·φ), i/G) for i < G.
pub fn distance_report(smooth: &MapExpr, analytic: &AnalyticShear, grid: usize, eps_target: &Rational) -> Result<ApproxReport> {
    if grid < 64 {
        return Err(Error::InvalidArgument(format!("grid {grid} < 64")));
    }
    let (shear, inverse) = smooth
        .as_shear()
        .ok_or_else(|| Error::InvalidArgument("distance_report needs a shear map".into()))?;
    if inverse {
        return Err(Error::InvalidArgument("distance_report needs the forward shear".into()));
    }
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    // the r axis must resolve the collars, where all the variation sits
    let nodes = grid.max((32.0 / shear.profile.collar_width()).ceil() as usize).min(MAX_NODES);
    let maxima = (0..nodes)
        .into_par_iter()
        .map(|i| {
            let theta = (i as f64 * golden).fract();
            let r = (i as f64 + 0.5) / nodes as f64;
            let exact = shear.profile.derivs(r, 2);
            let approx = analytic.displacement_derivs(r, 2);
            let d0 = {
                let a = TorusPoint::new(theta + exact[0], r);
                let b = TorusPoint::new(theta + approx[0], r);
                a.dist(&b)
            };
            // inverse maps share these magnitudes (same r, negated entries)
            [d0, (exact[1] - approx[1]).abs(), (exact[2] - approx[2]).abs()]
        })
        .reduce(|| [0.0; 3], |a, b| [a[0].max(b[0]), a[1].max(b[1]), a[2].max(b[2])]);
    let eps = to_f64(eps_target);
    let strip = STRIP_WIDTHS.iter().map(|&w| (w, analytic.profile.strip_norm(w).ok())).collect();
    Ok(ApproxReport {
        target: smooth.describe(),
        degree: analytic.profile.degree,
        grid: nodes,
        distances: maxima,
        strip_norm_bounds: strip,
        epsilon_target: eps_target.clone(),
        satisfied: maxima.iter().all(|&d| d < eps),
        tail_estimate: analytic.profile.tail_estimate(),
    })
}

/// Max over the torus grid of the θ-difference between g∘R_t and R_t∘g for
/// the analytic shear, which is zero because the displacement ignores θ.
pub fn commutation_defect(a: &AnalyticShear, t: f64, grid: usize) -> f64 {
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    (0..grid)
        .map(|i| {
            let p = TorusPoint::new((i as f64 * golden).fract(), i as f64 / grid as f64);
            let x = a.forward(p.shifted(t, 0.0)).jet.point;
            let y = a.forward(p).jet.point.shifted(t, 0.0);
            centered(x.theta - y.theta).abs().max(centered(x.r - y.r).abs())
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn strip_norm_of_sine_dominates_cosh() {
        let p = TrigProfile::new(vec![0.0, 0.0], vec![0.0, 1.0]).unwrap();
        let bound = p.strip_norm(1.0).unwrap();
        assert!((bound - (2.0 * PI).exp()).abs() < 1e-9);
        assert!(bound >= (2.0 * PI).cosh());
        assert_eq!(TrigProfile::constant(-2.5).strip_norm(3.0).unwrap(), 2.5);
    }

    #[test]
    fn rescale_moves_frequency() {
        let p = TrigProfile::new(vec![0.0, 0.0], vec![0.0, 3.0]).unwrap();
        let r = p.periodic_rescale(2).unwrap();
        assert_eq!(r.degree, 2);
        assert_eq!(r.s[2], 1.5);
        assert!(r.supported_on_multiples(2));
        assert_eq!(p.periodic_rescale(1).unwrap(), p);
    }

    #[test]
    fn trig_input_is_reproduced() {
        let f = |x: f64| 0.5 + 0.25 * (2.0 * PI * 3.0 * x).cos() - 0.125 * (2.0 * PI * 5.0 * x).sin();
        let (c, s, _) = converged_coefficients(&f, 8, 1e-13, 64).unwrap();
        assert!((c[0] - 0.5).abs() < 1e-14);
        assert!((c[3] - 0.25).abs() < 1e-14);
        assert!((s[5] + 0.125).abs() < 1e-14);
        assert!(c[4].abs() < 1e-14);
    }

    #[test]
    fn staircase_support_and_area() {
        let sp = StepProfile::new(4, 3, ratio(1, 16)).unwrap();
        let p = approximate_profile(&sp, 12, Scheme::Truncation).unwrap();
        assert!((0..=12).filter(|m| m % 4 != 0).all(|m| p.c[m].abs() < 1e-12 && p.s[m].abs() < 1e-12));
        let a = AnalyticShear::new(p, 3, 1);
        let r = a.forward(TorusPoint::new(0.2, 0.37));
        assert!((r.jet.deriv.determinant() - 1.0).abs() < 1e-14);
        assert!(commutation_defect(&a, 0.5, 200) < 1e-15);
    }
}

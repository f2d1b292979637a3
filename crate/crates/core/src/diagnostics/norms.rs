//! Grid estimates of |||F|||_r = max over orders 1..r of the sup of the
//! partial derivatives of F and F⁻¹ (order 0 of a torus lift is not
//! periodic and is left out), the shear bound, the composition inequality
//! and the shear distribution estimate.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::map::MapExpr;
use crate::rational::{self, Rational};
use crate::shear::{ShearMap, StepProfile};
use crate::step::rho_derivative_sup;
use crate::torus::{Mat2, TorusPoint};

#[derive(Clone, Debug, Serialize)]
pub struct NormReport {
    pub map: String,
    pub r: u32,
    pub mode: &'static str,
    /// Sup of order-j partials for j = 1..=r.
    pub per_order: Vec<f64>,
    pub estimate: f64,
    pub paper_bound: Option<f64>,
    pub transition_fraction: f64,
    /// More than half of the grid was unusable.
    pub flagged: bool,
}

/// b·a^{r−1}/ε^r·‖ρ^{(r)}‖₀, the stated bound on the order-r derivative of
/// the shear (never below the order-1 contribution 1 of the identity part).
pub fn shear_paper_bound(p: &StepProfile, r: u32) -> f64 {
    (1..=r)
        .map(|j| {
            let v = p.b as f64 * (p.a as f64).powi(j as i32 - 1) / p.eps_f64().powi(j as i32) * rho_derivative_sup(j as usize, 20_000);
            if j == 1 {
                v.max(1.0)
            } else {
                v
            }
        })
        .fold(0.0, f64::max)
}

/// Closed-form grid estimate for a shear: order 1 has entries 1 and ψ′,
/// higher orders only ψ^{(j)}. The inverse has the same magnitudes.
pub fn shear_norm(g: &ShearMap, r: u32, grid: usize) -> Vec<f64> {
    let nodes = ((grid * grid).max((64.0 / g.profile.collar_width()) as usize)).min(1 << 22);
    let sups = (0..nodes)
        .into_par_iter()
        .map(|i| {
            let x = (i as f64 + 0.5) / nodes as f64;
            let d = g.profile.derivs(x, r as usize);
            d.iter().skip(1).map(|v| v.abs()).collect::<Vec<f64>>()
        })
        .reduce(|| vec![0.0; r as usize], |a, b| a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect());
    sups.into_iter().enumerate().map(|(j, s)| if j == 0 { s.max(1.0) } else { s }).collect()
}

fn fd_orders(expr: &MapExpr, p: TorusPoint, r: u32, h: f64, smooth: bool) -> Option<Vec<f64>> {
    let base = expr.eval_jet(p);
    if !smooth && !base.is_good() {
        return None;
    }
    let mut out = vec![base.jet.deriv.amax()];
    if r == 1 {
        return Some(out);
    }
    let jac = |dx: f64, dy: f64| -> Option<Mat2> {
        let e = expr.eval_jet(p.shifted(dx, dy));
        (smooth || e.is_good()).then_some(e.jet.deriv)
    };
    let (xp, xm, yp, ym) = (jac(h, 0.0)?, jac(-h, 0.0)?, jac(0.0, h)?, jac(0.0, -h)?);
    let d2 = ((xp - xm) / (2.0 * h)).amax().max(((yp - ym) / (2.0 * h)).amax());
    out.push(d2);
    if r >= 3 {
        let d0 = base.jet.deriv;
        let xx = ((xp - 2.0 * d0 + xm) / (h * h)).amax();
        let yy = ((yp - 2.0 * d0 + ym) / (h * h)).amax();
        let xy = {
            let (pp, pm, mp, mm) = (jac(h, h)?, jac(h, -h)?, jac(-h, h)?, jac(-h, -h)?);
            ((pp - pm - mp + mm) / (4.0 * h * h)).amax()
        };
        out.push(xx.max(yy).max(xy));
    }
    Some(out)
}

/// Grid estimate of |||expr|||_r. Closed form for a bare shear (any r),
/// finite differences of the analytic Jacobian otherwise (r ≤ 3), with the
/// step tied to the map's smallest feature. TRANSITION points are skipped
/// unless every factor is smooth everywhere.
pub fn norm_estimate(expr: &MapExpr, r: u32, grid: usize) -> Result<NormReport> {
    if r == 0 {
        return Err(Error::InvalidArgument("order must be >= 1".into()));
    }
    if let Some((g, _)) = expr.as_shear() {
        let per_order = shear_norm(g, r, grid);
        return Ok(NormReport {
            map: expr.describe(),
            r,
            mode: "closed_form",
            estimate: per_order.iter().cloned().fold(0.0, f64::max),
            per_order,
            paper_bound: Some(shear_paper_bound(&g.profile, r)),
            transition_fraction: 0.0,
            flagged: false,
        });
    }
    if r > 3 {
        return Err(Error::NormOrderTooHigh(r));
    }
    let h = expr.min_feature_scale() * 1e-3;
    let inv = expr.inverse();
    let smooth = expr.smooth_everywhere();
    // R₂ sequence: a lattice would alias with dyadic cell grids.
    const PLASTIC: f64 = 1.324_717_957_244_746;
    let (a1, a2) = (1.0 / PLASTIC, 1.0 / (PLASTIC * PLASTIC));
    let results: Vec<Option<Vec<f64>>> = (0..grid * grid)
        .into_par_iter()
        .flat_map_iter(|i| {
            let n = i as f64 + 1.0;
            let p = TorusPoint::new((0.5 + a1 * n).fract(), (0.5 + a2 * n).fract());
            [fd_orders(expr, p, r, h, smooth), fd_orders(&inv, p, r, h, smooth)]
        })
        .collect();
    let used = results.iter().filter(|x| x.is_some()).count();
    let mut per_order = vec![0.0f64; r as usize];
    for v in results.iter().flatten() {
        for (a, b) in per_order.iter_mut().zip(v) {
            *a = a.max(*b);
        }
    }
    let transition_fraction = 1.0 - used as f64 / results.len() as f64;
    Ok(NormReport {
        map: expr.describe(),
        r,
        mode: "finite_difference",
        estimate: per_order.iter().cloned().fold(0.0, f64::max),
        per_order,
        paper_bound: None,
        transition_fraction,
        flagged: transition_fraction > 0.5,
    })
}

/// |||F∘G|||_k / (|||F|||_k^k·|||G|||_k^k).
pub fn composition_ratio(f: &MapExpr, g: &MapExpr, k: u32, grid: usize) -> Result<f64> {
    let fg = MapExpr::compose(f.clone(), g.clone());
    let a = norm_estimate(&fg, k, grid)?.estimate;
    let nf = norm_estimate(f, k, grid)?.estimate;
    let ng = norm_estimate(g, k, grid)?.estimate;
    Ok(a / (nf.powi(k as i32) * ng.powi(k as i32)))
}

/// Measured and bounded quantities of the shear distribution estimate
/// |λ(Q) − λ(K)λ(L)| ≤ 2λ(L)/b + 2γ/b + γλ(K) + bλ(K)/a + 2/a.
#[derive(Clone, Debug, Serialize)]
pub struct ShearLemmaReport {
    pub lambda_k: f64,
    pub lambda_l: f64,
    pub lambda_q: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// The five terms of the right side in order.
    pub terms: [f64; 5],
    /// b·λ(K) > 2.
    pub hypothesis: bool,
    pub satisfied: bool,
}

fn arc_contains(lo: &Rational, len: &Rational, x: &Rational) -> bool {
    let d = rational::frac(&(x - lo));
    d <= *len
}

/// K = [(i₁+2ε)/a, (i₂+1−2ε)/a] (plateaus i₁..i₂ and the collars between),
/// L = [l₁, l₂] on the θ axis, K_{c,γ} = [c, c+γ]×K and
/// Q = π_r(K_{c,γ} ∩ g⁻¹(L×K)) = {r ∈ K : ψ(r) + [c, c+γ] meets L}.
/// Plateaus are counted exactly, collars on `collar_samples` midpoints each.
pub fn shear_distribution_check(
    p: &StepProfile,
    i1: u64,
    i2: u64,
    c: &Rational,
    gamma: &Rational,
    l1: &Rational,
    l2: &Rational,
    collar_samples: usize,
) -> Result<ShearLemmaReport> {
    if i1 > i2 || i2 >= p.a || l2 < l1 {
        return Err(Error::InvalidArgument("need i1 <= i2 < a and l1 <= l2".into()));
    }
    let a = p.a as f64;
    let b = p.b as f64;
    let eps = p.eps_f64();
    let lambda_k = ((i2 - i1) as f64 + 1.0 - 4.0 * eps) / a;
    let lambda_l = rational::to_f64(&(l2 - l1));
    // ψ(r) + [c, c+γ] meets [l₁, l₂] iff ψ(r) mod 1 lies in the arc
    // starting at l₁ − c − γ of length λ(L) + γ
    let arc_lo = l1 - c - gamma;
    let arc_len = (l2 - l1) + gamma;
    let plateau_len = (1.0 - 4.0 * eps) / a;
    let mut lambda_q = 0.0;
    for j in i1..=i2 {
        if arc_contains(&arc_lo, &arc_len, &p.plateau_value(j as i64)) {
            lambda_q += plateau_len;
        }
    }
    let (lo_f, len_f) = (rational::to_f64(&arc_lo), rational::to_f64(&arc_len));
    let collar = 4.0 * eps / a;
    for j in i1..i2 {
        let start = (j as f64 + 1.0 - 2.0 * eps) / a;
        let hits = (0..collar_samples)
            .filter(|&s| {
                let x = start + collar * (s as f64 + 0.5) / collar_samples as f64;
                let d = crate::torus::wrap(p.eval(x) - lo_f);
                d <= len_f
            })
            .count();
        lambda_q += collar * hits as f64 / collar_samples as f64;
    }
    let g = rational::to_f64(gamma);
    let terms = [2.0 * lambda_l / b, 2.0 * g / b, g * lambda_k, b * lambda_k / a, 2.0 / a];
    let rhs: f64 = terms.iter().sum();
    let lhs = (lambda_q - lambda_k * lambda_l).abs();
    Ok(ShearLemmaReport {
        lambda_k,
        lambda_l,
        lambda_q,
        lhs,
        rhs,
        terms,
        hypothesis: b * lambda_k > 2.0,
        satisfied: lhs <= rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn rotation_has_unit_norm() {
        let e = MapExpr::rotation(ratio(1, 5));
        let rep = norm_estimate(&e, 2, 16).unwrap();
        assert!((rep.per_order[0] - 1.0).abs() < 1e-12);
        assert!(rep.per_order[1] < 1e-6);
    }

    #[test]
    fn shear_norm_below_paper_bound() {
        let p = StepProfile::new(4, 3, ratio(1, 16)).unwrap();
        let g = MapExpr::prim(ShearMap::new(p.clone(), 1));
        let rep = norm_estimate(&g, 3, 64).unwrap();
        assert!(rep.estimate <= rep.paper_bound.unwrap());
        // ψ′ peak is (b/(2ε))·ρ′(0) = 24
        assert!((rep.per_order[0] - 24.0).abs() < 0.05);
    }

    #[test]
    fn shear_lemma_with_many_plateaus() {
        let p = StepProfile::new(8, 40, ratio(1, 16)).unwrap();
        let rep = shear_distribution_check(&p, 0, 7, &ratio(0, 1), &ratio(1, 100), &ratio(1, 10), &ratio(3, 5), 400).unwrap();
        assert!(rep.hypothesis);
        assert!(rep.satisfied, "{rep:?}");
    }
}

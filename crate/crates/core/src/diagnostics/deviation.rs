//! Deviation from isometry and pullback metrics.

use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::map::MapExpr;
use crate::partition::CellIndex;
use crate::sampling::{par_chunks, point_in_box};
use crate::torus::{Mat2, TorusPoint};

#[derive(Clone, Debug, Serialize)]
pub struct DeviationReport {
    pub cell: Option<CellIndex>,
    pub dev: f64,
    pub samples: usize,
    pub good_fraction: f64,
}

/// max over `angles` unit directions v of |log ‖J v‖|.
pub fn deviation_of_matrix(j: &Mat2, angles: usize) -> f64 {
    (0..angles)
        .map(|i| {
            let a = PI * i as f64 / angles as f64;
            let v = nalgebra::Vector2::new(a.cos(), a.sin());
            (j * v).norm().ln().abs()
        })
        .fold(0.0, f64::max)
}

/// Exact deviation: the larger of |log σ_max| and |log σ_min|.
pub fn deviation_exact(j: &Mat2) -> f64 {
    let sv = j.singular_values();
    sv[0].ln().abs().max(sv[1].ln().abs())
}

/// Deviation of `expr` over uniform samples in the box [θ₀,θ₁]×[r₀,r₁];
/// only GOOD samples contribute.
pub fn deviation_in_box(
    expr: &MapExpr,
    bounds: [f64; 4],
    cell: Option<CellIndex>,
    samples: usize,
    angles: usize,
    seed: u64,
) -> Result<DeviationReport> {
    let parts = par_chunks(seed, samples, |rng, range| {
        let mut good = 0usize;
        let mut dev = 0.0f64;
        for _ in range {
            let r = expr.eval_jet(point_in_box(rng, bounds));
            if r.is_good() {
                good += 1;
                dev = dev.max(deviation_of_matrix(&r.jet.deriv, angles));
            }
        }
        (good, dev)
    });
    let good: usize = parts.iter().map(|p| p.0).sum();
    if good == 0 {
        return Err(Error::NoGoodSamples);
    }
    Ok(DeviationReport {
        cell,
        dev: parts.iter().map(|p| p.1).fold(0.0, f64::max),
        samples,
        good_fraction: good as f64 / samples as f64,
    })
}

/// Deviation over a partition cell.
pub fn deviation(
    expr: &MapExpr,
    part: &crate::partition::Partition,
    cell: &CellIndex,
    samples: usize,
    angles: usize,
    seed: u64,
) -> Result<DeviationReport> {
    let b = part.cell_box(cell).to_f64();
    deviation_in_box(expr, b, Some(*cell), samples, angles, seed)
}

/// JᵀJ for J the derivative of H⁻¹ at p.
pub fn pullback_metric(h: &MapExpr, p: TorusPoint) -> Result<Mat2> {
    let r = h.inverse().eval_jet(p);
    if !r.is_good() {
        return Err(Error::TransitionAtPoint);
    }
    let j = r.jet.deriv;
    Ok(j.transpose() * j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::LinearAutomorphism;

    #[test]
    fn unit_shear_deviation_is_log_golden() {
        let j = Mat2::new(1.0, 1.0, 0.0, 1.0);
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((deviation_exact(&j) - golden.ln()).abs() < 1e-12);
        assert!((deviation_of_matrix(&j, 4096) - golden.ln()).abs() < 1e-6);
        let e = MapExpr::prim(LinearAutomorphism::unit_shear());
        let rep = deviation_in_box(&e, [0.0, 1.0, 0.0, 1.0], None, 100, 4096, 1).unwrap();
        assert!((rep.dev - golden.ln()).abs() < 1e-6);
    }

    #[test]
    fn rotation_pullback_is_identity() {
        let e = MapExpr::rotation(crate::rational::ratio(1, 3));
        let g = pullback_metric(&e, TorusPoint::new(0.1, 0.2)).unwrap();
        assert_eq!(g, Mat2::identity());
    }
}

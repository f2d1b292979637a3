//! Monte Carlo correlations μ̄(Γ ∩ F⁻¹C) − μ̄(Γ)μ̄(C) on the projectivized
//! bundle, μ̄ being area times the uniform fiber measure.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::map::MapExpr;
use crate::partition::{CellIndex, Level, Partition};
use crate::rational;
use crate::sampling::{par_chunks, proj_in_box};
use crate::stage::AssembledStage;
use crate::torus::ProjPoint;

/// Measurable sets of the projectivized torus used as Γ and C.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PtmSet {
    /// [θ₀,θ₁) × [r₀,r₁) × [t₀,t₁).
    Box { theta: (f64, f64), r: (f64, f64), t: (f64, f64) },
    /// η̂ element Ĩ^{u₀}_{v₀} × T_j.
    HatEta { u0: u64, v0: u64, j: u64 },
    /// Square [θ₀, θ₀+side) × [r₀, r₀+side) × T_k.
    SquareFiber { theta0: f64, r0: f64, side: f64, k: u64 },
}

impl PtmSet {
    pub fn full() -> Self {
        PtmSet::Box { theta: (0.0, 1.0), r: (0.0, 1.0), t: (0.0, 1.0) }
    }

    fn in_arc(x: f64, lo: f64, len: f64) -> bool {
        crate::torus::wrap(x - lo) < len || len >= 1.0
    }

    pub fn contains(&self, part: &Partition, pp: &ProjPoint) -> bool {
        let k = part.k;
        match *self {
            PtmSet::Box { theta, r, t } => {
                pp.point.theta >= theta.0 && pp.point.theta < theta.1 && pp.point.r >= r.0 && pp.point.r < r.1 && pp.t >= t.0 && pp.t < t.1
            }
            PtmSet::HatEta { u0, v0, j } => {
                pp.tangent_index(k) == j
                    && matches!(part.locate(Level::TildeEta, pp.point), Some(c) if c.u0() == u0 && c.v0() == v0)
            }
            PtmSet::SquareFiber { theta0, r0, side, k: kk } => {
                pp.tangent_index(k) == kk && Self::in_arc(pp.point.theta, theta0, side) && Self::in_arc(pp.point.r, r0, side)
            }
        }
    }

    /// Exact μ̄ (as f64) of the set.
    pub fn measure(&self, part: &Partition) -> f64 {
        let k = part.k as f64;
        match *self {
            PtmSet::Box { theta, r, t } => (theta.1 - theta.0) * (r.1 - r.0) * (t.1 - t.0),
            PtmSet::HatEta { .. } => rational::to_f64(&part.piece_measure()),
            PtmSet::SquareFiber { side, .. } => side * side / k,
        }
    }

    /// Bounding box in (θ, r) and fiber range; sampling in it and rejecting
    /// by `contains` is uniform on the set.
    fn frame(&self, part: &Partition) -> ([f64; 4], (f64, f64)) {
        let k = part.k as f64;
        match *self {
            PtmSet::Box { theta, r, t } => ([theta.0, theta.1, r.0, r.1], t),
            PtmSet::HatEta { u0, v0, j } => {
                let a = part.piece_strip(u0, 0, v0);
                let b = part.piece_strip(u0, part.k - 1, v0);
                ([a[0], b[1], a[2], a[3]], (j as f64 / k, (j + 1) as f64 / k))
            }
            PtmSet::SquareFiber { theta0, r0, side, k: kk } => {
                ([theta0, theta0 + side, r0, r0 + side], (kk as f64 / k, (kk + 1) as f64 / k))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            PtmSet::Box { theta, r, t } => format!("box[{:.4},{:.4})x[{:.4},{:.4})x[{:.4},{:.4})", theta.0, theta.1, r.0, r.1, t.0, t.1),
            PtmSet::HatEta { u0, v0, j } => format!("hat_eta({u0},{v0},{j})"),
            PtmSet::SquareFiber { theta0, r0, side, k } => format!("square({theta0:.4},{r0:.4},{side:.4})xT{k}"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PairReport {
    pub gamma: String,
    pub c: String,
    pub mu_gamma: f64,
    pub mu_c: f64,
    /// μ̄(Γ ∩ F⁻¹C) − μ̄(Γ)μ̄(C).
    pub correlation: f64,
    pub abs_correlation: f64,
    pub std_error: f64,
    /// correlation / (μ̄(Γ)μ̄(C)).
    pub normalized: f64,
    pub good_samples: usize,
    pub loss_fraction: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MixingReport {
    pub m: String,
    pub samples: usize,
    pub seed: u64,
    pub loss_budget: f64,
    pub loss_cap: f64,
    pub pairs: Vec<PairReport>,
}

pub const DEFAULT_LOSS_CAP: f64 = 0.2;

/// Squares must have side in [1/(4k), 2/k].
pub fn check_square(part: &Partition, c: &PtmSet) -> Result<()> {
    if let PtmSet::SquareFiber { side, k, .. } = *c {
        let kk = part.k as f64;
        if side < 1.0 / (4.0 * kk) || side > 2.0 / kk || k >= part.k {
            return Err(Error::InvalidArgument(format!("square side {side} outside [1/(4k), 2/k] or fiber index {k} >= k")));
        }
    }
    Ok(())
}

/// Estimates each correlation with `samples` draws uniform on Γ pushed
/// through `fm` (the m-th iterate). TRANSITION trajectories are dropped and
/// counted into the loss budget.
pub fn mixing_correlation(
    part: &Partition,
    fm: &MapExpr,
    m_label: &str,
    gammas: &[PtmSet],
    squares: &[PtmSet],
    samples: usize,
    seed: u64,
    loss_cap: f64,
) -> Result<MixingReport> {
    for c in squares {
        check_square(part, c)?;
    }
    let mut pairs = Vec::new();
    let mut worst_loss = 0.0f64;
    for (gi, g) in gammas.iter().enumerate() {
        let (frame, trange) = g.frame(part);
        let mu_g = g.measure(part);
        // one batch of Γ samples serves every C
        let counts = par_chunks(seed.wrapping_add(gi as u64), samples, |rng, range| {
            let mut hits = vec![0usize; squares.len()];
            let (mut good, mut lost) = (0usize, 0usize);
            for _ in range {
                // rejection onto Γ; bounded tries keep chunks deterministic
                let mut z = None;
                for _ in 0..64 {
                    let pp = proj_in_box(rng, frame, trange);
                    if g.contains(part, &pp) {
                        z = Some(pp);
                        break;
                    }
                }
                let Some(z) = z else { continue };
                let (img, tag) = fm.eval_proj(z);
                if !tag.is_good() {
                    lost += 1;
                    continue;
                }
                good += 1;
                for (h, c) in hits.iter_mut().zip(squares) {
                    if c.contains(part, &img) {
                        *h += 1;
                    }
                }
            }
            (hits, good, lost)
        });
        let mut hits = vec![0usize; squares.len()];
        let (mut good, mut lost) = (0usize, 0usize);
        for (h, gd, l) in counts {
            for (a, b) in hits.iter_mut().zip(h) {
                *a += b;
            }
            good += gd;
            lost += l;
        }
        if good == 0 {
            return Err(Error::NoGoodSamples);
        }
        let loss = lost as f64 / (good + lost) as f64;
        worst_loss = worst_loss.max(loss);
        for (c, h) in squares.iter().zip(hits) {
            let mu_c = c.measure(part);
            let p = h as f64 / good as f64;
            let corr = mu_g * p - mu_g * mu_c;
            let se = mu_g * (p * (1.0 - p) / good as f64).sqrt();
            pairs.push(PairReport {
                gamma: g.label(),
                c: c.label(),
                mu_gamma: mu_g,
                mu_c,
                correlation: corr,
                abs_correlation: corr.abs(),
                std_error: se,
                normalized: if mu_g * mu_c > 0.0 { corr / (mu_g * mu_c) } else { 0.0 },
                good_samples: good,
                loss_fraction: loss,
            });
        }
    }
    if worst_loss > loss_cap {
        return Err(Error::BudgetExceeded { loss: worst_loss, cap: loss_cap });
    }
    Ok(MixingReport { m: m_label.to_string(), samples, seed, loss_budget: worst_loss, loss_cap, pairs })
}

/// Γ sets: every η̂ element of the half-column u₀ with tangent index j,
/// restricted to the first `limit` v₀ rows.
pub fn hat_eta_gammas(part: &Partition, u0: u64, j: u64, limit: usize) -> Vec<PtmSet> {
    part.cells(Level::HatEta)
        .filter(|(c, _)| c.u0() == u0 && c.j == j)
        .take(limit)
        .map(|(c, _): (CellIndex, _)| PtmSet::HatEta { u0: c.u0(), v0: c.v0(), j })
        .collect()
}

/// Correlations of f_n^{m_n} for an assembled stage.
pub fn stage_mixing(
    stage: &AssembledStage,
    part: &Partition,
    gammas: &[PtmSet],
    squares: &[PtmSet],
    samples: usize,
    seed: u64,
    loss_cap: f64,
) -> Result<MixingReport> {
    let fm = stage.f_power(&stage.mixing.m);
    mixing_correlation(part, &fm, &stage.mixing.m.to_string(), gammas, squares, samples, seed, loss_cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn half_rotation_correlation_is_exact() {
        let part = Partition::from_parts(1, 2, 1).unwrap();
        let f = MapExpr::rotation(ratio(1, 2));
        let left = PtmSet::Box { theta: (0.0, 0.5), r: (0.0, 1.0), t: (0.0, 1.0) };
        let rep = mixing_correlation(&part, &f, "1", &[left.clone()], &[left], 20_000, 3, 0.2).unwrap();
        assert_eq!(rep.pairs[0].correlation, -0.25);
        assert_eq!(rep.pairs[0].std_error, 0.0);
    }

    #[test]
    fn full_sets_are_uncorrelated() {
        let part = Partition::from_parts(1, 2, 1).unwrap();
        let f = MapExpr::rotation(ratio(1, 7));
        let rep = mixing_correlation(&part, &f, "1", &[PtmSet::full()], &[PtmSet::full()], 5_000, 3, 0.2).unwrap();
        assert_eq!(rep.pairs[0].correlation, 0.0);
    }
}

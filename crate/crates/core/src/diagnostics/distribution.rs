//! Achieved distribution constants (γ, δ, ε₁, ε₂) of a map on an η̂
//! element Ĩ^{u₀}_{v₀} × T_j, with an explicit loss budget.
//!
//! Each piece Ĩ^{u₀,u₁}_{v₀} is sampled uniformly in its bounding strip with
//! fiber coordinate uniform in T_j. A sample is lost when it falls in a
//! partition gap, when the map is not GOOD along it, or (for Φ) when the
//! rotation lands it in a half-column of the same parity or, from an odd
//! half-column, in a sub-column with another index. The constants are
//! computed from the remaining core samples:
//! - γ: shortest arc containing all image θ;
//! - δ: 1 − λ(J_l), J_l the union of hit bins of the image r;
//! - ε₁, ε₂: twice the largest relative discrepancy over dyadic J̃ ⊆ J_l
//!   of depth ≤ 6, for ε₂ restricted to image fiber T_k with k fixed by the
//!   shift law.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::map::MapExpr;
use crate::partition::{CellIndex, Level, Partition};
use crate::rational::{self, ratio};
use crate::sampling::{par_chunks, proj_in_box};
use crate::stage::{big_phi_shift, phi_shift, AssembledStage};
use crate::torus::{wrap, ProjPoint, TorusPoint};

pub const DYADIC_DEPTH: u32 = 6;
pub const MIN_STRATUM: usize = 100;

/// Expected tangent shift k − j as a function of (u₀, u₁, k).
pub type ShiftFn = fn(u64, u64, u64) -> u64;

fn no_shift(_: u64, _: u64, _: u64) -> u64 {
    0
}

pub struct DistributionInput<'a> {
    pub part: &'a Partition,
    pub map: &'a MapExpr,
    pub expected_shift: ShiftFn,
    /// φ⁻¹ and the rotation amount of Φ = φ∘R∘φ⁻¹, used to detect landing
    /// in a half-column of the starting parity.
    pub conj: Option<(MapExpr, f64)>,
    pub n: u32,
}

impl<'a> DistributionInput<'a> {
    pub fn for_stage(stage: &'a AssembledStage, part: &'a Partition) -> Self {
        let rot = rational::to_f64(&rational::frac(&(&stage.alpha_next * rational::from_int(&stage.mixing.m))));
        DistributionInput {
            part,
            map: &stage.big_phi,
            expected_shift: big_phi_shift,
            conj: Some((stage.phi.inverse(), rot)),
            n: stage.stage.n,
        }
    }

    /// φ_n with its own shift law and no parity rule.
    pub fn phi(stage: &'a AssembledStage, part: &'a Partition) -> Self {
        DistributionInput { part, map: &stage.phi, expected_shift: phi_shift, conj: None, n: stage.stage.n }
    }

    /// Any map with the identity shift law (k = j) and no parity rule.
    pub fn plain(part: &'a Partition, map: &'a MapExpr, n: u32) -> Self {
        DistributionInput { part, map, expected_shift: no_shift, conj: None, n }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PieceStats {
    pub u1: u64,
    pub samples: usize,
    pub core: usize,
    pub gap: usize,
    pub transition: usize,
    pub landing_miss: usize,
    pub gamma: f64,
    pub lambda_j: f64,
    pub delta: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub target_k: u64,
    pub shift_law_fraction: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DistributionReport {
    pub element: CellIndex,
    pub samples: usize,
    pub seed: u64,
    pub gamma: f64,
    pub delta: f64,
    pub eps1: f64,
    pub eps2: f64,
    /// (1/(2k⁵q), 1/k⁴, 1/n⁵, 1/n⁵).
    pub targets: [f64; 4],
    pub loss_budget: f64,
    pub loss_se: f64,
    pub gap_fraction: f64,
    pub transition_fraction: f64,
    pub landing_miss_fraction: f64,
    /// Exact fraction of a piece's bounding strip covered by the piece.
    pub coverage_fraction: f64,
    pub shift_law_fraction: f64,
    /// Allowed γ: target plus the loss budget times the piece width.
    pub gamma_allowance: f64,
    pub satisfied: bool,
    pub satisfied_within_budget: bool,
    pub pieces: Vec<PieceStats>,
}

/// Shortest arc of ℝ/ℤ containing all points.
pub fn circular_extent(xs: &mut [f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    xs.sort_by(|a, b| a.total_cmp(b));
    let mut gap = xs[0] + 1.0 - xs[xs.len() - 1];
    for w in xs.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    1.0 - gap
}

/// For Φ = φ∘R∘φ⁻¹: the rotated point φ⁻¹(p) + m·α must land in a
/// half-column of the other parity and, from an odd start where φ⁻¹ is the
/// identity, in the sub-column with the same index u₁. Points failing this
/// are outside the set on which the shift law is asserted.
fn lands_aligned(inp: &DistributionInput, p: TorusPoint, u0: u64, u1: u64) -> bool {
    let Some((phi_inv, rot)) = &inp.conj else { return true };
    let (k, q) = (inp.part.k, inp.part.q);
    let x = phi_inv.eval(p);
    let y = wrap(x.theta + rot);
    let landing = ((y * 2.0 * q as f64).floor() as u64).min(2 * q - 1);
    if landing % 2 == u0 % 2 {
        return false;
    }
    u0 % 2 == 0 || ((y * (2 * k * q) as f64).floor() as u64).min(2 * k * q - 1) % k == u1
}

struct Core {
    r: f64,
    theta: f64,
    k_idx: u64,
}

#[derive(Default)]
struct Tally {
    core: Vec<Core>,
    gap: usize,
    transition: usize,
    landing_miss: usize,
}

fn piece_tally(inp: &DistributionInput, element: &CellIndex, u1: u64, samples: usize, seed: u64) -> Tally {
    let part = inp.part;
    let k = part.k;
    let (u0, v0, j) = (element.u0(), element.v0(), element.j);
    let strip = part.piece_strip(u0, u1, v0);
    let t = (j as f64 / k as f64, (j + 1) as f64 / k as f64);
    let want = CellIndex::piece(u0, u1, v0);
    let parts = par_chunks(seed ^ (u1.wrapping_mul(0x9E37_79B9_7F4A_7C15)), samples, |rng, range| {
        let mut t_out = Tally::default();
        for _ in range {
            let pp: ProjPoint = proj_in_box(rng, strip, t);
            if part.locate(Level::TildeEta, pp.point) != Some(want) {
                t_out.gap += 1;
                continue;
            }
            let (img, tag) = inp.map.eval_proj(pp);
            if !tag.is_good() {
                t_out.transition += 1;
                continue;
            }
            if !lands_aligned(inp, pp.point, u0, u1) {
                t_out.landing_miss += 1;
                continue;
            }
            t_out.core.push(Core { r: img.point.r, theta: img.point.theta, k_idx: img.tangent_index(k) });
        }
        t_out
    });
    let mut out = Tally::default();
    for p in parts {
        out.core.extend(p.core);
        out.gap += p.gap;
        out.transition += p.transition;
        out.landing_miss += p.landing_miss;
    }
    out
}

fn dyadic_discrepancy(rs: &[(f64, bool)], hit: &[bool]) -> f64 {
    let bins = hit.len();
    let total_hit = hit.iter().filter(|h| **h).count() as f64;
    let n = rs.len() as f64;
    let mut worst = 0.0f64;
    for d in 0..=DYADIC_DEPTH {
        let parts = 1usize << d;
        let per = bins / parts;
        let mut counts = vec![0usize; parts];
        for &(r, sel) in rs {
            if sel {
                counts[((r * parts as f64) as usize).min(parts - 1)] += 1;
            }
        }
        for (i, &c) in counts.iter().enumerate() {
            let h = hit[i * per..(i + 1) * per].iter().filter(|x| **x).count() as f64;
            if h == 0.0 {
                continue;
            }
            let expect = h / total_hit;
            worst = worst.max(((c as f64 / n) - expect).abs() / expect);
        }
    }
    2.0 * worst
}

/// Measures (γ, δ, ε₁, ε₂) of `inp.map` on the η̂ element `element`.
pub fn distribution_constants(inp: &DistributionInput, element: &CellIndex, samples: usize, seed: u64) -> Result<DistributionReport> {
    let part = inp.part;
    let (k, q, n) = (part.k, part.q, inp.n);
    if element.level != crate::partition::Level::HatEta || element.j >= k {
        return Err(Error::InvalidArgument("element must be an η̂ index with j < k".into()));
    }
    if part.cell_count(Level::TildeEta) == 0 {
        return Err(Error::InvalidArgument("empty partition".into()));
    }
    let per_piece = (samples / k as usize).max(1);
    let mut pieces = Vec::new();
    let (mut gap, mut trans, mut miss, mut total) = (0usize, 0usize, 0usize, 0usize);
    for u1 in 0..k {
        let tally = piece_tally(inp, element, u1, per_piece, seed);
        total += per_piece;
        gap += tally.gap;
        trans += tally.transition;
        miss += tally.landing_miss;
        let core = tally.core.len();
        if core < MIN_STRATUM {
            return Err(Error::InsufficientSamples { stratum: format!("u1={u1}"), good: core, needed: MIN_STRATUM });
        }
        let mut thetas: Vec<f64> = tally.core.iter().map(|c| c.theta).collect();
        let gamma = circular_extent(&mut thetas);
        let bins = (1usize << DYADIC_DEPTH) * (core / 512).max(1).next_power_of_two();
        let mut hit = vec![false; bins];
        for c in &tally.core {
            hit[((c.r * bins as f64) as usize).min(bins - 1)] = true;
        }
        let lambda_j = hit.iter().filter(|h| **h).count() as f64 / bins as f64;
        let target_k = (element.j + (inp.expected_shift)(element.u0(), u1, k)) % k;
        let with_all: Vec<(f64, bool)> = tally.core.iter().map(|c| (c.r, true)).collect();
        let with_k: Vec<(f64, bool)> = tally.core.iter().map(|c| (c.r, c.k_idx == target_k)).collect();
        let law = tally.core.iter().filter(|c| c.k_idx == target_k).count();
        pieces.push(PieceStats {
            u1,
            samples: per_piece,
            core,
            gap: tally.gap,
            transition: tally.transition,
            landing_miss: tally.landing_miss,
            gamma,
            lambda_j,
            delta: 1.0 - lambda_j,
            eps1: dyadic_discrepancy(&with_all, &hit),
            eps2: dyadic_discrepancy(&with_k, &hit),
            target_k,
            shift_law_fraction: law as f64 / core as f64,
        });
    }
    let max = |f: fn(&PieceStats) -> f64| pieces.iter().map(f).fold(0.0, f64::max);
    let (gamma, delta, eps1, eps2) = (max(|p| p.gamma), max(|p| p.delta), max(|p| p.eps1), max(|p| p.eps2));
    let n5 = (n as f64).powi(5);
    let targets = [1.0 / (2.0 * (k as f64).powi(5) * q as f64), 1.0 / (k as f64).powi(4), 1.0 / n5, 1.0 / n5];
    let tf = total as f64;
    let loss_budget = (gap + trans + miss) as f64 / tf;
    let loss_se = (loss_budget * (1.0 - loss_budget) / tf).sqrt();
    let coverage_fraction = rational::to_f64(&(part.piece_measure() / part.piece_strip_measure()));
    let piece_width = 1.0 / (2.0 * k as f64 * q as f64);
    let gamma_allowance = targets[0] + loss_budget * piece_width;
    let law_total: f64 = pieces.iter().map(|p| p.shift_law_fraction * p.core as f64).sum();
    let core_total: usize = pieces.iter().map(|p| p.core).sum();
    let achieved = [gamma, delta, eps1, eps2];
    Ok(DistributionReport {
        element: *element,
        samples: total,
        seed,
        gamma,
        delta,
        eps1,
        eps2,
        targets,
        loss_budget,
        loss_se,
        gap_fraction: gap as f64 / tf,
        transition_fraction: trans as f64 / tf,
        landing_miss_fraction: miss as f64 / tf,
        coverage_fraction,
        shift_law_fraction: law_total / core_total as f64,
        gamma_allowance,
        satisfied: achieved.iter().zip(&targets).all(|(a, t)| a <= t),
        satisfied_within_budget: gamma <= gamma_allowance
            && delta <= targets[1] + loss_budget
            && eps1 <= targets[2] + loss_budget
            && eps2 <= targets[3] + loss_budget,
        pieces,
    })
}

/// Constants of the analytic perturbation: with adj = max(2⁻ⁿ, d1_bound),
/// γ′ = γ + adj, δ′ = δ + adj, ε′ᵢ = 2εᵢ + 3·adj.
pub fn perturbed_constants(report: &DistributionReport, n: u32, d1_bound: f64) -> Result<DistributionReport> {
    if !(d1_bound >= 0.0) {
        return Err(Error::InvalidArgument("d1_bound must be >= 0".into()));
    }
    let adj = 2f64.powi(-(n as i32)).max(d1_bound);
    let mut out = report.clone();
    out.gamma += adj;
    out.delta += adj;
    out.eps1 = 2.0 * out.eps1 + 3.0 * adj;
    out.eps2 = 2.0 * out.eps2 + 3.0 * adj;
    let achieved = [out.gamma, out.delta, out.eps1, out.eps2];
    out.satisfied = achieved.iter().zip(&out.targets).all(|(a, t)| a <= t);
    out.satisfied_within_budget = out.gamma <= out.gamma_allowance
        && out.delta <= out.targets[1] + out.loss_budget
        && out.eps1 <= out.targets[2] + out.loss_budget
        && out.eps2 <= out.targets[3] + out.loss_budget;
    Ok(out)
}

/// Exact γ′ for rational inputs (used to pin the formula).
pub fn perturbed_gamma_exact(gamma: &rational::Rational, n: u32) -> rational::Rational {
    gamma + ratio(1, 1i64 << n)
}

/// Outcome of the integer tangent shift law over uniform samples of the
/// projectivized torus.
#[derive(Clone, Debug, Serialize)]
pub struct ShiftLawReport {
    pub samples: usize,
    pub good: usize,
    pub gap: usize,
    pub transition: usize,
    pub landing_miss: usize,
    pub violations: usize,
    pub fraction: f64,
    /// (θ, r, t, expected k, got k) of the first violation in sample order.
    pub first_violation: Option<(f64, f64, f64, u64, u64)>,
}

/// Checks k ≡ j + shift(u₀, u₁) mod k on every GOOD sample lying in an η̃
/// piece, with the same parity exclusion as the distribution constants.
pub fn shift_law_check(inp: &DistributionInput, samples: usize, seed: u64) -> Result<ShiftLawReport> {
    let part = inp.part;
    let k = part.k;
    let parts = par_chunks(seed, samples, |rng, range| {
        let mut c = [0usize; 5];
        let mut first = None;
        for _ in range {
            let pp = proj_in_box(rng, [0.0, 1.0, 0.0, 1.0], (0.0, 1.0));
            let Some(cell) = part.locate(Level::TildeEta, pp.point) else {
                c[1] += 1;
                continue;
            };
            let (img, tag) = inp.map.eval_proj(pp);
            if !tag.is_good() {
                c[2] += 1;
                continue;
            }
            if !lands_aligned(inp, pp.point, cell.u0(), cell.u1()) {
                c[3] += 1;
                continue;
            }
            c[0] += 1;
            let want = (pp.tangent_index(k) + (inp.expected_shift)(cell.u0(), cell.u1(), k)) % k;
            let got = img.tangent_index(k);
            if got != want {
                c[4] += 1;
                first.get_or_insert((pp.point.theta, pp.point.r, pp.t, want, got));
            }
        }
        (c, first)
    });
    let mut c = [0usize; 5];
    let mut first = None;
    for (pc, f) in parts {
        for (a, b) in c.iter_mut().zip(pc) {
            *a += b;
        }
        if first.is_none() {
            first = f;
        }
    }
    if c[0] == 0 {
        return Err(Error::NoGoodSamples);
    }
    Ok(ShiftLawReport {
        samples,
        good: c[0],
        gap: c[1],
        transition: c[2],
        landing_miss: c[3],
        violations: c[4],
        fraction: 1.0 - c[4] as f64 / c[0] as f64,
        first_violation: first,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circular_extent_wraps() {
        assert!((circular_extent(&mut [0.95, 0.05, 0.0]) - 0.1).abs() < 1e-12);
        assert!((circular_extent(&mut [0.2, 0.3]) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn perturbation_formula() {
        assert_eq!(perturbed_gamma_exact(&ratio(1, 64), 3), ratio(9, 64));
    }
}

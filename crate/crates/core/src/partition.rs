//! The partial partitions η, ζ, η̃ of the torus and η̂ of the projectivized
//! bundle: exact boxes, membership, coverage and diameters.
//!
//! Every box corner is an integer multiple of 1/D with D = 4n⁵k²⁶q, so boxes
//! are stored as `u128` tick counts and compared exactly.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::MIN_FLOAT_WIDTH;
use crate::rational::{fmt_rational, Rational};
use crate::schedule::StageParams;
use crate::torus::{ProjPoint, TorusPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Level {
    Eta,
    Zeta,
    TildeEta,
    HatEta,
}

impl Level {
    pub fn parse(s: &str) -> Option<Level> {
        match s.to_ascii_lowercase().as_str() {
            "eta" => Some(Level::Eta),
            "zeta" => Some(Level::Zeta),
            "tilde_eta" | "tildeeta" | "eta_tilde" => Some(Level::TildeEta),
            "hat_eta" | "hateta" | "eta_hat" => Some(Level::HatEta),
            _ => None,
        }
    }
}

/// Digit tuple (u₀,…,u₄; v₀,v₁,v₂) plus tangent index j. Digits a level
/// does not use are zero: η uses (u₀,u₁,u₂; v₀), η̃ pieces (u₀,u₁; v₀),
/// η̂ elements (u₀; v₀) and j.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CellIndex {
    pub level: Level,
    pub u: [u64; 5],
    pub v: [u64; 3],
    pub j: u64,
}

impl CellIndex {
    pub fn zeta(u: [u64; 5], v: [u64; 3]) -> Self {
        CellIndex { level: Level::Zeta, u, v, j: 0 }
    }
    pub fn eta(u0: u64, u1: u64, u2: u64, v0: u64) -> Self {
        CellIndex { level: Level::Eta, u: [u0, u1, u2, 0, 0], v: [v0, 0, 0], j: 0 }
    }
    pub fn piece(u0: u64, u1: u64, v0: u64) -> Self {
        CellIndex { level: Level::TildeEta, u: [u0, u1, 0, 0, 0], v: [v0, 0, 0], j: 0 }
    }
    pub fn hat(u0: u64, v0: u64, j: u64) -> Self {
        CellIndex { level: Level::HatEta, u: [u0, 0, 0, 0, 0], v: [v0, 0, 0], j }
    }
    pub fn u0(&self) -> u64 {
        self.u[0]
    }
    pub fn u1(&self) -> u64 {
        self.u[1]
    }
    pub fn v0(&self) -> u64 {
        self.v[0]
    }
}

/// Exact box with corners `ticks / denom`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellBox {
    pub denom: u128,
    pub theta: (u128, u128),
    pub r: (u128, u128),
    /// Tangent interval [j/k, (j+1)/k] for η̂.
    pub t: Option<(u64, u64)>,
}

impl CellBox {
    fn rat(&self, x: u128) -> Rational {
        Rational::new(BigInt::from(x), BigInt::from(self.denom))
    }
    pub fn theta_lo(&self) -> Rational {
        self.rat(self.theta.0)
    }
    pub fn theta_hi(&self) -> Rational {
        self.rat(self.theta.1)
    }
    pub fn r_lo(&self) -> Rational {
        self.rat(self.r.0)
    }
    pub fn r_hi(&self) -> Rational {
        self.rat(self.r.1)
    }
    pub fn theta_width(&self) -> Rational {
        self.rat(self.theta.1 - self.theta.0)
    }
    pub fn r_width(&self) -> Rational {
        self.rat(self.r.1 - self.r.0)
    }
    pub fn area(&self) -> Rational {
        self.theta_width() * self.r_width()
    }
    pub fn center(&self) -> TorusPoint {
        let d = self.denom as f64;
        TorusPoint::new(
            (self.theta.0 + self.theta.1) as f64 / (2.0 * d),
            (self.r.0 + self.r.1) as f64 / (2.0 * d),
        )
    }
    pub fn center_exact(&self) -> (Rational, Rational) {
        let two = Rational::from_integer(BigInt::from(2));
        ((self.theta_lo() + self.theta_hi()) / &two, (self.r_lo() + self.r_hi()) / two)
    }
    /// Float corners (θ_lo, θ_hi, r_lo, r_hi).
    pub fn to_f64(&self) -> [f64; 4] {
        let d = self.denom as f64;
        [self.theta.0 as f64 / d, self.theta.1 as f64 / d, self.r.0 as f64 / d, self.r.1 as f64 / d]
    }
    pub fn contains_box(&self, other: &CellBox) -> bool {
        self.denom == other.denom
            && self.theta.0 <= other.theta.0
            && other.theta.1 <= self.theta.1
            && self.r.0 <= other.r.0
            && other.r.1 <= self.r.1
    }
    pub fn disjoint(&self, other: &CellBox) -> bool {
        self.theta.1 <= other.theta.0
            || other.theta.1 <= self.theta.0
            || self.r.1 <= other.r.0
            || other.r.1 <= self.r.0
    }
    /// One CSV row: exact bounds as "num/den".
    pub fn csv_bounds(&self) -> String {
        format!(
            "{},{},{},{}",
            fmt_rational(&self.theta_lo()),
            fmt_rational(&self.theta_hi()),
            fmt_rational(&self.r_lo()),
            fmt_rational(&self.r_hi())
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageReport {
    pub level: Level,
    pub cell_count: u128,
    #[serde(with = "crate::rational::serde_rational")]
    pub total_measure: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub paper_bound: Rational,
    pub satisfied: bool,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiameterReport {
    pub n: u32,
    pub k: u64,
    pub level: Level,
    pub max_diameter: f64,
    pub bound: Option<f64>,
}

/// Geometry of all four partitions of one stage.
#[derive(Clone, Debug)]
pub struct Partition {
    pub n: u32,
    pub k: u64,
    pub q: u64,
    k5: u64,
    /// Common denominator 4n⁵k²⁶q.
    denom: u128,
    /// ζ tick unit 2n⁵k¹⁰ (one 1/(2k¹⁶q) slot); margin is one tick.
    zeta_unit: u128,
    /// η θ unit 2n⁵k²⁰ and margin k¹⁰; r unit 4n⁵k²¹q and margin 2k¹¹q.
    eta_theta_unit: u128,
    eta_theta_margin: u128,
    eta_r_unit: u128,
    eta_r_margin: u128,
}

fn checked_pow(b: u128, e: u32) -> Option<u128> {
    b.checked_pow(e)
}

impl Partition {
    pub fn new(stage: &StageParams) -> Result<Self> {
        let q = stage.q_u64()?;
        Self::from_parts(stage.n, stage.k, q)
    }

    pub fn from_parts(n: u32, k: u64, q: u64) -> Result<Self> {
        let ovf = || Error::NumericUnderflow(format!("partition denominators overflow 128 bits (k={k}, q={q})"));
        let (nn, kk, qq) = (n as u128, k as u128, q as u128);
        let n5 = checked_pow(nn, 5).ok_or_else(ovf)?;
        let k10 = checked_pow(kk, 10).ok_or_else(ovf)?;
        let k11 = checked_pow(kk, 11).ok_or_else(ovf)?;
        let k20 = checked_pow(kk, 20).ok_or_else(ovf)?;
        let k21 = checked_pow(kk, 21).ok_or_else(ovf)?;
        let k26 = checked_pow(kk, 26).ok_or_else(ovf)?;
        let denom = 4u128
            .checked_mul(n5)
            .and_then(|x| x.checked_mul(k26))
            .and_then(|x| x.checked_mul(qq))
            .ok_or_else(ovf)?;
        Ok(Partition {
            n,
            k,
            q,
            k5: k.pow(5),
            denom,
            zeta_unit: 2 * n5 * k10,
            eta_theta_unit: 2 * n5 * k20,
            eta_theta_margin: k10,
            eta_r_unit: 4 * n5 * k21 * qq,
            eta_r_margin: 2 * k11 * qq,
        })
    }

    pub fn denom(&self) -> u128 {
        self.denom
    }

    fn interior(&self) -> std::ops::RangeInclusive<u64> {
        1..=self.k5.saturating_sub(2)
    }

    fn v1_range(&self) -> std::ops::RangeInclusive<u64> {
        let q = self.q;
        2 * q..=(2 * self.k.pow(6) * q).saturating_sub(2 * q + 1)
    }

    fn empty(&self) -> bool {
        self.k5 < 3
    }

    pub fn zeta_theta_slot(&self, u: [u64; 5]) -> u128 {
        let k = self.k as u128;
        let k5 = self.k5 as u128;
        (((u[0] as u128 * k + u[1] as u128) * k5 + u[2] as u128) * k5 + u[3] as u128) * k5 + u[4] as u128
    }

    pub fn zeta_r_slot(&self, v: [u64; 3]) -> u128 {
        let k5 = self.k5 as u128;
        let k6q2 = 2 * (self.k as u128).pow(6) * self.q as u128;
        (v[0] as u128 * k6q2 + v[1] as u128) * k5 + v[2] as u128
    }

    pub fn cell_box(&self, idx: &CellIndex) -> CellBox {
        match idx.level {
            Level::Zeta => {
                let t = self.zeta_theta_slot(idx.u) * self.zeta_unit;
                let r = self.zeta_r_slot(idx.v) * self.zeta_unit;
                CellBox {
                    denom: self.denom,
                    theta: (t + 1, t + self.zeta_unit - 1),
                    r: (r + 1, r + self.zeta_unit - 1),
                    t: None,
                }
            }
            Level::Eta => {
                let k = self.k as u128;
                let e = (idx.u[0] as u128 * k + idx.u[1] as u128) * self.k5 as u128 + idx.u[2] as u128;
                let t = e * self.eta_theta_unit;
                let r = idx.v[0] as u128 * self.eta_r_unit;
                CellBox {
                    denom: self.denom,
                    theta: (t + self.eta_theta_margin, t + self.eta_theta_unit - self.eta_theta_margin),
                    r: (r + self.eta_r_margin, r + self.eta_r_unit - self.eta_r_margin),
                    t: None,
                }
            }
            Level::TildeEta | Level::HatEta => {
                let lo_u1 = if idx.level == Level::TildeEta { idx.u[1] } else { 0 };
                let hi_u1 = if idx.level == Level::TildeEta { idx.u[1] } else { self.k - 1 };
                let a = *self.interior().start();
                let b = *self.interior().end();
                let v1a = *self.v1_range().start();
                let v1b = *self.v1_range().end();
                let lo = self.cell_box(&CellIndex::zeta([idx.u[0], lo_u1, a, a, a], [idx.v[0], v1a, a]));
                let hi = self.cell_box(&CellIndex::zeta([idx.u[0], hi_u1, b, b, b], [idx.v[0], v1b, b]));
                CellBox {
                    denom: self.denom,
                    theta: (lo.theta.0, hi.theta.1),
                    r: (lo.r.0, hi.r.1),
                    t: if idx.level == Level::HatEta { Some((idx.j, self.k)) } else { None },
                }
            }
        }
    }

    /// Lazily enumerates all cells of a level in lexicographic index order.
    pub fn cells(&self, level: Level) -> Box<dyn Iterator<Item = (CellIndex, CellBox)> + '_> {
        if self.empty() {
            return Box::new(std::iter::empty());
        }
        let inner = self.interior();
        let (q, k) = (self.q, self.k);
        let it: Box<dyn Iterator<Item = CellIndex> + '_> = match level {
            Level::Eta => Box::new((0..2 * q).flat_map(move |u0| {
                let inner = inner.clone();
                (0..k).flat_map(move |u1| {
                    let inner2 = inner.clone();
                    inner.clone().flat_map(move |u2| inner2.clone().map(move |v0| CellIndex::eta(u0, u1, u2, v0)))
                })
            })),
            Level::TildeEta => Box::new((0..2 * q).flat_map(move |u0| {
                let inner = inner.clone();
                (0..k).flat_map(move |u1| inner.clone().map(move |v0| CellIndex::piece(u0, u1, v0)))
            })),
            Level::HatEta => Box::new((0..2 * q).flat_map(move |u0| {
                inner.clone().flat_map(move |v0| (0..k).map(move |j| CellIndex::hat(u0, v0, j)))
            })),
            Level::Zeta => {
                let v1r = self.v1_range();
                Box::new((0..2 * q).flat_map(move |u0| {
                    let (inner, v1r) = (inner.clone(), v1r.clone());
                    (0..k).flat_map(move |u1| {
                        let (inner, v1r) = (inner.clone(), v1r.clone());
                        itertools_product5(inner.clone(), v1r.clone()).map(move |(u2, u3, u4, v0, v1, v2)| {
                            CellIndex::zeta([u0, u1, u2, u3, u4], [v0, v1, v2])
                        })
                    })
                }))
            }
        };
        Box::new(it.map(move |idx| (idx, self.cell_box(&idx))))
    }

    pub fn cell_count(&self, level: Level) -> u128 {
        if self.empty() {
            return 0;
        }
        let m = (self.k5 - 2) as u128;
        let (q, k) = (self.q as u128, self.k as u128);
        let v1 = (2 * k.pow(6) * q - 4 * q) as u128;
        match level {
            Level::Eta => 2 * q * k * m * m,
            Level::Zeta => 2 * q * k * m.pow(5) * v1,
            Level::TildeEta => 2 * q * k * m,
            Level::HatEta => 2 * q * m * k,
        }
    }

    fn zeta_cell_area(&self) -> Rational {
        let w = Rational::new(BigInt::from(self.zeta_unit - 2), BigInt::from(self.denom));
        &w * &w
    }

    /// Exact measure of one η̃ piece (union of its ζ cells).
    pub fn piece_measure(&self) -> Rational {
        if self.empty() {
            return Rational::zero();
        }
        let per_piece = self.cell_count(Level::Zeta) / self.cell_count(Level::TildeEta);
        self.zeta_cell_area() * Rational::from_integer(BigInt::from(per_piece))
    }

    pub fn coverage(&self, level: Level) -> CoverageReport {
        let count = self.cell_count(level);
        let k5 = Rational::from_integer(BigInt::from(self.k5));
        let one = Rational::from_integer(BigInt::from(1));
        let bound = |c: i64| &one - Rational::from_integer(BigInt::from(c)) / &k5;
        let (total, paper_bound) = match level {
            Level::Eta => {
                let b = self.cell_box(&CellIndex::eta(0, 0, 1, 1));
                (b.area() * Rational::from_integer(BigInt::from(count)), bound(8))
            }
            Level::Zeta => (self.zeta_cell_area() * Rational::from_integer(BigInt::from(count)), bound(16)),
            Level::TildeEta => (self.piece_measure() * Rational::from_integer(BigInt::from(count)), bound(25)),
            Level::HatEta => {
                // elements Ĩ^{u0}_{v0} × T_j, fiber measure 1/k each
                let el = self.piece_measure() * Rational::from_integer(BigInt::from(self.k));
                let fiber = Rational::new(BigInt::from(1), BigInt::from(self.k));
                (el * fiber * Rational::from_integer(BigInt::from(count)), bound(50))
            }
        };
        let note = if count == 0 { "empty partition (k^5 - 2 < 1)".to_string() } else { String::new() };
        CoverageReport {
            level,
            cell_count: count,
            satisfied: count > 0 && total >= paper_bound,
            total_measure: total,
            paper_bound,
            note,
        }
    }

    pub fn max_diameter(&self, level: Level) -> DiameterReport {
        let idx = match level {
            Level::Eta => CellIndex::eta(0, 0, 1, 1),
            Level::Zeta => CellIndex::zeta([0, 0, 1, 1, 1], [1, 2 * self.q, 1]),
            Level::TildeEta => CellIndex::piece(0, 0, 1),
            Level::HatEta => CellIndex::hat(0, 1, 0),
        };
        let b = self.cell_box(&idx);
        let [t0, t1, r0, r1] = b.to_f64();
        let bound = match level {
            Level::Eta => Some(2f64.sqrt() / self.k5 as f64),
            Level::Zeta => Some(2f64.sqrt() / ((self.k as f64).powi(15) * self.q as f64)),
            _ => None,
        };
        DiameterReport { n: self.n, k: self.k, level, max_diameter: (t1 - t0).hypot(r1 - r0), bound }
    }

    /// Width of the finest cell of a level, for float-mode checks.
    pub fn min_width(&self, level: Level) -> f64 {
        let b = self.cell_box(&match level {
            Level::Eta => CellIndex::eta(0, 0, 1, 1),
            _ => CellIndex::zeta([0, 0, 1, 1, 1], [1, 2 * self.q, 1]),
        });
        let [t0, t1, r0, r1] = b.to_f64();
        (t1 - t0).min(r1 - r0)
    }

    pub fn check_float(&self, level: Level) -> Result<()> {
        let w = self.min_width(level);
        if w < MIN_FLOAT_WIDTH {
            return Err(Error::NumericUnderflow(format!("{level:?} cell width {w:e} < 2^-40")));
        }
        Ok(())
    }

    /// Slot index of x in a grid of `slots` equal slots, rejecting points
    /// within the margin (plus guard band) of a slot boundary.
    #[inline]
    fn slot(x: f64, slots: f64, margin_frac: f64) -> Option<u64> {
        let y = x * slots;
        let i = y.floor();
        let f = y - i;
        let guard = (slots * 2f64.powi(-48)).max(2f64.powi(-30));
        if f < margin_frac + guard || f > 1.0 - margin_frac - guard {
            return None;
        }
        Some(i as u64)
    }

    #[inline]
    fn margin_frac(&self) -> f64 {
        1.0 / (2.0 * (self.n as f64).powi(5) * (self.k as f64).powi(10))
    }

    fn zeta_digits(&self, p: TorusPoint) -> Option<([u64; 5], [u64; 3])> {
        if self.empty() {
            return None;
        }
        let k5 = self.k5;
        let k6q2 = 2 * self.k.pow(6) * self.q;
        let slots = 2.0 * (self.k as f64).powi(16) * self.q as f64;
        let m = self.margin_frac();
        let mut a = Self::slot(p.theta, slots, m)?;
        let mut b = Self::slot(p.r, slots, m)?;
        let u4 = a % k5;
        a /= k5;
        let u3 = a % k5;
        a /= k5;
        let u2 = a % k5;
        a /= k5;
        let u1 = a % self.k;
        let u0 = a / self.k;
        let v2 = b % k5;
        b /= k5;
        let v1 = b % k6q2;
        let v0 = b / k6q2;
        let inner = self.interior();
        let ok = [u2, u3, u4, v0, v2].iter().all(|d| inner.contains(d)) && self.v1_range().contains(&v1);
        ok.then_some(([u0, u1, u2, u3, u4], [v0, v1, v2]))
    }

    fn eta_digits(&self, p: TorusPoint) -> Option<CellIndex> {
        if self.empty() {
            return None;
        }
        let m = self.margin_frac();
        let a = Self::slot(p.theta, 2.0 * (self.k as f64).powi(6) * self.q as f64, m)?;
        let v0 = Self::slot(p.r, self.k5 as f64, m)?;
        let u2 = a % self.k5;
        let u1 = (a / self.k5) % self.k;
        let u0 = a / self.k5 / self.k;
        let inner = self.interior();
        (inner.contains(&u2) && inner.contains(&v0)).then_some(CellIndex::eta(u0, u1, u2, v0))
    }

    /// The cell containing `p`, or `None` when p lies in a gap.
    pub fn locate(&self, level: Level, p: TorusPoint) -> Option<CellIndex> {
        match level {
            Level::Eta => self.eta_digits(p),
            Level::Zeta => self.zeta_digits(p).map(|(u, v)| CellIndex::zeta(u, v)),
            Level::TildeEta => self.zeta_digits(p).map(|(u, v)| CellIndex::piece(u[0], u[1], v[0])),
            Level::HatEta => None,
        }
    }

    /// η̂ element of a projectivized point; the η̃ piece index (u₁) is
    /// returned alongside.
    pub fn locate_proj(&self, pp: ProjPoint) -> Option<(CellIndex, u64)> {
        let (u, v) = self.zeta_digits(pp.point)?;
        Some((CellIndex::hat(u[0], v[0], pp.tangent_index(self.k)), u[1]))
    }

    /// Exact membership for rational coordinates in [0, 1).
    pub fn locate_exact(&self, level: Level, theta: &Rational, r: &Rational) -> Option<CellIndex> {
        if self.empty() {
            return None;
        }
        let d = Rational::from_integer(BigInt::from(self.denom));
        let tt = theta * &d;
        let rr = r * &d;
        // a point is inside iff lo <= x <= hi in ticks (closed boxes)
        let tick = |x: &Rational, unit: u128, margin: u128| -> Option<u128> {
            let unit_r = Rational::from_integer(BigInt::from(unit));
            let slot = (x / &unit_r).floor();
            let off = x - &slot * &unit_r;
            let mr = Rational::from_integer(BigInt::from(margin));
            if off < mr || off > &unit_r - &mr {
                return None;
            }
            slot.to_integer().to_u128()
        };
        let (k, k5) = (self.k as u128, self.k5 as u128);
        let inner = |d: u128| d >= 1 && d + 2 <= k5;
        match level {
            Level::Eta => {
                let a = tick(&tt, self.eta_theta_unit, self.eta_theta_margin)?;
                let v0 = tick(&rr, self.eta_r_unit, self.eta_r_margin)?;
                let (u2, u1, u0) = (a % k5, (a / k5) % k, a / k5 / k);
                (inner(u2) && inner(v0)).then_some(CellIndex::eta(u0 as u64, u1 as u64, u2 as u64, v0 as u64))
            }
            Level::Zeta | Level::TildeEta => {
                let mut a = tick(&tt, self.zeta_unit, 1)?;
                let mut b = tick(&rr, self.zeta_unit, 1)?;
                let k6q2 = 2 * k.pow(6) * self.q as u128;
                let u4 = a % k5;
                a /= k5;
                let u3 = a % k5;
                a /= k5;
                let u2 = a % k5;
                a /= k5;
                let (u1, u0) = (a % k, a / k);
                let v2 = b % k5;
                b /= k5;
                let (v1, v0) = (b % k6q2, b / k6q2);
                let q2 = 2 * self.q as u128;
                let ok = [u2, u3, u4, v0, v2].iter().all(|&d| inner(d)) && v1 >= q2 && v1 + q2 < k6q2;
                if !ok {
                    return None;
                }
                let c = |x: u128| x as u64;
                Some(if level == Level::Zeta {
                    CellIndex::zeta([c(u0), c(u1), c(u2), c(u3), c(u4)], [c(v0), c(v1), c(v2)])
                } else {
                    CellIndex::piece(c(u0), c(u1), c(v0))
                })
            }
            _ => None,
        }
    }

    /// Bounding strip of the η̃ piece (u₀,u₁,v₀) as floats: the 1/(2kq) column
    /// times the 1/k⁵ row.
    pub fn piece_strip(&self, u0: u64, u1: u64, v0: u64) -> [f64; 4] {
        let col = 1.0 / (2.0 * self.k as f64 * self.q as f64);
        let t0 = (u0 * self.k + u1) as f64 * col;
        let r0 = v0 as f64 / self.k5 as f64;
        [t0, t0 + col, r0, r0 + 1.0 / self.k5 as f64]
    }

    pub fn piece_strip_measure(&self) -> Rational {
        Rational::new(BigInt::from(1), BigInt::from(2 * self.k as u128 * self.q as u128 * self.k5 as u128))
    }
}

/// Cartesian product (u2, u3, u4, v0, v1, v2) for ζ enumeration.
fn itertools_product5(
    inner: std::ops::RangeInclusive<u64>,
    v1r: std::ops::RangeInclusive<u64>,
) -> impl Iterator<Item = (u64, u64, u64, u64, u64, u64)> {
    let i1 = inner.clone();
    i1.flat_map(move |u2| {
        let (inner, v1r) = (inner.clone(), v1r.clone());
        inner.clone().flat_map(move |u3| {
            let (inner, v1r) = (inner.clone(), v1r.clone());
            inner.clone().flat_map(move |u4| {
                let (inner, v1r) = (inner.clone(), v1r.clone());
                inner.clone().flat_map(move |v0| {
                    let (inner, v1r) = (inner.clone(), v1r.clone());
                    v1r.flat_map(move |v1| inner.clone().map(move |v2| (u2, u3, u4, v0, v1, v2)))
                })
            })
        })
    })
}

/// Diameters per stage for η and ζ.
pub fn diameter_decay(stages: &[StageParams]) -> Result<Vec<DiameterReport>> {
    let mut out = Vec::new();
    for s in stages {
        let p = Partition::new(s)?;
        out.push(p.max_diameter(Level::Eta));
        out.push(p.max_diameter(Level::Zeta));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn part(k: u64, q: u64) -> Partition {
        Partition::from_parts(1, k, q).unwrap()
    }

    #[test]
    fn eta_counts_and_widths() {
        let p = part(2, 1);
        assert_eq!(p.cells(Level::Eta).count(), 3600);
        assert_eq!(p.cell_count(Level::Eta), 3600);
        let (_, b) = p.cells(Level::Eta).next().unwrap();
        assert_eq!(b.theta_width(), ratio(1023, 131072));
        assert_eq!(b.r_width(), ratio(1023, 32768));
        let cov = p.coverage(Level::Eta);
        assert_eq!(cov.total_measure, ratio(3600, 1) * ratio(1023, 131072) * ratio(1023, 32768));
        assert!(cov.satisfied);
    }

    #[test]
    fn degenerate_k() {
        let p = part(1, 1);
        assert_eq!(p.cells(Level::Eta).count(), 0);
        let cov = p.coverage(Level::Zeta);
        assert!(!cov.satisfied);
        assert_eq!(cov.cell_count, 0);
    }

    #[test]
    fn margins_are_gaps() {
        let p = part(2, 1);
        assert_eq!(p.locate(Level::Eta, TorusPoint::new(0.0, 0.5)), None);
        assert_eq!(p.locate_exact(Level::Eta, &ratio(0, 1), &ratio(1, 2)), None);
    }

    #[test]
    fn zeta_round_trip_sample() {
        let p = part(2, 1);
        for i in 0..2000u64 {
            let d = |m: u64| 1 + (i * 7919 + m * 31) % 30;
            let idx = CellIndex::zeta([i % 2, (i / 2) % 2, d(1), d(2), d(3)], [d(4), 2 + (i * 13) % 124, d(5)]);
            let b = p.cell_box(&idx);
            assert_eq!(p.locate(Level::Zeta, b.center()), Some(idx));
            let (t, r) = b.center_exact();
            assert_eq!(p.locate_exact(Level::Zeta, &t, &r), Some(idx));
        }
    }
}

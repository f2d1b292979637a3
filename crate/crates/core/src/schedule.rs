//! Exact bookkeeping of the stage parameters, the rotation-number
//! recursion, the growth conditions and the mixing times.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{self, fmt_rational, from_int, ratio, serde_bigint, serde_rational, Rational};

/// All parameters of one stage. Derived fields are private and exposed
/// through accessors so they always agree with the defining formulas.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageParams {
    pub n: u32,
    pub k: u64,
    pub l: u64,
    #[serde(with = "serde_bigint")]
    pub q: BigInt,
    #[serde(with = "serde_bigint")]
    pub p: BigInt,
    #[serde(with = "serde_rational")]
    pub sigma: Rational,
    pub strict: bool,
    #[serde(with = "serde_bigint")]
    shear_a: BigInt,
    #[serde(with = "serde_bigint")]
    shear_b: BigInt,
    #[serde(with = "serde_rational")]
    shear_eps: Rational,
    #[serde(with = "serde_bigint")]
    rot_cols: BigInt,
    #[serde(with = "serde_bigint")]
    rot_cells: BigInt,
    #[serde(with = "serde_bigint")]
    rot_grid: BigInt,
    #[serde(with = "serde_rational")]
    rot_eps: Rational,
    #[serde(with = "serde_bigint")]
    phi_a_lambda: BigInt,
    #[serde(with = "serde_bigint")]
    phi_a_mu: BigInt,
    #[serde(with = "serde_rational")]
    phi_a_eps: Rational,
    #[serde(with = "serde_rational")]
    phi_a_eps2: Rational,
    #[serde(with = "serde_rational")]
    approx_d: Rational,
    #[serde(with = "serde_rational")]
    approx_eps: Rational,
}

fn pow_u(base: u64, e: u32) -> BigInt {
    Pow::pow(BigInt::from(base), e)
}

struct Derived {
    shear_a: BigInt,
    shear_b: BigInt,
    shear_eps: Rational,
    rot_cols: BigInt,
    rot_cells: BigInt,
    rot_grid: BigInt,
    rot_eps: Rational,
    phi_a_lambda: BigInt,
    phi_a_mu: BigInt,
    phi_a_eps: Rational,
    phi_a_eps2: Rational,
    approx_d: Rational,
    approx_eps: Rational,
}

fn derive(n: u32, k: u64, l: u64, q: &BigInt, sigma: &Rational) -> Derived {
    let n5 = pow_u(n as u64, 5);
    let two = BigInt::from(2);
    let one = BigInt::one();
    let k5 = pow_u(k, 5);
    let approx_d = Rational::new(
        one.clone(),
        Pow::pow(&two, n * n + 1) * BigInt::from(n as u64 * n as u64) * BigInt::from(l),
    );
    let approx_eps = &approx_d / from_int(&(BigInt::from(2) * pow_u(k, 8) * q * q));
    Derived {
        shear_a: k5.clone(),
        shear_b: rational::floor_scaled_power(&BigInt::from(n), q, sigma),
        shear_eps: Rational::new(one.clone(), &two * &n5 * pow_u(k, 10)),
        rot_cols: &two * k * q,
        rot_cells: &two * pow_u(k, 11) * q,
        rot_grid: k5.clone(),
        rot_eps: Rational::new(one.clone(), &two * &n5 * pow_u(k, 11)),
        phi_a_lambda: &two * k * q,
        phi_a_mu: k5.clone(),
        phi_a_eps: Rational::new(one.clone(), &two * &k5),
        phi_a_eps2: Rational::new(one, BigInt::from(4) * &n5 * pow_u(k, 10)),
        approx_d,
        approx_eps,
    }
}

/// Builds a stage from its free parameters.
pub fn derive_stage(
    n: u32,
    k: u64,
    l: u64,
    q: &BigInt,
    p: &BigInt,
    sigma: &Rational,
    strict: bool,
) -> Result<StageParams> {
    if n == 0 || k == 0 || l == 0 || !q.is_positive() {
        return Err(Error::InvalidArgument(format!(
            "n, k, l, q must be positive (n={n}, k={k}, l={l}, q={q})"
        )));
    }
    if !p.gcd(q).is_one() {
        return Err(Error::NonCoprime { p: p.to_string(), q: q.to_string() });
    }
    if *sigma <= ratio(1, 4) || *sigma >= ratio(1, 2) {
        return Err(Error::BadSigma(fmt_rational(sigma)));
    }
    let d = derive(n, k, l, q, sigma);
    if strict {
        let quarter = ratio(1, 4);
        for (name, eps) in [
            ("shear_eps", &d.shear_eps),
            ("rot_eps", &d.rot_eps),
            ("phiA_eps", &d.phi_a_eps),
            ("phiA_eps2", &d.phi_a_eps2),
        ] {
            if *eps >= quarter {
                return Err(Error::StrictViolation(format!(
                    "{name} = {} must be < 1/4 for disjoint plateaus",
                    fmt_rational(eps)
                )));
            }
        }
        if d.shear_b < BigInt::one() {
            return Err(Error::StrictViolation("shear_b must be >= 1".into()));
        }
    }
    Ok(StageParams {
        n,
        k,
        l,
        q: q.clone(),
        p: p.clone(),
        sigma: sigma.clone(),
        strict,
        shear_a: d.shear_a,
        shear_b: d.shear_b,
        shear_eps: d.shear_eps,
        rot_cols: d.rot_cols,
        rot_cells: d.rot_cells,
        rot_grid: d.rot_grid,
        rot_eps: d.rot_eps,
        phi_a_lambda: d.phi_a_lambda,
        phi_a_mu: d.phi_a_mu,
        phi_a_eps: d.phi_a_eps,
        phi_a_eps2: d.phi_a_eps2,
        approx_d: d.approx_d,
        approx_eps: d.approx_eps,
    })
}

/// Convenience constructor with machine-integer `q` and `p`.
pub fn stage(n: u32, k: u64, l: u64, q: u64, p: i64, sigma: Rational) -> Result<StageParams> {
    derive_stage(n, k, l, &BigInt::from(q), &BigInt::from(p), &sigma, false)
}

impl StageParams {
    pub fn shear_a(&self) -> &BigInt {
        &self.shear_a
    }
    pub fn shear_b(&self) -> &BigInt {
        &self.shear_b
    }
    pub fn shear_eps(&self) -> &Rational {
        &self.shear_eps
    }
    pub fn rot_cols(&self) -> &BigInt {
        &self.rot_cols
    }
    pub fn rot_cells(&self) -> &BigInt {
        &self.rot_cells
    }
    pub fn rot_grid(&self) -> &BigInt {
        &self.rot_grid
    }
    pub fn rot_eps(&self) -> &Rational {
        &self.rot_eps
    }
    pub fn phi_a_lambda(&self) -> &BigInt {
        &self.phi_a_lambda
    }
    pub fn phi_a_mu(&self) -> &BigInt {
        &self.phi_a_mu
    }
    pub fn phi_a_eps(&self) -> &Rational {
        &self.phi_a_eps
    }
    pub fn phi_a_eps2(&self) -> &Rational {
        &self.phi_a_eps2
    }
    pub fn approx_d(&self) -> &Rational {
        &self.approx_d
    }
    /// ε of the analytic scheme with the two norm factors set to 1; use
    /// [`StageParams::approx_eps_with`] once estimates are available.
    pub fn approx_eps(&self) -> &Rational {
        &self.approx_eps
    }

    /// ε = 𝔡 / (2k⁸q²·‖DH‖₀²·(2|||φ|||₂ + 1)) with estimated norms.
    pub fn approx_eps_with(&self, dh_sup: f64, phi_norm2: f64) -> f64 {
        rational::to_f64(&self.approx_eps) / (dh_sup * dh_sup * (2.0 * phi_norm2 + 1.0))
    }

    pub fn alpha(&self) -> Rational {
        Rational::new(self.p.clone(), self.q.clone())
    }

    /// `q` as a machine integer, failing for astronomically large stages.
    pub fn q_u64(&self) -> Result<u64> {
        self.q
            .to_u64()
            .ok_or_else(|| Error::NumericUnderflow(format!("q = {} exceeds 64 bits", self.q)))
    }

    pub fn shear_b_u64(&self) -> Result<u64> {
        self.shear_b
            .to_u64()
            .ok_or_else(|| Error::NumericUnderflow("shear_b exceeds 64 bits".into()))
    }

    /// Recomputes every derived field and compares it to the stored one.
    pub fn validate(&self) -> bool {
        let d = derive(self.n, self.k, self.l, &self.q, &self.sigma);
        d.shear_a == self.shear_a
            && d.shear_b == self.shear_b
            && d.shear_eps == self.shear_eps
            && d.rot_cols == self.rot_cols
            && d.rot_cells == self.rot_cells
            && d.rot_grid == self.rot_grid
            && d.rot_eps == self.rot_eps
            && d.phi_a_lambda == self.phi_a_lambda
            && d.phi_a_mu == self.phi_a_mu
            && d.phi_a_eps == self.phi_a_eps
            && d.phi_a_eps2 == self.phi_a_eps2
            && d.approx_d == self.approx_d
            && d.approx_eps == self.approx_eps
            && self.shear_b >= BigInt::one()
    }
}

/// α_{n+1} = p/q + 1/(k·l·q²) together with its reduced numerator and
/// denominator. The value is not reduced mod 1, so the sequence is
/// increasing; rotations reduce it when they are built.
pub fn next_alpha(stage: &StageParams) -> (Rational, BigInt, BigInt) {
    let q = &stage.q;
    let step = Rational::new(BigInt::one(), BigInt::from(stage.k) * BigInt::from(stage.l) * q * q);
    let a = stage.alpha() + step;
    let (p, q) = (a.numer().clone(), a.denom().clone());
    (a, q, p)
}

/// Chains stages: stage n+1 takes its (p, q) from the recursion.
pub fn chain_stages(
    first: (u32, u64, u64, &BigInt, &BigInt, &Rational),
    rest: &[(u64, u64, Rational)],
    strict: bool,
) -> Result<Vec<StageParams>> {
    let (n, k, l, q, p, sigma) = first;
    let mut out = vec![derive_stage(n, k, l, q, p, sigma, strict)?];
    for (k, l, sigma) in rest {
        let prev = out.last().unwrap();
        let (_, q_next, p_next) = next_alpha(prev);
        out.push(derive_stage(prev.n + 1, *k, *l, &q_next, &p_next, sigma, strict)?);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ConditionName {
    P1,
    P2,
    P3,
    P4,
    #[serde(rename = "ALPHA_CLOSENESS")]
    AlphaCloseness,
}

/// A side of a condition: exact rational or a flagged numerical estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Quantity {
    Exact {
        #[serde(with = "serde_rational")]
        value: Rational,
    },
    Estimate {
        value: f64,
    },
}

impl Quantity {
    pub fn exact(r: Rational) -> Self {
        Quantity::Exact { value: r }
    }
    pub fn is_estimate(&self) -> bool {
        matches!(self, Quantity::Estimate { .. })
    }
    pub fn as_f64(&self) -> f64 {
        match self {
            Quantity::Exact { value } => rational::to_f64(value),
            Quantity::Estimate { value } => *value,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionEntry {
    pub name: ConditionName,
    pub satisfied: bool,
    pub lhs: Quantity,
    pub rhs: Quantity,
    pub estimate_based: bool,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub n: u32,
    pub entries: Vec<ConditionEntry>,
}

impl ConditionReport {
    pub fn get(&self, name: ConditionName) -> &ConditionEntry {
        self.entries.iter().find(|e| e.name == name).expect("all five conditions present")
    }
}

/// Numerical inputs the growth conditions need beyond exact arithmetic.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct NormEstimates {
    /// ‖dH_{n−1}‖₀ (sup of derivative entries of the previous conjugacy).
    pub dh_prev_sup: Option<f64>,
    /// Lipschitz constant of (H_{n−1}, dH_{n−1}) on the projectivized bundle.
    pub lip_prev: Option<f64>,
    /// |||H_n|||_r for the order `r` below.
    pub h_norm: Option<f64>,
    pub r: u32,
    /// The unspecified constant Ĉ_r of the convergence estimate.
    pub c_hat: Option<f64>,
}

/// Reports P1–P4 and the α-closeness inequality for every stage.
/// `estimates[i]` belongs to `stages[i]`. For the first stage the previous
/// conjugacy is the identity, so its norms are exactly 1 and need no estimate.
pub fn check_conditions(
    stages: &[StageParams],
    estimates: &[NormEstimates],
) -> Result<Vec<ConditionReport>> {
    let mut out = Vec::with_capacity(stages.len());
    let alpha_last = stages.last().map(|s| next_alpha(s).0);
    for (i, s) in stages.iter().enumerate() {
        let est = estimates.get(i).cloned().unwrap_or_default();
        let k = BigInt::from(s.k);
        let n = s.n;
        let first = i == 0 && n == 1;
        let missing = |what: &str| Error::MissingEstimate(format!("stage {n}: {what}"));

        // P1: k ≥ n⁵ exactly, and 3·Lip/k ≤ 1/n².
        let k_big = k >= pow_u(n as u64, 5);
        let rhs1 = ratio(1, (n as i64) * (n as i64));
        let (lhs1, diam_ok) = if first {
            let l = Rational::new(BigInt::from(3), k.clone());
            let ok = l <= rhs1;
            (Quantity::exact(l), ok)
        } else {
            let lip = est.lip_prev.ok_or_else(|| missing("Lipschitz constant of (H_{n-1}, dH_{n-1})"))?;
            let v = 3.0 * lip / s.k as f64;
            (Quantity::Estimate { value: v }, v <= rational::to_f64(&rhs1))
        };
        let p1 = ConditionEntry {
            name: ConditionName::P1,
            satisfied: k_big && diam_ok,
            estimate_based: lhs1.is_estimate(),
            lhs: lhs1,
            rhs: Quantity::exact(rhs1),
            note: format!(
                "k >= n^5: {k_big}; diameter image bound 3*Lip/k compared with 1/n^2"
            ),
        };

        // P2: Σ_{u≥n} 1/k_u⁵ ≤ 1/(4k_n⁴) over the supplied stages.
        let tail: Rational = stages[i..]
            .iter()
            .map(|t| Rational::new(BigInt::one(), pow_u(t.k, 5)))
            .fold(Rational::zero(), |a, b| a + b);
        let rhs2 = Rational::new(BigInt::one(), BigInt::from(4) * pow_u(s.k, 4));
        let p2 = ConditionEntry {
            name: ConditionName::P2,
            satisfied: tail <= rhs2,
            lhs: Quantity::exact(tail),
            rhs: Quantity::exact(rhs2),
            estimate_based: false,
            note: "tail sum truncated at the last supplied stage".into(),
        };

        // P3: q^(1/4) > 2k  <=>  q > (2k)^4.
        let rhs3 = Pow::pow(BigInt::from(2) * &k, 4u32);
        let p3 = ConditionEntry {
            name: ConditionName::P3,
            satisfied: s.q > rhs3,
            lhs: Quantity::exact(from_int(&s.q)),
            rhs: Quantity::exact(from_int(&rhs3)),
            estimate_based: false,
            note: "q^(1/4) > 2k checked exactly as q > (2k)^4".into(),
        };

        // P4: l ≥ 2k¹⁰q²‖dH_{n−1}‖₀ and q_{n+1} > 2k¹²q².
        let (_, q_next, _) = next_alpha(s);
        let rhs4 = BigInt::from(2) * pow_u(s.k, 12) * &s.q * &s.q;
        let growth = q_next > rhs4;
        let l_base = BigInt::from(2) * pow_u(s.k, 10) * &s.q * &s.q;
        let (l_ok, l_note) = if first {
            (BigInt::from(s.l) >= l_base, format!("l >= 2k^10 q^2 = {l_base} (dH_0 = id)"))
        } else {
            let dh = est.dh_prev_sup.ok_or_else(|| missing("sup norm of dH_{n-1}"))?;
            let bound = l_base.to_f64().unwrap_or(f64::INFINITY) * dh;
            ((s.l as f64) >= bound, format!("l >= 2k^10 q^2 |dH_(n-1)| ~ {bound:.6e} (estimate)"))
        };
        let p4 = ConditionEntry {
            name: ConditionName::P4,
            satisfied: growth && l_ok,
            lhs: Quantity::exact(from_int(&q_next)),
            rhs: Quantity::exact(from_int(&rhs4)),
            estimate_based: !first,
            note: format!("q_next > 2k^12 q^2: {growth}; {l_note}: {l_ok}"),
        };

        // |α − α_n| < 1/(2^{n+1} r Ĉ q |||H_n|||_r^r), α ≈ α after the last stage.
        let gap = alpha_last.as_ref().unwrap() - s.alpha();
        let h = est.h_norm.ok_or_else(|| missing("|||H_n|||_r"))?;
        let c_hat = est.c_hat.ok_or_else(|| missing("constant C_r (config input)"))?;
        let r = est.r.max(1);
        let denom = 2f64.powi(n as i32 + 1)
            * r as f64
            * c_hat
            * s.q.to_f64().unwrap_or(f64::INFINITY)
            * h.powi(r as i32);
        let rhs5 = 1.0 / denom;
        let gap_f = rational::to_f64(&gap);
        let p5 = ConditionEntry {
            name: ConditionName::AlphaCloseness,
            satisfied: gap_f < rhs5,
            lhs: Quantity::exact(gap),
            rhs: Quantity::Estimate { value: rhs5 },
            estimate_based: true,
            note: format!("limit alpha truncated at the last stage; r = {r}, C = {c_hat} (config)"),
        };

        out.push(ConditionReport { n, entries: vec![p1, p2, p3, p4, p5] });
    }
    Ok(out)
}

/// Mixing time m_n and the offset 𝔞_n.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixingTime {
    #[serde(with = "serde_bigint")]
    pub m: BigInt,
    #[serde(with = "serde_rational")]
    pub frak_a: Rational,
}

/// Least x ≥ 0 with lo ≤ (a·x mod m) ≤ hi, for 0 ≤ lo ≤ hi < m.
/// Euclid-style recursion, O(log m) steps.
pub fn first_hit_in_range(a: &BigInt, m: &BigInt, lo: &BigInt, hi: &BigInt) -> Option<BigInt> {
    if lo.is_zero() {
        return Some(BigInt::zero());
    }
    let a = a.mod_floor(m);
    if a.is_zero() {
        return None;
    }
    let k = (lo + &a - 1u32).div_floor(&a);
    if &a * &k <= *hi {
        return Some(k);
    }
    // no multiple of a in [lo, hi]: need y with m·y mod a in [(−hi) mod a, (−lo) mod a]
    let lo2 = (-hi).mod_floor(&a);
    let hi2 = (-lo).mod_floor(&a);
    let y = first_hit_in_range(&m.mod_floor(&a), &a, &lo2, &hi2)?;
    let x = (lo + m * &y + &a - 1u32).div_floor(&a);
    if &a * &x - m * &y > *hi {
        return None;
    }
    Some(x)
}

/// m_n = least m ≤ q_next with dist(m·q_n·p_next/q_next − 1/2, ℤ) ≤ q_n/q_next,
/// and 𝔞_n = m·p_next/q_next − 1/(2q_n) reduced mod 1/q_n into [−1/(2q_n), 1/(2q_n)).
pub fn mixing_time(q_n: &BigInt, q_next: &BigInt, p_next: &BigInt) -> Result<MixingTime> {
    if !q_n.is_positive() || q_next < q_n {
        return Err(Error::InvalidArgument("need q_next >= q_n >= 1".into()));
    }
    let big_q = q_next;
    let c = (q_n * p_next).mod_floor(big_q);
    // x = c·m mod Q qualifies iff |2x − Q| ≤ 2q_n
    let two = BigInt::from(2);
    let lo = (big_q - &two * q_n + 1u32).div_floor(&two).max(BigInt::zero());
    let hi = ((big_q + &two * q_n).div_floor(&two)).min(big_q - 1u32);
    let m = if lo > hi {
        None
    } else if lo.is_zero() {
        let period = big_q / c.gcd(big_q);
        let inner = if hi >= BigInt::one() {
            first_hit_in_range(&c, big_q, &BigInt::one(), &hi)
        } else {
            None
        };
        Some(match inner {
            Some(x) if x < period => x,
            _ => period,
        })
    } else {
        first_hit_in_range(&c, big_q, &lo, &hi)
    };
    let m = match m {
        Some(m) if m >= BigInt::one() && &m <= big_q => m,
        _ => return Err(Error::NoMixingTime { q_next: q_next.to_string() }),
    };
    let frak_a = reduce_offset(&m, q_n, q_next, p_next);
    Ok(MixingTime { m, frak_a })
}

fn reduce_offset(m: &BigInt, q_n: &BigInt, q_next: &BigInt, p_next: &BigInt) -> Rational {
    let v = Rational::new(m * p_next, q_next.clone()) - Rational::new(BigInt::one(), BigInt::from(2) * q_n);
    let w = &v * from_int(q_n);
    let w = &w - (&w + ratio(1, 2)).floor();
    w / from_int(q_n)
}

/// Exhaustive reference scan for [`mixing_time`] over machine integers.
pub fn mixing_time_scan(q_n: u64, q_next: u64, p_next: u64) -> Option<u64> {
    let (qn, qq, pp) = (q_n as u128, q_next as u128, p_next as u128);
    (1..=qq).find(|&m| {
        let x = (m * qn % qq * (pp % qq)) % qq;
        (2 * x).abs_diff(qq) <= 2 * qn
    })
    .map(|m| m as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn toy() -> StageParams {
        stage(1, 2, 4, 2, 1, ratio(3, 8)).unwrap()
    }

    #[test]
    fn toy_stage_derived_fields() {
        let s = toy();
        assert_eq!(s.shear_a(), &int(32));
        assert_eq!(s.rot_cols(), &int(8));
        assert_eq!(s.rot_cells(), &int(8192));
        assert_eq!(s.phi_a_lambda(), &int(8));
        assert_eq!(s.phi_a_mu(), &int(32));
        assert_eq!(s.shear_b(), &int(1));
        assert_eq!(s.shear_eps(), &ratio(1, 2048));
        assert_eq!(s.approx_d(), &ratio(1, 16));
        assert!(s.validate());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(stage(1, 2, 4, 2, 2, ratio(3, 8)), Err(Error::NonCoprime { .. })));
        assert!(matches!(stage(1, 2, 4, 2, 1, ratio(1, 4)), Err(Error::BadSigma(_))));
        assert!(matches!(stage(1, 2, 4, 2, 1, ratio(1, 2)), Err(Error::BadSigma(_))));
        let r = derive_stage(1, 1, 1, &int(1), &int(0), &ratio(3, 8), true);
        assert!(matches!(r, Err(Error::StrictViolation(_))));
    }

    #[test]
    fn next_alpha_examples() {
        let (a, q, p) = next_alpha(&toy());
        assert_eq!((a, q, p), (ratio(17, 32), int(32), int(17)));
        let s = stage(1, 1, 1, 1, 0, ratio(3, 8)).unwrap();
        let (_, q, _) = next_alpha(&s);
        assert_eq!(q, int(1));
        let s = stage(1, 3, 9, 3, 1, ratio(3, 8)).unwrap();
        assert_eq!(next_alpha(&s).0, ratio(82, 243));
    }

    #[test]
    fn mixing_time_examples() {
        let mt = mixing_time(&int(2), &int(16), &int(1)).unwrap();
        assert_eq!((mt.m, mt.frak_a), (int(3), ratio(-1, 16)));
        assert_eq!(mixing_time(&int(1), &int(4), &int(1)).unwrap().m, int(1));
        assert_eq!(mixing_time(&int(1), &int(1), &int(1)).unwrap().m, int(1));
        let mt = mixing_time(&int(2), &int(32), &int(17)).unwrap();
        assert_eq!((mt.m, mt.frak_a), (int(7), ratio(-1, 32)));
    }

    #[test]
    fn toy_conditions() {
        let est = NormEstimates { h_norm: Some(1.0), c_hat: Some(1.0), r: 1, ..Default::default() };
        let rep = check_conditions(&[toy()], &[est.clone()]).unwrap();
        assert!(!rep[0].get(ConditionName::P3).satisfied);
        let p4 = rep[0].get(ConditionName::P4);
        assert!(!p4.satisfied);
        assert_eq!(p4.rhs, Quantity::exact(ratio(32768, 1)));
        let s = stage(1, 2, 4, 65536, 1, ratio(3, 8)).unwrap();
        assert!(check_conditions(&[s], &[est]).unwrap()[0].get(ConditionName::P3).satisfied);
        assert!(matches!(check_conditions(&[toy()], &[]), Err(Error::MissingEstimate(_))));
    }
}

//! Run configuration: JSON with unknown keys rejected, rationals and big
//! integers as strings.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::analytic::Scheme;
use crate::error::{Error, Result};
use crate::rational::{fmt_rational, Rational};
use crate::schedule::{derive_stage, next_alpha, StageParams};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Mode {
    Strict,
    #[default]
    Relaxed,
}

/// How partition membership of image points is decided.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Arithmetic {
    #[default]
    Float,
    Exact,
}

/// One stage. `q` and `p` may be left out after the first stage, in which
/// case they follow the rotation-number recursion; if given they must agree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageConfig {
    pub n: u32,
    pub k: u64,
    pub l: u64,
    #[serde(default, with = "opt_bigint")]
    pub q: Option<BigInt>,
    #[serde(default, with = "opt_bigint")]
    pub p: Option<BigInt>,
    #[serde(with = "crate::rational::serde_rational")]
    pub sigma: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Samples {
    pub area: usize,
    pub commute: usize,
    pub isometry_cells: usize,
    pub isometry_samples: usize,
    pub isometry_directions: usize,
    pub jacobian: usize,
    pub shift_law: usize,
    pub distribution: usize,
    pub mixing: usize,
}

impl Default for Samples {
    fn default() -> Self {
        Samples {
            area: 100_000,
            commute: 100_000,
            isometry_cells: 200,
            isometry_samples: 100,
            isometry_directions: 64,
            jacobian: 10_000,
            shift_law: 100_000,
            distribution: 40_000,
            mixing: 100_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub area: f64,
    pub commute: f64,
    pub isometry: f64,
    pub jacobian: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { area: 1e-9, commute: 1e-12, isometry: 1e-9, jacobian: 1e-5 }
    }
}

/// Inputs of the growth conditions that exact arithmetic cannot supply.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormConfig {
    pub order: u32,
    pub c_hat: f64,
    pub grid: usize,
}

impl Default for NormConfig {
    fn default() -> Self {
        NormConfig { order: 1, c_hat: 1.0, grid: 32 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ApproxConfig {
    pub scheme: Scheme,
    pub degrees: Vec<usize>,
    pub grid: usize,
    #[serde(with = "crate::rational::serde_rational")]
    pub eps_target: Rational,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        ApproxConfig { scheme: Scheme::Fejer, degrees: vec![16, 32, 64], grid: 4096, eps_target: crate::rational::ratio(1, 100) }
    }
}

/// η̂ element (u₀, v₀, j).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementConfig {
    pub u0: u64,
    pub v0: u64,
    pub j: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DistributeConfig {
    /// Defaults to u₀ = 0 and 1 in the middle row with j = 0.
    pub elements: Vec<ElementConfig>,
    /// Bound on d₁ of the analytic perturbation.
    pub d1_bound: f64,
}

/// Square [θ₀, θ₀+side) × [r₀, r₀+side) × T_k.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SquareConfig {
    pub theta0: f64,
    pub r0: f64,
    pub side: f64,
    pub k: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MixingConfig {
    /// Number of η̂ elements of half-column 0 used as Γ.
    pub gammas: usize,
    /// Defaults to two squares of side 1/k with fiber 0.
    pub squares: Vec<SquareConfig>,
    pub loss_cap: f64,
}

impl Default for MixingConfig {
    fn default() -> Self {
        MixingConfig { gammas: 2, squares: Vec::new(), loss_cap: crate::diagnostics::mixing::DEFAULT_LOSS_CAP }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub stages: Vec<StageConfig>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub arithmetic: Arithmetic,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub samples: Samples,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub norms: NormConfig,
    #[serde(default)]
    pub approx: ApproxConfig,
    #[serde(default)]
    pub distribute: DistributeConfig,
    #[serde(default)]
    pub mixing: MixingConfig,
}

mod opt_bigint {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<BigInt>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.serialize_str(&v.to_string()),
            None => s.serialize_none(),
        }
    }

    /// Accepts a decimal string or a JSON integer.
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<BigInt>, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Str(String),
        }
        match Option::<Raw>::deserialize(d)? {
            None => Ok(None),
            Some(Raw::Int(v)) => Ok(Some(BigInt::from(v))),
            Some(Raw::Str(s)) => s.parse().map(Some).map_err(serde::de::Error::custom),
        }
    }
}

impl RunConfig {
    /// Parses and validates; errors name the offending field and position.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config(format!("{path}: {}", e.into_inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::Config("stages: at least one stage is required".into()));
        }
        if self.stages[0].q.is_none() || self.stages[0].p.is_none() {
            return Err(Error::Config("stages[0]: q and p are required".into()));
        }
        if self.norms.order == 0 {
            return Err(Error::Config("norms.order: must be >= 1".into()));
        }
        if self.approx.degrees.is_empty() {
            return Err(Error::Config("approx.degrees: at least one degree is required".into()));
        }
        Ok(())
    }

    /// Derives every stage, filling in or checking (p, q) by the recursion.
    pub fn stage_params(&self) -> Result<Vec<StageParams>> {
        let strict = self.mode == Mode::Strict;
        let mut out: Vec<StageParams> = Vec::new();
        for (i, s) in self.stages.iter().enumerate() {
            let (q, p) = match out.last() {
                None => (s.q.clone().unwrap(), s.p.clone().unwrap()),
                Some(prev) => {
                    let (alpha, q_next, p_next) = next_alpha(prev);
                    for (name, given, want) in [("q", &s.q, &q_next), ("p", &s.p, &p_next)] {
                        if let Some(g) = given {
                            if g != want {
                                return Err(Error::InconsistentParams {
                                    expected: format!("stages[{i}].{name} = {want} (alpha = {})", fmt_rational(&alpha)),
                                    got: g.to_string(),
                                });
                            }
                        }
                    }
                    (q_next, p_next)
                }
            };
            out.push(derive_stage(s.n, s.k, s.l, &q, &p, &s.sigma, strict)?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = r#"{"stages": [{"n": 1, "k": 2, "l": 4, "q": 2, "p": 1, "sigma": "3/8"}], "seed": 42}"#;

    #[test]
    fn toy_config_parses() {
        let c = RunConfig::from_json(TOY).unwrap();
        assert_eq!(c.samples.area, 100_000);
        let s = c.stage_params().unwrap();
        assert_eq!(s[0].q, BigInt::from(2));
    }

    #[test]
    fn unknown_key_names_its_path() {
        let bad = r#"{"stages": [{"n": 1, "k": 2, "l": 4, "q": 2, "p": 1, "sigma": "3/8", "bogus": 1}]}"#;
        match RunConfig::from_json(bad) {
            Err(Error::Config(m)) => assert!(m.contains("stages[0]") && m.contains("bogus"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_stages_rejected() {
        assert!(matches!(RunConfig::from_json(r#"{"stages": []}"#), Err(Error::Config(_))));
    }

    #[test]
    fn later_stage_follows_recursion() {
        let two = r#"{"stages": [{"n": 1, "k": 2, "l": 4, "q": 2, "p": 1, "sigma": "3/8"},
                                 {"n": 2, "k": 2, "l": 4, "q": "33", "sigma": "3/8"}]}"#;
        let c = RunConfig::from_json(two).unwrap();
        assert!(matches!(c.stage_params(), Err(Error::InconsistentParams { .. })));
    }
}

//! Subcommand bodies. Each writes its reports through an [`Output`] and
//! returns a one-line summary for the terminal.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analytic::{approximate_profile, distance_report, AnalyticShear, ApproxReport};
use crate::cli::config::{Arithmetic, RunConfig};
use crate::cli::manifest::Output;
use crate::cli::render;
use crate::diagnostics::deviation::deviation;
use crate::diagnostics::distribution::{distribution_constants, perturbed_constants, shift_law_check, DistributionInput, DistributionReport, ShiftLawReport};
use crate::diagnostics::mixing::{hat_eta_gammas, stage_mixing, MixingReport, PtmSet};
use crate::diagnostics::norms::norm_estimate;
use crate::error::{Error, Result};
use crate::map::{jacobian_fd_check, MapExpr};
use crate::partition::{CellIndex, CoverageReport, Level, Partition};
use crate::rational::{self, fmt_rational, ratio};
use crate::sampling::{chunk_rng, par_chunks, uniform_point};
use crate::schedule::{check_conditions, next_alpha, ConditionReport, MixingTime, NormEstimates, StageParams};
use crate::stage::AssembledStage;
use crate::torus::{ProjPoint, TorusPoint};
use crate::type_b::{GoodPolicy, TypeBMap, DEFAULT_R1, DEFAULT_R2};

/// Everything a subcommand needs besides its own flags.
pub struct Ctx {
    pub cfg: RunConfig,
    pub config_json: String,
    pub out: PathBuf,
    pub seed: u64,
    pub samples: Option<usize>,
    /// Zero-based index into the configured stages.
    pub stage: usize,
}

impl Ctx {
    pub fn new(cfg: RunConfig, out: Option<PathBuf>, seed: Option<u64>, samples: Option<usize>, stage: Option<u32>) -> Result<Self> {
        let config_json = serde_json::to_string(&cfg).map_err(|e| Error::Config(e.to_string()))?;
        let out = out.or_else(|| cfg.output_dir.clone().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("abc-out"));
        let idx = match stage {
            None => 0,
            Some(n) => cfg
                .stages
                .iter()
                .position(|s| s.n == n)
                .ok_or_else(|| Error::Config(format!("--stage {n}: no configured stage with that n")))?,
        };
        Ok(Ctx { seed: seed.unwrap_or(cfg.seed), cfg, config_json, out, samples, stage: idx })
    }

    fn output(&self, command: &str) -> Result<Output> {
        Output::new(&self.out, command, self.seed)
    }

    /// Assembles stages 0..=self.stage in order.
    fn assembled(&self) -> Result<(Vec<StageParams>, AssembledStage)> {
        let params = self.cfg.stage_params()?;
        let mut prev: Option<AssembledStage> = None;
        for s in &params[..=self.stage] {
            prev = Some(AssembledStage::build(s, prev.as_ref())?);
        }
        Ok((params, prev.unwrap()))
    }
}

fn summary(dir: &Path, files: &[&str]) -> String {
    format!("wrote {} to {}", files.join(", "), dir.display())
}

// ---------------------------------------------------------------- params

#[derive(Serialize)]
struct StageRow {
    params: StageParams,
    #[serde(with = "crate::rational::serde_rational")]
    alpha_next: rational::Rational,
    mixing: Option<MixingTime>,
    norms: NormEstimates,
}

#[derive(Serialize)]
struct ParamsReport {
    stages: Vec<StageRow>,
    conditions: Vec<ConditionReport>,
}

/// Norm inputs of the growth conditions from grid estimates of H_n.
fn norm_inputs(cfg: &RunConfig, params: &[StageParams]) -> Result<Vec<NormEstimates>> {
    let mut out = Vec::new();
    let mut prev: Option<AssembledStage> = None;
    let mut prev_norms: Option<Vec<f64>> = None;
    for s in params {
        let st = AssembledStage::build(s, prev.as_ref())?;
        let order = cfg.norms.order.max(2).min(3);
        let rep = norm_estimate(&st.big_h, order, cfg.norms.grid)?;
        let h_norm = if cfg.norms.order <= 3 {
            rep.per_order[..cfg.norms.order as usize].iter().cloned().fold(0.0, f64::max)
        } else {
            norm_estimate(&st.big_h, cfg.norms.order, cfg.norms.grid)?.estimate
        };
        // Lipschitz constant of (H, dH) on the bundle: the base moves by at
        // most |dH|, the fiber by at most |dH|² (det 1) plus |d²H|·|dH|.
        let (dh_prev_sup, lip_prev) = match &prev_norms {
            Some(p) => (Some(p[0]), Some((p[0] * p[0]).max(p[0] * p[1]).max(p[0]))),
            None => (None, None),
        };
        out.push(NormEstimates { dh_prev_sup, lip_prev, h_norm: Some(h_norm), r: cfg.norms.order, c_hat: Some(cfg.norms.c_hat) });
        prev_norms = Some(rep.per_order.clone());
        prev = Some(st);
    }
    Ok(out)
}

pub fn cmd_params(ctx: &Ctx) -> Result<String> {
    let mut out = ctx.output("params")?;
    let params = ctx.cfg.stage_params()?;
    let norms = norm_inputs(&ctx.cfg, &params)?;
    let conditions = check_conditions(&params, &norms)?;
    let mut csv = String::from("n,k,l,q,p,sigma,alpha_next,m,frak_a,shear_a,shear_b,shear_eps,rot_cols,rot_cells,rot_grid,rot_eps,phi_a_lambda,phi_a_mu,phi_a_eps,phi_a_eps2,approx_d,approx_eps,P1,P2,P3,P4,ALPHA_CLOSENESS\n");
    let mut rows = Vec::new();
    for ((s, n), c) in params.iter().zip(norms).zip(&conditions) {
        let (alpha_next, q_next, p_next) = next_alpha(s);
        let mixing = crate::schedule::mixing_time(&s.q, &q_next, &p_next).ok();
        let verdicts: Vec<String> = c.entries.iter().map(|e| e.satisfied.to_string()).collect();
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            s.n,
            s.k,
            s.l,
            s.q,
            s.p,
            fmt_rational(&s.sigma),
            fmt_rational(&alpha_next),
            mixing.as_ref().map(|m| m.m.to_string()).unwrap_or_default(),
            mixing.as_ref().map(|m| fmt_rational(&m.frak_a)).unwrap_or_default(),
            s.shear_a(),
            s.shear_b(),
            fmt_rational(s.shear_eps()),
            s.rot_cols(),
            s.rot_cells(),
            s.rot_grid(),
            fmt_rational(s.rot_eps()),
            s.phi_a_lambda(),
            s.phi_a_mu(),
            fmt_rational(s.phi_a_eps()),
            fmt_rational(s.phi_a_eps2()),
            fmt_rational(s.approx_d()),
            fmt_rational(s.approx_eps()),
            verdicts.join(",")
        ));
        rows.push(StageRow { params: s.clone(), alpha_next, mixing, norms: n });
    }
    let verdict: Vec<String> = conditions
        .iter()
        .map(|c| {
            let v: Vec<String> = c.entries.iter().map(|e| format!("{:?}={}", e.name, e.satisfied)).collect();
            format!("n={}: {}", c.n, v.join(" "))
        })
        .collect();
    out.write_json("params.json", &ParamsReport { stages: rows, conditions })?;
    out.write("params.csv", csv.as_bytes())?;
    let dir = out.dir().to_path_buf();
    out.finish(&ctx.config_json)?;
    Ok(format!("{}\n{}", verdict.join("\n"), summary(&dir, &["params.json", "params.csv"])))
}

// ---------------------------------------------------------------- verify

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
#[value(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Suite {
    All,
    Area,
    Commute,
    Isometry,
    Partition,
    Shiftlaw,
    Jacobian,
}

impl Suite {
    pub fn parse(s: &str) -> Option<Suite> {
        <Suite as clap::ValueEnum>::from_str(s, true).ok()
    }

    fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Area, Suite::Commute, Suite::Isometry, Suite::Partition, Suite::Shiftlaw, Suite::Jacobian],
            s => vec![s],
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub count: usize,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub stage: u32,
    pub seed: u64,
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

fn check(name: &str, measured: f64, tolerance: f64, count: usize, detail: String) -> Check {
    Check { name: name.to_string(), passed: count > 0 && measured <= tolerance, measured, tolerance, count, detail }
}

/// max |det J − 1| over uniform samples; `all` also counts TRANSITION points.
fn area_check(name: &str, expr: &MapExpr, all: bool, samples: usize, seed: u64, tol: f64) -> Check {
    let parts = par_chunks(seed, samples, |rng, range| {
        let (mut used, mut worst) = (0usize, 0.0f64);
        for _ in range {
            let r = expr.eval_jet(uniform_point(rng));
            if all || r.is_good() {
                used += 1;
                worst = worst.max((r.jet.deriv.determinant() - 1.0).abs());
            }
        }
        (used, worst)
    });
    let used = parts.iter().map(|p| p.0).sum();
    let worst = parts.iter().map(|p| p.1).fold(0.0, f64::max);
    let scope = if all { "all samples" } else { "GOOD samples" };
    check(name, worst, tol, used, format!("max |det J - 1| over {used} {scope} of {samples}"))
}

fn suite_area(ctx: &Ctx, st: &AssembledStage) -> Result<Vec<Check>> {
    let n = ctx.samples.unwrap_or(ctx.cfg.samples.area);
    let tol = ctx.cfg.tolerances.area;
    let i = MapExpr::prim(TypeBMap::for_stage(&st.stage, DEFAULT_R1, DEFAULT_R2, GoodPolicy::PlateauOrIdentity)?);
    Ok(vec![
        area_check("g", &st.g, true, n, ctx.seed, tol),
        area_check("i", &i, true, n, ctx.seed.wrapping_add(1), tol),
        area_check("phi", &st.phi, false, n, ctx.seed.wrapping_add(2), tol),
        area_check("f", &st.f, false, n, ctx.seed.wrapping_add(3), tol),
    ])
}

fn suite_commute(ctx: &Ctx, st: &AssembledStage) -> Result<Vec<Check>> {
    let n = ctx.samples.unwrap_or(ctx.cfg.samples.commute);
    let q = st.stage.q_u64()?;
    let rot = MapExpr::rotation(ratio(1, q as i64));
    let a = MapExpr::compose(st.g.clone(), rot.clone());
    let b = MapExpr::compose(rot, st.g.clone());
    let parts = par_chunks(ctx.seed, n, |rng, range| {
        range.map(|_| {
            let p = uniform_point(rng);
            a.eval(p).dist(&b.eval(p))
        })
        .fold(0.0, f64::max)
    });
    let worst = parts.into_iter().fold(0.0, f64::max);
    Ok(vec![check("g_commutes_with_R_1/q", worst, ctx.cfg.tolerances.commute, n, format!("max torus distance over {n} samples"))])
}

/// Random ζ cells whose center is GOOD for h.
fn good_zeta_cells(part: &Partition, h: &MapExpr, want: usize, seed: u64) -> Vec<CellIndex> {
    let mut rng = chunk_rng(seed, 0);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for _ in 0..want * 10_000 {
        if out.len() == want {
            break;
        }
        let Some(c) = part.locate(Level::Zeta, uniform_point(&mut rng)) else { continue };
        if !seen.insert(c) {
            continue;
        }
        if h.is_good(part.cell_box(&c).center()) {
            out.push(c);
        }
    }
    out
}

fn suite_isometry(ctx: &Ctx, st: &AssembledStage, part: &Partition) -> Result<Vec<Check>> {
    let s = &ctx.cfg.samples;
    let cells = good_zeta_cells(part, &st.h, s.isometry_cells, ctx.seed);
    let mut worst = 0.0f64;
    let mut used = 0usize;
    for (i, c) in cells.iter().enumerate() {
        match deviation(&st.h, part, c, s.isometry_samples, s.isometry_directions, ctx.seed.wrapping_add(i as u64)) {
            Ok(r) => {
                used += 1;
                worst = worst.max(r.dev);
            }
            Err(Error::NoGoodSamples) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(vec![check(
        "dev_h_on_good_zeta_cells",
        worst,
        ctx.cfg.tolerances.isometry,
        used,
        format!("{used} cells x {} samples x {} directions", s.isometry_samples, s.isometry_directions),
    )])
}

/// Every float membership decision must agree with exact rational
/// membership of the same (dyadic) point.
fn locate_agreement(part: &Partition, samples: usize, seed: u64) -> Check {
    let parts = par_chunks(seed, samples, |rng, range| {
        let (mut decided, mut wrong) = (0usize, 0usize);
        for _ in range {
            let p = uniform_point(rng);
            let (t, r) = (rational::Rational::from_float(p.theta).unwrap(), rational::Rational::from_float(p.r).unwrap());
            for level in [Level::Eta, Level::Zeta, Level::TildeEta] {
                if let Some(c) = part.locate(level, p) {
                    decided += 1;
                    if part.locate_exact(level, &t, &r) != Some(c) {
                        wrong += 1;
                    }
                }
            }
        }
        (decided, wrong)
    });
    let decided = parts.iter().map(|p| p.0).sum();
    let wrong: usize = parts.iter().map(|p| p.1).sum();
    check("float_locate_matches_exact", wrong as f64, 0.0, decided, format!("{wrong} disagreements in {decided} float decisions"))
}

fn suite_partition(ctx: &Ctx, part: &Partition) -> Vec<Check> {
    let mut checks: Vec<Check> = [Level::Eta, Level::Zeta, Level::TildeEta, Level::HatEta]
        .into_iter()
        .map(|l| {
            let r: CoverageReport = part.coverage(l);
            let margin = rational::to_f64(&(&r.paper_bound - &r.total_measure));
            Check {
                name: format!("coverage_{l:?}").to_lowercase(),
                passed: r.satisfied,
                measured: rational::to_f64(&r.total_measure),
                tolerance: rational::to_f64(&r.paper_bound),
                count: r.cell_count.min(usize::MAX as u128) as usize,
                detail: format!("coverage {} vs bound {} (bound - coverage = {margin:e})", fmt_rational(&r.total_measure), fmt_rational(&r.paper_bound)),
            }
        })
        .collect();
    if ctx.cfg.arithmetic == Arithmetic::Exact {
        checks.push(locate_agreement(part, 10_000, ctx.seed));
    }
    checks
}

fn law_check(name: &str, r: &ShiftLawReport) -> Check {
    Check {
        name: name.to_string(),
        passed: r.violations == 0 && r.good > 0,
        measured: r.violations as f64,
        tolerance: 0.0,
        count: r.good,
        detail: format!(
            "{} GOOD of {} (gap {}, transition {}, landing excluded {}); first violation {:?}",
            r.good, r.samples, r.gap, r.transition, r.landing_miss, r.first_violation
        ),
    }
}

fn suite_shiftlaw(ctx: &Ctx, st: &AssembledStage, part: &Partition) -> Result<Vec<Check>> {
    let n = ctx.samples.unwrap_or(ctx.cfg.samples.shift_law);
    let phi = shift_law_check(&DistributionInput::phi(st, part), n, ctx.seed)?;
    let big = shift_law_check(&DistributionInput::for_stage(st, part), n, ctx.seed.wrapping_add(1))?;
    Ok(vec![law_check("phi", &phi), law_check("Phi", &big)])
}

/// Relative FD error over uniform samples. `smooth` maps are checked at
/// every point, the others only where the whole stencil is GOOD and, if a
/// partition is given, inside one ζ cell.
fn jacobian_check(name: &str, expr: &MapExpr, cells: Option<&Partition>, samples: usize, seed: u64, tol: f64) -> Check {
    let h = expr.min_feature_scale() * 1e-4;
    let parts = par_chunks(seed, samples, |rng, range| {
        let (mut used, mut worst) = (0usize, 0.0f64);
        for _ in range {
            let p = uniform_point(rng);
            if let Some(part) = cells {
                let c = part.locate(Level::Zeta, p);
                let inside = c.is_some()
                    && [(2.0 * h, 0.0), (-2.0 * h, 0.0), (0.0, 2.0 * h), (0.0, -2.0 * h)]
                        .iter()
                        .all(|&(a, b)| part.locate(Level::Zeta, p.shifted(a, b)) == c);
                if !inside {
                    continue;
                }
            }
            if let Ok(e) = jacobian_fd_check(expr, p, h) {
                used += 1;
                worst = worst.max(e);
            }
        }
        (used, worst)
    });
    let used = parts.iter().map(|p| p.0).sum();
    let worst = parts.iter().map(|p| p.1).fold(0.0, f64::max);
    check(name, worst, tol, used, format!("step {h:e}, {used} collar-free samples of {samples}"))
}

fn suite_jacobian(ctx: &Ctx, st: &AssembledStage) -> Result<Vec<Check>> {
    let n = ctx.samples.unwrap_or(ctx.cfg.samples.jacobian);
    let tol = ctx.cfg.tolerances.jacobian;
    let i = MapExpr::prim(TypeBMap::for_stage(&st.stage, DEFAULT_R1, DEFAULT_R2, GoodPolicy::PlateauOrIdentity)?);
    let a = MapExpr::prim(st.phi_map.type_a.clone());
    let rot = MapExpr::rotation(st.alpha_next.clone());
    let part = st.phi_map.type_a.partition();
    // rejection keeps the collar-free count near `n`
    let boost = |frac: f64| ((n as f64 / frac).ceil() as usize).min(n * 50);
    let good_g = st.shear.profile.collar_width() * st.shear.profile.a as f64;
    Ok(vec![
        jacobian_check("g", &st.g, None, boost(1.0 - 2.0 * good_g), ctx.seed, tol),
        jacobian_check("i", &i, None, boost(0.75), ctx.seed.wrapping_add(1), tol),
        jacobian_check("phi_tilde", &a, Some(part), boost(0.5), ctx.seed.wrapping_add(2), tol),
        jacobian_check("rotation", &rot, None, n, ctx.seed.wrapping_add(3), tol),
    ])
}

/// Runs the selected suites on the configured stage and writes verify.json.
/// Returns the report; failing suites become an assertion error in `run`.
pub fn cmd_verify(ctx: &Ctx, suite: Suite) -> Result<VerifyReport> {
    let mut out = ctx.output("verify")?;
    let (_, st) = ctx.assembled()?;
    let part = Partition::new(&st.stage)?;
    let mut suites = Vec::new();
    for s in suite.expand() {
        let checks = match s {
            Suite::Area => suite_area(ctx, &st)?,
            Suite::Commute => suite_commute(ctx, &st)?,
            Suite::Isometry => suite_isometry(ctx, &st, &part)?,
            Suite::Partition => suite_partition(ctx, &part),
            Suite::Shiftlaw => suite_shiftlaw(ctx, &st, &part)?,
            Suite::Jacobian => suite_jacobian(ctx, &st)?,
            Suite::All => unreachable!(),
        };
        suites.push(SuiteResult { suite: s, passed: checks.iter().all(|c| c.passed), checks });
    }
    let report = VerifyReport { stage: st.stage.n, seed: ctx.seed, passed: suites.iter().all(|s| s.passed), suites };
    out.write_json("verify.json", &report)?;
    out.finish(&ctx.config_json)?;
    Ok(report)
}

pub fn verify_summary(r: &VerifyReport) -> String {
    let mut lines = Vec::new();
    for s in &r.suites {
        for c in &s.checks {
            lines.push(format!(
                "{} {:?}/{}: measured {:e} (tolerance {:e}, n = {})",
                if c.passed { "PASS" } else { "FAIL" },
                s.suite,
                c.name,
                c.measured,
                c.tolerance,
                c.count
            ));
        }
    }
    lines.join("\n")
}

/// First failing check as an assertion error.
pub fn verify_outcome(r: &VerifyReport) -> Result<()> {
    for s in &r.suites {
        if let Some(c) = s.checks.iter().find(|c| !c.passed) {
            return Err(Error::Assertion(format!("{:?}/{}: {} ({})", s.suite, c.name, c.measured, c.detail)));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- distribute

#[derive(Serialize)]
struct ElementOutcome {
    element: CellIndex,
    report: Option<DistributionReport>,
    perturbed: Option<DistributionReport>,
    error: Option<String>,
}

#[derive(Serialize)]
struct DistributeFile {
    stage: u32,
    m: String,
    elements: Vec<ElementOutcome>,
    identity_baseline: ElementOutcome,
}

fn element_outcome(inp: &DistributionInput, e: CellIndex, samples: usize, seed: u64, d1: Option<f64>) -> ElementOutcome {
    match distribution_constants(inp, &e, samples, seed) {
        Ok(r) => ElementOutcome {
            element: e,
            perturbed: d1.and_then(|d| perturbed_constants(&r, inp.n, d).ok()),
            report: Some(r),
            error: None,
        },
        Err(err) => ElementOutcome { element: e, report: None, perturbed: None, error: Some(err.to_string()) },
    }
}

pub fn cmd_distribute(ctx: &Ctx) -> Result<String> {
    let mut out = ctx.output("distribute")?;
    let (_, st) = ctx.assembled()?;
    let part = Partition::new(&st.stage)?;
    let samples = ctx.samples.unwrap_or(ctx.cfg.samples.distribution);
    let k5 = st.stage.k.pow(5);
    let elements: Vec<CellIndex> = if ctx.cfg.distribute.elements.is_empty() {
        (0..2).map(|u0| CellIndex::hat(u0, k5 / 2, 0)).collect()
    } else {
        ctx.cfg.distribute.elements.iter().map(|e| CellIndex::hat(e.u0, e.v0, e.j)).collect()
    };
    let inp = DistributionInput::for_stage(&st, &part);
    let d1 = Some(ctx.cfg.distribute.d1_bound);
    let outcomes: Vec<ElementOutcome> = elements
        .iter()
        .enumerate()
        .map(|(i, e)| element_outcome(&inp, *e, samples, ctx.seed.wrapping_add(i as u64), d1))
        .collect();
    let id = MapExpr::Identity;
    let baseline = element_outcome(&DistributionInput::plain(&part, &id, st.stage.n), elements[0], samples, ctx.seed, None);
    if outcomes.iter().all(|o| o.error.is_some()) {
        return Err(distribution_constants(&inp, &elements[0], samples, ctx.seed).err().unwrap());
    }
    let lines: Vec<String> = outcomes
        .iter()
        .map(|o| match &o.report {
            Some(r) => format!(
                "element u0={} v0={} j={}: gamma {:.4e} delta {:.4e} eps1 {:.4e} eps2 {:.4e} loss {:.3} satisfied {} within budget {}",
                o.element.u0(), o.element.v0(), o.element.j, r.gamma, r.delta, r.eps1, r.eps2, r.loss_budget, r.satisfied, r.satisfied_within_budget
            ),
            None => format!("element u0={} v0={} j={}: {}", o.element.u0(), o.element.v0(), o.element.j, o.error.as_deref().unwrap_or("")),
        })
        .collect();
    out.write_json(
        "distribute.json",
        &DistributeFile { stage: st.stage.n, m: st.mixing.m.to_string(), elements: outcomes, identity_baseline: baseline },
    )?;
    let dir = out.dir().to_path_buf();
    out.finish(&ctx.config_json)?;
    Ok(format!("{}\n{}", lines.join("\n"), summary(&dir, &["distribute.json"])))
}

// ---------------------------------------------------------------- mixing

pub fn cmd_mixing(ctx: &Ctx) -> Result<String> {
    let mut out = ctx.output("mixing")?;
    let (_, st) = ctx.assembled()?;
    let part = Partition::new(&st.stage)?;
    let mc = &ctx.cfg.mixing;
    let samples = ctx.samples.unwrap_or(ctx.cfg.samples.mixing);
    let gammas = hat_eta_gammas(&part, 0, 0, mc.gammas);
    let side = 1.0 / st.stage.k as f64;
    let squares: Vec<PtmSet> = if mc.squares.is_empty() {
        vec![
            PtmSet::SquareFiber { theta0: 0.0, r0: 0.0, side, k: 0 },
            PtmSet::SquareFiber { theta0: 0.5, r0: 0.5, side, k: 0 },
        ]
    } else {
        mc.squares.iter().map(|s| PtmSet::SquareFiber { theta0: s.theta0, r0: s.r0, side: s.side, k: s.k }).collect()
    };
    let rep: MixingReport = stage_mixing(&st, &part, &gammas, &squares, samples, ctx.seed, mc.loss_cap)?;
    let worst = rep.pairs.iter().map(|p| p.abs_correlation).fold(0.0, f64::max);
    out.write_json("mixing.json", &rep)?;
    let dir = out.dir().to_path_buf();
    out.finish(&ctx.config_json)?;
    Ok(format!(
        "m = {}, {} pairs, max |correlation| {:.4e}, loss {:.3}\n{}",
        rep.m,
        rep.pairs.len(),
        worst,
        rep.loss_budget,
        summary(&dir, &["mixing.json"])
    ))
}

// ---------------------------------------------------------------- approx

pub fn cmd_approx(ctx: &Ctx, degree: Option<usize>, what: Option<&str>) -> Result<String> {
    match what.unwrap_or("shear") {
        "shear" | "g" => {}
        other => return Err(Error::InvalidArgument(format!("approx target {other:?}: only the shear g is approximated"))),
    }
    let mut out = ctx.output("approx")?;
    let (_, st) = ctx.assembled()?;
    let ac = &ctx.cfg.approx;
    let degrees = degree.map(|d| vec![d]).unwrap_or_else(|| ac.degrees.clone());
    let mut reports: Vec<ApproxReport> = Vec::new();
    let mut names = vec!["approx.json".to_string()];
    for &d in &degrees {
        let profile = approximate_profile(&st.shear.profile, d, ac.scheme)?;
        let name = format!("coefficients_N{d}.csv");
        out.write(&name, profile.to_csv().as_bytes())?;
        names.push(name);
        let a = AnalyticShear::new(profile, st.shear.profile.b, st.shear.q);
        reports.push(distance_report(&st.g, &a, ac.grid, &ac.eps_target)?);
    }
    out.write_json("approx.json", &reports)?;
    let dir = out.dir().to_path_buf();
    out.finish(&ctx.config_json)?;
    let lines: Vec<String> = reports
        .iter()
        .map(|r| format!("N={}: d0 {:.6e} d1 {:.6e} d2 {:.6e}", r.degree, r.distances[0], r.distances[1], r.distances[2]))
        .collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    Ok(format!("{}\n{}", lines.join("\n"), summary(&dir, &refs)))
}

// ---------------------------------------------------------------- orbit

pub const DEFAULT_ORBIT_START: (f64, f64, f64) = (0.33, 0.21, 0.1);

pub fn parse_start(what: Option<&str>) -> Result<(f64, f64, f64)> {
    let Some(s) = what else { return Ok(DEFAULT_ORBIT_START) };
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::InvalidArgument(format!("--what {s:?}: {e}")))?;
    match v[..] {
        [t, r, f] => Ok((t, r, f)),
        _ => Err(Error::InvalidArgument(format!("--what {s:?}: expected theta,r,t"))),
    }
}

/// Orbit of (f_n, df_n) as CSV rows (iterate, θ, r, t, tag).
pub fn orbit_csv(f: &MapExpr, start: (f64, f64, f64), iterates: usize) -> String {
    let mut s = String::from("iterate,theta,r,t,tag\n");
    let mut pp = ProjPoint::new(start.0, start.1, start.2);
    s.push_str(&format!("0,{:?},{:?},{:?},GOOD\n", pp.point.theta, pp.point.r, pp.t));
    for i in 1..=iterates {
        let (next, tag) = f.eval_proj(pp);
        pp = next;
        let tag = if tag.is_good() { "GOOD" } else { "TRANSITION" };
        s.push_str(&format!("{i},{:?},{:?},{:?},{tag}\n", pp.point.theta, pp.point.r, pp.t));
    }
    s
}

pub fn cmd_orbit(ctx: &Ctx, what: Option<&str>) -> Result<String> {
    let start = parse_start(what)?;
    let mut out = ctx.output("orbit")?;
    let (_, st) = ctx.assembled()?;
    let iterates = ctx.samples.unwrap_or(100);
    out.write("orbit.csv", orbit_csv(&st.f, start, iterates).as_bytes())?;
    let dir = out.dir().to_path_buf();
    out.finish(&ctx.config_json)?;
    Ok(format!("{iterates} iterates of f_{} from {start:?}\n{}", st.stage.n, summary(&dir, &["orbit.csv"])))
}

// ---------------------------------------------------------------- render

fn read_orbit(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path)?;
    let mut pts = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let bad = || Error::InvalidArgument(format!("{}:{}: expected iterate,theta,r,t,tag", path.display(), i + 1));
        if f.len() != 5 {
            return Err(bad());
        }
        pts.push((f[1].parse().map_err(|_| bad())?, f[2].parse().map_err(|_| bad())?));
    }
    Ok(pts)
}

/// Images of a 32×32 grid in every η̃ piece of the row v₀ = k⁵/2 in the
/// first two half-columns.
fn image_points(part: &Partition, map: &MapExpr) -> Vec<(f64, f64)> {
    let v0 = part.k.pow(5) / 2;
    let g = 32;
    let mut pts = Vec::new();
    for u0 in 0..2 {
        for u1 in 0..part.k {
            let strip = part.piece_strip(u0, u1, v0);
            let want = Some(CellIndex::piece(u0, u1, v0));
            for i in 0..g {
                for j in 0..g {
                    let p = TorusPoint::new(
                        strip[0] + (strip[1] - strip[0]) * (i as f64 + 0.5) / g as f64,
                        strip[2] + (strip[3] - strip[2]) * (j as f64 + 0.5) / g as f64,
                    );
                    if part.locate(Level::TildeEta, p) != want {
                        continue;
                    }
                    let r = map.eval_jet(p);
                    if r.is_good() {
                        pts.push((r.jet.point.theta, r.jet.point.r));
                    }
                }
            }
        }
    }
    pts
}

/// `what`: `partition:<level>`, `orbit:<csv path>` or `image:<phi|Phi|h|f>`.
pub fn cmd_render(ctx: &Ctx, what: Option<&str>) -> Result<String> {
    let what = what.ok_or_else(|| Error::InvalidArgument("render needs --what partition:<level>, orbit:<file> or image:<map>".into()))?;
    let (kind, arg) = what.split_once(':').ok_or_else(|| Error::InvalidArgument(format!("--what {what:?}: expected kind:argument")))?;
    let mut out = ctx.output("render")?;
    let (name, svg) = match kind {
        "partition" => {
            let level = Level::parse(arg).ok_or_else(|| Error::InvalidArgument(format!("unknown level {arg:?}")))?;
            let params = ctx.cfg.stage_params()?;
            let part = Partition::new(&params[ctx.stage])?;
            (format!("partition_{}.svg", arg.to_lowercase()), render::render_partition(&part, level)?)
        }
        "orbit" => ("orbit.svg".to_string(), render::svg_points(&read_orbit(Path::new(arg))?, "firebrick")),
        "image" => {
            let (_, st) = ctx.assembled()?;
            let part = Partition::new(&st.stage)?;
            let map = match arg {
                "phi" => &st.phi,
                "Phi" | "big_phi" => &st.big_phi,
                "h" => &st.h,
                "f" => &st.f,
                other => return Err(Error::InvalidArgument(format!("unknown map {other:?}"))),
            };
            (format!("image_{arg}.svg"), render::svg_points(&image_points(&part, map), "darkgreen"))
        }
        other => return Err(Error::InvalidArgument(format!("unknown render kind {other:?}"))),
    };
    out.write(&name, svg.as_bytes())?;
    let dir = out.dir().to_path_buf();
    out.finish(&ctx.config_json)?;
    Ok(summary(&dir, &[&name]))
}

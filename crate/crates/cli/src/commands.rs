use anyhow::{anyhow, bail, Result};
use morrey_core::constants::{witness_pair_small_morrey, EstimateOptions, PairNorms};
use morrey_core::norm::MORREY_R_MAX;
use morrey_core::{
    closed_form_power_norm, estimate_constants, integrate_abs_pow_ball, mc_integrate, small_morrey_witness_bound,
    witness_pair_morrey, Ball, ConstantKind, ConstantSearch, Mode, NormEvaluator, NormResult, RadialFunction,
    SpaceParams, Witness,
};
use serde::Serialize;

use crate::config::{ModeSel, RunConfig};
use crate::report::{Check, Report};

/// Accepted shortfall of a ratio below its analytic lower bound.
pub const BOUND_SLACK: f64 = 1e-3;
/// Accepted excess of a ratio above 2.
pub const UPPER_SLACK: f64 = 1e-9;
/// Relative agreement required between computed and closed-form norms.
pub const NORM_REL_TOL: f64 = 1e-3;

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Morrey => "morrey",
        Mode::SmallMorrey => "small",
    }
}

fn value_of(res: &NormResult) -> f64 {
    res.value.to_f64()
}

/// `|c| * closed form` when `f = c |x|^{-n/q}` on `(0, inf)`.
fn pure_power_norm(f: &RadialFunction, params: &SpaceParams) -> Option<f64> {
    match f.pieces() {
        [pc] if pc.lo == 0.0 && pc.hi == f64::INFINITY && pc.alpha == params.critical_exponent() => {
            closed_form_power_norm(params).ok().map(|c| pc.coef.abs() * c)
        }
        _ => None,
    }
}

#[derive(Debug, Serialize)]
struct McCheck {
    ball: Ball,
    quadrature: Option<f64>,
    monte_carlo: f64,
    std_error: f64,
    samples: usize,
}

#[derive(Debug, Serialize)]
struct NormEntry {
    mode: &'static str,
    #[serde(flatten)]
    result: NormResult,
    closed_form: Option<f64>,
    /// Independent Monte Carlo estimate of `∫|f|^p` over the best ball.
    mc_check: Option<McCheck>,
}

pub fn cmd_norm(c: &RunConfig) -> Result<Report> {
    let text = c.function.as_deref().unwrap_or("");
    let f: RadialFunction = text.parse().map_err(|e| anyhow!("--function: {e}"))?;
    let mut entries = Vec::new();
    let mut checks = Vec::new();
    for mode in c.mode.modes() {
        let ev = c.evaluator(mode)?;
        let params = *ev.params();
        let result = ev.norm(&f)?;
        let closed_form = pure_power_norm(&f, &params);
        if let Some(cf) = closed_form {
            checks.push(Check::relative(
                format!("{}.closed_form", mode_name(mode)),
                cf,
                value_of(&result),
                NORM_REL_TOL,
            ));
        }
        let mc_check = match result.value.finite() {
            Some(v) if v > 0.0 => {
                let integ = c.integration();
                let quad = integrate_abs_pow_ball(&f, params.p, result.argmax, params.n, &integ);
                let mc = mc_integrate(&f, params.p, result.argmax, params.n, &integ);
                Some(McCheck {
                    ball: result.argmax,
                    quadrature: quad.value.finite(),
                    monte_carlo: mc.estimate,
                    std_error: mc.std_error,
                    samples: integ.mc_samples,
                })
            }
            _ => None,
        };
        entries.push(NormEntry { mode: mode_name(mode), result, closed_form, mc_check });
    }
    if c.mode == ModeSel::Both {
        let (big, small) = (value_of(&entries[0].result), value_of(&entries[1].result));
        checks.push(Check::at_most("small_le_morrey", big, small, 2.0 * c.rel_tol * big.abs()));
    }

    #[derive(Serialize)]
    struct Out {
        function: String,
        norms: Vec<NormEntry>,
    }
    Report::new("norm", c, Out { function: f.to_string(), norms: entries }, checks)
}

#[derive(Debug, Serialize)]
struct WitnessOut {
    f: String,
    g: String,
    h: String,
    k: String,
}

impl From<&Witness> for WitnessOut {
    fn from(w: &Witness) -> Self {
        Self {
            f: w.f.to_string(),
            g: w.g.to_string(),
            h: w.h.to_string(),
            k: w.k.to_string(),
        }
    }
}

#[derive(Debug, Serialize)]
struct RatioOut {
    label: String,
    #[serde(flatten)]
    kind: ConstantKind,
    value: f64,
    /// Analytic value the ratio is compared against.
    reference: f64,
}

fn strict_space(c: &RunConfig, mode: Mode, command: &str) -> Result<SpaceParams> {
    let params = c.space(mode)?;
    if params.require_strict().is_err() {
        bail!("{command} needs p < q, got p = q = {}", c.p);
    }
    Ok(params)
}

fn norm_of(ev: &NormEvaluator, f: &RadialFunction) -> Result<NormResult> {
    let res = ev.norm(f)?;
    if res.is_infinite() {
        bail!("witness function {f} has infinite norm");
    }
    Ok(res)
}

fn pair_norms(ev: &NormEvaluator, w: &Witness) -> Result<PairNorms> {
    Ok(PairNorms::compute(&w.f, &w.k, ev, true)?)
}

pub fn cmd_verify_thm1(c: &RunConfig) -> Result<Report> {
    let params = strict_space(c, Mode::Morrey, "verify-thm1")?;
    let ev = c.evaluator(Mode::Morrey)?;
    let w = witness_pair_morrey(&params)?;
    let closed = closed_form_power_norm(&params)?;
    let [nf, ng, nh, nk] = [&w.f, &w.g, &w.h, &w.k].map(|x| norm_of(&ev, x));
    let (nf, ng, nh, nk) = (nf?, ng?, nh?, nk?);
    let (vf, vg, vh, vk) = (value_of(&nf), value_of(&ng), value_of(&nh), value_of(&nk));

    let r_max = c.r_max.unwrap_or(MORREY_R_MAX);
    let gap = params.scaling_gap();
    // relative shortfall of ‖h‖ when radii stop at r_max
    let h_deficit = 1.0 - (1.0 - r_max.powf(-gap)).powf(1.0 / params.p);
    let h_tol = 2.0 * r_max.powf(-gap / params.p);

    let mut checks = vec![
        Check::relative("norm_f.closed_form", closed, vf, NORM_REL_TOL),
        Check::relative("norm_g.equals_f", vf, vg, NORM_REL_TOL),
        Check::relative("norm_k.equals_f", vf, vk, NORM_REL_TOL),
        Check::relative("norm_h.equals_f", vf, vh, h_tol),
        Check::count("identity.f_plus_k_is_2g", 0, (w.f.add(&w.k)? != w.g.scale(2.0)) as usize),
        Check::count("identity.f_minus_k_is_2h", 0, (w.f.sub(&w.k)? != w.h.scale(2.0)) as usize),
    ];

    let pn = pair_norms(&ev, &w)?;
    // ‖f+k‖ ‖f-k‖ against 4 ‖g‖ ‖h‖, both sides computed independently
    let product = pn.sum * pn.diff;
    checks.push(Check::relative("zbaganu.product_identity", 4.0 * vg * vh, product, 1e-8));

    let mut ratios = Vec::new();
    for kind in c.kinds() {
        let value = pn.ratio(kind)?;
        // the same closed form as the small Morrey bound, with eps = 1 / r_max
        let at_r_max = small_morrey_witness_bound(&params, 1.0 / r_max, kind)?;
        let low_tol = (2.0 - at_r_max) + 1e-6 + 10.0 * c.rel_tol;
        checks.push(Check::at_least(format!("ratio.{}.lower", kind.label()), 2.0, value, low_tol));
        checks.push(Check::at_most(format!("ratio.{}.upper", kind.label()), 2.0, value, UPPER_SLACK));
        ratios.push(RatioOut { label: kind.label(), kind, value, reference: 2.0 });
    }

    #[derive(Serialize)]
    struct Norms {
        f: NormResult,
        g: NormResult,
        h: NormResult,
        k: NormResult,
    }
    #[derive(Serialize)]
    struct Out {
        witness: WitnessOut,
        closed_form: f64,
        r_max: f64,
        norms: Norms,
        truncation_note: Option<String>,
        expected_h_deficit: f64,
        pair_norms: PairNorms,
        ratios: Vec<RatioOut>,
    }
    let truncation_note = nh.truncated.then(|| {
        format!(
            "sup for h approached as r -> inf; value at r_max={r_max} is short by a relative {h_deficit:.3e}"
        )
    });
    let out = Out {
        witness: (&w).into(),
        closed_form: closed,
        r_max,
        norms: Norms { f: nf, g: ng, h: nh, k: nk },
        truncation_note,
        expected_h_deficit: h_deficit,
        pair_norms: pn,
        ratios,
    };
    Report::new("verify-thm1", c, out, checks)
}

pub fn cmd_verify_thm2(c: &RunConfig) -> Result<Report> {
    let params = strict_space(c, Mode::SmallMorrey, "verify-thm2")?;
    if c.eps.is_empty() {
        bail!("verify-thm2 needs at least one --eps");
    }
    let ev = c.evaluator(Mode::SmallMorrey)?;
    let closed = closed_form_power_norm(&params)?;
    let kinds = c.kinds();

    // ladder in the order of decreasing eps
    let mut ladder = c.eps.clone();
    ladder.sort_by(|a, b| b.total_cmp(a));
    ladder.dedup();

    let mut checks = Vec::new();
    let mut steps = Vec::new();
    let mut first_f = None;
    for &eps in &ladder {
        let w = witness_pair_small_morrey(&params, eps)?;
        let nf = norm_of(&ev, &w.f)?;
        let nh = norm_of(&ev, &w.h)?;
        let ng = norm_of(&ev, &w.g)?;
        let vf = value_of(&nf);
        first_f.get_or_insert(nf);
        let rest = 1.0 - eps.powf(params.scaling_gap());
        let h_bound = vf * rest.powf(1.0 / params.p);
        checks.push(Check::at_least(format!("eps={eps}.norm_h.bound"), h_bound, value_of(&nh), BOUND_SLACK * vf));
        checks.push(Check::relative(format!("eps={eps}.norm_g.equals_f"), vf, value_of(&ng), NORM_REL_TOL));

        let pn = pair_norms(&ev, &w)?;
        let mut ratios = Vec::new();
        for &kind in &kinds {
            let value = pn.ratio(kind)?;
            let bound = small_morrey_witness_bound(&params, eps, kind)?;
            let label = kind.label();
            checks.push(Check::at_least(format!("eps={eps}.ratio.{label}.bound"), bound, value, BOUND_SLACK));
            checks.push(Check::at_most(format!("eps={eps}.ratio.{label}.upper"), 2.0, value, UPPER_SLACK));
            ratios.push(RatioOut { label, kind, value, reference: bound });
        }

        #[derive(Serialize)]
        struct Step {
            eps: f64,
            witness: WitnessOut,
            norm_g: NormResult,
            norm_h: NormResult,
            norm_h_bound: f64,
            ratios: Vec<RatioOut>,
        }
        steps.push(Step { eps, witness: (&w).into(), norm_g: ng, norm_h: nh, norm_h_bound: h_bound, ratios });
    }

    let nf = first_f.expect("ladder is nonempty");
    checks.insert(0, Check::relative("norm_f.closed_form", closed, value_of(&nf), NORM_REL_TOL));

    for (i, kind) in kinds.iter().enumerate() {
        let label = kind.label();
        for pair in steps.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            checks.push(Check::at_least(
                format!("monotone.{label}.eps={}->{}", a.eps, b.eps),
                a.ratios[i].value,
                b.ratios[i].value,
                1e-9,
            ));
        }
        let last = steps.last().expect("ladder is nonempty");
        // at the smallest eps the ratio may sit below 2 by the analytic gap
        let gap = 2.0 - small_morrey_witness_bound(&params, last.eps, *kind)?;
        checks.push(Check::approx(
            format!("limit.{label}.eps={}", last.eps),
            2.0,
            last.ratios[i].value,
            gap + BOUND_SLACK,
        ));
    }

    #[derive(Serialize)]
    struct Out<T> {
        closed_form: f64,
        norm_f: NormResult,
        ladder: Vec<T>,
    }
    Report::new("verify-thm2", c, Out { closed_form: closed, norm_f: nf, ladder: steps }, checks)
}

#[derive(Debug, Serialize)]
struct ModeSearch {
    mode: &'static str,
    #[serde(flatten)]
    search: ConstantSearch,
}

fn run_estimates(c: &RunConfig, opts: &EstimateOptions) -> Result<Vec<ModeSearch>> {
    let kinds = c.kinds();
    c.mode
        .modes()
        .into_iter()
        .map(|mode| {
            let ev = c.evaluator(mode)?;
            let search = estimate_constants(&kinds, &ev, opts, &[])?;
            Ok(ModeSearch { mode: mode_name(mode), search })
        })
        .collect()
}

fn violation_checks(c: &RunConfig, runs: &[ModeSearch], checks: &mut Vec<Check>) {
    for run in runs {
        checks.push(Check::count(format!("{}.domination_failures", run.mode), 0, run.search.domination_failures));
        for est in &run.search.estimates {
            checks.push(Check::count(format!("{}.{}.violations", run.mode, est.label), 0, est.violations));
            if let Some(best) = est.best_ratio {
                checks.push(Check::at_most(
                    format!("{}.{}.max_ratio", run.mode, est.label),
                    2.0,
                    best,
                    5.0 * c.rel_tol,
                ));
            }
        }
    }
}

/// Lower bounds from the witnesses plus `--trials` random pairs.
pub fn cmd_constants(c: &RunConfig) -> Result<Report> {
    let strict = c.p < c.q;
    let opts = EstimateOptions {
        include_witnesses: true,
        include_trivial: true,
        eps_ladder: c.eps.clone(),
        random_trials: c.trials.unwrap_or(0),
        seed: c.seed,
        violation_slack: 5.0 * c.rel_tol,
    };
    let runs = run_estimates(c, &opts)?;
    let mut checks = Vec::new();
    violation_checks(c, &runs, &mut checks);
    if strict {
        for run in &runs {
            let params = c.space(if run.mode == "morrey" { Mode::Morrey } else { Mode::SmallMorrey })?;
            for est in &run.search.estimates {
                let Some(w) = est.witness_ratio else { continue };
                let (bound, tol) = match params.mode {
                    Mode::Morrey => {
                        let r_max = c.r_max.unwrap_or(MORREY_R_MAX);
                        let at = small_morrey_witness_bound(&params, 1.0 / r_max, est.kind)?;
                        (2.0, 2.0 - at + 1e-6 + 10.0 * c.rel_tol)
                    }
                    Mode::SmallMorrey => {
                        let eps = c.eps.iter().copied().fold(f64::INFINITY, f64::min);
                        (small_morrey_witness_bound(&params, eps, est.kind)?, BOUND_SLACK)
                    }
                };
                checks.push(Check::at_least(format!("{}.{}.witness", run.mode, est.label), bound, w, tol));
            }
        }
    }
    Report::new("constants", c, runs, checks)
}

/// Random sweep looking for ratios above 2.
pub fn cmd_search(c: &RunConfig) -> Result<Report> {
    let trials = c.trials.unwrap_or(500);
    if trials == 0 {
        bail!("search needs --trials >= 1");
    }
    let opts = EstimateOptions {
        include_witnesses: c.with_witnesses,
        include_trivial: c.with_witnesses,
        eps_ladder: c.eps.clone(),
        random_trials: trials,
        seed: c.seed,
        violation_slack: 5.0 * c.rel_tol,
    };
    let runs = run_estimates(c, &opts)?;
    let mut checks = Vec::new();
    violation_checks(c, &runs, &mut checks);
    Report::new("search", c, runs, checks)
}

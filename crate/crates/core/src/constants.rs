//! Geometric constants of Morrey and small Morrey spaces.
//!
//! Each constant is a supremum of a ratio functional over pairs of nonzero
//! functions. The supremum cannot be computed, only bounded from below by
//! evaluating the ratio on concrete pairs: the extremal witness families
//! (which push every ratio to 2), the trivial pair `(x, x)`, caller-supplied
//! pairs, and randomly generated piecewise power pairs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::Extended;
use crate::norm::NormEvaluator;
use crate::params::{Mode, SpaceParams};
use crate::radial::{canonicalize, Piece, RadialFunction};

/// Default `epsilon` ladder for the small Morrey witnesses.
pub const DEFAULT_EPS_LADDER: [f64; 4] = [0.5, 0.1, 0.01, 1e-4];

/// Number of best pairs kept per estimate.
pub const TOP_PAIRS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstantKind {
    /// `(N(x+y)^s + N(x-y)^s) / (2^{s-1} (N(x)^s + N(y)^s))`
    GenVnj { s: f64 },
    /// `(N(x+y)^2 + N(x-y)^2) / 4` over unit vectors
    ModVnj,
    /// `(N(x+y)^s + N(x-y)^s) / 2^s` over unit vectors
    GenModVnj { s: f64 },
    /// `N(x+y) N(x-y) / (N(x)^2 + N(y)^2)`
    Zbaganu,
}

impl ConstantKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ConstantKind::GenVnj { s } | ConstantKind::GenModVnj { s } if !(s >= 1.0 && s.is_finite()) => {
                Err(Error::InvalidArgument(format!("s={s} must be a finite number >= 1")))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ConstantKind::GenVnj { .. } => "gen_vnj",
            ConstantKind::ModVnj => "mod_vnj",
            ConstantKind::GenModVnj { .. } => "gen_mod_vnj",
            ConstantKind::Zbaganu => "zbaganu",
        }
    }

    pub fn s(&self) -> Option<f64> {
        match *self {
            ConstantKind::GenVnj { s } | ConstantKind::GenModVnj { s } => Some(s),
            ConstantKind::ModVnj | ConstantKind::Zbaganu => None,
        }
    }

    /// `gen_vnj(s=2)`, `zbaganu`, ...
    pub fn label(&self) -> String {
        match self.s() {
            Some(s) => format!("{}(s={s})", self.name()),
            None => self.name().to_string(),
        }
    }

    /// Whether the ratio is taken over unit-normalized pairs.
    pub fn is_normalized(&self) -> bool {
        matches!(self, ConstantKind::ModVnj | ConstantKind::GenModVnj { .. })
    }

    /// The four kinds for one value of `s`.
    pub fn all(s: f64) -> [ConstantKind; 4] {
        [
            ConstantKind::GenVnj { s },
            ConstantKind::ModVnj,
            ConstantKind::GenModVnj { s },
            ConstantKind::Zbaganu,
        ]
    }
}

/// The norms entering all four ratios for one pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairNorms {
    pub x: f64,
    pub y: f64,
    pub sum: f64,
    pub diff: f64,
    /// `N(x/N(x) + y/N(y))`, present when normalized kinds were requested.
    pub unit_sum: Option<f64>,
    pub unit_diff: Option<f64>,
}

fn finite(v: Extended) -> Result<f64> {
    v.finite().ok_or(Error::NotInSpace)
}

impl PairNorms {
    pub fn compute(x: &RadialFunction, y: &RadialFunction, eval: &NormEvaluator, normalized: bool) -> Result<Self> {
        let nx = finite(eval.value(x)?)?;
        let ny = finite(eval.value(y)?)?;
        let sum = finite(eval.value(&x.add(y)?)?)?;
        let diff = finite(eval.value(&x.sub(y)?)?)?;
        let (unit_sum, unit_diff) = if normalized {
            if nx == 0.0 || ny == 0.0 {
                return Err(Error::ZeroFunction);
            }
            let (ux, uy) = (x.scale(1.0 / nx), y.scale(1.0 / ny));
            (
                Some(finite(eval.value(&ux.add(&uy)?)?)?),
                Some(finite(eval.value(&ux.sub(&uy)?)?)?),
            )
        } else {
            (None, None)
        };
        Ok(Self { x: nx, y: ny, sum, diff, unit_sum, unit_diff })
    }

    pub fn ratio(&self, kind: ConstantKind) -> Result<f64> {
        kind.validate()?;
        let unit = || match (self.unit_sum, self.unit_diff) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::InvalidArgument(format!(
                "{} needs the normalized pair norms",
                kind.label()
            ))),
        };
        match kind {
            ConstantKind::GenVnj { s } => {
                let den = 2f64.powf(s - 1.0) * (self.x.powf(s) + self.y.powf(s));
                if den == 0.0 {
                    return Err(Error::ZeroFunction);
                }
                Ok((self.sum.powf(s) + self.diff.powf(s)) / den)
            }
            ConstantKind::ModVnj => {
                let (a, b) = unit()?;
                Ok((a * a + b * b) / 4.0)
            }
            ConstantKind::GenModVnj { s } => {
                let (a, b) = unit()?;
                Ok((a.powf(s) + b.powf(s)) / 2f64.powf(s))
            }
            ConstantKind::Zbaganu => {
                let den = self.x * self.x + self.y * self.y;
                if den == 0.0 {
                    return Err(Error::ZeroFunction);
                }
                Ok(self.sum * self.diff / den)
            }
        }
    }
}

/// Value of the `kind` ratio functional on the pair `(x, y)`.
pub fn ratio(kind: ConstantKind, x: &RadialFunction, y: &RadialFunction, eval: &NormEvaluator) -> Result<f64> {
    kind.validate()?;
    PairNorms::compute(x, y, eval, kind.is_normalized())?.ratio(kind)
}

/// The witness family: `f` and its split `g + h` into two disjoint pieces,
/// with `k = g - h`, so that `f + k = 2g` and `f - k = 2h`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub f: RadialFunction,
    pub g: RadialFunction,
    pub h: RadialFunction,
    pub k: RadialFunction,
}

impl Witness {
    fn split(f: RadialFunction, at: f64) -> Result<Self> {
        let g = f.restrict(0.0, at);
        let h = f.restrict(at, f64::INFINITY);
        let k = g.sub(&h)?;
        Ok(Self { f, g, h, k })
    }

    pub fn pair(&self) -> (RadialFunction, RadialFunction) {
        (self.f.clone(), self.k.clone())
    }
}

/// `f = |x|^{-n/q}` on `(0, inf)`, split at `|x| = 1`.
pub fn witness_pair_morrey(params: &SpaceParams) -> Result<Witness> {
    params.require_strict()?;
    let f = RadialFunction::power(0.0, f64::INFINITY, 1.0, params.critical_exponent())?;
    Witness::split(f, 1.0)
}

/// `f = |x|^{-n/q}` on `(0, 1)`, split at `|x| = eps`.
pub fn witness_pair_small_morrey(params: &SpaceParams, eps: f64) -> Result<Witness> {
    params.require_strict()?;
    check_eps(eps)?;
    let f = RadialFunction::power(0.0, 1.0, 1.0, params.critical_exponent())?;
    Witness::split(f, eps)
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("eps={eps} must lie in (0, 1)")))
    }
}

/// Lower bound for the small Morrey witness ratio at `eps`, from
/// `‖h‖ >= ‖f‖ (1 - eps^{n(1-p/q)})^{1/p}` and `‖g‖ = ‖f‖`.
pub fn small_morrey_witness_bound(params: &SpaceParams, eps: f64, kind: ConstantKind) -> Result<f64> {
    params.require_strict()?;
    check_eps(eps)?;
    kind.validate()?;
    let rest = 1.0 - eps.powf(params.scaling_gap());
    Ok(match kind {
        ConstantKind::GenVnj { s } | ConstantKind::GenModVnj { s } => 1.0 + rest.powf(s / params.p),
        ConstantKind::ModVnj => 1.0 + rest.powf(2.0 / params.p),
        ConstantKind::Zbaganu => 2.0 * rest.powf(1.0 / params.p),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSource {
    Witness,
    Trivial,
    User,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub source: CandidateSource,
    pub label: String,
    pub x: RadialFunction,
    pub y: RadialFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimateOptions {
    pub include_witnesses: bool,
    pub include_trivial: bool,
    /// Only used in small Morrey mode.
    pub eps_ladder: Vec<f64>,
    pub random_trials: usize,
    pub seed: u64,
    /// Pairs whose ratio exceeds `2 + violation_slack` count as violations.
    pub violation_slack: f64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            include_witnesses: true,
            include_trivial: true,
            eps_ladder: DEFAULT_EPS_LADDER.to_vec(),
            random_trials: 0,
            seed: 0,
            violation_slack: 5e-10,
        }
    }
}

/// Random pair: each function gets 1 to 4 log-uniform breakpoints, uniform
/// coefficients in `[-2, 2]` (a quarter of them zero) and the critical
/// exponent `-n/q` on every piece, so sums and differences stay
/// representable.
pub fn random_pair(params: &SpaceParams, rng: &mut impl Rng) -> (RadialFunction, RadialFunction) {
    let (lo, hi) = match params.mode {
        Mode::Morrey => (1e-2f64, 1e2f64),
        Mode::SmallMorrey => (1e-2, 1.0),
    };
    let alpha = params.critical_exponent();
    let mut one = || {
        let k = rng.random_range(1..=4usize);
        let mut cuts: Vec<f64> = (0..k)
            .map(|_| (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp())
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut ends = vec![0.0];
        ends.extend(cuts);
        ends.push(f64::INFINITY);
        let mut coefs: Vec<f64> = ends
            .windows(2)
            .map(|_| {
                if rng.random_bool(0.25) {
                    0.0
                } else {
                    rng.random_range(-2.0..=2.0)
                }
            })
            .collect();
        if coefs.iter().all(|&c| c == 0.0) {
            coefs[0] = 1.0;
        }
        let pieces = ends.windows(2).zip(coefs).map(|(w, c)| Piece::new(w[0], w[1], c, alpha));
        canonicalize(pieces).expect("random pieces are valid and share one exponent")
    };
    let x = one();
    let y = one();
    (x, y)
}

/// Candidate pairs in evaluation order: witnesses, the trivial pair, user
/// pairs, then random pairs (trial `i` draws from stream `i` of the seed).
pub fn candidate_pairs(
    params: &SpaceParams,
    opts: &EstimateOptions,
    user: &[(RadialFunction, RadialFunction)],
) -> Result<Vec<Candidate>> {
    let mut out = Vec::new();
    let strict = params.require_strict().is_ok();
    if opts.include_witnesses && strict {
        match params.mode {
            Mode::Morrey => {
                let (x, y) = witness_pair_morrey(params)?.pair();
                out.push(Candidate { source: CandidateSource::Witness, label: "witness".into(), x, y });
            }
            Mode::SmallMorrey => {
                for &eps in &opts.eps_ladder {
                    let (x, y) = witness_pair_small_morrey(params, eps)?.pair();
                    out.push(Candidate {
                        source: CandidateSource::Witness,
                        label: format!("witness(eps={eps})"),
                        x,
                        y,
                    });
                }
            }
        }
    }
    if opts.include_trivial {
        let alpha = params.critical_exponent();
        let x = match params.mode {
            Mode::Morrey => RadialFunction::power(0.0, f64::INFINITY, 1.0, alpha)?,
            Mode::SmallMorrey => RadialFunction::power(0.0, 1.0, 1.0, alpha)?,
        };
        out.push(Candidate { source: CandidateSource::Trivial, label: "trivial".into(), x: x.clone(), y: x });
    }
    for (i, (x, y)) in user.iter().enumerate() {
        out.push(Candidate {
            source: CandidateSource::User,
            label: format!("user[{i}]"),
            x: x.clone(),
            y: y.clone(),
        });
    }
    for i in 0..opts.random_trials {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(i as u64);
        let (x, y) = random_pair(params, &mut rng);
        out.push(Candidate { source: CandidateSource::Random, label: format!("random[{i}]"), x, y });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedPair {
    pub index: usize,
    pub label: String,
    pub source: CandidateSource,
    pub ratio: f64,
    pub x: RadialFunction,
    pub y: RadialFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantEstimate {
    #[serde(flatten)]
    pub kind: ConstantKind,
    pub label: String,
    /// Largest ratio over all candidates; a lower bound for the constant.
    pub best_ratio: Option<f64>,
    pub best_label: Option<String>,
    pub witness: Option<(RadialFunction, RadialFunction)>,
    /// Largest ratio over the witness pairs alone.
    pub witness_ratio: Option<f64>,
    /// Largest ratio over the random pairs alone.
    pub max_random_ratio: Option<f64>,
    pub n_pairs_tried: usize,
    pub n_skipped: usize,
    /// Ratios above `2 + violation_slack`.
    pub violations: usize,
    pub top_pairs: Vec<RankedPair>,
}

/// Estimates for several kinds sharing one candidate set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantSearch {
    pub estimates: Vec<ConstantEstimate>,
    pub n_candidates: usize,
    /// Pairs with `zbaganu > gen_vnj(2) + violation_slack`; zero unless the
    /// norm evaluation itself is broken.
    pub domination_failures: usize,
    pub random_trials: usize,
    pub seed: u64,
}

/// Norms of every candidate pair, computed in parallel, in candidate order.
pub fn evaluate_candidates(cands: &[Candidate], eval: &NormEvaluator, normalized: bool) -> Vec<Result<PairNorms>> {
    cands
        .par_iter()
        .map(|c| PairNorms::compute(&c.x, &c.y, eval, normalized))
        .collect()
}

fn max_of(it: impl Iterator<Item = f64>) -> Option<f64> {
    it.fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
}

pub fn estimate_constants(
    kinds: &[ConstantKind],
    eval: &NormEvaluator,
    opts: &EstimateOptions,
    user: &[(RadialFunction, RadialFunction)],
) -> Result<ConstantSearch> {
    for k in kinds {
        k.validate()?;
    }
    for &eps in &opts.eps_ladder {
        check_eps(eps)?;
    }
    let cands = candidate_pairs(eval.params(), opts, user)?;
    let normalized = kinds.iter().any(ConstantKind::is_normalized);
    let norms = evaluate_candidates(&cands, eval, normalized);
    let limit = 2.0 + opts.violation_slack;

    let estimates = kinds
        .iter()
        .map(|&kind| {
            let ratios: Vec<Option<f64>> = norms
                .iter()
                .map(|n| n.as_ref().ok().and_then(|n| n.ratio(kind).ok()))
                .collect();
            // larger ratio first, earlier candidate on ties
            let mut order: Vec<usize> = (0..cands.len()).filter(|&i| ratios[i].is_some()).collect();
            order.sort_by(|&a, &b| ratios[b].unwrap().total_cmp(&ratios[a].unwrap()).then(a.cmp(&b)));
            let best = order.first().copied();
            let of_source = |src: CandidateSource| {
                max_of((0..cands.len()).filter(|&i| cands[i].source == src).filter_map(|i| ratios[i]))
            };
            ConstantEstimate {
                kind,
                label: kind.label(),
                best_ratio: best.and_then(|i| ratios[i]),
                best_label: best.map(|i| cands[i].label.clone()),
                witness: best.map(|i| (cands[i].x.clone(), cands[i].y.clone())),
                witness_ratio: of_source(CandidateSource::Witness),
                max_random_ratio: of_source(CandidateSource::Random),
                n_pairs_tried: cands.len(),
                n_skipped: ratios.iter().filter(|r| r.is_none()).count(),
                violations: ratios.iter().flatten().filter(|&&r| r > limit).count(),
                top_pairs: order
                    .iter()
                    .take(TOP_PAIRS)
                    .map(|&i| RankedPair {
                        index: i,
                        label: cands[i].label.clone(),
                        source: cands[i].source,
                        ratio: ratios[i].unwrap(),
                        x: cands[i].x.clone(),
                        y: cands[i].y.clone(),
                    })
                    .collect(),
            }
        })
        .collect();

    let domination_failures = norms
        .iter()
        .flatten()
        .filter(|n| match (n.ratio(ConstantKind::Zbaganu), n.ratio(ConstantKind::GenVnj { s: 2.0 })) {
            (Ok(z), Ok(v)) => z > v + opts.violation_slack,
            _ => false,
        })
        .count();

    Ok(ConstantSearch {
        estimates,
        n_candidates: cands.len(),
        domination_failures,
        random_trials: opts.random_trials,
        seed: opts.seed,
    })
}

pub fn estimate_constant(
    kind: ConstantKind,
    eval: &NormEvaluator,
    opts: &EstimateOptions,
    user: &[(RadialFunction, RadialFunction)],
) -> Result<ConstantEstimate> {
    let mut search = estimate_constants(&[kind], eval, opts, user)?;
    Ok(search.estimates.remove(0))
}

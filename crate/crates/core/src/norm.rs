//! Morrey and small Morrey norms.
//!
//! `‖f‖ = sup_{B} |B|^{1/q - 1/p} (∫_B |f|^p)^{1/p}`, the supremum taken over
//! all balls (Morrey) or over balls of radius below one (small Morrey). For a
//! radial `f` a ball is described by its center distance `d` and radius `r`,
//! so the supremum is a two-parameter search: a log-spaced `r` by linear `d`
//! grid, followed by golden-section line searches from the best grid cells
//! along the `r` axis, the `d` axis, and the two diagonals `d ± r = const`
//! (the ridges where a ball edge crosses a breakpoint).
//!
//! The search covers a bounded window. Suprema that are only approached as
//! `r` tends to the edge of the window are reported with `truncated` set,
//! and a maximum on the outer `d` boundary sets `d_boundary`.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::VolumeConstants;
use crate::integrate::{integrate_abs_pow_ball, integrate_abs_pow_centered, Extended, IntegrationSettings};
use crate::optimize::golden_max;
use crate::params::{Ball, Mode, SpaceParams};
use crate::radial::RadialFunction;

/// Largest radius probed in small Morrey mode.
pub const SMALL_MORREY_R_MAX: f64 = 1.0 - 1e-6;
pub const MORREY_R_MAX: f64 = 1e6;
pub const DEFAULT_R_MIN: f64 = 1e-3;
pub const DEFAULT_D_MARGIN: f64 = 10.0;

/// Growth factor across the upper (or lower) half of the radius grid that
/// is read as an unbounded profile.
const UNBOUNDED_GROWTH: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchSettings {
    /// Smallest radius; default `min(1e-3, smallest positive breakpoint / 10)`.
    pub r_min: Option<f64>,
    /// Largest radius; default `1e6` (Morrey) or `1 - 1e-6` (small Morrey).
    pub r_max: Option<f64>,
    /// Largest center distance; default `10 +` largest finite breakpoint.
    pub d_max: Option<f64>,
    pub r_points: usize,
    pub d_points: usize,
    /// Golden-section steps per line search.
    pub refinement_steps: usize,
    pub multistarts: usize,
    /// Passes over the four search directions per multistart.
    pub sweeps: usize,
    pub keep_samples: bool,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            r_min: None,
            r_max: None,
            d_max: None,
            r_points: 64,
            d_points: 33,
            refinement_steps: 40,
            multistarts: 3,
            sweeps: 2,
            keep_samples: false,
        }
    }
}

/// The concrete search window for one function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchWindow {
    pub r_min: f64,
    pub r_max: f64,
    pub d_max: f64,
}

impl SearchSettings {
    pub fn window(&self, f: &RadialFunction, mode: Mode) -> Result<SearchWindow> {
        if self.r_points < 2 || self.d_points < 2 {
            return Err(Error::InvalidArgument("grid sizes must be >= 2".into()));
        }
        let r_max = match (self.r_max, mode) {
            (Some(r), Mode::SmallMorrey) if r >= 1.0 => {
                return Err(Error::InvalidArgument(format!(
                    "small Morrey radii must stay below 1, got r_max={r}"
                )))
            }
            (Some(r), _) => r,
            (None, Mode::Morrey) => MORREY_R_MAX,
            (None, Mode::SmallMorrey) => SMALL_MORREY_R_MAX,
        };
        let r_min = self.r_min.unwrap_or_else(|| {
            f.smallest_positive_breakpoint()
                .map_or(DEFAULT_R_MIN, |b| DEFAULT_R_MIN.min(0.1 * b))
        });
        if !(r_min > 0.0 && r_min < r_max && r_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < r_min < r_max < inf, got r_min={r_min} r_max={r_max}"
            )));
        }
        let d_max = self
            .d_max
            .unwrap_or_else(|| DEFAULT_D_MARGIN + f.largest_finite_breakpoint().unwrap_or(0.0));
        if !(d_max >= 0.0 && d_max.is_finite()) {
            return Err(Error::InvalidArgument(format!("d_max={d_max} must be >= 0")));
        }
        Ok(SearchWindow { r_min, r_max, d_max })
    }
}

/// One probed ball and the value of the Morrey functional there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileSample {
    pub d: f64,
    pub r: f64,
    #[serde(serialize_with = "ser_finite")]
    pub value: f64,
}

fn ser_finite<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormResult {
    pub value: Extended,
    /// Best ball found.
    pub argmax: Ball,
    /// The supremum is still increasing at an edge of the radius window.
    pub truncated: bool,
    /// The best ball sits on the outer `d` boundary of the window.
    pub d_boundary: bool,
    /// Some probe missed the quadrature tolerance.
    pub degraded: bool,
    pub probes: usize,
    pub profile_samples: Option<Vec<ProfileSample>>,
}

impl NormResult {
    fn zero(r: f64) -> Self {
        Self {
            value: Extended::Finite(0.0),
            argmax: Ball::centered(r),
            truncated: false,
            d_boundary: false,
            degraded: false,
            probes: 0,
            profile_samples: None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

impl Serialize for NormResult {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            value: Option<f64>,
            infinite: bool,
            argmax_d: f64,
            argmax_r: f64,
            truncated: bool,
            d_boundary: bool,
            degraded: bool,
            probes: usize,
            #[serde(skip_serializing_if = "Option::is_none")]
            profile_samples: Option<&'a Vec<ProfileSample>>,
        }
        Repr {
            value: self.value.finite(),
            infinite: self.value.is_infinite(),
            argmax_d: self.argmax.d,
            argmax_r: self.argmax.r,
            truncated: self.truncated,
            d_boundary: self.d_boundary,
            degraded: self.degraded,
            probes: self.probes,
            profile_samples: self.profile_samples.as_ref(),
        }
        .serialize(s)
    }
}

/// `|B(0,r)|^{1/q-1/p} (∫_{B(0,r)} |f|^p)^{1/p}` in closed form.
pub fn centered_norm_profile(f: &RadialFunction, params: &SpaceParams, r: f64) -> Extended {
    let vol = VolumeConstants::new(params.n).ball_volume(r);
    integrate_abs_pow_centered(f, params.p, r, params.n)
        .map(|i| vol.powf(1.0 / params.q - 1.0 / params.p) * i.powf(1.0 / params.p))
}

/// `v_n^{1/q} (1 - p/q)^{-1/p}`, the norm of `|x|^{-n/q}` in `M^p_q(R^n)`.
pub fn closed_form_power_norm(params: &SpaceParams) -> Result<f64> {
    params.require_strict()?;
    let v = VolumeConstants::new(params.n).unit_ball_volume;
    Ok(v.powf(1.0 / params.q) * (1.0 - params.p / params.q).powf(-1.0 / params.p))
}

pub fn morrey_norm(
    f: &RadialFunction,
    params: &SpaceParams,
    search: &SearchSettings,
    integ: &IntegrationSettings,
) -> Result<NormResult> {
    if params.mode != Mode::Morrey {
        return Err(Error::InvalidParams("morrey_norm requires Morrey mode".into()));
    }
    sup_search(f, params, search, integ)
}

pub fn small_morrey_norm(
    f: &RadialFunction,
    params: &SpaceParams,
    search: &SearchSettings,
    integ: &IntegrationSettings,
) -> Result<NormResult> {
    if params.mode != Mode::SmallMorrey {
        return Err(Error::InvalidParams("small_morrey_norm requires small Morrey mode".into()));
    }
    sup_search(f, params, search, integ)
}

/// Norm in whichever space `params.mode` selects.
pub fn norm(
    f: &RadialFunction,
    params: &SpaceParams,
    search: &SearchSettings,
    integ: &IntegrationSettings,
) -> Result<NormResult> {
    sup_search(f, params, search, integ)
}

#[derive(Debug, Clone, Copy)]
struct Probe {
    d: f64,
    r: f64,
    value: f64,
    converged: bool,
}

impl Probe {
    /// Larger value wins; ties go to the lexicographically smaller `(d, r)`.
    fn beats(&self, other: &Probe) -> bool {
        match self.value.total_cmp(&other.value) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => (self.d, self.r) < (other.d, other.r),
        }
    }
}

struct Objective<'a> {
    f: &'a RadialFunction,
    params: &'a SpaceParams,
    integ: &'a IntegrationSettings,
    volume: VolumeConstants,
}

impl Objective<'_> {
    fn probe(&self, d: f64, r: f64) -> Probe {
        let ball = Ball { d, r };
        let res = integrate_abs_pow_ball(self.f, self.params.p, ball, self.params.n, self.integ);
        let (p, q) = (self.params.p, self.params.q);
        let value = match res.value {
            Extended::Infinite => f64::INFINITY,
            Extended::Finite(i) => {
                self.volume.ball_volume(r).powf(1.0 / q - 1.0 / p) * i.max(0.0).powf(1.0 / p)
            }
        };
        Probe { d, r, value, converged: res.converged }
    }
}

fn sup_search(
    f: &RadialFunction,
    params: &SpaceParams,
    search: &SearchSettings,
    integ: &IntegrationSettings,
) -> Result<NormResult> {
    integ.validate()?;
    let window = search.window(f, params.mode)?;
    if f.is_zero() {
        return Ok(NormResult::zero(window.r_min));
    }
    let obj = Objective {
        f,
        params,
        integ,
        volume: VolumeConstants::new(params.n),
    };

    let (ln_lo, ln_hi) = (window.r_min.ln(), window.r_max.ln());
    let nr = search.r_points;
    let nd = search.d_points;
    let r_grid: Vec<f64> = (0..nr)
        .map(|i| match i {
            0 => window.r_min,
            i if i == nr - 1 => window.r_max,
            i => (ln_lo + (ln_hi - ln_lo) * i as f64 / (nr - 1) as f64).exp(),
        })
        .collect();
    let d_grid: Vec<f64> = (0..nd)
        .map(|j| window.d_max * j as f64 / (nd - 1) as f64)
        .collect();

    // d-major order: grid[j * nr + i] is (d_grid[j], r_grid[i])
    let grid: Vec<Probe> = (0..nd * nr)
        .into_par_iter()
        .map(|k| obj.probe(d_grid[k / nr], r_grid[k % nr]))
        .collect();
    let mut probes = grid.len();
    let mut degraded = grid.iter().any(|pb| !pb.converged);
    let samples = search.keep_samples.then(|| {
        grid.iter()
            .map(|pb| ProfileSample { d: pb.d, r: pb.r, value: pb.value })
            .collect::<Vec<_>>()
    });

    let finish = |best: Probe, truncated: bool, probes: usize, degraded: bool, samples| {
        let value = if best.value.is_finite() {
            Extended::Finite(best.value)
        } else {
            Extended::Infinite
        };
        NormResult {
            value,
            argmax: Ball { d: best.d, r: best.r },
            truncated,
            d_boundary: value.finite().is_some_and(|v| v > 0.0)
                && window.d_max > 0.0
                && best.d >= window.d_max * (1.0 - 1e-12),
            degraded,
            probes,
            profile_samples: samples,
        }
    };

    if let Some(inf) = grid.iter().find(|pb| pb.value.is_infinite()) {
        return Ok(finish(*inf, false, probes, degraded, samples));
    }

    // Narrow peaks fall between grid radii: seed extra starts at the
    // breakpoint geometry and at the best centered radius.
    let mut seeds: Vec<Probe> = seed_balls(f, params, &window)
        .into_par_iter()
        .map(|(d, r)| obj.probe(d, r))
        .collect();
    probes += seeds.len();
    degraded |= seeds.iter().any(|pb| !pb.converged);
    if let Some(inf) = seeds.iter().find(|pb| pb.value.is_infinite()) {
        return Ok(finish(*inf, false, probes, degraded, samples));
    }

    let col_max: Vec<f64> = (0..nr)
        .map(|i| (0..nd).map(|j| grid[j * nr + i].value).fold(0.0, f64::max))
        .collect();
    if let Some(end) = unbounded_end(&col_max, params.mode) {
        let i = if end { nr - 1 } else { 0 };
        let best = (0..nd)
            .map(|j| grid[j * nr + i])
            .reduce(|a, b| if b.beats(&a) { b } else { a })
            .expect("grid is nonempty");
        return Ok(finish(Probe { value: f64::INFINITY, ..best }, false, probes, degraded, samples));
    }

    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| {
        if grid[a].beats(&grid[b]) {
            std::cmp::Ordering::Less
        } else if grid[b].beats(&grid[a]) {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Equal
        }
    });
    let step_ln_r = (ln_hi - ln_lo) / (nr - 1) as f64;
    let step_d = window.d_max / (nd - 1) as f64;
    sort_probes(&mut seeds);
    let starts: Vec<Probe> = order
        .iter()
        .take(search.multistarts)
        .map(|&k| grid[k])
        .chain(seeds.iter().take(SEED_STARTS).copied())
        .collect();
    let refined: Vec<(Probe, usize, bool)> = starts
        .into_par_iter()
        .map(|start| refine(&obj, start, &window, step_ln_r, step_d, search))
        .collect();

    let mut best = grid[order[0]];
    if let Some(s) = seeds.first() {
        if s.beats(&best) {
            best = *s;
        }
    }
    for (pb, count, all_converged) in refined {
        probes += count;
        degraded |= !all_converged;
        if pb.beats(&best) {
            best = pb;
        }
    }

    let rel = 1.0 + 1e-9;
    let truncated = (best.r >= window.r_max * (1.0 - 1e-12) && col_max[nr - 1] > col_max[nr - 2] * rel)
        || (best.r <= window.r_min * (1.0 + 1e-12) && col_max[0] > col_max[1] * rel);
    Ok(finish(best, truncated, probes, degraded, samples))
}

/// Refinement starts taken from the seed balls, on top of the grid starts.
const SEED_STARTS: usize = 2;
/// Radii in the closed-form scan of the centered profile.
const CENTERED_SCAN: usize = 512;

fn sort_probes(v: &mut [Probe]) {
    v.sort_by(|a, b| {
        if a.beats(b) {
            std::cmp::Ordering::Less
        } else if b.beats(a) {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Equal
        }
    });
}

/// Centered balls reaching each breakpoint, balls filling each bounded
/// piece, and the maximizer of a dense scan of the centered profile.
fn seed_balls(f: &RadialFunction, params: &SpaceParams, w: &SearchWindow) -> Vec<(f64, f64)> {
    let clamp_r = |r: f64| r.clamp(w.r_min, w.r_max);
    let mut out: Vec<(f64, f64)> = f
        .breakpoints()
        .into_iter()
        .filter(|b| *b > 0.0 && b.is_finite())
        .map(|b| (0.0, clamp_r(b)))
        .collect();
    for pc in f.pieces().iter().filter(|pc| pc.hi.is_finite()) {
        let mid = 0.5 * (pc.lo + pc.hi);
        out.push((mid.min(w.d_max), clamp_r(0.5 * (pc.hi - pc.lo))));
    }
    let (ln_lo, ln_hi) = (w.r_min.ln(), w.r_max.ln());
    let scan = (0..CENTERED_SCAN)
        .map(|i| (ln_lo + (ln_hi - ln_lo) * i as f64 / (CENTERED_SCAN - 1) as f64).exp().min(w.r_max))
        .map(|r| (r, centered_norm_profile(f, params, r).to_f64()))
        .fold((w.r_min, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    out.push((0.0, scan.0));
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    out.dedup();
    out
}

/// `Some(true)` when the column maxima grow monotonically by
/// [`UNBOUNDED_GROWTH`] over the upper half of the radius grid (Morrey
/// only), `Some(false)` for the same growth toward the smallest radius.
fn unbounded_end(col_max: &[f64], mode: Mode) -> Option<bool> {
    let m = col_max.len();
    let mid = m / 2;
    let floor = col_max[mid];
    if floor.is_nan() || floor <= 0.0 {
        return None;
    }
    // strict growth at every step: a plateau means the profile has levelled off
    let step = 1.0 + 1e-9;
    let rising = col_max[mid..].windows(2).all(|w| w[1] > w[0] * step);
    if mode == Mode::Morrey && rising && col_max[m - 1] >= UNBOUNDED_GROWTH * floor {
        return Some(true);
    }
    let falling = col_max[..=mid].windows(2).all(|w| w[0] > w[1] * step);
    if falling && col_max[0] >= UNBOUNDED_GROWTH * floor {
        return Some(false);
    }
    None
}

/// Coordinate-wise golden-section ascent from one grid cell.
fn refine(
    obj: &Objective<'_>,
    start: Probe,
    window: &SearchWindow,
    step_ln_r: f64,
    step_d: f64,
    search: &SearchSettings,
) -> (Probe, usize, bool) {
    let mut cur = start;
    let mut count = 0;
    let mut converged = true;
    let (ln_lo, ln_hi) = (window.r_min.ln(), window.r_max.ln());
    let take = |pb: Probe, cur: &mut Probe, count: &mut usize, converged: &mut bool| {
        *count += 1;
        *converged &= pb.converged;
        if pb.beats(cur) {
            *cur = pb;
        }
    };

    for _ in 0..search.sweeps {
        // radius axis, in log r
        let base = cur;
        let lo = (base.r.ln() - step_ln_r).max(ln_lo);
        let hi = (base.r.ln() + step_ln_r).min(ln_hi);
        if hi > lo {
            let mut seen = Vec::new();
            golden_max(
                |x| {
                    let pb = obj.probe(base.d, x.exp().clamp(window.r_min, window.r_max));
                    seen.push(pb);
                    pb.value
                },
                lo,
                hi,
                search.refinement_steps,
            );
            for pb in seen {
                take(pb, &mut cur, &mut count, &mut converged);
            }
        }

        // center axis
        let base = cur;
        let lo = (base.d - step_d).max(0.0);
        let hi = (base.d + step_d).min(window.d_max);
        if hi > lo {
            let mut seen = Vec::new();
            golden_max(
                |x| {
                    let pb = obj.probe(x.clamp(0.0, window.d_max), base.r);
                    seen.push(pb);
                    pb.value
                },
                lo,
                hi,
                search.refinement_steps,
            );
            for pb in seen {
                take(pb, &mut cur, &mut count, &mut converged);
            }
        }

        // diagonals: outer edge d + r fixed, then inner edge d - r fixed
        for dir_r in [-1.0, 1.0] {
            let base = cur;
            let reach = step_d.max(base.r * (step_ln_r.exp() - 1.0));
            // feasible t for (d + t, r + dir_r t)
            let mut lo = (-reach).max(-base.d);
            let mut hi = reach.min(window.d_max - base.d);
            let (r_lo_t, r_hi_t) = if dir_r > 0.0 {
                (window.r_min - base.r, window.r_max - base.r)
            } else {
                (base.r - window.r_max, base.r - window.r_min)
            };
            lo = lo.max(r_lo_t);
            hi = hi.min(r_hi_t);
            if hi > lo {
                let mut seen = Vec::new();
                golden_max(
                    |t| {
                        let d = (base.d + t).clamp(0.0, window.d_max);
                        let r = (base.r + dir_r * t).clamp(window.r_min, window.r_max);
                        let pb = obj.probe(d, r);
                        seen.push(pb);
                        pb.value
                    },
                    lo,
                    hi,
                    search.refinement_steps,
                );
                for pb in seen {
                    take(pb, &mut cur, &mut count, &mut converged);
                }
            }
        }
    }
    (cur, count, converged)
}

/// Memoizing norm evaluator for one space and one set of search settings.
///
/// Results are keyed on the canonical form of the function; the computation
/// is deterministic, so a cache hit returns exactly what a recomputation
/// would.
pub struct NormEvaluator {
    params: SpaceParams,
    search: SearchSettings,
    integ: IntegrationSettings,
    cache: Mutex<HashMap<Vec<u64>, NormResult>>,
}

impl NormEvaluator {
    pub fn new(params: SpaceParams, search: SearchSettings, integ: IntegrationSettings) -> Self {
        Self {
            params,
            search,
            integ,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn params(&self) -> &SpaceParams {
        &self.params
    }

    pub fn search(&self) -> &SearchSettings {
        &self.search
    }

    pub fn integration(&self) -> &IntegrationSettings {
        &self.integ
    }

    pub fn norm(&self, f: &RadialFunction) -> Result<NormResult> {
        let key = f.cache_key();
        if let Some(hit) = self.cache.lock().expect("norm cache poisoned").get(&key) {
            return Ok(hit.clone());
        }
        let res = sup_search(f, &self.params, &self.search, &self.integ)?;
        self.cache
            .lock()
            .expect("norm cache poisoned")
            .insert(key, res.clone());
        Ok(res)
    }

    pub fn value(&self, f: &RadialFunction) -> Result<Extended> {
        Ok(self.norm(f)?.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn params(mode: Mode) -> SpaceParams {
        SpaceParams::new(1, 1.0, 2.0, mode).unwrap()
    }

    fn power(lo: f64, hi: f64) -> RadialFunction {
        RadialFunction::power(lo, hi, 1.0, -0.5).unwrap()
    }

    #[test]
    fn profile_of_pure_power_is_constant() {
        let pp = params(Mode::Morrey);
        for r in [1e-3, 0.5, 1.0, 7.0, 1e5] {
            assert_relative_eq!(
                centered_norm_profile(&power(0.0, f64::INFINITY), &pp, r).to_f64(),
                2.0 * 2f64.sqrt(),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn profile_of_outer_part() {
        let pp = params(Mode::Morrey);
        let h = power(1.0, f64::INFINITY);
        assert_eq!(centered_norm_profile(&h, &pp, 0.5).to_f64(), 0.0);
        for r in [2.0f64, 10.0, 1e4] {
            let expect = 2.0 * SQRT2 * (1.0 - r.powf(-0.5));
            assert_relative_eq!(centered_norm_profile(&h, &pp, r).to_f64(), expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn zero_function_has_zero_norm() {
        let pp = params(Mode::Morrey);
        assert_eq!(centered_norm_profile(&RadialFunction::zero(), &pp, 1.0).to_f64(), 0.0);
        let res = morrey_norm(&RadialFunction::zero(), &pp, &SearchSettings::default(), &IntegrationSettings::default()).unwrap();
        assert_eq!(res.value, Extended::Finite(0.0));
    }

    #[test]
    fn closed_form_values() {
        let v = closed_form_power_norm(&SpaceParams::morrey(1, 1.0, 2.0).unwrap()).unwrap();
        assert_relative_eq!(v, 2.0 * SQRT2, max_relative = 1e-15);
        let v = closed_form_power_norm(&SpaceParams::morrey(2, 1.0, 2.0).unwrap()).unwrap();
        assert_relative_eq!(v, 2.0 * std::f64::consts::PI.sqrt(), max_relative = 1e-15);
        let v = closed_form_power_norm(&SpaceParams::morrey(1, 2.0, 3.0).unwrap()).unwrap();
        assert_relative_eq!(v, 2f64.powf(1.0 / 3.0) * 3f64.sqrt(), max_relative = 1e-15);
        assert!(closed_form_power_norm(&SpaceParams::morrey(1, 2.0, 2.0).unwrap()).is_err());
    }

    #[test]
    fn mode_mismatch_rejected() {
        let f = power(0.0, 1.0);
        let s = SearchSettings::default();
        let i = IntegrationSettings::default();
        assert!(morrey_norm(&f, &params(Mode::SmallMorrey), &s, &i).is_err());
        assert!(small_morrey_norm(&f, &params(Mode::Morrey), &s, &i).is_err());
        let bad = SearchSettings { r_max: Some(2.0), ..s };
        assert!(small_morrey_norm(&f, &params(Mode::SmallMorrey), &bad, &i).is_err());
    }

    #[test]
    fn default_window() {
        let f = power(0.0, 1e-4);
        let w = SearchSettings::default().window(&f, Mode::SmallMorrey).unwrap();
        assert_relative_eq!(w.r_min, 1e-5, max_relative = 1e-15);
        assert_eq!(w.r_max, SMALL_MORREY_R_MAX);
        assert_relative_eq!(w.d_max, 10.0001, max_relative = 1e-15);
        let w = SearchSettings::default().window(&power(0.0, f64::INFINITY), Mode::Morrey).unwrap();
        assert_eq!((w.r_min, w.r_max, w.d_max), (1e-3, 1e6, 10.0));
    }

    #[test]
    fn unbounded_growth_detection() {
        let rising: Vec<f64> = (0..64).map(|i| 1.2f64.powi(i)).collect();
        assert_eq!(unbounded_end(&rising, Mode::Morrey), Some(true));
        assert_eq!(unbounded_end(&rising, Mode::SmallMorrey), None);
        let falling: Vec<f64> = rising.iter().rev().copied().collect();
        assert_eq!(unbounded_end(&falling, Mode::SmallMorrey), Some(false));
        // saturating profile such as 1 - r^{-1/2}
        let sat: Vec<f64> = (0..64).map(|i| 1.0 - 1.3f64.powi(-i)).collect();
        assert_eq!(unbounded_end(&sat, Mode::Morrey), None);
    }

    #[test]
    fn constant_function_not_in_morrey_space() {
        let one = RadialFunction::power(0.0, f64::INFINITY, 1.0, 0.0).unwrap();
        let res = morrey_norm(&one, &params(Mode::Morrey), &SearchSettings::default(), &IntegrationSettings::default()).unwrap();
        assert!(res.is_infinite());
        let res = small_morrey_norm(&one, &params(Mode::SmallMorrey), &SearchSettings::default(), &IntegrationSettings::default()).unwrap();
        assert!(!res.is_infinite());
    }

    #[test]
    fn evaluator_caches() {
        let ev = NormEvaluator::new(params(Mode::Morrey), SearchSettings::default(), IntegrationSettings::default());
        let f = power(0.0, 1.0);
        let a = ev.norm(&f).unwrap();
        let b = ev.norm(&f).unwrap();
        assert_eq!(a, b);
        assert_eq!(ev.cache.lock().unwrap().len(), 1);
    }
}

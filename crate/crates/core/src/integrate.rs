//! Integrals of `|f|^p` over balls for piecewise radial power functions.
//!
//! Centered balls are handled in closed form. For an off-center ball the
//! integral over `B(a, r)` reduces to a radial integral weighted by
//! [`cap_fraction`]: shells with `t <= r - |a|` lie fully inside (closed
//! form), shells with `|r - |a|| < t < r + |a|` are partially covered and are
//! integrated numerically. A Monte Carlo estimator serves as an independent
//! check.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{partial_cap_fraction, VolumeConstants};
use crate::params::Ball;
use crate::quadrature;
use crate::radial::RadialFunction;

/// A nonnegative quantity that may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(f64),
    Infinite,
}

impl Extended {
    pub fn is_infinite(self) -> bool {
        matches!(self, Extended::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Infinite => None,
        }
    }

    /// `f64` view, `+inf` for [`Extended::Infinite`].
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn map(self, f: impl FnOnce(f64) -> f64) -> Self {
        match self {
            Extended::Finite(v) => Extended::Finite(f(v)),
            Extended::Infinite => Extended::Infinite,
        }
    }
}

impl std::ops::Add for Extended {
    type Output = Extended;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (Extended::Finite(a), Extended::Finite(b)) => Extended::Finite(a + b),
            _ => Extended::Infinite,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegrationSettings {
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub mc_samples: usize,
    pub rng_seed: u64,
}

impl Default for IntegrationSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_subdivisions: 2000,
            mc_samples: 1_000_000,
            rng_seed: 0,
        }
    }
}

impl IntegrationSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::InvalidArgument(format!("rel_tol={} must be > 0", self.rel_tol)));
        }
        if self.mc_samples == 0 {
            return Err(Error::InvalidArgument("mc_samples must be >= 1".into()));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidArgument("max_subdivisions must be >= 1".into()));
        }
        Ok(())
    }
}

/// Result of [`integrate_abs_pow_ball`]. `converged` is false when the
/// subdivision budget ran out before `rel_tol` was met; `value` is then the
/// best available estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallIntegral {
    pub value: Extended,
    pub abs_error: f64,
    pub converged: bool,
}

impl BallIntegral {
    fn exact(value: Extended) -> Self {
        Self { value, abs_error: 0.0, converged: true }
    }
}

/// `∫_a^b t^(beta-1) dt` for `0 <= a < b`, assuming convergence at 0.
fn power_integral(beta: f64, a: f64, b: f64) -> f64 {
    if beta == 0.0 {
        return (b / a).ln();
    }
    if a == 0.0 {
        return b.powf(beta) / beta;
    }
    let x = beta * (b / a).ln();
    if x.abs() < 1.0 {
        a.powf(beta) * x.exp_m1() / beta
    } else {
        (b.powf(beta) - a.powf(beta)) / beta
    }
}

/// `Σ_pieces |coef|^p ∫_{[a,b) ∩ [lo,hi)} t^(alpha p + n - 1) dt`, i.e. the
/// integral over the annulus `a <= |x| < b` divided by the sphere area.
pub fn shell_integral(f: &RadialFunction, p: f64, n: u32, a: f64, b: f64) -> Extended {
    let mut total = 0.0;
    for pc in f.pieces() {
        let lo = pc.lo.max(a);
        let hi = pc.hi.min(b);
        if lo >= hi {
            continue;
        }
        let beta = pc.alpha * p + n as f64;
        if lo == 0.0 && beta <= 0.0 {
            return Extended::Infinite;
        }
        total += pc.coef.abs().powf(p) * power_integral(beta, lo, hi);
    }
    Extended::Finite(total)
}

/// Whether `f` has a non-integrable `|f|^p` singularity at the origin.
pub fn singular_at_origin(f: &RadialFunction, p: f64, n: u32) -> bool {
    f.pieces()
        .first()
        .is_some_and(|pc| pc.lo == 0.0 && pc.alpha * p + n as f64 <= 0.0)
}

/// `∫_{B(0,r)} |f|^p dx` in closed form.
pub fn integrate_abs_pow_centered(f: &RadialFunction, p: f64, r: f64, n: u32) -> Extended {
    let omega = VolumeConstants::new(n).unit_sphere_area;
    shell_integral(f, p, n, 0.0, r).map(|v| omega * v)
}

/// `∫_{B(a,r)} |f|^p dx` with `|a| = ball.d`.
pub fn integrate_abs_pow_ball(
    f: &RadialFunction,
    p: f64,
    ball: Ball,
    n: u32,
    settings: &IntegrationSettings,
) -> BallIntegral {
    let Ball { d, r } = ball;
    if f.is_zero() {
        return BallIntegral::exact(Extended::Finite(0.0));
    }
    if d <= r && singular_at_origin(f, p, n) {
        return BallIntegral::exact(Extended::Infinite);
    }
    if d == 0.0 {
        return BallIntegral::exact(integrate_abs_pow_centered(f, p, r, n));
    }
    if n == 1 {
        // B(a, r) = (d - r, d + r): split into the positive and negative half-lines.
        let pos = shell_integral(f, p, 1, (d - r).max(0.0), d + r);
        let neg = if d < r {
            shell_integral(f, p, 1, 0.0, r - d)
        } else {
            Extended::Finite(0.0)
        };
        return BallIntegral::exact(pos + neg);
    }

    let omega = VolumeConstants::new(n).unit_sphere_area;
    let full = if d < r {
        match shell_integral(f, p, n, 0.0, r - d) {
            Extended::Finite(v) => v,
            Extended::Infinite => return BallIntegral::exact(Extended::Infinite),
        }
    } else {
        0.0
    };

    let pieces = f.pieces();
    let support_lo = pieces[0].lo;
    let support_hi = pieces[pieces.len() - 1].hi;
    let (a, b) = ((r - d).abs(), r + d);
    let lo = a.max(support_lo);
    let hi = b.min(support_hi);
    if lo >= hi {
        return BallIntegral::exact(Extended::Finite(omega * full));
    }

    // t(u) = a + (b - a) sin^2(pi u / 2) clusters nodes at both ends of the
    // partial shell range, where the cap fraction has square-root behaviour.
    let width = b - a;
    let edges = |u: f64| {
        let (s, c) = (0.5 * PI * u).sin_cos();
        (width * s * s, width * c * c)
    };
    let u_of = |t: f64| {
        let s = ((t - a) / width).clamp(0.0, 1.0).sqrt();
        2.0 / PI * s.asin()
    };
    let dim = n as f64;
    let integrand = |u: f64| {
        let (e_lo, e_hi) = edges(u);
        let t = a + e_lo;
        if t <= 0.0 {
            return 0.0;
        }
        let val = f.eval(t);
        if val == 0.0 {
            return 0.0;
        }
        let jac = width * 0.5 * PI * (PI * u).sin();
        let frac = partial_cap_fraction(t, d, r, n, e_lo, e_hi);
        val.abs().powf(p) * t.powf(dim - 1.0) * frac * jac
    };

    let (u_lo, u_hi) = (u_of(lo), u_of(hi));
    let mut breaks = vec![u_lo];
    for pc in pieces {
        for edge in [pc.lo, pc.hi] {
            if edge > lo && edge < hi {
                breaks.push(u_of(edge));
            }
        }
    }
    breaks.push(u_hi);
    if lo == 0.0 {
        // shell range touches the origin (d == r): grade toward the singular end
        let first = breaks.get(1).copied().unwrap_or(u_hi);
        breaks.extend((1..=30).map(|k| first * 0.5f64.powi(k)));
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let quad = quadrature::integrate(
        integrand,
        &breaks,
        settings.rel_tol,
        settings.rel_tol * full,
        settings.max_subdivisions,
    );
    BallIntegral {
        value: Extended::Finite(omega * (full + quad.value)),
        abs_error: omega * quad.abs_error,
        converged: quad.converged,
    }
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

const MC_CHUNK: usize = 1 << 14;

/// Running mean and sum of squared deviations.
#[derive(Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.count == 0.0 {
            return other;
        }
        if other.count == 0.0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        Self {
            count,
            mean: self.mean + delta * other.count / count,
            m2: self.m2 + other.m2 + delta * delta * self.count * other.count / count,
        }
    }
}

/// Uniform sampling of `settings.mc_samples` points in the ball.
///
/// Samples are generated in fixed-size chunks, each with its own ChaCha
/// stream derived from `rng_seed`, and the chunk statistics are merged in
/// chunk order, so the result does not depend on the thread pool.
pub fn mc_integrate(
    f: &RadialFunction,
    p: f64,
    ball: Ball,
    n: u32,
    settings: &IntegrationSettings,
) -> McEstimate {
    let volume = VolumeConstants::new(n).ball_volume(ball.r);
    if f.is_zero() {
        return McEstimate { estimate: 0.0, std_error: 0.0 };
    }
    let total = settings.mc_samples;
    let chunks = total.div_ceil(MC_CHUNK);
    let dim = n as usize;
    let moments: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(settings.rng_seed);
            rng.set_stream(chunk as u64);
            let count = MC_CHUNK.min(total - chunk * MC_CHUNK);
            let mut m = Moments::default();
            let mut z = vec![0.0f64; dim];
            for _ in 0..count {
                let mut norm2 = 0.0;
                for zi in z.iter_mut() {
                    *zi = rng.sample(StandardNormal);
                    norm2 += *zi * *zi;
                }
                let u: f64 = rng.random();
                let rho = ball.r * u.powf(1.0 / n as f64) / norm2.sqrt();
                let x0 = ball.d + rho * z[0];
                let rest: f64 = z[1..].iter().map(|v| (rho * v).powi(2)).sum();
                let t = (x0 * x0 + rest).sqrt();
                m.push(f.eval(t).abs().powf(p));
            }
            m
        })
        .collect();
    let m = moments.into_iter().fold(Moments::default(), Moments::merge);
    let variance = if m.count > 1.0 { m.m2 / (m.count - 1.0) } else { 0.0 };
    McEstimate {
        estimate: volume * m.mean,
        std_error: volume * (variance / m.count).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pure(alpha: f64) -> RadialFunction {
        RadialFunction::power(0.0, f64::INFINITY, 1.0, alpha).unwrap()
    }

    fn settings() -> IntegrationSettings {
        IntegrationSettings::default()
    }

    #[test]
    fn centered_examples() {
        assert_eq!(integrate_abs_pow_centered(&pure(-0.5), 1.0, 1.0, 1), Extended::Finite(4.0));
        assert_eq!(integrate_abs_pow_centered(&pure(-1.0), 1.0, 3.0, 1), Extended::Infinite);
        let v = integrate_abs_pow_centered(&pure(-1.0), 1.0, 1.0, 2).to_f64();
        assert_relative_eq!(v, 2.0 * PI, max_relative = 1e-15);
    }

    #[test]
    fn centered_log_branch() {
        // alpha p + n = 0 away from the origin: ∫_1^e t^{-1} dt = 1 in n = 1
        let f = RadialFunction::power(1.0, f64::INFINITY, 1.0, -1.0).unwrap();
        let v = integrate_abs_pow_centered(&f, 1.0, std::f64::consts::E, 1).to_f64();
        assert_relative_eq!(v, 2.0, max_relative = 1e-15);
    }

    #[test]
    fn power_integral_near_zero_exponent() {
        for beta in [1e-12, -1e-9, 1e-6, 0.3, -2.5, 4.0] {
            let (a, b) = (0.5, 3.0);
            let quad = quadrature::integrate(|t: f64| t.powf(beta - 1.0), &[a, b], 1e-14, 0.0, 100);
            assert_relative_eq!(power_integral(beta, a, b), quad.value, max_relative = 1e-12);
        }
    }

    #[test]
    fn off_center_one_dimension() {
        let ball = Ball::new(2.0, 1.0).unwrap();
        let v = integrate_abs_pow_ball(&pure(-0.5), 1.0, ball, 1, &settings());
        assert_relative_eq!(v.value.to_f64(), 2.0 * (3f64.sqrt() - 1.0), max_relative = 1e-14);
    }

    #[test]
    fn constant_function_gives_ball_volume() {
        let f = RadialFunction::power(0.0, f64::INFINITY, -1.5, 0.0).unwrap();
        for n in 1..=5 {
            for &(d, r) in &[(0.0, 1.0), (0.3, 1.0), (1.0, 1.0), (2.5, 0.7), (0.2, 3.0)] {
                let ball = Ball::new(d, r).unwrap();
                let got = integrate_abs_pow_ball(&f, 2.0, ball, n, &settings());
                let expect = 2.25 * VolumeConstants::new(n).ball_volume(r);
                assert!(got.converged);
                assert_relative_eq!(got.value.to_f64(), expect, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn detects_singularity_inside_ball() {
        let f = pure(-1.0);
        for &(d, r) in &[(0.5, 1.0), (1.0, 1.0)] {
            let got = integrate_abs_pow_ball(&f, 2.0, Ball::new(d, r).unwrap(), 2, &settings());
            assert!(got.value.is_infinite());
        }
        let got = integrate_abs_pow_ball(&f, 2.0, Ball::new(1.5, 1.0).unwrap(), 2, &settings());
        assert!(!got.value.is_infinite());
    }

    #[test]
    fn origin_on_boundary_integrable() {
        // n = 2, f = |x|^{-1/2}, p = 1, ball through the origin: compare with a
        // direct polar-coordinate quadrature over the disc.
        let f = pure(-0.5);
        let ball = Ball::new(1.0, 1.0).unwrap();
        let got = integrate_abs_pow_ball(&f, 1.0, ball, 2, &settings());
        // In polar coordinates about the origin the disc is rho < 2 cos(phi).
        // ∫_{-pi/2}^{pi/2} ∫_0^{2cos phi} rho^{-1/2} rho drho dphi
        //   = ∫ (2/3)(2 cos phi)^{3/2} dphi
        let quad = quadrature::integrate(
            |phi: f64| 2.0 / 3.0 * (2.0 * phi.cos()).max(0.0).powf(1.5),
            &[-PI / 2.0, 0.0, PI / 2.0],
            1e-13,
            0.0,
            500,
        );
        assert!(got.converged);
        assert_relative_eq!(got.value.to_f64(), quad.value, max_relative = 1e-8);
    }

    #[test]
    fn zero_function() {
        let z = RadialFunction::zero();
        let ball = Ball::new(0.5, 1.0).unwrap();
        assert_eq!(integrate_abs_pow_ball(&z, 1.0, ball, 3, &settings()).value, Extended::Finite(0.0));
        assert_eq!(mc_integrate(&z, 1.0, ball, 3, &settings()), McEstimate { estimate: 0.0, std_error: 0.0 });
    }

    #[test]
    fn mc_constant_is_exact() {
        let one = RadialFunction::power(0.0, f64::INFINITY, 1.0, 0.0).unwrap();
        let s = IntegrationSettings { mc_samples: 50_000, ..settings() };
        let mc = mc_integrate(&one, 1.0, Ball::centered(1.0), 2, &s);
        assert_relative_eq!(mc.estimate, PI, max_relative = 1e-12);
        assert_eq!(mc.std_error, 0.0);
    }

    #[test]
    fn mc_matches_one_dimensional_example() {
        let s = IntegrationSettings { mc_samples: 200_000, rng_seed: 3, ..settings() };
        let mc = mc_integrate(&pure(-0.5), 1.0, Ball::new(2.0, 1.0).unwrap(), 1, &s);
        let exact = 2.0 * (3f64.sqrt() - 1.0);
        assert!((mc.estimate - exact).abs() < 3.0 * mc.std_error);
    }

    #[test]
    fn mc_independent_of_thread_count() {
        let f: RadialFunction = "0.5 2 1.5 -0.7; 2 inf -1 -1.2".parse().unwrap();
        let s = IntegrationSettings { mc_samples: 100_000, rng_seed: 11, ..settings() };
        let ball = Ball::new(1.0, 1.5).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mc_integrate(&f, 1.5, ball, 3, &s))
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }

    #[test]
    fn additivity_over_annuli() {
        let f: RadialFunction = "0 0.7 2 -0.3; 0.7 inf -1 -0.3".parse().unwrap();
        let whole = shell_integral(&f, 2.0, 3, 0.0, 5.0).to_f64();
        let parts: f64 = [(0.0, 0.4), (0.4, 0.7), (0.7, 2.2), (2.2, 5.0)]
            .iter()
            .map(|&(a, b)| shell_integral(&f, 2.0, 3, a, b).to_f64())
            .sum();
        assert_relative_eq!(whole, parts, max_relative = 1e-14);
    }
}

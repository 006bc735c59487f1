//! Live certification of the estimate chain.
//!
//! Every check produces a [`CheckReport`] whose slack is oriented so that
//! `slack >= -tolerance` means pass. Tolerances are fixed per check:
//! derivative identities are relative (1e-5 first, 1e-3 second), the
//! algebraic inequalities allow `1e-10` (Cauchy-Schwarz bounds) or `1e-9` (bounds chain)
//! of the larger side, and the monitored differential inequality allows the
//! local finite-difference truncation estimate.

use std::f64::consts::PI;
use std::fmt;

use crate::cli::ScenarioConfig;
use crate::criteria::{self, CriteriaInputs, CriteriaReport};
use rand::RngExt;

use crate::flowfield::{Flow, FluidState, SyntheticFlow, Vec3};
use crate::functionals::{self, FunctionalSample, PhiSpec};
use crate::matvol::{
    advect, boundary_distance_of, init_volume, MaterialVolume, QuadratureRule, Shape, VolumeShapeSpec,
};
use crate::solver::smoothness_guard;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub passed: bool,
    pub t: f64,
}

impl CheckReport {
    /// Report for `lhs <= rhs` with an absolute tolerance on the slack.
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64, t: f64) -> Self {
        let slack = rhs - lhs;
        Self {
            name: name.into(),
            lhs,
            rhs,
            slack,
            passed: slack >= -tolerance,
            t,
        }
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} t={} lhs={:e} rhs={:e} slack={:e} {}",
            self.name,
            self.t,
            self.lhs,
            self.rhs,
            self.slack,
            if self.passed { "pass" } else { "FAIL" }
        )
    }
}

/// Lemma checks at time `t`: the two derivative identities by central
/// differences of `G` along the flow, the Cauchy-Schwarz bound in generic
/// and sharp form, and the lower bound on `int |x|^(q-2) rho^gamma`.
///
/// The volume is traced to `t` first when needed. The last check needs a
/// power-law profile in the admissible range and `dist >= epsilon`; it is
/// omitted otherwise, as are the sharp forms for generic profiles.
pub fn check_lemma_suite(
    flow: &impl Flow,
    vol: &MaterialVolume,
    phi: &PhiSpec,
    t: f64,
    h: f64,
    epsilon: f64,
) -> Result<Vec<CheckReport>> {
    if !(h > 0.0) {
        return Err(Error::invalid("difference step must be positive"));
    }
    let here = if vol.time() == t {
        vol.clone()
    } else {
        vol.trace(flow, t, 1e-3)?
    };
    let fwd = here.trace(flow, t + h, h)?;
    let bwd = here.trace(flow, t - h, h)?;
    let s = functionals::sample(flow, &here, phi, epsilon)?;
    let g = |v: &MaterialVolume| v.volume_integral_mass(|x| phi.eval((x - v.x0()).norm()).0);
    let (gp, g0, gm) = (g(&fwd), s.g, g(&bwd));

    let mut out = Vec::new();
    let d1 = (gp - gm) / (2.0 * h);
    out.push(CheckReport::new(
        "lemma1_first",
        (d1 - s.f).abs(),
        1e-5 * s.f.abs().max(1e-12),
        0.0,
        t,
    ));
    let d2 = (gp - 2.0 * g0 + gm) / (h * h);
    let sum = s.second_derivative();
    out.push(CheckReport::new(
        "lemma1_second",
        (d2 - sum).abs(),
        1e-3 * sum.abs().max(1e-12),
        0.0,
        t,
    ));

    let f2 = s.f * s.f;
    let sup = functionals::lemma2_sup_ratio(&here, phi)?;
    let generic = sup * s.g * s.i1;
    out.push(CheckReport::new(
        "lemma2_generic",
        f2,
        generic,
        1e-10 * f2.max(generic),
        t,
    ));
    if let Some(q) = phi.exponent() {
        let sharp = functionals::sharp_constant(q) * s.g * s.i1;
        out.push(CheckReport::new(
            "lemma2_sharp",
            f2,
            sharp,
            1e-10 * f2.max(sharp),
            t,
        ));
        let printed = (q.abs() + 1.0) / q.abs() * s.g * s.i1;
        out.push(CheckReport::new(
            "lemma2_printed",
            f2,
            printed,
            1e-10 * f2.max(printed),
            t,
        ));
        if s.dist >= epsilon && epsilon > 0.0 {
            if let Some(r) = check_lemma3(flow, &here, q, s.g, epsilon)? {
                out.push(r);
            }
        }
    }
    Ok(out)
}

/// `int |x - x0|^(q-2) rho^gamma dx >= C1 G^gamma eps^-((q+n)(gamma-1)+2)`.
/// `None` when `q` is outside the admissible range.
pub fn check_lemma3(
    flow: &impl Flow,
    vol: &MaterialVolume,
    q: f64,
    g: f64,
    epsilon: f64,
) -> Result<Option<CheckReport>> {
    let (n, gamma) = (vol.dimension(), flow.gamma());
    let Ok(c) = criteria::constants(q, gamma, n, 0.0) else {
        return Ok(None);
    };
    let x0 = *vol.x0();
    let lhs = vol.volume_integral_plain(flow, |x, s| (x - x0).norm().powf(q - 2.0) * s.rho.powf(gamma))?;
    let rhs = lemma3_rhs(c.c1, g, q, gamma, n, epsilon);
    // holds with room; reported as rhs <= lhs
    Ok(Some(CheckReport::new(
        "lemma3",
        rhs,
        lhs,
        1e-10 * lhs.abs(),
        vol.time(),
    )))
}

pub fn lemma3_rhs(c1: f64, g: f64, q: f64, gamma: f64, n: usize, epsilon: f64) -> f64 {
    c1 * g.powf(gamma) * epsilon.powf(-((q + n as f64) * (gamma - 1.0) + 2.0))
}

/// The a priori bounds on one sample. Empty when `dist < epsilon`.
pub fn check_bounds_chain(s: &FunctionalSample) -> Vec<CheckReport> {
    let (q, eps) = (s.q, s.epsilon);
    if !(s.dist >= eps) || q.is_nan() {
        return Vec::new();
    }
    let aq = q.abs();
    let tol = |a: f64, b: f64| 1e-9 * a.abs().max(b.abs());
    let bound21 = aq * eps.powf(q - 1.0) * (2.0 * s.m * s.energy).sqrt();
    let i2 = 2.0 * aq * eps.powf(q - 2.0) * s.energy;
    let i4 = aq * eps.powf(q - 1.0) * s.reg.abs();
    let g = eps.powf(q) * s.m;
    vec![
        CheckReport::new("bound_F", s.f.abs(), bound21, tol(s.f, bound21), s.t),
        CheckReport::new("bound_I2", s.i2.abs(), i2, tol(s.i2, i2), s.t),
        CheckReport::new("bound_I4", s.i4.abs(), i4, tol(s.i4, i4), s.t),
        CheckReport::new("bound_G", s.g, g, tol(s.g, g), s.t),
    ]
}

/// Monitors `dF/dt >= k (F^2 - q^2 eps^(2q-2) Q(t))` with `Q(t)` from the
/// live `G`, at every interior sample of a uniformly spaced series.
pub fn check_inequality17(
    series: &[FunctionalSample],
    inp: &CriteriaInputs,
    c: f64,
) -> Result<Vec<CheckReport>> {
    if series.len() < 3 {
        return Err(Error::invalid("inequality monitor needs at least 3 samples"));
    }
    let dt = series[1].t - series[0].t;
    if !(dt > 0.0)
        || series
            .windows(2)
            .any(|w| ((w[1].t - w[0].t) - dt).abs() > 1e-9 * dt.max(1.0))
    {
        return Err(Error::invalid(
            "inequality monitor needs uniformly spaced samples",
        ));
    }
    let (q, eps) = (inp.q, inp.epsilon);
    let k = inp.rate();
    Ok(series
        .windows(3)
        .map(|w| {
            let (a, b, z) = (&w[0], &w[1], &w[2]);
            let d = (z.f - a.f) / (2.0 * dt);
            let live = criteria::q_value(inp, c, b.g);
            let rhs = k * (b.f * b.f - q * q * eps.powf(2.0 * q - 2.0) * live);
            let truncation = (z.f - 2.0 * b.f + a.f).abs() / dt;
            let tol = truncation + 1e-9 * (d.abs() + rhs.abs());
            // reported as rhs <= dF/dt
            CheckReport::new("inequality17", rhs, d, tol, b.t)
        })
        .collect())
}

/// Blow-up time of the comparison equation `dF/dt = k (F^2 - sgn(Q0) a^2)`:
/// closed form and an independent adaptive integration. Either is `None`
/// when `F` stays bounded.
pub fn blowup_oracle(f0: f64, q0: f64, inp: &CriteriaInputs) -> (Option<f64>, Option<f64>) {
    (blowup_closed_form(f0, q0, inp), blowup_numeric(f0, q0, inp))
}

fn sign_of(q0: f64, inp: &CriteriaInputs) -> f64 {
    if q0.abs() <= 1e-12 * inp.leading() {
        0.0
    } else {
        q0.signum()
    }
}

pub fn blowup_closed_form(f0: f64, q0: f64, inp: &CriteriaInputs) -> Option<f64> {
    let r0 = q0.abs().sqrt();
    let a = inp.equilibrium(r0);
    let lambda = inp.lambda(r0);
    let sign = sign_of(q0, inp);
    if sign > 0.0 {
        if f0 <= a {
            return None;
        }
        let kk = (f0 - a) / (f0 + a);
        Some((1.0 / kk).ln() / (2.0 * lambda))
    } else if sign == 0.0 {
        (f0 > 0.0).then(|| inp.q.abs() * inp.epsilon.powf(inp.q) * inp.m / ((inp.q.abs() + 1.0) * f0))
    } else {
        Some((PI / 2.0 - (f0 / a).atan()) * inp.epsilon * inp.m / ((inp.q.abs() + 1.0) * r0))
    }
}

pub fn blowup_numeric(f0: f64, q0: f64, inp: &CriteriaInputs) -> Option<f64> {
    let r0 = q0.abs().sqrt();
    let a = inp.equilibrium(r0);
    let sa2 = sign_of(q0, inp) * a * a;
    let k = inp.rate();
    let rise = a.max(f0.max(0.0));
    let t_max = if rise > 0.0 {
        2000.0 / (k * rise)
    } else if f0 != 0.0 {
        1e6 / (k * f0.abs())
    } else {
        return None;
    };
    let scale = a.max(f0.abs());
    let switch = 10.0 * scale;
    // phase 1: F(t) until it clears the switch level
    let (t_s, f_s, reached) = dopri5(
        |_, f| k * (f * f - sa2),
        0.0,
        f0,
        t_max,
        1e-13,
        1e-14 * scale,
        |_, f| f >= switch,
    );
    if !reached {
        return None;
    }
    // phase 2: t(u) with u = 1/F down to 1/(1e12 scale)
    let u_end = 1.0 / (1e12 * scale);
    let (_, t_end, _) = dopri5(
        |u, _| -1.0 / (k * (1.0 - sa2 * u * u)),
        1.0 / f_s,
        t_s,
        u_end,
        1e-13,
        1e-14 * t_s.abs().max(1.0 / (k * scale)),
        |_, _| false,
    );
    Some(t_end)
}

/// Scalar Dormand-Prince 5(4) with step-size control; stops at `x_end` or
/// after the first accepted step where `stop` holds. Returns the final
/// `(x, y, stopped)`.
fn dopri5(
    f: impl Fn(f64, f64) -> f64,
    mut x: f64,
    mut y: f64,
    x_end: f64,
    rtol: f64,
    atol: f64,
    stop: impl Fn(f64, f64) -> bool,
) -> (f64, f64, bool) {
    const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 6] = [
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let span = x_end - x;
    let dir = span.signum();
    let mut h = span * 1e-4;
    let mut k = [0.0; 7];
    k[0] = f(x, y);
    for _ in 0..10_000_000 {
        if (x_end - x) * dir <= 0.0 {
            break;
        }
        if (x + h - x_end) * dir > 0.0 {
            h = x_end - x;
        }
        for s in 0..6 {
            let inc: f64 = (0..=s).map(|j| A[s][j] * k[j]).sum();
            k[s + 1] = f(x + C[s] * h, y + h * inc);
        }
        let y_new = y + h * (0..6).map(|j| A[5][j] * k[j]).sum::<f64>();
        let err_abs = (h * (0..7).map(|j| E[j] * k[j]).sum::<f64>()).abs();
        let err = err_abs / (atol + rtol * y.abs().max(y_new.abs()));
        if err <= 1.0 && y_new.is_finite() {
            x += h;
            y = y_new;
            k[0] = k[6];
            if stop(x, y) {
                return (x, y, true);
            }
        }
        let factor = if err == 0.0 || !err.is_finite() {
            if y_new.is_finite() {
                5.0
            } else {
                0.2
            }
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    (x, y, false)
}

/// Closed form against integration as a check: both absent, or relative
/// gap at most 1e-6.
pub fn oracle_agreement(f0: f64, q0: f64, inp: &CriteriaInputs) -> CheckReport {
    match blowup_oracle(f0, q0, inp) {
        (Some(c), Some(n)) => CheckReport::new("blowup_oracle", (c - n).abs(), 1e-6 * c.abs(), 0.0, c),
        (None, None) => CheckReport::new("blowup_oracle", 0.0, 0.0, 0.0, f64::INFINITY),
        (c, n) => CheckReport::new(
            "blowup_oracle",
            f64::INFINITY,
            0.0,
            0.0,
            c.or(n).unwrap_or(f64::NAN),
        ),
    }
}

/// Random admissible oracle input `(F0, Q0, inputs)`, cycling through the
/// three sign cases. Preconditions: `F0 > a` for positive `Q0`, `F0 > 0`
/// for zero, `F0 >= 0` for negative.
pub fn random_oracle_case<R: RngExt + ?Sized>(rng: &mut R) -> (f64, f64, CriteriaInputs) {
    let q = rng.random_range(-12.0..-7.2);
    let epsilon = rng.random_range(0.3..2.0);
    let inp = CriteriaInputs {
        q,
        gamma: 1.4,
        n: 2,
        s0: 0.0,
        m: rng.random_range(0.5..5.0),
        energy: rng.random_range(0.5..5.0),
        m_reg: 0.0,
        epsilon,
        horizon: 1.0,
        g0: 0.0,
        cond10: 0.0,
        d_init: 2.0 * epsilon,
    };
    let (f0, q0) = match rng.random_range(0..3) {
        0 => {
            let q0: f64 = rng.random_range(0.01..2.0);
            let a = inp.equilibrium(q0.sqrt());
            (a * (1.0 + 10f64.powf(rng.random_range(-3.0..0.5))), q0)
        }
        1 => {
            let t: f64 = 10f64.powf(rng.random_range(-1.0..1.0));
            (1.0 / (inp.rate() * t), 0.0)
        }
        _ => {
            let q0: f64 = -rng.random_range(0.01..2.0);
            let a = inp.equilibrium(q0.abs().sqrt());
            (a * rng.random_range(0.0..3.0), q0)
        }
    };
    (f0, q0, inp)
}

/// Cauchy-Schwarz bound in generic and sharp form on a random volume moving in a random
/// smooth synthetic field, for a random power law and a random two-term
/// convex profile.
pub fn random_lemma2_case<R: RngExt + ?Sized>(rng: &mut R) -> Result<Vec<CheckReport>> {
    let markers = 64;
    let quadrature = QuadratureRule::TensorGauss { order: 8 };
    let shape = match rng.random_range(0..3) {
        0 => {
            let ang: f64 = rng.random_range(0.0..2.0 * PI);
            let d = rng.random_range(1.5..4.0);
            Shape::Disk {
                center: vec![d * ang.cos(), d * ang.sin()],
                radius: rng.random_range(0.2..1.0),
            }
        }
        1 => {
            let inner = rng.random_range(0.5..1.5);
            Shape::Annulus {
                center: vec![0.0, 0.0],
                inner,
                outer: inner + rng.random_range(0.2..1.5),
            }
        }
        _ => {
            let sides = rng.random_range(3..9);
            let c = [rng.random_range(1.5..3.0), rng.random_range(-2.0..2.0)];
            let rad = rng.random_range(0.3..1.0);
            let vertices = (0..sides)
                .map(|k| {
                    let a = 2.0 * PI * k as f64 / sides as f64;
                    let r = rad * rng.random_range(0.7..1.0);
                    [c[0] + r * a.cos(), c[1] + r * a.sin()]
                })
                .collect();
            Shape::Polygon { vertices }
        }
    };
    let spec = VolumeShapeSpec::single(shape, markers, quadrature);
    let m: [f64; 10] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    let flow = SyntheticFlow {
        dimension: 2,
        gamma: 1.4,
        entropy_floor: 0.0,
        field: move |_t: f64, x: &Vec3| FluidState {
            rho: 1.0 + 0.5 * (m[8] * x[0] + m[9] * x[1]).sin().powi(2),
            vel: Vec3::new(
                m[0] * x[0] + m[1] * x[1] + m[4] + m[6] * (2.0 * x[1]).sin(),
                m[2] * x[0] + m[3] * x[1] + m[5] + m[7] * (1.5 * x[0]).cos(),
                0.0,
            ),
            entropy: 0.0,
            pressure: 1.0,
        },
    };
    let vol = init_volume(&spec, &flow, Vec3::zeros(), 0.1)?;
    let vol = advect(&vol, &flow, rng.random_range(0.01..0.2), 0.01)?;
    let q = rng.random_range(-12.0..-0.5);
    let (q1, q2, beta) = (
        rng.random_range(-10.0..-0.5),
        rng.random_range(-10.0..-0.5),
        rng.random_range(0.1..3.0),
    );
    let generic = PhiSpec::radial(move |r: f64| {
        (
            r.powf(q1) + beta * r.powf(q2),
            q1 * r.powf(q1 - 1.0) + beta * q2 * r.powf(q2 - 1.0),
            q1 * (q1 - 1.0) * r.powf(q1 - 2.0) + beta * q2 * (q2 - 1.0) * r.powf(q2 - 2.0),
        )
    });
    let mut out = Vec::new();
    for phi in [PhiSpec::power(q)?, generic] {
        let s = functionals::sample(&flow, &vol, &phi, 0.1)?;
        let f2 = s.f * s.f;
        let rhs = functionals::lemma2_sup_ratio(&vol, &phi)? * s.g * s.i1;
        out.push(CheckReport::new(
            "lemma2_generic",
            f2,
            rhs,
            1e-10 * f2.max(rhs),
            s.t,
        ));
        if let Some(q) = phi.exponent() {
            let sharp = functionals::sharp_constant(q) * s.g * s.i1;
            out.push(CheckReport::new(
                "lemma2_sharp",
                f2,
                sharp,
                1e-10 * f2.max(sharp),
                s.t,
            ));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ConsistentHit,
    ConsistentNoClaim,
    InconclusiveEnergyDrift,
    SmoothnessLost,
    Violation,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::ConsistentHit => "consistent_hit",
            Verdict::ConsistentNoClaim => "consistent_no_claim",
            Verdict::InconclusiveEnergyDrift => "inconclusive_energy_drift",
            Verdict::SmoothnessLost => "smoothness_lost",
            Verdict::Violation => "VIOLATION",
        })
    }
}

#[derive(Debug, Clone)]
pub struct TheoremReport {
    pub inputs: CriteriaInputs,
    pub criteria: CriteriaReport,
    pub cond10_value: f64,
    pub cond10_holds: bool,
    pub hit_time: Option<f64>,
    pub horizon: f64,
    /// Last time the volume was advanced to.
    pub final_time: f64,
    pub e_drift: f64,
    pub reg_max: f64,
    pub verdict: Verdict,
    pub smoothness_note: Option<String>,
    pub series: Vec<FunctionalSample>,
    /// Live `Q(t)` at each sample.
    pub q_series: Vec<f64>,
    pub bound_checks: Vec<CheckReport>,
    pub inequality_checks: Vec<CheckReport>,
}

impl TheoremReport {
    pub fn failed_checks(&self) -> usize {
        self.bound_checks
            .iter()
            .chain(&self.inequality_checks)
            .filter(|c| !c.passed)
            .count()
    }
}

fn lost_smoothness(e: &Error) -> bool {
    matches!(
        e,
        Error::OutOfDomain { .. }
            | Error::NonPositiveDensity { .. }
            | Error::NotFinite(_)
            | Error::Cfl { .. }
    )
}

/// Runs flow and volume to the horizon or the first time the boundary
/// comes within `epsilon` of `x0`, sampling every `stride` steps.
pub fn run_theorem_scenario(config: &ScenarioConfig) -> Result<TheoremReport> {
    let mut flow = config.build_flow()?;
    let eps = config.epsilon;
    let vol0 = init_volume(&config.volume, &flow, config.x0, eps)?;
    let phi = PhiSpec::power(config.q)?;
    let s0 = functionals::sample(&flow, &vol0, &phi, eps)?;
    let cond10 = criteria::condition10(&vol0, &flow, config.q)?;
    let inputs = CriteriaInputs {
        q: config.q,
        gamma: flow.gamma(),
        n: flow.dimension(),
        s0: flow.entropy_floor(),
        m: s0.m,
        energy: s0.energy,
        m_reg: config.m_reg,
        epsilon: eps,
        horizon: config.horizon,
        g0: s0.g,
        cond10,
        d_init: s0.dist,
    };
    let report = criteria::evaluate(&inputs)?;
    let c = report.constants.c;

    let steps = (config.horizon / config.dt).round().max(1.0) as usize;
    let h = config.horizon / steps as f64;
    let stride = config.stride.max(1);
    let mut series = vec![s0];
    let mut hit_time = None;
    let mut note = None;
    let mut vol = vol0;

    for k in 1..=steps {
        let t_next = k as f64 * h;
        if let Err(e) = flow.advance_to(t_next) {
            if lost_smoothness(&e) {
                note = Some(e.to_string());
                break;
            }
            return Err(e);
        }
        if let (Some(th), Some(grid)) = (config.smoothness, flow.latest_grid()) {
            let sm = smoothness_guard(grid, th);
            if !sm.ok {
                note = Some(format!("gradient {} exceeds {th}", sm.max_grad));
                break;
            }
        }
        let next = match advect(&vol, &flow, t_next, h) {
            Ok(v) => v,
            Err(e) if lost_smoothness(&e) => {
                note = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        };
        if next.boundary_distance() <= eps {
            hit_time = Some(refine_hit(&vol, &flow, t_next, eps, h / 100.0)?);
            vol = next;
            break;
        }
        vol = next;
        if k % stride == 0 {
            match functionals::sample_with_floor(&flow, &vol, &phi, eps, config.floor) {
                Ok(s) => series.push(s),
                Err(Error::AttainedTarget { t, .. }) => {
                    hit_time = Some(t);
                    break;
                }
                Err(e) => return Err(e),
            }
        }
    }

    let e0 = series[0].energy;
    let e_drift = series
        .iter()
        .map(|s| ((s.energy - e0) / e0).abs())
        .fold(0.0, f64::max);
    let reg_max = series.iter().map(|s| s.reg.abs()).fold(0.0, f64::max);
    let q_series = series
        .iter()
        .map(|s| criteria::q_value(&inputs, c, s.g))
        .collect();
    let bound_checks = series.iter().flat_map(check_bounds_chain).collect();
    let inequality_checks = if series.len() >= 3 {
        check_inequality17(&series, &inputs, c)?
    } else {
        Vec::new()
    };

    let cond10_holds = report.cond10_holds;
    let verdict = if hit_time.is_some() {
        Verdict::ConsistentHit
    } else if note.is_some() {
        Verdict::SmoothnessLost
    } else if !cond10_holds || reg_max > config.m_reg {
        Verdict::ConsistentNoClaim
    } else if e_drift > 0.01 {
        Verdict::InconclusiveEnergyDrift
    } else {
        Verdict::Violation
    };

    Ok(TheoremReport {
        inputs,
        criteria: report,
        cond10_value: cond10,
        cond10_holds,
        hit_time,
        horizon: config.horizon,
        final_time: vol.time(),
        e_drift,
        reg_max,
        verdict,
        smoothness_note: note,
        series,
        q_series,
        bound_checks,
        inequality_checks,
    })
}

/// Bisection on the marker trajectory between `vol.time()` (outside) and
/// `t_hi` (inside) down to `tol`; returns the midpoint of the final bracket.
fn refine_hit(vol: &MaterialVolume, flow: &impl Flow, t_hi: f64, eps: f64, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (vol.time(), t_hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let b = vol.trace_boundary(flow, mid)?;
        if boundary_distance_of(&b, vol.x0()) <= eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

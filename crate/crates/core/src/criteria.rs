//! Threshold algebra: constants, `Q`/`R`, case classification, the `delta`
//! threshold, the condition integral and the necessary conditions.
//!
//! Every formula here uses values at `t = 0`. The comparison equation
//! behind the thresholds is
//!
//! ```text
//! dF/dt >= k (F^2 - a^2 sgn(Q)),   k = (|q|+1) / (|q| eps^q m),
//!                                  a = |q| eps^(q-1) R
//! ```
//!
//! Dividing the ingredient inequality of `F'` by `eps^(q-2)` brings the
//! `rho^gamma` lower-bound term to the power `eps^-(q gamma + n(gamma-1))` that appears in
//! `Q`, which is why that power is used verbatim.

use std::f64::consts::PI;
use std::fmt;

use crate::flowfield::Flow;
use crate::matvol::MaterialVolume;
use crate::numerics::{cot, coth};
use crate::{Error, Result};

/// Surface measure of the unit sphere in dimension `n`.
pub fn sigma_n(n: usize) -> Result<f64> {
    match n {
        2 => Ok(2.0 * PI),
        3 => Ok(4.0 * PI),
        _ => Err(Error::invalid(format!("dimension must be 2 or 3, got {n}"))),
    }
}

/// Exclusive upper limit for admissible `q`: `-n - 2/(gamma - 1)`.
pub fn q_limit(n: usize, gamma: f64) -> f64 {
    -(n as f64) - 2.0 / (gamma - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub sigma_n: f64,
    pub c1: f64,
    pub c3: f64,
    pub c: f64,
}

pub fn constants(q: f64, gamma: f64, n: usize, s0: f64) -> Result<Constants> {
    let sigma_n = sigma_n(n)?;
    if !(gamma > 1.0) {
        return Err(Error::invalid(format!("gamma must exceed 1, got {gamma}")));
    }
    let limit = q_limit(n, gamma);
    if !(q < limit) {
        return Err(Error::invalid(format!("q = {q} must be below {limit}")));
    }
    let pole = (q + n as f64) * (gamma - 1.0) + 2.0;
    let c1 = (sigma_n * (1.0 - gamma) / pole).powf(1.0 - gamma);
    let c3 = s0.exp();
    Ok(Constants {
        sigma_n,
        c1,
        c3,
        c: c1 * c3,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriteriaInputs {
    pub q: f64,
    pub gamma: f64,
    pub n: usize,
    pub s0: f64,
    pub m: f64,
    pub energy: f64,
    /// Pressure-regularity constant.
    pub m_reg: f64,
    pub epsilon: f64,
    /// Smoothness horizon.
    pub horizon: f64,
    pub g0: f64,
    pub cond10: f64,
    pub d_init: f64,
}

impl CriteriaInputs {
    pub fn validate(&self) -> Result<()> {
        sigma_n(self.n)?;
        let limit = q_limit(self.n, self.gamma);
        let checks = [
            (self.gamma > 1.0, "gamma must exceed 1"),
            (self.q < limit, "q is outside the admissible range"),
            (self.epsilon > 0.0, "epsilon must be positive"),
            (
                self.epsilon < self.d_init,
                "epsilon must be below the initial boundary distance",
            ),
            (self.m_reg >= 0.0, "regularity constant must be non-negative"),
            (self.horizon > 0.0, "horizon must be positive"),
            (self.m > 0.0, "mass must be positive"),
            (self.energy > 0.0, "energy must be positive"),
            (self.g0 >= 0.0, "G(0) must be non-negative"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::invalid(msg));
            }
        }
        Ok(())
    }

    /// `2 m E / (1 + |q|)`.
    pub fn leading(&self) -> f64 {
        2.0 * self.m * self.energy / (1.0 + self.q.abs())
    }

    /// `(|q|+1) R / (eps m)`.
    pub fn lambda(&self, r0: f64) -> f64 {
        (self.q.abs() + 1.0) * r0 / (self.epsilon * self.m)
    }

    /// Rate constant `k` of the comparison equation.
    pub fn rate(&self) -> f64 {
        (self.q.abs() + 1.0) / (self.q.abs() * self.epsilon.powf(self.q) * self.m)
    }

    /// Equilibrium level `a = |q| eps^(q-1) R`.
    pub fn equilibrium(&self, r0: f64) -> f64 {
        self.q.abs() * self.epsilon.powf(self.q - 1.0) * r0
    }
}

/// `Q` evaluated with an arbitrary `G` (the live value for monitoring).
pub fn q_value(inp: &CriteriaInputs, c: f64, g: f64) -> f64 {
    let n = inp.n as f64;
    let (q, gamma, eps) = (inp.q, inp.gamma, inp.epsilon);
    let lemma3 = (q + n - 2.0).abs() * c * g.powf(gamma) / (2.0 * inp.energy)
        * eps.powf(-(q * gamma + n * (gamma - 1.0)));
    inp.leading() * (1.0 + eps * inp.m_reg / (2.0 * inp.energy) - lemma3)
}

pub fn q_and_r(inp: &CriteriaInputs, c: f64) -> (f64, f64) {
    let q0 = q_value(inp, c, inp.g0);
    (q0, q0.abs().sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    Qpos,
    Qzero,
    QnegLongT,
    QnegShortT,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::Qpos => "Qpos",
            Case::Qzero => "Qzero",
            Case::QnegLongT => "Qneg_longT",
            Case::QnegShortT => "Qneg_shortT",
        })
    }
}

/// `pi eps m / (2 (|q|+1) R)`: where the cotangent argument reaches `pi/2`.
pub fn negative_case_threshold(inp: &CriteriaInputs, r0: f64) -> f64 {
    PI * inp.epsilon * inp.m / (2.0 * (inp.q.abs() + 1.0) * r0)
}

pub fn classify(inp: &CriteriaInputs, q0: f64, r0: f64) -> Case {
    if q0.abs() <= 1e-12 * inp.leading() {
        Case::Qzero
    } else if q0 > 0.0 {
        Case::Qpos
    } else if inp.horizon >= negative_case_threshold(inp, r0) {
        Case::QnegLongT
    } else {
        Case::QnegShortT
    }
}

pub fn classify_and_delta(inp: &CriteriaInputs, q0: f64, r0: f64) -> Result<(Case, f64)> {
    let case = classify(inp, q0, r0);
    Ok((case, delta_in_case(inp, case, r0)?))
}

/// The threshold formula of `case`, evaluated regardless of whether the
/// classification would pick it.
pub fn delta_in_case(inp: &CriteriaInputs, case: Case, r0: f64) -> Result<f64> {
    let (q, eps, t) = (inp.q, inp.epsilon, inp.horizon);
    let delta = match case {
        Case::Qpos => -eps.powf(q - 1.0) * r0 * coth(inp.lambda(r0) * t),
        Case::Qzero => -eps.powf(q) * inp.m / ((q.abs() + 1.0) * t),
        Case::QnegLongT => 0.0,
        Case::QnegShortT => {
            let arg = inp.lambda(r0) * t;
            let k = (arg / PI).round();
            if k >= 1.0 && (arg - k * PI).abs() <= 1e-12 * arg.max(1.0) {
                return Err(Error::Degenerate(format!(
                    "cotangent argument {arg} is a multiple of pi"
                )));
            }
            -eps.powf(q - 1.0) * r0 * cot(arg)
        }
    };
    Ok(delta)
}

/// `int |x - x0|^(q-2) (V0, x - x0) rho0` over the initial volume.
pub fn condition10(vol: &MaterialVolume, flow: &impl Flow, q: f64) -> Result<f64> {
    if vol.time() != 0.0 {
        return Err(Error::invalid(format!(
            "condition integral needs the initial volume, got t={}",
            vol.time()
        )));
    }
    let x0 = *vol.x0();
    let states = vol.node_states(flow)?;
    Ok(vol.mass_sum_with(&states, |x, s| {
        let y = x - x0;
        y.norm().powf(q - 2.0) * s.vel.dot(&y)
    }))
}

/// One side-by-side comparison `lhs < rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inequality {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

impl Inequality {
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn holds(&self) -> bool {
        self.lhs < self.rhs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NecessaryReport {
    pub ok: bool,
    /// The inequality that decides `ok`, absent when it holds vacuously.
    pub primary: Option<Inequality>,
    /// Small-`R` bound, informational (positive case only).
    pub small_r: Option<Inequality>,
}

/// Compatibility of condition (10) with the a priori bound on `|F|`.
pub fn necessary_conditions(inp: &CriteriaInputs, q0: f64, r0: f64) -> NecessaryReport {
    let root = (2.0 * inp.m * inp.energy).sqrt();
    let (eps, t, m) = (inp.epsilon, inp.horizon, inp.m);
    let lam_t = inp.lambda(r0) * t;
    let primary = match classify(inp, q0, r0) {
        Case::Qpos => Some(Inequality {
            name: "coth",
            lhs: coth(lam_t),
            rhs: root / r0,
        }),
        Case::Qzero => Some(Inequality {
            name: "zero",
            lhs: eps / ((inp.q.abs() + 1.0) * t) * (m / (2.0 * inp.energy)).sqrt(),
            rhs: 1.0,
        }),
        Case::QnegShortT => Some(Inequality {
            name: "cot",
            lhs: cot(lam_t),
            rhs: root / r0,
        }),
        Case::QnegLongT => None,
    };
    let small_r = (q0 > 0.0 && primary.is_some_and(|p| p.name == "coth")).then(|| Inequality {
        name: "small_r",
        lhs: r0,
        rhs: root - eps * m / ((1.0 + inp.q.abs()) * t),
    });
    NecessaryReport {
        ok: primary.is_none_or(|p| p.holds()),
        primary,
        small_r,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriteriaReport {
    pub constants: Constants,
    pub q0: f64,
    pub r0: f64,
    pub case: Case,
    pub delta: f64,
    pub cond10: f64,
    pub cond10_holds: bool,
    pub necessary: NecessaryReport,
}

/// Full evaluation from validated inputs.
pub fn evaluate(inp: &CriteriaInputs) -> Result<CriteriaReport> {
    inp.validate()?;
    let constants = constants(inp.q, inp.gamma, inp.n, inp.s0)?;
    let (q0, r0) = q_and_r(inp, constants.c);
    let (case, delta) = classify_and_delta(inp, q0, r0)?;
    Ok(CriteriaReport {
        constants,
        q0,
        r0,
        case,
        delta,
        cond10: inp.cond10,
        cond10_holds: inp.cond10 < delta,
        necessary: necessary_conditions(inp, q0, r0),
    })
}
